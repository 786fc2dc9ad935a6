//! The `bosonlearn` command line: instance generation, learning, verification, invariants,
//! noise sweeps and sample budgets.
//!
//! Exit codes: 0 success, 2 usage, 3 learner failure, 4 verification incompatibility,
//! 5 invariant input error. `BM_LOG` sets the diagnostic level on stderr.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::{self, MomentSet, WitnessJson};
use crate::io::{ComplexJson, ComplexMatrixJson, RealMatrixJson};
use crate::learner::{self, ActiveResultJson, PassiveResultJson};
use crate::linalg::{self, C64};
use crate::measurement::{self, BudgetInputs, Transform};
use crate::moments::{self, FockVector, LadderOp, NoiseModel, NoiseSpec};
use crate::oracle::{self, TruncatedState};
use crate::symplectic::{self, PassiveUnitary, SymplecticMatrix};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_LEARNER: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;
pub const EXIT_INVARIANTS: i32 = 5;

/// Largest photon number for which the permanent oracle is consulted.
const ORACLE_MAX_PHOTONS: u64 = 20;

#[derive(Debug, Parser)]
#[command(name = "bosonlearn", version, about = "Learn Gaussian-evolved Fock states from their moments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Passive,
    Active,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random instance `U|f⟩`.
    Gen {
        #[arg(long)]
        n: usize,
        /// Occupations, comma separated.
        #[arg(long)]
        f: FockVector,
        #[arg(long, value_enum, default_value = "passive")]
        mode: Mode,
        /// Cap on `ln ‖S‖` for active instances.
        #[arg(long, default_value_t = 1.0)]
        s_max: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learn an instance from exact or noisy moments.
    Learn {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        eps1: f64,
        #[arg(long, default_value_t = 0.0)]
        eps2: f64,
        #[arg(long, default_value = "gaussian-entry")]
        noise_model: NoiseModel,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a learned result against its instance.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        result: PathBuf,
    },
    /// Invariant table for one state, or a convertibility witness for two.
    Invariants {
        /// Instance or superposition JSON.
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: Option<PathBuf>,
        /// Largest total degree `|s|`.
        #[arg(long, default_value_t = 4)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Passive bound-compliance sweep, written as CSV.
    Sweep {
        /// Mode counts for constant-occupation grids.
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        /// Constant occupations `b` (combined with every `n`).
        #[arg(long, value_delimiter = ',')]
        b: Vec<u32>,
        /// Explicit occupation vectors, separated by `;` (each sets its own `n`).
        #[arg(long, value_delimiter = ';')]
        f: Vec<FockVector>,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        /// Number of seeds per grid point, starting at `seed_start`.
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        seed_start: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Record wall-clock time per trial (makes the CSV run-dependent).
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample budgets for the passive or active learner.
    Budget {
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        f_max: u64,
        /// Total photon number (passive only).
        #[arg(long)]
        l1: Option<u64>,
        /// Squeezing `ln ‖S‖` (active only).
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        #[arg(long, default_value_t = 0)]
        alpha: u32,
        #[arg(long, default_value_t = 0)]
        beta: u32,
        #[arg(long, default_value_t = 1)]
        c1: u64,
        #[arg(long, default_value_t = 1)]
        c2: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A command failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl ToString) -> Self {
        Self { code, message: message.to_string() }
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn usage(e: impl ToString) -> Failure {
    Failure::new(EXIT_USAGE, e)
}

/// Gaussian transform stored in an instance file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TransformJson {
    Passive { matrix: ComplexMatrixJson },
    Active { matrix: RealMatrixJson },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMetadata {
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_max: Option<f64>,
    pub generator: String,
}

/// A learning instance `U|f⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub n: usize,
    pub f: FockVector,
    pub transform: TransformJson,
    pub seed: u64,
    pub metadata: InstanceMetadata,
}

impl Instance {
    pub fn generate(n: usize, f: FockVector, mode: Mode, s_max: f64, seed: u64) -> Result<Self> {
        if f.n() != n {
            return Err(Error::DimensionMismatch { expected: n, got: f.n() });
        }
        if n == 0 {
            return Err(Error::PreconditionViolated("n must be positive".into()));
        }
        let (transform, s_cap) = match mode {
            Mode::Passive => (TransformJson::Passive { matrix: symplectic::random_passive(n, seed).to_json() }, None),
            Mode::Active => {
                if !(s_max.is_finite() && s_max >= 0.0) {
                    return Err(Error::PreconditionViolated("s-max must be finite and nonnegative".into()));
                }
                (TransformJson::Active { matrix: symplectic::random_symplectic(n, s_max, seed).to_json() }, Some(s_max))
            }
        };
        Ok(Self {
            n,
            f,
            transform,
            seed,
            metadata: InstanceMetadata { mode, s_max: s_cap, generator: "bosonlearn gen".into() },
        })
    }

    /// Decodes and validates the transform.
    pub fn transform(&self) -> Result<Transform> {
        let t = match &self.transform {
            TransformJson::Passive { matrix } => Transform::Passive(PassiveUnitary::from_json(matrix)?),
            TransformJson::Active { matrix } => Transform::Active(SymplecticMatrix::from_json(matrix)?),
        };
        if t.n() != self.n || self.f.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: t.n() });
        }
        Ok(t)
    }

    pub fn symplectic(&self) -> Result<SymplecticMatrix> {
        Ok(match self.transform()? {
            Transform::Passive(w) => symplectic::passive_embed(&w),
            Transform::Active(s) => s,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionTerm {
    pub occ: Vec<u32>,
    pub amp: ComplexJson,
}

/// `Σ amp|occ⟩`, normalised on load, optionally followed by a Gaussian unitary and then by
/// annihilation operators on the listed modes (renormalising after each).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Superposition {
    pub terms: Vec<SuperpositionTerm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symplectic: Option<RealMatrixJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub annihilate: Vec<usize>,
    /// Per-mode Fock cutoff for the simulation; chosen automatically if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
}

impl Superposition {
    pub fn to_state(&self) -> Result<TruncatedState> {
        let terms: Vec<(FockVector, C64)> =
            self.terms.iter().map(|t| (FockVector::new(t.occ.clone()), C64::new(t.amp.re, t.amp.im))).collect();
        let top = terms.iter().map(|(f, _)| f.f_max() as usize).max().unwrap_or(0);
        let default_cutoff = if self.symplectic.is_some() { top + 40 } else { top + 7 };
        let mut state = TruncatedState::superposition(&terms, self.cutoff.unwrap_or(default_cutoff))?;
        if let Some(s) = &self.symplectic {
            state = state.evolve(&SymplecticMatrix::from_json(s)?)?;
        }
        for &mode in &self.annihilate {
            state = state.apply_and_normalize(LadderOp::a(mode))?;
        }
        Ok(state)
    }
}

/// Moments up to degree 4 of an instance or superposition file.
pub fn load_moment_set(path: &Path) -> Result<MomentSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Invalid(e.to_string()))?;
    if value.get("terms").is_some() {
        let sup: Superposition = serde_json::from_value(value).map_err(|e| Error::Invalid(e.to_string()))?;
        MomentSet::from_state(&sup.to_state()?, 4)
    } else {
        let inst: Instance = serde_json::from_value(value).map_err(|e| Error::Invalid(e.to_string()))?;
        MomentSet::fock(&inst.f, 4)?.transform(&inst.symplectic()?)
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> CmdResult {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(usage)
        }
    }
}

fn to_json_string<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

/// Summary of one learning run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnSummary {
    pub g: Vec<u32>,
    pub residual_aligned: f64,
    /// `None` when the bound does not apply (or has no constants).
    pub bound: Option<f64>,
    pub bound_note: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reconstruction_residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum LearnOutput {
    Passive {
        #[serde(flatten)]
        result: PassiveResultJson,
        summary: LearnSummary,
    },
    Active {
        #[serde(flatten)]
        result: ActiveResultJson,
        summary: LearnSummary,
    },
    Failed {
        error: String,
    },
}

/// Residual bound applicable to a passive run, with a note on why.
pub fn passive_bound(f: &FockVector, n: usize, eps1: f64, eps2: f64) -> (Option<f64>, String) {
    let occ = f.occupations();
    let b = occ[0];
    if occ.iter().all(|&x| x == b) && eps1 == 0.0 {
        if b == 0 {
            return (None, "vacuum: every unitary is admissible".into());
        }
        let valid = eps2 <= (b as f64 + 1.0) / (4.0 * 5f64.sqrt() * (n * n) as f64);
        if !valid {
            return (None, "bound not applicable: epsilon beyond the validity range".into());
        }
        (Some(learner::constant_occupation_bound(eps2, n, b)), "constant occupation".into())
    } else {
        (Some(learner::general_occupation_bound(eps1, eps2, n, f.f_max())), "general occupation".into())
    }
}

/// Learns an instance from moments perturbed by `eps1`, `eps2`.
pub fn learn_instance(inst: &Instance, eps1: f64, eps2: f64, model: NoiseModel, seed: u64) -> Result<LearnOutput> {
    let n1 = NoiseSpec { epsilon: eps1, model, seed };
    let n2 = NoiseSpec { epsilon: eps2, model, seed: seed.wrapping_add(1) };
    match inst.transform()? {
        Transform::Passive(w) => {
            let (s1, s2) = moments::sigma_state(&w, &inst.f)?;
            let res = learner::find_v_fock(&moments::add_noise(&s1, &n1), &moments::add_noise(&s2, &n2))?;
            let (w_sorted, f_sorted) = learner::sort_by_occupation(&w, &inst.f);
            let residual = if res.g == f_sorted {
                learner::align_unitary(&res.v, &w_sorted, &res.g)?.residual
            } else {
                f64::INFINITY
            };
            let (bound, note) = passive_bound(&inst.f, inst.n, eps1, eps2);
            let summary = LearnSummary {
                g: res.g.occupations().to_vec(),
                residual_aligned: residual,
                bound,
                bound_note: note,
                reconstruction_residual: None,
            };
            Ok(LearnOutput::Passive { result: res.to_json(), summary })
        }
        Transform::Active(s) => {
            let (l1, l2) = moments::lambda_state(&s, &inst.f)?;
            let (m1, m2) = (moments::add_noise(&l1, &n1), moments::add_noise(&l2, &n2));
            let res = learner::find_q(&m1, &m2)?;
            let (s_sorted, f_sorted) = learner::sort_symplectic_by_occupation(&s, &inst.f);
            let residual = if res.g == f_sorted {
                learner::align_symplectic(&res.q, &s_sorted, &res.g)?.residual
            } else {
                f64::INFINITY
            };
            let (r1, r2) = learner::reconstruct_lambda(&res.q, &res.g)?;
            let rel = |a: &linalg::CMat, b: &linalg::CMat| linalg::op_norm(&(a - b)) / linalg::op_norm(b).max(f64::MIN_POSITIVE);
            let recon = rel(&r1.entries, &l1.entries).max(rel(&r2.entries, &l2.entries));
            let summary = LearnSummary {
                g: res.g.occupations().to_vec(),
                residual_aligned: residual,
                bound: None,
                bound_note: "active: the error bound has no explicit constants".into(),
                reconstruction_residual: Some(recon),
            };
            Ok(LearnOutput::Active { result: res.to_json(), summary })
        }
    }
}

/// Verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symplectic_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moment_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Deserialize)]
struct ResultHeader {
    mode: String,
    #[serde(rename = "V")]
    v: Option<ComplexMatrixJson>,
    #[serde(rename = "Q")]
    q: Option<RealMatrixJson>,
    g: Option<Vec<u32>>,
}

fn incompatible(e: impl ToString) -> Failure {
    Failure::new(EXIT_VERIFY, e)
}

/// Compares a learned result with the instance it came from.
pub fn verify(inst: &Instance, result_json: &serde_json::Value) -> std::result::Result<VerifyReport, Failure> {
    let header: ResultHeader = serde_json::from_value(result_json.clone()).map_err(incompatible)?;
    let g = FockVector::new(header.g.clone().ok_or_else(|| incompatible("result has no g"))?);
    if g.n() != inst.n {
        return Err(incompatible(format!("result has {} modes, instance {}", g.n(), inst.n)));
    }
    match (inst.transform().map_err(incompatible)?, header.mode.as_str()) {
        (Transform::Passive(w), "passive") => {
            let v = PassiveUnitary::from_json(header.v.as_ref().ok_or_else(|| incompatible("result has no V"))?)
                .map_err(incompatible)?;
            if v.n() != inst.n {
                return Err(incompatible("V has the wrong size"));
            }
            if inst.f.l1() > ORACLE_MAX_PHOTONS {
                return Ok(VerifyReport {
                    mode: Mode::Passive,
                    fidelity: None,
                    symplectic_defect: None,
                    moment_residual: None,
                    note: Some(format!("more than {ORACLE_MAX_PHOTONS} photons: permanent oracle skipped")),
                });
            }
            let (fidelity, note) = match oracle::passive_fidelity(&w, &inst.f, &v, &g) {
                Ok(x) => (x, None),
                Err(e @ Error::PhotonNumberMismatch(..)) => (0.0, Some(e.to_string())),
                Err(e) => return Err(incompatible(e)),
            };
            Ok(VerifyReport { mode: Mode::Passive, fidelity: Some(fidelity), symplectic_defect: None, moment_residual: None, note })
        }
        (Transform::Active(s), "active") => {
            let qj = header.q.as_ref().ok_or_else(|| incompatible("result has no Q"))?;
            let qm = qj.to_matrix().map_err(incompatible)?;
            if qm.nrows() != 2 * inst.n {
                return Err(incompatible("Q has the wrong size"));
            }
            let defect = symplectic::symplectic_defect(&qm);
            let q = SymplecticMatrix::new(qm).map_err(incompatible)?;
            let (l1, l2) = moments::lambda_state(&s, &inst.f).map_err(incompatible)?;
            let (r1, r2) = learner::reconstruct_lambda(&q, &g).map_err(incompatible)?;
            let rel = |a: &linalg::CMat, b: &linalg::CMat| linalg::op_norm(&(a - b)) / linalg::op_norm(b);
            let resid = rel(&r1.entries, &l1.entries).max(rel(&r2.entries, &l2.entries));
            Ok(VerifyReport {
                mode: Mode::Active,
                fidelity: None,
                symplectic_defect: Some(defect),
                moment_residual: Some(resid),
                note: None,
            })
        }
        (_, m) => Err(incompatible(format!("result mode {m:?} does not match the instance"))),
    }
}

/// Invariant table entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableEntry {
    pub spec: invariants::InvariantSpec,
    pub value: invariants::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessReport {
    /// `"witness-found"` or `"none-up-to-budget"`.
    pub status: String,
    pub budget: usize,
    pub witness: Option<WitnessJson>,
}

/// One row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub seed: u64,
    pub n: usize,
    pub f: FockVector,
    pub eps1: f64,
    pub eps2: f64,
    pub residual_aligned: Option<f64>,
    pub bound_value: Option<f64>,
    pub bound_holds: Option<bool>,
    pub fidelity_oracle: Option<f64>,
    pub wall_time_ms: Option<f64>,
    pub error: Option<String>,
}

pub const SWEEP_HEADER: [&str; 11] = [
    "seed",
    "n",
    "f",
    "eps1",
    "eps2",
    "residual_aligned",
    "bound_value",
    "bound_holds",
    "fidelity_oracle",
    "wall_time_ms",
    "error",
];

fn fmt_f(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

impl SweepRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.seed.to_string(),
            self.n.to_string(),
            self.f.encode(),
            format!("{:.16e}", self.eps1),
            format!("{:.16e}", self.eps2),
            fmt_f(self.residual_aligned),
            fmt_f(self.bound_value),
            self.bound_holds.map(|b| b.to_string()).unwrap_or_default(),
            fmt_f(self.fidelity_oracle),
            fmt_f(self.wall_time_ms),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

/// One passive sweep trial: random `W` from `seed`, moments perturbed by `eps` on both orders.
/// Floating-point slack on bound checks; at zero noise the bound is exactly 0.
pub const BOUND_ROUNDOFF: f64 = 1e-10;

/// One sweep trial.
pub fn sweep_trial(f: &FockVector, eps: f64, seed: u64, timing: bool) -> SweepRow {
    let start = Instant::now();
    let n = f.n();
    let mut row = SweepRow {
        seed,
        n,
        f: f.clone(),
        eps1: eps,
        eps2: eps,
        residual_aligned: None,
        bound_value: None,
        bound_holds: None,
        fidelity_oracle: None,
        wall_time_ms: None,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let w = symplectic::random_passive(n, seed);
        let (s1, s2) = moments::sigma_state(&w, f)?;
        let noise_seed = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ 0x5eed;
        let constant = f.occupations().iter().all(|&x| x == f.occupations()[0]);
        // A constant-occupation run only perturbs σ^(2), matching its bound.
        let eps1 = if constant { 0.0 } else { eps };
        row.eps1 = eps1;
        let m1 = moments::add_noise(&s1, &NoiseSpec::gaussian(eps1, noise_seed));
        let m2 = moments::add_noise(&s2, &NoiseSpec::gaussian(eps, noise_seed.wrapping_add(1)));
        let res = learner::find_v_fock(&m1, &m2)?;
        let (w_sorted, f_sorted) = learner::sort_by_occupation(&w, f);
        if res.g != f_sorted {
            return Err(Error::Invalid(format!("recovered g={} differs from f", res.g.encode())));
        }
        let residual = learner::align_unitary(&res.v, &w_sorted, &res.g)?.residual;
        let (bound, _) = passive_bound(f, n, eps1, eps);
        row.residual_aligned = Some(residual);
        row.bound_value = bound;
        row.bound_holds = bound.map(|b| residual <= b + BOUND_ROUNDOFF);
        if f.l1() <= ORACLE_MAX_PHOTONS {
            row.fidelity_oracle = Some(oracle::passive_fidelity(&w, f, &res.v, &res.g)?);
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        row.error = Some(e.to_string());
        row.bound_holds = Some(false);
    }
    if timing {
        row.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    row
}

/// Runs a sweep grid on `threads` workers; rows come back sorted by `(n, f, eps, seed)`.
pub fn run_sweep(fs: &[FockVector], eps: &[f64], seeds: std::ops::Range<u64>, threads: usize, timing: bool) -> Result<Vec<SweepRow>> {
    let mut trials = Vec::new();
    for f in fs {
        for &e in eps {
            for seed in seeds.clone() {
                trials.push((f.clone(), e, seed));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Invalid(e.to_string()))?;
    let mut rows: Vec<SweepRow> =
        pool.install(|| trials.par_iter().map(|(f, e, seed)| sweep_trial(f, *e, *seed, timing)).collect());
    rows.sort_by(|a, b| {
        (a.n, a.f.occupations(), a.eps2, a.seed)
            .partial_cmp(&(b.n, b.f.occupations(), b.eps2, b.seed))
            .expect("finite eps")
    });
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(mut out: W, rows: &[SweepRow]) -> Result<()> {
    let io = |e: std::io::Error| Error::Invalid(e.to_string());
    writeln!(out, "# schema=1").map_err(io)?;
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Invalid(e.to_string());
    w.write_record(SWEEP_HEADER).map_err(err)?;
    for r in rows {
        w.write_record(r.record()).map_err(err)?;
    }
    w.flush().map_err(io)
}

fn init_logging() {
    let level = std::env::var("BM_LOG").unwrap_or_else(|_| "error".into());
    let _ = env_logger::Builder::new()
        .parse_filters(&level)
        .target(env_logger::Target::Stderr)
        .try_init();
}

/// Parses `args` (including the program name) and runs the command, returning the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Command) -> CmdResult {
    match cmd {
        Command::Gen { n, f, mode, s_max, seed, out } => {
            let inst = Instance::generate(n, f, mode, s_max, seed).map_err(usage)?;
            info!("generated {mode:?} instance with n={n}");
            emit(&out, &to_json_string(&inst))
        }
        Command::Learn { instance, eps1, eps2, noise_model, seed, out } => {
            if !(eps1 >= 0.0 && eps2 >= 0.0 && eps1.is_finite() && eps2.is_finite()) {
                return Err(usage("eps1 and eps2 must be finite and nonnegative"));
            }
            let inst: Instance = read_json(&instance).map_err(usage)?;
            match learn_instance(&inst, eps1, eps2, noise_model, seed) {
                Ok(output) => {
                    emit(&out, &to_json_string(&output))?;
                    let summary = match &output {
                        LearnOutput::Passive { summary, .. } | LearnOutput::Active { summary, .. } => summary,
                        LearnOutput::Failed { .. } => unreachable!("failures are returned as errors"),
                    };
                    let bound = summary.bound.map_or_else(|| summary.bound_note.clone(), |b| format!("{b:.6e} ({})", summary.bound_note));
                    let line = format!(
                        "g={} residual_aligned={:.6e} bound={}{}",
                        FockVector::new(summary.g.clone()).encode(),
                        summary.residual_aligned,
                        bound,
                        summary.reconstruction_residual.map(|r| format!(" reconstruction={r:.6e}")).unwrap_or_default()
                    );
                    if out.is_some() {
                        println!("{line}");
                    } else {
                        eprintln!("{line}");
                    }
                    Ok(())
                }
                Err(e) => {
                    let code = match e {
                        Error::InsufficientColumns { .. } | Error::RoundingAmbiguous(_) | Error::NegativeOccupation(_) => {
                            EXIT_LEARNER
                        }
                        Error::NonUnitaryInput(_) | Error::NotSymplectic(_) | Error::DimensionMismatch { .. } => EXIT_USAGE,
                        _ => EXIT_LEARNER,
                    };
                    if code == EXIT_LEARNER {
                        emit(&out, &to_json_string(&LearnOutput::Failed { error: e.to_string() }))?;
                    }
                    Err(Failure::new(code, e))
                }
            }
        }
        Command::Verify { instance, result } => {
            let inst: Instance = read_json(&instance).map_err(incompatible)?;
            let res: serde_json::Value = read_json(&result).map_err(incompatible)?;
            let report = verify(&inst, &res)?;
            emit(&None, &to_json_string(&report))
        }
        Command::Invariants { a, b, budget, out } => {
            let code = |e: Error| Failure::new(EXIT_INVARIANTS, e);
            if budget > invariants::MAX_TOTAL_DEGREE {
                return Err(usage(format!("budget is capped at {}", invariants::MAX_TOTAL_DEGREE)));
            }
            let sa = load_moment_set(&a).map_err(code)?;
            match b {
                None => {
                    let table = invariants::invariant_table(&sa, budget).map_err(code)?;
                    let entries: Vec<TableEntry> =
                        table.iter().map(|v| TableEntry { spec: v.spec.clone(), value: v.value.to_json() }).collect();
                    emit(&out, &to_json_string(&entries))
                }
                Some(b) => {
                    let sb = load_moment_set(&b).map_err(code)?;
                    let w = invariants::convertibility_witness(&sa, &sb, budget).map_err(code)?;
                    debug!("witness search done: {}", w.is_some());
                    let report = WitnessReport {
                        status: if w.is_some() { "witness-found".into() } else { "none-up-to-budget".into() },
                        budget,
                        witness: w.map(|w| w.to_json()),
                    };
                    emit(&out, &to_json_string(&report))
                }
            }
        }
        Command::Sweep { n, b, f, eps, seeds, seed_start, threads, timing, out } => {
            let mut fs: Vec<FockVector> = Vec::new();
            for &nn in &n {
                for &bb in &b {
                    fs.push(FockVector::constant(nn, bb));
                }
            }
            fs.extend(f);
            if fs.is_empty() || eps.is_empty() || seeds == 0 {
                return Err(usage("the sweep grid is empty"));
            }
            if fs.iter().any(|f| f.n() == 0) || eps.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
                return Err(usage("invalid grid values"));
            }
            let rows = run_sweep(&fs, &eps, seed_start..seed_start + seeds, threads, timing).map_err(usage)?;
            let mut buf = Vec::new();
            write_sweep_csv(&mut buf, &rows).map_err(usage)?;
            emit(&out, std::str::from_utf8(&buf).expect("utf-8"))?;
            let holds = rows.iter().filter(|r| r.bound_holds == Some(true)).count();
            let applicable = rows.iter().filter(|r| r.bound_holds.is_some()).count();
            let msg = format!("bound holds in {holds}/{applicable} trials ({} rows)", rows.len());
            if out.is_some() {
                println!("{msg}");
            } else {
                eprintln!("{msg}");
            }
            Ok(())
        }
        Command::Budget { mode, n, f_max, l1, s, alpha, beta, c1, c2, out } => {
            let (budget, inputs) = match mode {
                Mode::Passive => {
                    let l1 = l1.ok_or_else(|| usage("--l1 is required for passive budgets"))?;
                    let b = measurement::sample_budget_passive(n, f_max, l1, alpha, c1, c2).map_err(usage)?;
                    let inputs = BudgetInputs { mode: "passive".into(), n, f_max, l1: Some(l1), s: None, alpha, beta: 0, c1, c2 };
                    (b, inputs)
                }
                Mode::Active => {
                    let b = measurement::sample_budget_active(n, f_max, s, alpha, beta, c1, c2).map_err(usage)?;
                    let inputs = BudgetInputs { mode: "active".into(), n, f_max, l1: None, s: Some(s), alpha, beta, c1, c2 };
                    (b, inputs)
                }
            };
            emit(&out, &to_json_string(&budget.to_json(inputs)))
        }
    }
}
