//! Dense linear-algebra helpers shared by every module.
//!
//! Everything here is a thin layer over `nalgebra`: sorted eigendecompositions,
//! the operator norm, polar projection and a few tensor-product utilities.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type RMat = DMatrix<f64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Dimension above which the operator norm switches from a full SVD to power iteration.
const POWER_METHOD_DIM: usize = 256;

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

pub fn real_part(m: &CMat) -> RMat {
    m.map(|z| z.re)
}

pub fn imag_part(m: &CMat) -> RMat {
    m.map(|z| z.im)
}

pub fn kron_c(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_r(a: &RMat, b: &RMat) -> RMat {
    a.kronecker(b)
}

/// The SWAP operator on `C^d ⊗ C^d`, with composite index `i * d + j`.
pub fn swap_matrix(d: usize) -> CMat {
    let mut s = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            s[(i * d + j, j * d + i)] = ONE;
        }
    }
    s
}

/// Largest singular value of a complex matrix.
pub fn op_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    if m.nrows().max(m.ncols()) < POWER_METHOD_DIM {
        return m.clone().singular_values().max();
    }
    power_norm(m)
}

pub fn op_norm_r(m: &RMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    if m.nrows().max(m.ncols()) < POWER_METHOD_DIM {
        return m.clone().singular_values().max();
    }
    power_norm(&to_complex(m))
}

/// Power iteration on `M†M` with a deterministic start vector.
fn power_norm(m: &CMat) -> f64 {
    let n = m.ncols();
    let mut v = CVec::from_fn(n, |i, _| C64::new(1.0 + 0.01 * i as f64, 0.1 * ((i % 7) as f64)));
    v /= C64::new(v.norm(), 0.0);
    let mh = m.adjoint();
    let mut last = 0.0;
    for _ in 0..20_000 {
        let w = &mh * (m * &v);
        let nrm = w.norm();
        if nrm == 0.0 {
            return 0.0;
        }
        v = w / C64::new(nrm, 0.0);
        let est = nrm.sqrt();
        if (est - last).abs() <= 1e-12 * est {
            return est;
        }
        last = est;
    }
    last
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let h = hermitize(m);
    let eig = SymmetricEigen::new(h);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
pub fn eigh_r(m: &RMat) -> (Vec<f64>, RMat) {
    let s = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(s);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = RMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Eigenvalues of a general complex square matrix via the complex Schur form.
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![m[(0, 0)]];
    }
    let (_, t) = Schur::new(m.clone()).unpack();
    let scale = t.norm().max(1e-300);
    let mut out = Vec::with_capacity(n);
    let mut k = 0;
    while k < n {
        if k + 1 < n && t[(k + 1, k)].norm() > 1e-14 * scale {
            // Unreduced 2x2 block.
            let (a, b, c, d) = (t[(k, k)], t[(k, k + 1)], t[(k + 1, k)], t[(k + 1, k + 1)]);
            let tr = a + d;
            let det = a * d - b * c;
            let disc = (tr * tr - 4.0 * det).sqrt();
            out.push((tr + disc) * 0.5);
            out.push((tr - disc) * 0.5);
            k += 2;
        } else {
            out.push(t[(k, k)]);
            k += 1;
        }
    }
    out
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

pub fn hermitian_defect(m: &CMat) -> f64 {
    (m - m.adjoint()).norm()
}

/// Nearest unitary in every unitarily invariant norm: `U V†` from the SVD.
pub fn nearest_unitary(m: &CMat) -> CMat {
    let svd = SVD::new(m.clone(), true, true);
    let u = svd.u.expect("left singular vectors requested");
    let vt = svd.v_t.expect("right singular vectors requested");
    u * vt
}

pub fn nearest_orthogonal(m: &RMat) -> RMat {
    let svd = SVD::new(m.clone(), true, true);
    let u = svd.u.expect("left singular vectors requested");
    let vt = svd.v_t.expect("right singular vectors requested");
    u * vt
}

pub fn unitarity_defect(m: &CMat) -> f64 {
    let n = m.ncols();
    (m.adjoint() * m - CMat::identity(n, n)).norm()
}

/// Symmetric square root and inverse square root of a positive-definite matrix.
pub fn sqrt_and_inv_sqrt(m: &RMat) -> (RMat, RMat) {
    let (vals, vecs) = eigh_r(m);
    let n = vals.len();
    let d = RMat::from_diagonal(&DVector::from_iterator(n, vals.iter().map(|v| v.sqrt())));
    let di = RMat::from_diagonal(&DVector::from_iterator(n, vals.iter().map(|v| 1.0 / v.sqrt())));
    let vt = vecs.transpose();
    (&vecs * d * &vt, &vecs * di * &vt)
}

/// Block-diagonal composition of square complex matrices.
pub fn block_diag(blocks: &[CMat]) -> CMat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((off, off), (k, k)).copy_from(b);
        off += k;
    }
    out
}

/// Solves the square assignment problem minimising total cost (Hungarian algorithm).
///
/// Returns `assign[row] = col`.
pub fn min_cost_assignment(cost: &RMat) -> Vec<usize> {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols(), "assignment needs a square cost matrix");
    if n == 0 {
        return Vec::new();
    }
    // 1-based potentials formulation.
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

/// Calls `visit` with every permutation of `0..n` (Heap's algorithm).
pub fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    visit(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}
