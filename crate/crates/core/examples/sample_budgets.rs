//! Sample budgets that guarantee the learners' accuracy, as exact integers.

use bosonic_moments::measurement;

fn main() -> bosonic_moments::Result<()> {
    for n in [2u64, 4, 8] {
        let b = measurement::sample_budget_passive(n, 2, n, 1, 1, 1)?;
        println!("passive n={n}: N1={} N2={}", b.n1, b.n2);
    }
    for s in [0.0, 0.5] {
        let b = measurement::sample_budget_active(2, 1, s, 1, 0, 1, 1)?;
        println!("active n=2 s={s}: N1 has {} digits, N2={}", b.n1.to_string().len(), b.n2);
    }
    Ok(())
}
