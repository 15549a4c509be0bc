//! Fisher's exact test for 2x2 contingency tables.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("degenerate margins: a row or column sums to zero")]
    DegenerateMargins,
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Two-sided Fisher exact p-value for the table [[a, b], [c, d]]: the sum of
/// hypergeometric probabilities of every table with the same margins whose
/// probability does not exceed the observed one (within relative tolerance
/// 1e-12).
pub fn fisher_exact(table: [[u64; 2]; 2]) -> Result<f64, StatsError> {
    let [[a, b], [c, d]] = table;
    let r1 = a + b;
    let r2 = c + d;
    let c1 = a + c;
    let c2 = b + d;
    if r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0 {
        return Err(StatsError::DegenerateMargins);
    }
    let n = r1 + r2;
    let ln_denom = ln_choose(n, c1);
    let pmf = |k: u64| (ln_choose(r1, k) + ln_choose(r2, c1 - k) - ln_denom).exp();
    let k_min = c1.saturating_sub(r2);
    let k_max = r1.min(c1);
    let p_obs = pmf(a);
    let cutoff = p_obs * (1.0 + 1e-12);
    let mut p = 0.0;
    for k in k_min..=k_max {
        let pk = pmf(k);
        if pk <= cutoff {
            p += pk;
        }
    }
    Ok(p.min(1.0))
}
