//! Log-domain helpers for factorial/power expressions that overflow `f64`.

use std::sync::OnceLock;

const LN_TABLE_LEN: usize = 171; // 170! is the largest factorial representable in f64

fn ln_factorial_table() -> &'static [f64; LN_TABLE_LEN] {
    static TABLE: OnceLock<[f64; LN_TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0f64; LN_TABLE_LEN];
        // Kahan-compensated running sum of ln k keeps the table accurate to ~1 ulp.
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for n in 1..LN_TABLE_LEN {
            let term = (n as f64).ln() - comp;
            let next = sum + term;
            comp = (next - sum) - term;
            sum = next;
            t[n] = sum;
        }
        t
    })
}

/// ln(n!), exact-table for n ≤ 170, Stirling series beyond.
pub fn ln_factorial(n: u64) -> f64 {
    if (n as usize) < LN_TABLE_LEN {
        return ln_factorial_table()[n as usize];
    }
    // Stirling with three correction terms; the truncation error at n ≥ 171
    // is below 1e-19 in the log, far under f64 resolution.
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x + 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

/// ln(x) that maps 0 to -inf without panicking on negatives in release builds.
pub fn ln_nonneg(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    x.ln()
}

pub const LN_10: f64 = std::f64::consts::LN_10;

/// Convert a natural-log magnitude to log10.
pub fn ln_to_log10(ln_value: f64) -> f64 {
    ln_value / LN_10
}

/// exp(ln_value), or None when the result would not be a finite f64.
pub fn exp_checked(ln_value: f64) -> Option<f64> {
    if ln_value > f64::MAX.ln() {
        None
    } else {
        Some(ln_value.exp())
    }
}
