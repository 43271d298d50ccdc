//! Log-gamma: Lanczos for small arguments, Stirling series above.

use crate::error::{domain, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Godfrey's coefficients for g = 607/128, n = 15.
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_746,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_8e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_6e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

/// Bernoulli-number coefficients B_{2k} / (2k (2k-1)) of the Stirling series.
const STIRLING: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
];

const STIRLING_CUTOFF: f64 = 10.0;

/// Natural log of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("log_gamma requires finite x > 0, got {x}"));
    }
    Ok(log_gamma_unchecked(x))
}

pub(crate) fn log_gamma_unchecked(x: f64) -> f64 {
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    if x < 0.5 {
        return log_gamma_unchecked(x + 1.0) - x.ln();
    }
    if x >= STIRLING_CUTOFF {
        return stirling(x);
    }
    lanczos(x)
}

fn lanczos(x: f64) -> f64 {
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    HALF_LN_2PI + (z + 0.5) * t.ln() - t + acc.ln()
}

fn stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv;
    for c in STIRLING {
        series += c * pow;
        pow *= inv2;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series
}

/// `ln B(a, b)`.
pub(crate) fn log_beta(a: f64, b: f64) -> f64 {
    log_gamma_unchecked(a) + log_gamma_unchecked(b) - log_gamma_unchecked(a + b)
}

/// Checks `(d/2)^{1/2} <= Γ(1 + d/2) / Γ(1/2 + d/2) <= ((d+1)/2)^{1/2}`
/// in log space with slack `-1e-12`.
pub fn gamma_ratio_bounds_hold(d: u64) -> Result<bool> {
    if d == 0 {
        return domain("gamma_ratio_bounds_hold requires d >= 1");
    }
    let (lo, mid, hi) = gamma_ratio_sides(d);
    Ok(mid - lo >= -1e-12 && hi - mid >= -1e-12)
}

/// `(ln lower, ln ratio, ln upper)` for the gamma-ratio sandwich.
pub(crate) fn gamma_ratio_sides(d: u64) -> (f64, f64, f64) {
    let h = d as f64 / 2.0;
    let mid = log_gamma_unchecked(1.0 + h) - log_gamma_unchecked(0.5 + h);
    (0.5 * h.ln(), mid, 0.5 * (h + 0.5).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use num_traits::{One, ToPrimitive};

    fn ln_factorial_exact(n: u32) -> f64 {
        let mut acc = BigUint::one();
        for k in 2..=n {
            acc *= k;
        }
        // Split off a power of two so the mantissa fits in f64 for large n.
        let bits = acc.bits();
        let shift = bits.saturating_sub(60);
        let top = (&acc >> shift).to_f64().unwrap();
        top.ln() + shift as f64 * std::f64::consts::LN_2
    }

    #[test]
    fn trivial_values() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert_eq!(log_gamma(2.0).unwrap(), 0.0);
        let half = log_gamma(0.5).unwrap();
        assert!((half - 0.572_364_942_924_700_1).abs() < 1e-15);
    }

    #[test]
    fn matches_big_integer_factorials() {
        for n in [3u32, 7, 9, 10, 11, 25, 100, 170, 1000, 5000] {
            let exact = ln_factorial_exact(n);
            let got = log_gamma(n as f64 + 1.0).unwrap();
            let rel = ((got - exact) / exact).abs();
            assert!(rel < 1e-13, "n={n}: got {got}, exact {exact}, rel {rel:e}");
        }
    }

    #[test]
    fn half_integers_via_duplication() {
        // Γ(n + 1/2) = (2n)! √π / (4^n n!)
        for n in [1u32, 4, 9, 20, 60] {
            let exact = ln_factorial_exact(2 * n) + 0.5 * std::f64::consts::PI.ln()
                - (n as f64) * 4f64.ln()
                - ln_factorial_exact(n);
            let got = log_gamma(n as f64 + 0.5).unwrap();
            assert!(((got - exact) / exact).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn continuity_across_stirling_cutoff() {
        let below = lanczos(STIRLING_CUTOFF);
        let above = stirling(STIRLING_CUTOFF);
        assert!(((below - above) / above).abs() < 1e-14);
    }

    #[test]
    fn recurrence_at_large_arguments() {
        for x in [12.3, 1234.5, 9.99e5] {
            let lhs = log_gamma(x + 1.0).unwrap();
            let rhs = log_gamma(x).unwrap() + f64::ln(x);
            assert!(((lhs - rhs) / lhs).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn gamma_ratio_small_d() {
        assert!(gamma_ratio_bounds_hold(1).unwrap());
        assert!(gamma_ratio_bounds_hold(2).unwrap());
        assert!(gamma_ratio_bounds_hold(10_000).unwrap());
        assert!(gamma_ratio_bounds_hold(0).is_err());
        // d = 2: Γ(2)/Γ(3/2) = 2/√π
        let (_, mid, _) = gamma_ratio_sides(2);
        assert!((mid - (2.0 / std::f64::consts::PI.sqrt()).ln()).abs() < 1e-15);
    }
}
