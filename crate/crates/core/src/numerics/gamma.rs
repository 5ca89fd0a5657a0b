#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    a
}

/// Gamma function on the real line (poles return ±∞ or NaN at non-positive integers).
pub fn gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == x.floor() && x <= 0.0 {
        return f64::NAN;
    }
    // exact factorials keep Γ(n+1) = n! bit-exact for small n
    if x == x.floor() && x <= 23.0 {
        let mut acc = 1.0;
        let mut k = 2.0;
        while k < x {
            acc *= k;
            k += 1.0;
        }
        return acc;
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    if x > 171.7 {
        return f64::INFINITY;
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    // split the power to avoid overflow near the top of the range
    let half = t.powf(0.5 * (z + 0.5));
    (2.0 * PI).sqrt() * half * (half * (-t).exp()) * lanczos_sum(z)
}

/// Natural log of |Γ(x)|.
pub fn ln_gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == x.floor() && x <= 0.0 {
        return f64::INFINITY;
    }
    if x < 0.5 {
        return (PI / (PI * x).sin().abs()).ln() - ln_gamma(1.0 - x);
    }
    if x < 20.0 {
        return gamma(x).abs().ln();
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_and_factorials() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-12 * PI.sqrt());
        let mut fact = 1.0;
        for n in 0..=10u32 {
            if n > 0 {
                fact *= n as f64;
            }
            let g = gamma(n as f64 + 1.0);
            assert!((g - fact).abs() <= 1e-12 * fact, "n={n}: {g} vs {fact}");
        }
    }

    #[test]
    fn recurrence_and_reflection() {
        for &x in &[0.1, 0.3, 0.75, 1.5, 2.25, 7.3, 13.9, 40.2] {
            let lhs = gamma(x + 1.0);
            let rhs = x * gamma(x);
            assert!((lhs - rhs).abs() <= 1e-13 * rhs.abs(), "x={x}");
        }
        for &x in &[0.1, 0.25, 0.4] {
            let prod = gamma(x) * gamma(1.0 - x);
            let expect = PI / (PI * x).sin();
            assert!((prod - expect).abs() <= 1e-13 * expect);
        }
        assert!((gamma(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn log_gamma_matches() {
        for &x in &[0.2, 1.0, 3.5, 19.9, 20.1, 55.5, 170.0] {
            let direct = gamma(x).ln();
            assert!((ln_gamma(x) - direct).abs() < 1e-12 * direct.abs().max(1.0), "x={x}");
        }
        // Stirling check far out
        let x: f64 = 1e6;
        let stirling = (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x);
        assert!((ln_gamma(x) - stirling).abs() < 1e-6);
    }

    #[test]
    fn poles() {
        assert!(gamma(0.0).is_nan());
        assert!(gamma(-3.0).is_nan());
        assert!(ln_gamma(-2.0).is_infinite());
    }
}
