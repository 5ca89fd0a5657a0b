//! Globally adaptive Gauss–Kronrod (10/21) quadrature on finite, semi-infinite
//! and doubly infinite domains.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::QuadratureConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Finite(f64, f64),
    /// `[a, ∞)`
    SemiInfinite(f64),
    /// `(-∞, ∞)`
    Whole,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    resabs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut e = err.abs();
    if resasc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / resasc).powf(1.5);
        e = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * resabs);
    }
    e
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = 0.0;
    let mut res_k = WGK[10] * fc;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    #[allow(clippy::needless_range_loop)]
    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g += WG[j] * (f1 + f2);
        res_k += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    if !value.is_finite() {
        return Err(Error::Domain(format!("integrand is not finite on [{a:e}, {b:e}]")));
    }
    let resabs = res_abs * half.abs();
    let resasc = res_asc * half.abs();
    let error = rescale_error((res_k - res_g) * half, resabs, resasc);
    Ok(Panel {
        a,
        b,
        value,
        error,
        resabs,
    })
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, initial: &[(f64, f64)], cfg: &QuadratureConfig) -> Result<Estimate> {
    let mut heap = BinaryHeap::with_capacity(initial.len() * 4);
    let mut frozen: Vec<Panel> = Vec::new();
    let mut evaluations = 0usize;
    for &(a, b) in initial {
        if b > a {
            heap.push(gk21(f, a, b)?);
            evaluations += 21;
        }
    }
    let mut count = heap.len();

    let totals = |heap: &BinaryHeap<Panel>, frozen: &[Panel]| {
        let mut v = 0.0;
        let mut e = 0.0;
        let mut abs = 0.0;
        for p in heap.iter().chain(frozen.iter()) {
            v += p.value;
            e += p.error;
            abs += p.resabs;
        }
        (v, e, abs)
    };

    loop {
        let (value, error, resabs) = totals(&heap, &frozen);
        let tol = cfg
            .abs_tol
            .max(cfg.rel_tol * value.abs())
            .max(100.0 * f64::EPSILON * resabs);
        if error <= tol {
            return Ok(Estimate {
                value,
                error,
                evaluations,
            });
        }
        let Some(worst) = heap.pop() else {
            // every remaining panel is at machine resolution
            if error <= 1e3 * tol {
                return Ok(Estimate {
                    value,
                    error,
                    evaluations,
                });
            }
            return Err(Error::numeric("adaptive quadrature (roundoff limit)", value, error));
        };
        if count >= cfg.max_subdivisions {
            return Err(Error::numeric(
                format!("adaptive quadrature after {count} subdivisions"),
                value,
                error,
            ));
        }
        let mid = 0.5 * (worst.a + worst.b);
        let width = worst.b - worst.a;
        if width <= 4.0 * f64::EPSILON * worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE)
            || mid <= worst.a
            || mid >= worst.b
        {
            frozen.push(worst);
            continue;
        }
        heap.push(gk21(f, worst.a, mid)?);
        heap.push(gk21(f, mid, worst.b)?);
        evaluations += 42;
        count += 1;
    }
}

/// Integrate `f` over `domain` to the tolerances in `cfg`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, domain: Domain, cfg: &QuadratureConfig) -> Result<Estimate> {
    match domain {
        Domain::Finite(a, b) => {
            if !(a.is_finite() && b.is_finite()) {
                return Err(Error::invalid("domain", "finite domain needs finite endpoints"));
            }
            if a == b {
                return Ok(Estimate {
                    value: 0.0,
                    error: 0.0,
                    evaluations: 0,
                });
            }
            if b < a {
                let est = integrate(f, Domain::Finite(b, a), cfg)?;
                return Ok(Estimate {
                    value: -est.value,
                    ..est
                });
            }
            adaptive(&f, &[(a, b)], cfg)
        }
        Domain::SemiInfinite(a) => {
            if !a.is_finite() {
                return Err(Error::invalid("domain", "lower limit must be finite"));
            }
            let g = |u: f64| {
                let w = 1.0 - u;
                let x = a + u / w;
                let fx = f(x);
                if fx == 0.0 {
                    0.0
                } else {
                    fx / (w * w)
                }
            };
            adaptive(&g, &uniform_pieces(0.0, 1.0, 16), cfg)
        }
        Domain::Whole => {
            let g = |u: f64| {
                let w = 1.0 - u * u;
                let x = u / w;
                let fx = f(x);
                if fx == 0.0 {
                    0.0
                } else {
                    fx * (1.0 + u * u) / (w * w)
                }
            };
            adaptive(&g, &uniform_pieces(-1.0, 1.0, 16), cfg)
        }
    }
}

/// Integrate over `[points[0], points[last]]`, starting from the given breakpoints.
pub fn integrate_breaks<F: Fn(f64) -> f64>(f: F, points: &[f64], cfg: &QuadratureConfig) -> Result<Estimate> {
    if points.len() < 2 {
        return Err(Error::invalid("points", "need at least two breakpoints"));
    }
    if points.windows(2).any(|w| !(w[1] >= w[0])) || points.iter().any(|p| !p.is_finite()) {
        return Err(Error::invalid("points", "breakpoints must be finite and sorted"));
    }
    let pieces: Vec<(f64, f64)> = points.windows(2).map(|w| (w[0], w[1])).collect();
    adaptive(&f, &pieces, cfg)
}

/// `∫_0^∞ f(s) ds` through the substitution `s = e^x`.
///
/// Suited to integrands with power-law behavior at both ends (integrable
/// singularities at 0, algebraic tails). Contributions from `s` outside
/// `[e^-700, e^700]` are taken as zero.
pub fn integrate_log<F: Fn(f64) -> f64>(f: F, cfg: &QuadratureConfig) -> Result<Estimate> {
    integrate(
        |x: f64| {
            if !(-700.0..=700.0).contains(&x) {
                return 0.0;
            }
            let s = x.exp();
            let v = f(s);
            if v == 0.0 {
                0.0
            } else {
                v * s
            }
        },
        Domain::Whole,
        cfg,
    )
}

fn uniform_pieces(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / n as f64;
    (0..n)
        .map(|i| {
            let lo = a + h * i as f64;
            let hi = if i + 1 == n { b } else { a + h * (i + 1) as f64 };
            (lo, hi)
        })
        .collect()
}
