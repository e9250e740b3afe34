//! Adaptive Gauss–Kronrod quadrature for complex-valued integrands on finite
//! intervals with user-supplied breakpoints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::pauli::C64;

#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
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

/// Stopping rule for [`integrate`]: accept once the error estimate is below
/// `max(abs, rel·|I|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-10,
            rel: 1e-8,
            max_intervals: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: C64,
    pub error: f64,
}

struct Piece {
    a: f64,
    b: f64,
    value: C64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn scaled_error(diff: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = diff.abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && err < floor {
        err = floor;
    }
    err
}

fn kronrod21<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> Piece {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut values = [C64::new(0.0, 0.0); 21];
    values[0] = f(center);
    for j in 0..10 {
        let dx = half * XGK[j];
        values[1 + 2 * j] = f(center - dx);
        values[2 + 2 * j] = f(center + dx);
    }
    let mut kronrod = values[0] * WGK[10];
    let mut gauss = C64::new(0.0, 0.0);
    for j in 0..10 {
        let pair = values[1 + 2 * j] + values[2 + 2 * j];
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut abs_re = WGK[10] * values[0].re.abs();
    let mut abs_im = WGK[10] * values[0].im.abs();
    let mut asc_re = WGK[10] * (values[0].re - mean.re).abs();
    let mut asc_im = WGK[10] * (values[0].im - mean.im).abs();
    for j in 0..10 {
        let (l, r) = (values[1 + 2 * j], values[2 + 2 * j]);
        abs_re += WGK[j] * (l.re.abs() + r.re.abs());
        abs_im += WGK[j] * (l.im.abs() + r.im.abs());
        asc_re += WGK[j] * ((l.re - mean.re).abs() + (r.re - mean.re).abs());
        asc_im += WGK[j] * ((l.im - mean.im).abs() + (r.im - mean.im).abs());
    }
    let h = half.abs();
    let diff = (kronrod - gauss) * half;
    let err_re = scaled_error(diff.re, abs_re * h, asc_re * h);
    let err_im = scaled_error(diff.im, abs_im * h, asc_im * h);
    Piece {
        a,
        b,
        value: kronrod * half,
        error: err_re.hypot(err_im),
    }
}

/// Integrate `f` over `[breakpoints[0], breakpoints[last]]`, starting from the
/// partition given by the (sorted) breakpoints and bisecting the worst piece
/// until the tolerance is met.
pub fn integrate<F: Fn(f64) -> C64>(f: F, breakpoints: &[f64], tol: Tolerance) -> Result<Estimate> {
    let mut points: Vec<f64> = breakpoints.iter().copied().filter(|x| x.is_finite()).collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    if points.len() < 2 {
        return Ok(Estimate {
            value: C64::new(0.0, 0.0),
            error: 0.0,
        });
    }
    let span = points[points.len() - 1] - points[0];

    let mut heap = BinaryHeap::new();
    let mut value = C64::new(0.0, 0.0);
    let mut error = 0.0;
    for w in points.windows(2) {
        let piece = kronrod21(&f, w[0], w[1]);
        value += piece.value;
        error += piece.error;
        heap.push(piece);
    }

    let mut frozen_error = 0.0;
    while error > tol.abs.max(tol.rel * value.norm()) {
        if heap.len() >= tol.max_intervals {
            return Err(Error::Quadrature {
                value: value.norm(),
                error,
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if (worst.b - worst.a) < 1e-13 * span {
            frozen_error += worst.error;
            if frozen_error > tol.abs.max(tol.rel * value.norm()) {
                return Err(Error::Quadrature {
                    value: value.norm(),
                    error,
                });
            }
            continue;
        }
        let left = kronrod21(&f, worst.a, mid);
        let right = kronrod21(&f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed the drift accumulated by incremental updates.
    let mut total = heap.iter().fold(C64::new(0.0, 0.0), |acc, p| acc + p.value);
    let mut total_err: f64 = heap.iter().map(|p| p.error).sum();
    total_err += frozen_error;
    if heap.is_empty() {
        total = value;
        total_err = error;
    }
    Ok(Estimate {
        value: total,
        error: total_err,
    })
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F: Fn(f64) -> f64>(f: F, breakpoints: &[f64], tol: Tolerance) -> Result<(f64, f64)> {
    let est = integrate(|x| C64::new(f(x), 0.0), breakpoints, tol)?;
    Ok((est.value.re, est.error))
}
