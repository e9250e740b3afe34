//! Dormand–Prince 5(4) with adaptive steps that land exactly on requested
//! output times.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
    /// Smallest admissible step relative to the integration span.
    pub min_step_fraction: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            atol: 1e-10,
            rtol: 1e-9,
            max_steps: 1_000_000,
            min_step_fraction: 1e-14,
        }
    }
}

fn error_norm(err: &[f64], y0: &[f64], y1: &[f64], opts: &OdeOptions) -> f64 {
    let n = err.len() as f64;
    let s: f64 = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = opts.atol + opts.rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

/// Integrate y' = f(t, y) from `times[0]` and return the state at every entry
/// of `times` (which must be non-decreasing).
pub fn solve<F>(mut f: F, y0: &[f64], times: &[f64], opts: &OdeOptions) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y0.len();
    let mut out = Vec::with_capacity(times.len());
    if times.is_empty() {
        return Ok(out);
    }
    if times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::Domain("output times must be non-decreasing".into()));
    }
    let span = times[times.len() - 1] - times[0];
    let mut t = times[0];
    let mut y = y0.to_vec();
    out.push(y.clone());
    if span == 0.0 {
        out.extend(std::iter::repeat_n(y.clone(), times.len() - 1));
        return Ok(out);
    }

    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut err = vec![0.0; n];
    f(t, &y, &mut k[0])?;

    // Initial step (Hairer–Nørsett–Wanner heuristic).
    let scale: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.abs()).collect();
    let rms = |v: &[f64]| (v.iter().zip(&scale).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / n as f64).sqrt();
    let d0 = rms(&y);
    let d1 = rms(&k[0]);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(span);
    for i in 0..n {
        tmp[i] = y[i] + h * k[0][i];
    }
    f(t + h, &tmp, &mut k[1])?;
    let diff: Vec<f64> = k[1].iter().zip(&k[0]).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff) / h;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    h = (100.0 * h).min(h1).min(span);

    let h_min = opts.min_step_fraction * span;
    let mut steps = 0usize;
    for &target in &times[1..] {
        while t < target {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Integration {
                    t,
                    reason: format!("exceeded {} steps", opts.max_steps),
                });
            }
            let remaining = target - t;
            let landing = h >= remaining;
            let step = if landing { remaining } else { h };
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = 0.0;
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += A[s][j] * kj[i];
                    }
                    tmp[i] = y[i] + step * acc;
                }
                f(t + C[s] * step, &tmp, &mut k[s])?;
            }
            // tmp now holds the 5th-order solution (stage 7 abscissa is the endpoint).
            for i in 0..n {
                let mut e = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    e += E[j] * kj[i];
                }
                err[i] = step * e;
            }
            let en = error_norm(&err, &y, &tmp, opts);
            if !en.is_finite() {
                return Err(Error::Integration {
                    t,
                    reason: "non-finite derivative".into(),
                });
            }
            if en <= 1.0 {
                t = if landing { target } else { t + step };
                y.copy_from_slice(&tmp);
                k.swap(0, 6);
                let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
                if !landing || fac < 1.0 {
                    h = step * fac;
                }
            } else {
                h = step * (0.9 * en.powf(-0.2)).clamp(0.2, 1.0);
                if h < h_min {
                    return Err(Error::Integration {
                        t,
                        reason: format!("step size underflow (h = {h:e})"),
                    });
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}
