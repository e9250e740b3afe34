//! Nelder–Mead downhill simplex with dimension-adaptive coefficients.

/// Stopping rules for a single simplex run.
#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_evaluations: usize,
    /// Relative spread of vertex values at which the run stops.
    pub f_tolerance: f64,
    /// Absolute floor added to the value spread test.
    pub f_floor: f64,
    /// Largest vertex distance from the best vertex at which the run stops.
    pub x_tolerance: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_evaluations: 20_000,
            f_tolerance: 1e-12,
            f_floor: 0.0,
            x_tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// A run stops when either the vertex values or the vertex positions have
/// collapsed to within tolerance.
///
/// Minimizes `f` starting from an axis-aligned simplex with edge `step`
/// around `start`.
pub fn nelder_mead<F>(f: &mut F, start: &[f64], step: f64, opts: &SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = start.len();
    let mut vertices = Vec::with_capacity(n + 1);
    vertices.push(start.to_vec());
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += step;
        vertices.push(v);
    }
    minimize_from(f, vertices, opts)
}

/// Minimizes `f` from an explicit initial simplex of `n + 1` vertices.
pub fn minimize_from<F>(f: &mut F, vertices: Vec<Vec<f64>>, opts: &SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = vertices.len() - 1;
    if n == 0 {
        let value = f(&vertices[0]);
        return SimplexResult { x: vertices[0].clone(), value, evaluations: 1, converged: true };
    }
    let nf = n as f64;
    let (rho, chi, psi, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);

    let mut evaluations = 0;
    let mut eval = |x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = vertices
        .into_iter()
        .map(|v| {
            let fv = eval(&v, &mut evaluations);
            (v, fv)
        })
        .collect();

    let mut converged = false;
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];

    while evaluations < opts.max_evaluations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let spread = (worst - best).abs();
        let size = simplex[1..]
            .iter()
            .map(|(v, _)| {
                v.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        let flat = spread <= opts.f_tolerance * best.abs() + opts.f_floor;
        if flat || size <= opts.x_tolerance {
            converged = true;
            break;
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / nf;
            }
        }
        let along = |coef: f64, out: &mut Vec<f64>, worst: &[f64]| {
            for i in 0..n {
                out[i] = centroid[i] + coef * (centroid[i] - worst[i]);
            }
        };

        along(rho, &mut trial, &simplex[n].0);
        let fr = eval(&trial, &mut evaluations);
        if fr < simplex[0].1 {
            along(rho * chi, &mut trial2, &simplex[n].0);
            let fe = eval(&trial2, &mut evaluations);
            if fe < fr {
                simplex[n] = (trial2.clone(), fe);
            } else {
                simplex[n] = (trial.clone(), fr);
            }
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (trial.clone(), fr);
            continue;
        }
        let outside = fr < simplex[n].1;
        if outside {
            along(rho * psi, &mut trial2, &simplex[n].0);
        } else {
            along(-psi, &mut trial2, &simplex[n].0);
        }
        let fc = eval(&trial2, &mut evaluations);
        let accept = if outside { fc <= fr } else { fc < simplex[n].1 };
        if accept {
            simplex[n] = (trial2.clone(), fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for (v, fv) in simplex[1..].iter_mut() {
            for (x, a) in v.iter_mut().zip(&anchor) {
                *x = a + sigma * (*x - a);
            }
            *fv = eval(v, &mut evaluations);
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    SimplexResult { x, value, evaluations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let mut f = |x: &[f64]| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2) + (x[2] - 0.5).powi(2);
        let r = nelder_mead(&mut f, &[0.0, 0.0, 0.0], 0.5, &SimplexOptions::default());
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] + 2.0).abs() < 1e-6 && (r.x[2] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn rosenbrock() {
        let mut f = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let r = nelder_mead(&mut f, &[-1.2, 1.0], 0.1, &SimplexOptions::default());
        assert!((r.x[0] - 1.0).abs() < 1e-6, "{:?}", r);
    }

    #[test]
    fn nonsmooth_max() {
        let mut f = |x: &[f64]| (x[0] - 0.3).abs().max((x[1] + 0.1).abs()) + 0.01 * (x[0] + x[1]).powi(2);
        let r = nelder_mead(&mut f, &[1.0, 1.0], 0.3, &SimplexOptions::default());
        assert!(r.value < 1e-3, "{:?}", r);
    }

    #[test]
    fn nan_is_rejected() {
        let mut f = |x: &[f64]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 2.0).powi(2) };
        let r = nelder_mead(&mut f, &[1.0], 0.5, &SimplexOptions::default());
        assert!((r.x[0] - 2.0).abs() < 1e-6);
    }
}
