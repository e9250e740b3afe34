//! Spectral densities, thermal occupation and the memory integrals Γ(ς, t).

use crate::error::{Error, Result};
use crate::pauli::C64;
use crate::quad::{self, Tolerance};

/// Ohmic densities are integrated out to this many cutoff frequencies.
const OHMIC_SPAN: f64 = 50.0;

/// Bath spectral density J(ω), defined for ω ≥ 0 and treated as 0 below.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralDensity {
    /// J(ω) = λ ω e^{−ω/ω_c}.
    Ohmic { lambda: f64, omega_c: f64 },
    Tabulated(Tabulated),
}

/// Linearly interpolated samples of J on an increasing positive grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    omega: Vec<f64>,
    values: Vec<f64>,
}

impl Tabulated {
    pub fn new(omega: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if omega.len() != values.len() || omega.len() < 2 {
            return Err(Error::Domain(
                "tabulated density needs at least two (ω, J) samples".into(),
            ));
        }
        if omega[0] < 0.0 || omega.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain(
                "tabulated frequencies must be nonnegative and strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Domain("tabulated J(ω) must be finite and ≥ 0".into()));
        }
        if omega[0] == 0.0 && values[0] != 0.0 {
            return Err(Error::Domain(
                "J(0) must vanish, otherwise the correlation weight is not integrable".into(),
            ));
        }
        Ok(Tabulated { omega, values })
    }

    /// Parse a whitespace-separated two-column (ω, J) listing; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut omega = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 2 {
                return Err(Error::Parse(format!(
                    "line {}: expected two columns, found {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            omega.push(parse(cols[0])?);
            values.push(parse(cols[1])?);
        }
        Tabulated::new(omega, values)
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn eval(&self, w: f64) -> f64 {
        let n = self.omega.len();
        if w < self.omega[0] || w > self.omega[n - 1] {
            return 0.0;
        }
        let k = self.omega.partition_point(|&x| x <= w).clamp(1, n - 1);
        let (x0, x1) = (self.omega[k - 1], self.omega[k]);
        let (y0, y1) = (self.values[k - 1], self.values[k]);
        y0 + (y1 - y0) * (w - x0) / (x1 - x0)
    }
}

impl SpectralDensity {
    pub fn ohmic(lambda: f64, omega_c: f64) -> Result<Self> {
        if !(lambda > 0.0) || !(omega_c > 0.0) || !lambda.is_finite() || !omega_c.is_finite() {
            return Err(Error::Domain(format!(
                "Ohmic density needs λ > 0 and ω_c > 0, got λ = {lambda}, ω_c = {omega_c}"
            )));
        }
        Ok(SpectralDensity::Ohmic { lambda, omega_c })
    }

    /// J(ω); zero for ω < 0.
    pub fn value(&self, omega: f64) -> f64 {
        if omega < 0.0 {
            return 0.0;
        }
        match self {
            SpectralDensity::Ohmic { lambda, omega_c } => lambda * omega * (-omega / omega_c).exp(),
            SpectralDensity::Tabulated(t) => t.eval(omega),
        }
    }

    /// lim_{ω→0⁺} J(ω)/ω.
    fn slope_at_zero(&self) -> f64 {
        match self {
            SpectralDensity::Ohmic { lambda, .. } => *lambda,
            SpectralDensity::Tabulated(t) => {
                if t.omega[0] > 0.0 {
                    0.0
                } else {
                    t.values[1] / t.omega[1]
                }
            }
        }
    }

    /// Largest frequency carrying weight, and the natural breakpoints of J.
    fn support(&self) -> (f64, Vec<f64>) {
        match self {
            SpectralDensity::Ohmic { omega_c, .. } => {
                let scales = [0.5, 1.0, 3.0, 8.0, 20.0];
                (OHMIC_SPAN * omega_c, scales.iter().map(|s| s * omega_c).collect())
            }
            SpectralDensity::Tabulated(t) => {
                let max = *t.omega.last().unwrap();
                let knots = if t.omega.len() <= 512 {
                    t.omega.clone()
                } else {
                    let stride = t.omega.len().div_ceil(512);
                    t.omega.iter().step_by(stride).copied().chain([max]).collect()
                };
                (max, knots)
            }
        }
    }
}

/// A thermal bosonic bath seen by the qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct BathModel {
    pub spectral: SpectralDensity,
    pub beta: f64,
    /// Use the symmetrized weight j(ω) = J(|ω|)/(β|ω|).
    pub high_temperature: bool,
    /// Collapse Γ(±ω₀, t) onto Γ(0, t).
    pub wide_cutoff: bool,
    pub tolerance: Tolerance,
}

impl BathModel {
    pub fn new(spectral: SpectralDensity, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Domain(format!("β must be positive and finite, got {beta}")));
        }
        Ok(BathModel {
            spectral,
            beta,
            high_temperature: false,
            wide_cutoff: false,
            tolerance: Tolerance::default(),
        })
    }

    pub fn high_temperature(mut self, on: bool) -> Self {
        self.high_temperature = on;
        self
    }

    pub fn wide_cutoff(mut self, on: bool) -> Self {
        self.wide_cutoff = on;
        self
    }

    pub fn with_tolerance(mut self, tolerance: Tolerance) -> Self {
        self.tolerance = tolerance;
        self
    }

    /// Partition of the ω axis for integrals against j(ω), including the
    /// extra points in `extra` that fall inside the support.
    fn partition(&self, extra: &[f64], period: Option<f64>) -> Vec<f64> {
        let (span, knots) = self.spectral.support();
        let mut pts = vec![-span, 0.0, span];
        for k in knots {
            pts.push(k);
            pts.push(-k);
        }
        pts.extend(extra.iter().copied().filter(|x| x.abs() < span));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        if let Some(period) = period {
            // Pre-split oscillatory stretches so bisection starts near the right scale.
            let max_pieces = 4000usize;
            let width = (4.0 * period).max(2.0 * span / max_pieces as f64);
            let mut refined = Vec::with_capacity(pts.len());
            for w in pts.windows(2) {
                let n = ((w[1] - w[0]) / width).ceil().max(1.0) as usize;
                for i in 0..n {
                    refined.push(w[0] + (w[1] - w[0]) * i as f64 / n as f64);
                }
            }
            refined.push(span);
            pts = refined;
        }
        pts
    }
}

/// Bose–Einstein occupation N(ω) = 1/(e^{βω} − 1).
pub fn thermal_occupation(omega: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("β must be positive, got {beta}")));
    }
    if omega == 0.0 {
        return Err(Error::Domain("N(ω) has a pole at ω = 0".into()));
    }
    Ok(1.0 / (beta * omega).exp_m1())
}

/// Fourier weight of the bath correlation function,
/// j(ω) = N(ω)[J(ω)Θ(ω) − J(−ω)Θ(−ω)], or J(|ω|)/(β|ω|) at high temperature.
pub fn correlation_weight(model: &BathModel, omega: f64) -> f64 {
    let beta = model.beta;
    if omega == 0.0 {
        return model.spectral.slope_at_zero() / beta;
    }
    let w = omega.abs();
    let j = model.spectral.value(w);
    if j == 0.0 {
        return 0.0;
    }
    if model.high_temperature {
        return j / (beta * w);
    }
    let n = 1.0 / (beta * w).exp_m1();
    if omega > 0.0 {
        n * j
    } else {
        (n + 1.0) * j
    }
}

/// Total weight α = ∫ j(ω) dω; sets the short-time decay rate scale.
pub fn total_weight(model: &BathModel) -> Result<f64> {
    let pts = model.partition(&[], None);
    let (v, _) = quad::integrate_real(|w| correlation_weight(model, w), &pts, model.tolerance)?;
    Ok(v)
}

/// Γ(ς, t) together with its arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaValue {
    pub value: C64,
    pub sigma: f64,
    pub t: f64,
}

/// ∫₀ᵗ e^{ixτ} dτ, stable for small |x t|.
pub(crate) fn memory_kernel(x: f64, t: f64) -> C64 {
    let y = x * t;
    if y.abs() < 0.5 {
        let iy = C64::new(0.0, y);
        let mut term = C64::new(1.0, 0.0);
        let mut sum = term;
        for k in 1..20 {
            term = term * iy / (k as f64 + 1.0);
            sum += term;
        }
        sum * t
    } else {
        C64::new(y.sin(), 1.0 - y.cos()) / x
    }
}

/// ∂/∂x ∫₀ᵗ e^{ixτ} dτ = ∫₀ᵗ iτ e^{ixτ} dτ.
pub(crate) fn memory_kernel_derivative(x: f64, t: f64) -> C64 {
    let y = x * t;
    let i = C64::new(0.0, 1.0);
    if y.abs() < 0.5 {
        let iy = C64::new(0.0, y);
        let mut power = C64::new(1.0, 0.0);
        let mut sum = C64::new(0.5, 0.0);
        for k in 1..20 {
            power = power * iy / k as f64;
            sum += power / (k as f64 + 2.0);
        }
        i * sum * t * t
    } else {
        let e = C64::new(0.0, y).exp();
        (e * (t * x) + i * (e - 1.0)) / (x * x)
    }
}

fn kernel_integral<K: Fn(f64, f64) -> C64>(model: &BathModel, sigma: f64, t: f64, kernel: K) -> Result<C64> {
    let period = if t > 0.0 { Some(2.0 * std::f64::consts::PI / t) } else { None };
    let pts = model.partition(&[-sigma], period);
    let est = quad::integrate(
        |w| {
            let j = correlation_weight(model, w);
            if j == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                kernel(sigma + w, t) * j
            }
        },
        &pts,
        model.tolerance,
    )?;
    Ok(est.value)
}

/// Γ(ς, t) = ∫₀ᵗ e^{iςτ} C(τ) dτ = ∫ dω j(ω) (e^{i(ς+ω)t} − 1)/(i(ς+ω)).
pub fn gamma_integral(model: &BathModel, sigma: f64, t: f64) -> Result<GammaValue> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("Γ(ς, t) needs t ≥ 0, got {t}")));
    }
    let value = if t == 0.0 {
        C64::new(0.0, 0.0)
    } else {
        kernel_integral(model, sigma, t, memory_kernel)?
    };
    Ok(GammaValue { value, sigma, t })
}

/// ∂Γ(ς, t)/∂ς.
pub fn gamma_integral_derivative(model: &BathModel, sigma: f64, t: f64) -> Result<C64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("Γ(ς, t) needs t ≥ 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    kernel_integral(model, sigma, t, memory_kernel_derivative)
}

/// Map a driven qubit (frequency ω, drive ω_L, Rabi Ω) onto the static
/// problem: ω − ω_L = −ω₀ sin ϑ and Ω = −ω₀ cos ϑ. Returns (ω₀, ϑ).
pub fn driven_frame_parameters(omega: f64, omega_l: f64, rabi: f64) -> Result<(f64, f64)> {
    let detuning = omega - omega_l;
    if detuning == 0.0 && rabi == 0.0 {
        return Err(Error::Domain(
            "zero detuning and zero Rabi frequency leave ϑ undefined".into(),
        ));
    }
    Ok((detuning.hypot(rabi), (-detuning).atan2(-rabi)))
}

/// Forward substitution (ω₀, ϑ) ↦ (ω − ω_L, Ω).
pub fn driven_frame_forward(omega0: f64, theta: f64) -> (f64, f64) {
    (-omega0 * theta.sin(), -omega0 * theta.cos())
}
