//! Mass distribution densities in dimensionless form.
//!
//! Every density is written as `Ω(ξ) = (ξ - ξ₀)^α Ω₀(ξ)` on `ξ ≥ ξ₀ > 0`, where
//! `Ω₀` is smooth and positive at the lower bound. Evaluation goes through the
//! offset `d = ξ - ξ₀` so that the endpoint factor keeps full relative accuracy.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::quadrature::{self, Kinematics};

/// Large-ξ behaviour of a density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailClass {
    /// Decays faster than any power.
    SuperPolynomial,
    /// `Ω(ξ) = O(ξ^{-1-l₀})` with the given `l₀`.
    PowerLaw(f64),
}

impl TailClass {
    /// Whether `Ω(ξ) = O(ξ^{-1-l})` holds for the given `l`.
    pub fn decays_faster_than(&self, l: f64) -> bool {
        match *self {
            TailClass::SuperPolynomial => true,
            TailClass::PowerLaw(l0) => l0 > l,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreitWignerParams {
    pub m0: f64,
    pub gamma_bar: f64,
    pub xi0: f64,
    pub lambda_bw: f64,
}

impl BreitWignerParams {
    pub fn new(m0: f64, gamma_bar: f64, xi0: f64) -> Result<Self> {
        if !(gamma_bar > 0.0) || !gamma_bar.is_finite() {
            return Err(Error::domain(format!("gamma_bar must be positive (got {gamma_bar})")));
        }
        if !(xi0 > 0.0) || !xi0.is_finite() {
            return Err(Error::domain(format!("xi0 must be positive (got {xi0})")));
        }
        if !m0.is_finite() {
            return Err(Error::domain(format!("m0 must be finite (got {m0})")));
        }
        let lambda_bw = PI / (PI / 2.0 + (2.0 * (m0 - xi0) / gamma_bar).atan());
        Ok(BreitWignerParams {
            m0,
            gamma_bar,
            xi0,
            lambda_bw,
        })
    }

    fn eval(&self, xi: f64) -> f64 {
        let dm = xi - self.m0;
        self.lambda_bw * (self.gamma_bar / (2.0 * PI)) / (dm * dm + 0.25 * self.gamma_bar * self.gamma_bar)
    }

    fn eval_complex(&self, xi: Complex64) -> Complex64 {
        let dm = xi - self.m0;
        self.lambda_bw * (self.gamma_bar / (2.0 * PI)) / (dm * dm + 0.25 * self.gamma_bar * self.gamma_bar)
    }
}

/// Sidecar metadata of a tabulated density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMetadata {
    pub alpha: f64,
    pub xi0: f64,
    pub omega0_at_xi0: f64,
    pub omega0_prime_at_xi0: f64,
    /// `null`, `"inf"` or a number.
    #[serde(with = "tail_exponent")]
    pub tail_decay_exponent: Option<f64>,
}

mod tail_exponent {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_f64(*x),
            None => s.serialize_str("inf"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Option::<Raw>::deserialize(d)? {
            None => Ok(None),
            Some(Raw::Num(x)) if x.is_finite() => Ok(Some(x)),
            Some(Raw::Num(_)) => Ok(None),
            Some(Raw::Text(t)) => match t.to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "superpolynomial" | "super-polynomial" => Ok(None),
                other => other
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| serde::de::Error::custom(format!("bad tail_decay_exponent '{t}'"))),
            },
        }
    }
}

#[derive(Debug, Clone)]
enum Profile {
    /// `w_α ξ (ξ² - ξ₀²)^α e^{-ξ²}`; holds `ln(2/Γ(1+α))`.
    Toy { log_prefactor: f64 },
    BreitWigner(BreitWignerParams),
    /// Interpolant of the regular part `Ω₀` on the table knots.
    Tabulated(Arc<MonotoneCubic>),
}

/// Upper integration limit chosen for a density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub upper: f64,
    /// When set, the remainder beyond `upper` is evaluated along a vertical
    /// ray in the lower half plane using the analytic continuation.
    pub analytic_tail: bool,
}

/// A dimensionless mass distribution density. Immutable once built.
#[derive(Debug, Clone)]
pub struct MassDistribution {
    name: String,
    xi0: f64,
    alpha: f64,
    omega0_at_xi0: f64,
    omega0_prime_at_xi0: f64,
    tail: TailClass,
    moments_finite_through: Option<u32>,
    profile: Profile,
    scale: f64,
}

/// Toy family `Ω(ξ) = w_α ξ (ξ² − ξ₀²)^α e^{−ξ²}` with `w_α = 2 e^{ξ₀²}/Γ(1+α)`.
pub fn make_toy_mdd(alpha: f64, xi0: f64) -> Result<MassDistribution> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::domain(format!("alpha must be >= 0 (got {alpha})")));
    }
    if !(xi0 > 0.0) || !xi0.is_finite() {
        return Err(Error::domain(format!("xi0 must be > 0 (got {xi0})")));
    }
    let log_prefactor = 2f64.ln() - ln_gamma(1.0 + alpha);
    let omega0_at_xi0 = (log_prefactor + alpha * (2.0 * xi0).ln()).exp() * xi0;
    let log_derivative = 1.0 / xi0 + alpha / (2.0 * xi0) - 2.0 * xi0;
    Ok(MassDistribution {
        name: format!("toy(alpha={alpha}, xi0={xi0})"),
        xi0,
        alpha,
        omega0_at_xi0,
        omega0_prime_at_xi0: omega0_at_xi0 * log_derivative,
        tail: TailClass::SuperPolynomial,
        moments_finite_through: None,
        profile: Profile::Toy { log_prefactor },
        scale: 1.0,
    })
}

/// Breit-Wigner density truncated below at `ξ₀`.
pub fn make_breit_wigner(m0: f64, gamma_bar: f64, xi0: f64) -> Result<MassDistribution> {
    let params = BreitWignerParams::new(m0, gamma_bar, xi0)?;
    let at_xi0 = params.eval(xi0);
    let dm = xi0 - m0;
    let q = dm * dm + 0.25 * gamma_bar * gamma_bar;
    Ok(MassDistribution {
        name: format!("breit-wigner(m0={m0}, gamma_bar={gamma_bar}, xi0={xi0})"),
        xi0,
        alpha: 0.0,
        omega0_at_xi0: at_xi0,
        omega0_prime_at_xi0: -at_xi0 * 2.0 * dm / q,
        tail: TailClass::PowerLaw(1.0),
        moments_finite_through: Some(0),
        profile: Profile::BreitWigner(params),
        scale: 1.0,
    })
}

impl MassDistribution {
    /// Builds a density from samples `(ξ_k, Ω_k)` starting at `ξ₀` and the
    /// declared endpoint data. The support ends at the last sample.
    pub fn from_table(name: &str, xs: Vec<f64>, omegas: Vec<f64>, meta: &TableMetadata) -> Result<Self> {
        if xs.len() < 3 || xs.len() != omegas.len() {
            return Err(Error::InvalidInput(
                "table needs at least three (xi, omega) rows".to_string(),
            ));
        }
        if !(meta.xi0 > 0.0) {
            return Err(Error::domain(format!("xi0 must be > 0 (got {})", meta.xi0)));
        }
        if !(meta.alpha >= 0.0) {
            return Err(Error::domain(format!("alpha must be >= 0 (got {})", meta.alpha)));
        }
        if !(meta.omega0_at_xi0 > 0.0) {
            return Err(Error::domain(format!(
                "omega0_at_xi0 must be > 0 (got {})",
                meta.omega0_at_xi0
            )));
        }
        if (xs[0] - meta.xi0).abs() > 1e-12 * meta.xi0.max(1.0) {
            return Err(Error::InvalidInput(format!(
                "table must start at xi0 = {} (first xi is {})",
                meta.xi0, xs[0]
            )));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("xi column must be strictly increasing".to_string()));
        }
        let regular: Vec<f64> = xs
            .iter()
            .zip(&omegas)
            .enumerate()
            .map(|(k, (&x, &w))| {
                if k == 0 {
                    if meta.alpha == 0.0 {
                        w
                    } else {
                        meta.omega0_at_xi0
                    }
                } else {
                    w / (x - meta.xi0).powf(meta.alpha)
                }
            })
            .collect();
        let interp = MonotoneCubic::new(xs, regular)
            .ok_or_else(|| Error::InvalidInput("table is not interpolable".to_string()))?;
        Ok(MassDistribution {
            name: name.to_string(),
            xi0: meta.xi0,
            alpha: meta.alpha,
            omega0_at_xi0: meta.omega0_at_xi0,
            omega0_prime_at_xi0: meta.omega0_prime_at_xi0,
            tail: match meta.tail_decay_exponent {
                Some(l0) => TailClass::PowerLaw(l0),
                None => TailClass::SuperPolynomial,
            },
            moments_finite_through: None,
            profile: Profile::Tabulated(Arc::new(interp)),
            scale: 1.0,
        })
    }

    /// Reads a `xi,omega` CSV and its JSON sidecar.
    pub fn load_table(csv_path: &Path, meta_path: &Path) -> Result<Self> {
        let meta: TableMetadata = serde_json::from_reader(std::fs::File::open(meta_path)?)?;
        let mut reader = csv::Reader::from_path(csv_path)?;
        let headers = reader.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "xi" || &headers[1] != "omega" {
            return Err(Error::InvalidInput(format!(
                "{}: expected header 'xi,omega'",
                csv_path.display()
            )));
        }
        let mut xs = Vec::new();
        let mut omegas = Vec::new();
        for row in reader.deserialize() {
            let (x, w): (f64, f64) = row?;
            xs.push(x);
            omegas.push(w);
        }
        let name = csv_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "tabulated".to_string());
        Self::from_table(&name, xs, omegas, &meta)
    }

    /// Same distribution with the density multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.scale *= factor;
        out.omega0_at_xi0 *= factor;
        out.omega0_prime_at_xi0 *= factor;
        out.name = format!("{} x {factor}", self.name);
        out
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn xi0(&self) -> f64 {
        self.xi0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn omega0_at_xi0(&self) -> f64 {
        self.omega0_at_xi0
    }

    pub fn omega0_prime_at_xi0(&self) -> f64 {
        self.omega0_prime_at_xi0
    }

    /// `Ω₀′(ξ₀)/Ω₀(ξ₀)`
    pub fn endpoint_log_derivative(&self) -> f64 {
        self.omega0_prime_at_xi0 / self.omega0_at_xi0
    }

    pub fn tail(&self) -> TailClass {
        self.tail
    }

    /// Highest `n` with `∫ Ω ξⁿ dξ < ∞`; `None` when every moment is finite.
    pub fn moments_finite_through(&self) -> Option<u32> {
        self.moments_finite_through
    }

    pub fn has_finite_moment(&self, n: u32) -> bool {
        self.moments_finite_through.map_or(true, |m| n <= m)
    }

    pub fn family(&self) -> &'static str {
        match self.profile {
            Profile::Toy { .. } => "toy",
            Profile::BreitWigner(_) => "breit-wigner",
            Profile::Tabulated(_) => "tabulated",
        }
    }

    pub fn breit_wigner_params(&self) -> Option<BreitWignerParams> {
        match self.profile {
            Profile::BreitWigner(p) => Some(p),
            _ => None,
        }
    }

    /// Normalization factor `w_α` of the toy family.
    pub fn toy_weight(&self) -> Option<f64> {
        match self.profile {
            Profile::Toy { log_prefactor } => Some((log_prefactor + self.xi0 * self.xi0).exp()),
            _ => None,
        }
    }

    /// `Ω(ξ)`, zero below `ξ₀`.
    pub fn density(&self, xi: f64) -> f64 {
        if xi < self.xi0 {
            return 0.0;
        }
        self.density_at_offset(xi - self.xi0)
    }

    /// `Ω(ξ₀ + d)`.
    pub fn density_at_offset(&self, d: f64) -> f64 {
        if d < 0.0 {
            return 0.0;
        }
        let endpoint = if self.alpha == 0.0 { 1.0 } else { d.powf(self.alpha) };
        endpoint * self.regular_at_offset(d)
    }

    /// `Ω₀(ξ)`.
    pub fn regular_part(&self, xi: f64) -> f64 {
        self.regular_at_offset(xi - self.xi0)
    }

    /// `Ω₀(ξ₀ + d)`.
    pub fn regular_at_offset(&self, d: f64) -> f64 {
        let xi = self.xi0 + d;
        let v = match &self.profile {
            Profile::Toy { log_prefactor } => {
                let s = 2.0 * self.xi0 + d;
                let log_power = if self.alpha == 0.0 { 0.0 } else { self.alpha * s.ln() };
                xi * (log_prefactor + log_power - d * s).exp()
            }
            Profile::BreitWigner(p) => p.eval(xi),
            Profile::Tabulated(t) => t.eval(xi),
        };
        self.scale * v
    }

    /// Analytic continuation of `Ω` off the real axis, where available.
    pub fn density_complex(&self, xi: Complex64) -> Option<Complex64> {
        match &self.profile {
            Profile::BreitWigner(p) => Some(self.scale * p.eval_complex(xi)),
            _ => None,
        }
    }

    /// Right end of a compact support.
    pub fn support_end(&self) -> Option<f64> {
        match &self.profile {
            Profile::Tabulated(t) => Some(t.last()),
            _ => None,
        }
    }

    /// Points in `ξ` where panels should break (table knots, resonance peak).
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.profile {
            Profile::Toy { .. } => Vec::new(),
            Profile::BreitWigner(p) => {
                let g = p.gamma_bar;
                [p.m0 - g, p.m0, p.m0 + g]
                    .into_iter()
                    .filter(|&x| x > self.xi0)
                    .collect()
            }
            Profile::Tabulated(t) => t.knots()[1..].to_vec(),
        }
    }

    /// Largest panel width in `ξ` that resolves the non-oscillatory shape.
    pub fn feature_width(&self) -> f64 {
        match &self.profile {
            Profile::Toy { .. } => 0.5,
            Profile::BreitWigner(p) => (0.5 * p.gamma_bar).min(0.5),
            Profile::Tabulated(_) => 0.5,
        }
    }

    /// Upper limit such that the discarded mass, weighted by `ξ^extra_power`,
    /// stays below `tail_bound`.
    pub fn truncation(&self, tail_bound: f64, extra_power: u32) -> Truncation {
        match &self.profile {
            Profile::Toy { .. } => {
                // (w_α/2) X^{2α} e^{-X²+ξ₀²} X^k <= bound
                let xi0 = self.xi0;
                let log_half_w = xi0 * xi0 - ln_gamma(1.0 + self.alpha) + self.scale.ln();
                let target = tail_bound.ln();
                let bound = |x: f64| {
                    log_half_w + (2.0 * self.alpha + extra_power as f64) * x.ln() - x * x + xi0 * xi0
                };
                let mut x = (xi0 + 1.0).max((self.alpha + 0.5 * extra_power as f64).sqrt() + 1.0);
                while bound(x) > target {
                    x += 0.05;
                }
                Truncation {
                    upper: x,
                    analytic_tail: false,
                }
            }
            Profile::BreitWigner(p) => Truncation {
                upper: p.m0.max(self.xi0) + 20.0 * p.gamma_bar + 1.0,
                analytic_tail: true,
            },
            Profile::Tabulated(t) => Truncation {
                upper: t.last(),
                analytic_tail: false,
            },
        }
    }

    pub fn summary(&self) -> MddSummary {
        MddSummary {
            name: self.name.clone(),
            family: self.family().to_string(),
            xi0: self.xi0,
            alpha: self.alpha,
            omega0_at_xi0: self.omega0_at_xi0,
            omega0_prime_at_xi0: self.omega0_prime_at_xi0,
            tail: self.tail,
            moments_finite_through: self.moments_finite_through,
        }
    }
}

/// Serializable descriptor of a density (without the density map).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MddSummary {
    pub name: String,
    pub family: String,
    pub xi0: f64,
    pub alpha: f64,
    pub omega0_at_xi0: f64,
    pub omega0_prime_at_xi0: f64,
    pub tail: TailClass,
    pub moments_finite_through: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub tol: f64,
    pub normalization: f64,
    pub normalization_defect: f64,
    pub normalization_error_estimate: f64,
    pub min_density: f64,
    pub negativity_defect: f64,
    pub endpoint_extrapolated: f64,
    /// Relative mismatch between the extrapolated endpoint value and `Ω₀(ξ₀)`.
    pub endpoint_defect: f64,
    pub passed: bool,
}

impl ValidationReport {
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !(self.normalization_defect < self.tol) {
            out.push("normalization");
        }
        if !(self.negativity_defect < self.tol) {
            out.push("nonnegativity");
        }
        if !(self.endpoint_defect < self.tol) {
            out.push("endpoint");
        }
        out
    }
}

/// Endpoint limit of `Ω(ξ)/(ξ-ξ₀)^α` by two-level Richardson extrapolation
/// over `h ∈ {1e-3, 1e-4, 1e-5}`.
pub fn extrapolate_endpoint(mdd: &MassDistribution) -> f64 {
    let ratio = |h: f64| {
        let xi = mdd.xi0() + h;
        let d = xi - mdd.xi0();
        mdd.density(xi) / d.powf(mdd.alpha())
    };
    let (e1, e2, e3) = (ratio(1e-3), ratio(1e-4), ratio(1e-5));
    let r1 = (10.0 * e2 - e1) / 9.0;
    let r2 = (10.0 * e3 - e2) / 9.0;
    (100.0 * r2 - r1) / 99.0
}

/// Checks normalization, sampled nonnegativity and endpoint consistency.
pub fn validate(mdd: &MassDistribution, tol: f64) -> Result<ValidationReport> {
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tol must be positive (got {tol})")));
    }
    let kin = Kinematics::new(0.0, mdd.xi0())?;
    let (normalization, normalization_error_estimate) = match quadrature::oracle_amplitude(mdd, &kin, 0.0) {
        Ok(a) => (a.value.re, a.abs_error_estimate),
        Err(Error::ConvergenceFailure { value, abs_error, .. }) => (value.re, abs_error),
        Err(e) => return Err(e),
    };

    let upper = mdd.truncation(1e-14, 0).upper;
    let span = upper - mdd.xi0();
    let samples = 4000;
    let mut min_density = f64::INFINITY;
    for k in 0..=samples {
        let u = k as f64 / samples as f64;
        // quadratic clustering toward the endpoint
        let xi = mdd.xi0() + span * u * u;
        min_density = min_density.min(mdd.density(xi));
    }

    let endpoint_extrapolated = extrapolate_endpoint(mdd);
    let endpoint_defect = (endpoint_extrapolated - mdd.omega0_at_xi0()).abs() / mdd.omega0_at_xi0().abs();

    let mut report = ValidationReport {
        tol,
        normalization,
        normalization_defect: (normalization - 1.0).abs(),
        normalization_error_estimate,
        min_density,
        negativity_defect: (-min_density).max(0.0),
        endpoint_extrapolated,
        endpoint_defect,
        passed: false,
    };
    report.passed = report.failures().is_empty();
    Ok(report)
}
