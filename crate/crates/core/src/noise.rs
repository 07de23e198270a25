//! Continuous unit-variance noise laws with analytic densities.
//!
//! Every registered law is a finite Gaussian mixture (the standard Gaussian
//! is the one-component case), so the density, its log-derivative and the
//! score `f(w) = -p'(w)/p(w)` are available in closed form. Fisher
//! information under translation and the translation function are computed
//! by adaptive quadrature over the real line.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::ParsedId;
use crate::numeric::{integrate_real_line, log_sum_exp};

const QUAD_TOL: f64 = 1e-13;

/// Largest |a|, |b| accepted by [`NoiseModel::translation_fn`].
pub const TRANSLATION_DOMAIN: f64 = 1.0;

/// One weighted Gaussian component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Which registered family a model came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseKind {
    Gaussian,
    /// Rademacher(±mu) convolved with N(0, sigma2); unit variance requires
    /// `mu2 + sigma2 = 1`.
    Bimodal { mu2: f64, sigma2: f64 },
    GaussMixture,
}

/// A unit-variance noise law. Immutable after construction.
#[derive(Debug)]
pub struct NoiseModel {
    kind: NoiseKind,
    components: Vec<Component>,
    fisher: OnceLock<f64>,
}

impl Clone for NoiseModel {
    fn clone(&self) -> Self {
        let fisher = OnceLock::new();
        if let Some(v) = self.fisher.get() {
            let _ = fisher.set(*v);
        }
        Self {
            kind: self.kind.clone(),
            components: self.components.clone(),
            fisher,
        }
    }
}

impl NoiseModel {
    /// Standard Gaussian.
    pub fn gaussian() -> Self {
        Self::from_parts(
            NoiseKind::Gaussian,
            vec![Component {
                weight: 1.0,
                mean: 0.0,
                variance: 1.0,
            }],
        )
        .expect("standard Gaussian is valid")
    }

    /// Rademacher(±√mu2) ⊛ N(0, sigma2).
    pub fn bimodal(mu2: f64, sigma2: f64) -> Result<Self> {
        if !(mu2 >= 0.0 && sigma2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bimodal needs mu2 >= 0 and sigma2 > 0, got ({mu2}, {sigma2})"
            )));
        }
        let mu = mu2.sqrt();
        Self::from_parts(
            NoiseKind::Bimodal { mu2, sigma2 },
            vec![
                Component {
                    weight: 0.5,
                    mean: -mu,
                    variance: sigma2,
                },
                Component {
                    weight: 0.5,
                    mean: mu,
                    variance: sigma2,
                },
            ],
        )
    }

    /// The canonical bimodal instance (mu² = 0.95, sigma² = 0.05).
    pub fn canonical_bimodal() -> Self {
        Self::bimodal(0.95, 0.05).expect("canonical bimodal is valid")
    }

    /// ½N(−a, 1−a²) + ½N(a, 1−a²), unit variance for |a| < 1.
    pub fn symmetric_pair(a: f64) -> Result<Self> {
        if a.abs() >= 1.0 {
            return Err(Error::InvalidParameter(format!("|a| must be < 1, got {a}")));
        }
        Self::gauss_mixture(vec![
            Component {
                weight: 0.5,
                mean: -a,
                variance: 1.0 - a * a,
            },
            Component {
                weight: 0.5,
                mean: a,
                variance: 1.0 - a * a,
            },
        ])
    }

    /// A general Gaussian mixture; must have mean 0 and variance 1.
    pub fn gauss_mixture(components: Vec<Component>) -> Result<Self> {
        Self::from_parts(NoiseKind::GaussMixture, components)
    }

    fn from_parts(kind: NoiseKind, components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("mixture has no components".into()));
        }
        let mut wsum = 0.0;
        let mut mean = 0.0;
        let mut second = 0.0;
        for c in &components {
            if !(c.weight > 0.0 && c.variance > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "component weights and variances must be positive: {c:?}"
                )));
            }
            wsum += c.weight;
            mean += c.weight * c.mean;
            second += c.weight * (c.variance + c.mean * c.mean);
        }
        if (wsum - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!("weights sum to {wsum}")));
        }
        if mean.abs() > 1e-6 || (second - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParameter(format!(
                "noise must have mean 0 and variance 1 (mean {mean}, variance {second})"
            )));
        }
        Ok(Self {
            kind,
            components,
            fisher: OnceLock::new(),
        })
    }

    /// Parses `gaussian`, `bimodal{mu2,sigma2}` or
    /// `gauss_mixture{weights=..,means=..,vars=..}`.
    pub fn from_id(id: &str) -> Result<Self> {
        let p = ParsedId::parse(id)?;
        match p.name.as_str() {
            "gaussian" => Ok(Self::gaussian()),
            "bimodal" => {
                if p.args.is_empty() {
                    Ok(Self::canonical_bimodal())
                } else {
                    Self::bimodal(p.f64_arg("mu2", 0)?, p.f64_arg("sigma2", 1)?)
                }
            }
            "gauss_mixture" => {
                let w = p.list_arg("weights", 0)?;
                let m = p.list_arg("means", 1)?;
                let v = p.list_arg("vars", 2)?;
                if w.len() != m.len() || w.len() != v.len() {
                    return Err(Error::Config("gauss_mixture lists differ in length".into()));
                }
                Self::gauss_mixture(
                    w.into_iter()
                        .zip(m)
                        .zip(v)
                        .map(|((weight, mean), variance)| Component {
                            weight,
                            mean,
                            variance,
                        })
                        .collect(),
                )
            }
            other => Err(Error::Config(format!("unknown noise model `{other}`"))),
        }
    }

    pub fn id(&self) -> String {
        match &self.kind {
            NoiseKind::Gaussian => "gaussian".into(),
            NoiseKind::Bimodal { mu2, sigma2 } => format!("bimodal{{mu2={mu2},sigma2={sigma2}}}"),
            NoiseKind::GaussMixture => {
                let join = |f: fn(&Component) -> f64| {
                    self.components
                        .iter()
                        .map(|c| f(c).to_string())
                        .collect::<Vec<_>>()
                        .join("|")
                };
                format!(
                    "gauss_mixture{{weights={},means={},vars={}}}",
                    join(|c| c.weight),
                    join(|c| c.mean),
                    join(|c| c.variance)
                )
            }
        }
    }

    pub fn kind(&self) -> &NoiseKind {
        &self.kind
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn is_gaussian(&self) -> bool {
        self.components.len() == 1
    }

    fn log_terms(&self, w: f64) -> impl Iterator<Item = f64> + '_ {
        self.components.iter().map(move |c| {
            let d = w - c.mean;
            c.weight.ln() - 0.5 * (2.0 * PI * c.variance).ln() - 0.5 * d * d / c.variance
        })
    }

    pub fn log_density(&self, w: f64) -> f64 {
        log_sum_exp(self.log_terms(w))
    }

    /// p(w).
    pub fn density(&self, w: f64) -> f64 {
        self.log_density(w).exp()
    }

    /// p′(w)/p(w), evaluated through the component responsibilities.
    pub fn log_density_derivative(&self, w: f64) -> f64 {
        let logs: Vec<f64> = self.log_terms(w).collect();
        let total = log_sum_exp(logs.iter().copied());
        self.components
            .iter()
            .zip(&logs)
            .map(|(c, l)| -(l - total).exp() * (w - c.mean) / c.variance)
            .sum()
    }

    /// Score `f(w) = −p′(w)/p(w)`.
    pub fn score(&self, w: f64) -> Result<f64> {
        let p = self.density(w);
        if !(p > 0.0) {
            return Err(Error::NonPositiveDensity(w));
        }
        Ok(-self.log_density_derivative(w))
    }

    /// Mean and variance from the mixture parameters.
    pub fn moments(&self) -> (f64, f64) {
        let mean: f64 = self.components.iter().map(|c| c.weight * c.mean).sum();
        let second: f64 = self
            .components
            .iter()
            .map(|c| c.weight * (c.variance + c.mean * c.mean))
            .sum();
        (mean, second - mean * mean)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = self.components.last().expect("non-empty");
        for c in &self.components {
            acc += c.weight;
            if u < acc {
                chosen = c;
                break;
            }
        }
        let z: f64 = StandardNormal.sample(rng);
        chosen.mean + chosen.variance.sqrt() * z
    }

    /// Fisher information under translation, `∫ p′²/p`. Cached after the
    /// first call.
    pub fn fisher_information(&self) -> Result<f64> {
        if let Some(v) = self.fisher.get() {
            return Ok(*v);
        }
        let q = integrate_real_line(
            &|w| {
                let s = self.log_density_derivative(w);
                s * s * self.density(w)
            },
            QUAD_TOL,
        )?;
        let _ = self.fisher.set(q.value);
        Ok(q.value)
    }

    /// `τ(a, b) = log E[p(z−a) p(z−b) / p(z)²]` with `z ~ p`.
    ///
    /// Evaluated as `log1p(∫ (p(z−a)−p(z)) (p(z−b)−p(z)) / p(z) dz)`, which
    /// equals the defining expression because each shifted density integrates
    /// to one; this avoids cancellation for small arguments.
    pub fn translation_fn(&self, a: f64, b: f64) -> Result<f64> {
        if a.abs() > TRANSLATION_DOMAIN || b.abs() > TRANSLATION_DOMAIN {
            return Err(Error::InvalidParameter(format!(
                "translation function is evaluated only on |a|,|b| <= {TRANSLATION_DOMAIN}"
            )));
        }
        if a == 0.0 || b == 0.0 {
            return Ok(0.0);
        }
        let q = integrate_real_line(
            &|z| {
                let lp = self.log_density(z);
                let da = (self.log_density(z - a) - lp).exp_m1();
                let db = (self.log_density(z - b) - lp).exp_m1();
                lp.exp() * da * db
            },
            QUAD_TOL,
        )?;
        Ok(q.value.ln_1p())
    }

    /// A pair `(C, m)` with `|f^(l)(w)| <= C (1 + |w|^m)` for `l = 0..=3`,
    /// found by scanning the analytic score and its finite differences on
    /// `[-60, 60]`. Mixture scores grow at most linearly, so `m = 2`
    /// suffices.
    pub fn polynomial_bound(&self) -> (f64, u32) {
        let h = 1e-3;
        let f = |w: f64| -self.log_density_derivative(w);
        let mut c: f64 = 0.0;
        let mut w = -60.0;
        while w <= 60.0 {
            let d0 = f(w);
            let d1 = (f(w + h) - f(w - h)) / (2.0 * h);
            let d2 = (f(w + h) - 2.0 * d0 + f(w - h)) / (h * h);
            let d3 = (f(w + 2.0 * h) - 2.0 * f(w + h) + 2.0 * f(w - h) - f(w - 2.0 * h))
                / (2.0 * h * h * h);
            let scale = 1.0 + w * w;
            for d in [d0, d1, d2, d3] {
                c = c.max(d.abs() / scale);
            }
            w += 0.01;
        }
        (1.5 * c, 2)
    }
}
