//! Spike priors, their overlap laws and the sub-Gaussian and rate-function
//! machinery built on the product `ππ′` of two independent marginals.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::ParsedId;
use crate::numeric::{golden_max, log_sum_exp};
use crate::rng::{derive_seed, seeded};

const LAW_TOL: f64 = 1e-10;

/// A zero-mean, unit-variance law on finitely many points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteLaw {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl FiniteLaw {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::InvalidParameter(
                "finite law needs matching, non-empty value and probability lists".into(),
            ));
        }
        if probs.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::InvalidParameter("probabilities must be positive".into()));
        }
        let total: f64 = probs.iter().sum();
        let mean: f64 = values.iter().zip(&probs).map(|(a, p)| a * p).sum();
        let second: f64 = values.iter().zip(&probs).map(|(a, p)| a * a * p).sum();
        if (total - 1.0).abs() > LAW_TOL || mean.abs() > LAW_TOL || (second - 1.0).abs() > LAW_TOL
        {
            return Err(Error::InvalidParameter(format!(
                "law must have total mass 1, mean 0, variance 1 (got {total}, {mean}, {second})"
            )));
        }
        Ok(Self { values, probs })
    }

    pub fn rademacher() -> Self {
        Self {
            values: vec![-1.0, 1.0],
            probs: vec![0.5, 0.5],
        }
    }

    /// ±1/√ρ with probability ρ/2 each, 0 otherwise.
    pub fn sparse_rademacher(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::InvalidParameter(format!("rho must lie in (0, 1], got {rho}")));
        }
        if rho == 1.0 {
            return Ok(Self::rademacher());
        }
        let a = 1.0 / rho.sqrt();
        Ok(Self {
            values: vec![-a, 0.0, a],
            probs: vec![rho / 2.0, 1.0 - rho, rho / 2.0],
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest |ππ′|.
    pub fn max_abs_product(&self) -> f64 {
        let m = self.values.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        m * m
    }

    /// Index of the value `−a` for each `a`, if the law is symmetric.
    pub fn reflection(&self) -> Option<Vec<usize>> {
        self.values
            .iter()
            .zip(&self.probs)
            .map(|(a, p)| {
                self.values.iter().zip(&self.probs).position(|(b, q)| {
                    (a + b).abs() <= 1e-12 * (1.0 + a.abs()) && (p - q).abs() <= 1e-12
                })
            })
            .collect()
    }

    /// E|π|^q.
    pub fn abs_moment(&self, q: f64) -> f64 {
        self.values.iter().zip(&self.probs).map(|(a, p)| p * a.abs().powf(q)).sum()
    }

    /// Atoms `(value, probability)` of the product law `ππ′`, merged.
    pub fn product_atoms(&self) -> Vec<(f64, f64)> {
        let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(self.len() * self.len());
        for (a, p) in self.values.iter().zip(&self.probs) {
            for (b, q) in self.values.iter().zip(&self.probs) {
                atoms.push((a * b, p * q));
            }
        }
        atoms.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (v, p) in atoms {
            match merged.last_mut() {
                Some(last) if (last.0 - v).abs() <= 1e-12 * (1.0 + v.abs()) => last.1 += p,
                _ => merged.push((v, p)),
            }
        }
        merged
    }

    /// `log E exp(t ππ′)`.
    pub fn product_cgf(&self, t: f64) -> f64 {
        cgf(&self.product_atoms(), t)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (a, p) in self.values.iter().zip(&self.probs) {
            acc += p;
            if u < acc {
                return *a;
            }
        }
        *self.values.last().expect("law is non-empty")
    }
}

/// Cumulant generating function of a finite law given as atoms. Uses
/// `ln_1p(Σ p (e^{tv} − 1))` where that cannot overflow, which keeps full
/// relative precision as `t → 0`.
fn cgf(atoms: &[(f64, f64)], t: f64) -> f64 {
    let vmax = atoms.iter().fold(0.0f64, |m, (v, _)| m.max(v.abs()));
    if (t * vmax).abs() < 30.0 {
        atoms
            .iter()
            .map(|(v, p)| p * (t * v).exp_m1())
            .sum::<f64>()
            .ln_1p()
    } else {
        log_sum_exp(atoms.iter().map(|(v, p)| p.ln() + t * v))
    }
}

/// The spike prior catalogue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpikePrior {
    /// Uniform on the unit sphere.
    Spherical,
    IidRademacher,
    IidGaussian,
    SparseRademacher { rho: f64 },
    CustomFinite { law: FiniteLaw },
}

impl SpikePrior {
    pub fn sparse_rademacher(rho: f64) -> Result<Self> {
        FiniteLaw::sparse_rademacher(rho)?;
        Ok(Self::SparseRademacher { rho })
    }

    /// Parses `spherical`, `iid_rademacher`, `iid_gaussian`,
    /// `sparse_rademacher{rho}` or `custom_finite{values=..,probs=..}`.
    pub fn from_id(id: &str) -> Result<Self> {
        let p = ParsedId::parse(id)?;
        match p.name.as_str() {
            "spherical" => Ok(Self::Spherical),
            "iid_rademacher" => Ok(Self::IidRademacher),
            "iid_gaussian" => Ok(Self::IidGaussian),
            "sparse_rademacher" => Self::sparse_rademacher(p.f64_arg("rho", 0)?),
            "custom_finite" => Ok(Self::CustomFinite {
                law: FiniteLaw::new(p.list_arg("values", 0)?, p.list_arg("probs", 1)?)?,
            }),
            other => Err(Error::Config(format!("unknown prior `{other}`"))),
        }
    }

    pub fn id(&self) -> String {
        match self {
            Self::Spherical => "spherical".into(),
            Self::IidRademacher => "iid_rademacher".into(),
            Self::IidGaussian => "iid_gaussian".into(),
            Self::SparseRademacher { rho } => format!("sparse_rademacher{{rho={rho}}}"),
            Self::CustomFinite { law } => {
                let join = |v: &[f64]| {
                    v.iter().map(f64::to_string).collect::<Vec<_>>().join("|")
                };
                format!(
                    "custom_finite{{values={},probs={}}}",
                    join(law.values()),
                    join(law.probs())
                )
            }
        }
    }

    /// The finite-support marginal π, if any.
    pub fn marginal(&self) -> Option<FiniteLaw> {
        match self {
            Self::IidRademacher => Some(FiniteLaw::rademacher()),
            Self::SparseRademacher { rho } => FiniteLaw::sparse_rademacher(*rho).ok(),
            Self::CustomFinite { law } => Some(law.clone()),
            Self::Spherical | Self::IidGaussian => None,
        }
    }

    /// `log c` where the prior is supported on `c^n` points.
    pub fn support_log_cardinality(&self) -> Option<f64> {
        self.marginal().map(|law| (law.len() as f64).ln())
    }

    /// Catalogued λ*; `None` where no closed form is certified.
    pub fn lambda_star(&self) -> Option<f64> {
        match self {
            Self::Spherical | Self::IidRademacher | Self::IidGaussian => Some(1.0),
            _ => None,
        }
    }

    /// Draws a spike of length `n`; i.i.d. priors are scaled by 1/√n.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> DVector<f64> {
        let scale = 1.0 / (n as f64).sqrt();
        match self {
            Self::Spherical => {
                let v: DVector<f64> = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
                let norm = v.norm();
                v / norm
            }
            Self::IidGaussian => {
                DVector::from_fn(n, |_, _| {
                let z: f64 = StandardNormal.sample(rng);
                scale * z
            })
            }
            Self::IidRademacher => DVector::from_fn(n, |_, _| {
                if rng.random::<bool>() {
                    scale
                } else {
                    -scale
                }
            }),
            Self::SparseRademacher { .. } | Self::CustomFinite { .. } => {
                let law = self.marginal().expect("finite prior has a marginal");
                DVector::from_fn(n, |_, _| scale * law.sample(rng))
            }
        }
    }

    /// Rate function f_X(t) of the squared overlap ⟨x,x′⟩²; `None` if the
    /// prior has none catalogued.
    pub fn rate_function(&self, t: f64) -> Option<f64> {
        match self {
            Self::Spherical => Some(if t >= 1.0 { f64::INFINITY } else { -0.5 * (1.0 - t).ln() }),
            Self::IidRademacher => {
                let s = t.max(0.0).sqrt();
                Some(match s {
                    s if s > 1.0 => f64::INFINITY,
                    s if s == 1.0 => std::f64::consts::LN_2,
                    // ½[(1+s)ln(1+s) + (1−s)ln(1−s)]
                    s => 0.5 * ((1.0 + s) * s.ln_1p() + (1.0 - s) * (-s).ln_1p()),
                })
            }
            Self::IidGaussian => {
                let u = t.max(0.0).sqrt();
                if u == 0.0 {
                    return Some(0.0);
                }
                let theta = ((1.0 + 4.0 * u * u).sqrt() - 1.0) / (2.0 * u);
                Some(u * theta + 0.5 * (1.0 - theta * theta).ln())
            }
            _ => self.marginal().map(|law| rate_function(&law, t)),
        }
    }
}

/// Draws a spike with a fresh generator seeded by `seed`.
pub fn sample_spike(prior: &SpikePrior, n: usize, seed: u64) -> DVector<f64> {
    prior.sample(n, &mut seeded(seed))
}

/// `(σ*)² = sup_{t≠0} (2/t²) log E exp(t ππ′)`.
///
/// Scans a t-grid of step 1e-3 on both signs and polishes the best cell with
/// golden-section search. Returns exactly 1 when the scan never exceeds
/// `1 + 1e-9`, since the t → 0 limit is the variance of ππ′.
pub fn subgaussian_proxy(law: &FiniteLaw) -> f64 {
    subgaussian_proxy_with_argmax(law).0
}

/// As [`subgaussian_proxy`], also returning the maximizing t (0 for the
/// limit value).
pub fn subgaussian_proxy_with_argmax(law: &FiniteLaw) -> (f64, f64) {
    const STEP: f64 = 1e-3;
    let atoms = law.product_atoms();
    let ratio = |t: f64| 2.0 * cgf(&atoms, t) / (t * t);
    // log E e^{tX} ≤ t·max|X| gives ratio < 1 beyond t = 2 max|X|
    let t_max = 2.0 * law.max_abs_product() + 1.0;
    let steps = (t_max / STEP).ceil() as usize;
    let mut best = (1.0, 0.0);
    for sign in [1.0, -1.0] {
        for k in 1..=steps {
            let t = sign * k as f64 * STEP;
            let v = ratio(t);
            if v > best.0 {
                best = (v, t);
            }
        }
    }
    if best.0 <= 1.0 + 1e-9 {
        return (1.0, 0.0);
    }
    let t0 = best.1;
    let (lo, hi) = (t0 - STEP, t0 + STEP);
    let (lo, hi) = if t0 > 0.0 { (lo.max(STEP * 0.5), hi) } else { (lo, hi.min(-STEP * 0.5)) };
    let (t, v) = golden_max(ratio, lo, hi, 1e-10);
    if v > best.0 {
        (v, t)
    } else {
        best
    }
}

/// Variance proxy for a prior; only finite marginals have one.
pub fn prior_subgaussian_proxy(prior: &SpikePrior) -> Result<f64> {
    match prior.marginal() {
        Some(law) => Ok(subgaussian_proxy(&law)),
        None => match prior {
            SpikePrior::IidGaussian => Err(Error::UnboundedProxy),
            _ => Err(Error::InvalidParameter(format!(
                "prior `{}` has no i.i.d. marginal",
                prior.id()
            ))),
        },
    }
}

/// Legendre transform `I(u) = sup_θ (uθ − log E e^{θππ′})`.
pub fn cramer_transform(law: &FiniteLaw, u: f64) -> f64 {
    let atoms = law.product_atoms();
    let (lo_v, lo_p) = atoms[0];
    let (hi_v, hi_p) = atoms[atoms.len() - 1];
    let tol = 1e-12 * (1.0 + u.abs());
    if u > hi_v + tol || u < lo_v - tol {
        return f64::INFINITY;
    }
    if (u - hi_v).abs() <= tol {
        return -hi_p.ln();
    }
    if (u - lo_v).abs() <= tol {
        return -lo_p.ln();
    }
    // tilted mean is increasing in θ; bracket the root of mean(θ) = u
    let tilted_mean = |theta: f64| {
        let lw: Vec<f64> = atoms.iter().map(|(v, p)| p.ln() + theta * v).collect();
        let z = log_sum_exp(lw.iter().copied());
        atoms
            .iter()
            .zip(&lw)
            .map(|((v, _), l)| v * (l - z).exp())
            .sum::<f64>()
    };
    let mean0 = tilted_mean(0.0);
    let dir = if u >= mean0 { 1.0 } else { -1.0 };
    let mut a = 0.0;
    let mut b = dir;
    while dir * (tilted_mean(b) - u) < 0.0 && b.abs() < 1e8 {
        a = b;
        b *= 2.0;
    }
    let (mut lo, mut hi) = if a < b { (a, b) } else { (b, a) };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tilted_mean(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
            break;
        }
    }
    let theta = 0.5 * (lo + hi);
    (u * theta - cgf(&atoms, theta)).max(0.0)
}

/// Rate function `f(t) = I(√t)` of the squared overlap of an i.i.d. prior.
/// For asymmetric laws both tails contribute and the smaller rate wins.
pub fn rate_function(law: &FiniteLaw, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let u = t.sqrt();
    cramer_transform(law, u).min(cramer_transform(law, -u))
}

/// Empirical frequencies of the bad events that the non-Gaussian lower bound
/// conditions away.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PriorAssumptionReport {
    pub prior: String,
    pub n: usize,
    pub trials: usize,
    /// Fraction of draws with some |x_i| ≥ n^{-1/3}.
    pub max_entry_rate: f64,
    /// `(q, α_q, fraction of draws with ‖x‖_q > α_q n^{1/q − 1/2})`.
    pub lq_rates: Vec<(u32, f64, f64)>,
    pub passes: bool,
}

fn double_factorial_odd(q: u32) -> f64 {
    (1..q).step_by(2).map(|k| k as f64).product()
}

/// Monte Carlo check of the entry-size and ℓ_q conditions. The constants
/// are α_q = (2 m_q)^{1/q} with m_q the q-th absolute moment of the
/// marginal ((q−1)!! for Gaussian-like priors). Passes when every rate is
/// at most 0.05.
pub fn prior_assumption_check(
    prior: &SpikePrior,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<PriorAssumptionReport> {
    use rayon::prelude::*;
    if n < 16 {
        return Err(Error::InvalidParameter(format!("n must be at least 16, got {n}")));
    }
    const QS: [u32; 4] = [2, 4, 6, 8];
    let alphas: Vec<f64> = QS
        .iter()
        .map(|&q| {
            let m = prior
                .marginal()
                .map(|law| law.abs_moment(q as f64))
                .unwrap_or_else(|| double_factorial_odd(q));
            (2.0 * m).powf(1.0 / q as f64)
        })
        .collect();
    let cap = (n as f64).powf(-1.0 / 3.0);
    let flags: Vec<(bool, [bool; 4])> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let x = sample_spike(prior, n, derive_seed(seed, i as u64));
            let big = x.iter().any(|v| v.abs() >= cap);
            let mut lq = [false; 4];
            for (k, &q) in QS.iter().enumerate() {
                let norm = x.iter().map(|v| v.abs().powi(q as i32)).sum::<f64>().powf(1.0 / q as f64);
                lq[k] = norm > alphas[k] * (n as f64).powf(1.0 / q as f64 - 0.5);
            }
            (big, lq)
        })
        .collect();
    let t = trials.max(1) as f64;
    let max_entry_rate = flags.iter().filter(|f| f.0).count() as f64 / t;
    let lq_rates: Vec<(u32, f64, f64)> = QS
        .iter()
        .enumerate()
        .map(|(k, &q)| (q, alphas[k], flags.iter().filter(|f| f.1[k]).count() as f64 / t))
        .collect();
    let passes = max_entry_rate <= 0.05 && lq_rates.iter().all(|r| r.2 <= 0.05);
    Ok(PriorAssumptionReport {
        prior: prior.id(),
        n,
        trials,
        max_entry_rate,
        lq_rates,
        passes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_entropy(p: f64) -> f64 {
        -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
    }

    #[test]
    fn law_validation() {
        assert!(FiniteLaw::new(vec![-1.0, 1.0], vec![0.5, 0.5]).is_ok());
        assert!(FiniteLaw::new(vec![-1.0, 2.0], vec![0.5, 0.5]).is_err());
        assert!(FiniteLaw::new(vec![-1.0], vec![0.5, 0.5]).is_err());
        let s = FiniteLaw::sparse_rademacher(0.3).unwrap();
        assert_eq!(s.reflection(), Some(vec![2, 1, 0]));
    }

    #[test]
    fn spherical_spike_has_unit_norm() {
        let x = sample_spike(&SpikePrior::Spherical, 5, 3);
        assert!((x.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rademacher_entries_are_half() {
        let x = sample_spike(&SpikePrior::IidRademacher, 4, 9);
        assert!(x.iter().all(|v| v.abs() == 0.5));
    }

    #[test]
    fn sparse_zero_fraction() {
        let prior = SpikePrior::sparse_rademacher(0.5).unwrap();
        let x = sample_spike(&prior, 10_000, 11);
        let zeros = x.iter().filter(|v| **v == 0.0).count() as f64 / 1e4;
        assert!((zeros - 0.5).abs() < 0.02);
    }

    #[test]
    fn norms_concentrate() {
        for prior in [
            SpikePrior::IidGaussian,
            SpikePrior::IidRademacher,
            SpikePrior::sparse_rademacher(0.2).unwrap(),
        ] {
            let mean: f64 = (0..200)
                .map(|i| sample_spike(&prior, 400, derive_seed(5, i)).norm())
                .sum::<f64>()
                / 200.0;
            assert!((mean - 1.0).abs() < 0.05, "{} {mean}", prior.id());
        }
    }

    #[test]
    fn id_round_trip() {
        for id in [
            "spherical",
            "iid_rademacher",
            "iid_gaussian",
            "sparse_rademacher{rho=0.3}",
            "custom_finite{values=-1|1,probs=0.5|0.5}",
        ] {
            let p = SpikePrior::from_id(id).unwrap();
            assert_eq!(SpikePrior::from_id(&p.id()).unwrap(), p);
        }
        assert!(SpikePrior::from_id("laplace").unwrap_err().is_config_error());
    }

    #[test]
    fn rademacher_proxy_is_one() {
        assert_eq!(subgaussian_proxy(&FiniteLaw::rademacher()), 1.0);
    }

    #[test]
    fn sparse_proxy_matches_grid() {
        let law = FiniteLaw::sparse_rademacher(0.3).unwrap();
        let rho = 0.3f64;
        let k = |t: f64| (1.0 - rho * rho + rho * rho * (t / rho).cosh()).ln();
        let grid = (1..20_000)
            .map(|i| i as f64 * 1e-3)
            .map(|t| 2.0 * k(t) / (t * t))
            .fold(0.0, f64::max);
        let (v, _) = subgaussian_proxy_with_argmax(&law);
        assert!(v > 1.0 && v >= grid - 1e-12 && v - grid < 1e-6);
    }

    #[test]
    fn gaussian_prior_has_unbounded_proxy() {
        assert!(matches!(
            prior_subgaussian_proxy(&SpikePrior::IidGaussian),
            Err(Error::UnboundedProxy)
        ));
    }

    #[test]
    fn rademacher_rate_matches_entropy() {
        let law = FiniteLaw::rademacher();
        for t in [0.01f64, 0.25, 0.5, 0.81, 0.99] {
            let exact = 2f64.ln() - binary_entropy((1.0 + t.sqrt()) / 2.0);
            assert!((rate_function(&law, t) - exact).abs() < 1e-10, "t={t}");
        }
        assert_eq!(rate_function(&law, 0.0), 0.0);
        assert!((rate_function(&law, 1.0) - 2f64.ln()).abs() < 1e-12);
        assert!(rate_function(&law, 1.1).is_infinite());
    }

    #[test]
    fn gaussian_and_spherical_rates() {
        // Gaussian product law: compare the closed form against a direct
        // maximization of uθ + ½log(1−θ²)
        let u = 0.6f64;
        let (_, direct) = golden_max(|th| u * th + 0.5 * (1.0 - th * th).ln(), 0.0, 0.999, 1e-12);
        let closed = SpikePrior::IidGaussian.rate_function(u * u).unwrap();
        assert!((closed - direct).abs() < 1e-10);
        assert!((SpikePrior::Spherical.rate_function(0.5).unwrap() - 0.5 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn assumption_check_rademacher_is_deterministic() {
        let r = prior_assumption_check(&SpikePrior::IidRademacher, 64, 20, 1).unwrap();
        assert_eq!(r.max_entry_rate, 0.0);
        assert!(r.passes);
    }
}
