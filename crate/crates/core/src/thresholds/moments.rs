//! Second moments of likelihood ratios and the hypothesis-testing tradeoff
//! they imply.

use rand::Rng;
use rand_distr::{Beta, Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::numeric::{ln_binomial, log_sum_exp, CompensatedSum};
use crate::priors::SpikePrior;
use crate::report::{Estimator, SecondMomentValue};
use crate::rng::{derive_seed, seeded, SimRng};

/// Largest n for which Rademacher overlaps are enumerated exactly.
pub const EXACT_RADEMACHER_MAX_N: usize = 24;

const CHUNKS: usize = 64;

/// Draws ⟨x, x′⟩ for two independent spikes.
fn sample_overlap(prior: &SpikePrior, n: usize, rng: &mut SimRng) -> f64 {
    match prior {
        SpikePrior::Spherical if n >= 2 => {
            // ⟨x,x′⟩² ~ Beta(1/2, (n−1)/2), with a symmetric sign
            let b = Beta::new(0.5, (n as f64 - 1.0) / 2.0).expect("valid shape");
            let r = b.sample(rng).sqrt();
            if rng.random::<bool>() {
                r
            } else {
                -r
            }
        }
        SpikePrior::IidRademacher => {
            let k = Binomial::new(n as u64, 0.5).expect("valid").sample(rng) as f64;
            (n as f64 - 2.0 * k) / n as f64
        }
        _ => {
            let x = prior.sample(n, rng);
            let y = prior.sample(n, rng);
            x.dot(&y)
        }
    }
}

/// Monte Carlo mean of `g(⟨x,x′⟩)` with its standard error. Chunks are
/// seeded independently and combined in a fixed order.
fn overlap_monte_carlo<G>(prior: &SpikePrior, n: usize, trials: usize, seed: u64, g: G) -> (f64, f64)
where
    G: Fn(f64) -> f64 + Sync,
{
    let per = trials.div_ceil(CHUNKS);
    let parts: Vec<(CompensatedSum, CompensatedSum, usize)> = (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let count = per.min(trials.saturating_sub(c * per));
            let mut rng = seeded(derive_seed(seed, c as u64));
            let (mut s, mut s2) = (CompensatedSum::default(), CompensatedSum::default());
            for _ in 0..count {
                let v = g(sample_overlap(prior, n, &mut rng));
                s.add(v);
                s2.add(v * v);
            }
            (s, s2, count)
        })
        .collect();
    let (mut s, mut s2) = (CompensatedSum::default(), CompensatedSum::default());
    for (a, b, _) in &parts {
        s.add(a.value());
        s2.add(b.value());
    }
    let m = trials as f64;
    let mean = s.value() / m;
    let var = (s2.value() / m - mean * mean).max(0.0) * m / (m - 1.0).max(1.0);
    (mean, (var / m).sqrt())
}

/// Exact `E g(⟨x,x′⟩)` for the Rademacher prior: `n⟨x,x′⟩ = n − 2K` with
/// `K ~ Bin(n, 1/2)`. `log_g` is the log of g.
fn rademacher_exact<G: Fn(f64) -> f64>(n: usize, log_g: G) -> f64 {
    let nf = n as f64;
    log_sum_exp((0..=n).map(|k| {
        ln_binomial(n as u64, k as u64) - nf * std::f64::consts::LN_2 + log_g((nf - 2.0 * k as f64) / nf)
    }))
    .exp()
}

/// `E_{x,x′} exp((nλ²/2)⟨x,x′⟩²)`, exactly for Rademacher spikes with
/// n ≤ 24 and by Monte Carlo otherwise.
pub fn second_moment_gwig(prior: &SpikePrior, lambda: f64, n: usize, trials: usize, seed: u64) -> Result<SecondMomentValue> {
    if !(lambda >= 0.0) || n == 0 {
        return Err(Error::InvalidParameter("need lambda ≥ 0 and n ≥ 1".into()));
    }
    if lambda == 0.0 {
        return Ok(SecondMomentValue::exact(1.0, Some(n)));
    }
    let c = n as f64 * lambda * lambda / 2.0;
    if matches!(prior, SpikePrior::IidRademacher) && n <= EXACT_RADEMACHER_MAX_N {
        return Ok(SecondMomentValue::exact(rademacher_exact(n, |r| c * r * r), Some(n)));
    }
    monte_carlo(prior, n, trials, seed, |r| (c * r * r).exp())
}

fn monte_carlo<G: Fn(f64) -> f64 + Sync>(
    prior: &SpikePrior,
    n: usize,
    trials: usize,
    seed: u64,
    g: G,
) -> Result<SecondMomentValue> {
    if trials < 2 {
        return Err(Error::InvalidParameter("Monte Carlo needs at least 2 trials".into()));
    }
    let (value, se) = overlap_monte_carlo(prior, n, trials, seed, g);
    Ok(SecondMomentValue {
        value,
        n: Some(n),
        estimator: Estimator::MonteCarlo,
        std_error: Some(se),
    })
}

/// Monte Carlo estimate of `E_{x,x′} exp((nλ²/2)⟨x,x′⟩²)` even where an
/// exact value is available.
pub fn second_moment_gwig_monte_carlo(
    prior: &SpikePrior,
    lambda: f64,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<SecondMomentValue> {
    let c = n as f64 * lambda * lambda / 2.0;
    monte_carlo(prior, n, trials, seed, |r| (c * r * r).exp())
}

/// Kummer's series for ₁F₁(a; b; z), z ≥ 0, summed until the relative
/// term size drops below 1e-12.
pub fn hyp1f1(a: f64, b: f64, z: f64) -> Result<f64> {
    const MAX_TERMS: usize = 1_000_000;
    let mut sum = CompensatedSum::default();
    let mut term = 1.0;
    sum.add(term);
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) / (b + kf) * z / (kf + 1.0);
        sum.add(term);
        if !sum.value().is_finite() || sum.value() > 1e300 {
            return Err(Error::SeriesDivergence { terms: k + 1 });
        }
        // terms decrease monotonically once k exceeds z
        if kf > z && term.abs() <= 1e-12 * sum.value().abs() {
            return Ok(sum.value());
        }
    }
    Err(Error::SeriesDivergence { terms: MAX_TERMS })
}

/// Spherical-prior second moment `₁F₁(1/2; n/2; λ²n/2)`; `n = None` gives
/// the limit `(1−λ²)^{-1/2}` (infinite for λ ≥ 1).
pub fn second_moment_spherical_exact(n: Option<usize>, lambda: f64) -> Result<SecondMomentValue> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be nonnegative, got {lambda}")));
    }
    match n {
        None => {
            let v = if lambda < 1.0 { (1.0 - lambda * lambda).powf(-0.5) } else { f64::INFINITY };
            Ok(SecondMomentValue::exact(v, None))
        }
        Some(0) => Err(Error::InvalidParameter("n must be positive".into())),
        Some(n) => {
            let nf = n as f64;
            let v = hyp1f1(0.5, nf / 2.0, lambda * lambda * nf / 2.0)?;
            Ok(SecondMomentValue {
                value: v,
                n: Some(n),
                estimator: Estimator::Series,
                std_error: None,
            })
        }
    }
}

/// Smallest type-II error β compatible with type-I error α when
/// `E_Q (dP/dQ)² = M`: the smaller root of
/// `(1−β)²/α + β²/(1−α) = M`, clipped at 0.
pub fn hyptest_tradeoff(m: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(m >= 1.0 - 1e-12) {
        return Err(Error::InvalidParameter(format!("second moment must be at least 1, got {m}")));
    }
    if m.is_infinite() {
        return Ok(0.0);
    }
    let disc = alpha * (1.0 - alpha) * (m - 1.0).max(0.0);
    Ok(((1.0 - alpha) - disc.sqrt()).max(0.0))
}

/// `E_Q (dP/dQ)²` for `P = Bern(1−β)`, `Q = Bern(α)`, summed over the two
/// outcomes directly.
pub fn bernoulli_second_moment(alpha: f64, beta: f64) -> f64 {
    let p = [beta, 1.0 - beta];
    let q = [1.0 - alpha, alpha];
    p.iter().zip(&q).map(|(p, q)| p * p / q).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NongaussianBounds {
    /// λ*/√F: contiguity below this.
    pub lower: f64,
    /// 1/√F: pre-transformed PCA succeeds above this.
    pub upper: f64,
    pub fisher: f64,
    pub matching: bool,
}

pub fn nongaussian_bounds(noise: &NoiseModel, lambda_star: f64) -> Result<NongaussianBounds> {
    if !(lambda_star > 0.0 && lambda_star <= 1.0) {
        return Err(Error::InvalidParameter(format!("lambda* must lie in (0, 1], got {lambda_star}")));
    }
    let fisher = noise.fisher_information()?;
    let upper = 1.0 / fisher.sqrt();
    Ok(NongaussianBounds {
        lower: lambda_star * upper,
        upper,
        fisher,
        matching: lambda_star == 1.0,
    })
}

/// Number of samples N for the Wishart model.
fn wishart_big_n(n: usize, gamma: f64) -> Result<f64> {
    Ok(crate::models::wishart_samples(n, gamma)? as f64)
}

/// `E_{x,x′}(1 − β²⟨x,x′⟩²)^{−N/2}`, N = round(n/γ); infinite when some
/// overlap reaches `β²⟨x,x′⟩² ≥ 1`.
pub fn second_moment_wishart(
    prior: &SpikePrior,
    beta: f64,
    gamma: f64,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<SecondMomentValue> {
    if beta < -1.0 {
        return Err(Error::InvalidBeta(beta));
    }
    let half_n = wishart_big_n(n, gamma)? / 2.0;
    let b2 = beta * beta;
    if b2 == 0.0 {
        return Ok(SecondMomentValue::exact(1.0, Some(n)));
    }
    let log_g = |r: f64| {
        let u = b2 * r * r;
        if u >= 1.0 {
            f64::INFINITY
        } else {
            -half_n * (-u).ln_1p()
        }
    };
    if matches!(prior, SpikePrior::IidRademacher) && n <= EXACT_RADEMACHER_MAX_N {
        return Ok(SecondMomentValue::exact(rademacher_exact(n, log_g), Some(n)));
    }
    let mut v = monte_carlo(prior, n, trials, seed, |r| log_g(r).exp())?;
    if v.value.is_infinite() {
        v.std_error = None;
    }
    Ok(v)
}

/// Exact Wishart second moment for the Rademacher prior (any n; the
/// enumeration is over n+1 overlap values).
pub fn second_moment_wishart_rademacher_exact(beta: f64, gamma: f64, n: usize) -> Result<SecondMomentValue> {
    let half_n = wishart_big_n(n, gamma)? / 2.0;
    let b2 = beta * beta;
    let v = rademacher_exact(n, |r| {
        let u = b2 * r * r;
        if u >= 1.0 {
            f64::INFINITY
        } else {
            -half_n * (-u).ln_1p()
        }
    });
    Ok(SecondMomentValue::exact(v, Some(n)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kummer_small_cases() {
        assert_eq!(hyp1f1(0.5, 3.0, 0.0).unwrap(), 1.0);
        // ₁F₁(a; a; z) = e^z
        assert!((hyp1f1(2.5, 2.5, 3.0).unwrap() - 3f64.exp()).abs() < 1e-11 * 3f64.exp());
        // ₁F₁(1; 2; z) = (e^z − 1)/z
        let z = 7.5;
        assert!((hyp1f1(1.0, 2.0, z).unwrap() - z.exp_m1() / z).abs() < 1e-10);
        assert!(matches!(hyp1f1(0.5, 1.0, 1e4), Err(Error::SeriesDivergence { .. })));
    }

    #[test]
    fn spherical_limit_value() {
        let v = second_moment_spherical_exact(None, 0.6).unwrap();
        assert!((v.value - 1.25).abs() < 1e-15);
        assert!(second_moment_spherical_exact(None, 1.0).unwrap().is_infinite());
    }

    #[test]
    fn tradeoff_edge_cases() {
        for a in [0.01, 0.3, 0.9] {
            assert!((hyptest_tradeoff(1.0, a).unwrap() - (1.0 - a)).abs() < 1e-15);
        }
        let (a, b) = (0.2, 0.3);
        let m = bernoulli_second_moment(a, b);
        assert!((hyptest_tradeoff(m, a).unwrap() - b).abs() < 1e-12);
    }

    #[test]
    fn wishart_moment_is_even_in_beta() {
        let p = SpikePrior::sparse_rademacher(0.5).unwrap();
        let a = second_moment_wishart(&p, 0.4, 0.5, 30, 2000, 3).unwrap();
        let b = second_moment_wishart(&p, -0.4, 0.5, 30, 2000, 3).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn rademacher_exact_agrees_with_direct_sum() {
        let n = 6;
        let v = second_moment_gwig(&SpikePrior::IidRademacher, 0.7, n, 0, 0).unwrap();
        let mut direct = 0.0;
        for m in 0..1u32 << n {
            let s: i32 = (0..n).map(|i| if m >> i & 1 == 1 { 1 } else { -1 }).sum();
            let r = s as f64 / n as f64;
            direct += (n as f64 * 0.49 / 2.0 * r * r).exp();
        }
        direct /= 64.0;
        assert!((v.value - direct).abs() < 1e-12 * direct);
    }
}
