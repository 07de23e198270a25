//! Contiguity regions for the spiked Wishart model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{bisect_predicate, golden_max};

/// Number of uniform grid points on (0, 1).
pub const GRID_POINTS: usize = 10_000;

/// The uniform grid plus geometric refinement towards both endpoints.
pub fn region_grid() -> Vec<f64> {
    let mut t: Vec<f64> = (1..=GRID_POINTS).map(|i| i as f64 / (GRID_POINTS + 1) as f64).collect();
    for k in 5..=9 {
        let h = 10f64.powi(-k);
        t.push(h);
        t.push(1.0 - h);
    }
    t.sort_by(f64::total_cmp);
    t
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WishartRegionReport {
    pub gamma: f64,
    pub beta: f64,
    pub beta_sq_below_one: bool,
    /// β²/γ < (λ*)².
    pub spectral_condition: bool,
    /// `f(t) + log(1−β²t)/(2γ) > 0` on the whole grid.
    pub inequality_holds: bool,
    /// Minimum of `f(t) + log(1−β²t)/(2γ)` over the grid.
    pub margin: f64,
    /// Minimum of the same quantity divided by t, which stays of order one
    /// near t = 0.
    pub scaled_margin: f64,
    /// Grid point where the inequality fails by the most, if it fails.
    pub failing_t: Option<f64>,
    /// All three conditions of the contiguity statement hold.
    pub contiguous: bool,
    /// One of the divergence triggers fires: β² > 1, β²/γ > (λ*)², or a
    /// failing t.
    pub second_moment_unbounded: bool,
}

/// Checks `β² < 1`, `β²/γ < (λ*)²` and `f(t) > −log(1−β²t)/(2γ)` on
/// (0, 1), and reports which divergence triggers fire.
pub fn wishart_contiguity_region(
    rate_fn: &dyn Fn(f64) -> f64,
    lambda_star: f64,
    gamma: f64,
    beta: f64,
) -> Result<WishartRegionReport> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    let b2 = beta * beta;
    let (mut margin, mut scaled, mut worst_t) = (f64::INFINITY, f64::INFINITY, 0.0);
    for t in region_grid() {
        let u = b2 * t;
        let rhs = if u >= 1.0 { f64::INFINITY } else { -(-u).ln_1p() / (2.0 * gamma) };
        let d = rate_fn(t) - rhs;
        if d < margin {
            margin = d;
            worst_t = t;
        }
        scaled = scaled.min(d / t);
    }
    let inequality_holds = margin > 0.0;
    let spectral_condition = b2 / gamma < lambda_star * lambda_star;
    let beta_sq_below_one = b2 < 1.0;
    Ok(WishartRegionReport {
        gamma,
        beta,
        beta_sq_below_one,
        spectral_condition,
        inequality_holds,
        margin,
        scaled_margin: scaled,
        failing_t: (!inequality_holds).then_some(worst_t),
        contiguous: beta_sq_below_one && spectral_condition && inequality_holds,
        second_moment_unbounded: b2 > 1.0 || b2 / gamma > lambda_star * lambda_star || margin < 0.0,
    })
}

/// Coefficients `(1/2i)(1/(2i−1) − β^{2i}/γ)`, i = 1..=terms, of the Taylor
/// series of `f(t) + log(1−β²t)/(2γ)` for the Rademacher prior.
pub fn rademacher_region_series(gamma: f64, beta: f64, terms: usize) -> Vec<f64> {
    (1..=terms)
        .map(|i| {
            let i = i as f64;
            (1.0 / (2.0 * i - 1.0) - beta.abs().powf(2.0 * i) / gamma) / (2.0 * i)
        })
        .collect()
}

/// `√(1 − e^{−γ(λ*)²})`: contiguity holds for β² below the square of this.
pub fn wigner_wishart_simple_bound(lambda_star: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    Ok((-(-gamma * lambda_star * lambda_star).exp_m1()).sqrt())
}

/// `(−β) + log(1+β) + 2γ log c`; the min-quadratic test succeeds where
/// this is negative.
pub fn mle_condition(beta: f64, gamma: f64, log_c: f64) -> f64 {
    -beta + beta.ln_1p() + 2.0 * gamma * log_c
}

/// Smallest γ for which some β ∈ (−√γ, 0) (and β > −1) satisfies
/// [`mle_condition`] `< 0`, by bisection on γ to tolerance `tol` with an
/// inner minimization over β. Returns 0 when every γ > 0 qualifies
/// (`log c ≤ 1/4`).
pub fn wishart_mle_critical_gamma_with(log_c: f64, tol: f64) -> Result<f64> {
    if !(log_c > 0.0) {
        return Err(Error::InvalidParameter(format!("log c must be positive, got {log_c}")));
    }
    let satisfiable = |gamma: f64| {
        let lo = -gamma.sqrt().min(1.0 - 1e-12);
        // maximize the negated condition over β ∈ [lo, 0]
        let (_, best) = golden_max(|b| -mle_condition(b, gamma, log_c), lo, 0.0, 1e-12);
        let edge = -mle_condition(lo, gamma, log_c);
        best.max(edge) > 0.0
    };
    if log_c <= 0.25 {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while !satisfiable(hi) {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NonConvergence { iterations: 20 });
        }
    }
    Ok(bisect_predicate(satisfiable, 0.0, hi, tol))
}

/// [`wishart_mle_critical_gamma_with`] at tolerance 1e-4.
pub fn wishart_mle_critical_gamma(log_c: f64) -> Result<f64> {
    wishart_mle_critical_gamma_with(log_c, 1e-4)
}

/// `c*(t)` in rationalized form.
pub fn c_star(t: f64, beta: f64) -> f64 {
    let s = 1.0 - t * t;
    let b = (1.0 + beta) * (1.0 + beta);
    2.0 * t * b / (s + (s * s + 4.0 * t * t * b).sqrt())
}

/// Right-hand side of the noise-conditioned inequality at t.
pub fn noise_conditioned_rhs(t: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        // c* = t and every term cancels
        return 0.0;
    }
    let c = c_star(t, beta);
    -beta.ln_1p() + beta + 0.5 * (c / t).ln() - (1.0 + beta - t * c) / (1.0 - t * t) + 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseConditionedReport {
    pub gamma: f64,
    pub beta: f64,
    /// β²/γ < (λ*)².
    pub side_condition: bool,
    pub inequality_holds: bool,
    /// Minimum of `γ f(t²) − rhs(t)` over the grid.
    pub margin: f64,
    pub worst_t: f64,
    /// Largest violation of `c*(1−t²) = t((1+β)² − c*²)` on the grid.
    pub c_star_identity_error: f64,
    /// `lim_{t→0} (γ f(t²) − rhs(t))/t² = γ f′(0) − β²/2`, which decides
    /// the sign below the grid where the difference drowns in rounding.
    pub small_t_coefficient: f64,
    pub holds: bool,
}

/// Evaluates `γ f(t²) > −log(1+β) + β + ½log(c*/t) − (1+β−tc*)/(1−t²) + 1`
/// on the grid, together with the side condition `β²/γ < (λ*)²`.
pub fn wishart_noise_conditioned_check(
    rate_fn: &dyn Fn(f64) -> f64,
    lambda_star: f64,
    gamma: f64,
    beta: f64,
) -> Result<NoiseConditionedReport> {
    if beta < -1.0 {
        return Err(Error::InvalidBeta(beta));
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    let b = (1.0 + beta) * (1.0 + beta);
    let (mut margin, mut worst_t, mut id_err) = (f64::INFINITY, 0.0, 0.0f64);
    // below 1e-4 both sides are O(t²) and cancellation dominates
    for t in region_grid().into_iter().filter(|&t| t >= 1e-4) {
        let d = gamma * rate_fn(t * t) - noise_conditioned_rhs(t, beta);
        if d < margin || d.is_nan() {
            margin = d;
            worst_t = t;
        }
        let c = c_star(t, beta);
        id_err = id_err.max((c * (1.0 - t * t) - t * (b - c * c)).abs());
    }
    let side_condition = beta * beta / gamma < lambda_star * lambda_star;
    let u = 1e-8;
    let small_t_coefficient = gamma * rate_fn(u) / u - beta * beta / 2.0;
    let inequality_holds = margin > 0.0 && small_t_coefficient > 0.0;
    Ok(NoiseConditionedReport {
        gamma,
        beta,
        side_condition,
        inequality_holds,
        margin,
        worst_t,
        c_star_identity_error: id_err,
        small_t_coefficient,
        holds: side_condition && inequality_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::priors::SpikePrior;

    fn rad(t: f64) -> f64 {
        SpikePrior::IidRademacher.rate_function(t).unwrap()
    }

    #[test]
    fn simple_bound_values() {
        let v = wigner_wishart_simple_bound(1.0, 2.0 * std::f64::consts::LN_2).unwrap();
        assert!((v - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(wigner_wishart_simple_bound(0.0, 1.0).unwrap(), 0.0);
        let g = 1e-8;
        assert!((wigner_wishart_simple_bound(1.0, g).unwrap() / g.sqrt() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn mle_gamma_for_rademacher() {
        let g = wishart_mle_critical_gamma(std::f64::consts::LN_2).unwrap();
        assert!(g > 0.697 && g < 0.698, "{g}");
        assert!(mle_condition(-0.99, 1.0, std::f64::consts::LN_2) < 0.0);
    }

    #[test]
    fn beta_zero_rhs_vanishes() {
        let r = wishart_noise_conditioned_check(&rad, 1.0, 0.6, 0.0).unwrap();
        let min_lhs = region_grid().into_iter().filter(|&t| t >= 1e-4).map(|t| 0.6 * rad(t * t)).fold(f64::INFINITY, f64::min);
        assert_eq!(r.margin, min_lhs);
    }

    #[test]
    fn c_star_identity() {
        let r = wishart_noise_conditioned_check(&rad, 1.0, 0.6, 0.7).unwrap();
        assert!(r.c_star_identity_error < 1e-10);
        assert!(r.holds, "{r:?}");
    }

    #[test]
    fn region_part_two_triggers() {
        let r = wishart_contiguity_region(&rad, 1.0, 0.5, 1.2).unwrap();
        assert!(r.second_moment_unbounded && !r.contiguous);
        let r = wishart_contiguity_region(&rad, 1.0, 1.0 / 3.0, 0.5).unwrap();
        assert!(r.contiguous);
        assert!(rademacher_region_series(1.0 / 3.0, 0.5, 40).iter().all(|&c| c > 0.0));
    }
}
