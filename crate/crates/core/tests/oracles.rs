//! Library values against independent computations done here from first
//! principles (brute-force enumeration, plain quadrature, grid search).

use approx::assert_relative_eq;
use nalgebra::DVector;

use spiked::models::{sample_gaussian_wigner, sample_gsynch, sample_wishart, Observation};
use spiked::noise::NoiseModel;
use spiked::groups::GroupSpec;
use spiked::priors::{cramer_transform, subgaussian_proxy, FiniteLaw, SpikePrior};
use spiked::thresholds::{
    c_star, hyp1f1, matrix_opt_objective, second_moment_gwig, second_moment_spherical_exact,
    second_moment_wishart_rademacher_exact, toh_threshold, wishart_mle_critical_gamma, mle_condition,
};

/// Composite Simpson rule with `m` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn spherical_moment_matches_beta_integral() {
    // r² ~ Beta(1/2, (n−1)/2); with r = s the density is ∝ (1−s²)^{(n−3)/2}
    for (n, lambda) in [(10usize, 0.9), (25, 0.7), (60, 0.5)] {
        let c = n as f64 * lambda * lambda / 2.0;
        let k = (n as f64 - 3.0) / 2.0;
        let num = simpson(|s| (c * s * s).exp() * (1.0 - s * s).powf(k), 0.0, 1.0, 200_000);
        let den = simpson(|s| (1.0 - s * s).powf(k), 0.0, 1.0, 200_000);
        let lib = second_moment_spherical_exact(Some(n), lambda).unwrap().value;
        assert_relative_eq!(lib, num / den, max_relative = 1e-9);
    }
}

#[test]
fn kummer_against_direct_series() {
    // term-by-term in exact rational steps for moderate arguments
    for (a, b, z) in [(0.5, 5.0, 4.05), (0.5, 12.5, 9.0), (1.5, 3.0, -2.0)] {
        let (mut term, mut sum) = (1.0f64, 1.0f64);
        for k in 0..400 {
            let k = k as f64;
            term *= (a + k) / (b + k) * z / (k + 1.0);
            sum += term;
        }
        assert_relative_eq!(hyp1f1(a, b, z).unwrap(), sum, max_relative = 1e-11);
    }
}

/// Mean of `g(⟨x, x′⟩)` over Rademacher spikes by enumerating all sign
/// patterns of x·x′ (the product of two uniform sign vectors is uniform).
fn rademacher_enumerate(n: usize, g: impl Fn(f64) -> f64) -> f64 {
    let total: f64 = (0..1u32 << n)
        .map(|mask| {
            let s = n as f64 - 2.0 * mask.count_ones() as f64;
            g(s / n as f64)
        })
        .sum();
    total / (1u64 << n) as f64
}

#[test]
fn rademacher_moments_match_enumeration() {
    let n = 14;
    for lambda in [0.3, 0.8, 1.1] {
        let lib = second_moment_gwig(&SpikePrior::IidRademacher, lambda, n, 0, 0).unwrap().value;
        let brute = rademacher_enumerate(n, |r| (n as f64 * lambda * lambda / 2.0 * r * r).exp());
        assert_relative_eq!(lib, brute, max_relative = 1e-12);
    }
    let (beta, gamma) = (0.6, 0.8);
    let big_n = (n as f64 / gamma).round();
    let lib = second_moment_wishart_rademacher_exact(beta, gamma, n).unwrap().value;
    let brute = rademacher_enumerate(n, |r| (1.0 - beta * beta * r * r).powf(-big_n / 2.0));
    assert_relative_eq!(lib, brute, max_relative = 1e-12);
}

#[test]
fn subgaussian_proxy_by_grid_search() {
    for rho in [0.15, 0.3, 0.5] {
        let law = FiniteLaw::sparse_rademacher(rho).unwrap();
        // ππ′ is ±1/ρ with probability ρ²/2 each
        let mgf = |s: f64| 1.0 - rho * rho + rho * rho * (s / rho).cosh();
        let best = (1..200_000)
            .map(|i| i as f64 * 1e-4)
            .map(|s| 2.0 * mgf(s).ln() / (s * s))
            .fold(1.0, f64::max);
        assert_relative_eq!(subgaussian_proxy(&law), best, max_relative = 1e-6);
    }
}

#[test]
fn rademacher_rate_function_is_a_legendre_transform() {
    for t in [0.01, 0.2, 0.5, 0.9] {
        let s: f64 = f64::sqrt(t);
        let best = (0..400_000).map(|i| i as f64 * 1e-4).map(|th| th * s - th.cosh().ln()).fold(0.0, f64::max);
        let lib = SpikePrior::IidRademacher.rate_function(t).unwrap();
        // the θ grid costs up to ~1e-7 relative at small t
        assert_relative_eq!(lib, best, max_relative = 1e-6);
        assert_relative_eq!(cramer_transform(&FiniteLaw::rademacher(), s), best, max_relative = 1e-6);
    }
    assert_relative_eq!(SpikePrior::IidRademacher.rate_function(1.0).unwrap(), std::f64::consts::LN_2);
}

#[test]
fn bimodal_fisher_information_by_quadrature() {
    let noise = NoiseModel::canonical_bimodal();
    let h = 1e-5;
    let integrand = |w: f64| {
        let d = (noise.density(w + h) - noise.density(w - h)) / (2.0 * h);
        let p = noise.density(w);
        if p > 1e-300 { d * d / p } else { 0.0 }
    };
    let f = simpson(integrand, -6.0, 6.0, 400_000);
    assert_relative_eq!(noise.fisher_information().unwrap(), f, max_relative = 1e-6);
    assert_relative_eq!(f, 19.99228, max_relative = 5e-6);
}

#[test]
fn toh_threshold_from_brute_matrix_optimization() {
    // maximize the objective over k and a fine x grid directly
    for l in 3..=9usize {
        let mut best = f64::NEG_INFINITY;
        // k ≤ L/2 and x ≤ 1/k keep the remaining coordinates non-negative;
        // the objective is 0/0 at the uniform point x = 1/L
        for k in 1..=l / 2 {
            for i in 1..=20_000 {
                let x = i as f64 / (20_000.0 * k as f64);
                if (x - 1.0 / l as f64).abs() > 1e-6 {
                    best = best.max(matrix_opt_objective(l, k, x));
                }
            }
        }
        let p = toh_threshold(l).unwrap().value;
        assert_relative_eq!(p, 1.0 / best.sqrt(), max_relative = 1e-6);
    }
}

#[test]
fn mle_critical_gamma_by_grid() {
    let log_c = std::f64::consts::LN_2;
    // the β grid includes the endpoint −√γ, where the condition is smallest
    let works = |g: f64| (1..=4000).map(|i| -g.sqrt().min(1.0) * i as f64 / 4000.0).any(|b| mle_condition(b, g, log_c) < 0.0);
    let grid = (69_000..71_000).map(|i| i as f64 * 1e-5).find(|&g| works(g)).unwrap();
    let lib = wishart_mle_critical_gamma(log_c).unwrap();
    assert!((lib - grid).abs() < 1e-4, "{lib} vs {grid}");
    assert!((grid - 0.697072).abs() < 2e-5, "{grid}");
}

#[test]
fn c_star_solves_its_quadratic() {
    for beta in [-0.9, -0.3, 0.4, 1.5] {
        for t in [1e-3, 0.3, 0.7, 0.999] {
            let c = c_star(t, beta);
            let b = (1.0f64 + beta).powi(2);
            // c(1−t²) = t(b − c²), positive root
            assert!((c * (1.0 - t * t) - t * (b - c * c)).abs() < 1e-12, "{beta} {t}");
            assert!(c > 0.0);
        }
    }
}

#[test]
fn goe_entry_variances() {
    let n = 400;
    let b = sample_gaussian_wigner(0.0, &SpikePrior::Spherical, n, 17).unwrap();
    let y = b.real_matrix().unwrap() * (n as f64).sqrt();
    let (mut off, mut diag) = (0.0, 0.0);
    for i in 0..n {
        diag += y[(i, i)] * y[(i, i)];
        for j in i + 1..n {
            off += y[(i, j)] * y[(i, j)];
        }
    }
    let off = off / (n * (n - 1) / 2) as f64;
    let diag = diag / n as f64;
    assert!((off - 1.0).abs() < 0.02, "{off}");
    assert!((diag - 2.0).abs() < 0.3, "{diag}");
}

#[test]
fn wishart_covariance_along_spike() {
    let (n, gamma, beta) = (50, 0.02, -0.6);
    let b = sample_wishart(gamma, beta, &SpikePrior::IidRademacher, n, 8).unwrap();
    let x = b.spike_vector().unwrap().clone();
    let xh = &x / x.norm();
    let Observation::Wishart { x: samples, .. } = &b.observation else { panic!("wishart bundle") };
    let big_n = samples.ncols() as f64;
    let along: f64 = samples.column_iter().map(|z| xh.dot(&z).powi(2)).sum::<f64>() / big_n;
    let e = DVector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 });
    let e = (&e - &xh * xh.dot(&e)).normalize();
    let across: f64 = samples.column_iter().map(|z| e.dot(&z).powi(2)).sum::<f64>() / big_n;
    assert!((along - (1.0 + beta)).abs() < 0.05, "{along}");
    assert!((across - 1.0).abs() < 0.1, "{across}");
}

#[test]
fn gsynch_noise_is_hermitian_with_unit_scale() {
    for id in ["u1", "q8"] {
        let g = GroupSpec::from_id(id).unwrap();
        let ids: Vec<usize> = if id == "q8" { vec![4] } else { vec![1] };
        let f = g.frequencies(&ids).unwrap();
        let b = sample_gsynch(&[0.0], &g, &f, 150, 4).unwrap();
        let Observation::Complex { y } = &b.observation else { panic!("complex bundle") };
        let y = &y[0];
        assert!((y - y.adjoint()).norm() < 1e-12);
        // each group-valued entry has unit second moment once scaled by
        // √(n d); a quaternion q embeds as a 2×2 block with ‖·‖²_F = 2|q|²
        let (n, d) = (b.n(), f[0].dim);
        let block = y.nrows() / n;
        let per_entry = if block == 2 * d { 2.0 } else { 1.0 };
        let scale = y.norm_squared() * (n * d) as f64 / (per_entry * (n * d) as f64 * (n * d) as f64);
        assert!((scale - 1.0).abs() < 0.05, "{id}: {scale}");
    }
}
