//! Where the spiked Wishart model is contiguous to the null, for the
//! Rademacher prior, and the threshold of the min-quadratic test.

use spiked::priors::SpikePrior;
use spiked::thresholds::{
    wigner_wishart_simple_bound, wishart_contiguity_region, wishart_mle_critical_gamma, wishart_noise_conditioned_check,
};

fn main() -> spiked::Result<()> {
    let prior = SpikePrior::IidRademacher;
    let f = |t: f64| prior.rate_function(t).unwrap_or(f64::NAN);
    println!("{:>6} {:>8} {:>10} {:>12} {:>12}", "gamma", "beta", "spectral", "second mom.", "noise-cond.");
    for gamma in [0.35f64, 0.5, 1.0, 2.0] {
        for beta in [0.5 * gamma.sqrt(), gamma.sqrt() - 1e-3] {
            let r = wishart_contiguity_region(&f, 1.0, gamma, beta)?;
            let nc = wishart_noise_conditioned_check(&f, 1.0, gamma, beta)?;
            println!(
                "{gamma:>6.2} {beta:>8.4} {:>10} {:>12} {:>12}",
                r.spectral_condition, r.contiguous, nc.holds
            );
        }
    }
    println!("β below which contiguity holds for any prior with λ* = 1:");
    for gamma in [0.1, 0.5, 1.0] {
        println!("  γ = {gamma}: {:.4}", wigner_wishart_simple_bound(1.0, gamma)?);
    }
    println!("min-quadratic test works for γ > {:.4}", wishart_mle_critical_gamma(std::f64::consts::LN_2)?);
    Ok(())
}
