//! Second moments of the likelihood ratio for the spherical and Rademacher
//! priors, exact and by Monte Carlo.

use spiked::priors::SpikePrior;
use spiked::thresholds::{second_moment_gwig, second_moment_gwig_monte_carlo, second_moment_spherical_exact};

fn main() -> spiked::Result<()> {
    println!("spherical prior, λ = 0.9");
    for n in [Some(10), Some(25), Some(75), Some(500), None] {
        let m = second_moment_spherical_exact(n, 0.9)?;
        println!("  n = {:>5}  M = {:.6}", n.map_or("inf".into(), |n| n.to_string()), m.value);
    }

    println!("Rademacher prior, n = 16");
    for lambda in [0.3, 0.6, 0.9] {
        let exact = second_moment_gwig(&SpikePrior::IidRademacher, lambda, 16, 0, 0)?;
        let mc = second_moment_gwig_monte_carlo(&SpikePrior::IidRademacher, lambda, 16, 200_000, 5)?;
        println!(
            "  λ = {lambda}: exact {:.6}  monte carlo {:.6} ± {:.6}",
            exact.value,
            mc.value,
            mc.std_error.unwrap_or(0.0)
        );
    }
    Ok(())
}
