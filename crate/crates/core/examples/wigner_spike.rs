//! PCA on the spiked Gaussian Wigner model: the top eigenvalue separates
//! from the bulk edge once λ passes 1.

use spiked::detect::{pca_detect, Rule};
use spiked::models::sample_gaussian_wigner;
use spiked::priors::SpikePrior;

fn main() -> spiked::Result<()> {
    let n = 800;
    println!("{:>6} {:>10} {:>10} {:>10} {:>9}", "lambda", "top eig", "λ+1/λ", "overlap²", "decision");
    for (i, lambda) in [0.5, 0.9, 1.2, 1.5, 2.0, 3.0].into_iter().enumerate() {
        let b = sample_gaussian_wigner(lambda, &SpikePrior::Spherical, n, 100 + i as u64)?;
        let o = pca_detect(&b, Rule::Asymptotic)?;
        let predicted = if lambda > 1.0 { lambda + 1.0 / lambda } else { 2.0 };
        println!(
            "{lambda:>6.2} {:>10.4} {predicted:>10.4} {:>10.4} {:>9?}",
            o.statistic,
            o.correlation.unwrap_or(f64::NAN),
            o.decision
        );
    }
    Ok(())
}
