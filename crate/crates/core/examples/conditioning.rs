//! Sub-Gaussian proxy versus the conditioning method for sparse Rademacher
//! priors, and the smallest density at which conditioning certifies λ* = 1.

use spiked::conditioning::{conditioning_threshold, critical_sparsity};
use spiked::priors::{subgaussian_proxy, FiniteLaw};

fn main() -> spiked::Result<()> {
    println!("{:>6} {:>12} {:>12} {:>12}", "rho", "sigma*^2", "1/sigma*", "cond λ*");
    for rho in [0.1, 0.15, 0.2, 0.3, 0.5, 1.0 / 3f64.sqrt(), 0.8, 1.0] {
        let law = FiniteLaw::sparse_rademacher(rho)?;
        let s2 = subgaussian_proxy(&law);
        let cond = conditioning_threshold(&law)?;
        println!("{rho:>6.3} {s2:>12.6} {:>12.6} {:>12.6}", s2.powf(-0.5), cond.value);
    }
    let rho_star = critical_sparsity(0.1, 0.3, 5e-4)?;
    println!("critical density for λ* = 1: {rho_star:.4}");
    Ok(())
}
