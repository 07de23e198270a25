//! Gaussian synchronization with several frequencies: sampling, the
//! exhaustive test over a finite group, and the spectral view for U(1).

use spiked::detect::{gsynch_exhaustive_test, Rule};
use spiked::groups::GroupSpec;
use spiked::linalg::{extreme_eigenpair_hermitian, Which};
use spiked::models::{sample_gsynch, Observation};

fn main() -> spiked::Result<()> {
    let group = GroupSpec::from_id("s3")?;
    let freqs = group.frequencies(&[1, 2])?;
    for lambda in [0.0, 2.0] {
        let b = sample_gsynch(&[lambda], &group, &freqs, 7, 3)?;
        let o = gsynch_exhaustive_test(&b, &group, &freqs, &[2.0], Rule::Asymptotic)?;
        println!(
            "S3, λ = {lambda}: T = {:.3} vs {:.3} -> {:?}, recovered {:.2}",
            o.statistic,
            o.threshold,
            o.decision,
            o.correlation.unwrap_or(f64::NAN)
        );
    }

    let u1 = GroupSpec::from_id("u1")?;
    let freqs = u1.frequencies(&[1, 2])?;
    let b = sample_gsynch(&[1.5, 0.5], &u1, &freqs, 400, 9)?;
    if let Observation::Complex { y } = &b.observation {
        for (rep, y) in freqs.iter().zip(y) {
            let top = extreme_eigenpair_hermitian(y, Which::Max)?;
            println!("U(1) {}: top eigenvalue {:.4}", rep.label, top.value);
        }
    }
    Ok(())
}
