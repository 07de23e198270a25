//! Setting a desk-scale threshold by null Monte Carlo and reusing it.

use spiked::detect::{calibrate_null, gsynch_exhaustive_test, Calibration, Rule};
use spiked::groups::GroupSpec;
use spiked::models::sample_gsynch;
use spiked::rng::derive_seed;

fn main() -> spiked::Result<()> {
    let group = GroupSpec::from_id("zl:2")?;
    let freqs = group.frequencies(&[1])?;
    let (n, lambda) = (10, 2.0);
    let stat = |seed: u64| -> spiked::Result<f64> {
        let b = sample_gsynch(&[0.0], &group, &freqs, n, seed)?;
        Ok(gsynch_exhaustive_test(&b, &group, &freqs, &[lambda], Rule::Asymptotic)?.statistic)
    };
    let entry = calibrate_null(400, 77, 0.95, stat)?;
    println!("null 95% quantile: {:.3} (asymptotic rule would use Σnλ²βd² − √(n log n))", entry.threshold);

    let mut cal = Calibration::default();
    cal.entries.insert("gsynch_z2_n10".into(), entry);
    let path = std::env::temp_dir().join("spiked_calibration.json");
    cal.save(&path)?;
    let t = Calibration::load(&path)?.get("gsynch_z2_n10").expect("saved");

    let trials = 100;
    let mut hits = 0;
    for i in 0..trials {
        let b = sample_gsynch(&[lambda], &group, &freqs, n, derive_seed(5, i))?;
        hits += gsynch_exhaustive_test(&b, &group, &freqs, &[lambda], Rule::Fixed(t))?.is_spiked() as usize;
    }
    println!("power at λ = {lambda}: {:.2}", hits as f64 / trials as f64);
    Ok(())
}
