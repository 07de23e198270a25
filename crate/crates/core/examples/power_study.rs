//! Empirical type-I and type-II errors of PCA, set against the bound the
//! second moment puts on any test.

use spiked::experiment::power_study;
use spiked::output::ExperimentConfig;

fn main() -> spiked::Result<()> {
    let cfg = ExperimentConfig::parse(
        r#"
model = "gwig"
prior = "spherical"
n = [200]
lambdas = [0.5, 0.9, 1.1, 1.5, 2.0]
trials = 200
seed = 2024
"#,
    )?;
    println!("{:>6} {:>8} {:>8} {:>10} {:>10}", "lambda", "type I", "type II", "M", "β bound");
    for p in power_study(&cfg)? {
        println!(
            "{:>6.2} {:>8.3} {:>8.3} {:>10.4e} {:>10}",
            p.strength,
            p.type_i,
            p.type_ii,
            p.second_moment.unwrap_or(f64::NAN),
            p.beta_bound.map_or("-".into(), |b| format!("{b:.4}"))
        );
    }
    Ok(())
}
