//! Smallest achievable type-II error against the type-I error, as implied by
//! a bounded second moment.

use spiked::experiment::{alpha_grid, tradeoff_curve, HYP1_LAMBDAS, HYP2_SIZES};

fn main() -> spiked::Result<()> {
    let alphas = alpha_grid(9);
    print!("{:>12}", "alpha");
    for a in &alphas {
        print!(" {a:>6.2}");
    }
    println!();
    let curves = HYP1_LAMBDAS
        .iter()
        .map(|&l| tradeoff_curve(l, None, &alphas))
        .chain(HYP2_SIZES.iter().map(|&n| tradeoff_curve(0.9, n, &alphas)));
    for c in curves {
        let c = c?;
        let label = format!("λ={} n={}", c.lambda, c.n.map_or("inf".into(), |n| n.to_string()));
        print!("{label:>12}");
        for b in &c.beta_min {
            print!(" {b:>6.3}");
        }
        println!();
    }
    Ok(())
}
