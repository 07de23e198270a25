//! Sub-Gaussian thresholds for synchronization over small groups, against
//! the closed forms and the general 1/√D bound.

use spiked::groups::GroupSpec;
use spiked::thresholds::{matrix_opt_verify, synch_general_bound, synch_subgaussian_threshold, toh_threshold};

fn main() -> spiked::Result<()> {
    let cases: [(&str, &[usize]); 7] = [
        ("zl:2", &[1]),
        ("zl:3", &[1]),
        ("zl:4", &[1, 2]),
        ("s3", &[1, 2]),
        ("q8", &[1, 2, 3, 4]),
        ("u1", &[1]),
        ("u1", &[1, 2]),
    ];
    println!("{:>6} {:>10} {:>10} {:>10}", "group", "freqs", "subgauss", "1/√D");
    for (id, ids) in cases {
        let g = GroupSpec::from_id(id)?;
        let f = g.frequencies(ids)?;
        let t = synch_subgaussian_threshold(&g, &f)?;
        let b = synch_general_bound(&f)?;
        println!("{id:>6} {:>10} {:>10.6} {:>10.6}", format!("{ids:?}"), t.value, b.value);
    }
    for l in [4, 6, 8] {
        println!("all frequencies, |G| = {l}: {:.6}", toh_threshold(l)?.value);
    }
    for l in [3, 7, 12] {
        let r = matrix_opt_verify(l)?;
        println!("L = {l}: numeric max {:.10}, closed form {:.10}", r.numeric_sup, r.closed_form);
    }
    Ok(())
}
