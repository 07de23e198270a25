//! Writes the figure and table artifacts (CSV and SVG) to a directory,
//! `figures-out` by default.

use spiked::experiment::{figure_hyp, figure_spectrum, table_toh, HypFigure};
use spiked::output::ExperimentConfig;

fn main() -> spiked::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "figures-out".into());
    let cfg = ExperimentConfig {
        output_dir: Some(dir.into()),
        svg: true,
        seed: 1,
        ..Default::default()
    };
    let mut paths = figure_hyp(&cfg, HypFigure::ByLambda)?;
    paths.extend(figure_hyp(&cfg, HypFigure::BySize)?);
    paths.extend(figure_spectrum(&cfg)?);
    paths.extend(table_toh(&cfg)?);
    for p in paths {
        println!("{}", p.display());
    }
    Ok(())
}
