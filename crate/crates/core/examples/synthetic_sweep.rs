//! Config-driven sweep over every algorithm and λ, printing the exposure each
//! algorithm reaches at 1, 2 and 3% nDCG loss.
//!
//!     cargo run --release --example synthetic_sweep -- examples/configs/synthetic.toml

use ofair::experiment::{run_experiment, validate_config};

fn main() -> ofair::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/examples/configs/synthetic.toml"
        )
        .into()
    });
    let config = validate_config(&path)?;
    let summary = run_experiment(&config)?;
    println!(
        "{} users evaluated, outputs in {}\n",
        summary.users_evaluated,
        summary.output_dir.display()
    );
    println!(
        "{:<14} {:>9} {:>9} {:>9} {:>9}",
        "algorithm", "baseline", "1%", "2%", "3%"
    );
    for r in &summary.reports {
        let cell = |l: f64| r.exposure_at(l).map_or("NA".into(), |e| format!("{e:.4}"));
        println!(
            "{:<14} {:>9.4} {:>9} {:>9} {:>9}",
            r.algorithm.as_str(),
            r.baseline_exposure,
            cell(0.01),
            cell(0.02),
            cell(0.03)
        );
    }
    Ok(())
}
