//! Entropic transport from a weighted catenoid to the Talenti measure, with
//! the tangential-structure residual and the Ĵ estimate.
//!
//! cargo run --release --example transport -- 300 0.02 pairs.csv

use sobolev_lab::constants::SobolevParams;
use sobolev_lab::geometry::{Patch, Surface};
use sobolev_lab::sobolev::seeded_positive_field;
use sobolev_lab::transport::{
    matched_pairs_csv, run_experiment, sample_source, sample_target, Experiment,
};

fn main() -> sobolev_lab::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let exp = Experiment {
        points: args.first().and_then(|s| s.parse().ok()).unwrap_or(300),
        epsilon: args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.02),
        ..Experiment::default()
    };
    let patch = Patch::uniform(Surface::Catenoid.chart()?, 32)?;
    let params = SobolevParams::new(2, 1, 1.5)?;
    let f = seeded_positive_field(&patch, exp.seed);

    let (report, plan) = run_experiment(&patch, &f, &params, &exp)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serialises")
    );

    if let Some(path) = args.get(2) {
        let source = sample_source(&patch, &f, &params, exp.points, exp.seed)?;
        let target = sample_target(&params, exp.points, exp.seed + 1)?;
        std::fs::write(path, matched_pairs_csv(&plan, &source, &target))?;
        println!("matched pairs written to {path}");
    }
    Ok(())
}
