//! Full protocol: calibrate on early probes, evaluate out of sample.
//!
//! Parameters are tuned on probe times drawn from 80-90% of the log
//! span, then the chosen settings are scored on probes from the last
//! 10%. Writes the summary table to stdout as CSV.
//!
//! ```bash
//! cargo run --release --example calibrate_and_evaluate
//! ```

use netrec::experiment::{DatasetSource, MethodKind, ParamGrid};
use netrec::{run_pipeline, ExperimentConfig, GenParams};

fn main() -> netrec::Result<()> {
    let config = ExperimentConfig {
        dataset: DatasetSource::Synthetic(GenParams {
            total_steps: 400,
            ..GenParams::default()
        }),
        methods: vec![
            MethodKind::ProbS,
            MethodKind::Hybrid,
            MethodKind::DegreeIncrease,
            MethodKind::TProbS,
            MethodKind::THybrid,
        ],
        grid: ParamGrid {
            tau: [2, 5, 20].into_iter().map(Into::into).collect(),
            lambda: vec![0.0, 0.5, 1.0],
            ..ParamGrid::default()
        },
        probes: 10,
        random_probes: 5,
        ..ExperimentConfig::default()
    };
    let log = config.dataset.load()?;
    let result = run_pipeline(&config, &log)?;

    println!("calibrated settings:");
    for point in &result.calibration.optima {
        println!("  {:<28} R = {:.4}", point.label, point.recall.mean);
    }
    println!();
    result
        .evaluation
        .write_summary_csv(std::io::stdout().lock())
}
