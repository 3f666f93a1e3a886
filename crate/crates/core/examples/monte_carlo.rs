//! Repeat the survey on the simulated population and tabulate bias,
//! standard error and efficiency per day and sampling scheme.
//!
//! `cargo run --release --example monte_carlo -- 200` sets the number of
//! replications (default 100).

use episurvey::harness::{emit_report, run_experiment, ExperimentConfig, ReportFormat};

fn main() -> episurvey::Result<()> {
    let replications = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let config = ExperimentConfig { replications, n_c: 4000, ..ExperimentConfig::default() };
    let result = run_experiment(&config)?;

    println!("population {}", result.population);
    for t in &result.table1 {
        println!("day {:>2}: Y = {}, Y_A = {}, Y_B = {}, Y_AB = {}", t.day, t.y, t.y_a, t.y_b, t.y_ab);
    }
    println!("{:>4} {:<5} {:>10} {:>8} {:>7} {:>8} {:>8}", "day", "plan", "mean", "SE", "α", "bias", "eff");
    for r in &result.table3 {
        println!(
            "{:>4} {:<5} {:>10.2} {:>8.2} {:>7.3} {:>8.4} {:>8.4}",
            r.day,
            r.scheme.label(),
            r.mean_estimate,
            r.standard_error,
            r.alpha,
            r.relative_abs_bias,
            r.efficiency_srs_without_contacts
        );
    }
    let dir = std::env::temp_dir().join("episurvey-montecarlo");
    let files = emit_report(&result, &dir, ReportFormat::Csv)?;
    println!("wrote {} files to {}", files.len(), dir.display());
    Ok(())
}
