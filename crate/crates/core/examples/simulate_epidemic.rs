//! Simulate the default grid epidemic and print the course of the outbreak.

use episurvey::synthpop::{run_epidemic, write_trace, SimConfig};
use episurvey::HealthState;

fn main() -> episurvey::Result<()> {
    let config = SimConfig::default();
    let trace = run_epidemic(&config)?;
    println!(
        "{} people on a {}x{} grid, {} days, {} logged contacts",
        trace.population_size(),
        config.grid_rows,
        config.grid_cols,
        trace.horizon(),
        trace.contacts().len()
    );
    println!("{:>4} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7}", "day", "S", "E", "I", "A", "R", "D");
    for day in (0..=trace.horizon()).step_by(7) {
        let c = trace.counts_on(day);
        let cols: Vec<String> = HealthState::ALL.iter().map(|&s| format!("{:>7}", c.get(s))).collect();
        println!("{day:>4} {}", cols.join(" "));
    }
    let peak = (0..=trace.horizon()).max_by_key(|&d| trace.infected_total(d)).unwrap_or(0);
    println!("peak of {} infected on day {peak}", trace.infected_total(peak));

    let dir = std::env::temp_dir().join("episurvey-trace");
    write_trace(&trace, &dir)?;
    println!("states.csv and contacts.csv written to {}", dir.display());
    Ok(())
}
