//! Follow the epidemic with repeated survey waves, chaining each estimate
//! from the previous one through deaths, recoveries and new infections.

use episurvey::designs::{ContactScheme, TwoFrameDesign};
use episurvey::synthpop::{run_epidemic, SimConfig};
use episurvey::waves::{run_waves, WaveConfig};

fn main() -> episurvey::Result<()> {
    let trace = run_epidemic(&SimConfig::default())?;
    let config = WaveConfig {
        waves: 6,
        design: TwoFrameDesign {
            n_v: 1200,
            n_c: 4000,
            a_scheme: ContactScheme::All,
            b_scheme: ContactScheme::All,
        },
        ..WaveConfig::default()
    };
    let report = run_waves(&trace, &config, 9)?;
    println!("{:>3} {:>9} {:>6} {:>8} {:>8} {:>8}   true ΔD/ΔH/ΔY", "t", "Ŷ_t", "Y_t", "ΔD̂", "ΔĤ", "ΔŶ");
    for r in &report.rows {
        println!(
            "{:>3} {:>9.1} {:>6} {:>8.1} {:>8.1} {:>8.1}   {}/{}/{}",
            r.t, r.y_hat, r.y_true, r.d_deaths, r.d_healings, r.d_new, r.truth.deaths, r.truth.healings, r.truth.new_infections
        );
    }
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    println!("\n{}", String::from_utf8_lossy(&csv).lines().next().unwrap_or(""));
    Ok(())
}
