use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use episurvey::anticipated::{av_table, AvParams};
use episurvey::frames::World;
use episurvey::harness::{
    emit_report, plotdata_csv, replicate_once, run_experiment, truth_row, ExperimentConfig, ReportFormat, SchemeId,
};
use episurvey::synthpop::{run_epidemic, write_trace};
use episurvey::waves::run_waves;
use episurvey::{rng, Error, Result};

#[derive(Parser)]
#[command(name = "episurvey", version, about = "Two-frame epidemic survey laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// key = value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides both the simulation seed and the replication seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the epidemic and write states.csv, contacts.csv and plotdata.csv
    Simulate,
    /// Ground-truth totals on one day
    Truth {
        #[arg(long, default_value_t = 15)]
        day: u32,
    },
    /// One replication of the survey with a full estimate report
    Estimate {
        #[arg(long, default_value_t = 15)]
        day: u32,
        #[arg(long, default_value = "A1B2")]
        scheme: SchemeId,
    },
    /// Full Monte Carlo experiment over the configured days and schemes
    Montecarlo,
    /// Chained follow-up waves
    Waves {
        #[arg(long, default_value = "A1B2")]
        scheme: SchemeId,
    },
    /// Anticipated variances and efficiency ratio
    Av {
        #[arg(long, default_value_t = 20_000.0)]
        n: f64,
        #[arg(long, default_value_t = 0.05)]
        f: f64,
        #[arg(long, default_value_t = 0.04)]
        mu: f64,
        #[arg(long, default_value_t = 0.25)]
        theta: f64,
        #[arg(long, default_value_t = 10.0)]
        l: f64,
        #[arg(long, default_value_t = 0.5)]
        p_v: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma_a: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma_b: f64,
    },
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Write { path: path.to_path_buf(), source })
}

fn kv_csv(pairs: &[(&str, String)]) -> Vec<u8> {
    let mut s = String::from("key,value\n");
    for (k, v) in pairs {
        s += &format!("{k},{v}\n");
    }
    s.into_bytes()
}

fn run(cli: Cli) -> Result<()> {
    let c = &cli.common;
    let mut config = match &c.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = c.seed {
        config.seed = seed;
        config.sim.rng_seed = seed;
    }
    config.validate()?;
    let out = &c.out;
    fs::create_dir_all(out).map_err(|source| Error::Write { path: out.clone(), source })?;
    let json = matches!(c.format, Format::Json);

    match cli.command {
        Command::Simulate => {
            let trace = run_epidemic(&config.sim)?;
            write_trace(&trace, out)?;
            let counts: Vec<[u32; 6]> = trace.daily_counts().iter().map(|s| s.0).collect();
            write(&out.join("plotdata.csv"), &plotdata_csv(&counts)?)?;
        }
        Command::Truth { day } => {
            let trace = run_epidemic(&config.sim)?;
            let row = truth_row(&World::build(&trace, day, config.window)?)?;
            if json {
                write(&out.join("truth.json"), &serde_json::to_vec_pretty(&row)?)?;
            } else {
                let text = format!("day,Y,Y_A,Y_B,Y_AB\n{},{},{},{},{}\n", row.day, row.y, row.y_a, row.y_b, row.y_ab);
                write(&out.join("truth.csv"), text.as_bytes())?;
            }
            println!("day {}: Y = {}  Y_A = {}  Y_B = {}  Y_AB = {}", row.day, row.y, row.y_a, row.y_b, row.y_ab);
        }
        Command::Estimate { day, scheme } => {
            let trace = run_epidemic(&config.sim)?;
            let world = World::build(&trace, day, config.window)?;
            if world.frames.verified.is_empty() {
                return Err(Error::NoVerifiedCases { day });
            }
            let design = config.design(scheme);
            let mut g = rng::stream(config.seed, &[u64::from(day), 0xE57]);
            let (report, _) = replicate_once(&world, &design, config.alpha_policy, &mut g)?;
            if json {
                write(&out.join("estimate.json"), &serde_json::to_vec_pretty(&report)?)?;
            } else {
                let v = &report.variance;
                let pairs = [
                    ("Y_A_hat", report.y_a.to_string()),
                    ("Y_B_hat", report.y_b.to_string()),
                    ("Y_AB_A_hat", report.y_ab_a.to_string()),
                    ("Y_AB_B_hat", report.y_ab_b.to_string()),
                    ("alpha", report.alpha.to_string()),
                    ("Y_hat", report.y_hat.to_string()),
                    ("V_A", v.v_a.to_string()),
                    ("V_B", v.v_b.to_string()),
                    ("V_composite", v.v_composite.to_string()),
                ];
                write(&out.join("estimate.csv"), &kv_csv(&pairs))?;
            }
            println!(
                "day {day} {}: Y_hat = {:.3} (SE {:.3}, alpha {:.3}), truth {}",
                scheme.label(),
                report.y_hat,
                report.standard_error(),
                report.alpha,
                world.truth()?.y
            );
        }
        Command::Montecarlo => {
            let result = run_experiment(&config)?;
            let format = if json { ReportFormat::Json } else { ReportFormat::Csv };
            emit_report(&result, out, format)?;
            emit_report(&result, out, ReportFormat::Plotdata)?;
            for r in &result.table3 {
                println!(
                    "day {:>2} {}: mean {:.2} (truth {}), SE {:.2}, bias {:.4}, eff {:.4}",
                    r.day,
                    r.scheme.label(),
                    r.mean_estimate,
                    r.true_total,
                    r.standard_error,
                    r.relative_abs_bias,
                    r.efficiency_srs_without_contacts
                );
            }
        }
        Command::Waves { scheme } => {
            let trace = run_epidemic(&config.sim)?;
            let report = run_waves(&trace, &config.wave_config(scheme), config.seed)?;
            if json {
                write(&out.join("waves.json"), &serde_json::to_vec_pretty(&report)?)?;
            } else {
                let mut bytes = Vec::new();
                report.write_csv(&mut bytes)?;
                write(&out.join("waves.csv"), &bytes)?;
            }
            for r in &report.rows {
                println!("t {:>2}: Y_hat {:.2}  Y {}", r.t, r.y_hat, r.y_true);
            }
        }
        Command::Av { n, f, mu, theta, l, p_v, alpha, gamma_a, gamma_b } => {
            let p = AvParams { n, f, mu, theta, l, p_v, alpha, gamma_a, gamma_b };
            let t = av_table(&p)?;
            let pairs = [
                ("av_srs_ht", t.srs_ht.to_string()),
                ("av_group_a", t.group_a.to_string()),
                ("av_group_b", t.group_b.to_string()),
                ("av_strategy", t.strategy.to_string()),
                ("efficiency", t.efficiency.to_string()),
            ];
            for (k, v) in &pairs {
                println!("{k:<12} {v}");
            }
            if json {
                write(&out.join("av.json"), &serde_json::to_vec_pretty(&t)?)?;
            } else {
                write(&out.join("av.csv"), &kv_csv(&pairs))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.category());
            ExitCode::from(2)
        }
    }
}
