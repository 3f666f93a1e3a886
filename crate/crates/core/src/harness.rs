//! Monte Carlo experiments on a simulated epidemic: ground truth, sample
//! sizes and replicated estimates per (day, scheme), compared with simple
//! random sampling, plus the text config format and report files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::designs::{sample_size_for_proportion, ContactScheme, TwoFrameDesign};
use crate::estimators::{estimate, AlphaPolicy, EstimateReport, GwsmInput};
use crate::frames::{World, DEFAULT_WINDOW};
use crate::rng;
use crate::synthpop::{run_epidemic, EpidemicTrace, HealthState, SimConfig};
use crate::waves::WaveConfig;
use crate::{Error, Result};

pub const TABLE1_CSV_HEADER: &str = "day,Y,Y_A,Y_B,Y_AB";
pub const TABLE2_CSV_HEADER: &str =
    "day,proportion_infected,scheme,units_without_contacts,units_with_contacts,mean_contacts";
pub const TABLE3_CSV_HEADER: &str = "day,percent_infected,true_total,scheme,mean_estimate,alpha,standard_error,cv_percent,relative_abs_bias,efficiency_srs_without_contacts,efficiency_srs_with_contacts";
pub const PLOTDATA_CSV_HEADER: &str = "day,state,count";

/// Sampling scheme: `A1`/`A2` trace all or a fraction `g` of the contacts of
/// verified cases; `B2`/`B3` trace all or at most `ν` contacts of positive
/// panel members.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeId {
    A1B2,
    A1B3,
    A2B2,
    A2B3,
}

impl SchemeId {
    pub const ALL: [SchemeId; 4] = [SchemeId::A1B2, SchemeId::A1B3, SchemeId::A2B2, SchemeId::A2B3];

    pub fn label(self) -> &'static str {
        match self {
            SchemeId::A1B2 => "A1B2",
            SchemeId::A1B3 => "A1B3",
            SchemeId::A2B2 => "A2B2",
            SchemeId::A2B3 => "A2B3",
        }
    }

    pub fn full_a(self) -> bool {
        matches!(self, SchemeId::A1B2 | SchemeId::A1B3)
    }

    pub fn a_scheme(self, g: f64) -> ContactScheme {
        if self.full_a() { ContactScheme::All } else { ContactScheme::Fraction(g) }
    }

    pub fn b_scheme(self, nu: u32) -> ContactScheme {
        match self {
            SchemeId::A1B2 | SchemeId::A2B2 => ContactScheme::All,
            SchemeId::A1B3 | SchemeId::A2B3 => ContactScheme::Cap(nu),
        }
    }

    fn index(self) -> u64 {
        SchemeId::ALL.iter().position(|&s| s == self).expect("listed") as u64
    }
}

impl std::str::FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown scheme {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub sim: SimConfig,
    /// Master seed of the replication streams.
    pub seed: u64,
    pub days: Vec<u32>,
    pub replications: usize,
    pub n_v: usize,
    pub n_c: usize,
    pub schemes: Vec<SchemeId>,
    pub g: f64,
    pub nu: u32,
    pub alpha_policy: AlphaPolicy,
    pub window: u32,
    pub wave_start: u32,
    pub wave_cadence: u32,
    pub waves: u32,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            sim: SimConfig::default(),
            seed: 20200415,
            days: vec![15, 25, 35],
            replications: 500,
            n_v: sample_size_for_proportion(0.25, 0.05).expect("valid"),
            n_c: sample_size_for_proportion(0.10, 0.10).expect("valid"),
            schemes: SchemeId::ALL.to_vec(),
            g: 0.9,
            nu: 12,
            alpha_policy: AlphaPolicy::MinVariance,
            window: DEFAULT_WINDOW,
            wave_start: 15,
            wave_cadence: 10,
            waves: 5,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Parse(format!("{key}: cannot parse {v:?}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|x| parse_num(key, x.trim())).collect()
}

pub fn parse_alpha_policy(v: &str) -> Result<AlphaPolicy> {
    match v.trim() {
        "star" => Ok(AlphaPolicy::Star),
        "opt" => Ok(AlphaPolicy::Opt),
        "min_variance" => Ok(AlphaPolicy::MinVariance),
        x => match x.parse::<f64>() {
            Ok(a) if (0.0..=1.0).contains(&a) => Ok(AlphaPolicy::Fixed(a)),
            _ => Err(Error::Parse(format!(
                "alpha_policy must be star, opt, min_variance or a number in [0, 1], got {x:?}"
            ))),
        },
    }
}

fn alpha_policy_text(p: AlphaPolicy) -> String {
    match p {
        AlphaPolicy::Star => "star".into(),
        AlphaPolicy::Opt => "opt".into(),
        AlphaPolicy::MinVariance => "min_variance".into(),
        AlphaPolicy::Fixed(a) => a.to_string(),
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Parse the `key = value` text format. Blank lines and `#` comments are
    /// ignored; unspecified keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            c.set(key.trim(), value.trim())?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let s = &mut self.sim;
        if let Some((phase, field)) = key.split_once('.') {
            let p = match phase {
                "phase1" => &mut s.phase1,
                "phase2" => &mut s.phase2,
                _ => return Err(Error::InvalidConfig(format!("unknown key {key:?}"))),
            };
            match field {
                "days" => p.days = parse_num(key, v)?,
                "mobility_fraction" => p.mobility_fraction = parse_num(key, v)?,
                "movement_extent" => p.movement_extent = parse_num(key, v)?,
                "meetings_rate" => p.meetings_rate = parse_num(key, v)?,
                "movers_rate" => p.movers_rate = parse_num(key, v)?,
                "infections_per_meeting" => p.infections_per_meeting = parse_num(key, v)?,
                _ => return Err(Error::InvalidConfig(format!("unknown key {key:?}"))),
            }
            return Ok(());
        }
        match key {
            "grid_rows" => s.grid_rows = parse_num(key, v)?,
            "grid_cols" => s.grid_cols = parse_num(key, v)?,
            "cell_pop_min" => s.cell_pop_min = parse_num(key, v)?,
            "cell_pop_max" => s.cell_pop_max = parse_num(key, v)?,
            "incubation_days" => s.incubation_days = parse_num(key, v)?,
            "p_symptomatic" => s.p_symptomatic = parse_num(key, v)?,
            "asymptomatic_days" => s.asymptomatic_days = parse_num(key, v)?,
            "symptomatic_days" => s.symptomatic_days = parse_num(key, v)?,
            "p_recover_symptomatic" => s.p_recover_symptomatic = parse_num(key, v)?,
            "initial_exposed" => s.initial_exposed = parse_num(key, v)?,
            "sim_seed" => s.rng_seed = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "days" => self.days = parse_list(key, v)?,
            "replications" => self.replications = parse_num(key, v)?,
            "n_v" => self.n_v = parse_num(key, v)?,
            "n_c" => self.n_c = parse_num(key, v)?,
            "schemes" => self.schemes = parse_list(key, v)?,
            "g" => self.g = parse_num(key, v)?,
            "nu" => self.nu = parse_num(key, v)?,
            "alpha_policy" => self.alpha_policy = parse_alpha_policy(v)?,
            "window" => self.window = parse_num(key, v)?,
            "wave_start" => self.wave_start = parse_num(key, v)?,
            "wave_cadence" => self.wave_cadence = parse_num(key, v)?,
            "waves" => self.waves = parse_num(key, v)?,
            _ => return Err(Error::InvalidConfig(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// The config in the text format, every key listed.
    pub fn to_text(&self) -> String {
        let s = &self.sim;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "{k} = {v}").expect("string write");
        kv("sim_seed", s.rng_seed.to_string());
        kv("grid_rows", s.grid_rows.to_string());
        kv("grid_cols", s.grid_cols.to_string());
        kv("cell_pop_min", s.cell_pop_min.to_string());
        kv("cell_pop_max", s.cell_pop_max.to_string());
        for (name, p) in [("phase1", &s.phase1), ("phase2", &s.phase2)] {
            kv(&format!("{name}.days"), p.days.to_string());
            kv(&format!("{name}.mobility_fraction"), p.mobility_fraction.to_string());
            kv(&format!("{name}.movement_extent"), p.movement_extent.to_string());
            kv(&format!("{name}.meetings_rate"), p.meetings_rate.to_string());
            kv(&format!("{name}.movers_rate"), p.movers_rate.to_string());
            kv(&format!("{name}.infections_per_meeting"), p.infections_per_meeting.to_string());
        }
        kv("incubation_days", s.incubation_days.to_string());
        kv("p_symptomatic", s.p_symptomatic.to_string());
        kv("asymptomatic_days", s.asymptomatic_days.to_string());
        kv("symptomatic_days", s.symptomatic_days.to_string());
        kv("p_recover_symptomatic", s.p_recover_symptomatic.to_string());
        kv("initial_exposed", s.initial_exposed.to_string());
        kv("seed", self.seed.to_string());
        kv("days", join(&self.days));
        kv("replications", self.replications.to_string());
        kv("n_v", self.n_v.to_string());
        kv("n_c", self.n_c.to_string());
        kv("schemes", self.schemes.iter().map(|s| s.label()).collect::<Vec<_>>().join(","));
        kv("g", self.g.to_string());
        kv("nu", self.nu.to_string());
        kv("alpha_policy", alpha_policy_text(self.alpha_policy));
        kv("window", self.window.to_string());
        kv("wave_start", self.wave_start.to_string());
        kv("wave_cadence", self.wave_cadence.to_string());
        kv("waves", self.waves.to_string());
        out
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        let horizon = self.sim.horizon();
        if self.replications < 2 {
            return Err(Error::InvalidConfig("replications must be at least 2".into()));
        }
        if self.days.is_empty() || self.days.iter().any(|&d| d == 0 || d > horizon) {
            return Err(Error::InvalidConfig(format!("evaluation days must lie in 1..={horizon}")));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidConfig("no sampling scheme selected".into()));
        }
        if self.n_v == 0 || self.n_c < 2 {
            return Err(Error::InvalidConfig("n_v must be positive and n_c at least 2".into()));
        }
        if self.window == 0 {
            return Err(Error::InvalidConfig("window must be positive".into()));
        }
        ContactScheme::Fraction(self.g).validate()?;
        ContactScheme::Cap(self.nu).validate()?;
        if let AlphaPolicy::Fixed(a) = self.alpha_policy {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::InvalidConfig(format!("fixed α = {a} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn design(&self, scheme: SchemeId) -> TwoFrameDesign {
        TwoFrameDesign {
            n_v: self.n_v,
            n_c: self.n_c,
            a_scheme: scheme.a_scheme(self.g),
            b_scheme: scheme.b_scheme(self.nu),
        }
    }

    pub fn wave_config(&self, scheme: SchemeId) -> WaveConfig {
        WaveConfig {
            start_day: self.wave_start,
            cadence: self.wave_cadence,
            waves: self.waves,
            window: self.window,
            design: self.design(scheme),
            policy: self.alpha_policy,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthRow {
    pub day: u32,
    #[serde(rename = "Y")]
    pub y: u64,
    #[serde(rename = "Y_A")]
    pub y_a: u64,
    #[serde(rename = "Y_B")]
    pub y_b: u64,
    #[serde(rename = "Y_AB")]
    pub y_ab: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSizeRow {
    pub day: u32,
    pub proportion_infected: f64,
    pub scheme: SchemeId,
    /// Mean number of first-stage units over replications.
    pub units_without_contacts: f64,
    /// Mean number of distinct people tested, traced contacts included.
    pub units_with_contacts: f64,
    /// Mean number of links per person in the contact window.
    pub mean_contacts: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeRow {
    pub day: u32,
    /// Share of the population infected on the day.
    pub percent_infected: f64,
    pub true_total: u64,
    pub scheme: SchemeId,
    pub mean_estimate: f64,
    /// Mean α used by the composite estimator.
    pub alpha: f64,
    /// Standard deviation of the estimate over replications.
    pub standard_error: f64,
    pub cv_percent: f64,
    pub relative_abs_bias: f64,
    pub efficiency_srs_without_contacts: f64,
    pub efficiency_srs_with_contacts: f64,
}

/// What one replication produced.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Replicate {
    pub y_a: f64,
    pub y_b: f64,
    pub y_ab_a: f64,
    pub y_ab_b: f64,
    pub alpha: f64,
    pub alpha_clamped: bool,
    pub y_hat: f64,
    pub estimated_variance: f64,
    pub first_stage_units: usize,
    pub tested: usize,
}

impl Replicate {
    /// Composite estimate recomputed with another α.
    pub fn at_alpha(&self, alpha: f64) -> f64 {
        self.y_a + self.y_b - alpha * self.y_ab_a - (1.0 - alpha) * self.y_ab_b
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchemeOutcome {
    pub row: SchemeRow,
    pub sizes: SampleSizeRow,
    pub replicates: Vec<Replicate>,
}

/// Standard error of the SRSWOR Horvitz-Thompson total of a 0/1 variable
/// with `y` ones among `pop` units, for a sample of `n`.
pub fn srs_standard_error(pop: usize, y: u64, n: f64) -> Result<f64> {
    if pop < 2 || !(n > 0.0) || n > pop as f64 {
        return Err(Error::InvalidArgument(format!("SRS of {n} from {pop}")));
    }
    let big = pop as f64;
    let p = y as f64 / big;
    let s2 = big / (big - 1.0) * p * (1.0 - p);
    Ok(big * ((1.0 / n - 1.0 / big) * s2).sqrt())
}

fn mean(x: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = x.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    s / n as f64
}

/// One draw of the two samples on `world` and the resulting estimate.
pub fn replicate_once(
    world: &World,
    design: &TwoFrameDesign,
    policy: AlphaPolicy,
    rng: &mut rng::Stream,
) -> Result<(EstimateReport, Replicate)> {
    let (a, b) = design.draw(
        &world.frames.verified,
        &world.frames.complement,
        &world.link,
        &world.infected,
        rng,
    )?;
    let report = estimate(
        &GwsmInput::from_sample(&a, world)?,
        &GwsmInput::from_sample(&b, world)?,
        policy,
    )?;
    let mut seen = vec![false; world.population_size()];
    let mut tested = 0;
    for u in a.units.iter().chain(&b.units) {
        if !std::mem::replace(&mut seen[u.person.index()], true) {
            tested += 1;
        }
    }
    let rep = Replicate {
        y_a: report.y_a,
        y_b: report.y_b,
        y_ab_a: report.y_ab_a,
        y_ab_b: report.y_ab_b,
        alpha: report.alpha,
        alpha_clamped: report.alpha_clamped,
        y_hat: report.y_hat,
        estimated_variance: report.variance.v_composite,
        first_stage_units: a.anchor_count() + b.anchor_count(),
        tested,
    };
    Ok((report, rep))
}

/// Replicate the survey `R` times on a prepared world and aggregate.
pub fn run_scheme_on(world: &World, scheme: SchemeId, config: &ExperimentConfig) -> Result<SchemeOutcome> {
    config.validate()?;
    if world.frames.verified.is_empty() {
        return Err(Error::NoVerifiedCases { day: world.day });
    }
    let truth = world.truth()?;
    let design = config.design(scheme);
    let replicates: Vec<Replicate> = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            let mut g = rng::stream(config.seed, &[u64::from(world.day), scheme.index(), r as u64]);
            replicate_once(world, &design, config.alpha_policy, &mut g).map(|(_, rep)| rep)
        })
        .collect::<Result<_>>()?;

    let r = replicates.len() as f64;
    let mean_estimate = mean(replicates.iter().map(|x| x.y_hat));
    let sd = (replicates.iter().map(|x| (x.y_hat - mean_estimate).powi(2)).sum::<f64>() / (r - 1.0)).sqrt();
    let first = mean(replicates.iter().map(|x| x.first_stage_units as f64));
    let tested = mean(replicates.iter().map(|x| x.tested as f64));
    let pop = world.population_size();
    let y = truth.y;
    let proportion = y as f64 / pop as f64;
    let row = SchemeRow {
        day: world.day,
        percent_infected: proportion,
        true_total: y,
        scheme,
        mean_estimate,
        alpha: mean(replicates.iter().map(|x| x.alpha)),
        standard_error: sd,
        cv_percent: 100.0 * sd / mean_estimate,
        relative_abs_bias: (y as f64 - mean_estimate).abs() / y as f64,
        efficiency_srs_without_contacts: sd / srs_standard_error(pop, y, first)?,
        efficiency_srs_with_contacts: sd / srs_standard_error(pop, y, tested.min(pop as f64))?,
    };
    let sizes = SampleSizeRow {
        day: world.day,
        proportion_infected: proportion,
        scheme,
        units_without_contacts: first,
        units_with_contacts: tested,
        mean_contacts: world.link.mean_degree(),
    };
    Ok(SchemeOutcome { row, sizes, replicates })
}

pub fn run_scheme(trace: &EpidemicTrace, day: u32, scheme: SchemeId, config: &ExperimentConfig) -> Result<SchemeOutcome> {
    let world = World::build(trace, day, config.window)?;
    run_scheme_on(&world, scheme, config)
}

pub fn truth_row(world: &World) -> Result<TruthRow> {
    let t = world.truth()?;
    Ok(TruthRow { day: world.day, y: t.y, y_a: t.y_a, y_b: t.y_b, y_ab: t.y_ab })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub population: usize,
    pub table1: Vec<TruthRow>,
    pub table2: Vec<SampleSizeRow>,
    pub table3: Vec<SchemeRow>,
    /// Six state counts per day, day 0 first.
    pub daily_counts: Vec<[u32; 6]>,
}

/// Simulate the epidemic and evaluate every configured (day, scheme) cell.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let trace = run_epidemic(&config.sim)?;
    run_experiment_on(&trace, config)
}

pub fn run_experiment_on(trace: &EpidemicTrace, config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let mut result = ExperimentResult {
        population: trace.population_size(),
        table1: Vec::new(),
        table2: Vec::new(),
        table3: Vec::new(),
        daily_counts: trace.daily_counts().iter().map(|c| c.0).collect(),
    };
    for &day in &config.days {
        let world = World::build(trace, day, config.window)?;
        result.table1.push(truth_row(&world)?);
        for &scheme in &config.schemes {
            let out = run_scheme_on(&world, scheme, config)?;
            result.table2.push(out.sizes);
            result.table3.push(out.row);
        }
    }
    Ok(result)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReportFormat {
    Csv,
    Json,
    Plotdata,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "plotdata" => Ok(ReportFormat::Plotdata),
            _ => Err(Error::Parse(format!("unknown format {s:?}"))),
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Write { path: path.to_path_buf(), source })
}

fn csv_bytes(header: &str, rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header.split(','))?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn table1_csv(result: &ExperimentResult) -> Result<Vec<u8>> {
    csv_bytes(
        TABLE1_CSV_HEADER,
        result.table1.iter().map(|r| {
            vec![r.day.to_string(), r.y.to_string(), r.y_a.to_string(), r.y_b.to_string(), r.y_ab.to_string()]
        }),
    )
}

pub fn table2_csv(result: &ExperimentResult) -> Result<Vec<u8>> {
    csv_bytes(
        TABLE2_CSV_HEADER,
        result.table2.iter().map(|r| {
            vec![
                r.day.to_string(),
                r.proportion_infected.to_string(),
                r.scheme.label().to_string(),
                r.units_without_contacts.to_string(),
                r.units_with_contacts.to_string(),
                r.mean_contacts.to_string(),
            ]
        }),
    )
}

pub fn table3_csv(rows: &[SchemeRow]) -> Result<Vec<u8>> {
    csv_bytes(
        TABLE3_CSV_HEADER,
        rows.iter().map(|r| {
            vec![
                r.day.to_string(),
                r.percent_infected.to_string(),
                r.true_total.to_string(),
                r.scheme.label().to_string(),
                r.mean_estimate.to_string(),
                r.alpha.to_string(),
                r.standard_error.to_string(),
                r.cv_percent.to_string(),
                r.relative_abs_bias.to_string(),
                r.efficiency_srs_without_contacts.to_string(),
                r.efficiency_srs_with_contacts.to_string(),
            ]
        }),
    )
}

pub fn read_table3_csv(bytes: &[u8]) -> Result<Vec<SchemeRow>> {
    let mut rd = csv::Reader::from_reader(bytes);
    let header: Vec<String> = rd.headers()?.iter().map(String::from).collect();
    if header.join(",") != TABLE3_CSV_HEADER {
        return Err(Error::Parse(format!("unexpected header {:?}", header.join(","))));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let f = |i: usize| -> Result<f64> { parse_num(TABLE3_CSV_HEADER.split(',').nth(i).unwrap_or(""), &rec[i]) };
        rows.push(SchemeRow {
            day: parse_num("day", &rec[0])?,
            percent_infected: f(1)?,
            true_total: parse_num("true_total", &rec[2])?,
            scheme: rec[3].parse()?,
            mean_estimate: f(4)?,
            alpha: f(5)?,
            standard_error: f(6)?,
            cv_percent: f(7)?,
            relative_abs_bias: f(8)?,
            efficiency_srs_without_contacts: f(9)?,
            efficiency_srs_with_contacts: f(10)?,
        });
    }
    Ok(rows)
}

/// Per-day state counts for days `1..=horizon`, one row per state.
pub fn plotdata_csv(daily_counts: &[[u32; 6]]) -> Result<Vec<u8>> {
    csv_bytes(
        PLOTDATA_CSV_HEADER,
        daily_counts.iter().enumerate().skip(1).flat_map(|(day, counts)| {
            HealthState::ALL
                .iter()
                .zip(counts)
                .map(move |(s, c)| vec![day.to_string(), s.code().to_string(), c.to_string()])
        }),
    )
}

pub fn to_json(result: &ExperimentResult) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(result)?;
    v.push(b'\n');
    Ok(v)
}

pub fn from_json(bytes: &[u8]) -> Result<ExperimentResult> {
    Ok(serde_json::from_slice(bytes)?)
}

/// Write the report into `dir` and return the files written.
pub fn emit_report(result: &ExperimentResult, dir: &Path, format: ReportFormat) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| Error::Write { path: dir.to_path_buf(), source })?;
    let files: Vec<(&str, Vec<u8>)> = match format {
        ReportFormat::Csv => vec![
            ("table1.csv", table1_csv(result)?),
            ("table2.csv", table2_csv(result)?),
            ("table3.csv", table3_csv(&result.table3)?),
        ],
        ReportFormat::Json => vec![("report.json", to_json(result)?)],
        ReportFormat::Plotdata => vec![("plotdata.csv", plotdata_csv(&result.daily_counts)?)],
    };
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        write_file(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}
