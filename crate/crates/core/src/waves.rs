//! Follow-up waves: split the change in the infected count between two
//! reference days into deaths, recoveries and new infections, estimate each
//! part from the surveys, and chain the estimates.
//!
//! Between wave days `s < t` the infected count moves as
//! `Y_t = Y_s − ΔD − ΔH + ΔY`, with all three deltas stored as nonnegative
//! counts.

use std::io::Write;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::designs::{
    empty_sample, srswor, trace_contacts, ContactScheme, Sample, SampledUnit, Stratum, TwoFrameDesign,
};
use crate::estimators::{estimate, AlphaPolicy, GwsmInput};
use crate::frames::{FrameId, Frames, Membership, World, DEFAULT_WINDOW};
use crate::rng;
use crate::synthpop::{EpidemicTrace, HealthState, PersonId};
use crate::{Error, Result};

pub const WAVE_CSV_HEADER: &str = "t,Y_hat,dD_hat,dH_hat,dY_hat,Y_true";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaveDelta {
    /// Infected at `t0`, dead at `t1`.
    pub deaths: u64,
    /// Infected at `t0`, recovered at `t1`.
    pub healings: u64,
    /// Not infected at `t0`, infected at `t1`.
    pub new_infections: u64,
}

pub fn decompose_delta(trace: &EpidemicTrace, t0: u32, t1: u32) -> Result<WaveDelta> {
    if t1 < t0 || t1 > trace.horizon() {
        return Err(Error::InvalidArgument(format!(
            "need t0 ≤ t1 ≤ {}, got {t0}, {t1}",
            trace.horizon()
        )));
    }
    let before = trace.states_on(t0);
    let after = trace.states_on(t1);
    let mut d = WaveDelta::default();
    for (b, a) in before.iter().zip(after) {
        match (b.is_infected(), a.is_infected()) {
            (true, false) if *a == HealthState::Dead => d.deaths += 1,
            (true, false) if *a == HealthState::Recovered => d.healings += 1,
            (true, false) => {
                return Err(Error::ConsistencyFault(format!(
                    "infected person became {a:?} between days {t0} and {t1}"
                )))
            }
            (false, true) => d.new_infections += 1,
            _ => {}
        }
    }
    let y0 = u64::from(trace.infected_total(t0));
    let y1 = u64::from(trace.infected_total(t1));
    if y0 + d.new_infections != y1 + d.deaths + d.healings {
        return Err(Error::ConsistencyFault(format!(
            "change identity fails between days {t0} and {t1}"
        )));
    }
    Ok(d)
}

pub fn chain_estimate(previous: f64, deaths: f64, healings: f64, new_infections: f64) -> f64 {
    previous - deaths - healings + new_infections
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveConfig {
    pub start_day: u32,
    pub cadence: u32,
    /// Number of reference days, the start included.
    pub waves: u32,
    pub window: u32,
    pub design: TwoFrameDesign,
    pub policy: AlphaPolicy,
}

impl Default for WaveConfig {
    fn default() -> Self {
        WaveConfig {
            start_day: 15,
            cadence: 10,
            waves: 5,
            window: DEFAULT_WINDOW,
            design: TwoFrameDesign {
                n_v: 1200,
                n_c: 900,
                a_scheme: ContactScheme::All,
                b_scheme: ContactScheme::All,
            },
            policy: AlphaPolicy::MinVariance,
        }
    }
}

impl WaveConfig {
    pub fn days(&self) -> Vec<u32> {
        (0..self.waves).map(|w| self.start_day + w * self.cadence).collect()
    }

    pub fn validate(&self, horizon: u32) -> Result<()> {
        if self.waves == 0 || self.cadence == 0 || self.start_day == 0 {
            return Err(Error::InvalidConfig("wave start, cadence and count must be positive".into()));
        }
        let last = self.start_day + (self.waves - 1) * self.cadence;
        if last > horizon {
            return Err(Error::InvalidConfig(format!(
                "last wave day {last} is past the horizon {horizon}"
            )));
        }
        self.design.a_scheme.validate()?;
        self.design.b_scheme.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveRow {
    pub t: u32,
    pub y_hat: f64,
    pub d_deaths: f64,
    pub d_healings: f64,
    pub d_new: f64,
    pub y_true: u64,
    /// True change components since the previous wave.
    pub truth: WaveDelta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveReport {
    pub rows: Vec<WaveRow>,
}

impl WaveReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(WAVE_CSV_HEADER.split(','))?;
        for r in &self.rows {
            w.write_record(&[
                r.t.to_string(),
                r.y_hat.to_string(),
                r.d_deaths.to_string(),
                r.d_healings.to_string(),
                r.d_new.to_string(),
                r.y_true.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fieldwork of one wave, kept so the next wave can re-read the status of
/// the people it reached.
#[derive(Clone, Debug)]
pub struct WaveFieldwork {
    pub world: World,
    pub a: Sample,
    pub b: Sample,
}

fn flags(v: &[bool]) -> Vec<f64> {
    v.iter().map(|&b| f64::from(u8::from(b))).collect()
}

fn check_sample(sample: &Sample, n: usize) -> Result<()> {
    match sample.units.iter().find(|u| u.person.index() >= n) {
        Some(u) => Err(Error::InconsistentInput(format!(
            "sampled person {} is not in the trace",
            u.person
        ))),
        None => Ok(()),
    }
}

/// Estimate the total of `x` over the people infected on the fieldwork day,
/// reusing that day's samples and multiplicities.
fn reread(field: &WaveFieldwork, x: &[f64], policy: AlphaPolicy) -> Result<f64> {
    let w = &field.world;
    let trigger = flags(&w.infected);
    let mask = w.frames.complement_mask();
    let a = GwsmInput::from_sample_with(&field.a, &w.link, &w.mult, &mask, x, &trigger)?;
    let b = GwsmInput::from_sample_with(&field.b, &w.link, &w.mult, &mask, x, &trigger)?;
    Ok(estimate(&a, &b, policy)?.y_hat)
}

/// Keep panel members still in `U_c` and top up from the rest of `U_c` to
/// the target size. The result is an SRSWOR of the current frame.
pub fn refresh_panel<R: Rng + ?Sized>(
    panel: &Sample,
    frames: &Frames,
    target: usize,
    rng: &mut R,
) -> Result<Sample> {
    check_sample(panel, frames.population_size())?;
    let frame = &frames.complement;
    let mut kept: Vec<PersonId> = panel
        .anchors()
        .map(|u| u.person)
        .filter(|&k| frames.in_complement(k))
        .collect();
    let n = target.min(frame.len());
    if n == 0 {
        return Ok(empty_sample(FrameId::C));
    }
    if kept.len() > n {
        let picks = index::sample(rng, kept.len(), n).into_vec();
        kept = picks.into_iter().map(|i| kept[i]).collect();
    }
    let mut chosen = vec![false; frames.population_size()];
    for &k in &kept {
        chosen[k.index()] = true;
    }
    let rest: Vec<PersonId> = frame.iter().copied().filter(|k| !chosen[k.index()]).collect();
    let extra = n - kept.len();
    for i in index::sample(rng, rest.len(), extra) {
        kept.push(rest[i]);
    }
    kept.sort_unstable();
    let pi = n as f64 / frame.len() as f64;
    Ok(Sample {
        design: "panel_refreshed".into(),
        frame: FrameId::C,
        units: kept
            .into_iter()
            .map(|k| SampledUnit {
                person: k,
                pi1: pi,
                pi2: None,
                origin: FrameId::C,
                anchor: None,
                stratum: 0,
            })
            .collect(),
        strata: vec![Stratum {
            label: 0,
            population: frame.len(),
            sample: n,
        }],
    })
}

/// Samples for the new-infection estimate at `t`: people verified since `s`
/// form the `U_v` side, the refreshed panel the `U_c` side, and tracing is
/// triggered by infections that started after `s`.
pub fn followup_samples<R: Rng + ?Sized>(
    prior: &WaveFieldwork,
    trace: &EpidemicTrace,
    t: u32,
    config: &WaveConfig,
    rng: &mut R,
) -> Result<(WaveFieldwork, World, Sample, Sample)> {
    let s = prior.world.day;
    if t <= s || t > trace.horizon() {
        return Err(Error::InvalidArgument(format!("follow-up day {t} must be in ({s}, {}]", trace.horizon())));
    }
    let n = trace.population_size();
    check_sample(&prior.a, n)?;
    check_sample(&prior.b, n)?;

    let world_t = World::build(trace, t, config.window)?;
    let panel = refresh_panel(&prior.b, &world_t.frames, config.design.n_c, rng)?;

    let fresh: Vec<bool> = trace
        .persons()
        .map(|k| trace.state(k, t).is_infected() && !trace.state(k, s).is_infected())
        .collect();
    let membership: Vec<Membership> = trace
        .persons()
        .map(|k| match world_t.frames.membership(k) {
            Membership::Verified if !trace.is_verified_by(k, s) => Membership::Verified,
            Membership::Complement => Membership::Complement,
            _ => Membership::Dead,
        })
        .collect();
    let delta_frames = Frames::from_membership(t, membership);
    let delta_world = World::from_parts(world_t.link.clone(), delta_frames, fresh.clone())?;

    let mut a = if delta_world.frames.verified.is_empty() {
        empty_sample(FrameId::V)
    } else {
        let frame = &delta_world.frames.verified;
        srswor(frame, config.design.n_v.min(frame.len()), FrameId::V, rng)?
    };
    trace_contacts(&mut a, &delta_world.link, config.design.a_scheme, None, rng)?;
    let mut b_new = panel.clone();
    trace_contacts(&mut b_new, &delta_world.link, config.design.b_scheme, Some(&fresh), rng)?;

    // cross-sectional fieldwork at t for the next wave's re-read
    let mut a_t = if world_t.frames.verified.is_empty() {
        empty_sample(FrameId::V)
    } else {
        let frame = &world_t.frames.verified;
        srswor(frame, config.design.n_v.min(frame.len()), FrameId::V, rng)?
    };
    trace_contacts(&mut a_t, &world_t.link, config.design.a_scheme, None, rng)?;
    let mut b_t = panel;
    trace_contacts(&mut b_t, &world_t.link, config.design.b_scheme, Some(&world_t.infected), rng)?;

    Ok((
        WaveFieldwork { world: world_t, a: a_t, b: b_t },
        delta_world,
        a,
        b_new,
    ))
}

/// Run the chained survey over the configured wave days.
pub fn run_waves(trace: &EpidemicTrace, config: &WaveConfig, seed: u64) -> Result<WaveReport> {
    config.validate(trace.horizon())?;
    let days = config.days();
    let mut g = rng::stream(seed, &[0xA7E5, u64::from(days[0])]);
    let world = World::build(trace, days[0], config.window)?;
    if world.frames.verified.is_empty() {
        return Err(Error::NoVerifiedCases { day: days[0] });
    }
    let (a, b) = config.design.draw(
        &world.frames.verified,
        &world.frames.complement,
        &world.link,
        &world.infected,
        &mut g,
    )?;
    let y0 = estimate(
        &GwsmInput::from_sample(&a, &world)?,
        &GwsmInput::from_sample(&b, &world)?,
        config.policy,
    )?
    .y_hat;
    let mut rows = vec![WaveRow {
        t: days[0],
        y_hat: y0,
        d_deaths: 0.0,
        d_healings: 0.0,
        d_new: 0.0,
        y_true: u64::from(trace.infected_total(days[0])),
        truth: WaveDelta::default(),
    }];
    let mut field = WaveFieldwork { world, a, b };
    for &t in &days[1..] {
        let mut g = rng::stream(seed, &[0xA7E5, u64::from(t)]);
        let s = field.world.day;
        let ended = |target: HealthState| -> Vec<f64> {
            trace
                .persons()
                .map(|k| {
                    let hit = trace.state(k, s).is_infected() && trace.state(k, t) == target;
                    f64::from(u8::from(hit))
                })
                .collect()
        };
        let d_deaths = reread(&field, &ended(HealthState::Dead), config.policy)?;
        let d_healings = reread(&field, &ended(HealthState::Recovered), config.policy)?;
        let (next, delta_world, a_new, b_new) = followup_samples(&field, trace, t, config, &mut g)?;
        let d_new = estimate(
            &GwsmInput::from_sample(&a_new, &delta_world)?,
            &GwsmInput::from_sample(&b_new, &delta_world)?,
            config.policy,
        )?
        .y_hat;
        let prev = rows.last().expect("first row").y_hat;
        rows.push(WaveRow {
            t,
            y_hat: chain_estimate(prev, d_deaths, d_healings, d_new),
            d_deaths,
            d_healings,
            d_new,
            y_true: u64::from(trace.infected_total(t)),
            truth: decompose_delta(trace, s, t)?,
        });
        field = next;
    }
    Ok(WaveReport { rows })
}
