use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Mobility and contact parameters that hold during one phase of the
/// epidemic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseParams {
    pub days: u32,
    /// Share of the mobile population relocated each day.
    pub mobility_fraction: f64,
    /// Row and column offsets are drawn uniformly from `-extent..=extent`.
    pub movement_extent: i32,
    /// Poisson mean of the number of meetings per cell per day.
    pub meetings_rate: f64,
    /// Poisson mean of the number of attendees per meeting. Draws below two
    /// yield no meeting.
    pub movers_rate: f64,
    /// Susceptible attendees infected by a meeting with a transmitting case.
    pub infections_per_meeting: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub grid_rows: u16,
    pub grid_cols: u16,
    pub cell_pop_min: u32,
    pub cell_pop_max: u32,
    pub phase1: PhaseParams,
    pub phase2: PhaseParams,
    pub incubation_days: u32,
    pub p_symptomatic: f64,
    pub asymptomatic_days: u32,
    pub symptomatic_days: u32,
    pub p_recover_symptomatic: f64,
    /// Exposed index cases placed uniformly at random on day 0.
    pub initial_exposed: u32,
    pub rng_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            grid_rows: 5,
            grid_cols: 5,
            cell_pop_min: 800,
            cell_pop_max: 1000,
            phase1: PhaseParams {
                days: 28,
                mobility_fraction: 0.03,
                movement_extent: 4,
                meetings_rate: 20.0,
                movers_rate: 5.0,
                infections_per_meeting: 3,
            },
            phase2: PhaseParams {
                days: 56,
                mobility_fraction: 0.01,
                movement_extent: 1,
                meetings_rate: 3.0,
                movers_rate: 3.0,
                infections_per_meeting: 2,
            },
            incubation_days: 5,
            p_symptomatic: 0.25,
            asymptomatic_days: 14,
            symptomatic_days: 14,
            p_recover_symptomatic: 0.85,
            initial_exposed: 3,
            rng_seed: 25,
        }
    }
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} = {p} is not in [0, 1]")))
    }
}

fn check_rate(name: &str, r: f64) -> Result<()> {
    if r.is_finite() && r >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} = {r} must be finite and >= 0")))
    }
}

impl PhaseParams {
    fn validate(&self, label: &str) -> Result<()> {
        if self.days == 0 {
            return Err(Error::InvalidConfig(format!("{label}.days must be positive")));
        }
        check_prob(&format!("{label}.mobility_fraction"), self.mobility_fraction)?;
        if self.movement_extent < 0 {
            return Err(Error::InvalidConfig(format!(
                "{label}.movement_extent must be >= 0"
            )));
        }
        check_rate(&format!("{label}.meetings_rate"), self.meetings_rate)?;
        check_rate(&format!("{label}.movers_rate"), self.movers_rate)?;
        Ok(())
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_rows == 0 || self.grid_cols == 0 {
            return Err(Error::InvalidConfig("grid has zero cells".into()));
        }
        if self.cell_pop_min > self.cell_pop_max {
            return Err(Error::InvalidConfig(format!(
                "empty cell population range [{}, {}]",
                self.cell_pop_min, self.cell_pop_max
            )));
        }
        self.phase1.validate("phase1")?;
        self.phase2.validate("phase2")?;
        if self.incubation_days == 0 || self.asymptomatic_days == 0 || self.symptomatic_days == 0
        {
            return Err(Error::InvalidConfig("state durations must be positive".into()));
        }
        check_prob("p_symptomatic", self.p_symptomatic)?;
        check_prob("p_recover_symptomatic", self.p_recover_symptomatic)?;
        let max_pop = self.cell_count() as u64 * self.cell_pop_max as u64;
        if max_pop > u32::MAX as u64 {
            return Err(Error::InvalidConfig("population too large".into()));
        }
        if self.cell_pop_min == self.cell_pop_max
            && self.initial_exposed as u64 > self.cell_count() as u64 * self.cell_pop_min as u64
        {
            return Err(Error::InvalidConfig(
                "more index cases than people".into(),
            ));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.grid_rows as usize * self.grid_cols as usize
    }

    pub fn horizon(&self) -> u32 {
        self.phase1.days + self.phase2.days
    }

    /// Parameters in force on `day` (days are numbered from 1).
    pub fn phase_for(&self, day: u32) -> &PhaseParams {
        if day <= self.phase1.days {
            &self.phase1
        } else {
            &self.phase2
        }
    }

    pub fn p_asymptomatic(&self) -> f64 {
        1.0 - self.p_symptomatic
    }

    pub fn p_death_symptomatic(&self) -> f64 {
        1.0 - self.p_recover_symptomatic
    }
}
