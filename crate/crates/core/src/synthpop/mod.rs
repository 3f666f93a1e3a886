//! Artificial population on a square lattice and the six-state epidemic
//! that runs on it.
//!
//! Each day a fraction of the mobile population hops to a nearby cell, every
//! cell holds a Poisson number of meetings, and a meeting attended by at
//! least one exposed or asymptomatic person turns up to `i_m` of the
//! susceptible attendees into exposed cases. Timed transitions then move
//! people along `S → E → {I, A}`, `A → R` and `I → {R, D}`. Every
//! co-attendance is written to the contact log that later defines the
//! link structure.

mod config;
mod io;
mod sim;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use config::{PhaseParams, SimConfig};
pub use io::{read_contacts, read_trace, write_contacts, write_states, write_trace};
pub use sim::{generate_population, run_epidemic, step_day, DayLog, Population};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PersonId(pub u32);

impl PersonId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PersonId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum HealthState {
    Susceptible,
    Exposed,
    /// Infected with symptoms. Entering this state is what gets a case
    /// verified.
    Symptomatic,
    Asymptomatic,
    Recovered,
    Dead,
}

impl HealthState {
    pub const ALL: [HealthState; 6] = [
        HealthState::Susceptible,
        HealthState::Exposed,
        HealthState::Symptomatic,
        HealthState::Asymptomatic,
        HealthState::Recovered,
        HealthState::Dead,
    ];

    /// Infected for survey purposes: exposed, symptomatic or asymptomatic.
    #[inline]
    pub fn is_infected(self) -> bool {
        matches!(
            self,
            HealthState::Exposed | HealthState::Symptomatic | HealthState::Asymptomatic
        )
    }

    /// Can pass the virus on in a meeting.
    #[inline]
    pub fn is_transmitting(self) -> bool {
        matches!(self, HealthState::Exposed | HealthState::Asymptomatic)
    }

    #[inline]
    pub fn is_absorbing(self) -> bool {
        matches!(self, HealthState::Recovered | HealthState::Dead)
    }

    /// Whether `self → next` is an allowed one-day change (staying put is
    /// always allowed).
    pub fn can_become(self, next: HealthState) -> bool {
        use HealthState::*;
        self == next
            || matches!(
                (self, next),
                (Susceptible, Exposed)
                    | (Exposed, Symptomatic)
                    | (Exposed, Asymptomatic)
                    | (Symptomatic, Recovered)
                    | (Symptomatic, Dead)
                    | (Asymptomatic, Recovered)
            )
    }

    pub fn code(self) -> char {
        match self {
            HealthState::Susceptible => 'S',
            HealthState::Exposed => 'E',
            HealthState::Symptomatic => 'I',
            HealthState::Asymptomatic => 'A',
            HealthState::Recovered => 'R',
            HealthState::Dead => 'D',
        }
    }

    pub fn from_code(code: &str) -> Option<HealthState> {
        Some(match code {
            "S" => HealthState::Susceptible,
            "E" => HealthState::Exposed,
            "I" => HealthState::Symptomatic,
            "A" => HealthState::Asymptomatic,
            "R" => HealthState::Recovered,
            "D" => HealthState::Dead,
            _ => return None,
        })
    }
}

impl fmt::Display for HealthState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Cell {
    pub row: u16,
    pub col: u16,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Person {
    pub id: PersonId,
    pub cell: Cell,
    pub state: HealthState,
    pub state_entry_day: u32,
    /// Day the case was verified, if it has been.
    pub verified_day: Option<u32>,
}

impl Person {
    pub fn is_verified_by(&self, day: u32) -> bool {
        self.verified_day.is_some_and(|d| d <= day)
    }
}

/// Number of people in each health state, indexed in [`HealthState::ALL`]
/// order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StateCounts(pub [u32; 6]);

impl StateCounts {
    pub fn tally<I: IntoIterator<Item = HealthState>>(states: I) -> Self {
        let mut counts = [0u32; 6];
        for s in states {
            counts[s as usize] += 1;
        }
        StateCounts(counts)
    }

    #[inline]
    pub fn get(&self, state: HealthState) -> u32 {
        self.0[state as usize]
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn infected(&self) -> u32 {
        self.get(HealthState::Exposed)
            + self.get(HealthState::Symptomatic)
            + self.get(HealthState::Asymptomatic)
    }
}

/// One logged co-attendance. Persons are stored with `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Contact {
    pub day: u32,
    pub a: PersonId,
    pub b: PersonId,
}

/// Time-stamped contact log, bucketed by day (index 0 is the seeding day and
/// always empty for simulated traces).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ContactLog {
    by_day: Vec<Vec<(PersonId, PersonId)>>,
}

impl ContactLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, day: u32, a: PersonId, b: PersonId) {
        let d = day as usize;
        if self.by_day.len() <= d {
            self.by_day.resize_with(d + 1, Vec::new);
        }
        let pair = if a <= b { (a, b) } else { (b, a) };
        self.by_day[d].push(pair);
    }

    /// Contacts recorded on `day`.
    pub fn on_day(&self, day: u32) -> &[(PersonId, PersonId)] {
        self.by_day.get(day as usize).map_or(&[], Vec::as_slice)
    }

    pub fn last_day(&self) -> u32 {
        self.by_day.len().saturating_sub(1) as u32
    }

    pub fn len(&self) -> usize {
        self.by_day.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = Contact> + '_ {
        self.by_day.iter().enumerate().flat_map(|(day, pairs)| {
            pairs.iter().map(move |&(a, b)| Contact {
                day: day as u32,
                a,
                b,
            })
        })
    }

    pub(crate) fn ensure_days(&mut self, horizon: u32) {
        let want = horizon as usize + 1;
        if self.by_day.len() < want {
            self.by_day.resize_with(want, Vec::new);
        }
    }
}

/// Full record of one simulated epidemic: everybody's state and cell for
/// every day from the seeding day 0 to the horizon, plus the contact log.
#[derive(Clone, Debug)]
pub struct EpidemicTrace {
    states: Vec<Vec<HealthState>>,
    cells: Vec<Vec<Cell>>,
    contacts: ContactLog,
    counts: Vec<StateCounts>,
    verification_day: Vec<Option<u32>>,
}

impl PartialEq for EpidemicTrace {
    fn eq(&self, other: &Self) -> bool {
        // counts and verification days are derived
        self.states == other.states && self.cells == other.cells && self.contacts == other.contacts
    }
}

impl EpidemicTrace {
    /// Assemble a trace from per-day snapshots. Verification days are
    /// derived: a person is verified on the first day they are symptomatic.
    pub fn from_parts(
        states: Vec<Vec<HealthState>>,
        cells: Vec<Vec<Cell>>,
        mut contacts: ContactLog,
    ) -> crate::Result<Self> {
        use crate::Error;
        if states.is_empty() {
            return Err(Error::InconsistentInput("trace has no days".into()));
        }
        if states.len() != cells.len() {
            return Err(Error::InconsistentInput(format!(
                "{} state snapshots but {} cell snapshots",
                states.len(),
                cells.len()
            )));
        }
        let n = states[0].len();
        if states.iter().any(|s| s.len() != n)
            || cells.iter().any(|c| c.len() != n)
        {
            return Err(Error::InconsistentInput(
                "snapshots disagree on population size".into(),
            ));
        }
        let horizon = (states.len() - 1) as u32;
        if contacts.last_day() > horizon {
            return Err(Error::InconsistentInput(format!(
                "contact log runs to day {} past horizon {horizon}",
                contacts.last_day()
            )));
        }
        for c in contacts.iter() {
            if c.a.index() >= n || c.b.index() >= n {
                return Err(Error::InconsistentInput(format!(
                    "contact on day {} references unknown person",
                    c.day
                )));
            }
        }
        contacts.ensure_days(horizon);
        let counts = states
            .iter()
            .map(|day| StateCounts::tally(day.iter().copied()))
            .collect();
        let mut verification_day = vec![None; n];
        for (day, snapshot) in states.iter().enumerate() {
            for (k, s) in snapshot.iter().enumerate() {
                if *s == HealthState::Symptomatic && verification_day[k].is_none() {
                    verification_day[k] = Some(day as u32);
                }
            }
        }
        Ok(Self {
            states,
            cells,
            contacts,
            counts,
            verification_day,
        })
    }

    pub fn population_size(&self) -> usize {
        self.states[0].len()
    }

    /// Last simulated day.
    pub fn horizon(&self) -> u32 {
        (self.states.len() - 1) as u32
    }

    fn day_index(&self, day: u32) -> usize {
        assert!(
            day <= self.horizon(),
            "day {day} beyond horizon {}",
            self.horizon()
        );
        day as usize
    }

    pub fn states_on(&self, day: u32) -> &[HealthState] {
        &self.states[self.day_index(day)]
    }

    pub fn cells_on(&self, day: u32) -> &[Cell] {
        &self.cells[self.day_index(day)]
    }

    pub fn state(&self, person: PersonId, day: u32) -> HealthState {
        self.states[self.day_index(day)][person.index()]
    }

    pub fn counts_on(&self, day: u32) -> StateCounts {
        self.counts[self.day_index(day)]
    }

    pub fn daily_counts(&self) -> &[StateCounts] {
        &self.counts
    }

    pub fn contacts(&self) -> &ContactLog {
        &self.contacts
    }

    pub fn is_infected(&self, person: PersonId, day: u32) -> bool {
        self.state(person, day).is_infected()
    }

    pub fn verification_day(&self, person: PersonId) -> Option<u32> {
        self.verification_day[person.index()]
    }

    pub fn is_verified_by(&self, person: PersonId, day: u32) -> bool {
        self.verification_day[person.index()].is_some_and(|d| d <= day)
    }

    /// Infected share of the whole population on `day`.
    pub fn prevalence(&self, day: u32) -> f64 {
        self.counts_on(day).infected() as f64 / self.population_size() as f64
    }

    /// Number of infected people on `day`.
    pub fn infected_total(&self, day: u32) -> u32 {
        self.counts_on(day).infected()
    }

    pub fn persons(&self) -> impl Iterator<Item = PersonId> {
        (0..self.population_size() as u32).map(PersonId)
    }
}
