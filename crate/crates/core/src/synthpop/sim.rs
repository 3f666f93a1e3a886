use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::{Cell, ContactLog, EpidemicTrace, HealthState, Person, PersonId, SimConfig};
use crate::rng::{self, Stream};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct Population {
    pub rows: u16,
    pub cols: u16,
    pub persons: Vec<Person>,
}

impl Population {
    pub fn len(&self) -> usize {
        self.persons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.persons.is_empty()
    }

    pub fn states(&self) -> Vec<HealthState> {
        self.persons.iter().map(|p| p.state).collect()
    }

    pub fn cells(&self) -> Vec<Cell> {
        self.persons.iter().map(|p| p.cell).collect()
    }
}

/// What happened on one simulated day.
#[derive(Clone, Debug, Default)]
pub struct DayLog {
    pub day: u32,
    pub moved: u32,
    pub meetings: u32,
    pub new_exposed: u32,
    pub new_symptomatic: Vec<PersonId>,
    pub contacts: Vec<(PersonId, PersonId)>,
}

fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u32 {
    if mean <= 0.0 {
        return 0;
    }
    // Poisson::new only fails for non-positive or non-finite means, both
    // excluded by config validation
    let draw: f64 = Poisson::new(mean).expect("valid poisson mean").sample(rng);
    draw as u32
}

pub fn generate_population<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Result<Population> {
    config.validate()?;
    let mut persons = Vec::new();
    for row in 0..config.grid_rows {
        for col in 0..config.grid_cols {
            let size = rng.random_range(config.cell_pop_min..=config.cell_pop_max);
            for _ in 0..size {
                let id = PersonId(persons.len() as u32);
                persons.push(Person {
                    id,
                    cell: Cell { row, col },
                    state: HealthState::Susceptible,
                    state_entry_day: 0,
                    verified_day: None,
                });
            }
        }
    }
    let seeds = config.initial_exposed as usize;
    if seeds > persons.len() {
        return Err(Error::InvalidConfig(format!(
            "{seeds} index cases but only {} people",
            persons.len()
        )));
    }
    for k in index::sample(rng, persons.len(), seeds) {
        persons[k].state = HealthState::Exposed;
    }
    Ok(Population {
        rows: config.grid_rows,
        cols: config.grid_cols,
        persons,
    })
}

/// Symptomatic cases are isolated and the dead are gone: neither moves nor
/// attends meetings.
fn is_active(state: HealthState) -> bool {
    !matches!(state, HealthState::Symptomatic | HealthState::Dead)
}

fn clamp_offset(pos: u16, offset: i32, len: u16) -> u16 {
    (pos as i32 + offset).clamp(0, len as i32 - 1) as u16
}

/// Advance the population by one day.
pub fn step_day<R: Rng + ?Sized>(
    pop: &mut Population,
    config: &SimConfig,
    day: u32,
    rng: &mut R,
) -> Result<DayLog> {
    if day == 0 || day > config.horizon() {
        return Err(Error::InvalidArgument(format!(
            "day {day} outside horizon 1..={}",
            config.horizon()
        )));
    }
    if pop.rows != config.grid_rows || pop.cols != config.grid_cols {
        return Err(Error::InconsistentInput(
            "population grid does not match config".into(),
        ));
    }
    let phase = config.phase_for(day);
    let mut log = DayLog {
        day,
        ..DayLog::default()
    };

    // 1. mobility
    let mobile: Vec<usize> = (0..pop.len())
        .filter(|&k| is_active(pop.persons[k].state))
        .collect();
    let n_movers = (phase.mobility_fraction * mobile.len() as f64).round() as usize;
    let extent = phase.movement_extent;
    for i in index::sample(rng, mobile.len(), n_movers.min(mobile.len())) {
        let person = &mut pop.persons[mobile[i]];
        let dr = rng.random_range(-extent..=extent);
        let dc = rng.random_range(-extent..=extent);
        person.cell = Cell {
            row: clamp_offset(person.cell.row, dr, pop.rows),
            col: clamp_offset(person.cell.col, dc, pop.cols),
        };
    }
    log.moved = n_movers as u32;

    // 2-3. meetings and contagion; sources are judged on the morning state
    let morning: Vec<HealthState> = pop.states();
    let mut occupants: Vec<Vec<usize>> = vec![Vec::new(); pop.rows as usize * pop.cols as usize];
    for (k, p) in pop.persons.iter().enumerate() {
        if is_active(p.state) {
            occupants[p.cell.row as usize * pop.cols as usize + p.cell.col as usize].push(k);
        }
    }
    for here in &occupants {
        if here.is_empty() {
            continue;
        }
        let meetings = poisson(rng, phase.meetings_rate);
        for _ in 0..meetings {
            let size = (poisson(rng, phase.movers_rate) as usize).min(here.len());
            if size < 2 {
                // nobody to meet
                continue;
            }
            let mut attendees: Vec<usize> = index::sample(rng, here.len(), size)
                .into_iter()
                .map(|i| here[i])
                .collect();
            attendees.sort_unstable();
            log.meetings += 1;

            for (i, &a) in attendees.iter().enumerate() {
                for &b in &attendees[i + 1..] {
                    log.contacts.push((PersonId(a as u32), PersonId(b as u32)));
                }
            }

            if phase.infections_per_meeting == 0
                || !attendees.iter().any(|&k| morning[k].is_transmitting())
            {
                continue;
            }
            let susceptible: Vec<usize> = attendees
                .iter()
                .copied()
                .filter(|&k| pop.persons[k].state == HealthState::Susceptible)
                .collect();
            let infect = (phase.infections_per_meeting as usize).min(susceptible.len());
            for i in index::sample(rng, susceptible.len(), infect) {
                let p = &mut pop.persons[susceptible[i]];
                p.state = HealthState::Exposed;
                p.state_entry_day = day;
                log.new_exposed += 1;
            }
        }
    }

    // 4. timed transitions, at most one per person per day
    for p in pop.persons.iter_mut() {
        let elapsed = day - p.state_entry_day;
        let next = match p.state {
            HealthState::Exposed if elapsed >= config.incubation_days => {
                if rng.random_bool(config.p_symptomatic) {
                    HealthState::Symptomatic
                } else {
                    HealthState::Asymptomatic
                }
            }
            HealthState::Asymptomatic if elapsed >= config.asymptomatic_days => {
                HealthState::Recovered
            }
            HealthState::Symptomatic if elapsed >= config.symptomatic_days => {
                if rng.random_bool(config.p_recover_symptomatic) {
                    HealthState::Recovered
                } else {
                    HealthState::Dead
                }
            }
            _ => continue,
        };
        p.state = next;
        p.state_entry_day = day;
        // 6. symptoms trigger testing
        if next == HealthState::Symptomatic {
            p.verified_day = Some(day);
            log.new_symptomatic.push(p.id);
        }
    }
    Ok(log)
}

/// Simulate the whole horizon from a fresh population. Deterministic in
/// `config.rng_seed`.
pub fn run_epidemic(config: &SimConfig) -> Result<EpidemicTrace> {
    let mut rng: Stream = rng::seeded(config.rng_seed);
    let mut pop = generate_population(config, &mut rng)?;
    let horizon = config.horizon();
    let mut states = Vec::with_capacity(horizon as usize + 1);
    let mut cells = Vec::with_capacity(horizon as usize + 1);
    let mut contacts = ContactLog::new();
    states.push(pop.states());
    cells.push(pop.cells());
    for day in 1..=horizon {
        let log = step_day(&mut pop, config, day, &mut rng)?;
        for (a, b) in log.contacts {
            contacts.push(day, a, b);
        }
        states.push(pop.states());
        cells.push(pop.cells());
    }
    EpidemicTrace::from_parts(states, cells, contacts)
}
