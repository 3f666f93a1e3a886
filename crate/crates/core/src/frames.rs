//! Link structure and the split of the population into the two sampling
//! frames: verified cases (`U_v`) and everybody else still alive (`U_c`).
//!
//! Group A is everyone linked to a verified case, group B everyone linked to
//! an infected member of the complement. Multiplicities count how many frame
//! units reach a given person and are the divisors that keep the weight share
//! estimators from double counting.

use serde::{Deserialize, Serialize};

use crate::synthpop::{ContactLog, EpidemicTrace, HealthState, PersonId};
use crate::{Error, Result};

/// Contacts are traced back this many days, the reference day included.
pub const DEFAULT_WINDOW: u32 = 14;

/// Symmetric link matrix over a closed window of days, stored as sorted
/// adjacency lists. Every person is linked to themselves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkView {
    pub reference_day: u32,
    pub window_length: u32,
    /// First day inside the window (the window is truncated at day 1).
    pub first_day: u32,
    adjacency: Vec<Vec<PersonId>>,
}

impl LinkView {
    /// Build a link view directly from adjacency lists. Lists are
    /// symmetrised, deduplicated and given self-links.
    pub fn from_adjacency(reference_day: u32, window_length: u32, lists: Vec<Vec<PersonId>>) -> Self {
        let n = lists.len();
        let mut adjacency: Vec<Vec<PersonId>> = (0..n as u32).map(|k| vec![PersonId(k)]).collect();
        for (k, list) in lists.into_iter().enumerate() {
            for j in list {
                adjacency[k].push(j);
                adjacency[j.index()].push(PersonId(k as u32));
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Self {
            reference_day,
            window_length,
            first_day: reference_day.saturating_sub(window_length - 1).max(1),
            adjacency,
        }
    }

    pub fn population_size(&self) -> usize {
        self.adjacency.len()
    }

    /// `U_k`: everyone linked to `k`, `k` included.
    pub fn contacts_of(&self, k: PersonId) -> &[PersonId] {
        &self.adjacency[k.index()]
    }

    pub fn is_linked(&self, k: PersonId, j: PersonId) -> bool {
        self.adjacency[k.index()].binary_search(&j).is_ok()
    }

    /// Row sum of the link matrix, self-link included.
    pub fn degree(&self, j: PersonId) -> u32 {
        self.adjacency[j.index()].len() as u32
    }

    pub fn mean_degree(&self) -> f64 {
        let total: usize = self.adjacency.iter().map(Vec::len).sum();
        total as f64 / self.adjacency.len().max(1) as f64
    }
}

/// Collect the links recorded in the `window_length` days ending at
/// `reference_day`. Windows reaching before day 1 are truncated.
pub fn link_window(
    log: &ContactLog,
    population_size: usize,
    reference_day: u32,
    window_length: u32,
) -> Result<LinkView> {
    if reference_day == 0 {
        return Err(Error::InvalidArgument("reference day must be >= 1".into()));
    }
    if window_length == 0 {
        return Err(Error::InvalidArgument("window length must be >= 1".into()));
    }
    let first_day = reference_day.saturating_sub(window_length - 1).max(1);
    let mut lists: Vec<Vec<PersonId>> = vec![Vec::new(); population_size];
    for day in first_day..=reference_day {
        for &(a, b) in log.on_day(day) {
            if a.index() >= population_size || b.index() >= population_size {
                return Err(Error::InconsistentInput(format!(
                    "contact {a}-{b} on day {day} outside population of {population_size}"
                )));
            }
            lists[a.index()].push(b);
        }
    }
    let mut view = LinkView::from_adjacency(reference_day, window_length, lists);
    view.first_day = first_day;
    Ok(view)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FrameId {
    /// Verified cases.
    V,
    /// Complement of the verified cases among the living.
    C,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Verified,
    Complement,
    Dead,
}

/// Partition of the population on a reference day.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frames {
    pub reference_day: u32,
    pub verified: Vec<PersonId>,
    pub complement: Vec<PersonId>,
    pub dead: Vec<PersonId>,
    membership: Vec<Membership>,
}

impl Frames {
    pub fn from_membership(reference_day: u32, membership: Vec<Membership>) -> Self {
        let mut verified = Vec::new();
        let mut complement = Vec::new();
        let mut dead = Vec::new();
        for (k, m) in membership.iter().enumerate() {
            let id = PersonId(k as u32);
            match m {
                Membership::Verified => verified.push(id),
                Membership::Complement => complement.push(id),
                Membership::Dead => dead.push(id),
            }
        }
        Self {
            reference_day,
            verified,
            complement,
            dead,
            membership,
        }
    }

    /// Split the living into verified cases and the rest, as of `day`.
    pub fn on_day(trace: &EpidemicTrace, day: u32) -> Self {
        let membership = trace
            .persons()
            .map(|k| {
                if trace.state(k, day) == HealthState::Dead {
                    Membership::Dead
                } else if trace.is_verified_by(k, day) {
                    Membership::Verified
                } else {
                    Membership::Complement
                }
            })
            .collect();
        Self::from_membership(day, membership)
    }

    pub fn membership(&self, k: PersonId) -> Membership {
        self.membership[k.index()]
    }

    pub fn is_verified(&self, k: PersonId) -> bool {
        self.membership[k.index()] == Membership::Verified
    }

    /// Per-person flag for membership of `U_c`.
    pub fn complement_mask(&self) -> Vec<bool> {
        self.membership.iter().map(|&m| m == Membership::Complement).collect()
    }

    pub fn in_complement(&self, k: PersonId) -> bool {
        self.membership[k.index()] == Membership::Complement
    }

    pub fn members(&self, frame: FrameId) -> &[PersonId] {
        match frame {
            FrameId::V => &self.verified,
            FrameId::C => &self.complement,
        }
    }

    pub fn population_size(&self) -> usize {
        self.membership.len()
    }
}

/// Per-person link multiplicities with respect to the two frames.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multiplicities {
    /// `L_vj`: verified cases linked to `j`.
    pub verified: Vec<u32>,
    /// `L_Cj`: triggered (normally: infected) complement members linked to `j`.
    pub complement: Vec<u32>,
}

impl Multiplicities {
    /// `trigger[k]` marks the complement members whose contacts get traced.
    pub fn compute(link: &LinkView, frames: &Frames, trigger: &[bool]) -> Self {
        let n = link.population_size();
        let mut verified = vec![0u32; n];
        let mut complement = vec![0u32; n];
        for &k in &frames.verified {
            for &j in link.contacts_of(k) {
                verified[j.index()] += 1;
            }
        }
        for &k in &frames.complement {
            if trigger[k.index()] {
                for &j in link.contacts_of(k) {
                    complement[j.index()] += 1;
                }
            }
        }
        Self {
            verified,
            complement,
        }
    }
}

/// Partition the population on the link view's reference day and compute
/// multiplicities, evaluating infection on that same day.
pub fn partition_and_multiplicities(
    trace: &EpidemicTrace,
    link: &LinkView,
) -> Result<(Frames, Multiplicities)> {
    let day = link.reference_day;
    if day > trace.horizon() || link.population_size() != trace.population_size() {
        return Err(Error::InconsistentInput(format!(
            "link view for day {day} does not match the trace"
        )));
    }
    let frames = Frames::on_day(trace, day);
    let infected: Vec<bool> = trace.states_on(day).iter().map(|s| s.is_infected()).collect();
    let mult = Multiplicities::compute(link, &frames, &infected);
    Ok((frames, mult))
}

/// Everything known about the population on one reference day.
#[derive(Clone, Debug)]
pub struct World {
    pub day: u32,
    pub link: LinkView,
    pub frames: Frames,
    pub mult: Multiplicities,
    pub infected: Vec<bool>,
}

impl World {
    pub fn build(trace: &EpidemicTrace, day: u32, window_length: u32) -> Result<Self> {
        if day == 0 || day > trace.horizon() {
            return Err(Error::InvalidArgument(format!(
                "day {day} outside 1..={}",
                trace.horizon()
            )));
        }
        let link = link_window(trace.contacts(), trace.population_size(), day, window_length)?;
        let (frames, mult) = partition_and_multiplicities(trace, &link)?;
        let infected = trace.states_on(day).iter().map(|s| s.is_infected()).collect();
        Ok(Self {
            day,
            link,
            frames,
            mult,
            infected,
        })
    }

    /// Assemble a world from explicit pieces (hand-built examples and tests).
    /// Multiplicities are computed from the link view with `infected` as the
    /// tracing trigger.
    pub fn from_parts(link: LinkView, frames: Frames, infected: Vec<bool>) -> Result<Self> {
        let n = link.population_size();
        if frames.population_size() != n || infected.len() != n {
            return Err(Error::InconsistentInput(
                "link view, frames and infection flags disagree on population size".into(),
            ));
        }
        let mult = Multiplicities::compute(&link, &frames, &infected);
        Ok(Self {
            day: link.reference_day,
            link,
            frames,
            mult,
            infected,
        })
    }

    pub fn population_size(&self) -> usize {
        self.infected.len()
    }

    pub fn truth(&self) -> Result<GroundTruth> {
        true_totals(&self.frames, &self.mult, &self.link, &self.infected)
    }
}

/// True totals of infected people overall, in group A, in group B and in the
/// overlap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    #[serde(rename = "Y")]
    pub y: u64,
    #[serde(rename = "Y_A")]
    pub y_a: u64,
    #[serde(rename = "Y_B")]
    pub y_b: u64,
    #[serde(rename = "Y_AB")]
    pub y_ab: u64,
}

/// `Σ_{k ∈ anchors} Σ_j l_kj y_j / L_j` evaluated with exact integer
/// arithmetic: contributions are accumulated per `j` and each per-`j` sum
/// must be a whole multiple of its multiplicity.
fn weight_share_total(
    anchors: impl Iterator<Item = PersonId>,
    link: &LinkView,
    infected: &[bool],
    multiplicity: &[u32],
    keep: impl Fn(PersonId) -> bool,
    label: &str,
) -> Result<u64> {
    let mut numer = vec![0u64; infected.len()];
    for k in anchors {
        for &j in link.contacts_of(k) {
            if infected[j.index()] && keep(j) {
                numer[j.index()] += 1;
            }
        }
    }
    let mut total = 0u64;
    for (j, &num) in numer.iter().enumerate() {
        if num == 0 {
            continue;
        }
        let l = multiplicity[j] as u64;
        if l == 0 || num % l != 0 {
            return Err(Error::ConsistencyFault(format!(
                "{label}: person {j} collects {num} link shares against multiplicity {l}"
            )));
        }
        total += num / l;
    }
    Ok(total)
}

/// Compute the true totals and check that the three routes to the overlap
/// total agree and that the inclusion-exclusion identity closes.
pub fn true_totals(
    frames: &Frames,
    mult: &Multiplicities,
    link: &LinkView,
    infected: &[bool],
) -> Result<GroundTruth> {
    let y = infected.iter().filter(|&&i| i).count() as u64;
    let y_a = weight_share_total(
        frames.verified.iter().copied(),
        link,
        infected,
        &mult.verified,
        |_| true,
        "Y_A",
    )?;
    let triggered = frames
        .complement
        .iter()
        .copied()
        .filter(|k| infected[k.index()]);
    let y_b = weight_share_total(triggered.clone(), link, infected, &mult.complement, |_| true, "Y_B")?;

    let y_ab_direct = (0..infected.len())
        .filter(|&j| infected[j] && mult.verified[j] >= 1 && mult.complement[j] >= 1)
        .count() as u64;
    let y_ab_from_v = weight_share_total(
        frames.verified.iter().copied(),
        link,
        infected,
        &mult.verified,
        |j| mult.complement[j.index()] >= 1,
        "Y_AB via U_v",
    )?;
    let y_ab_from_c = weight_share_total(
        triggered,
        link,
        infected,
        &mult.complement,
        |j| mult.verified[j.index()] >= 1,
        "Y_AB via U_c",
    )?;
    if y_ab_direct != y_ab_from_v || y_ab_direct != y_ab_from_c {
        return Err(Error::ConsistencyFault(format!(
            "overlap totals disagree: direct {y_ab_direct}, via U_v {y_ab_from_v}, via U_c {y_ab_from_c}"
        )));
    }
    if y + y_ab_direct != y_a + y_b {
        return Err(Error::ConsistencyFault(format!(
            "Y = {y} but Y_A + Y_B - Y_AB = {y_a} + {y_b} - {y_ab_direct}"
        )));
    }
    Ok(GroundTruth {
        y,
        y_a,
        y_b,
        y_ab: y_ab_direct,
    })
}
