//! Probability samples drawn from the two frames, and second-stage samples
//! of traced contacts.
//!
//! All selections are simple random sampling without replacement (SRSWOR),
//! possibly within strata, except the decentralised two-stage option where
//! institutions are drawn with probability proportional to size and a fixed
//! number of cases is drawn inside each, which makes every case equally
//! likely to be selected.

use std::io::Write;

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::frames::{FrameId, LinkView};
use crate::synthpop::PersonId;
use crate::{Error, Result};

pub const SAMPLE_CSV_HEADER: &str = "person_id,pi1,pi2,origin_frame,anchor_id,design_label";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledUnit {
    pub person: PersonId,
    /// First-stage inclusion probability of the unit, or of its anchor for
    /// traced contacts.
    pub pi1: f64,
    /// Second-stage inclusion probability, for traced contacts only.
    pub pi2: Option<f64>,
    pub origin: FrameId,
    pub anchor: Option<PersonId>,
    pub stratum: u8,
}

impl SampledUnit {
    pub fn weight(&self) -> f64 {
        1.0 / (self.pi1 * self.pi2.unwrap_or(1.0))
    }

    pub fn is_anchor(&self) -> bool {
        self.anchor.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stratum {
    pub label: u8,
    pub population: usize,
    pub sample: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub design: String,
    pub frame: FrameId,
    pub units: Vec<SampledUnit>,
    pub strata: Vec<Stratum>,
}

impl Sample {
    /// First-stage units.
    pub fn anchors(&self) -> impl Iterator<Item = &SampledUnit> {
        self.units.iter().filter(|u| u.is_anchor())
    }

    pub fn anchor_count(&self) -> usize {
        self.anchors().count()
    }

    /// Horvitz-Thompson estimate of the frame size from first-stage weights.
    pub fn estimated_frame_size(&self) -> f64 {
        self.anchors().map(|u| 1.0 / u.pi1).sum()
    }

    /// Frame size of the stratum a first-stage unit belongs to.
    pub fn stratum_of(&self, label: u8) -> Option<&Stratum> {
        self.strata.iter().find(|s| s.label == label)
    }

    /// Append the contacts traced from one anchor as second-stage units.
    pub fn add_contacts(&mut self, draw: &ContactDraw) -> Result<()> {
        let anchor = self
            .anchors()
            .find(|u| u.person == draw.anchor)
            .cloned()
            .ok_or_else(|| {
                Error::InconsistentInput(format!("{} is not an anchor of this sample", draw.anchor))
            })?;
        for &j in &draw.contacts {
            self.units.push(SampledUnit {
                person: j,
                pi1: anchor.pi1,
                pi2: Some(draw.pi2),
                origin: anchor.origin,
                anchor: Some(anchor.person),
                stratum: anchor.stratum,
            });
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SAMPLE_CSV_HEADER.split(','))?;
        for u in &self.units {
            w.write_record(&[
                u.person.to_string(),
                u.pi1.to_string(),
                u.pi2.map(|p| p.to_string()).unwrap_or_default(),
                format!("{:?}", u.origin),
                u.anchor.map(|a| a.to_string()).unwrap_or_default(),
                self.design.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// SRSWOR of `n` units from `frame`; every unit gets `π = n / #frame`.
pub fn srswor<R: Rng + ?Sized>(
    frame: &[PersonId],
    n: usize,
    origin: FrameId,
    rng: &mut R,
) -> Result<Sample> {
    if n == 0 || n > frame.len() {
        return Err(Error::InfeasibleDesign(format!(
            "SRSWOR of {n} units from a frame of {}",
            frame.len()
        )));
    }
    let pi = n as f64 / frame.len() as f64;
    let mut picks = index::sample(rng, frame.len(), n).into_vec();
    picks.sort_unstable();
    let units = picks
        .into_iter()
        .map(|i| SampledUnit {
            person: frame[i],
            pi1: pi,
            pi2: None,
            origin,
            anchor: None,
            stratum: 0,
        })
        .collect();
    Ok(Sample {
        design: "srswor".into(),
        frame: origin,
        units,
        strata: vec![Stratum {
            label: 0,
            population: frame.len(),
            sample: n,
        }],
    })
}

/// Final inclusion probability of the two-stage design: `m · (M_i/M) · (n̄/M_i)`,
/// which does not depend on the institution size.
pub fn self_weighting_pi(m_institutions: usize, size_i: usize, total_size: usize, n_bar: usize) -> Result<f64> {
    if m_institutions == 0 || total_size == 0 || size_i == 0 {
        return Err(Error::InvalidArgument(
            "institution count and sizes must be positive".into(),
        ));
    }
    if size_i > total_size {
        return Err(Error::InvalidArgument(format!(
            "institution size {size_i} exceeds total size {total_size}"
        )));
    }
    if n_bar == 0 || n_bar > size_i {
        return Err(Error::InfeasibleDesign(format!(
            "cannot draw {n_bar} cases from an institution of {size_i}"
        )));
    }
    let first = m_institutions as f64 * size_i as f64 / total_size as f64;
    let pi = first * (n_bar as f64 / size_i as f64);
    if pi > 1.0 + 1e-12 {
        return Err(Error::InfeasibleDesign(format!(
            "inclusion probability {pi} exceeds 1"
        )));
    }
    Ok(pi)
}

#[derive(Clone, Debug)]
pub struct TwoStageSample {
    pub sample: Sample,
    /// Indices of the selected institutions.
    pub institutions: Vec<usize>,
    /// First-stage inclusion probability of every institution.
    pub first_stage_pi: Vec<f64>,
}

/// Draw `m` institutions with probability proportional to their size
/// (systematic selection over a randomly permuted list), then `n̄` cases by
/// SRSWOR inside each.
pub fn two_stage_institution_sample<R: Rng + ?Sized>(
    institutions: &[Vec<PersonId>],
    m_institutions: usize,
    n_bar: usize,
    rng: &mut R,
) -> Result<TwoStageSample> {
    if m_institutions == 0 || m_institutions > institutions.len() {
        return Err(Error::InfeasibleDesign(format!(
            "cannot select {m_institutions} of {} institutions",
            institutions.len()
        )));
    }
    let total: usize = institutions.iter().map(Vec::len).sum();
    let mut first_stage_pi = Vec::with_capacity(institutions.len());
    for (i, members) in institutions.iter().enumerate() {
        if members.len() < n_bar {
            return Err(Error::InfeasibleDesign(format!(
                "institution {i} has {} cases, fewer than n̄ = {n_bar}",
                members.len()
            )));
        }
        let pi = m_institutions as f64 * members.len() as f64 / total as f64;
        if pi > 1.0 {
            return Err(Error::InfeasibleDesign(format!(
                "institution {i} has first-stage probability {pi:.4} > 1; select it with certainty"
            )));
        }
        first_stage_pi.push(pi);
    }
    let final_pi = self_weighting_pi(m_institutions, n_bar.max(1), total, n_bar)?;

    let mut order: Vec<usize> = (0..institutions.len()).collect();
    order.shuffle(rng);
    let start: f64 = rng.random();
    let step = total as f64 / m_institutions as f64;
    let mut selected = Vec::with_capacity(m_institutions);
    let mut cum = 0usize;
    let mut k = 0usize;
    for &i in &order {
        let lo = cum as f64;
        cum += institutions[i].len();
        let hi = cum as f64;
        while k < m_institutions && (start + k as f64) * step < hi {
            if (start + k as f64) * step >= lo {
                selected.push(i);
            }
            k += 1;
        }
    }
    selected.sort_unstable();
    selected.dedup();
    if selected.len() != m_institutions {
        return Err(Error::ConsistencyFault(format!(
            "systematic PPS selected {} institutions instead of {m_institutions}",
            selected.len()
        )));
    }

    let mut units = Vec::with_capacity(m_institutions * n_bar);
    for &i in &selected {
        let members = &institutions[i];
        let mut picks = index::sample(rng, members.len(), n_bar).into_vec();
        picks.sort_unstable();
        for p in picks {
            units.push(SampledUnit {
                person: members[p],
                pi1: final_pi,
                pi2: None,
                origin: FrameId::V,
                anchor: None,
                stratum: 0,
            });
        }
    }
    Ok(TwoStageSample {
        sample: Sample {
            design: "two_stage_pps".into(),
            frame: FrameId::V,
            units,
            strata: vec![Stratum {
                label: 0,
                population: total,
                sample: m_institutions * n_bar,
            }],
        },
        institutions: selected,
        first_stage_pi,
    })
}

/// How the traced contacts of an anchor are subsampled.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ContactScheme {
    All,
    /// SRSWOR of `round(g · #U_k)` contacts, at least one.
    Fraction(f64),
    /// All contacts up to `ν`, otherwise SRSWOR of `ν`.
    Cap(u32),
}

impl ContactScheme {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ContactScheme::Fraction(g) if !(g > 0.0 && g <= 1.0) => Err(Error::InvalidArgument(
                format!("contact fraction {g} not in (0, 1]"),
            )),
            ContactScheme::Cap(0) => Err(Error::InvalidArgument("contact cap must be positive".into())),
            _ => Ok(()),
        }
    }

    /// Number of contacts taken from a pool of `pool` people.
    pub fn take(&self, pool: usize) -> usize {
        match *self {
            ContactScheme::All => pool,
            ContactScheme::Fraction(g) => {
                // round half up, never below one
                let m = (g * pool as f64 + 0.5).floor() as usize;
                m.clamp(1, pool)
            }
            ContactScheme::Cap(nu) => pool.min(nu as usize),
        }
    }
}

/// Contacts traced from one anchor.
#[derive(Clone, Debug, PartialEq)]
pub struct ContactDraw {
    pub anchor: PersonId,
    /// Sorted subset of `U_k`.
    pub contacts: Vec<PersonId>,
    /// `#U_k`.
    pub pool_size: usize,
    pub pi2: f64,
}

pub fn sample_contacts<R: Rng + ?Sized>(
    anchor: PersonId,
    link: &LinkView,
    scheme: ContactScheme,
    rng: &mut R,
) -> Result<ContactDraw> {
    scheme.validate()?;
    let pool = link.contacts_of(anchor);
    let take = scheme.take(pool.len());
    let contacts = if take == pool.len() {
        pool.to_vec()
    } else {
        let mut picks: Vec<PersonId> = index::sample(rng, pool.len(), take)
            .into_iter()
            .map(|i| pool[i])
            .collect();
        picks.sort_unstable();
        picks
    };
    Ok(ContactDraw {
        anchor,
        contacts,
        pool_size: pool.len(),
        pi2: take as f64 / pool.len() as f64,
    })
}

/// Sample with no units, for an empty frame.
pub fn empty_sample(origin: FrameId) -> Sample {
    Sample {
        design: "empty".into(),
        frame: origin,
        units: Vec::new(),
        strata: vec![Stratum {
            label: 0,
            population: 0,
            sample: 0,
        }],
    }
}

/// Trace the contacts of every first-stage unit, or only of those flagged
/// by `trigger`.
pub fn trace_contacts<R: Rng + ?Sized>(
    sample: &mut Sample,
    link: &LinkView,
    scheme: ContactScheme,
    trigger: Option<&[bool]>,
    rng: &mut R,
) -> Result<()> {
    let anchors: Vec<PersonId> = sample
        .anchors()
        .map(|u| u.person)
        .filter(|k| trigger.is_none_or(|t| t[k.index()]))
        .collect();
    for k in anchors {
        let draw = sample_contacts(k, link, scheme, rng)?;
        sample.add_contacts(&draw)?;
    }
    Ok(())
}

/// Sizes and contact schemes of one round of two-frame fieldwork.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoFrameDesign {
    /// Target size of the `U_v` sample, capped at the frame size.
    pub n_v: usize,
    /// Target size of the panel, capped at the frame size.
    pub n_c: usize,
    pub a_scheme: ContactScheme,
    pub b_scheme: ContactScheme,
}

impl TwoFrameDesign {
    /// SRSWOR from `U_v` with every anchor traced, and a panel from `U_c`
    /// with only triggered members traced.
    pub fn draw<R: Rng + ?Sized>(
        &self,
        verified: &[PersonId],
        complement: &[PersonId],
        link: &LinkView,
        trigger: &[bool],
        rng: &mut R,
    ) -> Result<(Sample, Sample)> {
        let mut a = if verified.is_empty() {
            empty_sample(FrameId::V)
        } else {
            srswor(verified, self.n_v.min(verified.len()), FrameId::V, rng)?
        };
        trace_contacts(&mut a, link, self.a_scheme, None, rng)?;
        let mut b = if complement.is_empty() {
            empty_sample(FrameId::C)
        } else {
            select_panel(complement, self.n_c.min(complement.len()), None, rng)?
        };
        trace_contacts(&mut b, link, self.b_scheme, Some(trigger), rng)?;
        Ok((a, b))
    }
}

/// Largest-remainder proportional allocation of `n` over stratum sizes.
fn proportional_allocation(sizes: &[usize], n: usize) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    let mut alloc: Vec<usize> = sizes.iter().map(|&s| n * s / total).collect();
    let mut short = n - alloc.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    // remainders n*s mod total, ties to the earlier stratum
    order.sort_by_key(|&h| std::cmp::Reverse((n * sizes[h]) % total));
    for h in order {
        if short == 0 {
            break;
        }
        if sizes[h] > alloc[h] {
            alloc[h] += 1;
            short -= 1;
        }
    }
    alloc
}

/// Select the panel from the complement frame. With `strata` (one label per
/// frame unit, e.g. risk × mobility), the sample is allocated
/// proportionally and drawn by SRSWOR inside each stratum.
pub fn select_panel<R: Rng + ?Sized>(
    complement: &[PersonId],
    n: usize,
    strata: Option<&[u8]>,
    rng: &mut R,
) -> Result<Sample> {
    let Some(labels) = strata else {
        let mut s = srswor(complement, n, FrameId::C, rng)?;
        s.design = "panel_srswor".into();
        return Ok(s);
    };
    if labels.len() != complement.len() {
        return Err(Error::InvalidArgument(format!(
            "{} stratum labels for a frame of {}",
            labels.len(),
            complement.len()
        )));
    }
    if n == 0 || n > complement.len() {
        return Err(Error::InfeasibleDesign(format!(
            "panel of {n} from a frame of {}",
            complement.len()
        )));
    }
    let mut distinct: Vec<u8> = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let members: Vec<Vec<PersonId>> = distinct
        .iter()
        .map(|&h| {
            complement
                .iter()
                .zip(labels)
                .filter(|(_, &l)| l == h)
                .map(|(&k, _)| k)
                .collect()
        })
        .collect();
    let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
    let alloc = proportional_allocation(&sizes, n);

    let mut units = Vec::with_capacity(n);
    let mut strata_info = Vec::with_capacity(distinct.len());
    for ((&label, frame), &n_h) in distinct.iter().zip(&members).zip(&alloc) {
        if n_h > frame.len() || (frame.is_empty() && n_h > 0) {
            return Err(Error::InfeasibleDesign(format!(
                "stratum {label} has {} units but {n_h} allocated",
                frame.len()
            )));
        }
        strata_info.push(Stratum {
            label,
            population: frame.len(),
            sample: n_h,
        });
        if n_h == 0 {
            continue;
        }
        let pi = n_h as f64 / frame.len() as f64;
        let mut picks = index::sample(rng, frame.len(), n_h).into_vec();
        picks.sort_unstable();
        units.extend(picks.into_iter().map(|i| SampledUnit {
            person: frame[i],
            pi1: pi,
            pi2: None,
            origin: FrameId::C,
            anchor: None,
            stratum: label,
        }));
    }
    Ok(Sample {
        design: "panel_stratified".into(),
        frame: FrameId::C,
        units,
        strata: strata_info,
    })
}

/// Relative standard error `sqrt(p(1-p)/n) / p` of an estimated proportion.
pub fn cv_for_sample_size(p: f64, n: usize) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("proportion {p} not in (0, 1)")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be positive".into()));
    }
    Ok((p * (1.0 - p) / n as f64).sqrt() / p)
}

/// Smallest `n` whose relative standard error for proportion `p` is at most
/// `target_cv`.
pub fn sample_size_for_proportion(p: f64, target_cv: f64) -> Result<usize> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("proportion {p} not in (0, 1)")));
    }
    if !(target_cv > 0.0) {
        return Err(Error::InvalidArgument(format!("target cv {target_cv} must be positive")));
    }
    let guess = ((1.0 - p) / (p * target_cv * target_cv)).ceil();
    let mut n = if guess.is_finite() { (guess as usize).max(1) } else { 1 };
    let meets = |n: usize| cv_for_sample_size(p, n).map(|cv| cv <= target_cv);
    while n > 1 && meets(n - 1)? {
        n -= 1;
    }
    while !meets(n)? {
        n += 1;
    }
    Ok(n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub estimated: Vec<f64>,
    pub known: Vec<f64>,
    /// `(estimated - known) / known`, or the absolute gap when the known
    /// total is zero.
    pub deviation: Vec<f64>,
}

/// Compare Horvitz-Thompson totals of auxiliary variables over the
/// first-stage units against their known frame totals.
pub fn balance_check<F>(sample: &Sample, aux: F, frame_totals: &[f64]) -> Result<BalanceReport>
where
    F: Fn(PersonId) -> Vec<f64>,
{
    let mut estimated = vec![0.0; frame_totals.len()];
    for u in sample.anchors() {
        let x = aux(u.person);
        if x.len() != frame_totals.len() {
            return Err(Error::InvalidArgument(format!(
                "unit {} has {} auxiliaries, expected {}",
                u.person,
                x.len(),
                frame_totals.len()
            )));
        }
        for (e, v) in estimated.iter_mut().zip(x) {
            *e += v / u.pi1;
        }
    }
    let deviation = estimated
        .iter()
        .zip(frame_totals)
        .map(|(&e, &t)| if t != 0.0 { (e - t) / t } else { e - t })
        .collect();
    Ok(BalanceReport {
        estimated,
        known: frame_totals.to_vec(),
        deviation,
    })
}
