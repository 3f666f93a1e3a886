//! Generalized weight share (GWSM) estimators for the two-frame design, their
//! composite combination, two-stage variance estimates, and the
//! capture-recapture and alternative estimators.
//!
//! Every estimator is a first-stage Horvitz-Thompson sum of per-anchor
//! second-stage totals `Ẑ_k = Σ_{j∈S_k} t_j / π_{2|k}`, so one routine
//! evaluates all of them once the contact term `t_j` is fixed.

use serde::{Deserialize, Serialize};

use crate::designs::{Sample, Stratum};
use crate::frames::{FrameId, LinkView, Multiplicities, World};
use crate::synthpop::PersonId;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracedContact {
    pub person: PersonId,
    pub y: f64,
    /// Number of `U_v` units linked to the contact.
    pub l_v: u32,
    /// Number of triggered `U_c` units linked to the contact.
    pub l_c: u32,
    /// All links of the contact, itself included.
    pub l_total: u32,
    pub in_complement: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchorObservation {
    pub person: PersonId,
    pub pi1: f64,
    pub pi2: f64,
    /// Anchor factor: 1 for every `U_v` anchor, `y_k` for panel anchors.
    pub y: f64,
    pub stratum: u8,
    /// `#U_k`, the size of the anchor's contact list.
    pub pool_size: usize,
    pub contacts: Vec<TracedContact>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GwsmInput {
    pub frame: FrameId,
    pub anchors: Vec<AnchorObservation>,
    pub strata: Vec<Stratum>,
}

impl GwsmInput {
    /// Observations for the usual infection count: `y_j` is the infection
    /// indicator and panel anchors trigger tracing when infected.
    pub fn from_sample(sample: &Sample, world: &World) -> Result<Self> {
        let y: Vec<f64> = world.infected.iter().map(|&b| f64::from(u8::from(b))).collect();
        Self::from_sample_with(sample, &world.link, &world.mult, &world.frames.complement_mask(), &y, &y)
    }

    /// Observations for an arbitrary study variable `y` and panel trigger.
    /// The multiplicities must have been computed with the same trigger.
    pub fn from_sample_with(
        sample: &Sample,
        link: &LinkView,
        mult: &Multiplicities,
        in_complement: &[bool],
        y: &[f64],
        trigger: &[f64],
    ) -> Result<Self> {
        let n = link.population_size();
        if y.len() != n || trigger.len() != n || in_complement.len() != n {
            return Err(Error::InvalidArgument(format!(
                "per-person vectors must have length {n}"
            )));
        }
        let mut anchors: Vec<AnchorObservation> = sample
            .anchors()
            .map(|u| AnchorObservation {
                person: u.person,
                pi1: u.pi1,
                pi2: 1.0,
                y: match sample.frame {
                    FrameId::V => 1.0,
                    FrameId::C => trigger[u.person.index()],
                },
                stratum: u.stratum,
                pool_size: link.contacts_of(u.person).len(),
                contacts: Vec::new(),
            })
            .collect();
        let mut slot = std::collections::HashMap::with_capacity(anchors.len());
        for (i, a) in anchors.iter().enumerate() {
            if slot.insert(a.person, i).is_some() {
                return Err(Error::InconsistentInput(format!("{} sampled twice", a.person)));
            }
        }
        for u in sample.units.iter().filter(|u| !u.is_anchor()) {
            let k = u.anchor.expect("contact unit");
            let &i = slot
                .get(&k)
                .ok_or_else(|| Error::InconsistentInput(format!("contact {} has unknown anchor {k}", u.person)))?;
            if !link.is_linked(k, u.person) {
                return Err(Error::InconsistentInput(format!("{} is not a contact of {k}", u.person)));
            }
            let j = u.person.index();
            let a = &mut anchors[i];
            a.pi2 = u.pi2.unwrap_or(1.0);
            a.contacts.push(TracedContact {
                person: u.person,
                y: y[j],
                l_v: mult.verified[j],
                l_c: mult.complement[j],
                l_total: link.degree(u.person),
                in_complement: in_complement[j],
            });
        }
        let input = GwsmInput {
            frame: sample.frame,
            anchors,
            strata: sample.strata.clone(),
        };
        input.validate()?;
        Ok(input)
    }

    pub fn validate(&self) -> Result<()> {
        for a in &self.anchors {
            for (what, p) in [("π", a.pi1), ("π₂", a.pi2)] {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "anchor {} has {what} = {p} outside (0, 1]",
                        a.person
                    )));
                }
            }
            if self.frame == FrameId::C && a.y == 0.0 && !a.contacts.is_empty() {
                return Err(Error::InconsistentInput(format!(
                    "panel anchor {} was traced without a positive test",
                    a.person
                )));
            }
            if a.contacts.len() > a.pool_size {
                return Err(Error::InconsistentInput(format!(
                    "anchor {} has {} traced contacts from a list of {}",
                    a.person,
                    a.contacts.len(),
                    a.pool_size
                )));
            }
            for c in &a.contacts {
                let own = match self.frame {
                    FrameId::V => c.l_v,
                    FrameId::C => c.l_c,
                };
                if own == 0 {
                    return Err(Error::InconsistentInput(format!(
                        "contact {} traced from {} has zero multiplicity in frame {:?}",
                        c.person, a.person, self.frame
                    )));
                }
            }
        }
        Ok(())
    }

    /// Per-anchor `Ẑ_k` (anchor factor included) and the HT total
    /// `Σ Ẑ_k / π_k` for the contact term `t`.
    pub fn total_with<F: Fn(&TracedContact) -> f64>(&self, t: F) -> (f64, Vec<f64>) {
        let z: Vec<f64> = self
            .anchors
            .iter()
            .map(|a| a.y * a.contacts.iter().map(&t).sum::<f64>() / a.pi2)
            .collect();
        let total = self.anchors.iter().zip(&z).map(|(a, z)| z / a.pi1).sum();
        (total, z)
    }
}

fn share_v(c: &TracedContact) -> f64 {
    c.y / f64::from(c.l_v)
}

fn share_c(c: &TracedContact) -> f64 {
    c.y / f64::from(c.l_c)
}

fn term_ab_a(c: &TracedContact) -> f64 {
    if c.l_c >= 1 { share_v(c) } else { 0.0 }
}

fn term_ab_b(c: &TracedContact) -> f64 {
    if c.l_v >= 1 { share_c(c) } else { 0.0 }
}

fn require_frame(input: &GwsmInput, frame: FrameId) -> Result<()> {
    if input.frame != frame {
        return Err(Error::InvalidArgument(format!(
            "expected a sample from frame {frame:?}, got {:?}",
            input.frame
        )));
    }
    input.validate()
}

/// `Ŷ_A` and the per-anchor `Ẑ_vk`.
pub fn estimate_ya(input: &GwsmInput) -> Result<(f64, Vec<f64>)> {
    require_frame(input, FrameId::V)?;
    Ok(input.total_with(share_v))
}

/// `Ŷ_B` and the per-anchor `Ẑ_Ck`.
pub fn estimate_yb(input: &GwsmInput) -> Result<(f64, Vec<f64>)> {
    require_frame(input, FrameId::C)?;
    Ok(input.total_with(share_c))
}

/// Overlap totals `(Ŷ_AB^A, Ŷ_AB^B)` from the two samples. The panel form
/// carries the anchor factor `y_k` and sums over each anchor's traced
/// contacts.
pub fn estimate_yab(a: &GwsmInput, b: &GwsmInput) -> Result<(f64, f64)> {
    require_frame(a, FrameId::V)?;
    require_frame(b, FrameId::C)?;
    Ok((a.total_with(term_ab_a).0, b.total_with(term_ab_b).0))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("α = {alpha} outside [0, 1]")));
    }
    Ok(())
}

pub fn composite(ya: f64, yb: f64, yab_a: f64, yab_b: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(ya + yb - (alpha * yab_a + (1.0 - alpha) * yab_b))
}

/// `V_B / (V_A + V_B)`; 0.5 when both variances vanish.
pub fn alpha_star(v_a: f64, v_b: f64) -> Result<f64> {
    if !(v_a >= 0.0 && v_b >= 0.0) {
        return Err(Error::InvalidArgument(format!("variances must be ≥ 0, got {v_a}, {v_b}")));
    }
    if v_a + v_b == 0.0 {
        return Ok(0.5);
    }
    Ok(v_b / (v_a + v_b))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClampedAlpha {
    pub alpha: f64,
    /// Value before clamping to `[0, 1]`.
    pub raw: f64,
    pub clamped: bool,
}

impl ClampedAlpha {
    fn new(raw: f64) -> Self {
        let alpha = raw.clamp(0.0, 1.0);
        ClampedAlpha { alpha, raw, clamped: alpha != raw }
    }
}

/// `(V_B + Cov(Ŷ_AB^B, Ŷ_B) − Cov(Ŷ_AB^A, Ŷ_A)) / (V_A + V_B)`, clamped.
/// This closed form does not minimise the composite variance in general;
/// see [`alpha_min_variance`].
pub fn alpha_opt(v_a: f64, v_b: f64, _v_ab_a: f64, _v_ab_b: f64, cov_a: f64, cov_b: f64) -> Result<ClampedAlpha> {
    let den = v_a + v_b;
    if den == 0.0 {
        return Err(Error::NotComputable("α_opt: V_A + V_B = 0".into()));
    }
    Ok(ClampedAlpha::new((v_b + cov_b - cov_a) / den))
}

/// Stationary point of the composite variance in α:
/// `(V_AB^B + Cov_A − Cov_B) / (V_AB^A + V_AB^B)`, clamped. Returns 0.5 when
/// the composite variance does not depend on α.
pub fn alpha_min_variance(v_ab_a: f64, v_ab_b: f64, cov_a: f64, cov_b: f64) -> ClampedAlpha {
    let den = v_ab_a + v_ab_b;
    if den <= 0.0 {
        return ClampedAlpha { alpha: 0.5, raw: 0.5, clamped: false };
    }
    ClampedAlpha::new((v_ab_b + cov_a - cov_b) / den)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AlphaPolicy {
    Fixed(f64),
    Star,
    Opt,
    MinVariance,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoStageVariance {
    pub first_stage: f64,
    pub second_stage: f64,
    pub total: f64,
}

fn sample_cov(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (n - 1.0)
}

/// `(N²/n)(1 − n/N)·s_xy`, zero for a census.
fn srswor_cov(pop: usize, x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len();
    if n == pop {
        return Ok(0.0);
    }
    if n < 2 {
        return Err(Error::NotComputable(format!(
            "variance needs at least 2 sampled units, got {n} of {pop}"
        )));
    }
    let (nn, pp) = (n as f64, pop as f64);
    Ok(pp * pp / nn * (1.0 - nn / pp) * sample_cov(x, y))
}

/// Two-stage SRSWOR estimate of `Cov(Σ Ẑ^x/π, Σ Ẑ^y/π)` for two contact
/// terms on the same sample; with `tx = ty` it is the variance. The first
/// stage is taken stratum by stratum.
pub fn covariance_two_stage<F, G>(input: &GwsmInput, tx: F, ty: G) -> Result<TwoStageVariance>
where
    F: Fn(&TracedContact) -> f64,
    G: Fn(&TracedContact) -> f64,
{
    let (_, zx) = input.total_with(&tx);
    let (_, zy) = input.total_with(&ty);
    let mut first = 0.0;
    for s in &input.strata {
        let idx: Vec<usize> = (0..input.anchors.len())
            .filter(|&i| input.anchors[i].stratum == s.label)
            .collect();
        if idx.is_empty() {
            continue;
        }
        let x: Vec<f64> = idx.iter().map(|&i| zx[i]).collect();
        let y: Vec<f64> = idx.iter().map(|&i| zy[i]).collect();
        first += srswor_cov(s.population, &x, &y)?;
    }
    let mut second = 0.0;
    for a in &input.anchors {
        if a.contacts.is_empty() || a.y == 0.0 {
            continue;
        }
        let x: Vec<f64> = a.contacts.iter().map(|c| a.y * tx(c)).collect();
        let y: Vec<f64> = a.contacts.iter().map(|c| a.y * ty(c)).collect();
        second += srswor_cov(a.pool_size, &x, &y)? / a.pi1;
    }
    Ok(TwoStageVariance {
        first_stage: first,
        second_stage: second,
        total: first + second,
    })
}

pub fn variance_two_stage<F: Fn(&TracedContact) -> f64>(input: &GwsmInput, t: F) -> Result<TwoStageVariance> {
    covariance_two_stage(input, &t, &t)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositeVarianceInputs {
    pub v_a: f64,
    pub v_b: f64,
    pub v_ab_a: f64,
    pub v_ab_b: f64,
    /// `Cov(Ŷ_AB^A, Ŷ_A)`.
    pub cov_a: f64,
    /// `Cov(Ŷ_AB^B, Ŷ_B)`.
    pub cov_b: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositeVariance {
    pub value: f64,
    pub raw: f64,
    pub floored: bool,
}

pub fn variance_composite(c: &CompositeVarianceInputs, alpha: f64) -> Result<CompositeVariance> {
    check_alpha(alpha)?;
    let all = [c.v_a, c.v_b, c.v_ab_a, c.v_ab_b, c.cov_a, c.cov_b];
    if all.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("variance components must be finite".into()));
    }
    let b = 1.0 - alpha;
    let raw = c.v_a + c.v_b + alpha * alpha * c.v_ab_a + b * b * c.v_ab_b
        - 2.0 * alpha * c.cov_a
        - 2.0 * b * c.cov_b;
    Ok(CompositeVariance {
        value: raw.max(0.0),
        raw,
        floored: raw < 0.0,
    })
}

/// `Ŷ_A·Ŷ_B / Ŷ_AB`, where the overlap estimate comes from units observed
/// by both samples.
pub fn gcre(ya: f64, yb: f64, overlap: f64) -> Result<f64> {
    if !(overlap > 0.0) {
        return Err(Error::NotComputable(
            "capture-recapture estimate needs a positive overlap between the samples".into(),
        ));
    }
    Ok(ya * yb / overlap)
}

/// Indicator used to pick the `U_A ∩ U_C` contacts in the alternative
/// estimator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum OverlapIndicator {
    /// The contact belongs to `U_c`.
    #[default]
    Complement,
    /// `𝕀[(L_j − L_Cj) ≥ 1]`, evaluated literally.
    LinkCount,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AltEstimate {
    pub y_a: f64,
    pub y_c: f64,
    pub y_ac_a: f64,
    pub y_alt: f64,
}

/// `Ŷ_A + Ŷ_C − Ŷ_AC^A`, with `Ŷ_C = Σ y_k/π_Ck` over a plain panel
/// sample that needs no back-tracing.
pub fn estimate_alt(a: &GwsmInput, panel: &GwsmInput, indicator: OverlapIndicator) -> Result<AltEstimate> {
    require_frame(panel, FrameId::C)?;
    let (y_a, _) = estimate_ya(a)?;
    let y_c = panel.anchors.iter().map(|k| k.y / k.pi1).sum();
    let (y_ac_a, _) = a.total_with(|c| {
        let hit = match indicator {
            OverlapIndicator::Complement => c.in_complement,
            OverlapIndicator::LinkCount => c.l_total > c.l_c,
        };
        if hit { share_v(c) } else { 0.0 }
    });
    Ok(AltEstimate {
        y_a,
        y_c,
        y_ac_a,
        y_alt: y_a + y_c - y_ac_a,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub v1_a: f64,
    pub v2_a: f64,
    pub v_a: f64,
    pub v1_b: f64,
    pub v2_b: f64,
    pub v_b: f64,
    pub v_ab_a: f64,
    pub v_ab_b: f64,
    pub cov_a: f64,
    pub cov_b: f64,
    pub v_composite: f64,
    pub v_composite_floored: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub y_a: f64,
    pub y_b: f64,
    pub y_ab_a: f64,
    pub y_ab_b: f64,
    pub alpha: f64,
    pub alpha_policy: AlphaPolicy,
    pub alpha_clamped: bool,
    pub y_hat: f64,
    pub variance: VarianceReport,
    pub z_v: Vec<f64>,
    pub z_c: Vec<f64>,
}

impl EstimateReport {
    pub fn standard_error(&self) -> f64 {
        self.variance.v_composite.sqrt()
    }
}

/// Point estimates, variance components and composite estimate from one
/// sample of each frame.
pub fn estimate(a: &GwsmInput, b: &GwsmInput, policy: AlphaPolicy) -> Result<EstimateReport> {
    let (y_a, z_v) = estimate_ya(a)?;
    let (y_b, z_c) = estimate_yb(b)?;
    let (y_ab_a, y_ab_b) = estimate_yab(a, b)?;

    let va = variance_two_stage(a, share_v)?;
    let vb = variance_two_stage(b, share_c)?;
    let comps = CompositeVarianceInputs {
        v_a: va.total,
        v_b: vb.total,
        v_ab_a: variance_two_stage(a, term_ab_a)?.total,
        v_ab_b: variance_two_stage(b, term_ab_b)?.total,
        cov_a: covariance_two_stage(a, term_ab_a, share_v)?.total,
        cov_b: covariance_two_stage(b, term_ab_b, share_c)?.total,
    };
    let chosen = match policy {
        AlphaPolicy::Fixed(x) => {
            check_alpha(x)?;
            ClampedAlpha { alpha: x, raw: x, clamped: false }
        }
        AlphaPolicy::Star => {
            let x = alpha_star(comps.v_a.max(0.0), comps.v_b.max(0.0))?;
            ClampedAlpha { alpha: x, raw: x, clamped: false }
        }
        AlphaPolicy::Opt => match alpha_opt(comps.v_a, comps.v_b, comps.v_ab_a, comps.v_ab_b, comps.cov_a, comps.cov_b) {
            Ok(c) => c,
            Err(Error::NotComputable(_)) => ClampedAlpha { alpha: 0.5, raw: 0.5, clamped: false },
            Err(e) => return Err(e),
        },
        AlphaPolicy::MinVariance => alpha_min_variance(comps.v_ab_a, comps.v_ab_b, comps.cov_a, comps.cov_b),
    };
    let y_hat = composite(y_a, y_b, y_ab_a, y_ab_b, chosen.alpha)?;
    let vc = variance_composite(&comps, chosen.alpha)?;
    Ok(EstimateReport {
        y_a,
        y_b,
        y_ab_a,
        y_ab_b,
        alpha: chosen.alpha,
        alpha_policy: policy,
        alpha_clamped: chosen.clamped,
        y_hat,
        variance: VarianceReport {
            v1_a: va.first_stage,
            v2_a: va.second_stage,
            v_a: comps.v_a,
            v1_b: vb.first_stage,
            v2_b: vb.second_stage,
            v_b: comps.v_b,
            v_ab_a: comps.v_ab_a,
            v_ab_b: comps.v_ab_b,
            cov_a: comps.cov_a,
            cov_b: comps.cov_b,
            v_composite: vc.value,
            v_composite_floored: vc.floored,
        },
        z_v,
        z_c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn contact(p: u32, y: f64, l_v: u32, l_c: u32) -> TracedContact {
        TracedContact {
            person: PersonId(p),
            y,
            l_v,
            l_c,
            l_total: l_v.max(l_c).max(1),
            in_complement: false,
        }
    }

    fn single(frame: FrameId, pi1: f64, y: f64, contacts: Vec<TracedContact>, pop: usize) -> GwsmInput {
        GwsmInput {
            frame,
            anchors: vec![AnchorObservation {
                person: PersonId(0),
                pi1,
                pi2: 1.0,
                y,
                stratum: 0,
                pool_size: contacts.len(),
                contacts,
            }],
            strata: vec![Stratum { label: 0, population: pop, sample: 1 }],
        }
    }

    #[test]
    fn hand_evaluated_ya() {
        let input = single(FrameId::V, 0.5, 1.0, vec![contact(0, 1.0, 1, 0), contact(1, 1.0, 1, 0)], 2);
        assert_eq!(estimate_ya(&input).unwrap().0, 4.0);
    }

    #[test]
    fn zero_multiplicity_is_rejected() {
        let input = single(FrameId::V, 1.0, 1.0, vec![contact(1, 1.0, 0, 1)], 1);
        assert!(matches!(estimate_ya(&input), Err(Error::InconsistentInput(_))));
        let traced_negative = single(FrameId::C, 1.0, 0.0, vec![contact(1, 1.0, 0, 1)], 1);
        assert!(estimate_yb(&traced_negative).is_err());
        let negative = single(FrameId::C, 0.5, 0.0, vec![], 2);
        assert_eq!(estimate_yb(&negative).unwrap().0, 0.0);
        let mut zero_pi = single(FrameId::V, 1.0, 1.0, vec![], 1);
        zero_pi.anchors[0].pi1 = 0.0;
        assert!(estimate_ya(&zero_pi).is_err());
    }

    #[test]
    fn composite_endpoints() {
        assert_eq!(composite(10.0, 20.0, 4.0, 6.0, 0.5).unwrap(), 25.0);
        assert_eq!(composite(10.0, 20.0, 4.0, 6.0, 1.0).unwrap(), 26.0);
        assert_eq!(composite(10.0, 20.0, 4.0, 6.0, 0.0).unwrap(), 24.0);
        assert!(composite(1.0, 1.0, 0.0, 0.0, 1.5).is_err());
    }

    #[test]
    fn alpha_rules() {
        assert_eq!(alpha_star(2.0, 2.0).unwrap(), 0.5);
        assert_eq!(alpha_star(1.0, 3.0).unwrap(), 0.75);
        assert_eq!(alpha_star(0.0, 0.0).unwrap(), 0.5);
        let o = alpha_opt(1.0, 3.0, 5.0, 7.0, 0.0, 0.0).unwrap();
        assert_eq!(o.alpha, 0.75);
        assert!(!o.clamped);
        let o = alpha_opt(1.0, 1.0, 0.0, 0.0, 0.0, 5.0).unwrap();
        assert_eq!(o.alpha, 1.0);
        assert!(o.clamped && o.raw == 3.0);
        assert!(alpha_opt(0.0, 0.0, 1.0, 1.0, 0.0, 0.0).is_err());
        let m = alpha_min_variance(2.0, 6.0, 0.0, 0.0);
        assert_eq!(m.alpha, 0.75);
    }

    #[test]
    fn min_variance_alpha_minimises() {
        let c = CompositeVarianceInputs { v_a: 5.0, v_b: 9.0, v_ab_a: 3.0, v_ab_b: 4.0, cov_a: 2.5, cov_b: 1.0 };
        let a = alpha_min_variance(c.v_ab_a, c.v_ab_b, c.cov_a, c.cov_b).alpha;
        let best = variance_composite(&c, a).unwrap().raw;
        for i in 0..=100 {
            let v = variance_composite(&c, i as f64 / 100.0).unwrap().raw;
            assert!(best <= v + 1e-12);
        }
    }

    #[test]
    fn composite_variance_reductions() {
        let c = CompositeVarianceInputs { v_a: 5.0, v_b: 9.0, v_ab_a: 3.0, v_ab_b: 4.0, cov_a: 2.0, cov_b: 1.0 };
        assert_eq!(variance_composite(&c, 0.0).unwrap().value, 5.0 + 9.0 + 4.0 - 2.0);
        let nc = CompositeVarianceInputs { cov_a: 0.0, cov_b: 0.0, ..c };
        assert_eq!(variance_composite(&nc, 1.0).unwrap().value, 17.0);
        // 5 + 9 + 0.25·3 + 0.25·4 − 2 − 1
        assert_eq!(variance_composite(&c, 0.5).unwrap().value, 12.75);
        let neg = CompositeVarianceInputs { v_a: 0.0, v_b: 0.0, v_ab_a: 0.0, v_ab_b: 0.0, cov_a: 1.0, cov_b: 1.0 };
        let r = variance_composite(&neg, 0.5).unwrap();
        assert!(r.floored && r.value == 0.0 && r.raw == -2.0);
    }

    #[test]
    fn gcre_cases() {
        assert_eq!(gcre(10.0, 20.0, 5.0).unwrap(), 40.0);
        assert_eq!(gcre(7.0, 3.0, 3.0).unwrap(), 7.0);
        assert!(matches!(gcre(1.0, 1.0, 0.0), Err(Error::NotComputable(_))));
    }

    #[test]
    fn srswor_variance_by_brute_force() {
        // 4 anchors from a frame of 10, no contacts beyond one each, census at stage two
        let zs = [1.0, 3.0, 0.0, 2.0];
        let anchors = zs
            .iter()
            .enumerate()
            .map(|(i, &z)| AnchorObservation {
                person: PersonId(i as u32),
                pi1: 0.4,
                pi2: 1.0,
                y: 1.0,
                stratum: 0,
                pool_size: 1,
                contacts: vec![contact(i as u32, z, 1, 0)],
            })
            .collect();
        let input = GwsmInput {
            frame: FrameId::V,
            anchors,
            strata: vec![Stratum { label: 0, population: 10, sample: 4 }],
        };
        let v = variance_two_stage(&input, share_v).unwrap();
        let mean = 1.5;
        let s2 = zs.iter().map(|z| (z - mean) * (z - mean)).sum::<f64>() / 3.0;
        let expect = 100.0 / 4.0 * (1.0 - 0.4) * s2;
        assert!((v.first_stage - expect).abs() < 1e-12);
        assert_eq!(v.second_stage, 0.0);
    }
}
