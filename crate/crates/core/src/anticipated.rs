//! Closed-form anticipated variances (AV) of the SRS Horvitz-Thompson
//! estimator and of the two-frame strategy under SRSWOR, their efficiency
//! ratio, and Monte Carlo validators on idealized worlds.
//!
//! An anticipated variance is `E_M E_D (Ŷ − Y)²`: the design variance
//! averaged over a superpopulation model for the marks. The validators
//! redraw both marks and sample every replicate and report the empirical
//! mean squared error.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::designs::Stratum;
use crate::estimators::{estimate_ya, estimate_yab, estimate_yb, AnchorObservation, GwsmInput, TracedContact};
use crate::frames::FrameId;
use crate::rng;
use crate::synthpop::PersonId;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AvParams {
    /// Population size `N`.
    pub n: f64,
    /// Sampling fraction `f = n/N`.
    pub f: f64,
    /// Overall infection proportion `μ = Y/N`.
    pub mu: f64,
    /// Infection proportion among people linked to the sampled units.
    pub theta: f64,
    /// Mean contact count `L`.
    pub l: f64,
    /// Share of the sample allocated to `U_v`.
    pub p_v: f64,
    pub alpha: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
}

impl Default for AvParams {
    fn default() -> Self {
        AvParams {
            n: 20_000.0,
            f: 0.05,
            mu: 0.04,
            theta: 0.25,
            l: 10.0,
            p_v: 0.5,
            alpha: 0.5,
            gamma_a: 1.0,
            gamma_b: 1.0,
        }
    }
}

fn unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!("{name} = {x} not in [0, 1]")));
    }
    Ok(())
}

impl AvParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.n > 0.0) {
            return Err(Error::InvalidArgument(format!("N = {} must be positive", self.n)));
        }
        if !(self.f > 0.0 && self.f <= 1.0) {
            return Err(Error::InvalidArgument(format!("f = {} not in (0, 1]", self.f)));
        }
        for (name, x) in [
            ("μ", self.mu),
            ("θ", self.theta),
            ("P_v", self.p_v),
            ("α", self.alpha),
            ("γ_A", self.gamma_a),
            ("γ_B", self.gamma_b),
        ] {
            unit(name, x)?;
        }
        if self.mu > self.theta {
            return Err(Error::InvalidArgument(format!(
                "μ = {} exceeds θ = {}",
                self.mu, self.theta
            )));
        }
        if !(self.l >= 1.0) {
            return Err(Error::InvalidArgument(format!("L = {} must be at least 1", self.l)));
        }
        Ok(())
    }

    /// Bracketed factor of the `U_v` term, per sampled unit and contact.
    fn bracket_a(&self) -> f64 {
        let (t, a, g) = (self.theta, self.alpha, self.gamma_a);
        t * ((1.0 - t) * (1.0 - 2.0 * a * g) + a * a * g * (1.0 - g * t))
    }

    fn bracket_b(&self) -> f64 {
        let (t, b, g, mt) = (self.theta, 1.0 - self.alpha, self.gamma_b, self.mu * self.theta);
        t * ((1.0 - mt) + b * b * g * (1.0 - g * mt) - 2.0 * b * g * (1.0 - mt))
    }
}

/// `(N/f)·μ(1 − μ)`.
pub fn av_srs_ht(n: f64, f: f64, mu: f64) -> Result<f64> {
    if !(f > 0.0 && f <= 1.0) {
        return Err(Error::InvalidArgument(format!("f = {f} not in (0, 1]")));
    }
    unit("μ", mu)?;
    Ok(n / f * mu * (1.0 - mu))
}

/// AV of `Ŷ_A − α·Ŷ_AB^A`.
pub fn av_group_a(p: &AvParams) -> Result<f64> {
    p.validate()?;
    Ok(p.p_v * p.n / p.f / p.l * p.bracket_a())
}

/// AV of `Ŷ_B − (1 − α)·Ŷ_AB^B`.
pub fn av_group_b(p: &AvParams) -> Result<f64> {
    p.validate()?;
    if p.mu == 0.0 {
        return Err(Error::InvalidArgument("μ = 0 leaves the panel term undefined".into()));
    }
    Ok((1.0 - p.p_v) * p.n / (p.f * p.l * p.mu) * p.bracket_b())
}

pub fn av_strategy(p: &AvParams) -> Result<f64> {
    Ok(av_group_a(p)? + av_group_b(p)?)
}

/// Per-frame efficiency terms `(eff_A, eff_B)`; the strategy efficiency is
/// `P_v·eff_A + (1 − P_v)·eff_B`.
pub fn efficiency_components(p: &AvParams) -> Result<(f64, f64)> {
    p.validate()?;
    let srs = p.mu * (1.0 - p.mu);
    if srs == 0.0 {
        return Err(Error::NotComputable("μ(1 − μ) = 0: the SRS variance vanishes".into()));
    }
    if p.mu == 0.0 {
        return Err(Error::InvalidArgument("μ = 0 leaves the panel term undefined".into()));
    }
    Ok((
        p.bracket_a() / p.l / srs,
        p.bracket_b() / (p.l * p.mu) / srs,
    ))
}

/// `AV(strategy) / AV(SRS-HT)`.
pub fn efficiency(p: &AvParams) -> Result<f64> {
    let (ea, eb) = efficiency_components(p)?;
    Ok(p.p_v * ea + (1.0 - p.p_v) * eb)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AvTable {
    pub srs_ht: f64,
    pub group_a: f64,
    pub group_b: f64,
    pub strategy: f64,
    pub efficiency: f64,
}

pub fn av_table(p: &AvParams) -> Result<AvTable> {
    Ok(AvTable {
        srs_ht: av_srs_ht(p.n, p.f, p.mu)?,
        group_a: av_group_a(p)?,
        group_b: av_group_b(p)?,
        strategy: av_strategy(p)?,
        efficiency: efficiency(p)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalAv {
    /// Mean of `(Ŷ − Y)²` over replicates.
    pub mse: f64,
    /// Monte Carlo standard error of `mse`.
    pub mse_se: f64,
    pub mean_error: f64,
    pub replicates: usize,
}

fn summarize(errors: &[f64]) -> EmpiricalAv {
    let r = errors.len() as f64;
    let sq: Vec<f64> = errors.iter().map(|e| e * e).collect();
    let mse = sq.iter().sum::<f64>() / r;
    let var_sq = sq.iter().map(|s| (s - mse) * (s - mse)).sum::<f64>() / (r - 1.0);
    EmpiricalAv {
        mse,
        mse_se: (var_sq / r).sqrt(),
        mean_error: errors.iter().sum::<f64>() / r,
        replicates: errors.len(),
    }
}

fn bernoulli<R: Rng + ?Sized>(rng: &mut R, p: f64) -> f64 {
    f64::from(u8::from(rng.random::<f64>() < p))
}

fn check_reps(replicates: usize) -> Result<()> {
    if replicates < 2 {
        return Err(Error::InvalidArgument("need at least 2 replicates".into()));
    }
    Ok(())
}

/// SRSWOR of `round(f·N)` from `N` units with i.i.d. Bernoulli(μ) marks,
/// HT total.
pub fn empirical_av_srs_ht(p: &AvParams, replicates: usize, seed: u64) -> Result<EmpiricalAv> {
    p.validate()?;
    check_reps(replicates)?;
    let pop = p.n.round() as usize;
    let n = (p.f * p.n).round() as usize;
    if n == 0 || n > pop {
        return Err(Error::InfeasibleDesign(format!("sample of {n} from {pop}")));
    }
    let errors: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut g = rng::stream(seed, &[0, r as u64]);
            let y: Vec<f64> = (0..pop).map(|_| bernoulli(&mut g, p.mu)).collect();
            let total: f64 = y.iter().sum();
            let est: f64 = index::sample(&mut g, pop, n).iter().map(|k| y[k]).sum::<f64>() * pop as f64 / n as f64;
            est - total
        })
        .collect();
    Ok(summarize(&errors))
}

/// Regular bipartite links: anchor `k` reaches the `links` consecutive
/// nodes starting at `k·links/multiplicity`, so every node is reached by
/// exactly `multiplicity` anchors.
fn regular_links(anchors: usize, links: usize, multiplicity: usize) -> Result<(usize, Vec<Vec<usize>>)> {
    if multiplicity == 0 || links % multiplicity != 0 {
        return Err(Error::InvalidArgument(format!(
            "L = {links} must be a positive multiple of the multiplicity {multiplicity}"
        )));
    }
    let step = links / multiplicity;
    let nodes = anchors * step;
    if links > nodes {
        return Err(Error::InvalidArgument("more links than nodes".into()));
    }
    let lists = (0..anchors)
        .map(|k| (0..links).map(|i| (k * step + i) % nodes).collect())
        .collect();
    Ok((nodes, lists))
}

fn integral(name: &str, x: f64) -> Result<usize> {
    let r = x.round();
    if r < 1.0 || (x - r).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("{name} = {x} must be a positive integer")));
    }
    Ok(r as usize)
}

struct Idealized {
    anchors: usize,
    sample: usize,
    nodes: usize,
    lists: Vec<Vec<usize>>,
    multiplicity: u32,
}

fn idealized(anchors: f64, f: f64, links: usize, multiplicity: usize) -> Result<Idealized> {
    let anchors = anchors.round() as usize;
    let sample = (f * anchors as f64).round() as usize;
    if sample < 2 || sample > anchors {
        return Err(Error::InfeasibleDesign(format!("sample of {sample} from {anchors} anchors")));
    }
    let (nodes, lists) = regular_links(anchors, links, multiplicity)?;
    Ok(Idealized {
        anchors,
        sample,
        nodes,
        lists,
        multiplicity: multiplicity as u32,
    })
}

fn observations(
    world: &Idealized,
    picks: &[usize],
    pi: f64,
    contact: impl Fn(usize) -> TracedContact,
) -> Vec<AnchorObservation> {
    picks
        .iter()
        .map(|&k| AnchorObservation {
            person: PersonId(k as u32),
            pi1: pi,
            pi2: 1.0,
            y: 1.0,
            stratum: 0,
            pool_size: world.lists[k].len(),
            contacts: world.lists[k].iter().map(|&j| contact(j)).collect(),
        })
        .collect()
}

/// `Ŷ_A − α·Ŷ_AB^A` on `P_v·N` verified anchors with `L` contacts each,
/// every node reached by `L` anchors; marks `y ~ Bernoulli(θ)` and overlap
/// flags `𝕀(L_Cj ≥ 1) ~ Bernoulli(γ_A)`.
pub fn empirical_av_group_a(p: &AvParams, replicates: usize, seed: u64) -> Result<EmpiricalAv> {
    p.validate()?;
    check_reps(replicates)?;
    let l = integral("L", p.l)?;
    let world = idealized(p.p_v * p.n, p.f, l, l)?;
    let pi = world.sample as f64 / world.anchors as f64;
    let errors: Result<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut g = rng::stream(seed, &[1, r as u64]);
            let y: Vec<f64> = (0..world.nodes).map(|_| bernoulli(&mut g, p.theta)).collect();
            let hit: Vec<f64> = (0..world.nodes).map(|_| bernoulli(&mut g, p.gamma_a)).collect();
            let target: f64 = y.iter().zip(&hit).map(|(y, h)| y * (1.0 - p.alpha * h)).sum();
            let picks = index::sample(&mut g, world.anchors, world.sample).into_vec();
            let a = GwsmInput {
                frame: FrameId::V,
                anchors: observations(&world, &picks, pi, |j| TracedContact {
                    person: PersonId(j as u32),
                    y: y[j],
                    l_v: world.multiplicity,
                    l_c: hit[j] as u32,
                    l_total: world.multiplicity,
                    in_complement: false,
                }),
                strata: vec![Stratum { label: 0, population: world.anchors, sample: world.sample }],
            };
            let empty_b = GwsmInput { frame: FrameId::C, anchors: Vec::new(), strata: Vec::new() };
            let (ya, _) = estimate_ya(&a)?;
            let (yab_a, _) = estimate_yab(&a, &empty_b)?;
            Ok(ya - p.alpha * yab_a - target)
        })
        .collect();
    Ok(summarize(&errors?))
}

/// `Ŷ_B − (1 − α)·Ŷ_AB^B` on `(1 − P_v)·N` panel anchors with `L` contacts
/// each and multiplicity `L·μ`; anchor-contact products `y_k·y_j ~
/// Bernoulli(μθ)` and overlap flags `𝕀(L_vj ≥ 1) ~ Bernoulli(γ_B)`.
pub fn empirical_av_group_b(p: &AvParams, replicates: usize, seed: u64) -> Result<EmpiricalAv> {
    p.validate()?;
    check_reps(replicates)?;
    let l = integral("L", p.l)?;
    let m = integral("L·μ", p.l * p.mu)?;
    let world = idealized((1.0 - p.p_v) * p.n, p.f, l, m)?;
    let pi = world.sample as f64 / world.anchors as f64;
    let mt = p.mu * p.theta;
    let b = 1.0 - p.alpha;
    let errors: Result<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut g = rng::stream(seed, &[2, r as u64]);
            let y: Vec<f64> = (0..world.nodes).map(|_| bernoulli(&mut g, mt)).collect();
            let hit: Vec<f64> = (0..world.nodes).map(|_| bernoulli(&mut g, p.gamma_b)).collect();
            let target: f64 = y.iter().zip(&hit).map(|(y, h)| y * (1.0 - b * h)).sum();
            let picks = index::sample(&mut g, world.anchors, world.sample).into_vec();
            let panel = GwsmInput {
                frame: FrameId::C,
                anchors: observations(&world, &picks, pi, |j| TracedContact {
                    person: PersonId(j as u32),
                    y: y[j],
                    l_v: hit[j] as u32,
                    l_c: world.multiplicity,
                    l_total: world.multiplicity,
                    in_complement: true,
                }),
                strata: vec![Stratum { label: 0, population: world.anchors, sample: world.sample }],
            };
            let empty_a = GwsmInput { frame: FrameId::V, anchors: Vec::new(), strata: Vec::new() };
            let (yb, _) = estimate_yb(&panel)?;
            let (_, yab_b) = estimate_yab(&empty_a, &panel)?;
            Ok(yb - b * yab_b - target)
        })
        .collect();
    Ok(summarize(&errors?))
}
