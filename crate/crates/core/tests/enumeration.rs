//! Exhaustive design enumeration on toy worlds: the probability-weighted
//! mean of every estimator over all possible samples equals its target.

mod common;

use common::{close, enumerate_two_stage, toy, Toy};
use episurvey::estimators::{
    composite, estimate_alt, estimate_ya, estimate_yab, estimate_yb, GwsmInput, OverlapIndicator,
};
use episurvey::frames::{FrameId, Membership};

const SEEDS: [u64; 6] = [1, 2, 3, 4, 5, 6];

fn take_half(pool: usize) -> usize {
    ((pool as f64 * 0.5 + 0.5).floor() as usize).clamp(1, pool)
}

fn a_outcomes(t: &Toy) -> Vec<(f64, GwsmInput)> {
    let v = t.frame(Membership::Verified);
    enumerate_two_stage(t, FrameId::V, &v, 2, take_half, |_| true)
}

fn b_outcomes(t: &Toy) -> Vec<(f64, GwsmInput)> {
    let c = t.frame(Membership::Complement);
    enumerate_two_stage(t, FrameId::C, &c, 2, take_half, |k| t.y[k])
}

fn expect<F: Fn(&GwsmInput) -> f64>(outcomes: &[(f64, GwsmInput)], f: F) -> f64 {
    let total_p: f64 = outcomes.iter().map(|(p, _)| p).sum();
    assert!(close(total_p, 1.0, 1e-12), "probabilities sum to {total_p}");
    outcomes.iter().map(|(p, s)| p * f(s)).sum()
}

#[test]
fn toy_truth_matches_library_truth() {
    for seed in SEEDS {
        let t = toy(seed, 9);
        let (y, ya, yb, yab) = t.truth();
        let lib = t.world.truth().unwrap();
        assert_eq!((lib.y, lib.y_a, lib.y_b, lib.y_ab), (y, ya, yb, yab));
    }
}

#[test]
fn group_estimators_are_unbiased_over_all_samples() {
    for seed in SEEDS {
        let t = toy(seed, 9);
        let (_, ya, yb, yab) = t.truth();
        let a = a_outcomes(&t);
        let b = b_outcomes(&t);
        let empty_b = GwsmInput { frame: FrameId::C, anchors: vec![], strata: vec![] };
        let empty_a = GwsmInput { frame: FrameId::V, anchors: vec![], strata: vec![] };
        let e_ya = expect(&a, |s| estimate_ya(s).unwrap().0);
        let e_yb = expect(&b, |s| estimate_yb(s).unwrap().0);
        let e_yab_a = expect(&a, |s| estimate_yab(s, &empty_b).unwrap().0);
        let e_yab_b = expect(&b, |s| estimate_yab(&empty_a, s).unwrap().1);
        assert!(close(e_ya, ya as f64, 1e-9), "seed {seed}: E[Ŷ_A] = {e_ya}, Y_A = {ya}");
        assert!(close(e_yb, yb as f64, 1e-9), "seed {seed}: E[Ŷ_B] = {e_yb}, Y_B = {yb}");
        assert!(close(e_yab_a, yab as f64, 1e-9), "seed {seed}: E[Ŷ_AB^A] = {e_yab_a}, Y_AB = {yab}");
        assert!(close(e_yab_b, yab as f64, 1e-9), "seed {seed}: E[Ŷ_AB^B] = {e_yab_b}, Y_AB = {yab}");
    }
}

#[test]
fn composite_is_unbiased_for_every_fixed_alpha() {
    for seed in SEEDS {
        let t = toy(seed, 8);
        let (y, ..) = t.truth();
        let a = a_outcomes(&t);
        let b = b_outcomes(&t);
        for alpha in [0.0, 0.3, 0.5, 1.0] {
            // samples are independent, so the mean over the product space
            // is the sum of per-frame means
            let mut mean = 0.0;
            for (pa, sa) in &a {
                for (pb, sb) in &b {
                    let (ya, _) = estimate_ya(sa).unwrap();
                    let (yb, _) = estimate_yb(sb).unwrap();
                    let (ab_a, ab_b) = estimate_yab(sa, sb).unwrap();
                    mean += pa * pb * composite(ya, yb, ab_a, ab_b, alpha).unwrap();
                }
            }
            assert!(close(mean, y as f64, 1e-9), "seed {seed}, α {alpha}: {mean} vs {y}");
        }
    }
}

fn alt_mean(t: &Toy, indicator: OverlapIndicator) -> f64 {
    let a = a_outcomes(t);
    let c = t.frame(Membership::Complement);
    // plain panel: no tracing
    let panel = enumerate_two_stage(t, FrameId::C, &c, 2, |p| p, |_| false);
    let mut mean = 0.0;
    for (pa, sa) in &a {
        for (pc, sc) in &panel {
            mean += pa * pc * estimate_alt(sa, sc, indicator).unwrap().y_alt;
        }
    }
    mean
}

#[test]
fn alternative_estimator_is_unbiased() {
    for seed in SEEDS {
        let t = toy(seed, 8);
        let (y, ..) = t.truth();
        let m = alt_mean(&t, OverlapIndicator::Complement);
        assert!(close(m, y as f64, 1e-9), "seed {seed}: E[Ŷ_alt] = {m}, Y = {y}");
    }
}

#[test]
fn literal_link_count_indicator_is_biased() {
    let biased = SEEDS.iter().any(|&seed| {
        let t = toy(seed, 8);
        let (y, ..) = t.truth();
        !close(alt_mean(&t, OverlapIndicator::LinkCount), y as f64, 1e-6)
    });
    assert!(biased);
}

#[test]
fn enumeration_covers_the_design() {
    let t = toy(1, 9);
    let v = t.frame(Membership::Verified);
    let outcomes = enumerate_two_stage(&t, FrameId::V, &v, 2, take_half, |_| true);
    assert!(outcomes.len() >= common::subsets(&v, 2).len());
}
