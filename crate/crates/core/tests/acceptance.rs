//! End-to-end acceptance checks. Run with
//! `cargo test -p episurvey --test acceptance`; one line per criterion.

mod common;

use std::collections::HashSet;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::{enumerate_two_stage, toy, Toy};
use episurvey::anticipated::{
    av_group_a, av_group_b, av_srs_ht, empirical_av_group_a, empirical_av_group_b, empirical_av_srs_ht, AvParams,
};
use episurvey::designs::{cv_for_sample_size, ContactScheme, TwoFrameDesign};
use episurvey::estimators::{
    alpha_star, estimate, estimate_alt, estimate_ya, estimate_yab, estimate_yb, gcre, AlphaPolicy, GwsmInput,
    OverlapIndicator,
};
use episurvey::frames::{FrameId, Membership, World, DEFAULT_WINDOW};
use episurvey::harness::{run_experiment_on, run_scheme_on, ExperimentConfig, SchemeId};
use episurvey::rng;
use episurvey::synthpop::{run_epidemic, EpidemicTrace, HealthState, SimConfig};
use episurvey::waves::{run_waves, WaveConfig};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn default_trace() -> EpidemicTrace {
    run_epidemic(&SimConfig::default()).expect("default simulation")
}

// ---------------------------------------------------------------- 1

/// Totals recomputed from the raw trace without the library's link view.
fn oracle_totals(trace: &EpidemicTrace, day: u32) -> (u64, u64, u64, [u64; 3]) {
    let n = trace.population_size();
    let first = day.saturating_sub(DEFAULT_WINDOW - 1).max(1);
    let mut links: HashSet<(usize, usize)> = (0..n).map(|k| (k, k)).collect();
    for c in trace.contacts().iter().filter(|c| (first..=day).contains(&c.day)) {
        links.insert((c.a.index(), c.b.index()));
        links.insert((c.b.index(), c.a.index()));
    }
    let states = trace.states_on(day);
    let y: Vec<bool> = states.iter().map(|s| s.is_infected()).collect();
    let verified: Vec<bool> = trace
        .persons()
        .map(|k| trace.is_verified_by(k, day) && states[k.index()] != HealthState::Dead)
        .collect();
    let complement: Vec<bool> = (0..n).map(|k| !verified[k] && states[k] != HealthState::Dead).collect();
    let (mut lv, mut lc) = (vec![0u64; n], vec![0u64; n]);
    for &(k, j) in &links {
        if verified[k] {
            lv[j] += 1;
        }
        if complement[k] && y[k] {
            lc[j] += 1;
        }
    }
    // weight-share sums, kept as per-person numerators over L
    let (mut num_a, mut num_ab_a, mut num_b, mut num_ab_b) = (vec![0u64; n], vec![0u64; n], vec![0u64; n], vec![0u64; n]);
    for &(k, j) in &links {
        if !y[j] {
            continue;
        }
        if verified[k] {
            num_a[j] += 1;
            if lc[j] >= 1 {
                num_ab_a[j] += 1;
            }
        }
        if complement[k] && y[k] {
            num_b[j] += 1;
            if lv[j] >= 1 {
                num_ab_b[j] += 1;
            }
        }
    }
    let share = |num: &[u64], l: &[u64]| -> u64 {
        (0..n)
            .filter(|&j| num[j] > 0)
            .map(|j| {
                assert_eq!(num[j] % l[j], 0, "weights do not telescope for person {j}");
                num[j] / l[j]
            })
            .sum()
    };
    let yy = y.iter().filter(|&&b| b).count() as u64;
    let ya = share(&num_a, &lv);
    let yb = share(&num_b, &lc);
    let direct = (0..n).filter(|&j| y[j] && lv[j] >= 1 && lc[j] >= 1).count() as u64;
    (yy, ya, yb, [direct, share(&num_ab_a, &lv), share(&num_ab_b, &lc)])
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut g = rng::seeded(0xC1);
    let mut bad = Vec::new();
    for _ in 0..100 {
        let seed: u64 = g.random_range(0..1_000_000);
        let day: u32 = g.random_range(1..=84);
        let trace = run_epidemic(&SimConfig { rng_seed: seed, ..SimConfig::default() }).unwrap();
        let (y, ya, yb, [ab6, ab7a, ab7b]) = oracle_totals(&trace, day);
        let lib = World::build(&trace, day, DEFAULT_WINDOW).unwrap().truth().unwrap();
        let ok = y + ab6 == ya + yb && ab6 == ab7a && ab6 == ab7b && (lib.y, lib.y_a, lib.y_b, lib.y_ab) == (y, ya, yb, ab6);
        if !ok {
            bad.push(format!("seed {seed} day {day}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && secs < 60.0,
        format!("100 worlds, {} mismatches {:?}, {secs:.1} s", bad.len(), bad),
    )
}

// ---------------------------------------------------------------- 2

fn take_half(pool: usize) -> usize {
    ((pool as f64 * 0.5 + 0.5).floor() as usize).clamp(1, pool)
}

fn expect<F: Fn(&GwsmInput) -> f64>(outcomes: &[(f64, GwsmInput)], f: F) -> f64 {
    outcomes.iter().map(|(p, s)| p * f(s)).sum()
}

fn toy_errors(t: &Toy) -> f64 {
    let (y, ya, yb, yab) = t.truth();
    let v = t.frame(Membership::Verified);
    let c = t.frame(Membership::Complement);
    let a = enumerate_two_stage(t, FrameId::V, &v, 2, take_half, |_| true);
    let b = enumerate_two_stage(t, FrameId::C, &c, 2, take_half, |k| t.y[k]);
    let panel = enumerate_two_stage(t, FrameId::C, &c, 2, |p| p, |_| false);
    let empty_a = GwsmInput { frame: FrameId::V, anchors: vec![], strata: vec![] };
    let empty_b = GwsmInput { frame: FrameId::C, anchors: vec![], strata: vec![] };
    let e_ya = expect(&a, |s| estimate_ya(s).unwrap().0);
    let e_yb = expect(&b, |s| estimate_yb(s).unwrap().0);
    let e_ab_a = expect(&a, |s| estimate_yab(s, &empty_b).unwrap().0);
    let e_ab_b = expect(&b, |s| estimate_yab(&empty_a, s).unwrap().1);
    let mut e_alt = 0.0;
    for (pa, sa) in &a {
        for (pc, sc) in &panel {
            e_alt += pa * pc * estimate_alt(sa, sc, OverlapIndicator::Complement).unwrap().y_alt;
        }
    }
    [
        (e_ya, ya),
        (e_yb, yb),
        (e_ab_a, yab),
        (e_ab_b, yab),
        (e_alt, y),
    ]
    .iter()
    .map(|&(e, t)| (e - t as f64).abs())
    .fold(0.0, f64::max)
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let worst = (1..=6).map(|seed| toy_errors(&toy(seed, 9))).fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-9 && secs < 30.0,
        format!("6 toy worlds, max |E[est] − target| = {worst:.2e}, {secs:.1} s"),
    )
}

// ---------------------------------------------------------------- 3

fn criterion_3(trace: &EpidemicTrace) -> Outcome {
    let census = TwoFrameDesign { n_v: usize::MAX, n_c: usize::MAX, a_scheme: ContactScheme::All, b_scheme: ContactScheme::All };
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    for day in [15, 25, 35] {
        let w = World::build(trace, day, DEFAULT_WINDOW).unwrap();
        let t = w.truth().unwrap();
        let (a, b) = census
            .draw(&w.frames.verified, &w.frames.complement, &w.link, &w.infected, &mut rng::seeded(day.into()))
            .unwrap();
        let (ia, ib) = (GwsmInput::from_sample(&a, &w).unwrap(), GwsmInput::from_sample(&b, &w).unwrap());
        for policy in [AlphaPolicy::Fixed(0.0), AlphaPolicy::Fixed(0.5), AlphaPolicy::Fixed(1.0), AlphaPolicy::Star, AlphaPolicy::MinVariance] {
            let r = estimate(&ia, &ib, policy).unwrap();
            for (e, x) in [(r.y_a, t.y_a), (r.y_b, t.y_b), (r.y_ab_a, t.y_ab), (r.y_ab_b, t.y_ab), (r.y_hat, t.y)] {
                worst = worst.max((e - x as f64).abs());
            }
        }
        let alt = estimate_alt(&ia, &ib, OverlapIndicator::Complement).unwrap();
        worst = worst.max((alt.y_alt - t.y as f64).abs());
        let g = gcre(t.y_a as f64, t.y_b as f64, t.y_ab as f64).unwrap();
        notes.push(format!("day {day} GCRE {g:.1} vs Y {}", t.y));
    }
    let wave_cfg = WaveConfig { design: census, ..WaveConfig::default() };
    let report = run_waves(trace, &wave_cfg, 1).unwrap();
    for r in &report.rows {
        worst = worst.max((r.y_hat - r.y_true as f64).abs());
    }
    outcome(
        worst < 1e-6 && report.rows.len() >= 5,
        format!(
            "max |error| = {worst:.2e} over 3 days × 5 α settings, Ŷ_alt and {} chained waves ({})",
            report.rows.len(),
            notes.join("; ")
        ),
    )
}

// ---------------------------------------------------------------- 4, 5

fn full_scale_config() -> ExperimentConfig {
    ExperimentConfig { n_c: 4000, replications: 500, ..ExperimentConfig::default() }
}

fn criteria_4_5(trace: &EpidemicTrace) -> (Outcome, Outcome) {
    let start = Instant::now();
    let result = run_experiment_on(trace, &full_scale_config()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let rows = &result.table3;
    let first_day = rows.iter().map(|r| r.day).min().unwrap();
    let mut table = String::new();
    for r in rows {
        table.push_str(&format!(
            "\n      day {:>2} {}: Y {:>5} mean {:>9.2} bias {:.4} eff {:.4}",
            r.day,
            r.scheme.label(),
            r.true_total,
            r.mean_estimate,
            r.relative_abs_bias,
            r.efficiency_srs_without_contacts
        ));
    }
    let early: Vec<_> = rows.iter().filter(|r| r.day == first_day).collect();
    let bias_ok = early.iter().all(|r| match r.scheme {
        SchemeId::A1B2 => r.relative_abs_bias <= 0.01,
        SchemeId::A2B2 | SchemeId::A2B3 => r.relative_abs_bias <= 0.02,
        SchemeId::A1B3 => true,
    });
    let c4 = outcome(bias_ok && secs < 300.0, format!("R=500, day {first_day}, {secs:.1} s{table}"));

    let below_one = rows.iter().all(|r| r.efficiency_srs_without_contacts < 1.0);
    let a1_early = early
        .iter()
        .filter(|r| r.scheme.full_a())
        .all(|r| r.efficiency_srs_without_contacts < 0.05);
    let eff = |day, s: SchemeId| {
        rows.iter()
            .find(|r| r.day == day && r.scheme == s)
            .map(|r| r.efficiency_srs_without_contacts)
            .unwrap()
    };
    let mut order_breaks = Vec::new();
    for day in rows.iter().map(|r| r.day).collect::<std::collections::BTreeSet<_>>() {
        for (a1, a2) in [(SchemeId::A1B2, SchemeId::A2B2), (SchemeId::A1B3, SchemeId::A2B3)] {
            if eff(day, a1) > eff(day, a2) {
                order_breaks.push(format!("day {day} {} {:.4} > {} {:.4}", a1.label(), eff(day, a1), a2.label(), eff(day, a2)));
            }
        }
    }
    let c5 = outcome(
        below_one && a1_early && order_breaks.is_empty(),
        format!(
            "all cells < 1: {below_one}; A1 < 0.05 on day {first_day}: {a1_early}; A1 ≤ A2 breaks: {order_breaks:?}"
        ),
    );
    (c4, c5)
}

// ---------------------------------------------------------------- 6

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let p = AvParams { n: 10_000.0, f: 0.02, mu: 0.1, theta: 0.25, l: 20.0, p_v: 0.5, alpha: 0.5, gamma_a: 0.6, gamma_b: 0.5 };
    let pb = AvParams { n: 4_000.0, ..p };
    let reps = 20_000;
    let srs = empirical_av_srs_ht(&p, reps, 61).unwrap();
    let ga = empirical_av_group_a(&p, reps, 62).unwrap();
    let gb = empirical_av_group_b(&pb, reps, 63).unwrap();
    let f_srs = av_srs_ht(p.n, p.f, p.mu).unwrap();
    let f_a = av_group_a(&p).unwrap();
    let f_b = av_group_b(&pb).unwrap();
    let rel = |e: f64, f: f64| (e - f).abs() / f;
    let (r_srs, r_a, r_b) = (rel(srs.mse, f_srs), rel(ga.mse, f_a), rel(gb.mse, f_b));
    let secs = start.elapsed().as_secs_f64();
    outcome(
        r_srs <= 0.05 && r_a <= 0.15 && r_b <= 0.15 && secs < 180.0,
        format!(
            "SRS {:.1} vs {f_srs:.1} ({:.1}%), group A {:.1} vs {f_a:.1} ({:.1}%), group B {:.1} vs {f_b:.1} ({:.1}%), {secs:.1} s",
            srs.mse,
            100.0 * r_srs,
            ga.mse,
            100.0 * r_a,
            gb.mse,
            100.0 * r_b
        ),
    )
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Outcome {
    let a = 100.0 * cv_for_sample_size(0.25, 1000).unwrap();
    let b = 100.0 * cv_for_sample_size(0.10, 1200).unwrap();
    let one_dp = |x: f64| (x * 10.0).round() / 10.0;
    outcome(
        one_dp(a) == 5.5 && one_dp(b) == 8.7,
        format!("n=1000, p=0.25: CV {a:.2}%; n=1200, p=0.10: CV {b:.2}%"),
    )
}

// ---------------------------------------------------------------- 8

fn run_cli(config: &Path, out: &Path, args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_episurvey"))
        .args(args)
        .args(["--seed", "5", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn criterion_8() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, common::SMALL_CONFIG).unwrap();
    let invocations: [&[&str]; 7] = [
        &["simulate"],
        &["truth", "--day", "25"],
        &["estimate", "--day", "25", "--scheme", "A2B3"],
        &["montecarlo"],
        &["montecarlo", "--format", "json"],
        &["waves", "--scheme", "A2B2"],
        &["av", "--format", "json"],
    ];
    let mut differing = Vec::new();
    let mut files = 0;
    for (i, args) in invocations.iter().enumerate() {
        let (a, b) = (tmp.path().join(format!("{i}a")), tmp.path().join(format!("{i}b")));
        if !(run_cli(&cfg, &a, args) && run_cli(&cfg, &b, args)) {
            differing.push(format!("{args:?} failed"));
            continue;
        }
        let (x, y) = (dir_bytes(&a), dir_bytes(&b));
        files += x.len();
        if x != y {
            differing.push(format!("{args:?}"));
        }
    }
    outcome(
        differing.is_empty(),
        format!("{} invocations run twice, {files} files compared, differing: {differing:?}", invocations.len()),
    )
}

// ---------------------------------------------------------------- 9

fn variance_with_se(x: &[f64]) -> (f64, f64) {
    let r = x.len() as f64;
    let m = x.iter().sum::<f64>() / r;
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / r;
    let m4 = x.iter().map(|v| (v - m).powi(4)).sum::<f64>() / r;
    let s2 = m2 * r / (r - 1.0);
    (s2, ((m4 - m2 * m2) / r).max(0.0).sqrt())
}

fn criterion_9(trace: &EpidemicTrace) -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    let mut g = rng::seeded(0xC9);
    for _ in 0..10_000 {
        let (va, vb) = (g.random::<f64>() * 1e4, g.random::<f64>() * 1e4);
        pass &= (0.0..=1.0).contains(&alpha_star(va, vb).unwrap());
    }
    for day in [25, 35] {
        let w = World::build(trace, day, DEFAULT_WINDOW).unwrap();
        for (label, policy) in [("α*", AlphaPolicy::Star), ("min-variance α", AlphaPolicy::MinVariance)] {
            let config = ExperimentConfig {
                n_v: w.frames.verified.len() / 2,
                n_c: 4000,
                replications: 500,
                alpha_policy: policy,
                ..ExperimentConfig::default()
            };
            let out = run_scheme_on(&w, SchemeId::A2B2, &config).unwrap();
            let reps = &out.replicates;
            let in_range = reps.iter().all(|r| (0.0..=1.0).contains(&r.alpha) && !r.alpha_clamped);
            let y_hat: Vec<f64> = reps.iter().map(|r| r.y_hat).collect();
            let (v, se) = variance_with_se(&y_hat);
            let (v0, _) = variance_with_se(&reps.iter().map(|r| r.at_alpha(0.0)).collect::<Vec<_>>());
            let (v1, _) = variance_with_se(&reps.iter().map(|r| r.at_alpha(1.0)).collect::<Vec<_>>());
            let ok = v <= v0.min(v1) + 3.0 * se;
            if matches!(policy, AlphaPolicy::Star) {
                pass &= ok && in_range;
            }
            lines.push(format!(
                "day {day} {label}: mean α {:.3}, var {v:.1} (se {se:.1}) vs var(α=0) {v0:.1}, var(α=1) {v1:.1} -> {}",
                out.row.alpha,
                if ok { "within bound" } else { "above bound" }
            ));
        }
    }
    outcome(pass, format!("α* in [0,1] on 10000 random inputs{}", lines.iter().map(|l| format!("\n      {l}")).collect::<String>()))
}

// ---------------------------------------------------------------- 10

fn criterion_10(trace: &EpidemicTrace) -> Outcome {
    let cfg = WaveConfig::default();
    let report = run_waves(trace, &cfg, 10).unwrap();
    let mut bad = Vec::new();
    for pair in report.rows.windows(2) {
        let (s, t) = (pair[0].t, pair[1].t);
        let (before, after) = (trace.states_on(s), trace.states_on(t));
        let (mut d, mut h, mut new) = (0i64, 0i64, 0i64);
        for (b, a) in before.iter().zip(after) {
            match (b.is_infected(), a.is_infected()) {
                (true, false) if *a == HealthState::Dead => d += 1,
                (true, false) => h += 1,
                (false, true) => new += 1,
                _ => {}
            }
        }
        let ys = before.iter().filter(|x| x.is_infected()).count() as i64;
        let yt = after.iter().filter(|x| x.is_infected()).count() as i64;
        let tr = pair[1].truth;
        let closes = yt == ys - d - h + new && (tr.deaths, tr.healings, tr.new_infections) == (d as u64, h as u64, new as u64);
        if !closes {
            bad.push(format!("{s}->{t}"));
        }
    }
    outcome(
        bad.is_empty() && report.rows.len() == 5,
        format!("{} waves on days {:?}, failing pairs {bad:?}", report.rows.len(), report.rows.iter().map(|r| r.t).collect::<Vec<_>>()),
    )
}

// ----------------------------------------------------------------

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        outcome(false, format!("panicked: {msg}"))
    })
}

fn main() -> ExitCode {
    let start = Instant::now();
    let trace = default_trace();
    let (c4, c5) = match catch_unwind(AssertUnwindSafe(|| criteria_4_5(&trace))) {
        Ok(pair) => pair,
        Err(_) => (outcome(false, "panicked"), outcome(false, "panicked")),
    };
    let results = vec![
        (1, guarded(criterion_1)),
        (2, guarded(criterion_2)),
        (3, guarded(|| criterion_3(&trace))),
        (4, c4),
        (5, c5),
        (6, guarded(criterion_6)),
        (7, guarded(criterion_7)),
        (8, guarded(criterion_8)),
        (9, guarded(|| criterion_9(&trace))),
        (10, guarded(|| criterion_10(&trace))),
    ];
    let failed = results.iter().filter(|(_, o)| !o.pass).count();
    for (n, o) in &results {
        println!("criterion {n:>2}: {} | {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1} s",
        results.len() - failed,
        Duration::as_secs_f64(&start.elapsed())
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
