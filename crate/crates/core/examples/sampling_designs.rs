//! The sampling building blocks: sample-size rules, the two-frame draw with
//! contact tracing, a stratified panel, and a two-stage institution sample.

use episurvey::designs::{
    balance_check, cv_for_sample_size, sample_size_for_proportion, select_panel, two_stage_institution_sample,
    ContactScheme, TwoFrameDesign,
};
use episurvey::frames::{World, DEFAULT_WINDOW};
use episurvey::rng;
use episurvey::synthpop::{run_epidemic, SimConfig};
use episurvey::PersonId;

fn main() -> episurvey::Result<()> {
    for (p, cv) in [(0.25, 0.05), (0.10, 0.10), (0.04, 0.10)] {
        let n = sample_size_for_proportion(p, cv)?;
        println!("p = {p:.2}, CV ≤ {:.0}%: n = {n}", 100.0 * cv);
    }
    println!("n = 1000 at p = 0.25 gives CV {:.2}%", 100.0 * cv_for_sample_size(0.25, 1000)?);

    let trace = run_epidemic(&SimConfig::default())?;
    let world = World::build(&trace, 25, DEFAULT_WINDOW)?;
    let mut g = rng::seeded(1);

    let design = TwoFrameDesign {
        n_v: 200,
        n_c: 900,
        a_scheme: ContactScheme::Fraction(0.9),
        b_scheme: ContactScheme::Cap(12),
    };
    let (a, b) = design.draw(&world.frames.verified, &world.frames.complement, &world.link, &world.infected, &mut g)?;
    println!(
        "group A: {} anchors, {} traced contacts; group B: {} panel members, {} traced contacts",
        a.anchor_count(),
        a.units.len() - a.anchor_count(),
        b.anchor_count(),
        b.units.len() - b.anchor_count()
    );
    let mut head = Vec::new();
    a.write_csv(&mut head)?;
    let text = String::from_utf8_lossy(&head);
    println!("first rows of the group A sample file:");
    for line in text.lines().take(4) {
        println!("  {line}");
    }

    // panel stratified by grid row
    let cells = trace.cells_on(25);
    let rows: Vec<u8> = world.frames.complement.iter().map(|k| cells[k.index()].row as u8).collect();
    let panel = select_panel(&world.frames.complement, 900, Some(&rows), &mut g)?;
    let sizes: Vec<String> = panel.strata.iter().map(|s| format!("row {}: {}/{}", s.label, s.sample, s.population)).collect();
    println!("stratified panel: {}", sizes.join(", "));
    let mut known = vec![0.0; 5];
    for &r in &rows {
        known[r as usize] += 1.0;
    }
    let report = balance_check(
        &panel,
        |k: PersonId| (0..5).map(|r| f64::from(u8::from(cells[k.index()].row == r))).collect(),
        &known,
    )?;
    println!("row totals reproduced exactly: {}", report.deviation.iter().all(|d| d.abs() < 1e-9));

    // people grouped by grid cell, five cells drawn by PPS, 20 people in each
    let mut by_cell: Vec<Vec<PersonId>> = vec![Vec::new(); 25];
    for &k in &world.frames.complement {
        let c = cells[k.index()];
        by_cell[c.row as usize * 5 + c.col as usize].push(k);
    }
    match two_stage_institution_sample(&by_cell, 5, 20, &mut g) {
        Ok(s) => println!(
            "two-stage sample: institutions {:?}, {} cases, weight {:.2}",
            s.institutions,
            s.sample.units.len(),
            s.sample.units[0].weight()
        ),
        Err(e) => println!("two-stage sample not feasible here: {e}"),
    }
    Ok(())
}
