//! Split the population into verified cases and their complement, compute
//! link multiplicities, and print the true totals behind the estimators.

use episurvey::frames::{World, DEFAULT_WINDOW};
use episurvey::synthpop::{run_epidemic, SimConfig};

fn main() -> episurvey::Result<()> {
    let trace = run_epidemic(&SimConfig::default())?;
    println!("{:>4} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>8}", "day", "|U_v|", "|U_c|", "Y", "Y_A", "Y_B", "Y_AB", "links/p");
    for day in [10, 15, 25, 35, 50, 70] {
        let world = World::build(&trace, day, DEFAULT_WINDOW)?;
        let t = world.truth()?;
        println!(
            "{day:>4} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>8.2}",
            world.frames.verified.len(),
            world.frames.complement.len(),
            t.y,
            t.y_a,
            t.y_b,
            t.y_ab,
            world.link.mean_degree()
        );
        assert_eq!(t.y + t.y_ab, t.y_a + t.y_b);
    }

    // infected people nobody in either frame would reach do not exist:
    // everyone is linked to themselves
    let world = World::build(&trace, 25, DEFAULT_WINDOW)?;
    let reached_by_v = world.mult.verified.iter().zip(&world.infected).filter(|(&l, &y)| y && l > 0).count();
    let max_l = world.mult.verified.iter().max().copied().unwrap_or(0);
    println!("day 25: {reached_by_v} infected linked to a verified case, largest L_v = {max_l}");
    Ok(())
}
