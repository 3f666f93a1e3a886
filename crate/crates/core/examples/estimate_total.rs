//! One survey of the simulated population: draw both samples, estimate the
//! number of infected people and its standard error under each α rule.

use episurvey::designs::{ContactScheme, TwoFrameDesign};
use episurvey::estimators::{estimate, estimate_alt, gcre, AlphaPolicy, GwsmInput, OverlapIndicator};
use episurvey::frames::{World, DEFAULT_WINDOW};
use episurvey::rng;
use episurvey::synthpop::{run_epidemic, SimConfig};

fn main() -> episurvey::Result<()> {
    let trace = run_epidemic(&SimConfig::default())?;
    let world = World::build(&trace, 25, DEFAULT_WINDOW)?;
    let truth = world.truth()?;
    let design = TwoFrameDesign {
        n_v: 1200,
        n_c: 4000,
        a_scheme: ContactScheme::All,
        b_scheme: ContactScheme::Cap(12),
    };
    let (a, b) = design.draw(
        &world.frames.verified,
        &world.frames.complement,
        &world.link,
        &world.infected,
        &mut rng::seeded(2020),
    )?;
    let (ia, ib) = (GwsmInput::from_sample(&a, &world)?, GwsmInput::from_sample(&b, &world)?);

    println!("truth: Y = {}, Y_A = {}, Y_B = {}, Y_AB = {}", truth.y, truth.y_a, truth.y_b, truth.y_ab);
    for policy in [AlphaPolicy::MinVariance, AlphaPolicy::Star, AlphaPolicy::Opt, AlphaPolicy::Fixed(0.5)] {
        let r = estimate(&ia, &ib, policy)?;
        println!(
            "{:<22} Ŷ = {:>8.2}  SE {:>7.2}  α = {:.3}{}",
            format!("{policy:?}"),
            r.y_hat,
            r.standard_error(),
            r.alpha,
            if r.alpha_clamped { " (clamped)" } else { "" }
        );
    }
    let r = estimate(&ia, &ib, AlphaPolicy::MinVariance)?;
    println!(
        "components: Ŷ_A = {:.2}, Ŷ_B = {:.2}, Ŷ_AB^A = {:.2}, Ŷ_AB^B = {:.2}",
        r.y_a, r.y_b, r.y_ab_a, r.y_ab_b
    );

    let alt = estimate_alt(&ia, &ib, OverlapIndicator::Complement)?;
    println!("panel-based alternative: {:.2}", alt.y_alt);
    match gcre(r.y_a, r.y_b, r.y_ab_a) {
        Ok(v) => println!("capture-recapture: {v:.2}"),
        Err(e) => println!("capture-recapture: {e}"),
    }
    Ok(())
}
