//! Closed-form anticipated variances of the two-frame strategy against
//! simple random sampling, with a Monte Carlo check on an idealized world.

use episurvey::anticipated::{av_table, efficiency, empirical_av_group_a, AvParams};

fn main() -> episurvey::Result<()> {
    let base = AvParams::default();
    let t = av_table(&base)?;
    println!("N = {}, f = {}, μ = {}, θ = {}, L = {}", base.n, base.f, base.mu, base.theta, base.l);
    println!("SRS {:.1}  group A {:.1}  group B {:.1}  strategy {:.1}  efficiency {:.3}", t.srs_ht, t.group_a, t.group_b, t.strategy, t.efficiency);

    println!("\nefficiency by number of contacts L and overlap share γ:");
    print!("{:>6}", "L");
    let gammas = [0.0, 0.5, 1.0];
    for g in gammas {
        print!("  γ={g:<5}");
    }
    println!();
    for l in [1.0, 2.0, 5.0, 10.0, 20.0, 50.0] {
        print!("{l:>6}");
        for g in gammas {
            let p = AvParams { l, gamma_a: g, gamma_b: g, ..base };
            print!("  {:<7.4}", efficiency(&p)?);
        }
        println!();
    }

    let p = AvParams { n: 10_000.0, f: 0.02, mu: 0.1, l: 20.0, gamma_a: 0.6, ..base };
    let emp = empirical_av_group_a(&p, 5_000, 7)?;
    println!(
        "\ngroup A check: simulated {:.1} ± {:.1} vs formula {:.1}",
        emp.mse,
        emp.mse_se,
        av_table(&p)?.group_a
    );
    Ok(())
}
