//! Sobolev quotients: seeded bumps on the catenoid against S̃(2,1,3/2), then
//! a bubble search on a flat ball that climbs to the Euclidean constant.

use sobolev_lab::constants::{aubin_talenti, SobolevParams};
use sobolev_lab::geometry::{Patch, Surface};
use sobolev_lab::sobolev::{maximize_quotient, seeded_bumps, sobolev_quotient, BubbleFamily};

fn main() -> sobolev_lab::Result<()> {
    let patch = Patch::uniform(Surface::Catenoid.chart()?, 64)?;
    let params = SobolevParams::new(2, 1, 1.5)?;
    println!("catenoid, p = 3/2");
    for seed in 0..5 {
        let f = seeded_bumps(&patch, seed)?;
        let r = sobolev_quotient(&patch, &f, &params)?;
        println!(
            "  seed {seed}: quotient {:.5} ± {:.1e}, bound {:?} = {:.5}, margin {:.5}",
            r.quotient, r.uncertainty, r.bound_name, r.bound, r.margin
        );
    }

    let ball = Surface::FlatBall {
        n: 3,
        m: 0,
        radius: 1.0,
        grading: 10.0,
    };
    let patch = Patch::new(ball.chart()?, &[256, 8, 4])?;
    let params = SobolevParams::new(3, 0, 2.0)?;
    let family = BubbleFamily::new(vec![vec![0.0; 3]], 5e-4, 0.2);
    let best = maximize_quotient(&patch, &family, &params, 40)?;
    let at = aubin_talenti(3, 2.0)?;
    println!(
        "\nflat ball, p = 2: best bubble scale {:.2e}, quotient {:.5} = {:.4}·AT after {} evaluations",
        best.scale,
        best.best.quotient,
        best.best.quotient / at,
        best.evaluations
    );
    Ok(())
}
