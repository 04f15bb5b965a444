//! Curvature survey of the catalog plus the local frame at one point of the
//! catenoid.

use sobolev_lab::geometry::{curvature_survey, LocalFrame, Surface};

fn main() -> sobolev_lab::Result<()> {
    let mut members = Surface::minimal_members();
    members.push(Surface::Sphere { n: 2 });
    members.push(Surface::Sphere { n: 3 });
    println!(
        "{:<22} {:>12} {:>12} {:>10}",
        "surface", "max |H|", "min |H|", "II normal"
    );
    for s in members {
        let survey = curvature_survey(&s.chart()?, 2000, 7)?;
        println!(
            "{:<22} {:>12.3e} {:>12.3e} {:>10.1e}",
            survey.surface,
            survey.max_mean_curvature,
            survey.min_mean_curvature,
            survey.normality_error
        );
    }

    let chart = Surface::Catenoid.chart()?;
    let u = [0.4, 1.0];
    let frame = LocalFrame::at(&chart, &u)?;
    println!("\ncatenoid at u = {u:?}");
    println!("  x       = {:.6?}", frame.point);
    println!("  g       = {:.6?}", frame.metric);
    println!(
        "  |H|     = {:.3e}",
        frame
            .mean_curvature
            .iter()
            .map(|h| h * h)
            .sum::<f64>()
            .sqrt()
    );
    let v = [1.0, 2.0, 3.0];
    let t = frame.project_tangent(&v);
    let nrm = frame.project_normal(&v);
    println!("  P_T v   = {t:.6?}");
    println!("  P_N v   = {nrm:.6?}");
    Ok(())
}
