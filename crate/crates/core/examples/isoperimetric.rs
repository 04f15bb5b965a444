//! The isoperimetric inequality with mean-curvature and boundary terms on a
//! few surfaces, and α along the power densities for m = 3.

use sobolev_lab::geometry::{Patch, Surface};
use sobolev_lab::isoperimetric::{alpha_bounds, alpha_sweep, check_isoperimetric};
use sobolev_lab::sobolev::{seeded_positive_field, FieldSum};

fn main() -> sobolev_lab::Result<()> {
    let cases = [
        ("unit sphere, f = 1", Surface::Sphere { n: 2 }, None),
        ("flat disk, f = 1", Surface::disk(), None),
        ("catenoid, seeded f", Surface::Catenoid, Some(3)),
        ("Enneper, seeded f", Surface::Enneper, Some(4)),
    ];
    for (label, surface, seed) in cases {
        let patch = Patch::uniform(surface.chart()?, 64)?;
        let f = match seed {
            Some(s) => seeded_positive_field(&patch, s),
            None => FieldSum::constant(1.0),
        };
        let r = check_isoperimetric(&patch, &f)?;
        println!(
            "{label:<20} lhs {:>9.5}  rhs {:>9.5}  ratio {:.6}  {}",
            r.lhs,
            r.rhs,
            r.ratio,
            if r.passed { "ok" } else { "VIOLATED" }
        );
    }

    let (n, m) = (2, 3);
    let b = alpha_bounds(n, m)?;
    println!(
        "\nα for ρ_j ∝ s^j on the unit ball of R^{}; lower bound {:.8}",
        n + m,
        b.lower
    );
    for row in alpha_sweep(n, m, &[1, 3, 10, 30, 100, 300, 1000])? {
        println!(
            "  j = {:>4}: α = {:.8}  (upper {:.8})",
            row.j, row.alpha, row.upper
        );
    }
    Ok(())
}
