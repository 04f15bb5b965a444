//! Closed-form radial integrals against adaptive quadrature, and a patch
//! integral on the unit sphere.

use sobolev_lab::constants::talenti_normalizer;
use sobolev_lab::geometry::{Patch, Surface};
use sobolev_lab::quadrature::{integrate_1d, integrate_radial, RadialProfile};
use sobolev_lab::specfun::{radial_integral_closed, RadialIntegralParams};

fn main() -> sobolev_lab::Result<()> {
    // ∫₀^∞ r^β (1 + (r/λ)^α)^{−γ} dr
    let t = RadialIntegralParams::new(2.0, 3.0, 1.5, 2.5)?;
    let closed = radial_integral_closed(&t);
    let quad = integrate_1d(|r| t.integrand(r), 0.0, f64::INFINITY, 1e-12)?;
    println!(
        "radial integral: closed {closed:.15}, quadrature {:.15} ({} evaluations)",
        quad.value, quad.evaluations
    );

    // Mass of the Talenti profile in R^{n+m}.
    let (n, m, p) = (3usize, 2usize, 2.0f64);
    let q = p / (p - 1.0);
    let gamma = n as f64 + m as f64 / q;
    let profile = RadialProfile::new(move |s: f64| (1.0 + s.powf(0.5 * q)).powf(-gamma));
    let mass = integrate_radial(&profile, n + m, 1e-12)?;
    println!(
        "c({n},{m},{p}): closed {:.15}, quadrature {:.15}",
        talenti_normalizer(n, m, p)?,
        mass.value
    );

    let sphere = Patch::new(Surface::Sphere { n: 2 }.chart()?, &[64, 32])?;
    let area = sphere.integrate(|_| 1.0);
    println!(
        "area of S²: {:.12} (4π = {:.12}), error estimate {:.1e}",
        area.value,
        4.0 * std::f64::consts::PI,
        area.abs_error_estimate
    );
    Ok(())
}
