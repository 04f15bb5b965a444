//! Special functions: log-Gamma, unit-ball volumes and the closed-form
//! radial integral `∫₀^∞ (λ + r^α)^{-γ} r^β dr`.
//!
//! Every Gamma ratio in the crate goes through [`log_gamma`]; nothing forms a
//! quotient of raw Gamma values, so constants stay representable for
//! dimensions in the millions.

use crate::error::{LabError, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const LN_PI: f64 = 1.144_729_885_849_400_2;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `ζ(k) − 1` for `k = 2, 3, …, 41`.
const ZETA_MINUS_ONE: [f64; 40] = [
    6.449_340_668_482_264e-1,
    2.020_569_031_595_942_8e-1,
    8.232_323_371_113_818e-2,
    3.692_775_514_336_992_6e-2,
    1.734_306_198_444_914e-2,
    8.349_277_381_922_827e-3,
    4.077_356_197_944_339_6e-3,
    2.008_392_826_082_214_3e-3,
    9.945_751_278_180_853e-4,
    4.941_886_041_194_645e-4,
    2.460_865_533_080_483e-4,
    1.227_133_475_784_891_5e-4,
    6.124_813_505_870_483e-5,
    3.058_823_630_702_049_3e-5,
    1.528_225_940_865_187e-5,
    7.637_197_637_899_763e-6,
    3.817_293_264_999_840_2e-6,
    1.908_212_716_553_939e-6,
    9.539_620_338_727_962e-7,
    4.769_329_867_878_064_5e-7,
    2.384_505_027_277_33e-7,
    1.192_199_259_653_110_6e-7,
    5.960_818_905_125_948e-8,
    2.980_350_351_465_228e-8,
    1.490_155_482_836_504_3e-8,
    7.450_711_789_835_43e-9,
    3.725_334_024_788_457e-9,
    1.862_659_723_513_049e-9,
    9.313_274_324_196_682e-10,
    4.656_629_065_033_784e-10,
    2.328_311_833_676_505_3e-10,
    1.164_155_017_270_051_9e-10,
    5.820_772_087_902_701_5e-11,
    2.910_385_044_497_1e-11,
    1.455_192_189_104_198_5e-11,
    7.275_959_835_057_482e-12,
    3.637_979_547_378_651e-12,
    1.818_989_650_307_066e-12,
    9.094_947_840_263_888e-13,
    4.547_473_783_042_154e-13,
];

/// `B_{2k} / (2k (2k−1))` for `k = 1..=8`.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// `Σ_{k≥2} (−1)^k (ζ(k)−1) z^k / k`, convergent like `4^{-k}` for `|z| ≤ 1/2`.
fn zeta_tail_series(z: f64) -> f64 {
    let mut sum = 0.0;
    let mut power = -z;
    for (idx, zm1) in ZETA_MINUS_ONE.iter().enumerate() {
        let k = (idx + 2) as f64;
        power *= -z;
        let term = zm1 * power / k;
        sum += term;
        if term.abs() < 1e-19 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// `ln Γ(2 + z)` for `|z| ≤ 1/2`.
fn log_gamma_near_two(z: f64) -> f64 {
    (1.0 - EULER_GAMMA) * z + zeta_tail_series(z)
}

/// `ln Γ(1 + z)` for `|z| ≤ 1/2`, without cancellation near `z = 0`.
fn log_gamma_near_one(z: f64) -> f64 {
    -EULER_GAMMA * z + zeta_tail_series(z) + (z - z.ln_1p())
}

fn log_gamma_stirling(x: f64) -> f64 {
    (x - 0.5) * x.ln() - x + 0.5 * LN_2PI + stirling_series(x)
}

/// Natural logarithm of the Gamma function for `x > 0`.
///
/// Piecewise: a Taylor series about 2 on `[1.5, 2.5]`, downward recursion into
/// that window below 15, and the Stirling series (eight Bernoulli terms) above.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(LabError::domain(format!(
            "log_gamma requires x > 0, got {x}"
        )));
    }
    Ok(log_gamma_unchecked(x))
}

pub(crate) fn log_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x) = Γ(x+1)/x, and x+1 lands in [1, 1.5)
        return log_gamma_unchecked(x + 1.0) - x.ln();
    }
    if x < 1.5 {
        return log_gamma_near_one(x - 1.0);
    }
    if x <= 2.5 {
        return log_gamma_near_two(x - 2.0);
    }
    if x < 15.0 {
        let mut y = x;
        let mut prod = 1.0;
        while y > 2.5 {
            y -= 1.0;
            prod *= y;
        }
        return log_gamma_near_two(y - 2.0) + prod.ln();
    }
    log_gamma_stirling(x)
}

fn stirling_series(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut power = inv;
    for c in STIRLING {
        series += c * power;
        power *= inv2;
    }
    series
}

/// `ln Γ(a) − ln Γ(b)` without the cancellation of subtracting two large logs.
///
/// For large arguments the Stirling difference is regrouped as
/// `(a−b) ln b + (a−½) ln(1 + (a−b)/b) − (a−b)` plus the series difference,
/// so the error stays at the level of the result rather than of `ln Γ(a)`.
pub fn log_gamma_ratio(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(LabError::domain(format!(
            "log_gamma_ratio requires positive arguments, got ({a}, {b})"
        )));
    }
    Ok(log_gamma_ratio_unchecked(a, b))
}

pub(crate) fn log_gamma_ratio_unchecked(a: f64, b: f64) -> f64 {
    log_gamma_shift_unchecked(b, a - b)
}

/// `ln Γ(b + d) − ln Γ(b)` with the offset `d` supplied exactly. Forming
/// `d` as a difference of two large rounded arguments loses `ulp(b)` in it.
pub(crate) fn log_gamma_shift_unchecked(b: f64, d: f64) -> f64 {
    let a = b + d;
    if a.min(b) < 15.0 {
        return log_gamma_unchecked(a) - log_gamma_unchecked(b);
    }
    d * b.ln() + (a - 0.5) * (d / b).ln_1p() - d + (stirling_series(a) - stirling_series(b))
}

/// `ln ω_d` with `ω_0 = 1`.
pub(crate) fn log_ball(d: usize) -> f64 {
    let half = d as f64 / 2.0;
    half * LN_PI - log_gamma_unchecked(half + 1.0)
}

/// `ln(ω_a / ω_b)`, accurate when `a` and `b` are both large.
pub(crate) fn log_ball_ratio(a: usize, b: usize) -> f64 {
    let (ha, hb) = (a as f64 / 2.0, b as f64 / 2.0);
    (ha - hb) * LN_PI - log_gamma_ratio_unchecked(ha + 1.0, hb + 1.0)
}

/// `ln ω_d` where `ω_d = π^{d/2} / Γ(d/2 + 1)` is the volume of the unit ball in `R^d`.
pub fn log_unit_ball_volume(d: usize) -> Result<f64> {
    if d < 1 {
        return Err(LabError::domain("unit ball volume requires d >= 1"));
    }
    Ok(log_ball(d))
}

/// Volume `ω_d` of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> Result<f64> {
    log_unit_ball_volume(d).map(f64::exp)
}

/// Parameters of `∫₀^∞ (λ + r^α)^{-γ} r^β dr`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialIntegralParams {
    lambda: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl RadialIntegralParams {
    pub fn new(lambda: f64, alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let finite = [lambda, alpha, beta, gamma].iter().all(|v| v.is_finite());
        if !finite || lambda <= 0.0 || alpha <= 1.0 || beta <= -1.0 {
            return Err(LabError::domain(format!(
                "radial integral needs λ > 0, α > 1, β > -1 (got λ={lambda}, α={alpha}, β={beta})"
            )));
        }
        if gamma <= (beta + 1.0) / alpha {
            return Err(LabError::domain(format!(
                "radial integral needs γ > (β+1)/α = {} (got γ={gamma})",
                (beta + 1.0) / alpha
            )));
        }
        Ok(Self {
            lambda,
            alpha,
            beta,
            gamma,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The integrand `(λ + r^α)^{-γ} r^β`.
    pub fn integrand(&self, r: f64) -> f64 {
        (self.lambda + r.powf(self.alpha)).powf(-self.gamma) * r.powf(self.beta)
    }
}

/// Logarithm of the closed form
/// `λ^{-γ+(β+1)/α} Γ(γ−(β+1)/α) Γ((β+1)/α) / (α Γ(γ))`.
pub fn log_radial_integral_closed(params: &RadialIntegralParams) -> f64 {
    let s = (params.beta + 1.0) / params.alpha;
    (s - params.gamma) * params.lambda.ln()
        + log_gamma_unchecked(params.gamma - s)
        + log_gamma_unchecked(s)
        - params.alpha.ln()
        - log_gamma_unchecked(params.gamma)
}

/// Closed-form value of `∫₀^∞ (λ + r^α)^{-γ} r^β dr`.
pub fn radial_integral_closed(params: &RadialIntegralParams) -> f64 {
    log_radial_integral_closed(params).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    // Reference values from a 40-digit evaluation at the exact f64 inputs.
    const REFERENCE: [(f64, f64); 23] = [
        (0.001, 6.90717888538385366168),
        (0.01, 4.59947987804202170158),
        (0.1, 2.25271265173420590201),
        (0.3, 1.09579799481807556056),
        (0.5, 0.572364942924700087072),
        (0.9, 0.066376239734742954426),
        (0.999, 0.000578038532891380238169),
        (1.001, -0.000576393598283306151519),
        (1.3, -0.108174809507860478459),
        (1.5, -0.120782237635245222346),
        (1.9, -0.0389842759230833616743),
        (1.999, -0.000422461800692107284176),
        (2.001, 0.00042310673480011699119),
        (2.5, 0.284682870472919159632),
        (3.7, 1.4280723266653881292),
        (7.25, 7.05218545073853944493),
        (14.9, 24.9241320022172783002),
        (15.1, 25.458999750992663083),
        (33.3, 82.6037235816549430078),
        (100.0, 359.134205369575398776),
        (1234.5, 7550.55090107789489573),
        (1e5, 1051287.7089736568949),
        (1e8, 1742068066.10383470928),
    ];

    #[test]
    fn log_gamma_trivial_values() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert!(log_gamma(2.0).unwrap().abs() < 1e-300);
        assert!(rel(log_gamma(0.5).unwrap(), 0.5 * PI.ln()) < 1e-14);
        assert!(rel(log_gamma(10.0).unwrap(), 362_880f64.ln()) < 1e-14);
    }

    #[test]
    fn log_gamma_matches_reference_table() {
        for (x, expected) in REFERENCE {
            let got = log_gamma(x).unwrap();
            assert!(rel(got, expected) <= 1e-13, "x={x}: {got} vs {expected}");
        }
    }

    #[test]
    fn log_gamma_rejects_nonpositive() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn gamma_recursion() {
        let mut x = 0.1;
        while x <= 100.0 {
            let ratio = (log_gamma(x + 1.0).unwrap() - log_gamma(x).unwrap()).exp();
            assert!(rel(ratio, x) < 1e-12, "x={x}");
            x += 0.173;
        }
    }

    #[test]
    fn unit_ball_small_dimensions() {
        assert!(rel(unit_ball_volume(1).unwrap(), 2.0) < 1e-15);
        assert!(rel(unit_ball_volume(2).unwrap(), PI) < 1e-15);
        assert!(rel(unit_ball_volume(3).unwrap(), 4.0 * PI / 3.0) < 1e-15);
        assert!(unit_ball_volume(0).is_err());
    }

    #[test]
    fn unit_ball_recursion_and_large_d() {
        for d in 3..200 {
            let lhs = log_unit_ball_volume(d).unwrap();
            let rhs = log_unit_ball_volume(d - 2).unwrap() + (2.0 * PI / d as f64).ln();
            assert!(rel(lhs.exp(), rhs.exp()) < 1e-12 || (lhs - rhs).abs() < 1e-12);
        }
        let big = log_unit_ball_volume(1_000_000).unwrap();
        assert!(big.is_finite() && big < 0.0);
    }

    #[test]
    fn radial_integral_trivial_cases() {
        let p = RadialIntegralParams::new(1.0, 2.0, 0.0, 1.0).unwrap();
        assert!(rel(radial_integral_closed(&p), PI / 2.0) < 1e-14);
        let p = RadialIntegralParams::new(1.0, 2.0, 1.0, 2.0).unwrap();
        assert!(rel(radial_integral_closed(&p), 0.5) < 1e-14);
    }

    #[test]
    fn radial_integral_domain() {
        assert!(RadialIntegralParams::new(0.0, 2.0, 0.0, 1.0).is_err());
        assert!(RadialIntegralParams::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(RadialIntegralParams::new(1.0, 2.0, -1.0, 1.0).is_err());
        assert!(RadialIntegralParams::new(1.0, 2.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn log_gamma_ratio_matches_reference() {
        // mpmath at 40 digits, inputs taken at their f64 values
        let cases = [
            (6667.666666666667, 6669.666666666667, -17.610200471496159648),
            (1000000.5, 1000000.0, 6.9077551539821370521),
            (20.25, 17.0, 9.4122504918366761802),
            (5.5, 2.0, 3.9578139676187162939),
            (500001.0, 500002.5, -19.683548816101493201),
        ];
        for (a, b, expect) in cases {
            let got = log_gamma_ratio(a, b).unwrap();
            assert!(
                (got - expect).abs() < 1e-13 * expect.abs(),
                "({a}, {b}): {got}"
            );
        }
        assert!(log_gamma_ratio(0.0, 1.0).is_err());
        assert!((log_ball_ratio(7, 4) - (log_ball(7) - log_ball(4))).abs() < 1e-14);
        assert_eq!(log_ball(0), 0.0);
    }
}
