//! Sharp and legacy Sobolev/isoperimetric constants.
//!
//! Every constant is assembled in the log domain from [`log_gamma`] and
//! [`log_gamma_ratio`]; `value` is just `exp(log_value)` and may overflow to
//! `inf` for extreme inputs (the Michael–Simon constant at large `n`, for
//! instance) while the log stays exact. Comparisons always use logs.
//!
//! Notation: `p' = p/(p−1)`, `p* = pn/(n−p)`, `ω_d` the unit-ball volume.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::specfun::{
    log_ball, log_ball_ratio, log_gamma_ratio_unchecked, log_gamma_shift_unchecked,
    log_gamma_unchecked,
};

const LN_PI: f64 = 1.144_729_885_849_400_2;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Default distance kept from the endpoints `p = 1` and `p = n`.
pub const DEFAULT_GUARD: f64 = 1e-6;

/// Dimension `n`, codimension `m` and exponent `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SobolevParams {
    n: usize,
    m: usize,
    p: f64,
}

impl SobolevParams {
    pub fn new(n: usize, m: usize, p: f64) -> Result<Self> {
        Self::with_guard(n, m, p, DEFAULT_GUARD)
    }

    /// Requires `n ≥ 2` and `p ∈ (1+δ, n−δ)`.
    pub fn with_guard(n: usize, m: usize, p: f64, delta: f64) -> Result<Self> {
        if n < 2 {
            return Err(LabError::domain(format!("n must be >= 2, got {n}")));
        }
        if !(delta >= 0.0) || !(p > 1.0 + delta && p < n as f64 - delta) {
            return Err(LabError::domain(format!(
                "p = {p} outside (1 + {delta}, {n} - {delta})"
            )));
        }
        Ok(SobolevParams { n, m, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    /// Dual exponent `p' = p/(p−1)`.
    pub fn p_dual(&self) -> f64 {
        dual(self.p)
    }
    /// Critical exponent `p* = pn/(n−p)`.
    pub fn p_star(&self) -> f64 {
        critical(self.n, self.p)
    }
}

pub fn dual(p: f64) -> f64 {
    p / (p - 1.0)
}

pub fn critical(n: usize, p: f64) -> f64 {
    p * n as f64 / (n as f64 - p)
}

fn check_p(n: usize, p: f64) -> Result<()> {
    if n < 2 {
        return Err(LabError::domain(format!("n must be >= 2, got {n}")));
    }
    if !(p > 1.0 && p < n as f64) {
        return Err(LabError::domain(format!(
            "need 1 < p < n, got p = {p}, n = {n}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Euclidean and classical constants

/// `ln AT(n,p)`, the sharp Euclidean Sobolev constant.
pub fn log_aubin_talenti(n: usize, p: f64) -> Result<f64> {
    check_p(n, p)?;
    let nf = n as f64;
    let q = dual(p);
    Ok(-0.5 * LN_PI - nf.ln() / p
        + ((p - 1.0).ln() - (nf - p).ln()) / q
        + (log_gamma_unchecked(nf / 2.0 + 1.0) + log_gamma_unchecked(nf)
            - log_gamma_unchecked(nf / p)
            - log_gamma_unchecked(nf / q + 1.0))
            / nf)
}

pub fn aubin_talenti(n: usize, p: f64) -> Result<f64> {
    log_aubin_talenti(n, p).map(f64::exp)
}

/// `ln(1/(n ω_n^{1/n}))`, the sharp isoperimetric constant and the `p → 1` limit of AT.
pub fn log_isoperimetric(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(LabError::domain("n must be >= 1"));
    }
    Ok(-(n as f64).ln() - log_ball(n) / n as f64)
}

/// `ln MS(n) = ln(4^{n+1} / ω_n^{1/n})`.
pub fn log_michael_simon(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(LabError::domain(format!("n must be >= 2, got {n}")));
    }
    Ok((n as f64 + 1.0) * 4f64.ln() - log_ball(n) / n as f64)
}

pub fn michael_simon(n: usize) -> Result<f64> {
    log_michael_simon(n).map(f64::exp)
}

/// Which branch of the maximum defining `C(n, m)` is larger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `(1/n)(mω_m/((n+m)ω_{n+m}))^{1/n}`.
    Codimension,
    /// `1/(nω_n^{1/n})`.
    Euclidean,
    /// Equal to `1e−12` relative.
    Tied,
}

/// `C(n, m)` in log form together with both branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BrendleC {
    pub log_value: f64,
    pub log_codimension_branch: f64,
    pub log_euclidean_branch: f64,
    pub active: Branch,
}

impl BrendleC {
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

pub fn brendle_c_detail(n: usize, m: usize) -> Result<BrendleC> {
    if n < 2 || m < 1 {
        return Err(LabError::domain(format!(
            "C(n, m) needs n >= 2, m >= 1 (got {n}, {m})"
        )));
    }
    let nf = n as f64;
    let b1 = -nf.ln() + ((m as f64).ln() - ((n + m) as f64).ln() + log_ball_ratio(m, n + m)) / nf;
    let b2 = log_isoperimetric(n)?;
    let active = if (b1 - b2).abs() <= 1e-12 * b1.abs().max(1.0) {
        Branch::Tied
    } else if b1 > b2 {
        Branch::Codimension
    } else {
        Branch::Euclidean
    };
    Ok(BrendleC {
        log_value: b1.max(b2),
        log_codimension_branch: b1,
        log_euclidean_branch: b2,
        active,
    })
}

pub fn log_brendle_c(n: usize, m: usize) -> Result<f64> {
    brendle_c_detail(n, m).map(|c| c.log_value)
}

pub fn brendle_c(n: usize, m: usize) -> Result<f64> {
    log_brendle_c(n, m).map(f64::exp)
}

// ---------------------------------------------------------------------------
// The new constants

fn log_s_formula(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    let q = dual(p);
    (critical(n, p) / nf).ln() + (1.0 - 1.0 / nf).ln() - p.ln() / p - 0.5 * LN_2PI
        + (1.0 / q - 0.5) * (1.0 - nf.ln())
        + log_gamma_ratio_unchecked(nf, nf / p) / nf
}

/// `ln S(n,p)` for `n ≥ 3`, `2 ≤ p < n`.
pub fn log_sobolev_s(n: usize, p: f64) -> Result<f64> {
    if n < 3 || !(p >= 2.0 && p < n as f64) {
        return Err(LabError::domain(format!(
            "S(n, p) is stated for n >= 3 and 2 <= p < n (got n = {n}, p = {p}); \
             use the permissive evaluation for other exponents"
        )));
    }
    Ok(log_s_formula(n, p))
}

/// `ln S(n,p)` for any `1 < p < n`; values with `p < 2` lie outside the proven range.
pub fn log_sobolev_s_permissive(n: usize, p: f64) -> Result<f64> {
    check_p(n, p)?;
    Ok(log_s_formula(n, p))
}

pub fn sobolev_s(n: usize, p: f64) -> Result<f64> {
    log_sobolev_s(n, p).map(f64::exp)
}

fn log_s_tilde_formula(n: usize, m: usize, p: f64) -> f64 {
    let nf = n as f64;
    let mf = m as f64;
    let q = dual(p);
    let gamma_part = log_ball_ratio(m, n + m)
        + log_gamma_shift_unchecked((nf + mf) / q + 1.0, -nf / q)
        + log_gamma_ratio_unchecked(nf, nf / p);
    (critical(n, p) / nf).ln() + (1.0 - 1.0 / nf).ln() - p.ln() / p - q.ln() / q + gamma_part / nf
}

/// `ln S̃(n,m,p)` for `n ≥ 2`, `m ≥ 1`, `1 < p ≤ 2` (`p < 2` when `n = 2`).
pub fn log_sobolev_s_tilde(n: usize, m: usize, p: f64) -> Result<f64> {
    check_p(n, p)?;
    if m < 1 || p > 2.0 {
        return Err(LabError::domain(format!(
            "S~(n, m, p) is stated for m >= 1 and 1 < p <= 2 (got m = {m}, p = {p}); \
             use the permissive evaluation for other exponents"
        )));
    }
    Ok(log_s_tilde_formula(n, m, p))
}

/// `ln S̃(n,m,p)` for any `1 < p < n`, `m ≥ 0`.
pub fn log_sobolev_s_tilde_permissive(n: usize, m: usize, p: f64) -> Result<f64> {
    check_p(n, p)?;
    Ok(log_s_tilde_formula(n, m, p))
}

pub fn sobolev_s_tilde(n: usize, m: usize, p: f64) -> Result<f64> {
    log_sobolev_s_tilde(n, m, p).map(f64::exp)
}

/// `ln lim_{p→1} S̃(n,m,p) = ln((1/n)(ω_m/ω_{n+m})^{1/n})`.
pub fn log_sobolev_s_tilde_limit_p1(n: usize, m: usize) -> Result<f64> {
    if n < 2 {
        return Err(LabError::domain("n must be >= 2"));
    }
    Ok(-(n as f64).ln() + log_ball_ratio(m, n + m) / n as f64)
}

/// `ln c_{n,m,p}`, the normalizer of `(1+|y|^{p'})^{−n−m/p'}` on `R^{n+m}`.
pub fn log_talenti_normalizer(n: usize, m: usize, p: f64) -> Result<f64> {
    check_p(n, p)?;
    let nf = n as f64;
    let d = n + m;
    let q = dual(p);
    Ok((d as f64).ln()
        + log_ball(d)
        + log_gamma_unchecked(nf / p)
        + log_gamma_ratio_unchecked(d as f64 / q, nf + m as f64 / q)
        - q.ln())
}

pub fn talenti_normalizer(n: usize, m: usize, p: f64) -> Result<f64> {
    log_talenti_normalizer(n, m, p).map(f64::exp)
}

fn check_k(p: f64, t: f64) -> Result<()> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(LabError::domain(format!("K needs p >= 2, got {p}")));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(LabError::domain(format!("K needs t in (0, 1), got {t}")));
    }
    Ok(())
}

/// Gamma/ball-volume prefactor `ω_mΓ(m/p'+1) / (ω_{m+n}Γ((m+n)/p'+1))` in log form.
fn log_k_prefactor(n: usize, m: usize, q: f64) -> f64 {
    log_ball_ratio(m, n + m) + log_gamma_shift_unchecked((n + m) as f64 / q + 1.0, -(n as f64) / q)
}

/// `ln K_{m,n,p'}(t)`.
pub fn log_k_of_t(n: usize, m: usize, p: f64, t: f64) -> Result<f64> {
    check_k(p, t)?;
    let q = dual(p);
    Ok(log_k_prefactor(n, m, q) + (0.5 - 1.0 / q) * (m as f64 * (-t).ln_1p() + n as f64 * t.ln()))
}

pub fn k_of_t(n: usize, m: usize, p: f64, t: f64) -> Result<f64> {
    log_k_of_t(n, m, p, t).map(f64::exp)
}

/// The minimizing `t = n/(n+m)`.
pub fn k_argmin(n: usize, m: usize) -> f64 {
    n as f64 / (n + m) as f64
}

/// `ln K` at `t = n/(n+m)`; for `m = 0` the `t`-factor is absent.
pub fn log_k_opt(n: usize, m: usize, p: f64) -> Result<f64> {
    if m == 0 {
        check_k(p, 0.5)?;
        return Ok(log_k_prefactor(n, 0, dual(p)));
    }
    log_k_of_t(n, m, p, k_argmin(n, m))
}

pub fn k_opt(n: usize, m: usize, p: f64) -> Result<f64> {
    log_k_opt(n, m, p).map(f64::exp)
}

/// `ln lim_{m→∞} K_opt = ln(p'^{n/p'} (2π)^{−n/2} (e/n)^{n(1/p'−1/2)})`.
pub fn log_k_limit(n: usize, p: f64) -> Result<f64> {
    check_k(p, 0.5)?;
    let nf = n as f64;
    let q = dual(p);
    Ok(nf / q * q.ln() - 0.5 * nf * LN_2PI + nf * (1.0 / q - 0.5) * (1.0 - nf.ln()))
}

pub fn k_limit(n: usize, p: f64) -> Result<f64> {
    log_k_limit(n, p).map(f64::exp)
}

/// Codimension sufficient for an isometric embedding of every `n`-manifold:
/// `(3/2) n (n+3)` when compact, `(n/2)(3n² + 14n + 9)` otherwise.
pub fn nash_codim(n: usize, compact: bool) -> Result<u64> {
    if n < 2 {
        return Err(LabError::domain("n must be >= 2"));
    }
    let n = n as u128;
    let twice = if compact {
        3 * n * (n + 3)
    } else {
        n * (3 * n * n + 14 * n + 9)
    };
    assert!(twice % 2 == 0, "embedding codimension must be an integer");
    u64::try_from(twice / 2).map_err(|_| LabError::domain("codimension exceeds u64"))
}

/// `(n+m)(p−1)/(n−p)`; with `m = 0` this is the exact Euclidean value.
pub fn j_bound(n: usize, m: usize, p: f64) -> Result<f64> {
    check_p(n, p)?;
    Ok((n + m) as f64 * (p - 1.0) / (n as f64 - p))
}

/// `sup_{J≥0} J^{1/p'}/(1 + t^{1−p'/2} J) = t^{1/2−1/p'} / (p^{1/p} p'^{1/p'})`.
pub fn young_cap(p: f64, t: f64) -> Result<f64> {
    check_young(p, t)?;
    let q = dual(p);
    Ok(((0.5 - 1.0 / q) * t.ln() - p.ln() / p - q.ln() / q).exp())
}

/// The maximizing `J = (p−1) t^{p'/2−1}` (equal to `p−1` at `t = 1`).
pub fn young_argmax(p: f64, t: f64) -> Result<f64> {
    check_young(p, t)?;
    Ok((p - 1.0) * t.powf(dual(p) / 2.0 - 1.0))
}

fn check_young(p: f64, t: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() || !(t > 0.0 && t <= 1.0) {
        return Err(LabError::domain(format!(
            "Young cap needs p > 1 and t in (0, 1], got p = {p}, t = {t}"
        )));
    }
    Ok(())
}

/// The objective `J^{1/p'}/(1 + t^{1−p'/2} J)` maximized by [`young_cap`].
pub fn young_objective(p: f64, t: f64, j: f64) -> f64 {
    let q = dual(p);
    j.powf(1.0 / q) / (1.0 + t.powf(1.0 - q / 2.0) * j)
}

/// Logs of the two earlier constants: `p*(1−1/n) C(n,m)` and `n ω_n^{1/n} C(n,m) AT(n,p)`.
pub fn log_legacy_constants(n: usize, m: usize, p: f64) -> Result<(f64, f64)> {
    check_p(n, p)?;
    let c = log_brendle_c(n, m)?;
    let first = critical(n, p).ln() + (1.0 - 1.0 / n as f64).ln() + c;
    let second = -log_isoperimetric(n)? + c + log_aubin_talenti(n, p)?;
    Ok((first, second))
}

pub fn legacy_constants(n: usize, m: usize, p: f64) -> Result<(f64, f64)> {
    log_legacy_constants(n, m, p).map(|(a, b)| (a.exp(), b.exp()))
}

// ---------------------------------------------------------------------------
// Reports

/// One named constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantReport {
    pub name: String,
    pub n: usize,
    pub m: Option<usize>,
    pub p: Option<f64>,
    pub t: Option<f64>,
    pub log_value: f64,
    pub value: f64,
    pub formula: String,
    /// Evaluated outside the parameter range where the associated inequality is proved.
    pub outside_proven_range: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ConstantReport {
    fn new(
        name: &str,
        n: usize,
        m: Option<usize>,
        p: Option<f64>,
        log_value: f64,
        formula: &str,
    ) -> Self {
        ConstantReport {
            name: name.to_string(),
            n,
            m,
            p,
            t: None,
            log_value,
            value: log_value.exp(),
            formula: formula.to_string(),
            outside_proven_range: false,
            note: None,
        }
    }
}

/// Verdict of comparing `S̃(n,m,p)` with the two earlier constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Crossover {
    /// `S̃` smaller than both.
    Improves,
    /// `S̃` larger than both.
    Worse,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossoverReport {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub log_s_tilde: f64,
    pub log_legacy_mean_curvature: f64,
    pub log_legacy_rearrangement: f64,
    pub verdict: Crossover,
    pub outside_proven_range: bool,
}

pub fn crossover(n: usize, m: usize, p: f64) -> Result<CrossoverReport> {
    let outside_proven_range = log_sobolev_s_tilde(n, m, p).is_err();
    let s = log_sobolev_s_tilde_permissive(n, m, p)?;
    let (a, b) = log_legacy_constants(n, m, p)?;
    let verdict = if s < a && s < b {
        Crossover::Improves
    } else if s > a && s > b {
        Crossover::Worse
    } else {
        Crossover::Mixed
    };
    Ok(CrossoverReport {
        n,
        m,
        p,
        log_s_tilde: s,
        log_legacy_mean_curvature: a,
        log_legacy_rearrangement: b,
        verdict,
        outside_proven_range,
    })
}

/// All constants that make sense for `(n, m, p)`. With `m = 0` only the
/// Euclidean rows are produced.
pub fn constants_table(params: &SobolevParams) -> Result<Vec<ConstantReport>> {
    let (n, m, p) = (params.n(), params.m(), params.p());
    let mut rows = vec![
        ConstantReport::new(
            "aubin_talenti",
            n,
            None,
            Some(p),
            log_aubin_talenti(n, p)?,
            "pi^(-1/2) n^(-1/p) ((p-1)/(n-p))^(1/p') (G(n/2+1)G(n)/(G(n/p)G(n/p'+1)))^(1/n)",
        ),
        ConstantReport::new(
            "isoperimetric",
            n,
            None,
            None,
            log_isoperimetric(n)?,
            "1/(n w_n^(1/n))",
        ),
        ConstantReport::new(
            "michael_simon",
            n,
            None,
            None,
            log_michael_simon(n)?,
            "4^(n+1)/w_n^(1/n)",
        ),
    ];

    let s_formula = "(p*/n)(1-1/n) p^(-1/p) (2pi)^(-1/2) (e/n)^(1/p'-1/2) (G(n)/G(n/p))^(1/n)";
    if n >= 3 || m == 0 {
        let strict = log_sobolev_s(n, p);
        if let Ok(v) = log_sobolev_s_permissive(n, p) {
            let mut row = ConstantReport::new("sobolev_s", n, None, Some(p), v, s_formula);
            row.outside_proven_range = strict.is_err();
            rows.push(row);
        }
    }
    rows.push(ConstantReport::new(
        "talenti_normalizer",
        n,
        Some(m),
        Some(p),
        log_talenti_normalizer(n, m, p)?,
        "(n+m) w_(n+m) G(n/p) G((n+m)/p') / (p' G(n+m/p'))",
    ));
    rows.push(ConstantReport::new(
        "j_bound",
        n,
        Some(m),
        Some(p),
        j_bound(n, m, p)?.ln(),
        "(n+m)(p-1)/(n-p)",
    ));
    if m == 0 {
        return Ok(rows);
    }

    let c = brendle_c_detail(n, m)?;
    let mut row = ConstantReport::new(
        "brendle_c",
        n,
        Some(m),
        None,
        c.log_value,
        "max{(1/n)(m w_m/((n+m) w_(n+m)))^(1/n), 1/(n w_n^(1/n))}",
    );
    row.note = Some(format!("active branch: {:?}", c.active).to_lowercase());
    rows.push(row);

    let mut row = ConstantReport::new(
        "sobolev_s_tilde",
        n,
        Some(m),
        Some(p),
        log_sobolev_s_tilde_permissive(n, m, p)?,
        "(p*/n)(1-1/n) p^(-1/p) p'^(-1/p') (w_m G(m/p'+1)/(w_(n+m) G((n+m)/p'+1)) G(n)/G(n/p))^(1/n)",
    );
    row.outside_proven_range = log_sobolev_s_tilde(n, m, p).is_err();
    rows.push(row);

    let (a, b) = log_legacy_constants(n, m, p)?;
    rows.push(ConstantReport::new(
        "legacy_mean_curvature",
        n,
        Some(m),
        Some(p),
        a,
        "p* (1-1/n) C(n,m)",
    ));
    rows.push(ConstantReport::new(
        "legacy_rearrangement",
        n,
        Some(m),
        Some(p),
        b,
        "n w_n^(1/n) C(n,m) AT(n,p)",
    ));

    if p >= 2.0 {
        rows.push(ConstantReport::new(
            "k_opt",
            n,
            Some(m),
            Some(p),
            log_k_opt(n, m, p)?,
            "K_(m,n,p')(n/(n+m))",
        ));
        rows.push(ConstantReport::new(
            "k_limit",
            n,
            None,
            Some(p),
            log_k_limit(n, p)?,
            "p'^(n/p') (2pi)^(-n/2) (e/n)^(n(1/p'-1/2))",
        ));
    }
    Ok(rows)
}

/// One row of the constant chain for a given embedding codimension.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainRow {
    pub compact: bool,
    pub m: u64,
    pub log_michael_simon: f64,
    pub log_brendle_c: f64,
    pub log_sobolev_s: f64,
    pub log_aubin_talenti: f64,
}

impl ChainRow {
    pub fn holds(&self) -> bool {
        self.log_michael_simon > self.log_brendle_c
            && self.log_brendle_c > self.log_sobolev_s
            && self.log_sobolev_s > self.log_aubin_talenti
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub n: usize,
    pub rows: Vec<ChainRow>,
}

/// `MS(n) > C(n, m_n) > S(n, 2) > AT(n, 2)` with `m_n` the compact and
/// non-compact embedding codimensions.
pub fn compare_chain(n: usize) -> Result<ChainReport> {
    if n < 3 {
        return Err(LabError::domain("the chain is stated for n >= 3"));
    }
    let mut rows = Vec::new();
    for compact in [true, false] {
        let m = nash_codim(n, compact)?;
        let row = ChainRow {
            compact,
            m,
            log_michael_simon: log_michael_simon(n)?,
            log_brendle_c: log_brendle_c(n, m as usize)?,
            log_sobolev_s: log_sobolev_s(n, 2.0)?,
            log_aubin_talenti: log_aubin_talenti(n, 2.0)?,
        };
        if !row.holds() {
            return Err(LabError::OrderingViolation(format!(
                "n = {n}, m = {m}: MS {} C {} S {} AT {} (logs)",
                row.log_michael_simon, row.log_brendle_c, row.log_sobolev_s, row.log_aubin_talenti
            )));
        }
        rows.push(row);
    }
    Ok(ChainReport { n, rows })
}

/// `S(n,p)/AT(n,p)` at one `(n, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioPoint {
    pub n: usize,
    pub p: f64,
    pub log_ratio: f64,
    pub ratio: f64,
}

pub fn s_over_at(n: usize, p: f64) -> Result<RatioPoint> {
    let log_ratio = log_sobolev_s(n, p)? - log_aubin_talenti(n, p)?;
    Ok(RatioPoint {
        n,
        p,
        log_ratio,
        ratio: log_ratio.exp(),
    })
}

/// `K_opt(n,m,p)/K_limit(n,p)` at one `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KPoint {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub log_k_opt: f64,
    pub ratio_to_limit: f64,
}

pub fn k_convergence(n: usize, p: f64, ms: &[usize]) -> Result<Vec<KPoint>> {
    let limit = log_k_limit(n, p)?;
    ms.iter()
        .map(|&m| {
            let k = log_k_opt(n, m, p)?;
            Ok(KPoint {
                n,
                m,
                p,
                log_k_opt: k,
                ratio_to_limit: (k - limit).exp(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::unit_ball_volume;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    /// Lanczos approximation (g = 7, 9 terms): a Gamma evaluation path that
    /// shares nothing with the crate's series.
    fn lanczos_gamma(x: f64) -> f64 {
        const G: f64 = 7.0;
        const C: [f64; 9] = [
            0.999_999_999_999_809_9,
            676.520_368_121_885_1,
            -1_259.139_216_722_402_8,
            771.323_428_777_653_1,
            -176.615_029_162_140_6,
            12.507_343_278_686_905,
            -0.138_571_095_265_720_12,
            9.984_369_578_019_572e-6,
            1.505_632_735_149_311_6e-7,
        ];
        if x < 0.5 {
            return PI / ((PI * x).sin() * lanczos_gamma(1.0 - x));
        }
        let x = x - 1.0;
        let mut a = C[0];
        let t = x + G + 0.5;
        for (i, c) in C.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }

    #[test]
    fn params_guard_and_exponents() {
        let s = SobolevParams::new(3, 1, 2.0).unwrap();
        assert_eq!(s.p_dual(), 2.0);
        assert_eq!(s.p_star(), 6.0);
        assert!(SobolevParams::new(3, 1, 1.0 + 1e-7).is_err());
        assert!(SobolevParams::new(3, 1, 3.0 - 1e-7).is_err());
        assert!(SobolevParams::with_guard(3, 1, 1.0 + 1e-7, 1e-8).is_ok());
        assert!(SobolevParams::new(1, 1, 1.5).is_err());
    }

    #[test]
    fn aubin_talenti_values() {
        let expect = (3.0 * PI).powf(-0.5) * (2.0 / (0.5 * PI.sqrt())).powf(1.0 / 3.0);
        assert!(rel(aubin_talenti(3, 2.0).unwrap(), expect) < 1e-14);
        assert!(rel(aubin_talenti(3, 2.0).unwrap(), 0.427_260_542_862_526_7) < 1e-14);
        for n in [2, 3, 5] {
            let near = aubin_talenti(n, 1.0 + 1e-6).unwrap();
            let iso = log_isoperimetric(n).unwrap().exp();
            assert!(rel(near, iso) < 1e-4, "n = {n}");
        }
        assert!(aubin_talenti(3, 3.0).is_err());
        assert!(aubin_talenti(3, 1.0).is_err());
    }

    #[test]
    fn michael_simon_values() {
        assert!(rel(michael_simon(2).unwrap(), 64.0 / PI.sqrt()) < 1e-14);
        assert!(rel(michael_simon(3).unwrap(), 256.0 / (4.0 * PI / 3.0).cbrt()) < 1e-14);
        assert!(log_michael_simon(30).unwrap().is_finite());
        assert!(log_michael_simon(1000).unwrap().is_finite());
    }

    #[test]
    fn brendle_branches() {
        for n in 2..12 {
            let iso = 1.0 / (n as f64 * unit_ball_volume(n).unwrap().powf(1.0 / n as f64));
            assert!(rel(brendle_c(n, 1).unwrap(), iso) < 1e-13);
            let c2 = brendle_c_detail(n, 2).unwrap();
            assert!((c2.log_codimension_branch - c2.log_euclidean_branch).abs() < 1e-12);
            assert_eq!(c2.active, Branch::Tied);
            for m in 3..40 {
                assert_eq!(brendle_c_detail(n, m).unwrap().active, Branch::Codimension);
            }
            assert_eq!(brendle_c_detail(n, 1).unwrap().active, Branch::Euclidean);
        }
        let w = |d| unit_ball_volume(d).unwrap();
        let expect = (4.0 * w(4) / (7.0 * w(7))).cbrt() / 3.0;
        assert!(rel(brendle_c(3, 4).unwrap(), expect) < 1e-13);
        assert!(brendle_c(3, 0).is_err());
    }

    #[test]
    fn sobolev_s_values() {
        let expect = PI.powf(-0.5) * (2.0 / 3.0) * (2.0 / (0.5 * PI.sqrt())).cbrt();
        assert!(rel(sobolev_s(3, 2.0).unwrap(), expect) < 1e-14);
        assert!(rel(sobolev_s(3, 2.0).unwrap(), 0.493_357_978_871_570_8) < 1e-14);
        for n in 3..=50 {
            let nf = n as f64;
            let lhs = sobolev_s(n, 2.0).unwrap();
            let rhs = (nf - 1.0) / (nf * (nf - 2.0)).sqrt() * aubin_talenti(n, 2.0).unwrap();
            assert!(rel(lhs, rhs) < 1e-12);
        }
        assert!(sobolev_s(3, 1.5).is_err());
        assert!(log_sobolev_s_permissive(3, 1.5).is_ok());
        assert!(sobolev_s(2, 1.5).is_err());
    }

    #[test]
    fn s_tilde_properties() {
        for n in 3..=50 {
            let s = log_sobolev_s(n, 2.0).unwrap();
            for m in 1..=100 {
                let st = log_sobolev_s_tilde(n, m, 2.0).unwrap();
                assert!(rel(st.exp(), s.exp()) < 1e-12, "n = {n}, m = {m}");
            }
        }
        for (n, m) in [(2, 1), (3, 4), (5, 2)] {
            let near = log_sobolev_s_tilde(n, m, 1.0 + 1e-7).unwrap();
            let limit = log_sobolev_s_tilde_limit_p1(n, m).unwrap();
            assert!((near - limit).abs() < 1e-5);
        }
        assert!(sobolev_s_tilde(3, 1, 2.5).is_err());
        assert!(sobolev_s_tilde(3, 0, 1.5).is_err());
        assert!(log_sobolev_s_tilde_permissive(3, 1, 2.5).is_ok());
    }

    #[test]
    fn crossover_examples() {
        let c = crossover(3, 4, 1.5).unwrap();
        assert_eq!(c.verdict, Crossover::Improves);
        let (a, b) = legacy_constants(3, 4, 1.5).unwrap();
        assert!(sobolev_s_tilde(3, 4, 1.5).unwrap() < a.min(b));
        assert_eq!(crossover(3, 4, 1.01).unwrap().verdict, Crossover::Worse);
        for n in 2..8 {
            let (_, b) = legacy_constants(n, 1, 1.5).unwrap();
            assert!(rel(b, aubin_talenti(n, 1.5).unwrap()) < 1e-13);
        }
    }

    #[test]
    fn normalizer_values() {
        let w3 = unit_ball_volume(3).unwrap();
        let g32 = 0.5 * PI.sqrt();
        let expect = 3.0 * w3 * g32 * g32 / (2.0 * 2.0);
        assert!(rel(talenti_normalizer(3, 0, 2.0).unwrap(), expect) < 1e-14);
    }

    #[test]
    fn k_values() {
        for n in [2, 3, 7] {
            for m in [0, 1, 5, 100] {
                for t in [0.1, 0.5, 0.9] {
                    let k = k_of_t(n, m, 2.0, t).unwrap();
                    assert!(rel(k, PI.powf(-(n as f64) / 2.0)) < 1e-12);
                }
            }
            assert!(rel(k_limit(n, 2.0).unwrap(), PI.powf(-(n as f64) / 2.0)) < 1e-12);
        }
        // Linear-domain evaluation with an unrelated Gamma implementation.
        let (n, m, p, t) = (3usize, 2usize, 4.0f64, 0.5f64);
        let q = p / (p - 1.0);
        let ball = |d: f64| PI.powf(d / 2.0) / lanczos_gamma(d / 2.0 + 1.0);
        let pre = ball(2.0) * lanczos_gamma(m as f64 / q + 1.0)
            / (ball(5.0) * lanczos_gamma(5.0 / q + 1.0));
        let direct = pre * ((1.0 - t).powi(2) * t.powi(3)).powf(0.5 - 1.0 / q);
        assert!(rel(k_of_t(n, m, p, t).unwrap(), direct) < 1e-12);
        assert!(k_of_t(3, 2, 1.5, 0.5).is_err());
        assert!(k_of_t(3, 2, 3.0, 1.0).is_err());
    }

    #[test]
    fn k_gap_to_limit_at_large_m() {
        // ln K_opt − ln K_limit from 50-digit arithmetic; the gap decays like 1/m².
        let cases = [
            (3, 3.0, 10, -9.5467517088273765e-4),
            (3, 3.0, 100_000, -1.2499625010093482e-11),
            (3, 3.0, 1_000_000, -1.2499962500100937e-13),
            (4, 2.5, 1000, -1.1066832590909505e-7),
            (4, 2.5, 100_000, -1.1110666683320366e-11),
            (4, 2.5, 1_000_000, -1.1111066666833209e-13),
        ];
        for (n, p, m, gap) in cases {
            let got = log_k_opt(n, m, p).unwrap() - log_k_limit(n, p).unwrap();
            assert!(
                (got - gap).abs() < 1e-14 + 1e-9 * gap.abs(),
                "n={n} m={m}: {got:e} vs {gap:e}"
            );
        }
    }

    #[test]
    fn nash_and_j() {
        assert_eq!(nash_codim(3, true).unwrap(), 27);
        assert_eq!(nash_codim(2, true).unwrap(), 15);
        assert_eq!(nash_codim(3, false).unwrap(), 117);
        assert_eq!(j_bound(2, 1, 1.5).unwrap(), 3.0);
        assert_eq!(j_bound(3, 0, 2.0).unwrap(), 3.0);
        assert!(rel(j_bound(3, 4, 1.5).unwrap(), 7.0 / 3.0) < 1e-15);
    }

    #[test]
    fn young_cap_at_p2() {
        assert!(rel(young_cap(2.0, 1.0).unwrap(), 0.5) < 1e-15);
        assert_eq!(young_argmax(2.0, 1.0).unwrap(), 1.0);
        assert!(rel(young_argmax(1.5, 1.0).unwrap(), 0.5) < 1e-15);
        assert!(young_cap(1.0, 1.0).is_err());
        assert!(young_cap(2.0, 0.0).is_err());
    }

    #[test]
    fn chain_small_n() {
        let r = compare_chain(3).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert!(r.rows.iter().all(ChainRow::holds));
        assert!(compare_chain(2).is_err());
    }

    #[test]
    fn table_rows() {
        let rows = constants_table(&SobolevParams::new(3, 0, 2.0).unwrap()).unwrap();
        assert!(rows
            .iter()
            .all(|r| r.name != "brendle_c" && r.name != "sobolev_s_tilde"));
        let rows = constants_table(&SobolevParams::new(3, 4, 1.5).unwrap()).unwrap();
        let s = rows.iter().find(|r| r.name == "sobolev_s").unwrap();
        assert!(s.outside_proven_range);
        let st = rows.iter().find(|r| r.name == "sobolev_s_tilde").unwrap();
        assert!(!st.outside_proven_range);
    }
}
