//! Theta-series evaluation, the Mazo–Odlyzko counting bound, and the
//! relative-distance thresholds `α*_p` / `α*_{p,C}` with their closed-form
//! upper bounds.
//!
//! Everything here is plain `f64`: these quantities are analytic constants
//! consumed as brackets/tolerances, not promise decisions.

use crate::norm::NormOrder;
use crate::{Error, Result};

/// The rank-inefficiency parameter `C`: finite `C > 1`, or infinity
/// (the limiting threshold of 2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RankRatio {
    Finite(f64),
    Infinity,
}

impl RankRatio {
    pub fn finite(c: f64) -> Result<Self> {
        if !(c > 1.0) || !c.is_finite() {
            return Err(Error::Domain(format!("rank ratio C must be > 1, got {c}")));
        }
        Ok(RankRatio::Finite(c))
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") || s == "∞" {
            return Ok(RankRatio::Infinity);
        }
        let c: f64 = s
            .parse()
            .map_err(|_| Error::Parse(format!("bad rank ratio {s:?}")))?;
        RankRatio::finite(c)
    }

    /// The objective threshold `2^(1-1/C)` (2 in the limit).
    pub fn threshold(&self) -> f64 {
        match self {
            RankRatio::Infinity => 2.0,
            RankRatio::Finite(c) => 2f64.powf(1.0 - 1.0 / c),
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            RankRatio::Infinity => f64::INFINITY,
            RankRatio::Finite(c) => *c,
        }
    }
}

impl std::fmt::Display for RankRatio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RankRatio::Infinity => write!(f, "inf"),
            RankRatio::Finite(c) => write!(f, "{c}"),
        }
    }
}

/// A bracketed numerical threshold.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct AlphaResult {
    pub value: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub tol: f64,
}

/// Default truncation tolerance for the theta series.
pub const DEFAULT_REL_TOL: f64 = 1e-15;
/// Ceiling for the α bracket search.
pub const ALPHA_CEILING: f64 = 64.0;

/// `Θ_p(τ) = Σ_{z∈Z} exp(-τ |z|^p)`, summed symmetrically and truncated
/// when the next term drops below `rel_tol` times the partial sum.
pub fn theta(p: &NormOrder, tau: f64, rel_tol: f64) -> Result<f64> {
    let (pn, pd) = p.num_den()?;
    let pf = pn as f64 / pd as f64;
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("theta needs tau > 0, got {tau}")));
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::Domain(format!("rel_tol must be in (0,1), got {rel_tol}")));
    }
    let mut sum = 1.0f64;
    let mut z = 1u64;
    loop {
        let term = 2.0 * (-tau * (z as f64).powf(pf)).exp();
        if term < rel_tol * sum {
            break;
        }
        sum += term;
        z += 1;
        if z > 100_000_000 {
            return Err(Error::Domain(format!(
                "theta series did not truncate (p={p}, tau={tau})"
            )));
        }
    }
    Ok(sum)
}

/// `Θ_1(τ) = 2/(1 - e^{-τ}) - 1`, the geometric-series closed form that
/// dominates `Θ_p(τ)` for every finite `p >= 1`.
pub fn theta1_closed(tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("theta1 needs tau > 0, got {tau}")));
    }
    Ok(2.0 / (1.0 - (-tau).exp()) - 1.0)
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, rel_tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a) > rel_tol * (a.abs() + b.abs() + 1e-300) {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Minimizes a log-convex positive function of `τ > 0`: expands a bracket
/// geometrically from τ=1, then golden-section on the log.
fn minimize_over_tau(logf: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut lo = 1.0f64;
    let mut hi = 1.0f64;
    // expand down while still decreasing toward 0
    while lo > 1e-12 && logf(lo / 2.0) < logf(lo) {
        lo /= 2.0;
    }
    // expand up while still decreasing toward infinity
    while hi < 1e12 && logf(hi * 2.0) < logf(hi) {
        hi *= 2.0;
    }
    let (tau, logv) = golden_section(&logf, lo / 2.0, hi * 2.0, 1e-12);
    (tau, logv.exp())
}

/// `min_{τ>0} exp(τ/(2α)^p) · Θ_p(τ)` — the objective whose crossing of
/// `2^(1-1/C)` defines the threshold `α*_{p,C}`.
pub fn mo_objective(p: &NormOrder, alpha: f64) -> Result<f64> {
    let pf = {
        let (n, d) = p.num_den()?;
        n as f64 / d as f64
    };
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be > 0, got {alpha}")));
    }
    let scale = (2.0 * alpha).powf(pf);
    let logf = |tau: f64| {
        tau / scale + theta(p, tau, DEFAULT_REL_TOL).map(f64::ln).unwrap_or(f64::INFINITY)
    };
    Ok(minimize_over_tau(logf).1)
}

/// Mazo–Odlyzko bound: `min_{τ>0} exp(τ r^p) · Θ_p(τ)^n >= N_p(Z^n, r, 0)`.
pub fn mo_bound(p: &NormOrder, r: f64, n: u32) -> Result<f64> {
    let pf = {
        let (pn, pd) = p.num_den()?;
        pn as f64 / pd as f64
    };
    if !(r > 0.0) {
        return Err(Error::Domain(format!("mo_bound needs r > 0, got {r}")));
    }
    if n == 0 {
        return Err(Error::Domain("mo_bound needs n >= 1".into()));
    }
    let rp = r.powf(pf);
    let logf = |tau: f64| {
        tau * rp
            + n as f64
                * theta(p, tau, DEFAULT_REL_TOL)
                    .map(f64::ln)
                    .unwrap_or(f64::INFINITY)
    };
    Ok(minimize_over_tau(logf).1)
}

/// The infimum `α*` with `mo_objective(p, α*) <= 2^(1-1/C)`, by bisection
/// on α (the objective is strictly decreasing in α).
pub fn alpha_star(p: &NormOrder, c: &RankRatio, tol: f64) -> Result<AlphaResult> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be > 0, got {tol}")));
    }
    let th = c.threshold();
    let f = |alpha: f64| mo_objective(p, alpha);
    // lower end: the objective exceeds the threshold at α = 1/2 (the
    // triangle-inequality floor); shrink defensively in case of extreme C
    let mut lo = 0.5;
    while f(lo)? <= th {
        lo /= 2.0;
        if lo < 1e-6 {
            return Err(Error::NoBracket(format!(
                "objective already below threshold at alpha={lo}"
            )));
        }
    }
    let mut hi = lo;
    loop {
        hi *= 2.0;
        if hi > ALPHA_CEILING {
            return Err(Error::NoBracket(format!(
                "objective stays above threshold up to alpha={ALPHA_CEILING} (p={p}, C={c})"
            )));
        }
        if f(hi)? <= th {
            break;
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid)? <= th {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(AlphaResult {
        value: 0.5 * (lo + hi),
        bracket_lo: lo,
        bracket_hi: hi,
        tol,
    })
}

/// The `p` at which `α*_{p,C}` crosses `target_alpha`, by bisection: for
/// `target_alpha > 1/2` the objective at fixed α is strictly decreasing in
/// p, so `α*_{p,C} = target_alpha` exactly where
/// `mo_objective(p, target_alpha) = 2^(1-1/C)`.
pub fn crossover_p(target_alpha: f64, c: &RankRatio, tol: f64) -> Result<f64> {
    if !(target_alpha > 0.5) {
        return Err(Error::Domain(format!(
            "crossover needs target alpha > 1/2, got {target_alpha}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be > 0, got {tol}")));
    }
    let th = c.threshold();
    let g = |pf: f64| -> Result<f64> {
        let p = NormOrder::parse(&format!("{}/{}", (pf * 1_000_000.0).round() as u64, 1_000_000u64))?;
        mo_objective(&p, target_alpha)
    };
    let mut lo = 1.0f64;
    let mut hi = 1.0f64;
    if g(lo)? <= th {
        return Err(Error::NoBracket(format!(
            "alpha* is already below {target_alpha} at p = 1"
        )));
    }
    loop {
        hi *= 2.0;
        if hi > 512.0 {
            return Err(Error::NoBracket(format!(
                "no crossing of alpha = {target_alpha} found for p <= 512"
            )));
        }
        if g(hi)? <= th {
            break;
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if g(mid)? <= th {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `g(σ, τ) = exp(τ/σ) · (2/(1-e^{-τ}) - 1)`, the closed-form objective
/// with the geometric-series theta bound.
pub fn closed_form_g(sigma: f64, tau: f64) -> Result<f64> {
    if !(sigma > 0.0) || !(tau > 0.0) {
        return Err(Error::Domain(format!(
            "g needs sigma, tau > 0, got ({sigma}, {tau})"
        )));
    }
    Ok((tau / sigma).exp() * (2.0 / (1.0 - (-tau).exp()) - 1.0))
}

/// The minimizing τ of `g(σ, ·)`: `arcsinh(σ)`.
pub fn g_argmin_tau(sigma: f64) -> f64 {
    sigma.asinh()
}

/// `g*(σ) = g(σ, arcsinh σ)` evaluated at its per-σ optimum.
pub fn g_star(sigma: f64) -> Result<f64> {
    closed_form_g(sigma, g_argmin_tau(sigma))
}

/// The unique σ with `g*(σ) = 2^(1-1/C)`, by bisection (`g*` is strictly
/// decreasing from ∞ to 1).
pub fn sigma_star(c: &RankRatio, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be > 0, got {tol}")));
    }
    let th = c.threshold();
    if th <= 1.0 {
        return Err(Error::Domain(format!(
            "threshold {th} <= 1: sigma* diverges as C -> 1"
        )));
    }
    let mut lo = 1e-9f64;
    let mut hi = 1.0f64;
    while g_star(hi)? > th {
        hi *= 2.0;
        if hi > 1e18 {
            return Err(Error::NoBracket(format!("g* stays above {th}")));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if g_star(mid)? > th {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Closed-form upper bound `α*_{p,C} <= (1/2) · (σ*_C)^{1/p}`.
pub fn alpha_upper_bound(p: &NormOrder, c: &RankRatio) -> Result<f64> {
    let pf = {
        let (n, d) = p.num_den()?;
        n as f64 / d as f64
    };
    let sigma = sigma_star(c, 1e-12)?;
    Ok(0.5 * sigma.powf(1.0 / pf))
}

/// Alternate closed-form bound with `τ* = ln p`:
/// `(1/2) · (ln p / ln(2^(1-1/C) (p-1)/(p+1)))^{1/p}`.
pub fn alt_upper_bound(p: f64, c: &RankRatio) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::Domain(format!("alt bound needs p > 1, got {p}")));
    }
    let arg = c.threshold() * (p - 1.0) / (p + 1.0);
    if arg <= 1.0 {
        return Err(Error::Domain(format!(
            "alt bound undefined: 2^(1-1/C)(p-1)/(p+1) = {arg} <= 1"
        )));
    }
    Ok(0.5 * (p.ln() / arg.ln()).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> NormOrder {
        NormOrder::parse(s).unwrap()
    }

    #[test]
    fn theta_p1_matches_geometric_series() {
        let tau = 2f64.ln();
        let t = theta(&p("1"), tau, DEFAULT_REL_TOL).unwrap();
        assert!((t - 3.0).abs() < 1e-12, "theta_1(ln 2) = {t}");
        assert!((theta1_closed(tau).unwrap() - 3.0).abs() < 1e-14);
        assert!((theta1_closed(3f64.ln()).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn theta_large_tau_is_one() {
        let t = theta(&p("2"), 100.0, DEFAULT_REL_TOL).unwrap();
        assert!((t - 1.0).abs() < 1e-40);
    }

    #[test]
    fn theta_p2_tau1_direct_sum() {
        // 1 + 2(e^-1 + e^-4 + e^-9 + ...)
        let expect: f64 = 1.0 + 2.0 * (1..30).map(|z: i32| (-(z * z) as f64).exp()).sum::<f64>();
        let t = theta(&p("2"), 1.0, DEFAULT_REL_TOL).unwrap();
        assert!((t - expect).abs() < 1e-12);
        assert!((t - 1.772637).abs() < 1e-6);
    }

    #[test]
    fn theta_rejects_bad_inputs() {
        assert!(theta(&NormOrder::Infinity, 1.0, 1e-15).is_err());
        assert!(theta(&p("2"), 0.0, 1e-15).is_err());
        assert!(theta(&p("2"), -1.0, 1e-15).is_err());
        assert!(theta1_closed(0.0).is_err());
    }

    #[test]
    fn theta1_dominates_theta_p() {
        for ps in ["1", "3/2", "2", "3", "7"] {
            for tau in [0.1, 0.5, 1.0, 2.0, 5.0] {
                let tp = theta(&p(ps), tau, DEFAULT_REL_TOL).unwrap();
                let t1 = theta1_closed(tau).unwrap();
                assert!(tp <= t1 * (1.0 + 1e-12), "p={ps} tau={tau}: {tp} > {t1}");
            }
        }
    }

    #[test]
    fn theta_monotone_in_tau_and_p() {
        let taus: Vec<f64> = (1..40).map(|i| i as f64 * 0.25).collect();
        for w in taus.windows(2) {
            let a = theta(&p("2"), w[0], DEFAULT_REL_TOL).unwrap();
            let b = theta(&p("2"), w[1], DEFAULT_REL_TOL).unwrap();
            assert!(b < a, "theta not decreasing in tau at {:?}", w);
        }
        for tau in [0.25, 1.0, 3.0] {
            let mut last = f64::INFINITY;
            for ps in ["1", "3/2", "2", "3", "5"] {
                let t = theta(&p(ps), tau, DEFAULT_REL_TOL).unwrap();
                assert!(t <= last * (1.0 + 1e-12));
                last = t;
            }
        }
    }

    #[test]
    fn mo_objective_at_paper_alpha2_star() {
        // α_2^* ≈ 1.05006 is where the objective equals 2
        let v = mo_objective(&p("2"), 1.05006).unwrap();
        assert!((v - 2.0).abs() < 2e-3, "objective at alpha_2^*: {v}");
    }

    #[test]
    fn mo_objective_limits() {
        let v = mo_objective(&p("2"), 1e6).unwrap();
        assert!((v - 1.0).abs() < 1e-3);
    }

    #[test]
    fn mo_objective_matches_grid_scan() {
        // golden-section minimum vs a dense tau-grid scan
        for (ps, alpha) in [("1", 1.0), ("2", 1.1), ("3", 0.9)] {
            let pp = p(ps);
            let fast = mo_objective(&pp, alpha).unwrap();
            let pf = pp.as_f64();
            let scale = (2.0 * alpha).powf(pf);
            let grid = (1..200_000)
                .map(|i| {
                    let tau = i as f64 * 1e-4;
                    (tau / scale).exp() * theta(&pp, tau, DEFAULT_REL_TOL).unwrap()
                })
                .fold(f64::INFINITY, f64::min);
            assert!(
                (fast - grid).abs() <= 1e-6 * grid,
                "p={ps} alpha={alpha}: golden {fast} vs grid {grid}"
            );
        }
    }

    #[test]
    fn mo_objective_decreasing_in_alpha() {
        let mut last = f64::INFINITY;
        for i in 1..40 {
            let alpha = 0.5 + i as f64 * 0.05;
            let v = mo_objective(&p("2"), alpha).unwrap();
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn mo_bound_simple_floors() {
        assert!(mo_bound(&p("2"), 1.0, 2).unwrap() >= 5.0);
        assert!(mo_bound(&p("1"), 1.0, 1).unwrap() >= 3.0);
        assert!(mo_bound(&p("2"), 0.5, 3).unwrap() >= 1.0);
    }

    #[test]
    fn alpha_star_paper_constants() {
        let r = alpha_star(&p("2"), &RankRatio::Infinity, 1e-6).unwrap();
        assert!((r.value - 1.05006).abs() < 1e-3, "alpha_2^* = {}", r.value);
        assert!(r.bracket_lo <= r.value && r.value <= r.bracket_hi);
        assert!(r.bracket_hi - r.bracket_lo <= r.tol);

        let r = alpha_star(&p("5"), &RankRatio::Infinity, 1e-6).unwrap();
        assert!((r.value - 0.672558).abs() < 1e-3, "alpha_5^* = {}", r.value);
    }

    #[test]
    fn crossover_recovers_p1_and_p0() {
        let p1 = crossover_p(std::f64::consts::FRAC_1_SQRT_2, &RankRatio::Infinity, 1e-6).unwrap();
        assert!((p1 - 4.2773).abs() < 1e-3, "p_1 = {p1}");
        let p0 = crossover_p(1.0, &RankRatio::Infinity, 1e-6).unwrap();
        assert!((p0 - 2.1397).abs() < 1e-3, "p_0 = {p0}");
    }

    #[test]
    fn crossover_inverts_alpha_star() {
        let a3 = alpha_star(&p("3"), &RankRatio::Infinity, 1e-9).unwrap();
        let back = crossover_p(a3.value, &RankRatio::Infinity, 1e-6).unwrap();
        assert!((back - 3.0).abs() < 1e-3, "inverted p = {back}");
    }

    #[test]
    fn g_closed_form_values() {
        assert!((closed_form_g(1.0, 2f64.ln()).unwrap() - 6.0).abs() < 1e-12);
        assert!((closed_form_g(1e12, 3f64.ln()).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn g_argmin_matches_grid() {
        for sigma in [0.5, 1.0, 4.6723, 10.0] {
            let gm = g_star(sigma).unwrap();
            let grid = (1..400_000)
                .map(|i| closed_form_g(sigma, i as f64 * 1e-4).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!((gm - grid).abs() < 1e-9 * grid.max(1.0), "sigma={sigma}: {gm} vs {grid}");
        }
    }

    #[test]
    fn sigma_star_paper_value() {
        let s = sigma_star(&RankRatio::Infinity, 1e-6).unwrap();
        assert!((s - 4.6723).abs() < 5e-4, "sigma* = {s}");
        let g = g_star(s).unwrap();
        assert!((g - 2.0).abs() < 1e-6);
    }

    #[test]
    fn upper_bounds_paper_values() {
        let b2 = alpha_upper_bound(&p("2"), &RankRatio::Infinity).unwrap();
        assert!((b2 - 1.08078).abs() < 1e-4, "upper bound p=2: {b2}");
        let b5 = alpha_upper_bound(&p("5"), &RankRatio::Infinity).unwrap();
        assert!((b5 - 0.680575).abs() < 1e-4, "upper bound p=5: {b5}");
        // p -> inf: bound -> 1/2
        let b = alpha_upper_bound(&p("1000"), &RankRatio::Infinity).unwrap();
        assert!((b - 0.5).abs() < 2e-3);
    }

    #[test]
    fn alt_upper_bound_values() {
        // at the crossover point p_1 ≈ 4.2773 the bound is ≈ 0.7801
        let b = alt_upper_bound(4.2773, &RankRatio::Infinity).unwrap();
        assert!((b - 0.7801).abs() < 1e-3, "alt bound at p_1: {b}");
        let b5 = alt_upper_bound(5.0, &RankRatio::Infinity).unwrap();
        // direct evaluation of the formula
        let direct = 0.5 * (5f64.ln() / (2.0f64 * 4.0 / 6.0).ln()).powf(0.2);
        assert!((b5 - direct).abs() < 1e-12);
        assert!((b5 - 0.7054).abs() < 1e-3);
        // domain guard
        assert!(alt_upper_bound(1.0, &RankRatio::Infinity).is_err());
        assert!(alt_upper_bound(1.01, &RankRatio::finite(1.01).unwrap()).is_err());
    }
}
