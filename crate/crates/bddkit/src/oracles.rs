//! Independent brute-force ground truth: exact CVP/promise checkers and
//! Monte-Carlo estimators. Oracles recompute everything from the emitted
//! instances and never trust reduction-internal state.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use crate::lattice::{count, count_binary_close, dist, min_dist_at_least, BallQuery, Boundary, LatticePoint};
use crate::lattice::integer_lattice;
use crate::matrix::Basis;
use crate::norm::{norm_p, Magnitude, NormOrder};
use crate::numerics::mo_bound;
use crate::reductions::{sparsify_step, BddInstance, StBddInstance};
use crate::sparsify::PrimePolicy;
use crate::{Error, Result};

/// Exact closest vector and distance.
pub fn brute_cvp(b: &Basis, t: &[BigRational], p: &NormOrder) -> Result<(Magnitude, LatticePoint)> {
    dist(b, t, p)
}

/// Naive reference oracle: scans an explicit coefficient box that provably
/// covers the ball (side length from per-column coordinate bounds) and
/// filters exactly. Slow, but independent of the enumeration code paths.
pub fn box_scan(b: &Basis, q: &BallQuery) -> Result<Vec<LatticePoint>> {
    let n = b.rank();
    let center_coeffs = b.coeffs_projected(&q.center)?;
    let half_widths = scan_widths(b, q)?;
    let mut out = Vec::new();
    let mut coeffs = vec![BigInt::from(0); n];
    scan_rec(b, q, &center_coeffs, &half_widths, 0, &mut coeffs, &mut out)?;
    out.sort_by(|a, b| a.coeffs.cmp(&b.coeffs));
    Ok(out)
}

// coefficient-space reach of the ball: for each column, |c_j - w_j| is
// bounded by r / (l2 distance of column j to the span of the others);
// a cruder but safe bound is r * ||row j of B^+||_2, which we
// over-approximate via the normal-equation solve per unit vector
fn scan_widths(b: &Basis, q: &BallQuery) -> Result<Vec<i64>> {
    let n = b.rank();
    let mut half_widths = Vec::with_capacity(n);
    let r_hi = q.radius.upper_f64();
    let dim_factor = match &q.p {
        NormOrder::Infinity => (b.dim() as f64).sqrt(),
        NormOrder::Finite(pr) => {
            let pf = *pr.numer() as f64 / *pr.denom() as f64;
            if pf < 2.0 {
                1.0
            } else {
                (b.dim() as f64).powf(0.5 - 1.0 / pf)
            }
        }
    };
    for j in 0..n {
        // ||e_j^T B^+||_2 = sqrt((G^{-1})_{jj}) with G the Gram matrix
        let mut e = vec![BigRational::from_integer(BigInt::from(0)); n];
        e[j] = BigRational::from_integer(BigInt::from(1));
        let col = b
            .gram()
            .solve(&e)
            .ok_or(crate::Error::SingularBasis)?;
        let gjj = crate::rat::rat_to_f64(&col[j]).max(0.0);
        half_widths.push((r_hi * dim_factor * gjj.sqrt()).ceil() as i64 + 2);
    }
    Ok(half_widths)
}

/// Number of coefficient vectors `box_scan` would visit, so that callers
/// can skip pathologically conditioned draws.
pub fn box_scan_cost(b: &Basis, q: &BallQuery) -> Result<f64> {
    Ok(scan_widths(b, q)?
        .iter()
        .map(|&hw| 2.0 * hw as f64 + 1.0)
        .product())
}

fn scan_rec(
    b: &Basis,
    q: &BallQuery,
    center: &[BigRational],
    widths: &[i64],
    j: usize,
    coeffs: &mut Vec<BigInt>,
    out: &mut Vec<LatticePoint>,
) -> Result<()> {
    if j == b.rank() {
        use num_traits::Zero;
        if q.exclude_zero && coeffs.iter().all(|c| c.is_zero()) {
            return Ok(());
        }
        let point = b.point(coeffs);
        let diff: Vec<BigRational> = point
            .iter()
            .zip(q.center.iter())
            .map(|(a, c)| a - c)
            .collect();
        let nrm = norm_p(&diff, &q.p);
        let keep = match q.boundary {
            Boundary::Closed => nrm.cmp_exact(&q.radius) != std::cmp::Ordering::Greater,
            Boundary::Open => nrm.cmp_exact(&q.radius) == std::cmp::Ordering::Less,
        };
        if keep {
            out.push(LatticePoint { coeffs: coeffs.clone(), point });
        }
        return Ok(());
    }
    let mid = crate::rat::round_rat(&center[j]);
    for off in -widths[j]..=widths[j] {
        coeffs[j] = &mid + BigInt::from(off);
        scan_rec(b, q, center, widths, j + 1, coeffs, out)?;
    }
    Ok(())
}

/// Exact (S,T)-BDD YES check: at most S short nonzero vectors below r,
/// at least T binary-coefficient vectors within alpha*r of the target.
pub fn check_stbdd_yes(inst: &StBddInstance, s: u64, t: u64) -> Result<bool> {
    let short = count(
        &inst.basis,
        &BallQuery {
            p: inst.p.clone(),
            radius: inst.r.clone(),
            center: vec![BigRational::from_integer(BigInt::from(0)); inst.basis.dim()],
            boundary: Boundary::Open,
            exclude_zero: true,
        },
    )?;
    if short as u64 > s {
        return Ok(false);
    }
    let close = count_binary_close(
        &inst.basis,
        &inst.target,
        &inst.p,
        &inst.r.scale_rational(&inst.alpha),
    )?;
    Ok(close as u64 >= t)
}

/// Exact BDD promise check: dist_p(t, L) <= alpha * lambda1^(p)(L).
pub fn check_bdd_promise(inst: &BddInstance) -> Result<bool> {
    if inst.alpha.is_negative() {
        return Err(Error::Domain("alpha must be non-negative".into()));
    }
    let (l1, _) = crate::lattice::lambda1(&inst.basis, &inst.p)?;
    let bound = l1.scale_rational(&inst.alpha);
    crate::lattice::dist_at_most(&inst.basis, &inst.target, &inst.p, &bound)
}

/// Monte-Carlo estimate with a 99% Wilson score interval.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SuccessEstimate {
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

/// z for a two-sided 99% interval.
pub const WILSON_Z99: f64 = 2.5758293035489004;

pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = phat + z2 / (2.0 * n);
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    (((center - half) / denom).max(0.0), ((center + half) / denom).min(1.0))
}

/// Runs `sparsify_step` repeatedly on a verified YES instance and counts
/// draws whose output is a valid (0,1)-BDD YES instance — lambda1(L') >= r
/// and dist(t', L') <= alpha*r, both checked exactly.
pub fn monte_carlo_success(
    inst: &StBddInstance,
    policy: PrimePolicy,
    trials: u64,
    seed0: u64,
) -> Result<SuccessEstimate> {
    if trials == 0 {
        return Err(Error::Domain("monte_carlo_success needs trials >= 1".into()));
    }
    if inst.basis.rank() < 3 {
        return Err(Error::Domain("the probability floor needs n >= 3".into()));
    }
    let bound = inst.r.scale_rational(&inst.alpha);
    let mut successes = 0u64;
    for i in 0..trials {
        let (cand, _) = sparsify_step(inst, policy, seed0.wrapping_add(i))?;
        let tall = min_dist_at_least(&cand.basis, &cand.p, &cand.r)?;
        if !tall {
            continue;
        }
        if crate::lattice::dist_at_most(&cand.basis, &cand.target, &cand.p, &bound)? {
            successes += 1;
        }
    }
    let (lo, hi) = wilson_interval(successes, trials, WILSON_Z99);
    Ok(SuccessEstimate {
        trials,
        successes,
        rate: successes as f64 / trials as f64,
        wilson_lo: lo,
        wilson_hi: hi,
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct MoSweepReport {
    pub cases: u64,
    pub max_ratio: f64,
    pub worst_case: Option<(String, u32, f64)>,
}

/// Asserts exact N_p(Z^n, r, 0) <= mo_bound over a (p, n, r) grid and
/// reports the tightest ratio seen. Any violation is an error carrying
/// the counterexample.
pub fn verify_mo_bound_sweep(
    p_list: &[NormOrder],
    n_max: u32,
    r_grid: &[BigRational],
) -> Result<MoSweepReport> {
    let mut cases = 0u64;
    let mut max_ratio = 0.0f64;
    let mut worst = None;
    for p in p_list {
        for n in 1..=n_max {
            let b = integer_lattice(n as usize);
            for r in r_grid {
                if r.is_negative() || !r.is_positive() {
                    continue;
                }
                let radius = Magnitude::from_radius(r, p)?;
                let exact = count(
                    &b,
                    &BallQuery::origin_closed(p.clone(), radius, n as usize),
                )? as f64;
                let bound = mo_bound(p, crate::rat::rat_to_f64(r), n)?;
                cases += 1;
                // tiny float slack: the bound itself is exact mathematics,
                // its evaluation is not
                if exact > bound * (1.0 + 1e-9) {
                    return Err(Error::Domain(format!(
                        "counting bound violated: p={p}, n={n}, r={r}: exact {exact} > bound {bound}"
                    )));
                }
                let ratio = exact / bound;
                if ratio > max_ratio {
                    max_ratio = ratio;
                    worst = Some((p.to_string(), n, crate::rat::rat_to_f64(r)));
                }
            }
        }
    }
    Ok(MoSweepReport { cases, max_ratio, worst_case: worst })
}
