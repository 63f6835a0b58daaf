//! Instance-level transforms: GapCVP' → (S,T)-BDD by direct sum,
//! (S,T)-BDD → (0,1)-BDD by sparsification, (0,T)-BDD → BDD by padding,
//! the composed pipeline, and the threshold-normalization gadget.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::lattice::{count, integer_lattice, BallQuery, Boundary};
use crate::matrix::{Basis, RatMat};
use crate::norm::{Magnitude, NormOrder};
use crate::numerics::{mo_bound, mo_objective, RankRatio};
use crate::rat::rat_to_f64;
use crate::sparsify::{choose_prime, sample_draw, shift_target, sparsify_basis, PrimePolicy, SparsifierDraw};
use crate::{Error, Result};

/// Decision CVP with binary YES witnesses and threshold fixed at 1.
#[derive(Debug, Clone)]
pub struct GapCvpInstance {
    pub p: NormOrder,
    pub basis: Basis,
    pub target: Vec<BigRational>,
}

/// Count of short nonzero vectors: exact at desk scale, a Mazo–Odlyzko
/// overestimate beyond the enumeration cutoff.
#[derive(Debug, Clone, PartialEq)]
pub enum SBound {
    Exact(u64),
    MoBound(f64),
}

impl SBound {
    /// An integer upper bound usable in the T >= 10S check.
    pub fn ceil_u64(&self) -> u64 {
        match self {
            SBound::Exact(s) => *s,
            SBound::MoBound(b) => b.ceil().max(0.0) as u64,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, SBound::Exact(_))
    }
}

#[derive(Debug, Clone)]
pub struct StBddMeta {
    pub s_bound: SBound,
    pub t_count: u64,
    pub n_prime: usize,
    pub c: RankRatio,
}

/// The (S,T)-BDD station: rank-n basis, radius r, target, relative
/// distance alpha, and the promise bookkeeping.
#[derive(Debug, Clone)]
pub struct StBddInstance {
    pub p: NormOrder,
    pub basis: Basis,
    pub r: Magnitude,
    pub target: Vec<BigRational>,
    pub alpha: BigRational,
    pub meta: StBddMeta,
}

/// A (0,1)-BDD candidate produced by one sparsification draw, before the
/// padding step fixes the minimum distance.
#[derive(Debug, Clone)]
pub struct BddCandidate {
    pub p: NormOrder,
    pub basis: Basis,
    pub r: Magnitude,
    pub target: Vec<BigRational>,
    pub alpha: BigRational,
}

/// Final BDD instance: the promise is dist <= alpha * lambda1.
#[derive(Debug, Clone)]
pub struct BddInstance {
    pub p: NormOrder,
    pub basis: Basis,
    pub target: Vec<BigRational>,
    pub alpha: BigRational,
}

#[derive(Debug, Clone)]
pub struct ReductionParams {
    pub p: NormOrder,
    pub c: RankRatio,
    pub alpha: BigRational,
    pub policy: PrimePolicy,
    pub seed: u64,
}

/// Everything needed to replay one pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineTrace {
    pub n_prime: usize,
    pub n: usize,
    pub st: StBddInstance,
    pub draw: Option<SparsifierDraw>,
    pub candidate: BddCandidate,
    pub pad_entry: BigRational,
    pub effective_alpha: BigRational,
}

/// `s_p(n) = (1/2)(n+1)^{1/p}` for finite p (carried via its exact p-th
/// power `(n+1)/2^p`), and `s_∞ = 1/2`.
pub fn s_p(n: usize, p: &NormOrder) -> Magnitude {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    match p {
        NormOrder::Infinity => Magnitude::Sup(half),
        NormOrder::Finite(_) => {
            let h = Magnitude::from_radius(&half, p).expect("1/2 >= 0");
            let np1 = BigRational::from_integer(BigInt::from(n as u64 + 1));
            let root = Magnitude::from_pth_power(&np1, p).expect("n+1 >= 0");
            h.mul(&root)
        }
    }
}

/// Enumeration cutoff for exact S counts; beyond it the MO bound stands in.
const S_EXACT_MAX_RANK: usize = 8;

/// `S = N°_p(Z^n ∖ {0}, r, 0)`: exact count of nonzero integer points in
/// the open ball at desk scale, Mazo–Odlyzko overestimate above the cutoff.
#[allow(non_snake_case)]
pub fn compute_S_bound(p: &NormOrder, n: usize, r: &Magnitude) -> Result<SBound> {
    if n == 0 {
        return Err(Error::Domain("S bound needs n >= 1".into()));
    }
    if n <= S_EXACT_MAX_RANK {
        let q = BallQuery {
            p: p.clone(),
            radius: r.clone(),
            center: vec![BigRational::zero(); n],
            boundary: Boundary::Open,
            exclude_zero: true,
        };
        let c = count(&integer_lattice(n), &q)?;
        return Ok(SBound::Exact(c as u64));
    }
    match p {
        NormOrder::Infinity => Err(Error::Domain(
            "no closed-form S bound for p = inf above the enumeration cutoff".into(),
        )),
        NormOrder::Finite(_) => Ok(SBound::MoBound(mo_bound(p, r.upper_f64(), n as u32)?)),
    }
}

/// GapCVP' → (S,T)-BDD: `B = [[B'/2, 0], [I_{n'}, 0], [0, I_{n-n'}]]`,
/// `t = (1/2)(t', 1, …, 1)`, `r = s_p(n)/α`, `T = 2^{n-n'}`.
pub fn direct_sum_transform(
    inst: &GapCvpInstance,
    n: usize,
    alpha: &BigRational,
    c: &RankRatio,
) -> Result<StBddInstance> {
    let np = inst.basis.rank();
    let d = inst.basis.dim();
    if n < np {
        return Err(Error::Dimension(format!("need n >= n' = {np}, got {n}")));
    }
    if n - np >= 63 {
        return Err(Error::Domain("2^(n - n') overflows at desk scale".into()));
    }
    if !alpha.is_positive() {
        return Err(Error::Domain("alpha must be positive".into()));
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut b = RatMat::zeros(d + n, n);
    for i in 0..d {
        for j in 0..np {
            b.set(i, j, inst.basis.matrix().get(i, j) * &half);
        }
    }
    for j in 0..np {
        b.set(d + j, j, BigRational::one());
    }
    for j in np..n {
        b.set(d + j, j, BigRational::one());
    }
    let mut target: Vec<BigRational> = inst.target.iter().map(|x| x * &half).collect();
    target.extend(std::iter::repeat(half).take(n));

    let r = s_p(n, &inst.p).scale_rational(&alpha.recip());
    let s_bound = compute_S_bound(&inst.p, n, &r)?;
    Ok(StBddInstance {
        p: inst.p.clone(),
        basis: Basis::new(b)?,
        r,
        target,
        alpha: alpha.clone(),
        meta: StBddMeta {
            s_bound,
            t_count: 1u64 << (n - np),
            n_prime: np,
            c: *c,
        },
    })
}

/// One sparsification attempt: enforces `T >= 10S`, picks the prime,
/// samples the draw, and emits the (0,1)-BDD candidate.
pub fn sparsify_step(
    inst: &StBddInstance,
    policy: PrimePolicy,
    seed: u64,
) -> Result<(BddCandidate, SparsifierDraw)> {
    let t_count = inst.meta.t_count;
    let s = inst.meta.s_bound.ceil_u64();
    if t_count < 10 * s {
        return Err(Error::Constraint(format!(
            "T = {t_count} < 10·S = {} — the sparsification guarantee does not apply",
            10 * s
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = choose_prime(t_count, policy, &mut rng)?;
    let draw = sample_draw(q, inst.basis.rank(), seed, &mut rng);
    let basis = sparsify_basis(&inst.basis, &draw)?;
    let target = shift_target(&inst.target, &inst.basis, &draw)?;
    Ok((
        BddCandidate {
            p: inst.p.clone(),
            basis,
            r: inst.r.clone(),
            target,
            alpha: inst.alpha.clone(),
        },
        draw,
    ))
}

/// Smallest comfortable rational `a` with `a · r_pad >= alpha · r`,
/// compared exactly; equals `alpha` itself whenever `r_pad` hits `r`.
fn effective_alpha(
    alpha: &BigRational,
    r: &Magnitude,
    r_pad: &BigRational,
    p: &NormOrder,
) -> Result<BigRational> {
    let need = r.scale_rational(alpha);
    let ok = |a: &BigRational| -> bool {
        let lhs = Magnitude::from_radius(&(a * r_pad), p).expect("non-negative radius");
        lhs.cmp_exact(&need) != std::cmp::Ordering::Less
    };
    if ok(alpha) {
        return Ok(alpha.clone());
    }
    let mut x = need.approx() / rat_to_f64(r_pad);
    // x ≈ alpha · r / r_pad; ascend until the exact comparison holds
    for _ in 0..200 {
        let cand = BigRational::from_float(x)
            .ok_or_else(|| Error::Domain("non-finite effective alpha".into()))?;
        if cand.is_positive() && ok(&cand) {
            return Ok(cand);
        }
        x = x * (1.0 + 1e-12) + f64::MIN_POSITIVE;
    }
    Err(Error::Domain("could not certify an effective alpha".into()))
}

/// (0,T)-BDD → BDD: appends the axis vector of length `r` so the minimum
/// distance becomes exactly `min(λ1, r)`. The appended entry is the
/// closest representable rational at or below `r`; alpha is adjusted
/// upward by the matching exact factor so the promise is preserved.
pub fn pad_step(cand: &BddCandidate) -> Result<(BddInstance, BigRational)> {
    let r_pad = cand.r.rational_below(&cand.p);
    if !r_pad.is_positive() {
        return Err(Error::Domain("pad radius must be positive".into()));
    }
    let d = cand.basis.dim();
    let n = cand.basis.rank();
    let mut b = RatMat::zeros(d + 1, n + 1);
    for i in 0..d {
        for j in 0..n {
            b.set(i, j, cand.basis.matrix().get(i, j).clone());
        }
    }
    b.set(d, n, r_pad.clone());
    let mut target = cand.target.clone();
    target.push(BigRational::zero());
    let alpha = effective_alpha(&cand.alpha, &cand.r, &r_pad, &cand.p)?;
    Ok((
        BddInstance {
            p: cand.p.clone(),
            basis: Basis::new(b)?,
            target,
            alpha,
        },
        r_pad,
    ))
}

/// Threshold normalization: maps a distance-r question to a fixed
/// distance-r* question by appending the coordinate `(r*^p - r^p)^{1/p}`
/// to the target over an appended zero row of the basis. Requires that
/// coordinate to be rational (finite rational p, compatible radii).
pub fn normalize_threshold(
    basis: &Basis,
    t: &[BigRational],
    r: &Magnitude,
    r_star: &Magnitude,
    p: &NormOrder,
) -> Result<(Basis, Vec<BigRational>)> {
    if p.is_infinity() {
        return Err(Error::InvalidNorm("threshold normalization needs finite p".into()));
    }
    if r.cmp_exact(r_star) == std::cmp::Ordering::Greater {
        return Err(Error::Domain("normalize_threshold needs r <= r*".into()));
    }
    let (rp, rsp) = match (r.pth_power_rational(), r_star.pth_power_rational()) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::Constraint(
                "appended coordinate (r*^p - r^p)^{1/p} is not rational".into(),
            ))
        }
    };
    let diff = &rsp - &rp;
    let (a, bden) = p.num_den()?;
    let root = crate::norm::rational_pow(&diff, bden as i64, a as u32);
    let Some(x) = root.as_rational() else {
        return Err(Error::Constraint(
            "appended coordinate (r*^p - r^p)^{1/p} is not rational".into(),
        ));
    };
    let d = basis.dim();
    let n = basis.rank();
    let mut b = RatMat::zeros(d + 1, n);
    for i in 0..d {
        for j in 0..n {
            b.set(i, j, basis.matrix().get(i, j).clone());
        }
    }
    let mut target = t.to_vec();
    target.push(x);
    Ok((Basis::new(b)?, target))
}

fn validate_params(params: &ReductionParams) -> Result<()> {
    match &params.p {
        NormOrder::Infinity => {
            let half = BigRational::new(BigInt::one(), BigInt::from(2));
            let c_ok = matches!(params.c, RankRatio::Finite(c) if (c - 1.0).abs() < 1e-12);
            if !c_ok || params.alpha != half {
                return Err(Error::Constraint(
                    "the p = inf pipeline is defined only for C = 1, alpha = 1/2".into(),
                ));
            }
            Ok(())
        }
        NormOrder::Finite(_) => {
            let alpha_f = rat_to_f64(&params.alpha);
            let obj = mo_objective(&params.p, alpha_f)?;
            let th = params.c.threshold();
            if obj >= th {
                return Err(Error::Constraint(format!(
                    "alpha = {alpha_f} is not above the threshold for p = {}, C = {} \
                     (objective {obj:.6} >= {th:.6})",
                    params.p, params.c
                )));
            }
            if matches!(params.c, RankRatio::Infinity) {
                return Err(Error::Constraint(
                    "the pipeline needs a finite rank ratio C to size the output".into(),
                ));
            }
            Ok(())
        }
    }
}

/// GapCVP' → BDD, end to end. Finite p: direct sum to rank
/// `n = ceil(C·n')`, one sparsification draw, then padding (output rank
/// n + 1). For p = ∞ the composition is deterministic with n = n'.
pub fn full_pipeline(
    inst: &GapCvpInstance,
    params: &ReductionParams,
) -> Result<(BddInstance, PipelineTrace)> {
    validate_params(params)?;
    let np = inst.basis.rank();
    let (n, st, draw, cand) = match &params.p {
        NormOrder::Infinity => {
            let st = direct_sum_transform(inst, np, &params.alpha, &params.c)?;
            let cand = BddCandidate {
                p: st.p.clone(),
                basis: st.basis.clone(),
                r: st.r.clone(),
                target: st.target.clone(),
                alpha: st.alpha.clone(),
            };
            (np, st, None, cand)
        }
        NormOrder::Finite(_) => {
            let c = params.c.as_f64();
            let n = ((c * np as f64 - 1e-9).ceil() as usize).max(np);
            let st = direct_sum_transform(inst, n, &params.alpha, &params.c)?;
            let (cand, draw) = sparsify_step(&st, params.policy, params.seed)?;
            (n, st, Some(draw), cand)
        }
    };
    let (bdd, pad_entry) = pad_step(&cand)?;
    let trace = PipelineTrace {
        n_prime: np,
        n,
        st,
        draw,
        candidate: cand,
        pad_entry,
        effective_alpha: bdd.alpha.clone(),
    };
    Ok((bdd, trace))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    Yes { trial: u64, witness: Vec<BigRational> },
    NoOrUnlucky,
}

/// Runs the pipeline up to `trials` times against a (possibly untrusted)
/// BDD solver; answers YES only when the returned vector verifies exactly,
/// so false positives are impossible.
pub fn decide_cvp(
    inst: &GapCvpInstance,
    params: &ReductionParams,
    mut solver: impl FnMut(&BddInstance) -> Vec<BigRational>,
    trials: u64,
) -> Result<Decision> {
    if trials == 0 {
        return Err(Error::Domain("decide_cvp needs trials >= 1".into()));
    }
    for trial in 0..trials {
        let mut p = params.clone();
        p.seed = params.seed.wrapping_add(trial);
        let (bdd, trace) = full_pipeline(inst, &p)?;
        let v = solver(&bdd);
        if v.len() != bdd.basis.dim() {
            continue;
        }
        // verify membership: integer coefficients in the output lattice
        let Ok(coeffs) = bdd.basis.coeffs(&v) else { continue };
        if !coeffs.iter().all(|c| c.denom().is_one()) {
            continue;
        }
        // verify distance against the radius the promise speaks about
        let diff: Vec<BigRational> = v
            .iter()
            .zip(bdd.target.iter())
            .map(|(a, b)| a - b)
            .collect();
        let bound = trace.candidate.r.scale_rational(&trace.candidate.alpha);
        if crate::norm::norm_p(&diff, &bdd.p).cmp_exact(&bound) != std::cmp::Ordering::Greater {
            return Ok(Decision::Yes { trial, witness: v });
        }
    }
    Ok(Decision::NoOrUnlucky)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{count_binary_close, dist, lambda1};
    use crate::rat::parse_rat;

    fn p(s: &str) -> NormOrder {
        NormOrder::parse(s).unwrap()
    }

    fn rv(parts: &[&str]) -> Vec<BigRational> {
        parts.iter().map(|s| parse_rat(s).unwrap()).collect()
    }

    fn rank1_yes_inf() -> GapCvpInstance {
        // B' = (2), t' = (1): binary witness at distance 1
        GapCvpInstance {
            p: p("inf"),
            basis: Basis::new(RatMat::from_rows(vec![rv(&["2"])]).unwrap()).unwrap(),
            target: rv(&["1"]),
        }
    }

    fn rank1_no_inf() -> GapCvpInstance {
        // B' = (3), t' = (3/2): every lattice vector at distance >= 3/2 > 1
        GapCvpInstance {
            p: p("inf"),
            basis: Basis::new(RatMat::from_rows(vec![rv(&["3"])]).unwrap()).unwrap(),
            target: rv(&["3/2"]),
        }
    }

    fn inf_params() -> ReductionParams {
        ReductionParams {
            p: p("inf"),
            c: RankRatio::Finite(1.0),
            alpha: parse_rat("1/2").unwrap(),
            policy: PrimePolicy::Smallest,
            seed: 0,
        }
    }

    #[test]
    fn s_p_examples() {
        let one = Magnitude::from_radius(&parse_rat("1").unwrap(), &p("1")).unwrap();
        assert_eq!(s_p(1, &p("1")).cmp_exact(&one), std::cmp::Ordering::Equal);
        let one3 = Magnitude::from_radius(&parse_rat("1").unwrap(), &p("3")).unwrap();
        assert_eq!(s_p(7, &p("3")).cmp_exact(&one3), std::cmp::Ordering::Equal);
        assert_eq!(
            s_p(9, &p("inf")),
            Magnitude::Sup(parse_rat("1/2").unwrap())
        );
    }

    #[test]
    fn s_bound_examples() {
        let pinf = p("inf");
        let r = Magnitude::from_radius(&parse_rat("1").unwrap(), &pinf).unwrap();
        assert_eq!(compute_S_bound(&pinf, 4, &r).unwrap(), SBound::Exact(0));

        let p2 = p("2");
        let r = Magnitude::from_radius(&parse_rat("6/5").unwrap(), &p2).unwrap();
        assert_eq!(compute_S_bound(&p2, 2, &r).unwrap(), SBound::Exact(4));

        // above the cutoff: MO bound, and it dominates the exact cutoff counts
        let r = Magnitude::from_radius(&parse_rat("1").unwrap(), &p2).unwrap();
        let b = compute_S_bound(&p2, 12, &r).unwrap();
        assert!(matches!(b, SBound::MoBound(v) if v >= 24.0));
    }

    #[test]
    fn direct_sum_shapes_and_counts() {
        let inst = rank1_yes_inf();
        let half = parse_rat("1/2").unwrap();
        let st = direct_sum_transform(&inst, 1, &half, &RankRatio::Finite(1.0)).unwrap();
        assert_eq!(st.basis.dim(), 2);
        assert_eq!(st.basis.rank(), 1);
        assert_eq!(st.meta.t_count, 1);
        assert_eq!(st.meta.s_bound, SBound::Exact(0));
        // dist_inf(t, L) = 1/2 = s_inf, via one binary-close vector
        let (d, _) = dist(&st.basis, &st.target, &st.p).unwrap();
        assert_eq!(d, Magnitude::Sup(half.clone()));
        let close = count_binary_close(&st.basis, &st.target, &st.p, &s_p(1, &st.p)).unwrap();
        assert!(close >= 1);

        // NO input stays far: dist > s_inf
        let st = direct_sum_transform(&rank1_no_inf(), 1, &half, &RankRatio::Finite(1.0)).unwrap();
        let (d, _) = dist(&st.basis, &st.target, &st.p).unwrap();
        assert_eq!(
            d.cmp_exact(&Magnitude::Sup(half)),
            std::cmp::Ordering::Greater
        );
    }

    #[test]
    fn direct_sum_finite_p_binary_count() {
        // Z^4-style: rank-1 YES instance blown up to n = 4 gives 2^4 binary
        // vectors exactly at radius s_p
        let inst = GapCvpInstance {
            p: p("2"),
            basis: Basis::new(RatMat::from_rows(vec![rv(&["2"])]).unwrap()).unwrap(),
            target: rv(&["1"]),
        };
        let alpha = parse_rat("6/5").unwrap();
        let st = direct_sum_transform(&inst, 4, &alpha, &RankRatio::Finite(4.0)).unwrap();
        assert_eq!(st.meta.t_count, 8);
        assert_eq!(st.meta.s_bound, SBound::Exact(0));
        let close = count_binary_close(&st.basis, &st.target, &st.p, &s_p(4, &st.p)).unwrap();
        assert_eq!(close, 16);
        // lambda1 = 1 >= r
        let (l1, _) = lambda1(&st.basis, &st.p).unwrap();
        assert_eq!(
            st.r.cmp_exact(&l1),
            std::cmp::Ordering::Less,
            "r = {} vs lambda1 = {}",
            st.r.approx(),
            l1.approx()
        );
    }

    #[test]
    fn sparsify_step_is_deterministic_and_sound() {
        let inst = GapCvpInstance {
            p: p("2"),
            basis: Basis::new(RatMat::from_rows(vec![rv(&["2"])]).unwrap()).unwrap(),
            target: rv(&["1"]),
        };
        let alpha = parse_rat("6/5").unwrap();
        let st = direct_sum_transform(&inst, 4, &alpha, &RankRatio::Finite(4.0)).unwrap();
        let (c1, d1) = sparsify_step(&st, PrimePolicy::Smallest, 7).unwrap();
        let (c2, d2) = sparsify_step(&st, PrimePolicy::Smallest, 7).unwrap();
        assert_eq!(d1, d2);
        assert_eq!(c1.basis.matrix(), c2.basis.matrix());
        assert_eq!(c1.target, c2.target);
        assert_eq!(d1.q, 83); // smallest prime in [80, 160]

        // NO-preservation: distances never shrink under sparsify + shift
        let no = GapCvpInstance {
            p: p("2"),
            basis: Basis::new(RatMat::from_rows(vec![rv(&["3"])]).unwrap()).unwrap(),
            target: rv(&["3/2"]),
        };
        let st = direct_sum_transform(&no, 4, &alpha, &RankRatio::Finite(4.0)).unwrap();
        let (d0, _) = dist(&st.basis, &st.target, &st.p).unwrap();
        for seed in 0..5 {
            let (cand, _) = sparsify_step(&st, PrimePolicy::Smallest, seed).unwrap();
            let (d1, _) = dist(&cand.basis, &cand.target, &cand.p).unwrap();
            assert!(d1.cmp_exact(&d0) != std::cmp::Ordering::Less);
        }
    }

    #[test]
    fn sparsify_step_enforces_t_over_s() {
        // alpha = 1 pushes r past 1, so S = 8 and T = 8 < 10S
        let inst = GapCvpInstance {
            p: p("2"),
            basis: Basis::new(RatMat::from_rows(vec![rv(&["2"])]).unwrap()).unwrap(),
            target: rv(&["1"]),
        };
        let alpha = parse_rat("1").unwrap();
        let st = direct_sum_transform(&inst, 4, &alpha, &RankRatio::Finite(4.0)).unwrap();
        assert!(matches!(
            sparsify_step(&st, PrimePolicy::Smallest, 0),
            Err(Error::Constraint(_))
        ));
    }

    #[test]
    fn pad_step_sets_lambda1_to_min() {
        let p2 = p("2");
        let one = parse_rat("1").unwrap();
        // Z^2 with r = 1: lambda1 stays 1
        let cand = BddCandidate {
            p: p2.clone(),
            basis: integer_lattice(2),
            r: Magnitude::from_radius(&one, &p2).unwrap(),
            target: rv(&["0", "0"]),
            alpha: parse_rat("1").unwrap(),
        };
        let (bdd, pad) = pad_step(&cand).unwrap();
        assert_eq!(pad, one);
        assert_eq!(bdd.basis.rank(), 3);
        let (l1, _) = lambda1(&bdd.basis, &p2).unwrap();
        assert_eq!(
            l1.cmp_exact(&Magnitude::from_radius(&one, &p2).unwrap()),
            std::cmp::Ordering::Equal
        );

        // (2Z)^2 (lambda1 = 2) with r = 1: the pad vector becomes shortest
        let two = RatMat::from_rows(vec![rv(&["2", "0"]), rv(&["0", "2"])]).unwrap();
        let cand = BddCandidate {
            p: p2.clone(),
            basis: Basis::new(two).unwrap(),
            r: Magnitude::from_radius(&one, &p2).unwrap(),
            target: rv(&["0", "0"]),
            alpha: parse_rat("1").unwrap(),
        };
        let (bdd, _) = pad_step(&cand).unwrap();
        let (l1, w) = lambda1(&bdd.basis, &p2).unwrap();
        assert_eq!(
            l1.cmp_exact(&Magnitude::from_radius(&one, &p2).unwrap()),
            std::cmp::Ordering::Equal
        );
        // sign of the witness is arbitrary
        assert_eq!(num_traits::Signed::abs(&w.point[2]), one);
    }

    #[test]
    fn pad_step_snaps_irrational_radius_consistently() {
        // r = sqrt(5)/2 is irrational: pad entry must be rational, <= r,
        // and the adjusted alpha must exactly compensate
        let p2 = p("2");
        let r = s_p(4, &p2); // (1/2) * 5^(1/2)
        let alpha = parse_rat("6/5").unwrap();
        let cand = BddCandidate {
            p: p2.clone(),
            basis: integer_lattice(4),
            r: r.clone(),
            target: rv(&["1/2", "1/2", "1/2", "1/2"]),
            alpha: alpha.clone(),
        };
        let (bdd, pad) = pad_step(&cand).unwrap();
        let pad_mag = Magnitude::from_radius(&pad, &p2).unwrap();
        assert!(pad_mag.cmp_exact(&r) != std::cmp::Ordering::Greater);
        // alpha_out * pad >= alpha * r, both sides exact
        let lhs = Magnitude::from_radius(&(&bdd.alpha * &pad), &p2).unwrap();
        assert!(lhs.cmp_exact(&r.scale_rational(&alpha)) != std::cmp::Ordering::Less);
        // and the adjustment is tiny
        let rel = rat_to_f64(&bdd.alpha) / rat_to_f64(&alpha) - 1.0;
        assert!(rel.abs() < 1e-9, "alpha blew up by {rel}");
    }

    #[test]
    fn normalize_threshold_three_four_five() {
        let p2 = p("2");
        let b = integer_lattice(2);
        let t = rv(&["1/3", "0"]);
        let r = Magnitude::from_radius(&parse_rat("3").unwrap(), &p2).unwrap();
        let rs = Magnitude::from_radius(&parse_rat("5").unwrap(), &p2).unwrap();
        let (b2, t2) = normalize_threshold(&b, &t, &r, &rs, &p2).unwrap();
        assert_eq!(b2.dim(), 3);
        assert_eq!(t2[2], parse_rat("4").unwrap());

        // r = r*: appended coordinate 0
        let (_, t3) = normalize_threshold(&b, &t, &r, &r, &p2).unwrap();
        assert!(t3[2].is_zero());

        // r > r* rejected
        assert!(normalize_threshold(&b, &t, &rs, &r, &p2).is_err());
        // irrational appended coordinate rejected
        let r2 = Magnitude::from_radius(&parse_rat("1").unwrap(), &p2).unwrap();
        let rs2 = Magnitude::from_radius(&parse_rat("2").unwrap(), &p2).unwrap();
        assert!(matches!(
            normalize_threshold(&b, &t, &r2, &rs2, &p2),
            Err(Error::Constraint(_))
        ));
    }

    #[test]
    fn normalize_threshold_preserves_answers() {
        let p2 = p("2");
        let b = integer_lattice(2);
        let r = Magnitude::from_radius(&parse_rat("3").unwrap(), &p2).unwrap();
        let rs = Magnitude::from_radius(&parse_rat("5").unwrap(), &p2).unwrap();
        for t in [rv(&["1/2", "1/2"]), rv(&["7/2", "0"]), rv(&["0", "0"])] {
            let (d0, _) = dist(&b, &t, &p2).unwrap();
            let yes_before = d0.cmp_exact(&r) != std::cmp::Ordering::Greater;
            let (b2, t2) = normalize_threshold(&b, &t, &r, &rs, &p2).unwrap();
            let (d1, _) = dist(&b2, &t2, &p2).unwrap();
            let yes_after = d1.cmp_exact(&rs) != std::cmp::Ordering::Greater;
            assert_eq!(yes_before, yes_after);
        }
    }

    #[test]
    fn inf_pipeline_is_deterministic_and_correct() {
        let inst = rank1_yes_inf();
        let params = inf_params();
        let (bdd1, tr1) = full_pipeline(&inst, &params).unwrap();
        let mut params2 = params.clone();
        params2.seed = 999;
        let (bdd2, _) = full_pipeline(&inst, &params2).unwrap();
        assert_eq!(bdd1.basis.matrix(), bdd2.basis.matrix());
        assert_eq!(bdd1.target, bdd2.target);
        assert!(tr1.draw.is_none());
        assert_eq!(bdd1.basis.rank(), 2);

        // the output satisfies the BDD promise at alpha = 1/2
        let (l1, _) = lambda1(&bdd1.basis, &bdd1.p).unwrap();
        let (d, _) = dist(&bdd1.basis, &bdd1.target, &bdd1.p).unwrap();
        assert!(d.cmp_exact(&l1.scale_rational(&bdd1.alpha)) != std::cmp::Ordering::Greater);
    }

    #[test]
    fn finite_pipeline_rank_growth() {
        let inst = GapCvpInstance {
            p: p("2"),
            basis: Basis::new(RatMat::from_rows(vec![rv(&["2"])]).unwrap()).unwrap(),
            target: rv(&["1"]),
        };
        let params = ReductionParams {
            p: p("2"),
            c: RankRatio::Finite(4.0),
            // clears alpha*_{2,4} ~ 1.3034 and keeps r < 1 (so S = 0)
            alpha: parse_rat("27/20").unwrap(),
            policy: PrimePolicy::Smallest,
            seed: 3,
        };
        let (bdd, tr) = full_pipeline(&inst, &params).unwrap();
        assert_eq!(tr.n, 4);
        assert_eq!(bdd.basis.rank(), 5);
        assert!(tr.draw.is_some());
    }

    #[test]
    fn pipeline_rejects_bad_alpha() {
        let inst = GapCvpInstance {
            p: p("2"),
            basis: Basis::new(RatMat::from_rows(vec![rv(&["2"])]).unwrap()).unwrap(),
            target: rv(&["1"]),
        };
        let params = ReductionParams {
            p: p("2"),
            c: RankRatio::Finite(2.0),
            alpha: parse_rat("1/2").unwrap(), // below alpha*
            policy: PrimePolicy::Smallest,
            seed: 0,
        };
        assert!(matches!(full_pipeline(&inst, &params), Err(Error::Constraint(_))));
    }

    #[test]
    fn decide_cvp_yes_and_no() {
        use crate::oracles::brute_cvp;
        let solver = |bdd: &BddInstance| {
            let (_, v) = brute_cvp(&bdd.basis, &bdd.target, &bdd.p).unwrap();
            v.point
        };
        let params = inf_params();
        match decide_cvp(&rank1_yes_inf(), &params, solver, 3).unwrap() {
            Decision::Yes { .. } => {}
            other => panic!("expected YES, got {other:?}"),
        }
        assert_eq!(
            decide_cvp(&rank1_no_inf(), &params, solver, 3).unwrap(),
            Decision::NoOrUnlucky
        );
        // adversarial garbage solver never makes a NO into a YES
        let garbage = |bdd: &BddInstance| vec![parse_rat("1/3").unwrap(); bdd.basis.dim()];
        assert_eq!(
            decide_cvp(&rank1_no_inf(), &params, garbage, 5).unwrap(),
            Decision::NoOrUnlucky
        );
    }
}
