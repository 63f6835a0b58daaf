//! Exact ℓp lattice point enumeration, counting, minimum distance, and
//! closest vectors.
//!
//! Candidates are generated by Fincke–Pohst recursion under an ℓ2
//! ellipsoid whose radius covers the requested ℓp ball (inflated by the
//! norm-equivalence factor), then filtered by exact ℓp comparison. Floats
//! appear only in the over-approximating candidate bounds; membership is
//! always decided exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::matrix::{Basis, IntMat, RatMat};
use crate::norm::{norm_p, Magnitude, NormOrder};
use crate::rat::{rat_from_f64, rat_to_f64, round_rat};
use crate::{Error, Result};

/// Whether the ball boundary is included (`N_p`) or excluded (`N°_p`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Closed,
    Open,
}

/// A counting/enumeration query: points of the lattice within `radius` of
/// `center` in the ℓp norm.
#[derive(Debug, Clone)]
pub struct BallQuery {
    pub p: NormOrder,
    pub radius: Magnitude,
    pub center: Vec<BigRational>,
    pub boundary: Boundary,
    /// Drop the zero lattice vector from the results (for `N°_p(L \ {0}, ...)`).
    pub exclude_zero: bool,
}

impl BallQuery {
    pub fn closed(p: NormOrder, radius: Magnitude, center: Vec<BigRational>) -> Self {
        BallQuery {
            p,
            radius,
            center,
            boundary: Boundary::Closed,
            exclude_zero: false,
        }
    }

    pub fn origin_closed(p: NormOrder, radius: Magnitude, dim: usize) -> Self {
        Self::closed(p, radius, vec![BigRational::zero(); dim])
    }
}

/// An enumerated lattice point together with its coefficient vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePoint {
    pub coeffs: Vec<BigInt>,
    pub point: Vec<BigRational>,
}

/// Exact `L D L^t` factorization of a positive-definite rational matrix.
fn ldl(g: &RatMat) -> (RatMat, Vec<BigRational>) {
    let n = g.rows();
    let mut l = RatMat::identity(n);
    let mut d = vec![BigRational::zero(); n];
    for i in 0..n {
        let mut di = g.get(i, i).clone();
        for k in 0..i {
            di -= l.get(i, k) * l.get(i, k) * &d[k];
        }
        d[i] = di;
        for j in i + 1..n {
            let mut v = g.get(j, i).clone();
            for k in 0..i {
                v -= l.get(j, k) * l.get(i, k) * &d[k];
            }
            l.set(j, i, v / &d[i]);
        }
    }
    (l, d)
}

/// Integers `x` with `(x - m)^2 <= s2`, as an inclusive range (possibly
/// empty). Float estimates give candidates; endpoints are fixed exactly.
fn int_range(m: &BigRational, s2: &BigRational) -> (BigInt, BigInt) {
    if s2.is_negative() {
        return (BigInt::from(1), BigInt::zero());
    }
    let mf = rat_to_f64(m);
    let sf = rat_to_f64(s2).max(0.0).sqrt();
    let mut lo = BigInt::from((mf - sf).floor() as i64 - 2);
    let mut hi = BigInt::from((mf + sf).ceil() as i64 + 2);
    let fits = |x: &BigInt| {
        let diff = BigRational::from_integer(x.clone()) - m;
        &diff * &diff <= *s2
    };
    while lo <= hi && !fits(&lo) {
        lo += 1;
    }
    while lo <= hi && !fits(&hi) {
        hi -= 1;
    }
    (lo, hi)
}

/// ℓ2-over-ℓp inflation factor for ambient dimension `d`: an upper bound
/// on `sup ||x||_2 / ||x||_p`.
fn norm_equivalence_factor(d: usize, p: &NormOrder) -> f64 {
    let d = d.max(1) as f64;
    match p {
        NormOrder::Infinity => d.sqrt(),
        NormOrder::Finite(_) => {
            let pf = p.as_f64();
            if pf <= 2.0 {
                1.0
            } else {
                d.powf(0.5 - 1.0 / pf)
            }
        }
    }
}

/// Exact LLL reduction (δ = 3/4) of the basis columns. Returns the
/// reduced basis and the unimodular `U` with `B_red = B · U`; sparsified
/// bases arrive badly conditioned and are unusable for enumeration
/// without this.
pub fn lll(basis: &Basis) -> Result<(Basis, IntMat)> {
    let n = basis.rank();
    let mut cols: Vec<Vec<BigRational>> = (0..n).map(|j| basis.matrix().column(j)).collect();
    let mut u = IntMat::identity(n);
    if n <= 1 {
        return Ok((basis.clone(), u));
    }
    let dot = |a: &[BigRational], b: &[BigRational]| -> BigRational {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    };
    // full Gram-Schmidt recompute; ranks here are single digits
    let gso = |cols: &[Vec<BigRational>]| -> (Vec<Vec<BigRational>>, Vec<Vec<BigRational>>) {
        let mut star: Vec<Vec<BigRational>> = Vec::with_capacity(cols.len());
        let mut mu = vec![vec![BigRational::zero(); cols.len()]; cols.len()];
        for i in 0..cols.len() {
            let mut v = cols[i].clone();
            for j in 0..i {
                let denom = dot(&star[j], &star[j]);
                mu[i][j] = dot(&cols[i], &star[j]) / &denom;
                for (vk, sk) in v.iter_mut().zip(star[j].iter()) {
                    *vk -= &mu[i][j] * sk;
                }
            }
            star.push(v);
        }
        (star, mu)
    };
    let col_addmul = |cols: &mut [Vec<BigRational>], u: &mut IntMat, k: usize, j: usize, r: &BigInt| {
        let rq = BigRational::from_integer(r.clone());
        for i in 0..cols[j].len() {
            let t = &cols[j][i] * &rq;
            cols[k][i] -= t;
        }
        for i in 0..n {
            let t = u.get(i, j) * r;
            let v = u.get(i, k) - t;
            u.set(i, k, v);
        }
    };
    let mut k = 1usize;
    while k < n {
        let (_, mu) = gso(&cols);
        for j in (0..k).rev() {
            let r = round_rat(&mu[k][j]);
            if !r.is_zero() {
                col_addmul(&mut cols, &mut u, k, j, &r);
            }
        }
        let (star, mu) = gso(&cols);
        let bk = dot(&star[k], &star[k]);
        let bk1 = dot(&star[k - 1], &star[k - 1]);
        let delta = BigRational::new(BigInt::from(3), BigInt::from(4));
        if bk >= (delta - &mu[k][k - 1] * &mu[k][k - 1]) * bk1 {
            k += 1;
        } else {
            cols.swap(k, k - 1);
            for i in 0..n {
                let a = u.get(i, k).clone();
                let b = u.get(i, k - 1).clone();
                u.set(i, k, b);
                u.set(i, k - 1, a);
            }
            k = k.max(2) - 1;
        }
    }
    let d = basis.dim();
    let mut m = RatMat::zeros(d, n);
    for (j, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            m.set(i, j, v.clone());
        }
    }
    Ok((Basis::new(m)?, u))
}

fn map_coeffs(u: &IntMat, c: &[BigInt]) -> Vec<BigInt> {
    (0..c.len())
        .map(|i| (0..c.len()).map(|j| u.get(i, j) * &c[j]).sum())
        .collect()
}

/// Enumerates exactly the lattice points satisfying the ball query.
/// Coefficients refer to the basis as given; internally the basis is
/// LLL-reduced first so that badly conditioned inputs stay tractable.
pub fn enumerate(basis: &Basis, q: &BallQuery) -> Result<Vec<LatticePoint>> {
    let (red, u) = lll(basis)?;
    let mut out = enumerate_raw(&red, q)?;
    for pt in &mut out {
        pt.coeffs = map_coeffs(&u, &pt.coeffs);
    }
    out.sort_by(|a, b| a.coeffs.cmp(&b.coeffs));
    Ok(out)
}

fn enumerate_raw(basis: &Basis, q: &BallQuery) -> Result<Vec<LatticePoint>> {
    if q.center.len() != basis.dim() {
        return Err(Error::Dimension(
            "query center does not match basis ambient dimension".into(),
        ));
    }
    let r_upper = q.radius.upper_f64();
    if !r_upper.is_finite() {
        return Err(Error::Domain("infinite enumeration radius".into()));
    }
    let r2 = r_upper * norm_equivalence_factor(basis.dim(), &q.p) * (1.0 + 1e-9) + 1e-12;
    let r2sq = rat_from_f64(r2 * r2 * (1.0 + 1e-9))?;

    // Split ||Bc - t||^2 = (c - w)^t G (c - w) + rho with w = B^+ t.
    let w = basis.coeffs_projected(&q.center)?;
    let proj = basis.matrix().mul_vec(&w);
    let mut rho = BigRational::zero();
    for (a, b) in proj.iter().zip(q.center.iter()) {
        let diff = a - b;
        rho += &diff * &diff;
    }
    let mut out = Vec::new();
    if rho > r2sq {
        return Ok(out);
    }
    let budget = &r2sq - &rho;
    let (l, d) = ldl(basis.gram());
    let n = basis.rank();

    // Depth-first over coefficients c_{n-1}, ..., c_0.
    let mut coeffs = vec![BigInt::zero(); n];
    dfs(
        basis, q, &l, &d, &w, n, &budget, &mut coeffs, &mut out,
    );
    out.sort_by(|a, b| a.coeffs.cmp(&b.coeffs));
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    basis: &Basis,
    q: &BallQuery,
    l: &RatMat,
    d: &[BigRational],
    w: &[BigRational],
    level: usize,
    budget: &BigRational,
    coeffs: &mut Vec<BigInt>,
    out: &mut Vec<LatticePoint>,
) {
    if level == 0 {
        if q.exclude_zero && coeffs.iter().all(|c| c.is_zero()) {
            return;
        }
        let point = basis.point(coeffs);
        let diff: Vec<BigRational> = point
            .iter()
            .zip(q.center.iter())
            .map(|(a, b)| a - b)
            .collect();
        let nrm = norm_p(&diff, &q.p);
        let ord = nrm.cmp_exact(&q.radius);
        let inside = match q.boundary {
            Boundary::Closed => ord != std::cmp::Ordering::Greater,
            Boundary::Open => ord == std::cmp::Ordering::Less,
        };
        if inside {
            out.push(LatticePoint {
                coeffs: coeffs.clone(),
                point,
            });
        }
        return;
    }
    let i = level - 1;
    // m_i = w_i - sum_{j>i} L_{j,i} (c_j - w_j)
    let mut m = w[i].clone();
    for j in level..coeffs.len() {
        let xj = BigRational::from_integer(coeffs[j].clone()) - &w[j];
        m -= l.get(j, i) * xj;
    }
    let s2 = budget / &d[i];
    let (lo, hi) = int_range(&m, &s2);
    let mut c = lo;
    while c <= hi {
        let diff = BigRational::from_integer(c.clone()) - &m;
        let used = &d[i] * &diff * &diff;
        let rem = budget - &used;
        if !rem.is_negative() {
            coeffs[i] = c.clone();
            dfs(basis, q, l, d, w, i, &rem, coeffs, out);
        }
        c += 1;
    }
    coeffs[i] = BigInt::zero();
}

/// Number of lattice points satisfying the ball query.
pub fn count(basis: &Basis, q: &BallQuery) -> Result<usize> {
    Ok(enumerate(basis, q)?.len())
}

/// Minimum ℓp distance of the lattice, with a witness vector.
pub fn lambda1(basis: &Basis, p: &NormOrder) -> Result<(Magnitude, LatticePoint)> {
    let (red, u) = lll(basis)?;
    let mut radius: Option<Magnitude> = None;
    for j in 0..red.rank() {
        let nrm = norm_p(&red.matrix().column(j), p);
        match &radius {
            None => radius = Some(nrm),
            Some(r) => {
                if nrm.cmp_exact(r) == std::cmp::Ordering::Less {
                    radius = Some(nrm);
                }
            }
        }
    }
    let radius = radius.expect("basis has at least one column");
    let query = BallQuery {
        p: p.clone(),
        radius,
        center: vec![BigRational::zero(); basis.dim()],
        boundary: Boundary::Closed,
        exclude_zero: true,
    };
    let pts = enumerate_raw(&red, &query)?;
    let best = pts
        .into_iter()
        .map(|pt| (norm_p(&pt.point, p), pt))
        .min_by(|a, b| a.0.cmp_exact(&b.0))
        .expect("shortest basis column is inside its own ball");
    let (m, pt) = best;
    Ok((
        m,
        LatticePoint { coeffs: map_coeffs(&u, &pt.coeffs), point: pt.point },
    ))
}

/// Checks `λ1^(p)(L) >= r` without computing λ1 itself: true iff the open
/// ball of radius `r` contains no nonzero lattice vector.
pub fn min_dist_at_least(basis: &Basis, p: &NormOrder, r: &Magnitude) -> Result<bool> {
    let query = BallQuery {
        p: p.clone(),
        radius: r.clone(),
        center: vec![BigRational::zero(); basis.dim()],
        boundary: Boundary::Open,
        exclude_zero: true,
    };
    Ok(count(basis, &query)? == 0)
}

/// Exact closest lattice vector to `t` in the ℓp norm.
pub fn dist(
    basis: &Basis,
    t: &[BigRational],
    p: &NormOrder,
) -> Result<(Magnitude, LatticePoint)> {
    if t.len() != basis.dim() {
        return Err(Error::Dimension("target/basis dimension mismatch".into()));
    }
    // Babai rounding on the reduced basis gives a sane initial radius
    let (red, u) = lll(basis)?;
    let w = red.coeffs_projected(t)?;
    let c0: Vec<BigInt> = w.iter().map(round_rat).collect();
    let v0 = red.point(&c0);
    let diff: Vec<BigRational> = v0.iter().zip(t.iter()).map(|(a, b)| a - b).collect();
    let r0 = norm_p(&diff, p);
    if r0.is_zero() {
        return Ok((
            r0,
            LatticePoint { coeffs: map_coeffs(&u, &c0), point: v0 },
        ));
    }
    let query = BallQuery::closed(p.clone(), r0, t.to_vec());
    let pts = enumerate_raw(&red, &query)?;
    let best = pts
        .into_iter()
        .map(|pt| {
            let diff: Vec<BigRational> =
                pt.point.iter().zip(t.iter()).map(|(a, b)| a - b).collect();
            (norm_p(&diff, p), pt)
        })
        .min_by(|a, b| a.0.cmp_exact(&b.0))
        .expect("rounding candidate is inside the search ball");
    let (m, pt) = best;
    Ok((
        m,
        LatticePoint { coeffs: map_coeffs(&u, &pt.coeffs), point: pt.point },
    ))
}

/// Whether some lattice vector lies within `r` of `t` (closed ball).
pub fn dist_at_most(
    basis: &Basis,
    t: &[BigRational],
    p: &NormOrder,
    r: &Magnitude,
) -> Result<bool> {
    let query = BallQuery::closed(p.clone(), r.clone(), t.to_vec());
    // any single point suffices, but balls at desk scale are tiny
    Ok(count(basis, &query)? > 0)
}

/// `|{x ∈ {0,1}^n : ||Bx - t||_p <= s}|` by exhaustive binary enumeration.
pub fn count_binary_close(
    basis: &Basis,
    t: &[BigRational],
    p: &NormOrder,
    s: &Magnitude,
) -> Result<usize> {
    let n = basis.rank();
    if n > 24 {
        return Err(Error::Domain(format!(
            "binary enumeration over 2^{n} coefficients refused"
        )));
    }
    if t.len() != basis.dim() {
        return Err(Error::Dimension("target/basis dimension mismatch".into()));
    }
    let mut count = 0usize;
    for mask in 0u64..(1u64 << n) {
        let coeffs: Vec<BigInt> = (0..n)
            .map(|i| BigInt::from((mask >> i) & 1))
            .collect();
        let v = basis.point(&coeffs);
        let diff: Vec<BigRational> = v.iter().zip(t.iter()).map(|(a, b)| a - b).collect();
        if norm_p(&diff, p).cmp_exact(s) != std::cmp::Ordering::Greater {
            count += 1;
        }
    }
    Ok(count)
}

/// The integer lattice `Z^n` as a basis.
pub fn integer_lattice(n: usize) -> Basis {
    Basis::new(RatMat::identity(n)).expect("identity is a basis")
}
