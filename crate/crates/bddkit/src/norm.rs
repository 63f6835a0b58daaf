//! ℓp norm orders and exactly comparable norm magnitudes.
//!
//! Promise checks in the reduction pipeline must be decided exactly: YES
//! witnesses sit exactly on the ball boundary (binary vectors at distance
//! `s_p` from the all-halves target), so ties cannot be left to floating
//! point. For finite rational `p = a/b` we compare p-th powers of norms.
//! The p-th power of a rational vector's norm is a finite sum of terms
//! `coeff * k^(1/b)` with integer radicands, which we keep in a canonical
//! form (radicands b-th-power-free). Equality is then a syntactic check,
//! and strict comparisons resolve by interval refinement: b-th roots of
//! distinct b-th-power-free integers are linearly independent over Q, so
//! a nonzero sum has a sign that a sufficiently fine enclosure exposes.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rat::rat_to_f64;
use crate::{Error, Result};

/// The ℓp parameter: a finite rational `p >= 1` or infinity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NormOrder {
    Finite(Ratio<u64>),
    Infinity,
}

impl NormOrder {
    pub fn finite(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num < den {
            return Err(Error::InvalidNorm(format!("{num}/{den} is not a p >= 1")));
        }
        Ok(NormOrder::Finite(Ratio::new(num, den)))
    }

    /// Parses `"inf"`, an integer, a fraction, or a short decimal.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") || s == "∞" {
            return Ok(NormOrder::Infinity);
        }
        let r = crate::rat::parse_rat(s).map_err(|_| Error::InvalidNorm(s.to_string()))?;
        let num = r
            .numer()
            .to_u64()
            .ok_or_else(|| Error::InvalidNorm(s.to_string()))?;
        let den = r
            .denom()
            .to_u64()
            .ok_or_else(|| Error::InvalidNorm(s.to_string()))?;
        NormOrder::finite(num, den)
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, NormOrder::Infinity)
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            NormOrder::Finite(r) => *r.numer() as f64 / *r.denom() as f64,
            NormOrder::Infinity => f64::INFINITY,
        }
    }

    /// Numerator/denominator of a finite p.
    pub fn num_den(&self) -> Result<(u64, u64)> {
        match self {
            NormOrder::Finite(r) => Ok((*r.numer(), *r.denom())),
            NormOrder::Infinity => Err(Error::InvalidNorm(
                "operation requires finite p".to_string(),
            )),
        }
    }
}

impl std::fmt::Display for NormOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NormOrder::Infinity => write!(f, "inf"),
            NormOrder::Finite(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
        }
    }
}

/// Canonical sum `Σ coeff_k * k^(1/root)` over b-th-power-free integer
/// radicands `k >= 1` with nonzero rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadicalSum {
    root: u32,
    terms: BTreeMap<BigUint, BigRational>,
}

/// Splits `k = m^b * rad` with `rad` b-th-power-free, by trial division.
fn powfree_decompose(k: &BigUint, b: u32) -> (BigUint, BigUint) {
    if b <= 1 {
        return (k.clone(), BigUint::one());
    }
    let mut rem = k.clone();
    let mut m = BigUint::one();
    let mut rad = BigUint::one();
    let mut d = BigUint::from(2u32);
    while &d * &d <= rem {
        if (&rem % &d).is_zero() {
            let mut e = 0u32;
            while (&rem % &d).is_zero() {
                rem /= &d;
                e += 1;
            }
            m *= d.pow(e / b);
            rad *= d.pow(e % b);
        }
        d += 1u32;
    }
    if rem > BigUint::one() {
        rad *= rem;
    }
    (m, rad)
}

impl RadicalSum {
    pub fn zero(root: u32) -> Self {
        RadicalSum {
            root: root.max(1),
            terms: BTreeMap::new(),
        }
    }

    pub fn from_rational(q: BigRational, root: u32) -> Self {
        let mut s = RadicalSum::zero(root);
        s.add_term(q, BigUint::one());
        s
    }

    /// Adds `coeff * raw_radicand^(1/root)`, reducing to canonical form.
    pub fn add_radical(&mut self, coeff: BigRational, raw_radicand: BigUint) {
        if coeff.is_zero() {
            return;
        }
        if raw_radicand.is_zero() {
            return; // 0^(1/b) = 0
        }
        let (m, rad) = powfree_decompose(&raw_radicand, self.root);
        self.add_term(coeff * BigRational::from_integer(BigInt::from(m)), rad);
    }

    fn add_term(&mut self, coeff: BigRational, radicand: BigUint) {
        if coeff.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry(radicand.clone())
            .or_insert_with(BigRational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&radicand);
        }
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(q)` iff the sum is exactly rational.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (rad, coeff) = self.terms.iter().next().unwrap();
                if rad.is_one() {
                    Some(coeff.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn add(&self, other: &RadicalSum) -> RadicalSum {
        assert_eq!(self.root, other.root, "radical root mismatch");
        let mut out = self.clone();
        for (rad, coeff) in &other.terms {
            out.add_term(coeff.clone(), rad.clone());
        }
        out
    }

    pub fn sub(&self, other: &RadicalSum) -> RadicalSum {
        assert_eq!(self.root, other.root, "radical root mismatch");
        let mut out = self.clone();
        for (rad, coeff) in &other.terms {
            out.add_term(-coeff.clone(), rad.clone());
        }
        out
    }

    pub fn mul(&self, other: &RadicalSum) -> RadicalSum {
        assert_eq!(self.root, other.root, "radical root mismatch");
        let mut out = RadicalSum::zero(self.root);
        for (r1, c1) in &self.terms {
            for (r2, c2) in &other.terms {
                out.add_radical(c1 * c2, r1 * r2);
            }
        }
        out
    }

    pub fn scale(&self, q: &BigRational) -> RadicalSum {
        let mut out = RadicalSum::zero(self.root);
        for (rad, coeff) in &self.terms {
            out.add_term(coeff * q, rad.clone());
        }
        out
    }

    /// Rational enclosure `[lo, hi]` of the sum, with roots evaluated to
    /// `bits` fractional bits.
    pub fn eval_interval(&self, bits: u32) -> (BigRational, BigRational) {
        let mut lo = BigRational::zero();
        let mut hi = BigRational::zero();
        let scale = BigInt::one() << bits;
        for (rad, coeff) in &self.terms {
            if rad.is_one() {
                lo += coeff;
                hi += coeff;
                continue;
            }
            // rad^(1/b) ∈ [r, r+1] / 2^bits
            let shifted = rad << (self.root as usize * bits as usize);
            let r = shifted.nth_root(self.root);
            let root_lo = BigRational::new(BigInt::from(r.clone()), scale.clone());
            let root_hi = BigRational::new(BigInt::from(r + BigUint::one()), scale.clone());
            if coeff.is_negative() {
                lo += coeff * &root_hi;
                hi += coeff * &root_lo;
            } else {
                lo += coeff * &root_lo;
                hi += coeff * &root_hi;
            }
        }
        (lo, hi)
    }

    /// Exact sign of the sum: -1, 0, or +1.
    pub fn sign(&self) -> i32 {
        if self.terms.is_empty() {
            return 0;
        }
        if self.terms.len() == 1 {
            let (rad, coeff) = self.terms.iter().next().unwrap();
            debug_assert!(!rad.is_zero());
            return if coeff.is_negative() { -1 } else { 1 };
        }
        // Nonzero by linear independence of roots of distinct power-free
        // radicands; refine until the enclosure excludes zero.
        let mut bits = 64;
        loop {
            let (lo, hi) = self.eval_interval(bits);
            if lo.is_positive() {
                return 1;
            }
            if hi.is_negative() {
                return -1;
            }
            bits *= 2;
            assert!(bits <= 1 << 16, "radical sign refinement failed to resolve");
        }
    }

    pub fn cmp_exact(&self, other: &RadicalSum) -> Ordering {
        match self.sub(other).sign() {
            0 => Ordering::Equal,
            s if s < 0 => Ordering::Less,
            _ => Ordering::Greater,
        }
    }

    pub fn to_f64(&self) -> f64 {
        let (lo, hi) = self.eval_interval(80);
        (rat_to_f64(&lo) + rat_to_f64(&hi)) / 2.0
    }
}

/// `q^(a/root)` for rational `q >= 0` (or `q > 0` when `a < 0`), as a
/// single-term radical sum with root index `root`.
pub fn rational_pow(q: &BigRational, a: i64, root: u32) -> RadicalSum {
    assert!(!q.is_negative(), "rational_pow needs q >= 0");
    let b = root.max(1);
    if a == 0 {
        return RadicalSum::from_rational(BigRational::one(), b);
    }
    if q.is_zero() {
        assert!(a > 0, "0 to a negative power");
        return RadicalSum::zero(b);
    }
    let q = if a < 0 { q.recip() } else { q.clone() };
    let a = a.unsigned_abs() as u32;
    let u = q.numer().magnitude().clone();
    let v = q.denom().magnitude().clone();
    // (u/v)^(a/b) = (u^a * v^((b - a mod b) mod b))^(1/b) / v^ceil(a/b)
    let s = a % b;
    let extra = (b - s) % b;
    let radicand = u.pow(a) * v.pow(extra);
    let denom = v.pow(a.div_ceil(b));
    let coeff = BigRational::new(BigInt::one(), BigInt::from(denom));
    let mut out = RadicalSum::zero(b);
    out.add_radical(coeff, radicand);
    out
}

/// An exactly comparable norm magnitude.
///
/// For `p = ∞` this is the max coordinate; for finite `p` it carries the
/// p-th power of the norm. Comparisons are only defined between magnitudes
/// of the same norm order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Magnitude {
    Sup(BigRational),
    PthPower { p: Ratio<u64>, value: RadicalSum },
}

impl Magnitude {
    pub fn zero(p: &NormOrder) -> Self {
        match p {
            NormOrder::Infinity => Magnitude::Sup(BigRational::zero()),
            NormOrder::Finite(r) => Magnitude::PthPower {
                p: *r,
                value: RadicalSum::zero(*r.denom() as u32),
            },
        }
    }

    /// Magnitude of a rational radius `r >= 0`.
    pub fn from_radius(r: &BigRational, p: &NormOrder) -> Result<Self> {
        if r.is_negative() {
            return Err(Error::Domain("negative radius".into()));
        }
        Ok(match p {
            NormOrder::Infinity => Magnitude::Sup(r.clone()),
            NormOrder::Finite(pr) => Magnitude::PthPower {
                p: *pr,
                value: rational_pow(r, *pr.numer() as i64, *pr.denom() as u32),
            },
        })
    }

    /// Magnitude whose p-th power is the given rational (finite p only).
    pub fn from_pth_power(q: &BigRational, p: &NormOrder) -> Result<Self> {
        if q.is_negative() {
            return Err(Error::Domain("negative p-th power".into()));
        }
        match p {
            NormOrder::Infinity => Err(Error::InvalidNorm(
                "pth_power radius is only defined for finite p".into(),
            )),
            NormOrder::Finite(pr) => Ok(Magnitude::PthPower {
                p: *pr,
                value: RadicalSum::from_rational(q.clone(), *pr.denom() as u32),
            }),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Magnitude::Sup(r) => r.is_zero(),
            Magnitude::PthPower { value, .. } => value.is_zero(),
        }
    }

    pub fn cmp_exact(&self, other: &Magnitude) -> Ordering {
        match (self, other) {
            (Magnitude::Sup(a), Magnitude::Sup(b)) => a.cmp(b),
            (
                Magnitude::PthPower { p: pa, value: va },
                Magnitude::PthPower { p: pb, value: vb },
            ) => {
                assert_eq!(pa, pb, "comparing magnitudes of different norm orders");
                va.cmp_exact(vb)
            }
            _ => panic!("comparing sup-norm and p-norm magnitudes"),
        }
    }

    /// Product of two magnitudes of the same norm order.
    pub fn mul(&self, other: &Magnitude) -> Magnitude {
        match (self, other) {
            (Magnitude::Sup(a), Magnitude::Sup(b)) => Magnitude::Sup(a * b),
            (
                Magnitude::PthPower { p: pa, value: va },
                Magnitude::PthPower { p: pb, value: vb },
            ) => {
                assert_eq!(pa, pb, "multiplying magnitudes of different norm orders");
                Magnitude::PthPower {
                    p: *pa,
                    value: va.mul(vb),
                }
            }
            _ => panic!("multiplying sup-norm and p-norm magnitudes"),
        }
    }

    /// Scales the underlying norm by a rational factor `c >= 0`.
    pub fn scale_rational(&self, c: &BigRational) -> Magnitude {
        assert!(!c.is_negative());
        match self {
            Magnitude::Sup(r) => Magnitude::Sup(r * c),
            Magnitude::PthPower { p, value } => {
                let factor = rational_pow(c, *p.numer() as i64, *p.denom() as u32);
                Magnitude::PthPower {
                    p: *p,
                    value: value.mul(&factor),
                }
            }
        }
    }

    /// Approximate norm value as `f64`.
    pub fn approx(&self) -> f64 {
        match self {
            Magnitude::Sup(r) => rat_to_f64(r),
            Magnitude::PthPower { p, value } => {
                let pf = *p.numer() as f64 / *p.denom() as f64;
                value.to_f64().max(0.0).powf(1.0 / pf)
            }
        }
    }

    /// An upper bound on the norm value, safe for candidate-generation radii
    /// (overestimates; exact filtering decides membership).
    pub fn upper_f64(&self) -> f64 {
        match self {
            Magnitude::Sup(r) => rat_to_f64(r) * (1.0 + 1e-9) + 1e-12,
            Magnitude::PthPower { p, value } => {
                let (_, hi) = value.eval_interval(96);
                let pf = *p.numer() as f64 / *p.denom() as f64;
                let v = (rat_to_f64(&hi) * (1.0 + 1e-9)).max(0.0);
                v.powf(1.0 / pf) * (1.0 + 1e-9) + 1e-12
            }
        }
    }

    /// The p-th power, when it is exactly rational.
    pub fn pth_power_rational(&self) -> Option<BigRational> {
        match self {
            Magnitude::Sup(_) => None,
            Magnitude::PthPower { value, .. } => value.as_rational(),
        }
    }

    /// A rational `r'` with `|r'|_p <= self`, as close as f64 precision
    /// allows. Exact when the magnitude itself is rational.
    pub fn rational_below(&self, p: &NormOrder) -> BigRational {
        if let Magnitude::Sup(r) = self {
            return r.clone();
        }
        if let Magnitude::PthPower { p: pr, value } = self {
            // exact p-th root if the value happens to be a rational power
            if let Some(q) = value.as_rational() {
                let root = rational_pow(&q, *pr.denom() as i64, *pr.numer() as u32);
                if let Some(exact) = root.as_rational() {
                    return exact;
                }
            }
        }
        let mut x = self.approx();
        loop {
            let cand = BigRational::from_float(x).expect("finite approx");
            if cand.is_negative() {
                return BigRational::zero();
            }
            let m = Magnitude::from_radius(&cand, p).expect("non-negative radius");
            if m.cmp_exact(self) != Ordering::Greater {
                return cand;
            }
            x *= 1.0 - 1e-12;
            x -= f64::MIN_POSITIVE;
        }
    }
}

/// Exact ℓp norm magnitude of a rational vector.
pub fn norm_p(coords: &[BigRational], p: &NormOrder) -> Magnitude {
    match p {
        NormOrder::Infinity => {
            let mut best = BigRational::zero();
            for c in coords {
                let a = c.abs();
                if a > best {
                    best = a;
                }
            }
            Magnitude::Sup(best)
        }
        NormOrder::Finite(pr) => {
            let (a, b) = (*pr.numer() as i64, *pr.denom() as u32);
            let mut sum = RadicalSum::zero(b);
            for c in coords {
                sum = sum.add(&rational_pow(&c.abs(), a, b));
            }
            Magnitude::PthPower { p: *pr, value: sum }
        }
    }
}
