//! Random sparsification of an integer-coefficient sublattice:
//! `L' = {v ∈ L : ⟨z, B⁺v⟩ ≡ 0 mod q}` with an explicit basis, plus the
//! lattice-vector target shift `t' = t + Bc`.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use crate::matrix::{Basis, IntMat};
use crate::{Error, Result};

/// How the sparsification prime is picked from `[10T, 20T]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimePolicy {
    Smallest,
    Random,
}

impl PrimePolicy {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "smallest" => Ok(PrimePolicy::Smallest),
            "random" => Ok(PrimePolicy::Random),
            other => Err(Error::Parse(format!("unknown prime policy {other:?}"))),
        }
    }
}

/// The randomness consumed by one sparsification attempt.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SparsifierDraw {
    pub q: u64,
    pub z: Vec<u64>,
    pub c: Vec<u64>,
    pub seed: u64,
}

/// Deterministic Miller–Rabin; this base set decides primality correctly
/// for all n below 3.3×10^14, far past any desk-scale q.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        b %= n;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17] {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Picks a prime `q ∈ [10T, 20T]` (Bertrand guarantees one exists).
pub fn choose_prime(t: u64, policy: PrimePolicy, rng: &mut impl Rng) -> Result<u64> {
    if t == 0 {
        return Err(Error::Domain("choose_prime needs T >= 1".into()));
    }
    let lo = 10 * t;
    let hi = 20 * t;
    match policy {
        PrimePolicy::Smallest => (lo..=hi)
            .find(|&q| is_prime(q))
            .ok_or_else(|| Error::Domain(format!("no prime in [{lo}, {hi}]"))),
        PrimePolicy::Random => {
            let primes: Vec<u64> = (lo..=hi).filter(|&q| is_prime(q)).collect();
            if primes.is_empty() {
                return Err(Error::Domain(format!("no prime in [{lo}, {hi}]")));
            }
            Ok(primes[rng.gen_range(0..primes.len())])
        }
    }
}

/// Samples `z, c` uniformly and independently over `Z_q^n`, recording the
/// seed of the stream that produced them.
pub fn sample_draw(q: u64, n: usize, seed: u64, rng: &mut impl Rng) -> SparsifierDraw {
    let z = (0..n).map(|_| rng.gen_range(0..q)).collect();
    let c = (0..n).map(|_| rng.gen_range(0..q)).collect();
    SparsifierDraw { q, z, c, seed }
}

fn mod_inv(a: u64, q: u64) -> u64 {
    // q prime, a != 0 mod q: Fermat
    let mut acc = 1u128;
    let mut b = a as u128 % q as u128;
    let mut e = q - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % q as u128;
        }
        b = b * b % q as u128;
        e >>= 1;
    }
    acc as u64
}

/// Basis of the coefficient sublattice `Λ_z = {x ∈ Z^n : ⟨z,x⟩ ≡ 0 mod q}`:
/// the identity when z ≡ 0; otherwise, with pivot i the first index where
/// z_i ≠ 0, the columns `q·e_i` and `e_j − (z_j z_i^{-1} mod q)·e_i` for
/// j ≠ i. Has |det| = q in the non-trivial case.
pub fn coefficient_sublattice(z: &[u64], q: u64) -> IntMat {
    let n = z.len();
    let Some(i) = z.iter().position(|&zi| zi % q != 0) else {
        return IntMat::identity(n);
    };
    let zi_inv = mod_inv(z[i] % q, q);
    let mut u = IntMat::zeros(n, n);
    u.set(i, i, BigInt::from(q));
    for j in 0..n {
        if j == i {
            continue;
        }
        u.set(j, j, BigInt::from(1));
        let m = (z[j] % q) as u128 * zi_inv as u128 % q as u128;
        u.set(i, j, -BigInt::from(m as u64));
    }
    u
}

/// `B' = B · coefficient_sublattice(z, q)`; generates exactly
/// `{v ∈ L(B) : ⟨z, coeffs(B,v)⟩ ≡ 0 mod q}`.
pub fn sparsify_basis(b: &Basis, draw: &SparsifierDraw) -> Result<Basis> {
    if draw.z.len() != b.rank() {
        return Err(Error::Dimension(format!(
            "draw has {} coordinates, basis rank {}",
            draw.z.len(),
            b.rank()
        )));
    }
    b.mul_int(&coefficient_sublattice(&draw.z, draw.q))
}

/// `t' = t + B·c`, a lattice-vector shift (distances to `L(B)` unchanged).
pub fn shift_target(t: &[BigRational], b: &Basis, draw: &SparsifierDraw) -> Result<Vec<BigRational>> {
    if t.len() != b.dim() || draw.c.len() != b.rank() {
        return Err(Error::Dimension("shift_target dimension mismatch".into()));
    }
    let c: Vec<BigInt> = draw.c.iter().map(|&ci| BigInt::from(ci)).collect();
    let bc = b.point(&c);
    Ok(t.iter().zip(&bc).map(|(a, b)| a + b).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::integer_lattice;
    use crate::matrix::hnf;
    use num_traits::{One, Zero};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn miller_rabin_agrees_with_trial_division() {
        let slow = |n: u64| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
        for n in 0..2000u64 {
            assert_eq!(is_prime(n), slow(n), "n={n}");
        }
        assert!(is_prime(3_037_000_493)); // large prime
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
    }

    #[test]
    fn smallest_prime_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(choose_prime(1, PrimePolicy::Smallest, &mut rng).unwrap(), 11);
        assert_eq!(choose_prime(10, PrimePolicy::Smallest, &mut rng).unwrap(), 101);
        for _ in 0..20 {
            let q = choose_prime(8, PrimePolicy::Random, &mut rng).unwrap();
            assert!((80..=160).contains(&q) && is_prime(q));
        }
    }

    #[test]
    fn draws_are_reproducible_and_in_range() {
        let seed = 42u64;
        let mut r1 = ChaCha8Rng::seed_from_u64(seed);
        let mut r2 = ChaCha8Rng::seed_from_u64(seed);
        let d1 = sample_draw(11, 5, seed, &mut r1);
        let d2 = sample_draw(11, 5, seed, &mut r2);
        assert_eq!(d1, d2);
        assert!(d1.z.iter().chain(&d1.c).all(|&x| x < 11));
    }

    #[test]
    fn draw_coordinates_look_uniform() {
        let q = 11u64;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts = vec![0u64; q as usize];
        let trials = 10_000u64;
        for s in 0..trials {
            let d = sample_draw(q, 3, s, &mut rng);
            for &zi in &d.z {
                counts[zi as usize] += 1;
            }
        }
        let n = (trials * 3) as f64;
        let p = 1.0 / q as f64;
        let sigma = (n * p * (1.0 - p)).sqrt();
        for (v, &cnt) in counts.iter().enumerate() {
            assert!(
                (cnt as f64 - n * p).abs() < 4.0 * sigma,
                "value {v} count {cnt} vs expected {}",
                n * p
            );
        }
    }

    #[test]
    fn coefficient_sublattice_examples() {
        // z ≡ 0 mod q: vacuous condition, identity
        assert_eq!(coefficient_sublattice(&[3, 6], 3), IntMat::identity(2));

        // z=(1,0), q=2: x_1 even
        let u = coefficient_sublattice(&[1, 0], 2);
        assert_eq!(hnf(&u).unwrap().det_abs(), BigInt::from(2));

        // z=(1,1), q=3: det 3 and membership of every column
        let z = [1u64, 1];
        let q = 3u64;
        let u = coefficient_sublattice(&z, q);
        assert_eq!(hnf(&u).unwrap().det_abs(), BigInt::from(3));
        for j in 0..2 {
            let dot: BigInt = u
                .column(j)
                .iter()
                .zip(&z)
                .map(|(x, &zi)| x * BigInt::from(zi))
                .sum();
            assert!((&dot % BigInt::from(q)).is_zero(), "column {j} violates the congruence");
        }
    }

    #[test]
    fn sparsified_lattice_has_index_q_and_membership() {
        let b = integer_lattice(3);
        let draw = SparsifierDraw { q: 11, z: vec![2, 5, 0], c: vec![1, 9, 4], seed: 0 };
        let bp = sparsify_basis(&b, &draw).unwrap();
        // index = det ratio = 11 (Z^3 has det 1)
        let u = coefficient_sublattice(&draw.z, draw.q);
        assert_eq!(hnf(&u).unwrap().det_abs(), BigInt::from(11));

        // membership both ways on a small coefficient box
        for x0 in -3i64..=3 {
            for x1 in -3i64..=3 {
                for x2 in -3i64..=3 {
                    let v: Vec<BigRational> = [x0, x1, x2]
                        .iter()
                        .map(|&x| BigRational::from_integer(BigInt::from(x)))
                        .collect();
                    let in_lp = (2 * x0 + 5 * x1).rem_euclid(11) == 0;
                    let c = bp.coeffs(&v).unwrap();
                    let integral = c.iter().all(|ci| ci.denom().is_one());
                    assert_eq!(integral, in_lp, "membership mismatch at ({x0},{x1},{x2})");
                }
            }
        }
    }

    #[test]
    fn zero_z_keeps_the_lattice() {
        let b = integer_lattice(2);
        let draw = SparsifierDraw { q: 5, z: vec![0, 5], c: vec![0, 0], seed: 0 };
        let bp = sparsify_basis(&b, &draw).unwrap();
        assert_eq!(bp.matrix(), b.matrix());
    }

    #[test]
    fn shift_preserves_distance_to_lattice() {
        use crate::lattice::dist;
        use crate::norm::NormOrder;
        let b = integer_lattice(2);
        let t: Vec<BigRational> = vec![
            BigRational::new(2.into(), 5.into()),
            BigRational::new(7.into(), 10.into()),
        ];
        let draw = SparsifierDraw { q: 11, z: vec![1, 2], c: vec![3, 10], seed: 0 };
        let tp = shift_target(&t, &b, &draw).unwrap();
        let p = NormOrder::parse("2").unwrap();
        let (d0, _) = dist(&b, &t, &p).unwrap();
        let (d1, _) = dist(&b, &tp, &p).unwrap();
        assert_eq!(d0.cmp_exact(&d1), std::cmp::Ordering::Equal);

        let zero = SparsifierDraw { q: 11, z: vec![0, 0], c: vec![0, 0], seed: 0 };
        assert_eq!(shift_target(&t, &b, &zero).unwrap(), t);
    }
}
