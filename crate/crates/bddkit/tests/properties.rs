//! Randomized invariant checks over the numeric and exact layers.

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use bddkit::matrix::{hnf, Basis, IntMat, RatMat};
use bddkit::norm::NormOrder;
use bddkit::numerics::{mo_objective, theta, theta1_closed, RankRatio};

fn small_rat() -> impl Strategy<Value = BigRational> {
    (-6i64..=6, 1i64..=3)
        .prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theta_decreases_in_tau(pn in 1u64..=6, tau in 0.05f64..4.0, dt in 0.05f64..1.0) {
        let p = NormOrder::finite(pn, 1).unwrap();
        let a = theta(&p, tau, 1e-14).unwrap();
        let b = theta(&p, tau + dt, 1e-14).unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn theta_dominated_by_p1_closed_form(num in 2u64..=12, den in 1u64..=2, tau in 0.05f64..4.0) {
        // |z|^p >= |z| for integers once p >= 1, so the series only shrinks
        prop_assume!(num >= den);
        let p = NormOrder::finite(num, den).unwrap();
        let t = theta(&p, tau, 1e-14).unwrap();
        prop_assert!(t <= theta1_closed(tau).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn objective_decreases_in_alpha(pn in 1u64..=5, a in 0.55f64..3.0, da in 0.05f64..1.0) {
        let p = NormOrder::finite(pn, 1).unwrap();
        let lo = mo_objective(&p, a).unwrap();
        let hi = mo_objective(&p, a + da).unwrap();
        prop_assert!(hi <= lo * (1.0 + 1e-9));
    }

    #[test]
    fn alpha_star_threshold_is_tight(pn in 2u64..=5, cf in prop::option::of(1.5f64..8.0)) {
        let p = NormOrder::finite(pn, 1).unwrap();
        let c = match cf { Some(v) => RankRatio::Finite(v), None => RankRatio::Infinity };
        let r = bddkit::numerics::alpha_star(&p, &c, 1e-9).unwrap();
        let thr = c.threshold();
        prop_assert!(mo_objective(&p, r.bracket_hi).unwrap() <= thr + 1e-6);
        prop_assert!(mo_objective(&p, r.bracket_lo).unwrap() >= thr - 1e-6);
    }

    #[test]
    fn coeffs_round_trip(
        rows in prop::collection::vec(prop::collection::vec(small_rat(), 3), 3),
        x in prop::collection::vec(-5i64..=5, 3),
    ) {
        let Ok(m) = RatMat::from_rows(rows) else { return Ok(()) };
        let Ok(b) = Basis::new(m) else { return Ok(()) }; // singular draw
        let xi: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
        let point = b.point(&xi);
        let back = b.coeffs(&point).unwrap();
        let expect: Vec<BigRational> =
            xi.iter().map(|v| BigRational::from_integer(v.clone())).collect();
        prop_assert_eq!(back, expect);
    }

    #[test]
    fn hnf_is_a_unimodular_column_transform(
        entries in prop::collection::vec(-5i64..=5, 9),
    ) {
        let mut m = IntMat::zeros(3, 3);
        for (k, &v) in entries.iter().enumerate() {
            m.set(k / 3, k % 3, BigInt::from(v));
        }
        let Ok(res) = hnf(&m) else { return Ok(()) }; // rank-deficient draw
        prop_assert_eq!(m.mul(&res.u), res.h.clone());
        let u_det = hnf(&res.u).unwrap().det_abs();
        prop_assert_eq!(u_det, BigInt::from(1));
        // canonical: reducing again changes nothing
        let again = hnf(&res.h).unwrap();
        prop_assert_eq!(again.h, res.h);
    }
}
