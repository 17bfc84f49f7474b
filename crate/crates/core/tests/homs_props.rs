//! δ-homomorphism families: series oracle for ψ and law properties.

use delta_forge::homs::{
    check_hom, ga_hom, gm_hom, psi, psi_series, twisted_cocycle, GaHomParams, GmHomParams, HomLaw,
    TwistedCocycleParams,
};
use delta_forge::sampling::sample_rng;
use delta_forge::{DeltaRing, RingParams, SeriesRing, WittRing};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn zp(p: u64, n: u32) -> WittRing {
    WittRing::new(RingParams::prime_field(p, n)).unwrap()
}

/// ψ(a) for an integer unit `a`, summed over Q and reduced mod p^k.
fn psi_oracle(a: i64, p: i64, k: u32, terms: u32) -> BigInt {
    let a = BigInt::from(a);
    let pb = BigInt::from(p);
    let delta = (&a - a.pow(p as u32)) / &pb;
    let ratio = BigRational::new(delta, a.pow(p as u32));
    let mut sum = BigRational::zero();
    let mut power = BigRational::one();
    for n in 1..=terms {
        power = &power * &ratio;
        let scalar = BigRational::new(pb.pow(n - 1), BigInt::from(n));
        let term = &scalar * &power;
        if n % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let md = pb.pow(k);
    let den_inv = sum.denom().modinv(&md).expect("denominator prime to p");
    (sum.numer() * den_inv).mod_floor(&md)
}

#[test]
fn psi_of_28_splits_against_series_oracle() {
    let r = zp(3, 6);
    let lhs = psi(&r, &r.from_integer(28)).unwrap();
    let rhs = r.add(&psi(&r, &r.from_integer(4)).unwrap(), &psi(&r, &r.from_integer(7)).unwrap());
    assert_eq!(lhs.prec(), 5);
    assert!(r.equal(&lhs, &rhs));
    for a in [4i64, 7, 28] {
        let expected = psi_oracle(a, 3, 5, 40);
        let got = psi(&r, &r.from_integer(a)).unwrap();
        assert_eq!(BigInt::from(got.coeffs()[0]), expected, "a = {a}");
    }
    assert_eq!(
        (psi_oracle(4, 3, 5, 40) + psi_oracle(7, 3, 5, 40)).mod_floor(&BigInt::from(243)),
        psi_oracle(28, 3, 5, 40)
    );
}

#[test]
fn psi_passes_multiplicative_law() {
    for p in [3, 5] {
        let r = zp(p, 8);
        let report = check_hom(&r, |a| psi(&r, a), HomLaw::MultiplicativeToAdditive, 1000, 7).unwrap();
        assert!(report.pass, "p = {p}: {:?}", report.counterexample);
        assert_eq!(report.samples, 1000);
    }
}

#[test]
fn psi_term_bound_holds_in_extension() {
    let r = WittRing::new(RingParams::extension(3, 7, vec![1, 0, 1])).unwrap();
    let mut rng = sample_rng(11, 0);
    for _ in 0..200 {
        let a = r.random_unit(&mut rng);
        for t in psi_series(&r, &a).unwrap() {
            assert!(r.valuation(&t.value) >= t.valuation_bound);
        }
    }
}

#[test]
fn psi_rejects_kolchin() {
    let s = SeriesRing::new(4).unwrap();
    assert_eq!(psi(&s, &s.one()).unwrap_err().name(), "unsupported");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn psi_is_zero_exactly_on_constants(seed in any::<u64>()) {
        let r = WittRing::new(RingParams::extension(5, 4, vec![3, 0, 1])).unwrap();
        let mut rng = sample_rng(seed, 0);
        let a = if seed % 2 == 0 {
            r.random_unit(&mut rng)
        } else {
            r.random_constant(&mut rng)
        };
        prop_assume!(r.is_unit(&a));
        prop_assert_eq!(r.is_zero(&psi(&r, &a).unwrap()), r.is_constant(&a).unwrap());
    }

    #[test]
    fn twisted_identity(seed in any::<u64>(), s in prop::sample::select(vec![-3i64, -2, -1, 1, 2, 3])) {
        let r = zp(7, 5);
        let mut rng = sample_rng(seed, 0);
        let params = TwistedCocycleParams::new(r.random(&mut rng), s).unwrap();
        let report = check_hom(&r, |a| twisted_cocycle(&r, &params, a), HomLaw::Twisted(s), 20, seed).unwrap();
        prop_assert!(report.pass);
        let k = SeriesRing::new(6).unwrap();
        let params = TwistedCocycleParams::new(k.random(&mut rng), s).unwrap();
        let report = check_hom(&k, |a| twisted_cocycle(&k, &params, a), HomLaw::Twisted(s), 5, seed).unwrap();
        prop_assert!(report.pass);
    }

    #[test]
    fn ga_and_gm_families_are_homomorphisms(seed in any::<u64>(), len in 0usize..=3) {
        let mut rng = sample_rng(seed, 99);
        let r = WittRing::new(RingParams::extension(3, 5, vec![1, 0, 1])).unwrap();
        let lambda: Vec<_> = (0..len).map(|_| r.random(&mut rng)).collect();
        let ga = GaHomParams::new(&r, lambda.clone());
        let gm = GmHomParams::new(&r, lambda);
        prop_assert!(check_hom(&r, |a| ga_hom(&r, &ga, a), HomLaw::Additive, 10, seed).unwrap().pass);
        prop_assert!(check_hom(&r, |a| gm_hom(&r, &gm, a), HomLaw::MultiplicativeToAdditive, 10, seed).unwrap().pass);

        let k = SeriesRing::new(7).unwrap();
        let lambda: Vec<_> = (0..len).map(|_| k.random_constant(&mut rng)).collect();
        let ga = GaHomParams::new(&k, lambda.clone());
        let gm = GmHomParams::new(&k, lambda);
        prop_assert!(check_hom(&k, |a| ga_hom(&k, &ga, a), HomLaw::Additive, 5, seed).unwrap().pass);
        prop_assert!(check_hom(&k, |a| gm_hom(&k, &gm, a), HomLaw::MultiplicativeToAdditive, 5, seed).unwrap().pass);
    }
}
