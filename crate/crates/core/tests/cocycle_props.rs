use delta_forge::cocycles::{
    classified_eval, coboundary, cocycle_check, coherence_check, h_block_components, h_block_relations,
    random_constant_matrix, recover, ClassifiedCocycle, DeltaMapHandle, Subgroup,
};
use delta_forge::homs::GmHomParams;
use delta_forge::sampling::sample_rng;
use delta_forge::{DeltaRing, Error, MatrixOps, RingParams, SeriesRing, WittRing};
use proptest::prelude::*;
use rand::Rng;

fn zp(p: u64, n: u32) -> WittRing {
    WittRing::new(RingParams::prime_field(p, n)).unwrap()
}

fn random_cocycle(r: &WittRing, n: usize, seed: u64) -> ClassifiedCocycle<<WittRing as DeltaRing>::Elem> {
    let mut rng = sample_rng(seed, 0);
    let degree = rng.gen_range(0..=2);
    ClassifiedCocycle::random(r, n, degree, &mut rng)
}

#[test]
fn coboundary_of_e12_under_diag_2_1() {
    let r = zp(5, 4);
    let mut v = r.mat_zero(2);
    v.set(0, 1, r.one());
    let g = r.mat_diag(&[r.from_integer(2), r.one()]);
    assert_eq!(coboundary(&r, &v, &g).unwrap(), v);
}

#[test]
fn coboundary_rejects_non_unit_determinant() {
    let r = zp(5, 4);
    let g = r.mat_diag(&[r.from_integer(5), r.one()]);
    assert!(matches!(coboundary(&r, &r.mat_identity(2), &g), Err(Error::NonUnit { .. })));
}

#[test]
fn log_derivative_of_one_plus_t() {
    let k = SeriesRing::new(8).unwrap();
    let g = k.mat_diag(&[k.from_coeffs(&[1, 1])]);
    let ld = DeltaMapHandle::log_derivative(&k).call(&g).unwrap();
    let expected = k.from_coeffs(&[1, -1, 1, -1, 1, -1, 1]);
    assert!(k.equal(ld.get(0, 0), &expected));
    assert_eq!(k.precision(ld.get(0, 0)), 7);
}

#[test]
fn log_derivative_vanishes_on_constants() {
    let k = SeriesRing::new(8).unwrap();
    let mut rng = sample_rng(3, 0);
    let u = random_constant_matrix(&k, 3, &mut rng);
    assert!(k.mat_is_zero(&DeltaMapHandle::log_derivative(&k).call(&u).unwrap()));
}

#[test]
fn log_derivative_is_arithmetic_unsupported() {
    let r = zp(5, 4);
    let err = DeltaMapHandle::log_derivative(&r).call(&r.mat_identity(2)).unwrap_err();
    assert!(matches!(err, Error::Unsupported { .. }));
}

#[test]
fn det_times_delta_is_not_a_cocycle() {
    let r = zp(5, 6);
    let f = DeltaMapHandle::new(&r, 1, "GL_n", |r, g| {
        let d = r.delta(&r.mat_det(g))?;
        Ok(r.mat_scalar(g.n(), &d))
    });
    let report = cocycle_check(&f, 2, 200, 11).unwrap();
    assert!(!report.pass);
    let ce = report.counterexample.as_ref().expect("failing report carries a counterexample");
    assert_eq!(ce.inputs.len(), 2);
    assert!(!r.mat_equal(&ce.lhs, &ce.rhs));
    assert!(report.to_json(&r).get("counterexample").is_some());
}

#[test]
fn recovery_of_a_coboundary_is_exact() {
    let r = zp(7, 5);
    let mut rng = sample_rng(5, 0);
    let mut v0 = r.mat_random(3, &mut rng);
    v0.set(0, 0, r.zero());
    let rec = recover(&DeltaMapHandle::coboundary(&r, &v0), 3, 9).unwrap();
    assert_eq!(rec.v, v0);
    for _ in 0..20 {
        assert!(r.is_zero(&rec.omega_eval(&r.random_unit(&mut rng)).unwrap()));
    }
}

#[test]
fn recovery_of_zero() {
    let r = zp(3, 5);
    let rec = recover(&DeltaMapHandle::zero(&r), 2, 1).unwrap();
    assert!(r.mat_is_zero(&rec.v));
    assert!(r.is_zero(&rec.omega_eval(&r.from_integer(2)).unwrap()));
}

#[test]
fn recovery_rejects_a_non_cocycle() {
    // on 1 + e_kl the system forces v_ll - v_kk = 1 and v_kk - v_ll = 1
    let r = zp(5, 5);
    let f = DeltaMapHandle::new(&r, 0, "GL_n", |r, g| Ok(r.mat_sub(g, &r.mat_identity(g.n()))));
    assert!(matches!(recover(&f, 2, 3), Err(Error::InconsistentSystem(_))));
}

#[test]
fn sl_n_points_see_only_the_coboundary() {
    let r = zp(5, 6);
    let c = random_cocycle(&r, 3, 21);
    let mut rng = sample_rng(21, 1);
    for _ in 0..50 {
        let g = r.mat_random_sl(3, &mut rng);
        let lhs = classified_eval(&r, &c, &g).unwrap();
        assert!(r.mat_equal(&lhs, &coboundary(&r, &c.v, &g).unwrap()));
    }
}

#[test]
fn kolchin_log_derivative_is_coherent_everywhere() {
    let k = SeriesRing::new(8).unwrap();
    let mut rng = sample_rng(8, 0);
    let nu = k.random_constant(&mut rng);
    let ld = DeltaMapHandle::log_derivative(&k);
    for f in [ld.clone(), ld.scaled(&nu)] {
        for sg in [
            Subgroup::Torus,
            Subgroup::SlN,
            Subgroup::Borel,
            Subgroup::ConjugatedTorus(random_constant_matrix(&k, 2, &mut rng)),
        ] {
            let report = coherence_check(&f, 2, &sg, 30, 4).unwrap();
            assert!(report.pass, "{} fails", sg.name());
        }
    }
}

#[test]
fn coherence_rejects_non_constant_conjugator() {
    let k = SeriesRing::new(6).unwrap();
    let u = k.mat_diag(&[k.from_coeffs(&[1, 1]), k.one()]);
    let ld = DeltaMapHandle::log_derivative(&k);
    assert!(coherence_check(&ld, 2, &Subgroup::ConjugatedTorus(u), 5, 0).is_err());
}

#[test]
fn coboundary_of_non_scalar_v_fails_some_conjugated_torus() {
    let k = SeriesRing::new(6).unwrap();
    let mut v = k.mat_zero(2);
    v.set(0, 1, k.one());
    let f = DeltaMapHandle::coboundary(&k, &v);
    let caught = (0..10).any(|i| {
        let mut rng = sample_rng(i, 0);
        let u = random_constant_matrix(&k, 2, &mut rng);
        !coherence_check(&f, 2, &Subgroup::ConjugatedTorus(u), 5, i).unwrap().pass
    });
    assert!(caught);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn classified_cocycles_satisfy_the_law(
        seed in any::<u64>(),
        p in prop::sample::select(vec![3u64, 5, 7]),
        n in 2usize..=3,
    ) {
        let r = zp(p, 6);
        let f = DeltaMapHandle::classified(&r, &random_cocycle(&r, n, seed));
        let report = cocycle_check(&f, n, 30, seed).unwrap();
        prop_assert!(report.pass);
        prop_assert!(report.counterexample.is_none());
        prop_assert!(r.mat_is_zero(&f.call(&r.mat_identity(n)).unwrap()));
    }

    #[test]
    fn trace_law(seed in any::<u64>(), n in 2usize..=3) {
        let r = zp(5, 6);
        let c = random_cocycle(&r, n, seed);
        let mut rng = sample_rng(seed, 1);
        for _ in 0..10 {
            let g = r.mat_random_gl(n, &mut rng);
            let w = delta_forge::homs::gm_hom(&r, &c.omega, &r.mat_det(&g)).unwrap();
            let tr = r.mat_trace(&classified_eval(&r, &c, &g).unwrap());
            prop_assert!(r.equal(&tr, &r.scale(&w, n as i64)));
        }
    }

    #[test]
    fn center_is_the_kernel_of_coboundary(seed in any::<u64>(), n in 1usize..=3) {
        let r = zp(3, 5);
        let mut rng = sample_rng(seed, 0);
        let v = r.mat_random(n, &mut rng);
        let c = r.random(&mut rng);
        let shifted = r.mat_add(&v, &r.mat_scalar(n, &c));
        for _ in 0..5 {
            let g = r.mat_random_gl(n, &mut rng);
            let a = coboundary(&r, &v, &g).unwrap();
            prop_assert_eq!(&a, &coboundary(&r, &shifted, &g).unwrap());
            prop_assert!(r.is_zero(&r.mat_trace(&a)));
        }
    }

    #[test]
    fn recovery_roundtrip(seed in any::<u64>(), p in prop::sample::select(vec![3u64, 5, 7]), n in 2usize..=3) {
        let r = zp(p, 6);
        let c = random_cocycle(&r, n, seed);
        let f = DeltaMapHandle::classified(&r, &c);
        let rec = recover(&f, n, seed).unwrap();
        let expected = r.mat_sub(&c.v, &r.mat_scalar(n, c.v.get(0, 0)));
        prop_assert!(r.mat_equal(&rec.v, &expected));
        let mut rng = sample_rng(seed, 2);
        for _ in 0..10 {
            let g = r.mat_random_gl(n, &mut rng);
            prop_assert!(r.mat_equal(&rec.eval(&g).unwrap(), &f.call(&g).unwrap()));
        }
    }

    #[test]
    fn h_blocks_of_classified_cocycles(seed in any::<u64>(), n in 2usize..=3) {
        let r = zp(5, 6);
        let comps = h_block_components(&DeltaMapHandle::classified(&r, &random_cocycle(&r, n, seed)), n).unwrap();
        let mut rng = sample_rng(seed, 3);
        for _ in 0..10 {
            let (a1, a2) = (r.random_unit(&mut rng), r.random_unit(&mut rng));
            let b1: Vec<_> = (1..n).map(|_| r.random(&mut rng)).collect();
            let b2: Vec<_> = (1..n).map(|_| r.random(&mut rng)).collect();
            prop_assert_eq!(h_block_relations(&comps, (&a1, &b1), (&a2, &b2)).unwrap(), None);
            let gamma1 = comps.eval(&a1, &b1).unwrap().gamma;
            let gamma2 = comps.eval(&a1, &b2).unwrap().gamma;
            prop_assert!(gamma1.iter().zip(&gamma2).all(|(x, y)| r.equal(x, y)));
        }
    }

    #[test]
    fn kolchin_normal_form_is_a_cocycle(seed in any::<u64>(), n in 2usize..=3) {
        let k = SeriesRing::new(6).unwrap();
        let mut rng = sample_rng(seed, 0);
        let nu = k.random_constant(&mut rng);
        let v = k.mat_random(n, &mut rng);
        let f = DeltaMapHandle::log_derivative(&k)
            .scaled(&nu)
            .plus(&DeltaMapHandle::coboundary(&k, &v));
        prop_assert!(cocycle_check(&f, n, 5, seed).unwrap().pass);
    }

    #[test]
    fn zero_omega_reduces_to_coboundary(seed in any::<u64>()) {
        let r = zp(7, 4);
        let mut rng = sample_rng(seed, 0);
        let c = ClassifiedCocycle { omega: GmHomParams::new(&r, vec![]), v: r.mat_random(2, &mut rng) };
        let g = r.mat_random_gl(2, &mut rng);
        prop_assert_eq!(classified_eval(&r, &c, &g).unwrap(), coboundary(&r, &c.v, &g).unwrap());
    }
}
