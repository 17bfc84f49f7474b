use delta_forge::decomp::{
    check_admissible, check_shape, decompose, decompose_preconditioned, is_perm, precondition, reconstruct,
    trailing_minors, DecompositionWord, Factor,
};
use delta_forge::sampling::sample_rng;
use delta_forge::{DeltaRing, Error, MatrixOps, RingParams, SquareMatrix, WittElement, WittRing};
use proptest::prelude::*;

fn zp(p: u64, n: u32) -> WittRing {
    WittRing::new(RingParams::prime_field(p, n)).unwrap()
}

/// Leibniz determinant over the integers, reduced mod `p^N`.
fn leibniz_det(r: &WittRing, x: &SquareMatrix<WittElement>, from: usize) -> WittElement {
    let idx: Vec<usize> = (from..x.n()).collect();
    let modulus = r.p_power(r.prec()) as i128;
    let mut total: i128 = 0;
    let mut perm = idx.clone();
    permutations(&mut perm, 0, &mut |sigma| {
        let inversions = (0..sigma.len())
            .flat_map(|i| (i + 1..sigma.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| sigma[i] > sigma[j])
            .count();
        let mut prod: i128 = if inversions % 2 == 0 { 1 } else { -1 };
        for (row, &col) in idx.iter().zip(sigma) {
            prod = prod * x.get(*row, col).coeffs()[0] as i128 % modulus;
        }
        total = (total + prod).rem_euclid(modulus);
    });
    r.from_integer(total as i64)
}

fn permutations(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, f);
        v.swap(k, i);
    }
}

fn admissible(r: &WittRing, n: usize, seed: u64) -> SquareMatrix<WittElement> {
    let mut rng = sample_rng(seed, 0);
    loop {
        let x = r.mat_random_gl(n, &mut rng);
        if check_admissible(r, &x).is_ok() {
            return x;
        }
    }
}

#[test]
fn two_by_two_word_has_the_closed_form() {
    let r = zp(5, 4);
    let mut rng = sample_rng(2, 0);
    for _ in 0..50 {
        let x = admissible(&r, 2, rand::Rng::gen(&mut rng));
        let (a, b, c, d) = (x.get(0, 0), x.get(0, 1), x.get(1, 0), x.get(1, 1));
        let d_inv = r.invert(d).unwrap();
        let expected = vec![
            Factor::Perm(vec![0, 1]),
            Factor::S { a: r.sub(a, &r.mul(&r.mul(b, &d_inv), c)), b: vec![r.mul(b, &d_inv)] },
            Factor::Perm(vec![1, 0]),
            Factor::S { a: d.clone(), b: vec![r.zero()] },
            Factor::Perm(vec![0, 1]),
            Factor::S { a: r.one(), b: vec![r.mul(&d_inv, c)] },
            Factor::Perm(vec![1, 0]),
        ];
        assert_eq!(decompose(&r, &x).unwrap().factors, expected);
    }
}

#[test]
fn non_admissible_names_the_first_bad_minor() {
    let r = zp(3, 4);
    // Δ₁ = det [[0,1],[1,0]] is a unit, Δ₂ = 0
    let x = SquareMatrix::from_rows(
        [[1, 2, 1], [0, 0, 1], [0, 1, 0]]
            .iter()
            .map(|row| row.iter().map(|&v| r.from_integer(v)).collect())
            .collect(),
    )
    .unwrap();
    match decompose(&r, &x) {
        Err(Error::NonUnitMinor { index, .. }) => assert_eq!(index, 2),
        other => panic!("expected a non-unit minor, got {other:?}"),
    }
    let (word, pre) = decompose_preconditioned(&r, &x, 0).unwrap();
    assert_eq!(reconstruct(&r, &word).unwrap(), x);
    assert!(pre.attempts > 1);
}

#[test]
fn identity_s_blocks_reconstruct_a_permutation_matrix() {
    let r = zp(5, 3);
    let word = DecompositionWord {
        n: 3,
        factors: vec![
            Factor::Perm(vec![1, 2, 0]),
            Factor::S { a: r.one(), b: vec![r.zero(), r.zero()] },
            Factor::Perm(vec![0, 2, 1]),
        ],
    };
    let m = reconstruct(&r, &word).unwrap();
    let mut sigma = vec![0; 3];
    for j in 0..3 {
        let ones: Vec<usize> = (0..3).filter(|&i| *m.get(i, j) == r.one()).collect();
        assert_eq!(ones.len(), 1);
        sigma[j] = ones[0];
    }
    assert!(is_perm(&sigma));
    assert_eq!(r.mat_permutation(&sigma), m);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trailing_minors_match_leibniz(seed in any::<u64>(), n in 1usize..=4, p in prop::sample::select(vec![3u64, 5, 7])) {
        let r = zp(p, 4);
        let mut rng = sample_rng(seed, 0);
        let x = r.mat_random(n, &mut rng);
        let (minors, product) = trailing_minors(&r, &x);
        prop_assert_eq!(minors.len(), n.saturating_sub(1));
        let mut expected_product = r.one();
        for (i, m) in minors.iter().enumerate() {
            let oracle = leibniz_det(&r, &x, i + 1);
            prop_assert_eq!(m, &oracle);
            expected_product = r.mul(&expected_product, &oracle);
        }
        prop_assert_eq!(product, expected_product);
        prop_assert_eq!(r.mat_det(&x), leibniz_det(&r, &x, 0));
    }

    #[test]
    fn roundtrip_and_shape(seed in any::<u64>(), n in 1usize..=4, p in prop::sample::select(vec![3u64, 5, 7])) {
        let r = zp(p, 4);
        let x = admissible(&r, n, seed);
        let word = decompose(&r, &x).unwrap();
        prop_assert_eq!(&reconstruct(&r, &word).unwrap(), &x);
        prop_assert!(check_shape(&r, &word).is_ok());
        prop_assert_eq!(word.len(), n * (n + 1) / 2);
        prop_assert_eq!(word.factors.len(), 2 * word.len() + 1);
        for (i, f) in word.factors.iter().enumerate() {
            match f {
                Factor::Perm(sigma) => {
                    prop_assert!(i % 2 == 0);
                    prop_assert!(is_perm(sigma));
                }
                Factor::S { a, b } => {
                    prop_assert!(i % 2 == 1);
                    prop_assert!(r.is_unit(a));
                    prop_assert_eq!(b.len(), n - 1);
                }
            }
        }
        let back = DecompositionWord::from_json(&r, &word.to_json(&r)).unwrap();
        prop_assert_eq!(back, word);
    }

    #[test]
    fn preconditioned_roundtrip(seed in any::<u64>(), n in 2usize..=4) {
        let r = zp(3, 3);
        let mut rng = sample_rng(seed, 0);
        let x = r.mat_random_gl(n, &mut rng);
        match precondition(&r, &x, seed) {
            Ok(pre) => {
                let moved = r.mat_mul(&r.mat_mul(&r.mat_permutation(&pre.w_left), &x), &r.mat_permutation(&pre.w_right));
                prop_assert_eq!(&moved, &pre.x);
                prop_assert!(check_admissible(&r, &pre.x).is_ok());
                let (word, _) = decompose_preconditioned(&r, &x, seed).unwrap();
                prop_assert_eq!(reconstruct(&r, &word).unwrap(), x);
            }
            Err(e) => {
                let exhausted = matches!(e, Error::SearchExhausted { .. });
                prop_assert!(exhausted);
            }
        }
    }

    #[test]
    fn admissible_input_needs_no_preconditioning(seed in any::<u64>(), n in 1usize..=3) {
        let r = zp(5, 3);
        let x = admissible(&r, n, seed);
        let pre = precondition(&r, &x, seed).unwrap();
        prop_assert_eq!(pre.x, x);
        prop_assert_eq!(pre.w_left, (0..n).collect::<Vec<_>>());
        prop_assert_eq!(pre.w_right, (0..n).collect::<Vec<_>>());
    }
}
