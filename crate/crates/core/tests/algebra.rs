use proptest::prelude::*;
use roughkit::path::uniform_grid;
use roughkit::tensor::{shuffle_counts, Word};
use roughkit::{canonical_lift, pairing, shuffle, tensor_mul, FormalWordSum, SamplePath, TruncatedTensor};

fn tensor(dim: usize, depth: usize) -> impl Strategy<Value = TruncatedTensor> {
    let sizes: Vec<usize> = (0..=depth).map(|n| dim.pow(n as u32)).collect();
    sizes
        .into_iter()
        .map(|k| prop::collection::vec(-1.0..1.0f64, k))
        .collect::<Vec<_>>()
        .prop_map(move |levels| TruncatedTensor::from_levels(dim, levels).unwrap())
}

fn shapes() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=3, 1usize..=5)
}

/// Piecewise-linear path with 1..=16 segments in `R^d`.
fn pl_path(dim: usize) -> impl Strategy<Value = SamplePath> {
    (1usize..=16)
        .prop_flat_map(move |segs| prop::collection::vec(-1.0..1.0f64, (segs + 1) * dim))
        .prop_map(move |vals| {
            let n = vals.len() / dim - 1;
            SamplePath::from_flat(uniform_grid(1.0, n), dim, vals).unwrap()
        })
}

fn word(dim: usize, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(1..=dim, 0..=max_len).prop_map(|l| Word::new(&l).unwrap())
}

fn rel_err(a: &TruncatedTensor, b: &TruncatedTensor) -> f64 {
    let scale = (0..=a.depth()).map(|n| a.level_norm(n)).fold(1.0, f64::max);
    a.max_abs_diff(b).unwrap() / scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_is_associative(
        (a, b, c) in shapes().prop_flat_map(|(d, n)| (tensor(d, n), tensor(d, n), tensor(d, n)))
    ) {
        let left = tensor_mul(&tensor_mul(&a, &b).unwrap(), &c).unwrap();
        let right = tensor_mul(&a, &tensor_mul(&b, &c).unwrap()).unwrap();
        prop_assert!(rel_err(&left, &right) <= 1e-12);
    }

    #[test]
    fn integer_products_associate_exactly(
        (a, b, c) in shapes().prop_flat_map(|(d, n)| (tensor(d, n), tensor(d, n), tensor(d, n)))
    ) {
        let round = |t: &TruncatedTensor| {
            let levels = t.levels().iter().map(|l| l.iter().map(|x| (4.0 * x).round()).collect()).collect();
            TruncatedTensor::from_levels(t.dim(), levels).unwrap()
        };
        let (a, b, c) = (round(&a), round(&b), round(&c));
        let left = tensor_mul(&tensor_mul(&a, &b).unwrap(), &c).unwrap();
        let right = tensor_mul(&a, &tensor_mul(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn exp_is_a_one_parameter_group(
        v in prop::collection::vec(-1.0..1.0f64, 1..=3),
        s in -2.0..2.0f64,
        t in -2.0..2.0f64,
        depth in 1usize..=5,
    ) {
        let scaled = |c: f64| v.iter().map(|x| c * x).collect::<Vec<_>>();
        let prod = tensor_mul(&TruncatedTensor::exp(&scaled(s), depth), &TruncatedTensor::exp(&scaled(t), depth)).unwrap();
        let want = TruncatedTensor::exp(&scaled(s + t), depth);
        prop_assert!(prod.max_abs_diff(&want).unwrap() <= 1e-10);
    }

    #[test]
    fn inverse_is_two_sided((d, n) in shapes(), v in prop::collection::vec(-1.0..1.0f64, 3)) {
        let x = TruncatedTensor::exp(&v[..d], n);
        let inv = x.inverse().unwrap();
        let unit = TruncatedTensor::unit(d, n);
        prop_assert!(tensor_mul(&x, &inv).unwrap().max_abs_diff(&unit).unwrap() <= 1e-12);
        prop_assert!(tensor_mul(&inv, &x).unwrap().max_abs_diff(&unit).unwrap() <= 1e-12);
    }

    #[test]
    fn shuffle_is_commutative_with_binomial_mass(u in word(3, 3), v in word(3, 3)) {
        prop_assert_eq!(shuffle_counts(&u, &v), shuffle_counts(&v, &u));
        let mass: u64 = shuffle_counts(&u, &v).values().sum();
        let (p, q) = (u.len() as u64, v.len() as u64);
        let binom = (1..=q).fold(1u64, |acc, k| acc * (p + k) / k);
        prop_assert_eq!(mass, binom);
    }

    #[test]
    fn pairing_is_bilinear(
        x in tensor(2, 3),
        u in word(2, 3),
        v in word(2, 3),
        a in -3.0..3.0f64,
        b in -3.0..3.0f64,
    ) {
        let l = FormalWordSum::from_word(u.clone()).scale(a).add(&FormalWordSum::from_word(v.clone()).scale(b));
        let lhs = pairing(&l, &x).unwrap();
        let rhs = a * pairing(&FormalWordSum::from_word(u), &x).unwrap() + b * pairing(&FormalWordSum::from_word(v), &x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn canonical_lifts_are_multiplicative(
        (path, depth) in (1usize..=3).prop_flat_map(|d| (pl_path(d), 1usize..=4))
    ) {
        let x = canonical_lift(&path, depth, 1.0).unwrap();
        prop_assert!(x.chen_residual(usize::MAX) <= 1e-10);
    }

    #[test]
    fn signatures_satisfy_the_shuffle_identity(path in (1usize..=3).prop_flat_map(pl_path)) {
        let d = path.dim();
        let x = canonical_lift(&path, 5, 1.0).unwrap();
        let s = x.evaluate_idx(0, x.n_cells()).unwrap();
        let words = Word::all_up_to(d, 4);
        for u in words.iter().filter(|w| !w.is_empty()) {
            for v in words.iter().filter(|w| !w.is_empty() && u.len() + w.len() <= 5) {
                let lu = s.coefficient(u).unwrap();
                let lv = s.coefficient(v).unwrap();
                let sh = pairing(&shuffle(u, v), &s).unwrap();
                prop_assert!((lu * lv - sh).abs() <= 1e-8 * (1.0 + sh.abs()), "{u} {v}: {} vs {sh}", lu * lv);
            }
        }
    }
}

#[test]
fn group_like_signature_pairs_to_one_on_the_empty_word() {
    let path = SamplePath::from_fn(uniform_grid(1.0, 8), 2, |t| vec![t, t * t]).unwrap();
    let s = canonical_lift(&path, 3, 1.0).unwrap().evaluate_idx(0, 8).unwrap();
    assert_eq!(pairing(&FormalWordSum::from_word(Word::empty()), &s).unwrap(), 1.0);
    assert_eq!(s.coefficient(&Word::letter(2)).unwrap(), 1.0);
    assert!(s.group_like_defect() < 1e-12);
}
