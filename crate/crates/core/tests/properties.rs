mod common;

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;
use rand::seq::SliceRandom;

use probeq_core::certificate::chain::{apply_step, is_bijection, pair_multiset, permutation_order};
use probeq_core::certificate::CertificateBody;
use probeq_core::gen::{self, rng_from_seed};
use probeq_core::regret::{
    prefer, regret_lottery, RegretFunction, RegretFunctional, RegretTable, Utility, Verdict, DEFAULT_TOLERANCE,
};
use probeq_core::scalar::q;
use probeq_core::*;

use common::{decimal_compare, levy_grid};

fn scalar() -> impl Strategy<Value = Scalar> {
    (-300i64..300, 1i64..60, -300i64..300, 1i64..60).prop_map(|(a, b, c, d)| Scalar::new(q(a, b), q(c, d)))
}

/// Points of `[0,1]` of the form `n/64 + m(√2 − 1)/16`.
fn unit_point() -> impl Strategy<Value = Scalar> {
    (0i64..=64, -6i64..=6).prop_filter_map("outside [0,1]", |(n, m)| {
        let s = Scalar::frac(n, 64) + (Scalar::sqrt2() - Scalar::one()).mul_rational(&q(m, 16));
        (!s.is_negative() && s <= Scalar::one()).then_some(s)
    })
}

fn event() -> impl Strategy<Value = Event> {
    prop::collection::vec((unit_point(), unit_point()), 0..5).prop_map(|pairs| {
        Event::from_intervals(pairs.into_iter().filter_map(|(a, b)| {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            Interval::new(lo, hi).ok()
        }))
    })
}

fn rv_from(seed: u64, surd: bool) -> SimpleRV {
    gen::random_rv(&mut rng_from_seed(seed), 6, surd)
}

/// Random law on `{0, 1/4, …, 5}`, small enough that outcome gaps and
/// mass gaps both matter for the Lévy distance.
fn small_law(seed: u64) -> Distribution {
    let d = rv_from(seed, seed.is_multiple_of(2)).distribution();
    Distribution::from_pairs(d.atoms().iter().map(|a| (&a.outcome / q(20, 1), a.mass.clone()))).unwrap()
}

fn additive_psis() -> Vec<RegretFunction> {
    let xs: Vec<BigRational> = (0..=10).map(|i| q(10 * i, 1)).collect();
    let u = |x: &BigRational| {
        let v = num_traits::ToPrimitive::to_f64(x).unwrap();
        v.sqrt()
    };
    let values = xs.iter().map(|x| xs.iter().map(|y| u(x) - u(y)).collect()).collect();
    vec![
        RegretFunction::Difference,
        RegretFunction::UtilityDiff(Utility::Power { alpha: 2.0 }),
        RegretFunction::UtilityDiff(Utility::Power { alpha: 0.5 }),
        RegretFunction::UtilityDiff(Utility::Exponential { beta: 0.1 }),
        RegretFunction::Table { grid: RegretTable { xs: xs.clone(), ys: xs, values } },
    ]
}

/// Cuts every interval of every cell in two at its midpoint.
fn reslice(x: &SimpleRV) -> SimpleRV {
    let cells = x
        .cells()
        .iter()
        .flat_map(|c| {
            c.event.intervals().iter().flat_map(move |iv| {
                let mid = (iv.lo() + iv.hi()).mul_rational(&q(1, 2));
                [
                    Cell { event: Event::interval(iv.lo().clone(), mid.clone()).unwrap(), outcome: c.outcome.clone() },
                    Cell { event: Event::interval(mid, iv.hi().clone()).unwrap(), outcome: c.outcome.clone() },
                ]
            })
        })
        .filter(|c| !c.event.is_empty())
        .collect();
    SimpleRV::new(x.bounds().clone(), cells).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn measure_is_additive(a in event(), b in event()) {
        prop_assert_eq!(a.union(&b).measure() + a.intersect(&b).measure(), a.measure() + b.measure());
        prop_assert_eq!(a.measure() + a.complement().measure(), Scalar::one());
        prop_assert_eq!(a.difference(&b).union(&a.intersect(&b)), a.clone());
    }

    #[test]
    fn split_prefix_measures(e in event(), num in 0i64..=64) {
        let t = e.measure().mul_rational(&q(num, 64));
        let (prefix, rest) = e.split_prefix(&t).unwrap();
        prop_assert_eq!(prefix.measure(), t.clone());
        prop_assert_eq!(rest.measure(), e.measure() - &t);
        prop_assert_eq!(prefix.union(&rest), e.clone());
        prop_assert!(prefix.is_disjoint(&rest));
        if let (Some(last), Some(first)) = (prefix.intervals().last(), rest.start()) {
            prop_assert!(last.hi() <= first);
        }
    }

    #[test]
    fn scalar_compare_matches_decimal_oracle(a in scalar(), b in scalar()) {
        prop_assert_eq!(scalar_compare(&a, &b), decimal_compare(&a, &b, 200));
    }

    #[test]
    fn field_operations_round_trip(a in scalar(), b in scalar()) {
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        if let Some(inv) = b.recip() {
            prop_assert_eq!(&(&a * &b) * &inv, a.clone());
        }
        prop_assert_eq!((&a * &b).norm(), a.norm() * b.norm());
    }

    #[test]
    fn prob_diff_is_nonincreasing(s1 in any::<u64>(), s2 in any::<u64>(), e1 in 1i64..60, e2 in 1i64..60) {
        let (x, y) = (rv_from(s1, true), rv_from(s2, true));
        let (lo, hi) = (q(e1.min(e2), 2), q(e1.max(e2), 2));
        prop_assert!(prob_diff_exceeds(&x, &y, &lo).unwrap() >= prob_diff_exceeds(&x, &y, &hi).unwrap());
        prop_assert!(prob_diff_exceeds(&x, &x, &lo).unwrap().is_zero());
    }

    #[test]
    fn refinement_reproduces_marginals(s1 in any::<u64>(), s2 in any::<u64>()) {
        let (x, y) = (rv_from(s1, true), rv_from(s2, false));
        let cells = common_refinement(&x, &y);
        prop_assert_eq!(cells.iter().map(|c| c.measure()).sum::<Scalar>(), Scalar::one());
        for atom in x.distribution().atoms() {
            let mass: Scalar = cells.iter().filter(|c| c.x_val == atom.outcome).map(|c| c.measure()).sum();
            prop_assert_eq!(&mass, &atom.mass);
        }
        for atom in y.distribution().atoms() {
            let mass: Scalar = cells.iter().filter(|c| c.y_val == atom.outcome).map(|c| c.measure()).sum();
            prop_assert_eq!(&mass, &atom.mass);
        }
    }

    #[test]
    fn levy_is_a_metric(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let (f, g, h) = (small_law(s1), small_law(s2), small_law(s3));
        let fg = levy_distance(&f, &g);
        prop_assert_eq!(&fg, &levy_distance(&g, &f));
        prop_assert_eq!(fg.is_zero(), f == g);
        prop_assert!(levy_distance(&f, &f).is_zero());
        prop_assert!(levy_distance(&f, &h) <= &fg + &levy_distance(&g, &h));
        prop_assert!(fg <= Scalar::one());
    }

    #[test]
    fn levy_matches_grid_oracle(s1 in any::<u64>(), s2 in any::<u64>()) {
        let (f, g) = (small_law(s1), small_law(s2));
        let exact = levy_distance(&f, &g).to_f64();
        let grid = levy_grid(&f, &g, 10);
        prop_assert!(exact <= grid + 1e-9 && exact > grid - 1.0 / 1024.0 - 1e-9, "exact {} grid {}", exact, grid);
    }

    #[test]
    fn fosd_is_antisymmetric(s1 in any::<u64>(), s2 in any::<u64>()) {
        let (x, y) = (rv_from(s1, true), rv_from(s2, true));
        let expected = match fosd_compare(&x, &y) {
            FosdOrder::StrictDom => FosdOrder::Dominated,
            FosdOrder::Dominated => FosdOrder::StrictDom,
            other => other,
        };
        prop_assert_eq!(fosd_compare(&y, &x), expected);
        let (a, b) = gen::fosd_pair(&mut rng_from_seed(s1));
        prop_assert_eq!(fosd_compare(&a, &b), FosdOrder::StrictDom);
        prop_assert_eq!(fosd_compare(&b, &a), FosdOrder::Dominated);
    }

    #[test]
    fn regret_of_a_variable_with_itself_is_zero(seed in any::<u64>()) {
        let x = rv_from(seed, true);
        for psi in additive_psis() {
            prop_assert!(regret_lottery(&psi, &x, &x).unwrap().is_degenerate_zero());
            let p = prefer(&psi, &RegretFunctional::Expectation, &x, &x, DEFAULT_TOLERANCE).unwrap();
            prop_assert_eq!(p.verdict, Verdict::Indifferent);
            prop_assert_eq!(p.value, 0.0);
        }
    }

    #[test]
    fn expectation_of_difference_is_antisymmetric(s1 in any::<u64>(), s2 in any::<u64>()) {
        let (x, y) = (rv_from(s1, true), rv_from(s2, true));
        let v = RegretFunctional::Expectation;
        let xy = prefer(&RegretFunction::Difference, &v, &x, &y, DEFAULT_TOLERANCE).unwrap();
        let yx = prefer(&RegretFunction::Difference, &v, &y, &x, DEFAULT_TOLERANCE).unwrap();
        prop_assert_eq!(xy.exact.clone().unwrap(), -yx.exact.clone().unwrap());
        prop_assert!((xy.value + yx.value).abs() <= 1e-12);
    }

    #[test]
    fn statewise_dominance_is_preferred(seed in any::<u64>(), drops in prop::collection::vec(0i64..=2, 6)) {
        let x = rv_from(seed, true);
        let mut lowered = false;
        let cells: Vec<Cell> = x.cells().iter().zip(drops.iter().cycle()).map(|(c, d)| {
            let outcome = (&c.outcome - q(5 * d, 1)).max(q(0, 1));
            lowered |= outcome < c.outcome;
            Cell { event: c.event.clone(), outcome }
        }).collect();
        prop_assume!(lowered);
        let y = SimpleRV::new(x.bounds().clone(), cells).unwrap();
        let functionals = [
            RegretFunctional::Expectation,
            RegretFunctional::RankDependent { gamma: 0.5 },
            RegretFunctional::RankDependent { gamma: 2.0 },
        ];
        for psi in additive_psis() {
            for v in &functionals {
                let p = prefer(&psi, v, &x, &y, DEFAULT_TOLERANCE).unwrap();
                prop_assert_eq!(p.verdict, Verdict::Prefer, "{:?} {:?}", psi, v);
            }
        }
    }

    #[test]
    fn lottery_ignores_reslicing(s1 in any::<u64>(), s2 in any::<u64>()) {
        let (x, y) = (rv_from(s1, true), rv_from(s2, false));
        for psi in additive_psis() {
            let plain = regret_lottery(&psi, &x, &y).unwrap();
            prop_assert_eq!(&regret_lottery(&psi, &reslice(&x), &y).unwrap(), &plain);
            prop_assert_eq!(&regret_lottery(&psi, &x, &reslice(&y)).unwrap(), &plain);
        }
    }

    #[test]
    fn reindexing_is_a_bijection(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = rng_from_seed(seed);
        let values: Vec<BigRational> = (0..n).map(|_| q(*gen::VALUE_SET.choose(&mut rng).unwrap(), 1)).collect();
        let mut pi: Vec<usize> = (0..n).collect();
        pi.shuffle(&mut rng);
        prop_assert!(is_bijection(&pi));
        let step = pair_multiset(&values, &apply_step(&values, &pi));
        let mut z = values.clone();
        for _ in 0..=20 {
            let next = apply_step(&z, &pi);
            prop_assert_eq!(pair_multiset(&z, &next), step.clone());
            z = next;
        }
        // π^m = id, checked here by plain iteration.
        let m: usize = permutation_order(&pi).try_into().unwrap();
        let mut z = values.clone();
        let mut w: Vec<usize> = (0..n).collect();
        for _ in 0..m {
            w = apply_step_index(&w, &pi);
            z = apply_step(&z, &pi);
        }
        prop_assert_eq!(w, (0..n).collect::<Vec<_>>());
        prop_assert_eq!(z, values);
    }

    #[test]
    fn certified_pairs_are_indifferent(seed in any::<u64>(), rational in any::<bool>()) {
        let mut rng = rng_from_seed(seed);
        let (x, y) = if rational { gen::rational_pair(&mut rng) } else { gen::case1_pair(&mut rng) };
        let cert = certify_equivalence(&x, &y, CertifyConfig::default()).unwrap();
        let back = EquivalenceCertificate::from_json(&cert.to_json().unwrap()).unwrap();
        prop_assert!(verify_certificate(&back, &x, &y).passed);
        for psi in additive_psis() {
            let p = prefer(&psi, &RegretFunctional::Expectation, &x, &y, DEFAULT_TOLERANCE).unwrap();
            prop_assert!(p.value.abs() <= 1e-12, "{:?} gave {}", psi, p.value);
        }
    }

    #[test]
    fn coupling_keeps_marginals(s1 in any::<u64>(), s2 in any::<u64>()) {
        let (f, g) = (rv_from(s1, true).distribution(), rv_from(s2, true).distribution());
        let c = comonotone_couple(&f, &g);
        prop_assert_eq!(c.common_cells.iter().map(|e| e.measure()).sum::<Scalar>(), Scalar::one());
        prop_assert!(Event::union_all(&c.common_cells).is_full());
        prop_assert_eq!(c.xp.distribution(), f);
        prop_assert_eq!(c.yp.distribution(), g);
    }

    #[test]
    fn simple_rv_json_round_trip(seed in any::<u64>()) {
        let x = rv_from(seed, true);
        let back: SimpleRV = serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
        prop_assert_eq!(back, x);
    }
}

fn apply_step_index(w: &[usize], pi: &[usize]) -> Vec<usize> {
    pi.iter().map(|&j| w[j]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn nu_double_inequality(s in prop_oneof![unit_point(), scalar()], k in 1u32..=30) {
        prop_assume!(s.is_positive() && s <= Scalar::one());
        let v = nu(&s, k).unwrap();
        let scale = BigInt::one() << k;
        let lower = Scalar::from_rational(BigRational::new(v.clone(), scale.clone()));
        let upper = Scalar::from_rational(BigRational::new(v + 1, scale));
        prop_assert_eq!(decimal_compare(&lower, &s, 200), Ordering::Less);
        prop_assert_ne!(decimal_compare(&s, &upper, 200), Ordering::Greater);
    }

    #[test]
    fn quantile_then_distribution_is_identity(seed in any::<u64>()) {
        let f = rv_from(seed, seed % 3 != 0).distribution();
        prop_assert_eq!(quantile_rv(&f).distribution(), f);
    }

    #[test]
    fn fosd_implies_cellwise_dominance(seed in any::<u64>()) {
        let (x, y) = gen::fosd_pair(&mut rng_from_seed(seed));
        prop_assert_eq!(fosd_compare(&x, &y), FosdOrder::StrictDom);
        let c = comonotone_couple(&x.distribution(), &y.distribution());
        prop_assert_eq!(c.dominance(), (true, true));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn fosd_pairs_are_preferred(seed in any::<u64>()) {
        let (x, y) = gen::fosd_pair(&mut rng_from_seed(seed));
        for psi in additive_psis() {
            let report = check_fosd_preference(&psi, &RegretFunctional::Expectation, &x, &y).unwrap();
            prop_assert_eq!(report.both_prefer, Some(true), "{:?}", psi);
        }
        let report = check_fosd_preference(&RegretFunction::Difference, &RegretFunctional::Expectation, &x, &y).unwrap();
        prop_assert_eq!(report.values_agree, Some(true));
    }
}

#[test]
fn dyadic_bounds_halve() {
    let (x, y) = gen::surd_pair(&mut rng_from_seed(11));
    let cert = certify_equivalence(&x, &y, CertifyConfig::default()).unwrap();
    let CertificateBody::Case3(d) = &cert.body else { panic!("expected CASE3") };
    for w in d.levels.windows(2) {
        assert_eq!(w[1].disagreement_bound.mul_rational(&q(2, 1)), w[0].disagreement_bound);
        assert_eq!(w[1].imbalance_bound.mul_rational(&q(2, 1)), w[0].imbalance_bound);
    }
    assert!(verify_certificate(&cert, &x, &y).passed);
}

#[test]
fn levy_of_point_masses_one_apart() {
    let f = Distribution::from_pairs([(q(0, 1), Scalar::one())]).unwrap();
    let g = Distribution::from_pairs([(q(1, 1), Scalar::one())]).unwrap();
    let exact = levy_distance(&f, &g);
    let grid = levy_grid(&f, &g, 10);
    assert_eq!(exact, Scalar::one());
    assert!((exact.to_f64() - grid).abs() <= 1.0 / 1024.0);
}
