use std::f64::consts::LN_2;

use super::*;
use crate::actions::{BernoulliModel, FiniteModel, ZFactorModel};
use crate::boundary::{RayPrefix, RwTrajectory, StepDistribution};
use crate::measure::{Labeling, MeasureEngine, Method, PartitionSpec, RefinedAtom, Refinement};
use crate::scalar::shannon;
use crate::words::{Rank, ReducedWord};

fn r2() -> Rank {
    Rank::new(2).unwrap()
}

fn w(s: &str) -> ReducedWord {
    ReducedWord::parse(r2(), s).unwrap()
}

fn bernoulli(p: &[f64], partition: PartitionSpec) -> SkewSystem<f64> {
    let engine = MeasureEngine::new(BernoulliModel::new(r2(), p.to_vec()).unwrap());
    SkewSystem::new(engine, partition, Cocycle::Geodesic).unwrap()
}

fn coordinate(p: &[f64]) -> SkewSystem<f64> {
    bernoulli(p, PartitionSpec::coordinate(r2()))
}

fn tuple() -> PartitionSpec {
    PartitionSpec::window_tuple(vec![w(""), w("a")]).unwrap()
}

fn parity() -> PartitionSpec {
    PartitionSpec::new(vec![w(""), w("b")], Labeling::Parity).unwrap()
}

#[test]
fn fair_coin_information_is_ln2() {
    let sys = coordinate(&[0.5, 0.5]);
    let y = sys.sample_base(300, 1);
    let x = sys.sample_fiber(2).unwrap();
    let seq = sys.info_sequence(&y, &x, 300).unwrap();
    for v in seq.normalized_values() {
        assert!((v - LN_2).abs() <= 1e-12);
    }
    assert!(seq.tail_slope().abs() < 1e-12);
    assert!(matches!(sys.info_sequence(&y, &x, 301), Err(SmbError::HorizonTooLong { .. })));
}

#[test]
fn finite_information_bounded_by_log_size() {
    let shift: Vec<usize> = (0..16).map(|i| (i + 1) % 16).collect();
    let affine: Vec<usize> = (0..16).map(|i| (5 * i + 3) % 16).collect();
    let engine =
        MeasureEngine::new(FiniteModel::from_generators(r2(), vec![shift, affine], vec![1.0 / 16.0; 16]).unwrap());
    let sys = SkewSystem::new(engine, PartitionSpec::points(), Cocycle::Geodesic).unwrap();
    let y = sys.sample_base(60, 3);
    let x = sys.sample_fiber(4).unwrap();
    let seq = sys.info_sequence(&y, &x, 60).unwrap();
    for (n, v) in seq.normalized_values().into_iter().enumerate() {
        assert!(v <= 16f64.ln() / (n + 1) as f64 + 1e-12);
    }
}

#[test]
fn walk_orbits() {
    let rank = Rank::new(1).unwrap();
    let m = StepDistribution::parse(rank, &[("a", 1.0)]).unwrap();
    let engine = MeasureEngine::new(ZFactorModel::new(rank, vec![1], vec![0.5, 0.5]).unwrap());
    let sys = SkewSystem::new(engine, PartitionSpec::coordinate(rank), Cocycle::RandomWalk(m)).unwrap();
    let y = sys.sample_base(5, 0);
    let orbit: Vec<String> = y.orbit(2).unwrap().iter().map(|g| g.to_string()).collect();
    assert_eq!(orbit, ["", "A", "AA"]);
    let report = sys.rw_experiment(40, &Sampling::new(3, 9)).unwrap();
    for v in &report.mean {
        assert!((v - LN_2).abs() < 1e-12);
    }
}

#[test]
fn fibrewise_sequences() {
    let sys = coordinate(&[0.3, 0.7]);
    let h = shannon(&[0.3, 0.7]);
    let y = sys.sample_base(10, 5);
    for v in sys.fibrewise_entropy_sequence(&y, 10).unwrap() {
        assert!((v - h).abs() < 1e-12);
    }
    let sys = bernoulli(&[0.3, 0.7], parity());
    let hp = sys.partition_entropy();
    for v in sys.fibrewise_entropy_sequence(&y, 6).unwrap() {
        assert!(v <= hp + 1e-12);
    }
}

#[test]
fn subadditivity_holds() {
    for spec in [tuple(), parity()] {
        let sys = bernoulli(&[0.3, 0.7], spec);
        for seed in 0..4 {
            let y = sys.sample_base(12, seed);
            for n in 0..=6 {
                for m in 0..=(12 - n).min(6) {
                    assert!(sys.subadditivity_gap(&y, n, m).unwrap() >= -1e-12, "n={n} m={m}");
                }
            }
        }
    }
}

#[test]
fn cesaro_identity() {
    let sys = bernoulli(&[0.3, 0.7], parity());
    let y = sys.sample_base(6, 11);
    let zero = sys.cesaro_identity_check(&y, 0).unwrap();
    assert!((zero.lhs - sys.partition_entropy()).abs() < 1e-12);
    assert_eq!(zero.discrepancy, 0.0);
    for n in 1..=6 {
        assert!(sys.cesaro_identity_check(&y, n).unwrap().discrepancy <= 1e-9);
    }
    let coord = coordinate(&[0.3, 0.7]);
    let report = coord.cesaro_identity_check(&y, 5).unwrap();
    for t in report.terms {
        assert!((t - shannon(&[0.3, 0.7])).abs() < 1e-12);
    }
}

#[test]
fn conditional_sequences() {
    let sys = coordinate(&[0.3, 0.7]);
    let y = sys.sample_base(20, 2);
    let x = sys.sample_fiber(3).unwrap();
    let expected = -[0.3f64, 0.7][x.symbol_at_word(&w("")).unwrap() as usize].ln();
    for f in sys.conditional_limit_sequence(&y, &x, 20).unwrap() {
        assert!((f - expected).abs() < 1e-12);
    }
    let sys = bernoulli(&[0.3, 0.7], parity());
    let c = sys.conditional_entropies(&y, 8).unwrap();
    assert!(c.windows(2).all(|p| p[1] <= p[0]));
    let tuple_sys = bernoulli(&[0.5, 0.5], tuple());
    let ray = BasePoint::Ray(RayPrefix::parse(r2(), "aba").unwrap());
    let c = tuple_sys.conditional_entropies(&ray, 3).unwrap();
    assert_eq!(c, vec![2.0 * LN_2, LN_2, LN_2, LN_2]);
}

#[test]
fn seward_examples() {
    let sys = coordinate(&[0.3, 0.7]);
    let h = sys.partition_entropy();
    let report = sys.seward_bound(&[w(""), w("a"), w("ab"), w("bA"), w("BB")]).unwrap();
    assert!((report.bound - h).abs() < 1e-12);
    assert!((sys.seward_bound(&[w("")]).unwrap().bound - h).abs() < 1e-15);
    let sys = bernoulli(&[0.3, 0.7], tuple());
    let report = sys.seward_bound(&[w(""), w("a")]).unwrap();
    assert!(report.certified() && report.bound < report.partition_entropy);
    assert!(sys.seward_bound(&[]).is_err());
}

#[test]
fn rokhlin_prefers_coordinate() {
    let sys = coordinate(&[0.3, 0.7]);
    let sampling = Sampling::new(8, 1);
    let h = sys.partition_entropy();
    let single =
        sys.rokhlin_search(&[PartitionSpec::coordinate(r2())], Method::NormalizedEntropy, 20, &sampling).unwrap();
    assert!((single.best_estimate().value - h).abs() < 1e-12);
    let pair = [PartitionSpec::coordinate(r2()), tuple()];
    let both = sys.rokhlin_search(&pair, Method::NormalizedEntropy, 20, &sampling).unwrap();
    assert_eq!(both.best, 0);
    assert!(both.estimates[1].value > both.estimates[0].value);
    let dup = [PartitionSpec::coordinate(r2()), tuple(), PartitionSpec::coordinate(r2())];
    let again = sys.rokhlin_search(&dup, Method::NormalizedEntropy, 20, &sampling).unwrap();
    assert_eq!((again.best, again.best_estimate().value), (0, both.best_estimate().value));
    assert_eq!(sys.rokhlin_search(&[], Method::NormalizedEntropy, 5, &sampling), Err(SmbError::NoCandidates));
}

#[test]
fn estimators_on_coordinate_partition() {
    let sys = coordinate(&[0.3, 0.7]);
    let h = sys.partition_entropy();
    let sampling = Sampling::new(40, 3);
    let est = sys.estimator_concordance(30, &sampling).unwrap();
    assert!((est[0].value - h).abs() < 1e-12 && est[0].stderr < 1e-12);
    assert!((est[1].value - h).abs() < 1e-12);
    assert!(est[0].agrees_with(&est[2]) && est[1].agrees_with(&est[2]));
    let exact = sys.orbital_entropy_estimate(Method::Exact, 3, &sampling).unwrap();
    assert_eq!((exact.value, exact.stderr, exact.method), (h, 0.0, Method::Exact));
    assert!(bernoulli(&[0.3, 0.7], parity()).orbital_entropy_estimate(Method::Exact, 3, &sampling).is_err());
}

#[test]
fn infeasible_horizon_reports_bound() {
    let sys = bernoulli(&[0.3, 0.7], parity());
    let limited = SkewSystem::new(
        MeasureEngine::with_limits(
            BernoulliModel::new(r2(), vec![0.3, 0.7]).unwrap(),
            crate::measure::Limits { max_atoms: 64, ..Default::default() },
        ),
        parity(),
        Cocycle::Geodesic,
    )
    .unwrap();
    match limited.orbital_entropy_estimate(Method::NormalizedEntropy, 12, &Sampling::new(1, 0)) {
        Err(SmbError::InfeasibleHorizon { horizon: 12, feasible, .. }) => assert!((4..12).contains(&feasible)),
        other => panic!("{other:?}"),
    }
    assert!(sys.orbital_entropy_estimate(Method::NormalizedEntropy, 4, &Sampling::new(2, 0)).is_ok());
}

#[test]
fn maximal_check_trivial_cases() {
    let sys = coordinate(&[0.5, 0.5]);
    let report = sys.maximal_inequality_check(&[0.0, 1.0], 10, &Sampling::new(200, 4)).unwrap();
    assert!(report.pass());
    for m in &report.maxima {
        assert!((m - LN_2).abs() < 1e-12);
    }
    assert!(report.rows.iter().filter(|r| r.lambda == 1.0).all(|r| r.count == 0));
}

#[test]
fn sphere_averages() {
    let sys = coordinate(&[0.5, 0.5]);
    let x = sys.sample_fiber(1).unwrap();
    for n in [0, 1, 3] {
        assert!((sys.sphere_average_exact(&x, n, 1 << 20).unwrap() - LN_2).abs() < 1e-12);
    }
    let sys = bernoulli(&[0.3, 0.7], tuple());
    let x = sys.sample_fiber(2).unwrap();
    let by_hand: f64 = ["a", "A", "b", "B"]
        .iter()
        .map(|g| sys.engine().information(&x, &Refinement::along(&[w(""), w(g)], sys.partition())).unwrap() / 2.0)
        .sum::<f64>()
        / 4.0;
    assert!((sys.sphere_average_exact(&x, 1, 4).unwrap() - by_hand).abs() < 1e-12);
    let exact = sys.sphere_average_exact(&x, 4, 1 << 20).unwrap();
    let mc = sys.sphere_average_monte_carlo(&x, 4, 4000, 7).unwrap();
    assert!((exact - mc.mean).abs() < 3.0 * mc.stderr);
    assert!(matches!(sys.sphere_average_exact(&x, 5, 100), Err(SmbError::InfeasibleHorizon { feasible: 3, .. })));
}

#[test]
fn one_step_preservation_is_exact() {
    let sys = bernoulli(&[0.3, 0.7], tuple());
    let y = sys.sample_base(6, 0);
    let x = sys.sample_fiber(0).unwrap();
    let atom = sys.engine().atom_of(&x, &Refinement::along(&y.orbit(3).unwrap(), sys.partition())).unwrap();
    let cylinder = BasePoint::Ray(RayPrefix::parse(r2(), "bA").unwrap());
    let report = sys.one_step_preservation(&cylinder, &atom).unwrap();
    assert!(report.discrepancy() < 1e-15);

    let m = StepDistribution::parse(r2(), &[("a", 0.5), ("b", 0.25), ("BA", 0.25)]).unwrap();
    let rw = SkewSystem::new(sys.engine().clone(), tuple(), Cocycle::RandomWalk(m)).unwrap();
    let cylinder = BasePoint::Walk(RwTrajectory::from_steps(r2(), vec![w("b"), w("a")]).unwrap());
    let atom = RefinedAtom::new(Refinement::along(&[w(""), w("ab")], sys.partition()), vec![1, 3]).unwrap();
    let report = rw.one_step_preservation(&cylinder, &atom).unwrap();
    assert!(report.discrepancy() < 1e-15 && report.measure > 0.0);
}

#[test]
fn worker_count_does_not_change_results() {
    let sys = bernoulli(&[0.3, 0.7], tuple());
    let one = sys.orbital_entropy_estimate(Method::PointwiseMonteCarlo, 50, &Sampling::new(16, 5)).unwrap();
    let four =
        sys.orbital_entropy_estimate(Method::PointwiseMonteCarlo, 50, &Sampling::new(16, 5).with_workers(4)).unwrap();
    assert_eq!(one, four);
}

#[test]
fn seeds_differ_across_streams() {
    assert_ne!(derive_seed(1, 0, 0), derive_seed(1, 0, 1));
    assert_ne!(derive_seed(1, 0, 0), derive_seed(1, 1, 0));
    assert_eq!(derive_seed(42, 7, 1), derive_seed(42, 7, 1));
}
