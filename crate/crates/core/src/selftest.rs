//! Invariant suite run by the `selftest` command: every identity, inequality and
//! exact value the library promises, at sizes that finish in seconds.

use std::f64::consts::LN_2;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::actions::{BernoulliModel, CoordinateSet, FiniteModel, ZFactorModel};
use crate::boundary::{geodesic_cocycle, BiSequence, StepDistribution};
use crate::measure::{Labeling, MeasureEngine, Method, PartitionSpec, RefinedAtom, Refinement};
use crate::scalar::shannon;
use crate::smb::{BasePoint, Cocycle, Sampling, SkewSystem, SmbError};
use crate::words::{sphere, Rank, ReducedWord};

/// One verified inequality `observed <= bound`.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub bound: f64,
    pub observed: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Self { name: name.into(), bound, observed, pass: observed <= bound }
    }
}

fn r2() -> Rank {
    Rank::new(2).expect("rank 2")
}

fn word(s: &str) -> ReducedWord {
    ReducedWord::parse(r2(), s).expect("static word")
}

fn system(p: &[f64], partition: PartitionSpec) -> Result<SkewSystem<f64>, SmbError> {
    let engine = MeasureEngine::new(BernoulliModel::new(r2(), p.to_vec())?);
    SkewSystem::new(engine, partition, Cocycle::Geodesic)
}

fn random_word(rng: &mut ChaCha8Rng, max_len: usize) -> ReducedWord {
    let raw: Vec<usize> = (0..rng.gen_range(0..=max_len)).map(|_| rng.gen_range(0..4)).collect();
    ReducedWord::reduce_indices(r2(), &raw).expect("indices in range")
}

fn random_window2(rng: &mut ChaCha8Rng) -> PartitionSpec {
    let mut g = random_word(rng, 2);
    while g.is_identity() {
        g = random_word(rng, 2);
    }
    let labeling = match rng.gen_range(0..3) {
        0 => Labeling::WindowTuple,
        1 => Labeling::Parity,
        _ => Labeling::Table(vec![0, 1, 1, 2]),
    };
    PartitionSpec::new(vec![word(""), g], labeling).expect("distinct window")
}

/// Runs the suite. `workers` only affects the sampling-based checks' wall time.
pub fn run(seed: u64, workers: usize) -> Result<Vec<Check>, SmbError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let fair = system(&[0.5, 0.5], PartitionSpec::coordinate(r2()))?;
    let biased = system(&[0.3, 0.7], PartitionSpec::coordinate(r2()))?;
    let hp = shannon(&[0.3, 0.7]);

    let mut dev: f64 = 0.0;
    for i in 0..3 {
        let y = fair.sample_base(2000, rng.gen());
        let x = fair.sample_fiber(seed ^ i)?;
        for v in fair.info_sequence(&y, &x, 2000)?.normalized_values() {
            dev = dev.max((v - LN_2).abs());
        }
    }
    checks.push(Check::at_most("fair-coin equipartition |I/(n+1) - ln 2|", dev, 1e-12));

    let sampling = Sampling::new(50, rng.gen()).with_workers(workers);
    let est = biased.orbital_entropy_estimate(Method::PointwiseMonteCarlo, 2000, &sampling)?;
    checks.push(Check::at_most("biased-coin equipartition |mean - H(p)|", (est.value - hp).abs(), 0.02));

    let mut worst: f64 = 0.0;
    for p in [[0.5, 0.5], [0.3, 0.7]] {
        let engine = MeasureEngine::new(BernoulliModel::new(r2(), p.to_vec())?);
        for _ in 0..40 {
            let spec = Arc::new(random_window2(&mut rng));
            let n = rng.gen_range(0..=4);
            let ray = crate::boundary::sample_ray(r2(), n, rng.gen());
            let r = Refinement::along(ray.segment_sets(n)?.elements(), &spec);
            for (cells, _) in engine.atoms(&r)? {
                let atom = RefinedAtom::new(r.clone(), cells)?;
                let dp = engine.atom_measure_exact(&atom)?.measure();
                let bf: f64 = engine.atom_measure_bruteforce(&atom)?;
                worst = worst.max((dp - bf).abs() / bf);
            }
        }
    }
    checks.push(Check::at_most("frontier DP vs brute force (relative)", worst, 1e-10));

    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let sys = system(&[0.3, 0.7], random_window2(&mut rng))?;
        let y = sys.sample_base(6, rng.gen());
        for n in 0..=6 {
            worst = worst.max(sys.cesaro_identity_check(&y, n)?.discrepancy);
        }
    }
    checks.push(Check::at_most("Cesaro identity discrepancy", worst, 1e-9));

    let mut mismatches = 0;
    for _ in 0..2000 {
        let xi = BiSequence::sample_reduced(r2(), 41, 41, &mut rng);
        let (n, m): (isize, isize) = (rng.gen_range(-20..=20), rng.gen_range(-20..=20));
        let lhs = geodesic_cocycle(r2(), n + m, &xi)?;
        let rhs = &geodesic_cocycle(r2(), n, &xi.shift_by(m)?)? * &geodesic_cocycle(r2(), m, &xi)?;
        mismatches += usize::from(lhs != rhs);
    }
    checks.push(Check::at_most("cocycle identity mismatches", mismatches as f64, 0.0));

    let rank1 = Rank::new(1)?;
    let rw = |q: f64| -> Result<SkewSystem<f64>, SmbError> {
        let m = StepDistribution::parse(rank1, &[("a", q), ("A", 1.0 - q)])?;
        let engine = MeasureEngine::new(ZFactorModel::new(rank1, vec![1], vec![0.5, 0.5])?);
        SkewSystem::new(engine, PartitionSpec::coordinate(rank1), Cocycle::RandomWalk(m))
    };
    let biased_rw = rw(0.8)?.rw_experiment(2000, &Sampling::new(50, rng.gen()).with_workers(workers))?;
    checks.push(Check::at_most(
        "biased walk |estimate - 0.6 ln 2|",
        (biased_rw.estimate.value - 0.6 * LN_2).abs(),
        0.03,
    ));
    let symmetric = rw(0.5)?.rw_experiment(4000, &Sampling::new(20, rng.gen()).with_workers(workers))?;
    checks.push(Check::at_most("symmetric walk estimate", symmetric.estimate.value, 0.05));

    let shift: Vec<usize> = (0..16).map(|i| (i + 1) % 16).collect();
    let affine: Vec<usize> = (0..16).map(|i| (5 * i + 3) % 16).collect();
    let finite = SkewSystem::new(
        MeasureEngine::new(FiniteModel::from_generators(r2(), vec![shift, affine], vec![1.0 / 16.0; 16])?),
        PartitionSpec::points(),
        Cocycle::Geodesic,
    )?;
    let y = finite.sample_base(500, rng.gen());
    let x = finite.sample_fiber(rng.gen())?;
    checks.push(Check::at_most(
        "finite model I/(n+1) at n = 500",
        finite.info_sequence(&y, &x, 500)?.last(),
        16f64.ln() / 501.0,
    ));

    let mut dev: f64 = 0.0;
    let mut excess = f64::NEG_INFINITY;
    for _ in 0..20 {
        let set: Vec<ReducedWord> = (0..rng.gen_range(1..=6)).map(|_| random_word(&mut rng, 4)).collect();
        dev = dev.max((biased.seward_bound(&set)?.bound - hp).abs());
        let sys = system(&[0.3, 0.7], random_window2(&mut rng))?;
        let r = sys.seward_bound(&set)?;
        excess = excess.max(r.bound - r.partition_entropy);
    }
    checks.push(Check::at_most("Seward bound |H(P^F)/|F| - H(p)| (coordinate)", dev, 1e-12));
    checks.push(Check::at_most("Seward bound H(P^F)/|F| - H(P)", excess, 1e-12));

    let tuple = system(&[0.3, 0.7], PartitionSpec::window_tuple(vec![word(""), word("a")])?)?;
    let maximal = tuple.maximal_inequality_check(
        &[0.0, 0.5, 1.0, 2.0, 3.0],
        20,
        &Sampling::new(2000, rng.gen()).with_workers(workers),
    )?;
    let worst = maximal.rows.iter().map(|r| r.fraction - r.limit).fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::at_most("maximal inequality fraction - (e^-l + 3 sigma)", worst, 0.0));

    let mut rise = f64::NEG_INFINITY;
    let mut gap = f64::INFINITY;
    for _ in 0..5 {
        let sys = system(&[0.3, 0.7], random_window2(&mut rng))?;
        let y = sys.sample_base(10, rng.gen());
        let c: Vec<f64> = (0..=8).map(|k| sys.conditional_entropy_at(&y, k, true)).collect::<Result<_, _>>()?;
        rise = rise.max(c.windows(2).map(|p| p[1] - p[0]).fold(f64::NEG_INFINITY, f64::max));
        for n in 0..=5 {
            for m in 0..=(10 - n).min(5) {
                gap = gap.min(sys.subadditivity_gap(&y, n, m)?);
            }
        }
    }
    checks.push(Check::at_most("conditional entropies c_(k+1) - c_k", rise, 1e-12));
    checks.push(Check::at_most("subadditivity g_n + g_m(S^n) - g_(n+m), negated", -gap, 1e-12));

    let window2 = system(&[0.5, 0.5], PartitionSpec::window_tuple(vec![word(""), word("a")])?)?;
    let est = window2.estimator_concordance(400, &Sampling::new(100, rng.gen()).with_workers(workers))?;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..3 {
        for j in i + 1..3 {
            worst = worst.max((est[i].value - est[j].value).abs() - est[i].combined_bound(&est[j]));
        }
    }
    checks.push(Check::at_most("estimator concordance |diff| - 3 combined se", worst, 0.0));

    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let sys = system(&[0.3, 0.7], random_window2(&mut rng))?;
        let y = sys.sample_base(4, rng.gen());
        let x = sys.sample_fiber(rng.gen())?;
        let atom = sys.engine().atom_of(&x, &Refinement::along(&y.orbit(3)?, sys.partition()))?;
        let cylinder = BasePoint::Ray(crate::boundary::sample_ray(r2(), rng.gen_range(1..=3), rng.gen()));
        worst = worst.max(sys.one_step_preservation(&cylinder, &atom)?.discrepancy());
        let gamma = random_word(&mut rng, 6);
        let moved = RefinedAtom::new(atom.refinement().translated(&gamma), atom.cells().to_vec())?;
        let (a, b) =
            (sys.engine().atom_measure_exact(&atom)?.measure(), sys.engine().atom_measure_exact(&moved)?.measure());
        worst = worst.max((a - b).abs());
    }
    checks.push(Check::at_most("measure preservation |mu(gA) - mu(A)|, one skew step", worst, 1e-12));

    let sys = system(&[0.3, 0.7], PartitionSpec::window_tuple(vec![word(""), word("a")])?)?;
    let x = sys.engine().model().sample_point(&CoordinateSet::Whole, rng.gen())?;
    let exact = sys.sphere_average_exact(&x, 5, 1 << 16)?;
    let mc = sys.sphere_average_monte_carlo(&x, 5, 3000, rng.gen())?;
    checks.push(Check::at_most("sphere average |exact - MC| - 3 se", (exact - mc.mean).abs() - 3.0 * mc.stderr, 0.0));

    let sphere_words = sphere(r2(), 3);
    checks.push(Check::at_most("sphere size deviation", (sphere_words.len() as f64 - 36.0).abs(), 0.0));
    Ok(checks)
}
