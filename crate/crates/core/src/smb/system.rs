use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::actions::{CoordinateSet, ModelKind, Point};
use crate::boundary::{RayPrefix, RwTrajectory, StepDistribution};
use crate::measure::{MeasureEngine, PartitionSpec, Refinement, Term};
use crate::scalar::{shannon, Real};
use crate::words::{Rank, ReducedWord, WordError};

use super::SmbError;

/// The base dynamics `(Y, nu, S)` together with its cocycle.
#[derive(Clone, Debug, PartialEq)]
pub enum Cocycle {
    /// Boundary rays under the uniform Markov measure, `alpha(y, S^k y) = xi_0 ... xi_{k-1}`.
    Geodesic,
    /// I.i.d. increments with the given law, `alpha(omega, S^k omega) = gamma_{k-1}^-1`.
    RandomWalk(StepDistribution),
}

impl Cocycle {
    pub fn name(&self) -> &'static str {
        match self {
            Cocycle::Geodesic => "geodesic",
            Cocycle::RandomWalk(_) => "random-walk",
        }
    }
}

/// A finite piece of a base point: a ray prefix or a walk trajectory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BasePoint {
    Ray(RayPrefix),
    Walk(RwTrajectory),
}

impl BasePoint {
    /// Largest `n` for which `F_n` is available.
    pub fn horizon(&self) -> usize {
        match self {
            BasePoint::Ray(r) => r.len(),
            BasePoint::Walk(w) => w.len(),
        }
    }

    /// `alpha(y, S^k y)` for `k = 0..=n`, in order and with repeats.
    pub fn orbit(&self, n: usize) -> Result<Vec<ReducedWord>, SmbError> {
        Ok(match self {
            BasePoint::Ray(r) => r.segment_sets(n)?.into_elements(),
            BasePoint::Walk(w) => w.segment_sets(n)?,
        })
    }

    /// `S^k y`.
    pub fn shifted(&self, k: usize) -> Result<BasePoint, SmbError> {
        Ok(match self {
            BasePoint::Ray(r) => BasePoint::Ray(r.shifted(k)?),
            BasePoint::Walk(w) => BasePoint::Walk(w.shifted(k)?),
        })
    }
}

/// Stream seed for sample `index`, sub-stream `stream`, of an experiment seeded by `master`.
pub fn derive_seed(master: u64, index: u64, stream: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(mix(mix(master) ^ index) ^ stream.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

/// Skew extension `T(y, x) = (S y, alpha(S y, y) x)` of a base by a fiber action,
/// with the partition whose refinements are studied.
#[derive(Clone, Debug)]
pub struct SkewSystem<T> {
    engine: MeasureEngine<T>,
    partition: Arc<PartitionSpec>,
    cocycle: Cocycle,
    cell_measures: Vec<T>,
}

impl<T: Real> SkewSystem<T> {
    pub fn new(engine: MeasureEngine<T>, partition: PartitionSpec, cocycle: Cocycle) -> Result<Self, SmbError> {
        let rank = engine.model().rank();
        if let Cocycle::RandomWalk(m) = &cocycle {
            if m.rank() != rank {
                return Err(WordError::RankMismatch(m.rank().get(), rank.get()).into());
            }
        }
        let cell_measures = engine.validate_partition(&partition)?;
        Ok(Self { engine, partition: Arc::new(partition), cocycle, cell_measures })
    }

    /// Same base and fiber, another partition.
    pub fn with_partition(&self, partition: PartitionSpec) -> Result<Self, SmbError> {
        Self::new(self.engine.clone(), partition, self.cocycle.clone())
    }

    pub fn engine(&self) -> &MeasureEngine<T> {
        &self.engine
    }

    pub fn partition(&self) -> &Arc<PartitionSpec> {
        &self.partition
    }

    pub fn cocycle(&self) -> &Cocycle {
        &self.cocycle
    }

    pub fn rank(&self) -> Rank {
        self.engine.model().rank()
    }

    pub fn cell_measures(&self) -> &[T] {
        &self.cell_measures
    }

    pub fn cell_count(&self) -> usize {
        self.cell_measures.len()
    }

    /// `H(P)`.
    pub fn partition_entropy(&self) -> T {
        shannon(&self.cell_measures)
    }

    /// Fiber actions outside the mixing sufficient condition for ergodicity.
    pub fn is_exploratory(&self) -> bool {
        self.engine.model().kind() == ModelKind::ZFactor
    }

    pub fn sample_base(&self, horizon: usize, seed: u64) -> BasePoint {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match &self.cocycle {
            Cocycle::Geodesic => BasePoint::Ray(RayPrefix::sample(self.rank(), horizon, &mut rng)),
            Cocycle::RandomWalk(m) => BasePoint::Walk(RwTrajectory::sample(m, horizon, &mut rng)),
        }
    }

    pub fn sample_fiber(&self, seed: u64) -> Result<Point, SmbError> {
        Ok(self.engine.model().sample_point(&CoordinateSet::Whole, seed)?)
    }

    pub(crate) fn terms(&self, elements: &[ReducedWord]) -> Vec<Term> {
        elements.iter().map(|g| Term::new(g.clone(), &self.partition)).collect()
    }

    pub(crate) fn refinement(&self, elements: &[ReducedWord]) -> Refinement {
        Refinement::along(elements, &self.partition)
    }

    pub(crate) fn base(&self) -> Refinement {
        Refinement::base(self.rank(), &self.partition)
    }
}
