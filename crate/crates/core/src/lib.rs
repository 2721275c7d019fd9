//! Entropy equipartition along geodesics and random walks in free groups.
//!
//! The crate computes information functions `-ln mu(P^F(x))` of partitions
//! refined along finite subsets `F` of a free group acting on a probability
//! space, and uses them to check equipartition (Shannon-McMillan-Breiman)
//! statements along boundary geodesics and random-walk trajectories.
//!
//! * [`words`]: reduced words and free-group arithmetic.
//! * [`boundary`]: boundary rays, geodesic segment sets, cocycles, random walks.
//! * [`actions`]: measure-preserving Bernoulli, finite and Z-factor actions.
//! * [`measure`]: exact atom measures, information, Shannon and conditional entropy.
//! * [`smb`]: skew systems and the convergence experiments.
//!
//! Numerical types are generic over [`Real`] (`f64` or `f32`); the aliases at
//! the crate root fix `f64`.

pub mod actions;
pub mod boundary;
pub mod measure;
pub mod scalar;
pub mod selftest;
pub mod smb;
pub mod words;

pub use actions::{ActionError, CoordinateSet, ModelKind, Point};
pub use boundary::{BoundaryError, RayPrefix, RwTrajectory, StepDistribution};
pub use measure::{Labeling, Limits, MeasureError, Method, PartitionSpec, RefinedAtom, Refinement, Term};
pub use scalar::Real;
pub use smb::{BasePoint, Cocycle, Sampling, SmbError};
pub use words::{Letter, Rank, ReducedWord, WordError};

pub type BernoulliModel = actions::BernoulliModel<f64>;
pub type FiniteModel = actions::FiniteModel<f64>;
pub type ZFactorModel = actions::ZFactorModel<f64>;
pub type ActionModel = actions::ActionModel<f64>;
pub type MeasureEngine = measure::MeasureEngine<f64>;
pub type EntropyEstimate = measure::EntropyEstimate<f64>;
pub type SkewSystem = smb::SkewSystem<f64>;
