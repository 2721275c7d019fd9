use std::collections::HashSet;

use rayon::prelude::*;

use crate::actions::{ModelKind, Point};
use crate::boundary::cylinder_probability;
use crate::measure::{EntropyEstimate, Method, PartitionSpec, RefinedAtom, SampleStats};
use crate::scalar::{CompensatedSum, Real};
use crate::words::{sphere, sphere_size, ReducedWord};

use super::sequences::is_capacity_error;
use super::{derive_seed, BasePoint, Cocycle, SkewSystem, SmbError};

/// Monte-Carlo sample count, master seed and worker count.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Sampling {
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Sampling {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self { samples, seed, workers: 1 }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        Self { workers, ..self }
    }

    pub fn base_seed(&self, index: usize) -> u64 {
        derive_seed(self.seed, index as u64, 0)
    }

    pub fn fiber_seed(&self, index: usize) -> u64 {
        derive_seed(self.seed, index as u64, 1)
    }

    /// Evaluates `f` on every sample index; the output order is the index order
    /// for any worker count.
    pub fn run<R, F>(&self, f: F) -> Result<Vec<R>, SmbError>
    where
        R: Send,
        F: Fn(usize) -> Result<R, SmbError> + Sync + Send,
    {
        if self.workers <= 1 {
            return (0..self.samples).map(f).collect();
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| SmbError::Workers(e.to_string()))?;
        pool.install(|| (0..self.samples).into_par_iter().map(&f).collect())
    }
}

fn feasible_below(limit: usize, f: impl Fn(usize) -> Result<(), SmbError>) -> usize {
    let mut feasible = 0;
    for n in 0..limit {
        if f(n).is_err() {
            break;
        }
        feasible = n;
    }
    feasible
}

#[derive(Clone, Debug, PartialEq)]
pub struct SewardReport<T> {
    /// Distinct elements of `F`.
    pub set_size: usize,
    /// `H(P^F) / |F|`.
    pub bound: T,
    /// `H(P)`.
    pub partition_entropy: T,
}

impl<T: Real> SewardReport<T> {
    /// Whether the certificate satisfies `H(P^F)/|F| <= H(P)` up to rounding.
    pub fn certified(&self) -> bool {
        self.bound <= self.partition_entropy + T::of(1e-12)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RokhlinResult<T> {
    pub estimates: Vec<EntropyEstimate<T>>,
    /// Index of the first candidate attaining the minimum.
    pub best: usize,
    pub spec: PartitionSpec,
}

impl<T: Real> RokhlinResult<T> {
    pub fn best_estimate(&self) -> &EntropyEstimate<T> {
        &self.estimates[self.best]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExceedanceRow<T> {
    pub lambda: T,
    pub cell: u32,
    pub count: usize,
    pub fraction: T,
    /// `e^-lambda`.
    pub bound: T,
    /// `e^-lambda + 3 sqrt(b (1 - b) / M)` with `b = e^-lambda`.
    pub limit: T,
}

impl<T: Real> ExceedanceRow<T> {
    pub fn pass(&self) -> bool {
        self.fraction <= self.limit
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaximalReport<T> {
    pub horizon: usize,
    pub samples: usize,
    /// Sampled `sup_{n <= N} f_n`, in sample order.
    pub maxima: Vec<T>,
    pub rows: Vec<ExceedanceRow<T>>,
}

impl<T: Real> MaximalReport<T> {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(ExceedanceRow::pass)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RwReport<T> {
    pub horizon: usize,
    /// Per-`n` mean and standard error of the normalized information.
    pub mean: Vec<T>,
    pub stderr: Vec<T>,
    pub estimate: EntropyEstimate<T>,
    /// Per-trajectory normalized information at the horizon.
    pub finals: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreservationReport<T> {
    /// `(nu x mu)(T^-1 (C x A))`.
    pub preimage: T,
    /// `(nu x mu)(C x A)`.
    pub measure: T,
}

impl<T: Real> PreservationReport<T> {
    pub fn discrepancy(&self) -> T {
        (self.preimage - self.measure).abs()
    }
}

impl<T: Real> SkewSystem<T> {
    /// Estimates the orbital entropy `h_P(alpha, X)` at horizon `N`.
    pub fn orbital_entropy_estimate(
        &self,
        method: Method,
        horizon: usize,
        sampling: &Sampling,
    ) -> Result<EntropyEstimate<T>, SmbError> {
        if method == Method::Exact {
            return self.exact_entropy().map(|h| EntropyEstimate::exact(h, horizon)).ok_or_else(|| {
                SmbError::InvalidParameter("no closed form for this system; use a sampling method".into())
            });
        }
        Ok(EntropyEstimate::from_samples(method, horizon, &self.orbital_entropy_samples(method, horizon, sampling)?))
    }

    /// Per-sample values behind [`Self::orbital_entropy_estimate`], in sample order.
    pub fn orbital_entropy_samples(
        &self,
        method: Method,
        horizon: usize,
        sampling: &Sampling,
    ) -> Result<Vec<T>, SmbError> {
        sampling.run(|i| {
            let y = self.sample_base(horizon, sampling.base_seed(i));
            let value = match method {
                Method::NormalizedEntropy => self.orbit_entropy(&y, horizon + 1).map(|h| h / T::of_usize(horizon + 1)),
                Method::ConditionalCesaro => self.conditional_entropy_at(&y, horizon, false),
                Method::PointwiseMonteCarlo => {
                    let x = self.sample_fiber(sampling.fiber_seed(i))?;
                    self.info_sequence(&y, &x, horizon).map(|s| s.last())
                }
                Method::Exact => return Err(SmbError::InvalidParameter("exact is not a sampling method".into())),
            };
            value.map_err(|e| {
                if !is_capacity_error(&e) {
                    return e;
                }
                let feasible = match method {
                    Method::ConditionalCesaro => {
                        feasible_below(horizon, |k| self.conditional_entropy_at(&y, k, false).map(|_| ()))
                    }
                    _ => self.feasible_entropy_horizon(&y, horizon),
                };
                SmbError::InfeasibleHorizon { horizon, feasible, reason: e.to_string() }
            })
        })
    }

    /// Closed-form orbital entropy, when known: a Bernoulli geodesic system whose
    /// partition reads one coordinate injectively has `h = H(P)`, because the
    /// translates along a geodesic read distinct independent coordinates.
    pub fn exact_entropy(&self) -> Option<T> {
        let model = self.engine().model();
        let spec = self.partition();
        let single = spec.window().len() == 1;
        let injective = model.alphabet_size().is_some_and(|a| spec.is_injective(a));
        (model.kind() == ModelKind::Bernoulli && matches!(self.cocycle(), Cocycle::Geodesic) && single && injective)
            .then(|| self.partition_entropy())
    }

    /// All three estimators on the same sample seeds.
    pub fn estimator_concordance(
        &self,
        horizon: usize,
        sampling: &Sampling,
    ) -> Result<Vec<EntropyEstimate<T>>, SmbError> {
        Method::ESTIMATORS.iter().map(|&m| self.orbital_entropy_estimate(m, horizon, sampling)).collect()
    }

    /// `H(P^F) / |F|` over the distinct elements of `F`.
    pub fn seward_bound(&self, set: &[ReducedWord]) -> Result<SewardReport<T>, SmbError> {
        let distinct: Vec<ReducedWord> = {
            let mut seen = HashSet::new();
            set.iter().filter(|g| seen.insert(*g)).cloned().collect()
        };
        if distinct.is_empty() {
            return Err(SmbError::InvalidParameter("Seward bound needs a nonempty set".into()));
        }
        let h = self.engine().shannon_entropy(&self.refinement(&distinct))?;
        Ok(SewardReport {
            set_size: distinct.len(),
            bound: h / T::of_usize(distinct.len()),
            partition_entropy: self.partition_entropy(),
        })
    }

    /// Minimizes the orbital-entropy estimate over candidate partitions, each
    /// assumed generating. The first candidate attaining the minimum wins.
    pub fn rokhlin_search(
        &self,
        candidates: &[PartitionSpec],
        method: Method,
        horizon: usize,
        sampling: &Sampling,
    ) -> Result<RokhlinResult<T>, SmbError> {
        if candidates.is_empty() {
            return Err(SmbError::NoCandidates);
        }
        let mut estimates = Vec::with_capacity(candidates.len());
        let mut best = 0;
        for (i, spec) in candidates.iter().enumerate() {
            let e = self.with_partition(spec.clone())?.orbital_entropy_estimate(method, horizon, sampling)?;
            if e.value < estimates.get(best).map_or(T::infinity(), |b: &EntropyEstimate<T>| b.value) {
                best = i;
            }
            estimates.push(e);
        }
        Ok(RokhlinResult { estimates, best, spec: candidates[best].clone() })
    }

    /// Empirical `(nu x mu)({(y, x) in Y x P : sup_{n <= N} f_n > lambda})` per cell and `lambda`.
    pub fn maximal_inequality_check(
        &self,
        lambdas: &[T],
        horizon: usize,
        sampling: &Sampling,
    ) -> Result<MaximalReport<T>, SmbError> {
        let draws = sampling.run(|i| {
            let y = self.sample_base(horizon, sampling.base_seed(i));
            let x = self.sample_fiber(sampling.fiber_seed(i))?;
            let cell = self.engine().atom_of(&x, &self.base())?.cells()[0];
            let f = self.conditional_limit_sequence(&y, &x, horizon)?;
            Ok((cell, f.into_iter().fold(T::zero(), T::max)))
        })?;
        let m = T::of_usize(sampling.samples.max(1));
        let mut rows = Vec::new();
        for &lambda in lambdas {
            let bound = (-lambda).exp();
            let limit = bound + T::of(3.0) * (bound * (T::one() - bound) / m).sqrt();
            for cell in 0..self.cell_count() as u32 {
                let count = draws.iter().filter(|(c, f)| *c == cell && *f > lambda).count();
                rows.push(ExceedanceRow { lambda, cell, count, fraction: T::of_usize(count) / m, bound, limit });
            }
        }
        Ok(MaximalReport { horizon, samples: sampling.samples, maxima: draws.into_iter().map(|d| d.1).collect(), rows })
    }

    fn require_geodesic(&self) -> Result<(), SmbError> {
        match self.cocycle() {
            Cocycle::Geodesic => Ok(()),
            other => Err(SmbError::WrongCocycle { expected: "geodesic", found: other.name() }),
        }
    }

    /// `(1/|S_n|) sum_{g in S_n} I(P v V_j a_1...a_j P)(x) / (n+1)` by enumerating the sphere.
    pub fn sphere_average_exact(&self, x: &Point, n: usize, max_words: u128) -> Result<T, SmbError> {
        self.require_geodesic()?;
        let size = sphere_size(self.rank(), n);
        if size > max_words {
            return Err(SmbError::InfeasibleHorizon {
                horizon: n,
                feasible: (0..n).rev().find(|&k| sphere_size(self.rank(), k) <= max_words).unwrap_or(0),
                reason: format!("sphere has {size} words, bound is {max_words}"),
            });
        }
        let mut total = CompensatedSum::new();
        for g in sphere(self.rank(), n) {
            let y = BasePoint::Ray(crate::boundary::RayPrefix::new(self.rank(), g.letters().to_vec())?);
            total.add(self.engine().information(x, &self.refinement(&y.orbit(n)?))?);
        }
        Ok(total.value() / T::of_usize(size as usize) / T::of_usize(n + 1))
    }

    /// The same average with rays drawn from `nu` (sequentially: `x` is one lazily sampled point).
    pub fn sphere_average_monte_carlo(
        &self,
        x: &Point,
        n: usize,
        samples: usize,
        seed: u64,
    ) -> Result<SampleStats<T>, SmbError> {
        self.require_geodesic()?;
        let values = (0..samples)
            .map(|i| {
                let y = self.sample_base(n, derive_seed(seed, i as u64, 0));
                Ok(self.info_sequence(&y, x, n)?.last())
            })
            .collect::<Result<Vec<T>, SmbError>>()?;
        Ok(SampleStats::of(&values))
    }

    /// Normalized information along random-walk sets, averaged over trajectories.
    pub fn rw_experiment(&self, horizon: usize, sampling: &Sampling) -> Result<RwReport<T>, SmbError> {
        if !matches!(self.cocycle(), Cocycle::RandomWalk(_)) {
            return Err(SmbError::WrongCocycle { expected: "random-walk", found: self.cocycle().name() });
        }
        let runs = sampling.run(|i| {
            let y = self.sample_base(horizon, sampling.base_seed(i));
            let x = self.sample_fiber(sampling.fiber_seed(i))?;
            Ok(self.info_sequence(&y, &x, horizon)?.normalized_values())
        })?;
        let (mut mean, mut stderr) = (Vec::with_capacity(horizon + 1), Vec::with_capacity(horizon + 1));
        let mut column = Vec::with_capacity(runs.len());
        for n in 0..=horizon {
            column.clear();
            column.extend(runs.iter().map(|r| r[n]));
            let s = SampleStats::of(&column);
            mean.push(s.mean);
            stderr.push(s.stderr);
        }
        let finals: Vec<T> = runs.iter().map(|r| r[horizon]).collect();
        Ok(RwReport {
            horizon,
            mean,
            stderr,
            estimate: EntropyEstimate::from_samples(Method::PointwiseMonteCarlo, horizon, &finals),
            finals,
        })
    }

    /// Exact one-step check that `T` preserves `nu x mu` on a cylinder `C x A`,
    /// where `C` is given by the letters (or steps) of `cylinder`.
    pub fn one_step_preservation(
        &self,
        cylinder: &BasePoint,
        atom: &RefinedAtom,
    ) -> Result<PreservationReport<T>, SmbError> {
        let engine = self.engine();
        let mu = |gamma: &ReducedWord| -> Result<T, SmbError> {
            let moved = RefinedAtom::new(atom.refinement().translated(gamma), atom.cells().to_vec())?;
            Ok(engine.atom_measure_exact(&moved)?.measure())
        };
        let identity = ReducedWord::identity(self.rank());
        let base = mu(&identity)?;
        match (self.cocycle(), cylinder) {
            (Cocycle::Geodesic, BasePoint::Ray(w)) => {
                let letters = w.letters();
                let mut preimage = CompensatedSum::new();
                for s in self.rank().letters() {
                    if letters.first() == Some(&s.inverse()) {
                        continue;
                    }
                    let extended: Vec<_> = std::iter::once(s).chain(letters.iter().copied()).collect();
                    let nu = T::of(cylinder_probability(self.rank(), &extended));
                    preimage.add(nu * mu(&ReducedWord::letter(self.rank(), s))?);
                }
                let nu_w = T::of(if letters.is_empty() { 1.0 } else { cylinder_probability(self.rank(), letters) });
                Ok(PreservationReport { preimage: preimage.value(), measure: nu_w * base })
            }
            (Cocycle::RandomWalk(m), BasePoint::Walk(w)) => {
                let law = |z: &ReducedWord| m.support().iter().filter(|(s, _)| s == z).map(|(_, p)| *p).sum::<f64>();
                let nu_w = T::of(w.steps().iter().map(law).product::<f64>());
                let mut preimage = CompensatedSum::new();
                for (z, p) in m.support() {
                    preimage.add(T::of(*p) * nu_w * mu(&z.inverse())?);
                }
                Ok(PreservationReport { preimage: preimage.value(), measure: nu_w * base })
            }
            _ => Err(SmbError::WrongCocycle { expected: self.cocycle().name(), found: "mismatched base cylinder" }),
        }
    }
}
