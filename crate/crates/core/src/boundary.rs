//! Boundary rays of `F_r`, geodesic segment sets, the shift on bi-infinite
//! reduced sequences and the two base cocycles (geodesic and random walk).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::words::{Letter, Rank, ReducedWord, WordError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundaryError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("requested {requested} prefixes but only {available} letters are available")]
    PrefixTooShort { requested: usize, available: usize },
    #[error("index {index} lies outside the sampled window [{low}, {high})")]
    InsufficientWindow { index: isize, low: isize, high: isize },
    #[error("step distribution has empty support")]
    EmptySupport,
    #[error("step probabilities sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("step probability {0} is not positive")]
    NonPositiveProbability(f64),
}

/// `nu[xi_0 .. xi_{k-1} = letters]` under the uniform-subdivision Markov measure.
/// Non-reduced cylinders have probability zero.
pub fn cylinder_probability(rank: Rank, letters: &[Letter]) -> f64 {
    if letters.is_empty() {
        return 1.0;
    }
    if letters.windows(2).any(|w| w[1] == w[0].inverse()) {
        return 0.0;
    }
    let k = rank.alphabet_size() as f64;
    (1.0 / k) * (1.0 / (k - 1.0)).powi(letters.len() as i32 - 1)
}

fn uniform_letter<R: Rng + ?Sized>(rank: Rank, rng: &mut R) -> Letter {
    rank.letter(rng.gen_range(0..rank.alphabet_size())).expect("in range")
}

/// Uniform over the `2r - 1` letters different from `forbidden`.
fn letter_avoiding<R: Rng + ?Sized>(rank: Rank, forbidden: Letter, rng: &mut R) -> Letter {
    let mut i = rng.gen_range(0..rank.alphabet_size() - 1);
    if i >= forbidden.index() {
        i += 1;
    }
    rank.letter(i).expect("in range")
}

/// Initial segment `xi_0 ... xi_{n-1}` of a boundary ray.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RayPrefix {
    rank: Rank,
    letters: Vec<Letter>,
}

impl RayPrefix {
    pub fn new(rank: Rank, letters: Vec<Letter>) -> Result<Self, BoundaryError> {
        let w = ReducedWord::from_reduced(rank, letters)?;
        Ok(Self { rank, letters: w.letters().to_vec() })
    }

    pub fn parse(rank: Rank, text: &str) -> Result<Self, BoundaryError> {
        let w = ReducedWord::parse(rank, text)?;
        Ok(Self { rank, letters: w.letters().to_vec() })
    }

    /// Samples the first `n` letters of a `nu`-distributed ray.
    pub fn sample<R: Rng + ?Sized>(rank: Rank, n: usize, rng: &mut R) -> Self {
        let mut letters = Vec::with_capacity(n);
        if n > 0 {
            letters.push(uniform_letter(rank, rng));
        }
        while letters.len() < n {
            let prev = *letters.last().expect("nonempty");
            letters.push(letter_avoiding(rank, prev.inverse(), rng));
        }
        Self { rank, letters }
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn as_word(&self) -> ReducedWord {
        ReducedWord::from_reduced(self.rank, self.letters.clone()).expect("rays are reduced")
    }

    /// `F_n(xi) = {e, xi_0, xi_0 xi_1, ..., xi_0 ... xi_{n-1}}`.
    pub fn segment_sets(&self, n: usize) -> Result<GeodesicSets, BoundaryError> {
        if n > self.letters.len() {
            return Err(BoundaryError::PrefixTooShort { requested: n, available: self.letters.len() });
        }
        let mut prefixes = Vec::with_capacity(n + 1);
        let mut current = ReducedWord::identity(self.rank);
        prefixes.push(current.clone());
        for &l in &self.letters[..n] {
            current = current.times_letter(l);
            prefixes.push(current.clone());
        }
        Ok(GeodesicSets { prefixes })
    }

    /// The forward shift applied `k` times: drops the first `k` letters.
    pub fn shifted(&self, k: usize) -> Result<RayPrefix, BoundaryError> {
        if k > self.letters.len() {
            return Err(BoundaryError::PrefixTooShort { requested: k, available: self.letters.len() });
        }
        Ok(Self { rank: self.rank, letters: self.letters[k..].to_vec() })
    }
}

/// Convenience wrapper: [`RayPrefix::sample`] with a fresh stream from `seed`.
pub fn sample_ray(rank: Rank, n: usize, seed: u64) -> RayPrefix {
    RayPrefix::sample(rank, n, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// The prefixes `[e, xi_0, xi_0 xi_1, ...]` of a ray, in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeodesicSets {
    prefixes: Vec<ReducedWord>,
}

impl GeodesicSets {
    pub fn elements(&self) -> &[ReducedWord] {
        &self.prefixes
    }

    pub fn into_elements(self) -> Vec<ReducedWord> {
        self.prefixes
    }

    pub fn len(&self) -> usize {
        self.prefixes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefixes.is_empty()
    }

    /// `F_n^1 = F_n \ {e}`.
    pub fn without_identity(&self) -> &[ReducedWord] {
        &self.prefixes[1..]
    }
}

/// A finite window `[-back, forward)` of a bi-infinite sequence, indexed
/// relative to the current origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiSequence<E> {
    items: Vec<E>,
    origin: usize,
}

impl<E: Clone> BiSequence<E> {
    /// `items[origin]` is the entry at index 0.
    pub fn new(items: Vec<E>, origin: usize) -> Self {
        assert!(origin <= items.len(), "origin beyond window");
        Self { items, origin }
    }

    pub fn low(&self) -> isize {
        -(self.origin as isize)
    }

    pub fn high(&self) -> isize {
        (self.items.len() - self.origin) as isize
    }

    pub fn get(&self, i: isize) -> Result<&E, BoundaryError> {
        let pos = self.origin as isize + i;
        if pos < 0 || pos >= self.items.len() as isize {
            return Err(BoundaryError::InsufficientWindow { index: i, low: self.low(), high: self.high() });
        }
        Ok(&self.items[pos as usize])
    }

    pub fn items(&self) -> &[E] {
        &self.items
    }

    /// The forward shift `S`: `S(y)(i) = y(i + 1)`.
    pub fn shift(&self) -> Result<Self, BoundaryError> {
        self.shift_by(1)
    }

    /// The inverse shift `S^-1`.
    pub fn unshift(&self) -> Result<Self, BoundaryError> {
        self.shift_by(-1)
    }

    pub fn shift_by(&self, k: isize) -> Result<Self, BoundaryError> {
        let origin = self.origin as isize + k;
        if origin < 0 || origin > self.items.len() as isize {
            let index = if k < 0 { self.low() + k } else { k };
            return Err(BoundaryError::InsufficientWindow { index, low: self.low(), high: self.high() });
        }
        Ok(Self { items: self.items.clone(), origin: origin as usize })
    }
}

impl BiSequence<Letter> {
    /// Samples `xi_{-back} ... xi_{forward-1}` of a stationary non-backtracking
    /// sequence. The uniform Markov chain is reversible, so the past is sampled
    /// with the same rule as the future.
    pub fn sample_reduced<R: Rng + ?Sized>(rank: Rank, back: usize, forward: usize, rng: &mut R) -> Self {
        let first = uniform_letter(rank, rng);
        let mut future = vec![first];
        while future.len() < forward.max(1) {
            let prev = *future.last().expect("nonempty");
            future.push(letter_avoiding(rank, prev.inverse(), rng));
        }
        let mut past = Vec::with_capacity(back);
        let mut next = first;
        for _ in 0..back {
            // xi_{i-1} xi_i must not cancel: xi_{i-1} != xi_i^-1.
            let l = letter_avoiding(rank, next.inverse(), rng);
            past.push(l);
            next = l;
        }
        past.reverse();
        let origin = past.len();
        past.extend(future.into_iter().take(forward));
        Self { items: past, origin }
    }

    pub fn is_reduced(&self) -> bool {
        self.items.windows(2).all(|w| w[1] != w[0].inverse())
    }

    /// Forward part `xi_0 xi_1 ...` as a ray prefix.
    pub fn forward_ray(&self, rank: Rank) -> Result<RayPrefix, BoundaryError> {
        RayPrefix::new(rank, self.items[self.origin..].to_vec())
    }
}

/// `a(n, xi) = alpha(S^n xi, xi)`: `(xi_0 ... xi_{n-1})^-1` for `n > 0`, `e` for
/// `n = 0` and `xi_n ... xi_{-1}` for `n < 0`.
pub fn geodesic_cocycle(rank: Rank, n: isize, xi: &BiSequence<Letter>) -> Result<ReducedWord, BoundaryError> {
    let mut letters = Vec::with_capacity(n.unsigned_abs());
    if n > 0 {
        for i in (0..n).rev() {
            letters.push(xi.get(i)?.inverse());
        }
    } else {
        for i in n..0 {
            letters.push(*xi.get(i)?);
        }
    }
    Ok(ReducedWord::reduce(rank, &letters)?)
}

/// `{alpha(xi, S^k xi) : 0 <= k <= n}`, built from the cocycle; on the forward
/// side this coincides with the prefixes of the ray.
pub fn inverse_segment_sets(rank: Rank, xi: &BiSequence<Letter>, n: usize) -> Result<GeodesicSets, BoundaryError> {
    let prefixes =
        (0..=n as isize).map(|k| geodesic_cocycle(rank, k, xi).map(|g| g.inverse())).collect::<Result<Vec<_>, _>>()?;
    Ok(GeodesicSets { prefixes })
}

/// `a(n, omega) = alpha(S^n omega, omega)` for the random-walk shift:
/// `omega_{n-1} ... omega_0` for `n > 0` and `omega_n^-1 ... omega_{-1}^-1` for `n < 0`.
pub fn random_walk_cocycle(
    rank: Rank,
    n: isize,
    omega: &BiSequence<ReducedWord>,
) -> Result<ReducedWord, BoundaryError> {
    let mut acc = ReducedWord::identity(rank);
    if n > 0 {
        for i in 0..n {
            acc = omega.get(i)?.multiply(&acc)?;
        }
    } else {
        for i in n..0 {
            acc = acc.multiply(&omega.get(i)?.inverse())?;
        }
    }
    Ok(acc)
}

/// A finitely supported probability table over group elements.
#[derive(Clone, Debug, PartialEq)]
pub struct StepDistribution {
    rank: Rank,
    support: Vec<(ReducedWord, f64)>,
    cumulative: Vec<f64>,
}

impl StepDistribution {
    pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

    pub fn new(rank: Rank, entries: Vec<(ReducedWord, f64)>) -> Result<Self, BoundaryError> {
        if entries.is_empty() {
            return Err(BoundaryError::EmptySupport);
        }
        let mut total = 0.0;
        let mut cumulative = Vec::with_capacity(entries.len());
        for (w, p) in &entries {
            if w.rank() != rank {
                return Err(WordError::RankMismatch(w.rank().get(), rank.get()).into());
            }
            if p.is_nan() || *p <= 0.0 {
                return Err(BoundaryError::NonPositiveProbability(*p));
            }
            total += p;
            cumulative.push(total);
        }
        if (total - 1.0).abs() > Self::NORMALIZATION_TOLERANCE {
            return Err(BoundaryError::NotNormalized(total));
        }
        Ok(Self { rank, support: entries, cumulative })
    }

    /// Parses `(word, probability)` pairs in the text word format.
    pub fn parse(rank: Rank, entries: &[(&str, f64)]) -> Result<Self, BoundaryError> {
        let parsed =
            entries.iter().map(|(s, p)| ReducedWord::parse(rank, s).map(|w| (w, *p))).collect::<Result<Vec<_>, _>>()?;
        Self::new(rank, parsed)
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn support(&self) -> &[(ReducedWord, f64)] {
        &self.support
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &ReducedWord {
        let u: f64 = rng.gen::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.support.len() - 1);
        &self.support[i].0
    }
}

/// Increments `Z_0, Z_1, ...` and products `gamma_i = Z_i ... Z_0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RwTrajectory {
    rank: Rank,
    steps: Vec<ReducedWord>,
    products: Vec<ReducedWord>,
}

impl RwTrajectory {
    pub fn from_steps(rank: Rank, steps: Vec<ReducedWord>) -> Result<Self, BoundaryError> {
        let mut products = Vec::with_capacity(steps.len());
        let mut acc = ReducedWord::identity(rank);
        for z in &steps {
            acc = z.multiply(&acc)?;
            products.push(acc.clone());
        }
        Ok(Self { rank, steps, products })
    }

    pub fn sample<R: Rng + ?Sized>(m: &StepDistribution, n: usize, rng: &mut R) -> Self {
        let steps = (0..n).map(|_| m.sample(rng).clone()).collect();
        Self::from_steps(m.rank(), steps).expect("support shares the rank")
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[ReducedWord] {
        &self.steps
    }

    pub fn products(&self) -> &[ReducedWord] {
        &self.products
    }

    /// `F_n(omega) = {alpha(omega, S^k omega) : 0 <= k <= n}
    ///             = {e, gamma_0^-1, ..., gamma_{n-1}^-1}`, in order and with repeats.
    pub fn segment_sets(&self, n: usize) -> Result<Vec<ReducedWord>, BoundaryError> {
        if n > self.steps.len() {
            return Err(BoundaryError::PrefixTooShort { requested: n, available: self.steps.len() });
        }
        let mut out = Vec::with_capacity(n + 1);
        out.push(ReducedWord::identity(self.rank));
        out.extend(self.products[..n].iter().map(|g| g.inverse()));
        Ok(out)
    }

    /// Drops the first `k` increments (the shift on the step sequence).
    pub fn shifted(&self, k: usize) -> Result<Self, BoundaryError> {
        if k > self.steps.len() {
            return Err(BoundaryError::PrefixTooShort { requested: k, available: self.steps.len() });
        }
        Self::from_steps(self.rank, self.steps[k..].to_vec())
    }
}

pub fn sample_rw_trajectory(m: &StepDistribution, n: usize, seed: u64) -> RwTrajectory {
    RwTrajectory::sample(m, n, &mut ChaCha8Rng::seed_from_u64(seed))
}
