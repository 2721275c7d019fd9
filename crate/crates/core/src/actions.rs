//! Measure-preserving actions of `F_r` with exact measure queries.
//!
//! Action convention, used everywhere atom supports are computed:
//! `(gamma . x)(g) = x(gamma^-1 g)` on configurations. The cell of the
//! translated partition `gamma P` containing `x` is therefore read off
//! `gamma^-1 x`, whose window restriction sits at the coordinates `gamma w`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::Real;
use crate::words::{Rank, ReducedWord, WordError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActionError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("probability vector is empty")]
    EmptyProbabilities,
    #[error("probability entry {index} is {value}, must be strictly positive")]
    NonPositiveProbability { index: usize, value: f64 },
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("expected {expected} permutation tables, got {got}")]
    TableCount { expected: usize, got: usize },
    #[error("table for letter {letter} is not a permutation of 0..{size}")]
    NotAPermutation { letter: char, size: usize },
    #[error("tables for letters {letter} and its inverse are not mutually inverse")]
    InverseMismatch { letter: char },
    #[error("letter {letter} does not preserve the probability vector at point {point}")]
    NotMeasurePreserving { letter: char, point: usize },
    #[error("expected {expected} generator weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("point does not belong to this model")]
    InvalidPoint,
    #[error("coordinate {0} has not been sampled and sampling is disabled")]
    CoordinateUnavailable(String),
}

/// Index set of a configuration space.
pub trait Coordinate: Clone + Eq + Hash + Ord + Debug + Send + Sync + 'static {
    /// Group law on coordinates used to translate a configuration.
    fn compose(&self, other: &Self) -> Self;

    fn describe(&self) -> String;
}

impl Coordinate for ReducedWord {
    fn compose(&self, other: &Self) -> Self {
        self * other
    }

    fn describe(&self) -> String {
        format!("\"{self}\"")
    }
}

impl Coordinate for i64 {
    fn compose(&self, other: &Self) -> Self {
        self + other
    }

    fn describe(&self) -> String {
        self.to_string()
    }
}

fn validate_probabilities<T: Real>(probabilities: &[T]) -> Result<Vec<f64>, ActionError> {
    if probabilities.is_empty() {
        return Err(ActionError::EmptyProbabilities);
    }
    let mut cumulative = Vec::with_capacity(probabilities.len());
    let mut total = 0.0;
    for (index, p) in probabilities.iter().enumerate() {
        let value = p.as_f64();
        if value.is_nan() || value <= 0.0 {
            return Err(ActionError::NonPositiveProbability { index, value });
        }
        total += value;
        cumulative.push(total);
    }
    let tolerance = (64.0 * T::epsilon().as_f64() * probabilities.len() as f64).max(1e-9);
    if (total - 1.0).abs() > tolerance {
        return Err(ActionError::NotNormalized(total));
    }
    Ok(cumulative)
}

fn draw(cumulative: &[f64], rng: &mut ChaCha8Rng) -> u32 {
    let u = rng.gen::<f64>() * cumulative[cumulative.len() - 1];
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1) as u32
}

#[derive(Debug)]
struct LazyStore<K> {
    values: HashMap<K, u32>,
    rng: Option<ChaCha8Rng>,
    cumulative: Vec<f64>,
}

/// A lazily sampled configuration `x : K -> A`, viewed through a translation:
/// the value at `g` is the stored value at `shift . g`.
///
/// Values are drawn on first access and then reused, so extending the set of
/// inspected coordinates never changes earlier ones. A configuration is
/// confined to one thread; translated copies share the same store.
#[derive(Clone, Debug)]
pub struct Configuration<K: Coordinate> {
    store: Rc<RefCell<LazyStore<K>>>,
    shift: K,
}

impl<K: Coordinate> Configuration<K> {
    fn lazy(identity: K, cumulative: Vec<f64>, seed: u64) -> Self {
        let store = LazyStore { values: HashMap::new(), rng: Some(ChaCha8Rng::seed_from_u64(seed)), cumulative };
        Self { store: Rc::new(RefCell::new(store)), shift: identity }
    }

    fn frozen(identity: K, values: HashMap<K, u32>) -> Self {
        let store = LazyStore { values, rng: None, cumulative: Vec::new() };
        Self { store: Rc::new(RefCell::new(store)), shift: identity }
    }

    pub fn symbol(&self, g: &K) -> Result<u32, ActionError> {
        let key = self.shift.compose(g);
        let mut store = self.store.borrow_mut();
        if let Some(&v) = store.values.get(&key) {
            return Ok(v);
        }
        let LazyStore { values, rng, cumulative } = &mut *store;
        match rng {
            Some(rng) => {
                let v = draw(cumulative, rng);
                values.insert(key, v);
                Ok(v)
            }
            None => Err(ActionError::CoordinateUnavailable(g.describe())),
        }
    }

    /// Number of stored coordinates (sampled or given).
    pub fn stored(&self) -> usize {
        self.store.borrow().values.len()
    }

    fn translated(&self, by: &K) -> Self {
        Self { store: Rc::clone(&self.store), shift: self.shift.compose(by) }
    }
}

impl<K: Coordinate> PartialEq for Configuration<K> {
    fn eq(&self, other: &Self) -> bool {
        Rc::ptr_eq(&self.store, &other.store) && self.shift == other.shift
    }
}

/// A point of one of the model spaces.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    /// `A^{F_r}` (Bernoulli model).
    Words(Configuration<ReducedWord>),
    /// `A^Z` (Z-factor model).
    Integers(Configuration<i64>),
    /// A point of a finite space.
    Site(usize),
}

impl Point {
    /// A fixed configuration on the free group; unlisted coordinates are unavailable.
    pub fn from_word_assignment(rank: Rank, values: impl IntoIterator<Item = (ReducedWord, u32)>) -> Self {
        Point::Words(Configuration::frozen(ReducedWord::identity(rank), values.into_iter().collect()))
    }

    pub fn from_integer_assignment(values: impl IntoIterator<Item = (i64, u32)>) -> Self {
        Point::Integers(Configuration::frozen(0, values.into_iter().collect()))
    }

    pub fn symbol_at_word(&self, g: &ReducedWord) -> Result<u32, ActionError> {
        match self {
            Point::Words(c) => c.symbol(g),
            _ => Err(ActionError::InvalidPoint),
        }
    }

    pub fn symbol_at_integer(&self, k: i64) -> Result<u32, ActionError> {
        match self {
            Point::Integers(c) => c.symbol(&k),
            _ => Err(ActionError::InvalidPoint),
        }
    }

    /// Reads the symbols at `coords`, sampling where needed.
    pub fn symbols(&self, coords: &CoordinateSet) -> Result<Vec<u32>, ActionError> {
        match (self, coords) {
            (Point::Words(c), CoordinateSet::Words(ws)) => ws.iter().map(|g| c.symbol(g)).collect(),
            (Point::Integers(c), CoordinateSet::Integers(ks)) => ks.iter().map(|k| c.symbol(k)).collect(),
            _ => Err(ActionError::InvalidPoint),
        }
    }
}

/// The coordinates a translated window partition depends on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoordinateSet {
    Words(Vec<ReducedWord>),
    Integers(Vec<i64>),
    /// Finite models: cells are arbitrary subsets of the whole space.
    Whole,
}

/// Product measure `p^{F_r}` on `A^{F_r}` with the translation action.
#[derive(Clone, Debug, PartialEq)]
pub struct BernoulliModel<T> {
    rank: Rank,
    probabilities: Vec<T>,
}

impl<T: Real> BernoulliModel<T> {
    pub fn new(rank: Rank, probabilities: Vec<T>) -> Result<Self, ActionError> {
        validate_probabilities(&probabilities)?;
        Ok(Self { rank, probabilities })
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn probabilities(&self) -> &[T] {
        &self.probabilities
    }
}

/// Permutation action of `F_r` on a finite probability space.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteModel<T> {
    rank: Rank,
    /// `tables[l][i]` is the image `l . i` of point `i` under letter `l`.
    tables: Vec<Vec<usize>>,
    probabilities: Vec<T>,
}

impl<T: Real> FiniteModel<T> {
    /// Builds the model from one permutation per generator; inverse letters get
    /// the inverse permutations.
    pub fn from_generators(
        rank: Rank,
        generators: Vec<Vec<usize>>,
        probabilities: Vec<T>,
    ) -> Result<Self, ActionError> {
        if generators.len() != rank.get() {
            return Err(ActionError::TableCount { expected: rank.get(), got: generators.len() });
        }
        let size = probabilities.len();
        let mut tables = Vec::with_capacity(rank.alphabet_size());
        for (k, table) in generators.into_iter().enumerate() {
            let letter = rank.generator(k)?.to_char();
            if table.len() != size {
                return Err(ActionError::NotAPermutation { letter, size });
            }
            let mut inverse = vec![usize::MAX; size];
            for (i, &j) in table.iter().enumerate() {
                if j >= size || inverse[j] != usize::MAX {
                    return Err(ActionError::NotAPermutation { letter, size });
                }
                inverse[j] = i;
            }
            tables.push(table);
            tables.push(inverse);
        }
        Self::with_letter_tables(rank, tables, probabilities)
    }

    /// Builds the model from a table per letter (`2r` tables, inverse pairs adjacent).
    pub fn with_letter_tables(rank: Rank, tables: Vec<Vec<usize>>, probabilities: Vec<T>) -> Result<Self, ActionError> {
        validate_probabilities(&probabilities)?;
        if tables.len() != rank.alphabet_size() {
            return Err(ActionError::TableCount { expected: rank.alphabet_size(), got: tables.len() });
        }
        let size = probabilities.len();
        let tolerance = T::of(1e-12).max(T::epsilon() * T::of(16.0));
        for l in rank.letters() {
            let table = &tables[l.index()];
            let letter = l.to_char();
            let mut seen = vec![false; size];
            if table.len() != size || table.iter().any(|&j| j >= size || std::mem::replace(&mut seen[j], true)) {
                return Err(ActionError::NotAPermutation { letter, size });
            }
            let inverse = &tables[l.inverse().index()];
            if inverse.len() != size || (0..size).any(|i| inverse.get(table[i]) != Some(&i)) {
                return Err(ActionError::InverseMismatch { letter });
            }
            if let Some(point) = (0..size).find(|&i| (probabilities[table[i]] - probabilities[i]).abs() > tolerance) {
                return Err(ActionError::NotMeasurePreserving { letter, point });
            }
        }
        Ok(Self { rank, tables, probabilities })
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn size(&self) -> usize {
        self.probabilities.len()
    }

    pub fn probabilities(&self) -> &[T] {
        &self.probabilities
    }

    pub fn act_on_site(&self, gamma: &ReducedWord, site: usize) -> usize {
        gamma.letters().iter().rev().fold(site, |x, l| self.tables[l.index()][x])
    }
}

/// Bernoulli shift on `A^Z` driven through the homomorphism `phi : F_r -> Z`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZFactorModel<T> {
    rank: Rank,
    weights: Vec<i64>,
    probabilities: Vec<T>,
}

impl<T: Real> ZFactorModel<T> {
    /// `weights[k]` is `phi(a_k)`; `phi(a_k^-1) = -weights[k]`.
    pub fn new(rank: Rank, weights: Vec<i64>, probabilities: Vec<T>) -> Result<Self, ActionError> {
        if weights.len() != rank.get() {
            return Err(ActionError::WeightCount { expected: rank.get(), got: weights.len() });
        }
        validate_probabilities(&probabilities)?;
        Ok(Self { rank, weights, probabilities })
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn probabilities(&self) -> &[T] {
        &self.probabilities
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn phi(&self, gamma: &ReducedWord) -> i64 {
        gamma
            .letters()
            .iter()
            .map(|l| {
                let w = self.weights[l.generator_index()];
                if l.is_inverse() {
                    -w
                } else {
                    w
                }
            })
            .sum()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Bernoulli,
    Finite,
    ZFactor,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Bernoulli => "bernoulli",
            ModelKind::Finite => "finite",
            ModelKind::ZFactor => "zfactor",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ActionModel<T> {
    Bernoulli(BernoulliModel<T>),
    Finite(FiniteModel<T>),
    ZFactor(ZFactorModel<T>),
}

impl<T: Real> From<BernoulliModel<T>> for ActionModel<T> {
    fn from(m: BernoulliModel<T>) -> Self {
        ActionModel::Bernoulli(m)
    }
}

impl<T: Real> From<FiniteModel<T>> for ActionModel<T> {
    fn from(m: FiniteModel<T>) -> Self {
        ActionModel::Finite(m)
    }
}

impl<T: Real> From<ZFactorModel<T>> for ActionModel<T> {
    fn from(m: ZFactorModel<T>) -> Self {
        ActionModel::ZFactor(m)
    }
}

impl<T: Real> ActionModel<T> {
    pub fn kind(&self) -> ModelKind {
        match self {
            ActionModel::Bernoulli(_) => ModelKind::Bernoulli,
            ActionModel::Finite(_) => ModelKind::Finite,
            ActionModel::ZFactor(_) => ModelKind::ZFactor,
        }
    }

    pub fn rank(&self) -> Rank {
        match self {
            ActionModel::Bernoulli(m) => m.rank,
            ActionModel::Finite(m) => m.rank,
            ActionModel::ZFactor(m) => m.rank,
        }
    }

    /// Symbol probabilities for configuration models, point masses for finite ones.
    pub fn probabilities(&self) -> &[T] {
        match self {
            ActionModel::Bernoulli(m) => &m.probabilities,
            ActionModel::Finite(m) => &m.probabilities,
            ActionModel::ZFactor(m) => &m.probabilities,
        }
    }

    /// `|A|` for configuration models.
    pub fn alphabet_size(&self) -> Option<usize> {
        match self {
            ActionModel::Finite(_) => None,
            m => Some(m.probabilities().len()),
        }
    }

    /// `gamma . x`.
    pub fn act(&self, gamma: &ReducedWord, x: &Point) -> Result<Point, ActionError> {
        if gamma.rank() != self.rank() {
            return Err(WordError::RankMismatch(gamma.rank().get(), self.rank().get()).into());
        }
        match (self, x) {
            (ActionModel::Bernoulli(_), Point::Words(c)) => Ok(Point::Words(c.translated(&gamma.inverse()))),
            (ActionModel::ZFactor(m), Point::Integers(c)) => Ok(Point::Integers(c.translated(&-m.phi(gamma)))),
            (ActionModel::Finite(m), Point::Site(i)) if *i < m.size() => Ok(Point::Site(m.act_on_site(gamma, *i))),
            _ => Err(ActionError::InvalidPoint),
        }
    }

    /// Draws a point; configuration coordinates in `needed` are sampled up
    /// front (in order), the rest lazily on first access.
    pub fn sample_point(&self, needed: &CoordinateSet, seed: u64) -> Result<Point, ActionError> {
        let cumulative = validate_probabilities(self.probabilities())?;
        let point = match self {
            ActionModel::Bernoulli(m) => {
                Point::Words(Configuration::lazy(ReducedWord::identity(m.rank), cumulative, seed))
            }
            ActionModel::ZFactor(_) => Point::Integers(Configuration::lazy(0, cumulative, seed)),
            ActionModel::Finite(_) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                return Ok(Point::Site(draw(&cumulative, &mut rng) as usize));
            }
        };
        if !matches!(needed, CoordinateSet::Whole) {
            point.symbols(needed)?;
        }
        Ok(point)
    }

    /// Coordinates that the cell of `gamma P` depends on, for a window partition `P`.
    pub fn coordinate_set(&self, gamma: &ReducedWord, window: &[ReducedWord]) -> CoordinateSet {
        match self {
            ActionModel::Bernoulli(_) => CoordinateSet::Words(window.iter().map(|w| gamma * w).collect()),
            ActionModel::ZFactor(m) => {
                let shift = m.phi(gamma);
                CoordinateSet::Integers(window.iter().map(|w| shift + m.phi(w)).collect())
            }
            ActionModel::Finite(_) => CoordinateSet::Whole,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r2() -> Rank {
        Rank::new(2).unwrap()
    }

    fn w(s: &str) -> ReducedWord {
        ReducedWord::parse(r2(), s).unwrap()
    }

    fn cyclic16() -> FiniteModel<f64> {
        let shift: Vec<usize> = (0..16).map(|i| (i + 1) % 16).collect();
        let affine: Vec<usize> = (0..16).map(|i| (5 * i + 3) % 16).collect();
        FiniteModel::from_generators(r2(), vec![shift, affine], vec![1.0 / 16.0; 16]).unwrap()
    }

    #[test]
    fn probability_validation() {
        assert_eq!(BernoulliModel::<f64>::new(r2(), vec![]), Err(ActionError::EmptyProbabilities));
        assert!(matches!(
            BernoulliModel::new(r2(), vec![0.0, 1.0]),
            Err(ActionError::NonPositiveProbability { index: 0, .. })
        ));
        assert!(matches!(BernoulliModel::new(r2(), vec![0.5, 0.6]), Err(ActionError::NotNormalized(_))));
        assert!(BernoulliModel::new(r2(), vec![0.3_f32, 0.7]).is_ok());
    }

    #[test]
    fn finite_model_validation() {
        let bad = FiniteModel::from_generators(r2(), vec![vec![0, 0], vec![1, 0]], vec![0.5, 0.5]);
        assert!(matches!(bad, Err(ActionError::NotAPermutation { letter: 'a', .. })));
        let skewed = FiniteModel::from_generators(r2(), vec![vec![1, 0], vec![0, 1]], vec![0.25, 0.75]);
        assert!(matches!(skewed, Err(ActionError::NotMeasurePreserving { letter: 'a', .. })));
        let tables = vec![vec![1, 2, 0], vec![1, 2, 0], vec![0, 1, 2], vec![0, 1, 2]];
        let mismatched = FiniteModel::with_letter_tables(r2(), tables, vec![1.0 / 3.0; 3]);
        assert!(matches!(mismatched, Err(ActionError::InverseMismatch { .. })));
        let m = cyclic16();
        assert_eq!(m.act_on_site(&w("a"), 3), 4);
        assert_eq!(m.act_on_site(&w("A"), 0), 15);
        assert_eq!(m.act_on_site(&w("ab"), 1), 9);
    }

    #[test]
    fn zfactor_homomorphism() {
        let m = ZFactorModel::new(r2(), vec![1, 0], vec![0.5, 0.5]).unwrap();
        assert_eq!(m.phi(&w("")), 0);
        assert_eq!(m.phi(&w("aabA")), 1);
        let model: ActionModel<f64> = m.into();
        assert_eq!(model.coordinate_set(&w("aaBa"), &[w("")]), CoordinateSet::Integers(vec![3]));
        assert!(ZFactorModel::new(r2(), vec![1], vec![1.0]).is_err());
    }

    #[test]
    fn coordinate_sets_follow_convention() {
        let model: ActionModel<f64> = BernoulliModel::new(r2(), vec![0.5, 0.5]).unwrap().into();
        assert_eq!(model.coordinate_set(&w(""), &[w(""), w("a")]), CoordinateSet::Words(vec![w(""), w("a")]));
        assert_eq!(model.coordinate_set(&w("ab"), &[w("")]), CoordinateSet::Words(vec![w("ab")]));
        assert_eq!(model.coordinate_set(&w("ab"), &[w("B")]), CoordinateSet::Words(vec![w("a")]));
        assert_eq!(ActionModel::from(cyclic16()).coordinate_set(&w("a"), &[]), CoordinateSet::Whole);
    }

    #[test]
    fn bernoulli_action_convention() {
        let model: ActionModel<f64> = BernoulliModel::new(r2(), vec![0.5, 0.5]).unwrap().into();
        let x = model.sample_point(&CoordinateSet::Words(vec![]), 3).unwrap();
        assert_eq!(model.act(&w(""), &x).unwrap(), x);
        let ax = model.act(&w("a"), &x).unwrap();
        // (a.x)(a) = x(e)
        assert_eq!(ax.symbol_at_word(&w("a")).unwrap(), x.symbol_at_word(&w("")).unwrap());
        assert_eq!(ax.symbol_at_word(&w("ab")).unwrap(), x.symbol_at_word(&w("b")).unwrap());
        assert_eq!(model.act(&w("a"), &Point::Site(0)), Err(ActionError::InvalidPoint));
    }

    #[test]
    fn frozen_points_refuse_to_sample() {
        let x = Point::from_word_assignment(r2(), [(w(""), 0), (w("a"), 1)]);
        assert_eq!(x.symbol_at_word(&w("a")).unwrap(), 1);
        assert!(matches!(x.symbol_at_word(&w("b")), Err(ActionError::CoordinateUnavailable(_))));
    }

    #[test]
    fn lazy_sampling_is_consistent() {
        let model: ActionModel<f64> = BernoulliModel::new(r2(), vec![0.2, 0.3, 0.5]).unwrap().into();
        let x = model.sample_point(&CoordinateSet::Words(vec![w("a"), w("b")]), 11).unwrap();
        let first = x.symbol_at_word(&w("a")).unwrap();
        for g in crate::words::sphere(r2(), 3) {
            x.symbol_at_word(&g).unwrap();
        }
        assert_eq!(x.symbol_at_word(&w("a")).unwrap(), first);
        let y = model.act(&w("bA"), &x).unwrap();
        assert_eq!(y.symbol_at_word(&w("bA")).unwrap(), x.symbol_at_word(&w("")).unwrap());
    }

    #[test]
    fn symbol_frequencies_and_independence() {
        let p = [0.3, 0.7];
        let model: ActionModel<f64> = BernoulliModel::new(r2(), p.to_vec()).unwrap().into();
        let n = 100_000;
        let coords = CoordinateSet::Words(vec![w(""), w("ab")]);
        let mut ones = [0usize; 2];
        let mut both = 0usize;
        for seed in 0..n {
            let x = model.sample_point(&coords, seed as u64).unwrap();
            let s = x.symbols(&coords).unwrap();
            ones[0] += s[0] as usize;
            ones[1] += s[1] as usize;
            both += (s[0] * s[1]) as usize;
        }
        let se = (p[1] * p[0] / n as f64).sqrt();
        for c in ones {
            assert!((c as f64 / n as f64 - p[1]).abs() < 3.0 * se);
        }
        let (m0, m1, m01) = (ones[0] as f64 / n as f64, ones[1] as f64 / n as f64, both as f64 / n as f64);
        let corr = (m01 - m0 * m1) / ((m0 * (1.0 - m0)) * (m1 * (1.0 - m1))).sqrt();
        assert!(corr.abs() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn finite_point_frequencies() {
        let model: ActionModel<f64> =
            FiniteModel::from_generators(r2(), vec![vec![1, 0, 2], vec![0, 1, 2]], vec![0.25, 0.25, 0.5])
                .unwrap()
                .into();
        let n = 100_000;
        let mut counts = [0usize; 3];
        for seed in 0..n {
            match model.sample_point(&CoordinateSet::Whole, seed).unwrap() {
                Point::Site(i) => counts[i] += 1,
                _ => unreachable!(),
            }
        }
        for (c, p) in counts.iter().zip([0.25, 0.25, 0.5]) {
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((*c as f64 / n as f64 - p).abs() < 3.0 * se);
        }
    }

    fn arb_word(max_len: usize) -> impl Strategy<Value = ReducedWord> {
        prop::collection::vec(0usize..4, 0..=max_len)
            .prop_map(|raw| ReducedWord::reduce_indices(Rank::new(2).unwrap(), &raw).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn action_composes(g1 in arb_word(8), g2 in arb_word(8), seed in any::<u64>(), probe in arb_word(4)) {
            let bern: ActionModel<f64> = BernoulliModel::new(r2(), vec![0.5, 0.5]).unwrap().into();
            let x = bern.sample_point(&CoordinateSet::Words(vec![]), seed).unwrap();
            let lhs = bern.act(&(&g1 * &g2), &x).unwrap();
            let rhs = bern.act(&g1, &bern.act(&g2, &x).unwrap()).unwrap();
            prop_assert_eq!(lhs.symbol_at_word(&probe).unwrap(), rhs.symbol_at_word(&probe).unwrap());
            prop_assert_eq!(lhs, rhs);

            let fin: ActionModel<f64> = cyclic16().into();
            let site = Point::Site((seed % 16) as usize);
            prop_assert_eq!(fin.act(&(&g1 * &g2), &site).unwrap(), fin.act(&g1, &fin.act(&g2, &site).unwrap()).unwrap());

            let z: ActionModel<f64> = ZFactorModel::new(r2(), vec![2, -1], vec![0.5, 0.5]).unwrap().into();
            let xz = z.sample_point(&CoordinateSet::Integers(vec![]), seed).unwrap();
            prop_assert_eq!(z.act(&(&g1 * &g2), &xz).unwrap(), z.act(&g1, &z.act(&g2, &xz).unwrap()).unwrap());
        }
    }

    proptest! {
        #[test]
        fn zfactor_acts_through_phi(g1 in arb_word(8), h in arb_word(6), seed in any::<u64>()) {
            let m = ZFactorModel::new(r2(), vec![1, 1], vec![0.5, 0.5]).unwrap();
            let g2 = &(&g1 * &h) * &(&w("aB") * &h.inverse());
            prop_assert_eq!(m.phi(&g1), m.phi(&g2));
            let z: ActionModel<f64> = m.into();
            let x = z.sample_point(&CoordinateSet::Integers(vec![]), seed).unwrap();
            let (a, b) = (z.act(&g1, &x).unwrap(), z.act(&g2, &x).unwrap());
            for k in -5..5 {
                prop_assert_eq!(a.symbol_at_integer(k).unwrap(), b.symbol_at_integer(k).unwrap());
            }
        }
    }
}
