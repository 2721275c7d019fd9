//! Exact measures of refined atoms, information functions and Shannon entropies.

mod estimate;
mod frontier;
mod partition;

use std::collections::{HashMap, HashSet};

use indexmap::IndexMap;
use thiserror::Error;

use crate::actions::{ActionError, ActionModel, CoordinateSet, Point};
use crate::scalar::{entropy_term, shannon, CompensatedSum, Real};
use crate::words::WordError;

pub use estimate::{EntropyEstimate, Method, SampleStats};
use frontier::{Plan, Step};
pub use partition::{Labeling, PartitionSpec, RefinedAtom, Refinement, Term};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("partition window is empty")]
    EmptyWindow,
    #[error("window word {0:?} listed twice")]
    DuplicateWindowWord(String),
    #[error("coordinate labeling needs a single-word window, got {0} words")]
    CoordinateNeedsSingleWindow(usize),
    #[error("labeling table has {got} entries, expected {expected}")]
    TableLength { expected: usize, got: usize },
    #[error("{labeling} labeling is not available for the {model} model")]
    UnsupportedLabeling { labeling: &'static str, model: &'static str },
    #[error("window of {words} words is too large for an alphabet of {alphabet} symbols")]
    WindowTooLarge { words: usize, alphabet: usize },
    #[error("cell {0} has measure zero")]
    EmptyCell(u32),
    #[error("atom has {terms} terms but {cells} cells")]
    ConstraintCount { terms: usize, cells: usize },
    #[error("frontier needs up to {required_width} coordinates ({states} live states), bound is width {bound}")]
    FrontierTooWide { required_width: usize, bound: usize, states: usize },
    #[error("brute force over {coordinates} coordinates exceeds {bound} states")]
    BruteForceTooLarge { coordinates: usize, bound: u64 },
    #[error("{atoms} atoms exceed the enumeration bound {bound}")]
    TooManyAtoms { atoms: usize, bound: usize },
    #[error("a sampled point lies in an atom of measure zero")]
    NullAtom,
}

/// Resource bounds for exact computation.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Maximum frontier, in coordinates; live states are capped at `|A|^frontier_width`.
    pub frontier_width: usize,
    pub max_atoms: usize,
    pub max_bruteforce_states: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Self { frontier_width: 12, max_atoms: 1 << 20, max_bruteforce_states: 10_000_000 }
    }
}

/// Measure of an atom, kept in log space.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum AtomMeasure<T> {
    Empty,
    Positive { ln_measure: T },
}

impl<T: Real> AtomMeasure<T> {
    fn from_ln(ln: Option<T>) -> Self {
        ln.map_or(AtomMeasure::Empty, |ln_measure| AtomMeasure::Positive { ln_measure })
    }

    pub fn measure(&self) -> T {
        match self {
            AtomMeasure::Empty => T::zero(),
            AtomMeasure::Positive { ln_measure } => ln_measure.exp(),
        }
    }

    /// `-ln mu`, or `None` for an empty atom.
    pub fn information(&self) -> Option<T> {
        match self {
            AtomMeasure::Empty => None,
            AtomMeasure::Positive { ln_measure } => Some(-*ln_measure),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, AtomMeasure::Empty)
    }
}

enum Compiled {
    Words(Plan),
    Integers(Plan),
    /// `labels[t][z]`: cell of term `t` containing point `z`.
    Sites(Vec<Vec<u32>>),
}

/// Exact measure queries against one action model.
#[derive(Clone, Debug)]
pub struct MeasureEngine<T> {
    model: ActionModel<T>,
    limits: Limits,
}

impl<T: Real> MeasureEngine<T> {
    pub fn new(model: impl Into<ActionModel<T>>) -> Self {
        Self { model: model.into(), limits: Limits::default() }
    }

    pub fn with_limits(model: impl Into<ActionModel<T>>, limits: Limits) -> Self {
        Self { model: model.into(), limits }
    }

    pub fn model(&self) -> &ActionModel<T> {
        &self.model
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    fn alphabet(&self) -> usize {
        self.model.probabilities().len()
    }

    fn check_compatible(&self, spec: &PartitionSpec) -> Result<(), MeasureError> {
        let rank = self.model.rank();
        if let Some(w) = spec.window().iter().find(|w| w.rank() != rank) {
            return Err(WordError::RankMismatch(w.rank().get(), rank.get()).into());
        }
        let model = self.model.kind().name();
        match self.model.alphabet_size() {
            Some(a) => {
                if spec.window().is_empty() {
                    return Err(MeasureError::EmptyWindow);
                }
                let words = spec.window().len();
                let tuples = (a as u64).checked_pow(words as u32).filter(|&n| n <= 1 << 24);
                if matches!(spec.labeling(), Labeling::WindowTuple | Labeling::Table(_)) && tuples.is_none() {
                    return Err(MeasureError::WindowTooLarge { words, alphabet: a });
                }
                if let Labeling::Table(t) = spec.labeling() {
                    let expected = tuples.unwrap_or(0) as usize;
                    if t.len() != expected {
                        return Err(MeasureError::TableLength { expected, got: t.len() });
                    }
                }
            }
            None => match spec.labeling() {
                Labeling::Coordinate => {}
                Labeling::Table(t) if t.len() == self.alphabet() => {}
                Labeling::Table(t) => {
                    return Err(MeasureError::TableLength { expected: self.alphabet(), got: t.len() })
                }
                other => return Err(MeasureError::UnsupportedLabeling { labeling: other.name(), model }),
            },
        }
        Ok(())
    }

    /// Full validation against the model; returns the cell measures.
    pub fn validate_partition(&self, spec: &PartitionSpec) -> Result<Vec<T>, MeasureError> {
        self.check_compatible(spec)?;
        let cells = spec.cell_count(self.alphabet());
        let term =
            Term { element: crate::words::ReducedWord::identity(self.model.rank()), partition: spec.clone().into() };
        let mut measures = vec![T::zero(); cells];
        for (label, mass) in self.enumerate_terms(std::slice::from_ref(&term))? {
            measures[label[0] as usize] += mass;
        }
        if let Some(empty) = measures.iter().position(|m| *m <= T::zero()) {
            return Err(MeasureError::EmptyCell(empty as u32));
        }
        Ok(measures)
    }

    fn compile(&self, terms: &[Term]) -> Result<Compiled, MeasureError> {
        let mut checked: HashSet<*const PartitionSpec> = HashSet::new();
        for t in terms {
            if checked.insert(std::sync::Arc::as_ptr(&t.partition)) {
                self.check_compatible(&t.partition)?;
            }
            if t.element.rank() != self.model.rank() {
                return Err(WordError::RankMismatch(t.element.rank().get(), self.model.rank().get()).into());
            }
        }
        Ok(match &self.model {
            ActionModel::Finite(m) => Compiled::Sites(
                terms
                    .iter()
                    .map(|t| {
                        let back = t.element.inverse();
                        (0..m.size()).map(|z| t.partition.label_site(m.act_on_site(&back, z))).collect()
                    })
                    .collect(),
            ),
            _ => {
                let sets: Vec<CoordinateSet> =
                    terms.iter().map(|t| self.model.coordinate_set(&t.element, t.partition.window())).collect();
                if matches!(self.model, ActionModel::ZFactor(_)) {
                    let lists: Vec<Vec<i64>> = sets
                        .into_iter()
                        .map(|s| match s {
                            CoordinateSet::Integers(v) => v,
                            _ => unreachable!(),
                        })
                        .collect();
                    Compiled::Integers(Plan::new(&lists))
                } else {
                    let lists: Vec<Vec<crate::words::ReducedWord>> = sets
                        .into_iter()
                        .map(|s| match s {
                            CoordinateSet::Words(v) => v,
                            _ => unreachable!(),
                        })
                        .collect();
                    Compiled::Words(Plan::new(&lists))
                }
            }
        })
    }

    fn state_bound(&self) -> usize {
        self.alphabet().checked_pow(self.limits.frontier_width as u32).unwrap_or(usize::MAX)
    }

    fn overflow(&self, plan: &Plan, states: usize) -> MeasureError {
        MeasureError::FrontierTooWide { required_width: plan.width(), bound: self.limits.frontier_width, states }
    }

    /// Log-mass of the running atom after each term; `None` once it is empty.
    fn filter_terms(&self, terms: &[Term], cells: &[u32]) -> Result<Vec<Option<T>>, MeasureError> {
        let mut out = Vec::with_capacity(terms.len());
        match self.compile(terms)? {
            Compiled::Sites(labels) => {
                let p = self.model.probabilities();
                let mut alive: Vec<usize> = (0..p.len()).collect();
                for (t, &cell) in cells.iter().enumerate() {
                    alive.retain(|&z| labels[t][z] == cell);
                    let mass = alive.iter().map(|&z| p[z]).collect::<CompensatedSum<T>>().value();
                    out.push((mass > T::zero()).then(|| mass.ln()));
                }
            }
            Compiled::Words(plan) | Compiled::Integers(plan) => {
                let steps: Vec<Step> = cells.iter().map(|&c| Step::Filter(c)).collect();
                let a = self.alphabet();
                frontier::sweep(
                    &plan,
                    self.model.probabilities(),
                    |t, s| terms[t].partition.label(s, a),
                    &steps,
                    self.state_bound(),
                    |_, ln| out.push(ln),
                )
                .map_err(|o| self.overflow(&plan, o.states))?;
            }
        }
        Ok(out)
    }

    /// All atoms of positive measure as (cell per term, measure), in a stable order.
    fn enumerate_terms(&self, terms: &[Term]) -> Result<Vec<(Vec<u32>, T)>, MeasureError> {
        let bound = self.limits.max_atoms;
        let atoms = match self.compile(terms)? {
            Compiled::Sites(labels) => {
                let mut grouped: IndexMap<Vec<u32>, T> = IndexMap::new();
                for (z, &p) in self.model.probabilities().iter().enumerate() {
                    *grouped.entry(labels.iter().map(|l| l[z]).collect()).or_insert_with(T::zero) += p;
                }
                grouped.into_iter().collect()
            }
            Compiled::Words(plan) | Compiled::Integers(plan) => {
                let a = self.alphabet();
                let cap = self.state_bound().max(bound);
                frontier::sweep(
                    &plan,
                    self.model.probabilities(),
                    |t, s| terms[t].partition.label(s, a),
                    &vec![Step::Record; terms.len()],
                    cap,
                    |_, _| {},
                )
                .map_err(|o| self.overflow(&plan, o.states))?
            }
        };
        let atoms: Vec<_> = atoms.into_iter().filter(|(_, w)| *w > T::zero()).collect();
        if atoms.len() > bound {
            return Err(MeasureError::TooManyAtoms { atoms: atoms.len(), bound });
        }
        Ok(atoms)
    }

    /// Cell of `gamma P` containing `x`, for each term.
    fn cells_of(&self, x: &Point, terms: &[Term]) -> Result<Vec<u32>, MeasureError> {
        let a = self.alphabet();
        terms
            .iter()
            .map(|t| match x {
                Point::Site(_) => match self.model.act(&t.element.inverse(), x)? {
                    Point::Site(z) => Ok(t.partition.label_site(z)),
                    _ => unreachable!(),
                },
                _ => {
                    let coords = self.model.coordinate_set(&t.element, t.partition.window());
                    Ok(t.partition.label(&x.symbols(&coords)?, a))
                }
            })
            .collect()
    }

    pub fn atom_of(&self, x: &Point, refinement: &Refinement) -> Result<RefinedAtom, MeasureError> {
        self.compile(refinement.terms())?;
        let cells = self.cells_of(x, refinement.terms())?;
        RefinedAtom::new(refinement.clone(), cells)
    }

    pub fn atom_measure_exact(&self, atom: &RefinedAtom) -> Result<AtomMeasure<T>, MeasureError> {
        let terms = atom.refinement().terms();
        if terms.is_empty() {
            return Ok(AtomMeasure::Positive { ln_measure: T::zero() });
        }
        let ln = self.filter_terms(terms, atom.cells())?;
        Ok(AtomMeasure::from_ln(ln.last().copied().flatten()))
    }

    /// Enumerates every assignment of the coordinate union (or every point).
    pub fn atom_measure_bruteforce(&self, atom: &RefinedAtom) -> Result<T, MeasureError> {
        let terms = atom.refinement().terms();
        match self.compile(terms)? {
            Compiled::Sites(labels) => Ok(self
                .model
                .probabilities()
                .iter()
                .enumerate()
                .filter(|(z, _)| labels.iter().zip(atom.cells()).all(|(l, &c)| l[*z] == c))
                .map(|(_, &p)| p)
                .collect::<CompensatedSum<T>>()
                .value()),
            Compiled::Words(plan) | Compiled::Integers(plan) => {
                let bound = self.limits.max_bruteforce_states;
                let states = (self.alphabet() as u64).checked_pow(plan.coordinates() as u32);
                if states.is_none_or(|s| s > bound) {
                    return Err(MeasureError::BruteForceTooLarge { coordinates: plan.coordinates(), bound });
                }
                let a = self.alphabet();
                Ok(frontier::brute_force(
                    &plan,
                    self.model.probabilities(),
                    |t, s| terms[t].partition.label(s, a),
                    atom.cells(),
                ))
            }
        }
    }

    /// `-ln mu(P^F(x))`.
    pub fn information(&self, x: &Point, refinement: &Refinement) -> Result<T, MeasureError> {
        self.atom_measure_exact(&self.atom_of(x, refinement)?)?.information().ok_or(MeasureError::NullAtom)
    }

    /// Information of the running joins `t_0`, `t_0 v t_1`, ... in one pass.
    /// Repeated terms leave the atom unchanged.
    pub fn information_sequence(&self, x: &Point, terms: &[Term]) -> Result<Vec<T>, MeasureError> {
        let mut seen = HashSet::new();
        let mut distinct = Vec::new();
        let mut last_distinct = Vec::with_capacity(terms.len());
        for t in terms {
            if seen.insert(t) {
                distinct.push(t.clone());
            }
            last_distinct.push(distinct.len());
        }
        let cells = self.cells_of(x, &distinct)?;
        let ln = self.filter_terms(&distinct, &cells)?;
        last_distinct
            .into_iter()
            .map(|k| match k {
                0 => Ok(T::zero()),
                k => ln[k - 1].map(|v| -v).ok_or(MeasureError::NullAtom),
            })
            .collect()
    }

    /// Atoms of a refinement with their measures.
    pub fn atoms(&self, refinement: &Refinement) -> Result<Vec<(Vec<u32>, T)>, MeasureError> {
        self.enumerate_terms(refinement.terms())
    }

    /// Whether `H` reduces to counting coordinates: configuration model with
    /// every labeling injective, so atoms are cylinders on the coordinate union.
    fn counts_coordinates(&self, refinement: &Refinement) -> bool {
        self.model.alphabet_size().is_some_and(|a| refinement.terms().iter().all(|t| t.partition.is_injective(a)))
    }

    fn coordinate_union(&self, refinement: &Refinement) -> usize {
        let mut words = HashSet::new();
        let mut ints = HashSet::new();
        for t in refinement.terms() {
            match self.model.coordinate_set(&t.element, t.partition.window()) {
                CoordinateSet::Words(v) => words.extend(v),
                CoordinateSet::Integers(v) => ints.extend(v),
                CoordinateSet::Whole => {}
            }
        }
        words.len() + ints.len()
    }

    pub fn shannon_entropy(&self, refinement: &Refinement) -> Result<T, MeasureError> {
        if self.counts_coordinates(refinement) {
            self.compile(refinement.terms())?;
            return Ok(T::of_usize(self.coordinate_union(refinement)) * shannon(self.model.probabilities()));
        }
        self.shannon_entropy_enumerated(refinement)
    }

    /// `H` by summing `-m ln m` over all enumerated atoms.
    pub fn shannon_entropy_enumerated(&self, refinement: &Refinement) -> Result<T, MeasureError> {
        Ok(self.atoms(refinement)?.into_iter().map(|(_, m)| entropy_term(m)).collect::<CompensatedSum<T>>().value())
    }

    /// `I(target | given)(x) = I(target v given)(x) - I(given)(x)`.
    pub fn conditional_information(
        &self,
        x: &Point,
        target: &Refinement,
        given: &Refinement,
    ) -> Result<T, MeasureError> {
        let joint = self.information(x, &given.join(target))?;
        let base = if given.is_empty() { T::zero() } else { self.information(x, given)? };
        Ok((joint - base).max(T::zero()))
    }

    pub fn conditional_entropy(&self, target: &Refinement, given: &Refinement) -> Result<T, MeasureError> {
        let joint = given.join(target);
        if self.counts_coordinates(&joint) {
            self.compile(joint.terms())?;
            let extra = self.coordinate_union(&joint) - self.coordinate_union(given);
            return Ok(T::of_usize(extra) * shannon(self.model.probabilities()));
        }
        self.conditional_entropy_enumerated(target, given)
    }

    /// `sum -m(P n Q) ln(m(P n Q) / m(Q))` over the enumerated joint atoms.
    pub fn conditional_entropy_enumerated(&self, target: &Refinement, given: &Refinement) -> Result<T, MeasureError> {
        let joint = given.join(target);
        let atoms = self.atoms(&joint)?;
        let g = given.len();
        let mut marginal: HashMap<&[u32], CompensatedSum<T>> = HashMap::new();
        for (cells, m) in &atoms {
            marginal.entry(&cells[..g]).or_default().add(*m);
        }
        let mut total = CompensatedSum::new();
        for (cells, m) in &atoms {
            let q = marginal[&cells[..g]].value();
            total.add(-*m * (*m / q).ln());
        }
        Ok(total.value().max(T::zero()))
    }
}
