use std::collections::HashSet;
use std::sync::Arc;

use crate::words::{Rank, ReducedWord};

use super::MeasureError;

/// How a window restriction (or a point of a finite space) is mapped to a cell.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Labeling {
    /// Cell = the symbol at the single window coordinate, or the point itself for finite models.
    Coordinate,
    /// Cell = sum of the window symbols mod 2.
    Parity,
    /// Cell = the full window tuple, encoded big-endian in base `|A|`.
    WindowTuple,
    /// Explicit table indexed by the tuple code (or by the point for finite models).
    Table(Vec<u32>),
}

impl Labeling {
    pub fn name(&self) -> &'static str {
        match self {
            Labeling::Coordinate => "coordinate",
            Labeling::Parity => "parity",
            Labeling::WindowTuple => "window-tuple",
            Labeling::Table(_) => "table",
        }
    }
}

/// A finite partition measurable with respect to a finite window of coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartitionSpec {
    window: Vec<ReducedWord>,
    labeling: Labeling,
}

impl PartitionSpec {
    /// Structural checks only; model-dependent checks (alphabet, positive cells)
    /// happen in [`crate::MeasureEngine::validate_partition`].
    pub fn new(window: Vec<ReducedWord>, labeling: Labeling) -> Result<Self, MeasureError> {
        let mut seen = HashSet::new();
        for w in &window {
            if !seen.insert(w) {
                return Err(MeasureError::DuplicateWindowWord(w.to_string()));
            }
            if w.rank() != window[0].rank() {
                return Err(MeasureError::Word(crate::words::WordError::RankMismatch(
                    w.rank().get(),
                    window[0].rank().get(),
                )));
            }
        }
        if matches!(labeling, Labeling::Coordinate) && window.len() > 1 {
            return Err(MeasureError::CoordinateNeedsSingleWindow(window.len()));
        }
        if matches!(labeling, Labeling::Parity | Labeling::WindowTuple) && window.is_empty() {
            return Err(MeasureError::EmptyWindow);
        }
        Ok(Self { window, labeling })
    }

    /// The partition by the symbol at `e`.
    pub fn coordinate(rank: Rank) -> Self {
        Self { window: vec![ReducedWord::identity(rank)], labeling: Labeling::Coordinate }
    }

    /// The partition of a finite space into points.
    pub fn points() -> Self {
        Self { window: Vec::new(), labeling: Labeling::Coordinate }
    }

    pub fn window_tuple(window: Vec<ReducedWord>) -> Result<Self, MeasureError> {
        Self::new(window, Labeling::WindowTuple)
    }

    pub fn shared(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn window(&self) -> &[ReducedWord] {
        &self.window
    }

    pub fn labeling(&self) -> &Labeling {
        &self.labeling
    }

    /// Number of cell labels for a configuration model over `alphabet` symbols,
    /// or for a finite model with `alphabet` points.
    pub fn cell_count(&self, alphabet: usize) -> usize {
        match &self.labeling {
            Labeling::Coordinate => alphabet,
            Labeling::Parity => 2.min(alphabet.pow(self.window.len() as u32)),
            Labeling::WindowTuple => alphabet.pow(self.window.len() as u32),
            Labeling::Table(t) => t.iter().max().map_or(0, |&m| m as usize + 1),
        }
    }

    /// Whether the labeling is injective on window tuples, so cells are cylinder sets.
    pub fn is_injective(&self, alphabet: usize) -> bool {
        match &self.labeling {
            Labeling::Coordinate | Labeling::WindowTuple => true,
            Labeling::Parity => self.window.len() == 1 && alphabet <= 2,
            Labeling::Table(t) => t.iter().collect::<HashSet<_>>().len() == t.len(),
        }
    }

    pub(crate) fn label(&self, symbols: &[u32], alphabet: usize) -> u32 {
        match &self.labeling {
            Labeling::Coordinate => symbols[0],
            Labeling::Parity => symbols.iter().sum::<u32>() % 2,
            Labeling::WindowTuple => tuple_code(symbols, alphabet),
            Labeling::Table(t) => t[tuple_code(symbols, alphabet) as usize],
        }
    }

    pub(crate) fn label_site(&self, site: usize) -> u32 {
        match &self.labeling {
            Labeling::Table(t) => t[site],
            _ => site as u32,
        }
    }
}

fn tuple_code(symbols: &[u32], alphabet: usize) -> u32 {
    symbols.iter().fold(0u32, |acc, &s| acc * alphabet as u32 + s)
}

/// One translate `gamma P` in a refinement.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub element: ReducedWord,
    pub partition: Arc<PartitionSpec>,
}

impl Term {
    pub fn new(element: ReducedWord, partition: &Arc<PartitionSpec>) -> Self {
        Self { element, partition: Arc::clone(partition) }
    }
}

/// The join `V_{(gamma, P)} gamma P` of a finite family of translated partitions,
/// kept as a duplicate-free list in first-seen order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Refinement {
    terms: Vec<Term>,
}

impl Refinement {
    pub fn new(terms: impl IntoIterator<Item = Term>) -> Self {
        let mut seen = HashSet::new();
        let terms = terms.into_iter().filter(|t| seen.insert(t.clone())).collect();
        Self { terms }
    }

    /// `P^F = V_{gamma in F} gamma P`.
    pub fn along<'a>(elements: impl IntoIterator<Item = &'a ReducedWord>, partition: &Arc<PartitionSpec>) -> Self {
        Self::new(elements.into_iter().map(|g| Term::new(g.clone(), partition)))
    }

    /// The partition itself, i.e. the single translate by `e`.
    pub fn base(rank: Rank, partition: &Arc<PartitionSpec>) -> Self {
        Self::along([&ReducedWord::identity(rank)], partition)
    }

    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn join(&self, other: &Refinement) -> Self {
        Self::new(self.terms.iter().chain(&other.terms).cloned())
    }

    /// `gamma . (V g P) = V (gamma g) P`.
    pub fn translated(&self, gamma: &ReducedWord) -> Self {
        Self::new(self.terms.iter().map(|t| Term { element: gamma * &t.element, partition: Arc::clone(&t.partition) }))
    }
}

/// The atom of a refinement containing some point: one cell per term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinedAtom {
    refinement: Refinement,
    cells: Vec<u32>,
}

impl RefinedAtom {
    pub fn new(refinement: Refinement, cells: Vec<u32>) -> Result<Self, MeasureError> {
        if cells.len() != refinement.len() {
            return Err(MeasureError::ConstraintCount { terms: refinement.len(), cells: cells.len() });
        }
        Ok(Self { refinement, cells })
    }

    pub fn refinement(&self) -> &Refinement {
        &self.refinement
    }

    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    pub fn constraints(&self) -> impl Iterator<Item = (&ReducedWord, u32)> {
        self.refinement.terms.iter().map(|t| &t.element).zip(self.cells.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r2() -> Rank {
        Rank::new(2).unwrap()
    }

    fn w(s: &str) -> ReducedWord {
        ReducedWord::parse(r2(), s).unwrap()
    }

    #[test]
    fn labels() {
        let tuple = PartitionSpec::window_tuple(vec![w(""), w("a")]).unwrap();
        assert_eq!(tuple.label(&[1, 0], 2), 2);
        assert_eq!(tuple.cell_count(3), 9);
        let parity = PartitionSpec::new(vec![w(""), w("a"), w("b")], Labeling::Parity).unwrap();
        assert_eq!(parity.label(&[1, 1, 1], 2), 1);
        assert!(!parity.is_injective(2));
        let table = PartitionSpec::new(vec![w(""), w("a")], Labeling::Table(vec![0, 1, 1, 0])).unwrap();
        assert_eq!(table.label(&[1, 1], 2), 0);
        assert_eq!(table.cell_count(2), 2);
        assert!(!table.is_injective(2));
        assert!(PartitionSpec::coordinate(r2()).is_injective(5));
    }

    #[test]
    fn structural_validation() {
        assert!(matches!(PartitionSpec::window_tuple(vec![w("a"), w("a")]), Err(MeasureError::DuplicateWindowWord(_))));
        assert!(matches!(
            PartitionSpec::new(vec![w(""), w("a")], Labeling::Coordinate),
            Err(MeasureError::CoordinateNeedsSingleWindow(2))
        ));
        assert!(matches!(PartitionSpec::window_tuple(vec![]), Err(MeasureError::EmptyWindow)));
    }

    #[test]
    fn refinements_are_sets() {
        let p = PartitionSpec::coordinate(r2()).shared();
        let r = Refinement::along(&[w(""), w("a"), w(""), w("ab")], &p);
        assert_eq!(r.len(), 3);
        let t = r.translated(&w("A"));
        let elements: Vec<_> = t.terms().iter().map(|t| t.element.to_string()).collect();
        assert_eq!(elements, ["A", "", "b"]);
        assert_eq!(r.join(&t).len(), 5);
        assert!(RefinedAtom::new(r, vec![0]).is_err());
    }
}
