//! Variable elimination over the coordinates touched by a list of terms.
//!
//! Terms are processed in order. A coordinate enters the frontier at the first
//! term that reads it and is summed out right after the last one, so the live
//! state is a joint law over the current frontier (plus the recorded labels in
//! enumeration mode).

use std::collections::HashMap;
use std::hash::Hash;

use indexmap::IndexMap;

use crate::scalar::{CompensatedSum, Real};

pub(crate) struct TermPlan {
    coords: Vec<usize>,
    introduce: Vec<usize>,
    expire: Vec<usize>,
}

pub(crate) struct Plan {
    terms: Vec<TermPlan>,
    coordinates: usize,
    width: usize,
}

impl Plan {
    pub(crate) fn new<K: Hash + Eq + Clone>(coord_lists: &[Vec<K>]) -> Self {
        let mut ids: HashMap<K, usize> = HashMap::new();
        let mut last_use = Vec::new();
        let mut terms: Vec<TermPlan> = Vec::with_capacity(coord_lists.len());
        for (t, list) in coord_lists.iter().enumerate() {
            let mut plan =
                TermPlan { coords: Vec::with_capacity(list.len()), introduce: Vec::new(), expire: Vec::new() };
            for k in list {
                let id = *ids.entry(k.clone()).or_insert_with(|| {
                    last_use.push(t);
                    plan.introduce.push(last_use.len() - 1);
                    last_use.len() - 1
                });
                last_use[id] = t;
                plan.coords.push(id);
            }
            terms.push(plan);
        }
        for (id, &t) in last_use.iter().enumerate() {
            terms[t].expire.push(id);
        }
        let (mut live, mut width) = (0usize, 0usize);
        for plan in &terms {
            live += plan.introduce.len();
            width = width.max(live);
            live -= plan.expire.len();
        }
        Self { terms, coordinates: last_use.len(), width }
    }

    pub(crate) fn len(&self) -> usize {
        self.terms.len()
    }

    /// Number of distinct coordinates.
    pub(crate) fn coordinates(&self) -> usize {
        self.coordinates
    }

    /// Largest frontier in coordinates.
    pub(crate) fn width(&self) -> usize {
        self.width
    }
}

#[derive(Copy, Clone, Debug)]
pub(crate) enum Step {
    Filter(u32),
    Record,
}

#[derive(Debug)]
pub(crate) struct Overflow {
    pub states: usize,
}

#[derive(Clone)]
struct State<T> {
    assign: Vec<u32>,
    history: Vec<u32>,
    weight: T,
}

/// Runs the elimination. `observe(t, ln_total)` is called after each term with
/// the log of the total remaining mass (`None` once it is zero). Returns the
/// recorded label histories with their masses.
pub(crate) fn sweep<T: Real>(
    plan: &Plan,
    probabilities: &[T],
    label: impl Fn(usize, &[u32]) -> u32,
    steps: &[Step],
    max_states: usize,
    mut observe: impl FnMut(usize, Option<T>),
) -> Result<Vec<(Vec<u32>, T)>, Overflow> {
    debug_assert_eq!(steps.len(), plan.len());
    let rescale_below = T::of(T::RESCALE_BELOW);
    let mut states = vec![State { assign: Vec::new(), history: Vec::new(), weight: T::one() }];
    let mut active: Vec<usize> = Vec::new();
    let mut position = vec![usize::MAX; plan.coordinates];
    let mut ln_scale = CompensatedSum::new();
    let mut symbols = Vec::new();

    for (t, term) in plan.terms.iter().enumerate() {
        if states.is_empty() {
            observe(t, None);
            continue;
        }
        for &id in &term.introduce {
            if states.len() * probabilities.len() > max_states {
                return Err(Overflow { states: states.len() * probabilities.len() });
            }
            let mut next = Vec::with_capacity(states.len() * probabilities.len());
            for s in &states {
                for (sym, &p) in probabilities.iter().enumerate() {
                    let mut child = s.clone();
                    child.assign.push(sym as u32);
                    child.weight = s.weight * p;
                    next.push(child);
                }
            }
            position[id] = active.len();
            active.push(id);
            states = next;
        }

        let mut read = |s: &State<T>| {
            symbols.clear();
            symbols.extend(term.coords.iter().map(|&id| s.assign[position[id]]));
            label(t, &symbols)
        };
        match steps[t] {
            Step::Filter(cell) => states.retain(|s| read(s) == cell),
            Step::Record => {
                for s in states.iter_mut() {
                    let l = read(s);
                    s.history.push(l);
                }
            }
        }

        if !term.expire.is_empty() {
            let mut slots: Vec<usize> = term.expire.iter().map(|&id| position[id]).collect();
            slots.sort_unstable_by(|a, b| b.cmp(a));
            for s in states.iter_mut() {
                for &slot in &slots {
                    s.assign.remove(slot);
                }
            }
            for &slot in &slots {
                position[active.remove(slot)] = usize::MAX;
            }
            for (slot, &id) in active.iter().enumerate() {
                position[id] = slot;
            }
            if states.len() > 1 {
                let mut merged: IndexMap<(Vec<u32>, Vec<u32>), T> = IndexMap::with_capacity(states.len());
                for s in states.drain(..) {
                    *merged.entry((s.assign, s.history)).or_insert_with(T::zero) += s.weight;
                }
                states =
                    merged.into_iter().map(|((assign, history), weight)| State { assign, history, weight }).collect();
            }
        }

        let total = states.iter().map(|s| s.weight).collect::<CompensatedSum<T>>().value();
        if states.is_empty() || total <= T::zero() {
            states.clear();
            observe(t, None);
            continue;
        }
        if total < rescale_below {
            for s in states.iter_mut() {
                s.weight /= total;
            }
            ln_scale.add(total.ln());
            observe(t, Some(ln_scale.value()));
        } else {
            observe(t, Some(ln_scale.value() + total.ln()));
        }
    }

    let scale = ln_scale.value().exp();
    Ok(states.into_iter().map(|s| (s.history, s.weight * scale)).collect())
}

/// Exhaustive oracle: every assignment of the coordinate union, weighted by the
/// product measure, filtered by all constraints at once.
pub(crate) fn brute_force<T: Real>(
    plan: &Plan,
    probabilities: &[T],
    label: impl Fn(usize, &[u32]) -> u32,
    cells: &[u32],
) -> T {
    let n = plan.coordinates;
    let a = probabilities.len() as u32;
    let mut digits = vec![0u32; n];
    let mut symbols = Vec::new();
    let mut total = CompensatedSum::new();
    loop {
        let consistent = plan.terms.iter().enumerate().all(|(t, term)| {
            symbols.clear();
            symbols.extend(term.coords.iter().map(|&id| digits[id]));
            label(t, &symbols) == cells[t]
        });
        if consistent {
            total.add(digits.iter().map(|&d| probabilities[d as usize]).fold(T::one(), |acc, p| acc * p));
        }
        let mut i = 0;
        loop {
            if i == n {
                return total.value();
            }
            digits[i] += 1;
            if digits[i] < a {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_tracks_lifetimes() {
        let plan = Plan::new(&[vec![0, 1], vec![1, 2], vec![3], vec![2]]);
        assert_eq!(plan.coordinates(), 4);
        assert_eq!(plan.width(), 2);
        assert_eq!(plan.terms[1].introduce, vec![2]);
        assert_eq!(plan.terms[1].expire, vec![1]);
        assert_eq!(plan.terms[3].expire, vec![2]);
    }

    #[test]
    fn chain_matches_brute_force() {
        let plan = Plan::new(&[vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]]);
        let p = [0.2f64, 0.8];
        let xor = |_: usize, s: &[u32]| s[0] ^ s[1];
        let cells = [1, 0, 1, 0];
        let steps: Vec<_> = cells.iter().map(|&c| Step::Filter(c)).collect();
        let mut last: Option<f64> = None;
        sweep(&plan, &p, xor, &steps, 1 << 12, |_, v| last = v).unwrap();
        let exact: f64 = last.unwrap().exp();
        let oracle = brute_force(&plan, &p, xor, &cells);
        assert!((exact - oracle).abs() < 1e-15);
        let atoms = sweep(&plan, &p, xor, &[Step::Record; 4], 1 << 12, |_, _| {}).unwrap();
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        assert!((total - 1.0).abs() < 1e-15);
        let hit = atoms.iter().find(|a| a.0 == cells).unwrap().1;
        assert!((hit - oracle).abs() < 1e-15);
    }

    #[test]
    fn rescaling_keeps_log_mass() {
        let lists: Vec<Vec<usize>> = (0..3000).map(|i| vec![i]).collect();
        let plan = Plan::new(&lists);
        let steps = vec![Step::Filter(0); 3000];
        let mut ln = Vec::new();
        sweep(&plan, &[0.5f64, 0.5], |_, s| s[0], &steps, 16, |_, v| ln.push(v.unwrap())).unwrap();
        for (k, v) in ln.iter().enumerate() {
            let expected = -((k + 1) as f64) * std::f64::consts::LN_2;
            assert!((v - expected).abs() <= 1e-12 * expected.abs());
        }
    }

    #[test]
    fn overflow_reports_states() {
        let plan = Plan::new(&[vec![0, 1, 2, 3, 4]]);
        let err = sweep(&plan, &[0.5f64, 0.5], |_, _| 0, &[Step::Record], 8, |_, _| {}).unwrap_err();
        assert_eq!(err.states, 16);
    }
}
