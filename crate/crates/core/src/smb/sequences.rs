use crate::actions::Point;
use crate::measure::MeasureError;
use crate::scalar::{CompensatedSum, Real};

use super::{BasePoint, SkewSystem, SmbError};

/// Information along `F_0(y), ..., F_N(y)` at one fiber point.
#[derive(Clone, Debug, PartialEq)]
pub struct InfoSequence<T> {
    /// `I(P^{F_n(y)})(x)` for `n = 0..=N`.
    pub information: Vec<T>,
}

impl<T: Real> InfoSequence<T> {
    pub fn horizon(&self) -> usize {
        self.information.len().saturating_sub(1)
    }

    /// `I(P^{F_n(y)})(x) / (n+1)`.
    pub fn normalized(&self, n: usize) -> T {
        self.information[n] / T::of_usize(n + 1)
    }

    pub fn normalized_values(&self) -> Vec<T> {
        (0..self.information.len()).map(|n| self.normalized(n)).collect()
    }

    pub fn last(&self) -> T {
        self.normalized(self.horizon())
    }

    /// Least-squares slope of the normalized values over the last quarter of the horizon.
    pub fn tail_slope(&self) -> T {
        let values = self.normalized_values();
        let start = values.len() - (values.len() / 4).max(2).min(values.len());
        let tail = &values[start..];
        if tail.len() < 2 {
            return T::zero();
        }
        let n = T::of_usize(tail.len());
        let mean_x = T::of_usize(tail.len() - 1) / T::of(2.0);
        let mean_y = tail.iter().copied().collect::<CompensatedSum<T>>().value() / n;
        let (mut sxy, mut sxx) = (T::zero(), T::zero());
        for (i, &v) in tail.iter().enumerate() {
            let dx = T::of_usize(i) - mean_x;
            sxy += dx * (v - mean_y);
            sxx += dx * dx;
        }
        sxy / sxx
    }
}

fn require_horizon(y: &BasePoint, n: usize) -> Result<(), SmbError> {
    if n > y.horizon() {
        return Err(SmbError::HorizonTooLong { requested: n, available: y.horizon() });
    }
    Ok(())
}

impl<T: Real> SkewSystem<T> {
    /// `I(P^{F_n(y)})(x)` for `n = 0..=N`, with `F_n(y)` deduplicated.
    pub fn info_sequence(&self, y: &BasePoint, x: &Point, horizon: usize) -> Result<InfoSequence<T>, SmbError> {
        require_horizon(y, horizon)?;
        let terms = self.terms(&y.orbit(horizon)?);
        Ok(InfoSequence { information: self.engine().information_sequence(x, &terms)? })
    }

    /// `g_count(y) = H(V_{k < count} alpha(y, S^k y) P)`.
    pub fn orbit_entropy(&self, y: &BasePoint, count: usize) -> Result<T, SmbError> {
        if count == 0 {
            return Ok(T::zero());
        }
        require_horizon(y, count - 1)?;
        Ok(self.engine().shannon_entropy(&self.refinement(&y.orbit(count - 1)?))?)
    }

    /// `H(P^{F_n(y)}) / (n+1)` for `n = 0..=N`.
    pub fn fibrewise_entropy_sequence(&self, y: &BasePoint, horizon: usize) -> Result<Vec<T>, SmbError> {
        (0..=horizon).map(|n| Ok(self.orbit_entropy(y, n + 1)? / T::of_usize(n + 1))).collect()
    }

    /// `g_n(y) + g_m(S^n y) - g_{n+m}(y)`, nonnegative by subadditivity.
    pub fn subadditivity_gap(&self, y: &BasePoint, n: usize, m: usize) -> Result<T, SmbError> {
        let joint = self.orbit_entropy(y, n + m)?;
        let head = self.orbit_entropy(y, n)?;
        let tail = self.orbit_entropy(&y.shifted(n)?, m)?;
        Ok(head + tail - joint)
    }

    /// `H(P | V_{j=1..k} alpha(y, S^j y) P)`; enumerated unless it reduces to coordinate counting.
    pub fn conditional_entropy_at(&self, y: &BasePoint, k: usize, enumerate: bool) -> Result<T, SmbError> {
        require_horizon(y, k)?;
        let orbit = y.orbit(k)?;
        let given = self.refinement(&orbit[1..]);
        let engine = self.engine();
        Ok(if enumerate {
            engine.conditional_entropy_enumerated(&self.base(), &given)?
        } else {
            engine.conditional_entropy(&self.base(), &given)?
        })
    }

    /// `c_k(y)` for `k = 0..=K`.
    pub fn conditional_entropies(&self, y: &BasePoint, k_max: usize) -> Result<Vec<T>, SmbError> {
        (0..=k_max).map(|k| self.conditional_entropy_at(y, k, false)).collect()
    }

    /// `f_n(y, x) = I(P | V_{j=1..n} alpha(y, S^j y) P)(x)` for `n = 0..=N`.
    pub fn conditional_limit_sequence(&self, y: &BasePoint, x: &Point, horizon: usize) -> Result<Vec<T>, SmbError> {
        require_horizon(y, horizon)?;
        let terms = self.terms(&y.orbit(horizon)?);
        let engine = self.engine();
        let joint = engine.information_sequence(x, &terms)?;
        let given = engine.information_sequence(x, &terms[1..])?;
        Ok((0..=horizon)
            .map(|n| {
                let g = if n == 0 { T::zero() } else { given[n - 1] };
                (joint[n] - g).max(T::zero())
            })
            .collect())
    }

    /// Both sides of the chain-rule decomposition of `H(P^{F_n(y)})` into
    /// conditional entropies of `P` given its translates along shifted orbits.
    /// Every entropy is computed by atom enumeration.
    pub fn cesaro_identity_check(&self, y: &BasePoint, n: usize) -> Result<CesaroReport<T>, SmbError> {
        require_horizon(y, n)?;
        let lhs = self.engine().shannon_entropy_enumerated(&self.refinement(&y.orbit(n)?))?;
        let mut terms = Vec::with_capacity(n + 1);
        for k in 0..=n {
            terms.push(self.conditional_entropy_at(&y.shifted(n - k)?, k, true)?);
        }
        let rhs = terms.iter().copied().collect::<CompensatedSum<T>>().value();
        Ok(CesaroReport { n, lhs, rhs, terms, discrepancy: (lhs - rhs).abs() })
    }

    /// Largest `n <= limit` for which `H(P^{F_n(y)})` can be computed.
    pub fn feasible_entropy_horizon(&self, y: &BasePoint, limit: usize) -> usize {
        let mut feasible = 0;
        for n in 0..=limit.min(y.horizon()) {
            match self.orbit_entropy(y, n + 1) {
                Ok(_) => feasible = n,
                Err(_) => break,
            }
        }
        feasible
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CesaroReport<T> {
    pub n: usize,
    pub lhs: T,
    pub rhs: T,
    /// Conditional term `k = 0..=n`.
    pub terms: Vec<T>,
    pub discrepancy: T,
}

pub(crate) fn is_capacity_error(err: &SmbError) -> bool {
    matches!(
        err,
        SmbError::Measure(
            MeasureError::FrontierTooWide { .. }
                | MeasureError::TooManyAtoms { .. }
                | MeasureError::BruteForceTooLarge { .. }
        )
    )
}
