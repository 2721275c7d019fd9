//! Scalar abstraction shared by the measure engine and the estimators.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point type used for measures, informations and entropies.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Frontier weights whose total drops below this are renormalized and the
    /// scale moved into a log accumulator.
    const RESCALE_BELOW: f64;

    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal representable")
    }

    fn of_usize(value: usize) -> Self {
        Self::from_usize(value).expect("usize representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const RESCALE_BELOW: f64 = 1e-300;
}

impl Real for f32 {
    const RESCALE_BELOW: f64 = 1e-30;
}

/// Kahan-Babuska compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self { sum: T::zero(), carry: T::zero() }
    }

    pub fn add(&mut self, value: T) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.carry += (self.sum - t) + value;
        } else {
            self.carry += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

impl<T: Real> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// `-p ln p` with the `0 ln 0 = 0` convention.
pub fn entropy_term<T: Real>(p: T) -> T {
    if p > T::zero() {
        -p * p.ln()
    } else {
        T::zero()
    }
}

/// Shannon entropy (nats) of a probability vector.
pub fn shannon<T: Real>(probabilities: &[T]) -> T {
    probabilities.iter().map(|&p| entropy_term(p)).collect::<CompensatedSum<T>>().value()
}
