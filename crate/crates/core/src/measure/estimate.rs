use std::fmt;
use std::str::FromStr;

use crate::scalar::{CompensatedSum, Real};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Computed without sampling.
    Exact,
    /// Mean over base points of `H(P^{F_N(y)}) / (N+1)`.
    NormalizedEntropy,
    /// Mean over base points of `H(P | V_{j=1..N} alpha(y, S^j y) P)`.
    ConditionalCesaro,
    /// Mean over `(y, x)` of `I(P^{F_N(y)})(x) / (N+1)`.
    PointwiseMonteCarlo,
}

impl Method {
    pub const ESTIMATORS: [Method; 3] =
        [Method::NormalizedEntropy, Method::ConditionalCesaro, Method::PointwiseMonteCarlo];

    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::NormalizedEntropy => "normalized-entropy",
            Method::ConditionalCesaro => "conditional-cesaro",
            Method::PointwiseMonteCarlo => "pointwise-monte-carlo",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Method::Exact, Method::NormalizedEntropy, Method::ConditionalCesaro, Method::PointwiseMonteCarlo]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method {s:?}"))
    }
}

/// Mean and standard error of a sample, accumulated in input order.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SampleStats<T> {
    pub count: usize,
    pub mean: T,
    pub stderr: T,
}

impl<T: Real> SampleStats<T> {
    pub fn of(values: &[T]) -> Self {
        let count = values.len();
        if count == 0 {
            return Self { count, mean: T::zero(), stderr: T::zero() };
        }
        let mean = values.iter().copied().collect::<CompensatedSum<T>>().value() / T::of_usize(count);
        if count == 1 {
            return Self { count, mean, stderr: T::zero() };
        }
        let ss = values.iter().map(|&v| (v - mean) * (v - mean)).collect::<CompensatedSum<T>>().value();
        let variance = ss / T::of_usize(count - 1);
        Self { count, mean, stderr: (variance / T::of_usize(count)).sqrt() }
    }
}

/// An entropy value in nats with its provenance.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct EntropyEstimate<T> {
    pub value: T,
    pub method: Method,
    pub horizon: usize,
    pub samples: usize,
    pub stderr: T,
}

impl<T: Real> EntropyEstimate<T> {
    pub fn exact(value: T, horizon: usize) -> Self {
        Self { value, method: Method::Exact, horizon, samples: 0, stderr: T::zero() }
    }

    pub fn from_samples(method: Method, horizon: usize, values: &[T]) -> Self {
        let stats = SampleStats::of(values);
        Self { value: stats.mean, method, horizon, samples: stats.count, stderr: stats.stderr }
    }

    /// `3 sqrt(se_1^2 + se_2^2)`.
    pub fn combined_bound(&self, other: &Self) -> T {
        T::of(3.0) * (self.stderr * self.stderr + other.stderr * other.stderr).sqrt()
    }

    pub fn agrees_with(&self, other: &Self) -> bool {
        (self.value - other.value).abs() <= self.combined_bound(other)
    }

    pub fn in_bits(&self) -> Self {
        let ln2 = T::of(std::f64::consts::LN_2);
        Self { value: self.value / ln2, stderr: self.stderr / ln2, ..*self }
    }
}
