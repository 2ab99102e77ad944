//! Discrete calculus on finitely supported real sequences.
//!
//! Sequences are indexed over the integers with zero extension outside the
//! stored window, so the stencil operators are total functions and vanishing
//! boundary conditions are actual zeros, never an implicit convention.
//!
//! Conventions: `grad u[n] = u[n] - u[n-1]`, `div u[n] = u[n+1] - u[n]`,
//! `laplace u[n] = 2u[n] - u[n+1] - u[n-1]`. These satisfy
//! `div = shift(1) ∘ grad = grad ∘ shift(1)` and `laplace = -div ∘ grad`
//! exactly, and all three commute.

use crate::sum::KahanSum;
use std::ops::RangeInclusive;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SeqError {
    #[error("weight undefined at n = {n} inside the requested range")]
    UndefinedWeight { n: i64 },
    #[error("order must be >= 1")]
    InvalidOrder,
}

/// Inequality order `ell >= 1`. The half-power operator `Δ^{ell/2}` means
/// `Δ^{ell/2}` for even `ell` and `∇ Δ^{(ell-1)/2}` for odd `ell`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryOrder {
    ell: u32,
}

impl BoundaryOrder {
    pub fn new(ell: u32) -> Result<Self, SeqError> {
        if ell >= 1 {
            Ok(Self { ell })
        } else {
            Err(SeqError::InvalidOrder)
        }
    }

    #[inline]
    pub fn ell(self) -> u32 {
        self.ell
    }
}

/// Finitely supported sequence on the integers, stored canonically:
/// first and last stored values are nonzero unless the sequence is zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FiniteSequence {
    offset: i64,
    values: Vec<f64>,
}

impl FiniteSequence {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds from a stored window, trimming exact zeros at both ends.
    pub fn new(offset: i64, values: Vec<f64>) -> Self {
        let mut s = Self { offset, values };
        s.canonicalize();
        s
    }

    pub fn delta(n: i64) -> Self {
        Self::new(n, vec![1.0])
    }

    pub fn from_fn(range: RangeInclusive<i64>, mut f: impl FnMut(i64) -> f64) -> Self {
        let (lo, hi) = (*range.start(), *range.end());
        if lo > hi {
            return Self::zero();
        }
        Self::new(lo, (lo..=hi).map(|n| f(n)).collect())
    }

    fn canonicalize(&mut self) {
        while self.values.last() == Some(&0.0) {
            self.values.pop();
        }
        let lead = self.values.iter().take_while(|&&v| v == 0.0).count();
        if lead > 0 {
            self.values.drain(..lead);
            self.offset += lead as i64;
        }
        if self.values.is_empty() {
            self.offset = 0;
        }
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Index window `(first, last)` of the nonzero support, if any.
    pub fn support(&self) -> Option<(i64, i64)> {
        if self.is_zero() {
            None
        } else {
            Some((self.offset, self.offset + self.values.len() as i64 - 1))
        }
    }

    #[inline]
    pub fn get(&self, n: i64) -> f64 {
        let i = n - self.offset;
        if i < 0 || i >= self.values.len() as i64 {
            0.0
        } else {
            self.values[i as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let off = self.offset;
        self.values.iter().enumerate().map(move |(i, &v)| (off + i as i64, v))
    }

    /// True iff `u[n] = 0` for every `n <= k` (vanishing boundary data).
    pub fn vanishes_through(&self, k: i64) -> bool {
        match self.support() {
            None => true,
            Some((first, _)) => first > k,
        }
    }

    /// `grad u[n] = u[n] - u[n-1]`.
    pub fn grad(&self) -> Self {
        self.stencil(&[(0, 1.0), (-1, -1.0)])
    }

    /// `div u[n] = u[n+1] - u[n]`; equals `shift(1) ∘ grad` exactly.
    pub fn divergence(&self) -> Self {
        self.stencil(&[(1, 1.0), (0, -1.0)])
    }

    /// `(shift(u, k))[n] = u[n + k]`.
    pub fn shift(&self, k: i64) -> Self {
        Self {
            offset: self.offset - k,
            values: self.values.clone(),
        }
    }

    /// `laplace u[n] = 2u[n] - u[n+1] - u[n-1] = -div(grad u)`.
    pub fn laplace(&self) -> Self {
        self.stencil(&[(-1, -1.0), (0, 2.0), (1, -1.0)])
    }

    /// `Δ^{ell/2}`: `laplace` applied `ell/2` times, preceded by `grad`
    /// when `ell` is odd.
    pub fn half_laplace_power(&self, order: BoundaryOrder) -> Self {
        let ell = order.ell();
        let mut r = if ell % 2 == 1 { self.grad() } else { self.clone() };
        for _ in 0..ell / 2 {
            r = r.laplace();
        }
        r
    }

    fn stencil(&self, taps: &[(i64, f64)]) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let min_tap = taps.iter().map(|&(d, _)| d).min().unwrap();
        let max_tap = taps.iter().map(|&(d, _)| d).max().unwrap();
        let lo = self.offset - max_tap;
        let hi = self.offset + self.values.len() as i64 - 1 - min_tap;
        Self::from_fn(lo..=hi, |n| {
            // Integer-coefficient taps: plain summation is exact enough and
            // keeps delta-stencil outputs bit-exact.
            taps.iter().map(|&(d, c)| c * self.get(n + d)).sum()
        })
    }

    /// `Σ_{n ∈ range} w(n) · u[n] · v[n]` with compensated summation.
    ///
    /// The scan is clamped to the union of the two supports; `w` returning
    /// `None` anywhere in the scanned part of `range` is an error (e.g.
    /// `n = 0` for weights `n^{-2ell}`), even if the factor `u·v` vanishes
    /// there.
    pub fn weighted_sum(
        u: &Self,
        v: &Self,
        w: impl Fn(i64) -> Option<f64>,
        range: RangeInclusive<i64>,
    ) -> Result<f64, SeqError> {
        let hull = match (u.support(), v.support()) {
            (Some((a, b)), Some((c, d))) => Some((a.min(c), b.max(d))),
            (Some(s), None) | (None, Some(s)) => Some(s),
            (None, None) => None,
        };
        let Some((lo, hi)) = hull else {
            return Ok(0.0);
        };
        let lo = lo.max(*range.start());
        let hi = hi.min(*range.end());
        let mut acc = KahanSum::new();
        for n in lo..=hi {
            let wn = w(n).ok_or(SeqError::UndefinedWeight { n })?;
            acc.add(wn * u.get(n) * v.get(n));
        }
        Ok(acc.value())
    }
}

/// Weight callback `n -> n^p`, undefined at `n <= 0` for negative powers.
pub fn power_weight(p: f64) -> impl Fn(i64) -> Option<f64> {
    move |n| {
        if n <= 0 && p < 0.0 {
            None
        } else {
            Some((n as f64).powf(p))
        }
    }
}

/// The constant weight 1.
pub fn unit_weight(_: i64) -> Option<f64> {
    Some(1.0)
}
