//! Ring buffers of grid snapshots and the Lagrange time extrapolant built
//! from them.

use std::borrow::Cow;
use std::collections::VecDeque;

use crate::error::{CmmError, Result};
use crate::grid::HermiteField;
use crate::real::Real;

/// Grid data that can be combined linearly node by node.
pub trait Combine<T: Real>: Sized + Clone + Send + Sync {
    fn combine(terms: &[(&Self, T)]) -> Result<Self>;
}

impl<T: Real> Combine<T> for HermiteField<T> {
    fn combine(terms: &[(&Self, T)]) -> Result<Self> {
        HermiteField::linear_combination(terms)
    }
}

/// Lagrange basis weights of the polynomial through `times`, evaluated at `t`.
pub fn lagrange_weights<T: Real>(times: &[T], t: T) -> Vec<T> {
    (0..times.len())
        .map(|i| {
            times
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .fold(T::one(), |w, (_, &tj)| w * (t - tj) / (times[i] - tj))
        })
        .collect()
}

/// The last `capacity` snapshots, oldest first, with strictly increasing times.
#[derive(Clone, Debug)]
pub struct SnapshotHistory<T, S> {
    capacity: usize,
    entries: VecDeque<(T, S)>,
}

impl<T: Real, S: Combine<T>> SnapshotHistory<T, S> {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(CmmError::InvalidArgument(
                "extrapolation order must be at least 1".into(),
            ));
        }
        Ok(Self {
            capacity,
            entries: VecDeque::with_capacity(capacity + 1),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() >= self.capacity
    }

    pub fn newest(&self) -> Option<&(T, S)> {
        self.entries.back()
    }

    pub fn newest_time(&self) -> Option<T> {
        self.entries.back().map(|e| e.0)
    }

    pub fn times(&self) -> Vec<T> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = &(T, S)> {
        self.entries.iter()
    }

    /// Appends a snapshot, evicting the oldest once the buffer is full.
    pub fn push(&mut self, t: T, snapshot: S) -> Result<()> {
        if let Some(last) = self.newest_time() {
            if t <= last {
                return Err(CmmError::InvalidArgument(format!(
                    "snapshot time {t} not after newest {last}"
                )));
            }
        }
        self.entries.push_back((t, snapshot));
        while self.entries.len() > self.capacity {
            self.entries.pop_front();
        }
        Ok(())
    }

    /// Appends without evicting; used for provisional snapshots that are
    /// popped again with [`SnapshotHistory::pop_newest`].
    pub fn push_provisional(&mut self, t: T, snapshot: S) -> Result<()> {
        if let Some(last) = self.newest_time() {
            if t <= last {
                return Err(CmmError::InvalidArgument(format!(
                    "snapshot time {t} not after newest {last}"
                )));
            }
        }
        self.entries.push_back((t, snapshot));
        Ok(())
    }

    pub fn pop_newest(&mut self) -> Option<(T, S)> {
        self.entries.pop_back()
    }

    /// The extrapolant at time `t` as a single snapshot.
    pub fn extrapolate(&self, t: T) -> Result<S> {
        if self.entries.is_empty() {
            return Err(CmmError::EmptyHistory("no snapshots to extrapolate from"));
        }
        if self.entries.len() == 1 {
            return Ok(self.entries[0].1.clone());
        }
        let w = lagrange_weights(&self.times(), t);
        let terms: Vec<(&S, T)> = self.entries.iter().map(|e| &e.1).zip(w).collect();
        S::combine(&terms)
    }

    /// Precomputes the extrapolant at each of `times` as a full snapshot.
    pub fn stages(&self, times: &[T]) -> Result<Stages<'_, T, S>> {
        self.stages_with(times, true)
    }

    /// As [`SnapshotHistory::stages`]; with `materialize = false` only the
    /// Lagrange weights are stored and every lookup combines the snapshots
    /// pointwise, which is cheaper when few points are queried. Stage
    /// times that coincide with a stored snapshot borrow it either way.
    pub fn stages_with(&self, times: &[T], materialize: bool) -> Result<Stages<'_, T, S>> {
        if self.entries.is_empty() {
            return Err(CmmError::EmptyHistory("no snapshots to extrapolate from"));
        }
        let mut levels: Vec<(T, Level<'_, T, S>)> = Vec::new();
        for &t in times {
            if levels.iter().any(|c| c.0 == t) {
                continue;
            }
            let level = if let Some(e) = self.entries.iter().find(|e| e.0 == t) {
                Level::Field(Cow::Borrowed(&e.1))
            } else if materialize {
                Level::Field(Cow::Owned(self.extrapolate(t)?))
            } else {
                Level::Weights(lagrange_weights(&self.times(), t))
            };
            levels.push((t, level));
        }
        Ok(Stages { history: self, levels })
    }
}

pub(crate) enum Level<'a, T, S: Clone> {
    Field(Cow<'a, S>),
    Weights(Vec<T>),
}

/// The extrapolant at a fixed set of stage times, either as snapshots or
/// as weights for combining the stored snapshots point by point.
pub struct Stages<'a, T, S: Clone> {
    pub(crate) history: &'a SnapshotHistory<T, S>,
    pub(crate) levels: Vec<(T, Level<'a, T, S>)>,
}

impl<T: Real, S: Clone> Stages<'_, T, S> {
    /// Snapshot at stage time `t` when it was materialized or stored.
    #[inline]
    pub fn at(&self, t: T) -> Option<&S> {
        match self.levels.iter().find(|c| c.0 == t).map(|c| &c.1) {
            Some(Level::Field(f)) => Some(f.as_ref()),
            _ => None,
        }
    }

    /// Snapshots paired with their weights at time `t`.
    pub(crate) fn weighted(&self, t: T) -> Vec<(&S, T)> {
        let w = match self.levels.iter().find(|c| c.0 == t).map(|c| &c.1) {
            Some(Level::Weights(w)) => w.clone(),
            _ => {
                let times: Vec<T> = self.history.entries.iter().map(|e| e.0).collect();
                lagrange_weights(&times, t)
            }
        };
        self.history.entries.iter().map(|e| &e.1).zip(w).collect()
    }

    /// Visits `(snapshot, weight)` at time `t` without allocating when the
    /// weights are precomputed.
    #[inline]
    pub(crate) fn for_each_weighted(&self, t: T, mut f: impl FnMut(&S, T)) {
        match self.levels.iter().find(|c| c.0 == t).map(|c| &c.1) {
            Some(Level::Weights(w)) => {
                for (e, w) in self.history.entries.iter().zip(w) {
                    f(&e.1, *w);
                }
            }
            _ => {
                for (s, w) in self.weighted(t) {
                    f(s, w);
                }
            }
        }
    }

    /// Whether every stored snapshot and every materialized stage passes `pred`.
    pub(crate) fn all(&self, pred: impl Fn(&S) -> bool) -> bool {
        self.history.entries.iter().all(|e| pred(&e.1))
            && self.levels.iter().all(|(_, l)| match l {
                Level::Field(f) => pred(f.as_ref()),
                Level::Weights(_) => true,
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_reproduce_quadratics() {
        let times = [0.0, 0.1, 0.25];
        let p = |t: f64| 1.0 - 2.0 * t + 3.0 * t * t;
        for t in [0.3, 0.35, 0.05] {
            let w = lagrange_weights(&times, t);
            let v: f64 = times.iter().zip(&w).map(|(s, w)| w * p(*s)).sum();
            assert!((v - p(t)).abs() < 1e-13);
        }
        assert_eq!(lagrange_weights(&[2.0], 5.0), vec![1.0]);
    }

    #[test]
    fn pointwise_and_materialized_stages_agree() {
        let g = crate::grid::GridSpec::<f64>::square(8).unwrap();
        let mut h: SnapshotHistory<f64, HermiteField<f64>> = SnapshotHistory::new(3).unwrap();
        for (k, t) in [0.0, 0.1, 0.2].into_iter().enumerate() {
            h.push(t, HermiteField::project(g, move |x, y| [(x + k as f64).sin() * y.cos(), 0.0, 0.0, 0.0]))
                .unwrap();
        }
        let times = [0.3, 0.25, 0.25, 0.2];
        let a = h.stages_with(&times, true).unwrap();
        let b = h.stages_with(&times, false).unwrap();
        assert!(b.at(0.3).is_none() && b.at(0.2).is_some());
        for t in [0.3, 0.25] {
            let fa = a.at(t).unwrap();
            for k in 0..g.len() {
                let mut v = 0.0;
                b.for_each_weighted(t, |s, w| v += w * s.f[k]);
                assert!((v - fa.f[k]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn ring_buffer_evicts_and_orders() {
        let g = crate::grid::GridSpec::<f64>::square(4).unwrap();
        let mut h: SnapshotHistory<f64, HermiteField<f64>> = SnapshotHistory::new(2).unwrap();
        assert!(h.extrapolate(0.0).is_err());
        for (k, t) in [0.0, 0.5, 1.0].into_iter().enumerate() {
            let mut f = HermiteField::zeros(g);
            f.f[0] = k as f64;
            h.push(t, f).unwrap();
        }
        assert_eq!(h.times(), vec![0.5, 1.0]);
        assert!(h.push(1.0, HermiteField::zeros(g)).is_err());
        // linear extrapolation of f[0] = 2 t
        let e = h.extrapolate(1.5).unwrap();
        assert!((e.f[0] - 3.0).abs() < 1e-14);
        assert!(SnapshotHistory::<f64, HermiteField<f64>>::new(0).is_err());
    }
}
