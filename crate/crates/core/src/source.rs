//! Duhamel accumulation of a source term along the characteristics of the
//! current submap.

use rayon::prelude::*;

use crate::error::{CmmError, Result};
use crate::flow_map::{rk4_backward, stage_times, OneStep, VelocityProvider, RK4_WEIGHTS};
use crate::grid::{GridSpec, HermiteField};
use crate::history::{SnapshotHistory, Stages};
use crate::real::{Real, Vec2};

/// Accumulated source `F_{[t_end, t_start]}` on grid A.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceField<T> {
    pub field: HermiteField<T>,
    pub t_start: T,
    pub t_end: T,
}

impl<T: Real> SourceField<T> {
    pub fn zero(grid: GridSpec<T>, t: T) -> Self {
        Self {
            field: HermiteField::zeros(grid),
            t_start: t,
            t_end: t,
        }
    }

    #[inline]
    pub fn eval(&self, p: Vec2<T>) -> T {
        self.field.eval(p)
    }
}

/// Snapshots `f̃_n` of the source on grid A.
pub type SourceHistory<T> = SnapshotHistory<T, HermiteField<T>>;

/// Time-dependent scalar source sampled along characteristics.
pub trait SourceProvider<T: Real>: Sync {
    fn source(&self, p: Vec2<T>, t: T) -> T;

    /// Whether the source vanishes identically; lets the accumulation skip
    /// the quadrature and keep `F` exactly zero.
    fn is_zero(&self) -> bool {
        false
    }
}

impl<T: Real> SourceProvider<T> for Stages<'_, T, HermiteField<T>> {
    #[inline]
    fn source(&self, p: Vec2<T>, t: T) -> T {
        match self.at(t) {
            Some(f) => f.eval(p),
            None => {
                let mut v = T::zero();
                self.for_each_weighted(t, |f, w| v = v + w * f.eval(p));
                v
            }
        }
    }

    fn is_zero(&self) -> bool {
        self.all(|f| f.is_zero())
    }
}

/// Closure-backed source `f(p, t)`.
pub struct AnalyticSource<F>(pub F);

impl<T, F> SourceProvider<T> for AnalyticSource<F>
where
    T: Real,
    F: Fn(Vec2<T>, T) -> T + Sync,
{
    #[inline]
    fn source(&self, p: Vec2<T>, t: T) -> T {
        (self.0)(p, t)
    }
}

/// Source that vanishes everywhere.
pub struct NoSource;

impl<T: Real> SourceProvider<T> for NoSource {
    fn source(&self, _p: Vec2<T>, _t: T) -> T {
        T::zero()
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// One semi-Lagrangian step of the accumulated source,
/// `F_{n+1} = I_A[F_n ∘ X̃ + Δt Σ a_j f̃(X̃_{[t1,s_j]}, s_j)]`.
///
/// `steps` holds the one-step map with stage locations at every node of
/// grid A and gives the node values. Gradients and cross derivatives come
/// from a four-point stencil of the same update with offsets of `h / 100`.
pub fn advance_source<T: Real, S: SourceProvider<T>, V: VelocityProvider<T>>(
    current: &SourceField<T>,
    steps: &[OneStep<T>],
    vel: &V,
    src: &S,
    t0: T,
    t1: T,
) -> Result<SourceField<T>> {
    let grid = current.field.grid;
    if steps.len() != grid.len() {
        return Err(CmmError::GridMismatch {
            expected: grid.describe(),
            got: format!("{} stage points", steps.len()),
        });
    }
    if current.t_end != t0 || !(t1 > t0) {
        return Err(CmmError::InvalidArgument(format!(
            "source covers up to {} but step is [{t0}, {t1}]",
            current.t_end
        )));
    }
    let mut next = SourceField {
        field: HermiteField::zeros(grid),
        t_start: current.t_start,
        t_end: t1,
    };
    let carry = !current.field.is_zero();
    let forced = !src.is_zero();
    if !carry && !forced {
        return Ok(next);
    }
    let dt = t1 - t0;
    let ts = stage_times(t0, t1);
    let a = RK4_WEIGHTS.map(T::of);
    let update = |s: &OneStep<T>| -> T {
        let mut v = if carry { current.eval(s.end) } else { T::zero() };
        if forced {
            let mut q = T::zero();
            for j in 0..4 {
                q = q + a[j] * src.source(s.stages[j], ts[j]);
            }
            v = v + dt * q;
        }
        v
    };
    let ex = grid.hx() / T::of(100.0);
    let ey = grid.hy() / T::of(100.0);
    let at = |x: Vec2<T>| update(&rk4_backward(vel, x, t0, t1));
    let data: Vec<[T; 4]> = steps
        .par_iter()
        .enumerate()
        .map(|(k, s)| {
            let x = grid.node_at(k);
            let pp = at([x[0] + ex, x[1] + ey]);
            let pm = at([x[0] + ex, x[1] - ey]);
            let mp = at([x[0] - ex, x[1] + ey]);
            let mm = at([x[0] - ex, x[1] - ey]);
            let four = T::of(4.0);
            [
                update(s),
                (pp + pm - mp - mm) / (four * ex),
                (pp - pm + mp - mm) / (four * ey),
                (pp - pm - mp + mm) / (four * ex * ey),
            ]
        })
        .collect();
    if data.iter().flatten().any(|v| !v.is_finite()) {
        return Err(CmmError::NonFinite("accumulated source".into()));
    }
    for (k, d) in data.into_iter().enumerate() {
        next.field.f[k] = d[0];
        next.field.fx[k] = d[1];
        next.field.fy[k] = d[2];
        next.field.fxy[k] = d[3];
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow_map::{one_step_map, AnalyticVelocity};

    fn still() -> AnalyticVelocity<impl Fn(Vec2<f64>, f64) -> (Vec2<f64>, [[f64; 2]; 2]) + Sync> {
        AnalyticVelocity(|_p: Vec2<f64>, _t: f64| ([0.0; 2], [[0.0; 2]; 2]))
    }

    fn nodes(g: &GridSpec<f64>) -> Vec<Vec2<f64>> {
        (0..g.len()).map(|k| g.node_at(k)).collect()
    }

    #[test]
    fn zero_source_stays_zero() {
        let g = GridSpec::<f64>::square(8).unwrap();
        let f = SourceField::zero(g, 0.0);
        let st = one_step_map(&still(), 0.0, 0.1, &nodes(&g)).unwrap();
        let n = advance_source(&f, &st, &still(), &NoSource, 0.0, 0.1).unwrap();
        assert!(n.field.is_zero());
        assert_eq!((n.t_start, n.t_end), (0.0, 0.1));
    }

    #[test]
    fn constant_source_accumulates_linearly() {
        let g = GridSpec::<f64>::square(8).unwrap();
        let src = AnalyticSource(|_p: Vec2<f64>, _t: f64| 3.0);
        let mut f = SourceField::zero(g, 0.0);
        let mut t = 0.0;
        for _ in 0..5 {
            let st = one_step_map(&still(), t, t + 0.1, &nodes(&g)).unwrap();
            f = advance_source(&f, &st, &still(), &src, t, t + 0.1).unwrap();
            t += 0.1;
        }
        for v in &f.field.f {
            assert!((v - 1.5).abs() < 1e-13);
        }
        assert!(f.field.fx.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn rejects_misaligned_input() {
        let g = GridSpec::<f64>::square(8).unwrap();
        let f = SourceField::zero(g, 0.0);
        let st = one_step_map(&still(), 0.0, 0.1, &nodes(&g)[..10]).unwrap();
        assert!(advance_source(&f, &st, &still(), &NoSource, 0.0, 0.1).is_err());
        let st = one_step_map(&still(), 0.2, 0.3, &nodes(&g)).unwrap();
        assert!(advance_source(&f, &st, &still(), &NoSource, 0.2, 0.3).is_err());
    }
}
