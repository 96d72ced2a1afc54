//! Backward characteristic maps: storage, the composition update that
//! advances a map by one step, and the remapping monitor.

mod one_step;
mod stack;
mod velocity;

pub use one_step::{one_step_map, rk4_backward, rk4_backward_jac, stage_times, OneStep, RK4_WEIGHTS};
pub use stack::{pullback_scalar, pullback_twoform, twoform_with_current, Submap, SubmapStack};
pub use velocity::{AnalyticVelocity, VelocityField, VelocityHistory, VelocityProvider};

use rayon::prelude::*;

use crate::error::Result;
use crate::grid::{GridSpec, HermiteField, Stencil};
use crate::real::{det, Hess2, Mat2, Real, Vec2};
use crate::source::SourceField;
use crate::spectral::SpectralWorkspace;

/// Backward map `X_{[t_end, t_start]}` stored as identity plus a periodic
/// displacement, `X(x) = x + d(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CharMap<T> {
    pub disp_x: HermiteField<T>,
    pub disp_y: HermiteField<T>,
    pub t_start: T,
    pub t_end: T,
}

impl<T: Real> CharMap<T> {
    pub fn identity(grid: GridSpec<T>, t: T) -> Self {
        Self {
            disp_x: HermiteField::zeros(grid),
            disp_y: HermiteField::zeros(grid),
            t_start: t,
            t_end: t,
        }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.disp_x.grid
    }

    pub fn is_identity(&self) -> bool {
        self.disp_x.is_zero() && self.disp_y.is_zero()
    }

    #[inline]
    pub fn eval(&self, p: Vec2<T>) -> Vec2<T> {
        let st = Stencil::locate(self.grid(), p);
        [p[0] + self.disp_x.eval_at(&st), p[1] + self.disp_y.eval_at(&st)]
    }

    #[inline]
    pub fn eval_jac(&self, p: Vec2<T>) -> (Vec2<T>, Mat2<T>) {
        let st = Stencil::locate(self.grid(), p);
        let (dx, gx) = self.disp_x.eval_grad_at(&st);
        let (dy, gy) = self.disp_y.eval_grad_at(&st);
        (
            [p[0] + dx, p[1] + dy],
            [[T::one() + gx[0], gx[1]], [gy[0], T::one() + gy[1]]],
        )
    }

    #[inline]
    pub fn eval_hess(&self, p: Vec2<T>) -> (Vec2<T>, Mat2<T>, Hess2<T>) {
        let st = Stencil::locate(self.grid(), p);
        let (dx, gx, hx) = self.disp_x.eval_hess_at(&st);
        let (dy, gy, hy) = self.disp_y.eval_hess_at(&st);
        (
            [p[0] + dx, p[1] + dy],
            [[T::one() + gx[0], gx[1]], [gy[0], T::one() + gy[1]]],
            [hx, hy],
        )
    }

    /// `max |det ∇X - 1|` over the grid nodes.
    pub fn det_deviation(&self) -> T {
        (0..self.grid().len())
            .into_par_iter()
            .map(|k| {
                let j = [
                    [T::one() + self.disp_x.fx[k], self.disp_x.fy[k]],
                    [self.disp_y.fx[k], T::one() + self.disp_y.fy[k]],
                ];
                (det(&j) - T::one()).abs()
            })
            .reduce(T::zero, |a, b| a.max(b))
    }
}

/// Hermite node data of one composed-map node.
struct NodeUpdate<T> {
    d: Vec2<T>,
    grad: Mat2<T>,
    cross: Vec2<T>,
}

/// Advances the head map by one step, `X_{[t1, s]} = I_M[X_{[t0, s]} ∘ X̃_{[t1, t0]}]`.
///
/// Node values and gradients come from the chain rule through the
/// one-step map Jacobian; cross derivatives from a four-point stencil of
/// the composed map with offsets of `h / 100`. When `keep_stages` is set
/// the RK4 stage locations at every node are returned for reuse by the
/// source quadrature.
pub fn advance_map<T: Real, V: VelocityProvider<T>>(
    head: &CharMap<T>,
    vel: &V,
    t0: T,
    t1: T,
    keep_stages: bool,
) -> Result<(CharMap<T>, Option<Vec<OneStep<T>>>)> {
    if !(t1 > t0) {
        return Err(crate::error::CmmError::InvalidArgument(format!(
            "map advance needs t1 > t0, got [{t0}, {t1}]"
        )));
    }
    let grid = *head.grid();
    let ex = grid.hx() / T::of(100.0);
    let ey = grid.hy() / T::of(100.0);
    let composed = |p: Vec2<T>| -> Vec2<T> {
        let s = rk4_backward(vel, p, t0, t1);
        let st = Stencil::locate(&grid, s.end);
        [
            s.end[0] - p[0] + head.disp_x.eval_at(&st),
            s.end[1] - p[1] + head.disp_y.eval_at(&st),
        ]
    };
    let updates: Vec<(NodeUpdate<T>, Option<OneStep<T>>)> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let x = grid.node_at(k);
            let (s, jt) = rk4_backward_jac(vel, x, t0, t1);
            let (_, jold) = head.eval_jac(s.end);
            let st = Stencil::locate(&grid, s.end);
            let d = [
                s.end[0] - x[0] + head.disp_x.eval_at(&st),
                s.end[1] - x[1] + head.disp_y.eval_at(&st),
            ];
            let jn = crate::real::mat_mul(&jold, &jt);
            let grad = [[jn[0][0] - T::one(), jn[0][1]], [jn[1][0], jn[1][1] - T::one()]];
            let pp = composed([x[0] + ex, x[1] + ey]);
            let pm = composed([x[0] + ex, x[1] - ey]);
            let mp = composed([x[0] - ex, x[1] + ey]);
            let mm = composed([x[0] - ex, x[1] - ey]);
            let inv = T::one() / (T::of(4.0) * ex * ey);
            let cross = [
                (pp[0] - pm[0] - mp[0] + mm[0]) * inv,
                (pp[1] - pm[1] - mp[1] + mm[1]) * inv,
            ];
            (NodeUpdate { d, grad, cross }, keep_stages.then_some(s))
        })
        .collect();

    let mut next = CharMap::identity(grid, head.t_start);
    next.t_end = t1;
    let mut stages = keep_stages.then(|| Vec::with_capacity(grid.len()));
    for (k, (u, s)) in updates.into_iter().enumerate() {
        next.disp_x.f[k] = u.d[0];
        next.disp_x.fx[k] = u.grad[0][0];
        next.disp_x.fy[k] = u.grad[0][1];
        next.disp_x.fxy[k] = u.cross[0];
        next.disp_y.f[k] = u.d[1];
        next.disp_y.fx[k] = u.grad[1][0];
        next.disp_y.fy[k] = u.grad[1][1];
        next.disp_y.fxy[k] = u.cross[1];
        if let (Some(v), Some(s)) = (stages.as_mut(), s) {
            v.push(s);
        }
    }
    Ok((next, stages))
}

/// Thresholds of the remapping monitor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RemapCriteria<T> {
    /// Bound on `max |det ∇X - 1|`.
    pub delta_det: T,
    /// Bound on the energy fraction of the accumulated source above
    /// `tail_start` of the source-grid Nyquist mode.
    pub tail_threshold: T,
    pub tail_start: T,
}

impl<T: Real> Default for RemapCriteria<T> {
    fn default() -> Self {
        Self {
            delta_det: T::of(0.05),
            tail_threshold: T::of(1e-2),
            tail_start: T::of(2.0 / 3.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RemapCheck<T> {
    pub det_deviation: T,
    pub tail_fraction: T,
    pub fire: bool,
}

/// Evaluates the remapping criteria on the live head map and source.
pub fn check_remap<T: Real>(
    head: &CharMap<T>,
    source: &SourceField<T>,
    criteria: &RemapCriteria<T>,
    ws_source: &SpectralWorkspace<T>,
) -> Result<RemapCheck<T>> {
    let det_deviation = head.det_deviation();
    let tail_fraction = if source.field.is_zero() {
        T::zero()
    } else {
        ws_source.tail_energy_fraction(&source.field.f, criteria.tail_start)?
    };
    Ok(RemapCheck {
        det_deviation,
        tail_fraction,
        fire: det_deviation > criteria.delta_det || tail_fraction > criteria.tail_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(u: [f64; 2]) -> AnalyticVelocity<impl Fn(Vec2<f64>, f64) -> (Vec2<f64>, Mat2<f64>) + Sync> {
        AnalyticVelocity(move |_p: Vec2<f64>, _t: f64| (u, [[0.0; 2]; 2]))
    }

    #[test]
    fn identity_stays_identity() {
        let g = GridSpec::<f64>::square(8).unwrap();
        let id = CharMap::identity(g, 0.0);
        let (m, _) = advance_map(&id, &constant([0.0, 0.0]), 0.0, 0.1, false).unwrap();
        assert!(m.is_identity());
        assert_eq!(m.t_end, 0.1);
    }

    #[test]
    fn constant_flow_gives_uniform_shift() {
        let g = GridSpec::<f64>::square(8).unwrap();
        let id = CharMap::identity(g, 0.0);
        let (m, st) = advance_map(&id, &constant([1.0, 0.0]), 0.0, 0.1, true).unwrap();
        assert!(m.disp_x.f.iter().all(|v| (v + 0.1).abs() < 1e-15));
        assert!(m.disp_y.f.iter().all(|v| *v == 0.0));
        assert!(m.disp_x.fx.iter().chain(&m.disp_x.fxy).all(|v| v.abs() < 1e-9));
        assert_eq!(st.unwrap().len(), 64);
    }

    #[test]
    fn det_monitor() {
        let g = GridSpec::<f64>::square(8).unwrap();
        let mut m = CharMap::identity(g, 0.0);
        assert_eq!(m.det_deviation(), 0.0);
        m.disp_x.fx[3] = 0.06;
        assert!((m.det_deviation() - 0.06).abs() < 1e-15);
        let src = SourceField::zero(g, 0.0);
        let ws = SpectralWorkspace::new(g);
        let c = check_remap(&m, &src, &RemapCriteria::default(), &ws).unwrap();
        assert!(c.fire);
        let c = check_remap(&CharMap::identity(g, 0.0), &src, &RemapCriteria::default(), &ws).unwrap();
        assert!(!c.fire);
    }

    #[test]
    fn source_tail_triggers_remap() {
        let g = GridSpec::<f64>::square(64).unwrap();
        let ws = SpectralWorkspace::new(g);
        // 0.9 kmax = 28.8, the nearest resolved mode is 29
        let vals = g.par_map_nodes(|p| (29.0 * p[0]).cos());
        let src = SourceField {
            field: ws.hermite_from_values(vals).unwrap(),
            t_start: 0.0,
            t_end: 0.1,
        };
        let c = check_remap(&CharMap::identity(g, 0.0), &src, &RemapCriteria::default(), &ws).unwrap();
        assert!(c.fire && c.tail_fraction > 0.99);
    }
}
