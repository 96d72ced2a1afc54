//! Submap decomposition of the global map and the matching recursion for
//! the accumulated source.

use crate::error::{CmmError, Result};
use crate::flow_map::CharMap;
use crate::grid::GridSpec;
use crate::real::{adjugate, compose_hess, mat_mul, mat_vec, Hess2, Mat2, Real, Vec2};
use crate::source::SourceField;

/// A frozen submap together with the source sub-integral over the same interval.
#[derive(Clone, Debug, PartialEq)]
pub struct Submap<T> {
    pub map: CharMap<T>,
    pub source: SourceField<T>,
}

/// Frozen submaps `X_{[τ1,τ0]}, …, X_{[τi,τ(i-1)]}` plus the live head
/// `X_{[t,τi]}` and its source.
#[derive(Clone, Debug, PartialEq)]
pub struct SubmapStack<T> {
    pub frozen: Vec<Submap<T>>,
    pub head_map: CharMap<T>,
    pub head_source: SourceField<T>,
}

impl<T: Real> SubmapStack<T> {
    pub fn new(map_grid: GridSpec<T>, source_grid: GridSpec<T>, t0: T) -> Self {
        Self {
            frozen: Vec::new(),
            head_map: CharMap::identity(map_grid, t0),
            head_source: SourceField::zero(source_grid, t0),
        }
    }

    /// Number of submaps including the live head.
    pub fn n_submaps(&self) -> usize {
        self.frozen.len() + 1
    }

    pub fn n_remaps(&self) -> usize {
        self.frozen.len()
    }

    pub fn t_start(&self) -> T {
        self.frozen
            .first()
            .map_or(self.head_map.t_start, |s| s.map.t_start)
    }

    pub fn t(&self) -> T {
        self.head_map.t_end
    }

    /// Remap times `τ1, …, τi`.
    pub fn remap_times(&self) -> Vec<T> {
        self.frozen.iter().map(|s| s.map.t_end).collect()
    }

    /// Freezes head map and head source at the current time and restarts
    /// both from identity and zero.
    pub fn freeze(&mut self) {
        let t = self.t();
        let map_grid = *self.head_map.grid();
        let source_grid = self.head_source.field.grid;
        let map = std::mem::replace(&mut self.head_map, CharMap::identity(map_grid, t));
        let source = std::mem::replace(&mut self.head_source, SourceField::zero(source_grid, t));
        self.frozen.push(Submap { map, source });
    }

    /// Checks that the submaps chain in time and that each source covers
    /// the same interval as its map.
    pub fn validate(&self) -> Result<()> {
        let mut expect = self.t_start();
        let pairs = self
            .frozen
            .iter()
            .map(|s| (&s.map, &s.source))
            .chain(std::iter::once((&self.head_map, &self.head_source)));
        for (i, (m, s)) in pairs.enumerate() {
            if m.t_start != expect {
                return Err(CmmError::InvalidArgument(format!(
                    "submap {i} starts at {} but predecessor ends at {expect}",
                    m.t_start
                )));
            }
            if s.t_start != m.t_start || s.t_end != m.t_end {
                return Err(CmmError::InvalidArgument(format!(
                    "submap {i} covers [{}, {}] but its source covers [{}, {}]",
                    m.t_start, m.t_end, s.t_start, s.t_end
                )));
            }
            expect = m.t_end;
        }
        Ok(())
    }

    /// Global backward map `X_{[t,0]}(p)`: head first, then frozen submaps
    /// from newest to oldest.
    #[inline]
    pub fn compose_eval(&self, p: Vec2<T>) -> Vec2<T> {
        let mut q = self.head_map.eval(p);
        for s in self.frozen.iter().rev() {
            q = s.map.eval(q);
        }
        q
    }

    #[inline]
    pub fn compose_eval_jac(&self, p: Vec2<T>) -> (Vec2<T>, Mat2<T>) {
        let (mut q, mut jac) = self.head_map.eval_jac(p);
        for s in self.frozen.iter().rev() {
            let (q2, j2) = s.map.eval_jac(q);
            jac = mat_mul(&j2, &jac);
            q = q2;
        }
        (q, jac)
    }

    #[inline]
    pub fn compose_eval_hess(&self, p: Vec2<T>) -> (Vec2<T>, Mat2<T>, Hess2<T>) {
        let (mut q, mut jac, mut hess) = self.head_map.eval_hess(p);
        for s in self.frozen.iter().rev() {
            let (q2, j2, h2) = s.map.eval_hess(q);
            hess = compose_hess(&j2, &h2, &jac, &hess);
            jac = mat_mul(&j2, &jac);
            q = q2;
        }
        (q, jac, hess)
    }

    /// Foot point `X_{[t,0]}(p)` and total source `F_{[t,0]}(p)`.
    #[inline]
    pub fn eval_with_source(&self, p: Vec2<T>) -> (Vec2<T>, T) {
        let mut f = self.head_source.eval(p);
        let mut q = self.head_map.eval(p);
        for s in self.frozen.iter().rev() {
            f = f + s.source.eval(q);
            q = s.map.eval(q);
        }
        (q, f)
    }

    /// As [`SubmapStack::eval_with_source`], also returning `D X_{[t,0]}(p)`.
    #[inline]
    pub fn eval_jac_with_source(&self, p: Vec2<T>) -> (Vec2<T>, Mat2<T>, T) {
        let mut f = self.head_source.eval(p);
        let (mut q, mut jac) = self.head_map.eval_jac(p);
        for s in self.frozen.iter().rev() {
            f = f + s.source.eval(q);
            let (q2, j2) = s.map.eval_jac(q);
            jac = mat_mul(&j2, &jac);
            q = q2;
        }
        (q, jac, f)
    }

    #[inline]
    pub fn total_source_eval(&self, p: Vec2<T>) -> T {
        self.eval_with_source(p).1
    }
}

/// `θ0 ∘ X_{[t,0]} + F_{[t,0]}` at every node of `grid`. Pass
/// `with_source = false` for the bare pullback.
pub fn pullback_scalar<T, F>(stack: &SubmapStack<T>, grid: &GridSpec<T>, theta0: F, with_source: bool) -> Vec<T>
where
    T: Real,
    F: Fn(Vec2<T>) -> T + Sync,
{
    grid.par_map_nodes(|p| {
        if with_source {
            let (q, f) = stack.eval_with_source(p);
            theta0(q) + f
        } else {
            theta0(stack.compose_eval(p))
        }
    })
}

/// `adj(D X) · B0(X)` at every node of `grid`, as two component arrays.
pub fn pullback_twoform<T, F>(stack: &SubmapStack<T>, grid: &GridSpec<T>, b0: F) -> (Vec<T>, Vec<T>)
where
    T: Real,
    F: Fn(Vec2<T>) -> Vec2<T> + Sync,
{
    let v: Vec<Vec2<T>> = grid.par_map_nodes(|p| {
        let (q, jac) = stack.compose_eval_jac(p);
        mat_vec(&adjugate(&jac), &b0(q))
    });
    v.into_iter().map(|b| (b[0], b[1])).unzip()
}

/// Pulled-back field `B = adj(D X) B0(X)` and its current `j = ∂x By - ∂y Bx`
/// at `p`, by the chain rule through the composed map's Hessian. `b0`
/// returns the initial field and its Jacobian.
#[inline]
pub fn twoform_with_current<T, F>(stack: &SubmapStack<T>, p: Vec2<T>, b0: &F) -> (Vec2<T>, T)
where
    T: Real,
    F: Fn(Vec2<T>) -> (Vec2<T>, Mat2<T>),
{
    let (q, jac, hess) = stack.compose_eval_hess(p);
    let (b, db) = b0(q);
    let adj = adjugate(&jac);
    // derivative of adj along direction a: d[ [X1y, -X0y], [-X1x, X0x] ]
    let dadj = |a: usize| -> Mat2<T> {
        [
            [hess[1][1][a], -hess[0][1][a]],
            [-hess[1][0][a], hess[0][0][a]],
        ]
    };
    let bt = mat_vec(&adj, &b);
    // ∂a B_i = Σk ∂a adj_ik b_k + adj_ik Σl ∂l b_k ∂a X_l
    let d = |i: usize, a: usize| -> T {
        let da = dadj(a);
        let mut s = T::zero();
        for k in 0..2 {
            s = s + da[i][k] * b[k];
            let mut chain = T::zero();
            for l in 0..2 {
                chain = chain + db[k][l] * jac[l][a];
            }
            s = s + adj[i][k] * chain;
        }
        s
    };
    (bt, d(1, 0) - d(0, 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::HermiteField;

    fn shifted(g: GridSpec<f64>, c: Vec2<f64>, t0: f64, t1: f64) -> CharMap<f64> {
        let mut m = CharMap::identity(g, t0);
        m.t_end = t1;
        m.disp_x.f.iter_mut().for_each(|v| *v = c[0]);
        m.disp_y.f.iter_mut().for_each(|v| *v = c[1]);
        m
    }

    /// `X(x, y) = (x + a sin y, y + b sin x)` with exact node data.
    fn sheared(g: GridSpec<f64>, a: f64, b: f64) -> CharMap<f64> {
        CharMap {
            disp_x: HermiteField::project(g, |_x, y| [a * y.sin(), 0.0, a * y.cos(), 0.0]),
            disp_y: HermiteField::project(g, |x, _y| [b * x.sin(), b * x.cos(), 0.0, 0.0]),
            t_start: 0.0,
            t_end: 0.1,
        }
    }

    #[test]
    fn translations_compose_additively() {
        let g = GridSpec::<f64>::square(8).unwrap();
        let mut s = SubmapStack::new(g, g, 0.0);
        s.head_map = shifted(g, [0.25, -0.5], 0.0, 1.0);
        s.head_source.t_end = 1.0;
        s.freeze();
        s.head_map = shifted(g, [0.125, 0.0], 1.0, 2.0);
        s.head_source.t_end = 2.0;
        s.head_source.field.f.iter_mut().for_each(|v| *v = 2.0);
        s.validate().unwrap();
        assert_eq!((s.n_submaps(), s.remap_times()), (2, vec![1.0]));
        let q = s.compose_eval([1.0, 2.0]);
        assert!((q[0] - 1.375).abs() < 1e-15 && (q[1] - 1.5).abs() < 1e-15);
        let (_, jac, f) = s.eval_jac_with_source([1.0, 2.0]);
        assert!((f - 2.0).abs() < 1e-15);
        assert!((jac[0][0] - 1.0).abs() < 1e-14 && jac[0][1].abs() < 1e-14);
    }

    #[test]
    fn validate_rejects_gaps() {
        let g = GridSpec::<f64>::square(8).unwrap();
        let mut s = SubmapStack::new(g, g, 0.0);
        s.head_map.t_end = 0.5;
        assert!(s.validate().is_err());
        s.head_source.t_end = 0.5;
        s.validate().unwrap();
    }

    #[test]
    fn twoform_matches_adjugate_at_nodes() {
        let g = GridSpec::<f64>::square(32).unwrap();
        let (a, b) = (0.1, 0.05);
        let mut s = SubmapStack::new(g, g, 0.0);
        s.head_map = sheared(g, a, b);
        s.head_source.t_end = 0.1;
        let b0 = |q: Vec2<f64>| [q[1].cos(), 2.0];
        let (bx, by) = pullback_twoform(&s, &g, b0);
        for k in 0..g.len() {
            let p = g.node_at(k);
            let q = [p[0] + a * p[1].sin(), p[1] + b * p[0].sin()];
            // DX = [[1, a cos y], [b cos x, 1]]
            let adj = [[1.0, -a * p[1].cos()], [-b * p[0].cos(), 1.0]];
            let e = mat_vec(&adj, &b0(q));
            assert!((bx[k] - e[0]).abs() < 1e-12 && (by[k] - e[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn current_by_chain_rule_matches_spectral_curl() {
        let g = GridSpec::<f64>::square(64).unwrap();
        let mut s = SubmapStack::new(g, g, 0.0);
        s.head_map = sheared(g, 0.05, 0.03);
        s.head_source.t_end = 0.1;
        s.freeze();
        s.head_map = sheared(g, -0.02, 0.04);
        s.head_map.t_start = 0.1;
        s.head_map.t_end = 0.2;
        s.head_source.t_end = 0.2;
        let b0 = |q: Vec2<f64>| -> (Vec2<f64>, Mat2<f64>) {
            let (s2, c2) = (2.0 * q[1]).sin_cos();
            ([-2.0 * s2, 4.0 * q[0].sin()], [[0.0, -4.0 * c2], [4.0 * q[0].cos(), 0.0]])
        };
        let fine = GridSpec::<f64>::square(128).unwrap();
        let (bx, by) = pullback_twoform(&s, &fine, |q| b0(q).0);
        let ws = crate::spectral::SpectralWorkspace::new(fine);
        let j = ws.curl2d(&bx, &by).unwrap();
        let mut err: f64 = 0.0;
        for k in 0..fine.len() {
            let (bt, jj) = twoform_with_current(&s, fine.node_at(k), &b0);
            assert!((bt[0] - bx[k]).abs() < 1e-13);
            err = err.max((jj - j[k]).abs());
        }
        // Hermite second derivatives are first-order accurate in h
        assert!(err < 0.5, "{err}");
        let jmax = j.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err / jmax < 0.05);
    }
}
