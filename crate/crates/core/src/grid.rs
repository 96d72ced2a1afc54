//! Periodic gradient-augmented grids and bicubic Hermite interpolation.
//!
//! A [`HermiteField`] stores, at every node of a uniform periodic grid, the
//! value `f` together with `∂x f`, `∂y f` and `∂x∂y f`. Inside each cell the
//! interpolant is the tensor-product cubic Hermite polynomial built from the
//! sixteen corner values; it is C¹ across cell faces and reproduces bicubic
//! data exactly.

use rayon::prelude::*;

use crate::error::{CmmError, Result};
use crate::real::{Real, Vec2};

/// Uniform periodic grid on `[0, lx) x [0, ly)`. Node `(i, j)` sits at
/// `(i * lx / nx, j * ly / ny)` and is stored at flat index `j * nx + i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec<T> {
    pub nx: usize,
    pub ny: usize,
    pub lx: T,
    pub ly: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(nx: usize, ny: usize, lx: T, ly: T) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(CmmError::InvalidGrid(format!(
                "grid {nx}x{ny} needs at least 4 nodes per axis"
            )));
        }
        if !(lx > T::zero() && ly > T::zero() && lx.is_finite() && ly.is_finite()) {
            return Err(CmmError::InvalidGrid(format!(
                "domain lengths must be positive, got {lx} x {ly}"
            )));
        }
        Ok(Self { nx, ny, lx, ly })
    }

    /// `n x n` grid on the `2π`-periodic square.
    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n, T::TAU(), T::TAU())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn hx(&self) -> T {
        self.lx / T::of_usize(self.nx)
    }

    #[inline]
    pub fn hy(&self) -> T {
        self.ly / T::of_usize(self.ny)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> Vec2<T> {
        [T::of_usize(i) * self.hx(), T::of_usize(j) * self.hy()]
    }

    /// Node coordinates for a flat index.
    #[inline]
    pub fn node_at(&self, k: usize) -> Vec2<T> {
        self.node(k % self.nx, k / self.nx)
    }

    /// Evaluates `f` at every node in parallel, in storage order.
    pub fn par_map_nodes<R, F>(&self, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(Vec2<T>) -> R + Sync + Send,
    {
        (0..self.len())
            .into_par_iter()
            .map(|k| f(self.node_at(k)))
            .collect()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.lx == other.lx && self.ly == other.ly
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(CmmError::GridMismatch {
                expected: self.describe(),
                got: other.describe(),
            })
        }
    }

    pub fn describe(&self) -> String {
        format!("{}x{} on [0,{}]x[0,{}]", self.nx, self.ny, self.lx, self.ly)
    }
}

/// Cubic Hermite basis weights along one axis, ordered
/// `[left value, left slope, right value, right slope]` with the slope
/// weights already scaled by the cell width.
#[derive(Clone, Copy, Debug)]
struct AxisWeights<T> {
    w: [T; 4],
    d: [T; 4],
    dd: [T; 4],
}

impl<T: Real> AxisWeights<T> {
    #[inline(always)]
    fn values(a: T, h: T) -> [T; 4] {
        let one = T::one();
        let two = T::of(2.0);
        let three = T::of(3.0);
        let a2 = a * a;
        let a3 = a2 * a;
        let h00 = two * a3 - three * a2 + one;
        let h10 = a3 - two * a2 + a;
        let h01 = three * a2 - two * a3;
        let h11 = a3 - a2;
        [h00, h * h10, h01, h * h11]
    }

    #[inline(always)]
    fn first(a: T, h: T) -> [T; 4] {
        let one = T::one();
        let six = T::of(6.0);
        let a2 = a * a;
        let d00 = (six * a2 - six * a) / h;
        let d10 = T::of(3.0) * a2 - T::of(4.0) * a + one;
        let d11 = T::of(3.0) * a2 - T::of(2.0) * a;
        [d00, d10, -d00, d11]
    }

    #[inline(always)]
    fn second(a: T, h: T) -> [T; 4] {
        let six = T::of(6.0);
        let twelve = T::of(12.0);
        let s00 = (twelve * a - six) / (h * h);
        let s10 = (six * a - T::of(4.0)) / h;
        let s11 = (six * a - T::of(2.0)) / h;
        [s00, s10, -s00, s11]
    }

    #[inline(always)]
    fn full(a: T, h: T) -> Self {
        Self {
            w: Self::values(a, h),
            d: Self::first(a, h),
            dd: Self::second(a, h),
        }
    }
}

/// Cell lookup for one evaluation point: the four corner indices and the
/// fractional position inside the cell. Fields living on the same grid can
/// share a stencil.
#[derive(Clone, Copy, Debug)]
pub struct Stencil<T> {
    idx: [usize; 4],
    a: T,
    b: T,
    hx: T,
    hy: T,
}

#[inline(always)]
fn wrap_axis<T: Real>(x: T, h: T, n: usize) -> (usize, usize, T) {
    let mut s = x / h;
    let r = s.round();
    // snap to the node when the division lands within a few ulps of it, so
    // evaluation at node coordinates returns stored data exactly
    if (s - r).abs() <= T::of(4.0) * T::epsilon() * r.abs().max(T::one()) {
        s = r;
    }
    let fl = s.floor();
    let a = s - fl;
    let n_i = n as i64;
    let i = fl.to_i64().unwrap_or(0).rem_euclid(n_i) as usize;
    let i1 = if i + 1 == n { 0 } else { i + 1 };
    (i, i1, a)
}

impl<T: Real> Stencil<T> {
    /// Locates `p` (any real coordinates, wrapped periodically).
    #[inline]
    pub fn locate(grid: &GridSpec<T>, p: Vec2<T>) -> Self {
        let hx = grid.hx();
        let hy = grid.hy();
        let (i0, i1, a) = wrap_axis(p[0], hx, grid.nx);
        let (j0, j1, b) = wrap_axis(p[1], hy, grid.ny);
        let r0 = j0 * grid.nx;
        let r1 = j1 * grid.nx;
        Self {
            idx: [r0 + i0, r0 + i1, r1 + i0, r1 + i1],
            a,
            b,
            hx,
            hy,
        }
    }
}

/// Gradient-augmented periodic scalar field, stored as four flat arrays.
#[derive(Clone, Debug, PartialEq)]
pub struct HermiteField<T> {
    pub grid: GridSpec<T>,
    pub f: Vec<T>,
    pub fx: Vec<T>,
    pub fy: Vec<T>,
    pub fxy: Vec<T>,
}

/// Sixteen corner coefficients gathered for one cell,
/// `c[corner] = [f, fx, fy, fxy]`, corners ordered (0,0), (1,0), (0,1), (1,1).
type CellData<T> = [[T; 4]; 4];

#[inline(always)]
fn contract<T: Real>(c: &CellData<T>, wx: &[T; 4], wy: &[T; 4]) -> T {
    let mut s = T::zero();
    for (k, cd) in c.iter().enumerate() {
        let p = k & 1;
        let q = k >> 1;
        let x0 = wx[2 * p];
        let x1 = wx[2 * p + 1];
        let y0 = wy[2 * q];
        let y1 = wy[2 * q + 1];
        s = s + cd[0] * x0 * y0 + cd[1] * x1 * y0 + cd[2] * x0 * y1 + cd[3] * x1 * y1;
    }
    s
}

impl<T: Real> HermiteField<T> {
    pub fn zeros(grid: GridSpec<T>) -> Self {
        let n = grid.len();
        Self {
            grid,
            f: vec![T::zero(); n],
            fx: vec![T::zero(); n],
            fy: vec![T::zero(); n],
            fxy: vec![T::zero(); n],
        }
    }

    pub fn from_parts(grid: GridSpec<T>, f: Vec<T>, fx: Vec<T>, fy: Vec<T>, fxy: Vec<T>) -> Result<Self> {
        let n = grid.len();
        for (name, arr) in [("f", &f), ("fx", &fx), ("fy", &fy), ("fxy", &fxy)] {
            if arr.len() != n {
                return Err(CmmError::GridMismatch {
                    expected: format!("{n} entries"),
                    got: format!("{} entries in {name}", arr.len()),
                });
            }
        }
        Ok(Self { grid, f, fx, fy, fxy })
    }

    /// Samples a function returning `(f, ∂x f, ∂y f, ∂x∂y f)` at every node.
    pub fn project<F>(grid: GridSpec<T>, g: F) -> Self
    where
        F: Fn(T, T) -> [T; 4] + Sync + Send,
    {
        let data = grid.par_map_nodes(|p| g(p[0], p[1]));
        let mut out = Self::zeros(grid);
        for (k, d) in data.into_iter().enumerate() {
            out.f[k] = d[0];
            out.fx[k] = d[1];
            out.fy[k] = d[2];
            out.fxy[k] = d[3];
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        [&self.f, &self.fx, &self.fy, &self.fxy]
            .iter()
            .all(|a| a.iter().all(|v| *v == T::zero()))
    }

    #[inline(always)]
    fn gather(&self, st: &Stencil<T>) -> CellData<T> {
        let mut c = [[T::zero(); 4]; 4];
        for (k, &i) in st.idx.iter().enumerate() {
            c[k] = [self.f[i], self.fx[i], self.fy[i], self.fxy[i]];
        }
        c
    }

    #[inline]
    pub fn eval_at(&self, st: &Stencil<T>) -> T {
        let wx = AxisWeights::values(st.a, st.hx);
        let wy = AxisWeights::values(st.b, st.hy);
        contract(&self.gather(st), &wx, &wy)
    }

    /// Value and exact gradient of the interpolant.
    #[inline]
    pub fn eval_grad_at(&self, st: &Stencil<T>) -> (T, Vec2<T>) {
        let wx = AxisWeights::values(st.a, st.hx);
        let wy = AxisWeights::values(st.b, st.hy);
        let dx = AxisWeights::first(st.a, st.hx);
        let dy = AxisWeights::first(st.b, st.hy);
        let c = self.gather(st);
        (
            contract(&c, &wx, &wy),
            [contract(&c, &dx, &wy), contract(&c, &wx, &dy)],
        )
    }

    /// Value, gradient and Hessian `[[fxx, fxy], [fxy, fyy]]` of the interpolant.
    /// The pure second derivatives jump across cell faces.
    #[inline]
    pub fn eval_hess_at(&self, st: &Stencil<T>) -> (T, Vec2<T>, [[T; 2]; 2]) {
        let ax = AxisWeights::full(st.a, st.hx);
        let ay = AxisWeights::full(st.b, st.hy);
        let c = self.gather(st);
        let fxy = contract(&c, &ax.d, &ay.d);
        (
            contract(&c, &ax.w, &ay.w),
            [contract(&c, &ax.d, &ay.w), contract(&c, &ax.w, &ay.d)],
            [
                [contract(&c, &ax.dd, &ay.w), fxy],
                [fxy, contract(&c, &ax.w, &ay.dd)],
            ],
        )
    }

    /// Bicubic Hermite interpolant at `p`, wrapped into the periodic domain.
    /// Non-finite coordinates yield NaN; see [`HermiteField::try_eval`].
    #[inline]
    pub fn eval(&self, p: Vec2<T>) -> T {
        if !(p[0].is_finite() && p[1].is_finite()) {
            return T::nan();
        }
        self.eval_at(&Stencil::locate(&self.grid, p))
    }

    pub fn try_eval(&self, p: Vec2<T>) -> Result<T> {
        if !(p[0].is_finite() && p[1].is_finite()) {
            return Err(CmmError::NonFinite(format!(
                "evaluation point ({}, {})",
                p[0], p[1]
            )));
        }
        Ok(self.eval(p))
    }

    #[inline]
    pub fn eval_grad(&self, p: Vec2<T>) -> (T, Vec2<T>) {
        if !(p[0].is_finite() && p[1].is_finite()) {
            return (T::nan(), [T::nan(); 2]);
        }
        self.eval_grad_at(&Stencil::locate(&self.grid, p))
    }

    #[inline]
    pub fn eval_hess(&self, p: Vec2<T>) -> (T, Vec2<T>, [[T; 2]; 2]) {
        self.eval_hess_at(&Stencil::locate(&self.grid, p))
    }

    /// `Σ w_i field_i`, node data combined linearly. Exact for the
    /// interpolant since evaluation is linear in the node data.
    pub fn linear_combination(terms: &[(&HermiteField<T>, T)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or(CmmError::InvalidArgument("empty linear combination".into()))?;
        let grid = first.0.grid;
        for (fld, _) in terms {
            grid.check_same(&fld.grid)?;
        }
        let n = grid.len();
        let combine = |sel: fn(&HermiteField<T>) -> &Vec<T>| -> Vec<T> {
            (0..n)
                .into_par_iter()
                .map(|k| {
                    terms
                        .iter()
                        .fold(T::zero(), |acc, (fld, w)| acc + *w * sel(fld)[k])
                })
                .collect()
        };
        Ok(Self {
            grid,
            f: combine(|h| &h.f),
            fx: combine(|h| &h.fx),
            fy: combine(|h| &h.fy),
            fxy: combine(|h| &h.fxy),
        })
    }

    pub fn max_abs(&self) -> T {
        self.f.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}
