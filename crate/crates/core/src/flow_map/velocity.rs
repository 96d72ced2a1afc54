//! Velocity fields seen by the one-step map: Hermite snapshots on a grid,
//! their time extrapolant, or an analytic closure.

use crate::error::Result;
use crate::grid::{HermiteField, Stencil};
use crate::history::{Combine, SnapshotHistory, Stages};
use crate::real::{Mat2, Real, Vec2};

/// Both velocity components as Hermite fields on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityField<T> {
    pub ux: HermiteField<T>,
    pub uy: HermiteField<T>,
}

impl<T: Real> VelocityField<T> {
    pub fn new(ux: HermiteField<T>, uy: HermiteField<T>) -> Result<Self> {
        ux.grid.check_same(&uy.grid)?;
        Ok(Self { ux, uy })
    }

    pub fn zeros(grid: crate::grid::GridSpec<T>) -> Self {
        Self {
            ux: HermiteField::zeros(grid),
            uy: HermiteField::zeros(grid),
        }
    }

    #[inline]
    pub fn eval(&self, p: Vec2<T>) -> Vec2<T> {
        let st = Stencil::locate(&self.ux.grid, p);
        [self.ux.eval_at(&st), self.uy.eval_at(&st)]
    }

    #[inline]
    pub fn eval_jac(&self, p: Vec2<T>) -> (Vec2<T>, Mat2<T>) {
        let st = Stencil::locate(&self.ux.grid, p);
        let (vx, gx) = self.ux.eval_grad_at(&st);
        let (vy, gy) = self.uy.eval_grad_at(&st);
        ([vx, vy], [gx, gy])
    }

    /// Largest node speed `max |u|`.
    pub fn max_speed(&self) -> T {
        self.ux
            .f
            .iter()
            .zip(&self.uy.f)
            .fold(T::zero(), |m, (a, b)| m.max((*a * *a + *b * *b).sqrt()))
    }
}

impl<T: Real> Combine<T> for VelocityField<T> {
    fn combine(terms: &[(&Self, T)]) -> Result<Self> {
        let xs: Vec<_> = terms.iter().map(|(v, w)| (&v.ux, *w)).collect();
        let ys: Vec<_> = terms.iter().map(|(v, w)| (&v.uy, *w)).collect();
        Ok(Self {
            ux: HermiteField::linear_combination(&xs)?,
            uy: HermiteField::linear_combination(&ys)?,
        })
    }
}

pub type VelocityHistory<T> = SnapshotHistory<T, VelocityField<T>>;

/// Time-dependent velocity that can be sampled with its spatial Jacobian.
pub trait VelocityProvider<T: Real>: Sync {
    fn velocity(&self, p: Vec2<T>, t: T) -> Vec2<T>;
    fn velocity_jac(&self, p: Vec2<T>, t: T) -> (Vec2<T>, Mat2<T>);
}

impl<T: Real> VelocityProvider<T> for Stages<'_, T, VelocityField<T>> {
    #[inline]
    fn velocity(&self, p: Vec2<T>, t: T) -> Vec2<T> {
        match self.at(t) {
            Some(v) => v.eval(p),
            None => {
                let mut u = [T::zero(); 2];
                self.for_each_weighted(t, |v, w| {
                    let a = v.eval(p);
                    u = [u[0] + w * a[0], u[1] + w * a[1]];
                });
                u
            }
        }
    }

    #[inline]
    fn velocity_jac(&self, p: Vec2<T>, t: T) -> (Vec2<T>, Mat2<T>) {
        match self.at(t) {
            Some(v) => v.eval_jac(p),
            None => {
                let mut u = [T::zero(); 2];
                let mut j = [[T::zero(); 2]; 2];
                self.for_each_weighted(t, |v, w| {
                    let (a, b) = v.eval_jac(p);
                    for r in 0..2 {
                        u[r] = u[r] + w * a[r];
                        for c in 0..2 {
                            j[r][c] = j[r][c] + w * b[r][c];
                        }
                    }
                });
                (u, j)
            }
        }
    }
}

/// Closure-backed velocity returning the value and Jacobian at `(p, t)`.
pub struct AnalyticVelocity<F>(pub F);

impl<T, F> VelocityProvider<T> for AnalyticVelocity<F>
where
    T: Real,
    F: Fn(Vec2<T>, T) -> (Vec2<T>, Mat2<T>) + Sync,
{
    #[inline]
    fn velocity(&self, p: Vec2<T>, t: T) -> Vec2<T> {
        (self.0)(p, t).0
    }

    #[inline]
    fn velocity_jac(&self, p: Vec2<T>, t: T) -> (Vec2<T>, Mat2<T>) {
        (self.0)(p, t)
    }
}
