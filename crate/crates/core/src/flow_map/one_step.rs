//! Backward RK4 integration of the characteristic ODE over one time step.

use rayon::prelude::*;

use crate::error::{CmmError, Result};
use crate::flow_map::velocity::VelocityProvider;
use crate::real::{identity, mat_mul, Mat2, Real, Vec2};

/// RK4 quadrature weights for the stages returned in [`OneStep::stages`].
pub const RK4_WEIGHTS: [f64; 4] = [1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0];

/// Times at which the RK4 stages sample the velocity, `[t1, mid, mid, t0]`.
#[inline]
pub fn stage_times<T: Real>(t0: T, t1: T) -> [T; 4] {
    let mid = t0 + (t1 - t0) * T::of(0.5);
    [t1, mid, mid, t0]
}

/// Endpoint of the backward one-step map and the four stage locations
/// `X̃_{[t1, s_j]}(x)`, which the source quadrature reuses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OneStep<T> {
    pub end: Vec2<T>,
    pub stages: [Vec2<T>; 4],
}

#[inline]
fn axpy<T: Real>(x: Vec2<T>, a: T, v: Vec2<T>) -> Vec2<T> {
    [x[0] + a * v[0], x[1] + a * v[1]]
}

/// Integrates `dX/dr = -u(X, r)` from `r = t1` down to `r = t0`, starting at `x`.
#[inline]
pub fn rk4_backward<T: Real, V: VelocityProvider<T> + ?Sized>(vel: &V, x: Vec2<T>, t0: T, t1: T) -> OneStep<T> {
    let dt = t1 - t0;
    let half = dt * T::of(0.5);
    let ts = stage_times(t0, t1);
    let p0 = x;
    let k0 = vel.velocity(p0, ts[0]);
    let p1 = axpy(x, -half, k0);
    let k1 = vel.velocity(p1, ts[1]);
    let p2 = axpy(x, -half, k1);
    let k2 = vel.velocity(p2, ts[2]);
    let p3 = axpy(x, -dt, k2);
    let k3 = vel.velocity(p3, ts[3]);
    let two = T::of(2.0);
    let sixth = dt / T::of(6.0);
    let end = [
        x[0] - sixth * (k0[0] + two * k1[0] + two * k2[0] + k3[0]),
        x[1] - sixth * (k0[1] + two * k1[1] + two * k2[1] + k3[1]),
    ];
    OneStep {
        end,
        stages: [p0, p1, p2, p3],
    }
}

/// As [`rk4_backward`], also returning the exact Jacobian of the discrete
/// RK4 update with respect to the start point.
#[inline]
pub fn rk4_backward_jac<T: Real, V: VelocityProvider<T> + ?Sized>(
    vel: &V,
    x: Vec2<T>,
    t0: T,
    t1: T,
) -> (OneStep<T>, Mat2<T>) {
    let dt = t1 - t0;
    let half = dt * T::of(0.5);
    let ts = stage_times(t0, t1);
    let id = identity::<T>();
    let shift = |a: T, k: &Mat2<T>| -> Mat2<T> {
        [
            [id[0][0] + a * k[0][0], a * k[0][1]],
            [a * k[1][0], id[1][1] + a * k[1][1]],
        ]
    };

    let p0 = x;
    let (k0, g0) = vel.velocity_jac(p0, ts[0]);
    let j0 = g0;
    let p1 = axpy(x, -half, k0);
    let (k1, g1) = vel.velocity_jac(p1, ts[1]);
    let j1 = mat_mul(&g1, &shift(-half, &j0));
    let p2 = axpy(x, -half, k1);
    let (k2, g2) = vel.velocity_jac(p2, ts[2]);
    let j2 = mat_mul(&g2, &shift(-half, &j1));
    let p3 = axpy(x, -dt, k2);
    let (k3, g3) = vel.velocity_jac(p3, ts[3]);
    let j3 = mat_mul(&g3, &shift(-dt, &j2));

    let two = T::of(2.0);
    let sixth = dt / T::of(6.0);
    let end = [
        x[0] - sixth * (k0[0] + two * k1[0] + two * k2[0] + k3[0]),
        x[1] - sixth * (k0[1] + two * k1[1] + two * k2[1] + k3[1]),
    ];
    let mut jac = [[T::zero(); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            let s = j0[r][c] + two * j1[r][c] + two * j2[r][c] + j3[r][c];
            jac[r][c] = id[r][c] - sixth * s;
        }
    }
    (
        OneStep {
            end,
            stages: [p0, p1, p2, p3],
        },
        jac,
    )
}

/// One-step map `X̃_{[t1, t0]}` at every query point, with stage locations.
pub fn one_step_map<T: Real, V: VelocityProvider<T>>(
    vel: &V,
    t0: T,
    t1: T,
    points: &[Vec2<T>],
) -> Result<Vec<OneStep<T>>> {
    if !(t1 > t0) {
        return Err(CmmError::InvalidArgument(format!(
            "one-step map needs t1 > t0, got [{t0}, {t1}]"
        )));
    }
    let out: Vec<OneStep<T>> = points
        .par_iter()
        .map(|&p| rk4_backward(vel, p, t0, t1))
        .collect();
    if let Some(bad) = out
        .iter()
        .find(|s| !(s.end[0].is_finite() && s.end[1].is_finite()))
    {
        return Err(CmmError::NonFinite(format!(
            "velocity along characteristic from ({}, {})",
            bad.stages[0][0], bad.stages[0][1]
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow_map::velocity::AnalyticVelocity;
    use std::f64::consts::PI;

    fn rotation() -> AnalyticVelocity<impl Fn(Vec2<f64>, f64) -> (Vec2<f64>, Mat2<f64>) + Sync> {
        AnalyticVelocity(|p: Vec2<f64>, _t: f64| ([-(p[1] - PI), p[0] - PI], [[0.0, -1.0], [1.0, 0.0]]))
    }

    /// Exact backward rotation by angle `dt` about (π, π).
    fn exact(p: Vec2<f64>, dt: f64) -> Vec2<f64> {
        let (s, c) = (-dt).sin_cos();
        let (x, y) = (p[0] - PI, p[1] - PI);
        [PI + c * x - s * y, PI + s * x + c * y]
    }

    #[test]
    fn zero_and_constant_velocity() {
        let zero = AnalyticVelocity(|_p: Vec2<f64>, _t: f64| ([0.0, 0.0], [[0.0; 2]; 2]));
        let s = rk4_backward(&zero, [1.0, 2.0], 0.0, 0.3);
        assert_eq!(s.end, [1.0, 2.0]);
        let cst = AnalyticVelocity(|_p: Vec2<f64>, _t: f64| ([1.0, 0.0], [[0.0; 2]; 2]));
        let s = rk4_backward(&cst, [1.0, 2.0], 0.0, 0.1);
        assert!((s.end[0] - 0.9).abs() < 1e-15 && s.end[1] == 2.0);
    }

    #[test]
    fn rotation_fourth_order() {
        let v = rotation();
        let p = [4.0, 2.5];
        let errs: Vec<f64> = [0.4, 0.2, 0.1, 0.05]
            .iter()
            .map(|&dt| {
                let e = rk4_backward(&v, p, 0.0, dt).end;
                let x = exact(p, dt);
                ((e[0] - x[0]).powi(2) + (e[1] - x[1]).powi(2)).sqrt()
            })
            .collect();
        for w in errs.windows(2) {
            // single-step local error is O(dt^5)
            let slope = (w[0] / w[1]).log2();
            assert!((slope - 5.0).abs() < 0.1, "local slope {slope}");
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let v = AnalyticVelocity(|p: Vec2<f64>, t: f64| {
            let c = (t / 4.0).cos();
            (
                [c * p[0].sin() * p[1].cos(), -c * p[0].cos() * p[1].sin()],
                [
                    [c * p[0].cos() * p[1].cos(), -c * p[0].sin() * p[1].sin()],
                    [c * p[0].sin() * p[1].sin(), -c * p[0].cos() * p[1].cos()],
                ],
            )
        });
        let x = [0.7, 1.9];
        let (_, j) = rk4_backward_jac(&v, x, 0.2, 0.45);
        let h = 1e-6;
        for c in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[c] += h;
            xm[c] -= h;
            let ep = rk4_backward(&v, xp, 0.2, 0.45).end;
            let em = rk4_backward(&v, xm, 0.2, 0.45).end;
            for r in 0..2 {
                assert!((j[r][c] - (ep[r] - em[r]) / (2.0 * h)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn rejects_bad_interval() {
        let v = rotation();
        assert!(one_step_map(&v, 1.0, 1.0, &[[0.0, 0.0]]).is_err());
        let nan = AnalyticVelocity(|_p: Vec2<f64>, _t: f64| ([f64::NAN, 0.0], [[0.0; 2]; 2]));
        assert!(one_step_map(&nan, 0.0, 0.1, &[[0.0, 0.0]]).is_err());
    }
}
