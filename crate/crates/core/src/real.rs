//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Floating point scalar the solver is generic over: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Default + Display + Debug + Sum + 'static
{
    /// Converts an `f64` literal. Never fails for the supported types.
    #[inline(always)]
    fn of(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 literal representable")
    }

    #[inline(always)]
    fn of_usize(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize representable")
    }

    #[inline(always)]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("finite conversion to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// 2-vector in the plane.
pub type Vec2<T> = [T; 2];

/// Row-major 2x2 matrix, `m[i][j] = d(out_i)/d(in_j)`.
pub type Mat2<T> = [[T; 2]; 2];

/// Second derivatives of a 2-vector valued map, `h[i][a][b] = d²(out_i)/d(in_a)d(in_b)`.
pub type Hess2<T> = [[[T; 2]; 2]; 2];

#[inline]
pub fn mat_mul<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

#[inline]
pub fn mat_vec<T: Real>(a: &Mat2<T>, v: &Vec2<T>) -> Vec2<T> {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}

#[inline]
pub fn det<T: Real>(a: &Mat2<T>) -> T {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// Adjugate of a 2x2 matrix: `[[d, -b], [-c, a]]`.
#[inline]
pub fn adjugate<T: Real>(a: &Mat2<T>) -> Mat2<T> {
    [[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]]
}

#[inline]
pub fn identity<T: Real>() -> Mat2<T> {
    [[T::one(), T::zero()], [T::zero(), T::one()]]
}

#[inline]
pub fn zero_hess<T: Real>() -> Hess2<T> {
    [[[T::zero(); 2]; 2]; 2]
}

/// Second-order chain rule for `G ∘ H` given the derivatives of `G` at `H(x)`
/// and of `H` at `x`.
#[inline]
pub fn compose_hess<T: Real>(
    dg: &Mat2<T>,
    hg: &Hess2<T>,
    dh: &Mat2<T>,
    hh: &Hess2<T>,
) -> Hess2<T> {
    let mut out = zero_hess::<T>();
    for i in 0..2 {
        for a in 0..2 {
            for b in a..2 {
                let mut s = T::zero();
                for c in 0..2 {
                    for d in 0..2 {
                        s = s + hg[i][c][d] * dh[c][a] * dh[d][b];
                    }
                    s = s + dg[i][c] * hh[c][a][b];
                }
                out[i][a][b] = s;
                out[i][b][a] = s;
            }
        }
    }
    out
}
