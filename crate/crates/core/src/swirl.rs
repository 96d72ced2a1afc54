//! Manufactured swirl problem: linear advection with a prescribed
//! divergence-free velocity and an analytic source.

use crate::diagnostics::linf_error;
use crate::error::{CmmError, Result};
use crate::flow_map::{pullback_scalar, RemapCriteria, SubmapStack, VelocityField};
use crate::grid::{GridSpec, HermiteField};
use crate::real::{Mat2, Real, Vec2};
use crate::solver::{CmmSolver, Physics, TimeStep};
use crate::spectral::SpectralWorkspace;

/// Swirl velocity `cos(t/4) (sin²(x/2) sin y, -sin x sin²(y/2))` and the
/// manufactured solution `exp(-(cos y - cos x)² / ((t - 0.5)² + ε))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwirlProblem<T> {
    pub eps: T,
}

impl<T: Real> Default for SwirlProblem<T> {
    fn default() -> Self {
        Self { eps: T::of(0.1) }
    }
}

impl<T: Real> SwirlProblem<T> {
    pub fn new(eps: T) -> Result<Self> {
        if !(eps > T::zero()) || !eps.is_finite() {
            return Err(CmmError::InvalidArgument(format!("swirl width {eps} must be positive")));
        }
        Ok(Self { eps })
    }

    #[inline]
    pub fn velocity(&self, p: Vec2<T>, t: T) -> Vec2<T> {
        self.velocity_jac(p, t).0
    }

    #[inline]
    pub fn velocity_jac(&self, p: Vec2<T>, t: T) -> (Vec2<T>, Mat2<T>) {
        let d = self.velocity_data(p, t);
        ([d[0][0], d[1][0]], [[d[0][1], d[0][2]], [d[1][1], d[1][2]]])
    }

    /// `(u, ∂x u, ∂y u, ∂x∂y u)` for both components.
    pub fn velocity_data(&self, p: Vec2<T>, t: T) -> [[T; 4]; 2] {
        let c = (t / T::of(4.0)).cos();
        let h = T::of(0.5);
        let (sx, cx) = p[0].sin_cos();
        let (sy, cy) = p[1].sin_cos();
        let sx2 = (p[0] * h).sin().powi(2);
        let sy2 = (p[1] * h).sin().powi(2);
        [
            [c * sx2 * sy, c * h * sx * sy, c * sx2 * cy, c * h * sx * cy],
            [-c * sx * sy2, -c * cx * sy2, -c * h * sx * sy, -c * h * cx * sy],
        ]
    }

    #[inline]
    fn width(&self, t: T) -> T {
        let d = t - T::of(0.5);
        d * d + self.eps
    }

    #[inline]
    pub fn reference(&self, p: Vec2<T>, t: T) -> T {
        let d = p[1].cos() - p[0].cos();
        (-d * d / self.width(t)).exp()
    }

    /// `f = ∂t θ + u · ∇θ` for the manufactured `θ`.
    #[inline]
    pub fn source(&self, p: Vec2<T>, t: T) -> T {
        let s = self.width(t);
        let d = p[1].cos() - p[0].cos();
        let theta = (-d * d / s).exp();
        let two = T::of(2.0);
        let dt = theta * d * d * two * (t - T::of(0.5)) / (s * s);
        let dx = -theta * two * d * p[0].sin() / s;
        let dy = theta * two * d * p[1].sin() / s;
        let u = self.velocity(p, t);
        dt + u[0] * dx + u[1] * dy
    }
}

/// Samples the swirl velocity on its own grid and the source on grid A.
pub struct SwirlPhysics<T: Real> {
    pub problem: SwirlProblem<T>,
    pub velocity_grid: GridSpec<T>,
    pub with_source: bool,
    ws_source: SpectralWorkspace<T>,
}

impl<T: Real> SwirlPhysics<T> {
    pub fn new(problem: SwirlProblem<T>, velocity_grid: GridSpec<T>, source_grid: GridSpec<T>, with_source: bool) -> Self {
        Self {
            problem,
            velocity_grid,
            with_source,
            ws_source: SpectralWorkspace::new(source_grid),
        }
    }
}

impl<T: Real> Physics<T> for SwirlPhysics<T> {
    fn velocity(&self, _stack: &SubmapStack<T>, t: T) -> Result<VelocityField<T>> {
        let pr = self.problem;
        let g = self.velocity_grid;
        let data = g.par_map_nodes(|p| pr.velocity_data(p, t));
        let mut u = VelocityField::zeros(g);
        for (k, [a, b]) in data.into_iter().enumerate() {
            (u.ux.f[k], u.ux.fx[k], u.ux.fy[k], u.ux.fxy[k]) = (a[0], a[1], a[2], a[3]);
            (u.uy.f[k], u.uy.fx[k], u.uy.fy[k], u.uy.fxy[k]) = (b[0], b[1], b[2], b[3]);
        }
        Ok(u)
    }

    fn source(&self, _stack: &SubmapStack<T>, t: T) -> Result<HermiteField<T>> {
        let g = *self.ws_source.grid();
        if !self.with_source {
            return Ok(HermiteField::zeros(g));
        }
        let pr = self.problem;
        self.ws_source.hermite_from_values(g.par_map_nodes(|p| pr.source(p, t)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwirlConfig<T> {
    pub n_map: usize,
    pub n_source: usize,
    pub n_velocity: usize,
    pub n_eval: usize,
    pub dt: T,
    pub t_end: T,
    pub eps: T,
    pub gamma: usize,
    pub remap: Option<RemapCriteria<T>>,
    /// Forced remaps at multiples of this interval.
    pub remap_every: Option<T>,
    pub with_source: bool,
}

impl<T: Real> SwirlConfig<T> {
    /// Convergence-study setup: map and source on `n`, velocity and
    /// evaluation grids at 512, remapping off, `T = 1`.
    pub fn study(n: usize, dt: T) -> Self {
        Self {
            n_map: n,
            n_source: n,
            n_velocity: 512,
            n_eval: 512,
            dt,
            t_end: T::one(),
            eps: T::of(0.1),
            gamma: 3,
            remap: None,
            remap_every: None,
            with_source: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SwirlResult<T: Real> {
    pub linf_error: T,
    pub steps: usize,
    pub n_remaps: usize,
    pub eval_grid: GridSpec<T>,
    /// `θ0 ∘ X + F` on the evaluation grid at `t_end`.
    pub theta: Vec<T>,
    pub stack: SubmapStack<T>,
}

/// Evolves the map and accumulated source to `t_end` and measures the
/// `L∞` error against the manufactured solution.
pub fn run_swirl<T: Real>(cfg: &SwirlConfig<T>) -> Result<SwirlResult<T>> {
    let problem = SwirlProblem::new(cfg.eps)?;
    if !(cfg.t_end >= T::zero()) {
        return Err(CmmError::InvalidArgument(format!("end time {} must be nonnegative", cfg.t_end)));
    }
    let gm = GridSpec::square(cfg.n_map)?;
    let ga = GridSpec::square(cfg.n_source)?;
    let gv = GridSpec::square(cfg.n_velocity)?;
    let ge = GridSpec::square(cfg.n_eval)?;
    let physics = SwirlPhysics::new(problem, gv, ga, cfg.with_source);
    let mut solver = CmmSolver::new(physics, gm, ga, cfg.gamma, cfg.remap, T::zero())?;
    if cfg.t_end > T::zero() {
        match cfg.remap_every {
            None => solver.integrate(cfg.t_end, TimeStep::Fixed(cfg.dt), |_, _| Ok(()))?,
            Some(every) => {
                if !(every > T::zero()) {
                    return Err(CmmError::InvalidArgument(format!("remap interval {every} must be positive")));
                }
                let mut k = 1usize;
                loop {
                    let stop = (every * T::of_usize(k)).min(cfg.t_end);
                    solver.integrate(stop, TimeStep::Fixed(cfg.dt), |_, _| Ok(()))?;
                    if stop >= cfg.t_end {
                        break;
                    }
                    solver.force_remap();
                    k += 1;
                }
            }
        }
    }
    let stack = solver.stack;
    let theta = pullback_scalar(&stack, &ge, |q| problem.reference(q, T::zero()), true);
    let exact = ge.par_map_nodes(|p| problem.reference(p, cfg.t_end));
    Ok(SwirlResult {
        linf_error: linf_error(&theta, &exact)?,
        steps: solver.steps,
        n_remaps: stack.n_remaps(),
        eval_grid: ge,
        theta,
        stack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn velocity_values() {
        let s = SwirlProblem::<f64>::default();
        assert_eq!(s.velocity([0.0, 0.0], 0.7), [0.0, 0.0]);
        let u = s.velocity([std::f64::consts::PI, std::f64::consts::FRAC_PI_2], 0.0);
        assert!((u[0] - 1.0).abs() < 1e-15 && u[1].abs() < 1e-15);
    }

    #[test]
    fn reference_values() {
        let s = SwirlProblem::<f64>::default();
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(s.reference([1.2, 1.2], t), 1.0);
        }
        let v = s.reference([std::f64::consts::PI, 0.0], 0.5);
        assert!((v / (-40.0f64).exp() - 1.0).abs() < 1e-12);
        assert!(SwirlProblem::new(0.0).is_err());
    }

    #[test]
    fn zero_time_run_is_exact() {
        let mut c = SwirlConfig::<f64>::study(16, 0.1);
        c.t_end = 0.0;
        c.n_velocity = 16;
        c.n_eval = 32;
        let r = run_swirl(&c).unwrap();
        assert_eq!(r.linf_error, 0.0);
        assert_eq!(r.steps, 0);
    }
}
