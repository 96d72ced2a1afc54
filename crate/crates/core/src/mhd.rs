//! Ideal incompressible 2D MHD in characteristic-map form: vorticity by
//! pullback plus accumulated Lorentz source, magnetic field by 2-form
//! pullback.

use crate::diagnostics::{cross_helicity, energies, linf_norm, squared_potential, TimeSeriesRecord};
use crate::error::{CmmError, Result};
use crate::flow_map::{
    pullback_scalar, pullback_twoform, twoform_with_current, RemapCriteria, SubmapStack, VelocityField, VelocityHistory,
};
use crate::grid::{GridSpec, HermiteField};
use crate::real::{Mat2, Real, Vec2};
use crate::solver::{CmmSolver, Physics, StepReport, TimeStep};
use crate::source::SourceHistory;
use crate::spectral::SpectralWorkspace;

/// Initial vorticity and magnetic field (with its Jacobian).
pub trait MhdInitialData<T: Real>: Sync {
    fn omega0(&self, p: Vec2<T>) -> T;
    fn b0(&self, p: Vec2<T>) -> (Vec2<T>, Mat2<T>);

    /// Whether `B0` vanishes identically.
    fn is_hydro(&self) -> bool {
        false
    }
}

/// `ω0 = 2 (cos 2x + cos 2y)`, `B0 = 2 (-sin 2y, 2 sin x)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OrszagTang;

impl<T: Real> MhdInitialData<T> for OrszagTang {
    #[inline]
    fn omega0(&self, p: Vec2<T>) -> T {
        let two = T::of(2.0);
        two * ((two * p[0]).cos() + (two * p[1]).cos())
    }

    #[inline]
    fn b0(&self, p: Vec2<T>) -> (Vec2<T>, Mat2<T>) {
        let two = T::of(2.0);
        let four = T::of(4.0);
        let (s2y, c2y) = (two * p[1]).sin_cos();
        let (sx, cx) = p[0].sin_cos();
        ([-two * s2y, four * sx], [[T::zero(), -four * c2y], [four * cx, T::zero()]])
    }
}

/// Closure-backed initial data; `b0 = None` gives pure hydrodynamics.
pub struct CustomInitial<W, B> {
    pub omega: W,
    pub b: Option<B>,
}

impl<T, W, B> MhdInitialData<T> for CustomInitial<W, B>
where
    T: Real,
    W: Fn(Vec2<T>) -> T + Sync,
    B: Fn(Vec2<T>) -> (Vec2<T>, Mat2<T>) + Sync,
{
    fn omega0(&self, p: Vec2<T>) -> T {
        (self.omega)(p)
    }

    fn b0(&self, p: Vec2<T>) -> (Vec2<T>, Mat2<T>) {
        match &self.b {
            Some(b) => b(p),
            None => ([T::zero(); 2], [[T::zero(); 2]; 2]),
        }
    }

    fn is_hydro(&self) -> bool {
        self.b.is_none()
    }
}

/// Filter cutoffs as fractions of the map-grid and source-grid Nyquist
/// modes, or as absolute wavenumbers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cutoffs<T> {
    Relative { map: T, source: T },
    Absolute { velocity: T, source: T },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MhdConfig<T> {
    pub n_map: usize,
    pub n_source: usize,
    pub n_velocity: usize,
    pub cutoffs: Cutoffs<T>,
    pub gamma: usize,
    pub remap: Option<RemapCriteria<T>>,
    pub time_step: TimeStep<T>,
    pub t_end: T,
    /// Abort once `max|u|` exceeds this multiple of its initial value.
    pub blowup_factor: T,
}

impl<T: Real> MhdConfig<T> {
    /// Reference parameters: map and source grids 512, velocity grid 1024,
    /// CFL 1, `δ_det = 0.05`, cutoffs 0.9 and 0.1, `γ = 3`.
    pub fn reference() -> Self {
        Self::desk(512)
    }

    /// Reference parameters with the map grid scaled to `n` and the velocity
    /// grid to `2n`.
    pub fn desk(n: usize) -> Self {
        Self {
            n_map: n,
            n_source: n,
            n_velocity: 2 * n,
            cutoffs: Cutoffs::Relative {
                map: T::of(0.9),
                source: T::of(0.1),
            },
            gamma: 3,
            remap: Some(RemapCriteria::default()),
            time_step: TimeStep::Cfl(T::one()),
            t_end: T::one(),
            blowup_factor: T::of(1e3),
        }
    }

    /// Cutoff fractions of the velocity-grid and source-grid Nyquist modes,
    /// clamped to 1.
    pub fn filter_fractions(&self) -> Result<(T, T)> {
        let kv = T::of_usize(self.n_velocity / 2);
        let ka = T::of_usize(self.n_source / 2);
        let (v, s) = match self.cutoffs {
            Cutoffs::Relative { map, source } => (map * T::of_usize(self.n_map / 2) / kv, source),
            Cutoffs::Absolute { velocity, source } => (velocity / kv, source / ka),
        };
        if !(v > T::zero() && s > T::zero()) {
            return Err(CmmError::InvalidArgument(format!("filter cutoffs {v}, {s} must be positive")));
        }
        Ok((v.min(T::one()), s.min(T::one())))
    }
}

pub struct MhdPhysics<T: Real, I> {
    pub init: I,
    pub ws_velocity: SpectralWorkspace<T>,
    pub ws_source: SpectralWorkspace<T>,
    pub cutoff_velocity: T,
    pub cutoff_source: T,
}

impl<T: Real, I: MhdInitialData<T>> MhdPhysics<T, I> {
    /// `ω = ω0 ∘ X + F` on the velocity grid.
    pub fn vorticity(&self, stack: &SubmapStack<T>) -> Vec<T> {
        self.vorticity_on(stack, self.ws_velocity.grid())
    }

    pub fn vorticity_on(&self, stack: &SubmapStack<T>, grid: &GridSpec<T>) -> Vec<T> {
        pullback_scalar(stack, grid, |q| self.init.omega0(q), true)
    }

    /// Unfiltered `B = adj(DX) B0(X)` on `grid`.
    pub fn magnetic(&self, stack: &SubmapStack<T>, grid: &GridSpec<T>) -> (Vec<T>, Vec<T>) {
        pullback_twoform(stack, grid, |q| self.init.b0(q).0)
    }

    /// Filtered, divergence-free `B̃` on the source grid.
    pub fn filtered_magnetic(&self, stack: &SubmapStack<T>) -> Result<(Vec<T>, Vec<T>)> {
        let ws = &self.ws_source;
        let (bx, by) = self.magnetic(stack, ws.grid());
        let (mut sx, mut sy) = ws.forward_pair(&bx, &by)?;
        ws.lowpass_spectrum(&mut sx, self.cutoff_source)?;
        ws.lowpass_spectrum(&mut sy, self.cutoff_source)?;
        ws.leray_project(&mut sx, &mut sy);
        ws.inverse_pair(&sx, &sy)
    }
}

/// `∇·(j B)` with `j = ∂x By - ∂y Bx`.
pub fn lorentz_source<T: Real>(bx: &[T], by: &[T], ws: &SpectralWorkspace<T>) -> Result<Vec<T>> {
    let j = ws.curl2d(bx, by)?;
    let jbx: Vec<T> = j.iter().zip(bx).map(|(a, b)| *a * *b).collect();
    let jby: Vec<T> = j.iter().zip(by).map(|(a, b)| *a * *b).collect();
    ws.div2d(&jbx, &jby)
}

/// `∇ × (J × B)` with `J = j e_z`, the curl of the Lorentz force written out.
pub fn lorentz_source_curl<T: Real>(bx: &[T], by: &[T], ws: &SpectralWorkspace<T>) -> Result<Vec<T>> {
    let j = ws.curl2d(bx, by)?;
    let fx: Vec<T> = j.iter().zip(by).map(|(a, b)| -*a * *b).collect();
    let fy: Vec<T> = j.iter().zip(bx).map(|(a, b)| *a * *b).collect();
    ws.curl2d(&fx, &fy)
}

impl<T: Real, I: MhdInitialData<T>> Physics<T> for MhdPhysics<T, I> {
    fn velocity(&self, stack: &SubmapStack<T>, _t: T) -> Result<VelocityField<T>> {
        let omega = self.vorticity(stack);
        let [ux, uy] = self.ws_velocity.biot_savart_hermite(&omega, self.cutoff_velocity)?;
        VelocityField::new(ux, uy)
    }

    fn source(&self, stack: &SubmapStack<T>, _t: T) -> Result<HermiteField<T>> {
        let ws = &self.ws_source;
        if self.init.is_hydro() {
            return Ok(HermiteField::zeros(*ws.grid()));
        }
        let (bx, by) = self.filtered_magnetic(stack)?;
        ws.hermite_from_values(lorentz_source(&bx, &by, ws)?)
    }
}

/// Fields selectable for windowed evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZoomField {
    Vorticity,
    Current,
    Bx,
    By,
}

impl ZoomField {
    pub fn name(&self) -> &'static str {
        match self {
            ZoomField::Vorticity => "omega",
            ZoomField::Current => "j",
            ZoomField::Bx => "bx",
            ZoomField::By => "by",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "omega" | "vorticity" => Ok(ZoomField::Vorticity),
            "j" | "current" => Ok(ZoomField::Current),
            "bx" => Ok(ZoomField::Bx),
            "by" => Ok(ZoomField::By),
            _ => Err(CmmError::InvalidArgument(format!("unknown field {s:?}"))),
        }
    }
}

/// Window grid of `n × n` points covering `[c - w, c + w)` per axis.
pub fn window_points<T: Real>(center: Vec2<T>, half_width: T, n: usize) -> Result<Vec<Vec2<T>>> {
    if !(half_width > T::zero()) || !half_width.is_finite() || n == 0 {
        return Err(CmmError::InvalidArgument(format!(
            "degenerate window: half width {half_width}, {n} points"
        )));
    }
    let h = T::of(2.0) * half_width / T::of_usize(n);
    let x0 = center[0] - half_width;
    let y0 = center[1] - half_width;
    Ok((0..n * n)
        .map(|k| [x0 + h * T::of_usize(k % n), y0 + h * T::of_usize(k / n)])
        .collect())
}

/// Evaluates `field` by full stack composition at every window point.
pub fn zoom_eval<T: Real, I: MhdInitialData<T>>(
    stack: &SubmapStack<T>,
    init: &I,
    field: ZoomField,
    center: Vec2<T>,
    half_width: T,
    n: usize,
) -> Result<Vec<T>> {
    use rayon::prelude::*;
    let pts = window_points(center, half_width, n)?;
    let b0 = |q: Vec2<T>| init.b0(q);
    Ok(pts
        .par_iter()
        .map(|&p| match field {
            ZoomField::Vorticity => {
                let (q, f) = stack.eval_with_source(p);
                init.omega0(q) + f
            }
            ZoomField::Current => twoform_with_current(stack, p, &b0).1,
            ZoomField::Bx => twoform_with_current(stack, p, &b0).0[0],
            ZoomField::By => twoform_with_current(stack, p, &b0).0[1],
        })
        .collect())
}

/// Fields at the current time on the velocity grid.
#[derive(Clone, Debug)]
pub struct MhdFields<T> {
    pub grid: GridSpec<T>,
    pub omega: Vec<T>,
    pub ux: Vec<T>,
    pub uy: Vec<T>,
    pub bx: Vec<T>,
    pub by: Vec<T>,
    pub j: Vec<T>,
}

/// A running MHD simulation with its diagnostics.
pub struct MhdRun<T: Real, I> {
    pub config: MhdConfig<T>,
    pub solver: CmmSolver<T, MhdPhysics<T, I>>,
    pub records: Vec<TimeSeriesRecord<T>>,
    pub initial_speed: T,
    last_dt: T,
}

impl<T: Real, I: MhdInitialData<T>> MhdRun<T, I> {
    fn physics(config: &MhdConfig<T>, init: I) -> Result<MhdPhysics<T, I>> {
        if config.n_velocity < config.n_map {
            return Err(CmmError::InvalidArgument(format!(
                "velocity grid {} coarser than map grid {}",
                config.n_velocity, config.n_map
            )));
        }
        let (cv, cs) = config.filter_fractions()?;
        Ok(MhdPhysics {
            init,
            ws_velocity: SpectralWorkspace::new(GridSpec::square(config.n_velocity)?),
            ws_source: SpectralWorkspace::new(GridSpec::square(config.n_source)?),
            cutoff_velocity: cv,
            cutoff_source: cs,
        })
    }

    pub fn new(config: MhdConfig<T>, init: I) -> Result<Self> {
        let physics = Self::physics(&config, init)?;
        let gm = GridSpec::square(config.n_map)?;
        let ga = GridSpec::square(config.n_source)?;
        let mut solver = CmmSolver::new(physics, gm, ga, config.gamma, config.remap, T::zero())?;
        let initial_speed = solver.max_speed()?;
        Ok(Self {
            config,
            solver,
            records: Vec::new(),
            initial_speed,
            last_dt: T::zero(),
        })
    }

    /// Continues a checkpointed run.
    pub fn resume(
        config: MhdConfig<T>,
        init: I,
        stack: SubmapStack<T>,
        velocity: VelocityHistory<T>,
        sources: SourceHistory<T>,
        steps: usize,
        initial_speed: T,
    ) -> Result<Self> {
        let physics = Self::physics(&config, init)?;
        if !stack.head_map.grid().same_shape(&GridSpec::square(config.n_map)?)
            || !stack.head_source.field.grid.same_shape(physics.ws_source.grid())
        {
            return Err(CmmError::InvalidArgument("checkpoint grids differ from the configuration".into()));
        }
        let solver = CmmSolver::restore(physics, stack, velocity, sources, config.remap, steps)?;
        Ok(Self {
            config,
            solver,
            records: Vec::new(),
            initial_speed,
            last_dt: T::zero(),
        })
    }

    pub fn t(&self) -> T {
        self.solver.t()
    }

    pub fn stack(&self) -> &SubmapStack<T> {
        &self.solver.stack
    }

    pub fn init(&self) -> &I {
        &self.solver.physics.init
    }

    pub fn velocity_grid(&self) -> GridSpec<T> {
        *self.solver.physics.ws_velocity.grid()
    }

    /// Fields on the velocity grid: `u` from the current snapshot, `B`
    /// unfiltered, `j` by spectral curl of `B`.
    pub fn fields(&mut self) -> Result<MhdFields<T>> {
        let u = self.solver.current_velocity()?.clone();
        let ph = &self.solver.physics;
        let grid = *ph.ws_velocity.grid();
        let omega = ph.vorticity(&self.solver.stack);
        let (bx, by) = ph.magnetic(&self.solver.stack, &grid);
        let j = ph.ws_velocity.curl2d(&bx, &by)?;
        Ok(MhdFields {
            grid,
            omega,
            ux: u.ux.f,
            uy: u.uy.f,
            bx,
            by,
            j,
        })
    }

    pub fn record(&mut self) -> Result<TimeSeriesRecord<T>> {
        let f = self.fields()?;
        let ws = &self.solver.physics.ws_velocity;
        let e = energies(&f.ux, &f.uy, &f.bx, &f.by)?;
        let speed = f
            .ux
            .iter()
            .zip(&f.uy)
            .fold(T::zero(), |m, (a, b)| m.max((*a * *a + *b * *b).sqrt()));
        Ok(TimeSeriesRecord {
            t: self.t(),
            e_kin: e.kinetic,
            e_pot: e.potential,
            e_tot: e.total,
            h_c: cross_helicity(&f.ux, &f.uy, &f.bx, &f.by)?,
            a_sq: squared_potential(&f.bx, &f.by, ws)?,
            max_u: speed,
            max_j: linf_norm(&f.j),
            n_submaps: self.solver.stack.n_submaps(),
            dt: self.last_dt,
        })
    }

    /// Advances to `t_end`, calling `on_step` after each step and storing a
    /// diagnostics record every `record_every` steps (0 disables).
    pub fn run_to<F>(&mut self, t_end: T, record_every: usize, mut on_step: F) -> Result<()>
    where
        F: FnMut(&mut Self, &StepReport<T>) -> Result<()>,
    {
        if record_every > 0 && self.records.is_empty() {
            let r = self.record()?;
            self.records.push(r);
        }
        let limit = self.config.blowup_factor * self.initial_speed;
        let ts = self.config.time_step;
        while self.t() < t_end {
            let t1 = self.solver.next_time(t_end, ts)?;
            let r = self.solver.step_to(t1)?;
            self.last_dt = r.t1 - r.t0;
            if !(r.max_speed <= limit) {
                return Err(CmmError::BlowUp {
                    max_u: r.max_speed.as_f64(),
                    limit: limit.as_f64(),
                    t: r.t0.as_f64(),
                });
            }
            if record_every > 0 && self.solver.steps % record_every == 0 {
                let rec = self.record()?;
                self.records.push(rec);
            }
            on_step(self, &r)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ot_initial_fields() {
        let init = OrszagTang;
        let p = [0.3, 1.1];
        let (b, db) = <OrszagTang as MhdInitialData<f64>>::b0(&init, p);
        assert!((b[0] + 2.0 * (2.2f64).sin()).abs() < 1e-15);
        assert!((b[1] - 4.0 * (0.3f64).sin()).abs() < 1e-15);
        // j0 = 4 cos x + 4 cos 2y
        assert!((db[1][0] - db[0][1] - (4.0 * 0.3f64.cos() + 4.0 * 2.2f64.cos())).abs() < 1e-14);
    }

    #[test]
    fn dual_lorentz_formulas_agree() {
        let g = GridSpec::<f64>::square(64).unwrap();
        let ws = SpectralWorkspace::new(g);
        let shear_x = g.par_map_nodes(|p| -p[1].sin());
        let zero = vec![0.0; g.len()];
        let f = lorentz_source(&shear_x, &zero, &ws).unwrap();
        assert!(linf_norm(&f) < 1e-12);
        let bx = g.par_map_nodes(|p| -2.0 * (2.0 * p[1]).sin());
        let by = g.par_map_nodes(|p| 4.0 * p[0].sin());
        let a = lorentz_source(&bx, &by, &ws).unwrap();
        let b = lorentz_source_curl(&bx, &by, &ws).unwrap();
        assert!(crate::diagnostics::linf_error(&a, &b).unwrap() < 1e-10);
        assert!(linf_norm(&a) > 1.0);
    }

    #[test]
    fn window_checks() {
        assert!(window_points([0.0, 0.0], 0.0f64, 8).is_err());
        let w = window_points([std::f64::consts::PI; 2], std::f64::consts::PI, 4).unwrap();
        assert_eq!(w[0], [0.0, 0.0]);
        assert!((w[5][0] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }
}
