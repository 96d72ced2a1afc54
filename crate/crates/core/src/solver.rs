//! Generic CMM time stepper: snapshots, extrapolation, map and source
//! advance, remapping.

use crate::error::{CmmError, Result};
use crate::flow_map::{
    advance_map, check_remap, one_step_map, stage_times, CharMap, RemapCheck, RemapCriteria, SubmapStack,
    VelocityField, VelocityHistory,
};
use crate::grid::{GridSpec, HermiteField};
use crate::real::Real;
use crate::source::{advance_source, SourceField, SourceHistory};
use crate::spectral::SpectralWorkspace;

/// Problem-specific feedback: velocity and source snapshots as functions
/// of the current map stack.
pub trait Physics<T: Real>: Sync {
    fn velocity(&self, stack: &SubmapStack<T>, t: T) -> Result<VelocityField<T>>;

    /// Source snapshot on the source grid; all zeros when inert.
    fn source(&self, stack: &SubmapStack<T>, t: T) -> Result<HermiteField<T>>;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeStep<T> {
    Fixed(T),
    /// `Δt = cfl · h / max|u|` with `h` the velocity grid spacing.
    Cfl(T),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport<T> {
    pub t0: T,
    pub t1: T,
    /// Grid maximum of `|u|` at `t0`.
    pub max_speed: T,
    pub check: Option<RemapCheck<T>>,
    pub remapped: bool,
}

pub struct CmmSolver<T: Real, P> {
    pub physics: P,
    pub stack: SubmapStack<T>,
    pub velocity: VelocityHistory<T>,
    pub sources: SourceHistory<T>,
    pub remap: Option<RemapCriteria<T>>,
    pub steps: usize,
    ws_source: SpectralWorkspace<T>,
}

impl<T: Real, P: Physics<T>> CmmSolver<T, P> {
    pub fn new(
        physics: P,
        map_grid: GridSpec<T>,
        source_grid: GridSpec<T>,
        gamma: usize,
        remap: Option<RemapCriteria<T>>,
        t0: T,
    ) -> Result<Self> {
        Ok(Self {
            physics,
            stack: SubmapStack::new(map_grid, source_grid, t0),
            velocity: VelocityHistory::new(gamma)?,
            sources: SourceHistory::new(gamma)?,
            remap,
            steps: 0,
            ws_source: SpectralWorkspace::new(source_grid),
        })
    }

    /// Rebuilds a solver from a checkpointed stack and histories.
    pub fn restore(
        physics: P,
        stack: SubmapStack<T>,
        velocity: VelocityHistory<T>,
        sources: SourceHistory<T>,
        remap: Option<RemapCriteria<T>>,
        steps: usize,
    ) -> Result<Self> {
        stack.validate()?;
        let t = stack.t();
        for newest in [velocity.newest_time(), sources.newest_time()].into_iter().flatten() {
            if newest > t {
                return Err(CmmError::InvalidArgument(format!("snapshot at {newest} after state time {t}")));
            }
        }
        let ws_source = SpectralWorkspace::new(stack.head_source.field.grid);
        Ok(Self {
            physics,
            stack,
            velocity,
            sources,
            remap,
            steps,
            ws_source,
        })
    }

    pub fn t(&self) -> T {
        self.stack.t()
    }

    pub fn source_workspace(&self) -> &SpectralWorkspace<T> {
        &self.ws_source
    }

    /// Computes and stores the snapshots at the current time if missing.
    pub fn ensure_snapshots(&mut self) -> Result<()> {
        let t = self.t();
        if self.velocity.newest_time() != Some(t) {
            let u = self.physics.velocity(&self.stack, t)?;
            self.velocity.push(t, u)?;
        }
        if self.sources.newest_time() != Some(t) {
            let f = self.physics.source(&self.stack, t)?;
            self.sources.push(t, f)?;
        }
        Ok(())
    }

    /// Newest velocity snapshot at the current time.
    pub fn current_velocity(&mut self) -> Result<&VelocityField<T>> {
        self.ensure_snapshots()?;
        Ok(&self.velocity.newest().expect("snapshot just ensured").1)
    }

    pub fn max_speed(&mut self) -> Result<T> {
        Ok(self.current_velocity()?.max_speed())
    }

    /// Freezes the head map and source now.
    pub fn force_remap(&mut self) {
        self.stack.freeze();
    }

    fn advance_pair(&self, t0: T, t1: T) -> Result<(CharMap<T>, SourceField<T>)> {
        let ts = stage_times(t0, t1);
        let src_grid = self.stack.head_source.field.grid;
        let map_grid = *self.stack.head_map.grid();
        // each map node samples the velocity about twenty times per step
        let vel_len = self.velocity.newest().map_or(0, |e| e.1.ux.grid.len());
        let vel = self.velocity.stages_with(&ts, map_grid.len() * 8 >= vel_len)?;
        let inert = self.stack.head_source.field.is_zero() && self.sources.entries().all(|e| e.1.is_zero());
        let reuse = !inert && src_grid.same_shape(self.stack.head_map.grid());
        let (map, stages) = advance_map(&self.stack.head_map, &vel, t0, t1, reuse)?;
        let source = if inert {
            let mut s = SourceField::zero(src_grid, self.stack.head_source.t_start);
            s.t_end = t1;
            s
        } else {
            let steps = match stages {
                Some(s) => s,
                None => {
                    let nodes: Vec<_> = (0..src_grid.len()).map(|k| src_grid.node_at(k)).collect();
                    one_step_map(&vel, t0, t1, &nodes)?
                }
            };
            let sst = self.sources.stages(&ts)?;
            advance_source(&self.stack.head_source, &steps, &vel, &sst, t0, t1)?
        };
        Ok((map, source))
    }

    /// Advances from the current time to `t1`.
    ///
    /// While fewer than `γ` snapshots exist the step is taken twice: a
    /// predictor with the available extrapolation order supplies
    /// provisional snapshots at `t1`, and the corrector interpolates
    /// through them.
    pub fn step_to(&mut self, t1: T) -> Result<StepReport<T>> {
        let t0 = self.t();
        if !(t1 > t0) {
            return Err(CmmError::InvalidArgument(format!("step target {t1} not after {t0}")));
        }
        self.ensure_snapshots()?;
        let max_speed = self.velocity.newest().expect("ensured").1.max_speed();
        let (mut map, mut source) = self.advance_pair(t0, t1)?;
        if !self.velocity.is_full() {
            let old_map = std::mem::replace(&mut self.stack.head_map, map);
            let old_source = std::mem::replace(&mut self.stack.head_source, source);
            let u = self.physics.velocity(&self.stack, t1);
            let f = self.physics.source(&self.stack, t1);
            self.stack.head_map = old_map;
            self.stack.head_source = old_source;
            self.velocity.push_provisional(t1, u?)?;
            self.sources.push_provisional(t1, f?)?;
            let corrected = self.advance_pair(t0, t1);
            self.velocity.pop_newest();
            self.sources.pop_newest();
            (map, source) = corrected?;
        }
        self.stack.head_map = map;
        self.stack.head_source = source;
        self.steps += 1;

        let check = match &self.remap {
            Some(c) => Some(check_remap(&self.stack.head_map, &self.stack.head_source, c, &self.ws_source)?),
            None => None,
        };
        let remapped = check.is_some_and(|c| c.fire);
        if remapped {
            self.stack.freeze();
        }
        Ok(StepReport {
            t0,
            t1,
            max_speed,
            check,
            remapped,
        })
    }

    /// Target time of the next step towards `t_end`. Fixed steps land on
    /// integer multiples of `Δt`; a step that would end within `10⁻⁶ Δt`
    /// of `t_end`, or beyond it, is stretched or shortened to hit `t_end`.
    pub fn next_time(&mut self, t_end: T, ts: TimeStep<T>) -> Result<T> {
        let t = self.t();
        let dt = match ts {
            TimeStep::Fixed(dt) => {
                if !(dt > T::zero()) {
                    return Err(CmmError::InvalidArgument(format!("time step {dt} must be positive")));
                }
                dt
            }
            TimeStep::Cfl(cfl) => {
                if !(cfl > T::zero()) {
                    return Err(CmmError::InvalidArgument(format!("CFL number {cfl} must be positive")));
                }
                let u = self.current_velocity()?;
                let h = u.ux.grid.hx().min(u.ux.grid.hy());
                let speed = u.max_speed();
                if !(speed > T::zero()) {
                    return Err(CmmError::InvalidArgument(
                        "CFL step undefined for a vanishing velocity".into(),
                    ));
                }
                cfl * h / speed
            }
        };
        let mut t1 = t + dt;
        if let TimeStep::Fixed(_) = ts {
            let k = (t / dt).round();
            if (t - k * dt).abs() <= T::of(1e-9) * dt {
                t1 = (k + T::one()) * dt;
            }
        }
        if t1 >= t_end - dt * T::of(1e-6) {
            t1 = t_end;
        }
        Ok(t1)
    }

    /// Integrates to `t_end`, calling `on_step` after every step.
    pub fn integrate<F>(&mut self, t_end: T, ts: TimeStep<T>, mut on_step: F) -> Result<()>
    where
        F: FnMut(&mut Self, &StepReport<T>) -> Result<()>,
    {
        while self.t() < t_end {
            let t1 = self.next_time(t_end, ts)?;
            let report = self.step_to(t1)?;
            on_step(self, &report)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Frozen {
        u: VelocityField<f64>,
        f: HermiteField<f64>,
    }

    impl Physics<f64> for Frozen {
        fn velocity(&self, _s: &SubmapStack<f64>, _t: f64) -> Result<VelocityField<f64>> {
            Ok(self.u.clone())
        }
        fn source(&self, _s: &SubmapStack<f64>, _t: f64) -> Result<HermiteField<f64>> {
            Ok(self.f.clone())
        }
    }

    fn frozen(g: GridSpec<f64>, speed: f64, c: f64) -> Frozen {
        let ux = HermiteField::project(g, |_x: f64, _y: f64| [speed, 0.0, 0.0, 0.0]);
        let f = HermiteField::project(g, |_x: f64, _y: f64| [c, 0.0, 0.0, 0.0]);
        Frozen {
            u: VelocityField::new(ux, HermiteField::zeros(g)).unwrap(),
            f,
        }
    }

    #[test]
    fn still_state_is_unchanged() {
        let g = GridSpec::<f64>::square(8).unwrap();
        let mut s = CmmSolver::new(frozen(g, 0.0, 0.0), g, g, 3, Some(RemapCriteria::default()), 0.0).unwrap();
        s.integrate(0.5, TimeStep::Fixed(0.1), |_, _| Ok(())).unwrap();
        assert_eq!(s.steps, 5);
        assert_eq!(s.t(), 0.5);
        assert!(s.stack.head_map.is_identity());
        assert!(s.stack.head_source.field.is_zero());
        assert_eq!(s.stack.n_remaps(), 0);
    }

    #[test]
    fn constant_source_with_forced_remap() {
        let g = GridSpec::<f64>::square(8).unwrap();
        let mut s = CmmSolver::new(frozen(g, 0.0, 2.0), g, g, 3, None, 0.0).unwrap();
        s.integrate(0.5, TimeStep::Fixed(0.05), |_, _| Ok(())).unwrap();
        s.force_remap();
        s.integrate(1.0, TimeStep::Fixed(0.05), |_, _| Ok(())).unwrap();
        assert_eq!(s.stack.remap_times(), vec![0.5]);
        s.stack.validate().unwrap();
        for k in [0, 13, 40] {
            let p = g.node_at(k);
            assert!((s.stack.total_source_eval(p) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cfl_step_size() {
        let g = GridSpec::<f64>::square(16).unwrap();
        let mut s = CmmSolver::new(frozen(g, 2.0, 0.0), g, g, 3, None, 0.0).unwrap();
        let mut dts = Vec::new();
        s.integrate(0.5, TimeStep::Cfl(1.0), |_, r| {
            dts.push(r.t1 - r.t0);
            Ok(())
        })
        .unwrap();
        let h = g.hx();
        assert!((dts[0] - h / 2.0).abs() < 1e-15);
        assert_eq!(s.t(), 0.5);
        // uniform shift by -u t
        let d = s.stack.compose_eval([1.0, 1.0]);
        assert!((d[0] - 0.0).abs() < 1e-12 && (d[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn remap_fires_on_compressive_map() {
        let g = GridSpec::<f64>::square(16).unwrap();
        let ux = HermiteField::project(g, |x: f64, _y: f64| [x.sin(), x.cos(), 0.0, 0.0]);
        let phys = Frozen {
            u: VelocityField::new(ux, HermiteField::zeros(g)).unwrap(),
            f: HermiteField::zeros(g),
        };
        let mut s = CmmSolver::new(phys, g, g, 3, Some(RemapCriteria::default()), 0.0).unwrap();
        s.integrate(0.2, TimeStep::Fixed(0.01), |_, _| Ok(())).unwrap();
        assert!(s.stack.n_remaps() >= 1);
        assert!(s.stack.head_map.det_deviation() <= 0.05 + 0.02);
        s.stack.validate().unwrap();
    }
}
