//! Convergence sweeps: the swirl against its manufactured solution, and
//! Orszag–Tang against a fine self-reference.

use crate::diagnostics::{eoc, linf_error, linf_norm};
use crate::error::Result;
use crate::grid::GridSpec;
use crate::mhd::{Cutoffs, MhdConfig, MhdRun, OrszagTang};
use crate::real::Real;
use crate::solver::TimeStep;
use crate::swirl::{run_swirl, SwirlConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow<T> {
    pub n: usize,
    pub dt: T,
    /// One error per measured quantity.
    pub errors: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep<T> {
    pub quantities: Vec<&'static str>,
    pub rows: Vec<SweepRow<T>>,
}

impl<T: Real> Sweep<T> {
    /// Orders between consecutive rows, one vector per quantity.
    pub fn orders(&self) -> Result<Vec<Vec<T>>> {
        (0..self.quantities.len())
            .map(|q| eoc(&self.rows.iter().map(|r| r.errors[q]).collect::<Vec<_>>()))
            .collect()
    }

    /// Plain-text table with one EOC column per quantity.
    pub fn table(&self) -> Result<String> {
        let orders = self.orders()?;
        let mut s = format!("{:>6} {:>12}", "N", "dt");
        for q in &self.quantities {
            s += &format!(" {:>12} {:>6}", format!("err_{q}"), "eoc");
        }
        s.push('\n');
        for (i, r) in self.rows.iter().enumerate() {
            s += &format!("{:>6} {:>12.6e}", r.n, r.dt.as_f64());
            for (q, e) in r.errors.iter().enumerate() {
                let o = if i == 0 { "-".to_string() } else { format!("{:.2}", orders[q][i - 1].as_f64()) };
                s += &format!(" {:>12.4e} {o:>6}", e.as_f64());
            }
            s.push('\n');
        }
        Ok(s)
    }

    /// Rows as numbers for CSV output: `n, dt, errors...`.
    pub fn numeric_rows(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| {
                let mut v = vec![r.n as f64, r.dt.as_f64()];
                v.extend(r.errors.iter().map(|e| e.as_f64()));
                v
            })
            .collect()
    }
}

/// Swirl errors for each `(n, dt)` against the exact solution.
pub fn swirl_sweep<T: Real>(cases: &[(usize, T)], base: &SwirlConfig<T>) -> Result<Sweep<T>> {
    let rows = cases
        .iter()
        .map(|&(n, dt)| {
            let cfg = SwirlConfig {
                n_map: n,
                n_source: n,
                dt,
                ..base.clone()
            };
            Ok(SweepRow {
                n,
                dt,
                errors: vec![run_swirl(&cfg)?.linf_error],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sweep {
        quantities: vec!["theta"],
        rows,
    })
}

/// Map displacement, vorticity and magnetic field on a common grid.
#[derive(Clone, Debug)]
pub struct OtSample<T> {
    pub disp: [Vec<T>; 2],
    pub omega: Vec<T>,
    pub b: [Vec<T>; 2],
}

/// Orszag–Tang setup for the convergence study: remapping off, fixed
/// step, velocity grid `2n`, and filter cutoffs fixed in absolute
/// wavenumber to those of the reference run (clamped on coarse grids).
pub fn ot_study_config<T: Real>(n: usize, dt: T, t_end: T, n_reference: usize) -> MhdConfig<T> {
    let k_ref = T::of_usize(n_reference / 2);
    MhdConfig {
        cutoffs: Cutoffs::Absolute {
            velocity: T::of(0.9) * k_ref,
            source: T::of(0.1) * k_ref,
        },
        remap: None,
        time_step: TimeStep::Fixed(dt),
        t_end,
        ..MhdConfig::desk(n)
    }
}

/// Runs Orszag–Tang to `cfg.t_end` and samples the state on `eval`.
pub fn ot_sample<T: Real>(cfg: MhdConfig<T>, eval: &GridSpec<T>) -> Result<OtSample<T>> {
    let t_end = cfg.t_end;
    let mut run = MhdRun::new(cfg, OrszagTang)?;
    run.run_to(t_end, 0, |_, _| Ok(()))?;
    let stack = run.stack();
    let disp: Vec<[T; 2]> = eval.par_map_nodes(|p| {
        let q = stack.compose_eval(p);
        [q[0] - p[0], q[1] - p[1]]
    });
    let ph = &run.solver.physics;
    let omega = ph.vorticity_on(stack, eval);
    let (bx, by) = ph.magnetic(stack, eval);
    Ok(OtSample {
        disp: [disp.iter().map(|d| d[0]).collect(), disp.iter().map(|d| d[1]).collect()],
        omega,
        b: [bx, by],
    })
}

/// Relative `L∞` errors `(ΔX, Δω, ΔB)` of `s` against `reference`.
pub fn ot_errors<T: Real>(s: &OtSample<T>, reference: &OtSample<T>) -> Result<Vec<T>> {
    let rel2 = |a: &[Vec<T>; 2], b: &[Vec<T>; 2]| -> Result<T> {
        let e = linf_error(&a[0], &b[0])?.max(linf_error(&a[1], &b[1])?);
        Ok(e / linf_norm(&b[0]).max(linf_norm(&b[1])))
    };
    Ok(vec![
        rel2(&s.disp, &reference.disp)?,
        linf_error(&s.omega, &reference.omega)? / linf_norm(&reference.omega),
        rel2(&s.b, &reference.b)?,
    ])
}

/// Orszag–Tang errors for each `(n, dt)` against a reference run at
/// `(n_ref, dt_ref)`, all sampled on `eval`.
pub fn ot_sweep<T: Real>(
    cases: &[(usize, T)],
    n_ref: usize,
    dt_ref: T,
    t_end: T,
    eval: &GridSpec<T>,
) -> Result<Sweep<T>> {
    let reference = ot_sample(ot_study_config(n_ref, dt_ref, t_end, n_ref), eval)?;
    ot_sweep_against(cases, &reference, n_ref, t_end, eval)
}

/// As [`ot_sweep`] with a precomputed reference sample.
pub fn ot_sweep_against<T: Real>(
    cases: &[(usize, T)],
    reference: &OtSample<T>,
    n_ref: usize,
    t_end: T,
    eval: &GridSpec<T>,
) -> Result<Sweep<T>> {
    let rows = cases
        .iter()
        .map(|&(n, dt)| {
            let s = ot_sample(ot_study_config(n, dt, t_end, n_ref), eval)?;
            Ok(SweepRow {
                n,
                dt,
                errors: ot_errors(&s, reference)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sweep {
        quantities: vec!["X", "omega", "B"],
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_layout() {
        let s = Sweep {
            quantities: vec!["a"],
            rows: vec![
                SweepRow { n: 8, dt: 0.1f64, errors: vec![8e-3] },
                SweepRow { n: 16, dt: 0.1, errors: vec![1e-3] },
            ],
        };
        assert_eq!(s.orders().unwrap(), vec![vec![3.0]]);
        let t = s.table().unwrap();
        assert!(t.lines().nth(2).unwrap().trim_end().ends_with("3.00"), "{t}");
        assert_eq!(s.numeric_rows()[1], vec![16.0, 0.1, 1e-3]);
    }
}
