//! Acceptance criteria for the solver. [`run_all`] evaluates them in
//! sequence and prints one `PASS`/`FAIL` line per criterion.

use std::cell::Cell;
use std::f64::consts::PI;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use cmm::convergence::{ot_sample, ot_study_config, ot_sweep_against, Sweep};
use cmm::diagnostics::{eoc, linf_error, patch_fraction_above, spectrum_fit, TimeSeriesRecord};
use cmm::flow_map::{rk4_backward, AnalyticVelocity};
use cmm::io::{Problem, RunConfig, SavedState};
use cmm::mhd::{lorentz_source, lorentz_source_curl, zoom_eval, MhdConfig, MhdRun, OrszagTang, ZoomField};
use cmm::flow_map::VelocityField;
use cmm::solver::{CmmSolver, Physics, StepReport, TimeStep};
use cmm::swirl::{run_swirl, SwirlConfig, SwirlResult};
use cmm::{GridSpec64, HermiteField64, SpectralWorkspace64, SubmapStack64};

pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

pub type Outcome = Result<Verdict, String>;

fn fmt_orders(o: &[f64]) -> String {
    o.iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>().join(" ")
}

fn fmt_sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(" ")
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// ---------------------------------------------------------------- oracles

fn runner() -> TestRunner {
    let config = Config {
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

/// Random trigonometric polynomial with modes `|kx|, |ky| ≤ 3`.
fn trig_strategy() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, 2 * 49)
}

fn trig_eval(c: &[f64], p: [f64; 2]) -> (f64, [f64; 2]) {
    let (mut v, mut gx, mut gy) = (0.0, 0.0, 0.0);
    let mut i = 0;
    for kx in -3i32..=3 {
        for ky in -3i32..=3 {
            let (kx, ky) = (kx as f64, ky as f64);
            let (s, co) = (kx * p[0] + ky * p[1]).sin_cos();
            v += c[i] * co + c[i + 1] * s;
            let d = -c[i] * s + c[i + 1] * co;
            gx += kx * d;
            gy += ky * d;
            i += 2;
        }
    }
    (v, [gx, gy])
}

pub fn hermite_reproduction() -> Outcome {
    let mut runner = runner();
    let g = GridSpec64::new(4, 4, 4.0, 4.0).map_err(err)?;
    let worst = Cell::new(0.0f64);
    let strat = (proptest::array::uniform16(-2.0f64..2.0), 0.0f64..1.0, 0.0f64..1.0);
    let res = runner.run(&strat, |(c, px, py)| {
        let poly = |x: f64, y: f64| -> [f64; 4] {
            let mut out = [0.0; 4];
            for i in 0..4 {
                for j in 0..4 {
                    let a = c[4 * i + j];
                    let (xi, yj) = (x.powi(i as i32), y.powi(j as i32));
                    let dxi = if i > 0 { i as f64 * x.powi(i as i32 - 1) } else { 0.0 };
                    let dyj = if j > 0 { j as f64 * y.powi(j as i32 - 1) } else { 0.0 };
                    out[0] += a * xi * yj;
                    out[1] += a * dxi * yj;
                    out[2] += a * xi * dyj;
                    out[3] += a * dxi * dyj;
                }
            }
            out
        };
        let h = HermiteField64::project(g, |x, y| poly(x, y));
        let p = [1.0 + px, 2.0 + py];
        let e = poly(p[0], p[1]);
        let d = (h.eval(p) - e[0]).abs() / (1.0 + e[0].abs());
        worst.set(worst.get().max(d));
        prop_assert!(d <= 1e-12);
        Ok(())
    });
    Ok(verdict(res.is_ok(), format!("max relative error {:.2e} (tol 1e-12)", worst.get())))
}

pub fn rk4_order() -> Outcome {
    let v = AnalyticVelocity(|p: [f64; 2], _t: f64| ([-(p[1] - PI), p[0] - PI], [[0.0, -1.0], [1.0, 0.0]]));
    let p = [4.0, 2.5];
    let t_end = 2.0f64;
    let (s, c) = (-t_end).sin_cos();
    let (x, y) = (p[0] - PI, p[1] - PI);
    let exact = [PI + c * x - s * y, PI + s * x + c * y];
    let errors: Vec<f64> = [16usize, 32, 64, 128]
        .iter()
        .map(|&n| {
            let dt = t_end / n as f64;
            let mut q = p;
            for k in (0..n).rev() {
                q = rk4_backward(&v, q, k as f64 * dt, (k + 1) as f64 * dt).end;
            }
            ((q[0] - exact[0]).powi(2) + (q[1] - exact[1]).powi(2)).sqrt()
        })
        .collect();
    let orders = eoc(&errors).map_err(err)?;
    let pass = orders.iter().all(|o| (o - 4.0).abs() <= 0.1);
    Ok(verdict(pass, format!("orders {} (want 4.0 ± 0.1)", fmt_orders(&orders))))
}

/// Rigid rotation about `(π, π)` with the constant source `f = sin x`.
/// The rotation is not periodic, so only the disk `|x - (π, π)| < π`
/// carries meaningful values.
struct RotationSource {
    velocity_grid: GridSpec64,
    source_grid: GridSpec64,
}

fn rotation(p: [f64; 2]) -> [f64; 2] {
    [-(p[1] - PI), p[0] - PI]
}

impl Physics<f64> for RotationSource {
    fn velocity(&self, _stack: &SubmapStack64, _t: f64) -> cmm::Result<VelocityField<f64>> {
        let g = self.velocity_grid;
        let mut u = VelocityField::zeros(g);
        for k in 0..g.len() {
            let v = rotation(g.node_at(k));
            (u.ux.f[k], u.ux.fy[k]) = (v[0], -1.0);
            (u.uy.f[k], u.uy.fx[k]) = (v[1], 1.0);
        }
        Ok(u)
    }

    fn source(&self, _stack: &SubmapStack64, _t: f64) -> cmm::Result<HermiteField64> {
        Ok(HermiteField64::project(self.source_grid, |x, _y| [x.sin(), x.cos(), 0.0, 0.0]))
    }
}

/// Traces the characteristic through `x` backward from `t_end` with
/// `steps` RK4 substeps and integrates `sin x` along it by composite Simpson.
fn rotation_source_oracle(x: [f64; 2], t_end: f64, steps: usize) -> f64 {
    let h = -t_end / steps as f64;
    let add = |y: [f64; 2], k: [f64; 2], a: f64| [y[0] + a * k[0], y[1] + a * k[1]];
    let mut y = x;
    let mut sum = y[0].sin();
    for i in 1..=steps {
        let k1 = rotation(y);
        let k2 = rotation(add(y, k1, 0.5 * h));
        let k3 = rotation(add(y, k2, 0.5 * h));
        let k4 = rotation(add(y, k3, h));
        y = [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        let w = if i == steps { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * y[0].sin();
    }
    sum * t_end / (3.0 * steps as f64)
}

const SOURCE_ORACLE_C: f64 = 1.0;

pub fn source_vs_characteristics() -> Outcome {
    let t_end = 0.5;
    let probe: Vec<[f64; 2]> = GridSpec64::square(32)
        .map_err(err)?
        .par_map_nodes(|p| p)
        .into_iter()
        .filter(|p| (p[0] - PI).hypot(p[1] - PI) <= 1.5)
        .collect();
    let oracle: Vec<f64> = probe.iter().map(|&p| rotation_source_oracle(p, t_end, 10_000)).collect();
    let mut lines = Vec::new();
    let mut errors = Vec::new();
    let mut pass = true;
    for n in [32usize, 64, 128] {
        let dt = 1.0 / n as f64;
        let g = GridSpec64::square(n).map_err(err)?;
        let physics = RotationSource {
            velocity_grid: g,
            source_grid: g,
        };
        let mut solver = CmmSolver::new(physics, g, g, 3, None, 0.0).map_err(err)?;
        solver.integrate(t_end, TimeStep::Fixed(dt), |_, _| Ok(())).map_err(err)?;
        let f: Vec<f64> = probe.iter().map(|&p| solver.stack.total_source_eval(p)).collect();
        let e = linf_error(&f, &oracle).map_err(err)?;
        let bound = SOURCE_ORACLE_C * (dt.powi(3) + (n as f64).powi(-3));
        pass &= e <= bound;
        errors.push(e);
        lines.push(format!("N={n}: {e:.2e} ≤ {bound:.2e}"));
    }
    Ok(verdict(pass, format!("{} (C = {SOURCE_ORACLE_C})", lines.join(", "))))
}

pub fn dual_lorentz() -> Outcome {
    let g = GridSpec64::square(64).map_err(err)?;
    let ws = SpectralWorkspace64::new(g);
    let mut runner = runner();
    let worst = Cell::new(0.0f64);
    let res = runner.run(&trig_strategy(), |c| {
        // B = ∇⊥ψ is divergence-free by construction
        let grad: Vec<(f64, [f64; 2])> = g.par_map_nodes(|p| trig_eval(&c, p));
        let bx: Vec<f64> = grad.iter().map(|d| d.1[1]).collect();
        let by: Vec<f64> = grad.iter().map(|d| -d.1[0]).collect();
        let a = lorentz_source(&bx, &by, &ws).unwrap();
        let b = lorentz_source_curl(&bx, &by, &ws).unwrap();
        let scale = 1.0 + a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let d = linf_error(&a, &b).unwrap() / scale;
        worst.set(worst.get().max(d));
        prop_assert!(d <= 1e-10);
        Ok(())
    });
    Ok(verdict(res.is_ok(), format!("max relative difference {:.2e} (tol 1e-10)", worst.get())))
}

pub fn biot_savart_round_trip() -> Outcome {
    let g = GridSpec64::square(64).map_err(err)?;
    let ws = SpectralWorkspace64::new(g);
    let mut runner = runner();
    let worst = Cell::new(0.0f64);
    let res = runner.run(&trig_strategy(), |c| {
        let w: Vec<f64> = g.par_map_nodes(|p| trig_eval(&c, p).0);
        let (ux, uy) = ws.biot_savart(&w, 1.0).unwrap();
        let back = ws.curl2d(&ux, &uy).unwrap();
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let d = w.iter().zip(&back).fold(0.0f64, |m, (a, b)| m.max((a - mean - b).abs()));
        worst.set(worst.get().max(d));
        prop_assert!(d <= 1e-10);
        Ok(())
    });
    Ok(verdict(res.is_ok(), format!("max error {:.2e} (tol 1e-10)", worst.get())))
}

pub fn duhamel_split() -> Outcome {
    let base = SwirlConfig {
        n_velocity: 256,
        n_eval: 256,
        ..SwirlConfig::study(64, 1.0 / 64.0)
    };
    let unsplit = run_swirl(&base).map_err(err)?;
    let split = run_swirl(&SwirlConfig {
        remap_every: Some(0.25),
        ..base.clone()
    })
    .map_err(err)?;
    let d = linf_error(&split.theta, &unsplit.theta).map_err(err)?;
    let interp = unsplit.linf_error;
    Ok(verdict(
        d <= 5.0 * interp && split.n_remaps == 3,
        format!(
            "{} remaps, split vs unsplit {d:.2e}, unsplit error {interp:.2e}, ratio {:.2} (≤ 5)",
            split.n_remaps,
            d / interp
        ),
    ))
}

fn state_bytes(cfg: &RunConfig, run: &mut MhdRun<f64, OrszagTang>) -> Result<Vec<u8>, String> {
    run.solver.ensure_snapshots().map_err(err)?;
    let st = SavedState {
        config: cfg.clone(),
        steps: run.solver.steps,
        initial_speed: run.initial_speed,
        stack: run.stack().clone(),
        velocity: run.solver.velocity.clone(),
        sources: run.solver.sources.clone(),
    };
    let mut buf = Vec::new();
    st.write_to(&mut buf).map_err(err)?;
    Ok(buf)
}

pub fn determinism() -> Outcome {
    let cfg = RunConfig {
        n_map: 32,
        n_source: 32,
        n_velocity: 64,
        delta_det: 0.01,
        t_end: 0.4,
        ..RunConfig::defaults(Problem::MhdOt)
    };
    let full = |cfg: &RunConfig| -> Result<(Vec<u8>, Vec<u64>, Vec<f64>, usize), String> {
        let mut run = MhdRun::new(cfg.mhd(), OrszagTang).map_err(err)?;
        let mut times = Vec::new();
        run.run_to(cfg.t_end, 1, |r, _| {
            times.push(r.t());
            Ok(())
        })
        .map_err(err)?;
        let bits = run.records.iter().map(|r| r.e_tot.to_bits()).collect();
        Ok((state_bytes(cfg, &mut run)?, bits, times, run.stack().n_remaps()))
    };
    let (a, ea, times, remaps) = full(&cfg)?;
    let (b, eb, _, _) = full(&cfg)?;
    let repeat = a == b && ea == eb;

    // pause on a step boundary of the uninterrupted run
    let pause = times[times.len() / 2];
    let mut first = MhdRun::new(cfg.mhd(), OrszagTang).map_err(err)?;
    first.run_to(pause, 0, |_, _| Ok(())).map_err(err)?;
    let saved = state_bytes(&cfg, &mut first)?;
    let st = SavedState::read_from(&saved[..]).map_err(err)?;
    let mut resumed = MhdRun::resume(
        st.config.mhd(),
        OrszagTang,
        st.stack,
        st.velocity,
        st.sources,
        st.steps,
        st.initial_speed,
    )
    .map_err(err)?;
    resumed.run_to(cfg.t_end, 0, |_, _| Ok(())).map_err(err)?;
    let resume = state_bytes(&cfg, &mut resumed)? == a;
    Ok(verdict(
        repeat && resume && remaps > 0,
        format!("repeat identical: {repeat}, checkpoint/resume identical: {resume}, {remaps} remaps"),
    ))
}

// ---------------------------------------------------------------- swirl

#[derive(Default)]
pub struct SwirlCache {
    runs: Vec<((usize, u64), f64)>,
}

impl SwirlCache {
    fn error(&mut self, n: usize, dt: f64) -> Result<f64, String> {
        let key = (n, dt.to_bits());
        if let Some((_, e)) = self.runs.iter().find(|(k, _)| *k == key) {
            return Ok(*e);
        }
        let r: SwirlResult<f64> = run_swirl(&SwirlConfig::study(n, dt)).map_err(err)?;
        self.runs.push((key, r.linf_error));
        Ok(r.linf_error)
    }
}

pub fn swirl_space(cache: &mut SwirlCache) -> Outcome {
    let ns = [64usize, 128, 256, 512];
    let errors = ns.iter().map(|&n| cache.error(n, 1.0 / 512.0)).collect::<Result<Vec<_>, _>>()?;
    let orders = eoc(&errors).map_err(err)?;
    let last = *orders.last().unwrap();
    let pass = orders.iter().all(|&o| o >= 2.5) && (2.7..=3.5).contains(&last);
    Ok(verdict(
        pass,
        format!("errors {}, orders {} (≥ 2.5, last in [2.7, 3.5])", fmt_sci(&errors), fmt_orders(&orders)),
    ))
}

pub fn swirl_time(cache: &mut SwirlCache) -> Outcome {
    let dts = [64.0, 128.0, 256.0, 512.0];
    let errors = dts.iter().map(|&d| cache.error(512, 1.0 / d)).collect::<Result<Vec<_>, _>>()?;
    let orders = eoc(&errors).map_err(err)?;
    let pass = orders.iter().all(|o| (2.7..=3.5).contains(o));
    Ok(verdict(
        pass,
        format!("errors {}, orders {} (in [2.7, 3.5])", fmt_sci(&errors), fmt_orders(&orders)),
    ))
}

// ---------------------------------------------------------------- Orszag–Tang

fn sweep_orders(s: &Sweep<f64>) -> Result<(bool, String), String> {
    let orders = s.orders().map_err(err)?;
    let pass = orders.iter().flatten().all(|o| (2.1..=3.6).contains(o));
    let text = s
        .quantities
        .iter()
        .zip(&orders)
        .map(|(q, o)| format!("{q}: {}", fmt_orders(o)))
        .collect::<Vec<_>>()
        .join("; ");
    Ok((pass, text))
}

pub fn ot_self_convergence() -> Outcome {
    let (n_ref, dt_ref, t_end) = (512usize, 0.5f64.powi(10), 0.1);
    let eval = GridSpec64::square(128).map_err(err)?;
    let reference = ot_sample(ot_study_config(n_ref, dt_ref, t_end, n_ref), &eval).map_err(err)?;
    let space: Vec<(usize, f64)> = [32usize, 64, 128, 256].iter().map(|&n| (n, dt_ref)).collect();
    let time: Vec<(usize, f64)> = (6..=9).map(|l| (n_ref, 0.5f64.powi(l))).collect();
    let (ps, ts) = sweep_orders(&ot_sweep_against(&space, &reference, n_ref, t_end, &eval).map_err(err)?)?;
    let (pt, tt) = sweep_orders(&ot_sweep_against(&time, &reference, n_ref, t_end, &eval).map_err(err)?)?;
    Ok(verdict(ps && pt, format!("space [{ts}], time [{tt}] (in [2.1, 3.6])")))
}

/// The shared desk-scale Orszag–Tang run: map 256, velocity 512, to `t = 2`.
pub struct OtDesk {
    records: Vec<TimeSeriesRecord<f64>>,
    counts: Vec<(f64, usize)>,
    spectra_t1: Option<(Vec<f64>, Vec<f64>)>,
    stack: Option<SubmapStack64>,
    n_map: usize,
    failure: Option<String>,
}

impl OtDesk {
    pub fn run() -> Self {
        let cfg = MhdConfig::<f64>::desk(256);
        let mut desk = OtDesk {
            records: Vec::new(),
            counts: vec![(0.0, 1)],
            spectra_t1: None,
            stack: None,
            n_map: cfg.n_map,
            failure: None,
        };
        if let Err(e) = desk.evolve(cfg) {
            desk.failure = Some(e);
        }
        desk
    }

    fn evolve(&mut self, cfg: MhdConfig<f64>) -> Result<(), String> {
        let mut run = MhdRun::new(cfg, OrszagTang).map_err(err)?;
        let counts = &mut self.counts;
        let mut track = |r: &mut MhdRun<f64, OrszagTang>, _: &StepReport<f64>| {
            counts.push((r.t(), r.stack().n_submaps()));
            Ok(())
        };
        run.run_to(1.0, 4, &mut track).map_err(err)?;
        let last = run.record().map_err(err)?;
        if run.records.last().map(|r| r.t) != Some(last.t) {
            run.records.push(last);
        }
        self.records = run.records.clone();
        let f = run.fields().map_err(err)?;
        let ws = SpectralWorkspace64::new(f.grid);
        self.spectra_t1 = Some((
            ws.shell_spectrum(&f.ux, &f.uy).map_err(err)?,
            ws.shell_spectrum(&f.bx, &f.by).map_err(err)?,
        ));
        run.run_to(2.0, 0, &mut track).map_err(err)?;
        self.stack = Some(run.stack().clone());
        Ok(())
    }

    fn count_at(&self, t: f64) -> usize {
        self.counts.iter().take_while(|(s, _)| *s <= t).last().map_or(1, |c| c.1)
    }
}

pub fn ot_conservation(d: &OtDesk) -> Outcome {
    if d.records.is_empty() {
        return Err(d.failure.clone().unwrap_or_default());
    }
    let r0 = &d.records[0];
    let scale_h = r0.h_c.abs().max(r0.e_tot);
    let (mut de, mut dh, mut da) = (0.0f64, 0.0f64, 0.0f64);
    for r in &d.records {
        de = de.max((r.e_tot - r0.e_tot).abs() / r0.e_tot);
        dh = dh.max((r.h_c - r0.h_c).abs() / scale_h);
        da = da.max((r.a_sq - r0.a_sq).abs() / r0.a_sq);
    }
    let end = d.records.last().unwrap();
    Ok(verdict(
        de <= 0.01 && dh <= 0.01 && da <= 0.01,
        format!(
            "to t = {:.3}: max drift E_tot {de:.2e}, H_c {dh:.2e}, A_sq {da:.2e} (tol 1e-2); E_tot {:.4} -> {:.4}",
            end.t, r0.e_tot, end.e_tot
        ),
    ))
}

pub fn ot_spectra(d: &OtDesk) -> Outcome {
    let (eu, eb) = d.spectra_t1.as_ref().ok_or_else(|| d.failure.clone().unwrap_or_default())?;
    let su = spectrum_fit(eu, 1, 14).map_err(err)?;
    let sb = spectrum_fit(eb, 1, 14).map_err(err)?;
    let ok = |s: f64| (s + 2.0).abs() <= 0.3;
    Ok(verdict(ok(su) && ok(sb), format!("slopes E_u {su:.3}, E_B {sb:.3} (want -2 ± 0.3)")))
}

pub fn submap_growth(d: &OtDesk) -> Outcome {
    let stack = d.stack.as_ref().ok_or_else(|| d.failure.clone().unwrap_or_default())?;
    let monotone = d.counts.windows(2).all(|w| w[1].1 >= w[0].1);
    let bounded = d.counts.iter().all(|&(t, c)| c <= 2 * d.count_at(0.5 * t) + 1);
    let remaps = stack.n_remaps();
    Ok(verdict(
        monotone && bounded && remaps >= 5,
        format!(
            "{remaps} remaps by t = {:.3}, counts at t = 0.5/1/1.5/2: {}/{}/{}/{}, nondecreasing {monotone}, count(t) ≤ 2 count(t/2) + 1: {bounded}",
            stack.t(),
            d.count_at(0.5),
            d.count_at(1.0),
            d.count_at(1.5),
            d.count_at(2.0)
        ),
    ))
}

pub fn zoom_subgrid(d: &OtDesk) -> Outcome {
    let stack = d.stack.as_ref().ok_or_else(|| d.failure.clone().unwrap_or_default())?;
    let k_map = (d.n_map / 2) as f64;
    let n = 256;
    let mut w = PI / 2.0;
    let mut fracs = Vec::new();
    for _ in 0..4 {
        let patch = zoom_eval(stack, &OrszagTang, ZoomField::Current, [PI, PI], w, n).map_err(err)?;
        fracs.push(patch_fraction_above(&patch, n, 2.0 * w, k_map).map_err(err)?);
        w *= 0.5;
    }
    Ok(verdict(
        fracs.iter().all(|&f| f > 1e-6),
        format!("t = {:.3}, energy fractions above k = {k_map}: {} (> 1e-6)", stack.t(), fmt_sci(&fracs)),
    ))
}

/// Runs the criteria whose name contains `filter` (all when `None`) and
/// returns the number that failed.
pub fn run_all(filter: Option<&str>) -> usize {
    let selected = |name: &str| filter.map_or(true, |f| name.contains(f));
    let mut failed = 0usize;
    let mut report = |name: &str, f: &mut dyn FnMut() -> Outcome| {
        if !selected(name) {
            return;
        }
        let t0 = Instant::now();
        let (pass, detail) = match f() {
            Ok(v) => (v.pass, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} {name}: {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            t0.elapsed().as_secs_f64()
        );
    };

    report("oracle-hermite-reproduction", &mut hermite_reproduction);
    report("oracle-rk4-order", &mut rk4_order);
    report("oracle-source-vs-characteristics", &mut source_vs_characteristics);
    report("oracle-dual-lorentz", &mut dual_lorentz);
    report("oracle-biot-savart", &mut biot_savart_round_trip);
    report("oracle-duhamel-split", &mut duhamel_split);
    report("oracle-determinism", &mut determinism);

    let mut cache = SwirlCache::default();
    report("swirl-eoc-space", &mut || swirl_space(&mut cache));
    report("swirl-eoc-time", &mut || swirl_time(&mut cache));

    report("ot-self-convergence", &mut ot_self_convergence);

    let ot_names = ["ot-conservation", "ot-spectra", "ot-submap-growth", "ot-zoom"];
    let desk = if ot_names.iter().any(|n| selected(n)) {
        Some(OtDesk::run())
    } else {
        None
    };
    if let Some(d) = &desk {
        report("ot-conservation", &mut || ot_conservation(d));
        report("ot-spectra", &mut || ot_spectra(d));
        report("ot-submap-growth", &mut || submap_growth(d));
        report("ot-zoom", &mut || zoom_subgrid(d));
    }

    failed
}
