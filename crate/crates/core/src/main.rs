use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cmm::convergence::{ot_sweep, swirl_sweep, Sweep};
use cmm::diagnostics::{patch_fraction_above, spectrum_fit};
use cmm::error::{CmmError, Result};
use cmm::grid::GridSpec;
use cmm::io::{append_timeseries, write_table, FieldSnapshot, Problem, RunConfig, SavedState, OUTPUT_DIR_ENV};
use cmm::mhd::{window_points, zoom_eval, MhdRun, OrszagTang, ZoomField};
use cmm::spectral::SpectralWorkspace;
use cmm::swirl::{run_swirl, SwirlConfig, SwirlProblem};

#[derive(Parser)]
#[command(name = "cmm", version, about = "Characteristic mapping method for 2D periodic transport and ideal MHD")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Swirl advection with source against its exact solution.
    Advect(RunArgs),
    /// Orszag–Tang ideal MHD run with time series, snapshots and a checkpoint.
    Mhd(RunArgs),
    /// Windowed evaluation of a checkpoint through the full submap stack.
    Zoom(ZoomArgs),
    /// Convergence sweep with an EOC table.
    Convergence(ConvArgs),
    /// Shell spectrum and slope fit of a vector snapshot.
    Spectra(SpectraArgs),
}

#[derive(Args)]
struct RunArgs {
    /// key=value configuration file; reference defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides applied after the file, e.g. `--set n_map=128`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct ZoomArgs {
    #[arg(long)]
    state: PathBuf,
    #[arg(long, default_value = "j")]
    field: String,
    /// Window center `x,y`.
    #[arg(long, default_value = "3.141592653589793,3.141592653589793", value_parser = parse_pair)]
    center: (f64, f64),
    /// Half width of the first window.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    half_width: f64,
    /// Number of windows, each half as wide as the previous one.
    #[arg(long, default_value_t = 4)]
    levels: usize,
    /// Points per window side.
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Space,
    Time,
    Both,
}

#[derive(Args)]
struct ConvArgs {
    #[arg(long, value_parser = ["advect-swirl", "mhd-ot"])]
    problem: String,
    #[arg(long, value_enum, default_value_t = Kind::Both)]
    kind: Kind,
    /// Smaller grids and fewer steps, for a fast look.
    #[arg(long)]
    quick: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpectraArgs {
    /// Vector snapshots (e.g. `u` and `b`).
    #[arg(required = true)]
    snapshots: Vec<PathBuf>,
    #[arg(long, default_value_t = 1)]
    k_lo: usize,
    #[arg(long, default_value_t = 14)]
    k_hi: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected x,y")?;
    let x = a.trim().parse().map_err(|_| format!("bad number {a:?}"))?;
    let y = b.trim().parse().map_err(|_| format!("bad number {b:?}"))?;
    Ok((x, y))
}

fn load_config(args: &RunArgs, problem: Problem) -> Result<RunConfig> {
    let mut text = match &args.config {
        Some(p) => std::fs::read_to_string(p)?,
        None => String::new(),
    };
    for kv in &args.set {
        text.push('\n');
        text.push_str(kv);
    }
    RunConfig::parse_str(&text, Some(problem))
}

fn out_dir(explicit: Option<&Path>) -> Result<PathBuf> {
    let d = match (explicit, std::env::var_os(OUTPUT_DIR_ENV)) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(e)) if !e.is_empty() => PathBuf::from(e),
        _ => PathBuf::from("out"),
    };
    std::fs::create_dir_all(&d)?;
    Ok(d)
}

fn advect(args: &RunArgs) -> Result<()> {
    let cfg = load_config(args, Problem::AdvectSwirl)?;
    let dir = cfg.resolved_output_dir();
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("run.cfg"), cfg.serialize())?;
    let sc: SwirlConfig<f64> = cfg.swirl();
    let r = run_swirl(&sc)?;
    let n = r.eval_grid.nx;
    let pr = SwirlProblem::new(sc.eps)?;
    let exact = r.eval_grid.par_map_nodes(|p| pr.reference(p, sc.t_end));
    FieldSnapshot::scalar("advect-swirl", "theta", sc.t_end, n, r.theta.clone())?.save(&dir.join("theta.snap"))?;
    FieldSnapshot::scalar("advect-swirl", "theta_exact", sc.t_end, n, exact)?.save(&dir.join("theta_exact.snap"))?;
    write_table(
        &dir.join("error.csv"),
        &["n_map", "dt", "t_end", "linf_error", "steps", "remaps"],
        &[vec![sc.n_map as f64, sc.dt, sc.t_end, r.linf_error, r.steps as f64, r.n_remaps as f64]],
    )?;
    println!("swirl N={} dt={} T={}: L∞ error {:.6e}, {} steps, {} remaps", sc.n_map, sc.dt, sc.t_end, r.linf_error, r.steps, r.n_remaps);
    Ok(())
}

fn write_fields(run: &mut MhdRun<f64, OrszagTang>, dir: &Path, tag: &str) -> Result<()> {
    let f = run.fields()?;
    let (t, n) = (run.t(), f.grid.nx);
    FieldSnapshot::scalar("mhd-ot", "omega", t, n, f.omega)?.save(&dir.join(format!("omega_{tag}.snap")))?;
    FieldSnapshot::scalar("mhd-ot", "j", t, n, f.j)?.save(&dir.join(format!("j_{tag}.snap")))?;
    FieldSnapshot::vector("mhd-ot", "u", t, n, &f.ux, &f.uy)?.save(&dir.join(format!("u_{tag}.snap")))?;
    FieldSnapshot::vector("mhd-ot", "b", t, n, &f.bx, &f.by)?.save(&dir.join(format!("b_{tag}.snap")))?;
    Ok(())
}

fn mhd(args: &RunArgs) -> Result<()> {
    let cfg = load_config(args, Problem::MhdOt)?;
    let dir = cfg.resolved_output_dir();
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("run.cfg"), cfg.serialize())?;
    let ts_path = dir.join("timeseries.csv");
    if ts_path.exists() {
        std::fs::remove_file(&ts_path)?;
    }
    let mut run = MhdRun::new(cfg.mhd(), OrszagTang)?;
    let stride = cfg.snapshot_stride;
    let r0 = run.record()?;
    append_timeseries(&ts_path, &r0)?;
    if stride > 0 {
        write_fields(&mut run, &dir, "000000")?;
    }
    run.run_to(cfg.t_end, 0, |run, rep| {
        if stride > 0 && run.solver.steps % stride == 0 {
            let rec = run.record()?;
            append_timeseries(&ts_path, &rec)?;
            write_fields(run, &dir, &format!("{:06}", run.solver.steps))?;
        }
        if rep.remapped {
            eprintln!("t = {:.4}: remap, {} submaps", rep.t1, run.stack().n_submaps());
        }
        Ok(())
    })?;
    if stride == 0 || run.solver.steps % stride != 0 {
        let rec = run.record()?;
        append_timeseries(&ts_path, &rec)?;
    }
    write_fields(&mut run, &dir, "final")?;
    let state = SavedState {
        config: cfg.clone(),
        steps: run.solver.steps,
        initial_speed: run.initial_speed,
        stack: run.stack().clone(),
        velocity: run.solver.velocity.clone(),
        sources: run.solver.sources.clone(),
    };
    state.save(&dir.join("state.cmm"))?;
    let last = run.record()?;
    println!(
        "OT t={:.4}: {} steps, {} submaps, E_tot {:.6} H_c {:.6} A {:.6}",
        last.t, run.solver.steps, last.n_submaps, last.e_tot, last.h_c, last.a_sq
    );
    Ok(())
}

fn zoom(a: &ZoomArgs) -> Result<()> {
    let st = SavedState::load(&a.state)?;
    if st.config.problem != Problem::MhdOt {
        return Err(CmmError::InvalidArgument("zoom needs an mhd-ot checkpoint".into()));
    }
    let field = ZoomField::parse(&a.field)?;
    let dir = out_dir(a.out.as_deref())?;
    let k_map = (st.config.n_map / 2) as f64;
    let t = st.stack.t();
    let mut w = a.half_width;
    for level in 0..a.levels {
        let pts = window_points([a.center.0, a.center.1], w, a.n)?;
        let patch = zoom_eval(&st.stack, &OrszagTang, field, [a.center.0, a.center.1], w, a.n)?;
        let frac = patch_fraction_above(&patch, a.n, 2.0 * w, k_map)?;
        FieldSnapshot::scalar("mhd-ot", field.name(), t, a.n, patch)?
            .on_window(pts[0][0], pts[0][1], 2.0 * w)
            .save(&dir.join(format!("zoom_{}_{level}.snap", field.name())))?;
        println!("level {level}: half width {w:.6}, energy fraction above map Nyquist {frac:.3e}");
        w *= 0.5;
    }
    Ok(())
}

fn convergence(a: &ConvArgs) -> Result<()> {
    let dir = out_dir(a.out.as_deref())?;
    let kinds: &[(&str, bool)] = match a.kind {
        Kind::Space => &[("space", true)],
        Kind::Time => &[("time", false)],
        Kind::Both => &[("space", true), ("time", false)],
    };
    for &(name, space) in kinds {
        let sweep: Sweep<f64> = if a.problem == "advect-swirl" {
            let (ns, n_fix, dts, dt_fix) = if a.quick {
                (vec![32, 64, 128], 128, vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0], 1.0 / 256.0)
            } else {
                (vec![64, 128, 256, 512], 512, vec![1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0, 1.0 / 512.0], 1.0 / 512.0)
            };
            let cases: Vec<(usize, f64)> = if space {
                ns.iter().map(|&n| (n, dt_fix)).collect()
            } else {
                dts.iter().map(|&dt| (n_fix, dt)).collect()
            };
            let base = SwirlConfig::study(n_fix, dt_fix);
            swirl_sweep(&cases, &base)?
        } else {
            let (n_ref, log_dt_ref, ns, log_dts) = if a.quick {
                (128usize, 9, vec![16usize, 32, 64], vec![5, 6, 7])
            } else {
                (512, 10, vec![32, 64, 128, 256], vec![6, 7, 8, 9])
            };
            let dt_ref = 0.5f64.powi(log_dt_ref);
            let cases: Vec<(usize, f64)> = if space {
                ns.iter().map(|&n| (n, dt_ref)).collect()
            } else {
                log_dts.iter().map(|&l| (n_ref, 0.5f64.powi(l))).collect()
            };
            ot_sweep(&cases, n_ref, dt_ref, 0.1, &GridSpec::square(128)?)?
        };
        println!("{} {name} convergence", a.problem);
        print!("{}", sweep.table()?);
        let mut header = vec!["n", "dt"];
        let cols: Vec<String> = sweep.quantities.iter().map(|q| format!("err_{q}")).collect();
        header.extend(cols.iter().map(|s| s.as_str()));
        write_table(&dir.join(format!("eoc_{}_{name}.csv", a.problem)), &header, &sweep.numeric_rows())?;
    }
    Ok(())
}

fn spectra(a: &SpectraArgs) -> Result<()> {
    let dir = out_dir(a.out.as_deref())?;
    let mut cols: Vec<(String, Vec<f64>)> = Vec::new();
    for p in &a.snapshots {
        let s = FieldSnapshot::load(p)?;
        if s.components != 2 || s.nx != s.ny {
            return Err(CmmError::InvalidArgument(format!("{} is not a square vector snapshot", p.display())));
        }
        let g = GridSpec::new(s.nx, s.ny, s.lx, s.ly)?;
        let ws = SpectralWorkspace::new(g);
        let e = ws.shell_spectrum(s.component(0), s.component(1))?;
        let slope = spectrum_fit(&e, a.k_lo, a.k_hi)?;
        println!("{} (t = {}): slope {slope:.4} over k in [{}, {}]", s.field, s.t, a.k_lo, a.k_hi);
        cols.push((s.field, e));
    }
    let len = cols.iter().map(|c| c.1.len()).min().unwrap_or(0);
    let mut header = vec!["k".to_string()];
    header.extend(cols.iter().map(|c| format!("E_{}", c.0)));
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let rows: Vec<Vec<f64>> = (0..len)
        .map(|k| {
            let mut r = vec![k as f64];
            r.extend(cols.iter().map(|c| c.1[k]));
            r
        })
        .collect();
    write_table(&dir.join("spectra.csv"), &header_refs, &rows)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match &cli.cmd {
        Cmd::Advect(a) => advect(a),
        Cmd::Mhd(a) => mhd(a),
        Cmd::Zoom(a) => zoom(a),
        Cmd::Convergence(a) => convergence(a),
        Cmd::Spectra(a) => spectra(a),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
