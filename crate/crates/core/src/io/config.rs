//! Plain `key=value` run configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{CmmError, Result};
use crate::flow_map::RemapCriteria;
use crate::mhd::{Cutoffs, MhdConfig};
use crate::solver::TimeStep;
use crate::swirl::SwirlConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Problem {
    AdvectSwirl,
    MhdOt,
}

impl Problem {
    pub fn name(&self) -> &'static str {
        match self {
            Problem::AdvectSwirl => "advect-swirl",
            Problem::MhdOt => "mhd-ot",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "advect-swirl" => Ok(Problem::AdvectSwirl),
            "mhd-ot" => Ok(Problem::MhdOt),
            _ => Err(CmmError::InvalidArgument(format!(
                "unknown problem {s:?} (expected advect-swirl or mhd-ot)"
            ))),
        }
    }
}

/// Every run parameter. Defaults are the reference computation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub problem: Problem,
    pub n_map: usize,
    pub n_source: usize,
    pub n_velocity: usize,
    /// Fixed step; CFL stepping when absent.
    pub dt: Option<f64>,
    pub cfl: f64,
    pub t_end: f64,
    pub gamma: usize,
    pub delta_det: f64,
    pub tail_threshold: f64,
    pub cutoff_map: f64,
    pub cutoff_source: f64,
    pub eps: f64,
    pub remap: bool,
    pub output_dir: PathBuf,
    /// Steps between snapshots; 0 writes only the final state.
    pub snapshot_stride: usize,
}

/// Environment variable overriding `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "CMM_OUTPUT_DIR";

const KEYS: [&str; 16] = [
    "problem",
    "n_map",
    "n_source",
    "n_velocity",
    "dt",
    "cfl",
    "t_end",
    "gamma",
    "delta_det",
    "tail_threshold",
    "cutoff_map",
    "cutoff_source",
    "eps",
    "remap",
    "output_dir",
    "snapshot_stride",
];

impl RunConfig {
    pub fn defaults(problem: Problem) -> Self {
        Self {
            problem,
            n_map: 512,
            n_source: 512,
            n_velocity: 1024,
            dt: None,
            cfl: 1.0,
            t_end: 1.0,
            gamma: 3,
            delta_det: 0.05,
            tail_threshold: 1e-2,
            cutoff_map: 0.9,
            cutoff_source: 0.1,
            eps: 0.1,
            remap: true,
            output_dir: PathBuf::from("out"),
            snapshot_stride: 0,
        }
    }

    /// Parses `key=value` lines; `#` starts a comment. `problem` must be
    /// given either in the text or as `problem`.
    pub fn parse_str(text: &str, problem: Option<Problem>) -> Result<Self> {
        let mut entries: Vec<(usize, &str, &str)> = Vec::new();
        let mut file_problem = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body.split_once('=').ok_or_else(|| CmmError::Config {
                line,
                msg: format!("expected key=value, got {body:?}"),
            })?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(CmmError::Config {
                    line,
                    msg: format!("unknown key {k:?}"),
                });
            }
            if entries.iter().any(|e| e.1 == k) {
                return Err(CmmError::Config {
                    line,
                    msg: format!("duplicate key {k:?}"),
                });
            }
            if k == "problem" {
                file_problem = Some(Problem::parse(v).map_err(|e| CmmError::Config { line, msg: e.to_string() })?);
            }
            entries.push((line, k, v));
        }
        let problem = match (file_problem, problem) {
            (Some(a), Some(b)) if a != b => {
                let line = entries.iter().find(|e| e.1 == "problem").map_or(0, |e| e.0);
                return Err(CmmError::Config {
                    line,
                    msg: format!("problem {} conflicts with requested {}", a.name(), b.name()),
                });
            }
            (Some(p), _) | (None, Some(p)) => p,
            (None, None) => {
                return Err(CmmError::Config {
                    line: text.lines().count() + 1,
                    msg: "missing required key \"problem\"".into(),
                })
            }
        };
        let mut c = Self::defaults(problem);
        for &(line, k, v) in &entries {
            c.set(k, v).map_err(|msg| CmmError::Config { line, msg })?;
        }
        c.validate().map_err(|(k, msg)| CmmError::Config {
            line: entries.iter().find(|e| e.1 == k).map_or(0, |e| e.0),
            msg,
        })?;
        Ok(c)
    }

    pub fn parse_file(path: &Path, problem: Option<Problem>) -> Result<Self> {
        Self::parse_str(&std::fs::read_to_string(path)?, problem)
    }

    fn set(&mut self, k: &str, v: &str) -> std::result::Result<(), String> {
        fn num<N: std::str::FromStr>(k: &str, v: &str) -> std::result::Result<N, String> {
            v.parse().map_err(|_| format!("{k}: cannot parse {v:?}"))
        }
        fn pos(k: &str, v: &str) -> std::result::Result<f64, String> {
            let x: f64 = num(k, v)?;
            if x > 0.0 && x.is_finite() {
                Ok(x)
            } else {
                Err(format!("{k} = {v} out of range (must be positive)"))
            }
        }
        fn unit(k: &str, v: &str) -> std::result::Result<f64, String> {
            let x = pos(k, v)?;
            if x <= 1.0 {
                Ok(x)
            } else {
                Err(format!("{k} = {v} out of range (0, 1]"))
            }
        }
        fn grid(k: &str, v: &str) -> std::result::Result<usize, String> {
            let n: usize = num(k, v)?;
            if n >= 4 && n % 2 == 0 {
                Ok(n)
            } else {
                Err(format!("{k} = {v} out of range (even, at least 4)"))
            }
        }
        match k {
            "problem" => {}
            "n_map" => self.n_map = grid(k, v)?,
            "n_source" => self.n_source = grid(k, v)?,
            "n_velocity" => self.n_velocity = grid(k, v)?,
            "dt" => self.dt = if v == "none" { None } else { Some(pos(k, v)?) },
            "cfl" => self.cfl = pos(k, v)?,
            "t_end" => {
                let t: f64 = num(k, v)?;
                if !(t >= 0.0 && t.is_finite()) {
                    return Err(format!("{k} = {v} out of range (must be nonnegative)"));
                }
                self.t_end = t;
            }
            "gamma" => {
                let g: usize = num(k, v)?;
                if !(1..=8).contains(&g) {
                    return Err(format!("{k} = {v} out of range [1, 8]"));
                }
                self.gamma = g;
            }
            "delta_det" => self.delta_det = pos(k, v)?,
            "tail_threshold" => self.tail_threshold = unit(k, v)?,
            "cutoff_map" => self.cutoff_map = unit(k, v)?,
            "cutoff_source" => self.cutoff_source = unit(k, v)?,
            "eps" => self.eps = pos(k, v)?,
            "remap" => {
                self.remap = match v {
                    "on" | "true" => true,
                    "off" | "false" => false,
                    _ => return Err(format!("{k}: expected on or off, got {v:?}")),
                }
            }
            "output_dir" => {
                if v.is_empty() {
                    return Err(format!("{k} must not be empty"));
                }
                self.output_dir = PathBuf::from(v);
            }
            "snapshot_stride" => self.snapshot_stride = num(k, v)?,
            _ => return Err(format!("unknown key {k:?}")),
        }
        Ok(())
    }

    fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if self.problem == Problem::MhdOt && self.n_velocity < self.n_map {
            return Err((
                "n_velocity",
                format!("n_velocity = {} below n_map = {}", self.n_velocity, self.n_map),
            ));
        }
        Ok(())
    }

    /// All keys, one per line, in a form `parse_str` reads back exactly.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let dt = self.dt.map_or("none".to_string(), |d| d.to_string());
        let remap = if self.remap { "on" } else { "off" };
        let _ = writeln!(s, "problem={}", self.problem.name());
        let _ = writeln!(s, "n_map={}", self.n_map);
        let _ = writeln!(s, "n_source={}", self.n_source);
        let _ = writeln!(s, "n_velocity={}", self.n_velocity);
        let _ = writeln!(s, "dt={dt}");
        let _ = writeln!(s, "cfl={}", self.cfl);
        let _ = writeln!(s, "t_end={}", self.t_end);
        let _ = writeln!(s, "gamma={}", self.gamma);
        let _ = writeln!(s, "delta_det={}", self.delta_det);
        let _ = writeln!(s, "tail_threshold={}", self.tail_threshold);
        let _ = writeln!(s, "cutoff_map={}", self.cutoff_map);
        let _ = writeln!(s, "cutoff_source={}", self.cutoff_source);
        let _ = writeln!(s, "eps={}", self.eps);
        let _ = writeln!(s, "remap={remap}");
        let _ = writeln!(s, "output_dir={}", self.output_dir.display());
        let _ = writeln!(s, "snapshot_stride={}", self.snapshot_stride);
        s
    }

    /// `output_dir`, unless the environment overrides it.
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => self.output_dir.clone(),
        }
    }

    pub fn time_step(&self) -> TimeStep<f64> {
        match self.dt {
            Some(dt) => TimeStep::Fixed(dt),
            None => TimeStep::Cfl(self.cfl),
        }
    }

    pub fn remap_criteria(&self) -> Option<RemapCriteria<f64>> {
        self.remap.then(|| RemapCriteria {
            delta_det: self.delta_det,
            tail_threshold: self.tail_threshold,
            ..RemapCriteria::default()
        })
    }

    pub fn mhd(&self) -> MhdConfig<f64> {
        MhdConfig {
            n_map: self.n_map,
            n_source: self.n_source,
            n_velocity: self.n_velocity,
            cutoffs: Cutoffs::Relative {
                map: self.cutoff_map,
                source: self.cutoff_source,
            },
            gamma: self.gamma,
            remap: self.remap_criteria(),
            time_step: self.time_step(),
            t_end: self.t_end,
            ..MhdConfig::desk(self.n_map)
        }
    }

    /// Swirl setup; the analytic velocity is sampled on the velocity grid,
    /// errors are measured there too. CFL stepping is not available for
    /// the swirl, so a missing `dt` falls back to `h / 2`.
    pub fn swirl(&self) -> SwirlConfig<f64> {
        let dt = self
            .dt
            .unwrap_or(self.cfl * std::f64::consts::PI / self.n_map as f64);
        SwirlConfig {
            n_map: self.n_map,
            n_source: self.n_source,
            n_velocity: self.n_velocity,
            n_eval: self.n_velocity,
            dt,
            t_end: self.t_end,
            eps: self.eps,
            gamma: self.gamma,
            remap: self.remap_criteria(),
            remap_every: None,
            with_source: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_reference_defaults() {
        let c = RunConfig::parse_str("", Some(Problem::MhdOt)).unwrap();
        assert_eq!((c.n_map, c.n_velocity, c.cfl, c.delta_det), (512, 1024, 1.0, 0.05));
        assert_eq!(c, RunConfig::defaults(Problem::MhdOt));
        assert!(matches!(
            RunConfig::parse_str("# nothing\n", None),
            Err(CmmError::Config { line: 2, .. })
        ));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = RunConfig::parse_str("problem=mhd-ot\n\ndelta_det=-1\n", None).unwrap_err();
        assert!(matches!(e, CmmError::Config { line: 3, .. }), "{e}");
        let e = RunConfig::parse_str("problem=mhd-ot\nfoo=1\n", None).unwrap_err();
        assert!(matches!(e, CmmError::Config { line: 2, .. }), "{e}");
        let e = RunConfig::parse_str("n_map=64\nproblem=mhd-ot\nn_velocity=32\n", None).unwrap_err();
        assert!(matches!(e, CmmError::Config { line: 3, .. }), "{e}");
        assert!(RunConfig::parse_str("cutoff_source=1.5", Some(Problem::MhdOt)).is_err());
        assert!(RunConfig::parse_str("n_map 64", Some(Problem::MhdOt)).is_err());
        assert!(RunConfig::parse_str("problem=advect-swirl", Some(Problem::MhdOt)).is_err());
    }

    #[test]
    fn comments_and_values() {
        let c = RunConfig::parse_str(
            "problem = advect-swirl  # swirl\nn_map=64\ndt=0.01\nremap=off\nt_end=0\n",
            None,
        )
        .unwrap();
        assert_eq!(c.problem, Problem::AdvectSwirl);
        assert_eq!((c.n_map, c.dt, c.remap, c.t_end), (64, Some(0.01), false, 0.0));
        assert_eq!(c.time_step(), TimeStep::Fixed(0.01));
        assert!(c.remap_criteria().is_none());
    }
}
