//! Solver checkpoints: submap stack with its frozen sources, snapshot
//! histories, step counter and the run configuration.
//!
//! Same container as field snapshots: a text header closed by `end`, then
//! little-endian `f64` arrays. Every Hermite field is stored as its four
//! arrays `f, fx, fy, fxy`.

use std::io::{BufReader, Read, Write};
use std::path::Path;

use crate::error::{CmmError, Result};
use crate::flow_map::{CharMap, Submap, SubmapStack, VelocityField, VelocityHistory};
use crate::grid::{GridSpec, HermiteField};
use crate::io::config::{Problem, RunConfig};
use crate::io::snapshot::{expect_eof, read_f64s, read_header, write_f64s, Header, SNAPSHOT_VERSION};
use crate::source::{SourceField, SourceHistory};

pub const STATE_MAGIC: &str = "cmm-state";

#[derive(Clone, Debug)]
pub struct SavedState {
    pub config: RunConfig,
    pub steps: usize,
    /// `max|u|` at `t = 0`, the reference of the blow-up guard.
    pub initial_speed: f64,
    pub stack: SubmapStack<f64>,
    pub velocity: VelocityHistory<f64>,
    pub sources: SourceHistory<f64>,
}

fn join_times<'a>(it: impl Iterator<Item = &'a f64>) -> String {
    let v: Vec<String> = it.map(|t| t.to_string()).collect();
    if v.is_empty() {
        "-".into()
    } else {
        v.join(" ")
    }
}

fn split_times(s: &str) -> Result<Vec<f64>> {
    if s == "-" {
        return Ok(Vec::new());
    }
    s.split(' ')
        .map(|x| x.parse().map_err(|_| CmmError::Format(format!("bad time {x:?}"))))
        .collect()
}

fn write_hermite<W: Write>(w: &mut W, h: &HermiteField<f64>) -> Result<()> {
    for a in [&h.f, &h.fx, &h.fy, &h.fxy] {
        write_f64s(w, a)?;
    }
    Ok(())
}

fn read_hermite<R: Read>(r: &mut R, g: GridSpec<f64>) -> Result<HermiteField<f64>> {
    let n = g.len();
    let f = read_f64s(r, n)?;
    let fx = read_f64s(r, n)?;
    let fy = read_f64s(r, n)?;
    let fxy = read_f64s(r, n)?;
    HermiteField::from_parts(g, f, fx, fy, fxy)
}

impl SavedState {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        self.stack.validate()?;
        let st = &self.stack;
        let gm = st.head_map.grid();
        let ga = st.head_source.field.grid;
        let gv = self
            .velocity
            .newest()
            .map_or(0, |e| e.1.ux.grid.nx);
        writeln!(w, "{STATE_MAGIC}\nversion: {SNAPSHOT_VERSION}")?;
        for line in self.config.serialize().lines() {
            let (k, v) = line.split_once('=').expect("serialized key=value");
            writeln!(w, "config.{k}: {v}")?;
        }
        writeln!(w, "steps: {}", self.steps)?;
        writeln!(w, "initial_speed: {}", self.initial_speed)?;
        writeln!(w, "map_grid: {}", gm.nx)?;
        writeln!(w, "source_grid: {}", ga.nx)?;
        writeln!(w, "velocity_grid: {gv}")?;
        let bounds: Vec<f64> = st
            .frozen
            .iter()
            .map(|s| s.map.t_start)
            .chain([st.head_map.t_start, st.head_map.t_end])
            .collect();
        writeln!(w, "submap_bounds: {}", join_times(bounds.iter()))?;
        let vt = self.velocity.times();
        let ft = self.sources.times();
        writeln!(w, "gamma: {}", self.velocity.capacity())?;
        writeln!(w, "velocity_times: {}", join_times(vt.iter()))?;
        writeln!(w, "source_times: {}", join_times(ft.iter()))?;
        writeln!(w, "end")?;
        let maps = st
            .frozen
            .iter()
            .map(|s| (&s.map, &s.source))
            .chain([(&st.head_map, &st.head_source)]);
        for (m, s) in maps {
            write_hermite(&mut w, &m.disp_x)?;
            write_hermite(&mut w, &m.disp_y)?;
            write_hermite(&mut w, &s.field)?;
        }
        for (_, u) in self.velocity.entries() {
            write_hermite(&mut w, &u.ux)?;
            write_hermite(&mut w, &u.uy)?;
        }
        for (_, f) in self.sources.entries() {
            write_hermite(&mut w, f)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut r = BufReader::new(r);
        let h = read_header(&mut r, STATE_MAGIC)?;
        let config = config_from_header(&h)?;
        let gm = GridSpec::square(h.parse("map_grid")?)?;
        let ga = GridSpec::square(h.parse("source_grid")?)?;
        let nv: usize = h.parse("velocity_grid")?;
        let bounds = split_times(h.get("submap_bounds")?)?;
        if bounds.len() < 2 {
            return Err(CmmError::Format("submap_bounds needs at least two times".into()));
        }
        let gamma: usize = h.parse("gamma")?;
        let vt = split_times(h.get("velocity_times")?)?;
        let ft = split_times(h.get("source_times")?)?;
        if vt.len() > gamma || ft.len() > gamma || (!vt.is_empty() && nv == 0) {
            return Err(CmmError::Format("inconsistent snapshot histories".into()));
        }
        let mut submaps = Vec::with_capacity(bounds.len() - 1);
        for w in bounds.windows(2) {
            let map = CharMap {
                disp_x: read_hermite(&mut r, gm)?,
                disp_y: read_hermite(&mut r, gm)?,
                t_start: w[0],
                t_end: w[1],
            };
            let source = SourceField {
                field: read_hermite(&mut r, ga)?,
                t_start: w[0],
                t_end: w[1],
            };
            submaps.push(Submap { map, source });
        }
        let head = submaps.pop().expect("at least one submap");
        let stack = SubmapStack {
            frozen: submaps,
            head_map: head.map,
            head_source: head.source,
        };
        stack.validate()?;
        let mut velocity = VelocityHistory::new(gamma)?;
        if !vt.is_empty() {
            let gv = GridSpec::square(nv)?;
            for t in vt {
                let ux = read_hermite(&mut r, gv)?;
                let uy = read_hermite(&mut r, gv)?;
                velocity.push(t, VelocityField::new(ux, uy)?)?;
            }
        }
        let mut sources = SourceHistory::new(gamma)?;
        for t in ft {
            sources.push(t, read_hermite(&mut r, ga)?)?;
        }
        expect_eof(&mut r)?;
        Ok(Self {
            config,
            steps: h.parse("steps")?,
            initial_speed: h.parse("initial_speed")?,
            stack,
            velocity,
            sources,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(std::fs::File::open(path)?)
    }
}

fn config_from_header(h: &Header) -> Result<RunConfig> {
    let text: String = h
        .entries
        .iter()
        .filter_map(|(k, v)| k.strip_prefix("config.").map(|k| format!("{k}={v}\n")))
        .collect();
    let problem = Problem::parse(h.get("config.problem")?)?;
    RunConfig::parse_str(&text, Some(problem))
}
