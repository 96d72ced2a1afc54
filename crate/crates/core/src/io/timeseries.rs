//! CSV time series and convergence tables.
//!
//! Every quantity is in the nondimensional units of the periodic box
//! `[0, 2π)²`; the header names each column with its unit in brackets.

use std::io::Write;
use std::path::Path;

use crate::diagnostics::TimeSeriesRecord;
use crate::error::{CmmError, Result};
use crate::real::Real;

pub const TIMESERIES_HEADER: &str = "t[time],e_kin[energy],e_pot[energy],e_tot[energy],h_c[energy],a_sq[energy*length^2],max_u[length/time],max_j[field/length],n_submaps[count],dt[time]";

pub fn timeseries_row<T: Real>(r: &TimeSeriesRecord<T>) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        r.t.as_f64(),
        r.e_kin.as_f64(),
        r.e_pot.as_f64(),
        r.e_tot.as_f64(),
        r.h_c.as_f64(),
        r.a_sq.as_f64(),
        r.max_u.as_f64(),
        r.max_j.as_f64(),
        r.n_submaps,
        r.dt.as_f64()
    )
}

/// Appends one row, writing the header first when the file is new or empty.
pub fn append_timeseries<T: Real>(path: &Path, r: &TimeSeriesRecord<T>) -> Result<()> {
    let fresh = std::fs::metadata(path).map_or(true, |m| m.len() == 0);
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        writeln!(f, "{TIMESERIES_HEADER}")?;
    }
    writeln!(f, "{}", timeseries_row(r))?;
    Ok(())
}

pub fn read_timeseries(path: &Path) -> Result<Vec<TimeSeriesRecord<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next() != Some(TIMESERIES_HEADER) {
        return Err(CmmError::Format(format!("{} lacks the time series header", path.display())));
    }
    lines
        .enumerate()
        .map(|(i, l)| {
            let bad = || CmmError::Format(format!("{} row {}: {l:?}", path.display(), i + 1));
            let c: Vec<&str> = l.split(',').collect();
            if c.len() != 10 {
                return Err(bad());
            }
            let f = |k: usize| c[k].parse::<f64>().map_err(|_| bad());
            Ok(TimeSeriesRecord {
                t: f(0)?,
                e_kin: f(1)?,
                e_pot: f(2)?,
                e_tot: f(3)?,
                h_c: f(4)?,
                a_sq: f(5)?,
                max_u: f(6)?,
                max_j: f(7)?,
                n_submaps: c[8].parse().map_err(|_| bad())?,
                dt: f(9)?,
            })
        })
        .collect()
}

/// Generic table: a header line and numeric rows.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        if r.len() != header.len() {
            return Err(CmmError::Format(format!("row of {} values under {} columns", r.len(), header.len())));
        }
        let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    std::fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn append_and_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ts.csv");
        let mut r = TimeSeriesRecord {
            t: 0.0,
            e_kin: 0.5,
            e_pot: 5.0,
            e_tot: 5.5,
            h_c: 1.0,
            a_sq: 4.25,
            max_u: 2f64.sqrt(),
            max_j: 8.0,
            n_submaps: 1,
            dt: 0.0,
        };
        append_timeseries(&p, &r).unwrap();
        r.t = 0.1 + 0.2;
        r.n_submaps = 2;
        append_timeseries(&p, &r).unwrap();
        let back = read_timeseries(&p).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1], r);
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("t[")).count(), 1);
    }
}
