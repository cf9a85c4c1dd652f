//! Grid sweeps over unfolding parameters, written as CSV.

use crate::commands::{family_flags, predict_options, FamilyArgs};
use crate::config::Settings;
use crate::report::fmt_f64;
use crate::Failure;
use fhn_zerohopf::reduction::Theorem;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl FromStr for Grid {
    type Err = String;

    /// `name=lo:hi:count`
    fn from_str(s: &str) -> Result<Self, String> {
        let (name, range) = s.split_once('=').ok_or_else(|| format!("expected name=lo:hi:count, got '{s}'"))?;
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected name=lo:hi:count, got '{s}'"));
        }
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
        let lo = num(parts[0])?;
        let hi = num(parts[1])?;
        let count: usize = parts[2].trim().parse().map_err(|e| format!("'{}': {e}", parts[2]))?;
        if count == 0 || !lo.is_finite() || !hi.is_finite() {
            return Err(format!("grid '{s}' is empty or not finite"));
        }
        Ok(Grid { name: name.trim().to_string(), lo, hi, count })
    }
}

impl Grid {
    pub fn value(&self, i: usize) -> f64 {
        if self.count == 1 {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.count - 1) as f64
        }
    }
}

/// Cartesian product with the first grid varying slowest.
pub fn cells(grids: &[Grid]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for g in grids {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..g.count).map(move |i| {
                    let mut v = prefix.clone();
                    v.push(g.value(i));
                    v
                })
            })
            .collect();
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub cell: usize,
    pub values: Vec<f64>,
    pub predictions: usize,
    pub r_star: Vec<f64>,
    pub w_star: Vec<f64>,
    pub stability: Vec<String>,
    pub failed_conditions: Vec<String>,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct SweepResults {
    pub csv: String,
    pub cells: usize,
    pub errors: usize,
    /// Number of cells by prediction count.
    pub histogram: BTreeMap<usize, usize>,
    pub rows: Vec<Row>,
}

fn run_cell(theorem: Theorem, base: &FamilyArgs, grids: &[Grid], cell: usize, values: Vec<f64>, settings: &Settings) -> Row {
    let mut row = Row {
        cell,
        values,
        predictions: 0,
        r_star: Vec::new(),
        w_star: Vec::new(),
        stability: Vec::new(),
        failed_conditions: Vec::new(),
        error: None,
    };
    let mut args = base.clone();
    for (g, v) in grids.iter().zip(&row.values) {
        args.set(&g.name, *v);
    }
    let family = match args.family(theorem) {
        Ok(f) => f,
        Err(e) => {
            row.error = Some(e.message());
            return row;
        }
    };
    match family.predict(&predict_options(settings)) {
        Ok(set) => {
            row.predictions = set.orbits.len();
            for o in &set.orbits {
                row.r_star.push(o.rw_star[0]);
                row.w_star.push(o.rw_star[1]);
                row.stability.push(serde_json::to_value(o.stability).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default());
                for c in o.conditions.iter().filter(|c| !c.satisfied) {
                    if !row.failed_conditions.contains(&c.name) {
                        row.failed_conditions.push(c.name.clone());
                    }
                }
            }
            for c in set.conditions.iter().filter(|c| !c.satisfied) {
                if !row.failed_conditions.contains(&c.name) {
                    row.failed_conditions.push(c.name.clone());
                }
            }
        }
        Err(e) => {
            row.failed_conditions = family.domain_conditions().into_iter().filter(|c| !c.satisfied).map(|c| c.name).collect();
            row.error = Some(e.message());
        }
    }
    row
}

fn join_f64(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(";")
}

fn write_csv(path: &Path, grids: &[Grid], rows: &[Row]) -> Result<(), Failure> {
    let io = |e: csv::Error| Failure::Usage(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let mut header = vec!["cell".to_string()];
    header.extend(grids.iter().map(|g| g.name.clone()));
    header.extend(["predictions", "r_star", "w_star", "stability", "failed_conditions", "error"].map(String::from));
    w.write_record(&header).map_err(io)?;
    for r in rows {
        let mut rec = vec![r.cell.to_string()];
        rec.extend(r.values.iter().map(|v| fmt_f64(*v)));
        rec.push(r.predictions.to_string());
        rec.push(join_f64(&r.r_star));
        rec.push(join_f64(&r.w_star));
        rec.push(r.stability.join(";"));
        rec.push(r.failed_conditions.join(";"));
        rec.push(r.error.clone().unwrap_or_default());
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

pub fn cmd_sweep(
    theorem: Theorem,
    base: &FamilyArgs,
    grids: &[Grid],
    csv_path: &Path,
    settings: &Settings,
) -> Result<SweepResults, Failure> {
    if grids.is_empty() {
        return Err(Failure::Usage("sweep needs at least one --grid".into()));
    }
    let (required, optional) = family_flags(theorem);
    for (i, g) in grids.iter().enumerate() {
        if !required.contains(&g.name.as_str()) && !optional.contains(&g.name.as_str()) {
            return Err(Failure::Usage(format!("'{}' is not a parameter of {}", g.name, theorem.as_str())));
        }
        if grids[..i].iter().any(|h| h.name == g.name) {
            return Err(Failure::Usage(format!("'{}' is gridded twice", g.name)));
        }
    }
    // base flags that are missing but gridded are fine; the rest is checked per cell
    let values = cells(grids);
    let pool = settings.pool()?;
    let rows: Vec<Row> = pool.install(|| {
        values
            .into_par_iter()
            .enumerate()
            .map(|(i, v)| run_cell(theorem, base, grids, i, v, settings))
            .collect()
    });
    write_csv(csv_path, grids, &rows)?;
    let mut histogram = BTreeMap::new();
    for r in rows.iter().filter(|r| r.error.is_none()) {
        *histogram.entry(r.predictions).or_insert(0) += 1;
    }
    Ok(SweepResults {
        csv: csv_path.display().to_string(),
        cells: rows.len(),
        errors: rows.iter().filter(|r| r.error.is_some()).count(),
        histogram,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g: Grid = "gamma=-1:1:5".parse().unwrap();
        assert_eq!(g, Grid { name: "gamma".into(), lo: -1.0, hi: 1.0, count: 5 });
        assert_eq!(g.value(4), 1.0);
        assert!("gamma=1:2".parse::<Grid>().is_err());
        assert!("gamma=1:2:0".parse::<Grid>().is_err());
        assert!("1:2:3".parse::<Grid>().is_err());
    }

    #[test]
    fn first_grid_varies_slowest() {
        let g = ["a=0:1:2".parse().unwrap(), "b=0:2:3".parse().unwrap()];
        let c = cells(&g);
        assert_eq!(c.len(), 6);
        assert_eq!(c[0], vec![0.0, 0.0]);
        assert_eq!(c[2], vec![0.0, 2.0]);
        assert_eq!(c[3], vec![1.0, 0.0]);
    }
}
