//! Least-squares fit of per-inner-iteration time against the IRS element
//! count, used to check that the iteration cost grows linearly in N_S.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context};

/// Ordinary least squares `y = slope * x + intercept`; returns
/// (slope, intercept, r_squared).
pub fn ols(points: &[(f64, f64)]) -> anyhow::Result<(f64, f64, f64)> {
    if points.len() < 2 {
        bail!("need at least 2 points for a line fit");
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        bail!("degenerate fit: all x values identical");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (slope * p.0 + intercept)).powi(2))
        .sum();
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok((slope, intercept, r2))
}

/// Reads a results CSV, averages `per_iter_s` per `n_s` sweep value for the
/// given solver, and fits a line through the means.
pub fn timing_regression(csv_path: &Path, solver: &str) -> anyhow::Result<(f64, f64, f64)> {
    let text = std::fs::read_to_string(csv_path)
        .with_context(|| format!("reading {}", csv_path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().context("empty CSV")?;
    let cols: Vec<&str> = header.split(',').collect();
    let idx = |name: &str| -> anyhow::Result<usize> {
        cols.iter()
            .position(|c| *c == name)
            .with_context(|| format!("CSV missing column {name}"))
    };
    let (i_var, i_val, i_solver, i_time) = (
        idx("sweep_var")?,
        idx("sweep_value")?,
        idx("solver")?,
        idx("per_iter_s")?,
    );

    // group by sweep value, keyed on the raw string to avoid float keys
    let mut groups: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != cols.len() || f[i_var] != "n_s" || f[i_solver] != solver {
            continue;
        }
        let t: f64 = f[i_time].parse().context("bad per_iter_s value")?;
        let e = groups.entry(f[i_val].to_string()).or_insert((0.0, 0));
        e.0 += t;
        e.1 += 1;
    }
    if groups.len() < 4 {
        bail!(
            "need >= 4 distinct n_s values for solver {solver}, found {}",
            groups.len()
        );
    }
    let points: Vec<(f64, f64)> = groups
        .iter()
        .map(|(k, (sum, n))| Ok((k.parse::<f64>().context("bad sweep value")?, sum / *n as f64)))
        .collect::<anyhow::Result<_>>()?;
    ols(&points)
}
