//! CSV readers and writers for field snapshots, radial profiles and
//! diagnostics series. Floats are written with 17 significant digits so
//! every file round-trips bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{HylosError, Result};
use crate::grid::{ComplexField, Grid};
use crate::groundstate::RadialProfile;
use crate::models::Equation;
use crate::observables::{DiagnosticsRow, DIAGNOSTICS_HEADER};

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| HylosError::Parse(format!("{s:?}: {e}")))
}

fn header_fields(line: Option<&str>, what: &str) -> Result<Vec<String>> {
    let line = line.ok_or_else(|| HylosError::Parse(format!("missing {what} header")))?;
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| HylosError::Parse(format!("{what} header must start with '#'")))?;
    Ok(body.split(',').map(|s| s.trim().to_string()).collect())
}

/// Snapshot text: `# dim,counts,lengths`, then `# <dim>,<n1 n2 ..>,<L1 L2 ..>`,
/// then one `x1[,x2[,x3]],re,im` row per node in storage order.
pub fn snapshot_to_string(field: &ComplexField) -> String {
    let grid = field.grid();
    let d = grid.dim();
    let mut out = String::from("# dim,counts,lengths\n");
    let counts: Vec<String> = grid.counts().iter().map(|n| n.to_string()).collect();
    let lengths: Vec<String> = grid.lengths().iter().map(|l| num(*l)).collect();
    let _ = writeln!(out, "# {d},{},{}", counts.join(" "), lengths.join(" "));
    for (k, z) in field.values().iter().enumerate() {
        let x = grid.point(k);
        for xi in &x[..d] {
            out.push_str(&num(*xi));
            out.push(',');
        }
        let _ = writeln!(out, "{},{}", num(z.re), num(z.im));
    }
    out
}

pub fn snapshot_from_str(text: &str) -> Result<ComplexField> {
    let mut lines = text.lines();
    let labels = header_fields(lines.next(), "snapshot")?;
    if labels != ["dim", "counts", "lengths"] {
        return Err(HylosError::Parse("snapshot header must be '# dim,counts,lengths'".into()));
    }
    let meta = header_fields(lines.next(), "snapshot grid")?;
    if meta.len() != 3 {
        return Err(HylosError::Parse("snapshot grid line needs dim,counts,lengths".into()));
    }
    let dim: usize = meta[0]
        .parse()
        .map_err(|e| HylosError::Parse(format!("dim: {e}")))?;
    let counts: Vec<usize> = meta[1]
        .split_whitespace()
        .map(|s| s.parse().map_err(|e| HylosError::Parse(format!("count {s:?}: {e}"))))
        .collect::<Result<_>>()?;
    let lengths: Vec<f64> = meta[2].split_whitespace().map(parse).collect::<Result<_>>()?;
    let grid = Grid::new(dim, &lengths, &counts)?;
    let mut values = Vec::with_capacity(grid.len());
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != dim + 2 {
            return Err(HylosError::Parse(format!(
                "snapshot row has {} columns, expected {}",
                cols.len(),
                dim + 2
            )));
        }
        values.push(Complex64::new(parse(cols[dim])?, parse(cols[dim + 1])?));
    }
    if values.len() != grid.len() {
        return Err(HylosError::Parse(format!(
            "snapshot has {} rows, grid needs {}",
            values.len(),
            grid.len()
        )));
    }
    ComplexField::new(grid, values)
}

pub fn write_snapshot(path: &Path, field: &ComplexField) -> Result<()> {
    fs::write(path, snapshot_to_string(field))?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<ComplexField> {
    snapshot_from_str(&fs::read_to_string(path)?)
}

/// Profile text: `# N,omega,equation,u0,sigma`, the values line, then `r,u` rows.
pub fn profile_to_string(profile: &RadialProfile) -> String {
    let mut out = String::from("# N,omega,equation,u0,sigma\n");
    let _ = writeln!(
        out,
        "# {},{},{},{},{}",
        profile.dim,
        num(profile.omega),
        profile.equation.name(),
        num(profile.u0()),
        num(profile.sigma)
    );
    out.push_str("r,u\n");
    for (r, u) in profile.r.iter().zip(&profile.u) {
        let _ = writeln!(out, "{},{}", num(*r), num(*u));
    }
    out
}

/// Parsed profile file: metadata plus the sampled (r, u) table.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileTable {
    pub dim: usize,
    pub omega: f64,
    pub equation: Equation,
    pub u0: f64,
    pub sigma: f64,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
}

pub fn profile_from_str(text: &str) -> Result<ProfileTable> {
    let mut lines = text.lines();
    let labels = header_fields(lines.next(), "profile")?;
    if labels != ["N", "omega", "equation", "u0", "sigma"] {
        return Err(HylosError::Parse("profile header must be '# N,omega,equation,u0,sigma'".into()));
    }
    let meta = header_fields(lines.next(), "profile values")?;
    if meta.len() != 5 {
        return Err(HylosError::Parse("profile values line needs 5 fields".into()));
    }
    let dim = meta[0]
        .parse()
        .map_err(|e| HylosError::Parse(format!("N: {e}")))?;
    let equation: Equation = meta[2].parse()?;
    let mut r = Vec::new();
    let mut u = Vec::new();
    for line in lines.filter(|l| !l.trim().is_empty() && l.trim() != "r,u") {
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| HylosError::Parse(format!("bad profile row {line:?}")))?;
        r.push(parse(a)?);
        u.push(parse(b)?);
    }
    Ok(ProfileTable {
        dim,
        omega: parse(&meta[1])?,
        equation,
        u0: parse(&meta[3])?,
        sigma: parse(&meta[4])?,
        r,
        u,
    })
}

pub fn write_profile(path: &Path, profile: &RadialProfile) -> Result<()> {
    fs::write(path, profile_to_string(profile))?;
    Ok(())
}

pub fn diagnostics_to_string(rows: &[DiagnosticsRow]) -> String {
    let mut out = String::from(DIAGNOSTICS_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv());
        out.push('\n');
    }
    out
}

pub fn diagnostics_from_str(text: &str) -> Result<Vec<DiagnosticsRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == DIAGNOSTICS_HEADER => {}
        _ => return Err(HylosError::Parse("diagnostics header mismatch".into())),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(DiagnosticsRow::from_csv)
        .collect()
}

pub fn write_diagnostics(path: &Path, rows: &[DiagnosticsRow]) -> Result<()> {
    fs::write(path, diagnostics_to_string(rows))?;
    Ok(())
}

/// Writes named columns of equal length as CSV.
pub fn write_columns(path: &Path, names: &[&str], columns: &[Vec<f64>]) -> Result<()> {
    let rows = columns.first().map_or(0, |c| c.len());
    if names.len() != columns.len() || columns.iter().any(|c| c.len() != rows) {
        return Err(HylosError::InvalidArgument("column names and lengths disagree".into()));
    }
    let mut out = names.join(",");
    out.push('\n');
    for j in 0..rows {
        let line: Vec<String> = columns.iter().map(|c| num(c[j])).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groundstate::{find_ground_state, ShootingTolerances};
    use crate::models::NonlinearModel;

    #[test]
    fn snapshot_roundtrip_is_bit_exact() {
        let g = Grid::new(2, &[3.7, 1.1], &[8, 16]).unwrap();
        let f = ComplexField::from_fn(g, |x| Complex64::new((x[0] * 1.3).sin() / 3.0, x[1].exp() * 1e-7));
        let back = snapshot_from_str(&snapshot_to_string(&f)).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn snapshot_rejects_bad_input() {
        assert!(snapshot_from_str("").is_err());
        assert!(snapshot_from_str("# dim,counts,lengths\n# 1,8,1\n0,1,2\n").is_err());
        assert!(snapshot_from_str("# dim,counts,lengths\n# 1,7,1\n").is_err());
    }

    #[test]
    fn profile_roundtrip() {
        let m = NonlinearModel::power_focusing(2.0, 4.0, 1.0, Equation::Ns).unwrap();
        let p = find_ground_state(&m, 0.5, 1, &ShootingTolerances::default()).unwrap();
        let t = profile_from_str(&profile_to_string(&p)).unwrap();
        assert_eq!(t.r, p.r);
        assert_eq!(t.u, p.u);
        assert_eq!(t.u0, p.u0());
        assert_eq!(t.equation, Equation::Ns);
        assert_eq!(t.dim, 1);
    }

    #[test]
    fn diagnostics_roundtrip() {
        let row = DiagnosticsRow {
            t: 1.0,
            energy: 2.0 / 3.0,
            charge: 1.0,
            momentum: [0.0; 3],
            angular_momentum: [0.0; 3],
            lambda: 2.0 / 3.0,
            center: [0.0; 3],
            bound_mass: 0.0,
            leakage: 0.0,
        };
        let rows = vec![row.clone(), row];
        assert_eq!(diagnostics_from_str(&diagnostics_to_string(&rows)).unwrap(), rows);
    }
}
