//! CSV trajectories and key=value manifests.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use fracoc::fracops::GridFn;
use fracoc::solver::SolveReport;

pub const CSV_VERSION: &str = "# fracoc-csv v1";

pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Trajectory table: `t, x, u, lambda`, then `V_p` and `W_p` columns.
pub fn trajectory_csv(r: &SolveReport) -> String {
    let mut s = String::new();
    s.push_str(CSV_VERSION);
    s.push('\n');
    let mut header = vec!["t".to_string(), "x".into(), "u".into(), "lambda".into()];
    header.extend((0..r.aux_v.len()).map(|i| format!("V{}", i + 2)));
    header.extend((0..r.aux_w.len()).map(|i| format!("W{}", i + 2)));
    s.push_str(&header.join(","));
    s.push('\n');
    let cols: Vec<&GridFn> = [&r.x, &r.u, &r.lambda].into_iter().chain(&r.aux_v).chain(&r.aux_w).collect();
    for (i, t) in r.x.grid().iter().enumerate() {
        s.push_str(&float(*t));
        for c in &cols {
            s.push(',');
            s.push_str(&float(c.values()[i]));
        }
        s.push('\n');
    }
    s
}

/// `t, x, u, lambda` columns of a trajectory CSV (extra columns ignored).
pub struct Candidate {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub lambda: Vec<f64>,
}

pub fn read_candidate(path: &Path) -> Result<Candidate> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header: Vec<&str> = lines.next().context("candidate file has no header")?.split(',').map(str::trim).collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .with_context(|| format!("candidate file has no {name:?} column"))
    };
    let idx = [col("t")?, col("x")?, col("u")?, col("lambda")?];
    let mut out = Candidate {
        t: vec![],
        x: vec![],
        u: vec![],
        lambda: vec![],
    };
    for (no, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != header.len() {
            bail!("row {} has {} fields, header has {}", no + 1, fields.len(), header.len());
        }
        let get = |i: usize| -> Result<f64> {
            fields[i]
                .parse()
                .with_context(|| format!("row {}: {:?} is not a number", no + 1, fields[i]))
        };
        out.t.push(get(idx[0])?);
        out.x.push(get(idx[1])?);
        out.u.push(get(idx[2])?);
        out.lambda.push(get(idx[3])?);
    }
    if out.t.len() < 2 {
        bail!("candidate file needs at least two rows");
    }
    Ok(out)
}

/// `key = value` lines.
pub fn manifest(entries: &[(String, String)]) -> String {
    let mut s = String::new();
    for (k, v) in entries {
        let _ = writeln!(s, "{k} = {v}");
    }
    s
}

pub fn write(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use fracoc::problems::classical_toy;
    use fracoc::solver::{solve_free_time, Route};

    #[test]
    fn trajectory_round_trip() {
        let r = solve_free_time(&classical_toy(), Route::Fractional, 2, 64, 1e-10, 1.0).unwrap();
        let csv = trajectory_csv(&r);
        assert!(csv.starts_with("# fracoc-csv v1\nt,x,u,lambda\n"));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.csv");
        write(&path, &csv).unwrap();
        let c = read_candidate(&path).unwrap();
        assert_eq!(c.t.len(), 65);
        assert_eq!(c.x, r.x.values());
        assert_eq!(c.lambda, r.lambda.values());
    }

    #[test]
    fn malformed_candidates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        write(&path, "t,x,u\n0,0,0\n1,1,1\n").unwrap();
        assert!(read_candidate(&path).is_err());
        write(&path, "t,x,u,lambda\n0,0,0,0\n1,1,1\n").unwrap();
        assert!(read_candidate(&path).is_err());
        write(&path, "t,x,u,lambda\n0,0,0,zero\n1,1,1,1\n").unwrap();
        assert!(read_candidate(&path).is_err());
    }
}
