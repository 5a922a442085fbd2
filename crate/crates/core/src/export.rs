//! CSV export of sampled runs for plotting pipelines.

use std::io::Write;

use crate::analysis::Run;
use crate::error::{Error, Result};
use crate::game::{faces, SymmetricGame};
use crate::simplex::SimplexPoint;

fn io(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

/// `count` equally spaced times from 0 to `end` inclusive (at least two).
pub fn uniform_times(end: f64, count: usize) -> Vec<f64> {
    let last = count.max(2) - 1;
    (0..=last).map(|k| end * k as f64 / last as f64).collect()
}

/// Header `t,x1,...,xN,lambda,mu,avg_payoff`.
pub fn csv_header(n: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=n).map(|i| format!("x{i}")));
    h.extend(["lambda", "mu", "avg_payoff"].map(String::from));
    h
}

/// Writes the run sampled at `times`. `lambda` and `mu` (the masses of
/// `{1,2,3}` and `{5,6,7}`) are filled in for 7-strategy games only.
pub fn write_run_csv<W: Write>(out: W, g: &SymmetricGame, run: Run<'_>, times: &[f64]) -> Result<()> {
    let n = g.n();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(n)).map_err(io)?;
    for &t in times {
        let x = match run {
            Run::Br(s) => s.state_at(t)?,
            Run::Rep(tr) => tr.state_at(t)?,
        };
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: x.len() });
        }
        let p = SimplexPoint::from_trusted(x.clone());
        let mut row = vec![t.to_string()];
        row.extend(x.iter().map(f64::to_string));
        if n == 7 {
            row.push(p.mass(faces::first()).to_string());
            row.push(p.mass(faces::g77_second()).to_string());
        } else {
            row.extend([String::new(), String::new()]);
        }
        row.push(g.average_payoff(&p)?.to_string());
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(io)
}
