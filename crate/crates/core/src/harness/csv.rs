use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::fmt_f64;

use super::trial::TrialReport;

/// Header of the per-trial sample-size sweep table.
pub const SWEEP_N_HEADER: &str =
    "kind,n,alpha,trial,empirical_error,bound_value,lambda2,kappa,misalignment,assumption1_ratio,residual,trial_seed,status";

/// A CSV table with a fixed header, `\n` line endings, and floats at 17
/// significant digits.
#[derive(Debug, Clone, Default)]
pub struct Table {
    header: String,
    rows: Vec<String>,
}

impl Table {
    pub fn new(header: &str) -> Self {
        Table {
            header: header.to_string(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, fields: &[Field]) {
        let line: Vec<String> = fields.iter().map(Field::render).collect();
        self.rows.push(line.join(","));
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out =
            String::with_capacity(self.header.len() + 1 + self.rows.iter().map(|r| r.len() + 1).sum::<usize>());
        out.push_str(&self.header);
        out.push('\n');
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render()).map_err(|e| Error::io(path, e))
    }
}

pub enum Field {
    F(f64),
    U(u64),
    S(String),
    B(bool),
}

impl Field {
    fn render(&self) -> String {
        match self {
            Field::F(x) => fmt_f64(*x),
            Field::U(u) => u.to_string(),
            Field::S(s) => s.clone(),
            Field::B(b) => b.to_string(),
        }
    }
}

pub fn f(x: f64) -> Field {
    Field::F(x)
}

pub fn u(x: impl Into<u64>) -> Field {
    Field::U(x.into())
}

pub fn us(x: usize) -> Field {
    Field::U(x as u64)
}

pub fn s(x: impl Into<String>) -> Field {
    Field::S(x.into())
}

pub fn b(x: bool) -> Field {
    Field::B(x)
}

pub fn sweep_n_table(rows: &[TrialReport]) -> Table {
    let mut t = Table::new(SWEEP_N_HEADER);
    for r in rows {
        t.push(&[
            s(r.kind.as_str()),
            us(r.n),
            f(r.alpha),
            us(r.trial),
            f(r.empirical_error),
            f(r.bound_value),
            f(r.lambda2),
            f(r.kappa),
            f(r.smoothness_misalignment),
            f(r.assumption1_ratio),
            f(r.stationarity_residual),
            u(r.trial_seed),
            s(r.status.clone()),
        ]);
    }
    t
}
