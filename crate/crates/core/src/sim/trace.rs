use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Gradient,
    Drem,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorKind::Gradient => "gradient",
            EstimatorKind::Drem => "drem",
        })
    }
}

/// Recorded time series of one estimator run. Vector-valued quantities are
/// stored column-wise: `phi[i][row]`, `theta_hat[i][row]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorTrace {
    pub kind: EstimatorKind,
    pub theta_true: Vec<f64>,
    pub theta_init: Vec<f64>,
    pub t_on: f64,
    /// Simulation step (not the record stride).
    pub dt: f64,
    pub times: Vec<f64>,
    pub u: Vec<f64>,
    pub y: Vec<f64>,
    pub phi: Vec<Vec<f64>>,
    /// DREM runs only.
    pub psi: Option<Vec<f64>>,
    pub theta_hat: Vec<Vec<f64>>,
    pub theta_tilde: Vec<Vec<f64>>,
    /// Adaptation gated off at this row.
    pub warmup: Vec<bool>,
}

impl EstimatorTrace {
    pub(crate) fn new(
        kind: EstimatorKind,
        theta_true: Vec<f64>,
        theta_init: Vec<f64>,
        t_on: f64,
        dt: f64,
        with_psi: bool,
        rows: usize,
    ) -> Self {
        let n = theta_true.len();
        let col = || Vec::with_capacity(rows);
        Self {
            kind,
            theta_true,
            theta_init,
            t_on,
            dt,
            times: col(),
            u: col(),
            y: col(),
            phi: (0..n).map(|_| col()).collect(),
            psi: with_psi.then(col),
            theta_hat: (0..n).map(|_| col()).collect(),
            theta_tilde: (0..n).map(|_| col()).collect(),
            warmup: Vec::with_capacity(rows),
        }
    }

    pub fn n(&self) -> usize {
        self.theta_true.len()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Spacing between recorded rows.
    pub fn row_spacing(&self) -> f64 {
        if self.times.len() < 2 {
            self.dt
        } else {
            self.times[1] - self.times[0]
        }
    }

    pub fn final_theta_hat(&self) -> Vec<f64> {
        self.theta_hat
            .iter()
            .map(|c| *c.last().expect("trace is empty"))
            .collect()
    }

    pub fn header(&self) -> String {
        let n = self.n();
        let mut cols = vec!["t".to_string(), "u".into(), "y".into()];
        cols.extend((1..=n).map(|i| format!("phi_{i}")));
        if self.psi.is_some() {
            cols.push("psi".into());
        }
        cols.extend((1..=n).map(|i| format!("theta_hat_{i}")));
        cols.extend((1..=n).map(|i| format!("theta_tilde_{i}")));
        cols.push("warmup".into());
        cols.join(",")
    }

    /// Comma-separated trace with a header row; floats carry 17 significant
    /// digits so the file round-trips bit-exactly.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.header())?;
        let mut line = String::new();
        for row in 0..self.len() {
            line.clear();
            push_float(&mut line, self.times[row]);
            push_float(&mut line, self.u[row]);
            push_float(&mut line, self.y[row]);
            for c in &self.phi {
                push_float(&mut line, c[row]);
            }
            if let Some(psi) = &self.psi {
                push_float(&mut line, psi[row]);
            }
            for c in self.theta_hat.iter().chain(&self.theta_tilde) {
                push_float(&mut line, c[row]);
            }
            line.push_str(if self.warmup[row] { "1" } else { "0" });
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

fn push_float(line: &mut String, v: f64) {
    use std::fmt::Write as _;
    write!(line, "{v:.16e},").expect("writing to a String");
}
