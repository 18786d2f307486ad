//! Serializable experiment results and their CSV renderings.
//!
//! Floats are written with Rust's shortest round-trip formatting, which is
//! locale independent and uses `.` as the decimal separator.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::percolation::{ConnectivityCurve, CurvePoint, Estimate, ThresholdEstimate};

/// One Monte Carlo estimate, with its closed form when one is known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEstimate {
    pub strategy: String,
    pub quantity: String,
    /// Number of repeaters, for chain rows.
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub repeaters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_edge: Option<f64>,
    pub value: f64,
    pub stderr: f64,
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<f64>,
    /// `optimal` when the closed form is a proven optimum, `achieved` when it
    /// is only the value of this strategy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_status: Option<String>,
}

impl ReportEstimate {
    pub fn new(strategy: &str, quantity: &str, est: Estimate) -> Self {
        Self {
            strategy: strategy.to_string(),
            quantity: quantity.to_string(),
            repeaters: None,
            p_edge: None,
            value: est.mean,
            stderr: est.stderr,
            trials: est.trials,
            exact: None,
            exact_status: None,
        }
    }

    pub fn with_exact(mut self, exact: f64, status: &str) -> Self {
        self.exact = Some(exact);
        self.exact_status = Some(status.to_string());
        self
    }

    pub fn with_p_edge(mut self, p: Option<f64>) -> Self {
        self.p_edge = p;
        self
    }

    pub fn with_repeaters(mut self, n: usize) -> Self {
        self.repeaters = Some(n);
        self
    }

    pub fn estimate(&self) -> Estimate {
        Estimate {
            mean: self.value,
            stderr: self.stderr,
            trials: self.trials,
        }
    }

    /// Distance from the closed form in standard errors, if there is one.
    pub fn sigmas_from_exact(&self) -> Option<f64> {
        self.exact.map(|x| self.estimate().sigmas_from(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCurve {
    pub strategy: String,
    pub quantity: String,
    pub points: Vec<CurvePoint>,
}

/// Result of one protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub protocol: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub repeaters: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    pub estimates: Vec<ReportEstimate>,
    #[serde(default)]
    pub curves: Vec<ReportCurve>,
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl ProtocolReport {
    pub fn new(protocol: &str, trials: usize, seed: u64) -> Self {
        Self {
            protocol: protocol.to_string(),
            lambda1: None,
            coeffs: None,
            size: None,
            repeaters: None,
            trials,
            seed,
            estimates: Vec::new(),
            curves: Vec::new(),
            constants: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn find(&self, strategy: &str, quantity: &str) -> Option<&ReportEstimate> {
        self.estimates
            .iter()
            .find(|e| e.strategy == strategy && e.quantity == quantity)
    }

    /// Estimates lying more than `sigmas` standard errors from their closed form.
    pub fn closed_form_violations(&self, sigmas: f64) -> Vec<&ReportEstimate> {
        self.estimates
            .iter()
            .filter(|e| e.sigmas_from_exact().is_some_and(|s| s > sigmas))
            .collect()
    }

    /// One row per estimate.
    pub fn estimates_csv(&self) -> String {
        let mut out =
            String::from("strategy,quantity,N,lambda1,L,trials,seed,p_edge,value,stderr,exact,exact_status\n");
        for e in &self.estimates {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                e.strategy,
                e.quantity,
                opt(e.repeaters.or(self.repeaters)),
                opt(self.lambda1),
                opt(self.size),
                e.trials,
                self.seed,
                opt(e.p_edge),
                e.value,
                e.stderr,
                opt(e.exact),
                e.exact_status.as_deref().unwrap_or(""),
            );
        }
        out
    }

    /// One row per curve point, or `None` if the report has no curves.
    pub fn curves_csv(&self) -> Option<String> {
        if self.curves.is_empty() {
            return None;
        }
        let mut out = String::from("strategy,quantity,x,p_hat,stderr,trials\n");
        for c in &self.curves {
            for pt in &c.points {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    c.strategy, c.quantity, pt.x, pt.p_hat, pt.stderr, pt.trials
                );
            }
        }
        Some(out)
    }
}

pub fn curve_csv(curve: &ConnectivityCurve) -> String {
    let mut out = String::from("x,p_hat,stderr,trials\n");
    for pt in &curve.points {
        let _ = writeln!(out, "{},{},{},{}", pt.x, pt.p_hat, pt.stderr, pt.trials);
    }
    out
}

pub fn thresholds_csv(estimates: &[ThresholdEstimate]) -> String {
    let mut out = String::from("kind,L,p_th_hat,stderr,trials,reference\n");
    for t in estimates {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            t.kind,
            t.size,
            t.p_th_hat,
            t.stderr,
            t.trials,
            opt(t.kind.bond_threshold()),
        );
    }
    out
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
