//! Machine-readable reports emitted by the command line.
//!
//! Rational-mode runs serialize their certified endpoints as decimal
//! strings: the lower endpoint and point estimate round toward zero
//! coverage (down), the upper endpoint rounds up, so the printed interval
//! still contains the true value after truncation to the report digit
//! budget. Float-mode runs emit plain JSON numbers. The `exact` marker
//! distinguishes the two so downstream tooling never mistakes a float for
//! a certificate.
//!
//! Field order is fixed by the struct declarations and every value
//! round-trips, so parsing a report and re-serializing it is
//! byte-identical.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::estimate::{EstimateOutcome, EstimateValues};
use crate::numeric::{decimal_str, rat_to_f64, Rat, Round, REPORT_DIGITS};

fn dec(x: &Rat, round: Round) -> Value {
    Value::String(decimal_str(x, REPORT_DIGITS, round).0)
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn value_text(v: &Value) -> String {
    match v {
        Value::Null => "uncertified".to_string(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Report for one estimating run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub mode: String,
    pub n: usize,
    pub start: String,
    /// Point estimate; equals the certified lower endpoint.
    pub estimate: Value,
    pub lower: Value,
    /// Null when the run cannot certify an upper endpoint.
    pub upper: Value,
    pub trunc_n: usize,
    /// A-priori tail bound implied by the truncation depth.
    pub delta_apriori: Value,
    /// Observed tail bound (twice the largest pre-cap gap).
    pub delta_empirical: Value,
    pub backend: String,
    /// True when the run carried exact rational arithmetic end to end.
    pub exact: bool,
    pub wallclock_ms: u64,
}

impl Report {
    pub fn from_outcome(
        mode: &str,
        start: &str,
        out: &EstimateOutcome,
        wallclock_ms: u64,
    ) -> Report {
        let (estimate, upper, delta_empirical, exact) = match &out.values {
            EstimateValues::Rational {
                estimate,
                upper,
                delta_empirical,
            } => (
                dec(estimate, Round::Down),
                upper.as_ref().map_or(Value::Null, |u| dec(u, Round::Up)),
                dec(delta_empirical, Round::Up),
                true,
            ),
            EstimateValues::Float {
                estimate,
                upper,
                delta_empirical,
            } => (
                num(*estimate),
                upper.map_or(Value::Null, num),
                num(*delta_empirical),
                false,
            ),
        };
        let delta_apriori = if exact {
            dec(&out.trunc.err_bound, Round::Up)
        } else {
            num(rat_to_f64(&out.trunc.err_bound))
        };
        Report {
            mode: mode.to_string(),
            n: out.n,
            start: start.to_string(),
            lower: estimate.clone(),
            estimate,
            upper,
            trunc_n: out.trunc.n_trunc,
            delta_apriori,
            delta_empirical,
            backend: out.backend.as_str().to_string(),
            exact,
            wallclock_ms,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("mode:            {}\n", self.mode));
        s.push_str(&format!("n:               {}\n", self.n));
        s.push_str(&format!("start:           {}\n", self.start));
        s.push_str(&format!("estimate:        {}\n", value_text(&self.estimate)));
        s.push_str(&format!("lower:           {}\n", value_text(&self.lower)));
        s.push_str(&format!("upper:           {}\n", value_text(&self.upper)));
        s.push_str(&format!("trunc_n:         {}\n", self.trunc_n));
        s.push_str(&format!("delta_apriori:   {}\n", value_text(&self.delta_apriori)));
        s.push_str(&format!("delta_empirical: {}\n", value_text(&self.delta_empirical)));
        s.push_str(&format!("backend:         {}\n", self.backend));
        s.push_str(&format!("exact:           {}\n", self.exact));
        s.push_str(&format!("wallclock_ms:    {}\n", self.wallclock_ms));
        s
    }
}

/// Report for one Monte Carlo oracle run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub mode: String,
    pub n: usize,
    pub start: String,
    pub samples: u64,
    pub mean: f64,
    pub std_dev: f64,
    pub half_width_99: f64,
    pub seed: u64,
    pub wallclock_ms: u64,
}

/// Report for one exact-oracle run (decimal strings round down; `exact`
/// says whether they are exact renderings of the rational values).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactOracleReport {
    pub mode: String,
    pub n: usize,
    pub start: String,
    pub cover_return: String,
    pub cover: String,
    pub exact: bool,
    pub wallclock_ms: u64,
}

impl ExactOracleReport {
    pub fn new(
        n: usize,
        start: &str,
        cover_return: &Rat,
        cover: &Rat,
        wallclock_ms: u64,
    ) -> Self {
        let (cr, cr_exact) = decimal_str(cover_return, REPORT_DIGITS, Round::Down);
        let (c, c_exact) = decimal_str(cover, REPORT_DIGITS, Round::Down);
        ExactOracleReport {
            mode: "oracle-exact".to_string(),
            n,
            start: start.to_string(),
            cover_return: cr,
            cover: c,
            exact: cr_exact && c_exact,
            wallclock_ms,
        }
    }
}

/// Report for one hitting-time query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingReport {
    pub mode: String,
    pub n: usize,
    pub from: String,
    pub to: String,
    pub value: String,
    pub exact: bool,
    pub wallclock_ms: u64,
}
