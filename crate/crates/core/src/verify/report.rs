use std::fmt::Write as _;

use crate::bounds::BoundResult;

/// CSV header shared by every tail experiment.
pub const CSV_HEADER: &str =
    "a,empirical,stderr,bound_theorem,bound_refined,bound_corollary,bound_chernoff,vacuous,violation";

/// One grid point of a tail experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct TailRow {
    pub a: f64,
    /// Fraction of trials with `|X - mu| >= a`.
    pub empirical: f64,
    /// `sqrt(f (1 - f) / trials)`.
    pub stderr: f64,
    pub bound_theorem: BoundResult,
    pub bound_refined: Option<BoundResult>,
    pub bound_corollary: Option<BoundResult>,
    /// Chernoff curve for fully independent variables; reference only.
    pub bound_chernoff: BoundResult,
    /// The theorem bound is `>= 1`.
    pub vacuous: bool,
    /// `empirical - 3 stderr` exceeds a valid bound.
    pub violation: bool,
}

impl TailRow {
    /// Smallest of the bounds that are valid for the experiment.
    pub fn tightest_valid_bound(&self) -> f64 {
        [Some(self.bound_theorem), self.bound_refined, self.bound_corollary]
            .into_iter()
            .flatten()
            .map(|b| b.value)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Monte Carlo tail frequencies paired with the bounds that apply.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    /// Echoed configuration, written as `# key=value` lines.
    pub config: Vec<(String, String)>,
    pub trials: u64,
    /// Rows in ascending `a`.
    pub rows: Vec<TailRow>,
}

impl ExperimentReport {
    pub fn violations(&self) -> Vec<&TailRow> {
        self.rows.iter().filter(|r| r.violation).collect()
    }

    pub fn with_config(mut self, config: Vec<(String, String)>) -> Self {
        self.config = config;
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.config {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let opt = |b: Option<BoundResult>| b.map(|b| b.value.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.a,
                r.empirical,
                r.stderr,
                r.bound_theorem.value,
                opt(r.bound_refined),
                opt(r.bound_corollary),
                r.bound_chernoff.value,
                r.vacuous,
                r.violation
            );
        }
        out
    }
}
