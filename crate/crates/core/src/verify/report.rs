use std::fmt::{self, Write};

use serde::Serialize;

/// A concrete input on which a check misbehaved (or came closest to it).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub input: Vec<f64>,
    /// Second input for pairwise checks such as monotonicity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paired: Option<Vec<f64>>,
    pub expected: f64,
    pub found: f64,
}

impl Witness {
    pub fn at(input: &[f64], expected: f64, found: f64) -> Self {
        Witness {
            input: input.to_vec(),
            paired: None,
            expected,
            found,
        }
    }

    pub fn pair(input: &[f64], paired: &[f64], expected: f64, found: f64) -> Self {
        Witness {
            input: input.to_vec(),
            paired: Some(paired.to_vec()),
            expected,
            found,
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x = {:?}", self.input)?;
        if let Some(p) = &self.paired {
            write!(f, ", y = {p:?}")?;
        }
        write!(f, ": expected {}, found {}", self.expected, self.found)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Number of probes evaluated.
    pub probes: u64,
    pub max_error: f64,
    /// Always present when `passed` is false; otherwise the probe with the
    /// largest error, if any error was seen.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

/// Accumulates probes of one check.
#[derive(Debug)]
pub struct Tracker {
    name: String,
    tolerance: f64,
    probes: u64,
    max_error: f64,
    worst: Option<Witness>,
    failure: Option<Witness>,
}

impl Tracker {
    pub fn new(name: impl Into<String>, tolerance: f64) -> Self {
        Tracker {
            name: name.into(),
            tolerance,
            probes: 0,
            max_error: 0.0,
            worst: None,
            failure: None,
        }
    }

    /// Records `|expected − found|` against the tolerance.
    pub fn compare(&mut self, input: &[f64], expected: f64, found: f64) {
        let err = (expected - found).abs();
        self.record(err, || Witness::at(input, expected, found));
    }

    /// Records a one-sided error (only values above zero count as errors).
    pub fn excess(&mut self, err: f64, witness: impl FnOnce() -> Witness) {
        self.record(err.max(0.0), witness);
    }

    fn record(&mut self, err: f64, witness: impl FnOnce() -> Witness) {
        self.probes += 1;
        let err = if err.is_nan() { f64::INFINITY } else { err };
        let bad = err > self.tolerance;
        if err > self.max_error || (bad && self.failure.is_none()) {
            let w = witness();
            if err > self.max_error {
                self.max_error = err;
                self.worst = Some(w.clone());
            }
            if bad && self.failure.is_none() {
                self.failure = Some(w);
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }

    pub fn finish(self) -> Check {
        let passed = self.failure.is_none();
        // Report the worst offender; the first failure is kept only as a
        // fallback so a failed check always has a witness.
        let witness = self.worst.or(self.failure);
        Check {
            name: self.name,
            passed,
            probes: self.probes,
            max_error: self.max_error,
            witness,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub title: String,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn new(title: impl Into<String>) -> Self {
        VerifyReport {
            title: title.into(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: VerifyReport) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("reports always serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.title);
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let _ = write!(
                out,
                "  {status} {} (probes {}, max error {:e})",
                c.name, c.probes, c.max_error
            );
            if let (Some(w), false) = (&c.witness, c.passed) {
                let _ = write!(out, "\n       witness {w}");
            }
            out.push('\n');
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        let _ = writeln!(out, "{} checks, {} failed", self.checks.len(), failed);
        out
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failures_carry_witnesses() {
        let mut t = Tracker::new("eq", 1e-12);
        t.compare(&[0.1], 0.5, 0.5);
        t.compare(&[0.2], 0.5, 0.4);
        t.compare(&[0.3], 0.5, 0.1);
        let c = t.finish();
        assert!(!c.passed);
        assert_eq!(c.probes, 3);
        assert!((c.max_error - 0.4).abs() < 1e-15);
        assert_eq!(c.witness.unwrap().input, vec![0.3]);
    }

    #[test]
    fn passing_check_reports_worst_probe() {
        let mut t = Tracker::new("close", 1e-3);
        t.compare(&[0.0], 1.0, 1.0 - 1e-6);
        let c = t.finish();
        assert!(c.passed);
        assert!(c.witness.is_some());
    }

    #[test]
    fn one_sided_errors() {
        let mut t = Tracker::new("mono", 0.0);
        t.excess(-0.5, || Witness::at(&[0.0], 0.0, 0.0));
        assert!(t.passed());
        t.excess(0.25, || Witness::pair(&[0.0], &[1.0], 0.5, 0.25));
        let c = t.finish();
        assert!(!c.passed);
        assert_eq!(c.witness.unwrap().paired, Some(vec![1.0]));
    }

    #[test]
    fn text_and_json() {
        let mut r = VerifyReport::new("demo");
        let mut t = Tracker::new("a", 0.0);
        t.compare(&[1.0], 1.0, 0.0);
        r.push(t.finish());
        r.push(Tracker::new("b", 0.0).finish());
        assert!(!r.passed());
        assert_eq!(r.first_failure().unwrap().name, "a");
        let text = r.to_text();
        assert!(text.contains("FAIL a"));
        assert!(text.contains("PASS b"));
        assert!(text.contains("witness x = [1.0]"));
        let json = r.to_json();
        assert_eq!(json["checks"][0]["witness"]["found"], 0.0);
        assert_eq!(json["checks"][1]["passed"], true);
    }
}
