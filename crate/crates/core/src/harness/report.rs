use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::counts::NoiseModel;
use crate::error::{Error, Result};

/// How a check affects the exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Closed-form identity; must always hold.
    Analytic,
    /// Single-run statistical criterion; expected to fail in a few percent of seeds.
    Statistical,
    /// Comparison with published measurements; reported, never fatal.
    Sanity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, kind: CheckKind, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            kind,
            passed,
            detail: detail.into(),
        }
    }
}

/// One reported number. Missing values serialise as explicit nulls.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub name: String,
    pub analytic: f64,
    pub simulated: Option<f64>,
    pub std_error: Option<f64>,
    pub published: Option<f64>,
    /// `|simulated - analytic|`
    pub deviation: Option<f64>,
    /// `|published - analytic|`
    pub published_deviation: Option<f64>,
}

impl Quantity {
    pub fn new(name: impl Into<String>, analytic: f64, simulated: Option<f64>, published: Option<f64>) -> Self {
        Quantity {
            name: name.into(),
            analytic,
            simulated,
            std_error: None,
            published,
            deviation: simulated.map(|s| (s - analytic).abs()),
            published_deviation: published.map(|p| (p - analytic).abs()),
        }
    }

    pub fn with_std_error(mut self, se: Option<f64>) -> Self {
        self.std_error = se;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateRow {
    pub state: String,
    pub quantities: Vec<Quantity>,
    /// `None` when no reconstruction was run.
    pub mle_converged: Option<bool>,
    /// Files written next to the report.
    pub files: Vec<String>,
}

impl StateRow {
    pub fn quantity(&self, name: &str) -> Option<&Quantity> {
        self.quantities.iter().find(|q| q.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureReport {
    pub figure: u8,
    pub convention: String,
    pub e_joules: f64,
    pub analytic_only: bool,
    pub noise: Option<NoiseModel>,
    pub rows: Vec<StateRow>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl FigureReport {
    /// True iff every non-sanity check passed.
    pub fn passed(&self) -> bool {
        self.checks
            .iter()
            .all(|c| c.passed || c.kind == CheckKind::Sanity)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks
            .iter()
            .filter(|c| !c.passed && c.kind != CheckKind::Sanity)
    }

    pub fn row(&self, state: &str) -> Option<&StateRow> {
        self.rows.iter().find(|r| r.state == state)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("figure{}.json", self.figure));
        std::fs::write(&path, self.to_json() + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// Short human-readable table.
    pub fn summary(&self) -> String {
        let mut out = format!("figure {} ({} convention)\n", self.figure, self.convention);
        for row in &self.rows {
            out.push_str(&format!("  {}\n", row.state));
            for q in &row.quantities {
                let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
                out.push_str(&format!(
                    "    {:<14} analytic {:.4}  simulated {:>7}  published {:>7}\n",
                    q.name,
                    q.analytic,
                    fmt(q.simulated),
                    fmt(q.published)
                ));
            }
        }
        for c in &self.checks {
            let mark = match (c.passed, c.kind) {
                (true, _) => "pass",
                (false, CheckKind::Sanity) => "note",
                (false, _) => "FAIL",
            };
            out.push_str(&format!("  [{mark}] {}: {}\n", c.name, c.detail));
        }
        for n in &self.notes {
            out.push_str(&format!("  note: {n}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(checks: Vec<Check>) -> FigureReport {
        FigureReport {
            figure: 4,
            convention: "appendix".into(),
            e_joules: 2.45e-19,
            analytic_only: true,
            noise: None,
            rows: vec![StateRow {
                state: "phi1".into(),
                quantities: vec![Quantity::new("C_d", 0.47, None, Some(0.4698))],
                mle_converged: None,
                files: vec![],
            }],
            checks,
            notes: vec![],
        }
    }

    #[test]
    fn sanity_failures_are_not_fatal() {
        let r = report(vec![
            Check::new("a", CheckKind::Analytic, true, ""),
            Check::new("s", CheckKind::Sanity, false, ""),
        ]);
        assert!(r.passed());
        let r = report(vec![Check::new("st", CheckKind::Statistical, false, "")]);
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
    }

    #[test]
    fn absent_values_are_explicit_nulls() {
        let json: serde_json::Value = serde_json::from_str(&report(vec![]).to_json()).unwrap();
        let q = &json["rows"][0]["quantities"][0];
        for key in ["analytic", "simulated", "published", "deviation", "std_error"] {
            assert!(q.get(key).is_some(), "{key}");
        }
        assert!(q["simulated"].is_null());
        assert!((q["published_deviation"].as_f64().unwrap() - 0.0002).abs() < 1e-12);
    }
}
