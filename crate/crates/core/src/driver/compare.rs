use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use thiserror::Error;

use super::MetricsRecord;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("metrics cover different functions: {}", .0.join(", "))]
pub struct CompareError(pub Vec<String>);

#[derive(Clone, Debug, PartialEq)]
pub struct Ratio {
    pub function: String,
    pub time_a: Option<f64>,
    pub time_b: Option<f64>,
    /// `time_b / time_a`; absent without timings.
    pub ratio: Option<f64>,
    pub instantiations_a: u64,
    pub instantiations_b: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    pub rows: Vec<Ratio>,
    pub median: Option<f64>,
    pub p90: Option<f64>,
    pub max: Option<f64>,
    pub over_2x: usize,
    pub instantiations_a: u64,
    pub instantiations_b: u64,
}

/// Times below this are clamped before dividing.
const MIN_TIME_MS: f64 = 0.001;

/// Nearest-rank percentile of sorted `xs`.
fn percentile(xs: &[f64], p: f64) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let rank = ((p * xs.len() as f64).ceil() as usize).clamp(1, xs.len());
    Some(xs[rank - 1])
}

pub fn compare_metrics(a: &[MetricsRecord], b: &[MetricsRecord]) -> Result<CompareReport, CompareError> {
    let ma: BTreeMap<&str, &MetricsRecord> = a.iter().map(|r| (r.function.as_str(), r)).collect();
    let mb: BTreeMap<&str, &MetricsRecord> = b.iter().map(|r| (r.function.as_str(), r)).collect();
    let ka: BTreeSet<&str> = ma.keys().copied().collect();
    let kb: BTreeSet<&str> = mb.keys().copied().collect();
    let diff: Vec<String> = ka.symmetric_difference(&kb).map(|s| s.to_string()).collect();
    if !diff.is_empty() {
        return Err(CompareError(diff));
    }
    let rows: Vec<Ratio> = a
        .iter()
        .map(|ra| {
            let rb = mb[ra.function.as_str()];
            let ratio = match (ra.time_ms, rb.time_ms) {
                (Some(x), Some(y)) => Some(y.max(MIN_TIME_MS) / x.max(MIN_TIME_MS)),
                _ => None,
            };
            Ratio {
                function: ra.function.clone(),
                time_a: ra.time_ms,
                time_b: rb.time_ms,
                ratio,
                instantiations_a: ra.instantiations,
                instantiations_b: rb.instantiations,
            }
        })
        .collect();
    let mut ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    Ok(CompareReport {
        median: percentile(&ratios, 0.5),
        p90: percentile(&ratios, 0.9),
        max: ratios.last().copied(),
        over_2x: ratios.iter().filter(|&&r| r > 2.0).count(),
        instantiations_a: rows.iter().map(|r| r.instantiations_a).sum(),
        instantiations_b: rows.iter().map(|r| r.instantiations_b).sum(),
        rows,
    })
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.3}")).unwrap_or_default()
}

impl CompareReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["function", "time_a", "time_b", "ratio", "instantiations_a", "instantiations_b"])
            .expect("csv header");
        for r in &self.rows {
            w.write_record([
                r.function.clone(),
                opt(r.time_a),
                opt(r.time_b),
                opt(r.ratio),
                r.instantiations_a.to_string(),
                r.instantiations_b.to_string(),
            ])
            .expect("csv row");
        }
        String::from_utf8(w.into_inner().expect("csv flush")).expect("utf8")
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "functions: {}", self.rows.len());
        let _ = writeln!(out, "median ratio: {}", opt(self.median));
        let _ = writeln!(out, "p90 ratio: {}", opt(self.p90));
        let _ = writeln!(out, "max ratio: {}", opt(self.max));
        let _ = writeln!(out, "ratio > 2: {}", self.over_2x);
        let _ = writeln!(out, "instantiations: {} -> {}", self.instantiations_a, self.instantiations_b);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(f: &str, t: Option<f64>, inst: u64) -> MetricsRecord {
        MetricsRecord {
            function: f.into(),
            status: "verified".into(),
            time_ms: t,
            obligations: 1,
            instantiations: inst,
            rounds: 1,
            context_facts: 0,
            strategy: "conservative".into(),
            statuses: vec![],
            fact_instantiations: BTreeMap::new(),
        }
    }

    #[test]
    fn identical_runs_have_unit_ratios() {
        let a = vec![rec("f", Some(3.0), 4), rec("g", Some(0.5), 1)];
        let r = compare_metrics(&a, &a).unwrap();
        assert!(r.rows.iter().all(|x| x.ratio == Some(1.0)));
        assert_eq!((r.median, r.max, r.over_2x), (Some(1.0), Some(1.0), 0));
    }

    #[test]
    fn summary_statistics() {
        let a: Vec<_> = (1..=10).map(|i| rec(&format!("f{i}"), Some(1.0), 1)).collect();
        let b: Vec<_> = (1..=10).map(|i| rec(&format!("f{i}"), Some(i as f64), 2)).collect();
        let r = compare_metrics(&a, &b).unwrap();
        assert_eq!(r.median, Some(5.0));
        assert_eq!(r.p90, Some(9.0));
        assert_eq!(r.max, Some(10.0));
        assert_eq!(r.over_2x, 8);
        assert_eq!((r.instantiations_a, r.instantiations_b), (10, 20));
    }

    #[test]
    fn mismatched_sets_are_listed() {
        let a = vec![rec("f", None, 0), rec("g", None, 0)];
        let b = vec![rec("g", None, 0), rec("h", None, 0)];
        assert_eq!(compare_metrics(&a, &b), Err(CompareError(vec!["f".into(), "h".into()])));
    }
}
