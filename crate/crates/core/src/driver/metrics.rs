use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DriverError, FunctionReport, RunConfig, RunReport};

/// One row of verification metrics per function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub function: String,
    pub status: String,
    /// Absent when timing is disabled.
    pub time_ms: Option<f64>,
    pub obligations: usize,
    pub instantiations: u64,
    pub rounds: u32,
    pub context_facts: usize,
    pub strategy: String,
    #[serde(default)]
    pub statuses: Vec<String>,
    #[serde(default)]
    pub fact_instantiations: BTreeMap<String, u64>,
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    function: String,
    status: String,
    time_ms: Option<f64>,
    obligations: usize,
    instantiations: u64,
    rounds: u32,
    context_facts: usize,
    strategy: String,
}

impl MetricsRecord {
    pub fn from_report(f: &FunctionReport, cfg: &RunConfig) -> Self {
        let mut facts: BTreeMap<String, u64> = BTreeMap::new();
        for o in &f.obligations {
            for (k, v) in &o.metrics.fact_instantiations {
                *facts.entry(k.clone()).or_default() += v;
            }
        }
        MetricsRecord {
            function: f.function.clone(),
            status: f.status.to_string(),
            time_ms: cfg.timing.then_some((f.wall_ms * 1000.0).round() / 1000.0),
            obligations: f.obligations.len(),
            instantiations: f.instantiations(),
            rounds: f.rounds(),
            context_facts: f.context_facts,
            strategy: cfg.strategy_name().to_string(),
            statuses: f.obligations.iter().map(|o| o.status.to_string()).collect(),
            fact_instantiations: facts,
        }
    }

    pub fn from_run(report: &RunReport, cfg: &RunConfig) -> Vec<Self> {
        report.functions.iter().map(|f| Self::from_report(f, cfg)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricsFormat {
    Csv,
    Json,
}

impl MetricsFormat {
    pub fn for_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => MetricsFormat::Json,
            _ => MetricsFormat::Csv,
        }
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> DriverError + '_ {
    move |source| DriverError::Io { path: path.to_path_buf(), source }
}

pub fn metrics_to_string(records: &[MetricsRecord], format: MetricsFormat) -> String {
    match format {
        MetricsFormat::Json => serde_json::to_string_pretty(records).expect("metrics serialize") + "\n",
        MetricsFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in records {
                w.serialize(CsvRow {
                    function: r.function.clone(),
                    status: r.status.clone(),
                    time_ms: r.time_ms,
                    obligations: r.obligations,
                    instantiations: r.instantiations,
                    rounds: r.rounds,
                    context_facts: r.context_facts,
                    strategy: r.strategy.clone(),
                })
                .expect("csv row");
            }
            String::from_utf8(w.into_inner().expect("csv flush")).expect("utf8")
        }
    }
}

pub fn write_metrics(path: &Path, records: &[MetricsRecord]) -> Result<(), DriverError> {
    std::fs::write(path, metrics_to_string(records, MetricsFormat::for_path(path))).map_err(io(path))
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRecord>, DriverError> {
    let text = std::fs::read_to_string(path).map_err(io(path))?;
    let bad = |e: String| DriverError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
    };
    match MetricsFormat::for_path(path) {
        MetricsFormat::Json => serde_json::from_str(&text).map_err(|e| bad(e.to_string())),
        MetricsFormat::Csv => csv::Reader::from_reader(text.as_bytes())
            .deserialize::<CsvRow>()
            .map(|row| {
                let r = row.map_err(|e| bad(e.to_string()))?;
                Ok(MetricsRecord {
                    function: r.function,
                    status: r.status,
                    time_ms: r.time_ms,
                    obligations: r.obligations,
                    instantiations: r.instantiations,
                    rounds: r.rounds,
                    context_facts: r.context_facts,
                    strategy: r.strategy,
                    statuses: Vec::new(),
                    fact_instantiations: BTreeMap::new(),
                })
            })
            .collect(),
    }
}
