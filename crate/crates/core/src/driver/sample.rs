use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{verify_function, RunConfig};
use crate::engine::Status;
use crate::minimize::{without_sites, AssertSite};
use crate::resolve::Program;
use crate::vcgen::VcEnv;

#[derive(Clone, Debug, Serialize)]
pub struct FailureSample {
    pub function: String,
    pub site: String,
    pub status: String,
    pub success_ms: f64,
    pub failure_ms: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SampleReport {
    pub samples: Vec<FailureSample>,
}

impl SampleReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for s in &self.samples {
            w.serialize(s).expect("csv row");
        }
        String::from_utf8(w.into_inner().expect("csv flush")).expect("utf8")
    }
}

/// Remove `n` randomly chosen sites one at a time and time the failing run
/// against the intact function.
pub fn sample_failures(program: &Program, sites: &[AssertSite], n: usize, seed: u64, cfg: &RunConfig) -> SampleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen: Vec<&AssertSite> = sites.choose_multiple(&mut rng, n.min(sites.len())).collect();
    let base_env = VcEnv::new(program, cfg.vc.clone());
    let mut report = SampleReport::default();
    for site in chosen {
        let ok = verify_function(&base_env, &site.function, cfg);
        let pruned = without_sites(program, &HashSet::from([site.span]));
        let env = VcEnv::new(&pruned, cfg.vc.clone());
        let bad = verify_function(&env, &site.function, cfg);
        let success_ms = ok.wall_ms.max(0.001);
        report.samples.push(FailureSample {
            function: site.function.clone(),
            site: site.span.to_string(),
            status: match bad.status {
                Status::Verified => "verified".into(),
                s => s.to_string(),
            },
            success_ms,
            failure_ms: bad.wall_ms,
            ratio: bad.wall_ms / success_ms,
        });
    }
    report
}
