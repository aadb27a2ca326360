//! Shared inputs for the benchmarks.

use std::path::{Path, PathBuf};

use tunav_core::driver::{import_item, load_workspace, RunConfig, Workspace};
use tunav_core::triggers::Strategy;

pub const PROPERTY_GROUPS: [&str; 4] = [
    "prelude::seq::group_seq_properties",
    "prelude::set::group_set_properties",
    "prelude::map::group_map_properties",
    "prelude::multiset::group_multiset_properties",
];

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// The shipped corpus, loaded with the prelude.
pub fn corpus() -> Workspace {
    let dir = workspace_root().join("corpus");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "tv"))
        .collect();
    paths.sort();
    load_workspace(&paths).expect("corpus loads")
}

pub fn fixture(name: &str) -> Workspace {
    load_workspace(&[workspace_root().join("fixtures").join(name)]).expect("fixture loads")
}

/// Named configurations compared by the benchmarks.
pub fn configs(ws: &Workspace) -> Vec<(&'static str, RunConfig)> {
    let base = RunConfig { timing: false, ..RunConfig::default() };
    let mut groups = base.clone();
    groups.vc.ambient = PROPERTY_GROUPS.iter().map(|g| import_item(&ws.program, g).unwrap()).collect();
    let mut stripped = base.clone();
    stripped.vc.strip_triggers = true;
    let mut all = stripped.clone();
    all.vc.strategy = Strategy::AllTriggers;
    vec![("default", base), ("property-groups", groups), ("stripped-conservative", stripped), ("stripped-all-triggers", all)]
}
