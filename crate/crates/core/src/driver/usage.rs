use std::collections::BTreeSet;
use std::fmt::Write;

use crate::vcgen::{Obligation, Origin};

pub const USAGE_HEADER: &str = "checking this function used these broadcasted lemmas and broadcast groups:";

/// Broadcast facts a function's proofs relied on, and the groups that
/// brought them into scope.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Usage {
    pub groups: BTreeSet<String>,
    pub facts: BTreeSet<String>,
}

impl Usage {
    pub fn add(&mut self, ob: &Obligation, core: &BTreeSet<Origin>) {
        for origin in core {
            let Some(path) = origin.broadcast_path() else { continue };
            self.facts.insert(path.to_string());
            for f in ob.context.facts.iter().filter(|f| &f.origin == origin) {
                self.groups.extend(f.groups_via.iter().cloned());
            }
        }
    }
}

/// Header line, then groups and facts one per line, comma-separated.
pub fn format_usage(u: &Usage) -> String {
    let lines: Vec<String> = u
        .groups
        .iter()
        .map(|g| format!("(group) {g}"))
        .chain(u.facts.iter().cloned())
        .collect();
    let mut out = format!("{USAGE_HEADER}\n");
    for (i, l) in lines.iter().enumerate() {
        let comma = if i + 1 < lines.len() { "," } else { "" };
        let _ = writeln!(out, "        - {l}{comma}");
    }
    out
}
