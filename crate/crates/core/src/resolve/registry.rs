use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;

use super::{FnDef, GroupDef, ResolveError, ResolveErrorKind, UseItem, UseKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactId(pub u32);

/// A fact reached through a list of use items, with the groups it came
/// through (outermost first; several import routes are merged).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImportedFact {
    pub fact: FactId,
    pub path: String,
    pub groups_via: Vec<String>,
}

pub const DEFAULT_GROUP: &str = "prelude::group_default";

#[derive(Clone, Debug, Default)]
pub struct BroadcastRegistry {
    facts: IndexMap<String, FactId>,
    paths: Vec<String>,
    members: IndexMap<String, Vec<UseItem>>,
    flat: BTreeMap<String, BTreeSet<FactId>>,
}

impl BroadcastRegistry {
    pub(super) fn build(fns: &IndexMap<String, FnDef>, groups: &IndexMap<String, GroupDef>) -> Result<Self, ResolveError> {
        let mut reg = BroadcastRegistry::default();
        for (path, def) in fns {
            if def.is_broadcast() {
                let id = FactId(reg.paths.len() as u32);
                reg.paths.push(path.clone());
                reg.facts.insert(path.clone(), id);
            }
        }
        for (path, g) in groups {
            reg.members.insert(path.clone(), g.members.clone());
        }
        for (path, g) in groups {
            let mut stack = Vec::new();
            reg.flatten_checked(path, &mut stack).map_err(|cycle| {
                ResolveError::new(
                    ResolveErrorKind::CyclicGroup,
                    g.span,
                    format!("cyclic broadcast groups: {}", cycle.join(" -> ")),
                )
            })?;
        }
        Ok(reg)
    }

    fn flatten_checked(&mut self, group: &str, stack: &mut Vec<String>) -> Result<BTreeSet<FactId>, Vec<String>> {
        if let Some(done) = self.flat.get(group) {
            return Ok(done.clone());
        }
        if let Some(i) = stack.iter().position(|g| g == group) {
            let mut cycle = stack[i..].to_vec();
            cycle.push(group.to_string());
            return Err(cycle);
        }
        stack.push(group.to_string());
        let mut out = BTreeSet::new();
        for m in self.members[group].clone() {
            match m.kind {
                UseKind::Fact => {
                    out.insert(self.facts[&m.path]);
                }
                UseKind::Group => out.extend(self.flatten_checked(&m.path, stack)?),
            }
        }
        stack.pop();
        self.flat.insert(group.to_string(), out.clone());
        Ok(out)
    }

    pub fn fact_id(&self, path: &str) -> Option<FactId> {
        self.facts.get(path).copied()
    }

    pub fn fact_path(&self, id: FactId) -> &str {
        &self.paths[id.0 as usize]
    }

    pub fn fact_count(&self) -> usize {
        self.paths.len()
    }

    pub fn has_group(&self, path: &str) -> bool {
        self.members.contains_key(path)
    }

    pub fn group_paths(&self) -> impl Iterator<Item = &String> {
        self.members.keys()
    }

    pub fn group_members(&self, path: &str) -> &[UseItem] {
        self.members.get(path).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Transitive fact membership of a group.
    pub fn flatten(&self, group: &str) -> BTreeSet<FactId> {
        self.flat.get(group).cloned().unwrap_or_default()
    }

    /// The auto-imported group, if the prelude defines it.
    pub fn default_items(&self) -> Vec<UseItem> {
        if self.has_group(DEFAULT_GROUP) {
            vec![UseItem {
                path: DEFAULT_GROUP.to_string(),
                kind: UseKind::Group,
                span: crate::syntax::SourceSpan::default(),
            }]
        } else {
            Vec::new()
        }
    }

    /// Facts reached by `items`, in first-import order.
    pub fn expand(&self, items: &[UseItem]) -> Vec<ImportedFact> {
        let mut out: Vec<ImportedFact> = Vec::new();
        for item in items {
            self.expand_into(item, &mut Vec::new(), &mut out);
        }
        out
    }

    fn expand_into(&self, item: &UseItem, via: &mut Vec<String>, out: &mut Vec<ImportedFact>) {
        match item.kind {
            UseKind::Fact => {
                let id = self.facts[&item.path];
                match out.iter_mut().find(|f| f.fact == id) {
                    Some(existing) => {
                        for g in via.iter() {
                            if !existing.groups_via.contains(g) {
                                existing.groups_via.push(g.clone());
                            }
                        }
                    }
                    None => out.push(ImportedFact {
                        fact: id,
                        path: item.path.clone(),
                        groups_via: via.clone(),
                    }),
                }
            }
            UseKind::Group => {
                via.push(item.path.clone());
                for m in self.group_members(&item.path) {
                    self.expand_into(m, via, out);
                }
                via.pop();
            }
        }
    }
}
