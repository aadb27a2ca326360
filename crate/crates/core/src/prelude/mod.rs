//! The standard library shipped with the verifier, written in the surface
//! language and embedded at build time.

use std::path::Path;

use crate::syntax::{parse_module, ast::ProgramAst, ParseError};

/// Embedded prelude sources as (virtual path, text).
pub const SOURCES: &[(&str, &str)] = &[
    ("<prelude>/default.tv", include_str!("default.tv")),
    ("<prelude>/seq.tv", include_str!("seq.tv")),
    ("<prelude>/set.tv", include_str!("set.tv")),
    ("<prelude>/map.tv", include_str!("map.tv")),
    ("<prelude>/multiset.tv", include_str!("multiset.tv")),
];

pub const GROUP_DEFAULT: &str = "prelude::group_default";

/// The opt-in property groups, one per container type.
pub const PROPERTY_GROUPS: &[&str] = &[
    "prelude::seq::group_seq_properties",
    "prelude::set::group_set_properties",
    "prelude::map::group_map_properties",
    "prelude::multiset::group_multiset_properties",
];

pub fn load_prelude() -> Result<Vec<ProgramAst>, ParseError> {
    SOURCES
        .iter()
        .map(|(path, text)| parse_module(text, Path::new(path)))
        .collect()
}
