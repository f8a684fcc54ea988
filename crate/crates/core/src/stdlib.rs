//! Built-in theories and morphisms.

use crate::error::{Error, Result};
use crate::morphism::TheoryMorphism;
use crate::parse::parse_presentation;
use crate::presentation::TheoryPresentation;

pub const THEORY_KEYS: &[&str] = &[
    "fin",
    "bin",
    "assoc",
    "mon",
    "mon_nounit",
    "smon",
    "smon_nounit",
    "strfsh",
    "braid",
];

pub const MORPHISM_KEYS: &[&str] = &[
    "assoc_to_mon",
    "mon_to_smon",
    "mon_to_smon_unital",
    "bin_to_mon",
    "bin_to_smon",
    "bin_to_strfsh",
    "strfsh_to_smon",
    "strfsh_to_mon",
];

#[derive(Clone, Debug)]
pub struct NamedTheory {
    pub key: &'static str,
    pub presentation: TheoryPresentation,
    pub notes: &'static str,
}

pub fn theory_source(key: &str) -> Result<&'static str> {
    Ok(match key {
        "fin" => include_str!("../theories/fin.2th"),
        "bin" => include_str!("../theories/bin.2th"),
        "assoc" => include_str!("../theories/assoc.2th"),
        "mon" => include_str!("../theories/mon.2th"),
        "mon_nounit" => include_str!("../theories/mon_nounit.2th"),
        "smon" => include_str!("../theories/smon.2th"),
        "smon_nounit" => include_str!("../theories/smon_nounit.2th"),
        "strfsh" => include_str!("../theories/strfsh.2th"),
        "braid" => include_str!("../theories/braid.2th"),
        other => return Err(Error::UnknownKey(other.to_string())),
    })
}

pub fn morphism_source(key: &str) -> Result<&'static str> {
    Ok(match key {
        "assoc_to_mon" => include_str!("../theories/assoc_to_mon.2map"),
        "mon_to_smon" => include_str!("../theories/mon_to_smon.2map"),
        "mon_to_smon_unital" => include_str!("../theories/mon_to_smon_unital.2map"),
        "bin_to_mon" => include_str!("../theories/bin_to_mon.2map"),
        "bin_to_smon" => include_str!("../theories/bin_to_smon.2map"),
        "bin_to_strfsh" => include_str!("../theories/bin_to_strfsh.2map"),
        "strfsh_to_smon" => include_str!("../theories/strfsh_to_smon.2map"),
        "strfsh_to_mon" => include_str!("../theories/strfsh_to_mon.2map"),
        other => return Err(Error::UnknownKey(other.to_string())),
    })
}

fn notes(key: &str) -> &'static str {
    match key {
        "fin" => "initial theory: no operations",
        "bin" => "one binary operation, no 2-cells",
        "assoc" => "binary operation with an associator and no coherence",
        "mon" => "monoidal: associator, unitors, pentagon and triangle",
        "mon_nounit" => "monoidal without unit: associator and pentagon",
        "smon" => "strict monoidal",
        "smon_nounit" => "strictly associative binary operation",
        "strfsh" => "starfish: a binary operation, a strictly associative one and an iso between them",
        "braid" => "braided, experimental",
        _ => "",
    }
}

pub fn named(key: &str) -> Result<NamedTheory> {
    let src = theory_source(key)?;
    let key = THEORY_KEYS
        .iter()
        .find(|k| **k == key)
        .copied()
        .expect("known key");
    Ok(NamedTheory {
        key,
        presentation: parse_presentation(src)?,
        notes: notes(key),
    })
}

pub fn theory(key: &str) -> Result<TheoryPresentation> {
    parse_presentation(theory_source(key)?)
}

pub fn morphism(key: &str) -> Result<TheoryMorphism> {
    let mut m = TheoryMorphism::from_source(morphism_source(key)?, &|r| resolve(r))?;
    m.name = key.to_string();
    Ok(m)
}

/// Resolves a `stdlib:key` reference.
pub fn resolve(reference: &str) -> Result<TheoryPresentation> {
    match reference.strip_prefix("stdlib:") {
        Some(k) => theory(k),
        None => theory(reference),
    }
}
