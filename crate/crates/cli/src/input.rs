//! Theories and maps named on the command line: stdlib keys, `stdlib:key`,
//! `id:THEORY` or file paths.

use std::fs;
use std::path::{Path, PathBuf};

use coherence_core::morphism::TheoryMorphism;
use coherence_core::parse::parse_presentation;
use coherence_core::stdlib;
use coherence_core::{Error, Result, TheoryPresentation};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn theory_in(reference: &str, dir: Option<&Path>) -> Result<TheoryPresentation> {
    if let Some(key) = reference.strip_prefix("stdlib:") {
        return stdlib::theory(key);
    }
    if stdlib::THEORY_KEYS.contains(&reference) {
        return stdlib::theory(reference);
    }
    let mut path = PathBuf::from(reference);
    if path.is_relative() {
        if let Some(d) = dir {
            let near = d.join(&path);
            if near.exists() {
                path = near;
            }
        }
    }
    if !path.exists() {
        return Err(Error::UnknownKey(reference.to_string()));
    }
    parse_presentation(&read(&path)?)
}

pub fn theory(reference: &str) -> Result<TheoryPresentation> {
    theory_in(reference, None)
}

pub fn map(reference: &str) -> Result<TheoryMorphism> {
    if let Some(t) = reference.strip_prefix("id:") {
        let p = theory(t)?;
        let mut m = TheoryMorphism::identity(&p);
        m.name = format!("id_{}", p.name);
        return Ok(m);
    }
    if let Some(key) = reference.strip_prefix("stdlib:") {
        return stdlib::morphism(key);
    }
    if stdlib::MORPHISM_KEYS.contains(&reference) {
        return stdlib::morphism(reference);
    }
    let path = Path::new(reference);
    if !path.exists() {
        return Err(Error::UnknownKey(reference.to_string()));
    }
    let dir = path.parent().map(Path::to_path_buf);
    let mut m = TheoryMorphism::from_source(&read(path)?, &|r| theory_in(r, dir.as_deref()))?;
    if let Some(stem) = path.file_stem() {
        m.name = stem.to_string_lossy().into_owned();
    }
    Ok(m)
}
