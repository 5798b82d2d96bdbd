//! Family file formats.
//!
//! JSON: `{"n": 6, "sets": [[1, 2], [3]]}` with 1-based elements.
//! Hex: a header line `n=<int>` then one hexadecimal mask per line.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::SetFamily;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyFile {
    pub n: u32,
    pub sets: Vec<Vec<u32>>,
}

impl FamilyFile {
    pub fn into_family(self) -> Result<SetFamily> {
        SetFamily::from_sets(self.n, &self.sets)
    }
}

pub fn family_from_json(text: &str) -> Result<SetFamily> {
    let file: FamilyFile = serde_json::from_str(text).map_err(|e| Error::parse(e.to_string()))?;
    file.into_family()
}

pub fn family_to_json(f: &SetFamily) -> String {
    serde_json::to_string(&FamilyFile { n: f.n(), sets: f.sets_1based() }).expect("serializable")
}

pub fn family_from_hex(text: &str) -> Result<SetFamily> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::parse("empty hex family file"))?;
    let n: u32 = header
        .strip_prefix("n=")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::parse(format!("bad header {header:?}, expected n=<int>")))?;
    let mut masks = Vec::new();
    for l in lines {
        let digits = l.strip_prefix("0x").unwrap_or(l);
        let m = u64::from_str_radix(digits, 16).map_err(|e| Error::parse(format!("{l:?}: {e}")))?;
        masks.push(m);
    }
    SetFamily::from_masks(n, masks)
}

pub fn family_to_hex(f: &SetFamily) -> String {
    let mut out = format!("n={}\n", f.n());
    for m in f.members() {
        out.push_str(&format!("{m:x}\n"));
    }
    out
}

/// Chooses the format from the first non-blank character.
pub fn parse_family(text: &str) -> Result<SetFamily> {
    if text.trim_start().starts_with('{') {
        family_from_json(text)
    } else {
        family_from_hex(text)
    }
}
