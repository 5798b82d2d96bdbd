//! Typed access to the JSON parameter objects of operations.

use std::collections::BTreeMap;

use serde_json::Value;
use sforge::io::FamilyFile;
use sforge::scalar::parse_rational;
use sforge::sunflower::{CoreMode, CorePredicate};
use sforge::{Domain, DomainSpec, Mask, Rational, SetFamily};

use crate::CliError;

pub struct Params<'a> {
    pub value: &'a Value,
    pub handles: &'a BTreeMap<String, SetFamily>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl<'a> Params<'a> {
    pub fn new(value: &'a Value, handles: &'a BTreeMap<String, SetFamily>) -> Self {
        Params { value, handles }
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.value.get(key).filter(|v| !v.is_null())
    }

    pub fn has(&self, key: &str) -> bool {
        self.get(key).is_some()
    }

    pub fn opt_u64(&self, key: &str) -> Result<Option<u64>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.as_u64().map(Some).ok_or_else(|| usage(format!("{key} must be a nonnegative integer"))),
        }
    }

    pub fn u64(&self, key: &str) -> Result<u64, CliError> {
        self.opt_u64(key)?.ok_or_else(|| usage(format!("missing parameter {key}")))
    }

    pub fn u32(&self, key: &str) -> Result<u32, CliError> {
        u32::try_from(self.u64(key)?).map_err(|_| usage(format!("{key} is too large")))
    }

    pub fn opt_u32(&self, key: &str) -> Result<Option<u32>, CliError> {
        self.opt_u64(key)?.map(|v| u32::try_from(v).map_err(|_| usage(format!("{key} is too large")))).transpose()
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        Ok(self.u64(key)? as usize)
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, CliError> {
        Ok(self.opt_u64(key)?.unwrap_or(default))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.as_bool().ok_or_else(|| usage(format!("{key} must be a boolean"))),
        }
    }

    pub fn str(&self, key: &str) -> Result<&'a str, CliError> {
        self.get(key).and_then(Value::as_str).ok_or_else(|| usage(format!("missing string parameter {key}")))
    }

    pub fn opt_rational(&self, key: &str) -> Result<Option<Rational>, CliError> {
        let Some(v) = self.get(key) else { return Ok(None) };
        let text = match v {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            _ => return Err(usage(format!("{key} must be a number or a fraction string"))),
        };
        Ok(Some(parse_rational(&text)?))
    }

    pub fn rational(&self, key: &str) -> Result<Rational, CliError> {
        self.opt_rational(key)?.ok_or_else(|| usage(format!("missing parameter {key}")))
    }

    pub fn set(&self, key: &str) -> Result<Mask, CliError> {
        match self.get(key) {
            None => Ok(0),
            Some(v) => set_from_value(v).ok_or_else(|| usage(format!("{key} must be a list of elements in 1..=64"))),
        }
    }

    pub fn family(&self, key: &str) -> Result<SetFamily, CliError> {
        let v = self.get(key).ok_or_else(|| usage(format!("missing family parameter {key}")))?;
        family_from_value(v, self.handles)
    }

    pub fn families(&self, key: &str) -> Result<Vec<SetFamily>, CliError> {
        let v = self.get(key).and_then(Value::as_array).ok_or_else(|| usage(format!("{key} must be a list of families")))?;
        v.iter().map(|f| family_from_value(f, self.handles)).collect()
    }

    pub fn domain(&self, key: &str) -> Result<Domain, CliError> {
        let v = self.get(key).ok_or_else(|| usage(format!("missing domain parameter {key}")))?;
        let spec = match v {
            Value::String(s) => parse_domain_shorthand(s)?,
            _ => serde_json::from_value::<DomainSpec>(v.clone()).map_err(|e| usage(format!("bad domain: {e}")))?,
        };
        Ok(Domain::new(spec)?)
    }

    /// `s` plus `core` (`exact:<c>`, `atmost:<c>`, `any`) and `degenerate`.
    pub fn predicate(&self, default_core: Option<CoreMode>) -> Result<CorePredicate, CliError> {
        let s = self.usize("s")?;
        let mode = match self.get("core") {
            Some(Value::String(c)) => c.parse::<CoreMode>()?,
            Some(_) => return Err(usage("core must be a string such as exact:1")),
            None => default_core.ok_or_else(|| usage("missing parameter core"))?,
        };
        let pred = CorePredicate { mode, s, degenerate_small_sets: false };
        Ok(if self.bool_or("degenerate", false)? { pred.with_degenerate() } else { pred })
    }
}

pub fn set_from_value(v: &Value) -> Option<Mask> {
    v.as_array()?.iter().try_fold(0u64, |acc, e| {
        let e = e.as_u64()?;
        (1..=64).contains(&e).then(|| acc | 1 << (e - 1))
    })
}

pub fn family_from_value(v: &Value, handles: &BTreeMap<String, SetFamily>) -> Result<SetFamily, CliError> {
    match v {
        Value::String(name) => {
            let name = name.strip_prefix('$').unwrap_or(name);
            handles.get(name).cloned().ok_or_else(|| usage(format!("unknown family handle {name:?}")))
        }
        _ => {
            let file: FamilyFile = serde_json::from_value(v.clone()).map_err(|e| CliError::Core(sforge::Error::parse(e.to_string())))?;
            Ok(file.into_family()?)
        }
    }
}

/// `binomial:n:k`, `sequences:n:k`, `kpartite:n:p1,p2,...`, `permutations:n`.
pub fn parse_domain_shorthand(s: &str) -> Result<DomainSpec, CliError> {
    if s.trim_start().starts_with('{') {
        return serde_json::from_str(s).map_err(|e| usage(format!("bad domain: {e}")));
    }
    let parts: Vec<&str> = s.split(':').collect();
    let num = |i: usize| -> Result<u32, CliError> {
        parts.get(i).and_then(|p| p.trim().parse().ok()).ok_or_else(|| usage(format!("bad domain shorthand {s:?}")))
    };
    match parts[0].trim().to_ascii_lowercase().as_str() {
        "binomial" => Ok(DomainSpec::Binomial { n: num(1)?, k: num(2)? }),
        "sequences" => Ok(DomainSpec::Sequences { n: num(1)?, k: num(2)? }),
        "permutations" => Ok(DomainSpec::Permutations { n: num(1)? }),
        "kpartite" => {
            let list = parts.get(2).ok_or_else(|| usage(format!("bad domain shorthand {s:?}")))?;
            let ps = list
                .split(',')
                .map(|x| x.trim().parse().map_err(|_| usage(format!("bad part size in {s:?}"))))
                .collect::<Result<Vec<u32>, _>>()?;
            Ok(DomainSpec::KpartiteProduct { n: num(1)?, parts: ps })
        }
        other => Err(usage(format!("unknown domain kind {other:?}"))),
    }
}
