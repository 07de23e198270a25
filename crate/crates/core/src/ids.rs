//! Parsing of the short string ids used in configs and on the command line,
//! e.g. `bimodal{mu2=0.95,sigma2=0.05}`, `sparse_rademacher{0.3}`,
//! `custom_finite{values=-1|1,probs=0.5|0.5}` or `zl:3`.

use crate::error::{Error, Result};

/// A parsed `name{arg,arg,...}` id.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedId {
    pub name: String,
    pub args: Vec<(Option<String>, String)>,
}

impl ParsedId {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let Some(open) = s.find('{') else {
            return Ok(Self {
                name: s.to_string(),
                args: Vec::new(),
            });
        };
        if !s.ends_with('}') {
            return Err(Error::Config(format!("unbalanced braces in `{s}`")));
        }
        let name = s[..open].trim().to_string();
        let inner = &s[open + 1..s.len() - 1];
        let args = inner
            .split(',')
            .map(str::trim)
            .filter(|a| !a.is_empty())
            .map(|a| match a.split_once('=') {
                Some((k, v)) => (Some(k.trim().to_string()), v.trim().to_string()),
                None => (None, a.to_string()),
            })
            .collect();
        Ok(Self { name, args })
    }

    /// Argument by key, falling back to position.
    pub fn arg(&self, key: &str, position: usize) -> Option<&str> {
        self.args
            .iter()
            .find(|(k, _)| k.as_deref() == Some(key))
            .or_else(|| {
                self.args
                    .get(position)
                    .filter(|(k, _)| k.is_none())
            })
            .map(|(_, v)| v.as_str())
    }

    pub fn f64_arg(&self, key: &str, position: usize) -> Result<f64> {
        let raw = self
            .arg(key, position)
            .ok_or_else(|| Error::Config(format!("`{}` needs argument `{key}`", self.name)))?;
        parse_f64(raw)
    }

    pub fn list_arg(&self, key: &str, position: usize) -> Result<Vec<f64>> {
        let raw = self
            .arg(key, position)
            .ok_or_else(|| Error::Config(format!("`{}` needs argument `{key}`", self.name)))?;
        raw.split('|').map(parse_f64).collect()
    }
}

pub fn parse_f64(raw: &str) -> Result<f64> {
    let raw = raw.trim();
    if let Some(rest) = raw.strip_prefix("1/sqrt(") {
        let inner = rest.trim_end_matches(')');
        return Ok(1.0 / parse_f64(inner)?.sqrt());
    }
    if let Some(rest) = raw.strip_prefix("sqrt(") {
        let inner = rest.trim_end_matches(')');
        return Ok(parse_f64(inner)?.sqrt());
    }
    raw.parse::<f64>()
        .map_err(|_| Error::Config(format!("not a number: `{raw}`")))
}
