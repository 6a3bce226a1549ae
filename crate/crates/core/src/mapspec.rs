//! Text records describing a map.
//!
//! ```text
//! # comment
//! family: paper        # power | chebyshev | quadratic | paper
//! lambda: 4
//! d: 2
//! ```
//!
//! or explicit coefficients in ascending powers:
//!
//! ```text
//! num: (-2, 0), (0, 0), (1, 0)
//! den: (1, 0)
//! ```

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{NamedFamily, RationalMap};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapSpec {
    Family(NamedFamily),
    Coefficients { num: Vec<Complex64>, den: Vec<Complex64> },
}

impl MapSpec {
    pub fn resolve(&self) -> Result<RationalMap> {
        match self {
            MapSpec::Family(f) => f.resolve(),
            MapSpec::Coefficients { num, den } => RationalMap::new(num.clone(), den.clone()),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut fields: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key: value`", lineno + 1)))?;
            let key = normalize_key(key.trim());
            if fields.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::Parse(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }
        let has_coeffs = fields.contains_key("num") || fields.contains_key("den");
        match (fields.get("family"), has_coeffs) {
            (Some(_), true) => Err(Error::Parse("give either `family` or `num`/`den`, not both".into())),
            (None, false) => Err(Error::Parse("missing `family` or `num`".into())),
            (None, true) => {
                check_keys(&fields, &["num", "den"])?;
                let num = parse_list(fields.get("num").ok_or_else(|| Error::Parse("missing `num`".into()))?)?;
                let den = match fields.get("den") {
                    Some(d) => parse_list(d)?,
                    None => vec![Complex64::new(1.0, 0.0)],
                };
                Ok(MapSpec::Coefficients { num, den })
            }
            (Some(family), false) => {
                let family = family.to_ascii_lowercase();
                let f = match family.as_str() {
                    "power" => {
                        check_keys(&fields, &["family", "d"])?;
                        NamedFamily::Power { d: degree(&fields)? }
                    }
                    "chebyshev" => {
                        check_keys(&fields, &["family"])?;
                        NamedFamily::Chebyshev
                    }
                    "quadratic" => {
                        check_keys(&fields, &["family", "c"])?;
                        NamedFamily::Quadratic { c: complex_field(&fields, "c")? }
                    }
                    "paper" => {
                        check_keys(&fields, &["family", "lambda", "d"])?;
                        NamedFamily::Reciprocal { lambda: complex_field(&fields, "lambda")?, d: degree(&fields)? }
                    }
                    other => return Err(Error::Parse(format!("unknown family `{other}`"))),
                };
                Ok(MapSpec::Family(f))
            }
        }
    }
}

fn normalize_key(key: &str) -> String {
    match key {
        "λ" => "lambda".into(),
        k => k.to_ascii_lowercase(),
    }
}

fn check_keys(fields: &BTreeMap<String, String>, allowed: &[&str]) -> Result<()> {
    match fields.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::Parse(format!("unexpected key `{k}`"))),
        None => Ok(()),
    }
}

fn degree(fields: &BTreeMap<String, String>) -> Result<usize> {
    let raw = fields.get("d").ok_or_else(|| Error::Parse("missing `d`".into()))?;
    raw.parse::<usize>().map_err(|_| Error::Parse(format!("`d` must be a positive integer, got `{raw}`")))
}

fn complex_field(fields: &BTreeMap<String, String>, key: &str) -> Result<Complex64> {
    let raw = fields.get(key).ok_or_else(|| Error::Parse(format!("missing `{key}`")))?;
    let list = parse_list(raw)?;
    match list.as_slice() {
        [z] => Ok(*z),
        _ => Err(Error::Parse(format!("`{key}` must be a single number or (re, im) pair"))),
    }
}

fn parse_real(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| Error::Parse(format!("not a number: `{}`", s.trim())))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Parse(format!("non-finite coefficient `{}`", s.trim())))
    }
}

/// Parses `(re, im), (re, im), …`; bare reals are accepted as `(re, 0)`.
pub fn parse_list(s: &str) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        if let Some(after) = rest.strip_prefix('(') {
            let close = after.find(')').ok_or_else(|| Error::Parse(format!("unclosed `(` in `{s}`")))?;
            let (re, im) = after[..close]
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("expected (re, im) in `{s}`")))?;
            out.push(Complex64::new(parse_real(re)?, parse_real(im)?));
            rest = after[close + 1..].trim_start();
        } else {
            let end = rest.find(',').unwrap_or(rest.len());
            out.push(Complex64::new(parse_real(&rest[..end])?, 0.0));
            rest = rest[end..].trim_start();
        }
        if let Some(after) = rest.strip_prefix(',') {
            rest = after.trim_start();
            if rest.is_empty() {
                return Err(Error::Parse(format!("trailing comma in `{s}`")));
            }
        } else if !rest.is_empty() {
            return Err(Error::Parse(format!("expected `,` before `{rest}`")));
        }
    }
    if out.is_empty() {
        return Err(Error::Parse("empty coefficient list".into()));
    }
    Ok(out)
}
