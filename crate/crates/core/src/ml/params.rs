use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::MlError;

/// A hyperparameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    None,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
}

impl ParamValue {
    /// Reads `none`, booleans, integers, floats, and falls back to a string.
    pub fn parse(text: &str) -> Self {
        let t = text.trim();
        match t.to_ascii_lowercase().as_str() {
            "none" | "null" => return ParamValue::None,
            "true" => return ParamValue::Bool(true),
            "false" => return ParamValue::Bool(false),
            _ => {}
        }
        if let Ok(i) = t.parse::<i64>() {
            ParamValue::Int(i)
        } else if let Ok(f) = t.parse::<f64>() {
            ParamValue::Float(f)
        } else {
            ParamValue::Str(t.to_string())
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ParamValue::Int(i) => Some(*i as f64),
            ParamValue::Float(f) => Some(*f),
            _ => None,
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::None => f.write_str("none"),
            ParamValue::Bool(b) => write!(f, "{b}"),
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Float(x) => write!(f, "{x}"),
            ParamValue::Str(s) => f.write_str(s),
        }
    }
}

pub type Params = BTreeMap<String, ParamValue>;

/// Parameter names with their candidate values, in grid order.
pub type Grid = Vec<(String, Vec<ParamValue>)>;

/// Every combination of a grid; the first parameter varies slowest.
pub fn combinations(grid: &Grid) -> Vec<Params> {
    let mut out = vec![Params::new()];
    for (name, values) in grid {
        out = out
            .into_iter()
            .flat_map(|base| {
                values.iter().map(move |v| {
                    let mut p = base.clone();
                    p.insert(name.clone(), v.clone());
                    p
                })
            })
            .collect();
    }
    if grid.iter().any(|(_, v)| v.is_empty()) {
        out.clear();
    }
    out
}

/// Parses `name=value`.
pub fn parse_param(text: &str) -> Result<(String, ParamValue), MlError> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| MlError::Param(format!("expected name=value, got {text:?}")))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(MlError::Param(format!("missing name in {text:?}")));
    }
    Ok((k.to_string(), ParamValue::parse(v)))
}

/// Parses `C=0.1,1,10;kernel=linear,rbf`.
pub fn parse_grid(text: &str) -> Result<Grid, MlError> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|part| {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| MlError::Param(format!("expected name=v1,v2,... in {part:?}")))?;
            let values: Vec<ParamValue> = v.split(',').map(ParamValue::parse).collect();
            Ok((k.trim().to_string(), values))
        })
        .collect()
}

/// Overlays `given` on `defaults`, rejecting names the family does not know.
pub(crate) fn resolve(defaults: Params, given: &Params, family: &str) -> Result<Params, MlError> {
    let mut out = defaults;
    for (k, v) in given {
        match out.get_mut(k) {
            Some(slot) => *slot = v.clone(),
            None => return Err(MlError::Param(format!("{family} has no parameter {k:?}"))),
        }
    }
    Ok(out)
}

pub(crate) fn get_usize(p: &Params, key: &str, min: usize) -> Result<usize, MlError> {
    match p.get(key) {
        Some(ParamValue::Int(i)) if *i >= min as i64 => Ok(*i as usize),
        other => Err(MlError::Param(format!("{key} must be an integer >= {min}, got {other:?}"))),
    }
}

pub(crate) fn get_opt_usize(p: &Params, key: &str) -> Result<Option<usize>, MlError> {
    match p.get(key) {
        Some(ParamValue::None) => Ok(None),
        _ => get_usize(p, key, 1).map(Some),
    }
}

pub(crate) fn get_f64(p: &Params, key: &str) -> Result<f64, MlError> {
    p.get(key)
        .and_then(ParamValue::as_f64)
        .filter(|v| v.is_finite() && *v > 0.0)
        .ok_or_else(|| MlError::Param(format!("{key} must be a positive number, got {:?}", p.get(key))))
}

pub(crate) fn get_bool(p: &Params, key: &str) -> Result<bool, MlError> {
    match p.get(key) {
        Some(ParamValue::Bool(b)) => Ok(*b),
        other => Err(MlError::Param(format!("{key} must be true or false, got {other:?}"))),
    }
}

pub(crate) fn get_str<'a>(p: &'a Params, key: &str) -> Result<&'a str, MlError> {
    match p.get(key) {
        Some(ParamValue::Str(s)) => Ok(s),
        other => Err(MlError::Param(format!("{key} must be a word, got {other:?}"))),
    }
}

pub(crate) fn params_of<const N: usize>(pairs: [(&str, ParamValue); N]) -> Params {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

pub(crate) fn grid_of<const N: usize>(pairs: [(&str, Vec<ParamValue>); N]) -> Grid {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_parse() {
        assert_eq!(ParamValue::parse("none"), ParamValue::None);
        assert_eq!(ParamValue::parse("10"), ParamValue::Int(10));
        assert_eq!(ParamValue::parse("0.1"), ParamValue::Float(0.1));
        assert_eq!(ParamValue::parse(" rbf"), ParamValue::Str("rbf".into()));
        assert_eq!(ParamValue::parse("True"), ParamValue::Bool(true));
    }

    #[test]
    fn grid_order_first_slowest() {
        let g = parse_grid("a=1,2;b=x,y,z").unwrap();
        let combos = combinations(&g);
        assert_eq!(combos.len(), 6);
        assert_eq!(combos[1]["a"], ParamValue::Int(1));
        assert_eq!(combos[1]["b"], ParamValue::Str("y".into()));
        assert_eq!(combos[3]["a"], ParamValue::Int(2));
        assert!(combinations(&grid_of([("a", vec![])])).is_empty());
    }

    #[test]
    fn json_round_trip() {
        let p = params_of([("C", ParamValue::Float(0.5)), ("max_depth", ParamValue::None), ("kernel", ParamValue::Str("rbf".into()))]);
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<Params>(&text).unwrap(), p);
    }

    #[test]
    fn unknown_param_rejected() {
        let given = params_of([("depth", ParamValue::Int(3))]);
        assert!(resolve(params_of([("max_depth", ParamValue::None)]), &given, "dt").is_err());
    }
}
