//! Run configuration: a model plus optional command parameters, merged with
//! command-line flags (flags win, `RIQ_SEED` beats `--seed`).

use std::path::Path;

use riq::model::InteractionModel;
use riq::Error;
use serde_json::{Map, Value};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FileParams {
    pub tau: Option<f64>,
    pub t: Option<f64>,
    pub lambda: Option<f64>,
    pub k_list: Option<Vec<u64>>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub model: InteractionModel,
    pub params: FileParams,
    pub seed: u64,
}

/// The file is either a bare model or `{"model": {...}, "tau": ..., ...}`.
pub fn parse_config(text: &str) -> Result<(InteractionModel, FileParams), Error> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| Error::InvalidField { field: "<root>".into(), message: e.to_string() })?;
    let Some(obj) = root.as_object() else {
        return Err(Error::InvalidField { field: "<root>".into(), message: "expected a JSON object".into() });
    };
    match obj.get("model") {
        Some(model) => Ok((InteractionModel::from_json(model).map_err(prefix_model)?, file_params(obj)?)),
        None => Ok((InteractionModel::from_json(&root)?, FileParams::default())),
    }
}

fn prefix_model(e: Error) -> Error {
    match e {
        Error::InvalidField { field, message } => Error::InvalidField { field: format!("model.{field}"), message },
        other => other,
    }
}

fn file_params(obj: &Map<String, Value>) -> Result<FileParams, Error> {
    let float = |key: &str| -> Result<Option<f64>, Error> {
        match obj.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => v
                .as_f64()
                .map(Some)
                .ok_or_else(|| Error::InvalidField { field: key.into(), message: "expected a number".into() }),
        }
    };
    let seed = match obj.get("seed") {
        None | Some(Value::Null) => None,
        Some(v) => Some(v.as_u64().ok_or_else(|| Error::InvalidField {
            field: "seed".into(),
            message: "expected a nonnegative integer".into(),
        })?),
    };
    let k_list = match obj.get("k_list") {
        None | Some(Value::Null) => None,
        Some(v) => {
            let items = v.as_array().ok_or_else(|| Error::InvalidField {
                field: "k_list".into(),
                message: "expected an array of positive integers".into(),
            })?;
            let ks = items
                .iter()
                .enumerate()
                .map(|(i, k)| {
                    k.as_u64().filter(|&k| k > 0).ok_or_else(|| Error::InvalidField {
                        field: format!("k_list[{i}]"),
                        message: "expected a positive integer".into(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Some(ks)
        }
    };
    Ok(FileParams { tau: float("tau")?, t: float("t")?, lambda: float("lambda")?, k_list, seed, tol: float("tol")? })
}

/// Loads the model from `path`, or samples one of the given dimensions from
/// the resolved seed when no path is given.
pub fn load(
    path: Option<&Path>,
    dims: Option<(usize, usize)>,
    flag_seed: Option<u64>,
    env_seed: Option<&str>,
) -> Result<RunConfig, Error> {
    let env_seed = env_seed
        .map(|s| {
            s.trim().parse::<u64>().map_err(|_| Error::InvalidField {
                field: "RIQ_SEED".into(),
                message: format!("expected a nonnegative integer, got {s:?}"),
            })
        })
        .transpose()?;
    let (model, params) = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::InvalidField {
                field: "--config".into(),
                message: format!("cannot read {}: {e}", p.display()),
            })?;
            parse_config(&text)?
        }
        None => (InteractionModel::seeded(0, 1, 1), FileParams::default()),
    };
    let seed = env_seed.or(flag_seed).or(params.seed).unwrap_or(0);
    let model = match (path, dims) {
        (Some(_), Some(_)) => {
            return Err(Error::InvalidField {
                field: "--dims".into(),
                message: "cannot be combined with --config".into(),
            })
        }
        (Some(_), None) => model,
        (None, dims) => {
            let (d, n) = dims.unwrap_or((1, 1));
            InteractionModel::seeded(seed, d, n)
        }
    };
    Ok(RunConfig { model, params, seed })
}

pub fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (d, n) = s.split_once(',').ok_or_else(|| format!("expected D,N, got {s:?}"))?;
    let parse = |x: &str| x.trim().parse::<usize>().ok().filter(|&v| v >= 1);
    match (parse(d), parse(n)) {
        (Some(d), Some(n)) => Ok((d, n)),
        _ => Err(format!("expected two integers >= 1, got {s:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MODEL: &str = r#"{"d":1,"n":1,"h0":[[[1,0],[0,0]],[[0,0],[-1,0]]],"delta":[1.5],
        "V":[[[[0,0],[0.3,0]],[[0.1,0],[0,0]]]],"beta":"inf"}"#;

    #[test]
    fn bare_and_wrapped_forms() {
        let (m, p) = parse_config(MODEL).unwrap();
        assert_eq!(m.d, 1);
        assert_eq!(p, FileParams::default());
        let wrapped = format!(r#"{{"model":{MODEL},"tau":0.5,"k_list":[4,8],"seed":3}}"#);
        let (_, p) = parse_config(&wrapped).unwrap();
        assert_eq!(p.tau, Some(0.5));
        assert_eq!(p.k_list, Some(vec![4, 8]));
        assert_eq!(p.seed, Some(3));
    }

    #[test]
    fn errors_name_fields() {
        let bad = format!(r#"{{"model":{MODEL},"k_list":[4,0]}}"#);
        assert!(parse_config(&bad).unwrap_err().to_string().contains("k_list[1]"));
        let bad = MODEL.replace(r#""delta":[1.5]"#, r#""delta":[1.5, 2]"#);
        assert!(parse_config(&bad).unwrap_err().to_string().contains("delta"));
        let bad = format!(r#"{{"model":{}}}"#, MODEL.replace(r#""d":1"#, r#""d":"x""#));
        assert!(parse_config(&bad).unwrap_err().to_string().contains("model.d"));
    }

    #[test]
    fn seed_precedence() {
        let a = load(None, Some((1, 1)), Some(4), Some("9")).unwrap();
        assert_eq!(a.seed, 9);
        let b = load(None, Some((1, 1)), Some(4), None).unwrap();
        assert_eq!(b.seed, 4);
        assert!(load(None, None, None, Some("x")).is_err());
    }

    #[test]
    fn dims_parser() {
        assert_eq!(parse_dims("2,1"), Ok((2, 1)));
        assert!(parse_dims("0,1").is_err());
        assert!(parse_dims("3").is_err());
    }
}
