use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{input, json_error, CliError, CliResult};

/// Prefix of environment overrides: `GMTK_EPS=0.1` sets the top-level key `eps`.
pub const ENV_PREFIX: &str = "GMTK_";

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn overlay(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => overlay(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, t) => *b = t,
    }
}

/// Scalars from `GMTK_<KEY>` for top-level scalar keys.
fn env_overrides(obj: &mut Map<String, Value>, lookup: &dyn Fn(&str) -> Option<String>) -> CliResult<()> {
    for (key, slot) in obj.iter_mut() {
        let var = format!("{ENV_PREFIX}{}", key.to_uppercase());
        let Some(text) = lookup(&var) else { continue };
        *slot = match slot {
            Value::Number(_) | Value::Null => {
                let parsed: Value = serde_json::from_str(text.trim()).map_err(|_| input(format!("{var}: `{text}` is not a number")))?;
                if !parsed.is_number() {
                    return Err(input(format!("{var}: `{text}` is not a number")));
                }
                parsed
            }
            Value::Bool(_) => Value::Bool(text.trim().parse().map_err(|_| input(format!("{var}: `{text}` is not a boolean")))?),
            Value::String(_) => Value::String(text),
            _ => continue,
        };
    }
    Ok(())
}

/// Defaults, then the config file, then environment overrides, then
/// `--seed` if the schema has a top-level `seed`. Unknown keys are rejected
/// by the target type.
pub fn load<T: Serialize + DeserializeOwned + Default>(path: Option<&Path>, seed: Option<u64>) -> CliResult<T> {
    load_with(path, seed, &|k| std::env::var(k).ok())
}

pub fn load_with<T: Serialize + DeserializeOwned + Default>(path: Option<&Path>, seed: Option<u64>, lookup: &dyn Fn(&str) -> Option<String>) -> CliResult<T> {
    let mut merged = serde_json::to_value(T::default()).map_err(|e| input(e.to_string()))?;
    if let Some(p) = path {
        let text = read_text(p)?;
        let file: Value = serde_json::from_str(&text).map_err(|e| json_error(&p.display().to_string(), e))?;
        if !file.is_object() {
            return Err(input(format!("{}: config must be a JSON object", p.display())));
        }
        overlay(&mut merged, file);
    }
    if let Value::Object(obj) = &mut merged {
        env_overrides(obj, lookup)?;
        if let (Some(s), Some(slot)) = (seed, obj.get_mut("seed")) {
            *slot = Value::from(s);
        }
    }
    let where_ = path.map_or_else(|| "config".to_string(), |p| p.display().to_string());
    serde_json::from_value(merged).map_err(|e| input(format!("{where_}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Default, Serialize, Deserialize, PartialEq)]
    #[serde(default, deny_unknown_fields)]
    struct Demo {
        seed: u64,
        eps: f64,
        name: String,
    }

    #[test]
    fn env_and_seed_override() {
        let lookup = |k: &str| match k {
            "GMTK_EPS" => Some("0.25".to_string()),
            "GMTK_NAME" => Some("disc".to_string()),
            _ => None,
        };
        let d: Demo = load_with(None, Some(9), &lookup).unwrap();
        assert_eq!(
            d,
            Demo {
                seed: 9,
                eps: 0.25,
                name: "disc".into()
            }
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"eps": 0.1, "epsilon": 2}"#).unwrap();
        let err = load_with::<Demo>(Some(&p), None, &|_| None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn bad_env_number_is_an_input_error() {
        let err = load_with::<Demo>(None, None, &|k| (k == "GMTK_EPS").then(|| "small".to_string())).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
