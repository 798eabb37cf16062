//! Config files, manifests and the flag/file merge.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

pub const DEFAULT_OUT_DIR: &str = "hurstlab-out";

/// Settings shared by all subcommands.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct GlobalSection {
    pub seed: Option<u64>,
    pub strict: Option<bool>,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

/// Parsed `--config` file.
#[derive(Debug, Default)]
pub struct FileConfig {
    pub global: GlobalSection,
    pub sections: Map<String, Value>,
    /// Set when the file is a manifest from an earlier run.
    pub replay_of: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::usage(format!("--config: cannot read {}: {e}", path.display()))
        })?;
        if text.trim_start().starts_with('{') {
            return Self::from_manifest(&text, path);
        }
        let table: toml::Table = toml::from_str(&text)
            .map_err(|e| CliError::usage(format!("--config: {}: {e}", path.display())))?;
        let Value::Object(mut sections) =
            serde_json::to_value(table).map_err(|e| CliError::usage(format!("--config: {e}")))?
        else {
            unreachable!("a TOML table converts to a JSON object")
        };
        let global = match sections.remove("global") {
            Some(v) => section_from(&v, "global")?,
            None => GlobalSection::default(),
        };
        for (name, v) in &sections {
            if !v.is_object() {
                return Err(CliError::usage(format!(
                    "--config: `{name}` must be a [section] of key = value entries"
                )));
            }
        }
        Ok(Self {
            global,
            sections,
            replay_of: None,
        })
    }

    fn from_manifest(text: &str, path: &Path) -> Result<Self, CliError> {
        let m: Value = serde_json::from_str(text).map_err(|e| {
            CliError::usage(format!(
                "--config: {} is not valid JSON: {e}",
                path.display()
            ))
        })?;
        let field = |k: &str| {
            m.get(k)
                .ok_or_else(|| CliError::usage(format!("--config: manifest lacks `{k}`")))
        };
        let sub = field("subcommand")?
            .as_str()
            .ok_or_else(|| CliError::usage("--config: manifest `subcommand` must be a string"))?
            .to_string();
        let global =
            GlobalSection {
                seed: Some(field("seed")?.as_u64().ok_or_else(|| {
                    CliError::usage("--config: manifest `seed` must be an integer")
                })?),
                strict: Some(field("strict")?.as_bool().ok_or_else(|| {
                    CliError::usage("--config: manifest `strict` must be a boolean")
                })?),
                ..Default::default()
            };
        let mut sections = Map::new();
        sections.insert(sub.clone(), field("config")?.clone());
        Ok(Self {
            global,
            sections,
            replay_of: Some(sub),
        })
    }
}

/// Deserialize one section, naming the offending key on failure.
pub fn section_from<A: DeserializeOwned>(v: &Value, name: &str) -> Result<A, CliError> {
    let obj = v.as_object().ok_or_else(|| {
        CliError::usage(format!("--config: [{name}] must hold key = value entries"))
    })?;
    for (k, x) in obj {
        let mut one = Map::new();
        one.insert(k.clone(), x.clone());
        if let Err(e) = serde_json::from_value::<A>(Value::Object(one)) {
            return Err(CliError::usage(format!("--config: [{name}] --{k}: {e}")));
        }
    }
    serde_json::from_value(v.clone())
        .map_err(|e| CliError::usage(format!("--config: [{name}]: {e}")))
}

/// Settings from the file section, overridden by every flag given on the command line.
pub fn merge<A: Serialize + DeserializeOwned>(
    flags: &A,
    section: Option<&Value>,
    name: &str,
) -> Result<A, CliError> {
    let mut base = match section {
        Some(v) => {
            section_from::<A>(v, name)?;
            v.as_object().cloned().unwrap_or_default()
        }
        None => Map::new(),
    };
    let Value::Object(given) =
        serde_json::to_value(flags).expect("flag structs serialize to objects")
    else {
        unreachable!("flag structs serialize to objects")
    };
    for (k, v) in given {
        if !v.is_null() {
            base.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(base))
        .map_err(|e| CliError::usage(format!("[{name}]: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::CovarianceArgs;
    use serde_json::json;

    #[test]
    fn flags_override_file_values() {
        let flags = CovarianceArgs {
            u: Some(3.0),
            ..Default::default()
        };
        let merged: CovarianceArgs =
            merge(&flags, Some(&json!({"u": 1.0, "v": 2.0})), "covariance").unwrap();
        assert_eq!((merged.u, merged.v), (Some(3.0), Some(2.0)));
    }

    #[test]
    fn bad_keys_are_named() {
        let err = merge(
            &CovarianceArgs::default(),
            Some(&json!({"w": 1.0})),
            "covariance",
        )
        .unwrap_err();
        assert!(err.to_string().contains("--w"), "{err}");
        let err = merge(
            &CovarianceArgs::default(),
            Some(&json!({"u": "x"})),
            "covariance",
        )
        .unwrap_err();
        assert!(err.to_string().contains("--u"), "{err}");
    }
}
