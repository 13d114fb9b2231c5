//! Run configuration: defaults, then the `--config` JSON file, then flags.

use std::collections::hash_map::RandomState;
use std::fmt;
use std::hash::{BuildHasher, Hasher};
use std::path::{Path, PathBuf};

use clap::Args;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

/// Flags accepted by every subcommand.
#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// JSON file with any of the other flags as snake_case keys; flags win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Master seed; generated and recorded when absent.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all processors). Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Failure classes, mapped to the process exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<cfbounds::Error> for CliError {
    fn from(e: cfbounds::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

/// Settings that change how a command runs but never what it writes.
#[derive(Debug, Clone, Default)]
pub struct Exec {
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Exec {
    pub fn out(&self) -> Result<&Path, CliError> {
        self.out
            .as_deref()
            .ok_or_else(|| CliError::Usage("an output directory is required (--out)".into()))
    }
}

fn normalize_keys(v: Value) -> Value {
    match v {
        Value::Object(m) => Value::Object(
            m.into_iter()
                .map(|(k, v)| (k.replace('-', "_"), v))
                .collect(),
        ),
        other => other,
    }
}

fn load_file(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| {
        CliError::Usage(format!("config {} is not valid JSON: {e}", path.display()))
    })?;
    // An artifact written by this tool carries its resolved config under "config".
    let value = match value {
        Value::Object(mut m) if m.contains_key("config") && m.contains_key("tool") => {
            m.remove("config").unwrap()
        }
        other => other,
    };
    match normalize_keys(value) {
        Value::Object(m) => Ok(m),
        _ => Err(CliError::Usage(format!(
            "config {} must be a JSON object",
            path.display()
        ))),
    }
}

fn fresh_seed() -> u64 {
    let mut h = RandomState::new().build_hasher();
    h.write_u128(
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or(0),
    );
    h.write_u32(std::process::id());
    // Keep seeds exactly representable in JSON readers that use doubles.
    h.finish() >> 11
}

/// Merges defaults, the optional config file and explicit flags, fills in a
/// seed when none was given, and splits off the execution settings.
pub fn resolve<C>(file: Option<&Path>, flags: &impl Serialize) -> Result<(C, Exec), CliError>
where
    C: Serialize + DeserializeOwned + Default,
{
    let mut merged = match serde_json::to_value(C::default()).expect("serializable") {
        Value::Object(m) => m,
        _ => unreachable!("configs are structs"),
    };
    if let Some(path) = file {
        merged.extend(load_file(path)?);
    }
    if let Value::Object(m) = normalize_keys(serde_json::to_value(flags).expect("serializable")) {
        merged.extend(m.into_iter().filter(|(_, v)| !v.is_null()));
    }
    let out = match merged.remove("out") {
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        None | Some(Value::Null) => None,
        Some(other) => {
            return Err(CliError::Usage(format!(
                "'out' must be a path, got {other}"
            )))
        }
    };
    let threads = match merged.remove("threads") {
        Some(Value::Number(n)) => match n.as_u64() {
            Some(t) if t >= 1 => Some(t as usize),
            _ => {
                return Err(CliError::Usage(format!(
                    "'threads' must be a positive integer, got {n}"
                )))
            }
        },
        None | Some(Value::Null) => None,
        Some(other) => {
            return Err(CliError::Usage(format!(
                "'threads' must be a number, got {other}"
            )))
        }
    };
    if merged.get("seed").is_none_or(Value::is_null) {
        merged.insert("seed".into(), Value::from(fresh_seed()));
    }
    let config = serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::Usage(format!("config: {e}")))?;
    Ok((config, Exec { out, threads }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Serialize, Deserialize, PartialEq)]
    #[serde(deny_unknown_fields)]
    struct Cfg {
        seed: Option<u64>,
        runs: usize,
        law: String,
    }

    impl Default for Cfg {
        fn default() -> Self {
            Cfg {
                seed: None,
                runs: 10,
                law: "a".into(),
            }
        }
    }

    #[derive(Serialize)]
    struct Flags {
        #[serde(skip_serializing_if = "Option::is_none")]
        runs: Option<usize>,
        out: Option<String>,
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"runs": 3, "law": "b", "seed": 5, "threads": 2}"#).unwrap();
        let flags = Flags {
            runs: Some(7),
            out: Some("x".into()),
        };
        let (c, exec): (Cfg, Exec) = resolve(Some(&path), &flags).unwrap();
        assert_eq!(
            c,
            Cfg {
                seed: Some(5),
                runs: 7,
                law: "b".into()
            }
        );
        assert_eq!(exec.threads, Some(2));
        assert_eq!(exec.out.unwrap(), PathBuf::from("x"));
    }

    #[test]
    fn seed_generated_and_unknown_keys_rejected() {
        let flags = Flags {
            runs: None,
            out: None,
        };
        let (c, _): (Cfg, Exec) = resolve(None, &flags).unwrap();
        assert!(c.seed.is_some());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"bogus": 1}"#).unwrap();
        let err = resolve::<Cfg>(Some(&path), &flags).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
