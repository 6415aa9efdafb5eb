use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Command};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

/// Process exit status of a failed run.
#[derive(Debug)]
pub enum CliError {
    /// Invalid flags, config file or input file (exit 2).
    Config(String),
    /// A computation failed (exit 3).
    Numerical(String),
    /// The run completed but a verification check failed (exit 1).
    Verification(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) | CliError::Verification(m) => m,
        }
    }
}

impl From<lsl_core::Error> for CliError {
    fn from(e: lsl_core::Error) -> Self {
        if e.is_input_error() {
            CliError::Config(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Top-level object of a `--config` file.
pub fn load_config(path: &Path) -> CliResult<Map<String, Value>> {
    let text = fs::read_to_string(path)
        .map_err(|e| config_error(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(config_error(format!(
            "config {} must be a JSON object",
            path.display()
        ))),
        Err(e) => Err(config_error(format!("config {}: {e}", path.display()))),
    }
}

/// Overlay the flags that were given on top of the config file. Keys are the
/// snake_case flag names; unknown keys are rejected.
pub fn merge<T: Args + Serialize + DeserializeOwned>(
    flags: &T,
    file: Option<&Map<String, Value>>,
) -> CliResult<T> {
    let known: Vec<String> = T::augment_args(Command::new("config"))
        .get_arguments()
        .map(|a| a.get_id().to_string())
        .collect();
    let mut merged = Map::new();
    if let Some(file) = file {
        for (k, v) in file {
            if !known.contains(k) {
                return Err(config_error(format!("unknown config key `{k}`")));
            }
            if !v.is_null() {
                merged.insert(k.clone(), v.clone());
            }
        }
    }
    match serde_json::to_value(flags) {
        Ok(Value::Object(given)) => merged.extend(given.into_iter().filter(|(_, v)| !v.is_null())),
        _ => unreachable!("flag structs serialize to objects"),
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| config_error(format!("config: {e}")))
}

/// Resolves output paths against `--out-dir`, then `LSL_OUT_DIR`, then the
/// working directory. Absolute paths are kept.
#[derive(Debug, Clone)]
pub struct OutputRoot(pub Option<PathBuf>);

impl OutputRoot {
    pub fn resolve(&self, file: &Path) -> PathBuf {
        match &self.0 {
            Some(root) if file.is_relative() => root.join(file),
            _ => file.to_path_buf(),
        }
    }

    pub fn write(&self, file: &Path, contents: &str) -> CliResult<PathBuf> {
        let path = self.resolve(file);
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| {
                CliError::Numerical(format!("cannot create {}: {e}", dir.display()))
            })?;
        }
        fs::write(&path, contents)
            .map_err(|e| CliError::Numerical(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }
}
