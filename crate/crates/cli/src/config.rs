//! Flag/file merging and the exit-code contract.

use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use symmlab::Error;

pub const USAGE: i32 = 2;
pub const SOLVER: i32 = 3;
pub const FAILED: i32 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub msg: String,
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure {
            code: USAGE,
            msg: msg.into(),
        }
    }

    /// Solver-side errors get code 3, everything else is a usage problem.
    pub fn from_core(e: Error) -> Self {
        let code = match e {
            Error::Convergence(_)
            | Error::Topology(_)
            | Error::Descent { .. }
            | Error::DegenerateDomain(_) => SOLVER,
            _ => USAGE,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::from_core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

pub type CliResult<T> = Result<T, Failure>;

/// Reads a JSON config file. A top-level key named after the subcommand
/// selects that section; otherwise the whole object applies.
pub fn load(path: &Path, section: &str) -> CliResult<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    match v {
        Value::Object(mut map) => match map.remove(section) {
            Some(sub @ Value::Object(_)) => Ok(sub),
            Some(_) => Err(Failure::usage(format!(
                "config section {section:?} must be an object"
            ))),
            None => Ok(Value::Object(map)),
        },
        _ => Err(Failure::usage("config file must hold a JSON object")),
    }
}

/// Overlays the flags given on the command line onto the file values.
pub fn merge<T: Serialize + DeserializeOwned>(file: Option<Value>, flags: &T) -> CliResult<T> {
    let mut base = match file {
        Some(Value::Object(m)) => m,
        _ => Default::default(),
    };
    if let Value::Object(over) =
        serde_json::to_value(flags).map_err(|e| Failure::usage(e.to_string()))?
    {
        base.extend(over);
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| Failure::usage(format!("config: {e}")))
}

pub fn is_false(b: &bool) -> bool {
    !*b
}
