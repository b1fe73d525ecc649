//! Flag/config layering.
//!
//! Every subcommand's arguments are a flat struct of optional fields that is
//! parsed both from flags and from a JSON config file. Flags win.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::CliError;

/// Declares an argument struct usable as clap flags and as a JSON config.
macro_rules! layered {
    (
        $(#[$meta:meta])*
        pub struct $name:ident {
            $( $(#[$fmeta:meta])* $field:ident : $ty:ty, )*
        }
    ) => {
        $(#[$meta])*
        #[derive(clap::Args, serde::Deserialize, Debug, Default, Clone)]
        #[serde(deny_unknown_fields, default)]
        pub struct $name {
            /// JSON config file; flags override its values.
            #[arg(long)]
            #[serde(skip)]
            pub config: Option<std::path::PathBuf>,
            $(
                $(#[$fmeta])*
                #[arg(long)]
                pub $field: Option<$ty>,
            )*
        }

        impl $name {
            pub fn layered(self, command: &str) -> Result<Self, $crate::CliError> {
                let base: $name = match &self.config {
                    Some(path) => $crate::config::load(path, command)?,
                    None => $name::default(),
                };
                Ok($name {
                    config: self.config,
                    $( $field: self.$field.or(base.$field), )*
                })
            }
        }
    };
}

pub(crate) use layered;

/// Reads a JSON config object for `command`. An optional `"subcommand"` key must
/// name the command being run.
pub fn load<T: DeserializeOwned>(path: &Path, command: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config {} is not valid JSON: {e}", path.display())))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| CliError::Usage(format!("config {} must be a JSON object", path.display())))?;
    if let Some(sub) = obj.remove("subcommand") {
        if sub.as_str() != Some(command) {
            return Err(CliError::Usage(format!("config field `subcommand` is {sub}, but `{command}` was invoked")));
        }
    }
    serde_json::from_value(value).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

pub fn require<T>(value: Option<T>, field: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing required field `{field}`")))
}

/// Parses a tag through `FromStr`, naming the field on failure.
pub fn parse_tag<T>(value: &str, field: &str) -> Result<T, CliError>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| CliError::Usage(format!("field `{field}`: {e}")))
}

/// A distribution given either as a JSON file path or inline in a config.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DistArg {
    Path(PathBuf),
    Inline(serde_json::Value),
}

impl FromStr for DistArg {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(DistArg::Path(PathBuf::from(s)))
    }
}

impl DistArg {
    /// Loads and validates the distribution; errors name `field`.
    pub fn load<T: DeserializeOwned>(&self, field: &str) -> Result<T, CliError> {
        let (value, origin) = match self {
            DistArg::Path(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("distribution `{field}`: cannot read {}: {e}", path.display())))?;
                let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
                    CliError::Usage(format!("distribution `{field}`: {} is not valid JSON: {e}", path.display()))
                })?;
                (v, format!(" ({})", path.display()))
            }
            DistArg::Inline(v) => (v.clone(), String::new()),
        };
        serde_json::from_value(value).map_err(|e| CliError::Usage(format!("distribution `{field}`{origin}: {e}")))
    }
}
