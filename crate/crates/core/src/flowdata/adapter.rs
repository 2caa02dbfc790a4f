use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Feature names that adapters map source columns onto, so rankings from
/// different captures line up.
pub const CANONICAL_FEATURES: [&str; 12] = [
    "Fwd. Bytes",
    "Bwd. Bytes",
    "Fwd. Bytes w/ Header",
    "Bwd. Bytes w/ Header",
    "Total Bytes",
    "Packets Per Second",
    "Fwd. Packets per second",
    "Flags",
    "Communication Protocol",
    "Application protocol",
    "Destination Port",
    "Missed Bytes",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DatasetId {
    #[serde(rename = "bot-iot")]
    BotIot,
    #[serde(rename = "iot-23")]
    Iot23,
    #[serde(rename = "ton-iot")]
    TonIot,
    #[serde(rename = "custom")]
    Custom,
}

impl DatasetId {
    pub const ALL: [DatasetId; 4] = [
        DatasetId::BotIot,
        DatasetId::Iot23,
        DatasetId::TonIot,
        DatasetId::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DatasetId::BotIot => "bot-iot",
            DatasetId::Iot23 => "iot-23",
            DatasetId::TonIot => "ton-iot",
            DatasetId::Custom => "custom",
        }
    }
}

impl fmt::Display for DatasetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DatasetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DatasetId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Adapter(format!("unknown dataset id `{s}`")))
    }
}

/// Declarative mapping from one source schema onto canonical features.
///
/// Raw label values listed in `benign_values` map to 0 and everything else
/// to 1. With `exhaustive_labels` set, a value in neither `benign_values`
/// nor `malicious_values` is an error instead. Source columns absent from
/// `column_map` keep their own names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaAdapter {
    pub dataset_id: DatasetId,
    pub label_column: String,
    #[serde(default)]
    pub benign_values: BTreeSet<String>,
    #[serde(default)]
    pub malicious_values: BTreeSet<String>,
    #[serde(default)]
    pub exhaustive_labels: bool,
    #[serde(default)]
    pub drop_columns: Vec<String>,
    #[serde(default)]
    pub column_map: BTreeMap<String, String>,
}

const BOT_IOT: &str = include_str!("../../../../adapters/bot-iot.toml");
const IOT_23: &str = include_str!("../../../../adapters/iot-23.toml");
const TON_IOT: &str = include_str!("../../../../adapters/ton-iot.toml");
const CUSTOM: &str = include_str!("../../../../adapters/custom.toml");

impl SchemaAdapter {
    /// The adapter shipped under `adapters/` for `id`.
    pub fn builtin(id: DatasetId) -> SchemaAdapter {
        let text = match id {
            DatasetId::BotIot => BOT_IOT,
            DatasetId::Iot23 => IOT_23,
            DatasetId::TonIot => TON_IOT,
            DatasetId::Custom => CUSTOM,
        };
        SchemaAdapter::from_toml_str(text).expect("shipped adapter files are valid")
    }

    /// Adapter for files written in canonical form.
    pub fn canonical() -> SchemaAdapter {
        SchemaAdapter::builtin(DatasetId::Custom)
    }

    pub fn from_toml_str(text: &str) -> Result<SchemaAdapter> {
        let adapter: SchemaAdapter = toml::from_str(text).map_err(|e| Error::Adapter(e.to_string()))?;
        adapter.validate()?;
        Ok(adapter)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<SchemaAdapter> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SchemaAdapter::from_toml_str(&text)
    }

    /// Accepts a built-in id (`bot-iot`, `iot-23`, `ton-iot`, `custom`) or a
    /// path to an adapter file.
    pub fn resolve(id_or_path: &str) -> Result<SchemaAdapter> {
        match id_or_path.parse::<DatasetId>() {
            Ok(id) => Ok(SchemaAdapter::builtin(id)),
            Err(_) if Path::new(id_or_path).exists() => SchemaAdapter::from_file(id_or_path),
            Err(e) => Err(e),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.label_column.trim().is_empty() {
            return Err(Error::Adapter("label_column is empty".into()));
        }
        if self.column_map.contains_key(&self.label_column) {
            return Err(Error::Adapter(format!(
                "label column `{}` cannot also be mapped to a feature",
                self.label_column
            )));
        }
        if let Some(both) = self.benign_values.intersection(&self.malicious_values).next() {
            return Err(Error::Adapter(format!(
                "label value `{both}` is listed as benign and malicious"
            )));
        }
        let mut targets = HashSet::new();
        for target in self.column_map.values() {
            if !targets.insert(target.as_str()) {
                return Err(Error::Adapter(format!("two columns map onto `{target}`")));
            }
        }
        Ok(())
    }

    /// Feature name a source column takes after renaming.
    pub fn canonical_name<'a>(&'a self, source: &'a str) -> &'a str {
        self.column_map.get(source).map(String::as_str).unwrap_or(source)
    }

    /// `Some(0|1)` for a raw label, `None` when the value is unlisted and the
    /// adapter is exhaustive.
    pub fn map_label(&self, raw: &str) -> Option<u8> {
        if self.benign_values.contains(raw) {
            Some(0)
        } else if self.malicious_values.contains(raw) || !self.exhaustive_labels {
            Some(1)
        } else {
            None
        }
    }
}
