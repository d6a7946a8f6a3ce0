//! Versioned model persistence.
//!
//! Models are stored as pretty-printed JSON: self-describing, diff-able in
//! fixtures, and portable across languages. The top-level object carries a
//! `format_version`; readers reject any version they do not know instead of
//! guessing.

use crate::mcm::{KernelModel, LinearModel};
use crate::error::Error;
use crate::Result;

/// Current on-disk format version.
pub const FORMAT_VERSION: u32 = 1;

/// Either trained model kind, tagged for serialization.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StoredModel {
    /// Hyperplane machine.
    Linear(LinearModel),
    /// Kernel-expansion machine.
    Kernel(KernelModel),
}

/// Where a model came from; everything optional, purely informational.
#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct Provenance {
    /// Source dataset path or name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    /// Slack penalty C used at training.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Gaussian width used at training.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// RNG seed of the producing run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Version of the tool that wrote the file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_version: Option<String>,
}

/// The complete on-disk document.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelFile {
    /// Format version; see [`FORMAT_VERSION`].
    pub format_version: u32,
    /// The model itself.
    pub model: StoredModel,
    /// Training provenance.
    #[serde(default)]
    pub provenance: Provenance,
}

/// Serialize a model (with provenance) to the versioned JSON document.
pub fn serialize_model(model: &StoredModel, provenance: &Provenance) -> Result<String> {
    let file = ModelFile {
        format_version: FORMAT_VERSION,
        model: model.clone(),
        provenance: provenance.clone(),
    };
    serde_json::to_string_pretty(&file)
        .map_err(|e| Error::Format(format!("cannot serialize model: {e}")))
}

/// Parse a model document, rejecting unknown format versions.
pub fn deserialize_model(text: &str) -> Result<ModelFile> {
    // Probe the version first so a future format fails with a clear
    // message instead of a field-level parse error.
    #[derive(serde::Deserialize)]
    struct VersionProbe {
        format_version: u32,
    }
    let probe: VersionProbe = serde_json::from_str(text)
        .map_err(|e| Error::Format(format!("not a model file: {e}")))?;
    if probe.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "model format version {} is not supported (this build reads version {FORMAT_VERSION})",
            probe.format_version
        )));
    }
    serde_json::from_str(text).map_err(|e| Error::Format(format!("malformed model file: {e}")))
}
