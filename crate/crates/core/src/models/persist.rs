use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::textprep::{FittedVectorizer, VectorizerState};

use super::{ClassifierKind, LinearKind, Model, ModelError, ModelParams, TextClassifier};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Serialize)]
struct Payload<'a> {
    format_version: u64,
    model_kind: ClassifierKind,
    class_names: &'a [String],
    vectorizer: &'a VectorizerState,
    parameters: &'a ModelParams,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u64,
    model_kind: ClassifierKind,
    class_names: Vec<String>,
    vectorizer: VectorizerState,
    parameters: ModelParams,
    checksum: String,
}

impl ModelFile {
    fn payload(&self) -> Payload<'_> {
        Payload {
            format_version: self.format_version,
            model_kind: self.model_kind,
            class_names: &self.class_names,
            vectorizer: &self.vectorizer,
            parameters: &self.parameters,
        }
    }
}

fn checksum(payload: &Payload<'_>) -> String {
    let bytes = serde_json::to_vec(payload).expect("model payload serializes");
    hex::encode(Sha256::digest(bytes))
}

fn kind_matches(kind: ClassifierKind, params: &ModelParams) -> bool {
    match (kind, params) {
        (ClassifierKind::Mnb, ModelParams::Mnb(_)) => true,
        (ClassifierKind::Rfc, ModelParams::Forest(_)) => true,
        (ClassifierKind::Lrc, ModelParams::Linear(p)) => p.kind == LinearKind::Logreg,
        (ClassifierKind::Lsvc, ModelParams::Linear(p)) => p.kind == LinearKind::SvmPegasos,
        (ClassifierKind::Sgdc, ModelParams::Linear(p)) => p.kind == LinearKind::SgdHinge,
        _ => false,
    }
}

pub fn save_model(model: &Model, vectorizer: &FittedVectorizer, path: &Path) -> Result<(), ModelError> {
    let state = vectorizer.state();
    let payload = Payload {
        format_version: FORMAT_VERSION,
        model_kind: model.kind,
        class_names: &model.class_names,
        vectorizer: &state,
        parameters: &model.params,
    };
    let file = ModelFile {
        checksum: checksum(&payload),
        format_version: FORMAT_VERSION,
        model_kind: model.kind,
        class_names: model.class_names.clone(),
        vectorizer: state.clone(),
        parameters: model.params.clone(),
    };
    let text = serde_json::to_string(&file).map_err(|e| ModelError::Format(e.to_string()))?;
    std::fs::write(path, text).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<TextClassifier, ModelError> {
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| ModelError::Checksum(format!("{}: content is truncated or corrupt ({e})", path.display())))?;
    let found = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| ModelError::Format("missing format_version".into()))?;
    if found != FORMAT_VERSION {
        return Err(ModelError::VersionMismatch {
            found,
            expected: FORMAT_VERSION,
        });
    }
    let file: ModelFile = serde_json::from_str(&text).map_err(|e| ModelError::Format(e.to_string()))?;
    let actual = checksum(&file.payload());
    if actual != file.checksum {
        return Err(ModelError::Checksum(format!(
            "{}: stored {} but content hashes to {actual}",
            path.display(),
            file.checksum
        )));
    }
    if !kind_matches(file.model_kind, &file.parameters) {
        return Err(ModelError::Format(format!(
            "model_kind {} does not match the stored parameters",
            file.model_kind
        )));
    }
    let vectorizer = FittedVectorizer::from_state(file.vectorizer)?;
    let model = Model {
        kind: file.model_kind,
        class_names: file.class_names,
        params: file.parameters,
    };
    if model.dim() != vectorizer.dim() {
        return Err(ModelError::Format(format!(
            "model dimension {} differs from vocabulary size {}",
            model.dim(),
            vectorizer.dim()
        )));
    }
    Ok(TextClassifier { vectorizer, model })
}
