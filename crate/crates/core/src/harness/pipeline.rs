//! A fitted encoder plus classifier (or a sequence model) saved as one JSON
//! artifact. Floats round-trip exactly, so a reloaded pipeline scores
//! bit-identically.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifiers::{train_model, Classifier, ModelKind, TrainConfig, TrainedModel};
use crate::data::{LabeledDataset, Utterance};
use crate::encoders::{fit_encoder, Encoder, EncoderResources, EncoderSpec, FittedEncoder};
use crate::error::{Error, Result};
use crate::recurrent::SequenceModel;

pub const ARTIFACT_FORMAT: &str = "intentgrid-pipeline";
pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum PipelineBody {
    Vector { encoder: FittedEncoder, model: TrainedModel },
    Sequence { model: SequenceModel },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    format: String,
    version: u32,
    body: PipelineBody,
}

impl Pipeline {
    pub fn vector(encoder: FittedEncoder, model: TrainedModel) -> Result<Self> {
        Error::check_dim(model.input_dim(), encoder.dim())?;
        Ok(Self::wrap(PipelineBody::Vector { encoder, model }))
    }

    pub fn sequence(model: SequenceModel) -> Self {
        Self::wrap(PipelineBody::Sequence { model })
    }

    fn wrap(body: PipelineBody) -> Self {
        Pipeline {
            format: ARTIFACT_FORMAT.into(),
            version: ARTIFACT_VERSION,
            body,
        }
    }

    pub fn body(&self) -> &PipelineBody {
        &self.body
    }

    pub fn labels(&self) -> &[String] {
        match &self.body {
            PipelineBody::Vector { model, .. } => model.labels(),
            PipelineBody::Sequence { model } => model.labels(),
        }
    }

    pub fn predict_scores(&self, u: &Utterance) -> Vec<f64> {
        match &self.body {
            PipelineBody::Vector { encoder, model } => model
                .predict_scores(&encoder.encode(u))
                .expect("encoder and model dimensions checked at construction"),
            PipelineBody::Sequence { model } => model.predict_scores(u),
        }
    }

    pub fn predict(&self, u: &Utterance) -> String {
        let scores = self.predict_scores(u);
        self.labels()[crate::numerics::argmax(&scores)].clone()
    }

    pub fn predict_text(&self, text: &str) -> String {
        self.predict(&Utterance::new(text))
    }

    pub fn predict_all(&self, ds: &LabeledDataset) -> Vec<String> {
        ds.utterances().map(|u| self.predict(u)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("pipeline serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Header {
            format: String,
            version: u32,
        }
        let header: Header =
            serde_json::from_str(text).map_err(|e| Error::Artifact(format!("not a pipeline artifact: {e}")))?;
        if header.format != ARTIFACT_FORMAT {
            return Err(Error::Artifact(format!("unknown format {:?}", header.format)));
        }
        if header.version != ARTIFACT_VERSION {
            return Err(Error::Artifact(format!(
                "unsupported version {} (this build reads {ARTIFACT_VERSION})",
                header.version
            )));
        }
        let p: Pipeline = serde_json::from_str(text).map_err(|e| Error::Artifact(e.to_string()))?;
        if let PipelineBody::Vector { encoder, model } = &p.body {
            if encoder.dim() != model.input_dim() {
                return Err(Error::Artifact(format!(
                    "encoder produces {} features, model expects {}",
                    encoder.dim(),
                    model.input_dim()
                )));
            }
        }
        Ok(p)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Fits `encoder` and trains `kind` on all of `train`.
pub fn fit_pipeline(
    train: &LabeledDataset,
    encoder: &EncoderSpec,
    kind: ModelKind,
    cfg: &TrainConfig,
    resources: &mut EncoderResources,
    seed: u64,
) -> Result<Pipeline> {
    let enc = fit_encoder(encoder, train, resources)?;
    let x = enc.encode_all(train);
    let model = train_model(kind, &x, &train.label_strings(), cfg, seed)?;
    Pipeline::vector(enc, model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_codemix;

    #[test]
    fn artifact_round_trip_is_bit_identical() {
        let ds = generate_codemix(2, 15);
        let cfg = TrainConfig {
            hidden: (8, 8),
            ..Default::default()
        };
        for kind in [ModelKind::LogReg, ModelKind::Ffnn, ModelKind::Knn] {
            let p = fit_pipeline(&ds, &EncoderSpec::Tfidf, kind, &cfg, &mut EncoderResources::new(1), 3).unwrap();
            let back = Pipeline::from_json(&p.to_json()).unwrap();
            assert_eq!(back, p);
            for u in ds.utterances().chain([&Utterance::new("zzz unseen")]) {
                let (a, b) = (p.predict_scores(u), back.predict_scores(u));
                assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
            }
        }
    }

    #[test]
    fn bad_artifacts_are_rejected() {
        assert!(matches!(Pipeline::from_json("{}"), Err(Error::Artifact(_))));
        let other = r#"{"format":"something-else","version":1,"body":{}}"#;
        assert!(matches!(Pipeline::from_json(other), Err(Error::Artifact(_))));
        let future = r#"{"format":"intentgrid-pipeline","version":99,"body":{}}"#;
        let err = Pipeline::from_json(future).unwrap_err();
        assert!(err.to_string().contains("version 99"), "{err}");
    }
}
