pub mod bestapprox;
pub mod embeddings;
pub mod error;
pub mod exponent;
pub mod fit;
pub mod gallery;
pub mod harness;
pub mod quad;
pub mod sequences;
pub mod smoothness;
pub mod transforms;
pub mod trigpoly;

pub use bestapprox::{best_approx, Approximation};
pub use embeddings::{check_condition, CriterionReport, EmbeddingParams, Verdict};
pub use error::{Error, Result};
pub use gallery::{build_gallery, GalleryFunction, GalleryParams, Witness};
pub use harness::{
    run_catalog, run_suite, summarize, CorpusEntry, RatioReport, SuiteId, SuiteSpec, Summary,
    VerifyConfig,
};
pub use sequences::{Majorant, SequenceDescriptor};
pub use smoothness::{modulus, ModulusConfig};
pub use transforms::{lambda_beta_transform, MultiplierSpec};
pub use trigpoly::TrigPoly;
