//! Cardinality estimation over locally differentially private Bloom filters.
//!
//! Data providers encode their records into Bloom filters ([`encoding`]),
//! perturb every bit with randomized response ([`ldp`]) and ship the result
//! in the exchange format ([`exchange`]). A linkage unit pools the filters,
//! plants reference filters with known dummy copies, clusters everything
//! with k-means and picks the cluster count whose clusters keep each
//! reference together with its dummies ([`clustering`]).

pub mod bloom;
pub mod clustering;
pub mod datagen;
pub mod encoding;
pub mod error;
pub mod exchange;
pub mod ldp;
pub mod seed;
pub mod theory;

pub use bloom::BloomFilter;
pub use encoding::{
    dice_similarity, encode_record, expected_fpr, extract_qgrams, neighbor_tokens, Attribute,
    AttributeKind, Encoder, EncodingParams, PlainRecord, RecordSchema,
};
pub use error::{Error, Result};
pub use ldp::{flip_probability, perturb, perturb_dataset, EncodedDataset, PrivacyParams};
pub use clustering::{estimate_cardinality, CardinalityReport, EstimatorSettings, ReferenceConfig, ReferenceMethod};
