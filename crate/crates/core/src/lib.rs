//! Structural similarity of program call graphs and family clustering.
//!
//! The pipeline: parse call graphs ([`graph`]), compare every pair with an
//! approximate graph edit distance ([`ged`]) to fill a dissimilarity matrix
//! ([`simmatrix`]), partition it with k-medoids or DBSCAN ([`clustering`]) and
//! score the result ([`quality`]). [`synth`] generates corpora with planted
//! families for evaluation.
//!
//! Similarity values are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`.

pub mod clustering;
pub mod ged;
pub mod graph;
pub mod quality;
pub mod scalar;
pub mod simmatrix;
pub mod synth;

pub use scalar::Scalar;

pub type SimilarityScore = ged::SimilarityScore<f64>;
pub type DistanceMatrix = simmatrix::DistanceMatrix<f64>;
pub type KMedoidsResult = clustering::KMedoidsResult<f64>;
pub type DbscanConfig = clustering::DbscanConfig<f64>;
pub type QualityReport = quality::QualityReport<f64>;
