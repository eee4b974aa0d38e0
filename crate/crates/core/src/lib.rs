//! Image clustering on color features.
//!
//! Images are described either by color moments (mean, standard deviation
//! and skewness of each RGB plane, 9 values) or by block truncation coding
//! (the same moments over the above-mean and at-or-below-mean halves of each
//! plane, 18 values). Descriptors are grouped with seeded k-means and the
//! grouping is scored against class labels with per-class recall and
//! precision.
//!
//! ```
//! use imgclust_core::{btc_features, RgbImage};
//!
//! let img = RgbImage::new(1, 2, vec![[0, 10, 20], [100, 10, 40]]).unwrap();
//! let fv = btc_features(&img, "demo", None);
//! assert_eq!(fv.values.len(), 18);
//! assert_eq!(&fv.values[..3], &[100.0, 0.0, 0.0]);
//! ```

pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod imagery;
pub mod kmeans;
pub mod pipeline;
pub mod table;

pub use dataset::{ingest, DatasetManifest, Labeling, ManifestEntry, WANG_CLASSES};
pub use error::{DecodeError, Error, Result};
pub use evaluation::{
    evaluate, map_clusters, score, ClassScore, EvaluationReport, LabeledAssignment,
};
pub use features::{
    btc_features, btc_split, color_moments, extract, moments_of, BtcPartition, FeatureVector,
    Method, Moments,
};
pub use imagery::{decode_ppm, load_image, split_channels, ChannelSource, ChannelValues, RgbImage};
pub use kmeans::{
    init_centroids, kmeans, lloyd, nearest_centroid, Init, KMeansConfig, KMeansModel,
};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineOutput};
pub use table::{
    read_assignments, read_features, write_assignments, write_features, AssignmentRow, FeatureTable,
};
