//! Dual-view pyramid pooling.
//!
//! Parameter-free feature aggregation that combines spatial pooling (SP, one
//! output per channel per spatial bin) with cross-channel pooling (CCP, one
//! output per spatial position per channel group), in pyramid form and in five
//! compositions, together with the metrics used to judge the pooled features:
//! classification scores, expected calibration error, Brier score and
//! temperature scaling. A linear probe and a synthetic dual-view dataset
//! generator make end-to-end comparisons possible without a backbone network.
//!
//! ```
//! use dvpool::{dvpp, DvppConfig, FeatureMap};
//!
//! let x = FeatureMap::from_fn(vec![8, 7, 7], |i| (i % 5) as f64).unwrap();
//! let z = dvpp(&x, &DvppConfig::representative_c_ser()).unwrap();
//! assert_eq!(z.len(), 2 * 16 + 3 * 49);
//! ```

pub mod error;
pub mod io;
pub mod metrics;
pub mod pooling;
pub mod probe;
pub mod synth;
pub mod tensor;

pub use error::{Error, Result};
pub use metrics::{KappaWeighting, MetricsReport, PredictionSet, ReliabilityTable, TemperatureFit};
pub use pooling::{
    ccp_pool, dvpp, dvpp_batch, mixed_pool, output_len, pyramid, sp_pool, DvppConfig, PoolAxis, PyramidLevels,
    Reduction, Variant,
};
pub use probe::{LinearProbe, TrainSpec, TrainedProbe};
pub use synth::{SynthDataset, SynthManifest, SynthSpec};
pub use tensor::{concat, region_max, region_mean, FeatureMap, FeatureVector, Segment};
