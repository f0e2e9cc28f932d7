//! Identification of TV programs by their visual jingles.
//!
//! Frames are reduced to luma, denoised, quantized and segmented; each
//! sampled frame of a jingle is described by a colour coherence vector
//! over its regions and a set of Harris interest points. A stream window
//! matches a catalogue entry when every sampled frame clears the fused
//! similarity threshold.

pub mod catalogue;
pub mod ccv;
pub mod config;
pub mod corpus;
pub mod error;
pub mod frame;
pub mod identifier;
pub mod io;
pub mod poi;
pub mod preprocess;
pub mod signature;
pub mod srm;
pub mod truth;

pub use catalogue::{
    load_catalogue, save_catalogue, CalibrationReport, Catalogue, CatalogueEntry, Descriptor,
};
pub use ccv::{ccv_similarity, compute_ccv, CcvSignature};
pub use error::{Error, Result};
pub use frame::GrayFrame;
pub use identifier::{
    scan_stream, scan_stream_with, Detection, MatchParams, ScanConfig, ScanOutcome, Thresholds,
    Weights,
};
pub use io::{open_frame_source, FrameFormat, FrameSource};
pub use poi::{detect_pois, poi_similarity, HarrisParams, PoiSignature};
pub use preprocess::{median_filter_3x3, quantize, QuantizedFrame};
pub use signature::{
    frame_signature, sign_segment, DescriptorParams, FrameSignature, ParamSnapshot, VideoSignature,
};
pub use srm::{segment, BoundCombination, RegionMap, SrmParams};
pub use truth::{read_truth_csv, MatchCounts, TruthRecord};
