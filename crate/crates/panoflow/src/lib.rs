//! Panoramic optical flow toolkit.
//!
//! Machinery for working with dense optical flow on 180°×360° equirectangular
//! panoramas, where the left and right image borders are physically adjacent
//! and motion may wrap across them:
//!
//! - [`flow`] - flow-field and panorama containers, Middlebury `.flo` I/O,
//!   backward warping, end-point-error metrics, and color-wheel visualization
//!   with saturation falloff for large displacements.
//! - [`spherical`] - equirectangular geometry: pixel↔sphere maps, conversion of
//!   classical flow to wrapped 360° flow, cubemap stitching, and analytic
//!   rotation ground truth.
//! - [`distortion`] - radial distortion models and the joint image/flow
//!   distortion augmentation that corrects flow endpoints through the inverse
//!   map before resampling.
//! - [`backend`] - the estimator abstraction (encode / decode split) with a
//!   built-in census-based coarse-to-fine matcher and a file-backed adapter
//!   for externally computed flows.
//! - [`cfe`] - cyclic flow estimation: half-width feature regrouping, dual
//!   decoding, per-pixel shortest-vector selection, and its ablation modes.
//! - [`synthetic`] - deterministic synthetic panorama pairs with exact ground
//!   truth and condition-tagged mini-datasets for evaluation.
//!
//! See the crate `examples/` directory for one runnable example per major
//! capability; the `panoflow` binary exposes the same operations as
//! subcommands.

pub mod backend;
pub mod cfe;
pub mod distortion;
pub mod error;
pub mod flow;
pub mod spherical;
pub mod synthetic;

pub use backend::{BuiltinMatcher, EstimatorBackend, FileBackend};
pub use cfe::{cyclic_estimate, CfeMode};
pub use distortion::{DistortionModel, DistortionVariant};
pub use error::{Error, Result};
pub use flow::{EquirectImage, EvalReport, FlowField, FlowRepresentation};
pub use spherical::{CubeFaceSet, RotationSpec, SphereDirection};
pub use synthetic::{SyntheticScene, TextureKind, WeatherCondition};
