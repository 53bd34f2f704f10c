//! Pseudo-depth aware multi-object tracking.
//!
//! Detections are lifted to depth boxes using the distance from their
//! bottom edge to the bottom of a virtual view stacked below the image.
//! Tracklets carry a 9-state Kalman filter that includes that
//! pseudo-depth, and association combines depth-volume IoU, a quantized
//! pseudo-depth cost and observation-centric velocity consistency,
//! followed by a recovery stage on the last observations.

pub mod association;
pub mod cli;
pub mod error;
pub mod evalsynth;
pub mod geometry;
pub mod io;
pub mod motion;
pub mod tracker;

pub use error::{Error, Result};
pub use geometry::{BBox, DepthBox, ViewGeometry};
pub use io::TrackerConfig;
pub use motion::AffineTransform;
pub use tracker::{Detection, FrameResult, TrackEntry, Tracker};
