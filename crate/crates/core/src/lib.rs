//! Pure analysis core for co-mastered SDR and HDR frames measured against a
//! scene-referred EXR anchor.
//!
//! Everything in this crate is `no_std` (with `alloc`): transfer functions and
//! colorimetry ([`codec`]), frame decoding and sampling ([`ingest`]), the
//! isotonic luminance baseline and residual taxonomy ([`lumamap`]), ICtCp
//! colour statistics ([`chromastats`]), the EXR-anchored decision map
//! ([`decision`]) and the synthetic ground-truth generator ([`synth`]).
//! File formats, reports and the command line live in the `hdrtriad` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod chromastats;
pub mod codec;
pub mod decision;
pub mod error;
pub mod ingest;
pub mod lumamap;
pub mod pipeline;
pub mod plane;
pub mod reference;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use plane::{ActiveArea, Plane};
