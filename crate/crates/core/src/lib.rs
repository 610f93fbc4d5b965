//! Gathering of asynchronous, oblivious, anonymous robots on an unoriented
//! `(ell, L)` torus grid under local-weak multiplicity detection.
//!
//! The crate is layered:
//! - [`torus`]: geometry, occupancy, configurations;
//! - [`auto`], [`view`]: symmetries and orientation-free robot views;
//! - [`classify`]: configuration taxonomy driving the protocol;
//! - [`protocol`]: the move rules (alignment, preparation, gathering);
//! - [`sim`]: asynchronous scheduler semantics with invariant hooks;
//! - [`explore`]: bounded exhaustive exploration of scheduler choices;
//! - [`scenario`]: on-disk scenario and trace formats.

pub mod auto;
pub mod explore;
pub mod sim;
pub mod protocol;
pub mod classify;
pub mod torus;
pub mod view;
