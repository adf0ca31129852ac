//! Phase-space toolkit for one-dimensional wave packets: Wigner functions,
//! Fermi `g_F` functions and their zero curves, quartic-oscillator dynamics,
//! and contour comparison metrics.

pub mod cli;
pub mod contour;
pub mod error;
pub mod fermi;
pub mod numerics;
pub mod packets;
pub mod quartic;
pub mod wigner;

pub use error::{Error, Result};
pub use packets::{make_gaussian, AnalyticPacket, PhysConfig, PolarData, SampledWavefunction};
pub use wigner::{PhaseSpaceGrid, ScalarField};
