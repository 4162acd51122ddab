//! Capacity limits and modulation analysis for photon-starved optical links.
//!
//! The crate models a noisy optical channel in the regime where much less
//! than one signal photon is detected per time slot. It provides:
//!
//! - [`capacity`]: closed-form heterodyne, homodyne, and Holevo capacities
//!   under additive Gaussian background noise, together with the photon
//!   information efficiency (PIE) asymptotes in the weak-signal limit.
//! - [`photodetection`]: single-mode photocount statistics for empty
//!   (thermal) and pulsed (displaced-thermal) slots, PNR and Geiger
//!   detector models, exact samplers, and log-likelihood ratios.
//! - [`modes`]: Gauss-Hermite temporal-mode decomposition, the matched
//!   filter realized as spectral filtering, and the efficiency/selectivity
//!   trade-off of mode-selective detection.
//! - [`ppm`]: pulse position modulation under single-mode background
//!   noise — relative-entropy PIE lower bound, exact and Monte-Carlo
//!   mutual information, order optimization, and the capacity-per-unit-cost
//!   limit.
//! - [`modulation`]: PPM / FSK / BPSK-Hadamard symbol construction, the
//!   structured Hadamard receiver, and end-to-end link simulation.
//!
//! All quantities are dimensionless: signal and noise strengths are mean
//! detected photon numbers per slot, capacities are bits per slot, and PIE
//! is bits per detected signal photon. Physical-unit conversion lives only
//! in [`capacity::LinkParams`] construction.
//!
//! Stochastic operations take an explicit [`stream::RngStream`]; results
//! are bit-reproducible for a fixed seed and stream layout regardless of
//! worker count.

pub mod capacity;
pub mod modes;
pub mod modulation;
pub mod photodetection;
pub mod ppm;
pub mod stream;

mod error;

pub use error::{Error, Result};
