//! Numerical harmonic analysis on periodic FFT grids.
//!
//! The crate discretizes ℝⁿ (n ∈ {1, 2}) by a uniform periodic box and
//! provides, on top of a Fourier transform with the `∫ e^{-iξ·x} f(x) dx`
//! normalization:
//!
//! * the dyadic Littlewood-Paley family `ψ(2^{-j}ξ)` and the uniform lattice
//!   family `φ(ξ - k)` ([`partitions`]),
//! * Sobolev, Besov, modulation (lattice and STFT), Herz, `FL^q` and Hardy
//!   norms of grid functions ([`norms`]),
//! * dyadic symbol pieces `m_j(ξ) = ψ(ξ) m(2^j ξ)`, their condition tables,
//!   Mihlin suprema and kernel estimates ([`multiplier`]),
//! * a catalog of symbols and reproducible input ensembles ([`fixtures`]),
//! * constant-tracking experiments for norm equivalences and embeddings
//!   ([`verify`]).
//!
//! Everything here is pure computation; file formats, configuration and the
//! command line live in the `mulspace` crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(a <= b)` is used on purpose so that NaN fails validation checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
pub mod exponent;
pub mod fft;
pub mod fixtures;
pub mod grid;
pub mod multiplier;
pub mod norms;
pub mod partitions;
pub mod symbol;
pub mod verify;

pub use crate::error::{Error, Result};
pub use crate::exponent::Exponent;
pub use crate::grid::{forward_transform, inverse_transform, lp_norm, Grid, GridFunction, Side};
pub use crate::partitions::{DyadicPartition, Partitions, UniformPartition};
pub use crate::symbol::Symbol;

pub use num_complex::Complex64;
