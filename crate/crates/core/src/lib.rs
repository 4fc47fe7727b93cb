//! Simulation library for secure over-the-air computation with
//! codebook-based friendly jamming.
//!
//! A jammer transmits a random codeword. The legitimate receiver decodes
//! it with a compound-channel joint-typicality decoder (it does not know
//! the transmitters' messages, which act as the compound state) and
//! subtracts it before estimating the sum of the messages. The
//! eavesdropper cannot decode; at jamming rates above its mutual
//! information, the codebook-induced output law is close in total
//! variation to the output under i.i.d. Gaussian noise.
//!
//! All information quantities are in nats, and codebooks have
//! `ceil(exp(n R))` words.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod coding;
pub mod compound;
pub mod error;
pub mod gaussian;
pub mod harness;
pub mod info;
pub mod ota;
pub mod resolvability;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use rng::RngStream;
