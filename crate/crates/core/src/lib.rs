//! Linear feedback coding over the real Gaussian two-way channel.
//!
//! * [`model`]: signal model, noise covariances, optimal combiners, transmit powers and
//!   the native/effective encoder mapping.
//! * [`optimizer`]: alternating minimization of the weighted transmit power under SNR
//!   targets, plus the smallest-eigenvalue checker for the `g2` sub-problem.
//! * [`baselines`]: open-loop and one-way reference schemes.
//! * [`simulator`]: Monte-Carlo link simulation of an encoder/decoder pair.
//! * [`cli`]: the `gtwc` command-line front end.

pub mod baselines;
pub mod cli;
pub mod error;
pub mod model;
pub mod optimizer;
pub mod rng;
pub mod simulator;

pub use error::{Error, Result};
pub use model::{ChannelParams, DecoderPair, EncoderPair, NativeEncoderPair, PowerReport, Targets};
