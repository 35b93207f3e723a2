//! Sequential decoding of convolutional codes over channels with
//! insertions, deletions and substitutions.
//!
//! ```
//! use idsfano::channel::transmit_many;
//! use idsfano::convcode::lookup;
//! use idsfano::fano::DecoderContext;
//! use idsfano::{ChannelParams, DecoderConfig};
//!
//! # fn main() -> idsfano::Result<()> {
//! let code = lookup("CC1")?.code;
//! let params = ChannelParams::new(0.01, 0.01, 0.0)?;
//! let info = vec![1, 0, 1, 1, 0, 0, 1, 0];
//! let sent = code.encode_terminated(&info)?;
//! let received = transmit_many(params, &sent, 2, 42)?;
//!
//! let ctx = DecoderContext::new(&code, params, DecoderConfig::default(), info.len())?;
//! let result = ctx.fano(&received, &[])?;
//! assert!(result.completed);
//! # Ok(())
//! # }
//! ```

pub mod bits;
pub mod channel;
pub mod convcode;
pub mod cutoff;
pub mod error;
pub mod fano;
pub mod harness;
pub mod lattice;
pub mod viterbi;

pub use channel::{derive_seed, frame_rng, ChannelParams, ReceivedSet};
pub use convcode::{CodeSpec, EncoderState, NamedCode};
pub use error::{Error, Result};
pub use fano::{DecodeResult, DecoderConfig, MetricMode};
pub use lattice::{CriticalPoint, LatticeTable};
