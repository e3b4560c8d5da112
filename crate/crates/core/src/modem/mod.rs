//! Bit-level chain: convolutional coding, Gray-mapped QAM, and max-log LLR
//! soft demapping.

pub mod constellation;
pub mod convcode;
pub mod llr;

pub use constellation::{Constellation, Modulation};
pub use convcode::{conv_encode, viterbi_soft_decode, CodecSpec};
pub use llr::{maxlog_llr, LlrFrame, LLR_CLAMP};
