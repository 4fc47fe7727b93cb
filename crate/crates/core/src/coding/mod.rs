//! Random codebooks, cost constraints, the compound joint-typicality
//! decoder and the error-exponent bookkeeping of its analysis.

mod codebook;
mod cost;
mod decoder;
mod exponent;

pub use codebook::{draw_codebook, Codebook, CodebookRecord, CodebookSpec, SizeCaps, SymbolLaw};
pub use cost::{apply_cost_constraint, compatibility, Compatibility, CostConstraint, CostFunction};
pub(crate) use decoder::BATCH;
pub use decoder::{estimate_error, DecodeOutcome, ErrorEstimate, JtDecoder, PreparedCodebook};
pub use exponent::{exponent_bound, pick_exponent_params, AlphaGrids, ExponentBound, ExponentParams};
