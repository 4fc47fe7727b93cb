//! Information measures. Every quantity here is in nats.

mod divergence;
mod information;
mod quadrature;

pub use divergence::{kl_gaussian, kl_normal, renyi_gaussian, renyi_normal, RenyiOrder};
pub(crate) use information::mgf_estimate;
pub use information::{
    information_density, information_density_sequence, mgf_information_density, mgf_joint_magnitude, mutual_information_mc, MIEstimate,
    MgfEstimate,
};
pub use quadrature::{kl_numeric_oracle, renyi_numeric_oracle, IntegrationBox, QuadratureEstimate};

/// Natural-log information unit. Divergences are `>= 0` or `+inf`;
/// information densities may be negative.
pub type Nats = f64;
