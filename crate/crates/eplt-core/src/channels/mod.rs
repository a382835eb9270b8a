//! Quantum channels: Kraus/superoperator representations, the mixing and
//! partial-thermalization channels, twirls, the EPLT constructions, LOSR
//! mixtures and their correlated-bath dilation.

mod core;
pub mod dilation;
pub mod losr;
pub mod twirl;

pub use self::core::{
    channel_from_json, channel_to_json, constant_channel, identity_channel, mixing_channel,
    partial_thermalization, probe_states, probe_sup_distance, product_channel, unitary_channel,
    QuantumChannel,
};
pub use self::dilation::{build_bath_dilation, BathDilation};
pub use self::losr::{
    eplt, eplt_alternative, eplt_monte_carlo, eplt_multipartite, ghz_twirl_mixture,
    zero_temp_protocol, LosrMixture, LosrTerm, ZeroTempProtocol,
};
pub use self::twirl::{
    ghz_twirl, ghz_twirl_unitary_terms, twirl_exact, twirl_sampled, twirl_superoperator,
    two_design_unitaries,
};
