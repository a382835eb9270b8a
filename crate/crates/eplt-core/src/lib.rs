//! Simulation and certification of entanglement-preserving local
//! thermalizations (EPLT).
//!
//! A local thermalization is a channel on a multipartite system that (1) is a
//! mixture of product channels — local operations plus shared randomness — and
//! (2) leaves every input with prescribed thermal marginals. The interesting
//! members of this family also preserve entanglement of some inputs. This
//! crate builds the channel families that do so, certifies local thermality
//! numerically, and evaluates the thermalization speed-up calculus behind
//! them:
//!
//! - [`qmat`] — dense complex linear algebra: tensor products, partial
//!   trace/transpose, Hermitian eigendecomposition, Haar sampling.
//! - [`states`] — thermal, quenched, maximally entangled, isotropic and
//!   GHZ-basis states.
//! - [`channels`] — Kraus/superoperator channels, exact and sampled twirls,
//!   the EPLT families, LOSR mixtures and their correlated-bath dilation.
//! - [`entanglement`] — singlet fraction, fully entangled fraction, PPT and
//!   GME tests, channel-level local-thermality certification.
//! - [`thermo`] — quench energies, δ-thermalization times and the
//!   finite-twirl speed-up bounds.
//!
//! Monte-Carlo ensembles and verification sweeps run through [`exec`], which
//! uses rayon when the default `parallel` feature is enabled and a sequential
//! fallback otherwise; results are bit-identical between the two.

pub mod channels;
pub mod entanglement;
pub mod error;
pub mod exec;
pub mod qmat;
pub mod states;
pub mod thermo;
pub mod tolerance;

pub use error::{Error, Result};
pub use tolerance::ToleranceProfile;
