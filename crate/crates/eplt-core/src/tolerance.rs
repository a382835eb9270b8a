/// Numerical tolerances used when validating operators, states and channels.
///
/// The algebra in this crate is exact; tolerances only absorb floating-point
/// round-off. Constructors take a profile so a whole computation can be run
/// stricter or looser without touching call sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceProfile {
    /// Maximum entrywise deviation from `m == m†`.
    pub herm: f64,
    /// Maximum deviation of `‖U†U − I‖_sup` for unitaries.
    pub unitary: f64,
    /// Maximum residual for eigendecomposition reconstruction checks.
    pub recon: f64,
    /// Most negative eigenvalue accepted on a positive-semidefinite operator.
    pub psd: f64,
    /// Maximum deviation of a density-operator trace from 1.
    pub trace_one: f64,
    /// Maximum deviation of `Σ K†K` from the identity for Kraus families.
    pub trace_preserving: f64,
    /// Relative eigenvalue gap under which levels count as degenerate.
    pub degeneracy_gap: f64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        Self {
            herm: 1e-9,
            unitary: 1e-9,
            recon: 1e-8,
            psd: 1e-10,
            trace_one: 1e-10,
            trace_preserving: 1e-9,
            degeneracy_gap: 1e-9,
        }
    }
}

impl ToleranceProfile {
    pub const fn strict() -> Self {
        Self {
            herm: 1e-12,
            unitary: 1e-12,
            recon: 1e-11,
            psd: 1e-12,
            trace_one: 1e-12,
            trace_preserving: 1e-12,
            degeneracy_gap: 1e-12,
        }
    }
}
