//! State constructors: thermal and quenched marginals, maximally entangled
//! and isotropic states, and the GHZ basis.

use crate::error::{Error, Result};
use crate::qmat::{
    self, cr, eig_hermitian, identity, max_abs_diff, projector, CMat, CVec, SubsystemShape,
};
use crate::tolerance::ToleranceProfile;

/// Unit-trace positive-semidefinite operator with its subsystem structure.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    mat: CMat,
    shape: SubsystemShape,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positive semidefiniteness
    /// against the default [`ToleranceProfile`].
    pub fn new(mat: CMat, shape: SubsystemShape) -> Result<Self> {
        Self::with_tolerances(mat, shape, &ToleranceProfile::default())
    }

    pub fn with_tolerances(mat: CMat, shape: SubsystemShape, tol: &ToleranceProfile) -> Result<Self> {
        shape.check_matches(&mat)?;
        let herm_dev = qmat::hermiticity_deviation(&mat);
        if herm_dev > tol.herm {
            return Err(Error::NotHermitian { deviation: herm_dev, tolerance: tol.herm });
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tol.trace_one || tr.im.abs() > tol.trace_one {
            return Err(Error::NotAState { reason: "trace differs from 1".into(), value: tr.re });
        }
        let vals = qmat::eigvals_hermitian(&mat, tol)?;
        let min = vals[0];
        if min < -tol.psd {
            return Err(Error::NotAState { reason: "negative eigenvalue".into(), value: min });
        }
        Ok(Self { mat, shape })
    }

    /// Skips validation; for internal construction of outputs that are valid
    /// by algebra (e.g. channel outputs assembled from validated parts).
    pub(crate) fn new_unchecked(mat: CMat, shape: SubsystemShape) -> Self {
        Self { mat, shape }
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn shape(&self) -> &SubsystemShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Eigenvalues in ascending order.
    pub fn spectrum(&self) -> Vec<f64> {
        qmat::eigvals_hermitian(&self.mat, &ToleranceProfile::default())
            .expect("stored density operator is Hermitian")
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum()[0]
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    /// ⟨v|ρ|v⟩ for a unit vector `v`.
    pub fn expectation(&self, v: &CVec) -> f64 {
        (v.adjoint() * &self.mat * v)[(0, 0)].re
    }

    /// Reduced state on the given parties (kept in original order).
    pub fn marginal(&self, keep: &[usize]) -> Result<DensityOperator> {
        let red = qmat::partial_trace(&self.mat, &self.shape, keep)?;
        let dims: Vec<usize> = {
            let mut keep = keep.to_vec();
            keep.sort_unstable();
            keep.dedup();
            keep.iter().map(|&k| self.shape.dims()[k]).collect()
        };
        Ok(DensityOperator::new_unchecked(red, SubsystemShape::new(dims)?))
    }
}

/// Temperature of a bath; infinity is a separate regime, not a large float,
/// so `e^{-H/kT}` can never overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Temperature {
    Infinite,
    Finite(f64),
}

impl Temperature {
    pub fn is_zero(&self) -> bool {
        matches!(self, Temperature::Finite(t) if *t == 0.0)
    }
}

/// Hamiltonian, temperature and Boltzmann constant defining a thermal state.
///
/// Units are a convention of the caller; by default `k = 1` so energies are
/// measured in units of temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalSpec {
    pub hamiltonian: CMat,
    pub temperature: Temperature,
    pub boltzmann: f64,
}

impl ThermalSpec {
    pub fn new(hamiltonian: CMat, temperature: Temperature) -> Result<Self> {
        Self::with_boltzmann(hamiltonian, temperature, 1.0)
    }

    pub fn with_boltzmann(hamiltonian: CMat, temperature: Temperature, boltzmann: f64) -> Result<Self> {
        let tol = ToleranceProfile::default();
        let dev = qmat::hermiticity_deviation(&hamiltonian);
        if dev > tol.herm {
            return Err(Error::NotHermitian { deviation: dev, tolerance: tol.herm });
        }
        if let Temperature::Finite(t) = temperature {
            if !(t >= 0.0) {
                return Err(Error::InvalidParameter(format!("temperature {t} < 0")));
            }
        }
        if !(boltzmann > 0.0) {
            return Err(Error::InvalidParameter(format!("boltzmann constant {boltzmann} must be > 0")));
        }
        Ok(Self { hamiltonian, temperature, boltzmann })
    }

    /// Diagonal Hamiltonian from its energy levels.
    pub fn from_energies(energies: &[f64], temperature: Temperature) -> Result<Self> {
        let d = energies.len();
        let h = CMat::from_fn(d, d, |i, j| if i == j { cr(energies[i]) } else { cr(0.0) });
        Self::new(h, temperature)
    }

    /// Number of levels within the degeneracy gap of the ground energy.
    pub fn ground_degeneracy(&self) -> usize {
        let (_, degeneracy) = ground_levels(&self.hamiltonian, &ToleranceProfile::default());
        degeneracy
    }
}

fn ground_levels(ham: &CMat, tol: &ToleranceProfile) -> (Vec<f64>, usize) {
    let vals = qmat::eigvals_hermitian(ham, tol).expect("Hamiltonian validated Hermitian");
    let e0 = vals[0];
    let spread = (vals[vals.len() - 1] - e0).max(1.0);
    let g = vals.iter().take_while(|&&e| e - e0 <= tol.degeneracy_gap * spread).count();
    (vals, g)
}

/// Projector onto the ground energy subspace together with an orthonormal
/// basis of it (columns).
pub fn ground_space(ham: &CMat, tol: &ToleranceProfile) -> Result<(CMat, CMat)> {
    let (vals, vecs) = eig_hermitian(ham, tol)?;
    let e0 = vals[0];
    let spread = (vals[vals.len() - 1] - e0).max(1.0);
    let g = vals.iter().take_while(|&&e| e - e0 <= tol.degeneracy_gap * spread).count();
    let basis = CMat::from_fn(ham.nrows(), g, |i, k| vecs[(i, k)]);
    let proj = &basis * basis.adjoint();
    Ok((proj, basis))
}

/// Gibbs state `e^{−H/kT}/Z` of the spec's Hamiltonian.
///
/// At infinite temperature this is `I/d`; at zero temperature it is the
/// uniform mixture `Π₀/g` on the ground space (the pure ground projector when
/// the ground level is nondegenerate — in that case no entanglement can
/// survive thermalization of that marginal, which callers can detect through
/// a vanishing [`min_thermal_population`]).
pub fn thermal_state(spec: &ThermalSpec) -> Result<DensityOperator> {
    let d = spec.hamiltonian.nrows();
    let shape = SubsystemShape::single(d);
    let tol = ToleranceProfile::default();
    match spec.temperature {
        Temperature::Infinite => {
            Ok(DensityOperator::new_unchecked(identity(d).scale(1.0 / d as f64), shape))
        }
        Temperature::Finite(t) if t == 0.0 => {
            let (proj, basis) = ground_space(&spec.hamiltonian, &tol)?;
            let g = basis.ncols();
            Ok(DensityOperator::new_unchecked(proj.scale(1.0 / g as f64), shape))
        }
        Temperature::Finite(t) => {
            let (vals, vecs) = eig_hermitian(&spec.hamiltonian, &tol)?;
            let beta = 1.0 / (spec.boltzmann * t);
            let e0 = vals[0];
            let weights: Vec<f64> = vals.iter().map(|&e| (-beta * (e - e0)).exp()).collect();
            let z: f64 = weights.iter().sum();
            let lam = CMat::from_fn(d, d, |i, j| if i == j { cr(weights[i] / z) } else { cr(0.0) });
            let gamma = &vecs * lam * vecs.adjoint();
            Ok(DensityOperator::new_unchecked(gamma, shape))
        }
    }
}

/// Smallest eigenvalue over both thermal spectra; lies in `[0, 1/d]`.
pub fn min_thermal_population(gamma_a: &DensityOperator, gamma_b: &DensityOperator) -> Result<f64> {
    if gamma_a.dim() != gamma_b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "marginals have dimensions {} and {}",
            gamma_a.dim(),
            gamma_b.dim()
        )));
    }
    let min = gamma_a.min_eigenvalue().min(gamma_b.min_eigenvalue());
    Ok(min.max(0.0))
}

/// Quenched marginal `γ + ε/(1−ε)·(γ − I/d)`: the state the bath must fix so
/// that mixing weight `1−ε` lands back on `γ` after the twirl contributes its
/// maximally mixed share.
///
/// Valid exactly for `0 ≤ ε ≤ d·P_min(γ)`; beyond that the result develops a
/// negative eigenvalue, which is reported in the error.
pub fn quenched_state(gamma: &DensityOperator, epsilon: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::EpsilonOutOfRange { epsilon, max: 1.0 });
    }
    let d = gamma.dim();
    let max_mixed = identity(d).scale(1.0 / d as f64);
    if epsilon == 1.0 {
        // The formula has a pole; the limit exists only for γ = I/d.
        if max_abs_diff(gamma.matrix(), &max_mixed) <= 1e-10 {
            return Ok(DensityOperator::new_unchecked(max_mixed, gamma.shape().clone()));
        }
        return Err(Error::NotAState {
            reason: "quenched state diverges at ε = 1 unless γ is maximally mixed".into(),
            value: f64::NEG_INFINITY,
        });
    }
    let factor = epsilon / (1.0 - epsilon);
    let eta = gamma.matrix() + (gamma.matrix() - &max_mixed).scale(factor);
    DensityOperator::new(eta, gamma.shape().clone()).map_err(|e| match e {
        Error::NotAState { value, .. } => Error::NotAState {
            reason: format!("quenched state invalid at ε = {epsilon}"),
            value,
        },
        other => other,
    })
}

/// `|Ψ_d⁺⟩ = (1/√d) Σ_n |n⟩⊗|n⟩`.
pub fn max_entangled_vector(d: usize) -> CVec {
    assert!(d >= 2, "maximally entangled state needs d >= 2");
    let mut v = CVec::zeros(d * d);
    let amp = cr(1.0 / (d as f64).sqrt());
    for n in 0..d {
        v[n * d + n] = amp;
    }
    v
}

/// Projector onto `|Ψ_d⁺⟩`.
pub fn max_entangled(d: usize) -> DensityOperator {
    DensityOperator::new_unchecked(projector(&max_entangled_vector(d)), SubsystemShape::bipartite(d))
}

/// Isotropic state `p·|Ψ_d⁺⟩⟨Ψ_d⁺| + (1−p)·I/d²`.
pub fn isotropic(d: usize, p: f64) -> Result<DensityOperator> {
    let lo = -1.0 / ((d * d - 1) as f64);
    if !(lo..=1.0).contains(&p) {
        return Err(Error::NotAState {
            reason: format!("isotropic parameter outside [{lo}, 1]"),
            value: p,
        });
    }
    let d2 = d * d;
    let mat = projector(&max_entangled_vector(d)).scale(p) + identity(d2).scale((1.0 - p) / d2 as f64);
    Ok(DensityOperator::new_unchecked(mat, SubsystemShape::bipartite(d)))
}

/// Branch sign of a GHZ-basis vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GhzSign {
    Plus,
    Minus,
}

impl GhzSign {
    pub fn signum(self) -> f64 {
        match self {
            GhzSign::Plus => 1.0,
            GhzSign::Minus => -1.0,
        }
    }
}

/// GHZ-basis vector `(|j⟩⊗|0⟩ ± |2^{N−1}−j−1⟩⊗|1⟩)/√2` on `n` qubits.
///
/// `j` labels the first `n−1` qubits in binary; the last qubit carries the
/// branch. `j = 0` with `+` is the GHZ state.
pub fn ghz_vector(n: usize, j: usize, sign: GhzSign) -> Result<CVec> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("GHZ basis needs n >= 2 qubits, got {n}")));
    }
    let half = 1usize << (n - 1);
    if j >= half {
        return Err(Error::InvalidParameter(format!("GHZ label {j} out of range [0, {half})")));
    }
    let dim = 1usize << n;
    let amp = cr(1.0 / 2f64.sqrt());
    let mut v = CVec::zeros(dim);
    v[j * 2] = amp;
    v[(half - j - 1) * 2 + 1] += amp * cr(sign.signum());
    Ok(v)
}

/// Projector onto [`ghz_vector`].
pub fn ghz_basis(n: usize, j: usize, sign: GhzSign) -> Result<DensityOperator> {
    let v = ghz_vector(n, j, sign)?;
    Ok(DensityOperator::new_unchecked(projector(&v), SubsystemShape::qubits(n)))
}

/// Diagonal state from populations (sanity-checked to sum to 1).
pub fn diagonal_state(populations: &[f64], shape: SubsystemShape) -> Result<DensityOperator> {
    let d = populations.len();
    let mat = CMat::from_fn(d, d, |i, j| if i == j { cr(populations[i]) } else { cr(0.0) });
    DensityOperator::new(mat, shape)
}
