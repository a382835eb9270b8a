//! Mixtures of product channels (local operations plus shared randomness)
//! and the entanglement-preserving local thermalization constructions built
//! from them.

use crate::error::{Error, Result};
use crate::qmat::{self, identity, CMat, SubsystemShape};
use crate::states::{self, DensityOperator};
use crate::tolerance::ToleranceProfile;

use super::core::{constant_channel, product_channel, QuantumChannel};
use super::twirl::{ghz_twirl_unitary_terms, two_design_unitaries};

/// One shared-randomness branch: a weight and one local channel per party.
#[derive(Debug, Clone)]
pub struct LosrTerm {
    pub weight: f64,
    pub locals: Vec<QuantumChannel>,
}

/// Finite probability-weighted mixture of product channels. Such channels
/// cannot create entanglement; they are exactly the maps a set of isolated
/// agents holding pre-shared randomness can implement.
#[derive(Debug, Clone)]
pub struct LosrMixture {
    terms: Vec<LosrTerm>,
    term_channels: Vec<QuantumChannel>,
    shape: SubsystemShape,
    local_dims: Vec<usize>,
}

impl LosrMixture {
    pub fn new(terms: Vec<LosrTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidMixture("no terms".into()));
        }
        let local_dims: Vec<usize> = terms[0].locals.iter().map(|ch| ch.dim()).collect();
        if local_dims.is_empty() {
            return Err(Error::InvalidMixture("term with no local channels".into()));
        }
        let mut total = 0.0;
        for (idx, term) in terms.iter().enumerate() {
            if term.weight < -1e-15 {
                return Err(Error::InvalidMixture(format!("negative weight {} in term {idx}", term.weight)));
            }
            let dims: Vec<usize> = term.locals.iter().map(|ch| ch.dim()).collect();
            if dims != local_dims {
                return Err(Error::InvalidMixture(format!(
                    "term {idx} has local dimensions {:?}, expected {:?}",
                    dims, local_dims
                )));
            }
            total += term.weight;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMixture(format!("weights sum to {total}, not 1")));
        }
        let term_channels = terms.iter().map(|t| product_channel(&t.locals)).collect();
        let shape = SubsystemShape::new(local_dims.clone())?;
        Ok(Self { terms, term_channels, shape, local_dims })
    }

    pub fn terms(&self) -> &[LosrTerm] {
        &self.terms
    }

    pub fn shape(&self) -> &SubsystemShape {
        &self.shape
    }

    pub fn parties(&self) -> usize {
        self.local_dims.len()
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.local_dims
    }

    pub fn dim(&self) -> usize {
        self.shape.total_dim()
    }

    /// Linear action on an arbitrary operator of the joint system.
    pub fn apply_matrix(&self, m: &CMat) -> CMat {
        let d = self.dim();
        let mut out = CMat::zeros(d, d);
        for (term, channel) in self.terms.iter().zip(&self.term_channels) {
            if term.weight == 0.0 {
                continue;
            }
            out += channel.apply_matrix(m).scale(term.weight);
        }
        out
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "mixture on dimension {} applied to state of dimension {}",
                self.dim(),
                rho.dim()
            )));
        }
        DensityOperator::new(self.apply_matrix(rho.matrix()), self.shape.clone())
    }

    /// Superoperator of the whole mixture.
    pub fn superoperator(&self) -> CMat {
        let d2 = self.dim() * self.dim();
        let mut s = CMat::zeros(d2, d2);
        for (term, channel) in self.terms.iter().zip(&self.term_channels) {
            if term.weight == 0.0 {
                continue;
            }
            s += channel.superoperator().scale(term.weight);
        }
        s
    }

    /// The mixture flattened into a single channel.
    pub fn as_channel(&self) -> Result<QuantumChannel> {
        QuantumChannel::from_superoperator(self.superoperator(), self.shape.clone())
    }
}

/// Apply a unitary first, then an existing channel (Kraus-level composition).
fn after_unitary(ch: &QuantumChannel, u: &CMat) -> Result<QuantumChannel> {
    let kraus: Vec<CMat> = ch.kraus_family().into_iter().map(|k| k * u).collect();
    QuantumChannel::from_kraus(kraus, ch.shape().clone())
}

fn unitary_local(u: CMat) -> Result<QuantumChannel> {
    let d = u.nrows();
    super::core::unitary_channel(u, SubsystemShape::single(d))
}

/// Standard bipartite EPLT: mix the constant preparation of the quenched
/// product state (weight `1−ε`) with the exact twirl (weight `ε`), the twirl
/// realized as a uniform mixture of `(U, U*)` product unitaries over a finite
/// 2-design.
///
/// Admissible range: `0 ≤ ε ≤ ε* = d·P_min` with `P_min` the smallest
/// eigenvalue across both thermal marginals. Every input is mapped to a state
/// with marginals exactly `(γ_A, γ_B)`.
pub fn eplt(
    gamma_a: &DensityOperator,
    gamma_b: &DensityOperator,
    epsilon: f64,
) -> Result<LosrMixture> {
    let d = equal_local_dim(gamma_a, gamma_b)?;
    let p_min = states::min_thermal_population(gamma_a, gamma_b)?;
    let eps_star = (d as f64 * p_min).min(1.0);
    if !(0.0..=eps_star + 1e-12).contains(&epsilon) {
        return Err(Error::EpsilonOutOfRange { epsilon, max: eps_star });
    }
    let epsilon = epsilon.min(eps_star).min(1.0);
    let eta_a = states::quenched_state(gamma_a, epsilon)?;
    let eta_b = states::quenched_state(gamma_b, epsilon)?;

    let mut terms = Vec::new();
    if epsilon < 1.0 {
        terms.push(LosrTerm {
            weight: 1.0 - epsilon,
            locals: vec![constant_channel(&eta_a), constant_channel(&eta_b)],
        });
    }
    if epsilon > 0.0 {
        let design = two_design_unitaries(d)?;
        let q = epsilon / design.len() as f64;
        for u in design {
            let conj = u.conjugate();
            terms.push(LosrTerm { weight: q, locals: vec![unitary_local(u)?, unitary_local(conj)?] });
        }
    }
    LosrMixture::new(terms)
}

/// Like [`eplt`], but with the twirl realized as a uniform mixture over
/// `samples` Haar-random `(U, U*)` pairs instead of an exact design, for
/// local dimensions with no finite design wired in.
///
/// The thermal marginals are then only approximate: the sampled average
/// deviates from the exact twirl by `O(1/√samples)`, and the certification
/// report of such a mixture carries that error.
pub fn eplt_monte_carlo(
    gamma_a: &DensityOperator,
    gamma_b: &DensityOperator,
    epsilon: f64,
    samples: usize,
    seed: u64,
) -> Result<LosrMixture> {
    let d = equal_local_dim(gamma_a, gamma_b)?;
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one twirl sample".into()));
    }
    let p_min = states::min_thermal_population(gamma_a, gamma_b)?;
    let eps_star = (d as f64 * p_min).min(1.0);
    if !(0.0..=eps_star + 1e-12).contains(&epsilon) {
        return Err(Error::EpsilonOutOfRange { epsilon, max: eps_star });
    }
    let epsilon = epsilon.min(eps_star).min(1.0);
    let eta_a = states::quenched_state(gamma_a, epsilon)?;
    let eta_b = states::quenched_state(gamma_b, epsilon)?;

    let mut terms = Vec::new();
    if epsilon < 1.0 {
        terms.push(LosrTerm {
            weight: 1.0 - epsilon,
            locals: vec![constant_channel(&eta_a), constant_channel(&eta_b)],
        });
    }
    if epsilon > 0.0 {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let q = epsilon / samples as f64;
        for _ in 0..samples {
            let u = qmat::haar_unitary(d, &mut rng);
            let conj = u.conjugate();
            terms.push(LosrTerm { weight: q, locals: vec![unitary_local(u)?, unitary_local(conj)?] });
        }
    }
    LosrMixture::new(terms)
}

/// Alternative EPLT: local mixing channels toward the quenched states applied
/// after the twirl, `[D_A ⊗ D_B] ∘ T`. Each party gets its own `ε_X` with
/// range `0 ≤ ε_X ≤ d·P_min(γ_X)`.
pub fn eplt_alternative(
    gamma_a: &DensityOperator,
    gamma_b: &DensityOperator,
    epsilon_a: f64,
    epsilon_b: f64,
) -> Result<LosrMixture> {
    let d = equal_local_dim(gamma_a, gamma_b)?;
    let mut locals_after = Vec::with_capacity(2);
    for (gamma, eps) in [(gamma_a, epsilon_a), (gamma_b, epsilon_b)] {
        let p_min_local = gamma.min_eigenvalue().max(0.0);
        let eps_max = (d as f64 * p_min_local).min(1.0);
        if !(0.0..=eps_max + 1e-12).contains(&eps) {
            return Err(Error::EpsilonOutOfRange { epsilon: eps, max: eps_max });
        }
        let eps = eps.min(eps_max).min(1.0);
        let eta = states::quenched_state(gamma, eps)?;
        locals_after.push(super::core::mixing_channel(&eta, 1.0 - eps)?);
    }
    let design = two_design_unitaries(d)?;
    let q = 1.0 / design.len() as f64;
    let mut terms = Vec::with_capacity(design.len());
    for u in design {
        let conj = u.conjugate();
        terms.push(LosrTerm {
            weight: q,
            locals: vec![after_unitary(&locals_after[0], &u)?, after_unitary(&locals_after[1], &conj)?],
        });
    }
    LosrMixture::new(terms)
}

/// The GHZ twirl as an explicit LOSR mixture of product unitary channels.
pub fn ghz_twirl_mixture(n: usize) -> Result<LosrMixture> {
    let terms = ghz_twirl_unitary_terms(n)?;
    let mut out = Vec::with_capacity(terms.len());
    for (w, locals) in terms {
        let locals = locals
            .into_iter()
            .map(unitary_local)
            .collect::<Result<Vec<_>>>()?;
        out.push(LosrTerm { weight: w, locals });
    }
    LosrMixture::new(out)
}

/// Multiqubit EPLT: constant preparation of the quenched product state mixed
/// with the GHZ twirl. Range: `0 ≤ ε ≤ 2·min_i P^i_min` over the qubit
/// thermal marginals.
pub fn eplt_multipartite(gammas: &[DensityOperator], epsilon: f64) -> Result<LosrMixture> {
    if gammas.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "multipartite EPLT needs >= 2 parties, got {}",
            gammas.len()
        )));
    }
    for g in gammas {
        if g.dim() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "multipartite EPLT is a qubit construction; marginal has dimension {}",
                g.dim()
            )));
        }
    }
    let p_min = gammas.iter().map(|g| g.min_eigenvalue().max(0.0)).fold(f64::INFINITY, f64::min);
    let eps_max = (2.0 * p_min).min(1.0);
    if !(0.0..=eps_max + 1e-12).contains(&epsilon) {
        return Err(Error::EpsilonOutOfRange { epsilon, max: eps_max });
    }
    let epsilon = epsilon.min(eps_max).min(1.0);
    let n = gammas.len();

    let mut terms = Vec::new();
    if epsilon < 1.0 {
        let locals = gammas
            .iter()
            .map(|g| states::quenched_state(g, epsilon).map(|eta| constant_channel(&eta)))
            .collect::<Result<Vec<_>>>()?;
        terms.push(LosrTerm { weight: 1.0 - epsilon, locals });
    }
    if epsilon > 0.0 {
        for (w, locals) in ghz_twirl_unitary_terms(n)? {
            let locals = locals.into_iter().map(unitary_local).collect::<Result<Vec<_>>>()?;
            terms.push(LosrTerm { weight: epsilon * w, locals });
        }
    }
    LosrMixture::new(terms)
}

fn equal_local_dim(gamma_a: &DensityOperator, gamma_b: &DensityOperator) -> Result<usize> {
    if gamma_a.dim() != gamma_b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "thermal marginals of dimensions {} and {}",
            gamma_a.dim(),
            gamma_b.dim()
        )));
    }
    Ok(gamma_a.dim())
}

/// Zero-temperature EPLT for local Hamiltonians with two-fold degenerate
/// ground spaces, together with the ground-space bookkeeping a caller needs
/// to construct its invariant states.
#[derive(Debug, Clone)]
pub struct ZeroTempProtocol {
    pub mixture: LosrMixture,
    /// Orthonormal ground-space basis of the A-side Hamiltonian (columns).
    pub ground_basis_a: CMat,
    pub ground_basis_b: CMat,
    pub ground_projector_a: CMat,
    pub ground_projector_b: CMat,
}

impl ZeroTempProtocol {
    /// The zero-temperature thermal marginal `Π₀/2` of party A.
    pub fn thermal_marginal_a(&self) -> DensityOperator {
        let d = self.ground_projector_a.nrows();
        DensityOperator::new_unchecked(self.ground_projector_a.scale(0.5), SubsystemShape::single(d))
    }

    pub fn thermal_marginal_b(&self) -> DensityOperator {
        let d = self.ground_projector_b.nrows();
        DensityOperator::new_unchecked(self.ground_projector_b.scale(0.5), SubsystemShape::single(d))
    }

    /// Maximally entangled state across the two ground spaces,
    /// `(|0,0⟩|0,0⟩ + |0,1⟩|0,1⟩)/√2` in the stored bases; invariant under
    /// the whole protocol.
    pub fn entangled_ground_state(&self) -> DensityOperator {
        let da = self.ground_basis_a.nrows();
        let db = self.ground_basis_b.nrows();
        let mut v = qmat::CVec::zeros(da * db);
        for g in 0..2 {
            let a = self.ground_basis_a.column(g);
            let b = self.ground_basis_b.column(g);
            for i in 0..da {
                for j in 0..db {
                    v[i * db + j] += a[i] * b[j] * qmat::cr(1.0 / 2f64.sqrt());
                }
            }
        }
        DensityOperator::new_unchecked(
            qmat::projector(&v),
            SubsystemShape::new(vec![da, db]).expect("nonempty dims"),
        )
    }
}

/// Ground-space measurement-and-replace channel followed by a ground-space
/// twirl: the zero-temperature local thermalization. Each local channel
/// projects onto the ground space (preparing `Π₀/2` on the excited outcome)
/// and the shared randomness drives a `(U ⊗ U*)` twirl inside the two
/// two-dimensional ground spaces.
pub fn zero_temp_protocol(ham_a: &CMat, ham_b: &CMat) -> Result<ZeroTempProtocol> {
    let tol = ToleranceProfile::default();
    let (proj_a, basis_a) = states::ground_space(ham_a, &tol)?;
    let (proj_b, basis_b) = states::ground_space(ham_b, &tol)?;
    for (side, basis) in [("A", &basis_a), ("B", &basis_b)] {
        match basis.ncols() {
            1 => {
                return Err(Error::NoEplt(format!(
                    "side {side} has a nondegenerate ground state; its zero-temperature marginal is pure"
                )))
            }
            2 => {}
            g => {
                return Err(Error::Unsupported(format!(
                    "side {side} has ground degeneracy {g}; only two-fold degeneracy is implemented"
                )))
            }
        }
    }

    let replace_a = ground_replace_channel(&proj_a, &basis_a, ham_a.nrows(), &tol)?;
    let replace_b = ground_replace_channel(&proj_b, &basis_b, ham_b.nrows(), &tol)?;

    let design = two_design_unitaries(2)?;
    let q = 1.0 / design.len() as f64;
    let mut terms = Vec::with_capacity(design.len());
    for u in design {
        let embedded_a = embed_on_subspace(&u, &basis_a, &proj_a);
        let embedded_b = embed_on_subspace(&u.conjugate(), &basis_b, &proj_b);
        // L first, then the ground-space twirl unitary
        let local_a = compose_unitary_after(&replace_a, &embedded_a)?;
        let local_b = compose_unitary_after(&replace_b, &embedded_b)?;
        terms.push(LosrTerm { weight: q, locals: vec![local_a, local_b] });
    }
    Ok(ZeroTempProtocol {
        mixture: LosrMixture::new(terms)?,
        ground_basis_a: basis_a,
        ground_basis_b: basis_b,
        ground_projector_a: proj_a,
        ground_projector_b: proj_b,
    })
}

/// `Π₀(·)Π₀ + Φ_{Π₀/2}[(I−Π₀)(·)(I−Π₀)]` as a Kraus family: keep the ground
/// block, replace the excited block by the maximally mixed ground state.
fn ground_replace_channel(
    proj: &CMat,
    basis: &CMat,
    dim: usize,
    tol: &ToleranceProfile,
) -> Result<QuantumChannel> {
    let excited = identity(dim) - proj;
    // orthonormal basis of the excited space from its projector
    let (vals, vecs) = qmat::eig_hermitian(&excited, tol)?;
    let mut kraus = vec![proj.clone()];
    let amp = qmat::cr(1.0 / 2f64.sqrt());
    for (k, &lam) in vals.iter().enumerate() {
        if lam > 0.5 {
            let e = vecs.column(k);
            for g in 0..2 {
                let col = basis.column(g);
                let mut op = CMat::zeros(dim, dim);
                for i in 0..dim {
                    for j in 0..dim {
                        op[(i, j)] = col[i] * e[j].conj() * amp;
                    }
                }
                kraus.push(op);
            }
        }
    }
    QuantumChannel::from_kraus(kraus, SubsystemShape::single(dim))
}

/// Unitary acting as `u` on the stored subspace basis and as the identity on
/// its complement.
fn embed_on_subspace(u: &CMat, basis: &CMat, proj: &CMat) -> CMat {
    let dim = basis.nrows();
    basis * u * basis.adjoint() + (identity(dim) - proj)
}

fn compose_unitary_after(first: &QuantumChannel, u: &CMat) -> Result<QuantumChannel> {
    let kraus: Vec<CMat> = first.kraus_family().into_iter().map(|k| u * k).collect();
    QuantumChannel::from_kraus(kraus, first.shape().clone())
}
