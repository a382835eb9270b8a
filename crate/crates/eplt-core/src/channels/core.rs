//! CPTP maps stored as a Kraus family and/or a superoperator matrix.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{
    self, cr, haar_state_vector, identity, projector, sup_norm, tensor, unvectorize, vectorize,
    CMat, SubsystemShape, C64,
};
use crate::states::DensityOperator;
use crate::tolerance::ToleranceProfile;

/// Completely positive trace-preserving map with subsystem structure.
///
/// At least one of the two representations is always present. Compositions
/// are carried out on superoperator matrices so that long products (sampled
/// twirls) never suffer exponential Kraus blow-up; a Kraus family can always
/// be re-extracted from the Choi matrix.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    kraus: Option<Vec<CMat>>,
    superop: Option<CMat>,
    shape: SubsystemShape,
}

impl QuantumChannel {
    pub fn from_kraus(kraus: Vec<CMat>, shape: SubsystemShape) -> Result<Self> {
        Self::from_kraus_with_tolerances(kraus, shape, &ToleranceProfile::default())
    }

    pub fn from_kraus_with_tolerances(
        kraus: Vec<CMat>,
        shape: SubsystemShape,
        tol: &ToleranceProfile,
    ) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidParameter("empty Kraus family".into()));
        }
        let d = shape.total_dim();
        for k in &kraus {
            if k.nrows() != d || k.ncols() != d {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator is {}x{}, shape wants {}",
                    k.nrows(),
                    k.ncols(),
                    d
                )));
            }
        }
        let mut sum = CMat::zeros(d, d);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let dev = qmat::max_abs_diff(&sum, &identity(d));
        if dev > tol.trace_preserving {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Self { kraus: Some(kraus), superop: None, shape })
    }

    /// Builds a channel from its superoperator (row-major vectorization,
    /// `vec(E(ρ)) = S·vec(ρ)`). Trace preservation is validated; complete
    /// positivity is the caller's obligation and can be audited through
    /// [`QuantumChannel::choi`].
    pub fn from_superoperator(superop: CMat, shape: SubsystemShape) -> Result<Self> {
        Self::from_superoperator_with_tolerances(superop, shape, &ToleranceProfile::default())
    }

    pub fn from_superoperator_with_tolerances(
        superop: CMat,
        shape: SubsystemShape,
        tol: &ToleranceProfile,
    ) -> Result<Self> {
        let d = shape.total_dim();
        if superop.nrows() != d * d || superop.ncols() != d * d {
            return Err(Error::DimensionMismatch(format!(
                "superoperator is {}x{}, shape wants {}",
                superop.nrows(),
                superop.ncols(),
                d * d
            )));
        }
        // tr(E(X)) == tr(X) for all X ⟺ the diagonal rows of S sum to the
        // vectorized identity.
        let mut dev: f64 = 0.0;
        for kk in 0..d {
            for ll in 0..d {
                let col = kk * d + ll;
                let mut acc = C64::default();
                for i in 0..d {
                    acc += superop[(i * d + i, col)];
                }
                let expected = if kk == ll { cr(1.0) } else { cr(0.0) };
                dev = dev.max((acc - expected).norm());
            }
        }
        if dev > tol.trace_preserving {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Self { kraus: None, superop: Some(superop), shape })
    }

    pub fn shape(&self) -> &SubsystemShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.total_dim()
    }

    /// Superoperator matrix `S = Σ_k K_k ⊗ conj(K_k)`.
    pub fn superoperator(&self) -> CMat {
        if let Some(s) = &self.superop {
            return s.clone();
        }
        superop_from_kraus(self.kraus.as_ref().expect("one representation present"))
    }

    /// Kraus family; extracted from the Choi matrix if the channel was built
    /// from a superoperator.
    pub fn kraus_family(&self) -> Vec<CMat> {
        if let Some(k) = &self.kraus {
            return k.clone();
        }
        kraus_from_choi(&self.choi(), self.dim())
    }

    /// Choi matrix `Σ_{ij} |i⟩⟨j| ⊗ E(|i⟩⟨j|)` (trace d).
    pub fn choi(&self) -> CMat {
        let d = self.dim();
        let s = self.superoperator();
        let mut choi = CMat::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        choi[(i * d + k, j * d + l)] = s[(k * d + l, i * d + j)];
                    }
                }
            }
        }
        choi
    }

    /// Linear action on an arbitrary operator (no state validation).
    pub fn apply_matrix(&self, m: &CMat) -> CMat {
        if let Some(kraus) = &self.kraus {
            return apply_kraus(kraus, m);
        }
        let s = self.superop.as_ref().unwrap();
        unvectorize(&(s * vectorize(m)), self.dim(), self.dim())
    }

    /// Apply to a state; the output is validated as a density operator.
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "channel on dimension {} applied to state of dimension {}",
                self.dim(),
                rho.dim()
            )));
        }
        let out = self.apply_matrix(rho.matrix());
        DensityOperator::new(out, self.shape.clone())
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &QuantumChannel) -> Result<QuantumChannel> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "composing channels of dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        let s = self.superoperator() * other.superoperator();
        QuantumChannel::from_superoperator(s, other.shape.clone())
    }

    /// Deviation of `Σ K†K` from the identity.
    pub fn trace_preservation_deviation(&self) -> f64 {
        let d = self.dim();
        let mut sum = CMat::zeros(d, d);
        for k in self.kraus_family() {
            sum += k.adjoint() * &k;
        }
        qmat::max_abs_diff(&sum, &identity(d))
    }
}

pub(crate) fn apply_kraus(kraus: &[CMat], m: &CMat) -> CMat {
    let d = m.nrows();
    let mut out = CMat::zeros(d, d);
    for k in kraus {
        out += k * m * k.adjoint();
    }
    out
}

pub(crate) fn superop_from_kraus(kraus: &[CMat]) -> CMat {
    let d = kraus[0].nrows();
    let mut s = CMat::zeros(d * d, d * d);
    for k in kraus {
        s += tensor(k, &k.conjugate());
    }
    s
}

/// Minimal Kraus family from a Choi matrix (eigenvalues above `1e-12` kept).
pub(crate) fn kraus_from_choi(choi: &CMat, dim: usize) -> Vec<CMat> {
    let tol = ToleranceProfile { herm: 1e-7, ..ToleranceProfile::default() };
    let (vals, vecs) = qmat::eig_hermitian(choi, &tol).expect("Choi matrix of a CP map is Hermitian");
    let mut kraus = Vec::new();
    for (idx, &lam) in vals.iter().enumerate() {
        if lam > 1e-12 {
            let scale = cr(lam.sqrt());
            let mut k = CMat::zeros(dim, dim);
            for i in 0..dim {
                for out_k in 0..dim {
                    k[(out_k, i)] = vecs[(i * dim + out_k, idx)] * scale;
                }
            }
            kraus.push(k);
        }
    }
    kraus
}

pub fn identity_channel(shape: SubsystemShape) -> QuantumChannel {
    let d = shape.total_dim();
    QuantumChannel { kraus: Some(vec![identity(d)]), superop: None, shape }
}

pub fn unitary_channel(u: CMat, shape: SubsystemShape) -> Result<QuantumChannel> {
    shape.check_matches(&u)?;
    let tol = ToleranceProfile::default();
    let dev = qmat::max_abs_diff(&(u.adjoint() * &u), &identity(u.nrows()));
    if dev > tol.unitary {
        return Err(Error::InvalidParameter(format!("matrix is not unitary (deviation {dev:.3e})")));
    }
    Ok(QuantumChannel { kraus: Some(vec![u]), superop: None, shape })
}

/// The channel that discards its input and prepares `sigma`.
pub fn constant_channel(sigma: &DensityOperator) -> QuantumChannel {
    let d = sigma.dim();
    let tol = ToleranceProfile::default();
    let (vals, vecs) = qmat::eig_hermitian(sigma.matrix(), &tol).expect("density operator is Hermitian");
    let mut kraus = Vec::new();
    for (a, &s) in vals.iter().enumerate() {
        let s = s.max(0.0);
        if s < 1e-15 {
            continue;
        }
        let amp = cr(s.sqrt());
        let col = vecs.column(a);
        for m in 0..d {
            // √s_a |a⟩⟨m|
            let mut k = CMat::zeros(d, d);
            for i in 0..d {
                k[(i, m)] = col[i] * amp;
            }
            kraus.push(k);
        }
    }
    QuantumChannel { kraus: Some(kraus), superop: None, shape: sigma.shape().clone() }
}

/// Mixing channel `ρ ↦ p·σ + (1−p)·ρ`.
pub fn mixing_channel(sigma: &DensityOperator, p: f64) -> Result<QuantumChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("mixing probability {p} outside [0, 1]")));
    }
    let d = sigma.dim();
    let mut kraus = vec![identity(d).scale((1.0 - p).sqrt())];
    if p > 0.0 {
        let scale = cr(p.sqrt());
        for k in constant_channel(sigma).kraus_family() {
            kraus.push(k * scale);
        }
    }
    QuantumChannel::from_kraus(kraus, sigma.shape().clone())
}

/// Exponential-relaxation snapshot `ρ ↦ e^{−t/τ}ρ + (1−e^{−t/τ})γ`, the
/// collision-model thermalization at time `t` with timescale `tau`.
pub fn partial_thermalization(gamma: &DensityOperator, t: f64, tau: f64) -> Result<QuantumChannel> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time {t} must be >= 0")));
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("timescale {tau} must be > 0")));
    }
    mixing_channel(gamma, 1.0 - (-t / tau).exp())
}

/// Seeded random pure-state projectors, used as probe sets for norm
/// estimates over channels.
pub fn probe_states(dim: usize, count: usize, seed: u64) -> Vec<CMat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| projector(&haar_state_vector(dim, &mut rng))).collect()
}

/// Largest output sup-norm distance between two channels over a probe set.
/// A lower bound on the true induced sup-norm distance.
pub fn probe_sup_distance(a: &QuantumChannel, b: &QuantumChannel, probes: &[CMat]) -> f64 {
    let sa = a.superoperator();
    let sb = b.superoperator();
    let d = a.dim();
    probes
        .iter()
        .map(|p| {
            let v = vectorize(p);
            let diff = &sa * &v - &sb * &v;
            sup_norm(&unvectorize(&diff, d, d))
        })
        .fold(0.0, f64::max)
}

#[derive(Serialize, Deserialize)]
struct ChannelJson {
    shape: Vec<usize>,
    kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

/// Serialize a channel as `{shape, kraus}` with complex entries as
/// `[re, im]` pairs, row-major.
pub fn channel_to_json(ch: &QuantumChannel) -> String {
    let kraus = ch
        .kraus_family()
        .iter()
        .map(|k| {
            (0..k.nrows())
                .map(|i| (0..k.ncols()).map(|j| [k[(i, j)].re, k[(i, j)].im]).collect())
                .collect()
        })
        .collect();
    let doc = ChannelJson { shape: ch.shape().dims().to_vec(), kraus };
    serde_json::to_string_pretty(&doc).expect("channel serialization cannot fail")
}

pub fn channel_from_json(text: &str) -> Result<QuantumChannel> {
    let doc: ChannelJson =
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("channel JSON: {e}")))?;
    let shape = SubsystemShape::new(doc.shape)?;
    let d = shape.total_dim();
    let mut kraus = Vec::with_capacity(doc.kraus.len());
    for rows in &doc.kraus {
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch("channel JSON Kraus dimensions".into()));
        }
        kraus.push(CMat::from_fn(d, d, |i, j| C64::new(rows[i][j][0], rows[i][j][1])));
    }
    QuantumChannel::from_kraus(kraus, shape)
}

/// Tensor product of local channels acting on the joined shape.
pub fn product_channel(locals: &[QuantumChannel]) -> QuantumChannel {
    assert!(!locals.is_empty(), "product of zero channels");
    let mut kraus: Vec<CMat> = locals[0].kraus_family();
    let mut shape = locals[0].shape().clone();
    for local in &locals[1..] {
        let theirs = local.kraus_family();
        let mut next = Vec::with_capacity(kraus.len() * theirs.len());
        for a in &kraus {
            for b in &theirs {
                next.push(tensor(a, b));
            }
        }
        kraus = next;
        shape = shape.join(local.shape());
    }
    QuantumChannel { kraus: Some(kraus), superop: None, shape }
}
