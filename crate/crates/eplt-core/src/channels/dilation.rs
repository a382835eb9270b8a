//! Correlated-bath dilation of an LOSR mixture: every finite mixture of
//! product channels is realized by local unitaries coupling each party to a
//! private ancilla pair, with all the shared randomness carried by a
//! classically correlated (separable, full-rank on its support) bath state.

use crate::error::{Error, Result};
use crate::qmat::{self, cr, identity, tensor, CMat, SubsystemShape};
use crate::states::DensityOperator;
use crate::tolerance::ToleranceProfile;

use super::core::{kraus_from_choi, QuantumChannel};
use super::losr::LosrMixture;

/// Dilation of a bipartite LOSR mixture with `D` terms.
///
/// Per term `i` and party `X`, `stinespring_x[i]` is a unitary on `X X′`
/// (dimension `d·d²`) with `E_X^i(σ) = tr_{X′}[U_i (σ ⊗ |0⟩⟨0|) U_i†]`. The
/// controlled unitaries `V_XX′X″ = Σ_i U_i ⊗ |i⟩⟨i|` condition on a shared
/// register pair `A″B″` prepared in `Σ_i p_i |ii⟩⟨ii|`; they are assembled on
/// demand since their dimension grows with `D`.
#[derive(Debug, Clone)]
pub struct BathDilation {
    stinespring_a: Vec<CMat>,
    stinespring_b: Vec<CMat>,
    weights: Vec<f64>,
    dim_a: usize,
    dim_b: usize,
}

impl BathDilation {
    /// Classical-register populations `p_i` of the bath.
    pub fn bath_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn term_count(&self) -> usize {
        self.weights.len()
    }

    pub fn stinespring_a(&self) -> &[CMat] {
        &self.stinespring_a
    }

    pub fn stinespring_b(&self) -> &[CMat] {
        &self.stinespring_b
    }

    /// Shape of the ancillas `[X′ = d², X″ = D]` for party A.
    pub fn ancilla_shape_a(&self) -> SubsystemShape {
        SubsystemShape::new(vec![self.dim_a * self.dim_a, self.term_count()]).expect("nonzero dims")
    }

    pub fn ancilla_shape_b(&self) -> SubsystemShape {
        SubsystemShape::new(vec![self.dim_b * self.dim_b, self.term_count()]).expect("nonzero dims")
    }

    /// `V_AA′A″ = Σ_i U^i_AA′ ⊗ |i⟩⟨i|_A″`, dimension `d³·D`.
    pub fn controlled_unitary_a(&self) -> CMat {
        controlled_unitary(&self.stinespring_a)
    }

    pub fn controlled_unitary_b(&self) -> CMat {
        controlled_unitary(&self.stinespring_b)
    }

    /// Bath state `|00⟩⟨00|_{A′B′} ⊗ Σ_i p_i |ii⟩⟨ii|_{A″B″}` as a dense
    /// operator on `[A′, B′, A″, B″]`. `None` when the dense form would
    /// exceed `max_dim` rows (it grows as `d⁴·D²`).
    pub fn bath_state_matrix(&self, max_dim: usize) -> Option<(CMat, SubsystemShape)> {
        let (da2, db2) = (self.dim_a * self.dim_a, self.dim_b * self.dim_b);
        let d_terms = self.term_count();
        let total = da2 * db2 * d_terms * d_terms;
        if total > max_dim {
            return None;
        }
        let primes = tensor(&qmat::basis_matrix(da2, 0, 0), &qmat::basis_matrix(db2, 0, 0));
        let mut register = CMat::zeros(d_terms * d_terms, d_terms * d_terms);
        for (i, &p) in self.weights.iter().enumerate() {
            let idx = i * d_terms + i;
            register[(idx, idx)] = cr(p);
        }
        let shape = SubsystemShape::new(vec![da2, db2, d_terms, d_terms]).expect("nonzero dims");
        Some((tensor(&primes, &register), shape))
    }

    /// Action of the dilation on a bipartite operator: conjugate by the
    /// controlled unitaries and trace out all four ancillas.
    ///
    /// The controlled structure is exploited: the bath register is diagonal,
    /// so only the matched `|ii⟩` blocks survive the trace, and inside each
    /// block tracing `X′` out of `U_i(σ ⊗ |0⟩⟨0|)U_i†` reads the Kraus
    /// operators back out of the unitary's first block column.
    pub fn apply_matrix(&self, rho: &CMat) -> CMat {
        let (da, db) = (self.dim_a, self.dim_b);
        let dim = da * db;
        let mut out = CMat::zeros(dim, dim);
        for i in 0..self.term_count() {
            let ka = stinespring_kraus(&self.stinespring_a[i], da);
            let kb = stinespring_kraus(&self.stinespring_b[i], db);
            let mut term = CMat::zeros(dim, dim);
            for a in &ka {
                for b in &kb {
                    let k = tensor(a, b);
                    term += &k * rho * k.adjoint();
                }
            }
            out += term.scale(self.weights[i]);
        }
        out
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        let dim = self.dim_a * self.dim_b;
        if rho.dim() != dim {
            return Err(Error::DimensionMismatch(format!(
                "dilation on dimension {dim} applied to state of dimension {}",
                rho.dim()
            )));
        }
        DensityOperator::new(
            self.apply_matrix(rho.matrix()),
            SubsystemShape::new(vec![self.dim_a, self.dim_b])?,
        )
    }
}

fn controlled_unitary(blocks: &[CMat]) -> CMat {
    let inner = blocks[0].nrows();
    let d_terms = blocks.len();
    let mut v = CMat::zeros(inner * d_terms, inner * d_terms);
    for (i, u) in blocks.iter().enumerate() {
        for r in 0..inner {
            for c_ in 0..inner {
                // basis |x⟩_{XX′} ⊗ |i⟩_{X″} ↦ index x·D + i
                v[(r * d_terms + i, c_ * d_terms + i)] = u[(r, c_)];
            }
        }
    }
    v
}

/// Read `K_m[k, s] = ⟨k, m|U|s, 0⟩` back out of a Stinespring unitary.
fn stinespring_kraus(u: &CMat, d: usize) -> Vec<CMat> {
    let anc = d * d;
    (0..anc)
        .map(|m| CMat::from_fn(d, d, |k, s| u[(k * anc + m, s * anc)]))
        .collect()
}

/// Build the Stinespring unitary of a single local channel: an isometry
/// `|s⟩⊗|0⟩ ↦ Σ_m (K_m|s⟩)⊗|m⟩` from a (≤ d²)-element Kraus family,
/// completed to a unitary on `X X′` by Gram–Schmidt over the remaining
/// ancilla columns.
fn stinespring_unitary(channel: &QuantumChannel, tol: &ToleranceProfile) -> Result<CMat> {
    let d = channel.dim();
    let anc = d * d;
    let total = d * anc;
    let mut kraus = channel.kraus_family();
    if kraus.len() > anc {
        // minimal family via the Choi matrix; its rank is at most d²
        kraus = kraus_from_choi(&channel.choi(), d);
        if kraus.len() > anc {
            return Err(Error::InvalidMixture(format!(
                "channel needs {} Kraus operators, more than d² = {anc}",
                kraus.len()
            )));
        }
    }
    kraus.resize(anc, CMat::zeros(d, d));

    let mut u = CMat::zeros(total, total);
    let mut accepted: Vec<qmat::CVec> = Vec::with_capacity(total);
    for s in 0..d {
        let mut col = qmat::CVec::zeros(total);
        for (m, k) in kraus.iter().enumerate() {
            for out_k in 0..d {
                col[out_k * anc + m] = k[(out_k, s)];
            }
        }
        u.set_column(s * anc, &col);
        accepted.push(col);
    }
    // fill the free columns (ancilla index ≠ 0) with an orthonormal
    // completion drawn deterministically from the computational basis
    let mut free_slots: Vec<usize> = (0..total).filter(|idx| idx % anc != 0).collect();
    free_slots.reverse();
    for cand in 0..total {
        if free_slots.is_empty() {
            break;
        }
        let mut v = qmat::CVec::zeros(total);
        v[cand] = cr(1.0);
        for a in &accepted {
            let overlap = (a.adjoint() * &v)[(0, 0)];
            v -= a * overlap;
        }
        let norm = v.norm();
        if norm > 1e-7 {
            v /= cr(norm);
            // second orthogonalization pass for numerical hygiene
            for a in &accepted {
                let overlap = (a.adjoint() * &v)[(0, 0)];
                v -= a * overlap;
            }
            v /= cr(v.norm());
            let slot = free_slots.pop().unwrap();
            u.set_column(slot, &v);
            accepted.push(v);
        }
    }
    if !free_slots.is_empty() {
        return Err(Error::InvalidMixture("Stinespring completion ran out of basis candidates".into()));
    }
    let dev = qmat::max_abs_diff(&(u.adjoint() * &u), &identity(total));
    if dev > tol.unitary {
        return Err(Error::InvalidMixture(format!("Stinespring completion not unitary (deviation {dev:.3e})")));
    }
    Ok(u)
}

/// Dilate a bipartite LOSR mixture into local bath couplings plus a
/// classically correlated bath register.
pub fn build_bath_dilation(mix: &LosrMixture) -> Result<BathDilation> {
    if mix.parties() != 2 {
        return Err(Error::InvalidMixture(format!(
            "bath dilation is bipartite; mixture has {} parties",
            mix.parties()
        )));
    }
    let tol = ToleranceProfile::default();
    let mut stinespring_a = Vec::new();
    let mut stinespring_b = Vec::new();
    let mut weights = Vec::new();
    for term in mix.terms() {
        if term.weight <= 0.0 {
            continue;
        }
        stinespring_a.push(stinespring_unitary(&term.locals[0], &tol)?);
        stinespring_b.push(stinespring_unitary(&term.locals[1], &tol)?);
        weights.push(term.weight);
    }
    if weights.is_empty() {
        return Err(Error::InvalidMixture("mixture has no positive-weight terms".into()));
    }
    Ok(BathDilation {
        stinespring_a,
        stinespring_b,
        weights,
        dim_a: mix.local_dims()[0],
        dim_b: mix.local_dims()[1],
    })
}
