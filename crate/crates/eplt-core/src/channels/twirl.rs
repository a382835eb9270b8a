//! Twirling operations: the exact `(U ⊗ U*)` twirl onto the isotropic
//! family, finite unitary 2-designs realizing it as an average, random
//! finite-depth approximations of it, and the GHZ-diagonalizing twirl for
//! multiqubit systems.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qmat::{c, cr, haar_unitary, identity, projector, tensor, CMat, SubsystemShape};
use crate::states::{self, DensityOperator, GhzSign};

use super::core::QuantumChannel;

/// Exact twirl of a bipartite `d×d` state.
///
/// The output is the unique isotropic state with the same overlap on the
/// maximally entangled state as the input, so no integration is involved:
/// `p = (F − 1/d²) / (1 − 1/d²)` with `F = ⟨Ψ_d⁺|ρ|Ψ_d⁺⟩`.
pub fn twirl_exact(rho: &DensityOperator) -> Result<DensityOperator> {
    let d = bipartite_local_dim(rho)?;
    let f = rho.expectation(&states::max_entangled_vector(d));
    let d2 = (d * d) as f64;
    let p = (f - 1.0 / d2) / (1.0 - 1.0 / d2);
    states::isotropic(d, p.clamp(-1.0 / (d2 - 1.0), 1.0))
}

fn bipartite_local_dim(rho: &DensityOperator) -> Result<usize> {
    let dims = rho.shape().dims();
    if dims.len() != 2 || dims[0] != dims[1] {
        return Err(Error::DimensionMismatch(format!(
            "twirl needs a bipartite d×d system, got {:?}",
            dims
        )));
    }
    Ok(dims[0])
}

fn fourier_gate(d: usize) -> CMat {
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    let norm = 1.0 / (d as f64).sqrt();
    CMat::from_fn(d, d, |j, k| {
        let phase = omega * (j * k) as f64;
        c(phase.cos() * norm, phase.sin() * norm)
    })
}

fn quadratic_phase_gate(d: usize) -> CMat {
    // diag(ω^{j(j−1)/2}); for d = 2 this is the usual S = diag(1, i) with
    // ω replaced by the primitive 4th root so that S² = Z.
    if d == 2 {
        return CMat::from_fn(2, 2, |i, j| {
            if i != j {
                cr(0.0)
            } else if i == 0 {
                cr(1.0)
            } else {
                c(0.0, 1.0)
            }
        });
    }
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    CMat::from_fn(d, d, |i, j| {
        if i != j {
            cr(0.0)
        } else {
            let phase = omega * ((i * (i + 1)) / 2 % d) as f64;
            c(phase.cos(), phase.sin())
        }
    })
}

fn shift_gate(d: usize) -> CMat {
    CMat::from_fn(d, d, |i, j| if i == (j + 1) % d { cr(1.0) } else { cr(0.0) })
}

/// Remove the global phase by making the first large entry real positive,
/// then quantize entries for hashing.
fn canonical_key(u: &CMat) -> Vec<(i64, i64)> {
    let mut phase = cr(1.0);
    for z in u.iter() {
        if z.norm() > 0.25 {
            phase = z.conj() / z.norm();
            break;
        }
    }
    u.iter()
        .map(|z| {
            let w = z * phase;
            ((w.re * 1e7).round() as i64, (w.im * 1e7).round() as i64)
        })
        .collect()
}

/// Single-qudit Clifford group for `d ∈ {2, 3}` by closure of the Fourier,
/// quadratic-phase and shift gates; an exact unitary 2-design (24 elements
/// projectively for qubits, 216 for qutrits).
pub fn two_design_unitaries(d: usize) -> Result<Vec<CMat>> {
    if d != 2 && d != 3 {
        return Err(Error::Unsupported(format!(
            "no exact finite 2-design wired in for local dimension {d} (available for d = 2, 3)"
        )));
    }
    let gens = [fourier_gate(d), quadratic_phase_gate(d), shift_gate(d)];
    let mut seen: HashMap<Vec<(i64, i64)>, CMat> = HashMap::new();
    let start = identity(d);
    seen.insert(canonical_key(&start), start.clone());
    let mut frontier = vec![start];
    while let Some(u) = frontier.pop() {
        for g in &gens {
            let v = g * &u;
            let key = canonical_key(&v);
            if !seen.contains_key(&key) {
                seen.insert(key, v.clone());
                frontier.push(v);
            }
            if seen.len() > 4096 {
                return Err(Error::InvalidParameter("design closure did not terminate".into()));
            }
        }
    }
    Ok(seen.into_values().collect())
}

/// Superoperator of the exact twirl on the bipartite `d×d` space, assembled
/// as the uniform average of `(U ⊗ U*)` conjugations over the 2-design.
pub fn twirl_superoperator(d: usize) -> Result<CMat> {
    let design = two_design_unitaries(d)?;
    let dim2 = d * d;
    let mut s = CMat::zeros(dim2 * dim2, dim2 * dim2);
    for u in &design {
        let w = tensor(u, &u.conjugate());
        s += tensor(&w, &w.conjugate());
    }
    Ok(s.scale(1.0 / design.len() as f64))
}

/// Finite random-unitary approximation of the twirl: the composition of
/// `n_factors` maps `T_k = ½·id + ½·(U_k ⊗ U_k*)·(U_k ⊗ U_k*)†` with Haar
/// `U_k`. Composition happens on superoperator matrices, so the cost is
/// linear in `n_factors` rather than exponential. The drawn unitaries are
/// returned for reproducibility.
pub fn twirl_sampled(d: usize, n_factors: usize, seed: u64) -> Result<(QuantumChannel, Vec<CMat>)> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("twirl needs local dimension >= 2, got {d}")));
    }
    let dim2 = d * d;
    let shape = SubsystemShape::bipartite(d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut superop = identity(dim2 * dim2);
    let mut unitaries = Vec::with_capacity(n_factors);
    for _ in 0..n_factors {
        let u = haar_unitary(d, &mut rng);
        let w = tensor(&u, &u.conjugate());
        let conj = tensor(&w, &w.conjugate());
        let factor = (identity(dim2 * dim2) + conj).scale(0.5);
        superop = factor * superop;
        unitaries.push(u);
    }
    let channel = QuantumChannel::from_superoperator(superop, shape)?;
    Ok((channel, unitaries))
}

/// GHZ-basis twirl of an `n`-qubit state, in closed form.
///
/// The output is diagonal in the GHZ basis: the two `j = 0` populations are
/// preserved separately, while for `j ≥ 1` the `±` pair is averaged.
pub fn ghz_twirl(rho: &DensityOperator) -> Result<DensityOperator> {
    let n = qubit_count(rho.shape())?;
    let half = 1usize << (n - 1);
    let dim = 1usize << n;
    let mut out = CMat::zeros(dim, dim);
    for sign in [GhzSign::Plus, GhzSign::Minus] {
        let v = states::ghz_vector(n, 0, sign)?;
        out += projector(&v).scale(rho.expectation(&v));
    }
    for j in 1..half {
        let vp = states::ghz_vector(n, j, GhzSign::Plus)?;
        let vm = states::ghz_vector(n, j, GhzSign::Minus)?;
        let lam = 0.5 * (rho.expectation(&vp) + rho.expectation(&vm));
        out += (projector(&vp) + projector(&vm)).scale(lam);
    }
    Ok(DensityOperator::new_unchecked(out, rho.shape().clone()))
}

fn qubit_count(shape: &SubsystemShape) -> Result<usize> {
    if shape.parties() < 2 || shape.dims().iter().any(|&d| d != 2) {
        return Err(Error::DimensionMismatch(format!(
            "GHZ twirl needs >= 2 qubit parties, got {:?}",
            shape.dims()
        )));
    }
    Ok(shape.parties())
}

/// The GHZ twirl as a finite mixture of product single-qubit unitaries:
/// each term is `(weight, per-party 2×2 unitaries)`.
///
/// Three commuting averaging stages are flattened into one mixture:
/// 1. `{I, X^{⊗n}}` removes coherences between the `±` branches;
/// 2. even-parity `Z` patterns remove coherences between different `j`;
/// 3. phase patterns `S^{k_i}` with a compensating power on the last qubit
///    flip the branch sign of exactly the `j ≢ 0` subspaces, averaging the
///    `±` pair populations for `j ≥ 1` while fixing both `j = 0` ones.
pub fn ghz_twirl_unitary_terms(n: usize) -> Result<Vec<(f64, Vec<CMat>)>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("GHZ twirl needs n >= 2 qubits, got {n}")));
    }
    let x = shift_gate(2);
    let z = CMat::from_fn(2, 2, |i, j| if i != j { cr(0.0) } else if i == 0 { cr(1.0) } else { cr(-1.0) });
    let s_powers: Vec<CMat> = (0..4)
        .map(|m| {
            CMat::from_fn(2, 2, |i, j| {
                if i != j {
                    cr(0.0)
                } else if i == 0 {
                    cr(1.0)
                } else {
                    // i^m
                    match m % 4 {
                        0 => cr(1.0),
                        1 => c(0.0, 1.0),
                        2 => cr(-1.0),
                        _ => c(0.0, -1.0),
                    }
                }
            })
        })
        .collect();

    let half = 1usize << (n - 1);
    let weight = 1.0 / (2.0 * (half * half) as f64);
    let mut terms = Vec::with_capacity(2 * half * half);
    for flip in 0..2usize {
        for zpat in 0..(1usize << n) {
            if (zpat.count_ones() % 2) != 0 {
                continue;
            }
            for kpat in 0..half {
                let mut locals = Vec::with_capacity(n);
                let k_weight = kpat.count_ones() as usize;
                for party in 0..n {
                    let s_pow = if party + 1 < n {
                        usize::from(kpat >> party & 1 == 1)
                    } else {
                        (4 - k_weight % 4) % 4
                    };
                    let mut u = identity(2);
                    if flip == 1 {
                        u = &x * u;
                    }
                    if zpat >> party & 1 == 1 {
                        u = &z * u;
                    }
                    u = &s_powers[s_pow] * u;
                    locals.push(u);
                }
                terms.push((weight, locals));
            }
        }
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec;
    use crate::qmat::{basis_vector, max_abs_diff, random_density_matrix, vectorize, unvectorize, sup_norm};
    use crate::states::max_entangled;
    use rand::Rng;

    #[test]
    fn design_sizes_and_frame_potential() {
        for (d, expected) in [(2usize, 24usize), (3, 216)] {
            let design = two_design_unitaries(d).unwrap();
            assert_eq!(design.len(), expected, "closure size for d = {d}");
            // unitary within 1e-12
            for u in &design {
                assert!(max_abs_diff(&(u.adjoint() * u), &identity(d)) < 1e-12);
            }
            // frame potential of an exact 2-design equals 2
            let mut pot = 0.0;
            for a in &design {
                for b in &design {
                    pot += (a.adjoint() * b).trace().norm().powi(4);
                }
            }
            pot /= (design.len() * design.len()) as f64;
            assert!((pot - 2.0).abs() < 1e-9, "frame potential {pot} for d = {d}");
        }
        assert!(matches!(two_design_unitaries(4), Err(Error::Unsupported(_))));
    }

    #[test]
    fn twirl_fixes_extremes() {
        for d in [2usize, 3] {
            let psi = max_entangled(d);
            let out = twirl_exact(&psi).unwrap();
            assert!(max_abs_diff(out.matrix(), psi.matrix()) < 1e-12);
            let flat = states::isotropic(d, 0.0).unwrap();
            let out = twirl_exact(&flat).unwrap();
            assert!(max_abs_diff(out.matrix(), flat.matrix()) < 1e-12);
        }
    }

    #[test]
    fn twirl_of_product_ground_state() {
        // |00⟩⟨00| has F = 1/2... for d = 2: F = 1/d = 1/2? No: ⟨Ψ⁺|00⟩ = 1/√2
        // gives F = 1/2, hence p = (1/2 − 1/4)/(3/4) = 1/3.
        let v = basis_vector(4, 0);
        let rho = DensityOperator::new(projector(&v), SubsystemShape::bipartite(2)).unwrap();
        let out = twirl_exact(&rho).unwrap();
        let expected = states::isotropic(2, 1.0 / 3.0).unwrap();
        assert!(max_abs_diff(out.matrix(), expected.matrix()) < 1e-12);
    }

    #[test]
    fn twirl_matches_haar_monte_carlo() {
        // 10⁵-sample Haar average of (U⊗U*)ρ(U⊗U*)† against the closed form.
        let v = basis_vector(4, 0);
        let rho = projector(&v);
        let samples = 100_000usize;
        let chunks = exec::run_indexed(100, |chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(exec::task_seed(0xACC0, chunk as u64));
            let mut acc = CMat::zeros(4, 4);
            for _ in 0..samples / 100 {
                let u = haar_unitary(2, &mut rng);
                let w = tensor(&u, &u.conjugate());
                acc += &w * &rho * w.adjoint();
            }
            acc
        });
        let mut mean = CMat::zeros(4, 4);
        for c_ in chunks {
            mean += c_;
        }
        mean /= cr(samples as f64);
        let expected = states::isotropic(2, 1.0 / 3.0).unwrap();
        // Monte-Carlo error ~ 1/√n per entry
        assert!(max_abs_diff(&mean, expected.matrix()) < 5.0 / (samples as f64).sqrt());
    }

    #[test]
    fn design_average_equals_exact_twirl() {
        for d in [2usize, 3] {
            let s = twirl_superoperator(d).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(17);
            for _ in 0..5 {
                let rho = random_density_matrix(d * d, &mut rng);
                let via_superop = unvectorize(&(&s * vectorize(&rho)), d * d, d * d);
                let rho_op = DensityOperator::new(rho, SubsystemShape::bipartite(d)).unwrap();
                let closed = twirl_exact(&rho_op).unwrap();
                assert!(max_abs_diff(&via_superop, closed.matrix()) < 1e-12);
            }
        }
    }

    #[test]
    fn sampled_twirl_empty_composition_is_identity() {
        let (ch, us) = twirl_sampled(2, 0, 5).unwrap();
        assert!(us.is_empty());
        assert!(max_abs_diff(&ch.superoperator(), &identity(16)) < 1e-15);
    }

    #[test]
    fn sampled_twirl_fixes_max_entangled_exactly() {
        let psi = max_entangled(2);
        for seed in 0..5 {
            let (ch, us) = twirl_sampled(2, 7, seed).unwrap();
            assert_eq!(us.len(), 7);
            let out = ch.apply_matrix(psi.matrix());
            assert!(max_abs_diff(&out, psi.matrix()) < 1e-12);
        }
    }

    #[test]
    fn sampled_twirl_is_reproducible() {
        let (a, ua) = twirl_sampled(2, 4, 99).unwrap();
        let (b, ub) = twirl_sampled(2, 4, 99).unwrap();
        assert_eq!(ua, ub);
        assert!(max_abs_diff(&a.superoperator(), &b.superoperator()) < 1e-15);
    }

    #[test]
    fn sampled_twirl_mean_square_error_halves_per_factor() {
        // For any fixed input the mean-square output error contracts by
        // exactly 1/2 per factor: ⟨‖(T − T^{(N)})(ρ)‖²⟩ ≤ 2^{−N}·‖ρ − T(ρ)‖².
        // Checked at N ∈ {6, 10} on a probe average with 3σ slack.
        let realizations = 200usize;
        let exact = twirl_superoperator(2).unwrap();
        let probes = {
            let mut p = super::super::core::probe_states(4, 80, 0xBEEF);
            p.push(max_entangled(2).into_matrix());
            p
        };
        for n_factors in [6usize, 10] {
            let avg_sq: Vec<f64> = exec::run_indexed(realizations, |i| {
                let (ch, _) =
                    twirl_sampled(2, n_factors, exec::task_seed(0x715, i as u64)).unwrap();
                let s = ch.superoperator();
                probes
                    .iter()
                    .map(|probe| {
                        let diff = &s * vectorize(probe) - &exact * vectorize(probe);
                        sup_norm(&unvectorize(&diff, 4, 4)).powi(2)
                    })
                    .sum::<f64>()
                    / probes.len() as f64
            });
            let mean: f64 = avg_sq.iter().sum::<f64>() / realizations as f64;
            let var =
                avg_sq.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / realizations as f64;
            let se = (var / realizations as f64).sqrt();
            let bound = 2f64.powi(-(n_factors as i32));
            assert!(
                mean <= bound + 3.0 * se,
                "N={n_factors}: mean {mean} vs bound {bound} + 3σ {}",
                3.0 * se
            );
        }
    }

    #[test]
    fn ghz_twirl_output_form() {
        let n = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let rho = DensityOperator::new(random_density_matrix(8, &mut rng), SubsystemShape::qubits(n)).unwrap();
        let out = ghz_twirl(&rho).unwrap();
        // populations preserved at j = 0, averaged for j >= 1
        for sign in [GhzSign::Plus, GhzSign::Minus] {
            let v = states::ghz_vector(n, 0, sign).unwrap();
            assert!((out.expectation(&v) - rho.expectation(&v)).abs() < 1e-12);
        }
        for j in 1..4 {
            let vp = states::ghz_vector(n, j, GhzSign::Plus).unwrap();
            let vm = states::ghz_vector(n, j, GhzSign::Minus).unwrap();
            let avg = 0.5 * (rho.expectation(&vp) + rho.expectation(&vm));
            assert!((out.expectation(&vp) - avg).abs() < 1e-12);
            assert!((out.expectation(&vm) - avg).abs() < 1e-12);
        }
        // diagonal in the GHZ basis: all off-diagonal overlaps vanish
        let mut basis = Vec::new();
        for j in 0..4 {
            for sign in [GhzSign::Plus, GhzSign::Minus] {
                basis.push(states::ghz_vector(n, j, sign).unwrap());
            }
        }
        for (a, va) in basis.iter().enumerate() {
            for (b, vb) in basis.iter().enumerate() {
                if a != b {
                    let olap = (va.adjoint() * out.matrix() * vb)[(0, 0)].norm();
                    assert!(olap < 1e-12, "coherence {olap} at ({a},{b})");
                }
            }
        }
        // idempotent
        let twice = ghz_twirl(&out).unwrap();
        assert!(max_abs_diff(twice.matrix(), out.matrix()) < 1e-12);
        // single-party marginals are maximally mixed
        for party in 0..n {
            let marg = out.marginal(&[party]).unwrap();
            assert!(max_abs_diff(marg.matrix(), &identity(2).scale(0.5)) < 1e-12);
        }
    }

    #[test]
    fn ghz_isotropic_states_are_invariant() {
        let n = 3;
        let x = 0.4;
        let ghz = states::ghz_basis(n, 0, GhzSign::Plus).unwrap();
        let mat = ghz.matrix().scale(x) + identity(8).scale((1.0 - x) / 8.0);
        let rho = DensityOperator::new(mat, SubsystemShape::qubits(n)).unwrap();
        let out = ghz_twirl(&rho).unwrap();
        assert!(max_abs_diff(out.matrix(), rho.matrix()) < 1e-12);
    }

    #[test]
    fn ghz_unitary_terms_average_to_closed_form() {
        for n in [2usize, 3] {
            let terms = ghz_twirl_unitary_terms(n).unwrap();
            let total: f64 = terms.iter().map(|(w, _)| w).sum();
            assert!((total - 1.0).abs() < 1e-12);
            let dim = 1usize << n;
            let mut rng = ChaCha8Rng::seed_from_u64(29);
            for _ in 0..3 {
                let rho = random_density_matrix(dim, &mut rng);
                let mut avg = CMat::zeros(dim, dim);
                for (w, locals) in &terms {
                    let u = crate::qmat::tensor_all(locals);
                    avg += (&u * &rho * u.adjoint()).scale(*w);
                }
                let rho_op = DensityOperator::new(rho, SubsystemShape::qubits(n)).unwrap();
                let closed = ghz_twirl(&rho_op).unwrap();
                assert!(max_abs_diff(&avg, closed.matrix()) < 1e-12, "n = {n}");
            }
        }
    }

    #[test]
    fn sampled_twirl_seeds_decorrelate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let _ = rng.random::<u64>();
        let (a, _) = twirl_sampled(2, 3, 1).unwrap();
        let (b, _) = twirl_sampled(2, 3, 2).unwrap();
        assert!(max_abs_diff(&a.superoperator(), &b.superoperator()) > 1e-3);
    }
}
