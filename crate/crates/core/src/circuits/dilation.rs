//! The random dilation superchannel `Ξ`, which turns `Λ^⊗n` into
//! `E_{V∼Dil(Λ)}[V^⊗n (·) V^{†⊗n}]` for every `Λ` of Kraus rank at most `r`.
//!
//! Fourier form: pre-processing adjoins `|+_{S_n}⟩` and applies the
//! transposed controlled permutation on the query inputs, keeping the group
//! register as memory; post-processing applies ctrl-π on the query outputs,
//! the QFT, and the environment tail.
//!
//! Kronecker form: the same superchannel with the memory held in the Fourier
//! basis `|μ, k, i⟩`. Pre-processing Schur-transforms the inputs, moves the
//! `S_μ` index into memory, and re-enters the inputs half of
//! `|φ⁺_{S_μ}⟩ = Σ_k |k⟩|k⟩/√m_μ`. Post-processing Schur-transforms the
//! outputs and couples memory to outputs with a Kronecker gate followed by
//! the inverse of a relation-defined Kronecker gate.

use super::{fourier_tail, tail_then, ParallelSuperchannel};
use crate::combinatorics::Partition;
use crate::error::{Error, Result};
use crate::kronecker::KroneckerTransform;
use crate::linalg::{cr, kron, CMat};
use crate::schur::{check_budget, schur_cost, SchurTransform, DEFAULT_BUDGET};
use crate::symrep::{ctrl_pi, ctrl_pi_transpose, plus_state, qft_from_group, SymmetricGroup};

fn check_sizes(n: usize, d_in: usize, d_out: usize, r: usize, budget: usize) -> Result<()> {
    if n == 0 || d_in == 0 || d_out == 0 || r == 0 {
        return Err(Error::EmptyInput("dilation superchannel needs n, d_I, d_O, r ≥ 1"));
    }
    for (what, d) in [("inputs", d_in), ("outputs", d_out), ("environment", r)] {
        check_budget(&format!("dilation superchannel {what} (n = {n}, d = {d})"), schur_cost(n, d), budget)?;
    }
    Ok(())
}

/// Fourier form with the default size budget.
pub fn random_dilation_superchannel(n: usize, d_in: usize, d_out: usize, r: usize) -> Result<ParallelSuperchannel> {
    fourier_form(n, d_in, d_out, r, DEFAULT_BUDGET)
}

/// Kronecker form with the default size budget.
pub fn random_dilation_kronecker(n: usize, d_in: usize, d_out: usize, r: usize) -> Result<ParallelSuperchannel> {
    kronecker_form(n, d_in, d_out, r, DEFAULT_BUDGET)
}

pub fn fourier_form(n: usize, d_in: usize, d_out: usize, r: usize, budget: usize) -> Result<ParallelSuperchannel> {
    check_sizes(n, d_in, d_out, r, budget)?;
    let group = SymmetricGroup::cached(n)?;
    let (q_in, q_out) = (d_in.pow(n as u32), d_out.pow(n as u32));
    let plus = plus_state(n);
    let adjoin = kron(&CMat::from_column_slice(plus.len(), 1, plus.as_slice()), &CMat::identity(q_in, q_in));
    let pre = ctrl_pi_transpose(n, d_in) * adjoin;
    let rotate = kron(&qft_from_group(&group), &CMat::identity(q_out, q_out)) * ctrl_pi(n, d_out);
    let post = tail_then(&fourier_tail(n, r, budget)?, q_out, &rotate);
    ParallelSuperchannel::new(n, d_in, d_out, group.order(), vec![pre], post)
}

pub fn kronecker_form(n: usize, d_in: usize, d_out: usize, r: usize, budget: usize) -> Result<ParallelSuperchannel> {
    check_sizes(n, d_in, d_out, r, budget)?;
    let group = SymmetricGroup::cached(n)?;
    let q_out = d_out.pow(n as u32);
    let pre = kronecker_pre(n, d_in, budget)?;
    let schur_out = SchurTransform::cached(n, d_out, budget)?;
    let coupling = fourier_coupling(n, &schur_out)?;
    let order = group.order();
    let to_schur = kron(&CMat::identity(order, order), schur_out.unitary());
    let rotate = to_schur.adjoint() * coupling * to_schur;
    let post = tail_then(&fourier_tail(n, r, budget)?, q_out, &rotate);
    ParallelSuperchannel::new(n, d_in, d_out, order, vec![pre], post)
}

/// `I^⊗n → M ⊗ I^⊗n`: `U_Sch†`-conjugate of
/// `|μ, u, i⟩ ↦ Σ_k |μ, k, i⟩_M ⊗ |μ, u, k⟩ / √m_μ`.
pub fn kronecker_pre(n: usize, d_in: usize, budget: usize) -> Result<CMat> {
    let group = SymmetricGroup::cached(n)?;
    let schur = SchurTransform::cached(n, d_in, budget)?;
    let offsets = group.fourier_offsets();
    let q = schur.dim();
    let mut core = CMat::zeros(group.order() * q, q);
    for b in schur.blocks() {
        let m = b.sym_dim;
        let mem = offsets[b.irrep_index];
        let amp = cr(1.0 / (m as f64).sqrt());
        for u in 0..b.unitary_dim {
            for i in 0..m {
                for k in 0..m {
                    core[((mem + k * m + i) * q + b.row(u, k), b.row(u, i))] = amp;
                }
            }
        }
    }
    let order = group.order();
    Ok(kron(&CMat::identity(order, order), &schur.unitary().adjoint()) * core * schur.unitary())
}

/// `(QFT ⊗ 1)·ctrl-π·(QFT† ⊗ 1)` on `C^{n!} ⊗ (C^d)^⊗n`, with the system in
/// its Schur basis, assembled from Kronecker transforms:
///
/// `⟨λ', k, l; ν, v, b| · |λ'', k', l'; ν, v, b'⟩ =
///  Σ_a ⟨λ'', l', a| CG^{rel}_{λ'ν} |l, b⟩ · ⟨λ', k, a| CG_{λ''ν} |k', b'⟩`.
///
/// The second factor is the controlled Kronecker gate on `(k', b')`; the
/// first is the inverse of the gate whose blocks are defined from
/// `CG_{λ''ν}` through the coefficient relation, so no multiplicity-basis
/// convention has to be shared between different transforms.
pub fn fourier_coupling(n: usize, schur_out: &SchurTransform) -> Result<CMat> {
    let group = SymmetricGroup::cached(n)?;
    let offsets = group.fourier_offsets();
    let irreps = group.irreps();
    let q = schur_out.dim();
    let order = group.order();
    let mut out = CMat::zeros(order * q, order * q);
    let shapes: Vec<Partition> = irreps.iter().map(|ir| ir.shape.clone()).collect();
    for nb in schur_out.blocks() {
        let nu = &nb.shape;
        let m_nu = nb.sym_dim;
        let direct: Vec<KroneckerTransform> =
            shapes.iter().map(|s| KroneckerTransform::new(s, nu)).collect::<Result<_>>()?;
        let related: Vec<KroneckerTransform> =
            shapes.iter().map(|s| KroneckerTransform::from_relation(s, nu)).collect::<Result<_>>()?;
        for (x1, ir1) in irreps.iter().enumerate() {
            // λ' = ir1 (output label), λ'' = ir2 (input label).
            let m1 = ir1.dim();
            for (x2, ir2) in irreps.iter().enumerate() {
                let m2 = ir2.dim();
                let (Some(cg_block), Some(rel_block)) =
                    (direct[x2].block(&ir1.shape), related[x1].block(&ir2.shape))
                else {
                    continue;
                };
                let g = cg_block.multiplicity;
                let cg = direct[x2].matrix();
                let rel = related[x1].matrix();
                for k in 0..m1 {
                    for l in 0..m1 {
                        for kp in 0..m2 {
                            for lp in 0..m2 {
                                for b in 0..m_nu {
                                    for bp in 0..m_nu {
                                        let mut value = 0.0;
                                        for a in 0..g {
                                            value += rel[(rel_block.row(lp, a), l * m_nu + b)]
                                                * cg[(cg_block.row(k, a), kp * m_nu + bp)];
                                        }
                                        if value == 0.0 {
                                            continue;
                                        }
                                        let row_g = offsets[x1] + k * m1 + l;
                                        let col_g = offsets[x2] + kp * m2 + lp;
                                        for v in 0..nb.unitary_dim {
                                            out[(row_g * q + nb.row(v, b), col_g * q + nb.row(v, bp))] = cr(value);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}
