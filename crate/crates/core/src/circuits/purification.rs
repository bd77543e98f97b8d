//! The random purification channel `Φ : (C^d)^⊗n → (C^r)^⊗n ⊗ (C^d)^⊗n`.

use super::{fourier_tail, tail_then};
use crate::channels::{DensityOperator, QuantumChannel};
use crate::error::{Error, Result};
use crate::linalg::{apply_kraus_trailing, cr, CMat};
use crate::schur::{check_budget, schur_cost, tensor_power, SchurTransform, DEFAULT_BUDGET};
use crate::symrep::{ctrl_pi, plus_state, qft_from_group, SymmetricGroup};

/// `W = (QFT ⊗ 1)·ctrl-π·(|+⟩ ⊗ 1)`, an isometry `(C^d)^⊗n → C^{n!} ⊗ (C^d)^⊗n`
/// whose component on `|λ, i, j⟩` is `P^λ_{ji}/√m_λ`.
pub fn fourier_isometry(n: usize, d: usize) -> Result<CMat> {
    let group = SymmetricGroup::cached(n)?;
    let sys = d.pow(n as u32);
    let plus = plus_state(n);
    let adjoin = crate::linalg::kron(&CMat::from_column_slice(plus.len(), 1, plus.as_slice()), &CMat::identity(sys, sys));
    let qft = crate::linalg::kron(&qft_from_group(&group), &CMat::identity(sys, sys));
    Ok(qft * ctrl_pi(n, d) * adjoin)
}

/// `Φ` as a Kraus family, built from the Fourier pipeline: adjoin `|+_{S_n}⟩`,
/// apply ctrl-π and the QFT, then the tail that turns `(λ, ·, j)` into
/// environment copies and discards `i`.
#[derive(Clone, Debug)]
pub struct PurificationChannel {
    pub n: usize,
    pub d: usize,
    pub r: usize,
    kraus: Vec<CMat>,
}

impl PurificationChannel {
    pub fn new(n: usize, d: usize, r: usize) -> Result<Self> {
        Self::with_budget(n, d, r, DEFAULT_BUDGET)
    }

    pub fn with_budget(n: usize, d: usize, r: usize, budget: usize) -> Result<Self> {
        if n == 0 || d == 0 || r == 0 {
            return Err(Error::EmptyInput("purification channel needs n, d, r ≥ 1"));
        }
        check_budget(&format!("purification channel input (n = {n}, d = {d})"), schur_cost(n, d), budget)?;
        let w = fourier_isometry(n, d)?;
        let tail = fourier_tail(n, r, budget)?;
        let kraus = tail_then(&tail, d.pow(n as u32), &w);
        Ok(Self { n, d, r, kraus })
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn input_dim(&self) -> usize {
        self.d.pow(self.n as u32)
    }

    pub fn env_dim(&self) -> usize {
        self.r.pow(self.n as u32)
    }

    /// Apply to any operator on `(C^d)^⊗n`.
    pub fn apply(&self, x: &CMat) -> Result<CMat> {
        if x.nrows() != self.input_dim() || x.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} input for (C^{})^⊗{}",
                x.nrows(),
                x.ncols(),
                self.d,
                self.n
            )));
        }
        Ok(apply_kraus_trailing(x, 1, &self.kraus))
    }

    /// `Φ(ρ^⊗n)`.
    pub fn apply_power(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        DensityOperator::new(self.apply(rho.tensor_power(self.n).matrix())?)
    }

    /// Choi form. Dense in `(d^n)²·r^n`, so only for small instances.
    pub fn channel(&self) -> Result<QuantumChannel> {
        QuantumChannel::from_kraus(&self.kraus)
    }
}

pub fn random_purification_channel(n: usize, d: usize, r: usize) -> Result<PurificationChannel> {
    PurificationChannel::new(n, d, r)
}

/// Closed form of `Φ(ρ^⊗n)` in the Schur bases:
/// `Σ_λ Σ_{j,j'} U^{(r)†}(|λ⟩⟨λ| ⊗ π_{U_λ} ⊗ |j⟩⟨j'|)U^{(r)} ⊗ U^{(d)†}(|λ⟩⟨λ| ⊗ f_λ(ρ) ⊗ |j⟩⟨j'|)U^{(d)}`.
/// Terms whose `λ` has more than `r` rows are omitted; they vanish when
/// `rank ρ ≤ r`.
pub fn purification_closed_form(rho: &DensityOperator, n: usize, r: usize, budget: usize) -> Result<CMat> {
    let d = rho.dim();
    let sys_schur = SchurTransform::cached(n, d, budget)?;
    let env_schur = SchurTransform::cached(n, r, budget)?;
    let conj = sys_schur.conjugate(&tensor_power(rho.matrix(), n));
    let (env, sys) = (env_schur.dim(), sys_schur.dim());
    let mut out = CMat::zeros(env * sys, env * sys);
    for sb in sys_schur.blocks() {
        let Some(eb) = env_schur.block(&sb.shape) else {
            continue;
        };
        let m = sb.sym_dim;
        let mixed = cr(1.0 / eb.unitary_dim as f64);
        for j in 0..m {
            for jp in 0..m {
                let mut e = CMat::zeros(env, env);
                for u in 0..eb.unitary_dim {
                    e[(eb.row(u, j), eb.row(u, jp))] = mixed;
                }
                let mut s = CMat::zeros(sys, sys);
                for u in 0..sb.unitary_dim {
                    for up in 0..sb.unitary_dim {
                        s[(sb.row(u, j), sb.row(up, jp))] = conj[(sb.row(u, 0), sb.row(up, 0))];
                    }
                }
                let e = env_schur.unitary().adjoint() * e * env_schur.unitary();
                let s = sys_schur.unitary().adjoint() * s * sys_schur.unitary();
                out += e.kronecker(&s);
            }
        }
    }
    Ok(out)
}
