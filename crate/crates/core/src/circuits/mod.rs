//! End-to-end constructions: the random purification channel, the random
//! dilation superchannel in Fourier and Kronecker form, the lift from
//! isometry-slot to channel-slot superchannels, and the random dilation
//! supersuperchannel on combs.
//!
//! Register layout shared by every construction: the group (memory)
//! register first, then system registers in query order; environments come
//! out first, as `E_1 … E_n` followed by the `n` system or output copies.

pub mod dilation;
pub mod lift;
pub mod purification;
pub mod supersuper;
pub mod verify;

pub use dilation::{random_dilation_kronecker, random_dilation_superchannel};
pub use lift::{lift_isometry_superchannel, random_parallel_superchannel};
pub use purification::{random_purification_channel, PurificationChannel};
pub use supersuper::{random_dilation_supersuperchannel, SupersuperOutput};
pub use verify::{verify, CircuitReport, GridPoint, VerifyOptions};

use crate::channels::QuantumChannel;
use crate::error::{Error, Result};
use crate::linalg::{apply_kraus_trailing, cr, kron, max_entangled_projector, permute_subsystems, CMat};
use crate::schur::SchurTransform;
use crate::symrep::SymmetricGroup;

/// Completeness tolerance for Kraus families handed to [`ParallelSuperchannel`].
const KRAUS_TOL: f64 = 1e-9;

fn completeness_residual(kraus: &[CMat]) -> f64 {
    let d = kraus[0].ncols();
    let mut sum = CMat::zeros(d, d);
    for k in kraus {
        sum += k.adjoint() * k;
    }
    crate::linalg::max_abs_diff(&sum, &CMat::identity(d, d))
}

/// A superchannel on `n` parallel slots `C^{slot_in} → C^{slot_out}`:
/// a pre-processing channel `A → M ⊗ I^⊗n`, the queries on `I^⊗n`, and a
/// post-processing channel `M ⊗ O^⊗n → B`, both held as Kraus families.
#[derive(Clone, Debug)]
pub struct ParallelSuperchannel {
    pub n: usize,
    pub slot_in: usize,
    pub slot_out: usize,
    pub input_dim: usize,
    pub memory_dim: usize,
    pub output_dim: usize,
    pre: Vec<CMat>,
    post: Vec<CMat>,
}

impl ParallelSuperchannel {
    pub fn new(n: usize, slot_in: usize, slot_out: usize, memory_dim: usize, pre: Vec<CMat>, post: Vec<CMat>) -> Result<Self> {
        if pre.is_empty() || post.is_empty() {
            return Err(Error::EmptyInput("superchannel needs pre and post Kraus operators"));
        }
        let queries_in = slot_in.pow(n as u32);
        let queries_out = slot_out.pow(n as u32);
        let input_dim = pre[0].ncols();
        let output_dim = post[0].nrows();
        if pre.iter().any(|k| k.nrows() != memory_dim * queries_in || k.ncols() != input_dim) {
            return Err(Error::DimensionMismatch(format!(
                "pre-processing must map {input_dim} into {memory_dim}·{queries_in}"
            )));
        }
        if post.iter().any(|k| k.ncols() != memory_dim * queries_out || k.nrows() != output_dim) {
            return Err(Error::DimensionMismatch(format!(
                "post-processing must map {memory_dim}·{queries_out} into {output_dim}"
            )));
        }
        for (what, family) in [("pre-processing", &pre), ("post-processing", &post)] {
            let res = completeness_residual(family);
            if res > KRAUS_TOL {
                return Err(Error::InvalidChannel(format!(
                    "{what} is not trace preserving (residual {res:.3e})"
                )));
            }
        }
        Ok(Self {
            n,
            slot_in,
            slot_out,
            input_dim,
            memory_dim,
            output_dim,
            pre,
            post,
        })
    }

    pub fn pre_kraus(&self) -> &[CMat] {
        &self.pre
    }

    pub fn post_kraus(&self) -> &[CMat] {
        &self.post
    }

    pub fn pre_channel(&self) -> Result<QuantumChannel> {
        QuantumChannel::from_kraus(&self.pre)
    }

    pub fn post_channel(&self) -> Result<QuantumChannel> {
        QuantumChannel::from_kraus(&self.post)
    }

    /// Choi matrix of `C[N]` for a map `N : L(I^⊗n) → L(O^⊗n)` given by its
    /// Choi matrix (not required to be a channel).
    pub fn apply_choi(&self, choi: &CMat) -> Result<CMat> {
        let q_in = self.slot_in.pow(self.n as u32);
        let q_out = self.slot_out.pow(self.n as u32);
        if choi.nrows() != q_in * q_out || choi.ncols() != q_in * q_out {
            return Err(Error::DimensionMismatch(format!(
                "query map Choi is {}x{}, slots need {}",
                choi.nrows(),
                choi.ncols(),
                q_in * q_out
            )));
        }
        let a = self.input_dim;
        let omega = max_entangled_projector(a);
        let after_pre = apply_kraus_trailing(&omega, a, &self.pre);
        let after_query = crate::linalg::apply_choi_trailing(&after_pre, a * self.memory_dim, choi, q_in, q_out);
        Ok(apply_kraus_trailing(&after_query, a, &self.post))
    }

    /// `C[N]` for a channel on the `n` slots jointly.
    pub fn apply(&self, queries: &QuantumChannel) -> Result<QuantumChannel> {
        self.apply_kraus(&queries.kraus())
    }

    /// `C[N]` for `N` given by Kraus operators on the `n` slots jointly. The
    /// result's Kraus family is `{L (1_M ⊗ A) P}` over pre `P`, query `A`
    /// and post `L`.
    pub fn apply_kraus(&self, queries: &[CMat]) -> Result<QuantumChannel> {
        let q_in = self.slot_in.pow(self.n as u32);
        let q_out = self.slot_out.pow(self.n as u32);
        if queries.is_empty() || queries.iter().any(|a| a.shape() != (q_out, q_in)) {
            return Err(Error::DimensionMismatch(format!(
                "query Kraus operators must be {q_out}x{q_in}"
            )));
        }
        let id = CMat::identity(self.memory_dim, self.memory_dim);
        let mut kraus = Vec::with_capacity(self.pre.len() * queries.len() * self.post.len());
        for p in &self.pre {
            for a in queries {
                let mid = kron(&id, a) * p;
                for l in &self.post {
                    kraus.push(l * &mid);
                }
            }
        }
        QuantumChannel::from_kraus(&kraus)
    }

    /// `C[Λ^⊗n]`.
    pub fn apply_to_power(&self, channel: &QuantumChannel) -> Result<QuantumChannel> {
        if channel.d_in() != self.slot_in || channel.d_out() != self.slot_out {
            return Err(Error::DimensionMismatch(format!(
                "slot is {}→{}, channel is {}→{}",
                self.slot_in,
                self.slot_out,
                channel.d_in(),
                channel.d_out()
            )));
        }
        let single = channel.kraus();
        let mut power = vec![CMat::identity(1, 1)];
        for _ in 0..self.n {
            power = power.iter().flat_map(|p| single.iter().map(move |k| kron(p, k))).collect();
        }
        self.apply_kraus(&power)
    }
}

/// Tail of the Fourier pipeline, acting on the group register: for the
/// register state `|λ, i, j⟩` (rows `offset_λ + i·m_λ + j`), prepare the
/// maximally mixed state on the `U(r)` irrep `λ`, feed `(λ, u, j)` through
/// the inverse Schur transform on `(C^r)^⊗n`, and discard `i`. Returns the
/// operators `T : C^{n!} → (C^r)^⊗n` whose Kraus family is `{T ⊗ 1}`.
///
/// A `λ` with more than `r` rows has no `U(r)` irrep; such branches output
/// the maximally mixed environment instead, keeping the map trace preserving.
pub fn fourier_tail(n: usize, r: usize, budget: usize) -> Result<Vec<CMat>> {
    let group = SymmetricGroup::cached(n)?;
    let schur = SchurTransform::cached(n, r, budget)?;
    let env = r.pow(n as u32);
    let order = group.order();
    let offsets = group.fourier_offsets();
    let mut out = Vec::new();
    for (irrep, offset) in group.irreps().iter().zip(offsets) {
        let m = irrep.dim();
        match schur.block(&irrep.shape) {
            Some(block) => {
                let scale = 1.0 / (block.unitary_dim as f64).sqrt();
                for i in 0..m {
                    for u in 0..block.unitary_dim {
                        let mut t = CMat::zeros(env, order);
                        for j in 0..m {
                            let row = block.row(u, j);
                            for e in 0..env {
                                t[(e, offset + i * m + j)] = schur.unitary()[(row, e)].conj() * cr(scale);
                            }
                        }
                        out.push(t);
                    }
                }
            }
            None => {
                let scale = cr(1.0 / (env as f64).sqrt());
                for i in 0..m {
                    for j in 0..m {
                        for e in 0..env {
                            let mut t = CMat::zeros(env, order);
                            t[(e, offset + i * m + j)] = scale;
                            out.push(t);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `{(T ⊗ 1_sys) · W}` for every tail operator `T`.
pub(crate) fn tail_then(tail: &[CMat], sys: usize, w: &CMat) -> Vec<CMat> {
    let id = CMat::identity(sys, sys);
    tail.iter().map(|t| kron(t, &id) * w).collect()
}

/// Regroup a channel `I^⊗n → E^⊗n ⊗ O^⊗n` so its output reads
/// `E_1 O_1 … E_n O_n`.
pub fn interleave_env_output(channel: &QuantumChannel, n: usize, r: usize, d_out: usize) -> Result<QuantumChannel> {
    let d_in = channel.d_in();
    if channel.d_out() != (r * d_out).pow(n as u32) {
        return Err(Error::DimensionMismatch(format!(
            "channel output {} is not ({r}·{d_out})^{n}",
            channel.d_out()
        )));
    }
    let mut dims = vec![d_in];
    dims.extend(std::iter::repeat_n(r, n));
    dims.extend(std::iter::repeat_n(d_out, n));
    let mut perm = vec![0];
    for k in 0..n {
        perm.push(1 + k);
        perm.push(1 + n + k);
    }
    let choi = permute_subsystems(channel.choi(), &dims, &perm);
    QuantumChannel::new(d_in, channel.d_out(), choi)
}

/// Trace distance between the normalized Choi states of two channels with
/// the same input dimension.
pub fn choi_trace_distance(a: &QuantumChannel, b: &QuantumChannel) -> Result<f64> {
    if a.d_in() != b.d_in() || a.d_out() != b.d_out() {
        return Err(Error::DimensionMismatch(format!(
            "channels {}→{} and {}→{}",
            a.d_in(),
            a.d_out(),
            b.d_in(),
            b.d_out()
        )));
    }
    let scale = cr(1.0 / a.d_in() as f64);
    Ok(crate::channels::trace_distance(&(a.choi() * scale), &(b.choi() * scale)))
}
