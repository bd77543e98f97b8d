//! Turning a superchannel on isometry slots into one on channel slots by
//! running the random dilation superchannel in front of it.

use rand::Rng;

use super::dilation::fourier_form;
use super::ParallelSuperchannel;
use crate::channels::{haar_unitary, random_kraus_rank_r_channel};
use crate::error::{Error, Result};
use crate::linalg::{kron, permutation_matrix, subsystem_index_map, CMat};
use crate::schur::DEFAULT_BUDGET;

/// `C′` with `C′[Λ^⊗n] = E_{V∼Dil(Λ)} C[V^⊗n]`. `C` must take `n` slots
/// `C^{d_in} → C^r ⊗ C^{d_out}` (environment first in each slot). The memory
/// of `C′` is `M_C ⊗ M_Ξ`.
pub fn lift_isometry_superchannel(
    c: &ParallelSuperchannel,
    n: usize,
    d_in: usize,
    d_out: usize,
    r: usize,
) -> Result<ParallelSuperchannel> {
    lift_with_budget(c, n, d_in, d_out, r, DEFAULT_BUDGET)
}

pub fn lift_with_budget(
    c: &ParallelSuperchannel,
    n: usize,
    d_in: usize,
    d_out: usize,
    r: usize,
    budget: usize,
) -> Result<ParallelSuperchannel> {
    if c.n != n || c.slot_in != d_in || c.slot_out != r * d_out {
        return Err(Error::DimensionMismatch(format!(
            "superchannel has {} slots {}→{}, expected {n} slots {d_in}→{r}·{d_out}",
            c.n, c.slot_in, c.slot_out
        )));
    }
    let xi = fourier_form(n, d_in, d_out, r, budget)?;
    let (m_c, m_xi) = (c.memory_dim, xi.memory_dim);
    let q_in = d_in.pow(n as u32);

    let id_c = CMat::identity(m_c, m_c);
    let mut pre = Vec::new();
    for kc in c.pre_kraus() {
        for kx in xi.pre_kraus() {
            pre.push(kron(&id_c, kx) * kc);
        }
    }
    debug_assert_eq!(pre[0].nrows(), m_c * m_xi * q_in);

    // Ξ emits E_1 … E_n O_1 … O_n; C expects (E_1 O_1) … (E_n O_n).
    let mut dims = vec![r; n];
    dims.extend(std::iter::repeat_n(d_out, n));
    let perm: Vec<usize> = (0..n).flat_map(|k| [k, n + k]).collect();
    let regroup = permutation_matrix(&inverse_map(&subsystem_index_map(&dims, &perm)));
    let mut post = Vec::new();
    for kx in xi.post_kraus() {
        let inner = kron(&id_c, &(&regroup * kx));
        for kc in c.post_kraus() {
            post.push(kc * &inner);
        }
    }
    ParallelSuperchannel::new(n, d_in, d_out, m_c * m_xi, pre, post)
}

/// `map[new] = old` turned into `P|old⟩ = |new⟩`.
fn inverse_map(map: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; map.len()];
    for (new, &old) in map.iter().enumerate() {
        inv[old] = new;
    }
    inv
}

/// A random parallel superchannel: Haar-random isometric pre-processing
/// `C^a → C^m ⊗ I^⊗n` and a random post-processing channel
/// `C^m ⊗ O^⊗n → C^b` of full Kraus rank.
pub fn random_parallel_superchannel<R: Rng + ?Sized>(
    n: usize,
    slot_in: usize,
    slot_out: usize,
    a: usize,
    m: usize,
    b: usize,
    rng: &mut R,
) -> Result<ParallelSuperchannel> {
    let mid = m * slot_in.pow(n as u32);
    if a > mid {
        return Err(Error::DimensionMismatch(format!("no isometry from {a} into {mid}")));
    }
    let u = haar_unitary(mid, rng);
    let pre = u.columns(0, a).into_owned();
    let post_in = m * slot_out.pow(n as u32);
    let rank = post_in.div_ceil(b);
    let post = random_kraus_rank_r_channel(post_in, b, rank, rng)?.kraus();
    ParallelSuperchannel::new(n, slot_in, slot_out, m, vec![pre], post)
}
