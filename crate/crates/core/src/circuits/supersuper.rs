//! The random dilation supersuperchannel on combs, realized at the level of
//! Choi matrices: `Σ(J_C) = (Tr J_C)^n · Φ((J_C / Tr J_C)^⊗n)`.

use rand::Rng;

use super::purification::PurificationChannel;
use crate::channels::{comb_from_channels, random_kraus_rank_r_channel, Comb, CombTooth};
use crate::error::{Error, Result};
use crate::linalg::{cr, CMat};
use crate::schur::{tensor_power, DEFAULT_BUDGET};

/// Output of the supersuperchannel: an operator on
/// `(C^r)^⊗n ⊗ (I_1 O_1 … I_k O_k)^⊗n`, environments first.
#[derive(Clone, Debug)]
pub struct SupersuperOutput {
    pub n: usize,
    pub r: usize,
    pub slot_dims: Vec<usize>,
    pub choi: CMat,
}

impl SupersuperOutput {
    pub fn comb_dim(&self) -> usize {
        self.slot_dims.iter().product()
    }
}

pub fn random_dilation_supersuperchannel(comb: &Comb, n: usize, r: usize) -> Result<SupersuperOutput> {
    supersuper_with_budget(comb, n, r, DEFAULT_BUDGET)
}

pub fn supersuper_with_budget(comb: &Comb, n: usize, r: usize, budget: usize) -> Result<SupersuperOutput> {
    let dim = comb.total_dim();
    let trace = comb.choi().trace().re;
    if trace <= 0.0 {
        return Err(Error::InvalidChannel("comb Choi matrix has no positive trace".into()));
    }
    let phi = PurificationChannel::with_budget(n, dim, r, budget)?;
    let normalized = comb.choi() * cr(1.0 / trace);
    let out = phi.apply(&tensor_power(&normalized, n))? * cr(trace.powi(n as i32));
    Ok(SupersuperOutput {
        n,
        r,
        slot_dims: comb.dims(),
        choi: out,
    })
}

/// Two-tooth comb on qubit slots with a memory of dimension `memory`; the
/// teeth have Kraus ranks `ranks.0` and `ranks.1`.
pub fn random_two_tooth_comb<R: Rng + ?Sized>(memory: usize, ranks: (usize, usize), rng: &mut R) -> Result<Comb> {
    let first = random_kraus_rank_r_channel(2, 2 * memory, ranks.0, rng)?;
    let second = random_kraus_rank_r_channel(2 * memory, 2, ranks.1, rng)?;
    comb_from_channels(vec![
        CombTooth::new(first, 2, 1, 2, memory)?,
        CombTooth::new(second, 2, memory, 2, 1)?,
    ])
}
