//! Random unitaries, states and channels for test instances. All randomness
//! is driven by explicit seeds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{DensityOperator, Isometry, QuantumChannel};
use crate::error::{Error, Result};
use crate::linalg::{c, trace_trailing, CMat, CVec};

/// splitmix64 mixing of `root` and `index`, for per-shard seeds.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut z = root.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> num_complex::Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random `d×d` unitary: QR of a complex Ginibre matrix with the phases
/// of `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..d {
        let z = r[(k, k)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { c(1.0, 0.0) };
        for i in 0..d {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// Haar-random unit vector in `C^d`.
pub fn haar_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVec {
    let v = CVec::from_fn(d, |_, _| gaussian(rng));
    let norm = v.norm();
    v / c(norm, 0.0)
}

/// `Tr_{C^r} |ψ⟩⟨ψ|` for Haar `|ψ⟩ ∈ C^d ⊗ C^r`; rank `r` almost surely.
pub fn random_rank_r_state<R: Rng + ?Sized>(d: usize, r: usize, rng: &mut R) -> Result<DensityOperator> {
    if r == 0 || r > d {
        return Err(Error::InvalidRank(format!("state rank {r} for dimension {d}")));
    }
    let psi = haar_vector(d * r, rng);
    DensityOperator::new(trace_trailing(&(&psi * psi.adjoint()), d, r))
}

/// Environment trace of the first `d_in` columns of a Haar unitary on
/// `C^r ⊗ C^{d_out}` (environment first); Kraus rank `r` almost surely.
pub fn random_kraus_rank_r_channel<R: Rng + ?Sized>(
    d_in: usize,
    d_out: usize,
    r: usize,
    rng: &mut R,
) -> Result<QuantumChannel> {
    Ok(random_dilation(d_in, d_out, r, rng)?.channel())
}

/// The Haar isometry behind [`random_kraus_rank_r_channel`].
pub fn random_dilation<R: Rng + ?Sized>(d_in: usize, d_out: usize, r: usize, rng: &mut R) -> Result<Isometry> {
    if r == 0 || r > d_in * d_out {
        return Err(Error::InvalidRank(format!(
            "Kraus rank {r} for a {d_in}→{d_out} channel"
        )));
    }
    if r * d_out < d_in {
        return Err(Error::InvalidRank(format!(
            "environment {r} too small to dilate {d_in}→{d_out}"
        )));
    }
    let u = haar_unitary(r * d_out, rng);
    Isometry::new(u.columns(0, d_in).into_owned(), r, d_out)
}

/// Seeded convenience wrapper around the samplers.
pub struct Samplers {
    rng: ChaCha8Rng,
}

impl Samplers {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn haar_unitary(&mut self, d: usize) -> CMat {
        haar_unitary(d, &mut self.rng)
    }

    pub fn random_rank_r_state(&mut self, d: usize, r: usize) -> Result<DensityOperator> {
        random_rank_r_state(d, r, &mut self.rng)
    }

    pub fn random_kraus_rank_r_channel(&mut self, d_in: usize, d_out: usize, r: usize) -> Result<QuantumChannel> {
        random_kraus_rank_r_channel(d_in, d_out, r, &mut self.rng)
    }
}
