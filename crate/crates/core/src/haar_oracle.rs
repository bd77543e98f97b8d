//! Exact Haar twirls by Weingarten calculus, Monte Carlo Haar averages, and
//! the orbit averages over purifications and dilations.
//!
//! Nothing here goes through the Schur or Kronecker transforms: the twirl is
//! the Hilbert–Schmidt projection onto `span{π(σ)}`, computed from the Gram
//! matrix `G_{στ} = Tr(π(σ)† π(τ)) = d^{#cycles(σ⁻¹τ)}` and its
//! pseudo-inverse.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channels::{haar_unitary, DensityOperator, QuantumChannel};
use crate::combinatorics::CycleType;
use crate::error::{Error, Result};
use crate::linalg::{
    bring_to_front, choi_vector, inverse_permutation, permute_subsystems, permute_vector, projector, CMat, RMat,
};
use crate::symrep::{all_permutations, permutation_index_map, Permutation};

/// Largest `n` accepted by [`weingarten_table`] unless overridden.
pub const DEFAULT_MAX_N: usize = 5;

/// Singular values of the Gram matrix below this fraction of the largest are
/// treated as zero.
pub const GRAM_CUTOFF: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct WeingartenTable {
    pub n: usize,
    pub d: usize,
    perms: Vec<Permutation>,
    gram: RMat,
    pinv: RMat,
    values: Vec<(CycleType, f64)>,
}

impl WeingartenTable {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        Self::with_max_n(n, d, DEFAULT_MAX_N)
    }

    pub fn with_max_n(n: usize, d: usize, max_n: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::EmptyInput("Weingarten table needs n, d ≥ 1"));
        }
        if n > max_n {
            return Err(Error::BudgetExceeded {
                what: "Weingarten table order".into(),
                needed: n,
                budget: max_n,
            });
        }
        let perms = all_permutations(n);
        let k = perms.len();
        let inverses: Vec<Permutation> = perms.iter().map(Permutation::inverse).collect();
        let gram = RMat::from_fn(k, k, |s, t| {
            let rel = inverses[s].then_unchecked(&perms[t]);
            (d as f64).powi(rel.num_cycles() as i32)
        });
        let eig = SymmetricEigen::new(gram.clone());
        let top = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        let inv_vals = eig
            .eigenvalues
            .map(|v| if v > GRAM_CUTOFF * top { 1.0 / v } else { 0.0 });
        let pinv = &eig.eigenvectors * DMatrix::from_diagonal(&inv_vals) * eig.eigenvectors.transpose();

        let mut values: Vec<(CycleType, f64)> = Vec::new();
        for (t, tau) in perms.iter().enumerate() {
            let ct = tau.cycle_type();
            if !values.iter().any(|(c, _)| *c == ct) {
                // Row of the identity: Wg(e⁻¹τ) = Wg(τ).
                values.push((ct, pinv[(0, t)]));
            }
        }
        Ok(Self {
            n,
            d,
            perms,
            gram,
            pinv,
            values,
        })
    }

    /// Shared table for `(n, d)` with the default bound on `n`.
    pub fn cached(n: usize, d: usize) -> Result<Arc<WeingartenTable>> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<WeingartenTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(t) = cache.lock().expect("cache poisoned").get(&(n, d)) {
            return Ok(t.clone());
        }
        let table = Arc::new(WeingartenTable::new(n, d)?);
        cache.lock().expect("cache poisoned").insert((n, d), table.clone());
        Ok(table)
    }

    pub fn permutations(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn gram(&self) -> &RMat {
        &self.gram
    }

    /// Pseudo-inverse of the Gram matrix, `Wg(σ⁻¹τ)` at `(σ, τ)`.
    pub fn pseudo_inverse(&self) -> &RMat {
        &self.pinv
    }

    /// `Wg` per cycle type, in order of first appearance among ranked permutations.
    pub fn values(&self) -> &[(CycleType, f64)] {
        &self.values
    }

    pub fn value(&self, cycle_type: &CycleType) -> Option<f64> {
        self.values.iter().find(|(c, _)| c == cycle_type).map(|(_, v)| *v)
    }

    /// `max |Σ_τ G_{στ} Wg(τ⁻¹ρ) − δ_{σρ}|`; small exactly when `G` is invertible.
    pub fn inverse_residual(&self) -> f64 {
        let k = self.perms.len();
        (&self.gram * &self.pinv - RMat::identity(k, k)).abs().max()
    }

    /// Largest spread of `Wg` values within one cycle type.
    pub fn class_function_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (s, sigma) in self.perms.iter().enumerate() {
            for (t, tau) in self.perms.iter().enumerate() {
                let ct = sigma.inverse().then_unchecked(tau).cycle_type();
                let v = self.value(&ct).expect("every cycle type is tabulated");
                worst = worst.max((self.pinv[(s, t)] - v).abs());
            }
        }
        worst
    }
}

/// Exact twirl `E_U[(U^⊗n ⊗ 1) X (U^⊗n ⊗ 1)†]` over `U(d)` acting on the
/// leading `n` factors of `(C^d)^⊗n ⊗ C^rest`.
pub fn twirl_leading(x: &CMat, n: usize, d: usize, rest: usize) -> Result<CMat> {
    let lead = d.pow(n as u32);
    if x.nrows() != lead * rest || x.ncols() != lead * rest {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator for {n} factors of dimension {d} and a remainder of {rest}",
            x.nrows(),
            x.ncols()
        )));
    }
    let table = WeingartenTable::cached(n, d)?;
    let maps: Vec<Vec<usize>> = table.permutations().iter().map(|s| permutation_index_map(s, d)).collect();

    // B_τ = Tr_lead[(π(τ)† ⊗ 1) X]; ⟨a|π(τ)†|b⟩ = [b = map_τ(a)].
    let partial: Vec<CMat> = maps
        .iter()
        .map(|map| {
            CMat::from_fn(rest, rest, |p, q| (0..lead).map(|a| x[(map[a] * rest + p, a * rest + q)]).sum())
        })
        .collect();
    let k = maps.len();
    let mut out = CMat::zeros(lead * rest, lead * rest);
    for s in 0..k {
        let mut coef = CMat::zeros(rest, rest);
        for (t, b) in partial.iter().enumerate() {
            let w = table.pseudo_inverse()[(s, t)];
            if w != 0.0 {
                coef += b * crate::linalg::cr(w);
            }
        }
        // π(σ) = Σ_b |map_σ(b)⟩⟨b|.
        for b in 0..lead {
            let a = maps[s][b];
            let mut view = out.view_mut((a * rest, b * rest), (rest, rest));
            view += &coef;
        }
    }
    Ok(out)
}

/// Exact twirl `E_U[U^⊗n X U^{†⊗n}]` over `U(d)`.
pub fn twirl_exact(x: &CMat, n: usize, d: usize) -> Result<CMat> {
    twirl_leading(x, n, d, 1)
}

/// Twirl the listed tensor factors (each of dimension `d`) of an operator on
/// `⊗_k C^{dims[k]}`, leaving the others alone.
pub fn twirl_factors(x: &CMat, dims: &[usize], factors: &[usize], d: usize) -> Result<CMat> {
    if factors.iter().any(|&f| f >= dims.len() || dims[f] != d) {
        return Err(Error::DimensionMismatch(format!(
            "factors {factors:?} of {dims:?} are not all of dimension {d}"
        )));
    }
    let perm = bring_to_front(dims.len(), factors);
    let moved = permute_subsystems(x, dims, &perm);
    let rest: usize = dims.iter().enumerate().filter(|(k, _)| !factors.contains(k)).map(|(_, &v)| v).product();
    let twirled = twirl_leading(&moved, factors.len(), d, rest)?;
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    Ok(permute_subsystems(&twirled, &new_dims, &inverse_permutation(&perm)))
}

/// `|ψ⟩⟨ψ|^⊗n` for `ψ ∈ C^r ⊗ C^d`, regrouped as `(E_1 … E_n, S_1 … S_n)`.
pub fn tensor_power_env_first(psi: &crate::linalg::CVec, r: usize, d: usize, n: usize) -> CMat {
    let mut v = crate::linalg::CVec::from_element(1, crate::linalg::cr(1.0));
    for _ in 0..n {
        v = v.kronecker(psi);
    }
    let mut dims = Vec::with_capacity(2 * n);
    for _ in 0..n {
        dims.push(r);
        dims.push(d);
    }
    let mut perm: Vec<usize> = (0..n).map(|k| 2 * k).collect();
    perm.extend((0..n).map(|k| 2 * k + 1));
    projector(&permute_vector(&v, &dims, &perm))
}

/// `E_{ψ∼Pur(ρ)}[ψ^⊗n]` on `(C^r)^⊗n ⊗ (C^d)^⊗n`, environments first: the
/// canonical purification's environment factors are twirled over `U(r)`.
pub fn purification_average_oracle(rho: &DensityOperator, r: usize, n: usize) -> Result<DensityOperator> {
    let psi = rho.canonical_purification(r)?;
    let d = rho.dim();
    let x = tensor_power_env_first(&psi, r, d, n);
    let out = twirl_leading(&x, n, r, d.pow(n as u32))?;
    DensityOperator::new(out)
}

/// `E_{V∼Dil(Λ)}[V^⊗n (·) V^{†⊗n}]` as a channel `(C^{d_in})^⊗n →
/// (C^r)^⊗n ⊗ (C^{d_out})^⊗n`, environments first. The Choi matrix of the
/// canonical `V^⊗n` has its environment factors twirled over `U(r)`.
pub fn dilation_average_oracle(channel: &QuantumChannel, r: usize, n: usize) -> Result<QuantumChannel> {
    let v = crate::channels::choi_purification_to_isometry(channel, r)?;
    let vn = v.tensor_power_env_first(n);
    let d_in = channel.d_in().pow(n as u32);
    let d_env = r.pow(n as u32);
    let d_out = channel.d_out().pow(n as u32);
    let choi = projector(&choi_vector(&vn));
    let twirled = twirl_leading(
        &permute_subsystems(&choi, &[d_in, d_env, d_out], &[1, 0, 2]),
        n,
        r,
        d_in * d_out,
    )?;
    let choi = permute_subsystems(&twirled, &[d_env, d_in, d_out], &[1, 0, 2]);
    QuantumChannel::from_positive_choi(d_in, d_env * d_out, choi)
}

/// `E_{C_pur∼Pur(C)}[C_pur^⊗n]` for a purified comb: the environment riding
/// on the last output is moved to the front of each copy and twirled over
/// `U(r)`. The result lives on `(E_1 … E_n, S_1 … S_n)` with `S` the comb's
/// slot systems `I_1 O_1 … I_k O_k`.
pub fn comb_purification_average_oracle(purified: &crate::channels::PurifiedComb, n: usize) -> Result<CMat> {
    let r = purified.env_dim;
    let sys = purified.vector.len() / r;
    // Vector on (S, E) → (E, S).
    let psi = permute_vector(&purified.vector, &[sys, r], &[1, 0]);
    let x = tensor_power_env_first(&psi, r, sys, n);
    twirl_leading(&x, n, r, sys.pow(n as u32))
}

/// Empirical mean and per-entry standard error of a matrix-valued function
/// of a Haar-random unitary.
#[derive(Clone, Debug)]
pub struct MonteCarloEstimate {
    pub mean: CMat,
    /// `sqrt(Σ|x − mean|² / (N(N−1)))` per entry.
    pub std_error: RMat,
    pub trials: usize,
}

impl MonteCarloEstimate {
    /// Largest `|mean − exact|` in units of the standard error; entries with
    /// zero spread must match to `abs_floor`.
    pub fn max_z_score(&self, exact: &CMat, abs_floor: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for ((m, e), s) in self.mean.iter().zip(exact.iter()).zip(self.std_error.iter()) {
            let dev = (m - e).norm();
            if dev <= abs_floor {
                continue;
            }
            worst = worst.max(if *s > 0.0 { dev / s } else { f64::INFINITY });
        }
        worst
    }
}

/// Average `f(U)` over `trials` Haar-random `U ∈ U(r)` drawn from a ChaCha
/// stream seeded with `seed`.
pub fn monte_carlo_average(
    r: usize,
    f: impl Fn(&CMat) -> CMat,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if trials < 2 {
        return Err(Error::EmptyInput("Monte Carlo averaging needs at least two trials"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum: Option<CMat> = None;
    let mut sum_sq: Option<RMat> = None;
    for _ in 0..trials {
        let u = haar_unitary(r, &mut rng);
        let y = f(&u);
        match (&mut sum, &mut sum_sq) {
            (Some(s), Some(q)) => {
                *s += &y;
                *q += y.map(|z| z.norm_sqr());
            }
            _ => {
                sum_sq = Some(y.map(|z| z.norm_sqr()));
                sum = Some(y);
            }
        }
    }
    let n = trials as f64;
    let mean = sum.expect("trials ≥ 2") / crate::linalg::cr(n);
    let sq = sum_sq.expect("trials ≥ 2");
    let std_error = RMat::from_fn(mean.nrows(), mean.ncols(), |i, j| {
        let var = (sq[(i, j)] - n * mean[(i, j)].norm_sqr()).max(0.0) / (n - 1.0);
        (var / n).sqrt()
    });
    Ok(MonteCarloEstimate {
        mean,
        std_error,
        trials,
    })
}
