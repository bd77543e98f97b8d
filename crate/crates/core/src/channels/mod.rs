//! Density operators, channels in Choi form, Stinespring isometries, the
//! adjoint and Petz maps, the link product and quantum combs.
//!
//! Choi matrices are unnormalized, `J = Σ_{ij} |i⟩⟨j| ⊗ Λ(|i⟩⟨j|)`, input
//! factor first, so `Tr J = d_in`. Dilation isometries map `C^{d_in}` into
//! `C^r ⊗ C^{d_out}` with the environment first.

pub mod comb;
pub mod link;
pub mod metrics;
pub mod sampling;

pub use comb::{comb_from_channels, comb_purify, Comb, CombTooth, PurifiedComb};
pub use link::{link_product, System, SystemOperator};
pub use metrics::{fidelity, trace_distance};
pub use sampling::{derive_seed, haar_unitary, haar_vector, random_kraus_rank_r_channel, random_rank_r_state, Samplers};

use crate::error::{Error, Result};
use crate::linalg::{
    apply_choi_trailing, cr, fix_phase, hermitian_eigen, hermitian_eigenvalues, hermitian_part, kron, max_abs_diff, pd_inv_sqrt,
    permute_subsystems, psd_sqrt, trace_leading, trace_trailing, unitarity_residual, CMat, CVec,
};

/// Eigenvalues down to this value are treated as zero when validating
/// positivity.
pub const POSITIVITY_FLOOR: f64 = -1e-10;

/// Relative eigenvalue threshold for numerical ranks (Kraus rank, state rank).
pub const RANK_TOL: f64 = 1e-9;

/// A validated density operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: CMat,
}

impl DensityOperator {
    /// Validate Hermiticity, positivity and unit trace within `1e-10`.
    pub fn new(matrix: CMat) -> Result<Self> {
        Self::with_tolerance(matrix, 1e-10)
    }

    pub fn with_tolerance(matrix: CMat, tol: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "{}x{} matrix is not square and nonempty",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = max_abs_diff(&matrix, &matrix.adjoint());
        if herm > tol {
            return Err(Error::InvalidState(format!("not Hermitian (residual {herm:.3e})")));
        }
        let tr = matrix.trace();
        if (tr - cr(1.0)).norm() > tol {
            return Err(Error::InvalidState(format!("trace is {tr}, not 1")));
        }
        let matrix = hermitian_part(&matrix);
        let (vals, vecs) = hermitian_eigen(&matrix);
        let min = vals.last().copied().unwrap_or(0.0);
        if min < POSITIVITY_FLOOR.min(-tol) {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        if min < 0.0 {
            let clipped: Vec<f64> = vals.iter().map(|&v| v.max(0.0)).collect();
            let total: f64 = clipped.iter().sum();
            log::debug!("clipping eigenvalue {min:.3e} to zero and renormalizing");
            let mut m = CMat::zeros(matrix.nrows(), matrix.ncols());
            for (k, &v) in clipped.iter().enumerate() {
                if v > 0.0 {
                    let col = vecs.column(k);
                    m += col * col.adjoint() * cr(v / total);
                }
            }
            return Ok(Self { matrix: m });
        }
        Ok(Self { matrix })
    }

    pub fn pure(v: &CVec) -> Result<Self> {
        let norm = v.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("state vector has norm {norm}")));
        }
        Ok(Self {
            matrix: v * v.adjoint(),
        })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: CMat::identity(d, d) * cr(1.0 / d as f64),
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        Self {
            matrix: kron(&self.matrix, &other.matrix),
        }
    }

    /// `ρ^⊗n`.
    pub fn tensor_power(&self, n: usize) -> DensityOperator {
        let mut m = CMat::identity(1, 1);
        for _ in 0..n {
            m = kron(&m, &self.matrix);
        }
        Self { matrix: m }
    }

    pub fn partial_trace(&self, dims: &[usize], traced: &[usize]) -> Result<DensityOperator> {
        check_dims(self.dim(), dims)?;
        Ok(Self {
            matrix: crate::linalg::partial_trace(&self.matrix, dims, traced),
        })
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Numerical rank (eigenvalues above `RANK_TOL` times the largest).
    pub fn rank(&self) -> usize {
        numerical_rank(&self.matrix)
    }

    /// Canonical purification `Σ_k √p_k |k⟩ ⊗ |v_k⟩` in `C^r ⊗ C^d`
    /// (environment first), eigenvalues descending, each eigenvector's first
    /// nonzero entry made real positive.
    pub fn canonical_purification(&self, r: usize) -> Result<CVec> {
        let rank = self.rank();
        if rank > r {
            return Err(Error::InvalidRank(format!("state of rank {rank} has no purification in C^{r}")));
        }
        let d = self.dim();
        let (vals, vecs) = hermitian_eigen(&self.matrix);
        let mut out = CVec::zeros(r * d);
        for k in 0..rank {
            let mut v: CVec = vecs.column(k).into_owned();
            fix_phase(&mut v, 1e-12);
            let w = vals[k].max(0.0).sqrt();
            for i in 0..d {
                out[k * d + i] = v[i] * w;
            }
        }
        Ok(out)
    }
}

fn check_dims(total: usize, dims: &[usize]) -> Result<()> {
    if dims.iter().product::<usize>() != total {
        return Err(Error::DimensionMismatch(format!(
            "dims {dims:?} do not multiply to {total}"
        )));
    }
    Ok(())
}

pub(crate) fn numerical_rank(m: &CMat) -> usize {
    let vals = hermitian_eigenvalues(m);
    let top = vals.first().copied().unwrap_or(0.0).max(0.0);
    if top == 0.0 {
        return 0;
    }
    vals.iter().filter(|&&v| v > RANK_TOL * top.max(1.0)).count()
}

/// A linear map `L(C^{d_in}) → L(C^{d_out})` stored by its Choi matrix, not
/// necessarily completely positive or trace preserving.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    pub d_in: usize,
    pub d_out: usize,
    pub choi: CMat,
}

impl LinearMap {
    pub fn new(d_in: usize, d_out: usize, choi: CMat) -> Result<Self> {
        if choi.nrows() != d_in * d_out || choi.ncols() != d_in * d_out {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix is {}x{}, expected {}",
                choi.nrows(),
                choi.ncols(),
                d_in * d_out
            )));
        }
        Ok(Self { d_in, d_out, choi })
    }

    /// Build the Choi matrix by evaluating `f` on matrix units.
    pub fn from_fn(d_in: usize, d_out: usize, f: impl Fn(&CMat) -> CMat) -> Self {
        let mut choi = CMat::zeros(d_in * d_out, d_in * d_out);
        for i in 0..d_in {
            for j in 0..d_in {
                let image = f(&crate::linalg::ketbra(d_in, i, j));
                choi.view_mut((i * d_out, j * d_out), (d_out, d_out)).copy_from(&image);
            }
        }
        Self { d_in, d_out, choi }
    }

    /// `L(X) = Tr_in[(Xᵀ ⊗ 1) J]`.
    pub fn apply(&self, x: &CMat) -> CMat {
        apply_choi_trailing(x, 1, &self.choi, self.d_in, self.d_out)
    }

    /// Largest entry of `Tr_out J - 1`.
    pub fn trace_preservation_residual(&self) -> f64 {
        let reduced = trace_trailing(&self.choi, self.d_in, self.d_out);
        max_abs_diff(&reduced, &CMat::identity(self.d_in, self.d_in))
    }

    /// Most negative Choi eigenvalue, clipped at zero.
    pub fn positivity_violation(&self) -> f64 {
        let vals = hermitian_eigenvalues(&self.choi);
        let herm = max_abs_diff(&self.choi, &self.choi.adjoint());
        (-vals.last().copied().unwrap_or(0.0)).max(0.0).max(herm)
    }

    pub fn into_channel(self) -> Result<QuantumChannel> {
        QuantumChannel::new(self.d_in, self.d_out, self.choi)
    }
}

/// A completely positive trace-preserving map in Choi form.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumChannel {
    d_in: usize,
    d_out: usize,
    choi: CMat,
}

impl QuantumChannel {
    /// Validate complete positivity and trace preservation within `1e-9`.
    pub fn new(d_in: usize, d_out: usize, choi: CMat) -> Result<Self> {
        Self::with_tolerance(d_in, d_out, choi, 1e-9)
    }

    pub fn with_tolerance(d_in: usize, d_out: usize, choi: CMat, tol: f64) -> Result<Self> {
        let map = LinearMap::new(d_in, d_out, choi)?;
        let tp = map.trace_preservation_residual();
        if tp > tol {
            return Err(Error::InvalidChannel(format!("not trace preserving (residual {tp:.3e})")));
        }
        let cp = map.positivity_violation();
        if cp > tol {
            return Err(Error::InvalidChannel(format!("not completely positive (violation {cp:.3e})")));
        }
        Ok(Self {
            d_in,
            d_out,
            choi: hermitian_part(&map.choi),
        })
    }

    /// For Choi matrices that are positive by construction (averages of
    /// conjugations): checks trace preservation only.
    pub(crate) fn from_positive_choi(d_in: usize, d_out: usize, choi: CMat) -> Result<Self> {
        let map = LinearMap::new(d_in, d_out, choi)?;
        let tp = map.trace_preservation_residual();
        if tp > 1e-9 {
            return Err(Error::InvalidChannel(format!("not trace preserving (residual {tp:.3e})")));
        }
        Ok(Self {
            d_in,
            d_out,
            choi: hermitian_part(&map.choi),
        })
    }

    pub fn from_kraus(kraus: &[CMat]) -> Result<Self> {
        let first = kraus.first().ok_or(Error::EmptyInput("Kraus list"))?;
        let (d_out, d_in) = first.shape();
        if kraus.iter().any(|k| k.shape() != (d_out, d_in)) {
            return Err(Error::DimensionMismatch("Kraus operators of different shapes".into()));
        }
        // Kraus form is completely positive by construction; only
        // completeness needs checking.
        let mut sum = CMat::zeros(d_in, d_in);
        for k in kraus {
            sum += k.adjoint() * k;
        }
        let tp = max_abs_diff(&sum, &CMat::identity(d_in, d_in));
        if tp > 1e-9 {
            return Err(Error::InvalidChannel(format!("not trace preserving (residual {tp:.3e})")));
        }
        Ok(Self {
            d_in,
            d_out,
            choi: choi_from_kraus(kraus),
        })
    }

    pub fn unitary(u: &CMat) -> Result<Self> {
        let res = unitarity_residual(u);
        if res > 1e-9 {
            return Err(Error::NotUnitary(res));
        }
        Self::from_kraus(std::slice::from_ref(u))
    }

    pub fn identity(d: usize) -> Self {
        Self {
            d_in: d,
            d_out: d,
            choi: crate::linalg::max_entangled_projector(d),
        }
    }

    /// `X ↦ Tr(X) π_d`.
    pub fn completely_depolarizing(d: usize) -> Self {
        Self {
            d_in: d,
            d_out: d,
            choi: CMat::identity(d * d, d * d) * cr(1.0 / d as f64),
        }
    }

    /// Qubit dephasing `X ↦ (1-p) X + p Z X Z`.
    pub fn dephasing(p: f64) -> Result<Self> {
        let a = CMat::identity(2, 2) * cr((1.0 - p).sqrt());
        let mut z = CMat::identity(2, 2) * cr(p.sqrt());
        z[(1, 1)] = -z[(1, 1)];
        Self::from_kraus(&[a, z])
    }

    /// `X ↦ Tr_1 X` on `C^{d_traced} ⊗ C^{d_kept}`.
    pub fn trace_out_first(d_traced: usize, d_kept: usize) -> Self {
        let kraus: Vec<CMat> = (0..d_traced)
            .map(|k| {
                let bra = CMat::from_fn(1, d_traced, |_, j| cr(if j == k { 1.0 } else { 0.0 }));
                kron(&bra, &CMat::identity(d_kept, d_kept))
            })
            .collect();
        Self::from_kraus(&kraus).expect("partial trace is a channel")
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn choi(&self) -> &CMat {
        &self.choi
    }

    pub fn into_choi(self) -> CMat {
        self.choi
    }

    pub fn as_map(&self) -> LinearMap {
        LinearMap {
            d_in: self.d_in,
            d_out: self.d_out,
            choi: self.choi.clone(),
        }
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.d_in {
            return Err(Error::DimensionMismatch(format!(
                "channel input {} vs state dimension {}",
                self.d_in,
                rho.dim()
            )));
        }
        DensityOperator::with_tolerance(self.apply_operator(rho.matrix()), 1e-9)
    }

    /// Action on an arbitrary operator.
    pub fn apply_operator(&self, x: &CMat) -> CMat {
        apply_choi_trailing(x, 1, &self.choi, self.d_in, self.d_out)
    }

    /// Kraus operators from the Choi eigendecomposition, eigenvalues
    /// descending, each eigenvector's first nonzero entry real positive.
    pub fn kraus(&self) -> Vec<CMat> {
        let (vals, vecs) = hermitian_eigen(&self.choi);
        let rank = self.kraus_rank();
        (0..rank)
            .map(|k| {
                let mut v: CVec = vecs.column(k).into_owned();
                fix_phase(&mut v, 1e-12);
                let w = cr(vals[k].max(0.0).sqrt());
                CMat::from_fn(self.d_out, self.d_in, |o, i| v[i * self.d_out + o] * w)
            })
            .collect()
    }

    pub fn kraus_rank(&self) -> usize {
        numerical_rank(&self.choi)
    }

    /// `Λ₂ ∘ Λ₁` with `self = Λ₂`, computed with the link product.
    pub fn compose(&self, first: &QuantumChannel) -> Result<QuantumChannel> {
        if first.d_out != self.d_in {
            return Err(Error::DimensionMismatch(format!(
                "composing {}→{} after {}→{}",
                self.d_in, self.d_out, first.d_in, first.d_out
            )));
        }
        let a = SystemOperator::new(
            vec![System::new("in", first.d_in), System::new("mid", first.d_out)],
            first.choi.clone(),
        )?;
        let b = SystemOperator::new(
            vec![System::new("mid", self.d_in), System::new("out", self.d_out)],
            self.choi.clone(),
        )?;
        let linked = link_product(&a, &b)?;
        QuantumChannel::new(first.d_in, self.d_out, linked.matrix)
    }

    /// `Λ₁ ⊗ Λ₂`.
    pub fn tensor(&self, other: &QuantumChannel) -> QuantumChannel {
        let joint = kron(&self.choi, &other.choi);
        let dims = [self.d_in, self.d_out, other.d_in, other.d_out];
        QuantumChannel {
            d_in: self.d_in * other.d_in,
            d_out: self.d_out * other.d_out,
            choi: permute_subsystems(&joint, &dims, &[0, 2, 1, 3]),
        }
    }

    pub fn tensor_power(&self, n: usize) -> QuantumChannel {
        let mut acc = QuantumChannel {
            d_in: 1,
            d_out: 1,
            choi: CMat::identity(1, 1),
        };
        for _ in 0..n {
            acc = acc.tensor(self);
        }
        acc
    }

    /// `Λ†(Y) = Σ_k K_k† Y K_k`.
    pub fn adjoint_apply(&self, y: &CMat) -> CMat {
        adjoint_channel(self).apply(y)
    }
}

/// Choi matrix `Σ_k |K_k⟩⟩⟨⟨K_k|` with `|K⟩⟩ = Σ_i |i⟩ ⊗ K|i⟩`.
pub fn choi_from_kraus(kraus: &[CMat]) -> CMat {
    let (d_out, d_in) = kraus[0].shape();
    let vectors = CMat::from_fn(d_in * d_out, kraus.len(), |idx, j| kraus[j][(idx % d_out, idx / d_out)]);
    hermitian_part(&(&vectors * vectors.adjoint()))
}

/// The adjoint map `Λ† : L(C^{d_out}) → L(C^{d_in})`.
pub fn adjoint_channel(channel: &QuantumChannel) -> LinearMap {
    let swapped = permute_subsystems(&channel.choi, &[channel.d_in, channel.d_out], &[1, 0]);
    LinearMap {
        d_in: channel.d_out,
        d_out: channel.d_in,
        choi: swapped.map(|z| z.conj()),
    }
}

/// An isometry `V : C^{d_in} → C^{d_env} ⊗ C^{d_out}`, environment first.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    matrix: CMat,
    d_env: usize,
    d_out: usize,
}

impl Isometry {
    pub fn new(matrix: CMat, d_env: usize, d_out: usize) -> Result<Self> {
        if matrix.nrows() != d_env * d_out {
            return Err(Error::DimensionMismatch(format!(
                "isometry has {} rows, expected {d_env}·{d_out}",
                matrix.nrows()
            )));
        }
        let res = crate::linalg::isometry_residual(&matrix);
        if res > 1e-10 {
            return Err(Error::NotUnitary(res));
        }
        Ok(Self { matrix, d_env, d_out })
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn d_in(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn d_env(&self) -> usize {
        self.d_env
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    /// The channel `X ↦ V X V†` into environment ⊗ output.
    pub fn full_channel(&self) -> QuantumChannel {
        QuantumChannel {
            d_in: self.d_in(),
            d_out: self.d_env * self.d_out,
            choi: choi_from_kraus(std::slice::from_ref(&self.matrix)),
        }
    }

    /// The channel `X ↦ Tr_env(V X V†)`.
    pub fn channel(&self) -> QuantumChannel {
        let kraus: Vec<CMat> = (0..self.d_env)
            .map(|k| self.matrix.rows(k * self.d_out, self.d_out).into_owned())
            .collect();
        QuantumChannel {
            d_in: self.d_in(),
            d_out: self.d_out,
            choi: choi_from_kraus(&kraus),
        }
    }

    /// `V^⊗n` with output factors regrouped as `(E_1 … E_n, O_1 … O_n)`.
    pub fn tensor_power_env_first(&self, n: usize) -> CMat {
        let mut v = CMat::identity(1, 1);
        for _ in 0..n {
            v = kron(&v, &self.matrix);
        }
        let mut dims = Vec::with_capacity(2 * n);
        for _ in 0..n {
            dims.push(self.d_env);
            dims.push(self.d_out);
        }
        let mut perm: Vec<usize> = (0..n).map(|k| 2 * k).collect();
        perm.extend((0..n).map(|k| 2 * k + 1));
        let map = crate::linalg::subsystem_index_map(&dims, &perm);
        CMat::from_fn(v.nrows(), v.ncols(), |i, j| v[(map[i], j)])
    }
}

/// Canonical Stinespring isometry with environment dimension `r`: Kraus
/// operators from the Choi eigendecomposition, zero-padded to `r`.
pub fn choi_purification_to_isometry(channel: &QuantumChannel, r: usize) -> Result<Isometry> {
    let kraus = channel.kraus();
    if kraus.len() > r {
        return Err(Error::PromiseViolation {
            kraus_rank: kraus.len(),
            bound: r,
        });
    }
    let (d_in, d_out) = (channel.d_in, channel.d_out);
    let mut v = CMat::zeros(r * d_out, d_in);
    for (k, op) in kraus.iter().enumerate() {
        v.view_mut((k * d_out, 0), (d_out, d_in)).copy_from(op);
    }
    Isometry::new(v, r, d_out).map_err(|e| match e {
        Error::NotUnitary(res) => Error::Numerical(format!("dilation is not isometric (residual {res:.3e})")),
        other => other,
    })
}

/// Result of [`petz_recovery`]: the specialized map `(1/r)Λ†` and its
/// distance to the general Petz formula.
#[derive(Clone, Debug)]
pub struct PetzRecovery {
    pub channel: QuantumChannel,
    pub r: usize,
    pub general_formula_residual: f64,
}

/// `σ^{1/2} Λ†(Λ(σ)^{-1/2} · Λ(σ)^{-1/2}) σ^{1/2}` evaluated directly.
pub fn general_petz_map(channel: &QuantumChannel, sigma: &DensityOperator) -> Result<LinearMap> {
    let image = channel.apply_operator(sigma.matrix());
    let inv_sqrt = pd_inv_sqrt(&image, 1e-12)?;
    let sigma_sqrt = psd_sqrt(sigma.matrix());
    let adjoint = adjoint_channel(channel);
    Ok(LinearMap::from_fn(channel.d_out, channel.d_in, |y| {
        &sigma_sqrt * adjoint.apply(&(&inv_sqrt * y * &inv_sqrt)) * &sigma_sqrt
    }))
}

/// Petz recovery map with respect to the maximally mixed state for a channel
/// with `d_in = d_out·r` and `Λ(π_in) = π_out`, where it reduces to
/// `(1/r)Λ†`. Both sides are computed and compared.
pub fn petz_recovery(channel: &QuantumChannel) -> Result<PetzRecovery> {
    let (d_in, d_out) = (channel.d_in, channel.d_out);
    if d_in % d_out != 0 {
        return Err(Error::FormulaAssumption {
            what: format!("d_in = {d_in} is not a multiple of d_out = {d_out}"),
            residual: f64::INFINITY,
        });
    }
    let r = d_in / d_out;
    let rank = channel.kraus_rank();
    if rank > r {
        return Err(Error::PromiseViolation { kraus_rank: rank, bound: r });
    }
    let image = channel.apply_operator(&(CMat::identity(d_in, d_in) * cr(1.0 / d_in as f64)));
    let unital = max_abs_diff(&image, &(CMat::identity(d_out, d_out) * cr(1.0 / d_out as f64)));
    if unital > 1e-9 {
        return Err(Error::FormulaAssumption {
            what: "Λ(π_in) = π_out".into(),
            residual: unital,
        });
    }
    let adjoint = adjoint_channel(channel);
    let special = LinearMap {
        d_in: adjoint.d_in,
        d_out: adjoint.d_out,
        choi: adjoint.choi * cr(1.0 / r as f64),
    };
    let general = general_petz_map(channel, &DensityOperator::maximally_mixed(d_in))?;
    let residual = max_abs_diff(&special.choi, &general.choi);
    if residual > 1e-9 {
        return Err(Error::FormulaAssumption {
            what: "(1/r)Λ† equals the general Petz formula".into(),
            residual,
        });
    }
    Ok(PetzRecovery {
        channel: special.into_channel()?,
        r,
        general_formula_residual: residual,
    })
}

/// Partial trace of the output over the leading `d_env` factor of a channel
/// into `C^{d_env} ⊗ C^{d_out}`.
pub fn trace_output_env(choi: &CMat, d_in: usize, d_env: usize, d_out: usize) -> CMat {
    let reordered = permute_subsystems(choi, &[d_in, d_env, d_out], &[1, 0, 2]);
    trace_leading(&reordered, d_env, d_in * d_out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, ket, max_entangled_projector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bell() -> CVec {
        let mut v = CVec::zeros(4);
        v[0] = cr(std::f64::consts::FRAC_1_SQRT_2);
        v[3] = cr(std::f64::consts::FRAC_1_SQRT_2);
        v
    }

    #[test]
    fn density_operator_validation() {
        assert!(DensityOperator::new(CMat::identity(2, 2)).is_err());
        let mut m = CMat::identity(2, 2) * cr(0.5);
        m[(0, 1)] = c(0.0, 0.1);
        assert!(DensityOperator::new(m.clone()).is_err());
        m[(1, 0)] = c(0.0, -0.1);
        assert!(DensityOperator::new(m).is_ok());
        let neg = CMat::from_diagonal(&CVec::from_vec(vec![cr(1.0 + 1e-11), cr(-1e-11)]));
        let clipped = DensityOperator::new(neg).unwrap();
        assert!((clipped.matrix()[(0, 0)] - cr(1.0)).norm() < 1e-15);
        let bad = CMat::from_diagonal(&CVec::from_vec(vec![cr(1.1), cr(-0.1)]));
        assert!(DensityOperator::new(bad).is_err());
    }

    #[test]
    fn partial_trace_of_bell_state() {
        let rho = DensityOperator::pure(&bell()).unwrap();
        let reduced = rho.partial_trace(&[2, 2], &[1]).unwrap();
        assert!(max_abs_diff(reduced.matrix(), DensityOperator::maximally_mixed(2).matrix()) < 1e-15);
        assert!(rho.partial_trace(&[3, 2], &[1]).is_err());
    }

    #[test]
    fn identity_channel_and_kraus_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_rank_r_state(3, 3, &mut rng).unwrap();
        let id = QuantumChannel::identity(3);
        assert!(max_abs_diff(id.apply(&rho).unwrap().matrix(), rho.matrix()) < 1e-14);
        for _ in 0..20 {
            let ch = random_kraus_rank_r_channel(2, 3, 3, &mut rng).unwrap();
            let kraus = ch.kraus();
            assert_eq!(kraus.len(), 3);
            let rebuilt = QuantumChannel::from_kraus(&kraus).unwrap();
            assert!(max_abs_diff(rebuilt.choi(), ch.choi()) < 1e-10);
            let x = crate::linalg::ketbra(2, 0, 1) + crate::linalg::ketbra(2, 1, 1) * c(0.3, 0.2);
            let by_kraus: CMat = kraus.iter().map(|k| k * &x * k.adjoint()).fold(CMat::zeros(3, 3), |a, b| a + b);
            assert!(max_abs_diff(&ch.apply_operator(&x), &by_kraus) < 1e-10);
        }
    }

    #[test]
    fn compose_matches_kraus_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let a = random_kraus_rank_r_channel(2, 2, 2, &mut rng).unwrap();
            let b = random_kraus_rank_r_channel(2, 2, 3, &mut rng).unwrap();
            let composed = b.compose(&a).unwrap();
            let mut kraus = Vec::new();
            for kb in b.kraus() {
                for ka in a.kraus() {
                    kraus.push(&kb * &ka);
                }
            }
            let oracle = QuantumChannel::from_kraus(&kraus).unwrap();
            let dist = trace_distance(composed.choi(), oracle.choi());
            assert!(dist < 1e-10, "{dist}");
        }
        let id = QuantumChannel::identity(2);
        assert!(id.compose(&QuantumChannel::identity(3)).is_err());
    }

    #[test]
    fn tensor_product_of_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_kraus_rank_r_channel(2, 3, 2, &mut rng).unwrap();
        let b = random_kraus_rank_r_channel(2, 2, 2, &mut rng).unwrap();
        let ab = a.tensor(&b);
        let rho = random_rank_r_state(2, 2, &mut rng).unwrap();
        let sigma = random_rank_r_state(2, 1, &mut rng).unwrap();
        let lhs = ab.apply(&rho.tensor(&sigma)).unwrap();
        let rhs = a.apply(&rho).unwrap().tensor(&b.apply(&sigma).unwrap());
        assert!(max_abs_diff(lhs.matrix(), rhs.matrix()) < 1e-12);
    }

    #[test]
    fn adjoint_matches_kraus_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ch = random_kraus_rank_r_channel(3, 2, 2, &mut rng).unwrap();
        let y = CMat::from_fn(2, 2, |i, j| c(i as f64 + 0.5, j as f64 - 0.2));
        let expected: CMat = ch.kraus().iter().map(|k| k.adjoint() * &y * k).fold(CMat::zeros(3, 3), |a, b| a + b);
        assert!(max_abs_diff(&ch.adjoint_apply(&y), &expected) < 1e-12);
        // Λ†(1) = 1 for trace-preserving Λ.
        assert!(max_abs_diff(&ch.adjoint_apply(&CMat::identity(2, 2)), &CMat::identity(3, 3)) < 1e-12);
    }

    #[test]
    fn dilation_isometries() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = haar_unitary(3, &mut rng);
        let iso = choi_purification_to_isometry(&QuantumChannel::unitary(&u).unwrap(), 1).unwrap();
        // Equal to U up to the phase fixed by the Choi eigenvector convention.
        let phase = iso.matrix()[(0, 0)] / u[(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-10);
        assert!(max_abs_diff(iso.matrix(), &(&u * phase)) < 1e-10);

        let dep = QuantumChannel::completely_depolarizing(2);
        assert_eq!(dep.kraus_rank(), 4);
        let v = choi_purification_to_isometry(&dep, 4).unwrap();
        assert!(max_abs_diff(v.channel().choi(), dep.choi()) < 1e-12);
        assert_eq!(
            choi_purification_to_isometry(&dep, 3),
            Err(Error::PromiseViolation { kraus_rank: 4, bound: 3 })
        );

        let deph = QuantumChannel::dephasing(0.3).unwrap();
        let v = choi_purification_to_isometry(&deph, 2).unwrap();
        assert!(crate::linalg::isometry_residual(v.matrix()) < 1e-10);
        for i in 0..2 {
            for j in 0..2 {
                let x = crate::linalg::ketbra(2, i, j);
                let full = v.matrix() * &x * v.matrix().adjoint();
                let reduced = trace_leading(&full, 2, 2);
                assert!(max_abs_diff(&reduced, &deph.apply_operator(&x)) < 1e-10);
            }
        }
        // Padding beyond the Kraus rank is allowed.
        let padded = choi_purification_to_isometry(&deph, 3).unwrap();
        assert_eq!(padded.d_env(), 3);
        assert!(max_abs_diff(padded.channel().choi(), deph.choi()) < 1e-12);
    }

    #[test]
    fn env_first_tensor_power_layout() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ch = random_kraus_rank_r_channel(2, 2, 2, &mut rng).unwrap();
        let v = choi_purification_to_isometry(&ch, 2).unwrap();
        let v2 = v.tensor_power_env_first(2);
        let x = ket(4, 1);
        let direct: CVec = v.matrix().column(0).into_owned().kronecker(&v.matrix().column(1).into_owned());
        let permuted = crate::linalg::permute_vector(&direct, &[2, 2, 2, 2], &[0, 2, 1, 3]);
        assert!((&v2 * x - permuted).norm() < 1e-14);
    }

    #[test]
    fn petz_special_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = haar_unitary(2, &mut rng);
        let ch = QuantumChannel::unitary(&u).unwrap();
        let petz = petz_recovery(&ch).unwrap();
        let inverse = QuantumChannel::unitary(&u.adjoint()).unwrap();
        assert!(max_abs_diff(petz.channel.choi(), inverse.choi()) < 1e-10);

        let tr = QuantumChannel::trace_out_first(2, 2);
        let petz = petz_recovery(&tr).unwrap();
        assert_eq!(petz.r, 2);
        let y = CMat::from_fn(2, 2, |i, j| c((i + j) as f64, i as f64 - j as f64));
        let expected = kron(&(CMat::identity(2, 2) * cr(0.5)), &y);
        assert!(max_abs_diff(&petz.channel.apply_operator(&y), &expected) < 1e-12);

        let not_unital = QuantumChannel::from_kraus(&[
            crate::linalg::ketbra(2, 0, 0),
            crate::linalg::ketbra(2, 0, 1),
        ])
        .unwrap();
        assert!(matches!(petz_recovery(&not_unital), Err(Error::PromiseViolation { .. })));
        let three_to_two = random_kraus_rank_r_channel(3, 2, 2, &mut rng).unwrap();
        assert!(matches!(petz_recovery(&three_to_two), Err(Error::FormulaAssumption { .. })));
    }

    #[test]
    fn petz_matches_general_formula_for_random_dilations() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let ch = random_kraus_rank_r_channel(4, 2, 2, &mut rng).unwrap();
            let petz = petz_recovery(&ch).unwrap();
            assert!(petz.general_formula_residual < 1e-9);
        }
    }

    #[test]
    fn choi_of_identity_is_max_entangled() {
        assert_eq!(QuantumChannel::identity(2).choi(), &max_entangled_projector(2));
        let id = QuantumChannel::from_kraus(&[CMat::identity(2, 2)]).unwrap();
        assert!(max_abs_diff(id.choi(), &max_entangled_projector(2)) < 1e-15);
    }

    #[test]
    fn canonical_purification_reduces_to_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = random_rank_r_state(3, 2, &mut rng).unwrap();
        let psi = rho.canonical_purification(2).unwrap();
        let reduced = trace_leading(&(&psi * psi.adjoint()), 2, 3);
        assert!(max_abs_diff(&reduced, rho.matrix()) < 1e-12);
        assert!(rho.canonical_purification(1).is_err());
    }
}
