//! Permutations, Young's orthogonal representation, the tensor-factor
//! permutation action, the group-algebra register and the Fourier transform
//! over `S_n`.
//!
//! Permutations are stored 0-based in one-line notation and act on tensor
//! factors by sending factor `j` to position `σ(j)`. Composition is
//! `(σ ∘ τ)(i) = σ(τ(i))`, so `π(σ)π(τ) = π(στ)` and
//! `g_λ(σ)g_λ(τ) = g_λ(στ)`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use rand::Rng;

use crate::combinatorics::{factorial, partitions, standard_tableaux, CycleType, Partition, StandardTableau};
use crate::error::{Error, Result};
use crate::linalg::{cr, CMat, CVec, RMat};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    /// Build from 0-based one-line notation.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            if x >= n || seen[x] {
                return Err(Error::DimensionMismatch(format!(
                    "{images:?} is not a permutation of 0..{n}"
                )));
            }
            seen[x] = true;
        }
        Ok(Self { images })
    }

    /// Build from 1-based one-line notation, e.g. `[2, 3, 1]`.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return Err(Error::DimensionMismatch("0 in 1-based one-line notation".into()));
        }
        Self::new(images.iter().map(|x| x - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        Self {
            images: (0..n).collect(),
        }
    }

    /// Transposition of the (0-based) points `a` and `b`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(a, b);
        Self { images }
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch(format!(
                "composing permutations of {} and {} points",
                self.n(),
                other.n()
            )));
        }
        Ok(self.then_unchecked(other))
    }

    pub(crate) fn then_unchecked(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.n()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x] = i;
        }
        Permutation { images }
    }

    /// Cycles (0-based), each starting at its smallest point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n()];
        let mut out = Vec::new();
        for start in 0..self.n() {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut x = self.images[start];
            while x != start {
                seen[x] = true;
                cycle.push(x);
                x = self.images[x];
            }
            out.push(cycle);
        }
        out
    }

    pub fn num_cycles(&self) -> usize {
        self.cycles().len()
    }

    pub fn cycle_type(&self) -> CycleType {
        let mut lens: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        lens.sort_unstable_by(|a, b| b.cmp(a));
        Partition::new(lens).expect("cycle lengths form a partition")
    }

    pub fn sign(&self) -> i64 {
        if (self.n() - self.num_cycles()) % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Lexicographic rank of the one-line notation among all of `S_n`.
    pub fn rank(&self) -> usize {
        let n = self.n();
        let mut rank = 0;
        for i in 0..n {
            let smaller_later = self.images[i + 1..].iter().filter(|&&x| x < self.images[i]).count();
            rank += smaller_later * factorial(n - 1 - i) as usize;
        }
        rank
    }

    /// Inverse of [`Permutation::rank`].
    pub fn from_rank(n: usize, mut rank: usize) -> Result<Permutation> {
        let total = factorial(n) as usize;
        if rank >= total {
            return Err(Error::DimensionMismatch(format!("rank {rank} out of range for S_{n}")));
        }
        let mut pool: Vec<usize> = (0..n).collect();
        let mut images = Vec::with_capacity(n);
        for i in 0..n {
            let block = factorial(n - 1 - i) as usize;
            images.push(pool.remove(rank / block));
            rank %= block;
        }
        Ok(Permutation { images })
    }

    /// Adjacent transpositions `b_1, …, b_m` (as positions `b` swapping `b`
    /// and `b + 1`) with `σ = s_{b_m} ∘ ⋯ ∘ s_{b_1}`, read off a bubble sort
    /// of the one-line notation.
    pub fn adjacent_factors(&self) -> Vec<usize> {
        let mut w = self.images.clone();
        let mut out = Vec::new();
        let n = w.len();
        for pass in 0..n {
            for b in 0..n.saturating_sub(1 + pass) {
                if w[b] > w[b + 1] {
                    w.swap(b, b + 1);
                    out.push(b);
                }
            }
        }
        out
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
        let mut images: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            images.swap(i, j);
        }
        Permutation { images }
    }
}

impl fmt::Display for Permutation {
    /// Cycle notation with 1-based points, fixed points omitted; `e` for the
    /// identity.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles: Vec<String> = self
            .cycles()
            .into_iter()
            .filter(|c| c.len() > 1)
            .map(|c| {
                let body: Vec<String> = c.iter().map(|x| (x + 1).to_string()).collect();
                format!("({})", body.join(" "))
            })
            .collect();
        if cycles.is_empty() {
            write!(f, "e")
        } else {
            write!(f, "{}", cycles.join(""))
        }
    }
}

/// `σ ∘ τ`.
pub fn compose(sigma: &Permutation, tau: &Permutation) -> Result<Permutation> {
    sigma.compose(tau)
}

/// All of `S_n` in lexicographic order of one-line notation, so that the
/// position of `σ` equals `σ.rank()`.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    (0..factorial(n) as usize)
        .map(|r| Permutation::from_rank(n, r).expect("rank in range"))
        .collect()
}

/// `g_λ(σ)` together with its labels.
#[derive(Clone, Debug, PartialEq)]
pub struct IrrepMatrix {
    pub shape: Partition,
    pub perm: Permutation,
    pub matrix: RMat,
}

/// Young's orthogonal form of the adjacent transposition swapping the
/// (0-based) points `k` and `k + 1`, in the last-letter-ordered basis.
fn adjacent_generator(tableaux: &[StandardTableau], index: &HashMap<StandardTableau, usize>, k: usize) -> RMat {
    let m = tableaux.len();
    let mut g = RMat::zeros(m, m);
    for (col, t) in tableaux.iter().enumerate() {
        let r = (t.content(k + 2) - t.content(k + 1)) as f64;
        g[(col, col)] = 1.0 / r;
        if let Some(swapped) = t.swap_adjacent(k + 1) {
            g[(index[&swapped], col)] = (1.0 - 1.0 / (r * r)).sqrt();
        }
    }
    g
}

struct IrrepBuilder {
    generators: Vec<RMat>,
}

impl IrrepBuilder {
    fn new(shape: &Partition) -> Self {
        let tableaux = standard_tableaux(shape);
        let index: HashMap<StandardTableau, usize> =
            tableaux.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        let generators = (0..shape.n().saturating_sub(1))
            .map(|k| adjacent_generator(&tableaux, &index, k))
            .collect();
        Self { generators }
    }

    fn matrix(&self, m: usize, sigma: &Permutation) -> RMat {
        let mut out = RMat::identity(m, m);
        for b in sigma.adjacent_factors() {
            out = &self.generators[b] * out;
        }
        out
    }
}

/// `g_λ(σ)` in Young's orthogonal form.
pub fn young_orthogonal_rep(shape: &Partition, sigma: &Permutation) -> Result<IrrepMatrix> {
    if shape.n() != sigma.n() {
        return Err(Error::DimensionMismatch(format!(
            "irrep {shape} of S_{} evaluated on a permutation of {} points",
            shape.n(),
            sigma.n()
        )));
    }
    let m = crate::combinatorics::sym_dim(shape);
    let matrix = IrrepBuilder::new(shape).matrix(m, sigma);
    Ok(IrrepMatrix {
        shape: shape.clone(),
        perm: sigma.clone(),
        matrix,
    })
}

/// One irrep of `S_n`, evaluated on every group element.
#[derive(Debug)]
pub struct Irrep {
    pub shape: Partition,
    pub tableaux: Vec<StandardTableau>,
    /// `matrices[σ.rank()] = g_λ(σ)`.
    pub matrices: Vec<RMat>,
}

impl Irrep {
    pub fn dim(&self) -> usize {
        self.tableaux.len()
    }
}

/// `S_n` with all elements and all irreps tabulated.
#[derive(Debug)]
pub struct SymmetricGroup {
    n: usize,
    elements: Vec<Permutation>,
    irreps: Vec<Irrep>,
}

impl SymmetricGroup {
    pub fn new(n: usize) -> Result<Self> {
        let shapes = partitions(n)?;
        let elements = all_permutations(n);
        let irreps = shapes
            .into_iter()
            .map(|shape| {
                let tableaux = standard_tableaux(&shape);
                let builder = IrrepBuilder::new(&shape);
                let matrices = elements.iter().map(|s| builder.matrix(tableaux.len(), s)).collect();
                Irrep {
                    shape,
                    tableaux,
                    matrices,
                }
            })
            .collect();
        Ok(Self { n, elements, irreps })
    }

    /// Shared instance for `n`, built on first use.
    pub fn cached(n: usize) -> Result<Arc<SymmetricGroup>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<SymmetricGroup>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(g) = cache.lock().expect("cache poisoned").get(&n) {
            return Ok(Arc::clone(g));
        }
        let group = Arc::new(SymmetricGroup::new(n)?);
        let mut guard = cache.lock().expect("cache poisoned");
        Ok(Arc::clone(guard.entry(n).or_insert(group)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn irreps(&self) -> &[Irrep] {
        &self.irreps
    }

    pub fn irrep(&self, shape: &Partition) -> Result<&Irrep> {
        self.irreps
            .iter()
            .find(|ir| &ir.shape == shape)
            .ok_or_else(|| Error::DimensionMismatch(format!("{shape} is not a partition of {}", self.n)))
    }

    pub fn irrep_index(&self, shape: &Partition) -> Option<usize> {
        self.irreps.iter().position(|ir| &ir.shape == shape)
    }

    /// Largest deviation of `(1/n!) Σ_σ g_λ(σ)_{ij} g_μ(σ)_{kl}` from
    /// `δ_{λμ} δ_{ik} δ_{jl} / m_λ`, over all irreps and entries.
    pub fn orthogonality_residual(&self) -> f64 {
        let order = self.order();
        let mut table = RMat::zeros(order, order);
        let mut weights = Vec::with_capacity(order);
        let mut col = 0;
        for ir in &self.irreps {
            let m = ir.dim();
            for i in 0..m {
                for j in 0..m {
                    for (row, g) in ir.matrices.iter().enumerate() {
                        table[(row, col)] = g[(i, j)];
                    }
                    weights.push(1.0 / m as f64);
                    col += 1;
                }
            }
        }
        let gram = table.transpose() * &table / order as f64;
        let mut worst: f64 = 0.0;
        for a in 0..order {
            for b in 0..order {
                let expected = if a == b { weights[a] } else { 0.0 };
                worst = worst.max((gram[(a, b)] - expected).abs());
            }
        }
        worst
    }

    /// Offsets of each irrep block in the flattened `(λ, i, j)` register of
    /// size `n!`.
    pub fn fourier_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.irreps.len());
        let mut acc = 0;
        for ir in &self.irreps {
            offsets.push(acc);
            acc += ir.dim() * ir.dim();
        }
        offsets
    }
}

/// Label of one row of the Fourier register: irrep index (global
/// reverse-lex order) and the two matrix indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FourierLabel {
    pub irrep: usize,
    pub i: usize,
    pub j: usize,
}

/// Row labels of [`qft_sn`]; row `offset_λ + i·m_λ + j` carries `|λ, i, j⟩`.
pub fn fourier_labels(group: &SymmetricGroup) -> Vec<FourierLabel> {
    let mut out = Vec::with_capacity(group.order());
    for (irrep, ir) in group.irreps().iter().enumerate() {
        for i in 0..ir.dim() {
            for j in 0..ir.dim() {
                out.push(FourierLabel { irrep, i, j });
            }
        }
    }
    out
}

/// The Fourier transform over `S_n`:
/// `|σ⟩ ↦ Σ_λ Σ_{i,j} √(m_λ/n!) [g_λ(σ)]_{ji} |λ, i, j⟩`.
pub fn qft_sn(n: usize) -> Result<CMat> {
    let group = SymmetricGroup::cached(n)?;
    Ok(qft_from_group(&group))
}

pub fn qft_from_group(group: &SymmetricGroup) -> CMat {
    let size = group.order();
    let mut f = CMat::zeros(size, size);
    let offsets = group.fourier_offsets();
    for (col, _) in group.elements().iter().enumerate() {
        for (ir, &offset) in group.irreps().iter().zip(&offsets) {
            let m = ir.dim();
            let scale = (m as f64 / size as f64).sqrt();
            let g = &ir.matrices[col];
            for i in 0..m {
                for j in 0..m {
                    f[(offset + i * m + j, col)] = cr(scale * g[(j, i)]);
                }
            }
        }
    }
    f
}

/// Uniform superposition over the group register.
pub fn plus_state(n: usize) -> CVec {
    let size = factorial(n) as usize;
    CVec::from_element(size, cr(1.0 / (size as f64).sqrt()))
}

/// Index map of `π(σ)` on `(C^d)^⊗n`: `π(σ)|k⟩ = |map[k]⟩`.
pub fn permutation_index_map(sigma: &Permutation, d: usize) -> Vec<usize> {
    let n = sigma.n();
    let size = d.pow(n as u32);
    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * d;
    }
    (0..size)
        .map(|k| {
            let mut rest = k;
            let mut target = 0;
            for j in 0..n {
                let digit = rest / strides[j];
                rest %= strides[j];
                target += digit * strides[sigma.apply(j)];
            }
            target
        })
        .collect()
}

/// `π(σ)` as a dense permutation matrix on `(C^d)^⊗n`.
pub fn permutation_action(sigma: &Permutation, d: usize) -> CMat {
    crate::linalg::permutation_matrix(&permutation_index_map(sigma, d))
}

/// `π(σ)v` without forming the matrix.
pub fn permute_tensor_vector<T: nalgebra::Scalar + Copy>(
    sigma: &Permutation,
    d: usize,
    v: &nalgebra::DVector<T>,
) -> nalgebra::DVector<T> {
    let map = permutation_index_map(sigma, d);
    let mut out = v.clone();
    for (k, &target) in map.iter().enumerate() {
        out[target] = v[k];
    }
    out
}

/// Index map of `Σ_σ |σ⟩⟨σ| ⊗ π(σ)` (or `π(σ)ᵀ` when `transpose`) on
/// `C^{n!} ⊗ (C^d)^⊗n`.
pub fn ctrl_pi_index_map(n: usize, d: usize, transpose: bool) -> Vec<usize> {
    let block = d.pow(n as u32);
    let mut out = Vec::with_capacity(block * factorial(n) as usize);
    for (s, sigma) in all_permutations(n).iter().enumerate() {
        let sigma = if transpose { sigma.inverse() } else { sigma.clone() };
        out.extend(permutation_index_map(&sigma, d).into_iter().map(|k| s * block + k));
    }
    out
}

/// `Σ_σ |σ⟩⟨σ| ⊗ π(σ)`.
pub fn ctrl_pi(n: usize, d: usize) -> CMat {
    crate::linalg::permutation_matrix(&ctrl_pi_index_map(n, d, false))
}

/// `Σ_σ |σ⟩⟨σ| ⊗ π(σ)ᵀ`.
pub fn ctrl_pi_transpose(n: usize, d: usize) -> CMat {
    crate::linalg::permutation_matrix(&ctrl_pi_index_map(n, d, true))
}

/// Left-regular representation `L(σ)|τ⟩ = |στ⟩` on the group register.
pub fn left_regular(sigma: &Permutation) -> CMat {
    let n = sigma.n();
    let map: Vec<usize> = all_permutations(n).iter().map(|t| sigma.then_unchecked(t).rank()).collect();
    crate::linalg::permutation_matrix(&map)
}

/// Right-regular representation `R(σ)|τ⟩ = |τσ⁻¹⟩` on the group register.
pub fn right_regular(sigma: &Permutation) -> CMat {
    let n = sigma.n();
    let inv = sigma.inverse();
    let map: Vec<usize> = all_permutations(n).iter().map(|t| t.then_unchecked(&inv).rank()).collect();
    crate::linalg::permutation_matrix(&map)
}

/// Real block-diagonal matrix `⊕_λ blocks[λ]`.
pub fn direct_sum(blocks: &[DMatrix<f64>]) -> RMat {
    let size = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = RMat::zeros(size, size);
    let mut offset = 0;
    for b in blocks {
        out.view_mut((offset, offset), (b.nrows(), b.ncols())).copy_from(b);
        offset += b.nrows();
    }
    out
}
