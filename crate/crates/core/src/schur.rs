//! The quantum Schur transform on `(C^d)^⊗n`, Young projectors, the
//! unitary-group irrep blocks `f_λ(U)`, and generalized phase estimation.
//!
//! Rows of the transform are grouped by `λ` in reverse-lex order (only `λ`
//! with `d_λ(d) > 0`), and within a block row `offset_λ + u·m_λ + i` carries
//! `|λ, u, i⟩`. With this layout
//! `U_Sch π(σ) U_Sch† = ⊕_λ 1_{d_λ} ⊗ g_λ(σ)` and
//! `U_Sch U^⊗n U_Sch† = ⊕_λ f_λ(U) ⊗ 1_{m_λ}`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channels::DensityOperator;
use crate::combinatorics::{unitary_dim, Partition};
use crate::error::{Error, Result};
use crate::linalg::{cr, fix_sign_real, kron, orthogonalize_real, unitarity_residual, CMat, RMat};
use crate::symrep::{permutation_index_map, SymmetricGroup};

/// Default cap on `d^n · n!` for dense constructions.
pub const DEFAULT_BUDGET: usize = 4096;

/// Tag written into matrix dumps so that readers can detect layout changes.
pub const ORDERING_VERSION: &str = "revlex-lastletter-v1";

pub fn check_budget(what: &str, needed: usize, budget: usize) -> Result<()> {
    if needed > budget {
        return Err(Error::BudgetExceeded {
            what: what.to_string(),
            needed,
            budget,
        });
    }
    Ok(())
}

/// `d^n · n!`, saturating.
pub fn schur_cost(n: usize, d: usize) -> usize {
    let dn = (d as u128).saturating_pow(n as u32);
    let fact = crate::combinatorics::factorial(n.min(30));
    usize::try_from(dn.saturating_mul(fact)).unwrap_or(usize::MAX)
}

/// One `λ` block of a Schur transform.
#[derive(Clone, Debug, PartialEq)]
pub struct SchurBlock {
    pub shape: Partition,
    /// Index of `λ` among all partitions of `n` (global reverse-lex order).
    pub irrep_index: usize,
    pub unitary_dim: usize,
    pub sym_dim: usize,
    pub offset: usize,
}

impl SchurBlock {
    pub fn size(&self) -> usize {
        self.unitary_dim * self.sym_dim
    }

    pub fn row(&self, u: usize, i: usize) -> usize {
        self.offset + u * self.sym_dim + i
    }
}

/// Label `(λ, u, i)` of one row; `block` indexes [`SchurTransform::blocks`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SchurLabel {
    pub block: usize,
    pub u: usize,
    pub i: usize,
}

#[derive(Clone, Debug)]
pub struct SchurTransform {
    n: usize,
    d: usize,
    unitary: CMat,
    blocks: Vec<SchurBlock>,
    labels: Vec<SchurLabel>,
    group: Arc<SymmetricGroup>,
}

/// Weight of a computational basis state: the number of occurrences of each
/// letter. Larger weights (in lexicographic comparison) come first.
fn weight(index: usize, n: usize, d: usize) -> Vec<usize> {
    let mut counts = vec![0; d];
    let mut rest = index;
    for _ in 0..n {
        counts[rest % d] += 1;
        rest /= d;
    }
    counts
}

impl SchurTransform {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        Self::with_budget(n, d, DEFAULT_BUDGET)
    }

    pub fn with_budget(n: usize, d: usize, budget: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::EmptyInput("local dimension 0"));
        }
        check_budget(&format!("Schur transform (n = {n}, d = {d})"), schur_cost(n, d), budget)?;
        let group = SymmetricGroup::cached(n)?;
        let size = d.pow(n as u32);
        let maps: Vec<Vec<usize>> = group.elements().iter().map(|s| permutation_index_map(s, d)).collect();
        let order = group.order() as f64;

        let mut candidates: Vec<usize> = (0..size).collect();
        candidates.sort_by(|&a, &b| weight(b, n, d).cmp(&weight(a, n, d)).then(a.cmp(&b)));

        // (m_λ/n!) Σ_σ g_λ(σ)_{jk} π(σ) v
        let matrix_unit = |ir: &crate::symrep::Irrep, j: usize, k: usize, v: &DVector<f64>| {
            let m = ir.dim() as f64;
            let mut out = DVector::zeros(size);
            for (g, map) in ir.matrices.iter().zip(&maps) {
                let coef = g[(j, k)];
                if coef == 0.0 {
                    continue;
                }
                for (x, &target) in map.iter().enumerate() {
                    out[target] += coef * v[x];
                }
            }
            out * (m / order)
        };

        let mut unitary = RMat::zeros(size, size);
        let mut blocks = Vec::new();
        let mut labels = Vec::with_capacity(size);
        let mut offset = 0;
        for (irrep_index, ir) in group.irreps().iter().enumerate() {
            let dl = unitary_dim(&ir.shape, d);
            if dl == 0 {
                continue;
            }
            let m = ir.dim();
            let mut basis: Vec<DVector<f64>> = Vec::with_capacity(dl);
            for &x in &candidates {
                if basis.len() == dl {
                    break;
                }
                let mut e = DVector::zeros(size);
                e[x] = 1.0;
                let mut w = matrix_unit(ir, 0, 0, &e);
                let norm = orthogonalize_real(&mut w, &basis);
                if norm > 1e-8 {
                    w /= norm;
                    fix_sign_real(&mut w, 1e-12);
                    basis.push(w);
                }
            }
            if basis.len() != dl {
                return Err(Error::Numerical(format!(
                    "found {} of {dl} highest-slot vectors for {}",
                    basis.len(),
                    ir.shape
                )));
            }
            let block = SchurBlock {
                shape: ir.shape.clone(),
                irrep_index,
                unitary_dim: dl,
                sym_dim: m,
                offset,
            };
            for (u, v) in basis.iter().enumerate() {
                for i in 0..m {
                    let vi = if i == 0 { v.clone() } else { matrix_unit(ir, i, 0, v) };
                    unitary.set_row(block.row(u, i), &vi.transpose());
                    labels.push(SchurLabel {
                        block: blocks.len(),
                        u,
                        i,
                    });
                }
            }
            offset += block.size();
            blocks.push(block);
        }
        debug_assert_eq!(offset, size);
        let unitary = crate::linalg::to_complex(&unitary);
        let residual = unitarity_residual(&unitary);
        if residual > 1e-9 {
            return Err(Error::NotUnitary(residual));
        }
        Ok(Self {
            n,
            d,
            unitary,
            blocks,
            labels,
            group,
        })
    }

    /// Shared transform for `(n, d)`; the budget is checked on every call.
    pub fn cached(n: usize, d: usize, budget: usize) -> Result<Arc<SchurTransform>> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<SchurTransform>>>> = OnceLock::new();
        check_budget(&format!("Schur transform (n = {n}, d = {d})"), schur_cost(n, d), budget)?;
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(t) = cache.lock().expect("cache poisoned").get(&(n, d)) {
            return Ok(t.clone());
        }
        let t = Arc::new(SchurTransform::with_budget(n, d, budget)?);
        cache.lock().expect("cache poisoned").insert((n, d), t.clone());
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.unitary.nrows()
    }

    pub fn unitary(&self) -> &CMat {
        &self.unitary
    }

    pub fn blocks(&self) -> &[SchurBlock] {
        &self.blocks
    }

    pub fn labels(&self) -> &[SchurLabel] {
        &self.labels
    }

    pub fn group(&self) -> &SymmetricGroup {
        &self.group
    }

    pub fn block(&self, shape: &Partition) -> Option<&SchurBlock> {
        self.blocks.iter().find(|b| &b.shape == shape)
    }

    /// `⊕_λ 1_{d_λ} ⊗ g_λ(σ)` in this transform's row layout.
    pub fn permutation_block_form(&self, sigma_rank: usize) -> CMat {
        let mut out = CMat::zeros(self.dim(), self.dim());
        for b in &self.blocks {
            let g = &self.group.irreps()[b.irrep_index].matrices[sigma_rank];
            let blk = kron(&CMat::identity(b.unitary_dim, b.unitary_dim), &crate::linalg::to_complex(g));
            out.view_mut((b.offset, b.offset), (b.size(), b.size())).copy_from(&blk);
        }
        out
    }

    /// `U_Sch X U_Sch†`.
    pub fn conjugate(&self, x: &CMat) -> CMat {
        &self.unitary * x * self.unitary.adjoint()
    }

    /// `f_λ(U)`, read from `U_Sch U^⊗n U_Sch†` at multiplicity index 0.
    pub fn unitary_irrep_block(&self, u: &CMat, shape: &Partition) -> Result<CMat> {
        if u.nrows() != self.d || u.ncols() != self.d {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for local dimension {}",
                u.nrows(),
                u.ncols(),
                self.d
            )));
        }
        let residual = unitarity_residual(u);
        if residual > 1e-9 {
            return Err(Error::NotUnitary(residual));
        }
        let block = self
            .block(shape)
            .ok_or_else(|| Error::NotApplicable(format!("{shape} has no U({}) irrep", self.d)))?;
        let conj = self.conjugate(&tensor_power(u, self.n));
        Ok(CMat::from_fn(block.unitary_dim, block.unitary_dim, |a, b| {
            conj[(block.row(a, 0), block.row(b, 0))]
        }))
    }

    /// `⊕_λ f_λ(U) ⊗ 1_{m_λ}` for the given per-block `f_λ` matrices.
    pub fn unitary_block_form(&self, f: &[CMat]) -> CMat {
        let mut out = CMat::zeros(self.dim(), self.dim());
        for (b, fb) in self.blocks.iter().zip(f) {
            let blk = kron(fb, &CMat::identity(b.sym_dim, b.sym_dim));
            out.view_mut((b.offset, b.offset), (b.size(), b.size())).copy_from(&blk);
        }
        out
    }

    /// `Π_λ = U_Sch† (|λ⟩⟨λ| ⊗ 1 ⊗ 1) U_Sch`; zero if `λ` has no block.
    pub fn block_projector(&self, shape: &Partition) -> CMat {
        let Some(b) = self.block(shape) else {
            return CMat::zeros(self.dim(), self.dim());
        };
        let rows = self.unitary.rows(b.offset, b.size());
        rows.adjoint() * rows
    }
}

/// `U^⊗n`.
pub fn tensor_power(u: &CMat, n: usize) -> CMat {
    let mut out = CMat::identity(1, 1);
    for _ in 0..n {
        out = kron(&out, u);
    }
    out
}

pub fn schur_transform(n: usize, d: usize) -> Result<SchurTransform> {
    SchurTransform::new(n, d)
}

/// `f_λ(U)` with `n = |λ|` and `d = dim U`.
pub fn unitary_irrep_block(u: &CMat, shape: &Partition) -> Result<CMat> {
    SchurTransform::new(shape.n(), u.nrows())?.unitary_irrep_block(u, shape)
}

#[derive(Clone, Debug, PartialEq)]
pub struct YoungProjector {
    pub shape: Partition,
    pub matrix: CMat,
    /// True when `λ` has more rows than `d`, so the projector vanishes.
    pub is_zero: bool,
}

/// `Π_λ = (m_λ/n!) Σ_σ χ_λ(σ) π(σ)` on `(C^d)^⊗n`.
pub fn young_projector(shape: &Partition, d: usize) -> Result<YoungProjector> {
    let n = shape.n();
    check_budget(&format!("Young projector (n = {n}, d = {d})"), schur_cost(n, d), DEFAULT_BUDGET)?;
    let group = SymmetricGroup::cached(n)?;
    let ir = group.irrep(shape)?;
    let size = d.pow(n as u32);
    let scale = ir.dim() as f64 / group.order() as f64;
    let mut matrix = CMat::zeros(size, size);
    for (s, g) in group.elements().iter().zip(&ir.matrices) {
        let chi = g.trace();
        if chi == 0.0 {
            continue;
        }
        for (x, target) in permutation_index_map(s, d).into_iter().enumerate() {
            matrix[(target, x)] += cr(scale * chi);
        }
    }
    Ok(YoungProjector {
        shape: shape.clone(),
        matrix,
        is_zero: unitary_dim(shape, d) == 0,
    })
}

/// Outcome of [`generalized_phase_estimation`].
#[derive(Clone, Debug)]
pub struct PhaseEstimate {
    pub shape: Partition,
    pub probability: f64,
    pub post_state: DensityOperator,
}

/// `Tr(Π_λ ρ)` for every block of the transform, in block order.
pub fn phase_estimation_distribution(schur: &SchurTransform, state: &DensityOperator) -> Result<Vec<(Partition, f64)>> {
    if state.dim() != schur.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} for a Schur transform of dimension {}",
            state.dim(),
            schur.dim()
        )));
    }
    let rotated = schur.conjugate(state.matrix());
    Ok(schur
        .blocks()
        .iter()
        .map(|b| {
            let p: f64 = (b.offset..b.offset + b.size()).map(|k| rotated[(k, k)].re).sum();
            (b.shape.clone(), p.max(0.0))
        })
        .collect())
}

/// Measure the Young label: sample `λ` with probability `Tr(Π_λ ρ)` and
/// return `Π_λ ρ Π_λ / Tr(Π_λ ρ)`.
pub fn generalized_phase_estimation(schur: &SchurTransform, state: &DensityOperator, seed: u64) -> Result<PhaseEstimate> {
    let dist = phase_estimation_distribution(schur, state)?;
    let total: f64 = dist.iter().map(|(_, p)| p).sum();
    if total < 1e-12 {
        return Err(Error::Numerical("all outcome probabilities vanish".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut chosen = dist.len() - 1;
    for (k, (_, p)) in dist.iter().enumerate() {
        acc += p;
        if draw < acc && *p > 0.0 {
            chosen = k;
            break;
        }
    }
    let (shape, probability) = dist[chosen].clone();
    let proj = schur.block_projector(&shape);
    let post = &proj * state.matrix() * &proj * cr(1.0 / probability);
    Ok(PhaseEstimate {
        shape,
        probability,
        post_state: DensityOperator::with_tolerance(post, 1e-8)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{haar_unitary, random_rank_r_state};
    use crate::linalg::{max_abs, max_abs_diff};
    use crate::symrep::{permutation_action, Permutation};
    use rand::SeedableRng;

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    fn off_block_mass(schur: &SchurTransform, m: &CMat) -> f64 {
        let mut worst: f64 = 0.0;
        for (r, lr) in schur.labels().iter().enumerate() {
            for (c, lc) in schur.labels().iter().enumerate() {
                if lr.block != lc.block {
                    worst = worst.max(m[(r, c)].norm());
                }
            }
        }
        worst
    }

    #[test]
    fn two_qubit_blocks() {
        let s = SchurTransform::new(2, 2).unwrap();
        let dims: Vec<(usize, usize)> = s.blocks().iter().map(|b| (b.unitary_dim, b.sym_dim)).collect();
        assert_eq!(dims, vec![(3, 1), (1, 1)]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = s.unitary().row(3).into_owned();
        let expected = [0.0, h, -h, 0.0];
        let sign = singlet[1].re.signum();
        for k in 0..4 {
            assert!((singlet[k].re - sign * expected[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn two_copy_block_dimensions() {
        for d in 1..=4 {
            let s = SchurTransform::new(2, d).unwrap();
            let sym = s.block(&p(&[2])).unwrap();
            assert_eq!((sym.unitary_dim, sym.sym_dim), (d * (d + 1) / 2, 1));
            match s.block(&p(&[1, 1])) {
                Some(b) => assert_eq!((b.unitary_dim, b.sym_dim), (d * (d - 1) / 2, 1)),
                None => assert_eq!(d, 1),
            }
        }
    }

    #[test]
    fn permutation_covariance_is_entrywise() {
        for (n, d) in [(2, 2), (2, 3), (3, 2), (3, 3), (4, 2)] {
            let s = SchurTransform::new(n, d).unwrap();
            for sigma in s.group().elements() {
                let lhs = s.conjugate(&permutation_action(sigma, d));
                let rhs = s.permutation_block_form(sigma.rank());
                assert!(max_abs_diff(&lhs, &rhs) < 1e-10, "n={n} d={d} σ={sigma}");
            }
        }
    }

    #[test]
    fn unitary_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = SchurTransform::new(3, 2).unwrap();
        let dims: Vec<(usize, usize)> = s.blocks().iter().map(|b| (b.unitary_dim, b.sym_dim)).collect();
        assert_eq!(dims, vec![(4, 1), (2, 2)]);
        for _ in 0..10 {
            let u = haar_unitary(2, &mut rng);
            let conj = s.conjugate(&tensor_power(&u, 3));
            assert!(off_block_mass(&s, &conj) < 1e-9);
            let f: Vec<CMat> = s.blocks().iter().map(|b| s.unitary_irrep_block(&u, &b.shape).unwrap()).collect();
            assert!(max_abs_diff(&conj, &s.unitary_block_form(&f)) < 1e-9);
        }
    }

    #[test]
    fn symmetric_square_of_a_qubit_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = SchurTransform::new(2, 2).unwrap();
        let u = haar_unitary(2, &mut rng);
        let f = s.unitary_irrep_block(&u, &p(&[2])).unwrap();
        let (a, b, c, d) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
        let r2 = cr(std::f64::consts::SQRT_2);
        // Basis |00⟩, (|01⟩+|10⟩)/√2, |11⟩.
        let explicit = CMat::from_row_slice(
            3,
            3,
            &[a * a, r2 * a * b, b * b, r2 * a * c, a * d + b * c, r2 * b * d, c * c, r2 * c * d, d * d],
        );
        // The transform fixes each basis vector up to sign; compare up to that.
        let basis_signs: Vec<f64> = [0usize, 1, 3]
            .iter()
            .zip(0..3)
            .map(|(&col, row)| s.unitary()[(row, col)].re.signum())
            .collect();
        let signed = CMat::from_fn(3, 3, |i, j| explicit[(i, j)] * cr(basis_signs[i] * basis_signs[j]));
        assert!(max_abs_diff(&f, &signed) < 1e-12);
        let det_u = u.determinant();
        assert!((f.determinant() - det_u * det_u * det_u).norm() < 1e-10);
    }

    #[test]
    fn irrep_blocks_are_homomorphic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = SchurTransform::new(3, 3).unwrap();
        for b in s.blocks() {
            let id = s.unitary_irrep_block(&CMat::identity(3, 3), &b.shape).unwrap();
            assert!(max_abs_diff(&id, &CMat::identity(b.unitary_dim, b.unitary_dim)) < 1e-12);
        }
        for _ in 0..5 {
            let u = haar_unitary(3, &mut rng);
            let v = haar_unitary(3, &mut rng);
            for b in s.blocks() {
                let fu = s.unitary_irrep_block(&u, &b.shape).unwrap();
                let fv = s.unitary_irrep_block(&v, &b.shape).unwrap();
                let fuv = s.unitary_irrep_block(&(&u * &v), &b.shape).unwrap();
                assert!(max_abs_diff(&fuv, &(&fu * &fv)) < 1e-10);
                assert!(unitarity_residual(&fu) < 1e-10);
            }
        }
        assert!(matches!(
            s.unitary_irrep_block(&(CMat::identity(3, 3) * cr(2.0)), &p(&[3])),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn young_projectors_two_ways() {
        for (n, d) in [(2, 2), (3, 2), (3, 3), (4, 2)] {
            let s = SchurTransform::new(n, d).unwrap();
            let size = d.pow(n as u32);
            let mut sum = CMat::zeros(size, size);
            for shape in crate::combinatorics::partitions(n).unwrap() {
                let yp = young_projector(&shape, d).unwrap();
                let from_schur = s.block_projector(&shape);
                assert!(max_abs_diff(&yp.matrix, &from_schur) < 1e-10, "{shape}");
                assert!(max_abs_diff(&(&yp.matrix * &yp.matrix), &yp.matrix) < 1e-10);
                assert_eq!(yp.is_zero, max_abs(&yp.matrix) < 1e-12);
                sum += yp.matrix;
            }
            assert!(max_abs_diff(&sum, &CMat::identity(size, size)) < 1e-10);
        }
        let singlet = young_projector(&p(&[1, 1]), 2).unwrap();
        assert!((singlet.matrix.trace().re - 1.0).abs() < 1e-12);
        let mixed = young_projector(&p(&[2, 1]), 2).unwrap();
        assert!((mixed.matrix.trace().re - 4.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_projector_fixes_product_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let v = crate::channels::sampling::haar_vector(3, &mut rng);
        let vv = v.kronecker(&v).kronecker(&v);
        let yp = young_projector(&p(&[3]), 3).unwrap();
        assert!((&yp.matrix * &vv - &vv).norm() < 1e-12);
    }

    #[test]
    fn phase_estimation() {
        let s = SchurTransform::new(2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let psi = crate::channels::sampling::haar_vector(2, &mut rng);
        let prod = DensityOperator::pure(&psi.kronecker(&psi)).unwrap();
        for seed in 0..5 {
            let est = generalized_phase_estimation(&s, &prod, seed).unwrap();
            assert_eq!(est.shape, p(&[2]));
            assert!(max_abs_diff(est.post_state.matrix(), prod.matrix()) < 1e-10);
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = crate::linalg::CVec::from_vec(vec![cr(0.0), cr(h), cr(-h), cr(0.0)]);
        let est = generalized_phase_estimation(&s, &DensityOperator::pure(&singlet).unwrap(), 1).unwrap();
        assert_eq!(est.shape, p(&[1, 1]));
        assert!((est.probability - 1.0).abs() < 1e-12);

        for _ in 0..5 {
            let rho = random_rank_r_state(2, 2, &mut rng).unwrap();
            let two = rho.tensor_power(2);
            let dist = phase_estimation_distribution(&s, &two).unwrap();
            let total: f64 = dist.iter().map(|(_, q)| q).sum();
            assert!((total - 1.0).abs() < 1e-12);
            // Π_[1,1] = (1 − SWAP)/2 and Tr(SWAP ρ⊗ρ) = Tr ρ².
            assert!((dist[1].1 - (1.0 - rho.purity()) / 2.0).abs() < 1e-12);
        }
        // Outcomes follow the seeded distribution.
        let rho = random_rank_r_state(2, 2, &mut rng).unwrap().tensor_power(2);
        let a = generalized_phase_estimation(&s, &rho, 99).unwrap();
        let b = generalized_phase_estimation(&s, &rho, 99).unwrap();
        assert_eq!(a.shape, b.shape);
        let _ = Permutation::identity(2);
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            SchurTransform::with_budget(4, 3, 100),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(SchurTransform::new(1, 5).unwrap().blocks().len() == 1);
    }
}
