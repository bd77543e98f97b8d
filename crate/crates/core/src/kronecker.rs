//! Kronecker coefficients, the Kronecker (Clebsch–Gordan) transform of
//! `S_n`, the controlled Kronecker gate, and the coefficient relation that
//! ties `CG_{λν}` to `CG_{μν}`.
//!
//! `CG_{μν}` acts on `S_μ ⊗ S_ν` (column `i_μ·m_ν + i_ν`) and its rows are
//! grouped by `λ` in reverse-lex order; inside a block, row
//! `offset_λ + i·g_{μνλ} + a` carries `|λ, i, a⟩`, so
//! `CG (g_μ(σ) ⊗ g_ν(σ)) CGᵀ = ⊕_λ g_λ(σ) ⊗ 1_{g_{μνλ}}`.

use nalgebra::DVector;

use crate::combinatorics::{character, factorial, partitions, Partition};
use crate::error::{Error, Result};
use crate::linalg::{fix_sign_real, orthogonalize_real, to_complex, CMat, CVec, RMat};
use crate::symrep::{Irrep, SymmetricGroup};

fn same_n(parts: &[&Partition]) -> Result<usize> {
    let n = parts[0].n();
    if parts.iter().any(|p| p.n() != n) {
        let shown: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
        return Err(Error::DimensionMismatch(format!(
            "partitions {} are not all of the same n",
            shown.join(", ")
        )));
    }
    Ok(n)
}

/// `g_{μνλ} = (1/n!) Σ_c |c| χ_μ(c) χ_ν(c) χ_λ(c)`, in exact integer arithmetic.
pub fn kronecker_coefficient(mu: &Partition, nu: &Partition, lambda: &Partition) -> Result<usize> {
    let n = same_n(&[mu, nu, lambda])?;
    let mut sum: i128 = 0;
    for class in partitions(n)? {
        let chis = character(mu, &class)? as i128 * character(nu, &class)? as i128 * character(lambda, &class)? as i128;
        sum += class.class_size() as i128 * chis;
    }
    let order = factorial(n) as i128;
    if sum % order != 0 || sum < 0 {
        return Err(Error::Numerical(format!(
            "character sum {sum} for ({mu}, {nu}, {lambda}) is not a nonnegative multiple of {order}"
        )));
    }
    Ok((sum / order) as usize)
}

/// One row of the Kronecker table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KroneckerEntry {
    pub mu: Partition,
    pub nu: Partition,
    pub lambda: Partition,
    pub g: usize,
}

/// Every `g_{μνλ}` for partitions of `n`, in reverse-lex order on `(μ, ν, λ)`.
pub fn kronecker_table(n: usize) -> Result<Vec<KroneckerEntry>> {
    let ps = partitions(n)?;
    let mut out = Vec::with_capacity(ps.len().pow(3));
    for mu in &ps {
        for nu in &ps {
            for lambda in &ps {
                out.push(KroneckerEntry {
                    mu: mu.clone(),
                    nu: nu.clone(),
                    lambda: lambda.clone(),
                    g: kronecker_coefficient(mu, nu, lambda)?,
                });
            }
        }
    }
    Ok(out)
}

/// `g_μ(σ) ⊗ g_ν(σ)` for every group element.
fn product_rep(mu: &Irrep, nu: &Irrep) -> Vec<RMat> {
    mu.matrices.iter().zip(&nu.matrices).map(|(a, b)| a.kronecker(b)).collect()
}

/// `(m_λ/n!) Σ_σ g_λ(σ)_{jk} R(σ)`.
fn matrix_unit(lambda: &Irrep, rep: &[RMat], j: usize, k: usize) -> RMat {
    let size = rep[0].nrows();
    let mut out = RMat::zeros(size, size);
    for (g, r) in lambda.matrices.iter().zip(rep) {
        let coef = g[(j, k)];
        if coef != 0.0 {
            out += r * coef;
        }
    }
    out * (lambda.dim() as f64 / rep.len() as f64)
}

/// Multiplicity of `λ` in `g_μ ⊗ g_ν`, read off as the numerical rank of a
/// matrix-unit projector. Uses only the irrep matrices, not characters.
pub fn multiplicity_by_projection(mu: &Partition, nu: &Partition, lambda: &Partition) -> Result<usize> {
    let n = same_n(&[mu, nu, lambda])?;
    let group = SymmetricGroup::cached(n)?;
    let rep = product_rep(group.irrep(mu)?, group.irrep(nu)?);
    let p = matrix_unit(group.irrep(lambda)?, &rep, 0, 0);
    let sv = p.singular_values();
    Ok(sv.iter().filter(|&&s| s > 1e-8).count())
}

#[derive(Clone, Debug, PartialEq)]
pub struct KroneckerBlock {
    pub shape: Partition,
    /// Index of `λ` among all partitions of `n`.
    pub irrep_index: usize,
    pub sym_dim: usize,
    pub multiplicity: usize,
    pub offset: usize,
}

impl KroneckerBlock {
    pub fn size(&self) -> usize {
        self.sym_dim * self.multiplicity
    }

    pub fn row(&self, i: usize, a: usize) -> usize {
        self.offset + i * self.multiplicity + a
    }
}

/// Row label `(λ, i, a)`; `block` indexes [`KroneckerTransform::blocks`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KroneckerLabel {
    pub block: usize,
    pub i: usize,
    pub a: usize,
}

#[derive(Clone, Debug)]
pub struct KroneckerTransform {
    pub mu: Partition,
    pub nu: Partition,
    matrix: RMat,
    blocks: Vec<KroneckerBlock>,
    labels: Vec<KroneckerLabel>,
}

impl KroneckerTransform {
    /// Build by the intertwiner method: multiplicity vectors span the image
    /// of `P^λ_{00}`, found by Gram–Schmidt over the standard basis with a
    /// first-nonzero-positive sign convention, and are transported to slot
    /// `i` by `P^λ_{i0}`.
    pub fn new(mu: &Partition, nu: &Partition) -> Result<Self> {
        let n = same_n(&[mu, nu])?;
        let group = SymmetricGroup::cached(n)?;
        let rep = product_rep(group.irrep(mu)?, group.irrep(nu)?);
        let size = rep[0].nrows();
        let mut matrix = RMat::zeros(size, size);
        let mut blocks = Vec::new();
        let mut labels = Vec::with_capacity(size);
        let mut offset = 0;
        for (irrep_index, ir) in group.irreps().iter().enumerate() {
            let g = kronecker_coefficient(mu, nu, &ir.shape)?;
            if g == 0 {
                continue;
            }
            let p00 = matrix_unit(ir, &rep, 0, 0);
            let mut basis: Vec<DVector<f64>> = Vec::with_capacity(g);
            for x in 0..size {
                if basis.len() == g {
                    break;
                }
                let mut w: DVector<f64> = p00.column(x).into_owned();
                let norm = orthogonalize_real(&mut w, &basis);
                if norm > 1e-8 {
                    w /= norm;
                    fix_sign_real(&mut w, 1e-12);
                    basis.push(w);
                }
            }
            if basis.len() != g {
                return Err(Error::Numerical(format!(
                    "found {} of {g} multiplicity vectors for {} in {mu} ⊗ {nu}",
                    basis.len(),
                    ir.shape
                )));
            }
            let block = KroneckerBlock {
                shape: ir.shape.clone(),
                irrep_index,
                sym_dim: ir.dim(),
                multiplicity: g,
                offset,
            };
            for i in 0..ir.dim() {
                let pi0 = if i == 0 { None } else { Some(matrix_unit(ir, &rep, i, 0)) };
                for (a, v) in basis.iter().enumerate() {
                    let vi = match &pi0 {
                        None => v.clone(),
                        Some(p) => p * v,
                    };
                    matrix.set_row(block.row(i, a), &vi.transpose());
                }
            }
            for i in 0..ir.dim() {
                for a in 0..g {
                    labels.push(KroneckerLabel {
                        block: blocks.len(),
                        i,
                        a,
                    });
                }
            }
            offset += block.size();
            blocks.push(block);
        }
        if offset != size {
            return Err(Error::Numerical(format!(
                "blocks cover {offset} of {size} dimensions"
            )));
        }
        Ok(Self {
            mu: mu.clone(),
            nu: nu.clone(),
            matrix,
            blocks,
            labels,
        })
    }

    /// `CG_{λν}` whose `μ` blocks are defined from `CG_{μν}` through
    /// `⟨μ, i_μ, a|CG_{λν}|i_λ, i_ν⟩ = √(m_μ/m_λ) ⟨λ, i_λ, a|CG_{μν}|i_μ, i_ν⟩`.
    pub fn from_relation(lambda: &Partition, nu: &Partition) -> Result<Self> {
        let n = same_n(&[lambda, nu])?;
        let group = SymmetricGroup::cached(n)?;
        let m_lambda = group.irrep(lambda)?.dim();
        let m_nu = group.irrep(nu)?.dim();
        let size = m_lambda * m_nu;
        let mut matrix = RMat::zeros(size, size);
        let mut blocks = Vec::new();
        let mut labels = Vec::with_capacity(size);
        let mut offset = 0;
        for (irrep_index, ir) in group.irreps().iter().enumerate() {
            let g = kronecker_coefficient(lambda, nu, &ir.shape)?;
            if g == 0 {
                continue;
            }
            let m_mu = ir.dim();
            let cg_mu_nu = KroneckerTransform::new(&ir.shape, nu)?;
            let src = cg_mu_nu
                .block(lambda)
                .ok_or_else(|| Error::Numerical(format!("{lambda} missing from {} ⊗ {nu}", ir.shape)))?
                .clone();
            let scale = (m_mu as f64 / m_lambda as f64).sqrt();
            let block = KroneckerBlock {
                shape: ir.shape.clone(),
                irrep_index,
                sym_dim: m_mu,
                multiplicity: g,
                offset,
            };
            for i_mu in 0..m_mu {
                for a in 0..g {
                    let row = block.row(i_mu, a);
                    for i_lambda in 0..m_lambda {
                        for i_nu in 0..m_nu {
                            matrix[(row, i_lambda * m_nu + i_nu)] =
                                scale * cg_mu_nu.matrix[(src.row(i_lambda, a), i_mu * m_nu + i_nu)];
                        }
                    }
                    labels.push(KroneckerLabel {
                        block: blocks.len(),
                        i: i_mu,
                        a,
                    });
                }
            }
            offset += block.size();
            blocks.push(block);
        }
        Ok(Self {
            mu: lambda.clone(),
            nu: nu.clone(),
            matrix,
            blocks,
            labels,
        })
    }

    pub fn matrix(&self) -> &RMat {
        &self.matrix
    }

    pub fn unitary(&self) -> CMat {
        to_complex(&self.matrix)
    }

    pub fn blocks(&self) -> &[KroneckerBlock] {
        &self.blocks
    }

    pub fn labels(&self) -> &[KroneckerLabel] {
        &self.labels
    }

    pub fn block(&self, shape: &Partition) -> Option<&KroneckerBlock> {
        self.blocks.iter().find(|b| &b.shape == shape)
    }

    /// `⟨λ, i, a| CG |i_μ, i_ν⟩`.
    pub fn coefficient(&self, block: &KroneckerBlock, i: usize, a: usize, i_mu: usize, i_nu: usize, m_nu: usize) -> f64 {
        self.matrix[(block.row(i, a), i_mu * m_nu + i_nu)]
    }

    /// `max_σ ‖CG (g_μ ⊗ g_ν)(σ) CGᵀ − ⊕_λ g_λ(σ) ⊗ 1‖_max` over all of `S_n`.
    pub fn covariance_residual(&self) -> Result<f64> {
        let group = SymmetricGroup::cached(self.mu.n())?;
        let rep = product_rep(group.irrep(&self.mu)?, group.irrep(&self.nu)?);
        let mut worst: f64 = 0.0;
        for (s, r) in rep.iter().enumerate() {
            let lhs = &self.matrix * r * self.matrix.transpose();
            let mut rhs = RMat::zeros(lhs.nrows(), lhs.ncols());
            for b in &self.blocks {
                let g = &group.irreps()[b.irrep_index].matrices[s];
                let blk = g.kronecker(&RMat::identity(b.multiplicity, b.multiplicity));
                rhs.view_mut((b.offset, b.offset), (b.size(), b.size())).copy_from(&blk);
            }
            worst = worst.max((lhs - rhs).abs().max());
        }
        Ok(worst)
    }

    /// `max |CG CGᵀ − 1|`.
    pub fn orthogonality_residual(&self) -> f64 {
        let k = self.matrix.nrows();
        let a = (&self.matrix * self.matrix.transpose() - RMat::identity(k, k)).abs().max();
        let b = (self.matrix.transpose() * &self.matrix - RMat::identity(k, k)).abs().max();
        a.max(b)
    }
}

pub fn kronecker_transform(mu: &Partition, nu: &Partition) -> Result<KroneckerTransform> {
    KroneckerTransform::new(mu, nu)
}

/// Residual of the coefficient relation for the triple `(λ, μ, ν)`: the
/// relation-defined `μ` block of `CG_{λν}` must be a covariant, orthonormal
/// family and must agree with the independently built `CG_{λν}` up to an
/// orthogonal change of multiplicity basis (fitted from the `i_μ = 0` rows).
pub fn cg_coefficient_relation_check(lambda: &Partition, mu: &Partition, nu: &Partition) -> Result<f64> {
    same_n(&[lambda, mu, nu])?;
    let g = kronecker_coefficient(lambda, nu, mu)?;
    if g == 0 {
        return Err(Error::NotApplicable(format!("g({lambda}, {nu}, {mu}) = 0")));
    }
    let related = KroneckerTransform::from_relation(lambda, nu)?;
    let own = KroneckerTransform::new(lambda, nu)?;
    let rb = related.block(mu).expect("μ block present").clone();
    let ob = own.block(mu).expect("μ block present").clone();
    let mut residual = related.covariance_residual()?.max(related.orthogonality_residual());

    let row = |t: &KroneckerTransform, b: &KroneckerBlock, i: usize, a: usize| -> DVector<f64> {
        t.matrix.row(b.row(i, a)).transpose()
    };
    let mut rotation = RMat::zeros(g, g);
    for a in 0..g {
        for b in 0..g {
            rotation[(a, b)] = row(&related, &rb, 0, a).dot(&row(&own, &ob, 0, b));
        }
    }
    residual = residual.max((&rotation * rotation.transpose() - RMat::identity(g, g)).abs().max());
    for i in 0..rb.sym_dim {
        for a in 0..g {
            let mut fitted = DVector::zeros(related.matrix.ncols());
            for b in 0..g {
                fitted += row(&own, &ob, i, b) * rotation[(a, b)];
            }
            residual = residual.max((row(&related, &rb, i, a) - fitted).abs().max());
        }
    }
    Ok(residual)
}

/// `Σ_{μ,ν} |μ⟩⟨μ| ⊗ |ν⟩⟨ν| ⊗ CG_{μν}` on label ⊗ label ⊗ padded payload
/// registers. The payload is `C^{m_max} ⊗ C^{m_max}`; for labels `(μ, ν)`
/// the valid slots are `i_μ·m_max + i_ν` with `i_μ < m_μ`, `i_ν < m_ν`, and
/// the CG output index `k` is written to the `k`-th valid slot. Invalid
/// slots are left untouched.
#[derive(Clone, Debug)]
pub struct ControlledKroneckerGate {
    pub n: usize,
    pub shapes: Vec<Partition>,
    pub m_max: usize,
    unitary: CMat,
}

impl ControlledKroneckerGate {
    pub fn new(n: usize) -> Result<Self> {
        let group = SymmetricGroup::cached(n)?;
        let shapes: Vec<Partition> = group.irreps().iter().map(|ir| ir.shape.clone()).collect();
        let dims: Vec<usize> = group.irreps().iter().map(|ir| ir.dim()).collect();
        let m_max = *dims.iter().max().expect("n ≥ 1");
        let p = shapes.len();
        let payload = m_max * m_max;
        let size = p * p * payload;
        crate::schur::check_budget("controlled Kronecker gate", size, 1 << 12)?;
        let mut unitary = CMat::identity(size, size);
        for (x, mu) in shapes.iter().enumerate() {
            for (y, nu) in shapes.iter().enumerate() {
                let cg = KroneckerTransform::new(mu, nu)?;
                let base = (x * p + y) * payload;
                let slots = valid_slots(dims[x], dims[y], m_max);
                for (kc, &sc) in slots.iter().enumerate() {
                    for (kr, &sr) in slots.iter().enumerate() {
                        unitary[(base + sr, base + sc)] = crate::linalg::cr(cg.matrix[(kr, kc)]);
                    }
                }
            }
        }
        Ok(Self {
            n,
            shapes,
            m_max,
            unitary,
        })
    }

    pub fn unitary(&self) -> &CMat {
        &self.unitary
    }

    pub fn label_index(&self, shape: &Partition) -> Option<usize> {
        self.shapes.iter().position(|s| s == shape)
    }

    /// Flat index of `|μ⟩|ν⟩|i_μ, i_ν⟩`.
    pub fn index(&self, mu: usize, nu: usize, i_mu: usize, i_nu: usize) -> usize {
        let p = self.shapes.len();
        (mu * p + nu) * self.m_max * self.m_max + i_mu * self.m_max + i_nu
    }

    /// Weight of `state` on payload slots that are invalid for their labels.
    pub fn leakage(&self, state: &CVec) -> f64 {
        let p = self.shapes.len();
        let payload = self.m_max * self.m_max;
        let dims: Vec<usize> = self.shapes.iter().map(crate::combinatorics::sym_dim).collect();
        let mut weight = 0.0;
        for x in 0..p {
            for y in 0..p {
                for s in 0..payload {
                    let (i_mu, i_nu) = (s / self.m_max, s % self.m_max);
                    if i_mu >= dims[x] || i_nu >= dims[y] {
                        weight += state[(x * p + y) * payload + s].norm_sqr();
                    }
                }
            }
        }
        weight
    }

    /// Apply the gate, refusing inputs with weight above `tol` on invalid slots.
    pub fn apply_checked(&self, state: &CVec, tol: f64) -> Result<CVec> {
        if state.len() != self.unitary.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "state of length {} for a gate of size {}",
                state.len(),
                self.unitary.ncols()
            )));
        }
        let leak = self.leakage(state);
        if leak > tol {
            return Err(Error::Leakage(leak));
        }
        Ok(&self.unitary * state)
    }
}

fn valid_slots(m_mu: usize, m_nu: usize, m_max: usize) -> Vec<usize> {
    (0..m_mu).flat_map(|i| (0..m_nu).map(move |j| i * m_max + j)).collect()
}

pub fn controlled_kronecker_gate(n: usize) -> Result<ControlledKroneckerGate> {
    ControlledKroneckerGate::new(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::sym_dim;
    use crate::linalg::{max_abs_diff, unitarity_residual};

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn small_kronecker_coefficients() {
        let l = p(&[2, 1]);
        for target in partitions(3).unwrap() {
            assert_eq!(kronecker_coefficient(&l, &l, &target).unwrap(), 1);
            assert_eq!(multiplicity_by_projection(&l, &l, &target).unwrap(), 1);
        }
        for n in 1..=5 {
            let ps = partitions(n).unwrap();
            for nu in &ps {
                for lambda in &ps {
                    let triv = kronecker_coefficient(&Partition::row(n), nu, lambda).unwrap();
                    assert_eq!(triv, usize::from(nu == lambda));
                }
                let sign = kronecker_coefficient(&Partition::column(n), &Partition::column(n), nu).unwrap();
                assert_eq!(sign, usize::from(*nu == Partition::row(n)));
            }
        }
        assert!(kronecker_coefficient(&l, &p(&[2]), &l).is_err());
    }

    #[test]
    fn coefficients_are_symmetric_and_dimension_consistent() {
        for n in 1..=5 {
            let ps = partitions(n).unwrap();
            for a in &ps {
                for b in &ps {
                    let mut total = 0;
                    for c in &ps {
                        let g = kronecker_coefficient(a, b, c).unwrap();
                        for (x, y, z) in [(a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
                            assert_eq!(kronecker_coefficient(x, y, z).unwrap(), g);
                        }
                        total += sym_dim(c) * g;
                    }
                    assert_eq!(total, sym_dim(a) * sym_dim(b));
                }
            }
        }
    }

    #[test]
    fn transforms_are_orthogonal_and_covariant() {
        for n in 2..=4 {
            let ps = partitions(n).unwrap();
            for mu in &ps {
                for nu in &ps {
                    let cg = KroneckerTransform::new(mu, nu).unwrap();
                    assert!(cg.orthogonality_residual() < 1e-10, "{mu} {nu}");
                    assert!(cg.covariance_residual().unwrap() < 1e-10, "{mu} {nu}");
                }
            }
        }
    }

    #[test]
    fn small_transforms() {
        let cg = KroneckerTransform::new(&p(&[2]), &p(&[1, 1])).unwrap();
        assert_eq!(cg.blocks().len(), 1);
        assert_eq!(cg.blocks()[0].shape, p(&[1, 1]));
        assert_eq!(cg.matrix(), &RMat::identity(1, 1));
        let l = p(&[2, 1]);
        let cg = KroneckerTransform::new(&l, &l).unwrap();
        let shapes: Vec<Partition> = cg.blocks().iter().map(|b| b.shape.clone()).collect();
        assert_eq!(shapes, partitions(3).unwrap());
        // Tensoring with the trivial irrep relabels only.
        let cg = KroneckerTransform::new(&l, &p(&[3])).unwrap();
        assert_eq!(cg.blocks().len(), 1);
        assert!((cg.matrix() - RMat::identity(2, 2)).abs().max() < 1e-12);
    }

    #[test]
    fn relation_holds_for_all_applicable_triples() {
        for n in 2..=4 {
            let ps = partitions(n).unwrap();
            for lambda in &ps {
                for mu in &ps {
                    for nu in &ps {
                        match cg_coefficient_relation_check(lambda, mu, nu) {
                            Ok(res) => assert!(res < 1e-9, "{lambda} {mu} {nu}: {res}"),
                            Err(Error::NotApplicable(_)) => {
                                assert_eq!(kronecker_coefficient(lambda, nu, mu).unwrap(), 0)
                            }
                            Err(e) => panic!("{e}"),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn controlled_gate() {
        let gate = controlled_kronecker_gate(2).unwrap();
        assert!(unitarity_residual(gate.unitary()) < 1e-12);
        let idx = gate.index(0, 0, 0, 0);
        assert_eq!(gate.unitary()[(idx, idx)], crate::linalg::cr(1.0));

        let gate3 = controlled_kronecker_gate(3).unwrap();
        assert!(unitarity_residual(gate3.unitary()) < 1e-10);
        let l = p(&[2, 1]);
        let x = gate3.label_index(&l).unwrap();
        let cg = KroneckerTransform::new(&l, &l).unwrap();
        let slots = [(0, 0), (0, 1), (1, 0), (1, 1)];
        let embedded = CMat::from_fn(4, 4, |r, c| {
            let (a, b) = slots[r];
            let (e, f) = slots[c];
            gate3.unitary()[(gate3.index(x, x, a, b), gate3.index(x, x, e, f))]
        });
        assert!(max_abs_diff(&embedded, &cg.unitary()) < 1e-15);

        let mut leaky = CVec::zeros(gate3.unitary().nrows());
        leaky[gate3.index(0, 0, 1, 0)] = crate::linalg::cr(1.0);
        assert!(matches!(gate3.apply_checked(&leaky, 1e-12), Err(Error::Leakage(_))));
        let mut fine = CVec::zeros(gate3.unitary().nrows());
        fine[gate3.index(x, x, 1, 1)] = crate::linalg::cr(1.0);
        assert!(gate3.apply_checked(&fine, 1e-12).is_ok());
    }
}
