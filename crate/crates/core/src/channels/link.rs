//! Operators on named tensor factors and the link product.

use crate::error::{Error, Result};
use crate::linalg::{permute_subsystems, CMat};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct System {
    pub name: String,
    pub dim: usize,
}

impl System {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Self {
            name: name.into(),
            dim,
        }
    }
}

/// A matrix on `⊗_k systems[k]`, factors in the listed order.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemOperator {
    pub systems: Vec<System>,
    pub matrix: CMat,
}

impl SystemOperator {
    pub fn new(systems: Vec<System>, matrix: CMat) -> Result<Self> {
        let total: usize = systems.iter().map(|s| s.dim).product();
        if matrix.nrows() != total || matrix.ncols() != total {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{}, systems multiply to {total}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        for (k, s) in systems.iter().enumerate() {
            if systems[..k].iter().any(|t| t.name == s.name) {
                return Err(Error::DimensionMismatch(format!("system `{}` listed twice", s.name)));
            }
        }
        Ok(Self { systems, matrix })
    }

    /// The scalar `1` on no systems.
    pub fn scalar(value: f64) -> Self {
        Self {
            systems: Vec::new(),
            matrix: CMat::from_element(1, 1, crate::linalg::cr(value)),
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        self.systems.iter().map(|s| s.dim).collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.systems.iter().position(|s| s.name == name)
    }

    fn positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| {
                self.position(n)
                    .ok_or_else(|| Error::DimensionMismatch(format!("no system named `{n}`")))
            })
            .collect()
    }

    /// Reorder factors to the given names (all systems must be listed).
    pub fn reorder(&self, names: &[&str]) -> Result<SystemOperator> {
        if names.len() != self.systems.len() {
            return Err(Error::DimensionMismatch(format!(
                "reorder lists {} of {} systems",
                names.len(),
                self.systems.len()
            )));
        }
        let perm = self.positions(names)?;
        Ok(SystemOperator {
            systems: perm.iter().map(|&p| self.systems[p].clone()).collect(),
            matrix: permute_subsystems(&self.matrix, &self.dims(), &perm),
        })
    }

    pub fn partial_trace(&self, names: &[&str]) -> Result<SystemOperator> {
        let traced = self.positions(names)?;
        Ok(SystemOperator {
            systems: self
                .systems
                .iter()
                .enumerate()
                .filter(|(k, _)| !traced.contains(k))
                .map(|(_, s)| s.clone())
                .collect(),
            matrix: crate::linalg::partial_trace(&self.matrix, &self.dims(), &traced),
        })
    }

    /// `self ⊗ other` on the union of systems (names must be disjoint).
    pub fn tensor(&self, other: &SystemOperator) -> Result<SystemOperator> {
        let mut systems = self.systems.clone();
        systems.extend(other.systems.iter().cloned());
        SystemOperator::new(systems, self.matrix.kronecker(&other.matrix))
    }
}

/// Link product `A ∗ B = Tr_Y[(A^{T_Y} ⊗ 1)(1 ⊗ B)]`, contracting every
/// system name shared by `A` and `B`. The result carries `A`'s remaining
/// systems followed by `B`'s.
pub fn link_product(a: &SystemOperator, b: &SystemOperator) -> Result<SystemOperator> {
    let shared: Vec<&System> = a
        .systems
        .iter()
        .filter(|s| b.systems.iter().any(|t| t.name == s.name))
        .collect();
    for s in &shared {
        let other = &b.systems[b.position(&s.name).expect("shared")];
        if other.dim != s.dim {
            return Err(Error::DimensionMismatch(format!(
                "system `{}` has dimension {} and {}",
                s.name, s.dim, other.dim
            )));
        }
    }
    let shared_names: Vec<&str> = shared.iter().map(|s| s.name.as_str()).collect();
    let a_only: Vec<&str> = a
        .systems
        .iter()
        .map(|s| s.name.as_str())
        .filter(|n| !shared_names.contains(n))
        .collect();
    let b_only: Vec<&str> = b
        .systems
        .iter()
        .map(|s| s.name.as_str())
        .filter(|n| !shared_names.contains(n))
        .collect();

    let a_order: Vec<&str> = a_only.iter().chain(&shared_names).copied().collect();
    let b_order: Vec<&str> = shared_names.iter().chain(&b_only).copied().collect();
    let a_mat = a.reorder(&a_order)?.matrix;
    let b_mat = b.reorder(&b_order)?.matrix;

    let dx: usize = a_only.iter().map(|n| a.systems[a.position(n).unwrap()].dim).product();
    let dy: usize = shared.iter().map(|s| s.dim).product();
    let dz: usize = b_only.iter().map(|n| b.systems[b.position(n).unwrap()].dim).product();

    // Ã[(x,x'),(y',y)] = A[(x,y'),(x',y)],  B̃[(y',y),(z,z')] = B[(y',z),(y,z')].
    let a_t = CMat::from_fn(dx * dx, dy * dy, |row, col| {
        let (x, xp) = (row / dx, row % dx);
        let (yp, y) = (col / dy, col % dy);
        a_mat[(x * dy + yp, xp * dy + y)]
    });
    let b_t = CMat::from_fn(dy * dy, dz * dz, |row, col| {
        let (yp, y) = (row / dy, row % dy);
        let (z, zp) = (col / dz, col % dz);
        b_mat[(yp * dz + z, y * dz + zp)]
    });
    let r_t = a_t * b_t;
    let matrix = CMat::from_fn(dx * dz, dx * dz, |row, col| {
        let (x, z) = (row / dz, row % dz);
        let (xp, zp) = (col / dz, col % dz);
        r_t[(x * dx + xp, z * dz + zp)]
    });
    let systems = a_only
        .iter()
        .map(|n| a.systems[a.position(n).unwrap()].clone())
        .chain(b_only.iter().map(|n| b.systems[b.position(n).unwrap()].clone()))
        .collect();
    SystemOperator::new(systems, matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{random_kraus_rank_r_channel, QuantumChannel};
    use crate::linalg::{max_abs_diff, max_entangled_projector, partial_transpose};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn op(names: &[(&str, usize)], m: CMat) -> SystemOperator {
        SystemOperator::new(names.iter().map(|(n, d)| System::new(*n, *d)).collect(), m).unwrap()
    }

    /// Direct evaluation of the defining formula with dense embeddings.
    fn link_by_definition(a: &CMat, b: &CMat, dx: usize, dy: usize, dz: usize) -> CMat {
        let a_t = partial_transpose(a, &[dx, dy], &[1]);
        let lhs = a_t.kronecker(&CMat::identity(dz, dz));
        let rhs = CMat::identity(dx, dx).kronecker(b);
        crate::linalg::partial_trace(&(lhs * rhs), &[dx, dy, dz], &[1])
    }

    #[test]
    fn identity_link_identity() {
        let a = op(&[("a", 2), ("b", 2)], max_entangled_projector(2));
        let b = op(&[("b", 2), ("c", 2)], max_entangled_projector(2));
        let r = link_product(&a, &b).unwrap();
        assert_eq!(r.systems, vec![System::new("a", 2), System::new("c", 2)]);
        assert!(max_abs_diff(&r.matrix, &max_entangled_projector(2)) < 1e-15);
    }

    #[test]
    fn disjoint_systems_give_tensor_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_kraus_rank_r_channel(2, 2, 2, &mut rng).unwrap();
        let y = random_kraus_rank_r_channel(2, 3, 2, &mut rng).unwrap();
        let a = op(&[("a", 2), ("b", 2)], x.choi().clone());
        let b = op(&[("c", 2), ("d", 3)], y.choi().clone());
        let r = link_product(&a, &b).unwrap();
        assert!(max_abs_diff(&r.matrix, &x.choi().kronecker(y.choi())) < 1e-15);
    }

    #[test]
    fn matches_defining_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_kraus_rank_r_channel(2, 6, 3, &mut rng).unwrap();
        let y = random_kraus_rank_r_channel(3, 2, 2, &mut rng).unwrap();
        // x: a(2) → (b(3), c(2)); link over b only, y: b(3) → d(2).
        let a = op(&[("a", 2), ("b", 3), ("c", 2)], x.choi().clone());
        let a_xy = a.reorder(&["a", "c", "b"]).unwrap();
        let b = op(&[("b", 3), ("d", 2)], y.choi().clone());
        let r = link_product(&a, &b).unwrap();
        let expected = link_by_definition(&a_xy.matrix, y.choi(), 4, 3, 2);
        assert!(max_abs_diff(&r.matrix, &expected) < 1e-13);
    }

    #[test]
    fn associativity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_kraus_rank_r_channel(2, 2, 2, &mut rng).unwrap();
        let y = random_kraus_rank_r_channel(2, 2, 3, &mut rng).unwrap();
        let z = random_kraus_rank_r_channel(2, 2, 2, &mut rng).unwrap();
        let a = op(&[("a", 2), ("b", 2)], x.choi().clone());
        let b = op(&[("b", 2), ("c", 2)], y.choi().clone());
        let c = op(&[("c", 2), ("d", 2)], z.choi().clone());
        let left = link_product(&link_product(&a, &b).unwrap(), &c).unwrap();
        let right = link_product(&a, &link_product(&b, &c).unwrap()).unwrap();
        assert!(max_abs_diff(&left.matrix, &right.matrix) < 1e-12);
        let composed = z.compose(&y.compose(&x).unwrap()).unwrap();
        assert!(max_abs_diff(&left.matrix, composed.choi()) < 1e-12);
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let a = op(&[("a", 2), ("b", 2)], max_entangled_projector(2));
        let b = op(&[("b", 3), ("c", 3)], max_entangled_projector(3));
        assert!(link_product(&a, &b).is_err());
        assert!(SystemOperator::new(vec![System::new("a", 2), System::new("a", 2)], CMat::zeros(4, 4)).is_err());
        let _ = QuantumChannel::identity(2);
    }
}
