//! Quantum combs: sequences of channels connected by memory systems.
//!
//! Tooth `i` is a channel `I_i ⊗ A_{i-1} → O_i ⊗ A_i` (slot first, memory
//! second) with `A_0` and `A_k` trivial. The comb's Choi matrix lives on
//! `I_1 ⊗ O_1 ⊗ ⋯ ⊗ I_k ⊗ O_k`.

use super::link::{link_product, System, SystemOperator};
use super::{choi_purification_to_isometry, QuantumChannel};
use crate::error::{Error, Result};
use crate::linalg::{cr, fix_phase, hermitian_eigen, kron, max_abs_diff, subsystem_index_map, CMat, CVec};

#[derive(Clone, Debug, PartialEq)]
pub struct CombTooth {
    pub channel: QuantumChannel,
    pub input: usize,
    pub memory_in: usize,
    pub output: usize,
    pub memory_out: usize,
}

impl CombTooth {
    pub fn new(channel: QuantumChannel, input: usize, memory_in: usize, output: usize, memory_out: usize) -> Result<Self> {
        if channel.d_in() != input * memory_in || channel.d_out() != output * memory_out {
            return Err(Error::DimensionMismatch(format!(
                "tooth channel {}→{} does not match ({input}·{memory_in})→({output}·{memory_out})",
                channel.d_in(),
                channel.d_out()
            )));
        }
        Ok(Self {
            channel,
            input,
            memory_in,
            output,
            memory_out,
        })
    }
}

fn slot_names(k: usize) -> Vec<String> {
    (1..=k).flat_map(|i| [format!("I{i}"), format!("O{i}")]).collect()
}

/// A comb with its Choi matrix on the interleaved slot systems.
#[derive(Clone, Debug, PartialEq)]
pub struct Comb {
    slots: Vec<(usize, usize)>,
    choi: CMat,
    teeth: Option<Vec<CombTooth>>,
}

impl Comb {
    /// Wrap a Choi matrix after checking positivity and causality.
    pub fn from_choi(slots: Vec<(usize, usize)>, choi: CMat, tol: f64) -> Result<Self> {
        let comb = Self::from_choi_unchecked(slots, choi)?;
        comb.validate(tol)?;
        Ok(comb)
    }

    /// Wrap a Choi matrix, checking only its size.
    pub fn from_choi_unchecked(slots: Vec<(usize, usize)>, choi: CMat) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::EmptyInput("comb with no teeth"));
        }
        let total: usize = slots.iter().map(|(a, b)| a * b).product();
        if choi.nrows() != total || choi.ncols() != total {
            return Err(Error::DimensionMismatch(format!(
                "comb Choi is {}x{}, slots multiply to {total}",
                choi.nrows(),
                choi.ncols()
            )));
        }
        Ok(Self {
            slots,
            choi,
            teeth: None,
        })
    }

    pub fn teeth_count(&self) -> usize {
        self.slots.len()
    }

    /// `(dim I_i, dim O_i)` per tooth.
    pub fn slots(&self) -> &[(usize, usize)] {
        &self.slots
    }

    pub fn dims(&self) -> Vec<usize> {
        self.slots.iter().flat_map(|&(a, b)| [a, b]).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn choi(&self) -> &CMat {
        &self.choi
    }

    pub fn teeth(&self) -> Option<&[CombTooth]> {
        self.teeth.as_deref()
    }

    /// The Choi matrix with systems named `I1, O1, …, Ik, Ok`.
    pub fn as_system_operator(&self) -> SystemOperator {
        let systems = slot_names(self.slots.len())
            .into_iter()
            .zip(self.dims())
            .map(|(n, d)| System::new(n, d))
            .collect();
        SystemOperator {
            systems,
            matrix: self.choi.clone(),
        }
    }

    /// Positivity plus recursive causality: `Tr_{O_j} J^{(j)} = J^{(j-1)} ⊗ 1_{I_j}`
    /// down to `J^{(0)} = 1`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let violation = super::LinearMap {
            d_in: 1,
            d_out: self.total_dim(),
            choi: self.choi.clone(),
        }
        .positivity_violation();
        if violation > tol {
            return Err(Error::InvalidChannel(format!(
                "comb Choi matrix is not positive (violation {violation:.3e})"
            )));
        }
        let mut current = self.choi.clone();
        for j in (0..self.slots.len()).rev() {
            let (d_i, d_o) = self.slots[j];
            let left: usize = self.slots[..j].iter().map(|(a, b)| a * b).product();
            let traced = crate::linalg::trace_trailing(&current, left * d_i, d_o);
            let prev = crate::linalg::trace_trailing(&traced, left, d_i) * cr(1.0 / d_i as f64);
            let rebuilt = kron(&prev, &CMat::identity(d_i, d_i));
            let residual = max_abs_diff(&traced, &rebuilt);
            if residual > tol {
                return Err(Error::Causality {
                    tooth: j + 1,
                    residual,
                });
            }
            current = prev;
        }
        let residual = (current[(0, 0)] - cr(1.0)).norm();
        if residual > tol {
            return Err(Error::Causality { tooth: 1, residual });
        }
        Ok(())
    }

    /// Plug operators into the comb: link with `x` over every shared system name.
    pub fn link(&self, x: &SystemOperator) -> Result<SystemOperator> {
        link_product(&self.as_system_operator(), x)
    }
}

/// Comb Choi matrix from its teeth by iterated link products.
pub fn comb_from_channels(teeth: Vec<CombTooth>) -> Result<Comb> {
    let k = teeth.len();
    if k == 0 {
        return Err(Error::EmptyInput("comb with no teeth"));
    }
    if teeth[0].memory_in != 1 || teeth[k - 1].memory_out != 1 {
        return Err(Error::DimensionMismatch("first and last memory systems must be trivial".into()));
    }
    for (i, w) in teeth.windows(2).enumerate() {
        if w[0].memory_out != w[1].memory_in {
            return Err(Error::DimensionMismatch(format!(
                "memory after tooth {} has dimension {} but tooth {} expects {}",
                i + 1,
                w[0].memory_out,
                i + 2,
                w[1].memory_in
            )));
        }
    }
    let mut acc = SystemOperator::scalar(1.0);
    for (idx, tooth) in teeth.iter().enumerate() {
        let i = idx + 1;
        let systems = vec![
            System::new(format!("I{i}"), tooth.input),
            System::new(format!("A{}", i - 1), tooth.memory_in),
            System::new(format!("O{i}"), tooth.output),
            System::new(format!("A{i}"), tooth.memory_out),
        ];
        let op = SystemOperator::new(systems, tooth.channel.choi().clone())?;
        acc = link_product(&acc, &op)?;
    }
    acc = acc.partial_trace(&["A0", &format!("A{k}")])?;
    let names = slot_names(k);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let ordered = acc.reorder(&refs)?;
    let slots = teeth.iter().map(|t| (t.input, t.output)).collect();
    Ok(Comb {
        slots,
        choi: ordered.matrix,
        teeth: Some(teeth),
    })
}

/// A pure comb whose last output carries an environment `E` after `O_k`.
#[derive(Clone, Debug)]
pub struct PurifiedComb {
    /// Comb with slots `(I_1,O_1), …, (I_k, O_k ⊗ E)`, built from isometric teeth.
    pub comb: Comb,
    /// Choi vector on `I_1 ⊗ O_1 ⊗ ⋯ ⊗ I_k ⊗ O_k ⊗ E`.
    pub vector: CVec,
    pub env_dim: usize,
    /// Environment dimension contributed by each tooth.
    pub env_dims: Vec<usize>,
}

impl PurifiedComb {
    /// `Tr_E` of the purified Choi matrix, as a comb on the original slots.
    pub fn reduced(&self) -> Result<Comb> {
        let total = self.vector.len() / self.env_dim;
        let full = &self.vector * self.vector.adjoint();
        let choi = crate::linalg::trace_trailing(&full, total, self.env_dim);
        let mut slots = self.comb.slots.clone();
        let last = slots.last_mut().expect("nonempty");
        last.1 /= self.env_dim;
        Comb::from_choi_unchecked(slots, choi)
    }
}

/// Tooth-wise Stinespring purification. Tooth `i` is replaced by its
/// canonical dilation `V_i` (environment `E_i` of dimension equal to its Kraus
/// rank); the environments `E_1 … E_{i}` ride along in memory and leave with
/// the last output as `O_k ⊗ E_1 ⊗ ⋯ ⊗ E_k`.
pub fn comb_purify(comb: &Comb) -> Result<PurifiedComb> {
    let teeth = comb
        .teeth()
        .ok_or_else(|| Error::NotApplicable("comb was not built from teeth".into()))?;
    let k = teeth.len();
    let mut pure_teeth = Vec::with_capacity(k);
    let mut env_so_far = 1usize;
    let mut env_dims = Vec::with_capacity(k);
    for (idx, tooth) in teeth.iter().enumerate() {
        let r = tooth.channel.kraus_rank().max(1);
        let v = choi_purification_to_isometry(&tooth.channel, r)?;
        // (V ⊗ 1_{Ē}) : I ⊗ A ⊗ Ē → E_i ⊗ O ⊗ A' ⊗ Ē, reordered to O ⊗ A' ⊗ Ē ⊗ E_i.
        let widened = kron(v.matrix(), &CMat::identity(env_so_far, env_so_far));
        let old_dims = [r, tooth.output, tooth.memory_out, env_so_far];
        let map = subsystem_index_map(&old_dims, &[1, 2, 3, 0]);
        let w = CMat::from_fn(widened.nrows(), widened.ncols(), |i, j| widened[(map[i], j)]);
        let channel = QuantumChannel::from_kraus(&[w])?;
        let last = idx + 1 == k;
        let new_env = env_so_far * r;
        let (output, memory_out) = if last {
            (tooth.output * new_env, 1)
        } else {
            (tooth.output, tooth.memory_out * new_env)
        };
        pure_teeth.push(CombTooth::new(
            channel,
            tooth.input,
            tooth.memory_in * env_so_far,
            output,
            memory_out,
        )?);
        env_so_far = new_env;
        env_dims.push(r);
    }
    let pure = comb_from_channels(pure_teeth)?;
    let (vals, vecs) = hermitian_eigen(pure.choi());
    let mut vector: CVec = vecs.column(0).into_owned() * cr(vals[0].max(0.0).sqrt());
    fix_phase(&mut vector, 1e-12);
    Ok(PurifiedComb {
        comb: pure,
        vector,
        env_dim: env_so_far,
        env_dims,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{random_kraus_rank_r_channel, DensityOperator};
    use crate::linalg::{ketbra, permute_subsystems, trace_trailing};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_two_tooth_comb(rng: &mut ChaCha8Rng, mem: usize) -> Comb {
        let t1 = random_kraus_rank_r_channel(2, 2 * mem, 2, rng).unwrap();
        let t2 = random_kraus_rank_r_channel(2 * mem, 2, 2, rng).unwrap();
        comb_from_channels(vec![
            CombTooth::new(t1, 2, 1, 2, mem).unwrap(),
            CombTooth::new(t2, 2, mem, 2, 1).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn one_tooth_comb_is_the_channel_choi() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = random_kraus_rank_r_channel(2, 3, 2, &mut rng).unwrap();
        let comb = comb_from_channels(vec![CombTooth::new(ch.clone(), 2, 1, 3, 1).unwrap()]).unwrap();
        assert!(max_abs_diff(comb.choi(), ch.choi()) < 1e-15);
        comb.validate(1e-9).unwrap();
    }

    #[test]
    fn built_combs_are_causal_and_corruptions_are_not() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let comb = random_two_tooth_comb(&mut rng, 2);
            comb.validate(1e-8).unwrap();
            // Swap the wires O1 and I2.
            let bad = permute_subsystems(comb.choi(), &comb.dims(), &[0, 2, 1, 3]);
            let bad = Comb::from_choi_unchecked(comb.slots().to_vec(), bad).unwrap();
            assert!(matches!(bad.validate(1e-8), Err(Error::Causality { .. })));
        }
    }

    #[test]
    fn prepare_then_measure_comb_acts_as_a_supermap() {
        // Tooth 1 prepares a Bell pair on O1 ⊗ A1; tooth 2 measures I2 ⊗ A1 in
        // the computational basis and re-prepares the outcome parity on O2.
        let mut bell = CVec::zeros(4);
        bell[0] = cr(std::f64::consts::FRAC_1_SQRT_2);
        bell[3] = cr(std::f64::consts::FRAC_1_SQRT_2);
        let prepare = QuantumChannel::from_kraus(&[CMat::from_fn(4, 1, |i, _| bell[i])]).unwrap();
        let mut kraus = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                let parity = a ^ b;
                kraus.push(CMat::from_fn(2, 4, |o, j| cr(if o == parity && j == 2 * a + b { 1.0 } else { 0.0 })));
            }
        }
        let measure = QuantumChannel::from_kraus(&kraus).unwrap();
        let comb = comb_from_channels(vec![
            CombTooth::new(prepare.clone(), 1, 1, 2, 2).unwrap(),
            CombTooth::new(measure.clone(), 2, 2, 2, 1).unwrap(),
        ])
        .unwrap();
        comb.validate(1e-10).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let inner = random_kraus_rank_r_channel(2, 2, 2, &mut rng).unwrap();
            let plug = SystemOperator::new(vec![System::new("O1", 2), System::new("I2", 2)], inner.choi().clone()).unwrap();
            let linked = comb.link(&plug).unwrap();
            let linked = linked.reorder(&["I1", "O2"]).unwrap();
            // Direct action: measure ∘ (inner ⊗ id) applied to the Bell pair.
            let bell_rho = DensityOperator::pure(&bell).unwrap();
            let mid = inner.tensor(&QuantumChannel::identity(2)).apply(&bell_rho).unwrap();
            let direct = measure.apply(&mid).unwrap();
            assert!(max_abs_diff(&linked.matrix, direct.matrix()) < 1e-12);
        }
    }

    #[test]
    fn purification_reduces_to_the_comb() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let comb = random_two_tooth_comb(&mut rng, 2);
            let pure = comb_purify(&comb).unwrap();
            assert_eq!(pure.env_dims, vec![2, 2]);
            assert_eq!(pure.env_dim, 4);
            pure.comb.validate(1e-9).unwrap();
            let reduced = pure.reduced().unwrap();
            assert!(max_abs_diff(reduced.choi(), comb.choi()) < 1e-9);
            let rank_one = &pure.vector * pure.vector.adjoint();
            assert!(max_abs_diff(&rank_one, pure.comb.choi()) < 1e-9);
            // Action on a basis of inner operators O1 → I2 agrees after tracing E.
            for a in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        for d in 0..2 {
                            let x = kron(&ketbra(2, a, b), &ketbra(2, c, d));
                            let plug = SystemOperator::new(vec![System::new("O1", 2), System::new("I2", 2)], x).unwrap();
                            let lhs = comb.link(&plug).unwrap().matrix;
                            // Systems I1 ⊗ (O2 ⊗ E).
                            let rhs = trace_trailing(&pure.comb.link(&plug).unwrap().matrix, 4, 4);
                            assert!(max_abs_diff(&lhs, &rhs) < 1e-9);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn chain_mismatch_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t1 = random_kraus_rank_r_channel(2, 4, 2, &mut rng).unwrap();
        let t2 = random_kraus_rank_r_channel(6, 2, 3, &mut rng).unwrap();
        let teeth = vec![
            CombTooth::new(t1, 2, 1, 2, 2).unwrap(),
            CombTooth::new(t2, 2, 3, 2, 1).unwrap(),
        ];
        assert!(comb_from_channels(teeth).is_err());
        assert!(comb_from_channels(Vec::new()).is_err());
    }
}
