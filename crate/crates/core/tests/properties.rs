use dilation_core::channels::{random_kraus_rank_r_channel, random_rank_r_state, trace_distance, QuantumChannel};
use dilation_core::circuits::random_purification_channel;
use dilation_core::combinatorics::{factorial, partitions, sym_dim, unitary_dim};
use dilation_core::kronecker::kronecker_coefficient;
use dilation_core::linalg::{max_abs_diff, partial_trace, permute_subsystems};
use dilation_core::symrep::{permutation_action, young_orthogonal_rep, Permutation, SymmetricGroup};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn permutation(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::new(v).unwrap())
}

fn pair(max_n: usize) -> impl Strategy<Value = (Permutation, Permutation)> {
    (1..=max_n).prop_flat_map(|n| (permutation(n), permutation(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_round_trips(sigma in (1usize..=6).prop_flat_map(permutation)) {
        let back = Permutation::from_rank(sigma.n(), sigma.rank()).unwrap();
        prop_assert_eq!(back, sigma);
    }

    #[test]
    fn inverse_composes_to_identity(sigma in (1usize..=7).prop_flat_map(permutation)) {
        prop_assert!(sigma.compose(&sigma.inverse()).unwrap().is_identity());
        prop_assert!(sigma.inverse().compose(&sigma).unwrap().is_identity());
    }

    #[test]
    fn sign_is_multiplicative((s, t) in pair(7)) {
        prop_assert_eq!(s.compose(&t).unwrap().sign(), s.sign() * t.sign());
    }

    #[test]
    fn tensor_action_is_a_homomorphism((s, t) in pair(4), d in 1usize..=2) {
        let lhs = permutation_action(&s, d) * permutation_action(&t, d);
        let rhs = permutation_action(&s.compose(&t).unwrap(), d);
        prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-15);
        let pt = permutation_action(&s, d).transpose();
        prop_assert!(max_abs_diff(&pt, &permutation_action(&s.inverse(), d)) < 1e-15);
    }

    #[test]
    fn young_form_is_an_orthogonal_representation((s, t) in pair(5)) {
        for shape in partitions(s.n()).unwrap() {
            let gs = young_orthogonal_rep(&shape, &s).unwrap().matrix;
            let gt = young_orthogonal_rep(&shape, &t).unwrap().matrix;
            let gst = young_orthogonal_rep(&shape, &s.compose(&t).unwrap()).unwrap().matrix;
            prop_assert!((&gs * &gt - &gst).abs().max() < 1e-12);
            let m = gs.nrows();
            prop_assert!((gs.transpose() * &gs - nalgebra::DMatrix::<f64>::identity(m, m)).abs().max() < 1e-12);
        }
    }

    #[test]
    fn kronecker_coefficients_are_symmetric(n in 1usize..=5, seed in any::<u64>()) {
        let ps = partitions(n).unwrap();
        let pick = |k: u64| ps[(seed.rotate_left(k as u32 * 7) % ps.len() as u64) as usize].clone();
        let (a, b, c) = (pick(1), pick(2), pick(3));
        let g = kronecker_coefficient(&a, &b, &c).unwrap();
        prop_assert_eq!(g, kronecker_coefficient(&b, &a, &c).unwrap());
        prop_assert_eq!(g, kronecker_coefficient(&a, &c, &b).unwrap());
        prop_assert_eq!(g, kronecker_coefficient(&a.conjugate(), &b.conjugate(), &c).unwrap());
        let trivial = kronecker_coefficient(&a, &b, &dilation_core::combinatorics::Partition::row(n)).unwrap();
        prop_assert_eq!(trivial, usize::from(a == b));
    }

    #[test]
    fn random_channels_are_cptp_with_bounded_rank(d_in in 1usize..=3, d_out in 1usize..=3, r in 1usize..=3, seed in any::<u64>()) {
        prop_assume!(r * d_out >= d_in && r <= d_in * d_out);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = random_kraus_rank_r_channel(d_in, d_out, r, &mut rng).unwrap();
        let map = ch.as_map();
        prop_assert!(map.trace_preservation_residual() < 1e-10);
        prop_assert!(map.positivity_violation() < 1e-10);
        prop_assert!(ch.kraus_rank() <= r);
        let rebuilt = QuantumChannel::from_kraus(&ch.kraus()).unwrap();
        prop_assert!(max_abs_diff(rebuilt.choi(), ch.choi()) < 1e-10);
    }

    #[test]
    fn trace_distance_is_a_bounded_metric(seed in any::<u64>(), d in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_rank_r_state(d, d, &mut rng).unwrap();
        let b = random_rank_r_state(d, 1, &mut rng).unwrap();
        let c = random_rank_r_state(d, 2, &mut rng).unwrap();
        let (ab, bc, ac) = (
            trace_distance(a.matrix(), b.matrix()),
            trace_distance(b.matrix(), c.matrix()),
            trace_distance(a.matrix(), c.matrix()),
        );
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!((ab - trace_distance(b.matrix(), a.matrix())).abs() < 1e-12);
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert!(trace_distance(a.matrix(), a.matrix()) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn purification_output_is_a_permutation_invariant_state(seed in any::<u64>(), rank in 1usize..=2) {
        let (n, d, r) = (2, 2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_rank_r_state(d, rank, &mut rng).unwrap();
        let phi = random_purification_channel(n, d, r).unwrap();
        let out = phi.apply_power(&rho).unwrap().into_matrix();
        // Swapping the two (E, S) copies leaves the output unchanged.
        let swapped = permute_subsystems(&out, &[r, r, d, d], &[1, 0, 3, 2]);
        prop_assert!(max_abs_diff(&out, &swapped) < 1e-10);
        // Each system copy is untouched on average.
        let marginal = partial_trace(&out, &[r, r, d, d], &[0, 1, 3]);
        prop_assert!(max_abs_diff(&marginal, rho.matrix()) < 1e-10);
    }
}

#[test]
fn schur_weyl_dimension_count() {
    for n in 1..=6 {
        let ps = partitions(n).unwrap();
        let sq: usize = ps.iter().map(|p| sym_dim(p).pow(2)).sum();
        assert_eq!(sq as u128, factorial(n));
        for d in 1..=4 {
            let total: usize = ps.iter().map(|p| sym_dim(p) * unitary_dim(p, d)).sum();
            assert_eq!(total, d.pow(n as u32));
        }
    }
}

#[test]
fn group_algebra_register_matches_group_order() {
    for n in 1..=5 {
        let g = SymmetricGroup::new(n).unwrap();
        assert_eq!(g.order() as u128, factorial(n));
        let offsets = g.fourier_offsets();
        let last = g.irreps().last().unwrap();
        assert_eq!(offsets.last().unwrap() + last.dim() * last.dim(), g.order());
    }
}
