//! Randomized invariants over the work, thermodynamics and cycle layers.

use proptest::prelude::*;

use usitir::control::ControlSet;
use usitir::cycle::{ir_work_ledger, run_1mqihe, EngineSpec};
use usitir::operator::{
    collective_sigma_z, max_abs_diff, unitary_from_generator, DensityMatrix, HermitianOperator,
    HilbertSpace, Statistics,
};
use usitir::oracle::{random_density_matrix, random_hermitian_with, seeded_rng};
use usitir::thermo::{
    free_energy, gibbs_state, relative_entropy, von_neumann_entropy, ThermalContext,
};
use usitir::work::{
    extractable_work, optimal_work, s_u_fn_boson, s_u_fn_distinguishable, s_u_local_common,
    s_u_local_independent,
};

fn two_qubit_state() -> impl Strategy<Value = DensityMatrix> {
    (0u64..5000, 1usize..=4)
        .prop_map(|(seed, rank)| random_density_matrix(4, rank, seed).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn uncontrollable_entropies_nonnegative(rho in two_qubit_state()) {
        prop_assert!(s_u_local_independent(&rho).unwrap() >= 0.0);
        prop_assert!(s_u_local_common(&rho).unwrap() >= 0.0);
        prop_assert!(s_u_fn_distinguishable(&rho).unwrap() >= 0.0);
    }

    #[test]
    fn work_bounded_by_optimum(rho in two_qubit_state()) {
        let ctx = ThermalContext::default();
        let w_opt = optimal_work(&rho);
        for cs in [
            ControlSet::local_independent(2).unwrap(),
            ControlSet::local_common(2).unwrap(),
            ControlSet::collective_z(2, Statistics::Distinguishable).unwrap(),
            ControlSet::c2(),
        ] {
            let r = extractable_work(&rho, &cs, &ctx).unwrap();
            prop_assert!(r.work <= w_opt + 1e-9);
            prop_assert!(r.uncontrollable_entropy >= -1e-9);
        }
    }

    #[test]
    fn common_drive_never_cheaper_than_independent(rho in two_qubit_state()) {
        let l = s_u_local_independent(&rho).unwrap();
        let g = s_u_local_common(&rho).unwrap();
        prop_assert!(g >= l - 1e-9);
    }

    #[test]
    fn factorizable_inputs_are_lossless(sa in 0u64..3000, sb in 0u64..3000) {
        let a = random_density_matrix(2, 2, sa).unwrap();
        let b = random_density_matrix(2, 2, sb).unwrap();
        prop_assert!(s_u_local_independent(&a.tensor(&b).unwrap()).unwrap() <= 1e-9);
    }

    #[test]
    fn collective_phase_is_inert(rho in two_qubit_state(), theta in -3.0f64..3.0) {
        let u = unitary_from_generator(&collective_sigma_z(2).unwrap().scale(theta));
        let rotated = rho.conjugate(&u).unwrap();
        let a = s_u_fn_distinguishable(&rho).unwrap();
        let b = s_u_fn_distinguishable(&rotated).unwrap();
        prop_assert!((a - b).abs() <= 1e-9);
    }

    #[test]
    fn bosonic_su_nonnegative(seed in 0u64..3000, rank in 1usize..=3) {
        let g = random_density_matrix(3, rank, seed).unwrap();
        let rho = DensityMatrix::new(HilbertSpace::bosonic_qubits(2), g.matrix().clone()).unwrap();
        prop_assert!(s_u_fn_boson(&rho).unwrap() >= 0.0);
    }

    #[test]
    fn gibbs_invariants(seed in 0u64..3000, beta in 0.2f64..4.0, shift in -5.0f64..5.0) {
        let mut rng = seeded_rng(seed);
        let h = random_hermitian_with(4, &mut rng);
        let ctx = ThermalContext::new(beta).unwrap();
        let gibbs = gibbs_state(&h, &ctx);

        // entropy of the Gibbs state matches beta(<E> - F) in bits
        let energy = (gibbs.matrix() * h.matrix()).trace().re;
        let expected_bits = beta * (energy - free_energy(&h, &ctx)) / std::f64::consts::LN_2;
        prop_assert!((von_neumann_entropy(&gibbs) - expected_bits).abs() <= 1e-9);

        // identity offsets move the free energy but not the state
        let offset = h.add(&HermitianOperator::identity(4).scale(shift)).unwrap();
        prop_assert!(max_abs_diff(gibbs_state(&offset, &ctx).matrix(), gibbs.matrix()) <= 1e-11);
        prop_assert!((free_energy(&offset, &ctx) - free_energy(&h, &ctx) - shift).abs() <= 1e-9);
    }

    #[test]
    fn relative_entropy_nonnegative_and_faithful(sa in 0u64..2000, sb in 0u64..2000) {
        let a = random_density_matrix(4, 4, sa).unwrap();
        let b = random_density_matrix(4, 4, sb).unwrap();
        let d = relative_entropy(&a, &b).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert!(relative_entropy(&a, &a).unwrap() <= 1e-10);
    }

    #[test]
    fn cycle_ledger_tracks_closed_form(c in 0.05f64..0.95) {
        let ancilla = DensityMatrix::from_diagonal(
            HilbertSpace::qubits(1),
            &[0.5 * (1.0 + c), 0.5 * (1.0 - c)],
        )
        .unwrap();
        let mut spec = EngineSpec::new(ancilla, ThermalContext::default());
        spec.steps = 2_000;
        let trace = run_1mqihe(&spec).unwrap();
        prop_assert!((trace.final_work - trace.closed_form_work).abs() <= 1e-4);
        prop_assert!(trace.samples.last().unwrap().r.abs() <= 1e-12);
    }

    #[test]
    fn ir_ledger_identity_offset_inert(seed in 0u64..1000, shift in -4.0f64..4.0) {
        let mut rng = seeded_rng(seed);
        let h = random_hermitian_with(4, &mut rng);
        let ctx = ThermalContext::default();
        let base = ir_work_ledger(&h, &ctx, 120, None);
        let offset = h.add(&HermitianOperator::identity(4).scale(shift)).unwrap();
        prop_assert!((ir_work_ledger(&offset, &ctx, 120, None) - base).abs() <= 1e-10);
    }
}
