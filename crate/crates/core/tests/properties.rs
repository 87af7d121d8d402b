//! Property tests for the structural invariants of the simulator.

use proptest::prelude::*;
use zenosim_core::antizeno::{
    antizeno_probability, effective_hamiltonian, evolved_state, rank1_phase, rankn_state, solve_steering,
    SteeredMeasurement,
};
use zenosim_core::chain::{
    all_histories_closure, chain_operator, chain_probability, HistoryOutcome, MeasurementSchedule,
};
use zenosim_core::continuum::{solve_chain_ode_trajectory, OdeConfig};
use zenosim_core::linalg::{self, c, max_abs, op_norm, CMatrix};
use zenosim_core::measurement::{evolve_density, heisenberg_transform, lueders_mix, measure_prob, von_neumann_entropy};
use zenosim_core::random::{self, rng_from_seed};
use zenosim_core::scenarios::steering::{cauchy_schwarz_excess, psi_extended_basis};
use zenosim_core::scenarios::{swept_window_limit, vn_bound, vn_steering_run, SteeringPlan, WindowFamilyParams};
use zenosim_core::{
    mat_exp, Branch, DensityOperator, HermitianOperator, Projector, ProjectorFamily, RotationFactor, ScalarPath,
    Tolerances, UnitaryFamily,
};

const TOL: f64 = 1e-10;

fn steered(seed: u64, dim: usize, rank: usize, pure: bool) -> SteeredMeasurement {
    let mut rng = rng_from_seed(seed);
    let e = random::random_projector_with(&mut rng, dim, rank).unwrap();
    let k1 = random::random_hermitian_with(&mut rng, dim).unwrap();
    let k2 = random::random_hermitian_with(&mut rng, dim).unwrap();
    let h = random::random_hermitian_with(&mut rng, dim).unwrap();
    let rho = if pure {
        DensityOperator::pure(&random::random_state_in_range(&mut rng, &e).unwrap()).unwrap()
    } else {
        random::random_density_in_range(&mut rng, &e).unwrap()
    };
    let u = UnitaryFamily::rotations(vec![
        RotationFactor::new(k1, ScalarPath::linear(1.2)),
        RotationFactor::new(
            k2,
            ScalarPath::Sine {
                offset: 0.0,
                amplitude: 0.7,
                frequency: 2.5,
            },
        ),
    ])
    .unwrap();
    SteeredMeasurement::new(e, u, h, rho, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exp_of_anti_hermitian_is_unitary(seed in any::<u64>(), dim in 1usize..=8, scale in 0.01f64..20.0) {
        let h = random::random_hermitian(dim, seed).unwrap();
        let a = h.matrix().map(|z| z * c(0.0, scale));
        let u = mat_exp(&a).unwrap();
        prop_assert!(linalg::unitary_defect(&u) <= 10.0 * TOL);
    }

    #[test]
    fn evolution_preserves_density_structure(seed in any::<u64>(), dim in 1usize..=6, t in -5.0f64..5.0) {
        let rho = random::random_density(dim, seed).unwrap();
        let h = random::random_hermitian(dim, seed ^ 0xabcd).unwrap();
        let out = evolve_density(&rho, &h, t).unwrap();
        prop_assert!((linalg::trace(out.matrix()).re - 1.0).abs() <= TOL);
        prop_assert!(linalg::hermitian_defect(out.matrix()) <= TOL);
        let (a, b) = (rho.eigenvalues(), out.eigenvalues());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= TOL);
        }
    }

    #[test]
    fn outcome_probabilities_sum_to_one(seed in any::<u64>(), dim in 2usize..=6, rank_frac in 0.0f64..1.0) {
        let rank = 1 + ((dim - 1) as f64 * rank_frac) as usize;
        let rho = random::random_density(dim, seed).unwrap();
        let e = random::random_projector(dim, rank, seed.wrapping_add(1)).unwrap();
        let p = measure_prob(&rho, &e).unwrap() + measure_prob(&rho, &e.complement()).unwrap();
        prop_assert!((p - 1.0).abs() <= TOL);
    }

    #[test]
    fn heisenberg_transform_is_a_projector(seed in any::<u64>(), dim in 2usize..=6, t in -3.0f64..3.0) {
        let e = random::random_projector(dim, 1, seed).unwrap();
        let h = random::random_hermitian(dim, seed ^ 7).unwrap();
        let eh = heisenberg_transform(&e, &h, t).unwrap();
        prop_assert!(Projector::defect(eh.matrix()) <= TOL);
        prop_assert_eq!(eh.rank(), 1);
    }

    #[test]
    fn measurement_does_not_lower_entropy(seed in any::<u64>(), dim in 2usize..=8) {
        let tol = Tolerances::default();
        let rho = random::random_density(dim, seed).unwrap();
        let u = random::random_unitary_with(&mut rng_from_seed(seed ^ 0x55), dim).unwrap();
        let family: Vec<Projector> = (0..dim)
            .map(|j| {
                let v = u.matrix().column(j).into_owned();
                Projector::new(linalg::outer(&v, &v)).unwrap()
            })
            .collect();
        let mixed = lueders_mix(&rho, &family, &tol).unwrap();
        prop_assert!(von_neumann_entropy(&mixed, &tol) >= von_neumann_entropy(&rho, &tol) - TOL);
    }

    #[test]
    fn pure_states_have_zero_entropy(seed in any::<u64>(), dim in 1usize..=8) {
        let rho = DensityOperator::pure(&random::random_state(dim, seed).unwrap()).unwrap();
        prop_assert!(von_neumann_entropy(&rho, &Tolerances::default()).abs() <= TOL);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn chain_nests_and_annihilates(seed in any::<u64>(), dim in 2usize..=5, n in 2usize..=12) {
        let m = steered(seed, dim, 1, false);
        let fam = m.projector_family().unwrap();
        let h = m.hamiltonian();
        let sched = MeasurementSchedule::new(0.0, 1.0, n).unwrap();
        let hf = m.heisenberg_family().unwrap();
        let id = linalg::identity(dim);
        let mut prev = id.clone();
        for i in 1..=n {
            let sub = MeasurementSchedule::new(0.0, sched.time(i - 1), i).unwrap();
            let a = chain_operator(&fam, h, &sub, &HistoryOutcome::all_measured(i)).unwrap();
            let abar = chain_operator(&fam, h, &sub, &HistoryOutcome::all_complement(i)).unwrap();
            let e = hf.projector(sched.time(i - 1));
            if i > 1 {
                prop_assert!(max_abs(&(&e * &prev - &a)) <= TOL);
            }
            prop_assert!(max_abs(&((&id - &e) * &a)) <= TOL);
            prop_assert!(max_abs(&(&e * &abar)) <= TOL);
            prev = a;
        }
    }

    #[test]
    fn histories_are_complete(seed in any::<u64>(), dim in 2usize..=4, n in 1usize..=8) {
        let m = steered(seed, dim, 1, false);
        let rho = random::random_density(dim, seed ^ 3).unwrap();
        let sched = MeasurementSchedule::new(0.0, 1.0, n).unwrap();
        let total = all_histories_closure(&m.projector_family().unwrap(), m.hamiltonian(), &sched, &rho).unwrap();
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn commuting_projector_chain_is_constant(seed in any::<u64>(), dim in 2usize..=5, n in 1usize..=40) {
        let mut rng = rng_from_seed(seed);
        let energies: Vec<f64> = (0..dim).map(|j| j as f64 * 0.7 - 1.0).collect();
        let h = HermitianOperator::new(CMatrix::from_diagonal(&zenosim_core::CVector::from_iterator(
            dim,
            energies.iter().map(|&x| c(x, 0.0)),
        )))
        .unwrap();
        let e = Projector::from_indices(dim, [0]).unwrap();
        let rho = random::random_density_with(&mut rng, dim).unwrap();
        let fam = ProjectorFamily::constant(e.clone(), 0.0, 1.0).unwrap();
        let sched = MeasurementSchedule::new(0.0, 1.0, n).unwrap();
        let a = chain_operator(&fam, &h, &sched, &HistoryOutcome::all_measured(n)).unwrap();
        prop_assert!(max_abs(&(&a - e.matrix())) <= TOL);
        let p = chain_probability(&rho, &a).unwrap();
        prop_assert!((p - measure_prob(&rho, &e).unwrap()).abs() <= TOL);
    }

    #[test]
    fn ode_solution_stays_in_measured_range(seed in any::<u64>(), dim in 2usize..=4) {
        let m = steered(seed, dim, 1, false);
        let fam = m.heisenberg_family().unwrap();
        let cfg = OdeConfig::with_steps(200);
        let traj = solve_chain_ode_trajectory(&fam, Branch::Measured, 0.0, 1.0, &cfg).unwrap();
        for (k, a) in traj.iter().enumerate() {
            let e = fam.projector(k as f64 / 200.0);
            prop_assert!(op_norm(&(e * a - a)) <= 1e-6);
        }
    }

    #[test]
    fn steering_is_unitary_and_certain(seed in any::<u64>(), dim in 2usize..=5, rank_frac in 0.0f64..1.0) {
        let rank = 1 + ((dim - 1) as f64 * rank_frac) as usize;
        let m = steered(seed, dim, rank, false);
        let cfg = OdeConfig::with_steps(300);
        let sp = solve_steering(&m, 0.0, 1.0, &cfg).unwrap();
        prop_assert!(sp.unitarity_defect() <= 1e-6);
        prop_assert!((antizeno_probability(&m, 1.0, &cfg).unwrap() - 1.0).abs() <= 1e-6);
        for &t in &[0.2, 0.55, 0.9] {
            prop_assert!(linalg::hermitian_defect(&effective_hamiltonian(&m, t).unwrap()) <= TOL);
        }
    }

    #[test]
    fn watched_state_follows_projector(seed in any::<u64>(), dim in 2usize..=5, t in 0.0f64..1.0) {
        let m = steered(seed, dim, 2.min(dim), true);
        let cfg = OdeConfig::with_steps(300);
        let psi = evolved_state(&m, t, &cfg).unwrap();
        prop_assert!(psi.is_normalized(1e-6));
        let es = m.schrodinger_projector(t);
        prop_assert!((&es * psi.amplitudes() - psi.amplitudes()).norm() <= 1e-6);
        let basis = m.projector().range_basis();
        let y = rankn_state(&m, &basis, t, &cfg).unwrap();
        prop_assert!(y.is_normalized(1e-6));
    }

    #[test]
    fn rank_one_phase_is_real_and_unimodular(seed in any::<u64>(), dim in 2usize..=5) {
        let m = steered(seed, dim, 1, true);
        let phi = rank1_phase(&m, 1.0, &OdeConfig::with_steps(200)).unwrap();
        prop_assert!(phi.is_finite());
        prop_assert!((c(0.0, phi).exp().norm() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn steering_meets_bound(seed in any::<u64>(), dim in 2usize..=4, k in 1usize..=60) {
        let plan = SteeringPlan::basis_pair(dim, k, seed).unwrap();
        let out = vn_steering_run(&plan).unwrap();
        prop_assert!(out.fidelity >= vn_bound(k).unwrap() - TOL);
        prop_assert!(cauchy_schwarz_excess(&out.rho, &psi_extended_basis(&plan)) <= TOL);
        prop_assert!(out.entropy.iter().all(|&s| s >= 0.0));
        prop_assert_eq!(out.entropy[0], 0.0);
    }

    #[test]
    fn window_limit_is_diagonal_projector(
        lo in 0.0f64..4.0,
        hi in 5.0f64..9.0,
        drift_lo in -3.0f64..3.0,
        drift_hi in -3.0f64..3.0,
    ) {
        let p = WindowFamilyParams::new(
            10,
            ScalarPath::Linear { offset: lo, rate: drift_lo.min(4.9 - lo) },
            ScalarPath::Linear { offset: hi, rate: drift_hi.max(5.0 - hi) },
        )
        .unwrap()
        .with_energies((0..10).map(|j| (j as f64).sin()).collect())
        .unwrap();
        let sched = MeasurementSchedule::new(0.0, 1.0, 20).unwrap();
        let limit = swept_window_limit(&p, &sched).unwrap();
        prop_assert_eq!(limit.matrix() * limit.matrix(), limit.matrix().clone());
        prop_assert_eq!(max_abs(&linalg::commutator(p.hamiltonian().matrix(), limit.matrix())), 0.0);
    }
}

#[test]
fn entropy_sweep_over_fixed_seeds() {
    let tol = Tolerances::default();
    for seed in 0..200u64 {
        let dim = 2 + (seed % 7) as usize;
        let rho = random::random_density(dim, seed).unwrap();
        let u = random::random_unitary_with(&mut rng_from_seed(seed + 1000), dim).unwrap();
        let family: Vec<Projector> = (0..dim)
            .map(|j| {
                let v = u.matrix().column(j).into_owned();
                Projector::new(linalg::outer(&v, &v)).unwrap()
            })
            .collect();
        let mixed = lueders_mix(&rho, &family, &tol).unwrap();
        assert!(von_neumann_entropy(&mixed, &tol) >= von_neumann_entropy(&rho, &tol) - TOL);
    }
    for seed in 0..100u64 {
        let psi = random::random_state(1 + (seed % 8) as usize, seed).unwrap();
        let rho = DensityOperator::pure(&psi).unwrap();
        assert!(von_neumann_entropy(&rho, &tol).abs() <= TOL);
    }
}
