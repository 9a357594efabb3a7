use proptest::prelude::*;

use jointmeas_core::channel::{apply, heisenberg_dual};
use jointmeas_core::criteria::{busch_compatible, busch_slack, commute_check, jordan_criterion, ylo_compatible};
use jointmeas_core::entanglement::{partial_state_checks, ppt_entangled_2qubit};
use jointmeas_core::measurement::{
    joint_from_relabelings, mix_pairs, product_joint, relabel, uniform_trivial, Observable, QubitDichotomic,
    RelabelMap,
};
use jointmeas_core::operator::{DensityOperator, HermitianOperator, Side};
use jointmeas_core::random::{
    random_bloch, random_channel, random_density, random_observable, random_pure_state, random_qubit_dichotomic,
    seeded,
};
use jointmeas_core::sdp::{compat_margin, robustness_optimal, robustness_uniform, SolverConfig, Status};
use jointmeas_core::witness::{guessing_probability, xi, TestEnsemble};
use rand::Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig::with_cases(cases)
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn partial_trace_of_product(seed in any::<u64>(), da in 2usize..4, db in 2usize..4) {
        let mut rng = seeded(seed);
        let a = random_density(&mut rng, da).unwrap();
        let b = random_density(&mut rng, db).unwrap();
        let ab = a.tensor(&b);
        prop_assert!(ab.partial_trace((da, db), Side::Second).unwrap().op().approx_eq(a.op(), 1e-12));
        prop_assert!(ab.partial_trace((da, db), Side::First).unwrap().op().approx_eq(b.op(), 1e-12));
        let pt = ab.op().partial_transpose((da, db), Side::Second).unwrap();
        prop_assert!((pt.trace() - 1.0).abs() < 1e-12);
        // product states stay positive under partial transposition
        prop_assert!(pt.min_eigenvalue() > -1e-12);
    }

    #[test]
    fn clip_reaches_the_level(seed in any::<u64>(), dim in 1usize..5, level in -0.5f64..0.5) {
        let mut rng = seeded(seed);
        let o = random_observable(&mut rng, dim, 2).unwrap();
        let x = o.effect(0) - o.effect(1);
        let (clipped, _) = x.clip_below(level);
        prop_assert!(clipped.min_eigenvalue() >= level - 1e-12);
        // already-feasible operators are fixed points
        let (again, _) = clipped.clip_below(level);
        prop_assert!(again.approx_eq(&clipped, 1e-10));
    }

    #[test]
    fn relabeling_joint_reproduces_relabelings(seed in any::<u64>(), dim in 2usize..4, k in 2usize..6) {
        let mut rng = seeded(seed);
        let c = random_observable(&mut rng, dim, k).unwrap();
        let (m, n) = (rng.gen_range(1..4), rng.gen_range(1..4));
        let f = RelabelMap::new((0..k).map(|_| rng.gen_range(0..m)).collect(), m).unwrap();
        let g = RelabelMap::new((0..k).map(|_| rng.gen_range(0..n)).collect(), n).unwrap();
        let joint = joint_from_relabelings(&c, &f, &g).unwrap();
        let (a, b) = joint.marginals().unwrap();
        prop_assert!(a.approx_eq(&relabel(&c, &f).unwrap(), 1e-10));
        prop_assert!(b.approx_eq(&relabel(&c, &g).unwrap(), 1e-10));
    }

    #[test]
    fn biased_criterion_reduces_without_bias(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let (a, b) = (random_bloch(&mut rng, 1.0), random_bloch(&mut rng, 1.0));
        prop_assume!(busch_slack(&a, &b).abs() > 1e-9);
        let (qa, qb) = (QubitDichotomic::unbiased(a), QubitDichotomic::unbiased(b));
        prop_assert_eq!(ylo_compatible(&qa, &qb).unwrap(), busch_compatible(&a, &b));
    }

    #[test]
    fn witness_is_affine(seed in any::<u64>(), t in 0.0f64..=1.0) {
        let mut rng = seeded(seed);
        let obs: Vec<Observable> = (0..4).map(|_| random_qubit_dichotomic(&mut rng).observable()).collect();
        let (e1, e2) = (TestEnsemble::pauli_eigenstates(1).unwrap(), TestEnsemble::pauli_eigenstates(2).unwrap());
        let (ma, mb) = mix_pairs((&obs[0], &obs[1]), (&obs[2], &obs[3]), t).unwrap();
        let mixed = xi(&ma, &mb, &e1, &e2).unwrap();
        let expect = t * xi(&obs[0], &obs[1], &e1, &e2).unwrap() + (1.0 - t) * xi(&obs[2], &obs[3], &e1, &e2).unwrap();
        prop_assert!((mixed - expect).abs() < 1e-12);
        let pg = guessing_probability(&e1, &ma).unwrap();
        prop_assert!((0.0..=1.0).contains(&pg));
    }

    #[test]
    fn channel_duality(seed in any::<u64>(), din in 2usize..4, dout in 2usize..4, rank in 1usize..4) {
        let mut rng = seeded(seed);
        let ch = random_channel(&mut rng, din, dout, rank.max(din.div_ceil(dout))).unwrap();
        let rho = random_density(&mut rng, din).unwrap();
        let a = random_observable(&mut rng, dout, 3).unwrap();
        let out = apply(&ch, &rho).unwrap();
        let dual = heisenberg_dual(&ch, &a).unwrap();
        for x in 0..3 {
            prop_assert!((out.expectation(a.effect(x)) - rho.expectation(dual.effect(x))).abs() < 1e-10);
        }
        let choi = ch.choi();
        let back = choi.apply_operator(rho.op()).unwrap();
        prop_assert!(back.approx_eq(out.op(), 1e-9));
    }

    #[test]
    fn separable_mixtures_are_ppt(seed in any::<u64>(), terms in 1usize..5) {
        let mut rng = seeded(seed);
        let weights: Vec<f64> = (0..terms).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let total: f64 = weights.iter().sum();
        let mut acc = HermitianOperator::zeros(4);
        for w in &weights {
            let a = random_density(&mut rng, 2).unwrap();
            let b = random_density(&mut rng, 2).unwrap();
            acc.add_scaled(a.tensor(&b).op(), w / total);
        }
        prop_assert!(!ppt_entangled_2qubit(&DensityOperator::new(acc).unwrap()).unwrap());
    }

    #[test]
    fn pure_states_entangled_iff_mixed_marginal(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let psi = random_pure_state(&mut rng, 4).unwrap();
        let r = partial_state_checks(&psi, (2, 2)).unwrap();
        prop_assume!((1.0 - r.purity_first).abs() > 1e-6);
        prop_assert_eq!(ppt_entangled_2qubit(&psi).unwrap(), r.purity_first < 1.0 - 1e-6);
        prop_assert!(!r.pure_marginal);
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn jordan_sufficient_and_commuting_contained(seed in any::<u64>(), dim in 2usize..4) {
        let mut rng = seeded(seed);
        let a = random_observable(&mut rng, dim, 2).unwrap();
        let mb = rng.gen_range(2..4);
        let b = random_observable(&mut rng, dim, mb).unwrap();
        // mixing with noise makes holding instances common
        let noise = (uniform_trivial(dim, 2), uniform_trivial(dim, b.outcomes()));
        let (a, b) = mix_pairs((&a, &b), (&noise.0, &noise.1), rng.gen_range(0.2..1.0)).unwrap();
        if jordan_criterion(&a, &b).unwrap().holds() {
            let r = compat_margin(&[a.clone(), b.clone()], &SolverConfig::decide()).unwrap();
            prop_assert!(r.lower_bound >= -1e-7);
        }
        let c = random_observable(&mut rng, dim, 3).unwrap();
        let d = uniform_trivial(dim, 2);
        prop_assert!(commute_check(&c, &d).unwrap());
        prop_assert!(jordan_criterion(&c, &d).unwrap().holds());
        let (pa, pb) = product_joint(&c, &d).unwrap().marginals().unwrap();
        prop_assert!(pa.approx_eq(&c, 1e-10) && pb.approx_eq(&d, 1e-10));
    }

    #[test]
    fn margin_monotone_in_noise(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let (a, b) = (random_qubit_dichotomic(&mut rng).observable(), random_qubit_dichotomic(&mut rng).observable());
        let noise = uniform_trivial(2, 2);
        let cfg = SolverConfig { tol: 1e-6, ..SolverConfig::default() };
        let mut previous = f64::NEG_INFINITY;
        for t in [1.0, 0.8, 0.6, 0.4] {
            let (ma, mb) = mix_pairs((&a, &b), (&noise, &noise), t).unwrap();
            let r = compat_margin(&[ma, mb], &cfg).unwrap();
            prop_assert!(r.upper_bound >= previous - 1e-6, "t = {}: {:?} after {}", t, r, previous);
            previous = r.lower_bound;
        }
    }

    #[test]
    fn subsets_of_compatible_sets_are_compatible(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let noise = uniform_trivial(2, 2);
        let obs: Vec<Observable> = (0..3)
            .map(|_| {
                let q = random_qubit_dichotomic(&mut rng).observable();
                jointmeas_core::measurement::mix_observables(&q, &noise, 0.55).unwrap()
            })
            .collect();
        let cfg = SolverConfig::decide();
        let full = compat_margin(&obs, &cfg).unwrap();
        if full.status == Status::Compatible {
            for drop in 0..3 {
                let sub: Vec<Observable> = obs.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, o)| o.clone()).collect();
                prop_assert_eq!(compat_margin(&sub, &cfg).unwrap().status, Status::Compatible);
            }
        }
    }
}

proptest! {
    #![proptest_config(config(8))]

    #[test]
    fn optimal_noise_dominates_uniform(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let (a, b) = (random_qubit_dichotomic(&mut rng).observable(), random_qubit_dichotomic(&mut rng).observable());
        let cfg = SolverConfig::default();
        let u = robustness_uniform((&a, &b), 1e-3, &cfg).unwrap();
        let o = robustness_optimal((&a, &b), 1e-3, &cfg).unwrap();
        prop_assert!(o.t_star >= u.t_star - 1e-3, "{:?} vs {:?}", o, u);
    }
}
