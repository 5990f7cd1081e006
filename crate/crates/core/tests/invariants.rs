// Solver invariants hold from arbitrary starts on the boundary of the region.

use proptest::prelude::*;
use riemvi::problems::{make_problem, ProblemSpec, VectorFieldProblem};
use riemvi::solvers::{run, Instrument, Method, SolverConfig};
use std::sync::OnceLock;

fn problem(name: &str) -> VectorFieldProblem {
    make_problem(&ProblemSpec::parse(name, serde_json::Value::Null).unwrap()).unwrap()
}

fn decoupled() -> &'static VectorFieldProblem {
    static P: OnceLock<VectorFieldProblem> = OnceLock::new();
    P.get_or_init(|| problem("decoupled_saddle"))
}

fn sphere() -> &'static VectorFieldProblem {
    static P: OnceLock<VectorFieldProblem> = OnceLock::new();
    P.get_or_init(|| problem("sphere_bilinear"))
}

fn checks() -> Instrument {
    Instrument {
        gaps: false,
        holonomy_probe: true,
        sandwich: true,
        proximity: true,
        ..Instrument::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reg_keeps_every_invariant(seed in any::<u64>(), which in 0usize..2) {
        let prob = [decoupled(), sphere()][which];
        let z0 = prob.initial_point(seed);
        let cfg = SolverConfig::new(Method::Reg, 300).with_instrument(checks());
        let trace = run(prob, &cfg, &z0).unwrap();
        prop_assert!(trace.abort.is_none());
        prop_assert_eq!(trace.violations.total(), 0);
    }

    #[test]
    fn rpeg_potential_never_increases(seed in any::<u64>(), which in 0usize..2) {
        let prob = [decoupled(), sphere()][which];
        let z0 = prob.initial_point(seed);
        let cfg = SolverConfig::new(Method::Rpeg, 300)
            .with_instrument(Instrument { gaps: false, ..Instrument::default() });
        let trace = run(prob, &cfg, &z0).unwrap();
        prop_assert_eq!(trace.violations.lyapunov, 0);
        prop_assert_eq!(trace.violations.boundedness, 0);
    }

    #[test]
    fn sequential_and_parallel_agree_on_validators(seed in any::<u64>()) {
        use riemvi::geometry::sweep::{sweep_one, Lemma};
        use riemvi::{Execution, Manifold};
        let m = Manifold::sphere(2);
        let a = sweep_one(&m, 0, Lemma::CosineUpper, 200, 0.5, seed, Execution::Sequential);
        let b = sweep_one(&m, 0, Lemma::CosineUpper, 200, 0.5, seed, Execution::Parallel);
        prop_assert_eq!(a.valid, b.valid);
        prop_assert_eq!(a.failures, b.failures);
        prop_assert_eq!(a.worst_residual.to_bits(), b.worst_residual.to_bits());
    }
}
