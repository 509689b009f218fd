use nalgebra::DMatrix;
use qcert::correlations::CorrelationTable;
use qcert::pauli::build_graph;
use qcert::sdp::{
    build_reduced_feasibility, build_theta, build_theta_body_feasibility, build_theta_sym, FeasibilityOptions, Graph,
    SdpInstance, Term,
};
use qcert::solver::{dual_slack, solve, SolveOptions, Status};

fn theta(g: &Graph) -> f64 {
    let sol = solve(&build_theta(g).unwrap(), &SolveOptions::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal, "{:?}", sol.summary());
    sol.primal_value
}

fn optimum(inst: &SdpInstance) -> f64 {
    let sol = solve(inst, &SolveOptions::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal, "{}: {:?}", inst.metadata, sol.summary());
    sol.primal_value
}

#[test]
fn theta_of_five_cycle_is_sqrt5() {
    assert!((theta(&Graph::cycle(5)) - 5f64.sqrt()).abs() < 1e-5);
}

#[test]
fn theta_of_complete_and_empty_graphs() {
    for m in 1..=6 {
        assert!((theta(&Graph::complete(m)) - 1.0).abs() < 1e-6, "K_{m}");
        assert!((theta(&Graph::empty(m)) - m as f64).abs() < 1e-6, "empty_{m}");
    }
}

#[test]
fn theta_sym_matches_full_theta() {
    for (n, delta) in [(1, 1), (2, 1), (2, 2), (3, 2)] {
        let full = theta(&Graph::from(&build_graph(n, delta).unwrap()));
        let sym = optimum(&build_theta_sym(n, delta).unwrap());
        assert!((full - sym).abs() < 1e-5, "n={n} delta={delta}: {full} vs {sym}");
    }
}

#[test]
fn small_theta_sym_values() {
    for (n, delta, want) in [(1, 1, 1.0), (2, 1, 3.0), (2, 2, 3.0), (3, 1, 7.0)] {
        let got = optimum(&build_theta_sym(n, delta).unwrap());
        assert!((got - want).abs() < 1e-6, "n={n} delta={delta}: {got}");
    }
}

#[test]
fn pinned_diagonal_equals_deleted_vertices() {
    // Pinning the weight-1 diagonal entries of the n = 2 theta program to zero
    // gives the same optimum as removing those vertices.
    let g = build_graph(2, 1).unwrap();
    let mut pinned = build_theta(&Graph::from(&g)).unwrap();
    for (v, p) in g.vertices().iter().enumerate() {
        if p.weight() == 1 {
            pinned.add_constraint([(Term::Var(v), 1.0)], 0.0);
        }
    }
    let deleted = build_theta(&Graph::from(&build_graph(2, 2).unwrap())).unwrap();
    let (a, b) = (optimum(&pinned), optimum(&deleted));
    assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    assert!((a - optimum(&build_theta_sym(2, 2).unwrap())).abs() < 1e-6);
}

#[test]
fn theta_dual_is_feasible() {
    for g in [Graph::cycle(5), Graph::cycle(7), Graph::complete(4), Graph::from(&build_graph(2, 1).unwrap())] {
        let inst = build_theta(&g).unwrap();
        let sol = solve(&inst, &SolveOptions::default()).unwrap();
        // Gᵀy = c on the scalar variables.
        let mut gty = vec![0.0; inst.variables.len()];
        for (con, y) in inst.constraints.iter().zip(&sol.dual_y) {
            for &(t, c) in con.terms() {
                if let Term::Var(v) = t {
                    gty[v] += c * y;
                }
            }
        }
        for (v, g) in gty.iter().enumerate() {
            assert!((g - inst.objective.get(&v).copied().unwrap_or(0.0)).abs() < 1e-6);
        }
        for s in dual_slack(&inst, &sol.dual_y) {
            let lmin = s.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
            assert!(lmin > -1e-6, "{lmin}");
        }
        let by: f64 = inst.constraints.iter().zip(&sol.dual_y).map(|(c, y)| c.rhs * y).sum();
        assert!((by - sol.primal_value).abs() < 1e-6);
    }
}

#[test]
fn diagonal_programs_match_linear_programs() {
    // maximize Σ c_i x_i over x ⪰ 0 (diagonal blocks), Σ w_i x_i = 1:
    // optimum max_i c_i / w_i.
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let k = rng.random_range(2..6);
        let c: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..3.0)).collect();
        let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..2.0)).collect();
        let mut inst = SdpInstance::new("lp");
        let mut budget = Vec::new();
        for i in 0..k {
            let b = inst.add_block(format!("d{i}"), 1);
            let x = inst.add_variable(format!("x{i}"));
            inst.add_objective(x, c[i]);
            inst.add_constraint([(Term::entry(b, 0, 0), 1.0), (Term::Var(x), -1.0)], 0.0);
            budget.push((Term::Var(x), w[i]));
        }
        inst.add_constraint(budget, 1.0);
        let want = c.iter().zip(&w).map(|(c, w)| c / w).fold(f64::NEG_INFINITY, f64::max).max(0.0);
        let got = optimum(&inst);
        assert!((got - want).abs() < 1e-7, "{got} vs {want}");
    }
}

#[test]
fn solver_is_deterministic() {
    let inst = build_theta(&Graph::cycle(7)).unwrap();
    let a = solve(&inst, &SolveOptions::default()).unwrap();
    let b = solve(&inst, &SolveOptions::default()).unwrap();
    assert_eq!(a.primal_value.to_bits(), b.primal_value.to_bits());
    assert_eq!(a.x, b.x);
}

#[test]
fn inconsistent_equalities_are_infeasible() {
    let mut inst = build_theta(&Graph::cycle(5)).unwrap();
    inst.add_constraint([(Term::Var(0), 1.0)], 2.0);
    inst.add_constraint([(Term::Var(0), 1.0)], 3.0);
    assert_eq!(solve(&inst, &SolveOptions::default()).unwrap().status, Status::InfeasibleSuspected);
}

#[test]
fn psd_infeasible_instance_detected() {
    // X = [[1, 2], [2, 1]] is not PSD.
    let mut inst = SdpInstance::new("bad");
    let b = inst.add_block("X", 2);
    inst.add_constraint([(Term::entry(b, 0, 0), 1.0)], 1.0);
    inst.add_constraint([(Term::entry(b, 1, 1), 1.0)], 1.0);
    inst.add_constraint([(Term::entry(b, 0, 1), 1.0)], 2.0);
    let sol = solve(&inst, &SolveOptions::default()).unwrap();
    assert_eq!(sol.status, Status::InfeasibleSuspected);
    assert!(sol.infeasibility_margin.unwrap() > 0.5);
}

#[test]
fn n2_maximally_mixed_point_is_feasible() {
    let sums = vec![1, 0, 0].into_iter().map(|v| num_rational::BigRational::from_integer(v.into())).collect();
    let table = CorrelationTable::from_sums(sums).unwrap();
    let sol = solve(&build_reduced_feasibility(2, &table, FeasibilityOptions::default()).unwrap(), &SolveOptions::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal, "{:?}", sol.summary());
}

#[test]
fn e8_table_is_infeasible() {
    let inst = build_reduced_feasibility(7, &CorrelationTable::e8(), FeasibilityOptions::default()).unwrap();
    let sol = solve(&inst, &SolveOptions::default()).unwrap();
    assert_eq!(sol.status, Status::InfeasibleSuspected, "{:?}", sol.summary());
}

#[test]
fn theta_body_targets() {
    let solve_status = |target| solve(&build_theta_body_feasibility(7, 4, target).unwrap(), &SolveOptions::default()).unwrap();
    let hi = solve_status(128.0);
    assert_eq!(hi.status, Status::InfeasibleSuspected, "{:?}", hi.summary());
    let lo = solve_status(120.0);
    assert_eq!(lo.status, Status::Optimal, "{:?}", lo.summary());
    let small = |t| solve(&build_theta_body_feasibility(1, 1, t).unwrap(), &SolveOptions::default()).unwrap().status;
    assert_eq!(small(1.5), Status::Optimal);
    assert_eq!(small(2.5), Status::InfeasibleSuspected);
}

#[test]
fn theta_sym_e8_value() {
    let inst = build_theta_sym(7, 4).unwrap();
    assert_eq!(inst.block_dims(), vec![8, 6, 4, 2, 7, 5, 3, 1, 6, 4, 2, 5, 3, 1, 4, 2, 3, 1, 2, 1]);
    let sol = solve(&inst, &SolveOptions::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal, "{:?}", sol.summary());
    assert!((sol.primal_value - 126.8876).abs() < 1e-3, "{}", sol.primal_value);
    let _: &DMatrix<f64> = &sol.block_matrices[0];
}
