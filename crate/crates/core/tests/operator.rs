use hyperdiff::hypergraph::{inner_product_omega, norm_omega};
use hyperdiff::operator::{
    derivative_tower, first_derivative, flow_assignment, laplacian, time_derivative, EdgeStatus, Level0Solver,
    OperatorConfig,
};
use hyperdiff::quadratic::quadratic_form;
use hyperdiff::random::{self, GraphShape};
use hyperdiff::{DirectedHypergraph, Hyperedge, WeightMode};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::Rng;

fn cfg() -> OperatorConfig {
    OperatorConfig::default()
}

fn unit(n: usize, edges: Vec<Hyperedge>, stationary: &[usize]) -> DirectedHypergraph {
    DirectedHypergraph::with_unit_weights(n, edges, stationary).unwrap()
}

#[test]
fn first_derivative_examples() {
    let arc = unit(2, vec![Hyperedge::new(vec![0], vec![1], 1.0)], &[]);
    assert_eq!(time_derivative(&arc, &[1.0, 0.0], &cfg()).unwrap(), vec![-1.0, 1.0]);

    let fan = unit(3, vec![Hyperedge::new(vec![0, 1], vec![2], 1.0)], &[]);
    assert_eq!(time_derivative(&fan, &[1.0, 1.0, 0.0], &cfg()).unwrap(), vec![-0.5, -0.5, 1.0]);

    // s = 0 stationary, v = 1.
    let sink = unit(2, vec![Hyperedge::new(vec![1], vec![0], 1.0)], &[0]);
    assert_eq!(time_derivative(&sink, &[0.0, 1.0], &cfg()).unwrap(), vec![0.0, -1.0]);

    let k2 = DirectedHypergraph::with_degree_weights(2, vec![Hyperedge::undirected(vec![0, 1], 1.0)]).unwrap();
    assert_eq!(laplacian(&k2, &[1.0, -1.0], &cfg()).unwrap(), vec![2.0, -2.0]);
}

#[test]
fn second_derivative_of_an_arc() {
    let arc = unit(2, vec![Hyperedge::new(vec![0], vec![1], 1.0)], &[]);
    let tower = derivative_tower(&arc, &[1.0, 0.0], 2, &cfg()).unwrap();
    assert_eq!(tower.order(), 2);
    assert_eq!(tower.derivative(1), &[-1.0, 1.0]);
    assert_eq!(tower.derivative(2), &[2.0, -2.0]);
}

#[test]
fn ambiguous_edge_becomes_active() {
    // p = 0, u = 1, v = 2.
    let h = unit(3, vec![Hyperedge::new(vec![0], vec![1], 1.0), Hyperedge::new(vec![1], vec![2], 1.0)], &[]);
    let tower = derivative_tower(&h, &[2.0, 1.0, 1.0], 1, &cfg()).unwrap();
    assert_eq!(tower.derivative(1), &[-1.0, 1.0, 0.0]);
    assert_eq!(tower.levels[0].status[1], EdgeStatus::Ambiguous);
    assert_eq!(tower.levels[1].status[1], EdgeStatus::Active);
    assert_eq!(tower.levels[1].discrepancy[1], 1.0);
}

#[test]
fn constant_vector_has_no_motion() {
    let h = unit(3, vec![Hyperedge::undirected(vec![0, 1, 2], 1.0)], &[]);
    let tower = derivative_tower(&h, &[0.3; 3], 3, &cfg()).unwrap();
    for i in 1..=3 {
        assert!(tower.derivative(i).iter().all(|&x| x == 0.0));
    }
}

#[test]
fn flow_examples() {
    let arc = unit(2, vec![Hyperedge::new(vec![0], vec![1], 1.0)], &[]);
    let fd = first_derivative(&arc, &[1.0, 0.0], &cfg()).unwrap();
    let flow = flow_assignment(&arc, &fd).unwrap();
    assert_eq!((flow.rate(0, 0), flow.rate(0, 1)), (-1.0, 1.0));

    let fan = unit(3, vec![Hyperedge::new(vec![0, 1], vec![2], 1.0)], &[]);
    let fd = first_derivative(&fan, &[1.0, 1.0, 0.0], &cfg()).unwrap();
    let flow = flow_assignment(&fan, &fd).unwrap();
    assert!((flow.rate(0, 0) + 0.5).abs() < 1e-12 && (flow.rate(0, 1) + 0.5).abs() < 1e-12);
    assert!((flow.rate(0, 2) - 1.0).abs() < 1e-12);

    // v = 0, s = 1 stationary.
    let sink = unit(2, vec![Hyperedge::new(vec![0], vec![1], 1.0)], &[1]);
    let fd = first_derivative(&sink, &[1.0, 0.0], &cfg()).unwrap();
    let flow = flow_assignment(&sink, &fd).unwrap();
    assert_eq!((flow.rate(0, 0), flow.rate(0, 1)), (-1.0, 1.0));
    assert_eq!(fd.f1[1], 0.0);
}

fn instance(seed: u64, stationary: bool) -> (DirectedHypergraph, Vec<f64>) {
    let mut rng = random::rng(seed);
    let mode = if stationary { WeightMode::Unit } else { WeightMode::Degree };
    let mut shape = GraphShape::sample(&mut rng, 10, 12, mode);
    if stationary {
        shape.stationary = rng.random_range(1..shape.n);
    }
    let h = random::hypergraph(&mut rng, &shape);
    let f = random::vector(&mut rng, h.n());
    (h, f)
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 100,
        rng_seed: RngSeed::Fixed(20240531),
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn rayleigh_identity(seed in any::<u64>()) {
        let (h, f) = instance(seed, false);
        let lf = laplacian(&h, &f, &cfg()).unwrap();
        let q = quadratic_form(&h, &f);
        prop_assert!((inner_product_omega(&h, &f, &lf).unwrap() - 2.0 * q).abs() <= 1e-9 * q.max(1.0));
    }

    #[test]
    fn kernel_and_conservation(seed in any::<u64>(), stationary in any::<bool>()) {
        let (h, f) = instance(seed, stationary);
        let ones = vec![1.0; h.n()];
        prop_assert!(norm_omega(&h, &laplacian(&h, &ones, &cfg()).unwrap()).unwrap() <= 1e-12);
        if !stationary {
            let lf = laplacian(&h, &f, &cfg()).unwrap();
            prop_assert!(inner_product_omega(&h, &ones, &lf).unwrap().abs() <= 1e-9);
        }
    }

    #[test]
    fn positive_homogeneity(seed in any::<u64>(), c in 0.1f64..10.0) {
        let (h, f) = instance(seed, false);
        let scaled: Vec<f64> = f.iter().map(|x| c * x).collect();
        let a = time_derivative(&h, &f, &cfg()).unwrap();
        let b = time_derivative(&h, &scaled, &cfg()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((c * x - y).abs() <= 1e-9 * (c * x).abs().max(1.0));
        }
    }

    #[test]
    fn level0_solvers_agree(seed in any::<u64>(), stationary in any::<bool>()) {
        let (h, f) = instance(seed, stationary);
        let enumeration = OperatorConfig { level0: Level0Solver::Enumeration, ..cfg() };
        let a = first_derivative(&h, &f, &cfg()).unwrap();
        let b = first_derivative(&h, &f, &enumeration).unwrap();
        prop_assert_eq!(a.f1, b.f1);
    }

    #[test]
    fn tower_invariants(seed in any::<u64>(), stationary in any::<bool>()) {
        let (h, f) = instance(seed, stationary);
        let tower = derivative_tower(&h, &f, 3, &cfg()).unwrap();
        for i in 0..3 {
            let (lo, hi) = (&tower.levels[i], &tower.levels[i + 1]);
            prop_assert!(hi.partition.is_refinement_of(&lo.partition));
            prop_assert_eq!(&hi.partition, &lo.partition.refine(&hi.derivative, cfg().tau_group));
            for e in 0..h.num_edges() {
                match lo.status[e] {
                    EdgeStatus::Active | EdgeStatus::Inactive => prop_assert_eq!(hi.status[e], lo.status[e]),
                    EdgeStatus::Ambiguous => {}
                }
            }
            for u in h.stationary() {
                prop_assert_eq!(hi.derivative[u], 0.0);
            }
        }
        let (l0, l1) = (&tower.levels[0], &tower.levels[1]);
        let cross: f64 = l0.active_edges().map(|e| h.edges()[e].weight * l0.discrepancy[e] * l1.discrepancy[e]).sum();
        let norm = norm_omega(&h, &l1.derivative).unwrap().powi(2);
        prop_assert!((norm + cross).abs() <= 1e-9 * norm.max(1.0));
    }

    #[test]
    fn flow_rules_hold(seed in any::<u64>(), stationary in any::<bool>()) {
        let (h, f) = instance(seed, stationary);
        let fd = first_derivative(&h, &f, &cfg()).unwrap();
        let r = flow_assignment(&h, &fd).unwrap().residuals(&h, &fd);
        prop_assert!(r.r0.max(r.r1).max(r.r2) <= 1e-9, "{r:?}");
    }
}
