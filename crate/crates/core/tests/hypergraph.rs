use hyperdiff::hypergraph::{
    brute_force_phi_h, cut_weights, expansion, inner_product_omega, load_hypergraph, parse_hypergraph,
};
use hyperdiff::quadratic::discrepancy_ratio;
use hyperdiff::random::{self, GraphShape};
use hyperdiff::{DirectedHypergraph, Error, Hyperedge, WeightMode};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn arc() -> DirectedHypergraph {
    DirectedHypergraph::with_unit_weights(2, vec![Hyperedge::new(vec![0], vec![1], 1.0)], &[]).unwrap()
}

#[test]
fn load_unit_weights() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("arc.json");
    std::fs::write(&path, r#"{"n": 2, "weight_mode": "unit", "edges": [{"tail": [0], "head": [1], "w": 1}]}"#).unwrap();
    let h = load_hypergraph(&path).unwrap();
    assert_eq!(h.omega(), &[1.0, 1.0]);
    assert_eq!(h, arc());
}

#[test]
fn empty_head_rejected() {
    let err = parse_hypergraph(r#"{"n": 2, "edges": [{"tail": [0], "head": [], "w": 1}]}"#).unwrap_err();
    assert!(matches!(err, Error::EmptyHead { edge: 0 }));
    assert!(err.to_string().contains("empty head"));
}

#[test]
fn degree_counts_each_incident_edge() {
    let h = parse_hypergraph(
        r#"{"n": 3, "edges": [{"tail": [0], "head": [1], "w": 1}, {"tail": [2], "head": [0], "w": 1}]}"#,
    )
    .unwrap();
    assert_eq!(h.omega()[0], 2.0);
}

#[test]
fn names_and_stationary() {
    let h = parse_hypergraph(
        r#"{"vertices": ["s", "v"], "stationary": ["s"], "weight_mode": "custom", "omega": {"v": 2},
            "edges": [{"tail": ["s"], "head": ["v"], "w": 1}]}"#,
    )
    .unwrap();
    assert!(h.is_stationary(0));
    assert_eq!(h.vertex_id("v").unwrap(), 1);
    assert_eq!(inner_product_omega(&h, &[5.0, 3.0], &[5.0, 3.0]).unwrap(), 18.0);
}

#[test]
fn inner_product_examples() {
    let h = DirectedHypergraph::with_unit_weights(3, vec![Hyperedge::undirected(vec![0, 1, 2], 1.0)], &[]).unwrap();
    assert_eq!(inner_product_omega(&h, &[1.0; 3], &[1.0; 3]).unwrap(), 3.0);
    let h2 = DirectedHypergraph::with_unit_weights(2, vec![Hyperedge::undirected(vec![0, 1], 1.0)], &[]).unwrap();
    assert_eq!(inner_product_omega(&h2, &[1.0, -1.0], &[1.0, 1.0]).unwrap(), 0.0);
}

#[test]
fn expansion_examples() {
    let k2 = DirectedHypergraph::with_unit_weights(2, vec![Hyperedge::undirected(vec![0, 1], 1.0)], &[]).unwrap();
    let r = expansion(&k2, &[0]).unwrap();
    assert_eq!((r.phi_plus, r.phi_minus, r.phi), (1.0, 1.0, 1.0));

    let r = expansion(&arc(), &[1]).unwrap();
    assert_eq!((r.phi_plus, r.phi_minus, r.phi), (0.0, 1.0, 0.0));

    let two_cycle = DirectedHypergraph::with_degree_weights(
        2,
        vec![Hyperedge::new(vec![0], vec![1], 1.0), Hyperedge::new(vec![1], vec![0], 1.0)],
    )
    .unwrap();
    let r = expansion(&two_cycle, &[0]).unwrap();
    assert_eq!((r.phi_plus, r.phi_minus), (0.5, 0.5));
}

#[test]
fn brute_force_examples() {
    assert_eq!(brute_force_phi_h(&arc(), 20).unwrap().phi, 0.0);
    let k2 = DirectedHypergraph::with_degree_weights(2, vec![Hyperedge::undirected(vec![0, 1], 1.0)]).unwrap();
    assert_eq!(brute_force_phi_h(&k2, 20).unwrap().phi, 1.0);
    let two_cycle = DirectedHypergraph::with_degree_weights(
        2,
        vec![Hyperedge::new(vec![0], vec![1], 1.0), Hyperedge::new(vec![1], vec![0], 1.0)],
    )
    .unwrap();
    assert_eq!(brute_force_phi_h(&two_cycle, 20).unwrap().phi, 0.5);
}

#[test]
fn brute_force_cap() {
    let edges = (0..21).map(|i| Hyperedge::undirected(vec![i, (i + 1) % 21], 1.0)).collect();
    let h = DirectedHypergraph::with_degree_weights(21, edges).unwrap();
    assert!(matches!(brute_force_phi_h(&h, 20), Err(Error::CapExceeded { .. })));
}

fn random_graph(seed: u64, mode: WeightMode) -> DirectedHypergraph {
    let mut rng = random::rng(seed);
    let shape = GraphShape::sample(&mut rng, 10, 12, mode);
    random::hypergraph(&mut rng, &shape)
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        rng_seed: RngSeed::Fixed(20240531),
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn expansion_is_discrepancy_of_indicator(seed in any::<u64>(), mask in any::<u32>()) {
        let h = random_graph(seed, WeightMode::Degree);
        let set: Vec<usize> = (0..h.n()).filter(|&u| mask >> u & 1 == 1).collect();
        prop_assume!(!set.is_empty() && set.len() < h.n());
        let r = expansion(&h, &set).unwrap();
        let chi: Vec<f64> = (0..h.n()).map(|u| if set.contains(&u) { 1.0 } else { 0.0 }).collect();
        let neg: Vec<f64> = chi.iter().map(|x| -x).collect();
        prop_assert!((r.phi_plus - discrepancy_ratio(&h, &chi).unwrap()).abs() < 1e-12);
        prop_assert!((r.phi_minus - discrepancy_ratio(&h, &neg).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn out_cut_is_in_cut_of_complement(seed in any::<u64>(), mask in any::<u32>()) {
        let h = random_graph(seed, WeightMode::Unit);
        let inside: Vec<bool> = (0..h.n()).map(|u| mask >> u & 1 == 1).collect();
        let outside: Vec<bool> = inside.iter().map(|b| !b).collect();
        let (out_s, in_s) = cut_weights(&h, &inside);
        let (out_c, in_c) = cut_weights(&h, &outside);
        prop_assert_eq!(out_s, in_c);
        prop_assert_eq!(in_s, out_c);
    }

    #[test]
    fn degree_sum(seed in any::<u64>()) {
        let h = random_graph(seed, WeightMode::Degree);
        let expected: f64 = h.edges().iter().map(|e| e.weight * e.incident().len() as f64).sum();
        prop_assert!((h.total_weight() - expected).abs() < 1e-9 * expected.max(1.0));
    }
}
