use hyperdiff::partition::{induced_partition, DEFAULT_TAU_GROUP};
use hyperdiff::quadratic::{grad_q_sigma, quadratic_form, Permutation};
use hyperdiff::random::{self, GraphShape};
use hyperdiff::{DirectedHypergraph, Hyperedge, WeightMode};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::Rng;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn gradient_examples() {
    let arc = DirectedHypergraph::with_unit_weights(2, vec![Hyperedge::new(vec![0], vec![1], 1.0)], &[]).unwrap();
    let sigma = Permutation::sorted_by(&[1.0, 0.0]);
    assert_eq!(grad_q_sigma(&arc, &[1.0, 0.0], &sigma, DEFAULT_TAU_GROUP).unwrap(), vec![1.0, -1.0]);

    let fan = DirectedHypergraph::with_unit_weights(3, vec![Hyperedge::new(vec![0, 1], vec![2], 1.0)], &[]).unwrap();
    let a_before_b = Permutation::from_order(vec![2, 0, 1]).unwrap();
    assert_eq!(grad_q_sigma(&fan, &[1.0, 1.0, 0.0], &a_before_b, DEFAULT_TAU_GROUP).unwrap(), vec![0.0, 1.0, -1.0]);

    let pinned = DirectedHypergraph::with_unit_weights(2, vec![Hyperedge::new(vec![0], vec![1], 1.0)], &[0]).unwrap();
    let g = grad_q_sigma(&pinned, &[1.0, 0.0], &Permutation::sorted_by(&[1.0, 0.0]), DEFAULT_TAU_GROUP).unwrap();
    assert_eq!(g[1], -1.0);
}

#[test]
fn inconsistent_permutation_rejected() {
    let arc = DirectedHypergraph::with_unit_weights(2, vec![Hyperedge::new(vec![0], vec![1], 1.0)], &[]).unwrap();
    let wrong = Permutation::from_order(vec![0, 1]).unwrap();
    assert!(grad_q_sigma(&arc, &[1.0, 0.0], &wrong, DEFAULT_TAU_GROUP).is_err());
}

/// Every total order consistent with the ordered classes of `f`.
fn consistent_orders(f: &[f64]) -> Vec<Vec<usize>> {
    let mut orders = vec![Vec::new()];
    for class in induced_partition(f, DEFAULT_TAU_GROUP).classes() {
        let perms = permutations(class);
        orders = orders
            .into_iter()
            .flat_map(|prefix| {
                perms.iter().map(move |p| {
                    let mut o = prefix.clone();
                    o.extend(p);
                    o
                })
            })
            .collect();
    }
    orders
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

fn unit_instance(seed: u64) -> (DirectedHypergraph, Vec<f64>) {
    let mut rng = random::rng(seed);
    let mut shape = GraphShape::sample(&mut rng, 8, 10, WeightMode::Unit);
    shape.stationary = rng.random_range(0..shape.n);
    let h = random::hypergraph(&mut rng, &shape);
    let f = random::vector(&mut rng, h.n());
    (h, f)
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 48,
        rng_seed: RngSeed::Fixed(20240531),
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn subgradient_inequality(seed in any::<u64>()) {
        let (h, f) = unit_instance(seed);
        let orders = consistent_orders(&f);
        let mut rng = random::stream(seed, 1);
        let q = quadratic_form(&h, &f);
        for order in orders.iter().take(24) {
            let grad = grad_q_sigma(&h, &f, &Permutation::from_order(order.clone()).unwrap(), DEFAULT_TAU_GROUP).unwrap();
            for _ in 0..100 {
                let mut g = random::vector(&mut rng, h.n());
                for u in h.stationary() {
                    g[u] = f[u];
                }
                let diff: Vec<f64> = g.iter().zip(&f).map(|(a, b)| a - b).collect();
                let lhs = quadratic_form(&h, &g);
                let rhs = q + dot(&diff, &grad);
                prop_assert!(lhs >= rhs - 1e-9 * lhs.max(1.0), "Q(g) = {lhs} < {rhs}");
            }
        }
    }

    #[test]
    fn distinct_coordinates_fix_the_gradient(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let shape = GraphShape::sample(&mut rng, 8, 10, WeightMode::Unit);
        let h = random::hypergraph(&mut rng, &shape);
        let f = random::normal_vector(&mut rng, h.n());
        let orders = consistent_orders(&f);
        prop_assert_eq!(orders.len(), 1);
        let sigma = Permutation::sorted_by(&f);
        prop_assert_eq!(sigma.order(), &orders[0][..]);
        let grad = grad_q_sigma(&h, &f, &sigma, DEFAULT_TAU_GROUP).unwrap();
        let step = 1e-6;
        for u in 0..h.n() {
            let mut up = f.clone();
            let mut down = f.clone();
            up[u] += step;
            down[u] -= step;
            let fd = (quadratic_form(&h, &up) - quadratic_form(&h, &down)) / (2.0 * step);
            prop_assert!((fd - grad[u]).abs() <= 1e-6 * grad[u].abs().max(1.0), "u={u}: {fd} vs {}", grad[u]);
        }
    }
}
