//! Undirected communication graphs and their Laplacians.
//!
//! Vertices are 0-based here; configuration files and CSV headers use
//! 1-based agent numbers.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::consensus::StateMatrix;
use crate::error::{Error, Result};
use crate::numerics::MatN;

/// Default proximity threshold (m) for distance-weighted edge growth.
pub const DEFAULT_PROXIMITY_THRESHOLD: f64 = 10.0;

/// An unordered vertex pair, stored with the smaller index first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge(usize, usize);

impl Edge {
    pub fn new(i: usize, j: usize) -> Result<Self> {
        if i == j {
            return Err(Error::Domain(format!("self-loop at vertex {}", i + 1)));
        }
        Ok(Edge(i.min(j), i.max(j)))
    }

    /// Builds an edge from 1-based agent numbers.
    pub fn one_based(i: usize, j: usize) -> Result<Self> {
        if i == 0 || j == 0 {
            return Err(Error::Domain("agent numbers start at 1".into()));
        }
        Edge::new(i - 1, j - 1)
    }

    pub fn endpoints(&self) -> (usize, usize) {
        (self.0, self.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightPolicy {
    Unweighted,
    /// Fixed positive weight per edge.
    StaticWeights(BTreeMap<Edge, f64>),
    /// Weight equals the current inter-agent distance; pairs closer than
    /// `threshold` gain a permanent edge.
    DistanceWeighted { threshold: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    n: usize,
    edges: BTreeSet<Edge>,
    policy: WeightPolicy,
}

impl Network {
    pub fn new(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("network needs at least one agent".into()));
        }
        let edges: BTreeSet<Edge> = edges.into_iter().collect();
        if let Some(e) = edges.iter().find(|e| e.1 >= n) {
            return Err(Error::Domain(format!(
                "edge {{{}, {}}} references an agent beyond n = {n}",
                e.0 + 1,
                e.1 + 1
            )));
        }
        Ok(Network {
            n,
            edges,
            policy: WeightPolicy::Unweighted,
        })
    }

    /// Builds a network from 1-based agent pairs.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let edges = pairs
            .iter()
            .map(|&(i, j)| Edge::one_based(i, j))
            .collect::<Result<Vec<_>>>()?;
        Network::new(n, edges)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push(Edge(i, j));
            }
        }
        Network::new(n, edges)
    }

    /// Attaches fixed weights. Every edge needs exactly one positive weight.
    pub fn with_static_weights(mut self, weights: BTreeMap<Edge, f64>) -> Result<Self> {
        for e in &self.edges {
            match weights.get(e) {
                Some(w) if *w > 0.0 && w.is_finite() => {}
                Some(w) => {
                    return Err(Error::Domain(format!(
                        "weight {w} on edge {{{}, {}}} must be positive",
                        e.0 + 1,
                        e.1 + 1
                    )))
                }
                None => {
                    return Err(Error::Domain(format!(
                        "edge {{{}, {}}} has no weight",
                        e.0 + 1,
                        e.1 + 1
                    )))
                }
            }
        }
        if let Some(e) = weights.keys().find(|e| !self.edges.contains(e)) {
            return Err(Error::Domain(format!(
                "weight given for missing edge {{{}, {}}}",
                e.0 + 1,
                e.1 + 1
            )));
        }
        self.policy = WeightPolicy::StaticWeights(weights);
        Ok(self)
    }

    /// Fixed weights equal to the pairwise distances in `positions`.
    pub fn with_initial_distance_weights(self, positions: &StateMatrix) -> Result<Self> {
        self.check_positions(positions)?;
        let weights = self
            .edges
            .iter()
            .map(|&e| (e, positions.distance(e.0, e.1)))
            .collect();
        self.with_static_weights(weights)
    }

    pub fn with_distance_weights(mut self, threshold: f64) -> Result<Self> {
        if threshold.is_nan() || threshold < 0.0 {
            return Err(Error::Domain(format!(
                "proximity threshold must be nonnegative, got {threshold}"
            )));
        }
        self.policy = WeightPolicy::DistanceWeighted { threshold };
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn policy(&self) -> &WeightPolicy {
        &self.policy
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.edges.contains(&Edge(i.min(j), i.max(j)))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.0 == v || e.1 == v).count()
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.n * (self.n - 1) / 2
    }

    /// True when the Laplacian does not depend on agent positions.
    pub fn is_fixed(&self) -> bool {
        !matches!(self.policy, WeightPolicy::DistanceWeighted { .. })
    }

    fn check_positions(&self, positions: &StateMatrix) -> Result<()> {
        if positions.n() != self.n {
            return Err(Error::Dimension {
                expected: format!("{} agent rows", self.n),
                actual: format!("{} rows", positions.n()),
            });
        }
        Ok(())
    }

    /// Returns the network with every pair closer than the proximity
    /// threshold joined, together with the newly added edges. Networks
    /// without a distance policy are returned unchanged.
    pub fn grow_by_proximity(&self, positions: &StateMatrix) -> Result<(Network, Vec<Edge>)> {
        self.check_positions(positions)?;
        let WeightPolicy::DistanceWeighted { threshold } = self.policy else {
            return Ok((self.clone(), Vec::new()));
        };
        let mut added = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let e = Edge(i, j);
                if !self.edges.contains(&e) && positions.distance(i, j) < threshold {
                    added.push(e);
                }
            }
        }
        let mut grown = self.clone();
        grown.edges.extend(added.iter().copied());
        Ok((grown, added))
    }

    fn weighted_matrix(&self, weight: impl Fn(Edge) -> f64) -> MatN {
        let mut m = MatN::zeros(self.n, self.n);
        for &e in &self.edges {
            let w = weight(e);
            let (i, j) = e.endpoints();
            m[(i, j)] -= w;
            m[(j, i)] -= w;
            m[(i, i)] += w;
            m[(j, j)] += w;
        }
        m
    }
}

/// A Laplacian together with the network snapshot it was built from.
#[derive(Debug, Clone)]
pub struct Laplacian {
    pub matrix: MatN,
    pub network: Network,
    pub time: f64,
}

impl Laplacian {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Degree-minus-adjacency Laplacian for fixed (unweighted or statically
/// weighted) networks.
pub fn laplacian(net: &Network) -> Result<Laplacian> {
    let matrix = match &net.policy {
        WeightPolicy::Unweighted => net.weighted_matrix(|_| 1.0),
        WeightPolicy::StaticWeights(w) => net.weighted_matrix(|e| w[&e]),
        WeightPolicy::DistanceWeighted { .. } => {
            return Err(Error::Policy(
                "distance-weighted networks need agent positions".into(),
            ))
        }
    };
    Ok(Laplacian {
        matrix,
        network: net.clone(),
        time: 0.0,
    })
}

/// Laplacian at time `t` given agent positions (rows of `positions`).
///
/// Distance-weighted networks first gain every edge whose endpoints are
/// within the proximity threshold; the returned snapshot carries the grown
/// network.
pub fn weighted_laplacian_at(net: &Network, positions: &StateMatrix, t: f64) -> Result<Laplacian> {
    net.check_positions(positions)?;
    if net.is_fixed() {
        let mut l = laplacian(net)?;
        l.time = t;
        return Ok(l);
    }
    let (grown, _) = net.grow_by_proximity(positions)?;
    let matrix = grown.weighted_matrix(|e| positions.distance(e.0, e.1));
    Ok(Laplacian {
        matrix,
        network: grown,
        time: t,
    })
}

/// Breadth-first reachability from vertex 0.
pub fn is_connected(net: &Network) -> bool {
    let mut adjacency = vec![Vec::new(); net.n];
    for e in &net.edges {
        adjacency[e.0].push(e.1);
        adjacency[e.1].push(e.0);
    }
    let mut seen = vec![false; net.n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for &w in &adjacency[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    count == net.n
}

/// Vertices adjacent to every other vertex (degree n − 1), 0-based.
pub fn fully_connected_vertices(net: &Network) -> BTreeSet<usize> {
    (0..net.n)
        .filter(|&v| net.degree(v) == net.n - 1)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{sym_eigen, VecN};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn scenario_one() -> Network {
        Network::from_pairs(4, &[(1, 2), (2, 3), (2, 4), (3, 4)]).unwrap()
    }

    fn positions(rows: &[[f64; 3]]) -> StateMatrix {
        StateMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn unweighted_scenario_laplacians() {
        let l1 = laplacian(&scenario_one()).unwrap();
        let expected = MatN::from_row_slice(
            4,
            4,
            &[
                1., -1., 0., 0., -1., 3., -1., -1., 0., -1., 2., -1., 0., -1., -1., 2.,
            ],
        );
        assert_eq!(l1.matrix, expected);

        let net = Network::from_pairs(4, &[(1, 3), (1, 4), (2, 3)]).unwrap();
        let expected = MatN::from_row_slice(
            4,
            4,
            &[
                2., 0., -1., -1., 0., 1., -1., 0., -1., -1., 2., 0., -1., 0., 0., 1.,
            ],
        );
        assert_eq!(laplacian(&net).unwrap().matrix, expected);

        let single = Network::new(1, []).unwrap();
        assert_eq!(laplacian(&single).unwrap().matrix, MatN::zeros(1, 1));
    }

    #[test]
    fn construction_errors() {
        assert!(Edge::new(2, 2).is_err());
        assert!(Network::from_pairs(3, &[(1, 4)]).is_err());
        assert!(Network::new(0, []).is_err());
        let net = Network::from_pairs(2, &[(1, 2)]).unwrap();
        let mut w = BTreeMap::new();
        w.insert(Edge::new(0, 1).unwrap(), -1.0);
        assert!(net.clone().with_static_weights(w).is_err());
        assert!(net.clone().with_static_weights(BTreeMap::new()).is_err());
        assert!(net.with_distance_weights(-1.0).is_err());
    }

    #[test]
    fn edges_are_unordered() {
        let a = Network::from_pairs(3, &[(1, 2), (3, 2)]).unwrap();
        let b = Network::from_pairs(3, &[(2, 1), (2, 3), (1, 2)]).unwrap();
        assert_eq!(a, b);
        assert!(a.has_edge(1, 0) && a.has_edge(2, 1) && !a.has_edge(0, 2));
    }

    #[test]
    fn distance_policy_requires_positions() {
        let net = scenario_one().with_distance_weights(10.0).unwrap();
        assert!(matches!(laplacian(&net), Err(Error::Policy(_))));
    }

    #[test]
    fn initial_distance_weights_reproduce_printed_matrix() {
        let q0 = positions(&[
            [2., 16., 29.],
            [14., 20., 31.],
            [10., 1., 25.],
            [10., 14., 36.],
        ]);
        let net = scenario_one().with_distance_weights(0.0).unwrap();
        let l = weighted_laplacian_at(&net, &q0, 0.0).unwrap();
        // ‖q¹ − q²‖ = √(144 + 16 + 4)
        assert_abs_diff_eq!(l.matrix[(0, 1)], -(164f64).sqrt(), epsilon = 1e-12);
        let printed = [
            [12.8062, -12.8062, 0.0, 0.0],
            [-12.8062, 41.9036, -20.3224, -8.7750],
            [0.0, -20.3224, 37.3518, -17.0294],
            [0.0, -8.7750, -17.0294, 25.8044],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!(l.matrix[(i, j)], printed[i][j], epsilon = 1e-3);
            }
        }
        let fixed = scenario_one().with_initial_distance_weights(&q0).unwrap();
        assert_eq!(laplacian(&fixed).unwrap().matrix, l.matrix);
    }

    #[test]
    fn time_varying_initial_laplacian() {
        let q0 = positions(&[
            [16., 5., 36.],
            [19., 19., 29.],
            [12., 16., 33.],
            [14., 1., 26.],
        ]);
        let net = Network::from_pairs(4, &[(1, 3), (1, 4), (2, 3)])
            .unwrap()
            .with_distance_weights(DEFAULT_PROXIMITY_THRESHOLD)
            .unwrap();
        let l = weighted_laplacian_at(&net, &q0, 0.0).unwrap();
        let printed = [
            [23.0375, 0.0, -12.0830, -10.9545],
            [0.0, 8.6023, -8.6023, 0.0],
            [-12.0830, -8.6023, 20.6854, 0.0],
            [-10.9545, 0.0, 0.0, 10.9545],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!(l.matrix[(i, j)], printed[i][j], epsilon = 1e-3);
            }
        }
        assert_eq!(l.network.edges().len(), 3);
    }

    #[test]
    fn proximity_growth_is_monotone() {
        let q = positions(&[[0., 0., 0.], [3., 0., 0.], [20., 0., 0.]]);
        let net = Network::from_pairs(3, &[(2, 3)])
            .unwrap()
            .with_distance_weights(5.0)
            .unwrap();
        let (grown, added) = net.grow_by_proximity(&q).unwrap();
        assert_eq!(added, vec![Edge::new(0, 1).unwrap()]);
        // Edges persist once agents separate again.
        let far = positions(&[[0., 0., 0.], [30., 0., 0.], [60., 0., 0.]]);
        let (regrown, added) = grown.grow_by_proximity(&far).unwrap();
        assert!(added.is_empty());
        assert_eq!(regrown.edges().len(), 2);
    }

    #[test]
    fn coincident_agents_give_zero_matrix() {
        let q = positions(&[[1., 2., 3.]; 3]);
        let net = Network::new(3, [])
            .unwrap()
            .with_distance_weights(10.0)
            .unwrap();
        let l = weighted_laplacian_at(&net, &q, 0.0).unwrap();
        assert_eq!(l.matrix, MatN::zeros(3, 3));
        assert!(l.network.is_complete());
    }

    #[test]
    fn weighted_laplacian_dimension_error() {
        let q = positions(&[[0., 0., 0.]; 3]);
        assert!(matches!(
            weighted_laplacian_at(&scenario_one(), &q, 0.0),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn connectivity() {
        assert!(is_connected(&scenario_one()));
        assert!(!is_connected(&Network::from_pairs(4, &[(1, 2)]).unwrap()));
        assert!(is_connected(&Network::new(1, []).unwrap()));
    }

    #[test]
    fn fully_connected() {
        assert_eq!(
            fully_connected_vertices(&scenario_one()),
            BTreeSet::from([1])
        );
        assert_eq!(
            fully_connected_vertices(&Network::complete(3).unwrap()),
            BTreeSet::from([0, 1, 2])
        );
        let path = Network::from_pairs(4, &[(1, 2), (2, 3), (3, 4)]).unwrap();
        assert!(fully_connected_vertices(&path).is_empty());
    }

    #[test]
    fn eigenvalue_n_multiplicity_counts_fully_connected_vertices() {
        let star = Network::from_pairs(4, &[(1, 2), (1, 3), (1, 4)]).unwrap();
        for net in [Network::complete(4).unwrap(), star, scenario_one()] {
            let e = sym_eigen(&laplacian(&net).unwrap().matrix).unwrap();
            let n = net.n() as f64;
            assert!(e.values.iter().all(|&l| l >= -1e-12 && l <= n + 1e-12));
            let multiplicity = e.values.iter().filter(|&&l| (l - n).abs() < 1e-9).count();
            // A complete graph has n fully connected vertices but λ = n only n − 1 times.
            let full = fully_connected_vertices(&net).len();
            assert_eq!(multiplicity, full.min(net.n() - 1));
        }
    }

    #[test]
    fn fully_connected_vertex_eigenvector() {
        let net = scenario_one();
        let l = laplacian(&net).unwrap().matrix;
        let n = net.n();
        for j in fully_connected_vertices(&net) {
            let mut u = VecN::from_element(n, 1.0);
            u[j] -= n as f64;
            assert!((&l * &u - &u * n as f64).amax() <= 1e-12);
        }
    }

    fn random_network() -> impl Strategy<Value = Network> {
        (2usize..8).prop_flat_map(|n| {
            prop::collection::vec(prop::bool::ANY, n * (n - 1) / 2).prop_map(move |mask| {
                let mut edges = Vec::new();
                let mut k = 0;
                for i in 0..n {
                    for j in (i + 1)..n {
                        if mask[k] {
                            edges.push(Edge::new(i, j).unwrap());
                        }
                        k += 1;
                    }
                }
                Network::new(n, edges).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn laplacian_invariants(net in random_network()) {
            let l = laplacian(&net).unwrap().matrix;
            let n = net.n();
            prop_assert_eq!(&l, &l.transpose());
            let ones = VecN::from_element(n, 1.0);
            prop_assert!((&l * ones).amax() <= 1e-12);
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        prop_assert!(l[(i, j)] <= 0.0);
                    }
                }
            }
            let e = sym_eigen(&l).unwrap();
            prop_assert!(e.values.iter().all(|&v| v <= n as f64 + 1e-9));
            if is_connected(&net) {
                prop_assert!(e.values[1] > 1e-9);
            } else {
                prop_assert!(e.values[1].abs() <= 1e-9);
            }
        }
    }
}
