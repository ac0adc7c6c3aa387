//! Simple graphs with nonnegative rational edge weights.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::subset::{Subset, MAX_GROUND_SET};

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    weights: Vec<Rational>,
    neighbors: Vec<Subset>,
}

impl WeightedGraph {
    /// Validates simplicity (no loops, no repeated pairs) and nonnegativity.
    /// Edges are stored with `u < v`, in input order.
    pub fn new(n: usize, edges: Vec<(usize, usize, Rational)>) -> Result<Self> {
        if n > MAX_GROUND_SET {
            return Err(Error::GroundSetTooLarge(n));
        }
        let mut neighbors = vec![Subset::EMPTY; n];
        let mut pairs = Vec::with_capacity(edges.len());
        let mut weights = Vec::with_capacity(edges.len());
        for (a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) leaves the vertex set [0, {n})")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("loop at vertex {a}")));
            }
            if neighbors[a].contains(b) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({a}, {b})")));
            }
            if w.is_negative() {
                return Err(Error::InvalidGraph(format!("negative weight on ({a}, {b})")));
            }
            neighbors[a] = neighbors[a].with(b);
            neighbors[b] = neighbors[b].with(a);
            pairs.push((a.min(b), a.max(b)));
            weights.push(w);
        }
        Ok(WeightedGraph { n, edges: pairs, weights, neighbors })
    }

    /// Every edge gets weight 1.
    pub fn unweighted(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::new(n, edges.iter().map(|&(a, b)| (a, b, Rational::one())).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn edge_set(&self, e: usize) -> Subset {
        let (a, b) = self.edges[e];
        Subset::singleton(a).with(b)
    }

    pub fn neighbors(&self, v: usize) -> Subset {
        self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn vertices(&self) -> Subset {
        Subset::full(self.n)
    }

    /// `lambda(G)`.
    pub fn total_weight(&self) -> Rational {
        self.weights.iter().fold(Rational::zero(), |a, w| a + w)
    }

    /// `lambda(G[U])`: weight of edges with both ends in `u`.
    pub fn induced_weight(&self, u: Subset) -> Rational {
        self.edges
            .iter()
            .zip(&self.weights)
            .filter(|((a, b), _)| u.contains(*a) && u.contains(*b))
            .fold(Rational::zero(), |acc, (_, w)| acc + w)
    }

    /// `lambda(D(U)) = sum_e lambda_e |e ∩ U| / 2`.
    pub fn boundary_weight(&self, u: Subset) -> Rational {
        let twice = self
            .edges
            .iter()
            .zip(&self.weights)
            .map(|((a, b), w)| w * rational::from_u64(u.contains(*a) as u64 + u.contains(*b) as u64))
            .fold(Rational::zero(), |acc, x| acc + x);
        twice / rational::int(2)
    }

    /// `|G[U]|`, the number of induced edges.
    pub fn induced_edges(&self, u: Subset) -> usize {
        u.iter().map(|v| (self.neighbors[v].intersection(u)).len()).sum::<usize>() / 2
    }

    /// `2|D(U)| = sum_{v in U} d_v`.
    pub fn twice_boundary_count(&self, u: Subset) -> usize {
        u.iter().map(|v| self.degree(v)).sum()
    }

    /// `lambda(nabla_v)`, the weight incident to `v`.
    pub fn incident_weight(&self, v: usize) -> Rational {
        self.edges
            .iter()
            .zip(&self.weights)
            .filter(|((a, b), _)| *a == v || *b == v)
            .fold(Rational::zero(), |acc, (_, w)| acc + w)
    }

    /// The subgraph on the same vertex set keeping the listed edges, unit weights.
    pub fn edge_subgraph(&self, edge_ids: &[usize]) -> WeightedGraph {
        let edges: Vec<(usize, usize)> = edge_ids.iter().map(|&e| self.edges[e]).collect();
        WeightedGraph::unweighted(self.n, &edges).expect("subgraph of a simple graph is simple")
    }

    pub fn with_weights(&self, weights: Vec<Rational>) -> WeightedGraph {
        assert_eq!(weights.len(), self.edges.len());
        WeightedGraph { weights, ..self.clone() }
    }

    /// Scales weights to max 1, then rounds each positive weight down to the
    /// largest `2^-i` (`i >= 1`) not above it.
    pub fn round_down_dyadic(&self) -> Result<DyadicRounding> {
        let max = self.weights.iter().max().cloned().unwrap_or_else(Rational::zero);
        if !max.is_positive() {
            return Err(Error::ZeroWeights);
        }
        let scale = Rational::one() / &max;
        let scaled: Vec<Rational> = self.weights.iter().map(|w| w * &scale).collect();
        let mut classes: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        let mut rounded = Vec::with_capacity(scaled.len());
        for (e, w) in scaled.iter().enumerate() {
            if w.is_zero() {
                rounded.push(Rational::zero());
                continue;
            }
            let i = dyadic_class(w);
            classes.entry(i).or_default().push(e);
            rounded.push(rational::pow2(-(i as i64)));
        }
        Ok(DyadicRounding {
            scale,
            scaled: self.with_weights(scaled),
            rounded: self.with_weights(rounded),
            decomposition: DyadicDecomposition { classes },
        })
    }

    /// Integer weights `lambda_e * denominator` when they fit in `u64`.
    pub fn integer_weights(&self) -> Option<IntegerWeights> {
        let den = rational::common_denominator(&self.weights);
        let mut w = Vec::with_capacity(self.weights.len());
        for x in &self.weights {
            let v = (x * Rational::from_integer(den.clone())).to_integer();
            w.push(v.to_u64()?);
        }
        w.iter().try_fold(0u64, |acc, &x| acc.checked_add(x))?;
        Some(IntegerWeights { denominator: den, weights: w })
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            n: self.n,
            edges: self
                .edges
                .iter()
                .zip(&self.weights)
                .map(|(&(a, b), w)| (a, b, Some(rational::format_rational(w))))
                .collect(),
        }
    }
}

/// Index `i >= 1` with `2^-i <= w < 2^(1-i)`, except `w = 1` maps to `i = 1`.
fn dyadic_class(w: &Rational) -> u32 {
    debug_assert!(w.is_positive() && w <= &Rational::one());
    let mut i = (-rational::ceil_log2(w)).max(1) as u32;
    if &rational::pow2(-(i as i64)) > w {
        i += 1;
    }
    i
}

/// Weights over a common denominator, for fast exhaustive sweeps.
#[derive(Clone, Debug)]
pub struct IntegerWeights {
    pub denominator: BigInt,
    pub weights: Vec<u64>,
}

#[derive(Clone, Debug)]
pub struct DyadicRounding {
    /// Factor applied to the input weights before rounding.
    pub scale: Rational,
    pub scaled: WeightedGraph,
    pub rounded: WeightedGraph,
    pub decomposition: DyadicDecomposition,
}

/// `G_i = {e : lambda'(e) = 2^-i}` for each occupied class `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicDecomposition {
    pub classes: BTreeMap<u32, Vec<usize>>,
}

impl DyadicDecomposition {
    pub fn theta(i: u32) -> Rational {
        rational::pow2(-(i as i64))
    }

    /// `w_i = theta_i |G_i|`.
    pub fn class_weight(&self, i: u32) -> Rational {
        Self::theta(i) * rational::from_u64(self.classes.get(&i).map_or(0, Vec::len) as u64)
    }

    /// `sum_i theta_i |H ∩ G_i|` for an edge subset `H` given by edge ids.
    pub fn weight_of(&self, edge_ids: &[usize]) -> Rational {
        let mut total = Rational::zero();
        for (&i, members) in &self.classes {
            let hits = edge_ids.iter().filter(|e| members.contains(e)).count();
            total += Self::theta(i) * rational::from_u64(hits as u64);
        }
        total
    }
}

/// On-disk graph: `{"n": int, "edges": [[u, v, "num/den"], ...]}`; the
/// weight may be omitted (weight 1).
#[derive(Clone, Debug, PartialEq)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<(usize, usize, Option<String>)>,
}

impl Serialize for GraphFile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let edges: Vec<Value> = self
            .edges
            .iter()
            .map(|(a, b, w)| match w {
                Some(w) => Value::from(vec![Value::from(*a), Value::from(*b), Value::from(w.clone())]),
                None => Value::from(vec![*a, *b]),
            })
            .collect();
        let mut map = serde_json::Map::new();
        map.insert("n".into(), Value::from(self.n));
        map.insert("edges".into(), Value::from(edges));
        Value::Object(map).serialize(s)
    }
}

impl<'de> Deserialize<'de> for GraphFile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            edges: Vec<Vec<Value>>,
        }
        let raw = Raw::deserialize(d)?;
        let mut edges = Vec::with_capacity(raw.edges.len());
        for e in raw.edges {
            let idx = |v: &Value| v.as_u64().map(|x| x as usize).ok_or_else(|| D::Error::custom("edge endpoint must be a non-negative integer"));
            match e.as_slice() {
                [a, b] => edges.push((idx(a)?, idx(b)?, None)),
                [a, b, w] => {
                    let w = match w {
                        Value::String(s) => s.clone(),
                        Value::Number(n) => n.to_string(),
                        _ => return Err(D::Error::custom("edge weight must be a string or number")),
                    };
                    edges.push((idx(a)?, idx(b)?, Some(w)));
                }
                _ => return Err(D::Error::custom("edge must be [u, v] or [u, v, weight]")),
            }
        }
        Ok(GraphFile { n: raw.n, edges })
    }
}

impl TryFrom<&GraphFile> for WeightedGraph {
    type Error = Error;

    fn try_from(f: &GraphFile) -> Result<Self> {
        let edges = f
            .edges
            .iter()
            .map(|(a, b, w)| {
                let w = match w {
                    Some(s) => rational::parse_rational(s)?,
                    None => Rational::one(),
                };
                Ok((*a, *b, w))
            })
            .collect::<Result<Vec<_>>>()?;
        WeightedGraph::new(f.n, edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn triangle() -> WeightedGraph {
        WeightedGraph::unweighted(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn induced_weight_examples() {
        let g = triangle();
        assert_eq!(g.induced_weight(Subset::full(3)), int(3));
        assert_eq!(g.induced_weight(Subset::singleton(0)), int(0));
        let path = WeightedGraph::new(3, vec![(0, 1, rat(1, 2)), (1, 2, rat(1, 4))]).unwrap();
        assert_eq!(path.induced_weight(Subset::from_indices(3, &[0, 1]).unwrap()), rat(1, 2));
    }

    #[test]
    fn boundary_weight_examples() {
        let g = triangle();
        assert_eq!(g.boundary_weight(Subset::full(3)), g.total_weight());
        assert_eq!(g.boundary_weight(Subset::singleton(0)), int(1));
        assert_eq!(g.boundary_weight(Subset::EMPTY), int(0));
        assert_eq!(g.twice_boundary_count(Subset::singleton(0)), 2);
        assert_eq!(g.induced_edges(Subset::full(3)), 3);
    }

    #[test]
    fn rejects_non_simple_graphs() {
        assert!(WeightedGraph::unweighted(3, &[(0, 0)]).is_err());
        assert!(WeightedGraph::unweighted(3, &[(0, 1), (1, 0)]).is_err());
        assert!(WeightedGraph::unweighted(3, &[(0, 3)]).is_err());
        assert!(WeightedGraph::new(2, vec![(0, 1, int(-1))]).is_err());
    }

    #[test]
    fn dyadic_rounding_examples() {
        let single = WeightedGraph::new(2, vec![(0, 1, int(1))]).unwrap();
        let r = single.round_down_dyadic().unwrap();
        assert_eq!(r.decomposition.classes.keys().copied().collect::<Vec<_>>(), vec![1]);

        let two = WeightedGraph::new(3, vec![(0, 1, int(1)), (1, 2, rat(3, 10))]).unwrap();
        let r = two.round_down_dyadic().unwrap();
        assert_eq!(r.decomposition.classes[&1], vec![0]);
        assert_eq!(r.decomposition.classes[&2], vec![1]);
        assert_eq!(r.rounded.weights(), &[rat(1, 2), rat(1, 4)]);

        let equal = WeightedGraph::new(3, vec![(0, 1, rat(1, 2)), (1, 2, rat(1, 2))]).unwrap();
        assert_eq!(equal.round_down_dyadic().unwrap().decomposition.classes.len(), 1);
    }

    #[test]
    fn zero_weights_dropped_from_decomposition() {
        let g = WeightedGraph::new(3, vec![(0, 1, int(2)), (1, 2, int(0))]).unwrap();
        let r = g.round_down_dyadic().unwrap();
        assert_eq!(r.decomposition.classes.values().flatten().count(), 1);
        assert_eq!(r.rounded.edge_count(), 2);
        let z = WeightedGraph::new(2, vec![(0, 1, int(0))]).unwrap();
        assert!(matches!(z.round_down_dyadic(), Err(Error::ZeroWeights)));
    }

    #[test]
    fn graph_file_round_trip() {
        let json = r#"{"n": 3, "edges": [[0, 1, "1/2"], [1, 2]]}"#;
        let f: GraphFile = serde_json::from_str(json).unwrap();
        let g = WeightedGraph::try_from(&f).unwrap();
        assert_eq!(g.weights(), &[rat(1, 2), int(1)]);
        let again: GraphFile = serde_json::from_str(&serde_json::to_string(&g.to_file()).unwrap()).unwrap();
        assert_eq!(WeightedGraph::try_from(&again).unwrap(), g);
    }
}
