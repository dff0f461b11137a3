use nalgebra::DMatrix;

use super::{coin, frobenius_inner, left_probability, split, validate_inputs, QuadraticSampler};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::signal::C64;

#[derive(Debug, Clone)]
struct Node {
    lo: usize,
    hi: usize,
    children: Option<(usize, usize)>,
    /// `Σ_{i=lo}^{hi} α_i v_i v_i*`, column-major `k×k`.
    v: Vec<C64>,
}

/// One aggregate matrix per tree node; O(nk²) storage, O(k² log n) queries.
#[derive(Debug, Clone)]
pub struct QuadraticFormTree {
    n: usize,
    k: usize,
    nodes: Vec<Node>,
}

impl QuadraticFormTree {
    pub fn build(vectors: &[Vec<C64>], coefficients: &[f64]) -> Result<Self> {
        let k = validate_inputs(vectors, coefficients)?;
        let n = vectors.len();
        let mut tree = Self {
            n,
            k,
            nodes: Vec::with_capacity(2 * n - 1),
        };
        tree.build_range(vectors, coefficients, 0, n - 1);
        Ok(tree)
    }

    fn build_range(&mut self, vectors: &[Vec<C64>], alpha: &[f64], lo: usize, hi: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node {
            lo,
            hi,
            children: None,
            v: Vec::new(),
        });
        let k = self.k;
        if lo == hi {
            let (v, a) = (&vectors[lo], alpha[lo]);
            let mut m = vec![C64::new(0.0, 0.0); k * k];
            for j in 0..k {
                for i in 0..k {
                    m[i + j * k] = v[i] * v[j].conj() * a;
                }
            }
            self.nodes[id].v = m;
        } else {
            let mid = split(lo, hi);
            let left = self.build_range(vectors, alpha, lo, mid);
            let right = self.build_range(vectors, alpha, mid + 1, hi);
            let sum = self.nodes[left]
                .v
                .iter()
                .zip(&self.nodes[right].v)
                .map(|(a, b)| a + b)
                .collect();
            self.nodes[id].children = Some((left, right));
            self.nodes[id].v = sum;
        }
        id
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of levels, counting the root as level one.
    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], id: usize) -> usize {
            match nodes[id].children {
                None => 1,
                Some((l, r)) => 1 + go(nodes, l).max(go(nodes, r)),
            }
        }
        go(&self.nodes, 0)
    }

    /// Aggregate matrix of node `id` (root is 0).
    pub fn node_matrix(&self, id: usize) -> DMatrix<C64> {
        DMatrix::from_column_slice(self.k, self.k, &self.nodes[id].v)
    }

    pub fn node_children(&self, id: usize) -> Option<(usize, usize)> {
        self.nodes[id].children
    }

    pub fn node_range(&self, id: usize) -> (usize, usize) {
        (self.nodes[id].lo, self.nodes[id].hi)
    }

    pub fn storage_entries(&self) -> usize {
        self.nodes.iter().map(|n| n.v.len()).sum()
    }

    /// Sample and report how many `k×k` inner products the walk evaluated.
    pub fn sample_counted(&self, query: &DMatrix<C64>, rng: &mut RngStream) -> Result<(usize, usize)> {
        let a = query.as_slice();
        let mut id = 0;
        let mut products = 0;
        while let Some((l, r)) = self.nodes[id].children {
            let wl = frobenius_inner(&self.nodes[l].v, a);
            let wr = frobenius_inner(&self.nodes[r].v, a);
            products += 2;
            let p = left_probability(wl, wr).ok_or(Error::ZeroMass)?;
            id = if coin(rng, p) { l } else { r };
        }
        Ok((self.nodes[id].lo, products))
    }
}

impl QuadraticSampler for QuadraticFormTree {
    fn len(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        self.k
    }

    fn sample_trusted(&self, query: &DMatrix<C64>, rng: &mut RngStream) -> Result<usize> {
        self.sample_counted(query, rng).map(|(i, _)| i)
    }

    fn leaf_probability_trusted(&self, query: &DMatrix<C64>, index: usize) -> Result<f64> {
        let a = query.as_slice();
        let mut id = 0;
        let mut prob = 1.0;
        while let Some((l, r)) = self.nodes[id].children {
            let wl = frobenius_inner(&self.nodes[l].v, a);
            let wr = frobenius_inner(&self.nodes[r].v, a);
            let p = left_probability(wl, wr).ok_or(Error::ZeroMass)?;
            if index <= self.nodes[l].hi {
                prob *= p;
                id = l;
            } else {
                prob *= 1.0 - p;
                id = r;
            }
        }
        Ok(prob)
    }

    fn total(&self) -> DMatrix<C64> {
        self.node_matrix(0)
    }
}
