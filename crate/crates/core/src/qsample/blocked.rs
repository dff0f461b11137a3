use nalgebra::DMatrix;
use rand::Rng;

use super::{
    coin, frobenius_inner, left_probability, quadratic_form, split, validate_inputs,
    QuadraticSampler,
};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::signal::C64;

#[derive(Debug, Clone)]
struct Node {
    /// Block range `[lo, hi]`.
    lo: usize,
    hi: usize,
    children: Option<(usize, usize)>,
    /// `Σ α_i v_i v_i*` over the covered vectors, column-major `k×k`.
    v1: Vec<C64>,
}

/// Tree over blocks of `k` consecutive vectors.
///
/// Leaves keep the block slab `V₂ = [√α_i v_i]` so the final within-block
/// step can draw `i ∝ (V₂*AV₂)_{ii}`. When `k` does not divide `n`, the
/// remainder joins the last block, which then holds between `k` and `2k−1`
/// vectors.
#[derive(Debug, Clone)]
pub struct BlockedQuadraticFormTree {
    n: usize,
    k: usize,
    block_starts: Vec<usize>,
    nodes: Vec<Node>,
    /// One slab per block: `k × len` column-major, columns `√α_i v_i`.
    slabs: Vec<Vec<C64>>,
}

impl BlockedQuadraticFormTree {
    pub fn build(vectors: &[Vec<C64>], coefficients: &[f64]) -> Result<Self> {
        let k = validate_inputs(vectors, coefficients)?;
        let n = vectors.len();
        let blocks = (n / k).max(1);
        let mut block_starts: Vec<usize> = (0..blocks).map(|b| b * k).collect();
        block_starts.push(n);

        let slabs: Vec<Vec<C64>> = (0..blocks)
            .map(|b| {
                let mut slab = Vec::with_capacity(k * (block_starts[b + 1] - block_starts[b]));
                for i in block_starts[b]..block_starts[b + 1] {
                    let s = coefficients[i].sqrt();
                    slab.extend(vectors[i].iter().map(|x| x * s));
                }
                slab
            })
            .collect();

        let mut tree = Self {
            n,
            k,
            block_starts,
            nodes: Vec::with_capacity(2 * blocks - 1),
            slabs,
        };
        tree.build_range(0, blocks - 1);
        Ok(tree)
    }

    fn build_range(&mut self, lo: usize, hi: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node {
            lo,
            hi,
            children: None,
            v1: Vec::new(),
        });
        if lo == hi {
            self.nodes[id].v1 = self.leaf_gram(lo);
        } else {
            let mid = split(lo, hi);
            let left = self.build_range(lo, mid);
            let right = self.build_range(mid + 1, hi);
            let sum = self.nodes[left]
                .v1
                .iter()
                .zip(&self.nodes[right].v1)
                .map(|(a, b)| a + b)
                .collect();
            self.nodes[id].children = Some((left, right));
            self.nodes[id].v1 = sum;
        }
        id
    }

    /// `V₂ V₂*` for block `b`.
    fn leaf_gram(&self, b: usize) -> Vec<C64> {
        let slab = self.slab_matrix(b);
        let g = &slab * slab.adjoint();
        g.as_slice().to_vec()
    }

    pub fn blocks(&self) -> usize {
        self.slabs.len()
    }

    /// The raw `k × len` slab `V₂` of block `b`.
    pub fn slab_matrix(&self, b: usize) -> DMatrix<C64> {
        let len = self.block_starts[b + 1] - self.block_starts[b];
        DMatrix::from_column_slice(self.k, len, &self.slabs[b])
    }

    /// `V₁` of the leaf holding block `b`.
    pub fn leaf_v1(&self, b: usize) -> DMatrix<C64> {
        let id = self
            .nodes
            .iter()
            .position(|n| n.children.is_none() && n.lo == b)
            .expect("every block has a leaf");
        DMatrix::from_column_slice(self.k, self.k, &self.nodes[id].v1)
    }

    pub fn storage_entries(&self) -> usize {
        self.nodes.iter().map(|n| n.v1.len()).sum::<usize>()
            + self.slabs.iter().map(Vec::len).sum::<usize>()
    }

    /// Diagonal of `V₂*AV₂` for block `b`, clamped at zero.
    fn block_weights(&self, b: usize, query: &DMatrix<C64>) -> Vec<f64> {
        self.slabs[b]
            .chunks(self.k)
            .map(|col| quadratic_form(col, query).max(0.0))
            .collect()
    }

    fn descend(&self, query: &DMatrix<C64>, mut choose: impl FnMut(usize, usize, f64) -> bool) -> Result<usize> {
        let a = query.as_slice();
        let mut id = 0;
        while let Some((l, r)) = self.nodes[id].children {
            let wl = frobenius_inner(&self.nodes[l].v1, a);
            let wr = frobenius_inner(&self.nodes[r].v1, a);
            let p = left_probability(wl, wr).ok_or(Error::ZeroMass)?;
            id = if choose(l, r, p) { l } else { r };
        }
        Ok(self.nodes[id].lo)
    }
}

impl QuadraticSampler for BlockedQuadraticFormTree {
    fn len(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        self.k
    }

    fn sample_trusted(&self, query: &DMatrix<C64>, rng: &mut RngStream) -> Result<usize> {
        let block = self.descend(query, |_, _, p| coin(rng, p))?;
        let weights = self.block_weights(block, query);
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroMass);
        }
        let mut target = rng.random::<f64>() * total;
        let mut pick = weights.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            if target < *w {
                pick = i;
                break;
            }
            target -= w;
        }
        // Round-off can leave `target` just past the last positive weight.
        while weights[pick] == 0.0 && pick > 0 {
            pick -= 1;
        }
        Ok(self.block_starts[block] + pick)
    }

    fn leaf_probability_trusted(&self, query: &DMatrix<C64>, index: usize) -> Result<f64> {
        let block = self.block_starts.partition_point(|&s| s <= index) - 1;
        let mut prob = 1.0;
        self.descend(query, |l, _, p| {
            if block <= self.nodes[l].hi {
                prob *= p;
                true
            } else {
                prob *= 1.0 - p;
                false
            }
        })?;
        let weights = self.block_weights(block, query);
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroMass);
        }
        Ok(prob * weights[index - self.block_starts[block]] / total)
    }

    fn total(&self) -> DMatrix<C64> {
        DMatrix::from_column_slice(self.k, self.k, &self.nodes[0].v1)
    }
}
