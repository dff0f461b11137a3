use serde::{Deserialize, Serialize};

/// Which routine produced a sample set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Manual,
    Uniform,
    WeightedSketch,
    RandBss,
    Distill1d,
    DistillHd,
    DistillDiscrete,
}

/// Sample points `S` with positive weights `w` and the WBSP coefficients `α`.
///
/// For sets that did not come out of a WBSP the coefficients are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSampleSet<P> {
    pub points: Vec<P>,
    pub weights: Vec<f64>,
    pub alphas: Vec<f64>,
    pub provenance: Provenance,
}

impl<P> WeightedSampleSet<P> {
    pub fn empty() -> Self {
        Self {
            points: Vec::new(),
            weights: Vec::new(),
            alphas: Vec::new(),
            provenance: Provenance::Manual,
        }
    }

    pub fn from_points(points: Vec<P>, weights: Vec<f64>) -> Self {
        assert_eq!(points.len(), weights.len());
        Self {
            points,
            weights,
            alphas: Vec::new(),
            provenance: Provenance::Manual,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn alpha_sum(&self) -> f64 {
        self.alphas.iter().sum()
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn scale_weights(&mut self, factor: f64) {
        self.weights.iter_mut().for_each(|w| *w *= factor);
    }

    pub fn map_points<Q>(self, f: impl FnMut(P) -> Q) -> WeightedSampleSet<Q> {
        WeightedSampleSet {
            points: self.points.into_iter().map(f).collect(),
            weights: self.weights,
            alphas: self.alphas,
            provenance: self.provenance,
        }
    }
}
