//! Fourier dictionaries `ψ_k(z) = z^k` on the circle and their tensor-product
//! analogue `e^{i(k₁φ₁ + k₂φ₂)}` on the torus.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::PhasePoint;
use crate::error::{EdmdError, Result};
use crate::sampling::SampleSet;

/// A symmetric, index-ordered family of Fourier modes.
///
/// In 1D the modes are `k = −N̄, …, N̄` ascending; in 2D they are the pairs
/// `(k₁, k₂) ∈ {−N̄, …, N̄}²` in row-major order. In both cases the mode at
/// position `i` is the negation of the mode at position `len − 1 − i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dictionary {
    dimension: usize,
    nbar: usize,
    modes: Vec<[i32; 2]>,
}

/// Builds the full Fourier dictionary with `|k| ≤ nbar` in every coordinate.
pub fn fourier_dictionary(nbar: usize, dimension: usize) -> Result<Dictionary> {
    let n = nbar as i32;
    let modes = match dimension {
        1 => (-n..=n).map(|k| [k, 0]).collect(),
        2 => (-n..=n).flat_map(|k1| (-n..=n).map(move |k2| [k1, k2])).collect(),
        d => {
            return Err(EdmdError::InvalidParameter(format!(
                "dictionary dimension must be 1 or 2, got {d}"
            )))
        }
    };
    Ok(Dictionary {
        dimension,
        nbar,
        modes,
    })
}

impl Dictionary {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn nbar(&self) -> usize {
        self.nbar
    }

    /// Number of observables `N`.
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Mode indices; the second component is zero for 1D dictionaries.
    pub fn modes(&self) -> &[[i32; 2]] {
        &self.modes
    }

    /// Position of the mode `−k` given the position of `k`.
    pub fn negated(&self, index: usize) -> usize {
        self.len() - 1 - index
    }

    /// Position of the given mode, if present.
    pub fn position(&self, mode: [i32; 2]) -> Option<usize> {
        self.modes.iter().position(|&m| m == mode)
    }

    /// Evaluates every observable at every point: entry `(k, m)` is
    /// `ψ_k(points[m])`.
    pub fn evaluate(&self, points: &[PhasePoint]) -> Result<DataMatrix> {
        if let Some(bad) = points.iter().find(|p| p.dimension() != self.dimension) {
            return Err(EdmdError::dims(
                format!("{}-dimensional points", self.dimension),
                format!("{}-dimensional point", bad.dimension()),
            ));
        }
        let n = self.len();
        let mut entries = DMatrix::zeros(n, points.len());
        for (m, point) in points.iter().enumerate() {
            let [p1, p2] = point.angles();
            let mut column = entries.column_mut(m);
            for (k, mode) in self.modes.iter().enumerate() {
                let phase = if self.dimension == 1 {
                    mode[0] as f64 * p1
                } else {
                    mode[0] as f64 * p1 + mode[1] as f64 * p2
                };
                column[k] = Complex64::cis(phase);
            }
        }
        Ok(DataMatrix(entries))
    }
}

/// Observable evaluations: rows are modes, columns are samples.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix(pub DMatrix<Complex64>);

impl DataMatrix {
    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }
}

/// Evaluates the dictionary on the sample points (the `X` matrix).
pub fn evaluate_dictionary(dict: &Dictionary, samples: &SampleSet) -> Result<DataMatrix> {
    dict.evaluate(samples.points())
}

/// Evaluates the dictionary on the sample images (the `Y` matrix).
pub fn evaluate_dictionary_images(dict: &Dictionary, samples: &SampleSet) -> Result<DataMatrix> {
    dict.evaluate(samples.images())
}
