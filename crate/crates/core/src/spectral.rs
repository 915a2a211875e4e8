//! Dense complex eigenproblems, spectrum ordering and oracle matching.

use std::cmp::Ordering;

use nalgebra::linalg::Schur;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::principal_arg;
use crate::error::{EdmdError, Result};

/// Relative modulus difference under which two eigenvalues count as tied.
const MODULUS_TIE: f64 = 1e-10;
const SCHUR_EPS: f64 = f64::EPSILON;
const SCHUR_MAX_ITER: usize = 10_000;

/// Eigenvalues ordered by descending modulus, with optional right
/// eigenvectors (as matrix columns) and relative residuals
/// `‖Av − λv‖ / ‖A‖_F` for unit `v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    #[serde(skip)]
    pub eigenvectors: Option<DMatrix<Complex64>>,
    pub residuals: Vec<f64>,
}

impl Spectrum {
    /// Wraps a list of values (e.g. an oracle) and applies the standard
    /// ordering.
    pub fn from_values(mut values: Vec<Complex64>) -> Self {
        let order = spectral_order(&values);
        values = order.iter().map(|&i| values[i]).collect();
        Spectrum {
            eigenvalues: values,
            eigenvectors: None,
            residuals: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Ordering permutation: descending modulus; within a modulus tie ascending
/// `|arg λ|`, then positive imaginary part first.
pub fn spectral_order(values: &[Complex64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[b]
            .norm()
            .partial_cmp(&values[a].norm())
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    // resolve ties cluster by cluster so the comparison stays transitive
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() {
            let r0 = values[idx[end - 1]].norm();
            let r1 = values[idx[end]].norm();
            if r0 - r1 > MODULUS_TIE * r0.max(1.0) {
                break;
            }
            end += 1;
        }
        idx[start..end].sort_by(|&a, &b| {
            let (va, vb) = (values[a], values[b]);
            principal_arg(va)
                .abs()
                .partial_cmp(&principal_arg(vb).abs())
                .unwrap_or(Ordering::Equal)
                .then_with(|| vb.im.partial_cmp(&va.im).unwrap_or(Ordering::Equal))
                .then(a.cmp(&b))
        });
        start = end;
    }
    idx
}

/// Symmetric permutation isolating eigenvalues that can be read off without
/// iteration (rows or columns whose off-diagonal part in the active window is
/// zero). Entries up to `n·ε·‖A‖_F`, the backward error of the QR iteration
/// itself, count as zero. Returns the permuted matrix, the permutation
/// (`w[i] = a[perm[i]]`) and the active window `lo..=hi`.
fn isolate(a: &DMatrix<Complex64>) -> (DMatrix<Complex64>, Vec<usize>, usize, usize) {
    let n = a.nrows();
    let mut w = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let tol = n as f64 * f64::EPSILON * a.norm();
    let negligible = |z: Complex64| z.norm() <= tol;
    let mut lo = 0usize;
    let mut hi = n - 1;

    let swap = |w: &mut DMatrix<Complex64>, perm: &mut Vec<usize>, i: usize, j: usize| {
        if i != j {
            w.swap_rows(i, j);
            w.swap_columns(i, j);
            perm.swap(i, j);
        }
    };

    // rows with zero off-diagonal entries go to the bottom
    'rows: loop {
        if hi == lo {
            break;
        }
        for j in (lo..=hi).rev() {
            if (lo..=hi).all(|i| i == j || negligible(w[(j, i)])) {
                swap(&mut w, &mut perm, j, hi);
                if hi == lo {
                    break 'rows;
                }
                hi -= 1;
                continue 'rows;
            }
        }
        break;
    }
    // columns with zero off-diagonal entries go to the top
    'cols: loop {
        if hi == lo {
            break;
        }
        let isolated = (lo..=hi).find(|&j| (lo..=hi).all(|i| i == j || negligible(w[(i, j)])));
        if let Some(j) = isolated {
            swap(&mut w, &mut perm, j, lo);
            lo += 1;
            continue 'cols;
        }
        break;
    }
    (w, perm, lo, hi)
}

/// Complex Schur form `A = Q T Qᴴ` with `T` upper triangular.
fn schur(a: &DMatrix<Complex64>) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let n = a.nrows();
    let (w, perm, lo, hi) = isolate(a);
    let mut t = w;
    let mut q = DMatrix::<Complex64>::identity(n, n);

    let size = hi + 1 - lo;
    if size > 1 {
        let block = t.view((lo, lo), (size, size)).clone_owned();
        let (qb, tb) = Schur::try_new(block, SCHUR_EPS, SCHUR_MAX_ITER)
            .ok_or(EdmdError::ConvergenceFailure { index: lo })?
            .unpack();
        // T ← Uᴴ T U with U = diag(I, Qb, I)
        t.view_mut((lo, lo), (size, size)).copy_from(&tb);
        if lo > 0 {
            let upper = t.view((0, lo), (lo, size)) * &qb;
            t.view_mut((0, lo), (lo, size)).copy_from(&upper);
        }
        if hi + 1 < n {
            let right = qb.adjoint() * t.view((lo, hi + 1), (size, n - hi - 1));
            t.view_mut((lo, hi + 1), (size, n - hi - 1)).copy_from(&right);
        }
        q.view_mut((lo, lo), (size, size)).copy_from(&qb);
    }
    // zero the strictly lower part; anything left there must be negligible
    let scale = t.norm().max(f64::MIN_POSITIVE);
    for j in 0..n {
        for i in j + 1..n {
            if t[(i, j)].norm() > 1e-10 * scale {
                return Err(EdmdError::ConvergenceFailure { index: j });
            }
            t[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    // undo the permutation: A = P W Pᵀ, so Q_A = P Q
    let mut q_full = DMatrix::zeros(n, n);
    for (i, &p) in perm.iter().enumerate() {
        q_full.set_row(p, &q.row(i));
    }
    Ok((q_full, t))
}

/// Eigenvectors of an upper-triangular matrix by back substitution; near-zero
/// pivots are replaced by `smin` so defective eigenvalues still give unit
/// vectors with small residuals.
fn triangular_eigenvectors(t: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = t.nrows();
    let smin = (f64::EPSILON * t.norm()).max(f64::MIN_POSITIVE * 1e20);
    let mut y = DMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut col = vec![Complex64::new(0.0, 0.0); k + 1];
        col[k] = Complex64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for l in j + 1..=k {
                s += t[(j, l)] * col[l];
            }
            let mut d = t[(j, j)] - lambda;
            if d.norm() < smin {
                d = Complex64::new(smin, 0.0);
            }
            col[j] = -s / d;
            let big = col[j].norm();
            if big > 1e100 {
                col.iter_mut().for_each(|c| *c /= big);
            }
        }
        let norm = col.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for (j, c) in col.into_iter().enumerate() {
            y[(j, k)] = c / norm;
        }
    }
    y
}

fn check_input(matrix: &DMatrix<Complex64>) -> Result<()> {
    if matrix.nrows() != matrix.ncols() {
        return Err(EdmdError::dims(
            "square matrix",
            format!("{}x{} matrix", matrix.nrows(), matrix.ncols()),
        ));
    }
    if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(EdmdError::InvalidParameter("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// All eigenvalues and unit right eigenvectors of a dense complex matrix,
/// in spectral order, with per-pair residuals.
pub fn eigendecompose(matrix: &DMatrix<Complex64>) -> Result<Spectrum> {
    check_input(matrix)?;
    let n = matrix.nrows();
    if n == 0 {
        return Ok(Spectrum {
            eigenvalues: Vec::new(),
            eigenvectors: Some(DMatrix::zeros(0, 0)),
            residuals: Vec::new(),
        });
    }
    let (q, t) = schur(matrix)?;
    let values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let vectors = q * triangular_eigenvectors(&t);

    let order = spectral_order(&values);
    let eigenvalues: Vec<_> = order.iter().map(|&i| values[i]).collect();
    let mut sorted = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted.set_column(dst, &vectors.column(src));
    }
    let residuals = eigen_residuals(matrix, &eigenvalues, &sorted);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: Some(sorted),
        residuals,
    })
}

/// `‖Av − λv‖ / ‖A‖_F` for each column `v` (normalised to unit length).
pub fn eigen_residuals(matrix: &DMatrix<Complex64>, values: &[Complex64], vectors: &DMatrix<Complex64>) -> Vec<f64> {
    let scale = matrix.norm();
    let scale = if scale > 0.0 { scale } else { 1.0 };
    values
        .iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let v = vectors.column(k);
            let r = matrix * v - v * lambda;
            r.norm() / (v.norm() * scale)
        })
        .collect()
}

/// One oracle eigenvalue paired with its nearest computed eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub oracle_index: usize,
    pub computed_index: usize,
    pub oracle: Complex64,
    pub computed: Complex64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMatch {
    pub pairs: Vec<MatchedPair>,
    /// Indices of computed eigenvalues not matched to any oracle value.
    pub unmatched: Vec<usize>,
}

impl SpectrumMatch {
    pub fn max_error(&self) -> f64 {
        self.pairs.iter().map(|p| p.error).fold(0.0, f64::max)
    }
}

/// Greedy nearest-neighbour matching of the first `p` oracle eigenvalues
/// (taken in descending modulus) into the computed multiset.
pub fn match_spectra(computed: &Spectrum, oracle: &Spectrum, p: usize) -> SpectrumMatch {
    let p = p.min(oracle.len()).min(computed.len());
    let order = spectral_order(&oracle.eigenvalues);
    let mut used = vec![false; computed.len()];
    let mut pairs = Vec::with_capacity(p);
    for &oi in order.iter().take(p) {
        let target = oracle.eigenvalues[oi];
        let best = computed
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .min_by(|(_, a), (_, b)| {
                (**a - target)
                    .norm()
                    .partial_cmp(&(**b - target).norm())
                    .unwrap_or(Ordering::Equal)
            })
            .map(|(i, _)| i);
        if let Some(ci) = best {
            used[ci] = true;
            let c = computed.eigenvalues[ci];
            pairs.push(MatchedPair {
                oracle_index: oi,
                computed_index: ci,
                oracle: target,
                computed: c,
                error: (c - target).norm(),
            });
        }
    }
    let unmatched = (0..computed.len()).filter(|&i| !used[i]).collect();
    SpectrumMatch { pairs, unmatched }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugationReport {
    /// Hausdorff distance between the eigenvalue set and its conjugate.
    pub hausdorff_distance: f64,
}

/// Measures how far a spectrum is from being closed under conjugation.
pub fn conjugate_symmetrize_report(spec: &Spectrum) -> ConjugationReport {
    let vals = &spec.eigenvalues;
    let dist = |a: Complex64, b: Complex64| (a - b.conj()).norm();
    let nearest = |a: Complex64, forward: bool| {
        vals.iter()
            .map(|&b| if forward { dist(a, b) } else { dist(b, a) })
            .fold(f64::INFINITY, f64::min)
    };
    let forward = vals.iter().map(|&a| nearest(a, true)).fold(0.0, f64::max);
    let backward = vals.iter().map(|&a| nearest(a, false)).fold(0.0, f64::max);
    ConjugationReport {
        hausdorff_distance: forward.max(backward),
    }
}

/// Heuristic spurious-eigenvalue flag: an eigenvalue of `coarse` is flagged
/// when no eigenvalue of `refined` (a larger dictionary) lies within `tol`.
pub fn flag_unstable(coarse: &Spectrum, refined: &Spectrum, tol: f64) -> Vec<bool> {
    coarse
        .eigenvalues
        .iter()
        .map(|&a| {
            refined
                .eigenvalues
                .iter()
                .map(|&b| (a - b).norm())
                .fold(f64::INFINITY, f64::min)
                > tol
        })
        .collect()
}
