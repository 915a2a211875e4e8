//! Assembly of the EDMD matrices `G`, `H`, `A = G H⁻¹`, the least-squares
//! form `A = Y X⁺`, and the transfer-operator matrices built either by
//! quadrature of `ψ_k∘τ · ψ_ℓ` or by summing over inverse branches.
//!
//! Matrix rows and columns follow the dictionary's mode order. All node sums
//! run in ascending sample order so results do not depend on scheduling.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{principal_arg, MapSpec};
use crate::error::{EdmdError, Result};
use crate::observables::{evaluate_dictionary, evaluate_dictionary_images, DataMatrix, Dictionary};
use crate::sampling::{equidistant_circle_nodes, torus_lattice_nodes, SampleSet};

pub type CMatrix = DMatrix<Complex64>;

/// Relative singular-value cutoff used for pseudoinverses.
pub const DEFAULT_CUTOFF: f64 = 1e-10;

/// How node sums are accumulated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Summation {
    /// Plain left-to-right accumulation.
    #[default]
    Ordered,
    /// Neumaier-compensated accumulation, same order.
    Compensated,
}

/// Diagnostics of a truncated-SVD pseudoinverse.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinvMetadata {
    /// Relative cutoff requested.
    pub cutoff: f64,
    /// Absolute threshold `cutoff · σ_max` actually applied.
    pub threshold: f64,
    pub rank: usize,
    pub truncated: usize,
    /// `σ_max / σ_min` over the retained singular values.
    pub condition: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdmdMatrices {
    pub g: CMatrix,
    pub h: CMatrix,
    pub a: CMatrix,
    pub pinv: PinvMetadata,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// Quadrature matrix elements `L_{kℓ}`.
    Raw,
    /// `M_{kℓ} = L_{−k,ℓ}`, the matrix of the projected transfer operator.
    Galerkin,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    pub matrix: CMatrix,
    /// Quadrature nodes per coordinate.
    pub nodes: usize,
    pub representation: Representation,
}

/// The index-reversal permutation `R` with `R_{kℓ} = δ_{k,−ℓ}`.
pub fn reversal(n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        if i + j + 1 == n {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

#[derive(Clone, Copy, Default)]
struct Accumulator {
    sum: Complex64,
    comp: Complex64,
}

impl Accumulator {
    #[inline]
    fn add_compensated(&mut self, x: Complex64) {
        fn step(sum: &mut f64, comp: &mut f64, x: f64) {
            let t = *sum + x;
            if sum.abs() >= x.abs() {
                *comp += (*sum - t) + x;
            } else {
                *comp += (x - t) + *sum;
            }
            *sum = t;
        }
        step(&mut self.sum.re, &mut self.comp.re, x.re);
        step(&mut self.sum.im, &mut self.comp.im, x.im);
    }
}

/// `(1/M) Σ_m left[k,m] · right[ℓ,m]`, no conjugation.
fn node_product(left: &CMatrix, right: &CMatrix, summation: Summation) -> CMatrix {
    let (n_left, n_right, m) = (left.nrows(), right.nrows(), left.ncols());
    let scale = 1.0 / m as f64;
    match summation {
        Summation::Ordered => {
            let mut acc = CMatrix::zeros(n_left, n_right);
            for j in 0..m {
                let l = left.column(j);
                let r = right.column(j);
                for c in 0..n_right {
                    let rc = r[c];
                    let mut col = acc.column_mut(c);
                    for k in 0..n_left {
                        col[k] += l[k] * rc;
                    }
                }
            }
            acc * Complex64::new(scale, 0.0)
        }
        Summation::Compensated => {
            let mut acc = vec![Accumulator::default(); n_left * n_right];
            for j in 0..m {
                let l = left.column(j);
                let r = right.column(j);
                for c in 0..n_right {
                    for k in 0..n_left {
                        acc[c * n_left + k].add_compensated(l[k] * r[c]);
                    }
                }
            }
            CMatrix::from_fn(n_left, n_right, |k, c| {
                let a = acc[c * n_left + k];
                (a.sum + a.comp) * scale
            })
        }
    }
}

fn check_samples(dict: &Dictionary, samples: &SampleSet) -> Result<()> {
    if samples.is_empty() {
        return Err(EdmdError::InvalidParameter("sample set is empty".into()));
    }
    if dict.dimension() != samples.dimension() {
        return Err(EdmdError::dims(
            format!("{}-dimensional samples", dict.dimension()),
            format!("{}-dimensional samples", samples.dimension()),
        ));
    }
    Ok(())
}

/// `G_{kℓ} = (1/M) Σ ψ_k(τ(z_m)) ψ_ℓ(z_m)` and `H_{kℓ} = (1/M) Σ ψ_k(z_m) ψ_ℓ(z_m)`.
pub fn build_gram_matrices(dict: &Dictionary, samples: &SampleSet) -> Result<(CMatrix, CMatrix)> {
    build_gram_matrices_with(dict, samples, Summation::Ordered)
}

pub fn build_gram_matrices_with(
    dict: &Dictionary,
    samples: &SampleSet,
    summation: Summation,
) -> Result<(CMatrix, CMatrix)> {
    check_samples(dict, samples)?;
    let x = evaluate_dictionary(dict, samples)?;
    let y = evaluate_dictionary_images(dict, samples)?;
    Ok((
        node_product(&y.0, &x.0, summation),
        node_product(&x.0, &x.0, summation),
    ))
}

/// Pseudoinverse via SVD with singular values below `cutoff · σ_max` dropped.
fn truncated_pinv_factors(m: &CMatrix, cutoff: f64) -> Option<(CMatrix, Vec<f64>, CMatrix, PinvMetadata)> {
    let svd = m.clone().svd(true, true);
    let u = svd.u?;
    let v_t = svd.v_t?;
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let largest = sigma.iter().copied().fold(0.0, f64::max);
    let threshold = cutoff * largest;
    let kept: Vec<usize> = (0..sigma.len())
        .filter(|&i| sigma[i] > threshold && sigma[i] > 0.0)
        .collect();
    let smallest = kept.iter().map(|&i| sigma[i]).fold(f64::INFINITY, f64::min);
    let meta = PinvMetadata {
        cutoff,
        threshold,
        rank: kept.len(),
        truncated: sigma.len() - kept.len(),
        condition: if kept.is_empty() { f64::INFINITY } else { largest / smallest },
    };
    let u_kept = CMatrix::from_fn(u.nrows(), kept.len(), |r, c| u[(r, kept[c])]);
    let v_kept = CMatrix::from_fn(v_t.ncols(), kept.len(), |r, c| v_t[(kept[c], r)].conj());
    let inv: Vec<f64> = kept.iter().map(|&i| 1.0 / sigma[i]).collect();
    Some((u_kept, inv, v_kept, meta))
}

/// `A = G · H⁺` with a relative singular-value cutoff on `H`.
pub fn assemble_edmd(g: &CMatrix, h: &CMatrix, cutoff: f64) -> Result<EdmdMatrices> {
    if g.shape() != h.shape() || g.nrows() != g.ncols() {
        return Err(EdmdError::dims(
            format!("square G and H of equal size ({}x{})", h.nrows(), h.ncols()),
            format!("G {}x{}", g.nrows(), g.ncols()),
        ));
    }
    let (u, inv, v, meta) = truncated_pinv_factors(h, cutoff).ok_or(EdmdError::SingularGram { largest: f64::NAN })?;
    if meta.rank == 0 {
        return Err(EdmdError::SingularGram {
            largest: meta.threshold / cutoff,
        });
    }
    // H⁺ = V Σ⁻¹ Uᴴ
    let mut gv = g * v;
    for (c, s) in inv.iter().enumerate() {
        gv.column_mut(c).scale_mut(*s);
    }
    let a = gv * u.adjoint();
    Ok(EdmdMatrices {
        g: g.clone(),
        h: h.clone(),
        a,
        pinv: meta,
    })
}

/// Builds `G`, `H` from samples and assembles `A`.
pub fn edmd_from_samples(dict: &Dictionary, samples: &SampleSet, cutoff: f64, summation: Summation) -> Result<EdmdMatrices> {
    let (g, h) = build_gram_matrices_with(dict, samples, summation)?;
    assemble_edmd(&g, &h, cutoff)
}

/// `A = Y X⁺`, the least-squares solution of `A X ≈ Y`.
pub fn least_squares_edmd(x: &DataMatrix, y: &DataMatrix, cutoff: f64) -> Result<(CMatrix, PinvMetadata)> {
    if x.0.shape() != y.0.shape() {
        return Err(EdmdError::dims(
            format!("Y of shape {}x{}", x.nrows(), x.ncols()),
            format!("{}x{}", y.nrows(), y.ncols()),
        ));
    }
    let (u, inv, v, meta) = truncated_pinv_factors(&x.0, cutoff).ok_or(EdmdError::SingularData)?;
    if meta.rank == 0 {
        return Err(EdmdError::SingularData);
    }
    let mut yv = &y.0 * v;
    for (c, s) in inv.iter().enumerate() {
        yv.column_mut(c).scale_mut(*s);
    }
    Ok((yv * u.adjoint(), meta))
}

/// Quadrature matrix elements `L_{kℓ} ≈ (1/2π)∫ ψ_k(τ(e^{iφ})) ψ_ℓ(e^{iφ}) dφ`
/// using the `m`-point rectangle rule (an `m × m` lattice on the torus).
pub fn transfer_matrix_quadrature(map: &MapSpec, dict: &Dictionary, m: usize) -> Result<OperatorMatrix> {
    if dict.dimension() != map.dimension() {
        return Err(EdmdError::dims(
            format!("{}-dimensional dictionary", map.dimension()),
            format!("{}-dimensional dictionary", dict.dimension()),
        ));
    }
    let samples = match map.dimension() {
        1 => equidistant_circle_nodes(map, m)?,
        _ => torus_lattice_nodes(map, m, m)?,
    };
    let (g, _) = build_gram_matrices(dict, &samples)?;
    Ok(OperatorMatrix {
        matrix: g,
        nodes: m,
        representation: Representation::Raw,
    })
}

/// Reverses the row index: `M_{kℓ} = L_{−k,ℓ}`.
pub fn galerkin_representation(l: &OperatorMatrix) -> Result<OperatorMatrix> {
    if l.representation != Representation::Raw {
        return Err(EdmdError::InvalidParameter(
            "matrix is already in Galerkin representation".into(),
        ));
    }
    let n = l.matrix.nrows();
    Ok(OperatorMatrix {
        matrix: CMatrix::from_fn(n, n, |k, j| l.matrix[(n - 1 - k, j)]),
        nodes: l.nodes,
        representation: Representation::Galerkin,
    })
}

/// Galerkin matrix of the transfer operator built from its inverse-branch
/// form `(𝓛f)(φ) = Σ_j θ_j'(φ) f(θ_j(φ))`, where `θ_j` are the inverse
/// branches in angle coordinates and `θ_j' = 1 / (angle-map derivative)∘θ_j`.
/// Each `𝓛ψ_ℓ` is sampled on `m` equidistant nodes and projected onto `ψ_k`
/// with the same rectangle rule.
pub fn transfer_apply_inverse_branches(map: &MapSpec, dict: &Dictionary, m: usize) -> Result<OperatorMatrix> {
    let params = map.blaschke().ok_or_else(|| {
        EdmdError::dims("1-dimensional Blaschke map", format!("{}-dimensional map", map.dimension()))
    })?;
    if dict.dimension() != 1 {
        return Err(EdmdError::dims("1-dimensional dictionary", "2-dimensional dictionary"));
    }
    if m == 0 {
        return Err(EdmdError::InvalidParameter("node count must be at least 1".into()));
    }
    let n = dict.len();
    // transferred[ℓ, j] = (𝓛ψ_ℓ)(φ_j), projector[k, j] = ψ_{−k}(φ_j)
    let mut transferred = CMatrix::zeros(n, m);
    let mut projector = CMatrix::zeros(n, m);
    for j in 0..m {
        let phi = std::f64::consts::TAU * j as f64 / m as f64;
        let w = Complex64::cis(phi);
        for z in params.inverse_branches(w)? {
            let theta = principal_arg(z);
            let weight = (w / (z * params.derivative(z)?)).re;
            for (l, mode) in dict.modes().iter().enumerate() {
                transferred[(l, j)] += Complex64::cis(mode[0] as f64 * theta) * weight;
            }
        }
        for (k, mode) in dict.modes().iter().enumerate() {
            projector[(k, j)] = Complex64::cis(-(mode[0] as f64) * phi);
        }
    }
    Ok(OperatorMatrix {
        matrix: node_product(&projector, &transferred, Summation::Ordered),
        nodes: m,
        representation: Representation::Galerkin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::BlaschkeParams;
    use crate::observables::fourier_dictionary;
    use crate::sampling::{trajectory_nodes, TrajectoryStart};
    use std::f64::consts::PI;

    fn reference_map() -> MapSpec {
        let mu = Complex64::from_polar(0.33, PI / 25.0);
        MapSpec::Blaschke(BlaschkeParams::new(mu, mu).unwrap())
    }

    fn delta(n: usize, f: impl Fn(i64, i64) -> bool) -> CMatrix {
        let nbar = (n as i64 - 1) / 2;
        CMatrix::from_fn(n, n, |i, j| {
            if f(i as i64 - nbar, j as i64 - nbar) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn bernoulli_gram_matrices() {
        let dict = fourier_dictionary(5, 1).unwrap();
        let s = equidistant_circle_nodes(&MapSpec::bernoulli(), 100).unwrap();
        let (g, h) = build_gram_matrices(&dict, &s).unwrap();
        assert!(max_abs(&(g - delta(11, |k, l| -2 * k == l))) < 1e-12);
        assert!(max_abs(&(h.clone() - delta(11, |k, l| k == -l))) < 1e-12);
        assert!(max_abs(&(h - reversal(11))) < 1e-12);

        let (g2, h2) = build_gram_matrices(&dict, &equidistant_circle_nodes(&reference_map(), 100).unwrap()).unwrap();
        assert!(max_abs(&(h2 - reversal(11))) < 1e-12);
        assert!(max_abs(&g2) > 0.1);
    }

    #[test]
    fn trivial_dictionary() {
        let dict = fourier_dictionary(0, 1).unwrap();
        let s = trajectory_nodes(&reference_map(), TrajectoryStart::Seed(3), 10, 17).unwrap();
        let (g, h) = build_gram_matrices(&dict, &s).unwrap();
        assert!((g[(0, 0)] - 1.0).norm() < 1e-15 && (h[(0, 0)] - 1.0).norm() < 1e-15);
        let l = transfer_matrix_quadrature(&reference_map(), &dict, 7).unwrap();
        assert!((l.matrix[(0, 0)] - 1.0).norm() < 1e-15);
    }

    #[test]
    fn bernoulli_edmd_matrix() {
        let dict = fourier_dictionary(5, 1).unwrap();
        let s = equidistant_circle_nodes(&MapSpec::bernoulli(), 100).unwrap();
        let e = edmd_from_samples(&dict, &s, DEFAULT_CUTOFF, Summation::Ordered).unwrap();
        assert!(max_abs(&(e.a - delta(11, |k, l| 2 * k == l))) < 1e-12);
        assert_eq!(e.pinv.truncated, 0);
        assert!((e.pinv.condition - 1.0).abs() < 1e-10);
    }

    #[test]
    fn identity_gram_gives_identity() {
        let i = CMatrix::identity(4, 4);
        let e = assemble_edmd(&i, &i, DEFAULT_CUTOFF).unwrap();
        assert!(max_abs(&(e.a - i)) < 1e-15);
    }

    #[test]
    fn singular_gram_is_an_error() {
        let z = CMatrix::zeros(3, 3);
        assert!(matches!(
            assemble_edmd(&z, &z, DEFAULT_CUTOFF),
            Err(EdmdError::SingularGram { .. })
        ));
        assert!(assemble_edmd(&CMatrix::zeros(2, 2), &z, DEFAULT_CUTOFF).is_err());
    }

    #[test]
    fn least_squares_matches_gram_route() {
        let dict = fourier_dictionary(5, 1).unwrap();
        let s = equidistant_circle_nodes(&MapSpec::bernoulli(), 100).unwrap();
        let x = evaluate_dictionary(&dict, &s).unwrap();
        let y = evaluate_dictionary_images(&dict, &s).unwrap();
        let (a_ls, meta) = least_squares_edmd(&x, &y, DEFAULT_CUTOFF).unwrap();
        assert_eq!(meta.rank, 11);
        let e = edmd_from_samples(&dict, &s, DEFAULT_CUTOFF, Summation::Ordered).unwrap();
        assert!(max_abs(&(a_ls - e.a)) < 1e-10);
    }

    #[test]
    fn least_squares_identity_on_range() {
        let dict = fourier_dictionary(3, 1).unwrap();
        // 3 samples for 7 modes: X has rank 3
        let s = equidistant_circle_nodes(&reference_map(), 3).unwrap();
        let x = evaluate_dictionary(&dict, &s).unwrap();
        let (a, meta) = least_squares_edmd(&x, &x, DEFAULT_CUTOFF).unwrap();
        assert_eq!(meta.rank, 3);
        assert!(max_abs(&(&a * &x.0 - &x.0)) < 1e-12);

        let zero = DataMatrix(CMatrix::zeros(3, 4));
        assert!(matches!(
            least_squares_edmd(&zero, &zero, DEFAULT_CUTOFF),
            Err(EdmdError::SingularData)
        ));
    }

    #[test]
    fn quadrature_matrix() {
        let dict = fourier_dictionary(5, 1).unwrap();
        let l = transfer_matrix_quadrature(&MapSpec::bernoulli(), &dict, 100).unwrap();
        assert!(max_abs(&(l.matrix.clone() - delta(11, |k, j| -2 * k == j))) < 1e-12);
        let m = galerkin_representation(&l).unwrap();
        assert!(max_abs(&(m.matrix.clone() - delta(11, |k, j| 2 * k == j))) < 1e-12);
        assert!(galerkin_representation(&m).is_err());

        let dict = fourier_dictionary(10, 1).unwrap();
        let l1 = transfer_matrix_quadrature(&reference_map(), &dict, 1000).unwrap();
        let l2 = transfer_matrix_quadrature(&reference_map(), &dict, 2000).unwrap();
        assert!(max_abs(&(l1.matrix - l2.matrix)) <= 1e-12);
    }

    #[test]
    fn galerkin_of_identity_is_reversal() {
        let l = OperatorMatrix {
            matrix: CMatrix::identity(5, 5),
            nodes: 1,
            representation: Representation::Raw,
        };
        assert_eq!(galerkin_representation(&l).unwrap().matrix, reversal(5));
    }

    #[test]
    fn grid_gram_equals_quadrature() {
        let dict = fourier_dictionary(4, 1).unwrap();
        let s = equidistant_circle_nodes(&reference_map(), 64).unwrap();
        let (g, _) = build_gram_matrices(&dict, &s).unwrap();
        let l = transfer_matrix_quadrature(&reference_map(), &dict, 64).unwrap();
        assert!(max_abs(&(g - l.matrix)) <= 1e-15);
    }

    #[test]
    fn inverse_branch_construction() {
        let dict = fourier_dictionary(2, 1).unwrap();
        let b = MapSpec::bernoulli();
        let via_branches = transfer_apply_inverse_branches(&b, &dict, 64).unwrap();
        let via_quadrature = galerkin_representation(&transfer_matrix_quadrature(&b, &dict, 64).unwrap()).unwrap();
        assert!(max_abs(&(via_branches.matrix.clone() - via_quadrature.matrix)) < 1e-10);
        // constants are preserved: column of ψ_0 is e_0
        let c0 = dict.position([0, 0]).unwrap();
        for k in 0..dict.len() {
            let want = if k == c0 { 1.0 } else { 0.0 };
            assert!((via_branches.matrix[(k, c0)] - want).norm() < 1e-14);
        }

        let dict = fourier_dictionary(5, 1).unwrap();
        let a = transfer_apply_inverse_branches(&reference_map(), &dict, 256).unwrap();
        let q = galerkin_representation(&transfer_matrix_quadrature(&reference_map(), &dict, 256).unwrap()).unwrap();
        assert!(max_abs(&(a.matrix - q.matrix)) < 1e-8);
    }

    #[test]
    fn compensated_summation_agrees() {
        let dict = fourier_dictionary(3, 1).unwrap();
        let s = trajectory_nodes(&reference_map(), TrajectoryStart::Seed(1), 100, 5000).unwrap();
        let (g1, h1) = build_gram_matrices_with(&dict, &s, Summation::Ordered).unwrap();
        let (g2, h2) = build_gram_matrices_with(&dict, &s, Summation::Compensated).unwrap();
        assert!(max_abs(&(g1 - g2)) < 1e-13);
        assert!(max_abs(&(h1 - h2)) < 1e-13);
    }

    #[test]
    fn dimension_checks() {
        let dict = fourier_dictionary(2, 2).unwrap();
        let s = equidistant_circle_nodes(&reference_map(), 10).unwrap();
        assert!(matches!(
            build_gram_matrices(&dict, &s),
            Err(EdmdError::DimensionMismatch { .. })
        ));
        assert!(transfer_matrix_quadrature(&reference_map(), &dict, 10).is_err());
    }
}
