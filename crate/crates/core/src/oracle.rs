//! Closed-form reference spectra.
//!
//! For a degree-two Blaschke product with a unique attracting fixed point
//! `z*` inside the unit disk, the transfer-operator eigenvalues are `1` and
//! the powers `τ'(z*)ⁿ`, `conj(τ'(z*))ⁿ`. For the deformed cat map they are
//! `1` and `(−μ)ⁿ`, `conj(−μ)ⁿ`. The Bernoulli map `z ↦ z²` additionally has
//! Kronecker-delta EDMD matrices on equidistant grids.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{BlaschkeParams, TorusMapParams};
use crate::error::{EdmdError, Result};
use crate::spectral::{eigendecompose, Spectrum};

const INTERIOR_MARGIN: f64 = 1e-10;
const SOLVER_AGREEMENT: f64 = 1e-10;
const MAX_FIXED_POINT_ITER: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointData {
    pub z_star: Complex64,
    /// `τ'(z*)`.
    pub multiplier: Complex64,
    /// `|τ(z*) − z*|`.
    pub residual: f64,
    /// Distance between the polynomial root and the limit of `z ← τ(z)` from 0.
    pub solver_agreement: f64,
}

/// Roots of `Σ coeffs[i] zⁱ` as companion-matrix eigenvalues. Leading
/// coefficients that vanish relative to the largest are dropped.
fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut degree = coeffs.len() - 1;
    while degree > 0 && coeffs[degree].norm() <= 1e-14 * scale {
        degree -= 1;
    }
    if degree == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[degree];
    let companion = DMatrix::from_fn(degree, degree, |i, j| {
        if i == 0 {
            -coeffs[degree - 1 - j] / lead
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(eigendecompose(&companion)?.eigenvalues)
}

fn polish(coeffs: &[Complex64], mut z: Complex64) -> Complex64 {
    for _ in 0..3 {
        let (mut p, mut dp) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for &c in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        if dp.norm() == 0.0 {
            break;
        }
        z -= p / dp;
    }
    z
}

/// Finds the unique interior fixed point of `τ` from the cubic
/// `μ̄ρ̄ z³ − (1+μ̄+ρ̄) z² + (1+μ+ρ) z − μρ = 0`, cross-checked by iterating
/// `τ` from the origin.
pub fn blaschke_fixed_point(params: &BlaschkeParams) -> Result<FixedPointData> {
    let (mu, rho) = (params.mu(), params.rho());
    let one = Complex64::new(1.0, 0.0);
    let coeffs = [
        -mu * rho,
        one + mu + rho,
        -(one + mu.conj() + rho.conj()),
        mu.conj() * rho.conj(),
    ];
    let interior: Vec<_> = polynomial_roots(&coeffs)?
        .into_iter()
        .filter(|z| z.norm() < 1.0 - INTERIOR_MARGIN)
        .collect();
    if interior.len() != 1 {
        return Err(EdmdError::NoInteriorFixedPoint { found: interior.len() });
    }
    let z_star = polish(&coeffs, interior[0]);
    let multiplier = params.derivative(z_star)?;
    if multiplier.norm() >= 1.0 {
        return Err(EdmdError::NoInteriorFixedPoint { found: 0 });
    }

    let mut z = Complex64::new(0.0, 0.0);
    for _ in 0..MAX_FIXED_POINT_ITER {
        let next = params.eval(z)?;
        let step = (next - z).norm();
        z = next;
        if step <= 1e-16 {
            break;
        }
    }
    let solver_agreement = (z - z_star).norm();
    if solver_agreement > SOLVER_AGREEMENT {
        return Err(EdmdError::ConvergenceFailure { index: 0 });
    }
    Ok(FixedPointData {
        z_star,
        multiplier,
        residual: (params.eval(z_star)? - z_star).norm(),
        solver_agreement,
    })
}

/// `1, q, conj q, q², conj q², …` truncated to `count` values.
fn power_spectrum(q: Complex64, count: usize) -> Spectrum {
    let mut values = Vec::with_capacity(count);
    values.push(Complex64::new(1.0, 0.0));
    let mut power = Complex64::new(1.0, 0.0);
    while values.len() < count {
        power *= q;
        values.push(power);
        if values.len() < count {
            values.push(power.conj());
        }
    }
    values.truncate(count);
    Spectrum::from_values(values)
}

/// Leading `count` transfer-operator eigenvalues of the Blaschke map.
pub fn blaschke_exact_spectrum(params: &BlaschkeParams, count: usize) -> Result<Spectrum> {
    let fp = blaschke_fixed_point(params)?;
    Ok(power_spectrum(fp.multiplier, count))
}

/// Leading `count` eigenvalues of the deformed cat map:
/// `{1} ∪ {(−μ)ⁿ, conj(−μ)ⁿ : n ≥ 1}`.
pub fn catmap_exact_spectrum(params: &TorusMapParams, count: usize) -> Spectrum {
    power_spectrum(-params.mu(), count)
}

/// Closed-form grid sums for the Bernoulli map `z ↦ z²` with `M` equidistant
/// nodes: `G_{kℓ} = [2k+ℓ ≡ 0 mod M]`, `H_{kℓ} = [k+ℓ ≡ 0 mod M]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BernoulliMatrices {
    pub g: DMatrix<Complex64>,
    pub h: DMatrix<Complex64>,
    pub a: DMatrix<Complex64>,
    /// `M ≥ 3N/2`: the matrices are free of aliasing and equal
    /// `G = δ_{−2k,ℓ}`, `A = δ_{2k,ℓ}`.
    pub exact: bool,
}

pub fn bernoulli_exact_matrices(nbar: usize, m: usize) -> Result<BernoulliMatrices> {
    if m == 0 {
        return Err(EdmdError::InvalidParameter("node count must be at least 1".into()));
    }
    let n = 2 * nbar + 1;
    let nb = nbar as i64;
    let mi = m as i64;
    let indicator = |cond: bool| Complex64::new(if cond { 1.0 } else { 0.0 }, 0.0);
    let g = DMatrix::from_fn(n, n, |i, j| {
        let (k, l) = (i as i64 - nb, j as i64 - nb);
        indicator((2 * k + l).rem_euclid(mi) == 0)
    });
    let h = DMatrix::from_fn(n, n, |i, j| {
        let (k, l) = (i as i64 - nb, j as i64 - nb);
        indicator((k + l).rem_euclid(mi) == 0)
    });
    let a = if m >= n {
        // H is the index reversal, so A_{kℓ} = G_{k,−ℓ}
        DMatrix::from_fn(n, n, |i, j| g[(i, n - 1 - j)])
    } else {
        let pinv = h
            .clone()
            .pseudo_inverse(1e-10)
            .map_err(|e| EdmdError::InvalidParameter(e.to_string()))?;
        &g * pinv
    };
    Ok(BernoulliMatrices {
        g,
        h,
        a,
        exact: 2 * m >= 3 * n,
    })
}
