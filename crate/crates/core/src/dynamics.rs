//! Analytic maps: degree-two Blaschke products acting on the unit circle and
//! the analytic deformation of the cat map acting on the two-torus.
//!
//! Phase points are stored as angles in `[0, 2π)`; complex coordinates
//! `z = e^{iφ}` are derived on demand so that iterated points never drift off
//! the circle.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{EdmdError, Result};

/// Denominators of the Möbius factors below this modulus are treated as poles.
const POLE_TOL: f64 = 1e-14;
/// Inverse branches closer than this are reported as degenerate.
const BRANCH_TOL: f64 = 1e-12;
/// Allowed deviation of `|w|` from one for inverse-branch evaluation.
const CIRCLE_TOL: f64 = 1e-10;

/// Reduces an angle into `[0, 2π)`.
pub fn reduce_angle(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Principal argument in `(−π, π]`.
pub(crate) fn principal_arg(z: Complex64) -> f64 {
    let a = z.arg();
    if a <= -PI {
        PI
    } else {
        a
    }
}

fn check_disk(name: &str, value: Complex64) -> Result<()> {
    if value.norm().is_nan() || value.norm() >= 1.0 {
        return Err(EdmdError::InvalidParameter(format!(
            "|{name}| must be < 1, got |{name}| = {}",
            value.norm()
        )));
    }
    Ok(())
}

/// `2·atan2(r sin(φ−α), 1 − r cos(φ−α))`, the angular correction contributed by
/// one Möbius factor with zero `r e^{iα}`.
fn mobius_phase(r: f64, alpha: f64, phi: f64) -> f64 {
    let s = phi - alpha;
    2.0 * (r * s.sin()).atan2(1.0 - r * s.cos())
}

/// Parameters of the degree-two Blaschke product
/// `τ(z) = (z−μ)/(1−μ̄z) · (z−ρ)/(1−ρ̄z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeParams {
    mu: Complex64,
    rho: Complex64,
}

impl BlaschkeParams {
    pub fn new(mu: Complex64, rho: Complex64) -> Result<Self> {
        check_disk("mu", mu)?;
        check_disk("rho", rho)?;
        Ok(Self { mu, rho })
    }

    /// `μ = ρ = 0`, i.e. `τ(z) = z²`.
    pub fn bernoulli() -> Self {
        Self {
            mu: Complex64::new(0.0, 0.0),
            rho: Complex64::new(0.0, 0.0),
        }
    }

    pub fn mu(&self) -> Complex64 {
        self.mu
    }

    pub fn rho(&self) -> Complex64 {
        self.rho
    }

    pub fn is_bernoulli(&self) -> bool {
        self.mu == Complex64::new(0.0, 0.0) && self.rho == Complex64::new(0.0, 0.0)
    }

    fn denominators(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let dm = 1.0 - self.mu.conj() * z;
        let dr = 1.0 - self.rho.conj() * z;
        let distance = dm.norm().min(dr.norm());
        if distance < POLE_TOL {
            return Err(EdmdError::Domain { z, distance });
        }
        Ok((dm, dr))
    }

    /// Evaluates `τ(z)`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if self.is_bernoulli() {
            return Ok(z * z);
        }
        let (dm, dr) = self.denominators(z)?;
        Ok((z - self.mu) / dm * ((z - self.rho) / dr))
    }

    /// Evaluates `τ'(z)` by the product rule on the two Möbius factors.
    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        let (dm, dr) = self.denominators(z)?;
        let f = (z - self.mu) / dm;
        let g = (z - self.rho) / dr;
        let df = (1.0 - self.mu.norm_sqr()) / (dm * dm);
        let dg = (1.0 - self.rho.norm_sqr()) / (dr * dr);
        Ok(df * g + f * dg)
    }

    /// The induced two-branch map of the circle in angle coordinates.
    pub fn angle_map(&self, phi: f64) -> f64 {
        let (rm, am) = self.mu.to_polar();
        let (rr, ar) = self.rho.to_polar();
        reduce_angle(2.0 * phi + mobius_phase(rm, am, phi) + mobius_phase(rr, ar, phi))
    }

    /// Derivative of [`Self::angle_map`], `Re(z τ'(z) / τ(z))` at `z = e^{iφ}`.
    pub fn angle_map_derivative(&self, phi: f64) -> Result<f64> {
        let z = Complex64::from_polar(1.0, phi);
        Ok((z * self.derivative(z)? / self.eval(z)?).re)
    }

    /// Both solutions of `τ(z) = w` for `|w| = 1`, ordered by ascending
    /// principal argument.
    ///
    /// `τ(z) = w` is the quadratic
    /// `(1 − w μ̄ρ̄) z² + (w(μ̄+ρ̄) − (μ+ρ)) z + (μρ − w) = 0`.
    pub fn inverse_branches(&self, w: Complex64) -> Result<[Complex64; 2]> {
        if (w.norm() - 1.0).abs() > CIRCLE_TOL {
            return Err(EdmdError::InvalidParameter(format!(
                "inverse branches need |w| = 1, got |w| = {}",
                w.norm()
            )));
        }
        let (mu, rho) = (self.mu, self.rho);
        let a = 1.0 - w * mu.conj() * rho.conj();
        let b = w * (mu.conj() + rho.conj()) - (mu + rho);
        let c = mu * rho - w;

        let sq = (b * b - 4.0 * a * c).sqrt();
        // pick the sign that avoids cancellation in -(b ± sq)
        let q = if (b + sq).norm() >= (b - sq).norm() {
            -(b + sq) / 2.0
        } else {
            -(b - sq) / 2.0
        };
        if q.norm() == 0.0 {
            return Err(EdmdError::DegenerateBranch { w });
        }
        let z1 = q / a;
        let z2 = c / q;
        if (z1 - z2).norm() < BRANCH_TOL {
            return Err(EdmdError::DegenerateBranch { w });
        }
        if principal_arg(z1) <= principal_arg(z2) {
            Ok([z1, z2])
        } else {
            Ok([z2, z1])
        }
    }
}

/// Parameter of the analytic cat-map deformation
/// `φ₁' = 2φ₁ + φ₂ + c(φ₁+φ₂)`, `φ₂' = φ₁ + φ₂ + c(φ₁+φ₂)` with
/// `c(s) = 2·atan(|μ| sin(s−α) / (1 − |μ| cos(s−α)))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusMapParams {
    mu: Complex64,
}

impl TorusMapParams {
    pub fn new(mu: Complex64) -> Result<Self> {
        check_disk("mu", mu)?;
        Ok(Self { mu })
    }

    /// The linear cat map `(2φ₁+φ₂, φ₁+φ₂)`.
    pub fn linear() -> Self {
        Self {
            mu: Complex64::new(0.0, 0.0),
        }
    }

    pub fn mu(&self) -> Complex64 {
        self.mu
    }

    pub fn apply(&self, phi: [f64; 2]) -> [f64; 2] {
        let (r, alpha) = self.mu.to_polar();
        let sum = phi[0] + phi[1];
        let correction = if r == 0.0 {
            0.0
        } else {
            mobius_phase(r, alpha, sum)
        };
        [
            reduce_angle(2.0 * phi[0] + phi[1] + correction),
            reduce_angle(sum + correction),
        ]
    }
}

/// A point of phase space in angle coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhasePoint {
    Circle(f64),
    Torus([f64; 2]),
}

impl PhasePoint {
    pub fn dimension(&self) -> usize {
        match self {
            PhasePoint::Circle(_) => 1,
            PhasePoint::Torus(_) => 2,
        }
    }

    /// Angles as a fixed-size pair; the second component is zero on the circle.
    pub fn angles(&self) -> [f64; 2] {
        match *self {
            PhasePoint::Circle(phi) => [phi, 0.0],
            PhasePoint::Torus(phi) => phi,
        }
    }
}

/// The dynamical system `z_{n+1} = τ(z_n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapSpec {
    Blaschke(BlaschkeParams),
    Torus(TorusMapParams),
}

impl MapSpec {
    pub fn bernoulli() -> Self {
        MapSpec::Blaschke(BlaschkeParams::bernoulli())
    }

    /// Phase-space dimension: 1 for circle maps, 2 for torus maps.
    pub fn dimension(&self) -> usize {
        match self {
            MapSpec::Blaschke(_) => 1,
            MapSpec::Torus(_) => 2,
        }
    }

    pub fn blaschke(&self) -> Option<&BlaschkeParams> {
        match self {
            MapSpec::Blaschke(p) => Some(p),
            MapSpec::Torus(_) => None,
        }
    }

    pub fn apply(&self, point: PhasePoint) -> Result<PhasePoint> {
        match (self, point) {
            (MapSpec::Blaschke(p), PhasePoint::Circle(phi)) => Ok(PhasePoint::Circle(p.angle_map(phi))),
            (MapSpec::Torus(p), PhasePoint::Torus(phi)) => Ok(PhasePoint::Torus(p.apply(phi))),
            _ => Err(EdmdError::dims(
                format!("{}-dimensional point", self.dimension()),
                format!("{}-dimensional point", point.dimension()),
            )),
        }
    }
}

/// Applies the map `burn_in` times, then records `length` consecutive points
/// (the first recorded point is the burnt-in start).
pub fn iterate_trajectory(
    map: &MapSpec,
    start: PhasePoint,
    burn_in: usize,
    length: usize,
) -> Result<Vec<PhasePoint>> {
    if start.dimension() != map.dimension() {
        return Err(EdmdError::dims(
            format!("{}-dimensional start point", map.dimension()),
            format!("{}-dimensional start point", start.dimension()),
        ));
    }
    let mut point = start;
    for _ in 0..burn_in {
        point = map.apply(point)?;
    }
    let mut out = Vec::with_capacity(length);
    for i in 0..length {
        if i > 0 {
            point = map.apply(point)?;
        }
        out.push(point);
    }
    Ok(out)
}
