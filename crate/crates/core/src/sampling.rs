//! Sample node sets paired with their images under the map.

use std::f64::consts::TAU;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{iterate_trajectory, reduce_angle, MapSpec, PhasePoint};
use crate::error::{EdmdError, Result};

/// Default number of discarded iterates before a trajectory is recorded.
pub const DEFAULT_BURN_IN: usize = 1000;

/// Where a sample set came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    EquidistantGrid {
        nodes: usize,
    },
    TorusLattice {
        nodes: [usize; 2],
    },
    Trajectory {
        start: PhasePoint,
        burn_in: usize,
        seed: Option<u64>,
    },
    /// A recorded angle sequence; consecutive entries are taken as point/image.
    AngleFile {
        path: String,
    },
}

/// How a trajectory's initial condition is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TrajectoryStart {
    Point(PhasePoint),
    /// Uniformly random angles drawn from a ChaCha8 stream with this seed.
    Seed(u64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    points: Vec<PhasePoint>,
    images: Vec<PhasePoint>,
    provenance: Provenance,
}

impl SampleSet {
    pub fn points(&self) -> &[PhasePoint] {
        &self.points
    }

    pub fn images(&self) -> &[PhasePoint] {
        &self.images
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Sample count `M`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.points.first().map_or(0, PhasePoint::dimension)
    }

    /// The first `m` point/image pairs; for a trajectory this is the
    /// trajectory of length `m` from the same start.
    pub fn prefix(&self, m: usize) -> SampleSet {
        let m = m.min(self.len());
        SampleSet {
            points: self.points[..m].to_vec(),
            images: self.images[..m].to_vec(),
            provenance: self.provenance.clone(),
        }
    }

    /// True when an equidistant grid is too coarse for the Bernoulli matrices
    /// to be exact with `dict_len` observables, i.e. `M < 3N/2`.
    pub fn aliased_for(&self, dict_len: usize) -> bool {
        match self.provenance {
            Provenance::EquidistantGrid { nodes } => 2 * nodes < 3 * dict_len,
            _ => false,
        }
    }
}

fn require_dimension(map: &MapSpec, dimension: usize) -> Result<()> {
    if map.dimension() != dimension {
        return Err(EdmdError::dims(
            format!("{dimension}-dimensional map"),
            format!("{}-dimensional map", map.dimension()),
        ));
    }
    Ok(())
}

fn require_positive(name: &str, value: usize) -> Result<()> {
    if value == 0 {
        return Err(EdmdError::InvalidParameter(format!("{name} must be at least 1")));
    }
    Ok(())
}

/// `M` nodes `φ_m = 2πm/M` on the circle with their images.
pub fn equidistant_circle_nodes(map: &MapSpec, m: usize) -> Result<SampleSet> {
    require_dimension(map, 1)?;
    require_positive("node count", m)?;
    let points: Vec<_> = (0..m)
        .map(|j| PhasePoint::Circle(TAU * j as f64 / m as f64))
        .collect();
    let images = points.iter().map(|&p| map.apply(p)).collect::<Result<_>>()?;
    Ok(SampleSet {
        points,
        images,
        provenance: Provenance::EquidistantGrid { nodes: m },
    })
}

/// Row-major lattice `(2πj/m1, 2πk/m2)` on the torus with their images.
pub fn torus_lattice_nodes(map: &MapSpec, m1: usize, m2: usize) -> Result<SampleSet> {
    require_dimension(map, 2)?;
    require_positive("lattice size", m1)?;
    require_positive("lattice size", m2)?;
    let points: Vec<_> = (0..m1)
        .flat_map(|j| {
            (0..m2).map(move |k| PhasePoint::Torus([TAU * j as f64 / m1 as f64, TAU * k as f64 / m2 as f64]))
        })
        .collect();
    let images = points.iter().map(|&p| map.apply(p)).collect::<Result<_>>()?;
    Ok(SampleSet {
        points,
        images,
        provenance: Provenance::TorusLattice { nodes: [m1, m2] },
    })
}

fn random_point(dimension: usize, seed: u64) -> PhasePoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match dimension {
        1 => PhasePoint::Circle(rng.gen_range(0.0..TAU)),
        _ => PhasePoint::Torus([rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU)]),
    }
}

/// `m` consecutive trajectory points after `burn_in` discarded iterates;
/// `images[j] = points[j + 1]`, with one extra iterate for the last image.
pub fn trajectory_nodes(map: &MapSpec, start: TrajectoryStart, burn_in: usize, m: usize) -> Result<SampleSet> {
    require_positive("trajectory length", m)?;
    let (start, seed) = match start {
        TrajectoryStart::Point(p) => (p, None),
        TrajectoryStart::Seed(s) => (random_point(map.dimension(), s), Some(s)),
    };
    let orbit = iterate_trajectory(map, start, burn_in, m + 1)?;
    let images = orbit[1..].to_vec();
    let mut points = orbit;
    points.truncate(m);
    Ok(SampleSet {
        points,
        images,
        provenance: Provenance::Trajectory { start, burn_in, seed },
    })
}

/// Loads a whitespace/newline separated sequence of circle angles. Entry `j`
/// becomes a point whose image is entry `j + 1`.
pub fn load_angle_sequence(path: &Path) -> Result<SampleSet> {
    let text = std::fs::read_to_string(path).map_err(|e| EdmdError::io(path, e))?;
    let angles = text
        .split_whitespace()
        .enumerate()
        .map(|(i, tok)| {
            tok.parse::<f64>().map(reduce_angle).map_err(|_| {
                EdmdError::Config(format!("{}: token {} ({tok:?}) is not a number", path.display(), i + 1))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if angles.len() < 2 {
        return Err(EdmdError::Config(format!(
            "{}: need at least two angles, found {}",
            path.display(),
            angles.len()
        )));
    }
    let points = angles[..angles.len() - 1].iter().map(|&a| PhasePoint::Circle(a)).collect();
    let images = angles[1..].iter().map(|&a| PhasePoint::Circle(a)).collect();
    Ok(SampleSet {
        points,
        images,
        provenance: Provenance::AngleFile {
            path: path.display().to_string(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{BlaschkeParams, TorusMapParams};
    use num_complex::Complex64;
    use std::f64::consts::PI;
    use std::io::Write;

    fn reference_map() -> MapSpec {
        let mu = Complex64::from_polar(0.33, PI / 25.0);
        MapSpec::Blaschke(BlaschkeParams::new(mu, mu).unwrap())
    }

    fn circle(p: &PhasePoint) -> f64 {
        match p {
            PhasePoint::Circle(a) => *a,
            _ => panic!("expected circle point"),
        }
    }

    #[test]
    fn bernoulli_grid() {
        let s = equidistant_circle_nodes(&MapSpec::bernoulli(), 4).unwrap();
        let pts: Vec<_> = s.points().iter().map(circle).collect();
        let imgs: Vec<_> = s.images().iter().map(circle).collect();
        assert_eq!(pts, vec![0.0, PI / 2.0, PI, 1.5 * PI]);
        for (got, want) in imgs.iter().zip([0.0, PI, 0.0, PI]) {
            assert!((got - want).abs() < 1e-15);
        }

        let s = equidistant_circle_nodes(&MapSpec::bernoulli(), 1).unwrap();
        assert_eq!(s.points(), &[PhasePoint::Circle(0.0)]);
        assert_eq!(s.images(), &[PhasePoint::Circle(0.0)]);
    }

    #[test]
    fn grid_points_are_exact_and_paired() {
        let map = reference_map();
        let s = equidistant_circle_nodes(&map, 100).unwrap();
        assert_eq!(s.len(), 100);
        for (j, (p, q)) in s.points().iter().zip(s.images()).enumerate() {
            assert_eq!(circle(p), TAU * j as f64 / 100.0);
            assert_eq!(map.apply(*p).unwrap(), *q);
        }
    }

    #[test]
    fn grid_errors() {
        assert!(equidistant_circle_nodes(&MapSpec::bernoulli(), 0).is_err());
        let cat = MapSpec::Torus(TorusMapParams::linear());
        assert!(matches!(
            equidistant_circle_nodes(&cat, 4),
            Err(EdmdError::DimensionMismatch { .. })
        ));
        assert!(torus_lattice_nodes(&MapSpec::bernoulli(), 2, 2).is_err());
    }

    #[test]
    fn aliasing_flag() {
        let s = equidistant_circle_nodes(&MapSpec::bernoulli(), 12).unwrap();
        assert!(s.aliased_for(11));
        let s = equidistant_circle_nodes(&MapSpec::bernoulli(), 100).unwrap();
        assert!(!s.aliased_for(11));
    }

    #[test]
    fn lattices() {
        let cat = MapSpec::Torus(TorusMapParams::linear());
        let s = torus_lattice_nodes(&cat, 2, 2).unwrap();
        let want_pts = [[0.0, 0.0], [0.0, PI], [PI, 0.0], [PI, PI]];
        let want_imgs = [[0.0, 0.0], [PI, PI], [0.0, PI], [PI, 0.0]];
        for (j, p) in s.points().iter().enumerate() {
            assert_eq!(p.angles(), want_pts[j]);
            let q = s.images()[j].angles();
            for c in 0..2 {
                let d = (q[c] - want_imgs[j][c]).abs();
                assert!(d < 1e-12 || (d - TAU).abs() < 1e-12, "{q:?} vs {:?}", want_imgs[j]);
            }
        }

        let s = torus_lattice_nodes(&cat, 1, 1).unwrap();
        assert_eq!(s.points(), &[PhasePoint::Torus([0.0, 0.0])]);

        let deformed = MapSpec::Torus(TorusMapParams::new(Complex64::new(-0.6, -0.55)).unwrap());
        assert_eq!(torus_lattice_nodes(&deformed, 201, 201).unwrap().len(), 40401);
    }

    #[test]
    fn trajectories() {
        let b = MapSpec::bernoulli();
        let s = trajectory_nodes(&b, TrajectoryStart::Point(PhasePoint::Circle(2.0 * PI / 3.0)), 0, 2).unwrap();
        let pts: Vec<_> = s.points().iter().map(circle).collect();
        let imgs: Vec<_> = s.images().iter().map(circle).collect();
        assert!((pts[0] - 2.0 * PI / 3.0).abs() < 1e-15 && (pts[1] - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((imgs[0] - 4.0 * PI / 3.0).abs() < 1e-14 && (imgs[1] - 2.0 * PI / 3.0).abs() < 1e-14);

        let s = trajectory_nodes(&b, TrajectoryStart::Point(PhasePoint::Circle(0.0)), 100, 3).unwrap();
        assert!(s.points().iter().all(|p| circle(p) == 0.0));
    }

    #[test]
    fn seeded_trajectories_are_reproducible_and_paired() {
        let map = reference_map();
        let a = trajectory_nodes(&map, TrajectoryStart::Seed(7), 50, 200).unwrap();
        let b = trajectory_nodes(&map, TrajectoryStart::Seed(7), 50, 200).unwrap();
        assert_eq!(a, b);
        for (p, q) in a.points().iter().zip(a.images()) {
            assert_eq!(map.apply(*p).unwrap(), *q);
        }
        match a.provenance() {
            Provenance::Trajectory { seed, burn_in, .. } => {
                assert_eq!(*seed, Some(7));
                assert_eq!(*burn_in, 50);
            }
            other => panic!("unexpected provenance {other:?}"),
        }
        let c = trajectory_nodes(&map, TrajectoryStart::Seed(8), 50, 200).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn angle_file_loader() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "0.5 1.0\n1.5\n").unwrap();
        let s = load_angle_sequence(f.path()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.images()[1], PhasePoint::Circle(1.5));

        let mut bad = tempfile::NamedTempFile::new().unwrap();
        writeln!(bad, "0.5 x").unwrap();
        assert!(matches!(load_angle_sequence(bad.path()), Err(EdmdError::Config(_))));
    }
}
