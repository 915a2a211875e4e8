use std::f64::consts::{PI, TAU};

use analytic_edmd::dynamics::{reduce_angle, BlaschkeParams, MapSpec, PhasePoint, TorusMapParams};
use analytic_edmd::edmd::{
    assemble_edmd, build_gram_matrices, edmd_from_samples, galerkin_representation, least_squares_edmd,
    reversal, transfer_matrix_quadrature, Summation, DEFAULT_CUTOFF,
};
use analytic_edmd::observables::{evaluate_dictionary, evaluate_dictionary_images, fourier_dictionary};
use analytic_edmd::oracle::blaschke_fixed_point;
use analytic_edmd::sampling::{equidistant_circle_nodes, trajectory_nodes, TrajectoryStart};
use analytic_edmd::spectral::{conjugate_symmetrize_report, eigendecompose, match_spectra, spectral_order, Spectrum};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn disk(r_max: f64) -> impl Strategy<Value = Complex64> {
    (0.0..r_max, 0.0..TAU).prop_map(|(r, a)| Complex64::from_polar(r, a))
}

fn blaschke() -> impl Strategy<Value = BlaschkeParams> {
    (disk(0.8), disk(0.8)).prop_map(|(m, r)| BlaschkeParams::new(m, r).unwrap())
}

fn cmatrix(max_n: usize) -> impl Strategy<Value = DMatrix<Complex64>> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n)
            .prop_map(move |v| DMatrix::from_iterator(n, n, v.into_iter().map(|(a, b)| Complex64::new(a, b))))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn blaschke_preserves_circle(p in blaschke(), phi in 0.0..TAU) {
        let w = p.eval(Complex64::cis(phi)).unwrap();
        prop_assert!((w.norm() - 1.0).abs() < 1e-12);
        prop_assert!((Complex64::cis(p.angle_map(phi)) - w).norm() < 1e-12);
        let a = p.angle_map(phi);
        prop_assert!((0.0..TAU).contains(&a));
    }

    #[test]
    fn branches_round_trip(p in blaschke(), psi in 0.0..TAU) {
        let w = Complex64::cis(psi);
        let [a, b] = p.inverse_branches(w).unwrap();
        prop_assert!((a - b).norm() > 1e-8);
        for z in [a, b] {
            prop_assert!((z.norm() - 1.0).abs() < 1e-10);
            prop_assert!((p.eval(z).unwrap() - w).norm() < 1e-10);
        }
        prop_assert!(a.arg() <= b.arg());
    }

    #[test]
    fn derivative_matches_finite_difference(p in blaschke(), phi in 0.0..TAU) {
        let z = Complex64::cis(phi);
        let h = 1e-6;
        let fd = (p.eval(z + h).unwrap() - p.eval(z - h).unwrap()) / (2.0 * h);
        let d = p.derivative(z).unwrap();
        prop_assert!((fd - d).norm() <= 1e-6 * d.norm().max(1.0));
        // angle-map derivative is |τ'| on the circle for these maps
        let da = p.angle_map_derivative(phi).unwrap();
        prop_assert!((da - d.norm()).abs() < 1e-9 * da.max(1.0));
        prop_assert!(da > 0.0);
    }

    #[test]
    fn torus_map_is_measure_preserving_shear(mu in disk(0.9), x in 0.0..TAU, y in 0.0..TAU) {
        let t = TorusMapParams::new(mu).unwrap();
        let [a, b] = t.apply([x, y]);
        prop_assert!((0.0..TAU).contains(&a) && (0.0..TAU).contains(&b));
        let lin = TorusMapParams::linear().apply([x, y]);
        prop_assert!((Complex64::cis(lin[0]) - Complex64::cis(2.0 * x + y)).norm() < 1e-12);
        prop_assert!((Complex64::cis(lin[1]) - Complex64::cis(x + y)).norm() < 1e-12);
        prop_assert!(reduce_angle(lin[0]) == lin[0]);
    }

    #[test]
    fn eigensolver_residuals_and_invariants(a in cmatrix(10)) {
        let s = eigendecompose(&a).unwrap();
        prop_assert_eq!(s.len(), a.nrows());
        prop_assert!(s.max_residual() <= 1e-8);
        let tr: Complex64 = s.eigenvalues.iter().sum();
        prop_assert!((tr - a.trace()).norm() <= 1e-10 * a.norm().max(1.0));
        let det: Complex64 = s.eigenvalues.iter().product();
        let d = a.clone().determinant();
        prop_assert!((det - d).norm() <= 1e-8 * d.norm().max(1.0));
        for w in s.eigenvalues.windows(2) {
            prop_assert!(w[0].norm() >= w[1].norm() * (1.0 - 1e-10) - 1e-300);
        }
    }

    #[test]
    fn spectrum_invariant_under_similarity(a in cmatrix(8), shift in -0.5..0.5f64) {
        let n = a.nrows();
        // unit lower-triangular similarity, well conditioned
        let s = DMatrix::from_fn(n, n, |i, j| {
            if i == j { Complex64::new(1.0, 0.0) } else if i > j { Complex64::new(shift, 0.0) / (n as f64) } else { Complex64::new(0.0, 0.0) }
        });
        let inv = s.clone().try_inverse().unwrap();
        let b = &s * &a * inv;
        let sa = eigendecompose(&a).unwrap();
        let sb = eigendecompose(&b).unwrap();
        let m = match_spectra(&sb, &sa, n);
        prop_assert!(m.max_error() < 1e-6, "{}", m.max_error());
    }

    #[test]
    fn ordering_is_deterministic(v in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 0..20)) {
        let mut values: Vec<Complex64> = v.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        // add conjugates to exercise the tie rule
        values.extend(values.clone().iter().map(|z| z.conj()));
        let a = Spectrum::from_values(values.clone());
        values.reverse();
        let b = Spectrum::from_values(values);
        prop_assert_eq!(&a.eigenvalues, &b.eigenvalues);
        let order = spectral_order(&a.eigenvalues);
        prop_assert_eq!(order, (0..a.len()).collect::<Vec<_>>());
    }

    #[test]
    fn least_squares_equals_gram_route(p in blaschke(), nbar in 0usize..6, extra in 0usize..40) {
        let map = MapSpec::Blaschke(p);
        let dict = fourier_dictionary(nbar, 1).unwrap();
        let samples = equidistant_circle_nodes(&map, dict.len() + extra).unwrap();
        let (g, h) = build_gram_matrices(&dict, &samples).unwrap();
        let a = assemble_edmd(&g, &h, DEFAULT_CUTOFF).unwrap().a;
        let x = evaluate_dictionary(&dict, &samples).unwrap();
        let y = evaluate_dictionary_images(&dict, &samples).unwrap();
        let (b, _) = least_squares_edmd(&x, &y, DEFAULT_CUTOFF).unwrap();
        prop_assert!((a - b).iter().map(|z| z.norm()).fold(0.0, f64::max) <= 1e-10);
    }

    #[test]
    fn edmd_and_galerkin_spectra_agree(p in blaschke(), nbar in 0usize..6, extra in 0usize..40) {
        let map = MapSpec::Blaschke(p);
        let dict = fourier_dictionary(nbar, 1).unwrap();
        let m = dict.len() + extra;
        let samples = equidistant_circle_nodes(&map, m).unwrap();
        let a = edmd_from_samples(&dict, &samples, DEFAULT_CUTOFF, Summation::Ordered).unwrap().a;
        let gal = galerkin_representation(&transfer_matrix_quadrature(&map, &dict, m).unwrap()).unwrap();
        // A and the Galerkin matrix are similar through the index reversal R
        let r = reversal(dict.len());
        let rar = &r * &a * &r;
        prop_assert!((rar - &gal.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max) <= 1e-12);
        let sa = eigendecompose(&a).unwrap();
        let sg = eigendecompose(&gal.matrix).unwrap();
        // spectra are only stable to roundoff when eigenvalues are separated
        let sep = sa.eigenvalues.iter().enumerate()
            .flat_map(|(i, x)| sa.eigenvalues[i + 1..].iter().map(move |y| (x - y).norm()))
            .fold(f64::INFINITY, f64::min);
        prop_assume!(sep > 1e-3);
        prop_assert!(match_spectra(&sa, &sg, sg.len()).max_error() <= 1e-10);
    }

    #[test]
    fn edmd_spectra_are_conjugation_closed(p in blaschke(), nbar in 1usize..6, seed in any::<u64>()) {
        // trajectories of non-expanding maps collapse onto an attracting point
        prop_assume!(blaschke_fixed_point(&p).is_ok());
        let map = MapSpec::Blaschke(p);
        let dict = fourier_dictionary(nbar, 1).unwrap();
        let samples = trajectory_nodes(&map, TrajectoryStart::Seed(seed), 10, 400).unwrap();
        let a = edmd_from_samples(&dict, &samples, DEFAULT_CUTOFF, Summation::Ordered).unwrap().a;
        let s = eigendecompose(&a).unwrap();
        prop_assert!(conjugate_symmetrize_report(&s).hausdorff_distance <= 1e-8);
        prop_assert!(s.max_residual() <= 1e-8);
    }

    #[test]
    fn dictionary_conjugation(nbar in 0usize..8, phi in 0.0..TAU) {
        let dict = fourier_dictionary(nbar, 1).unwrap();
        let x = dict.evaluate(&[PhasePoint::Circle(phi)]).unwrap();
        for i in 0..dict.len() {
            prop_assert_eq!(x.0[(dict.negated(i), 0)], x.0[(i, 0)].conj());
        }
    }
}

#[test]
fn pi_is_a_fixed_angle_of_the_bernoulli_map() {
    let p = BlaschkeParams::bernoulli();
    assert!((p.angle_map(PI) - 0.0).abs() < 1e-12 || (p.angle_map(PI) - TAU).abs() < 1e-12);
}
