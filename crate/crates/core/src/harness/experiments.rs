//! The experiment drivers behind the CLI subcommands.

use num_complex::Complex64;

use super::config::{Experiment, ExperimentConfig, MapConfig, SamplingMode};
use super::report::{
    rate_fit, BernoulliReport, ConvergenceReport, ConvergenceRow, Report, ReportBody, SpectrumReport,
    TimeseriesReport, NOISE_FLOOR,
};
use crate::dynamics::MapSpec;
use crate::edmd::{edmd_from_samples, CMatrix, DEFAULT_CUTOFF};
use crate::error::{EdmdError, Result};
use crate::observables::{fourier_dictionary, Dictionary};
use crate::oracle::{bernoulli_exact_matrices, blaschke_exact_spectrum, blaschke_fixed_point, catmap_exact_spectrum};
use crate::sampling::{
    equidistant_circle_nodes, load_angle_sequence, torus_lattice_nodes, trajectory_nodes, SampleSet, TrajectoryStart,
};
use crate::spectral::{conjugate_symmetrize_report, eigendecompose, flag_unstable, match_spectra, Spectrum};

/// Extra modes per side used for the stability flag (`N → N + 4`).
const STABILITY_STEP: usize = 2;

fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Assembles the Bernoulli matrices on an `m`-node grid and compares them
/// with the closed-form sums.
pub fn run_bernoulli_check(nbar: usize, m: usize) -> Result<BernoulliReport> {
    let map = MapSpec::bernoulli();
    let dict = fourier_dictionary(nbar, 1)?;
    let samples = equidistant_circle_nodes(&map, m)?;
    let mats = edmd_from_samples(&dict, &samples, DEFAULT_CUTOFF, Default::default())?;
    let exact = bernoulli_exact_matrices(nbar, m)?;
    let n = dict.len();
    let orthogonality_defect = mats
        .h
        .iter()
        .enumerate()
        .map(|(idx, v)| {
            let (i, j) = (idx % n, idx / n);
            let target = if i + j == n - 1 { 1.0 } else { 0.0 };
            (v - Complex64::new(target, 0.0)).norm()
        })
        .fold(0.0, f64::max);
    let spec = eigendecompose(&mats.a)?;
    let mut oracle = vec![Complex64::new(0.0, 0.0); n];
    oracle[0] = Complex64::new(1.0, 0.0);
    Ok(BernoulliReport {
        nbar,
        nodes: m,
        dictionary_size: n,
        aliased: !exact.exact,
        max_deviation_g: max_abs_diff(&mats.g, &exact.g),
        max_deviation_h: max_abs_diff(&mats.h, &exact.h),
        max_deviation_a: max_abs_diff(&mats.a, &exact.a),
        orthogonality_defect,
        pinv: mats.pinv,
        eigenvalues: spec.eigenvalues,
        residuals: spec.residuals,
        oracle,
    })
}

/// Sample set described by the config's sampling section.
pub fn build_samples(config: &ExperimentConfig, map: &MapSpec) -> Result<SampleSet> {
    let s = &config.sampling;
    match s.mode {
        SamplingMode::Grid => equidistant_circle_nodes(map, s.nodes),
        SamplingMode::Lattice => torus_lattice_nodes(map, s.nodes, s.nodes2.unwrap_or(s.nodes)),
        SamplingMode::Trajectory => {
            let start = match (s.start_point(), s.seed) {
                (Some(p), _) => TrajectoryStart::Point(p),
                (None, Some(seed)) => TrajectoryStart::Seed(seed),
                (None, None) => {
                    return Err(EdmdError::Config(
                        "sampling: trajectory mode requires `seed` or `start`".into(),
                    ))
                }
            };
            trajectory_nodes(map, start, s.burn_in, s.nodes)
        }
        SamplingMode::File => {
            let path = s
                .file
                .as_ref()
                .ok_or_else(|| EdmdError::Config("sampling.file: required for file mode".into()))?;
            load_angle_sequence(path)
        }
    }
}

fn computed_spectrum(config: &ExperimentConfig, dict: &Dictionary, samples: &SampleSet) -> Result<(Spectrum, crate::edmd::PinvMetadata)> {
    let mats = edmd_from_samples(dict, samples, config.analysis.cutoff, config.analysis.summation)?;
    Ok((eigendecompose(&mats.a)?, mats.pinv))
}

fn oracle_for(config: &ExperimentConfig, map: &MapSpec) -> Result<(Spectrum, Option<crate::oracle::FixedPointData>)> {
    let p = config.analysis.eigenvalues;
    match map {
        MapSpec::Blaschke(b) => Ok((blaschke_exact_spectrum(b, p)?, Some(blaschke_fixed_point(b)?))),
        MapSpec::Torus(t) => Ok((catmap_exact_spectrum(t, p), None)),
    }
}

fn spectrum_report(
    config: &ExperimentConfig,
    map: &MapSpec,
    samples: &SampleSet,
    flag_stability: bool,
) -> Result<SpectrumReport> {
    let nbar = config.dictionary.nbar;
    let dict = fourier_dictionary(nbar, map.dimension())?;
    let (spec, pinv) = computed_spectrum(config, &dict, samples)?;
    let (oracle, fixed_point) = oracle_for(config, map)?;
    let matched = match_spectra(&spec, &oracle, config.analysis.eigenvalues);
    let unstable = if flag_stability {
        let bigger = fourier_dictionary(nbar + STABILITY_STEP, map.dimension())?;
        let (refined, _) = computed_spectrum(config, &bigger, samples)?;
        Some(flag_unstable(&spec, &refined, config.analysis.stability_tol))
    } else {
        None
    };
    Ok(SpectrumReport {
        dictionary_size: dict.len(),
        samples: samples.len(),
        provenance: Some(samples.provenance().clone()),
        pinv: Some(pinv),
        fixed_point,
        conjugation_distance: conjugate_symmetrize_report(&spec).hausdorff_distance,
        eigenvalues: spec.eigenvalues,
        residuals: spec.residuals,
        oracle: oracle.eigenvalues,
        matches: matched.pairs,
        unstable,
    })
}

fn require_circle(map: &MapSpec, what: &str) -> Result<()> {
    if map.dimension() != 1 {
        return Err(EdmdError::Config(format!("{what} needs a circle map (kind = \"blaschke\" or \"bernoulli\")")));
    }
    Ok(())
}

/// EDMD spectrum of a circle map against its oracle, with stability flags.
pub fn run_spectrum_experiment(config: &ExperimentConfig) -> Result<SpectrumReport> {
    let map = config.map_spec()?;
    require_circle(&map, "the spectrum experiment")?;
    let samples = build_samples(config, &map)?;
    spectrum_report(config, &map, &samples, true)
}

/// Pair errors for every dictionary size in `n_list` on a fixed sample set.
/// Sizes run concurrently; rows come out sorted by `N`.
pub fn run_convergence_sweep(config: &ExperimentConfig, n_list: &[usize]) -> Result<ConvergenceReport> {
    let map = config.map_spec()?;
    require_circle(&map, "the convergence sweep")?;
    let mut ns: Vec<usize> = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if let Some(bad) = ns.iter().find(|&&n| n % 2 == 0) {
        return Err(EdmdError::Config(format!("dictionary size {bad} is even; N = 2N̄+1 must be odd")));
    }
    let samples = build_samples(config, &map)?;
    let (oracle, fixed_point) = oracle_for(config, &map)?;
    let p = config.analysis.eigenvalues;
    let pairs = p.saturating_sub(1) / 2;

    let results: Vec<Result<ConvergenceRow>> = std::thread::scope(|scope| {
        let handles: Vec<_> = ns
            .iter()
            .map(|&n| {
                let (samples, oracle) = (&samples, &oracle);
                scope.spawn(move || {
                    let dict = fourier_dictionary((n - 1) / 2, 1)?;
                    let (spec, _) = computed_spectrum(config, &dict, samples)?;
                    let matched = match_spectra(&spec, oracle, p);
                    let err = |i: usize| matched.pairs.iter().find(|m| m.oracle_index == i).map(|m| m.error);
                    let errors = (1..=pairs)
                        .map(|k| Some(err(2 * k - 1)?.max(err(2 * k)?)))
                        .collect();
                    Ok(ConvergenceRow { n, errors })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    let fits = (1..=pairs)
        .map(|k| {
            let errs: Vec<Option<f64>> = rows.iter().map(|r| r.errors[k - 1]).collect();
            rate_fit(k, &ns, &errs, NOISE_FLOOR)
        })
        .collect();
    Ok(ConvergenceReport {
        nodes: samples.len(),
        pairs,
        noise_floor: NOISE_FLOOR,
        fixed_point,
        oracle: oracle.eigenvalues,
        rows,
        fits,
    })
}

/// Trajectory EDMD with `M` samples and with the first `M/2` of them.
pub fn run_timeseries_experiment(config: &ExperimentConfig) -> Result<TimeseriesReport> {
    let map = config.map_spec()?;
    require_circle(&map, "the time-series experiment")?;
    if !matches!(config.sampling.mode, SamplingMode::Trajectory | SamplingMode::File) {
        return Err(EdmdError::Config(
            "sampling.mode: the time-series experiment needs \"trajectory\" or \"file\"".into(),
        ));
    }
    let samples = build_samples(config, &map)?;
    let half_len = samples.len() / 2;
    if half_len == 0 {
        return Err(EdmdError::Config("sampling.nodes: need at least 2 samples to halve".into()));
    }
    let full = spectrum_report(config, &map, &samples, true)?;
    let half = spectrum_report(config, &map, &samples.prefix(half_len), true)?;
    let (pf, ph) = (full.pair_error(1), half.pair_error(1));
    Ok(TimeseriesReport {
        leading_error_full: full.oracle_error(0),
        leading_error_half: half.oracle_error(0),
        pair_error_full: pf,
        pair_error_half: ph,
        halving_improves: matches!((pf, ph), (Some(f), Some(h)) if h < f),
        full,
        half,
    })
}

/// Two-dimensional EDMD of the deformed cat map on a lattice.
pub fn run_catmap_experiment(config: &ExperimentConfig) -> Result<SpectrumReport> {
    let map = config.map_spec()?;
    if map.dimension() != 2 {
        return Err(EdmdError::Config("the cat-map experiment needs kind = \"catmap\"".into()));
    }
    let samples = build_samples(config, &map)?;
    spectrum_report(config, &map, &samples, false)
}

/// Runs `experiment` and wraps the result with the config echo.
pub fn run(experiment: Experiment, config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let result = match experiment {
        Experiment::BernoulliCheck => {
            if config.map != MapConfig::Bernoulli {
                return Err(EdmdError::Config("bernoulli-check needs kind = \"bernoulli\"".into()));
            }
            if config.sampling.mode != SamplingMode::Grid {
                return Err(EdmdError::Config("bernoulli-check needs sampling.mode = \"grid\"".into()));
            }
            ReportBody::Bernoulli(run_bernoulli_check(config.dictionary.nbar, config.sampling.nodes)?)
        }
        Experiment::Spectrum => ReportBody::Spectrum(run_spectrum_experiment(config)?),
        Experiment::Converge => {
            ReportBody::Convergence(run_convergence_sweep(config, &config.analysis.n_list)?)
        }
        Experiment::Timeseries => ReportBody::Timeseries(Box::new(run_timeseries_experiment(config)?)),
        Experiment::Catmap => ReportBody::Spectrum(run_catmap_experiment(config)?),
    };
    Ok(Report {
        experiment,
        config: config.clone(),
        result,
    })
}
