//! Report types produced by the experiments.

use num_complex::Complex64;
use serde::Serialize;

use super::config::{Experiment, ExperimentConfig};
use crate::edmd::PinvMetadata;
use crate::oracle::FixedPointData;
use crate::sampling::Provenance;
use crate::spectral::MatchedPair;

/// Errors below this are treated as rounding noise when fitting decay rates
/// and checking monotonicity.
pub const NOISE_FLOOR: f64 = 1e-13;

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub experiment: Experiment,
    pub config: ExperimentConfig,
    pub result: ReportBody,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportBody {
    Bernoulli(BernoulliReport),
    Spectrum(SpectrumReport),
    Convergence(ConvergenceReport),
    Timeseries(Box<TimeseriesReport>),
}

#[derive(Clone, Debug, Serialize)]
pub struct BernoulliReport {
    pub nbar: usize,
    pub nodes: usize,
    pub dictionary_size: usize,
    /// `M < 3N/2`: the grid sums alias and the closed form is the aliased one.
    pub aliased: bool,
    pub max_deviation_g: f64,
    pub max_deviation_h: f64,
    pub max_deviation_a: f64,
    /// `max |H_{kℓ} − δ_{k,−ℓ}|`.
    pub orthogonality_defect: f64,
    pub pinv: PinvMetadata,
    pub eigenvalues: Vec<Complex64>,
    pub residuals: Vec<f64>,
    pub oracle: Vec<Complex64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub dictionary_size: usize,
    pub samples: usize,
    pub provenance: Option<Provenance>,
    pub pinv: Option<PinvMetadata>,
    pub fixed_point: Option<FixedPointData>,
    pub eigenvalues: Vec<Complex64>,
    pub residuals: Vec<f64>,
    pub oracle: Vec<Complex64>,
    pub matches: Vec<MatchedPair>,
    /// Per computed eigenvalue: moved more than the stability tolerance when
    /// the dictionary grows by four modes. Absent when not computed.
    pub unstable: Option<Vec<bool>>,
    pub conjugation_distance: f64,
}

impl SpectrumReport {
    pub fn empty() -> Self {
        SpectrumReport {
            dictionary_size: 0,
            samples: 0,
            provenance: None,
            pinv: None,
            fixed_point: None,
            eigenvalues: Vec::new(),
            residuals: Vec::new(),
            oracle: Vec::new(),
            matches: Vec::new(),
            unstable: None,
            conjugation_distance: 0.0,
        }
    }

    /// Error of the oracle eigenvalue at position `index`, if matched.
    pub fn oracle_error(&self, index: usize) -> Option<f64> {
        self.matches.iter().find(|m| m.oracle_index == index).map(|m| m.error)
    }

    /// Worse of the two errors of conjugate pair `n ≥ 1` (oracle positions
    /// `2n − 1` and `2n`).
    pub fn pair_error(&self, n: usize) -> Option<f64> {
        let a = self.oracle_error(2 * n - 1)?;
        let b = self.oracle_error(2 * n)?;
        Some(a.max(b))
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    /// Dictionary size `N = 2N̄ + 1`.
    pub n: usize,
    /// Error of conjugate pair `1..=q`; `None` if unmatched.
    pub errors: Vec<Option<f64>>,
}

/// Least-squares fit of `log₁₀(error) = intercept + slope · N`.
#[derive(Clone, Debug, Serialize)]
pub struct RateFit {
    pub pair: usize,
    /// Points above the noise floor used in the fit.
    pub points: usize,
    pub applicable: bool,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// Decay rate `a` in `error ~ exp(−a N)`.
    pub rate: Option<f64>,
    pub r_squared: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub nodes: usize,
    pub pairs: usize,
    pub noise_floor: f64,
    pub fixed_point: Option<FixedPointData>,
    pub oracle: Vec<Complex64>,
    pub rows: Vec<ConvergenceRow>,
    pub fits: Vec<RateFit>,
}

impl ConvergenceReport {
    pub fn pair_errors(&self, pair: usize) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.errors.get(pair - 1).copied().flatten()).collect()
    }

    /// Errors of `pair` that lie above the noise floor never increase with N.
    pub fn non_increasing_above_floor(&self, pair: usize) -> bool {
        let vals: Vec<f64> = self
            .pair_errors(pair)
            .into_iter()
            .flatten()
            .filter(|&e| e >= self.noise_floor)
            .collect();
        vals.windows(2).all(|w| w[1] <= w[0])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TimeseriesReport {
    pub full: SpectrumReport,
    pub half: SpectrumReport,
    pub leading_error_full: Option<f64>,
    pub leading_error_half: Option<f64>,
    pub pair_error_full: Option<f64>,
    pub pair_error_half: Option<f64>,
    /// True when `M/2` samples give a smaller first-pair error than `M`.
    /// In the statistical regime this is a coin flip.
    pub halving_improves: bool,
}

/// Least-squares line through `(x, y)`. Needs two distinct abscissae.
pub fn fit_line(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Some((slope, intercept, r2))
}

pub fn rate_fit(pair: usize, ns: &[usize], errors: &[Option<f64>], floor: f64) -> RateFit {
    let (x, y): (Vec<f64>, Vec<f64>) = ns
        .iter()
        .zip(errors)
        .filter_map(|(&n, e)| e.filter(|&e| e.is_finite() && e >= floor).map(|e| (n as f64, e.log10())))
        .unzip();
    let fit = fit_line(&x, &y);
    RateFit {
        pair,
        points: x.len(),
        applicable: fit.is_some(),
        slope: fit.map(|f| f.0),
        intercept: fit.map(|f| f.1),
        rate: fit.map(|f| -f.0 * std::f64::consts::LN_10),
        r_squared: fit.map(|f| f.2),
    }
}

impl Report {
    /// One-line human summary for the terminal.
    pub fn summary(&self) -> String {
        match &self.result {
            ReportBody::Bernoulli(b) => format!(
                "N={} M={} aliased={} max|dA|={:.3e} max|dG|={:.3e} max|dH|={:.3e}",
                b.dictionary_size, b.nodes, b.aliased, b.max_deviation_a, b.max_deviation_g, b.max_deviation_h
            ),
            ReportBody::Spectrum(s) => format!(
                "N={} M={} matched={} max error={:.3e} max residual={:.3e}",
                s.dictionary_size,
                s.samples,
                s.matches.len(),
                s.matches.iter().map(|m| m.error).fold(0.0, f64::max),
                s.max_residual()
            ),
            ReportBody::Convergence(c) => {
                let slopes: Vec<String> = c
                    .fits
                    .iter()
                    .map(|f| f.slope.map_or("n/a".into(), |s| format!("{s:.3}")))
                    .collect();
                format!("M={} rows={} slopes=[{}]", c.nodes, c.rows.len(), slopes.join(", "))
            }
            ReportBody::Timeseries(t) => format!(
                "M={} pair error {} (M/2: {}) halving_improves={}",
                t.full.samples,
                fmt_opt(t.pair_error_full),
                fmt_opt(t.pair_error_half),
                t.halving_improves
            ),
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("n/a".into(), |e| format!("{e:.3e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_recovers_exact_line() {
        let x = [11.0, 15.0, 21.0];
        let y: Vec<f64> = x.iter().map(|a| 2.0 - 0.5 * a).collect();
        let (s, i, r2) = fit_line(&x, &y).unwrap();
        assert!((s + 0.5).abs() < 1e-12 && (i - 2.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_point_fit_is_not_applicable() {
        let f = rate_fit(1, &[11], &[Some(1e-3)], NOISE_FLOOR);
        assert!(!f.applicable && f.slope.is_none());
    }

    #[test]
    fn floor_values_are_excluded() {
        let f = rate_fit(1, &[11, 15, 21], &[Some(1e-3), Some(1e-5), Some(1e-15)], NOISE_FLOOR);
        assert_eq!(f.points, 2);
        assert!((f.slope.unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn monotonicity_ignores_noise() {
        let c = ConvergenceReport {
            nodes: 10,
            pairs: 1,
            noise_floor: NOISE_FLOOR,
            fixed_point: None,
            oracle: vec![],
            rows: [1e-3, 1e-8, 5e-14, 2e-13]
                .iter()
                .enumerate()
                .map(|(i, &e)| ConvergenceRow {
                    n: 11 + 4 * i,
                    errors: vec![Some(e)],
                })
                .collect(),
            fits: vec![],
        };
        assert!(c.non_increasing_above_floor(1));
    }
}
