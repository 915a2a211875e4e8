//! Writing reports as JSON, CSV tables and SVG plots.

use std::path::{Path, PathBuf};

use num_complex::Complex64;

use super::config::Format;
use super::report::{ConvergenceReport, Report, ReportBody, SpectrumReport};
use super::svg;
use crate::error::{EdmdError, Result};
use crate::spectral::MatchedPair;

const EIGEN_HEADER: [&str; 5] = ["set", "index", "re", "im", "modulus"];
const MATCH_HEADER: [&str; 7] = [
    "oracle_index",
    "computed_index",
    "oracle_re",
    "oracle_im",
    "computed_re",
    "computed_im",
    "error",
];
const ERROR_HEADER: [&str; 3] = ["n", "pair", "error"];
const FIT_HEADER: [&str; 6] = ["pair", "points", "slope", "intercept", "rate", "r_squared"];

/// 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, num)
}

/// In-memory CSV table with a fixed header.
struct Table(csv::Writer<Vec<u8>>);

impl Table {
    fn new(header: &[&str]) -> Self {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).expect("writing to memory");
        Table(w)
    }

    fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        self.0.write_record(fields.into_iter().collect::<Vec<_>>()).expect("writing to memory");
    }

    fn eigenvalues(&mut self, set: &str, values: &[Complex64]) {
        for (i, z) in values.iter().enumerate() {
            self.row([set.to_string(), i.to_string(), num(z.re), num(z.im), num(z.norm())]);
        }
    }

    fn matches(&mut self, pairs: &[MatchedPair]) {
        for p in pairs {
            self.row([
                p.oracle_index.to_string(),
                p.computed_index.to_string(),
                num(p.oracle.re),
                num(p.oracle.im),
                num(p.computed.re),
                num(p.computed.im),
                num(p.error),
            ]);
        }
    }

    fn finish(self) -> String {
        let bytes = self.0.into_inner().expect("flushing to memory");
        String::from_utf8(bytes).expect("CSV output is UTF-8")
    }
}

/// Structured JSON text of a report. Identical reports give identical text.
pub fn report_json(report: &Report) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| EdmdError::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn spectrum_tables(sets: &[(&str, &SpectrumReport)]) -> (String, String) {
    let mut eig = Table::new(&EIGEN_HEADER);
    for (name, s) in sets {
        eig.eigenvalues(name, &s.eigenvalues);
    }
    let first = sets[0].1;
    eig.eigenvalues("oracle", &first.oracle);
    let mut m = Table::new(&MATCH_HEADER);
    m.matches(&first.matches);
    (eig.finish(), m.finish())
}

fn convergence_tables(c: &ConvergenceReport) -> (String, String) {
    let mut errs = Table::new(&ERROR_HEADER);
    for row in &c.rows {
        for (k, e) in row.errors.iter().enumerate() {
            errs.row([row.n.to_string(), (k + 1).to_string(), opt(*e)]);
        }
    }
    let mut fits = Table::new(&FIT_HEADER);
    for f in &c.fits {
        fits.row([
            f.pair.to_string(),
            f.points.to_string(),
            opt(f.slope),
            opt(f.intercept),
            opt(f.rate),
            opt(f.r_squared),
        ]);
    }
    (errs.finish(), fits.finish())
}

/// `(file name, contents)` pairs for the requested format.
pub fn render(report: &Report, format: Format) -> Result<Vec<(String, String)>> {
    let stem = report.experiment.name();
    let title = stem.replace('-', " ");
    let file = |suffix: &str, ext: &str| format!("{stem}{suffix}.{ext}");
    Ok(match format {
        Format::Json => vec![(file("", "json"), report_json(report)?)],
        Format::Csv => match &report.result {
            ReportBody::Bernoulli(b) => {
                let mut eig = Table::new(&EIGEN_HEADER);
                eig.eigenvalues("computed", &b.eigenvalues);
                eig.eigenvalues("oracle", &b.oracle);
                vec![(file("_eigenvalues", "csv"), eig.finish())]
            }
            ReportBody::Spectrum(s) => {
                let (eig, m) = spectrum_tables(&[("computed", s)]);
                vec![(file("_eigenvalues", "csv"), eig), (file("_matches", "csv"), m)]
            }
            ReportBody::Timeseries(t) => {
                let (eig, m) = spectrum_tables(&[("computed_full", &t.full), ("computed_half", &t.half)]);
                vec![(file("_eigenvalues", "csv"), eig), (file("_matches", "csv"), m)]
            }
            ReportBody::Convergence(c) => {
                let (errs, fits) = convergence_tables(c);
                vec![(file("_errors", "csv"), errs), (file("_fits", "csv"), fits)]
            }
        },
        Format::Svg => match &report.result {
            ReportBody::Bernoulli(b) => vec![(
                file("_spectrum", "svg"),
                svg::spectrum_scatter(&title, &b.eigenvalues, &b.oracle),
            )],
            ReportBody::Spectrum(s) => vec![(
                file("_spectrum", "svg"),
                svg::spectrum_scatter(&title, &s.eigenvalues, &s.oracle),
            )],
            ReportBody::Timeseries(t) => vec![(
                file("_spectrum", "svg"),
                svg::spectrum_scatter(&title, &t.full.eigenvalues, &t.full.oracle),
            )],
            ReportBody::Convergence(c) => {
                let ns: Vec<usize> = c.rows.iter().map(|r| r.n).collect();
                let series: Vec<_> = (1..=c.pairs).map(|k| c.pair_errors(k)).collect();
                vec![(file("_errors", "svg"), svg::decay_curves(&title, &ns, &series))]
            }
        },
    })
}

/// Writes every requested format into `dir`, creating it if needed.
/// Returns the written paths in order.
pub fn emit_outputs(report: &Report, formats: &[Format], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| EdmdError::io(dir, e))?;
    let mut written = Vec::new();
    for &f in formats {
        for (name, contents) in render(report, f)? {
            let path = dir.join(name);
            std::fs::write(&path, contents).map_err(|e| EdmdError::io(&path, e))?;
            written.push(path);
        }
    }
    Ok(written)
}
