//! Minimal self-contained SVG plots.

use std::fmt::Write;

use num_complex::Complex64;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn header(out: &mut String, w: u32, h: u32) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
}

/// Eigenvalues in the complex plane: computed values as filled dots, oracle
/// values as open circles, plus the unit circle.
pub fn spectrum_scatter(title: &str, computed: &[Complex64], oracle: &[Complex64]) -> String {
    let size = 480.0;
    let c = size / 2.0;
    let extent = computed
        .iter()
        .chain(oracle)
        .map(|z| z.norm())
        .filter(|r| r.is_finite())
        .fold(1.0, f64::max)
        * 1.1;
    let scale = (size / 2.0 - 30.0) / extent;
    let px = |z: Complex64| (c + z.re * scale, c - z.im * scale);

    let mut out = String::new();
    header(&mut out, size as u32, size as u32);
    let _ = writeln!(out, r#"<text x="{c}" y="18" text-anchor="middle">{}</text>"#, escape(title));
    let _ = writeln!(
        out,
        r##"<line x1="20" y1="{c}" x2="{}" y2="{c}" stroke="#999" stroke-width="0.5"/>"##,
        size - 20.0
    );
    let _ = writeln!(
        out,
        r##"<line x1="{c}" y1="30" x2="{c}" y2="{}" stroke="#999" stroke-width="0.5"/>"##,
        size - 20.0
    );
    let r = scale;
    let _ = writeln!(
        out,
        r##"<path id="unit-circle" d="M {:.3} {c:.3} A {r:.3} {r:.3} 0 1 0 {:.3} {c:.3} A {r:.3} {r:.3} 0 1 0 {:.3} {c:.3} Z" fill="none" stroke="#555" stroke-width="1"/>"##,
        c + r,
        c - r,
        c + r
    );
    let _ = writeln!(out, r#"<g id="oracle-points">"#);
    for &z in oracle {
        let (x, y) = px(z);
        let _ = writeln!(
            out,
            r##"<circle class="oracle" cx="{x:.3}" cy="{y:.3}" r="6" fill="none" stroke="#d62728" stroke-width="1.5"/>"##
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<g id="computed-points">"#);
    for &z in computed {
        let (x, y) = px(z);
        let _ = writeln!(
            out,
            r##"<circle class="computed" cx="{x:.3}" cy="{y:.3}" r="3" fill="#1f77b4"/>"##
        );
    }
    let _ = writeln!(out, "</g>");
    let ly = size - 12.0;
    let _ = writeln!(
        out,
        r##"<g id="legend"><circle cx="30" cy="{ly}" r="3" fill="#1f77b4"/><text x="40" y="{}">EDMD</text><circle cx="100" cy="{ly}" r="6" fill="none" stroke="#d62728" stroke-width="1.5"/><text x="112" y="{}">exact</text></g>"##,
        ly + 4.0,
        ly + 4.0
    );
    out.push_str("</svg>\n");
    out
}

/// Semi-log plot of error against dictionary size, one curve per series.
/// Non-positive or missing values are left out of the curve.
pub fn decay_curves(title: &str, ns: &[usize], series: &[Vec<Option<f64>>]) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 120.0, 30.0, 50.0);
    let logs: Vec<f64> = series
        .iter()
        .flatten()
        .flatten()
        .filter(|e| **e > 0.0 && e.is_finite())
        .map(|e| e.log10())
        .collect();
    let ymin = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let ymax = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (ymin, ymax) = if logs.is_empty() {
        (-16.0, 0.0)
    } else {
        let (a, b) = (ymin.floor(), ymax.ceil());
        if a == b {
            (a - 1.0, b + 1.0)
        } else {
            (a, b)
        }
    };
    let xmin = ns.iter().copied().min().unwrap_or(0) as f64;
    let xmax = ns.iter().copied().max().unwrap_or(1) as f64;
    let xspan = if xmax > xmin { xmax - xmin } else { 1.0 };
    let px = |n: f64| left + (n - xmin) / xspan * (w - left - right);
    let py = |l: f64| top + (ymax - l) / (ymax - ymin) * (h - top - bottom);

    let mut out = String::new();
    header(&mut out, w as u32, h as u32);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="18" text-anchor="middle">{}</text>"#,
        (left + w - right) / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r##"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="#333"/>"##,
        w - left - right,
        h - top - bottom
    );
    let mut e = ymin as i64;
    while e as f64 <= ymax {
        let y = py(e as f64);
        let _ = writeln!(
            out,
            r##"<line x1="{left}" y1="{y:.3}" x2="{}" y2="{y:.3}" stroke="#ddd"/><text x="{}" y="{:.3}" text-anchor="end">1e{e}</text>"##,
            w - right,
            left - 6.0,
            y + 4.0
        );
        e += 1;
    }
    for &n in ns {
        let x = px(n as f64);
        let _ = writeln!(
            out,
            r#"<text x="{x:.3}" y="{}" text-anchor="middle">{n}</text>"#,
            h - bottom + 16.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">N</text>"#,
        (left + w - right) / 2.0,
        h - 10.0
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = ns
            .iter()
            .zip(s)
            .filter_map(|(&n, e)| e.filter(|v| *v > 0.0 && v.is_finite()).map(|v| (px(n as f64), py(v.log10()))))
            .collect();
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
        let _ = writeln!(
            out,
            r#"<polyline class="pair-curve" data-pair="{}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            i + 1,
            coords.join(" ")
        );
        for (x, y) in &pts {
            let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="2.5" fill="{color}"/>"#);
        }
        let ly = top + 16.0 * (i as f64 + 1.0);
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">pair {}</text>"#,
            w - right + 10.0,
            w - right + 30.0,
            w - right + 36.0,
            ly + 4.0,
            i + 1
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scatter_counts() {
        let comp = vec![Complex64::new(0.5, 0.1); 4];
        let orc = vec![Complex64::new(1.0, 0.0); 3];
        let s = spectrum_scatter("t", &comp, &orc);
        assert_eq!(s.matches(r#"class="computed""#).count(), 4);
        assert_eq!(s.matches(r#"class="oracle""#).count(), 3);
        assert_eq!(s.matches(r#"id="unit-circle""#).count(), 1);
    }

    #[test]
    fn decay_has_one_curve_per_series() {
        let s = decay_curves("t", &[11, 15], &vec![vec![Some(1e-3), Some(0.0)]; 5]);
        assert_eq!(s.matches(r#"class="pair-curve""#).count(), 5);
        let empty = decay_curves("t", &[], &[]);
        assert!(empty.starts_with("<svg") && empty.ends_with("</svg>\n"));
    }
}
