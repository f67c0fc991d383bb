//! Error-versus-interaction curves as a standalone SVG.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::runner::{Algorithm, RunRow};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;

fn colour(algo: Algorithm) -> &'static str {
    match algo {
        Algorithm::Naive => "#7f7f7f",
        Algorithm::Bayes => "#2ca02c",
        Algorithm::Convey => "#ff7f0e",
        Algorithm::Distinguish => "#9467bd",
        Algorithm::Limit => "#d62728",
    }
}

/// Mean and standard error of the error at each interaction index.
pub fn error_curves(rows: &[RunRow]) -> BTreeMap<Algorithm, Vec<(f64, f64)>> {
    let mut by: BTreeMap<Algorithm, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for r in rows {
        by.entry(r.algorithm)
            .or_default()
            .entry(r.interaction)
            .or_default()
            .push(r.error);
    }
    by.into_iter()
        .map(|(algo, per)| {
            let curve = per
                .values()
                .map(|v| {
                    let n = v.len() as f64;
                    let mean = v.iter().sum::<f64>() / n;
                    let se = if v.len() > 1 {
                        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() / n.sqrt()
                    } else {
                        0.0
                    };
                    (mean, se)
                })
                .collect();
            (algo, curve)
        })
        .collect()
}

pub fn error_curves_svg(rows: &[RunRow], title: &str) -> String {
    let curves = error_curves(rows);
    let n = curves.values().map(Vec::len).max().unwrap_or(1).max(2);
    let y_max = curves
        .values()
        .flatten()
        .map(|(m, s)| m + s)
        .fold(1e-9_f64, f64::max)
        * 1.05;
    let px = |i: usize| MARGIN + (WIDTH - 2.0 * MARGIN) * i as f64 / (n - 1) as f64;
    let py = |v: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * v / y_max;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        svg,
        r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" stroke="black" fill="none"/>"#
    );
    for k in 0..=4 {
        let v = y_max * k as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.1}</text>"#,
            x0 - 6.0,
            py(v) + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">interaction</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">error</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for (k, (algo, curve)) in curves.iter().enumerate() {
        let c = colour(*algo);
        let upper = curve.iter().enumerate().map(|(i, (m, s))| (px(i), py(m + s)));
        let lower = curve.iter().enumerate().rev().map(|(i, (m, s))| (px(i), py((m - s).max(0.0))));
        let band: Vec<String> = upper
            .chain(lower)
            .map(|(x, y)| format!("{x:.1},{y:.1}"))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polygon points="{}" fill="{c}" fill-opacity="0.15" stroke="none"/>"#,
            band.join(" ")
        );
        let line: Vec<String> = curve
            .iter()
            .enumerate()
            .map(|(i, (m, _))| format!("{:.1},{:.1}", px(i), py(*m)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="2"/>"#,
            line.join(" ")
        );
        let ly = MARGIN + 16.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{c}" stroke-width="3"/><text x="{}" y="{}">{}</text>"#,
            x1 - 110.0,
            x1 - 90.0,
            x1 - 84.0,
            ly + 4.0,
            algo.name()
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::humans::HumanKind;

    #[test]
    fn curves_average_over_seeds() {
        let mk = |seed, interaction, error| RunRow {
            preset: "sim1d".into(),
            algorithm: Algorithm::Naive,
            human: HumanKind::Rotate,
            seed,
            interaction,
            error,
            distance: 0.0,
            reward: 0.0,
            human_sign: 1.0,
            human_angle: 0.0,
            human_scale: 1.0,
            loss_convey: None,
            loss_distinguish: None,
            loss_total: None,
        };
        let rows = vec![mk(0, 0, 1.0), mk(1, 0, 3.0), mk(0, 1, 2.0), mk(1, 1, 2.0)];
        let c = &error_curves(&rows)[&Algorithm::Naive];
        assert_eq!(c[0], (2.0, 1.0));
        assert_eq!(c[1], (2.0, 0.0));
        let svg = error_curves_svg(&rows, "a < b");
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("a &lt; b"));
        assert!(svg.contains("naive"));
    }
}
