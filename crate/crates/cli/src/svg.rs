use std::fmt::Write;

use utility_eval::montecarlo::ScatterData;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 48.0;

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
        (l.min(v), h.max(v))
    });
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Metric score (vertical) against utility yield (horizontal); reversal
/// pairs in red, joined by a line.
pub fn scatter_svg(data: &ScatterData) -> String {
    let (x0, x1) = range(data.points.iter().map(|p| p.yield_value));
    let (y0, y1) = range(data.points.iter().map(|p| p.score));
    let span = SIZE - 2.0 * MARGIN;
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * span;
    let py = |y: f64| SIZE - MARGIN - (y - y0) / (y1 - y0) * span;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{span}" height="{span}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">utility yield [{x0:.3}, {x1:.3}]</text>"#,
        SIZE / 2.0,
        SIZE - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 14 {})">{} [{y0:.3}, {y1:.3}]</text>"#,
        SIZE / 2.0,
        SIZE / 2.0,
        data.metric
    );
    for p in data.points.iter().filter(|p| !p.reversed) {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="2" fill="#3060c0" fill-opacity="0.6"/>"##,
            px(p.yield_value),
            py(p.score)
        );
    }
    for k in 0..data.witness_pairs() {
        let pair: Vec<_> = data
            .points
            .iter()
            .filter(|p| p.pair_id == Some(k))
            .collect();
        if let [a, b] = pair.as_slice() {
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="red"/>"#,
                px(a.yield_value),
                py(a.score),
                px(b.yield_value),
                py(b.score)
            );
        }
        for p in pair {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="red"/>"#,
                px(p.yield_value),
                py(p.score)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
