//! Density-vs-t SVG with a logarithmic t axis.

use burngrid::analysis::EndpointTable;
use burngrid::engine::DensityTrace;
use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 48.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn density_svg(trace: &DensityTrace, endpoints: Option<&EndpointTable>) -> String {
    let pts: Vec<(f64, f64)> = trace.entries().iter().map(|e| (e.t as f64, e.density())).collect();
    let t_min = pts.first().map_or(1.0, |p| p.0).max(1.0);
    let t_max = pts.last().map_or(10.0, |p| p.0).max(t_min * 10.0);
    let (lx0, lx1) = (t_min.log10().floor(), t_max.log10().ceil());
    let mut y_max = pts.iter().map(|p| p.1).fold(0.0, f64::max);
    if let Some(e) = endpoints {
        y_max = y_max.max(e.hi).max(e.lo);
    }
    let y_max = (y_max * 1.1).clamp(0.05, 1.0);
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let x = |t: f64| MARGIN_L + (t.log10() - lx0) / (lx1 - lx0) * pw;
    let y = |d: f64| MARGIN_T + (1.0 - d / y_max) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let meta = trace.metadata();
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN_L}" y="22">{} / {} ({})</text>"#,
        escape(&meta.growth),
        escape(&meta.strategy),
        escape(&meta.backend)
    );
    for k in lx0 as i32..=lx1 as i32 {
        let xv = x(10f64.powi(k));
        let _ = writeln!(
            s,
            r##"<line x1="{xv:.1}" y1="{MARGIN_T}" x2="{xv:.1}" y2="{:.1}" stroke="#ddd"/><text x="{xv:.1}" y="{:.1}" text-anchor="middle">1e{k}</text>"##,
            MARGIN_T + ph,
            MARGIN_T + ph + 18.0
        );
    }
    for k in 0..=5 {
        let d = y_max * k as f64 / 5.0;
        let yv = y(d);
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_L}" y1="{yv:.1}" x2="{:.1}" y2="{yv:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{d:.3}</text>"##,
            MARGIN_L + pw,
            MARGIN_L - 6.0,
            yv + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">t</text><text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle">density</text>"#,
        MARGIN_L + pw / 2.0,
        HEIGHT - 8.0,
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0
    );
    if let Some(e) = endpoints {
        let mut levels = vec![("lower", e.lo)];
        if !e.is_point() {
            levels.push(("upper", e.hi));
        }
        for (name, v) in levels {
            let yv = y(v.min(y_max));
            let _ = writeln!(
                s,
                r##"<line x1="{MARGIN_L}" y1="{yv:.1}" x2="{:.1}" y2="{yv:.1}" stroke="#c33" stroke-dasharray="6 4"/><text x="{:.1}" y="{:.1}" text-anchor="end" fill="#c33">{name} {v:.4}</text>"##,
                MARGIN_L + pw,
                MARGIN_L + pw - 4.0,
                yv - 4.0
            );
        }
    }
    let path: Vec<String> = pts.iter().map(|&(t, d)| format!("{:.1},{:.1}", x(t.max(t_min)), y(d))).collect();
    let _ = writeln!(s, r##"<polyline fill="none" stroke="#1f5fa8" stroke-width="1.5" points="{}"/>"##, path.join(" "));
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use burngrid::engine::Burned;

    #[test]
    fn svg_is_well_formed_enough() {
        let mut tr = DensityTrace::default();
        tr.push(8, Burned::Exact(10), 100);
        tr.push(100, Burned::Exact(30), 100);
        let e = EndpointTable { c: burngrid::rational::Rational::ONE, alpha: burngrid::rational::Rational::ONE, lo: 0.125, hi: 1.0 };
        let s = density_svg(&tr, Some(&e));
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches("<polyline").count(), 1);
        assert_eq!(s.matches("stroke-dasharray").count(), 2);
    }
}
