//! Static SVG rendering of tongue scans.

use std::fmt::Write;

use super::rotation::{ScanKind, TongueScan};

const W: f64 = 640.0;
const H: f64 = 480.0;
const M: f64 = 56.0;

fn color(q: u64) -> String {
    let hue = (q * 47 % 360) as f64;
    format!("hsl({hue:.0},65%,55%)")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        M + (v - self.x0) / (self.x1 - self.x0).max(f64::MIN_POSITIVE) * (W - 2.0 * M)
    }

    fn y(&self, v: f64) -> f64 {
        H - M - (v - self.y0) / (self.y1 - self.y0).max(f64::MIN_POSITIVE) * (H - 2.0 * M)
    }
}

fn axes(out: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        out,
        r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * M,
        H - 2.0 * M
    );
    for i in 0..=4 {
        let vx = f.x0 + (f.x1 - f.x0) * i as f64 / 4.0;
        let vy = f.y0 + (f.y1 - f.y0) * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{:.3}</text>"#,
            f.x(vx),
            H - M + 16.0,
            vx
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{:.3}</text>"#,
            M - 6.0,
            f.y(vy) + 4.0,
            vy
        );
    }
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{xlabel}</text>"#, W / 2.0, H - 12.0);
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.2})">{ylabel}</text>"#,
        H / 2.0,
        H / 2.0
    );
}

/// Tongue diagram over `(s, t)` when several lines were scanned, otherwise the
/// rotation-number staircase with shaded plateaus.
pub fn tongue_svg(scan: &TongueScan) -> String {
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let xlabel = match scan.kind {
        ScanKind::Arnold => "s",
        ScanKind::Radius => "r",
    };
    let params = scan.lines.first().map(|l| l.params.clone()).unwrap_or_default();
    let (x0, x1) = (
        params.iter().cloned().fold(f64::INFINITY, f64::min),
        params.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    if scan.lines.len() > 1 {
        let ts: Vec<f64> = scan.lines.iter().map(|l| l.t.unwrap_or(0.0)).collect();
        let dt = if ts.len() > 1 { (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64 } else { 1.0 };
        let f = Frame { x0, x1, y0: ts[0] - dt / 2.0, y1: ts[ts.len() - 1] + dt / 2.0 };
        for line in &scan.lines {
            let t = line.t.unwrap_or(0.0);
            for p in &line.plateaus {
                let xa = f.x(p.lo);
                let xb = f.x(p.hi).max(xa + 0.5);
                let _ = writeln!(
                    out,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}" fill-opacity="0.8"><title>{}/{}</title></rect>"#,
                    xa,
                    f.y(t + dt / 2.0),
                    xb - xa,
                    (f.y(t - dt / 2.0) - f.y(t + dt / 2.0)).abs(),
                    color(p.q),
                    p.p,
                    p.q
                );
            }
        }
        axes(&mut out, &f, xlabel, "t");
    } else if let Some(line) = scan.lines.first() {
        let f = Frame { x0, x1, y0: 0.0, y1: 1.0 };
        for p in &line.plateaus {
            let xa = f.x(p.lo);
            let xb = f.x(p.hi).max(xa + 0.5);
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{M}" width="{:.2}" height="{:.2}" fill="{}" fill-opacity="0.35"><title>{}/{}</title></rect>"#,
                xa,
                xb - xa,
                H - 2.0 * M,
                color(p.q),
                p.p,
                p.q
            );
        }
        let pts: Vec<String> = line.params.iter().zip(&line.rho).map(|(x, r)| format!("{:.2},{:.2}", f.x(*x), f.y(*r))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="black" stroke-width="1.2" points="{}"/>"#, pts.join(" "));
        axes(&mut out, &f, xlabel, "rho");
    }
    out.push_str("</svg>\n");
    out
}
