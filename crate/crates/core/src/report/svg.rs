//! Plain-text SVG for PCA scatter plots and aligned strip charts.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::pca::Projection;

use super::StripLayout;

const PALETTE: [&str; 2] = ["#1f77b4", "#d62728"];

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Linear map from a data interval onto a pixel interval.
#[derive(Debug, Clone, Copy)]
struct Scale {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Scale {
    fn padded(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
        let pad = 0.05 * (hi - lo);
        Self {
            lo: lo - pad,
            hi: hi + pad,
            px_lo,
            px_hi,
        }
    }

    fn map(&self, x: f64) -> f64 {
        self.px_lo + (x - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScatterStyle {
    pub title: Option<String>,
    /// Legend entry per projection.
    pub set_names: Vec<String>,
    /// Explained-variance shares of PC1 and PC2, shown in the axis labels.
    pub variance_ratio: Option<[f64; 2]>,
    pub width: Option<u32>,
    pub height: Option<u32>,
}

/// One labeled point per token; each projection gets its own marker class.
pub fn render_scatter(projections: &[Projection], style: &ScatterStyle) -> Result<String> {
    if projections.is_empty() || projections.len() > 2 {
        return Err(Error::TooManySets(projections.len()));
    }
    if let Some(p) = projections.iter().find(|p| p.k() < 2) {
        return Err(Error::NotTwoDimensional(p.k()));
    }
    let w = style.width.unwrap_or(720) as f64;
    let h = style.height.unwrap_or(540) as f64;
    let (left, right, top, bottom) = (60.0, w - 20.0, 40.0, h - 50.0);

    let all = projections
        .iter()
        .flat_map(|p| p.coords.rows().into_iter().map(|r| (r[0], r[1])));
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let sx = Scale::padded(x0, x1, left, right);
    let sy = Scale::padded(y0, y1, bottom, top);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )
    .unwrap();
    writeln!(
        s,
        "<style>.axis{{font:12px sans-serif}}.label{{font:9px sans-serif;fill:#333}}.legend{{font:11px sans-serif}}.set0{{fill:{}}}.set1{{fill:{}}}</style>",
        PALETTE[0], PALETTE[1]
    )
    .unwrap();
    writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#).unwrap();
    if let Some(title) = &style.title {
        writeln!(
            s,
            r#"<text class="axis" x="{:.2}" y="20" text-anchor="middle">{}</text>"#,
            w / 2.0,
            escape(title)
        )
        .unwrap();
    }
    writeln!(
        s,
        r##"<rect x="{left:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#999"/>"##,
        right - left,
        bottom - top
    )
    .unwrap();
    let pct = |i: usize| {
        style
            .variance_ratio
            .map(|r| format!(" ({:.1}%)", 100.0 * r[i]))
            .unwrap_or_default()
    };
    writeln!(
        s,
        r#"<text class="axis" x="{:.2}" y="{:.2}" text-anchor="middle">PC1{}</text>"#,
        (left + right) / 2.0,
        h - 15.0,
        pct(0)
    )
    .unwrap();
    writeln!(
        s,
        r#"<text class="axis" x="15" y="{:.2}" text-anchor="middle" transform="rotate(-90 15 {:.2})">PC2{}</text>"#,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0,
        pct(1)
    )
    .unwrap();

    for (i, p) in projections.iter().enumerate() {
        writeln!(s, r#"<g class="set set{i}">"#).unwrap();
        for (row, label) in p.coords.rows().into_iter().zip(&p.labels) {
            let (cx, cy) = (sx.map(row[0]), sy.map(row[1]));
            writeln!(s, r#"<circle class="pt set{i}" cx="{cx:.2}" cy="{cy:.2}" r="3"/>"#).unwrap();
            writeln!(
                s,
                r#"<text class="label" x="{:.2}" y="{:.2}">{}</text>"#,
                cx + 4.0,
                cy - 4.0,
                escape(label)
            )
            .unwrap();
        }
        writeln!(s, "</g>").unwrap();
        if let Some(name) = style.set_names.get(i) {
            let ly = top + 15.0 + 16.0 * i as f64;
            writeln!(
                s,
                r#"<rect class="set{i}" x="{:.2}" y="{:.2}" width="8" height="8"/>"#,
                right - 140.0,
                ly - 8.0
            )
            .unwrap();
            writeln!(
                s,
                r#"<text class="legend" x="{:.2}" y="{ly:.2}">{}</text>"#,
                right - 128.0,
                escape(name)
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[derive(Debug, Clone, Default)]
pub struct StripStyle {
    pub title: Option<String>,
    pub width: Option<u32>,
}

/// One horizontal strip per model plus the log reference; token ticks with labels above.
pub fn render_strips(layout: &StripLayout, style: &StripStyle) -> Result<String> {
    if layout.rows.is_empty() {
        return Err(Error::EmptyLayout);
    }
    let rows: Vec<_> = layout.rows.iter().chain(layout.reference_row.as_ref()).collect();
    let w = style.width.unwrap_or(820) as f64;
    let row_h = 56.0;
    let top = if style.title.is_some() { 40.0 } else { 16.0 };
    let h = top + row_h * rows.len() as f64 + 16.0;
    let (left, right) = (170.0, w - 30.0);

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for r in &rows {
        for p in &r.positions {
            lo = lo.min(*p);
            hi = hi.max(*p);
        }
    }
    let sx = Scale {
        lo,
        hi,
        px_lo: left,
        px_hi: right,
    };

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )
    .unwrap();
    writeln!(
        s,
        "<style>.rowlabel{{font:12px sans-serif}}.label{{font:9px sans-serif;fill:#333}}.tick{{stroke:#1f77b4;stroke-width:2}}.reference .tick{{stroke:#888}}.base{{stroke:#bbb}}</style>"
    )
    .unwrap();
    writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#).unwrap();
    if let Some(title) = &style.title {
        writeln!(
            s,
            r#"<text class="rowlabel" x="{:.2}" y="22" text-anchor="middle">{}</text>"#,
            w / 2.0,
            escape(title)
        )
        .unwrap();
    }
    let n_models = layout.rows.len();
    for (i, r) in rows.iter().enumerate() {
        let class = if i < n_models { "row" } else { "row reference" };
        let base = top + row_h * i as f64 + 40.0;
        writeln!(s, r#"<g class="{class}">"#).unwrap();
        writeln!(
            s,
            r#"<text class="rowlabel" x="10" y="{:.2}">{}</text>"#,
            base + 4.0,
            escape(&r.label)
        )
        .unwrap();
        writeln!(
            s,
            r#"<line class="base" x1="{left:.2}" y1="{base:.2}" x2="{right:.2}" y2="{base:.2}"/>"#
        )
        .unwrap();
        for (j, (p, tok)) in r.positions.iter().zip(&r.tokens).enumerate() {
            let x = sx.map(*p);
            writeln!(
                s,
                r#"<line class="tick" x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}"/>"#,
                base - 7.0,
                base + 7.0
            )
            .unwrap();
            // stagger labels so close neighbours stay legible
            let ly = base - 11.0 - 11.0 * (j % 2) as f64;
            writeln!(
                s,
                r#"<text class="label" x="{x:.2}" y="{ly:.2}" text-anchor="middle">{}</text>"#,
                escape(tok)
            )
            .unwrap();
        }
        writeln!(s, "</g>").unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}
