//! Rendering of layouts and access statistics: SVG layout diagrams, heatmap
//! CSV exports, and trace reports.

use std::fmt::Write as _;

use crate::array::ArrayIndex;
use crate::error::{LayoutError, Result};
use crate::mapping::verify::enumerate_ranges;
use crate::mapping::{Heatmap, Mapping, Trace};

/// Upper bound on the number of cells [`enumerate_cells`] produces.
pub const MAX_CELLS: usize = 65536;

/// Bytes shown per SVG row by default: one cache line.
pub const DEFAULT_BYTES_PER_ROW: usize = 64;

const PALETTE: [&str; 8] = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5",
];

const PX_PER_BYTE: usize = 16;
const ROW_HEIGHT: usize = 24;
const MARGIN: usize = 8;
const RULER_HEIGHT: usize = 20;
const BLOB_HEADER: usize = 18;
const BLOB_GAP: usize = 12;

/// Bytes of one leaf of one array element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutCell {
    pub blob: usize,
    pub byte_begin: usize,
    pub byte_end: usize,
    pub tag_path: String,
    pub array_index: ArrayIndex,
    /// Ordinal of the top-level field, used for coloring.
    pub top_field: usize,
}

/// One cell per (index, leaf) pair, in row-major index order and leaf order.
pub fn enumerate_cells<M: Mapping + ?Sized>(m: &M) -> Result<Vec<LayoutCell>> {
    let count = m.extents().product().saturating_mul(m.leaf_count());
    if count > MAX_CELLS {
        return Err(LayoutError::Config(format!(
            "{count} cells exceed the limit of {MAX_CELLS}"
        )));
    }
    let info = m.record_info().clone();
    Ok(enumerate_ranges(m)
        .into_iter()
        .map(|r| {
            let leaf = info.leaf(r.leaf);
            LayoutCell {
                blob: r.blob,
                byte_begin: r.begin,
                byte_end: r.end,
                tag_path: leaf.path.clone(),
                array_index: r.index,
                top_field: leaf.top_field,
            }
        })
        .collect())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// SVG diagram of a mapping's layout; see [`render_cells_svg`].
pub fn render_svg<M: Mapping + ?Sized>(m: &M, bytes_per_row: usize) -> Result<String> {
    let cells = enumerate_cells(m)?;
    let sizes: Vec<usize> = (0..m.blob_count()).map(|b| m.blob_size(b)).collect();
    Ok(render_cells_svg(&cells, &sizes, bytes_per_row))
}

/// Draws blobs stacked vertically, each wrapped into rows of `bytes_per_row`
/// bytes under a shared byte ruler. Every cell becomes one `class="cell"`
/// rectangle labelled with its tag path and array index; parts of a cell
/// wrapped onto following rows are drawn as `class="cont"` rectangles.
pub fn render_cells_svg(cells: &[LayoutCell], blob_sizes: &[usize], bytes_per_row: usize) -> String {
    let bpr = bytes_per_row.max(1);
    let width = 2 * MARGIN + bpr * PX_PER_BYTE;
    let mut blob_top = Vec::with_capacity(blob_sizes.len());
    let mut y = MARGIN + RULER_HEIGHT;
    for &size in blob_sizes {
        blob_top.push(y + BLOB_HEADER);
        y += BLOB_HEADER + size.div_ceil(bpr).max(1) * ROW_HEIGHT + BLOB_GAP;
    }
    let height = y + MARGIN;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="monospace">"#
    );
    let _ = writeln!(s, r#"<rect width="{width}" height="{height}" fill="white"/>"#);

    s.push_str("<g class=\"ruler\">\n");
    for b in (0..=bpr).step_by(8.min(bpr)) {
        let x = MARGIN + b * PX_PER_BYTE;
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/>"#,
            MARGIN + RULER_HEIGHT - 6,
            MARGIN + RULER_HEIGHT
        );
        if b < bpr {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="9">{b}</text>"#,
                x + 2,
                MARGIN + RULER_HEIGHT - 8
            );
        }
    }
    s.push_str("</g>\n");

    for (blob, (&size, &top)) in blob_sizes.iter().zip(&blob_top).enumerate() {
        let rows = size.div_ceil(bpr).max(1);
        let _ = writeln!(
            s,
            r#"<text class="blob" x="{MARGIN}" y="{}" font-size="11">blob {blob} ({size} bytes)</text>"#,
            top - 5
        );
        for row in 0..rows {
            let bytes = (size - row * bpr).min(bpr);
            let _ = writeln!(
                s,
                r##"<rect class="bytes" x="{MARGIN}" y="{}" width="{}" height="{ROW_HEIGHT}" fill="#eeeeee" stroke="#cccccc"/>"##,
                top + row * ROW_HEIGHT,
                bytes * PX_PER_BYTE
            );
        }
        if blob + 1 < blob_sizes.len() {
            let sep = top + rows * ROW_HEIGHT + BLOB_GAP / 2;
            let _ = writeln!(
                s,
                r#"<line class="separator" x1="0" y1="{sep}" x2="{width}" y2="{sep}" stroke="black" stroke-dasharray="4 2"/>"#
            );
        }
    }

    for c in cells {
        let Some(&top) = blob_top.get(c.blob) else { continue };
        let color = PALETTE[c.top_field % PALETTE.len()];
        let label = escape(&format!("{} {}", c.tag_path, c.array_index));
        let mut begin = c.byte_begin;
        let mut first = true;
        while begin < c.byte_end {
            let row = begin / bpr;
            let end = c.byte_end.min((row + 1) * bpr);
            let x = MARGIN + (begin % bpr) * PX_PER_BYTE;
            let y = top + row * ROW_HEIGHT;
            let w = (end - begin) * PX_PER_BYTE;
            let class = if first { "cell" } else { "cont" };
            let _ = writeln!(
                s,
                r#"<rect class="{class}" x="{x}" y="{y}" width="{w}" height="{ROW_HEIGHT}" fill="{color}" stroke="black"><title>{label}</title></rect>"#
            );
            if first {
                let _ = writeln!(
                    s,
                    r#"<text x="{}" y="{}" font-size="8">{label}</text>"#,
                    x + 2,
                    y + ROW_HEIGHT / 2 + 3
                );
            }
            first = false;
            begin = end;
        }
    }
    s.push_str("</svg>\n");
    s
}

/// `blob,byteOffset,count` for every byte of every blob.
pub fn render_heatmap_csv<M: Mapping>(h: &Heatmap<M>) -> String {
    let mut s = String::from("blob,byteOffset,count\n");
    for blob in 0..h.blob_count() {
        for (offset, count) in h.byte_hits(blob).into_iter().enumerate() {
            let _ = writeln!(s, "{blob},{offset},{count}");
        }
    }
    s
}

/// Text shading of heatmap counts, `bytes_per_row` characters per line,
/// darker characters for higher counts relative to the maximum.
pub fn render_heatmap_ascii<M: Mapping>(h: &Heatmap<M>, bytes_per_row: usize) -> String {
    const SHADES: &[u8] = b" .:-=+*#%@";
    let bpr = bytes_per_row.max(1);
    let hits: Vec<Vec<u64>> = (0..h.blob_count()).map(|b| h.byte_hits(b)).collect();
    let max = hits.iter().flatten().copied().max().unwrap_or(0);
    let mut s = String::new();
    for (blob, bytes) in hits.iter().enumerate() {
        let _ = writeln!(s, "blob {blob}:");
        for row in bytes.chunks(bpr) {
            s.push('|');
            for &c in row {
                let shade = if max == 0 || c == 0 {
                    0
                } else {
                    1 + ((c as u128 * (SHADES.len() as u128 - 2)) / max as u128) as usize
                };
                s.push(SHADES[shade] as char);
            }
            s.push_str("|\n");
        }
    }
    s
}

/// One row per leaf in flatten order: tag path, hit count, share of all hits.
pub fn render_trace_report<M: Mapping>(t: &Trace<M>) -> String {
    let hits = t.field_hits();
    let total = t.total_hits();
    let width = hits.iter().map(|h| h.path.len()).max().unwrap_or(0).max(5);
    let mut s = String::new();
    let _ = writeln!(s, "{:<width$}  {:>20}  {:>8}", "field", "hits", "share");
    for h in &hits {
        let pct = if total == 0 { 0.0 } else { h.count as f64 * 100.0 / total as f64 };
        let _ = writeln!(s, "{:<width$}  {:>20}  {:>7.2}%", h.path, h.count, pct);
    }
    let _ = writeln!(s, "{:<width$}  {:>20}", "total", total);
    s
}
