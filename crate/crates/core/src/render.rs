//! ASCII and SVG pictures of diagrams and tilings. Rows are printed with the
//! largest `y` first, so `y` grows upward.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::diagram::{Diagram, Point};
use crate::tiling::{Tiling, TilingError};

/// Symbols for tiles in canonical order.
pub const TILE_SYMBOLS: &str = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";

const CELL: u32 = 20;

pub fn diagram_ascii(d: &Diagram) -> String {
    crate::diagram::to_text(d)
}

/// One symbol per tile, `.` for cells covered by none, over the box from the
/// origin to the union's far corner.
pub fn tiling_ascii(t: &Tiling) -> Result<String, TilingError> {
    let symbols: Vec<char> = TILE_SYMBOLS.chars().collect();
    if t.len() > symbols.len() {
        return Err(TilingError::Parse(format!(
            "{} tiles, but only {} symbols",
            t.len(),
            symbols.len()
        )));
    }
    let (_, _, max_x, max_y) = t.union().bounding_box();
    let (w, h) = (max_x as usize + 1, max_y as usize + 1);
    let mut grid = vec![vec!['.'; w]; h];
    for (tile, &c) in t.tiles().iter().zip(&symbols) {
        for p in tile.points() {
            grid[p.y as usize][p.x as usize] = c;
        }
    }
    let mut out = String::with_capacity((w + 1) * h);
    for row in grid.iter().rev() {
        out.extend(row.iter());
        out.push('\n');
    }
    Ok(out)
}

/// Reads the format of [`tiling_ascii`]: every symbol other than `.` and
/// spaces names a tile, and the last line is `y = 0`.
pub fn parse_tiling_ascii(text: &str) -> Result<Tiling, TilingError> {
    let lines: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
    let lines = match lines.iter().rposition(|l| !l.trim().is_empty()) {
        Some(last) => &lines[..=last],
        None => return Err(TilingError::Empty),
    };
    let mut tiles: BTreeMap<char, Vec<Point>> = BTreeMap::new();
    for (row, line) in lines.iter().rev().enumerate() {
        for (col, c) in line.chars().enumerate() {
            if c == '.' || c == ' ' {
                continue;
            }
            if !c.is_ascii_alphanumeric() {
                return Err(TilingError::Parse(format!("unexpected character {c:?}")));
            }
            let p = Point::checked(col as i64, row as i64)
                .map_err(|e| TilingError::Parse(e.to_string()))?;
            tiles.entry(c).or_default().push(p);
        }
    }
    let tiles = tiles
        .into_values()
        .map(|pts| Diagram::new(pts).expect("non-empty"))
        .collect();
    Tiling::new(tiles)
}

/// Fill color of the `i`-th tile: hues spaced by the golden angle.
pub fn palette(i: usize) -> String {
    let hue = (i as f64 * 137.507_764) % 360.0;
    format!("hsl({hue:.1},65%,62%)")
}

fn svg_open(w: u32, h: u32) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        w * CELL,
        h * CELL,
        w * CELL,
        h * CELL
    )
}

fn svg_cell(out: &mut String, p: Point, height: u32, fill: &str) {
    let x = u32::from(p.x) * CELL;
    let y = (height - 1 - u32::from(p.y)) * CELL;
    let _ = writeln!(
        out,
        "  <rect x=\"{x}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"{fill}\" stroke=\"#333\" stroke-width=\"1\"/>"
    );
}

pub fn diagram_svg(d: &Diagram) -> String {
    let (_, _, max_x, max_y) = d.bounding_box();
    let (w, h) = (u32::from(max_x) + 1, u32::from(max_y) + 1);
    let mut out = svg_open(w, h);
    for &p in d.points() {
        svg_cell(&mut out, p, h, &palette(0));
    }
    out.push_str("</svg>\n");
    out
}

/// Unit squares, one fill per tile in canonical order.
pub fn tiling_svg(t: &Tiling) -> String {
    let (_, _, max_x, max_y) = t.union().bounding_box();
    let (w, h) = (u32::from(max_x) + 1, u32::from(max_y) + 1);
    let mut out = svg_open(w, h);
    for (i, tile) in t.tiles().iter().enumerate() {
        let _ = writeln!(out, " <g id=\"tile-{i}\">");
        for &p in tile.points() {
            svg_cell(&mut out, p, h, &palette(i));
        }
        out.push_str(" </g>\n");
    }
    out.push_str("</svg>\n");
    out
}
