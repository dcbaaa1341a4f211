use std::fmt::Write as _;
use std::path::Path;

use crate::coverage::DensityGrid;
use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Plain-text grid: `width height`, then `xmin ymin xmax ymax`, then
/// `width * height` values row by row starting at `ymin`. Tokens may be split
/// across lines freely; `#` starts a comment.
pub fn parse_density_grid(text: &str) -> Result<DensityGrid> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    let mut next = |what: &str| {
        tokens
            .next()
            .ok_or_else(|| Error::InvalidParameter(format!("density grid ends before {what}")))
    };
    let dim = |s: &str, what: &str| {
        s.parse::<usize>().map_err(|_| {
            Error::InvalidParameter(format!("density grid {what} `{s}` is not a count"))
        })
    };
    let num = |s: &str| {
        s.parse::<f64>().map_err(|_| {
            Error::InvalidParameter(format!("density grid value `{s}` is not a number"))
        })
    };
    let width = dim(next("width")?, "width")?;
    let height = dim(next("height")?, "height")?;
    let mut b = [0.0; 4];
    for v in &mut b {
        *v = num(next("the bounding box")?)?;
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::InvalidParameter("density grid is too large".into()))?;
    let mut values = Vec::with_capacity(count.min(1 << 24));
    for _ in 0..count {
        values.push(num(next("all values are read")?)?);
    }
    if let Some(extra) = tokens.next() {
        return Err(Error::InvalidParameter(format!(
            "density grid has trailing token `{extra}` after {count} values"
        )));
    }
    DensityGrid::new(
        width,
        height,
        Vec2::new(b[0], b[1]),
        Vec2::new(b[2], b[3]),
        values,
    )
}

pub fn read_density_grid(path: &Path) -> Result<DensityGrid> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::InvalidParameter(format!("cannot read density grid {}: {e}", path.display()))
    })?;
    parse_density_grid(&text)
}

pub fn write_density_grid(grid: &DensityGrid) -> String {
    let (lo, hi) = grid.bounds();
    let mut out = format!(
        "{} {}\n{:?} {:?} {:?} {:?}\n",
        grid.width(),
        grid.height(),
        lo.x,
        lo.y,
        hi.x,
        hi.y
    );
    for row in grid.values().chunks(grid.width()) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}
