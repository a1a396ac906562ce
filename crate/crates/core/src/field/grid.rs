//! Uniform-lattice fields with bicubic (4x4 Lagrange) interpolation.
//!
//! File format: a header line `nx ny xmin xmax ymin ymax` followed by `ny`
//! rows of `nx` values, row-major bottom-to-top. A CSV variant carries the
//! same header as a `#` comment line and comma-separated rows.

use std::io::Write as _;
use std::path::Path;

use super::{Point2, Window};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridFormat {
    /// Whitespace-separated values, bare header line.
    Plain,
    /// Comma-separated values, header as a `#` comment.
    Csv,
}

#[derive(Debug, Clone)]
pub struct GridField {
    nx: usize,
    ny: usize,
    window: Window,
    dx: f64,
    dy: f64,
    /// Row-major: values[iy * nx + ix], iy = 0 at ymin.
    values: Vec<f64>,
}

impl GridField {
    pub fn new(nx: usize, ny: usize, window: Window, values: Vec<f64>) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(Error::InvalidSpec(format!(
                "grid needs at least 4x4 nodes for bicubic interpolation, got {nx}x{ny}"
            )));
        }
        if values.len() != nx * ny {
            return Err(Error::Parse(format!(
                "expected {} values for a {nx}x{ny} grid, got {}",
                nx * ny,
                values.len()
            )));
        }
        if window.xmin <= 0.0 {
            return Err(Error::InvalidSpec(format!(
                "grid x-range must be strictly positive, got xmin = {}",
                window.xmin
            )));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvariantViolation(format!(
                    "non-finite sample {v} at index {i}"
                )));
            }
            if *v < 0.0 {
                return Err(Error::InvariantViolation(format!(
                    "negative sample {v} at index {i}; stream functions must satisfy psi >= 0"
                )));
            }
        }
        let dx = (window.xmax - window.xmin) / (nx - 1) as f64;
        let dy = (window.ymax - window.ymin) / (ny - 1) as f64;
        Ok(Self { nx, ny, window, dx, dy, values })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn spacing(&self) -> (f64, f64) {
        (self.dx, self.dy)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn bottom_row_max(&self) -> f64 {
        self.values[..self.nx].iter().cloned().fold(0.0, f64::max)
    }

    #[inline]
    fn node(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    /// Tensor-product cubic Lagrange interpolation on the 4x4 stencil around
    /// the query; exact on bicubic polynomials. The stencil clamps at the
    /// lattice edge (one-sided cubics there).
    pub fn interpolate(&self, p: Point2) -> f64 {
        let fx = ((p.x - self.window.xmin) / self.dx).clamp(0.0, (self.nx - 1) as f64);
        let fy = ((p.y - self.window.ymin) / self.dy).clamp(0.0, (self.ny - 1) as f64);
        let (ix0, tx) = stencil_origin(fx, self.nx);
        let (iy0, ty) = stencil_origin(fy, self.ny);
        let wx = lagrange_weights(tx);
        let wy = lagrange_weights(ty);
        let mut acc = 0.0;
        for (j, wyj) in wy.iter().enumerate() {
            let mut row = 0.0;
            for (i, wxi) in wx.iter().enumerate() {
                row += wxi * self.node(ix0 + i, iy0 + j);
            }
            acc += wyj * row;
        }
        acc
    }
}

/// Leftmost stencil index and the local coordinate relative to it.
#[inline]
fn stencil_origin(f: f64, n: usize) -> (usize, f64) {
    let cell = (f.floor() as isize).clamp(0, n as isize - 2);
    let origin = (cell - 1).clamp(0, n as isize - 4) as usize;
    (origin, f - origin as f64)
}

/// Cubic Lagrange weights for nodes at local coordinates 0, 1, 2, 3.
#[inline]
fn lagrange_weights(t: f64) -> [f64; 4] {
    let t1 = t - 1.0;
    let t2 = t - 2.0;
    let t3 = t - 3.0;
    [
        -t1 * t2 * t3 / 6.0,
        t * t2 * t3 / 2.0,
        -t * t1 * t3 / 2.0,
        t * t1 * t2 / 6.0,
    ]
}

/// Load a grid field; the format is sniffed from the first non-empty line.
pub fn load_grid(path: &Path) -> Result<super::ScalarField2D> {
    let text = std::fs::read_to_string(path)?;
    let grid = parse_grid(&text)?;
    Ok(super::ScalarField2D::from_grid(grid))
}

pub fn parse_grid(text: &str) -> Result<GridField> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty grid file".into()))?;
    let (csv, header_body) = match header.trim().strip_prefix('#') {
        Some(rest) => (true, rest),
        None => (false, header),
    };
    let split = |s: &str| -> Vec<String> {
        if csv {
            s.split(',').map(|t| t.trim().to_string()).collect()
        } else {
            s.split_whitespace().map(str::to_string).collect()
        }
    };
    let head: Vec<String> = split(header_body);
    if head.len() != 6 {
        return Err(Error::Parse(format!(
            "header must carry nx ny xmin xmax ymin ymax, got {} fields",
            head.len()
        )));
    }
    let nx: usize = head[0]
        .parse()
        .map_err(|e| Error::Parse(format!("bad nx {:?}: {e}", head[0])))?;
    let ny: usize = head[1]
        .parse()
        .map_err(|e| Error::Parse(format!("bad ny {:?}: {e}", head[1])))?;
    let mut bounds = [0.0_f64; 4];
    for (i, b) in bounds.iter_mut().enumerate() {
        *b = head[i + 2]
            .parse()
            .map_err(|e| Error::Parse(format!("bad bound {:?}: {e}", head[i + 2])))?;
    }
    let window = Window::new(bounds[0], bounds[1], bounds[2], bounds[3])?;

    let mut values = Vec::with_capacity(nx * ny);
    for (row, line) in lines.enumerate() {
        for tok in split(line) {
            if tok.is_empty() {
                continue;
            }
            let v: f64 = tok
                .parse()
                .map_err(|e| Error::Parse(format!("bad value {tok:?} in row {row}: {e}")))?;
            values.push(v);
        }
    }
    GridField::new(nx, ny, window, values)
}

/// Write a field sampled on an nx-by-ny lattice over `window`.
pub fn write_grid(
    path: &Path,
    field: &super::ScalarField2D,
    window: Window,
    nx: usize,
    ny: usize,
    format: GridFormat,
) -> Result<()> {
    if nx < 4 || ny < 4 {
        return Err(Error::InvalidSpec(format!("grid must be at least 4x4, got {nx}x{ny}")));
    }
    let dx = (window.xmax - window.xmin) / (nx - 1) as f64;
    let dy = (window.ymax - window.ymin) / (ny - 1) as f64;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    match format {
        GridFormat::Plain => writeln!(
            out,
            "{} {} {} {} {} {}",
            nx, ny, window.xmin, window.xmax, window.ymin, window.ymax
        )?,
        GridFormat::Csv => writeln!(
            out,
            "# {},{},{},{},{},{}",
            nx, ny, window.xmin, window.xmax, window.ymin, window.ymax
        )?,
    }
    let sep = match format {
        GridFormat::Plain => " ",
        GridFormat::Csv => ",",
    };
    for iy in 0..ny {
        let y = window.ymin + iy as f64 * dy;
        let mut row = String::new();
        for ix in 0..nx {
            let x = window.xmin + ix as f64 * dx;
            if ix > 0 {
                row.push_str(sep);
            }
            row.push_str(&format!("{}", field.value(Point2::new(x, y))));
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}
