//! Rectangular discretization of a bounding box into region symbols.
//!
//! Cells are numbered from the bottom-left corner: column index `i_x` grows
//! eastward, row index `i_y` grows northward, and the ordinal id of a cell is
//! `(i_y - 1) * n_c + i_x`. Cells are equal in degree space; no projection is
//! applied.

use std::fmt;

use crate::error::{Error, Result};

/// One letter of the trip alphabet.
///
/// Ordinary regions are `1..=n_r * n_c`. Two reserved values exist: [`Symbol::ROOT`]
/// labels the artificial common start of every trip and [`Symbol::NULL_PAD`] fills
/// the tail of strings shorter than the corpus length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(i32);

impl Symbol {
    pub const ROOT: Symbol = Symbol(0);
    pub const NULL_PAD: Symbol = Symbol(-1);

    /// Ordinary region symbol. Panics on id 0, which is reserved for the root.
    pub fn region(id: u32) -> Symbol {
        assert!(id >= 1 && id <= i32::MAX as u32, "region ids start at 1");
        Symbol(id as i32)
    }

    /// Interprets a raw integer as stored in corpus files (`-1` is padding).
    pub fn from_raw(raw: i32) -> Result<Symbol> {
        if raw < -1 {
            return Err(Error::Format(format!("symbol id {raw} is not valid")));
        }
        Ok(Symbol(raw))
    }

    pub fn raw(self) -> i32 {
        self.0
    }

    pub fn is_region(self) -> bool {
        self.0 >= 1
    }

    pub fn is_null_pad(self) -> bool {
        self == Symbol::NULL_PAD
    }

    pub fn is_root(self) -> bool {
        self == Symbol::ROOT
    }

    /// Region id, or `None` for the reserved symbols.
    pub fn region_id(self) -> Option<u32> {
        self.is_region().then_some(self.0 as u32)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Symbol::ROOT => f.write_str("ROOT"),
            Symbol::NULL_PAD => f.write_str("NULL"),
            Symbol(id) => write!(f, "z{id}"),
        }
    }
}

/// Geographic bounding box in degrees (`x` = longitude, `y` = latitude).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        BoundingBox {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.x_min + self.x_max) / 2.0,
            (self.y_min + self.y_max) / 2.0,
        )
    }
}

/// A single grid cell resolved from a symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    /// 1-based row counted upward from `y_min`.
    pub row: u32,
    /// 1-based column counted eastward from `x_min`.
    pub col: u32,
    pub bbox: BoundingBox,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    bbox: BoundingBox,
    n_rows: u32,
    n_cols: u32,
    cell_width: f64,
    cell_height: f64,
}

impl Grid {
    pub fn new(bbox: BoundingBox, n_rows: u32, n_cols: u32) -> Result<Grid> {
        let finite = [bbox.x_min, bbox.y_min, bbox.x_max, bbox.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidGrid("bounding box must be finite".into()));
        }
        if bbox.x_max <= bbox.x_min || bbox.y_max <= bbox.y_min {
            return Err(Error::InvalidGrid(format!(
                "degenerate bounding box ({}, {}) - ({}, {})",
                bbox.x_min, bbox.y_min, bbox.x_max, bbox.y_max
            )));
        }
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::InvalidGrid(format!(
                "grid size must be positive, got {n_rows} x {n_cols}"
            )));
        }
        if u64::from(n_rows) * u64::from(n_cols) > i32::MAX as u64 {
            return Err(Error::InvalidGrid("too many cells".into()));
        }
        Ok(Grid {
            bbox,
            n_rows,
            n_cols,
            cell_width: (bbox.x_max - bbox.x_min) / f64::from(n_cols),
            cell_height: (bbox.y_max - bbox.y_min) / f64::from(n_rows),
        })
    }

    pub fn bbox(&self) -> BoundingBox {
        self.bbox
    }

    pub fn n_rows(&self) -> u32 {
        self.n_rows
    }

    pub fn n_cols(&self) -> u32 {
        self.n_cols
    }

    pub fn cell_width(&self) -> f64 {
        self.cell_width
    }

    pub fn cell_height(&self) -> f64 {
        self.cell_height
    }

    pub fn num_regions(&self) -> u32 {
        self.n_rows * self.n_cols
    }

    /// Maps a coordinate to its region. Points on the western or southern edge
    /// would get index 0 from the ceiling and are clamped into the first cell.
    pub fn coord_to_symbol(&self, x: f64, y: f64) -> Result<Symbol> {
        if !self.bbox.contains(x, y) {
            return Err(Error::OutOfBounds { x, y });
        }
        let col = clamp_index(
            ((x - self.bbox.x_min) / self.cell_width).ceil(),
            self.n_cols,
        );
        let row = clamp_index(
            ((y - self.bbox.y_min) / self.cell_height).ceil(),
            self.n_rows,
        );
        Ok(Symbol::region((row - 1) * self.n_cols + col))
    }

    pub fn symbol_to_cell(&self, symbol: Symbol) -> Result<Cell> {
        let id = symbol
            .region_id()
            .filter(|&id| id <= self.num_regions())
            .ok_or(Error::NotARegion(symbol.raw()))?;
        let row = id.div_ceil(self.n_cols);
        let col = id - (row - 1) * self.n_cols;
        let x0 = self.bbox.x_min + f64::from(col - 1) * self.cell_width;
        let y0 = self.bbox.y_min + f64::from(row - 1) * self.cell_height;
        Ok(Cell {
            row,
            col,
            bbox: BoundingBox::new(x0, y0, x0 + self.cell_width, y0 + self.cell_height),
        })
    }

    /// Relabels a region using row-major numbering from the *top* row, the
    /// convention some illustrations use (top-left cell = 1).
    pub fn top_down_label(&self, symbol: Symbol) -> Result<u32> {
        let cell = self.symbol_to_cell(symbol)?;
        let row_from_top = self.n_rows - cell.row + 1;
        Ok((row_from_top - 1) * self.n_cols + cell.col)
    }
}

fn clamp_index(raw: f64, upper: u32) -> u32 {
    if raw < 1.0 {
        1
    } else if raw > f64::from(upper) {
        upper
    } else {
        raw as u32
    }
}
