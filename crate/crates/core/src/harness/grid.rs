//! Rectangular scene maps as whitespace-separated text grids.

use std::fmt::Display;
use std::fmt::Write as _;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid has no rows")]
    Empty,
    #[error("row {0} has {1} values, expected {2}")]
    RaggedRow(usize, usize, usize),
    #[error("bad value '{value}' at row {row}, column {col}")]
    BadValue {
        row: usize,
        col: usize,
        value: String,
    },
}

/// Row-major H x W map. Rows are lines, values separated by spaces;
/// `#` lines are comments.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    height: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(height: usize, width: usize, value: T) -> Self {
        Grid {
            height,
            width,
            data: vec![value; height * width],
        }
    }
}

impl<T> Grid<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, GridError> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(GridError::Empty);
        }
        let width = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(GridError::RaggedRow(i + 1, row.len(), width));
            }
        }
        let height = rows.len();
        Ok(Grid {
            height,
            width,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn at(&self, row: usize, col: usize) -> &T {
        &self.data[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: T) {
        self.data[row * self.width + col] = value;
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    /// Builds a map value by value in row-major order.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Grid {
            height,
            width,
            data,
        }
    }
}

impl<T: FromStr> Grid<T> {
    pub fn parse(text: &str) -> Result<Self, GridError> {
        let mut rows: Vec<Vec<T>> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut row = Vec::new();
            for (col, token) in line.split_whitespace().enumerate() {
                let value = token.parse().map_err(|_| GridError::BadValue {
                    row: lineno + 1,
                    col: col + 1,
                    value: token.to_string(),
                })?;
                row.push(value);
            }
            rows.push(row);
        }
        Grid::from_rows(rows)
    }
}

impl<T: Display> Grid<T> {
    /// Text form; `seed` adds the master-seed comment expected on any
    /// randomized output.
    pub fn to_text(&self, seed: Option<u64>) -> String {
        let mut out = String::new();
        if let Some(s) = seed {
            writeln!(out, "# seed={s}").unwrap();
        }
        for r in 0..self.height {
            for c in 0..self.width {
                if c > 0 {
                    out.push(' ');
                }
                write!(out, "{}", self.at(r, c)).unwrap();
            }
            out.push('\n');
        }
        out
    }
}
