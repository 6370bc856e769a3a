//! Block interleaver over RS code symbols.
//!
//! Rows are RS codewords and columns are symbol positions. Symbols are
//! written row by row and read column by column, so a burst of adjacent
//! channel symbols lands in different codewords.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockInterleaver {
    pub rows: usize,
    pub cols: usize,
}

impl BlockInterleaver {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Config("interleaver dimensions must be positive".into()));
        }
        Ok(BlockInterleaver { rows, cols })
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn interleave<T: Copy>(&self, input: &[T]) -> Result<Vec<T>> {
        self.check(input.len())?;
        let mut out = Vec::with_capacity(input.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                out.push(input[r * self.cols + c]);
            }
        }
        Ok(out)
    }

    pub fn deinterleave<T: Copy>(&self, input: &[T]) -> Result<Vec<T>> {
        self.check(input.len())?;
        let mut out = input.to_vec();
        for c in 0..self.cols {
            for r in 0..self.rows {
                out[r * self.cols + c] = input[c * self.rows + r];
            }
        }
        Ok(out)
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::length("block interleaver", self.len(), len));
        }
        Ok(())
    }
}
