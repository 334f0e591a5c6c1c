use std::sync::atomic::{AtomicU64, Ordering};

use ndarray::Array2;

/// Row-major f64 matrix whose elements can be read and written from several
/// threads at once. Updates are plain relaxed load/store pairs, so a
/// concurrent read-modify-write may lose an update but never tears a value.
pub(crate) struct SharedMatrix {
    data: Vec<AtomicU64>,
    cols: usize,
}

impl SharedMatrix {
    pub(crate) fn from_array(a: &Array2<f64>) -> Self {
        SharedMatrix {
            data: a.iter().map(|v| AtomicU64::new(v.to_bits())).collect(),
            cols: a.ncols(),
        }
    }

    pub(crate) fn to_array(&self) -> Array2<f64> {
        let rows = self.data.len().checked_div(self.cols).unwrap_or(0);
        let values = self
            .data
            .iter()
            .map(|v| f64::from_bits(v.load(Ordering::Relaxed)))
            .collect();
        Array2::from_shape_vec((rows, self.cols), values).expect("consistent shape")
    }

    #[inline]
    fn cell(&self, row: usize, col: usize) -> &AtomicU64 {
        &self.data[row * self.cols + col]
    }

    #[inline]
    pub(crate) fn get(&self, row: usize, col: usize) -> f64 {
        f64::from_bits(self.cell(row, col).load(Ordering::Relaxed))
    }

    #[inline]
    pub(crate) fn set(&self, row: usize, col: usize, v: f64) {
        self.cell(row, col).store(v.to_bits(), Ordering::Relaxed);
    }

    #[inline]
    fn row(&self, row: usize) -> &[AtomicU64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    #[inline]
    pub(crate) fn dot(&self, row: usize, x: &[f64]) -> f64 {
        self.row(row)
            .iter()
            .zip(x)
            .map(|(a, b)| f64::from_bits(a.load(Ordering::Relaxed)) * b)
            .sum()
    }

    /// `acc += row`
    #[inline]
    pub(crate) fn add_row_to(&self, row: usize, acc: &mut [f64]) {
        for (a, cell) in acc.iter_mut().zip(self.row(row)) {
            *a += f64::from_bits(cell.load(Ordering::Relaxed));
        }
    }

    /// `row += scale * x`
    #[inline]
    pub(crate) fn axpy(&self, row: usize, scale: f64, x: &[f64]) {
        for (cell, v) in self.row(row).iter().zip(x) {
            let cur = f64::from_bits(cell.load(Ordering::Relaxed));
            cell.store((cur + scale * v).to_bits(), Ordering::Relaxed);
        }
    }

    /// `acc += g * row; row += g * h`, reading each element once.
    #[inline]
    pub(crate) fn exchange(&self, row: usize, g: f64, h: &[f64], acc: &mut [f64]) {
        for ((cell, hv), a) in self.row(row).iter().zip(h).zip(acc.iter_mut()) {
            let cur = f64::from_bits(cell.load(Ordering::Relaxed));
            *a += g * cur;
            cell.store((cur + g * hv).to_bits(), Ordering::Relaxed);
        }
    }
}
