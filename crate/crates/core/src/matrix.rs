//! Row-major parameter matrices and the row-access abstraction the training
//! kernels are written against.
//!
//! Two backends implement [`ParamRows`]: [`DenseRows`] borrows a matrix
//! exclusively and is used for single-worker training (and for the 64-bit
//! gradient checks), [`SharedRows`] reinterprets an `f32` matrix as relaxed
//! atomics so several workers can update it concurrently without locks.
//! Concurrent updates may overwrite each other; no interleaving is
//! undefined behaviour, each element read or write is atomic.

use std::sync::atomic::{AtomicU32, Ordering};

use num_traits::Float;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy + Default> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::default(); rows * cols],
        }
    }
}

impl<T> Matrix<T> {
    /// Wraps row-major `data`; panics if its length is not `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has wrong length");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }
}

impl<T: Float> Matrix<T> {
    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Row-level operations used by the negative-sampling kernels.
pub trait ParamRows<T: Float> {
    fn dim(&self) -> usize;

    /// Copies row `r` into `dst`.
    fn read_row(&self, r: usize, dst: &mut [T]);

    /// Dot product of row `r` with `v`.
    fn dot(&self, r: usize, v: &[T]) -> T;

    /// `row[r] += a * v`.
    fn axpy(&mut self, r: usize, a: T, v: &[T]);

    /// `dst += a * row[r]`.
    fn add_scaled_to(&self, r: usize, a: T, dst: &mut [T]);
}

/// Exclusive view over a [`Matrix`].
pub struct DenseRows<'a, T> {
    matrix: &'a mut Matrix<T>,
}

impl<'a, T> DenseRows<'a, T> {
    pub fn new(matrix: &'a mut Matrix<T>) -> Self {
        DenseRows { matrix }
    }
}

impl<T: Float> ParamRows<T> for DenseRows<'_, T> {
    fn dim(&self) -> usize {
        self.matrix.cols
    }

    fn read_row(&self, r: usize, dst: &mut [T]) {
        dst.copy_from_slice(self.matrix.row(r));
    }

    #[inline]
    fn dot(&self, r: usize, v: &[T]) -> T {
        self.matrix
            .row(r)
            .iter()
            .zip(v)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    #[inline]
    fn axpy(&mut self, r: usize, a: T, v: &[T]) {
        for (x, &y) in self.matrix.row_mut(r).iter_mut().zip(v) {
            *x = *x + a * y;
        }
    }

    #[inline]
    fn add_scaled_to(&self, r: usize, a: T, dst: &mut [T]) {
        for (d, &x) in dst.iter_mut().zip(self.matrix.row(r)) {
            *d = *d + a * x;
        }
    }
}

/// Lock-free shared view over an `f32` [`Matrix`]. Cloning the handle is
/// cheap; all clones address the same storage.
#[derive(Clone, Copy)]
pub struct SharedRows<'a> {
    cells: &'a [AtomicU32],
    cols: usize,
}

impl<'a> SharedRows<'a> {
    pub fn new(matrix: &'a mut Matrix<f32>) -> Self {
        let cols = matrix.cols;
        let data: &'a mut [f32] = &mut matrix.data;
        // SAFETY: AtomicU32 has the same size and alignment as u32, and f32
        // has the same size and alignment as u32. The exclusive borrow makes
        // the atomic view the only access path for 'a.
        let cells = unsafe { &*(data as *mut [f32] as *const [AtomicU32]) };
        SharedRows { cells, cols }
    }

    #[inline]
    fn cells(&self, r: usize) -> &[AtomicU32] {
        &self.cells[r * self.cols..(r + 1) * self.cols]
    }
}

#[inline]
fn load(c: &AtomicU32) -> f32 {
    f32::from_bits(c.load(Ordering::Relaxed))
}

impl ParamRows<f32> for SharedRows<'_> {
    fn dim(&self) -> usize {
        self.cols
    }

    fn read_row(&self, r: usize, dst: &mut [f32]) {
        for (d, c) in dst.iter_mut().zip(self.cells(r)) {
            *d = load(c);
        }
    }

    #[inline]
    fn dot(&self, r: usize, v: &[f32]) -> f32 {
        self.cells(r)
            .iter()
            .zip(v)
            .fold(0.0, |acc, (c, &b)| acc + load(c) * b)
    }

    #[inline]
    fn axpy(&mut self, r: usize, a: f32, v: &[f32]) {
        for (c, &y) in self.cells(r).iter().zip(v) {
            c.store((load(c) + a * y).to_bits(), Ordering::Relaxed);
        }
    }

    #[inline]
    fn add_scaled_to(&self, r: usize, a: f32, dst: &mut [f32]) {
        for (d, c) in dst.iter_mut().zip(self.cells(r)) {
            *d += a * load(c);
        }
    }
}
