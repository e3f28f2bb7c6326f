//! Dense row-major 2-D `f64` matrices.
//!
//! Column vectors are `(n, 1)` tensors. The recurrent code also uses
//! `(n, batch)` tensors where every column is an independent example.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tensor({}x{}) [", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
        }
        write!(f, "]")
    }
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Tensor {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Tensor::zeros(n, n);
        for i in 0..n {
            t.data[i * n + i] = 1.0;
        }
        t
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "data length {} does not match shape {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Tensor { rows, cols, data })
    }

    /// Builds a tensor from equal-length rows. Panics on ragged input.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Tensor {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn column(values: &[f64]) -> Self {
        Tensor {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    fn same_shape(&self, other: &Tensor, op: &'static str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::dim(op, self.shape(), other.shape()));
        }
        Ok(())
    }

    /// `self · other`.
    pub fn matmul(&self, other: &Tensor) -> Result<Tensor> {
        if self.cols != other.rows {
            return Err(Error::dim("matmul", self.shape(), other.shape()));
        }
        let (n, k, m) = (self.rows, self.cols, other.cols);
        let mut out = vec![0.0; n * m];
        for i in 0..n {
            let out_row = &mut out[i * m..(i + 1) * m];
            for p in 0..k {
                let a = self.data[i * k + p];
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[p * m..(p + 1) * m];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(Tensor {
            rows: n,
            cols: m,
            data: out,
        })
    }

    /// `selfᵀ · other` without materializing the transpose.
    pub fn t_matmul(&self, other: &Tensor) -> Result<Tensor> {
        if self.rows != other.rows {
            return Err(Error::dim("t_matmul", self.shape(), other.shape()));
        }
        let (k, n, m) = (self.rows, self.cols, other.cols);
        let mut out = vec![0.0; n * m];
        for p in 0..k {
            let a_row = &self.data[p * n..(p + 1) * n];
            let b_row = &other.data[p * m..(p + 1) * m];
            for (i, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let out_row = &mut out[i * m..(i + 1) * m];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(Tensor {
            rows: n,
            cols: m,
            data: out,
        })
    }

    /// `self · otherᵀ` without materializing the transpose.
    pub fn matmul_t(&self, other: &Tensor) -> Result<Tensor> {
        if self.cols != other.cols {
            return Err(Error::dim("matmul_t", self.shape(), other.shape()));
        }
        let (n, k, m) = (self.rows, self.cols, other.rows);
        let mut out = vec![0.0; n * m];
        for i in 0..n {
            let a_row = &self.data[i * k..(i + 1) * k];
            for j in 0..m {
                let b_row = &other.data[j * k..(j + 1) * k];
                out[i * m + j] = a_row.iter().zip(b_row).map(|(a, b)| a * b).sum();
            }
        }
        Ok(Tensor {
            rows: n,
            cols: m,
            data: out,
        })
    }

    pub fn transpose(&self) -> Tensor {
        let mut out = Tensor::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    fn zip_with(&self, other: &Tensor, op: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
        self.same_shape(other, op)?;
        Ok(Tensor {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    pub fn hadamard(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_with(other, "hadamard", |a, b| a * b)
    }

    pub fn add_assign(&mut self, other: &Tensor) -> Result<()> {
        self.same_shape(other, "add_assign")?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    pub fn scale(&self, s: f64) -> Tensor {
        self.map(|v| v * s)
    }

    pub fn add_scalar(&self, s: f64) -> Tensor {
        self.map(|v| v + s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Adds a `(rows, 1)` column to every column of `self`.
    pub fn add_column(&self, bias: &Tensor) -> Result<Tensor> {
        if bias.cols != 1 || bias.rows != self.rows {
            return Err(Error::dim("add_column", self.shape(), bias.shape()));
        }
        let mut out = self.clone();
        for r in 0..self.rows {
            let b = bias.data[r];
            for v in out.row_mut(r) {
                *v += b;
            }
        }
        Ok(out)
    }

    /// Sums across columns, giving a `(rows, 1)` column.
    pub fn sum_columns(&self) -> Tensor {
        Tensor {
            rows: self.rows,
            cols: 1,
            data: (0..self.rows).map(|r| self.row(r).iter().sum()).collect(),
        }
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn sigmoid(&self) -> Tensor {
        self.map(sigmoid_scalar)
    }

    pub fn tanh_act(&self) -> Tensor {
        self.map(f64::tanh)
    }

    /// Numerically stable softmax over each row.
    pub fn softmax_rows(&self) -> Tensor {
        let mut out = self.clone();
        for r in 0..self.rows {
            softmax_in_place(out.row_mut(r));
        }
        out
    }

    /// Numerically stable softmax over each column.
    pub fn softmax_cols(&self) -> Tensor {
        let mut out = self.clone();
        let mut buf = vec![0.0; self.rows];
        for c in 0..self.cols {
            for (r, b) in buf.iter_mut().enumerate() {
                *b = self.get(r, c);
            }
            softmax_in_place(&mut buf);
            for (r, &b) in buf.iter().enumerate() {
                out.set(r, c, b);
            }
        }
        out
    }

    /// Horizontal concatenation `[a b]`.
    pub fn concat_cols(&self, other: &Tensor) -> Result<Tensor> {
        if self.rows != other.rows {
            return Err(Error::dim("concat_cols", self.shape(), other.shape()));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Ok(Tensor {
            rows: self.rows,
            cols,
            data,
        })
    }

    /// Vertical stacking; for column vectors this is `[a; b]`.
    pub fn concat_rows(&self, other: &Tensor) -> Result<Tensor> {
        if self.cols != other.cols {
            return Err(Error::dim("concat_rows", self.shape(), other.shape()));
        }
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&other.data);
        Ok(Tensor {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// Rows `[start, end)`.
    pub fn slice_rows(&self, start: usize, end: usize) -> Tensor {
        assert!(start <= end && end <= self.rows, "row slice out of range");
        Tensor {
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    /// Index of the largest entry in each column; first wins on ties.
    pub fn argmax_cols(&self) -> Vec<usize> {
        (0..self.cols)
            .map(|c| {
                let mut best = 0;
                for r in 1..self.rows {
                    if self.get(r, c) > self.get(best, c) {
                        best = r;
                    }
                }
                best
            })
            .collect()
    }

    /// Entries i.i.d. uniform on `[-scale, scale]`. `scale` must be non-negative.
    pub fn init_uniform(rows: usize, cols: usize, rng: &mut SeededRng, scale: f64) -> Tensor {
        debug_assert!(scale >= 0.0);
        let data = (0..rows * cols)
            .map(|_| if scale == 0.0 { 0.0 } else { rng.uniform(-scale, scale) })
            .collect();
        Tensor { rows, cols, data }
    }
}

#[inline]
pub fn sigmoid_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softmax_in_place(xs: &mut [f64]) {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in xs.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in xs.iter_mut() {
        *v /= total;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_matmul(a: &Tensor, b: &Tensor) -> Tensor {
        let mut out = Tensor::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut s = 0.0;
                for k in 0..a.cols() {
                    s += a.get(i, k) * b.get(k, j);
                }
                out.set(i, j, s);
            }
        }
        out
    }

    #[test]
    fn matmul_identity() {
        let m = Tensor::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(Tensor::identity(2).matmul(&m).unwrap(), m);
    }

    #[test]
    fn matmul_row_by_column() {
        let a = Tensor::from_rows(&[&[1.0, 2.0]]);
        let b = Tensor::column(&[3.0, 4.0]);
        assert_eq!(a.matmul(&b).unwrap(), Tensor::from_rows(&[&[11.0]]));
    }

    #[test]
    fn matmul_random_matches_triple_loop() {
        let mut rng = SeededRng::new(11);
        let a = Tensor::init_uniform(5, 4, &mut rng, 1.0);
        let b = Tensor::init_uniform(4, 3, &mut rng, 1.0);
        let fast = a.matmul(&b).unwrap();
        let slow = naive_matmul(&a, &b);
        for (x, y) in fast.data().iter().zip(slow.data()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn matmul_shape_error_names_both_shapes() {
        let err = Tensor::zeros(2, 3).matmul(&Tensor::zeros(2, 3)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("(2, 3)"), "{msg}");
    }

    #[test]
    fn transposed_products_match_explicit_transpose() {
        let mut rng = SeededRng::new(5);
        let a = Tensor::init_uniform(4, 6, &mut rng, 1.0);
        let b = Tensor::init_uniform(4, 3, &mut rng, 1.0);
        let c = Tensor::init_uniform(5, 6, &mut rng, 1.0);
        let t1 = a.t_matmul(&b).unwrap();
        let r1 = a.transpose().matmul(&b).unwrap();
        let t2 = a.matmul_t(&c).unwrap();
        let r2 = a.matmul(&c.transpose()).unwrap();
        for (x, y) in t1.data().iter().zip(r1.data()) {
            assert!((x - y).abs() < 1e-12);
        }
        for (x, y) in t2.data().iter().zip(r2.data()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn sigmoid_values() {
        let t = Tensor::column(&[0.0, 1e3, -1e3]).sigmoid();
        assert_eq!(t.get(0, 0), 0.5);
        assert!((t.get(1, 0) - 1.0).abs() < 1e-12);
        assert!(t.get(2, 0).abs() < 1e-12);
    }

    #[test]
    fn tanh_values() {
        let t = Tensor::column(&[0.0, 0.25]).tanh_act();
        assert_eq!(t.get(0, 0), 0.0);
        assert!((t.get(1, 0) - 0.244919).abs() < 1e-6);
    }

    #[test]
    fn softmax_cases() {
        let u = Tensor::from_rows(&[&[0.0, 0.0, 0.0]]).softmax_rows();
        for &v in u.data() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        let big = Tensor::from_rows(&[&[1000.0, 1000.0]]).softmax_rows();
        assert_eq!(big.data(), &[0.5, 0.5]);
    }

    #[test]
    fn softmax_cols_is_transposed_softmax_rows() {
        let mut rng = SeededRng::new(9);
        let x = Tensor::init_uniform(3, 4, &mut rng, 5.0);
        assert_eq!(x.softmax_cols(), x.transpose().softmax_rows().transpose());
    }

    #[test]
    fn concat_and_hadamard() {
        let c = Tensor::from_rows(&[&[1.0]])
            .concat_cols(&Tensor::from_rows(&[&[2.0]]))
            .unwrap();
        assert_eq!(c, Tensor::from_rows(&[&[1.0, 2.0]]));
        let h = Tensor::from_rows(&[&[2.0, 3.0]])
            .hadamard(&Tensor::from_rows(&[&[4.0, 5.0]]))
            .unwrap();
        assert_eq!(h, Tensor::from_rows(&[&[8.0, 15.0]]));
        let v = Tensor::column(&[1.0])
            .concat_rows(&Tensor::column(&[2.0, 3.0]))
            .unwrap();
        assert_eq!(v, Tensor::column(&[1.0, 2.0, 3.0]));
        assert!(Tensor::zeros(1, 2).add(&Tensor::zeros(2, 1)).is_err());
    }

    #[test]
    fn init_uniform_contract() {
        let a = Tensor::init_uniform(3, 3, &mut SeededRng::new(4), 0.5);
        let b = Tensor::init_uniform(3, 3, &mut SeededRng::new(4), 0.5);
        assert_eq!(a.data(), b.data());
        assert!(a.data().iter().all(|v| v.abs() <= 0.5));
        let z = Tensor::init_uniform(2, 2, &mut SeededRng::new(4), 0.0);
        assert!(z.data().iter().all(|&v| v == 0.0));
        let m = Tensor::init_uniform(100, 100, &mut SeededRng::new(8), 2.0);
        let mean = m.sum() / m.len() as f64;
        assert!(mean.abs() < 0.02 * 2.0, "mean {mean}");
    }

    #[test]
    fn ops_do_not_modify_inputs() {
        let a = Tensor::from_rows(&[&[1.0, -2.0], &[0.5, 3.0]]);
        let before = a.clone();
        let _ = a.sigmoid();
        let _ = a.softmax_rows();
        let _ = a.matmul(&a).unwrap();
        assert_eq!(a, before);
    }

    fn tensor_strategy(max: usize) -> impl Strategy<Value = Tensor> {
        (1..=max, 1..=max).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-50.0f64..50.0, r * c).prop_map(move |d| Tensor::from_vec(r, c, d).unwrap())
        })
    }

    proptest! {
        #[test]
        fn softmax_rows_sum_to_one(x in tensor_strategy(8)) {
            let s = x.softmax_rows();
            for r in 0..s.rows() {
                let total: f64 = s.row(r).iter().sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn softmax_shift_invariant(x in tensor_strategy(6), c in -100.0f64..100.0) {
            let a = x.softmax_rows();
            let b = x.add_scalar(c).softmax_rows();
            for (p, q) in a.data().iter().zip(b.data()) {
                prop_assert!((p - q).abs() < 1e-12);
            }
        }

        #[test]
        fn sigmoid_symmetry(v in -800.0f64..800.0) {
            let s = sigmoid_scalar(v) + sigmoid_scalar(-v);
            prop_assert!((s - 1.0).abs() < 1e-12);
        }

        #[test]
        fn tanh_is_odd(v in -20.0f64..20.0) {
            prop_assert!((v.tanh() + (-v).tanh()).abs() < 1e-12);
        }

        #[test]
        fn hadamard_commutes(a in tensor_strategy(5), seed in any::<u64>()) {
            let b = Tensor::init_uniform(a.rows(), a.cols(), &mut SeededRng::new(seed), 3.0);
            prop_assert_eq!(a.hadamard(&b).unwrap(), b.hadamard(&a).unwrap());
        }

        #[test]
        fn matmul_matches_oracle_up_to_32(n in 1usize..=32, k in 1usize..=32, m in 1usize..=32, seed in any::<u64>()) {
            let mut rng = SeededRng::new(seed);
            let a = Tensor::init_uniform(n, k, &mut rng, 1.0);
            let b = Tensor::init_uniform(k, m, &mut rng, 1.0);
            let fast = a.matmul(&b).unwrap();
            let slow = naive_matmul(&a, &b);
            for (x, y) in fast.data().iter().zip(slow.data()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
