//! Exact integer matrix products with a classical-cost work counter.
//!
//! Every product records its shape `(a, b, c)` and charges `a * b * c`
//! scalar multiply-adds to the [`WorkCounter`], independent of how many
//! entries were actually zero. The counter is the cost model; the kernels
//! are free to skip zeros.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix of non-negative counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u128>,
}

impl CountMatrix {
    pub fn zeros(rows: usize, cols: usize) -> CountMatrix {
        CountMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> CountMatrix {
        let mut m = CountMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<u128>]) -> Result<CountMatrix> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("ragged matrix rows"));
        }
        Ok(CountMatrix { rows: rows.len(), cols, data: rows.concat() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u128 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u128) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u128] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> CountMatrix {
        let mut t = CountMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        t
    }

    pub fn diagonal(&self) -> Vec<u128> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }
}

/// Scalar multiply-add tally plus the multiset of product shapes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkCounter {
    pub scalar_mults: u128,
    pub calls: u64,
    #[serde(with = "shape_map")]
    pub mm_calls: BTreeMap<(usize, usize, usize), u64>,
}

impl WorkCounter {
    pub fn new() -> WorkCounter {
        WorkCounter::default()
    }

    pub fn record(&mut self, a: usize, b: usize, c: usize) {
        self.scalar_mults += (a as u128) * (b as u128) * (c as u128);
        self.calls += 1;
        *self.mm_calls.entry((a, b, c)).or_insert(0) += 1;
    }

    pub fn merge(&mut self, other: &WorkCounter) {
        self.scalar_mults += other.scalar_mults;
        self.calls += other.calls;
        for (&shape, &k) in &other.mm_calls {
            *self.mm_calls.entry(shape).or_insert(0) += k;
        }
    }

    /// Recomputes `scalar_mults` from the recorded shapes.
    pub fn shape_total(&self) -> u128 {
        self.mm_calls.iter().map(|(&(a, b, c), &k)| (a as u128) * (b as u128) * (c as u128) * k as u128).sum()
    }

    /// Largest dimension among the smallest dimensions of all recorded shapes.
    pub fn max_min_dim(&self) -> usize {
        self.mm_calls.keys().map(|&(a, b, c)| a.min(b).min(c)).max().unwrap_or(0)
    }
}

mod shape_map {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        a: usize,
        b: usize,
        c: usize,
        count: u64,
    }

    pub fn serialize<S: Serializer>(m: &BTreeMap<(usize, usize, usize), u64>, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<Entry> = m.iter().map(|(&(a, b, c), &count)| Entry { a, b, c, count }).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<(usize, usize, usize), u64>, D::Error> {
        let v: Vec<Entry> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|e| ((e.a, e.b, e.c), e.count)).collect())
    }
}

fn overflow(what: &str) -> Error {
    Error::Overflow(format!("{what} exceeded the 128-bit entry range"))
}

/// Classical product `a x b` times `b x c`.
pub fn multiply(left: &CountMatrix, right: &CountMatrix, wc: &mut WorkCounter) -> Result<CountMatrix> {
    if left.cols != right.rows {
        return Err(Error::invalid(format!(
            "dimension mismatch: {}x{} times {}x{}",
            left.rows, left.cols, right.rows, right.cols
        )));
    }
    let (a, b, c) = (left.rows, left.cols, right.cols);
    wc.record(a, b, c);
    let mut out = CountMatrix::zeros(a, c);
    for i in 0..a {
        let orow = &mut out.data[i * c..(i + 1) * c];
        for k in 0..b {
            let x = left.data[i * b + k];
            if x == 0 {
                continue;
            }
            let rrow = &right.data[k * c..(k + 1) * c];
            for (o, &y) in orow.iter_mut().zip(rrow) {
                if y != 0 {
                    let p = x.checked_mul(y).ok_or_else(|| overflow("product entry"))?;
                    *o = o.checked_add(p).ok_or_else(|| overflow("product entry"))?;
                }
            }
        }
    }
    Ok(out)
}

/// A 0/1 matrix that can enumerate the ones of each row, such as a block
/// of a graph's adjacency matrix read in place.
pub trait ZeroOneBlock {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn for_each_one(&self, r: usize, f: &mut dyn FnMut(usize));
    fn contains(&self, r: usize, c: usize) -> bool;

    fn to_dense(&self) -> CountMatrix {
        let mut m = CountMatrix::zeros(self.rows(), self.cols());
        for r in 0..self.rows() {
            self.for_each_one(r, &mut |c| m.set(r, c, 1));
        }
        m
    }
}

impl ZeroOneBlock for CountMatrix {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn for_each_one(&self, r: usize, f: &mut dyn FnMut(usize)) {
        for (c, &x) in self.row(r).iter().enumerate() {
            if x != 0 {
                f(c);
            }
        }
    }

    fn contains(&self, r: usize, c: usize) -> bool {
        self.get(r, c) != 0
    }
}

/// `left * block` where `block` is 0/1. Same result and same charged cost
/// as [`multiply`] on the dense form of `block`.
pub fn multiply_block(left: &CountMatrix, block: &dyn ZeroOneBlock, wc: &mut WorkCounter) -> Result<CountMatrix> {
    if left.cols != block.rows() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {}x{} times {}x{}",
            left.rows,
            left.cols,
            block.rows(),
            block.cols()
        )));
    }
    let (a, b, c) = (left.rows, left.cols, block.cols());
    wc.record(a, b, c);
    let mut out = CountMatrix::zeros(a, c);
    let mut overflowed = false;
    for i in 0..a {
        let orow = &mut out.data[i * c..(i + 1) * c];
        for k in 0..b {
            let x = left.data[i * b + k];
            if x == 0 {
                continue;
            }
            block.for_each_one(k, &mut |j| {
                let (s, o) = orow[j].overflowing_add(x);
                orow[j] = s;
                overflowed |= o;
            });
        }
    }
    if overflowed {
        return Err(overflow("product entry"));
    }
    Ok(out)
}

/// Diagonal of `left * block` for a square result, charged as an
/// `(a, b, 1)` product: only `a` dot products of length `b` are formed.
pub fn diagonal_of_block_product(left: &CountMatrix, block: &dyn ZeroOneBlock, wc: &mut WorkCounter) -> Result<Vec<u128>> {
    if left.cols != block.rows() || left.rows != block.cols() {
        return Err(Error::invalid("diagonal product needs an a x b by b x a pair"));
    }
    let (a, b) = (left.rows, left.cols);
    wc.record(a, b, 1);
    let mut diag = vec![0u128; a];
    for (r, d) in diag.iter_mut().enumerate() {
        for k in 0..b {
            let x = left.data[r * b + k];
            if x != 0 && block.contains(k, r) {
                *d = d.checked_add(x).ok_or_else(|| overflow("diagonal entry"))?;
            }
        }
    }
    Ok(diag)
}

/// Column-wise dot products `d[v] = sum_x m1[x][v] * m2[x][v]`, the diagonal
/// of `m1^T * m2`, charged as a `(cols, rows, 1)` product.
pub fn column_dots(m1: &CountMatrix, m2: &CountMatrix, wc: &mut WorkCounter) -> Result<Vec<u128>> {
    if m1.rows != m2.rows || m1.cols != m2.cols {
        return Err(Error::invalid("column dots need equal shapes"));
    }
    wc.record(m1.cols, m1.rows, 1);
    let mut d = vec![0u128; m1.cols];
    for x in 0..m1.rows {
        for (v, dv) in d.iter_mut().enumerate() {
            let (p, q) = (m1.get(x, v), m2.get(x, v));
            if p != 0 && q != 0 {
                let t = p.checked_mul(q).ok_or_else(|| overflow("dot entry"))?;
                *dv = dv.checked_add(t).ok_or_else(|| overflow("dot entry"))?;
            }
        }
    }
    Ok(d)
}

/// Whether the classical cost of an `(n p1, n p2, n p3)` product is at
/// most that of an `(n, n, n p1 p2 p3)` product.
pub fn rebalance_cost_check(p1: f64, p2: f64, p3: f64, n: f64) -> bool {
    let lhs = (n * p1) * (n * p2) * (n * p3);
    let rhs = n * n * (n * (p1 * p2 * p3));
    lhs <= rhs * (1.0 + 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_scalar() {
        let mut wc = WorkCounter::new();
        let m = CountMatrix::from_rows(&[vec![1, 2], vec![3, 4]]).unwrap();
        assert_eq!(multiply(&CountMatrix::identity(2), &m, &mut wc).unwrap(), m);
        let mut wc = WorkCounter::new();
        let p = multiply(&CountMatrix::from_rows(&[vec![3]]).unwrap(), &CountMatrix::from_rows(&[vec![4]]).unwrap(), &mut wc)
            .unwrap();
        assert_eq!(p.get(0, 0), 12);
        assert_eq!(wc.scalar_mults, 1);
    }

    #[test]
    fn directed_triangle_cubed() {
        let a = CountMatrix::from_rows(&[vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]).unwrap();
        let mut wc = WorkCounter::new();
        let a2 = multiply(&a, &a, &mut wc).unwrap();
        let a3 = multiply(&a2, &a, &mut wc).unwrap();
        assert_eq!(a3, CountMatrix::identity(3));
        assert_eq!(wc.scalar_mults, 54);
        assert_eq!(wc.shape_total(), wc.scalar_mults);
    }

    #[test]
    fn mismatch_and_overflow() {
        let mut wc = WorkCounter::new();
        let a = CountMatrix::zeros(2, 3);
        assert!(matches!(multiply(&a, &a, &mut wc), Err(Error::InvalidInput(_))));
        let big = CountMatrix::from_rows(&[vec![u128::MAX / 2 + 1]]).unwrap();
        let two = CountMatrix::from_rows(&[vec![2]]).unwrap();
        assert!(matches!(multiply(&big, &two, &mut wc), Err(Error::Overflow(_))));
    }

    #[test]
    fn block_kernels_match_dense() {
        let left = CountMatrix::from_rows(&[vec![1, 0, 2], vec![0, 5, 1]]).unwrap();
        let block = CountMatrix::from_rows(&[vec![1, 1], vec![0, 1], vec![1, 0]]).unwrap();
        let mut w1 = WorkCounter::new();
        let mut w2 = WorkCounter::new();
        assert_eq!(multiply_block(&left, &block, &mut w1).unwrap(), multiply(&left, &block, &mut w2).unwrap());
        assert_eq!(w1, w2);
        let full = multiply(&left, &block, &mut w2).unwrap();
        assert_eq!(diagonal_of_block_product(&left, &block, &mut w1).unwrap(), full.diagonal());
        let tt = multiply(&left.transpose(), &left, &mut w2).unwrap();
        assert_eq!(column_dots(&left, &left, &mut w1).unwrap(), tt.diagonal());
    }

    #[test]
    fn rebalance_examples() {
        assert!(rebalance_cost_check(1.0, 1.0, 1.0, 10.0));
        assert!(rebalance_cost_check(0.5, 0.5, 0.5, 64.0));
    }
}
