//! Exact integer vectors, matrices, Smith normal form and lattice solving.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntVector(pub Vec<BigInt>);

impl IntVector {
    pub fn zeros(n: usize) -> IntVector {
        IntVector(vec![BigInt::zero(); n])
    }

    pub fn from_i64(v: &[i64]) -> IntVector {
        IntVector(v.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &IntVector) -> IntVector {
        IntVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &IntVector) -> IntVector {
        IntVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn scale(&self, c: &BigInt) -> IntVector {
        IntVector(self.0.iter().map(|a| a * c).collect())
    }

    pub fn neg(&self) -> IntVector {
        IntVector(self.0.iter().map(|a| -a).collect())
    }

    pub fn dot(&self, other: &IntVector) -> BigInt {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm_inf(&self) -> BigInt {
        self.0
            .iter()
            .map(Signed::abs)
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn norm_l1(&self) -> BigInt {
        self.0.iter().map(Signed::abs).sum()
    }

    /// Componentwise ≤ (used for minimality tests on nonnegative vectors).
    pub fn le(&self, other: &IntVector) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn as_i64(&self) -> Option<Vec<i64>> {
        self.0.iter().map(|x| i64::try_from(x).ok()).collect()
    }

    pub fn project(&self, dims: std::ops::Range<usize>) -> IntVector {
        IntVector(self.0[dims].to_vec())
    }
}

impl fmt::Debug for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({})",
            self.0
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

/// Row-major integer matrix.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> IntMatrix {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> IntMatrix {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows_i64(rows: &[&[i64]]) -> IntMatrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = IntMatrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = BigInt::from(v);
            }
        }
        m
    }

    pub fn row(&self, i: usize) -> IntVector {
        IntVector(self.data[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    pub fn col(&self, j: usize) -> IntVector {
        IntVector((0..self.rows).map(|i| self[(i, j)].clone()).collect())
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    if i == j {
                        self[(i, j)].is_one()
                    } else {
                        self[(i, j)].is_zero()
                    }
                })
            })
    }

    /// Scalar multiple of the identity, if it is one.
    pub fn as_scalar(&self) -> Option<BigInt> {
        if self.rows != self.cols || self.rows == 0 {
            return None;
        }
        let d = self[(0, 0)].clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let want = if i == j { d.clone() } else { BigInt::zero() };
                if self[(i, j)] != want {
                    return None;
                }
            }
        }
        Some(d)
    }

    /// Row vector times matrix (functions act on the right).
    pub fn act_on_row(&self, v: &IntVector) -> Result<IntVector> {
        if v.dim() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "row vector of dim {} against {}x{} matrix",
                v.dim(),
                self.rows,
                self.cols
            )));
        }
        let mut out = IntVector::zeros(self.cols);
        for j in 0..self.cols {
            out.0[j] = (0..self.rows).map(|i| &v.0[i] * &self[(i, j)]).sum();
        }
        Ok(out)
    }

    /// Matrix times column vector.
    pub fn mul_vec(&self, v: &IntVector) -> Result<IntVector> {
        if v.dim() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "column vector of dim {} against {}x{} matrix",
                v.dim(),
                self.rows,
                self.cols
            )));
        }
        let mut out = IntVector::zeros(self.rows);
        for i in 0..self.rows {
            out.0[i] = (0..self.cols).map(|j| &self[(i, j)] * &v.0[j]).sum();
        }
        Ok(out)
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                out[(i, j)] = (0..self.cols)
                    .map(|l| &self[(i, l)] * &other[(l, j)])
                    .sum();
            }
        }
        Ok(out)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            let x = self[(a, j)].clone();
            self[(a, j)] = self[(b, j)].clone();
            self[(b, j)] = x;
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        for i in 0..self.rows {
            let x = self[(i, a)].clone();
            self[(i, a)] = self[(i, b)].clone();
            self[(i, b)] = x;
        }
    }

    /// row[a] += c * row[b]
    fn add_row(&mut self, a: usize, b: usize, c: &BigInt) {
        for j in 0..self.cols {
            let add = &self[(b, j)] * c;
            self[(a, j)] += add;
        }
    }

    fn add_col(&mut self, a: usize, b: usize, c: &BigInt) {
        for i in 0..self.rows {
            let add = &self[(i, b)] * c;
            self[(i, a)] += add;
        }
    }

    fn negate_row(&mut self, a: usize) {
        for j in 0..self.cols {
            let x = -self[(a, j)].clone();
            self[(a, j)] = x;
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for i in 0..self.rows {
            writeln!(
                f,
                "  {:?}",
                (0..self.cols).map(|j| self[(i, j)].to_string()).collect::<Vec<_>>()
            )?;
        }
        write!(f, "]")
    }
}

/// Smith normal form: D = U · A · V with U, V unimodular and D diagonal
/// with d₁ | d₂ | ⋯.
pub struct Smith {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
}

pub fn smith_normal_form(a: &IntMatrix) -> Smith {
    let mut d = a.clone();
    let mut u = IntMatrix::identity(a.rows);
    let mut v = IntMatrix::identity(a.cols);
    let n = a.rows.min(a.cols);
    for t in 0..n {
        loop {
            // Find a pivot: the nonzero entry of least absolute value in
            // the remaining block.
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..d.rows {
                for j in t..d.cols {
                    if !d[(i, j)].is_zero()
                        && pivot.map_or(true, |(pi, pj)| {
                            d[(i, j)].abs() < d[(pi, pj)].abs()
                        })
                    {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else { break };
            if pi != t {
                d.swap_rows(t, pi);
                u.swap_rows(t, pi);
            }
            if pj != t {
                d.swap_cols(t, pj);
                v.swap_cols(t, pj);
            }
            // Reduce column and row against the pivot.
            let mut clean = true;
            for i in t + 1..d.rows {
                if !d[(i, t)].is_zero() {
                    let q = d[(i, t)].div_floor(&d[(t, t)]);
                    let neg_q = -q;
                    d.add_row(i, t, &neg_q);
                    u.add_row(i, t, &neg_q);
                    if !d[(i, t)].is_zero() {
                        clean = false;
                    }
                }
            }
            for j in t + 1..d.cols {
                if !d[(t, j)].is_zero() {
                    let q = d[(t, j)].div_floor(&d[(t, t)]);
                    let neg_q = -q;
                    d.add_col(j, t, &neg_q);
                    v.add_col(j, t, &neg_q);
                    if !d[(t, j)].is_zero() {
                        clean = false;
                    }
                }
            }
            if clean
                && (t + 1..d.rows).all(|i| d[(i, t)].is_zero())
                && (t + 1..d.cols).all(|j| d[(t, j)].is_zero())
            {
                break;
            }
        }
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    // Divisibility chain: fold non-dividing later entries into d_t.
    for t in 0..n {
        if d[(t, t)].is_zero() {
            continue;
        }
        for s in t + 1..n {
            if d[(s, s)].is_zero() {
                continue;
            }
            if (&d[(s, s)] % &d[(t, t)]).is_zero() {
                continue;
            }
            // Standard 2x2 fix-up: gcd to position t, lcm to position s.
            let one = BigInt::one();
            d.add_col(t, s, &one);
            v.add_col(t, s, &one);
            loop {
                // Re-triangularize the 2x2 block (t,s).
                if d[(s, t)].is_zero() && d[(t, s)].is_zero() {
                    break;
                }
                if !d[(s, t)].is_zero() {
                    if d[(s, t)].abs() < d[(t, t)].abs() || d[(t, t)].is_zero() {
                        d.swap_rows(t, s);
                        u.swap_rows(t, s);
                    }
                    let q = d[(s, t)].div_floor(&d[(t, t)]);
                    let neg_q = -q;
                    d.add_row(s, t, &neg_q);
                    u.add_row(s, t, &neg_q);
                }
                if !d[(t, s)].is_zero() {
                    if d[(t, s)].abs() < d[(t, t)].abs() || d[(t, t)].is_zero() {
                        d.swap_cols(t, s);
                        v.swap_cols(t, s);
                    }
                    let q = d[(t, s)].div_floor(&d[(t, t)]);
                    let neg_q = -q;
                    d.add_col(s, t, &neg_q);
                    v.add_col(s, t, &neg_q);
                }
            }
            if d[(t, t)].is_negative() {
                d.negate_row(t);
                u.negate_row(t);
            }
            if d[(s, s)].is_negative() {
                d.negate_row(s);
                u.negate_row(s);
            }
        }
    }
    Smith { d, u, v }
}

/// The full integer solution set of a linear system, as a particular
/// solution plus a lattice of homogeneous solutions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeCoset {
    pub particular: IntVector,
    pub basis: Vec<IntVector>,
    pub dim: usize,
}

/// Solve A·x = b over ℤ. Returns None when no integer solution exists.
pub fn solve_linear_system(a: &IntMatrix, b: &IntVector) -> Result<Option<LatticeCoset>> {
    if b.dim() != a.rows {
        return Err(Error::DimensionMismatch(format!(
            "rhs of dim {} against {} rows",
            b.dim(),
            a.rows
        )));
    }
    let Smith { d, u, v } = smith_normal_form(a);
    let c = u.mul_vec(b)?;
    let n = a.cols;
    let mut z = IntVector::zeros(n);
    let mut free: Vec<usize> = Vec::new();
    for j in 0..n {
        let dj = if j < a.rows { d[(j, j)].clone() } else { BigInt::zero() };
        if dj.is_zero() {
            if j < a.rows && !c.0[j].is_zero() {
                return Ok(None);
            }
            free.push(j);
        } else {
            let (q, r) = c.0[j].div_rem(&dj);
            if !r.is_zero() {
                return Ok(None);
            }
            z.0[j] = q;
        }
    }
    for i in n..a.rows {
        if !c.0[i].is_zero() {
            return Ok(None);
        }
    }
    let particular = v.mul_vec(&z)?;
    let basis = free
        .into_iter()
        .map(|j| v.col(j))
        .filter(|w| !w.is_zero())
        .collect();
    Ok(Some(LatticeCoset {
        particular,
        basis,
        dim: n,
    }))
}

impl LatticeCoset {
    /// Membership of `x` in the coset.
    pub fn contains(&self, x: &IntVector) -> Result<bool> {
        // x - particular ∈ lattice(basis): solve B·λ = x - p.
        let m = self.basis.len();
        let mut b_mat = IntMatrix::zeros(self.dim, m);
        for (j, v) in self.basis.iter().enumerate() {
            for i in 0..self.dim {
                b_mat[(i, j)] = v.0[i].clone();
            }
        }
        let rhs = x.sub(&self.particular);
        Ok(solve_linear_system(&b_mat, &rhs)?.is_some())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snf_diagonalizes_and_divides() {
        let a = IntMatrix::from_rows_i64(&[&[2, 4, 4], &[-6, 6, 12], &[10, 4, 16]]);
        let s = smith_normal_form(&a);
        // U·A·V = D
        let uav = s.u.mul(&a).unwrap().mul(&s.v).unwrap();
        assert_eq!(uav, s.d);
        // Diagonal, nonnegative, divisibility chain.
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(s.d[(i, j)].is_zero());
                }
            }
        }
        let d: Vec<BigInt> = (0..3).map(|i| s.d[(i, i)].clone()).collect();
        assert!(!d[0].is_negative() && !d[1].is_negative() && !d[2].is_negative());
        if !d[0].is_zero() && !d[1].is_zero() {
            assert!((&d[1] % &d[0]).is_zero());
        }
        if !d[1].is_zero() && !d[2].is_zero() {
            assert!((&d[2] % &d[1]).is_zero());
        }
    }

    #[test]
    fn solve_x_plus_y() {
        // x + y = 0: particular (0,0), basis {(1,-1)} up to sign.
        let a = IntMatrix::from_rows_i64(&[&[1, 1]]);
        let sol = solve_linear_system(&a, &IntVector::from_i64(&[0]))
            .unwrap()
            .unwrap();
        assert!(a.mul_vec(&sol.particular).unwrap().is_zero());
        assert_eq!(sol.basis.len(), 1);
        assert!(a.mul_vec(&sol.basis[0]).unwrap().is_zero());
        assert!(!sol.basis[0].is_zero());
    }

    #[test]
    fn solve_2x_eq_4_and_parity_obstruction() {
        let a = IntMatrix::from_rows_i64(&[&[2]]);
        let sol = solve_linear_system(&a, &IntVector::from_i64(&[4]))
            .unwrap()
            .unwrap();
        assert_eq!(sol.particular, IntVector::from_i64(&[2]));
        assert!(sol.basis.is_empty());
        assert!(solve_linear_system(&a, &IntVector::from_i64(&[3]))
            .unwrap()
            .is_none());
    }

    #[test]
    fn solve_verifies_on_random_small_systems() {
        // Deterministic pseudo-random small systems; check A·p = b and
        // A·v = 0 for every basis vector, and coset membership.
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for _ in 0..60 {
            let rows = (next() % 3 + 1) as usize;
            let cols = (next() % 4 + 1) as usize;
            let mut a = IntMatrix::zeros(rows, cols);
            for i in 0..rows {
                for j in 0..cols {
                    a[(i, j)] = BigInt::from((next() % 9) as i64 - 4);
                }
            }
            // Build b from a known solution so a solution always exists.
            let x0 = IntVector(
                (0..cols)
                    .map(|_| BigInt::from((next() % 7) as i64 - 3))
                    .collect(),
            );
            let b = a.mul_vec(&x0).unwrap();
            let sol = solve_linear_system(&a, &b).unwrap().expect("solvable");
            assert_eq!(a.mul_vec(&sol.particular).unwrap(), b);
            for v in &sol.basis {
                assert!(a.mul_vec(v).unwrap().is_zero());
            }
            assert!(sol.contains(&x0).unwrap());
        }
    }

    #[test]
    fn act_on_row_is_right_action() {
        // (X)Φ with Φ = [[0,1],[-1,0]]: (x1,x2) ↦ (-x2, x1).
        let phi = IntMatrix::from_rows_i64(&[&[0, 1], &[-1, 0]]);
        let x = IntVector::from_i64(&[3, 5]);
        assert_eq!(phi.act_on_row(&x).unwrap(), IntVector::from_i64(&[-5, 3]));
    }
}
