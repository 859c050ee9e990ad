//! Dense complex matrices and an LU factorization with partial pivoting.
//!
//! Only what the determinant and propagator code needs: row-major storage,
//! products, and `log det` split into an exact real part and a principal-branch
//! imaginary part.

use std::f64::consts::PI;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn diag(d: &[Complex64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            let orow = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// `P A = L U` with unit lower `L`; both factors packed in one matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
    swaps: usize,
}

impl Lu {
    pub fn new(mut a: CMatrix) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::Invalid("non-finite matrix entry".into()));
        }
        let n = a.n;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        for col in 0..n {
            let mut p = col;
            let mut best = a[(col, col)].norm();
            for r in col + 1..n {
                let v = a[(r, col)].norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 {
                return Err(Error::Singular);
            }
            if p != col {
                for j in 0..n {
                    a.data.swap(col * n + j, p * n + j);
                }
                perm.swap(col, p);
                swaps += 1;
            }
            let piv = a[(col, col)];
            let inv = 1.0 / piv;
            for r in col + 1..n {
                let f = a[(r, col)] * inv;
                if f.re == 0.0 && f.im == 0.0 {
                    continue;
                }
                a[(r, col)] = f;
                let (upper, lower) = a.data.split_at_mut(r * n);
                let prow = &upper[col * n + col + 1..col * n + n];
                let rrow = &mut lower[col + 1..n];
                for (x, y) in rrow.iter_mut().zip(prow) {
                    *x -= f * y;
                }
            }
        }
        Ok(Self { lu: a, perm, swaps })
    }

    pub fn dim(&self) -> usize {
        self.lu.n
    }

    /// Real part is `sum log|u_ii|`; imaginary part is the pivot arguments
    /// plus `pi` per row swap, wrapped into `(-pi, pi]`.
    pub fn logdet(&self) -> Complex64 {
        let mut re = 0.0;
        let mut im = if self.swaps % 2 == 1 { PI } else { 0.0 };
        for i in 0..self.lu.n {
            let u = self.lu[(i, i)];
            re += u.norm().ln();
            im += u.arg();
        }
        Complex64::new(re, wrap_angle(im))
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in 0..i {
                s -= row[j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in i + 1..n {
                s -= row[j] * x[j];
            }
            x[i] = s / row[i];
        }
        x
    }

    /// Column `j` of the inverse.
    pub fn inverse_column(&self, j: usize) -> Vec<Complex64> {
        let mut e = vec![Complex64::new(0.0, 0.0); self.lu.n];
        e[j] = Complex64::new(1.0, 0.0);
        self.solve(&e)
    }

    pub fn inverse(&self) -> CMatrix {
        let n = self.lu.n;
        let mut inv = CMatrix::zeros(n);
        for j in 0..n {
            let c = self.inverse_column(j);
            for i in 0..n {
                inv[(i, j)] = c[i];
            }
        }
        inv
    }
}

pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

pub fn logdet(a: &CMatrix) -> Result<Complex64> {
    Ok(Lu::new(a.clone())?.logdet())
}
