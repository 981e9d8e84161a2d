//! Small dense linear algebra over the rationals and a matching f64
//! factorization used for screening.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q(v: f64) -> Q {
    BigRational::from_float(v).expect("finite value")
}

pub fn qi(v: i64) -> Q {
    BigRational::from_integer(BigInt::from(v))
}

pub fn to_f64(v: &Q) -> f64 {
    v.to_f64().unwrap_or_else(|| {
        if v.is_positive() {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    })
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

/// Solves the square system `m·x = rhs` exactly; `None` when singular.
pub fn solve(mut m: Vec<Vec<Q>>, mut rhs: Vec<Q>) -> Option<Vec<Q>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        let inv = Q::one() / &m[col][col];
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] * &inv;
            for k in col..n {
                let t = &f * &m[col][k];
                m[r][k] -= t;
            }
            let t = &f * &rhs[col];
            rhs[r] -= t;
        }
    }
    let mut x = vec![Q::zero(); n];
    for r in (0..n).rev() {
        let mut s = rhs[r].clone();
        for k in r + 1..n {
            s -= &m[r][k] * &x[k];
        }
        x[r] = s / &m[r][r];
    }
    Some(x)
}

/// Basis of `{d : g·d = 0 for every row g}`.
pub fn nullspace(rows: &[Vec<Q>], n: usize) -> Vec<Vec<Q>> {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Q::one() / &m[r][col];
        for k in 0..n {
            m[r][k] = &m[r][k] * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for k in 0..n {
                    let t = &f * &m[r][k];
                    m[i][k] -= t;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    let mut basis = Vec::new();
    for free in (0..n).filter(|c| !pivots.contains(c)) {
        let mut d = vec![Q::zero(); n];
        d[free] = Q::one();
        for (row, &pc) in pivots.iter().enumerate() {
            d[pc] = -m[row][free].clone();
        }
        basis.push(d);
    }
    basis
}

/// LU factors of a small dense f64 matrix with partial pivoting.
pub struct DenseLu {
    lu: Vec<Vec<f64>>,
    perm: Vec<usize>,
}

impl DenseLu {
    /// `None` when a pivot falls below `tol` relative to the largest entry.
    pub fn factor(mut m: Vec<Vec<f64>>, tol: f64) -> Option<Self> {
        let n = m.len();
        let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let p = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
            if m[p][col].abs() <= tol * scale {
                return None;
            }
            m.swap(col, p);
            perm.swap(col, p);
            for r in col + 1..n {
                let f = m[r][col] / m[col][col];
                m[r][col] = f;
                for k in col + 1..n {
                    m[r][k] -= f * m[col][k];
                }
            }
        }
        Some(DenseLu { lu: m, perm })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for r in 0..n {
            for k in 0..r {
                x[r] -= self.lu[r][k] * x[k];
            }
        }
        for r in (0..n).rev() {
            for k in r + 1..n {
                x[r] -= self.lu[r][k] * x[k];
            }
            x[r] /= self.lu[r][r];
        }
        x
    }
}
