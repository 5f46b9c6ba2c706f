//! Exact rational vectors in the ambient Euclidean space.

use std::fmt;
use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub type Q = Ratio<i64>;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

pub fn to_big(x: Q) -> BigRational {
    BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

pub fn q_to_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

pub fn big_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `Some(n)` when `x` is an integer.
pub fn as_integer(x: Q) -> Option<i64> {
    if x.is_integer() {
        Some(x.to_integer())
    } else {
        None
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Vector(pub Vec<Q>);

impl Vector {
    pub fn zero(dim: usize) -> Self {
        Vector(vec![Q::zero(); dim])
    }

    pub fn from_ints(xs: &[i64]) -> Self {
        Vector(xs.iter().map(|&x| qi(x)).collect())
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zero(dim);
        v.0[i] = Q::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &Vector) -> Q {
        self.0
            .iter()
            .zip(&other.0)
            .fold(Q::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn norm_sq(&self) -> Q {
        self.dot(self)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn scale(&self, s: Q) -> Vector {
        Vector(self.0.iter().map(|x| x * s).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&x| q_to_f64(x)).collect()
    }

    pub fn norm_f64(&self) -> f64 {
        q_to_f64(self.norm_sq()).sqrt()
    }

    /// Doubled coordinates as integers, when the vector lies in the half lattice.
    pub fn doubled(&self) -> Option<Vec<i64>> {
        self.0.iter().map(|x| as_integer(x * qi(2))).collect()
    }

    /// Coroot `2v/(v,v)`.
    pub fn coroot(&self) -> Vector {
        self.scale(qi(2) / self.norm_sq())
    }

    /// Orthogonal reflection in the hyperplane `(x, alpha) = k`.
    pub fn reflect(&self, alpha: &Vector, k: Q) -> Vector {
        let t = self.dot(alpha) - k;
        self - &alpha.coroot().scale(t)
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", x)?;
        }
        write!(f, ")")
    }
}

impl Index<usize> for Vector {
    type Output = Q;
    fn index(&self, i: usize) -> &Q {
        &self.0[i]
    }
}

impl<'a> Add<&'a Vector> for &'a Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl<'a> Sub<&'a Vector> for &'a Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Add for Vector {
    type Output = Vector;
    fn add(self, rhs: Vector) -> Vector {
        &self + &rhs
    }
}

impl Sub for Vector {
    type Output = Vector;
    fn sub(self, rhs: Vector) -> Vector {
        &self - &rhs
    }
}

impl AddAssign<&Vector> for Vector {
    fn add_assign(&mut self, rhs: &Vector) {
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a += b;
        }
    }
}

impl SubAssign<&Vector> for Vector {
    fn sub_assign(&mut self, rhs: &Vector) {
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a -= b;
        }
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        Vector(self.0.iter().map(|x| -x).collect())
    }
}

impl Neg for Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        -&self
    }
}

impl Mul<&Vector> for Q {
    type Output = Vector;
    fn mul(self, rhs: &Vector) -> Vector {
        rhs.scale(self)
    }
}

/// Square matrix acting on ambient coordinates, row-major.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Matrix {
    pub n: usize,
    pub data: Vec<Q>,
}

impl Matrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![Q::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = Q::one();
        }
        Matrix { n, data }
    }

    /// Reflection `x -> x - (x, alpha) alpha^vee`.
    pub fn reflection(alpha: &Vector) -> Self {
        let n = alpha.dim();
        let cr = alpha.coroot();
        let mut m = Self::identity(n);
        for a in 0..n {
            for b in 0..n {
                m.data[a * n + b] -= cr[a] * alpha[b];
            }
        }
        m
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        let n = self.n;
        let mut data = vec![Q::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Matrix { n, data }
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        let n = self.n;
        Vector(
            (0..n)
                .map(|i| {
                    (0..n).fold(Q::zero(), |acc, j| {
                        let a = self.data[i * n + j];
                        if a.is_zero() {
                            acc
                        } else {
                            acc + a * v[j]
                        }
                    })
                })
                .collect(),
        )
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.n;
        let mut data = vec![Q::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        Matrix { n, data }
    }
}

/// Solve `A x = b` exactly by Gauss-Jordan elimination; `None` when singular.
pub fn solve_exact(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let n = a.len();
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let p = m[col][col];
        for x in m[col].iter_mut() {
            *x /= p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col];
                for c in col..=n {
                    let v = m[col][c];
                    m[r][c] -= f * v;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n]).collect())
}

/// Exact rational in JSON form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
}

impl From<&BigRational> for RationalJson {
    fn from(x: &BigRational) -> Self {
        RationalJson {
            num: x.numer().to_string(),
            den: x.denom().to_string(),
        }
    }
}

impl From<Q> for RationalJson {
    fn from(x: Q) -> Self {
        RationalJson {
            num: x.numer().to_string(),
            den: x.denom().to_string(),
        }
    }
}

impl RationalJson {
    pub fn to_q(&self) -> Option<Q> {
        let n: i64 = self.num.parse().ok()?;
        let d: i64 = self.den.parse().ok()?;
        if d == 0 {
            return None;
        }
        Some(Q::new(n, d))
    }
}

/// Integer power of a rational, negative exponents allowed.
pub fn big_pow(base: &BigRational, e: i64) -> BigRational {
    if e >= 0 {
        num_traits::pow(base.clone(), e as usize)
    } else {
        num_traits::pow(base.recip(), (-e) as usize)
    }
}

pub fn big_from_u64(x: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

pub fn abs_q(x: Q) -> Q {
    x.abs()
}

/// First continued-fraction convergent of `x` lying within `tol`.
pub fn simplest_rational(x: f64, tol: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    // continued fraction convergents of x, stop at the first inside the window
    let (mut h0, mut h1) = (BigInt::from(0), BigInt::from(1));
    let (mut k0, mut k1) = (BigInt::from(1), BigInt::from(0));
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        let ai = BigInt::from(a as i64);
        let h2 = &ai * &h1 + &h0;
        let k2 = &ai * &k1 + &k0;
        let val = h2.to_f64()? / k2.to_f64()?;
        if (val - x).abs() <= tol {
            return Some(BigRational::new(h2, k2));
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = r - a;
        if frac.abs() < 1e-300 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}
