//! Polynomials in the unit-delay operator `z⁻¹`.
//!
//! A [`DelayPoly`] stores `c_0 + c_1 z⁻¹ + … + c_n z⁻ⁿ` lowest power first and
//! is always trimmed, so its last stored coefficient is nonzero. The zero
//! polynomial is the empty sequence and has no degree.
//!
//! Stability is judged in the z-plane: the roots of `zⁿ·p(z⁻¹)` are the
//! eigenvalues of its companion matrix, and a polynomial is strictly stable
//! when all of them lie inside the open unit disk.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, Schur};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<T>", into = "Vec<T>", bound = "")]
pub struct DelayPoly<T: Scalar> {
    coeffs: Vec<T>,
}

impl<T: Scalar> From<Vec<T>> for DelayPoly<T> {
    fn from(coeffs: Vec<T>) -> Self {
        Self::new(coeffs)
    }
}

impl<T: Scalar> From<DelayPoly<T>> for Vec<T> {
    fn from(p: DelayPoly<T>) -> Self {
        p.coeffs
    }
}

impl<T: Scalar> DelayPoly<T> {
    /// Builds a polynomial, trimming trailing coefficients below `T::TRIM_EPS`.
    pub fn new(mut coeffs: Vec<T>) -> Self {
        let eps = T::lit(T::TRIM_EPS);
        while coeffs.last().is_some_and(|c| c.abs() <= eps) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_slice(coeffs: &[T]) -> Self {
        Self::new(coeffs.to_vec())
    }

    pub fn from_f64(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| T::lit(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// `Δ = 1 − z⁻¹`.
    pub fn delta() -> Self {
        Self::new(vec![T::one(), -T::one()])
    }

    /// `Δᵐ`.
    pub fn delta_pow(m: usize) -> Self {
        (0..m).fold(Self::one(), |acc, _| &acc * &Self::delta())
    }

    /// The pure delay `z⁻ᵈ`.
    pub fn delay(d: usize) -> Self {
        let mut c = vec![T::zero(); d + 1];
        c[d] = T::one();
        Self { coeffs: c }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient of `z⁻ⁱ`, zero beyond the stored length.
    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).copied().unwrap_or_else(T::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficients zero-padded to exactly `len` entries. Panics if the
    /// polynomial does not fit.
    pub fn padded(&self, len: usize) -> Vec<T> {
        assert!(self.coeffs.len() <= len, "polynomial longer than {len}");
        let mut v = self.coeffs.clone();
        v.resize(len, T::zero());
        v
    }

    pub fn max_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()))
    }

    pub fn scale(&self, c: T) -> Self {
        Self::new(self.coeffs.iter().map(|&x| x * c).collect())
    }

    /// Multiplies by `z⁻ᵈ`.
    pub fn shift(&self, d: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut c = vec![T::zero(); d];
        c.extend_from_slice(&self.coeffs);
        Self { coeffs: c }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| f(self.coeff(i), other.coeff(i))).collect())
    }

    /// Horner evaluation at a given value of `z⁻¹`.
    pub fn eval(&self, zinv: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * zinv + c)
    }

    pub fn eval_real(&self, zinv: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * zinv + c)
    }

    /// Value at `z = 1`, the sum of the coefficients.
    pub fn at_one(&self) -> T {
        self.coeffs.iter().copied().sum()
    }

    /// Long division in powers of `z⁻¹`, highest power first:
    /// `self = q·divisor + r` with `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self)> {
        let dd = divisor
            .degree()
            .ok_or(Error::ZeroPolynomial("polynomial divisor"))?;
        let lead = divisor.coeffs[dd];
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut q = vec![T::zero(); rem.len() - dd];
        for i in (0..q.len()).rev() {
            let f = rem[i + dd] / lead;
            q[i] = f;
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                rem[i + j] -= f * dc;
            }
            rem[i + dd] = T::zero();
        }
        rem.truncate(dd);
        Ok((Self::new(q), Self::new(rem)))
    }

    /// Divides by `Δ = 1 − z⁻¹`, returning the quotient and the discarded
    /// remainder, which equals `self(1)`.
    pub fn div_delta(&self) -> (Self, T) {
        match self.degree() {
            None => (Self::zero(), T::zero()),
            Some(0) => (Self::zero(), self.coeffs[0]),
            Some(n) => {
                let mut q = Vec::with_capacity(n);
                let mut acc = T::zero();
                for &c in &self.coeffs[..n] {
                    acc += c;
                    q.push(acc);
                }
                (Self::new(q), acc + self.coeffs[n])
            }
        }
    }

    /// Extracts the largest power of `Δ` dividing the polynomial: returns
    /// `(m, reduced)` with `self = Δᵐ·reduced` and `|reduced(1)| > tol`.
    ///
    /// The zero polynomial is returned unchanged with `m = 0`.
    pub fn factor_delta(&self, tol: T) -> (usize, Self) {
        let mut m = 0;
        let mut p = self.clone();
        while p.degree().is_some_and(|d| d >= 1) && p.at_one().abs() <= tol {
            p = p.div_delta().0;
            m += 1;
        }
        (m, p)
    }

    /// All z-plane roots of `zⁿ·p(z⁻¹)`, computed as companion-matrix
    /// eigenvalues.
    pub fn z_roots(&self) -> Result<Vec<Complex<T>>> {
        let n = match self.degree() {
            None | Some(0) => return Err(Error::NoRoots),
            Some(n) => n,
        };
        let lead = self.coeffs[0];
        if lead.abs() <= T::lit(T::TRIM_EPS) {
            return Err(Error::RootsAtInfinity);
        }
        if n == 1 {
            return Ok(vec![Complex::new(-self.coeffs[1] / lead, T::zero())]);
        }
        let lead = lead.as_f64();
        let mut companion = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            companion[(0, j)] = -self.coeffs[j + 1].as_f64() / lead;
        }
        for i in 1..n {
            companion[(i, i - 1)] = 1.0;
        }
        let schur = Schur::try_new(companion, f64::EPSILON, 10_000 * n)
            .ok_or(Error::RootsDidNotConverge(n))?;
        Ok(schur
            .complex_eigenvalues()
            .iter()
            .map(|z| Complex::new(T::lit(z.re), T::lit(z.im)))
            .collect())
    }

    /// Strict stability check; constants are stable with margin 1.
    ///
    /// A polynomial whose `z⁰` coefficient vanishes has roots at infinity and
    /// is reported unstable with infinite modulus.
    pub fn stability(&self) -> Result<StabilityVerdict<T>> {
        match self.degree() {
            None => Err(Error::ZeroPolynomial("stability check")),
            Some(0) => Ok(StabilityVerdict::from_roots(Vec::new())),
            Some(_) => match self.z_roots() {
                Ok(roots) => Ok(StabilityVerdict::from_roots(roots)),
                Err(Error::RootsAtInfinity) => {
                    let finite = self.coeffs.iter().position(|c| !c.is_zero());
                    let tail = Self::new(self.coeffs[finite.unwrap_or(0)..].to_vec());
                    let roots = tail.z_roots().unwrap_or_default();
                    Ok(StabilityVerdict {
                        roots,
                        max_modulus: T::infinity(),
                        stable: false,
                        margin: T::neg_infinity(),
                    })
                }
                Err(e) => Err(e),
            },
        }
    }

    pub fn is_strictly_stable(&self) -> Result<bool> {
        Ok(self.stability()?.stable)
    }
}

impl<T: Scalar> fmt::Display for DelayPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

impl<T: Scalar> Add for &DelayPoly<T> {
    type Output = DelayPoly<T>;
    fn add(self, rhs: Self) -> DelayPoly<T> {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<T: Scalar> Sub for &DelayPoly<T> {
    type Output = DelayPoly<T>;
    fn sub(self, rhs: Self) -> DelayPoly<T> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<T: Scalar> Neg for &DelayPoly<T> {
    type Output = DelayPoly<T>;
    fn neg(self) -> DelayPoly<T> {
        self.scale(-T::one())
    }
}

impl<T: Scalar> Mul for &DelayPoly<T> {
    type Output = DelayPoly<T>;
    fn mul(self, rhs: Self) -> DelayPoly<T> {
        if self.is_zero() || rhs.is_zero() {
            return DelayPoly::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        DelayPoly::new(out)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<T: Scalar> $tr for DelayPoly<T> {
            type Output = DelayPoly<T>;
            fn $m(self, rhs: Self) -> DelayPoly<T> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityVerdict<T: Scalar> {
    pub roots: Vec<Complex<T>>,
    pub max_modulus: T,
    pub stable: bool,
    /// `1 − max_modulus`.
    pub margin: T,
}

impl<T: Scalar> StabilityVerdict<T> {
    fn from_roots(roots: Vec<Complex<T>>) -> Self {
        let max_modulus = roots.iter().fold(T::zero(), |m, r| m.max(r.norm()));
        Self {
            stable: max_modulus < T::one() - T::lit(T::STAB_EPS),
            margin: T::one() - max_modulus,
            max_modulus,
            roots,
        }
    }
}

/// A rational transfer function in `z⁻¹`, kept unreduced.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalTf<T: Scalar> {
    pub num: DelayPoly<T>,
    pub den: DelayPoly<T>,
}

impl<T: Scalar> RationalTf<T> {
    pub fn new(num: DelayPoly<T>, den: DelayPoly<T>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroPolynomial("transfer function denominator"));
        }
        Ok(Self { num, den })
    }

    /// Cancels the `Δ` factors shared by numerator and denominator.
    pub fn cancel_delta(&self) -> Self {
        let tol_n = delta_tol(&self.num);
        let tol_d = delta_tol(&self.den);
        let (p, mut num) = self.num.factor_delta(tol_n);
        let (q, mut den) = self.den.factor_delta(tol_d);
        let common = p.min(q);
        if !num.is_zero() {
            num = &num * &DelayPoly::delta_pow(p - common);
        }
        den = &den * &DelayPoly::delta_pow(q - common);
        Self { num, den }
    }

    pub fn dc_gain(&self) -> Result<T> {
        let r = self.cancel_delta();
        let d = r.den.at_one();
        if d.abs() <= delta_tol(&r.den) {
            return Err(Error::IndeterminateLimit);
        }
        Ok(r.num.at_one() / d)
    }
}

/// Absolute tolerance for "vanishes at z = 1", scaled by coefficient size.
pub(crate) fn delta_tol<T: Scalar>(p: &DelayPoly<T>) -> T {
    T::lit(T::RESIDUAL_TOL) * T::one().max(p.coeffs().iter().map(|c| c.abs()).sum())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FinalValue<T> {
    Finite(T),
    Diverges,
}

impl<T: Scalar> FinalValue<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            FinalValue::Finite(v) => Some(v),
            FinalValue::Diverges => None,
        }
    }
}

impl<T: Scalar> fmt::Display for FinalValue<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FinalValue::Finite(v) => write!(f, "{v}"),
            FinalValue::Diverges => write!(f, "diverges"),
        }
    }
}

/// Final-value theorem for `f` driven by an input whose z-transform has a
/// pole of order `input_pole_order` (`n + 1`) at `z = 1` and numerator value
/// `input_num_at_1` there: `lim_{z→1} (1 − z⁻¹)·f(z)·R(z)`.
///
/// Step inputs have pole order 1 and numerator 1; a ramp `T_s·k` has order 2
/// and numerator `T_s`; `kⁿ` has order `n + 1` and numerator `n!`.
pub fn final_value_limit<T: Scalar>(
    f: &RationalTf<T>,
    input_pole_order: usize,
    input_num_at_1: T,
) -> Result<FinalValue<T>> {
    assert!(input_pole_order >= 1, "input pole order is n + 1 >= 1");
    let n = input_pole_order - 1;
    let reduced = f.cancel_delta();
    let den1 = reduced.den.at_one();
    if den1.abs() <= delta_tol(&reduced.den) {
        return Err(Error::IndeterminateLimit);
    }
    if reduced.num.is_zero() {
        return Ok(FinalValue::Finite(T::zero()));
    }
    let (p, num) = reduced.num.factor_delta(delta_tol(&reduced.num));
    Ok(match p.cmp(&n) {
        std::cmp::Ordering::Greater => FinalValue::Finite(T::zero()),
        std::cmp::Ordering::Equal => FinalValue::Finite(num.at_one() * input_num_at_1 / den1),
        std::cmp::Ordering::Less => FinalValue::Diverges,
    })
}
