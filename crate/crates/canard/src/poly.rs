//! Dense univariate polynomials with plain coefficient arithmetic.
//!
//! Every closed-form construction in this crate (odd correction terms,
//! divergence integrands, antiderivatives) is carried out on coefficients,
//! so that quadrature can be reserved for independent cross-checks.

use crate::error::{Error, Result};

/// Polynomial with coefficients in ascending degree order.
/// The zero polynomial is the empty coefficient vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    c: Vec<f64>,
}

impl Poly {
    pub fn new(mut c: Vec<f64>) -> Self {
        while c.last() == Some(&0.0) {
            c.pop();
        }
        Poly { c }
    }

    pub fn zero() -> Self {
        Poly { c: Vec::new() }
    }

    pub fn constant(a: f64) -> Self {
        Poly::new(vec![a])
    }

    /// The monomial x.
    pub fn x() -> Self {
        Poly { c: vec![0.0, 1.0] }
    }

    /// Product of linear factors (x - r_i).
    pub fn from_roots(roots: &[f64]) -> Self {
        let mut p = Poly::constant(1.0);
        for &r in roots {
            p = &p * &Poly::new(vec![-r, 1.0]);
        }
        p
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.c.is_empty() {
            None
        } else {
            Some(self.c.len() - 1)
        }
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for &ck in self.c.iter().rev() {
            acc = acc * x + ck;
        }
        acc
    }

    pub fn deriv(&self) -> Poly {
        if self.c.len() <= 1 {
            return Poly::zero();
        }
        let c = self
            .c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &ck)| k as f64 * ck)
            .collect();
        Poly::new(c)
    }

    /// Antiderivative with zero constant term.
    pub fn antideriv(&self) -> Poly {
        if self.c.is_empty() {
            return Poly::zero();
        }
        let mut c = Vec::with_capacity(self.c.len() + 1);
        c.push(0.0);
        for (k, &ck) in self.c.iter().enumerate() {
            c.push(ck / (k + 1) as f64);
        }
        Poly::new(c)
    }

    /// Definite integral over [a, b].
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let f = self.antideriv();
        f.eval(b) - f.eval(a)
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.c.iter().map(|&ck| s * ck).collect())
    }

    /// The reflected polynomial x -> p(-x).
    pub fn compose_neg(&self) -> Poly {
        let c = self
            .c
            .iter()
            .enumerate()
            .map(|(k, &ck)| if k % 2 == 1 { -ck } else { ck })
            .collect();
        Poly::new(c)
    }

    /// Coefficient split p(x) = x*q(x) + p(0).
    pub fn divide_by_x(&self) -> (Poly, f64) {
        if self.c.is_empty() {
            return (Poly::zero(), 0.0);
        }
        (Poly::new(self.c[1..].to_vec()), self.c[0])
    }

    /// Euclidean division: self = q*d + r with deg r < deg d.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.degree().unwrap();
        let lead = d.c[dd];
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut q = vec![0.0; r.len() - dd];
        for k in (dd..r.len()).rev() {
            let f = r[k] / lead;
            q[k - dd] = f;
            for j in 0..=dd {
                r[k - dd + j] -= f * d.c[j];
            }
        }
        (Poly::new(q), Poly::new(r))
    }

    /// Exact value of the oriented integral of p(s)/s over [a, b].
    ///
    /// Writes p(s) = s*q(s) + p(0); the log term needs 0 outside (a, b)
    /// unless p(0) = 0 exactly.
    pub fn integral_over_s(&self, a: f64, b: f64) -> Result<f64> {
        let (q, c0) = self.divide_by_x();
        let mut v = q.integral(a, b);
        if c0 != 0.0 {
            if a * b <= 0.0 {
                return Err(Error::Domain(format!(
                    "integrand p(s)/s has a pole inside [{a}, {b}] (p(0) = {c0:e})"
                )));
            }
            v += c0 * (b.abs().ln() - a.abs().ln());
        }
        Ok(v)
    }

    /// Largest coefficient magnitude; 0 for the zero polynomial.
    pub fn coeff_scale(&self) -> f64 {
        self.c.iter().fold(0.0, |m, &ck| m.max(ck.abs()))
    }
}

impl std::ops::Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.c.len().max(rhs.c.len());
        let mut c = vec![0.0; n];
        for (k, slot) in c.iter_mut().enumerate() {
            let a = self.c.get(k).copied().unwrap_or(0.0);
            let b = rhs.c.get(k).copied().unwrap_or(0.0);
            *slot = a + b;
        }
        Poly::new(c)
    }
}

impl std::ops::Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.c.len().max(rhs.c.len());
        let mut c = vec![0.0; n];
        for (k, slot) in c.iter_mut().enumerate() {
            let a = self.c.get(k).copied().unwrap_or(0.0);
            let b = rhs.c.get(k).copied().unwrap_or(0.0);
            *slot = a - b;
        }
        Poly::new(c)
    }
}

impl std::ops::Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![0.0; self.c.len() + rhs.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            for (j, &b) in rhs.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }
}
