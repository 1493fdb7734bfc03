//! Truncated Taylor series arithmetic, used to carry exact derivatives
//! through compositions of elementary functions.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Number of stored Taylor coefficients (derivative orders 0..=6).
pub const ORDER: usize = 7;

/// `c[k]` is the k-th Taylor coefficient `f^(k)(x0) / k!`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub c: [f64; ORDER],
}

const FACTORIAL: [f64; ORDER] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0];

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; ORDER];
        c[0] = v;
        Jet { c }
    }

    /// The identity function expanded at `x0`.
    pub fn variable(x0: f64) -> Self {
        let mut c = [0.0; ORDER];
        c[0] = x0;
        c[1] = 1.0;
        Jet { c }
    }

    /// Builds a jet from derivative values `f^(k)(x0)`.
    pub fn from_derivatives(d: &[f64]) -> Self {
        let mut c = [0.0; ORDER];
        for (k, v) in d.iter().take(ORDER).enumerate() {
            c[k] = v / FACTORIAL[k];
        }
        Jet { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn derivative(&self, k: usize) -> f64 {
        self.c[k] * FACTORIAL[k]
    }

    pub fn derivatives(&self) -> [f64; ORDER] {
        let mut d = [0.0; ORDER];
        for k in 0..ORDER {
            d[k] = self.derivative(k);
        }
        d
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut c = self.c;
        c.iter_mut().for_each(|v| *v *= a);
        Jet { c }
    }

    /// Jet of `g(a x)` given the jet of `g` at `a x0`.
    pub fn chain_linear(&self, a: f64) -> Self {
        let mut c = self.c;
        let mut p = 1.0;
        for v in c.iter_mut() {
            *v *= p;
            p *= a;
        }
        Jet { c }
    }

    pub fn recip(&self) -> Self {
        Jet::constant(1.0) / *self
    }

    pub fn exp(&self) -> Self {
        // f' = f u'  =>  k f_k = sum_{j=1..k} j u_j f_{k-j}
        let mut f = [0.0; ORDER];
        f[0] = self.c[0].exp();
        for k in 1..ORDER {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.c[j] * f[k - j];
            }
            f[k] = acc / k as f64;
        }
        Jet { c: f }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut c = self.c;
        for k in 0..ORDER {
            c[k] += o.c[k];
        }
        Jet { c }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        let mut c = self.c;
        for k in 0..ORDER {
            c[k] -= o.c[k];
        }
        Jet { c }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut c = [0.0; ORDER];
        for i in 0..ORDER {
            for j in 0..ORDER - i {
                c[i + j] += self.c[i] * o.c[j];
            }
        }
        Jet { c }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let mut q = [0.0; ORDER];
        for k in 0..ORDER {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc -= o.c[j] * q[k - j];
            }
            q[k] = acc / o.c[0];
        }
        Jet { c: q }
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, a: f64) -> Jet {
        let mut c = self.c;
        c[0] += a;
        Jet { c }
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, a: f64) -> Jet {
        self.scale(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_linear_matches_closed_form() {
        let x = Jet::variable(0.3);
        let e = (x * 2.0).exp();
        for k in 0..ORDER {
            let expected = 2f64.powi(k as i32) * (0.6f64).exp();
            assert!((e.derivative(k) - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn reciprocal_derivatives() {
        // d^k/dx^k (1/x) = (-1)^k k! / x^{k+1}
        let x0 = 1.7;
        let r = Jet::variable(x0).recip();
        for k in 0..ORDER {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let expected = sign * FACTORIAL[k] / x0.powi(k as i32 + 1);
            assert!((r.derivative(k) - expected).abs() < 1e-12 * expected.abs());
        }
    }

    #[test]
    fn product_rule_on_polynomials() {
        let x = Jet::variable(2.0);
        let p = x * x * x; // x^3
        assert_eq!(p.derivative(0), 8.0);
        assert_eq!(p.derivative(1), 12.0);
        assert_eq!(p.derivative(2), 12.0);
        assert_eq!(p.derivative(3), 6.0);
        assert_eq!(p.derivative(4), 0.0);
    }
}
