//! Truncated Taylor-series arithmetic ("jets"). Propagating jets through the
//! closed form of the smooth truncation gives its higher derivatives exactly
//! (up to roundoff), which matters near the band edges where finite
//! differences are hopeless.

/// Taylor coefficients `c[k] = f^{(k)}(a) / k!` of a function at a point,
/// truncated at fixed length.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    c: Vec<f64>,
}

impl Jet {
    pub fn constant(value: f64, len: usize) -> Self {
        assert!(len >= 1);
        let mut c = vec![0.0; len];
        c[0] = value;
        Jet { c }
    }

    /// The identity function `t` developed at `value`.
    pub fn variable(value: f64, len: usize) -> Self {
        let mut jet = Jet::constant(value, len);
        if len >= 2 {
            jet.c[1] = 1.0;
        }
        jet
    }

    /// Jet from raw Taylor coefficients `c[k] = f^{(k)}(a) / k!`.
    pub fn from_taylor(c: Vec<f64>) -> Self {
        assert!(!c.is_empty());
        Jet { c }
    }

    pub fn taylor(&self) -> &[f64] {
        &self.c
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `f^{(k)}(a)` recovered from the Taylor coefficient.
    pub fn derivative(&self, k: usize) -> f64 {
        if k >= self.c.len() {
            return 0.0;
        }
        let mut factorial = 1.0;
        for j in 2..=k {
            factorial *= j as f64;
        }
        self.c[k] * factorial
    }

    pub fn add(&self, other: &Jet) -> Jet {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        assert_eq!(self.len(), other.len());
        Jet {
            c: self.c.iter().zip(&other.c).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> Jet {
        Jet {
            c: self.c.iter().map(|&a| a * factor).collect(),
        }
    }

    /// Cauchy product truncated to the jet length.
    pub fn mul(&self, other: &Jet) -> Jet {
        assert_eq!(self.len(), other.len());
        let n = self.len();
        let mut c = vec![0.0; n];
        for i in 0..n {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..n - i {
                c[i + j] += self.c[i] * other.c[j];
            }
        }
        Jet { c }
    }

    /// Division; requires a nonzero leading coefficient in the divisor.
    pub fn div(&self, other: &Jet) -> Jet {
        assert_eq!(self.len(), other.len());
        assert!(other.c[0] != 0.0, "jet division by a zero-valued jet");
        let n = self.len();
        let mut c = vec![0.0; n];
        for k in 0..n {
            let mut acc = self.c[k];
            for j in 0..k {
                acc -= c[j] * other.c[k - j];
            }
            c[k] = acc / other.c[0];
        }
        Jet { c }
    }

    pub fn recip(&self) -> Jet {
        Jet::constant(1.0, self.len()).div(self)
    }

    /// Composition with `exp` via the standard convolution recurrence.
    pub fn exp(&self) -> Jet {
        let n = self.len();
        let mut c = vec![0.0; n];
        c[0] = self.c[0].exp();
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.c[j] * c[k - j];
            }
            c[k] = acc / k as f64;
        }
        Jet { c }
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exp_derivatives() {
        let x = Jet::variable(0.7, 6);
        let e = x.exp();
        for k in 0..6 {
            assert_abs_diff_eq!(e.derivative(k), 0.7f64.exp(), epsilon = 1e-12);
        }
    }

    #[test]
    fn reciprocal_derivatives() {
        // d^k/dx^k (1/x) = (-1)^k k! / x^{k+1}
        let x = Jet::variable(2.0, 5);
        let r = x.recip();
        let mut factorial = 1.0;
        for k in 0..5 {
            if k > 0 {
                factorial *= k as f64;
            }
            let expected =
                if k % 2 == 0 { 1.0 } else { -1.0 } * factorial / 2.0f64.powi(k as i32 + 1);
            assert_abs_diff_eq!(r.derivative(k), expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn product_rule() {
        let x = Jet::variable(1.3, 5);
        let p = x.mul(&x).mul(&x); // x^3
        assert_abs_diff_eq!(p.derivative(0), 1.3f64.powi(3), epsilon = 1e-12);
        assert_abs_diff_eq!(p.derivative(1), 3.0 * 1.3f64.powi(2), epsilon = 1e-12);
        assert_abs_diff_eq!(p.derivative(2), 6.0 * 1.3, epsilon = 1e-12);
        assert_abs_diff_eq!(p.derivative(3), 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.derivative(4), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bump_factor_matches_finite_differences() {
        // phi(u) = exp(-1/u) on u > 0
        let phi = |u: f64| (-1.0 / u).exp();
        let u0 = 0.6;
        let jet = Jet::variable(u0, 4).recip().scale(-1.0).exp();
        let h = 1e-5;
        let fd1 = (phi(u0 + h) - phi(u0 - h)) / (2.0 * h);
        let fd2 = (phi(u0 + h) - 2.0 * phi(u0) + phi(u0 - h)) / (h * h);
        assert_abs_diff_eq!(jet.derivative(0), phi(u0), epsilon = 1e-14);
        assert_abs_diff_eq!(jet.derivative(1), fd1, epsilon = 1e-6);
        assert_abs_diff_eq!(jet.derivative(2), fd2, epsilon = 1e-4);
    }
}
