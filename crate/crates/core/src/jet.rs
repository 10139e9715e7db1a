//! Truncated Taylor-series arithmetic ("jets") used to evaluate exact
//! derivatives of the builtin potentials to arbitrary order.

/// Taylor coefficients c[k] = f^{(k)}(x0)/k! of a function expanded at some
/// base point, truncated at a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub c: Vec<f64>,
}

impl Jet {
    pub fn constant(v: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = v;
        Jet { c }
    }

    /// The identity function expanded at x0.
    pub fn variable(x0: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = x0;
        if order >= 1 {
            c[1] = 1.0;
        }
        Jet { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn deriv(&self, k: usize) -> f64 {
        let mut fact = 1.0;
        for i in 2..=k {
            fact *= i as f64;
        }
        self.c[k] * fact
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            c: self.c.iter().map(|a| a * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut c = self.c.clone();
        c[0] += s;
        Jet { c }
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let n = self.order();
        let mut c = vec![0.0; n + 1];
        for k in 0..=n {
            let mut acc = 0.0;
            for j in 0..=k {
                acc += self.c[j] * o.c[k - j];
            }
            c[k] = acc;
        }
        Jet { c }
    }

    pub fn square(&self) -> Jet {
        self.mul(self)
    }

    pub fn recip(&self) -> Jet {
        let n = self.order();
        assert!(self.c[0] != 0.0, "reciprocal of jet with zero value");
        let mut c = vec![0.0; n + 1];
        c[0] = 1.0 / self.c[0];
        for k in 1..=n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += self.c[j] * c[k - j];
            }
            c[k] = -acc / self.c[0];
        }
        Jet { c }
    }

    pub fn div(&self, o: &Jet) -> Jet {
        self.mul(&o.recip())
    }

    pub fn exp(&self) -> Jet {
        let n = self.order();
        let mut c = vec![0.0; n + 1];
        c[0] = self.c[0].exp();
        for k in 1..=n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.c[j] * c[k - j];
            }
            c[k] = acc / k as f64;
        }
        Jet { c }
    }

    /// sech²(u) = 4e^{2u}/(e^{2u}+1)² computed through exp/recip.
    pub fn sech2(&self) -> Jet {
        // 4e^{∓2x}/(1+e^{∓2x})² with the decaying exponential picked by the
        // sign of x, so large |x| underflows to 0 instead of inf/inf = NaN
        let sign = if self.c[0] >= 0.0 { -2.0 } else { 2.0 };
        let e2 = self.scale(sign).exp();
        let den = e2.add_scalar(1.0).square();
        e2.scale(4.0).div(&den)
    }
}
