//! Builtin smooth decaying potentials with exact derivatives of every order
//! (through jet arithmetic) and, where the potential is entire, a closed-form
//! analytic continuation used as an oracle.

use crate::error::{Error, Result};
use crate::jet::Jet;
use num_complex::Complex64;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    /// amp·e^{−(x/width)²}
    GaussianBarrier { amp: f64, width: f64 },
    /// amp·e^{1−1/(1−(x/width)²)} on |x| < width, 0 outside
    Bump { amp: f64, width: f64 },
    /// λ₀(1+x²)e^{−x²/2}: nondegenerate well at 0 inside an island
    WellInIsland { lambda0: f64 },
    /// amp·sech²(x/width)
    Sech2 { amp: f64, width: f64 },
    Free,
}

/// A named smooth potential with decay exponent ν and derivative evaluators.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    /// Declared polynomial decay exponent ν > 0 (all builtins decay faster).
    pub nu: f64,
    /// Maximum derivative order served by `deriv`.
    pub k_max: usize,
    kind: Kind,
}

impl Potential {
    pub fn builtin(name: &str, params: &BTreeMap<String, f64>) -> Result<Potential> {
        let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
        let kind = match name {
            "gaussian_barrier" => Kind::GaussianBarrier {
                amp: get("amp", 0.8),
                width: get("width", 1.0),
            },
            "bump" => Kind::Bump {
                amp: get("amp", 1.0),
                width: get("width", 2.0),
            },
            "well_in_island" => Kind::WellInIsland {
                lambda0: get("lambda0", 1.0),
            },
            "sech2" => Kind::Sech2 {
                amp: get("amp", 0.5),
                width: get("width", 1.0),
            },
            "free" => Kind::Free,
            other => {
                return Err(Error::Config(format!("unknown builtin potential `{other}`")));
            }
        };
        Ok(Potential {
            name: name.to_string(),
            params: params.clone(),
            nu: get("nu", 2.0),
            k_max: get("k_max", 24.0) as usize,
            kind: kind.validated()?,
        })
    }

    pub fn gaussian_barrier(amp: f64, width: f64) -> Potential {
        let mut p = BTreeMap::new();
        p.insert("amp".into(), amp);
        p.insert("width".into(), width);
        Potential::builtin("gaussian_barrier", &p).unwrap()
    }

    pub fn bump(amp: f64, width: f64) -> Potential {
        let mut p = BTreeMap::new();
        p.insert("amp".into(), amp);
        p.insert("width".into(), width);
        Potential::builtin("bump", &p).unwrap()
    }

    pub fn well_in_island(lambda0: f64) -> Potential {
        let mut p = BTreeMap::new();
        p.insert("lambda0".into(), lambda0);
        Potential::builtin("well_in_island", &p).unwrap()
    }

    pub fn sech2(amp: f64, width: f64) -> Potential {
        let mut p = BTreeMap::new();
        p.insert("amp".into(), amp);
        p.insert("width".into(), width);
        Potential::builtin("sech2", &p).unwrap()
    }

    pub fn free() -> Potential {
        Potential::builtin("free", &BTreeMap::new()).unwrap()
    }

    /// Taylor jet of V at x to the given order (exact coefficients).
    pub fn jet(&self, x: f64, order: usize) -> Jet {
        match &self.kind {
            Kind::GaussianBarrier { amp, width } => Jet::variable(x / width, order)
                .square()
                .scale(-1.0)
                .exp()
                .scale(*amp),
            Kind::Bump { amp, width } => {
                let t = x / width;
                if 1.0 - t * t < 1e-12 {
                    return Jet::constant(0.0, order);
                }
                let tj = Jet::variable(t, order);
                let den = tj.square().scale(-1.0).add_scalar(1.0);
                den.recip().scale(-1.0).add_scalar(1.0).exp().scale(*amp)
            }
            Kind::WellInIsland { lambda0 } => {
                let xj = Jet::variable(x, order);
                let x2 = xj.square();
                x2.add_scalar(1.0)
                    .mul(&x2.scale(-0.5).exp())
                    .scale(*lambda0)
            }
            Kind::Sech2 { amp, width } => Jet::variable(x / width, order).sech2().scale(*amp),
            Kind::Free => Jet::constant(0.0, order),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.jet(x, 0).c[0]
    }

    fn arg_scale(&self) -> f64 {
        // jets expand in the scaled variable t = x/width; derivatives in x
        // pick up a 1/width per order.
        match &self.kind {
            Kind::GaussianBarrier { width, .. }
            | Kind::Bump { width, .. }
            | Kind::Sech2 { width, .. } => *width,
            _ => 1.0,
        }
    }

    /// k-th derivative of V at x.
    pub fn deriv(&self, k: usize, x: f64) -> Result<f64> {
        if k > self.k_max {
            return Err(Error::UnsupportedOrder {
                requested: k,
                available: self.k_max,
            });
        }
        Ok(self.jet(x, k).deriv(k) / self.arg_scale().powi(k as i32))
    }

    /// V^{(k)}(x) for k = 0..=n from a single jet evaluation.
    pub fn derivs_upto(&self, x: f64, n: usize) -> Result<Vec<f64>> {
        if n > self.k_max {
            return Err(Error::UnsupportedOrder {
                requested: n,
                available: self.k_max,
            });
        }
        let j = self.jet(x, n);
        let w = self.arg_scale();
        Ok((0..=n).map(|k| j.deriv(k) / w.powi(k as i32)).collect())
    }

    /// Closed-form analytic continuation for entire builtins; None when the
    /// potential is not entire (bump).
    pub fn eval_complex(&self, z: Complex64) -> Option<Complex64> {
        match &self.kind {
            Kind::GaussianBarrier { amp, width } => {
                let t = z / *width;
                Some(*amp * (-t * t).exp())
            }
            Kind::WellInIsland { lambda0 } => {
                Some(*lambda0 * (1.0 + z * z) * (-z * z / 2.0).exp())
            }
            Kind::Sech2 { amp, width } => {
                let t = z / *width;
                let c = t.cosh();
                Some(*amp / (c * c))
            }
            Kind::Free => Some(Complex64::new(0.0, 0.0)),
            Kind::Bump { .. } => None,
        }
    }

    /// Sampled sup of |V^{(k)}| over [-range, range].
    pub fn sup_deriv(&self, k: usize, range: f64, n: usize) -> f64 {
        let w = self.arg_scale().powi(k as i32);
        let mut sup: f64 = 0.0;
        for i in 0..=n {
            let x = -range + 2.0 * range * i as f64 / n as f64;
            sup = sup.max((self.jet(x, k).deriv(k) / w).abs());
        }
        sup
    }
}

impl Kind {
    fn validated(self) -> Result<Kind> {
        let ok = match &self {
            Kind::GaussianBarrier { width, .. }
            | Kind::Bump { width, .. }
            | Kind::Sech2 { width, .. } => *width > 0.0,
            Kind::WellInIsland { lambda0 } => *lambda0 > 0.0,
            Kind::Free => true,
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::Config("potential parameters out of range".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::linear_fit;

    #[test]
    fn gaussian_value_and_derivs() {
        let v = Potential::gaussian_barrier(0.8, 1.0);
        assert!((v.eval(0.0) - 0.8).abs() < 1e-15);
        // V' = -2x·V
        let x = 0.6;
        assert!((v.deriv(1, x).unwrap() + 2.0 * x * v.eval(x)).abs() < 1e-13);
        // complex eval agrees on the real line
        let c = v.eval_complex(Complex64::new(x, 0.0)).unwrap();
        assert!((c.re - v.eval(x)).abs() < 1e-15 && c.im == 0.0);
    }

    #[test]
    fn scaled_width_chain_rule() {
        let v = Potential::sech2(0.5, 2.0);
        let x = 0.9;
        let eps = 1e-5;
        let fd = (v.eval(x + eps) - v.eval(x - eps)) / (2.0 * eps);
        assert!((v.deriv(1, x).unwrap() - fd).abs() < 1e-9);
    }

    #[test]
    fn bump_support_and_smoothness() {
        let v = Potential::bump(1.0, 2.0);
        assert_eq!(v.eval(2.0), 0.0);
        assert_eq!(v.eval(2.5), 0.0);
        assert!((v.eval(0.0) - 1.0).abs() < 1e-15);
        // derivatives vanish at the support edge
        for k in 0..6 {
            assert!(v.deriv(k, 1.99999).unwrap().abs() < 1e-3, "k={k}");
        }
    }

    #[test]
    fn deriv_order_guard() {
        let v = Potential::free();
        assert!(v.deriv(30, 1.0).is_err());
    }

    #[test]
    fn decay_invariant_loglog() {
        // |V^{(k)}(x)| ≤ C⟨x⟩^{-ν-k}: fit slope of log|V'| vs log⟨x⟩ for the
        // Gaussian tail; must fall at least as fast as ⟨x⟩^{-ν-1}.
        let v = Potential::gaussian_barrier(0.8, 1.0);
        let xs: Vec<f64> = (0..8).map(|i| 2.0 + 0.5 * i as f64).collect();
        let lx: Vec<f64> = xs.iter().map(|x| (1.0 + x * x).sqrt().ln()).collect();
        let ly: Vec<f64> = xs
            .iter()
            .map(|x| v.deriv(1, *x).unwrap().abs().max(1e-280).ln())
            .collect();
        let (slope, _, _) = linear_fit(&lx, &ly);
        assert!(slope <= -(v.nu + 1.0), "slope {slope}");
    }

    #[test]
    fn well_in_island_shape() {
        let v = Potential::well_in_island(1.0);
        assert!((v.eval(0.0) - 1.0).abs() < 1e-15);
        // V > λ0 on the punctured island, barrier top at |x| = 1
        assert!(v.eval(0.5) > 1.0);
        assert!(v.eval(1.0) > v.eval(0.5));
        assert!((v.deriv(1, 1.0).unwrap()).abs() < 1e-13);
        // V(x_b) = λ0 again near x ≈ 1.585
        let f = |x: f64| v.eval(x) - 1.0;
        assert!(f(1.5) > 0.0 && f(1.7) < 0.0);
        // hessian at the bottom: V''(0) = λ0
        assert!((v.deriv(2, 0.0).unwrap() - 1.0).abs() < 1e-13);
    }
}
