//! Radial distortion profile b and the complex deformation Φ_θ(x) = x + iθA(x).
//!
//! The profile comes from a scale-λ construction: G = χ₀(r−R₀)(1−χ₀(r−ln λ))eʳ
//! + 2λχ₀(r−ln λ), g = ∫₀ʳ G, and f_λ = g up to ln 2λ, continued by
//! λφ₀(r−r_λ) + α_λ so that f_λ(r) = λr beyond 2 ln λ. With λ = h^{−n₁} and
//! b = f_λ/λ, the deformation is the identity inside |x| ≤ R₀ and the full
//! dilation x ↦ (1+iθ)x outside |x| ≥ 2n₁ ln(1/h).

use crate::cutoff::{chi0_profile, Phi0, SmoothStep};
use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use ndarray::{Array1, Array2};
use ndarray_linalg::Solve;
use num_complex::Complex64 as C64;

/// ε₀ = 1 − ln 2, the slack in the r_λ bracket.
pub const EPS0: f64 = 1.0 - std::f64::consts::LN_2;

/// The piecewise profile f_λ (and its h-normalized form b = f_λ/λ).
#[derive(Debug, Clone)]
pub struct DistortionProfile {
    /// Inner radius: b ≡ 0 on [0, R₀].
    pub r0: f64,
    /// Scale λ = h^{−n₁}.
    pub lambda: f64,
    /// Exponent n₁ when built from h (None when λ was given directly).
    pub n1: Option<f64>,
    /// α_λ = 2λ ln 2λ − g(ln 2λ); f_λ = 2λr − α_λ on [ln 2λ, r_λ + …].
    pub alpha_lambda: f64,
    /// Solution of g(r_λ) = λ r_λ, inside [2 ln λ − 1, 2 ln λ − ε₀].
    pub r_lambda: f64,
    chi0: SmoothStep,
    phi0: Phi0,
    /// Region breakpoints 0, R₀, R₀+ln 2, ln λ, ln 2λ with cached g values.
    breaks: [f64; 5],
    g_at_breaks: [f64; 5],
}

/// Profile from the scale directly; `from_h` is the h-parametrized wrapper.
pub fn build_f_lambda(lambda: f64, r0: f64) -> Result<DistortionProfile> {
    if r0 < 1.0 {
        return Err(Error::Precondition(format!("R₀ = {r0} must be ≥ 1")));
    }
    let ln2 = std::f64::consts::LN_2;
    if !(lambda > 1.0) || lambda.ln() < r0 + ln2 {
        return Err(Error::Construction(format!(
            "λ = {lambda} too small: need ln λ ≥ R₀ + ln 2 = {}",
            r0 + ln2
        )));
    }
    let chi0 = chi0_profile();
    let big_g = |r: f64| -> f64 {
        chi0.value(r - r0) * (1.0 - chi0.value(r - lambda.ln())) * r.exp()
            + 2.0 * lambda * chi0.value(r - lambda.ln())
    };
    let breaks = [0.0, r0, r0 + ln2, lambda.ln(), (2.0 * lambda).ln()];
    let mut g_at_breaks = [0.0; 5];
    for i in 1..5 {
        let (a, b) = (breaks[i - 1], breaks[i]);
        let piece = if i == 1 {
            0.0 // G ≡ 0 below R₀
        } else if i == 3 {
            b.exp() - a.exp() // G = eʳ exactly on [R₀+ln 2, ln λ]
        } else {
            // tolerance scales with the integrand size (G = O(λ))
            adaptive_simpson(&big_g, a, b, 1e-13 * (1.0 + lambda))
        };
        g_at_breaks[i] = g_at_breaks[i - 1] + piece;
    }
    let alpha_lambda = 2.0 * lambda * (2.0 * lambda).ln() - g_at_breaks[4];

    let mut p = DistortionProfile {
        r0,
        lambda,
        n1: None,
        alpha_lambda,
        r_lambda: 0.0,
        chi0,
        phi0: Phi0::standard(),
        breaks,
        g_at_breaks,
    };

    // r_λ from g(r_λ) = λ r_λ, bracketed in [2 ln λ − 1, 2 ln λ − ε₀].
    let (mut lo, mut hi) = (2.0 * lambda.ln() - 1.0, 2.0 * lambda.ln() - EPS0);
    let psi = |p: &DistortionProfile, r: f64| p.g(r) - lambda * r;
    if psi(&p, lo) > 0.0 || psi(&p, hi) < 0.0 {
        return Err(Error::Construction(format!(
            "λ = {lambda}, R₀ = {r0}: r_λ escapes the bracket [2 ln λ − 1, 2 ln λ − ε₀]"
        )));
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if psi(&p, mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    p.r_lambda = 0.5 * (lo + hi);
    Ok(p)
}

impl DistortionProfile {
    /// λ = h^{−n₁}; b(r) = r for r ≥ 2n₁ ln(1/h).
    pub fn from_h(h: f64, n1: f64, r0: f64) -> Result<DistortionProfile> {
        if !(h > 0.0 && h < 1.0) || n1 <= 0.0 {
            return Err(Error::Precondition(format!(
                "need 0 < h < 1 and n₁ > 0, got h = {h}, n₁ = {n1}"
            )));
        }
        let mut p = build_f_lambda(h.powf(-n1), r0)?;
        p.n1 = Some(n1);
        Ok(p)
    }

    fn big_g(&self, r: f64) -> f64 {
        let ll = self.lambda.ln();
        self.chi0.value(r - self.r0) * (1.0 - self.chi0.value(r - ll)) * r.exp()
            + 2.0 * self.lambda * self.chi0.value(r - ll)
    }

    fn big_g_d1(&self, r: f64) -> f64 {
        let ll = self.lambda.ln();
        let c = self.chi0.value(r - self.r0);
        let c1 = self.chi0.d1(r - self.r0);
        let d = self.chi0.value(r - ll);
        let d1 = self.chi0.d1(r - ll);
        (c1 * (1.0 - d) + c * (1.0 - d) - c * d1) * r.exp() + 2.0 * self.lambda * d1
    }

    /// g(r) = ∫₀ʳ G from the cached region table.
    fn g(&self, r: f64) -> f64 {
        if r <= self.breaks[1] {
            return 0.0;
        }
        if r >= self.breaks[4] {
            return 2.0 * self.lambda * r - self.alpha_lambda;
        }
        let i = self.breaks.iter().rposition(|&b| b <= r).unwrap();
        let base = self.g_at_breaks[i];
        if i == 2 {
            base + r.exp() - self.breaks[2].exp()
        } else {
            base + adaptive_simpson(
                &|s| self.big_g(s),
                self.breaks[i],
                r,
                1e-13 * (1.0 + self.lambda),
            )
        }
    }

    pub fn f(&self, r: f64) -> f64 {
        if r <= self.breaks[4] {
            self.g(r)
        } else {
            self.lambda * self.phi0.value(r - self.r_lambda) + self.alpha_lambda
        }
    }

    pub fn f_d1(&self, r: f64) -> f64 {
        if r <= self.breaks[4] {
            self.big_g(r)
        } else {
            self.lambda * self.phi0.d1(r - self.r_lambda)
        }
    }

    pub fn f_d2(&self, r: f64) -> f64 {
        if r <= self.breaks[4] {
            self.big_g_d1(r)
        } else {
            self.lambda * self.phi0.d2(r - self.r_lambda)
        }
    }

    /// b = f_λ/λ and derivatives.
    pub fn b(&self, r: f64) -> f64 {
        self.f(r) / self.lambda
    }

    pub fn b_d1(&self, r: f64) -> f64 {
        self.f_d1(r) / self.lambda
    }

    pub fn b_d2(&self, r: f64) -> f64 {
        self.f_d2(r) / self.lambda
    }

    /// a(r) = b(r)/r (zero at r = 0; b vanishes on [0, R₀] and R₀ ≥ 1).
    pub fn a(&self, r: f64) -> f64 {
        if r == 0.0 {
            0.0
        } else {
            self.b(r) / r
        }
    }

    /// Radius beyond which b(r) = r: 2 ln λ.
    pub fn linear_from(&self) -> f64 {
        2.0 * self.lambda.ln()
    }

    /// α_λ bracket of the construction: 2λ ln 2λ − (1+2 ln 2)λ ≤ α_λ ≤
    /// 2λ ln 2λ − 2λ + 2e^{R₀}.
    pub fn alpha_bracket_holds(&self) -> bool {
        let l = self.lambda;
        let t = 2.0 * l * (2.0 * l).ln();
        let lo = t - (1.0 + 2.0 * std::f64::consts::LN_2) * l;
        let hi = t - 2.0 * l + 2.0 * self.r0.exp();
        lo <= self.alpha_lambda && self.alpha_lambda <= hi
    }

    /// CSV dump r, b, b′, b″ on a uniform grid up to r_max.
    pub fn csv(&self, r_max: f64, n: usize) -> String {
        let mut out = String::from("r,b,b_prime,b_second\n");
        for i in 0..=n {
            let r = r_max * i as f64 / n as f64;
            out.push_str(&format!(
                "{},{},{},{}\n",
                r,
                self.b(r),
                self.b_d1(r),
                self.b_d2(r)
            ));
        }
        out
    }
}

/// Dense-grid margins for the five profile conditions. Margins are "amount
/// by which the inequality holds"; negative means violated.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ProfileReport {
    /// sup |f| on [0, R₀] (support condition; should be 0).
    pub support_defect: f64,
    /// sup |f(r) − λr| on [2 ln λ, r_max] (eventual linearity; should be 0).
    pub linearity_defect: f64,
    /// min over the grid of min(b, r b′ − b, 2r − r b′): the scale-free form
    /// of 0 ≤ f ≤ r f′ ≤ 2λr (raw f-units would drown in λ·ε rounding).
    pub chain_margin: f64,
    /// Fitted constant sup (f′ + |f″|)/(1 + f).
    pub c_growth: f64,
    /// Fitted constant sup_k≤4 sup |f^{(k)}|/λ (3rd/4th by finite differences).
    pub c_deriv: f64,
    pub alpha_bracket_ok: bool,
    /// Relative value/slope jumps at the matching point ln 2λ.
    pub match_value_jump: f64,
    pub match_slope_jump: f64,
}

/// Evaluate all Lemma-style profile conditions on an n-point grid over
/// [0, r_max]; r_max defaults past the linear onset.
pub fn check_profile(p: &DistortionProfile, n: usize) -> ProfileReport {
    let r_max = p.linear_from() + 5.0;
    let l = p.lambda;
    let mut support_defect: f64 = 0.0;
    let mut linearity_defect: f64 = 0.0;
    let mut chain_margin = f64::INFINITY;
    let mut c_growth: f64 = 0.0;
    let mut c_deriv: f64 = 0.0;
    let eps = 1e-4;
    for i in 0..=n {
        let r = r_max * i as f64 / n as f64;
        let (f, f1, f2) = (p.f(r), p.f_d1(r), p.f_d2(r));
        if r <= p.r0 {
            support_defect = support_defect.max(f.abs());
        }
        if r >= p.linear_from() {
            linearity_defect = linearity_defect.max((f - l * r).abs());
        }
        let (b, b1) = (f / l, f1 / l);
        chain_margin = chain_margin.min(b).min(r * b1 - b).min(2.0 * r - r * b1);
        c_growth = c_growth.max((f1 + f2.abs()) / (1.0 + f));
        let f3 = (p.f_d2(r + eps) - p.f_d2(r - eps.min(r))) / (eps + eps.min(r));
        let f4 = (p.f_d2(r + eps) - 2.0 * f2 + p.f_d2((r - eps).max(0.0)))
            / (eps * eps);
        c_deriv = c_deriv
            .max(f1.abs() / l)
            .max(f2.abs() / l)
            .max(f3.abs() / l)
            .max(f4.abs() / l);
    }
    let m = p.breaks[4];
    let left = (p.g(m), p.big_g(m));
    let right = (
        l * p.phi0.value(m - p.r_lambda) + p.alpha_lambda,
        l * p.phi0.d1(m - p.r_lambda),
    );
    ProfileReport {
        support_defect,
        linearity_defect,
        chain_margin,
        c_growth,
        c_deriv,
        alpha_bracket_ok: p.alpha_bracket_holds(),
        match_value_jump: (left.0 - right.0).abs() / left.0.abs().max(1.0),
        match_slope_jump: (left.1 - right.1).abs() / left.1.abs().max(1.0),
    }
}

/// The deformation Φ_θ(x) = x + iθa(|x|)x with its Jacobian I + iθF.
#[derive(Debug, Clone)]
pub struct DistortionMap {
    pub profile: DistortionProfile,
    pub theta: f64,
}

impl DistortionMap {
    pub fn new(profile: DistortionProfile, theta: f64) -> Result<DistortionMap> {
        if !(theta > 0.0 && theta <= 0.5) {
            return Err(Error::Precondition(format!(
                "θ = {theta} outside the admissible range (0, 0.5]"
            )));
        }
        Ok(DistortionMap { profile, theta })
    }

    /// 1D deformation: x + iθ b(|x|) sgn x.
    pub fn phi(&self, x: f64) -> C64 {
        C64::new(x, self.theta * self.profile.b(x.abs()) * x.signum())
    }

    /// 1D Jacobian φ′(x) = 1 + iθ b′(|x|).
    pub fn phi_d1(&self, x: f64) -> C64 {
        C64::new(1.0, self.theta * self.profile.b_d1(x.abs()))
    }

    /// φ″(x) = iθ b″(|x|) sgn x.
    pub fn phi_d2(&self, x: f64) -> C64 {
        C64::new(0.0, self.theta * self.profile.b_d2(x.abs()) * x.signum())
    }

    /// F(x) = b′(|x|)π_x + a(|x|)(I − π_x) in n dimensions.
    pub fn f_matrix(&self, x: &[f64]) -> Array2<f64> {
        let n = x.len();
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut m = Array2::zeros((n, n));
        if r == 0.0 {
            return m;
        }
        let b1 = self.profile.b_d1(r);
        let a = self.profile.a(r);
        for i in 0..n {
            for j in 0..n {
                let pij = x[i] * x[j] / (r * r);
                m[[i, j]] = b1 * pij + a * (if i == j { 1.0 } else { 0.0 } - pij);
            }
        }
        m
    }

    /// Complex Jacobian ᵗdΦ_θ(x) = I + iθF(x).
    pub fn jacobian(&self, x: &[f64]) -> Array2<C64> {
        let f = self.f_matrix(x);
        let n = x.len();
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                m[[i, j]] = C64::new(if i == j { 1.0 } else { 0.0 }, self.theta * f[[i, j]]);
            }
        }
        m
    }

    /// Im[(ᵗdΦ_θ)^{-1}ξ]² by direct complex solve (the bilinear square Σwⱼ²).
    pub fn im_pulled_back_square(&self, x: &[f64], xi: &[f64]) -> Result<f64> {
        let m = self.jacobian(x);
        let rhs: Array1<C64> = xi.iter().map(|&v| C64::new(v, 0.0)).collect();
        let w = m.solve(&rhs)?;
        Ok(w.iter().map(|c| c * c).sum::<C64>().im)
    }

    /// Closed-form oracle for the same quantity: −2θ F(1+θ²F²)^{-2}ξ·ξ.
    pub fn im_square_closed_form(&self, x: &[f64], xi: &[f64]) -> Result<f64> {
        let f = self.f_matrix(x);
        let n = xi.len();
        let t = self.theta;
        let f2 = f.dot(&f);
        let mut s = Array2::<f64>::eye(n);
        s.scaled_add(t * t, &f2);
        let s2 = s.dot(&s);
        let xiv: Array1<f64> = Array1::from(xi.to_vec());
        let y = s2.solve(&xiv)?;
        Ok(-2.0 * t * f.dot(&y).dot(&xiv))
    }
}

/// Worst-case margin max over samples of Im[(ᵗdΦ_θ)^{-1}ξ]² + θa(|x|)|ξ|²;
/// the bound requires it ≤ 0 up to rounding.
pub fn jacobian_inequality_check(
    map: &DistortionMap,
    samples: &[(Vec<f64>, Vec<f64>)],
) -> Result<f64> {
    if map.theta > 0.1 {
        return Err(Error::Precondition(format!(
            "θ = {} above the smallness threshold 0.1 for the Jacobian bound",
            map.theta
        )));
    }
    let mut worst = f64::NEG_INFINITY;
    for (x, xi) in samples {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let xi2: f64 = xi.iter().map(|v| v * v).sum();
        let lhs = if r <= map.profile.r0 {
            // undistorted region: Φ = id exactly
            0.0
        } else {
            map.im_pulled_back_square(x, xi)?
        };
        worst = worst.max(lhs + map.theta * map.profile.a(r) * xi2);
    }
    Ok(worst)
}
