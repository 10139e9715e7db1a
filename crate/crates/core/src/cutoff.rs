//! Smooth cutoffs built from the standard e^{-1/t} mollifier: the monotone
//! step used for the χ₀- and χ₁-type cutoffs and the slope-interpolating φ₀.

use crate::quad::gl_integrate;

/// e^{-1/t} for t > 0, else 0, with first two derivatives.
fn moll(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let m = (-1.0 / t).exp();
    let d1 = m / (t * t);
    let d2 = m * (1.0 / t.powi(4) - 2.0 / t.powi(3));
    (m, d1, d2)
}

/// Smooth monotone step: 0 for s ≤ lo, 1 for s ≥ hi, C^∞ in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothStep {
    pub lo: f64,
    pub hi: f64,
}

impl SmoothStep {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(hi > lo);
        SmoothStep { lo, hi }
    }

    fn unit(t: f64) -> (f64, f64, f64) {
        if t <= 0.0 {
            return (0.0, 0.0, 0.0);
        }
        if t >= 1.0 {
            return (1.0, 0.0, 0.0);
        }
        let (a, a1, a2) = moll(t);
        let (b, bm1, bm2) = moll(1.0 - t);
        // b(t) = moll(1-t): b' = -bm1, b'' = bm2.
        let s = a + b;
        let v = a / s;
        // v' = (a'b - ab')/s² with b' = -bm1.
        let num = a1 * b + a * bm1;
        let d1 = num / (s * s);
        // v'' = (a''b - ab'')/s² - 2·num·(a'+b')/s³.
        let d2 = (a2 * b - a * bm2) / (s * s) - 2.0 * num * (a1 - bm1) / (s * s * s);
        (v, d1, d2)
    }

    pub fn value(&self, s: f64) -> f64 {
        Self::unit((s - self.lo) / (self.hi - self.lo)).0
    }

    pub fn d1(&self, s: f64) -> f64 {
        let w = self.hi - self.lo;
        Self::unit((s - self.lo) / w).1 / w
    }

    pub fn d2(&self, s: f64) -> f64 {
        let w = self.hi - self.lo;
        Self::unit((s - self.lo) / w).2 / (w * w)
    }

    /// ∫_{lo}^{s} of the step (0 below lo). Uses step(t)+step(1-t)=1, so the
    /// full rise integrates to w/2 exactly.
    pub fn integral(&self, s: f64) -> f64 {
        let w = self.hi - self.lo;
        let t = (s - self.lo) / w;
        if t <= 0.0 {
            0.0
        } else if t >= 1.0 {
            w * (0.5 + (t - 1.0))
        } else {
            w * gl_integrate(&|u| Self::unit(u).0, 0.0, t, 32)
        }
    }
}

/// χ₀ of the distortion construction: 0 for s ≤ 0, 1 for s ≥ ln 2.
pub fn chi0_profile() -> SmoothStep {
    SmoothStep::new(0.0, std::f64::consts::LN_2)
}

/// χ₁-type glue profile: 1 on (−∞, −1], 0 on ℝ₊, realized as 1 − step.
/// `lo`/`hi` select the fall interval inside [−1, 0]; alternative intervals
/// give the independent construction used for cross-checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlueCutoff {
    step: SmoothStep,
}

impl GlueCutoff {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(-1.0 <= lo && lo < hi && hi <= 0.0);
        GlueCutoff {
            step: SmoothStep::new(lo, hi),
        }
    }

    pub fn default_profile() -> Self {
        GlueCutoff::new(-1.0, 0.0)
    }

    /// A deliberately different admissible profile (same support constraints).
    pub fn alternative_profile() -> Self {
        GlueCutoff::new(-0.85, -0.1)
    }

    pub fn value(&self, s: f64) -> f64 {
        1.0 - self.step.value(s)
    }
}

/// φ₀: equals 2s for s ≤ −ε₀ and s for s ≥ ε₀, with slope in [1, 2].
#[derive(Debug, Clone, Copy)]
pub struct Phi0 {
    pub eps0: f64,
    step: SmoothStep,
}

impl Phi0 {
    /// ε₀ = 1 − ln 2 per the profile construction.
    pub fn standard() -> Self {
        let eps0 = 1.0 - std::f64::consts::LN_2;
        Phi0 {
            eps0,
            step: SmoothStep::new(-eps0, eps0),
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        if s <= -self.eps0 {
            2.0 * s
        } else {
            // φ₀(−ε₀) = −2ε₀ plus the integral of φ₀' = 2 − step.
            -2.0 * self.eps0 + 2.0 * (s + self.eps0) - self.step.integral(s)
        }
    }

    pub fn d1(&self, s: f64) -> f64 {
        2.0 - self.step.value(s)
    }

    pub fn d2(&self, s: f64) -> f64 {
        -self.step.d1(s)
    }
}
