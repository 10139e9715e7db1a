//! |x|-analytic (μ, ν̃)-approximations of smooth decaying potentials.
//!
//! The construction: take the truncated almost-analytic extension Ṽ of V,
//! pass to log-radial coordinates s = ln r, and recover a surrogate that is
//! holomorphic in the sector |Im s| < 2μ from the Cauchy-type contour integral
//!
//!   V^μ₁(s,ω) = (e^{−ν̃s}/2iπ) ∫_γ e^{ν̃s′} Ṽ₁(s′,ω)/(s−s′) ds′,
//!
//! γ running along Im s′ = +2μ from +∞ to −2μ, down the segment
//! Re s′ = −2μ, and back out along Im s′ = −2μ. Near the origin the surrogate
//! is glued back to Ṽ₁ with a cutoff in s/μ, so V^μ = V exactly for
//! |x| ≤ e^{−μ}.

use crate::cutoff::GlueCutoff;
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::quad::gauss_legendre;
use num_complex::Complex64 as C64;

/// Truncated almost-analytic extension with resummation cutoffs:
/// Ṽ(x) = Σ_{k≤N} (i Im x)^k V^{(k)}(Re x)/k! · ψ(λ_k |Im x|),
/// where ψ = 1 on [0,1], 0 on [2,∞) and λ_k = (sup|V^{(k)}|/k!)^{1/k}. The
/// cutoffs keep each term bounded where the derivatives grow Gevrey-fast
/// (e.g. near the support edge of a bump); without them the truncated series
/// is useless off the real line wherever λ_k·|Im x| ≳ 1.
#[derive(Debug, Clone)]
pub struct AlmostAnalytic {
    pub source: Potential,
    pub order: usize,
    /// λ_k for k = 1..=order (index 0 ↔ k = 1).
    pub lambdas: Vec<f64>,
    /// Use the closed-form continuation of an entire potential as Ṽ instead
    /// of the truncated series (∂̄ ≡ 0, so the contour reproduces V exactly
    /// up to quadrature; only available when the potential is entire).
    pub analytic: bool,
}

/// Sampled sup of |V^{(k)}| with local refinement around the coarse argmax.
fn refined_sup_deriv(v: &Potential, k: usize) -> f64 {
    let span = 25.0;
    let n = 4000;
    let mut best_x = 0.0;
    let mut best: f64 = 0.0;
    for i in 0..=n {
        let x = -span + 2.0 * span * i as f64 / n as f64;
        let d = v.deriv(k, x).expect("k within k_max").abs();
        if d > best {
            best = d;
            best_x = x;
        }
    }
    let mut half = 2.0 * span / n as f64;
    for _ in 0..4 {
        let (lo, hi) = (best_x - half, best_x + half);
        for i in 0..=400 {
            let x = lo + (hi - lo) * i as f64 / 400.0;
            let d = v.deriv(k, x).expect("k within k_max").abs();
            if d > best {
                best = d;
                best_x = x;
            }
        }
        half /= 50.0;
    }
    best
}

/// Build the truncated, cutoff-resummed extension; exact on the real line.
pub fn almost_analytic_extend(v: &Potential, order: usize) -> Result<AlmostAnalytic> {
    if order + 1 > v.k_max {
        // the ∂̄-defect evaluator needs one extra derivative
        return Err(Error::UnsupportedOrder {
            requested: order + 1,
            available: v.k_max,
        });
    }
    let mut lambdas = Vec::with_capacity(order);
    let mut fact = 1.0;
    for k in 1..=order {
        fact *= k as f64;
        let sup = refined_sup_deriv(v, k);
        lambdas.push((sup / fact).powf(1.0 / k as f64).max(1.0));
    }
    Ok(AlmostAnalytic {
        source: v.clone(),
        order,
        lambdas,
        analytic: false,
    })
}

fn psi(t: f64) -> f64 {
    1.0 - crate::cutoff::SmoothStep::new(1.0, 2.0).value(t)
}

impl AlmostAnalytic {
    pub fn eval_c(&self, x: C64) -> C64 {
        if self.analytic {
            if let Some(v) = self.source.eval_complex(x) {
                return v;
            }
        }
        let derivs = self
            .source
            .derivs_upto(x.re, self.order)
            .expect("order checked at construction");
        let iy = C64::new(0.0, x.im);
        let ay = x.im.abs();
        let mut term = C64::new(1.0, 0.0);
        let mut acc = C64::new(derivs[0], 0.0);
        let mut fact = 1.0;
        for (k, d) in derivs.iter().enumerate().skip(1) {
            term *= iy;
            fact *= k as f64;
            let cut = psi(self.lambdas[k - 1] * ay);
            if cut > 0.0 {
                acc += term * (*d / fact * cut);
            }
        }
        acc
    }

    /// Exact ∂̄-defect of the truncation: ½(∂_Re + i∂_Im)Ṽ = (i Im x)^N V^{(N+1)}(Re x)/(2·N!).
    pub fn dbar_defect(&self, x: C64) -> C64 {
        if self.analytic && self.source.eval_complex(x).is_some() {
            return C64::new(0.0, 0.0);
        }
        let n = self.order;
        let d = self
            .source
            .deriv(n + 1, x.re)
            .expect("order checked at construction");
        let mut fact = 1.0;
        for i in 2..=n {
            fact *= i as f64;
        }
        C64::new(0.0, x.im).powu(n as u32) * (d / (2.0 * fact))
    }

    /// Ṽ₁(s, ω) = Ṽ(ω e^s) in log-radial coordinates.
    pub fn eval_s(&self, s: C64, omega: f64) -> C64 {
        self.eval_c(s.exp() * omega)
    }
}

/// Knobs for the contour construction.
#[derive(Debug, Clone)]
pub struct ApproxOptions {
    /// Taylor truncation order N of the almost-analytic extension.
    pub taylor_order: usize,
    /// Gauss-Legendre points per panel.
    pub panel_points: usize,
    /// Contour truncation Re s′ ≤ s_max; None → 40/ν.
    pub s_max: Option<f64>,
    /// Tolerance on the reported truncation estimate.
    pub tol: f64,
    /// Upper end of the log-radius window the table must cover accurately.
    pub eval_hi: f64,
    /// Largest admissible μ for the sector construction.
    pub mu_max: f64,
    /// χ₁ glue profile.
    pub glue: GlueCutoff,
    /// Below this μ the truncation defect of Ṽ is under double precision and
    /// the contour is skipped: V^μ := Ṽ₁ everywhere on the strip.
    pub exact_threshold: f64,
    /// For entire potentials, feed the closed-form continuation to the
    /// contour instead of the truncated series (removes the 𝒪(μ^N)
    /// truncation defect entirely; ignored for non-entire potentials).
    pub analytic_continuation: bool,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        ApproxOptions {
            taylor_order: 6,
            panel_points: 12,
            s_max: None,
            tol: 1e-10,
            eval_hi: 3.5,
            mu_max: 0.3,
            glue: GlueCutoff::default_profile(),
            exact_threshold: 1e-3,
            analytic_continuation: false,
        }
    }
}

/// Precomputed quadrature table for one direction ω: the value at s is
/// e^{−ν̃s}/(2iπ) Σ_j w_j/(s − s′_j).
#[derive(Debug, Clone)]
struct ContourTable {
    nodes: Vec<C64>,
    weights: Vec<C64>,
    truncation_estimate: f64,
}

/// Panel breakpoints for the horizontal legs: width ~μ across the window the
/// evaluations live in, geometric growth beyond, and for compactly supported
/// potentials extra grading where the integrand oscillates near the support
/// edge.
fn horizontal_breaks(mu: f64, eval_hi: f64, s_max: f64, pot: &Potential) -> Vec<f64> {
    let mut breaks = vec![-2.0 * mu];
    let fine_hi = (eval_hi + 0.5).min(s_max);
    let mut u = -2.0 * mu;
    while u < fine_hi {
        u = (u + mu).min(fine_hi);
        breaks.push(u);
    }
    while u < s_max {
        let w = ((u - fine_hi) * 0.5 + mu).clamp(mu, 0.5);
        u = (u + w).min(s_max);
        breaks.push(u);
    }
    // Support-edge grading for the bump: derivatives oscillate on a scale
    // ~η² at distance η from the edge.
    if pot.name == "bump" {
        let w = pot.params.get("width").copied().unwrap_or(2.0);
        let edge = w.ln();
        if edge > -2.0 * mu && edge < s_max {
            let mut eta = 0.004;
            while eta < 0.6 {
                let b = edge - eta;
                if b > -2.0 * mu {
                    breaks.push(b);
                }
                eta += (3.0 * eta * eta).max(1e-4);
            }
            breaks.push(edge.min(s_max));
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    breaks
}

impl ContourTable {
    fn build(ext: &AlmostAnalytic, mu: f64, nu_tilde: f64, omega: f64, opts: &ApproxOptions) -> ContourTable {
        let nu = ext.source.nu;
        let s_max = opts.s_max.unwrap_or(40.0 / nu);
        let (gx, gw) = gauss_legendre(opts.panel_points);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();

        let f = |s: C64| (s * nu_tilde).exp() * ext.eval_s(s, omega);

        // Horizontal legs at Im s′ = ±2μ: identical u-breakpoints keep the
        // node set conjugation-symmetric so real inputs give real values.
        let ubreaks = horizontal_breaks(mu, opts.eval_hi, s_max, &ext.source);
        for win in ubreaks.windows(2) {
            let (a, b) = (win[0], win[1]);
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            for (x, w) in gx.iter().zip(&gw) {
                let u = mid + half * x;
                // With the kernel written as 1/(s−s′) the circulation that
                // reproduces +Ṽ₁ at interior points is clockwise: upper leg
                // +du, lower leg −du, vertical leg upward.
                let su = C64::new(u, 2.0 * mu);
                nodes.push(su);
                weights.push(f(su) * (w * half));
                let sl = C64::new(u, -2.0 * mu);
                nodes.push(sl);
                weights.push(-f(sl) * (w * half));
            }
        }

        // Vertical leg Re s′ = −2μ, Im from +2μ to −2μ: ds′ = i dv with v
        // decreasing, i.e. −i ∫_{−2μ}^{2μ}; symmetric panels in v.
        let nv = 8;
        for p in 0..nv {
            let a = -2.0 * mu + 4.0 * mu * p as f64 / nv as f64;
            let b = -2.0 * mu + 4.0 * mu * (p + 1) as f64 / nv as f64;
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            for (x, w) in gx.iter().zip(&gw) {
                let v = mid + half * x;
                let s = C64::new(-2.0 * mu, v);
                nodes.push(s);
                weights.push(C64::new(0.0, 1.0) * f(s) * (w * half));
            }
        }

        // Tail bound for the discarded Re s′ > s_max piece: the integrand is
        // O(e^{(ν̃−ν)u}) and the kernel distance to the strip is ≥ μ.
        let tail_mag = f(C64::new(s_max, 2.0 * mu)).norm();
        let truncation_estimate =
            10.0 * tail_mag / ((nu - nu_tilde) * mu * std::f64::consts::PI);

        ContourTable {
            nodes,
            weights,
            truncation_estimate,
        }
    }

    fn eval(&self, s: C64, nu_tilde: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (n, w) in self.nodes.iter().zip(&self.weights) {
            acc += w / (s - n);
        }
        acc * (-s * nu_tilde).exp() / C64::new(0.0, 2.0 * std::f64::consts::PI)
    }
}

/// Single-point contour evaluation V^μ₁(s, ω).
pub fn contour_v1(
    ext: &AlmostAnalytic,
    mu: f64,
    nu_tilde: f64,
    s: C64,
    omega: f64,
    opts: &ApproxOptions,
) -> Result<C64> {
    if s.re < -mu || s.im.abs() >= 2.0 * mu {
        return Err(Error::Domain(format!(
            "s = {s} outside the admissible strip Re s ≥ −μ, |Im s| < 2μ (μ = {mu})"
        )));
    }
    let mut o = opts.clone();
    o.eval_hi = o.eval_hi.max(s.re + 1.0);
    let table = ContourTable::build(ext, mu, nu_tilde, omega, &o);
    if table.truncation_estimate > opts.tol {
        return Err(Error::Accuracy {
            estimate: table.truncation_estimate,
            tol: opts.tol,
        });
    }
    Ok(table.eval(s, nu_tilde))
}

/// The glued sector-holomorphic surrogate V^μ.
#[derive(Debug, Clone)]
pub struct AnalyticApproximation {
    pub ext: AlmostAnalytic,
    pub mu: f64,
    pub nu_tilde: f64,
    pub opts: ApproxOptions,
    /// μ below the exact threshold: V^μ ≡ Ṽ₁ (approximation defect under
    /// double precision), no contour tables.
    pub exact_mode: bool,
    pub truncation_estimate: f64,
    /// tables[0]: ω = +1; tables[1]: ω = −1.
    tables: Vec<ContourTable>,
}

pub fn build_approximation(
    v: &Potential,
    mu: f64,
    nu_tilde: f64,
    opts: &ApproxOptions,
) -> Result<AnalyticApproximation> {
    if !(nu_tilde > 0.0 && nu_tilde < v.nu) {
        return Err(Error::Precondition(format!(
            "need 0 < ν̃ < ν, got ν̃ = {nu_tilde}, ν = {}",
            v.nu
        )));
    }
    if !(mu > 0.0 && mu <= opts.mu_max) {
        return Err(Error::Precondition(format!(
            "μ = {mu} outside (0, μ_max = {}]",
            opts.mu_max
        )));
    }
    let mut ext = almost_analytic_extend(v, opts.taylor_order)?;
    if opts.analytic_continuation && v.eval_complex(C64::new(0.0, 0.0)).is_some() {
        ext.analytic = true;
    }
    if mu < opts.exact_threshold {
        return Ok(AnalyticApproximation {
            ext,
            mu,
            nu_tilde,
            opts: opts.clone(),
            exact_mode: true,
            truncation_estimate: 0.0,
            tables: Vec::new(),
        });
    }
    let tables = vec![
        ContourTable::build(&ext, mu, nu_tilde, 1.0, opts),
        ContourTable::build(&ext, mu, nu_tilde, -1.0, opts),
    ];
    let truncation_estimate = tables
        .iter()
        .map(|t| t.truncation_estimate)
        .fold(0.0, f64::max);
    if truncation_estimate > opts.tol {
        return Err(Error::Accuracy {
            estimate: truncation_estimate,
            tol: opts.tol,
        });
    }
    Ok(AnalyticApproximation {
        ext,
        mu,
        nu_tilde,
        opts: opts.clone(),
        exact_mode: false,
        truncation_estimate,
        tables,
    })
}

impl AnalyticApproximation {
    fn table(&self, omega: f64) -> &ContourTable {
        if omega >= 0.0 {
            &self.tables[0]
        } else {
            &self.tables[1]
        }
    }

    /// Evaluate at complex radius r (in the sector |Im ln r| < 2μ) and
    /// direction ω ∈ {+1, −1}. r = 0 is the glue anchor V^μ(0) = Ṽ(0).
    pub fn eval_sector(&self, r: C64, omega: f64) -> Result<C64> {
        if r.norm() == 0.0 {
            return Ok(C64::new(self.ext.source.eval(0.0), 0.0));
        }
        let s = r.ln();
        if self.exact_mode {
            return Ok(self.ext.eval_s(s, omega));
        }
        if s.im.abs() >= 2.0 * self.mu {
            return Err(Error::Domain(format!(
                "log-radius {s} outside the sector |Im s| < 2μ (μ = {})",
                self.mu
            )));
        }
        // χ₁(s/μ) glue, evaluated along Re s (pure Ṽ₁ for Re s ≤ −μ, pure
        // contour for Re s ≥ 0).
        let c = self.opts.glue.value(s.re / self.mu);
        let mut acc = C64::new(0.0, 0.0);
        if c > 0.0 {
            acc += self.ext.eval_s(s, omega) * c;
        }
        if c < 1.0 {
            acc += self.table(omega).eval(s, self.nu_tilde) * (1.0 - c);
        }
        Ok(acc)
    }

    /// Evaluate on the real line.
    pub fn eval_real(&self, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Ok(self.ext.source.eval(0.0));
        }
        let omega = x.signum();
        Ok(self.eval_sector(C64::new(x.abs(), 0.0), omega)?.re)
    }

    /// Imaginary part on the real line (reality check).
    pub fn imag_on_real(&self, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Ok(0.0);
        }
        Ok(self.eval_sector(C64::new(x.abs(), 0.0), x.signum())?.im)
    }

    pub fn node_count(&self) -> usize {
        self.tables.iter().map(|t| t.nodes.len()).sum()
    }
}

/// Decay-fit report for the μ-sweep of sup_x |⟨x⟩^ν̃ (V^μ − V)|.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DecayFitReport {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub n_floor: f64,
    pub pass: bool,
    /// (μ, sup) samples.
    pub samples: Vec<(f64, f64)>,
}

/// Rebuilds the approximation over mu_grid and fits the decay order of the
/// real-line defect.
pub fn verify_approximation(
    approx: &AnalyticApproximation,
    mu_grid: &[f64],
    x_grid: &[f64],
    n_floor: f64,
) -> Result<DecayFitReport> {
    if x_grid.is_empty() {
        return Err(Error::Validation("empty x_grid".into()));
    }
    if mu_grid.len() < 4 {
        return Err(Error::Validation(
            "mu_grid needs at least 4 values spanning a decade".into(),
        ));
    }
    let v = &approx.ext.source;
    let mut samples = Vec::new();
    for &mu in mu_grid {
        let ap = build_approximation(v, mu, approx.nu_tilde, &approx.opts)?;
        let mut sup: f64 = 0.0;
        for &x in x_grid {
            let w = (1.0 + x * x).sqrt().powf(approx.nu_tilde);
            let d = (ap.eval_real(x)? - v.eval(x)).abs();
            sup = sup.max(w * d);
        }
        samples.push((mu, sup.max(1e-18)));
    }
    let lx: Vec<f64> = samples.iter().map(|(m, _)| m.ln()).collect();
    let ly: Vec<f64> = samples.iter().map(|(_, s)| s.ln()).collect();
    let (slope, intercept, residual) = crate::fitting::linear_fit(&lx, &ly);
    Ok(DecayFitReport {
        slope,
        intercept,
        residual,
        n_floor,
        pass: slope >= n_floor,
        samples,
    })
}
