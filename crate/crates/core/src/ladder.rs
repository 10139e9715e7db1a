//! The μ-ladder: verify property 𝒫, recompute resonances along the
//! geometric sequence μ_k = h^{kn₁}μ̃ in nested windows (J′_{k+1}, τ_{k+2}),
//! match rung-to-rung into per-resonance chains, classify survivors
//! (Case A) against window leavers (Case B), and emit the limit set with
//! its uniqueness cross-check.

use crate::approximation::{build_approximation, ApproxOptions};
use crate::assignment::{bottleneck_match, MatchResult};
use crate::distortion::{DistortionMap, DistortionProfile};
use crate::error::{Error, Result};
use crate::operator::{assemble_distorted, DiscretizedOperator, GridSpec};
use crate::potential::Potential;
use crate::spectrum::{
    compute_resonances, find_gap, omega_h, ResonanceSet, SpectrumOptions, Window,
};
use num_complex::Complex64 as C64;

/// Below this, chain movements are eigensolver noise, not signal.
pub const NOISE_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, serde::Serialize)]
pub struct PropertyPVerdict {
    /// Re(Γ ∩ (J − i[0, λ₀μ̃])) ⊂ I.
    pub containment: bool,
    pub count: usize,
    /// count ≤ 1/δ.
    pub count_ok: bool,
    pub separation_actual: f64,
    pub separation_required_literal: f64,
    pub separation_required_diagnostic: f64,
    /// dist(I, ℝ∖J) ≥ h^{−δ}ω_h(μ̃) with the full h^{−n} factor.
    pub separation_literal: bool,
    /// Same with ω_h in diagnostic mode (log powers only).
    pub separation_diagnostic: bool,
}

impl PropertyPVerdict {
    pub fn holds_diagnostic(&self) -> bool {
        self.containment && self.count_ok && self.separation_diagnostic
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct PropertyPInstance {
    pub mu_tilde: f64,
    pub mu: f64,
    pub i: (f64, f64),
    pub j: (f64, f64),
    pub delta: f64,
    pub lambda0: f64,
    pub verdict: PropertyPVerdict,
}

/// Evaluate the three bullets of property 𝒫(μ̃, μ; I, J) against a computed
/// resonance set. `dim` is the space dimension entering ω_h.
#[allow(clippy::too_many_arguments)]
pub fn check_property_p(
    res: &ResonanceSet,
    i: (f64, f64),
    j: (f64, f64),
    mu_tilde: f64,
    mu: f64,
    delta: f64,
    h: f64,
    lambda0: f64,
    dim: u32,
) -> Result<PropertyPInstance> {
    if !(i.0 <= i.1) || !(j.0 <= j.1) {
        return Err(Error::Validation(format!(
            "malformed intervals I = {i:?}, J = {j:?}"
        )));
    }
    if !(j.0 <= i.0 && i.1 <= j.1) {
        return Err(Error::Validation(format!("I = {i:?} ⊄ J = {j:?}")));
    }
    let hd = h.powf(delta);
    if !(0.0 < mu_tilde && mu_tilde <= mu && mu <= hd) {
        return Err(Error::Precondition(format!(
            "angle constraint 0 < μ̃ ≤ μ ≤ h^δ violated: μ̃ = {mu_tilde}, μ = {mu}, h^δ = {hd}"
        )));
    }
    let hull = (j.0.min(lambda0), j.1.max(lambda0));
    if hull.1 - hull.0 > hd {
        return Err(Error::Precondition(format!(
            "diam(J ∪ {{λ₀}}) = {} exceeds h^δ = {hd}",
            hull.1 - hull.0
        )));
    }
    let in_box: Vec<C64> = res
        .values_expanded()
        .into_iter()
        .filter(|z| z.re >= j.0 && z.re <= j.1 && z.im >= -lambda0 * mu_tilde)
        .collect();
    let containment = in_box.iter().all(|z| z.re >= i.0 && z.re <= i.1);
    let count = in_box.len();
    let count_ok = count as f64 <= 1.0 / delta;
    let separation_actual = (i.0 - j.0).min(j.1 - i.1);
    let separation_required_literal = h.powf(-delta) * omega_h(mu_tilde, h, dim, false);
    let separation_required_diagnostic = h.powf(-delta) * omega_h(mu_tilde, h, dim, true);
    Ok(PropertyPInstance {
        mu_tilde,
        mu,
        i,
        j,
        delta,
        lambda0,
        verdict: PropertyPVerdict {
            containment,
            count,
            count_ok,
            separation_actual,
            separation_required_literal,
            separation_required_diagnostic,
            separation_literal: separation_actual >= separation_required_literal,
            separation_diagnostic: separation_actual >= separation_required_diagnostic,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum CaseTag {
    /// Tracked through every rung; value is the final iterate.
    A,
    /// Left the shrinking window; value frozen at the exit rung.
    B { exit_rung: usize },
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Chain {
    pub start_rung: usize,
    /// One matched value per rung the resonance was visible.
    pub values: Vec<C64>,
    pub case: CaseTag,
    /// Case B only: −Im ρ ∈ [τ_{k+3}, τ_{k+2}] at the recorded exit rung.
    pub depth_law_ok: Option<bool>,
}

impl Chain {
    pub fn last(&self) -> C64 {
        *self.values.last().unwrap()
    }

    /// |λ_{i+1} − λ_i| along the chain.
    pub fn movements(&self) -> Vec<f64> {
        self.values
            .windows(2)
            .map(|w| (w[1] - w[0]).norm())
            .collect()
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RungRecord {
    pub k: usize,
    pub mu_k: f64,
    pub theta_k: f64,
    /// The prescribed bracket [μ_{k+2}, 2μ_{k+2}].
    pub tau_bracket: (f64, f64),
    pub tau: f64,
    /// Distance from the chosen depth to all resonance depths.
    pub clearance: f64,
    pub set: ResonanceSet,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct LimitEntry {
    pub rho: C64,
    pub multiplicity: usize,
    pub case: CaseTag,
    pub history: Vec<C64>,
    /// Geometric tail bound on Σ remaining movements (Case A only).
    pub tail_bound: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct LimitSet {
    pub entries: Vec<LimitEntry>,
    pub window: (f64, f64),
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct LadderRun {
    pub rungs: Vec<RungRecord>,
    pub chains: Vec<Chain>,
    pub limit: LimitSet,
}

#[derive(Debug, Clone)]
pub struct LadderConfig {
    pub h: f64,
    pub n1: f64,
    /// μ̃ = μ₀, the angle at rung 0.
    pub mu_tilde: f64,
    pub nu_tilde: f64,
    /// Initial real window J′ (shrinks by `shrink_frac` each rung).
    pub j_prime: (f64, f64),
    pub lambda0: f64,
    pub kmax: usize,
    /// Stop once μ_k drops below this.
    pub mu_floor: f64,
    /// Polynomial order standing in for 𝒪(μ^∞).
    pub n_match: i32,
    /// Matching tolerance is c_match·μ_{k}^{n_match} per rung step.
    pub c_match: f64,
    /// Per-rung fractional margin shaved off each end of J′.
    pub shrink_frac: f64,
    pub n_cap: usize,
    pub stability_tol: Option<f64>,
}

impl LadderConfig {
    pub fn mu_k(&self, k: usize) -> f64 {
        self.h.powf(self.n1 * k as f64) * self.mu_tilde
    }
}

impl Default for LadderConfig {
    fn default() -> Self {
        LadderConfig {
            h: 0.1,
            n1: 1.1,
            mu_tilde: 0.3,
            nu_tilde: 1.0,
            j_prime: (0.6, 1.0),
            lambda0: 1.0,
            kmax: 6,
            mu_floor: 1e-8,
            n_match: 3,
            c_match: 2.0,
            shrink_frac: 0.02,
            n_cap: 8,
            stability_tol: None,
        }
    }
}

fn restrict(set: &ResonanceSet, tau: f64) -> ResonanceSet {
    let mut out = set.clone();
    out.entries.retain(|e| e.value.im >= -tau);
    out.window.tau = tau;
    out
}

/// Ladder driver over an arbitrary rung assembler (rung index, θ) ↦
/// operator. [`run_ladder`] supplies the real V^{μ_k} pipeline; tests may
/// supply synthetic operators.
pub fn run_ladder_with(
    assemble: &dyn Fn(usize, f64) -> Result<DiscretizedOperator>,
    cfg: &LadderConfig,
) -> Result<LadderRun> {
    if cfg.kmax < 1 {
        return Err(Error::Precondition("kmax must be ≥ 1".into()));
    }
    let mut rungs: Vec<RungRecord> = Vec::new();
    let mut chains: Vec<Chain> = Vec::new();
    // chain ids still tracked, aligned with their last values
    let mut active: Vec<usize> = Vec::new();
    let mut j = cfg.j_prime;
    let mut prev_tau = f64::INFINITY;

    let mut k = 0usize;
    while k <= cfg.kmax && cfg.mu_k(k) >= cfg.mu_floor {
        let mu_k = cfg.mu_k(k);
        let theta_k = mu_k;
        let bracket = (cfg.mu_k(k + 2), 2.0 * cfg.mu_k(k + 2));
        let window = Window::new(j.0, j.1, bracket.1)?;
        let opts = SpectrumOptions {
            lambda0: cfg.lambda0,
            stability_tol: cfg.stability_tol,
            ..Default::default()
        };
        let scan = compute_resonances(&|th| assemble(k, th), theta_k, &window, &opts)?;
        let (tau, clearance) = find_gap(bracket.0, bracket.1, &scan, cfg.n_cap)?;
        let set = restrict(&scan, tau);
        let values = set.values_expanded();

        if k == 0 {
            for &v in &values {
                active.push(chains.len());
                chains.push(Chain {
                    start_rung: 0,
                    values: vec![v],
                    case: CaseTag::A,
                    depth_law_ok: None,
                });
            }
        } else {
            // Case B: tracked resonances now below the shallower window
            let mut still: Vec<usize> = Vec::new();
            let mut still_vals: Vec<C64> = Vec::new();
            for &cid in &active {
                let lam = chains[cid].last();
                if lam.im < -tau {
                    chains[cid].case = CaseTag::B { exit_rung: k - 1 };
                    chains[cid].depth_law_ok = Some(lam.im >= -prev_tau && lam.im < -tau);
                } else {
                    still.push(cid);
                    still_vals.push(lam);
                }
            }
            let tol = cfg.c_match * cfg.mu_k(k - 1).powi(cfg.n_match);
            let m = bottleneck_match(&still_vals, &values);
            if !m.unmatched_src.is_empty() || m.max_distance > tol {
                let dump = serde_json::json!({
                    "rung": k,
                    "tolerance": tol,
                    "max_distance": m.max_distance,
                    "tracked": still_vals.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                    "computed": values.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                    "unmatched_tracked": m.unmatched_src,
                });
                return Err(Error::LadderAbort(dump.to_string()));
            }
            let mut next_active = Vec::new();
            for &(i, t, _) in &m.pairs {
                chains[still[i]].values.push(values[t]);
                next_active.push(still[i]);
            }
            // resonances entering the window start fresh chains
            for &t in &m.unmatched_tgt {
                next_active.push(chains.len());
                chains.push(Chain {
                    start_rung: k,
                    values: vec![values[t]],
                    case: CaseTag::A,
                    depth_law_ok: None,
                });
            }
            active = next_active;
        }

        rungs.push(RungRecord {
            k,
            mu_k,
            theta_k,
            tau_bracket: bracket,
            tau,
            clearance,
            set,
        });
        prev_tau = tau;
        let w = j.1 - j.0;
        j = (j.0 + cfg.shrink_frac * w, j.1 - cfg.shrink_frac * w);
        k += 1;
    }

    let ratio = cfg.h.powf(cfg.n1 * cfg.n_match as f64);
    let mut entries: Vec<LimitEntry> = chains
        .iter()
        .map(|c| {
            let tail = match c.case {
                CaseTag::A => {
                    let last_move = c
                        .movements()
                        .last()
                        .copied()
                        .unwrap_or(0.0)
                        .max(NOISE_FLOOR);
                    last_move * ratio / (1.0 - ratio)
                }
                CaseTag::B { .. } => 0.0,
            };
            LimitEntry {
                rho: c.last(),
                multiplicity: 1,
                case: c.case,
                history: c.values.clone(),
                tail_bound: tail,
            }
        })
        .collect();
    // merge numerically identical limits into multiplicities
    entries.sort_by(|a, b| (a.rho.re, a.rho.im).partial_cmp(&(b.rho.re, b.rho.im)).unwrap());
    let mut merged: Vec<LimitEntry> = Vec::new();
    for e in entries {
        match merged.last_mut() {
            Some(prev) if (prev.rho - e.rho).norm() < 1e-10 && prev.case == e.case => {
                prev.multiplicity += 1;
            }
            _ => merged.push(e),
        }
    }
    Ok(LadderRun {
        rungs,
        chains,
        limit: LimitSet {
            entries: merged,
            window: j,
        },
    })
}

/// The real pipeline: at rung k build V^{μ_k}, distort with θ = μ_k, and
/// feed the ladder driver.
pub fn run_ladder(
    v: &Potential,
    cfg: &LadderConfig,
    grid: &GridSpec,
    approx_opts: &ApproxOptions,
    r0: f64,
) -> Result<LadderRun> {
    let profile = DistortionProfile::from_h(cfg.h, cfg.n1, r0)?;
    let assemble = |k: usize, th: f64| -> Result<DiscretizedOperator> {
        let approx = build_approximation(v, cfg.mu_k(k), cfg.nu_tilde, approx_opts)?;
        let map = DistortionMap::new(profile.clone(), th)?;
        assemble_distorted(&approx, &map, cfg.h, grid)
    };
    run_ladder_with(&assemble, cfg)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CrosscheckPair {
    pub a: C64,
    pub b: C64,
    pub distance: f64,
    /// |B(λ)−λ| / |Im λ|^p for p = 1, 2, 3.
    pub ratios: [f64; 3],
    pub flagged: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CrosscheckReport {
    pub matching: MatchResult,
    pub pairs: Vec<CrosscheckPair>,
    /// Real elements of the two sets disagree (they must coincide).
    pub real_mismatch: bool,
    pub max_ratio1: f64,
}

/// Compare limit sets from two independent constructions. Supported when
/// the per-pair ratios |B(λ)−λ|/|Im λ|^p stay bounded as deeper resonances
/// come in; a pair whose first ratio exceeds `flag_threshold` is flagged.
pub fn uniqueness_crosscheck(
    la: &LimitSet,
    lb: &LimitSet,
    flag_threshold: f64,
) -> CrosscheckReport {
    let va: Vec<C64> = la.entries.iter().map(|e| e.rho).collect();
    let vb: Vec<C64> = lb.entries.iter().map(|e| e.rho).collect();
    let matching = bottleneck_match(&va, &vb);
    let mut pairs = Vec::new();
    let mut real_mismatch = false;
    let mut max_ratio1: f64 = 0.0;
    for &(i, t, d) in &matching.pairs {
        let (a, b) = (va[i], vb[t]);
        let im = a.im.abs().max(NOISE_FLOOR);
        let ratios = [d / im, d / (im * im), d / (im * im * im)];
        let flagged = ratios[0] > flag_threshold;
        max_ratio1 = max_ratio1.max(ratios[0]);
        // numerically real elements must agree essentially exactly
        if a.im.abs() < 10.0 * NOISE_FLOOR && d > 1e-8 {
            real_mismatch = true;
        }
        pairs.push(CrosscheckPair {
            a,
            b,
            distance: d,
            ratios,
            flagged,
        });
    }
    CrosscheckReport {
        matching,
        pairs,
        real_mismatch,
        max_ratio1,
    }
}
