//! Resonances as the window-restricted discrete spectrum of the distorted
//! operator: dense eigensolve, θ-stability rejection of discretization
//! artifacts, multiplicity clustering, contour projectors, the resolvent
//! product bound probe, and the depth-selection (gap) search.

use crate::assignment::{bottleneck_match, MatchResult};
use crate::error::{Error, Result};
use crate::grushin::ZBox;
use crate::linalg::{self, CMat};
use crate::operator::{DiscretizedOperator, GridSpec, OpMeta};
use ndarray::Array2;
use num_complex::Complex64 as C64;

/// The spectral window J′ − i[0, τ].
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Window {
    pub e_lo: f64,
    pub e_hi: f64,
    /// Depth below the real axis.
    pub tau: f64,
}

impl Window {
    pub fn new(e_lo: f64, e_hi: f64, tau: f64) -> Result<Window> {
        if !(e_lo < e_hi) || !(tau > 0.0) {
            return Err(Error::Validation(format!(
                "window needs e_lo < e_hi and τ > 0, got [{e_lo}, {e_hi}] × τ = {tau}"
            )));
        }
        Ok(Window { e_lo, e_hi, tau })
    }

    pub fn contains(&self, z: C64, im_slack: f64) -> bool {
        z.re >= self.e_lo && z.re <= self.e_hi && z.im >= -self.tau && z.im <= im_slack
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ResonanceEntry {
    pub value: C64,
    pub multiplicity: usize,
    /// Worst ‖(P − ρ)v‖ over the cluster's (unit) eigenvectors.
    pub residual: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ResonanceSet {
    pub entries: Vec<ResonanceEntry>,
    pub window: Window,
    pub meta: OpMeta,
    pub grid: GridSpec,
}

impl ResonanceSet {
    /// Values repeated according to multiplicity (for set matching).
    pub fn values_expanded(&self) -> Vec<C64> {
        self.entries
            .iter()
            .flat_map(|e| std::iter::repeat(e.value).take(e.multiplicity))
            .collect()
    }

    /// Total count with multiplicity.
    pub fn count(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("re,im,multiplicity,residual,h,mu,theta\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                e.value.re,
                e.value.im,
                e.multiplicity,
                e.residual,
                self.meta.h,
                self.meta.mu,
                self.meta.theta
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumOptions {
    /// θ is re-run at this multiple for the artifact test.
    pub stability_factor: f64,
    /// Keep eigenvalues that move less than this; None → 10⁻³·θ.
    pub stability_tol: Option<f64>,
    /// Single-linkage clustering radius; None → 10⁻⁸·max(1, |λ₀|).
    pub cluster_tol: Option<f64>,
    /// Energy scale entering the τ < 2λ₀θ window precondition.
    pub lambda0: f64,
    /// Numerical slack above the real axis for window membership.
    pub im_slack: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            stability_factor: 1.25,
            stability_tol: None,
            cluster_tol: None,
            lambda0: 1.0,
            im_slack: 1e-10,
        }
    }
}

/// Eigenvalues of `op` inside the window, with per-eigenvector residuals.
/// No artifact rejection — building block for [`compute_resonances`].
pub fn window_eigs(
    op: &DiscretizedOperator,
    window: &Window,
    im_slack: f64,
) -> Result<Vec<(C64, f64)>> {
    let (vals, vecs) = linalg::eig(&op.matrix)?;
    let mut out = Vec::new();
    for (k, &lam) in vals.iter().enumerate() {
        if window.contains(lam, im_slack) {
            let v = vecs.column(k);
            let mut res = op.matrix.dot(&v.to_owned());
            for i in 0..res.len() {
                res[i] -= lam * v[i];
            }
            let nr = res.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
                / v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            out.push((lam, nr));
        }
    }
    Ok(out)
}

/// Resonances in the window: eigensolve at θ, re-solve at
/// `stability_factor`·θ, keep only eigenvalues that persist (true
/// resonances are θ-independent; rotated-continuum artifacts travel with
/// θ), then cluster into multiplicities.
///
/// `assemble` must build the distorted operator at a given θ; the window
/// depth must satisfy τ < 2λ₀θ so the window sits inside the sector the
/// distortion reveals.
pub fn compute_resonances(
    assemble: &dyn Fn(f64) -> Result<DiscretizedOperator>,
    theta: f64,
    window: &Window,
    opts: &SpectrumOptions,
) -> Result<ResonanceSet> {
    if !(window.tau < 2.0 * opts.lambda0 * theta) {
        return Err(Error::Precondition(format!(
            "window depth τ = {} must be < 2λ₀θ = {}",
            window.tau,
            2.0 * opts.lambda0 * theta
        )));
    }
    let op = assemble(theta)?;
    let candidates = window_eigs(&op, window, opts.im_slack)?;

    // artifact rejection: nudge θ and keep what stays put; if the upward
    // nudge leaves the admissible sector (θ ≤ μ), nudge downward instead
    let op2 = assemble(opts.stability_factor * theta)
        .or_else(|_| assemble(theta / opts.stability_factor))?;
    let (vals2, _) = linalg::eig(&op2.matrix)?;
    let stab = opts.stability_tol.unwrap_or(1e-3 * theta);
    let kept: Vec<(C64, f64)> = candidates
        .into_iter()
        .filter(|(lam, _)| vals2.iter().any(|w| (w - lam).norm() < stab))
        .collect();

    // single-linkage clustering into multiplicities
    let ctol = opts
        .cluster_tol
        .unwrap_or(1e-8 * opts.lambda0.abs().max(1.0));
    let n = kept.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for i in 0..n {
        for j in i + 1..n {
            if (kept[i].0 - kept[j].0).norm() < ctol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut clusters: std::collections::HashMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        clusters.entry(r).or_default().push(i);
    }
    let mut entries: Vec<ResonanceEntry> = clusters
        .values()
        .map(|members| {
            let m = members.len() as f64;
            let mut mean = C64::new(0.0, 0.0);
            let mut residual: f64 = 0.0;
            for &i in members {
                mean += kept[i].0 / m;
                residual = residual.max(kept[i].1);
            }
            ResonanceEntry {
                value: C64::new(mean.re, mean.im.min(0.0)),
                multiplicity: members.len(),
                residual,
            }
        })
        .collect();
    entries.sort_by(|a, b| {
        (a.value.re, a.value.im).partial_cmp(&(b.value.re, b.value.im)).unwrap()
    });
    Ok(ResonanceSet {
        entries,
        window: *window,
        meta: op.meta.clone(),
        grid: op.grid,
    })
}

#[derive(Debug, Clone)]
pub struct ProjectorResult {
    /// Number of singular values above ½.
    pub rank: usize,
    pub projector: CMat,
    /// ‖Π² − Π‖ (operator norm).
    pub idempotency: f64,
}

/// Distance from a point to the rectangle boundary (inside or out).
fn boundary_distance(z: C64, b: &ZBox) -> f64 {
    let dx = (b.re_lo - z.re).max(z.re - b.re_hi);
    let dy = (b.im_lo - z.im).max(z.im - b.im_hi);
    if dx <= 0.0 && dy <= 0.0 {
        // inside: nearest wall
        (-dx).min(-dy)
    } else {
        (dx.max(0.0).powi(2) + dy.max(0.0).powi(2)).sqrt()
    }
}

/// Spectral projector Π = (2πi)⁻¹∮(z−P)⁻¹dz over the rectangle boundary
/// (counterclockwise, Gauss–Legendre with `nodes_per_side` nodes per side;
/// per-side quadrature converges geometrically since the spectrum stays
/// `gap_floor` away, whereas a trapezoid rule stalls at 𝒪(N⁻²) because of
/// the corners). `known` are eigenvalues the caller has computed; the
/// contour must keep distance ≥ `gap_floor` from each of them.
pub fn contour_projector(
    op: &DiscretizedOperator,
    zbox: &ZBox,
    nodes_per_side: usize,
    known: &[C64],
    gap_floor: f64,
) -> Result<ProjectorResult> {
    if nodes_per_side < 2 {
        return Err(Error::Precondition("need ≥ 2 nodes per side".into()));
    }
    for &lam in known {
        let d = boundary_distance(lam, zbox);
        if d < gap_floor {
            return Err(Error::Precondition(format!(
                "eigenvalue {lam} is {d:.3e} from the contour (< gap_floor = \
                 {gap_floor:.3e}); pick the box depth with find_gap"
            )));
        }
    }
    let corners = [
        C64::new(zbox.re_lo, zbox.im_lo),
        C64::new(zbox.re_hi, zbox.im_lo),
        C64::new(zbox.re_hi, zbox.im_hi),
        C64::new(zbox.re_lo, zbox.im_hi),
    ];
    let (gx, gw) = crate::quad::gauss_legendre(nodes_per_side);
    let mut nodes: Vec<(C64, C64)> = Vec::with_capacity(4 * nodes_per_side);
    for s in 0..4 {
        let (a, b) = (corners[s], corners[(s + 1) % 4]);
        let half = (b - a) / 2.0;
        let mid = (a + b) / 2.0;
        for k in 0..nodes_per_side {
            nodes.push((mid + half * gx[k], half * gw[k]));
        }
    }
    let n = op.grid.n_points;
    let mut pi: CMat = Array2::zeros((n, n));
    for &(z, dz) in &nodes {
        let mut a = -&op.matrix;
        for i in 0..n {
            a[[i, i]] += z;
        }
        let rz = linalg::Lu::new(&a)?.inverse(n)?;
        let w = dz / C64::new(0.0, 2.0 * std::f64::consts::PI);
        pi.scaled_add(w, &rz);
    }
    let sv = linalg::singular_values(&pi)?;
    let rank = sv.iter().filter(|&&s| s > 0.5).count();
    let idempotency = linalg::opnorm_svd(&(pi.dot(&pi) - &pi))?;
    Ok(ProjectorResult {
        rank,
        projector: pi,
        idempotency,
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ProductBoundReport {
    /// sup over the grid of ‖(P−z)⁻¹‖·∏|z−ρ_ℓ|.
    pub sup: f64,
    /// (z, ‖(P−z)⁻¹‖, ‖(P−z)⁻¹‖·∏|z−ρ_ℓ|) samples.
    pub samples: Vec<(C64, f64, f64)>,
}

/// Probe the resolvent product bound: the product should stay 𝒪(θ^{−C})
/// uniformly on the window even arbitrarily close to resonances, because
/// each pole of the resolvent is cancelled by its |z−ρ_ℓ| factor.
pub fn probe_product_bound(
    op: &DiscretizedOperator,
    resonances: &[C64],
    z_grid: &[C64],
) -> Result<ProductBoundReport> {
    let mut samples = Vec::with_capacity(z_grid.len());
    let mut sup: f64 = 0.0;
    for (k, &z) in z_grid.iter().enumerate() {
        let nrm = linalg::resolvent_norm(&op.matrix, z, 60, 1000 + k as u64)?;
        let prod: f64 = resonances.iter().map(|r| (z - r).norm()).product();
        let val = nrm * prod;
        sup = sup.max(val);
        samples.push((z, nrm, val));
    }
    Ok(ProductBoundReport { sup, samples })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SetMatch {
    pub result: MatchResult,
    pub alpha: f64,
    /// Acceptance threshold C_match·α.
    pub threshold: f64,
    /// True iff every entry is paired and max_distance ≤ threshold.
    pub ok: bool,
}

/// Match two resonance sets as an 𝒪(α) bijection (multiplicities expanded
/// to repeated points, bottleneck assignment).
pub fn match_sets(src: &ResonanceSet, tgt: &ResonanceSet, alpha: f64, c_match: f64) -> SetMatch {
    let result = bottleneck_match(&src.values_expanded(), &tgt.values_expanded());
    let threshold = c_match * alpha;
    let ok = result.unmatched_src.is_empty()
        && result.unmatched_tgt.is_empty()
        && result.max_distance <= threshold;
    SetMatch {
        result,
        alpha,
        threshold,
        ok,
    }
}

/// Pick the window depth τ ∈ [d₁, d₂] farthest from every resonance's
/// |Im|; with at most `n_cap` resonances the pigeonhole argument guarantees
/// a clearance of (d₂−d₁)/(4·n_cap). Returns (τ, clearance).
pub fn find_gap(d1: f64, d2: f64, res: &ResonanceSet, n_cap: usize) -> Result<(f64, f64)> {
    if !(d1 < d2) {
        return Err(Error::Precondition(format!("need d₁ < d₂, got [{d1}, {d2}]")));
    }
    if res.count() > n_cap {
        return Err(Error::Precondition(format!(
            "{} resonances exceed the cap N = {n_cap}",
            res.count()
        )));
    }
    let mut depths: Vec<f64> = res.values_expanded().iter().map(|z| -z.im).collect();
    depths.sort_by(f64::total_cmp);
    if depths.is_empty() {
        return Ok(((d1 + d2) / 2.0, (d2 - d1) / 2.0));
    }
    // the maximizer is an endpoint or a midpoint of consecutive obstacles
    let mut candidates = vec![d1, d2];
    for w in depths.windows(2) {
        let mid = (w[0] + w[1]) / 2.0;
        if mid > d1 && mid < d2 {
            candidates.push(mid);
        }
    }
    let clearance = |t: f64| depths.iter().map(|o| (t - o).abs()).fold(f64::INFINITY, f64::min);
    let (mut best_t, mut best_c) = (d1, clearance(d1));
    for &t in &candidates[1..] {
        let c = clearance(t);
        if c > best_c {
            best_t = t;
            best_c = c;
        }
    }
    Ok((best_t, best_c))
}

/// The window-shrinkage rate ω_h(θ) = θ(ln 1/θ + h^{−n}(ln 1/h)^{n+1})^{1/2}.
/// At desk-scale h the h^{−n} factor is astronomically conservative, so
/// `diagnostic` mode drops it and keeps only the logarithm power.
pub fn omega_h(theta: f64, h: f64, n: u32, diagnostic: bool) -> f64 {
    let lt = (1.0 / theta).ln();
    let lh = (1.0 / h).ln();
    let bulk = if diagnostic {
        lh.powi(n as i32 + 1)
    } else {
        h.powi(-(n as i32)) * lh.powi(n as i32 + 1)
    };
    theta * (lt + bulk).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{assemble_uniform_dilation, GridSpec, OpKind, OpMeta, Scheme};
    use crate::potential::Potential;
    use ndarray::Array2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Hand-built operator with prescribed diagonal spectrum.
    fn diag_op(vals: &[C64]) -> DiscretizedOperator {
        let n = vals.len().max(64);
        let grid = GridSpec::new(-1.0, 1.0, n, Scheme::Order2).unwrap();
        let mut m: CMat = Array2::zeros((n, n));
        for i in 0..n {
            m[[i, i]] = if i < vals.len() {
                vals[i]
            } else {
                c(100.0 + i as f64, -5.0)
            };
        }
        DiscretizedOperator {
            matrix: m,
            grid,
            meta: OpMeta {
                h: 0.1,
                mu: 0.1,
                theta: 0.1,
                kind: OpKind::Free,
                resolution_warning: false,
            },
            absorber_rank: None,
            absorber: None,
            basis: None,
        }
    }

    fn dummy_set(vals: &[C64]) -> ResonanceSet {
        ResonanceSet {
            entries: vals
                .iter()
                .map(|&v| ResonanceEntry {
                    value: v,
                    multiplicity: 1,
                    residual: 0.0,
                })
                .collect(),
            window: Window::new(0.0, 1.0, 1.0).unwrap(),
            meta: OpMeta {
                h: 0.1,
                mu: 0.1,
                theta: 0.1,
                kind: OpKind::Free,
                resolution_warning: false,
            },
            grid: GridSpec::new(-1.0, 1.0, 64, Scheme::Order2).unwrap(),
        }
    }

    #[test]
    fn free_operator_has_empty_window() {
        let v = Potential::free();
        let grid = GridSpec::new(-12.0, 12.0, 256, Scheme::Order2).unwrap();
        let window = Window::new(0.5, 1.5, 0.05).unwrap();
        let set = compute_resonances(
            &|th| assemble_uniform_dilation(&v, th, 0.1, &grid),
            0.1,
            &window,
            &SpectrumOptions::default(),
        )
        .unwrap();
        assert!(set.entries.is_empty(), "{:?}", set.entries);
    }

    #[test]
    fn window_precondition_enforced() {
        let v = Potential::free();
        let grid = GridSpec::new(-12.0, 12.0, 128, Scheme::Order2).unwrap();
        let window = Window::new(0.5, 1.5, 0.5).unwrap();
        let err = compute_resonances(
            &|th| assemble_uniform_dilation(&v, th, 0.1, &grid),
            0.1,
            &window,
            &SpectrumOptions::default(),
        );
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn gaussian_resonance_stable_under_refinement() {
        // order-4 dilation at two resolutions: the kept resonance moves by
        // the discretization error, which the matcher should report small
        let v = Potential::gaussian_barrier(0.8, 1.0);
        let window = Window::new(0.5, 1.0, 0.15).unwrap();
        let opts = SpectrumOptions {
            lambda0: 0.8,
            ..Default::default()
        };
        let run = |n: usize| {
            let grid = GridSpec::new(-12.0, 12.0, n, Scheme::Order4).unwrap();
            compute_resonances(
                &|th| assemble_uniform_dilation(&v, th, 0.1, &grid),
                0.3,
                &window,
                &opts,
            )
            .unwrap()
        };
        let coarse = run(300);
        let fine = run(600);
        assert!(!coarse.entries.is_empty());
        assert_eq!(coarse.count(), fine.count());
        let m = match_sets(&coarse, &fine, 2e-2, 1.0);
        assert!(m.ok, "max_distance = {}", m.result.max_distance);
        assert!(m.result.max_distance < 2e-2);
        // the known barrier-top resonance is present
        let rho = c(0.8, -0.089);
        assert!(fine
            .entries
            .iter()
            .any(|e| (e.value - rho).norm() < 0.05));
    }

    #[test]
    fn projector_rank_counts_enclosed_eigenvalues() {
        let inside = [c(0.5, -0.1), c(0.6, -0.2), c(0.55, -0.15)];
        let outside = [c(2.0, -0.1), c(0.5, -0.9)];
        let all: Vec<C64> = inside.iter().chain(&outside).copied().collect();
        let op = diag_op(&all);
        let zbox = ZBox {
            re_lo: 0.3,
            re_hi: 0.8,
            im_lo: -0.4,
            im_hi: 0.0,
        };
        let known: Vec<C64> = op.matrix.diag().to_vec();
        let p = contour_projector(&op, &zbox, 24, &known, 0.05).unwrap();
        assert_eq!(p.rank, 3);
        assert!(p.idempotency < 1e-6, "{}", p.idempotency);
    }

    #[test]
    fn projector_rejects_near_boundary_spectrum() {
        let op = diag_op(&[c(0.5, -0.401), c(3.0, -1.0)]);
        let zbox = ZBox {
            re_lo: 0.3,
            re_hi: 0.8,
            im_lo: -0.4,
            im_hi: 0.0,
        };
        let known: Vec<C64> = op.matrix.diag().to_vec();
        let err = contour_projector(&op, &zbox, 16, &known, 0.05);
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn projector_rank_matches_eigensolver_multiplicity() {
        // real operator: the box around the computed barrier-top resonance
        // must capture exactly its multiplicity
        let v = Potential::gaussian_barrier(0.8, 1.0);
        let grid = GridSpec::new(-12.0, 12.0, 260, Scheme::Order4).unwrap();
        let window = Window::new(0.5, 1.0, 0.15).unwrap();
        let opts = SpectrumOptions {
            lambda0: 0.8,
            ..Default::default()
        };
        let set = compute_resonances(
            &|th| assemble_uniform_dilation(&v, th, 0.1, &grid),
            0.3,
            &window,
            &opts,
        )
        .unwrap();
        let rho = set
            .entries
            .iter()
            .min_by(|a, b| {
                (a.value - c(0.8, -0.089))
                    .norm()
                    .total_cmp(&(b.value - c(0.8, -0.089)).norm())
            })
            .unwrap();
        let zbox = ZBox {
            re_lo: rho.value.re - 0.05,
            re_hi: rho.value.re + 0.05,
            im_lo: rho.value.im - 0.05,
            im_hi: (rho.value.im + 0.05).min(-0.001),
        };
        let op = assemble_uniform_dilation(&v, 0.3, 0.1, &grid).unwrap();
        let (all, _) = linalg::eig(&op.matrix).unwrap();
        let p = contour_projector(&op, &zbox, 20, &all.to_vec(), 5e-3).unwrap();
        assert_eq!(p.rank, rho.multiplicity);
        assert!(p.idempotency < 1e-6, "{}", p.idempotency);
    }

    #[test]
    fn product_bound_cancels_resonance_pole() {
        // diagonal model: raw resolvent blows up like |z−ρ|⁻¹ (slope −1 in
        // log-log) while the compensated product stays bounded
        let rho = c(0.8, -0.05);
        let op = diag_op(&[rho, c(2.0, -0.3), c(2.5, -0.4)]);
        let offsets = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
        let zs: Vec<C64> = offsets.iter().map(|&d| rho + c(d, 0.0)).collect();
        let rep = probe_product_bound(&op, &[rho], &zs).unwrap();
        let xs: Vec<f64> = offsets.iter().map(|d| d.ln()).collect();
        let ys: Vec<f64> = rep.samples.iter().map(|(_, nrm, _)| nrm.ln()).collect();
        let (slope, _, _) = crate::fitting::linear_fit(&xs, &ys);
        assert!((slope + 1.0).abs() < 0.05, "slope {slope}");
        let vals: Vec<f64> = rep.samples.iter().map(|s| s.2).collect();
        let (lo, hi) = vals
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
        assert!(hi / lo < 1.5, "compensated product not flat: {vals:?}");
    }

    #[test]
    fn upper_edge_resolvent_bound() {
        // all spectrum in the closed lower half-plane → ‖(P−z)⁻¹‖ ≤ 1/Im z
        // on the upper edge, well within the 2/Im z budget
        let op = diag_op(&[c(0.8, -0.05), c(1.2, -0.01), c(2.0, -0.5)]);
        for &s in &[0.05, 0.02, 0.01] {
            let z = c(1.0, s);
            let nrm = linalg::resolvent_norm(&op.matrix, z, 60, 3).unwrap();
            assert!(nrm <= 2.0 / s, "‖R({z})‖ = {nrm} > {}", 2.0 / s);
        }
    }

    #[test]
    fn pipeline_matches_dilation_oracle() {
        // full V^μ + radial-distortion pipeline vs exact uniform dilation
        // of the entire Gaussian on the same grid
        use crate::approximation::{build_approximation, ApproxOptions};
        use crate::distortion::{DistortionMap, DistortionProfile};
        use crate::operator::assemble_distorted;
        let v = Potential::gaussian_barrier(0.8, 1.0);
        let approx = build_approximation(&v, 0.1, 1.0, &ApproxOptions::default()).unwrap();
        let profile = DistortionProfile::from_h(0.1, 1.1, 1.0).unwrap();
        let grid = GridSpec::new(-12.0, 12.0, 700, Scheme::Order4).unwrap();
        let window = Window::new(0.6, 1.0, 0.12).unwrap();
        // genuine θ-drift (box reflection + discretization) is ~10⁻³ here;
        // continuum artifacts move by ~3·10⁻², so 5·10⁻³ still separates
        let opts = SpectrumOptions {
            lambda0: 0.8,
            stability_tol: Some(5e-3),
            ..Default::default()
        };
        let pipeline = compute_resonances(
            &|th| {
                let map = DistortionMap::new(profile.clone(), th)?;
                assemble_distorted(&approx, &map, 0.1, &grid)
            },
            0.1,
            &window,
            &opts,
        )
        .unwrap();
        let oracle = compute_resonances(
            &|th| assemble_uniform_dilation(&v, th, 0.1, &grid),
            0.1,
            &window,
            &opts,
        )
        .unwrap();
        let rho0 = c(0.8, -0.089);
        let pick = |s: &ResonanceSet| {
            s.entries
                .iter()
                .map(|e| e.value)
                .min_by(|a, b| (a - rho0).norm().total_cmp(&(b - rho0).norm()))
                .expect("resonance found")
        };
        let (a, b) = (pick(&pipeline), pick(&oracle));
        let rel = (a - b).norm() / b.norm();
        assert!(rel < 2e-4, "pipeline {a} vs oracle {b}: rel {rel}");
    }

    #[test]
    fn glue_choice_shifts_resonances_by_mu_power_only() {
        // two admissible constructions of V^μ must give the same resonance
        // set up to 𝒪(μ^N)
        use crate::approximation::{build_approximation, ApproxOptions};
        use crate::cutoff::GlueCutoff;
        use crate::distortion::{DistortionMap, DistortionProfile};
        use crate::operator::assemble_distorted;
        let v = Potential::gaussian_barrier(0.8, 1.0);
        let profile = DistortionProfile::from_h(0.1, 1.1, 1.0).unwrap();
        let grid = GridSpec::new(-12.0, 12.0, 400, Scheme::Order4).unwrap();
        let window = Window::new(0.6, 1.0, 0.12).unwrap();
        let opts = SpectrumOptions {
            lambda0: 0.8,
            stability_tol: Some(5e-3),
            ..Default::default()
        };
        let run = |glue: GlueCutoff| {
            let aopts = ApproxOptions {
                glue,
                ..Default::default()
            };
            let approx = build_approximation(&v, 0.3, 1.0, &aopts).unwrap();
            compute_resonances(
                &|th| {
                    let map = DistortionMap::new(profile.clone(), th)?;
                    assemble_distorted(&approx, &map, 0.1, &grid)
                },
                0.08,
                &window,
                &opts,
            )
            .unwrap()
        };
        let sa = run(GlueCutoff::default_profile());
        let sb = run(GlueCutoff::alternative_profile());
        assert_eq!(sa.count(), sb.count());
        assert!(sa.count() >= 1);
        let m = match_sets(&sa, &sb, 0.3f64.powi(6), 50.0);
        assert!(
            m.ok,
            "glue perturbation moved resonances by {} (budget {})",
            m.result.max_distance, m.threshold
        );
    }

    #[test]
    fn determinant_weighted_conjugation_is_a_similarity() {
        // Ũ_θ = (φ′)^{1/2}U_θ conjugation: D^{1/2}(P−z)D^{−1/2} has the
        // same spectrum to roundoff
        use crate::approximation::{build_approximation, ApproxOptions};
        use crate::distortion::{DistortionMap, DistortionProfile};
        use crate::operator::assemble_distorted;
        let v = Potential::gaussian_barrier(0.8, 1.0);
        let approx = build_approximation(&v, 0.1, 1.0, &ApproxOptions::default()).unwrap();
        let profile = DistortionProfile::from_h(0.1, 1.1, 1.0).unwrap();
        let map = DistortionMap::new(profile, 0.08).unwrap();
        let grid = GridSpec::new(-12.0, 12.0, 300, Scheme::Order2).unwrap();
        let op = assemble_distorted(&approx, &map, 0.1, &grid).unwrap();
        let n = grid.n_points;
        let mut conj = op.matrix.clone();
        let sq: Vec<C64> = grid
            .points()
            .iter()
            .map(|&x| map.phi_d1(x).sqrt())
            .collect();
        for i in 0..n {
            for j in 0..n {
                conj[[i, j]] *= sq[i] / sq[j];
            }
        }
        let window = Window::new(0.6, 1.0, 0.12).unwrap();
        let ea = window_eigs(&op, &window, 1e-10).unwrap();
        let conj_op = DiscretizedOperator {
            matrix: conj,
            ..op.clone()
        };
        let eb = window_eigs(&conj_op, &window, 1e-10).unwrap();
        assert_eq!(ea.len(), eb.len());
        assert!(!ea.is_empty());
        let va: Vec<C64> = ea.iter().map(|p| p.0).collect();
        let vb: Vec<C64> = eb.iter().map(|p| p.0).collect();
        let m = bottleneck_match(&va, &vb);
        assert!(m.max_distance < 1e-8, "{}", m.max_distance);
    }

    #[test]
    fn gap_search_trivial_and_pigeonhole() {
        // no resonances → midpoint
        let (t, cl) = find_gap(0.1, 0.3, &dummy_set(&[]), 4).unwrap();
        assert!((t - 0.2).abs() < 1e-15 && (cl - 0.1).abs() < 1e-15);

        // one obstacle dead center → an endpoint wins
        let (t, cl) = find_gap(0.1, 0.3, &dummy_set(&[c(0.5, -0.2)]), 4).unwrap();
        assert!(t == 0.1 || t == 0.3);
        assert!((cl - 0.1).abs() < 1e-15);

        // N=3 random obstacles: clearance ≥ (d₂−d₁)/12, and the exhaustive
        // scan cannot do better
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let obs: Vec<C64> = (0..3)
                .map(|_| c(0.5, -(0.1 + 0.2 * rng.random::<f64>())))
                .collect();
            let set = dummy_set(&obs);
            let (t, cl) = find_gap(0.1, 0.3, &set, 3).unwrap();
            assert!(cl >= 0.2 / 12.0 - 1e-12, "clearance {cl}");
            let brute = (0..=4000)
                .map(|k| 0.1 + 0.2 * k as f64 / 4000.0)
                .map(|tt| {
                    obs.iter()
                        .map(|o| (tt + o.im).abs())
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0f64, f64::max);
            assert!(cl >= brute - 1e-4, "cl {cl} < brute {brute}");
            assert!((0.1..=0.3).contains(&t));
        }
    }

    #[test]
    fn omega_h_modes_ordered_and_monotone() {
        let full = omega_h(1e-3, 0.1, 1, false);
        let diag = omega_h(1e-3, 0.1, 1, true);
        assert!(diag < full);
        assert!(omega_h(2e-3, 0.1, 1, true) > diag);
        assert!(diag > 0.0 && full.is_finite());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let set = dummy_set(&[c(0.8, -0.1)]);
        let csv = set.csv();
        assert!(csv.starts_with("re,im,multiplicity,residual,h,mu,theta\n"));
        assert_eq!(csv.lines().count(), 2);
    }
}
