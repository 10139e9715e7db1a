//! Dense finite-difference assembly of the distorted Hamiltonian
//! P^μ_θ = −h²(φ′⁻¹ d/dx)² + V^μ∘φ on a Dirichlet box, plus the reference
//! operator P̃^μ_θ = P^μ_θ − iC₀θ·χ₀(h²D² + R⁻²x²) whose finite-rank
//! absorber pushes the spectrum away from the real axis.

use crate::approximation::AnalyticApproximation;
use crate::distortion::DistortionMap;
use crate::error::{Error, Result};
use crate::linalg::{eigh_real, CMat};
use crate::potential::Potential;
use ndarray::Array2;
use num_complex::Complex64 as C64;

/// Finite-difference order of the interior stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Scheme {
    Order2,
    Order4,
}

/// Uniform Dirichlet grid on [x_min, x_max] with n_points interior nodes.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub scheme: Scheme,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n_points: usize, scheme: Scheme) -> Result<GridSpec> {
        if !(x_max > x_min) {
            return Err(Error::Validation(format!(
                "empty box [{x_min}, {x_max}]"
            )));
        }
        if n_points < 64 {
            return Err(Error::Validation(format!(
                "n_points = {n_points} < 64"
            )));
        }
        Ok(GridSpec {
            x_min,
            x_max,
            n_points,
            scheme,
        })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points + 1) as f64
    }

    /// Interior nodes (Dirichlet endpoints excluded).
    pub fn points(&self) -> Vec<f64> {
        let dx = self.dx();
        (1..=self.n_points)
            .map(|i| self.x_min + i as f64 * dx)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum OpKind {
    Distorted,
    Reference,
    Free,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct OpMeta {
    pub h: f64,
    pub mu: f64,
    pub theta: f64,
    pub kind: OpKind,
    /// Set when Δx > h/10 (grid does not resolve the wavelength).
    pub resolution_warning: bool,
}

/// A dense discretization together with its provenance; reference operators
/// additionally carry the absorber K = C₀χ₀(h²D²+R⁻²x²) and its eigenbasis.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    pub matrix: CMat,
    pub grid: GridSpec,
    pub meta: OpMeta,
    /// Rank M of the absorber (reference kind only).
    pub absorber_rank: Option<usize>,
    /// K as a dense real-symmetric matrix (reference kind only).
    pub absorber: Option<Array2<f64>>,
    /// The M absorber eigenvectors, columns (reference kind only).
    pub basis: Option<Array2<f64>>,
}

/// −h²·(second-derivative stencil) with Dirichlet ends; order-4 interiors
/// fall back to order-2 at the two nodes next to the boundary.
fn laplacian(grid: &GridSpec, h: f64) -> Array2<f64> {
    let n = grid.n_points;
    let dx2 = grid.dx() * grid.dx();
    let c = h * h / dx2;
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        let order4 = grid.scheme == Scheme::Order4 && i >= 2 && i + 2 < n;
        if order4 {
            m[[i, i - 2]] += c / 12.0;
            m[[i, i - 1]] += -16.0 * c / 12.0;
            m[[i, i]] += 30.0 * c / 12.0;
            m[[i, i + 1]] += -16.0 * c / 12.0;
            m[[i, i + 2]] += c / 12.0;
        } else {
            if i > 0 {
                m[[i, i - 1]] += -c;
            }
            m[[i, i]] += 2.0 * c;
            if i + 1 < n {
                m[[i, i + 1]] += -c;
            }
        }
    }
    m
}

/// Core assembly: kinetic part from the 1D deformation (identity when
/// `map` is None) plus a diagonal from `v_at` evaluated on the grid nodes.
fn assemble_core(
    v_at: &dyn Fn(f64) -> Result<C64>,
    map: Option<&DistortionMap>,
    h: f64,
    grid: &GridSpec,
    kind: OpKind,
    mu: f64,
) -> Result<DiscretizedOperator> {
    let n = grid.n_points;
    let dx = grid.dx();
    let xs = grid.points();
    let mut m: CMat = CMat::zeros((n, n));

    match (map, grid.scheme) {
        (None, _) => {
            let lap = laplacian(grid, h);
            for i in 0..n {
                for j in 0..n {
                    if lap[[i, j]] != 0.0 {
                        m[[i, j]] = C64::new(lap[[i, j]], 0.0);
                    }
                }
            }
        }
        (Some(dm), Scheme::Order2) => {
            // Divergence form −h² w ∂(w ∂·) symmetrized by √w: off-diagonal
            // −(h²/dx²)·w_{i+1/2}·√(w_i w_{i+1}), diagonal
            // (h²/dx²)·w_i·(w_{i−1/2}+w_{i+1/2}); complex-symmetric by
            // construction.
            let w = |x: f64| C64::new(1.0, 0.0) / dm.phi_d1(x);
            let c = h * h / (dx * dx);
            let wi: Vec<C64> = xs.iter().map(|&x| w(x)).collect();
            let whalf: Vec<C64> = (0..=n)
                .map(|i| w(grid.x_min + (i as f64 + 0.5) * dx))
                .collect();
            for i in 0..n {
                m[[i, i]] = c * wi[i] * (whalf[i] + whalf[i + 1]);
                if i + 1 < n {
                    let off = -c * whalf[i + 1] * (wi[i] * wi[i + 1]).sqrt();
                    m[[i, i + 1]] = off;
                    m[[i + 1, i]] = off;
                }
            }
        }
        (Some(dm), Scheme::Order4) => {
            // Expanded form −h²(w²∂² + w w′ ∂), w = 1/φ′, with 4th-order
            // centered stencils (2nd-order next to the boundary, where
            // Dirichlet eigenfunctions are negligible). The kinetic sign is
            // folded in: −h²w²·∂² stencil and −h²(w w′)·∂ stencil.
            let c2 = h * h / (dx * dx);
            let c1 = h * h / dx;
            for i in 0..n {
                let x = xs[i];
                let p1 = dm.phi_d1(x);
                let p2 = dm.phi_d2(x);
                let w2 = C64::new(1.0, 0.0) / (p1 * p1);
                let wwp = -p2 / (p1 * p1 * p1); // w·w′ = −φ″/φ′³
                if i >= 2 && i + 2 < n {
                    // ∂² = (−1, 16, −30, 16, −1)/12dx²
                    for (o, s) in [(-2i64, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0)] {
                        let j = (i as i64 + o) as usize;
                        m[[i, j]] += w2 * (-s * c2 / 12.0);
                    }
                    // ∂ = (1, −8, 0, 8, −1)/12dx
                    for (o, s) in [(-2i64, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)] {
                        let j = (i as i64 + o) as usize;
                        m[[i, j]] += wwp * (-s * c1 / 12.0);
                    }
                } else {
                    m[[i, i]] += w2 * (2.0 * c2);
                    if i > 0 {
                        m[[i, i - 1]] += w2 * (-c2) + wwp * (0.5 * c1);
                    }
                    if i + 1 < n {
                        m[[i, i + 1]] += w2 * (-c2) + wwp * (-0.5 * c1);
                    }
                }
            }
        }
    }

    for (i, &x) in xs.iter().enumerate() {
        m[[i, i]] += v_at(x)?;
    }

    Ok(DiscretizedOperator {
        matrix: m,
        grid: *grid,
        meta: OpMeta {
            h,
            mu,
            theta: map.map_or(0.0, |d| d.theta),
            kind,
            resolution_warning: dx > h / 10.0,
        },
        absorber_rank: None,
        absorber: None,
        basis: None,
    })
}

/// P^μ_θ: distorted kinetic part plus V^μ(φ(x)) through the sector
/// evaluator (|Im ln φ(x)| ≤ arctan θ < 2μ for θ ≤ μ).
pub fn assemble_distorted(
    approx: &AnalyticApproximation,
    map: &DistortionMap,
    h: f64,
    grid: &GridSpec,
) -> Result<DiscretizedOperator> {
    if map.theta > approx.mu && !approx.exact_mode {
        return Err(Error::Domain(format!(
            "θ = {} > μ = {}: deformed arguments leave the sector",
            map.theta, approx.mu
        )));
    }
    let v_at = |x: f64| -> Result<C64> {
        if x == 0.0 {
            return Ok(C64::new(approx.ext.source.eval(0.0), 0.0));
        }
        let r = C64::new(x.abs(), map.theta * map.profile.b(x.abs()));
        approx.eval_sector(r, x.signum())
    };
    assemble_core(&v_at, Some(map), h, grid, OpKind::Distorted, approx.mu)
}

/// Undistorted operator −h²Δ + V_fun (oracle assembly; θ = 0).
pub fn assemble_plain(
    v_fun: &dyn Fn(f64) -> f64,
    h: f64,
    grid: &GridSpec,
) -> Result<DiscretizedOperator> {
    assemble_core(
        &|x| Ok(C64::new(v_fun(x), 0.0)),
        None,
        h,
        grid,
        OpKind::Free,
        0.0,
    )
}

/// Uniform-dilation oracle for entire potentials: e^{−2iθ}(−h²Δ) + V(e^{iθ}x).
pub fn assemble_uniform_dilation(
    v: &Potential,
    theta: f64,
    h: f64,
    grid: &GridSpec,
) -> Result<DiscretizedOperator> {
    let rot = C64::from_polar(1.0, theta);
    let kin_rot = C64::from_polar(1.0, -2.0 * theta);
    let mut op = assemble_core(
        &|x| {
            v.eval_complex(rot * x).ok_or_else(|| {
                Error::Domain(format!(
                    "potential `{}` has no entire continuation",
                    v.name
                ))
            })
        },
        None,
        h,
        grid,
        OpKind::Distorted,
        0.0,
    )?;
    // rotate the kinetic part: diagonal V was added after, so subtract/re-add
    let xs = grid.points();
    let vdiag: Vec<C64> = xs
        .iter()
        .map(|&x| v.eval_complex(rot * x).unwrap())
        .collect();
    for i in 0..grid.n_points {
        op.matrix[[i, i]] -= vdiag[i];
    }
    op.matrix.mapv_inplace(|c| c * kin_rot);
    for i in 0..grid.n_points {
        op.matrix[[i, i]] += vdiag[i];
    }
    op.meta.theta = theta;
    Ok(op)
}

/// Options for the absorber.
#[derive(Debug, Clone)]
pub struct ReferenceOptions {
    /// Absorber strength; None → 1 + sampled sup|V′|.
    pub c0: Option<f64>,
    /// Spatial scale R of the auxiliary oscillator h²D² + R⁻²x².
    pub r: f64,
    /// Energy λ₀ entering the χ₀ plateau [0, 1 + 2λ₀ + sup|V|].
    pub lambda0: f64,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        ReferenceOptions {
            c0: None,
            r: 10.0,
            lambda0: 1.0,
        }
    }
}

/// P̃^μ_θ = P^μ_θ − iθK with K = C₀χ₀(h²D² + R⁻²x²) applied spectrally.
pub fn assemble_reference(
    op: &DiscretizedOperator,
    v: &Potential,
    opts: &ReferenceOptions,
) -> Result<DiscretizedOperator> {
    if op.meta.kind != OpKind::Distorted {
        return Err(Error::Precondition(
            "reference operator must be built from a distorted one".into(),
        ));
    }
    let sup_v1 = v.sup_deriv(1, 25.0, 2000);
    let c0 = opts.c0.unwrap_or(1.0 + sup_v1);
    if c0 <= sup_v1 {
        return Err(Error::Precondition(format!(
            "C₀ = {c0} must exceed sup|V′| = {sup_v1}"
        )));
    }
    let n = op.grid.n_points;
    let h = op.meta.h;
    // auxiliary oscillator on the same grid
    let mut osc = laplacian(&op.grid, h);
    for (i, x) in op.grid.points().iter().enumerate() {
        osc[[i, i]] += (x / opts.r) * (x / opts.r);
    }
    let (evals, evecs) = eigh_real(&osc)?;
    // χ₀: 1 on the plateau, smooth fall over one unit
    let sup_v = v.sup_deriv(0, 25.0, 2000);
    let plateau = 1.0 + 2.0 * opts.lambda0 + sup_v;
    let chi0 = crate::cutoff::SmoothStep::new(plateau, plateau + 1.0);
    let weights: Vec<f64> = evals.iter().map(|&e| 1.0 - chi0.value(e)).collect();
    let m_rank = weights.iter().filter(|&&w| w > 1e-14).count();
    // K = C₀ Σ_k w_k v_k v_kᵀ, assembled densely
    let mut k = Array2::<f64>::zeros((n, n));
    for (kk, &wgt) in weights.iter().enumerate() {
        if wgt <= 1e-14 {
            continue;
        }
        let col = evecs.column(kk);
        for i in 0..n {
            let ci = c0 * wgt * col[i];
            if ci == 0.0 {
                continue;
            }
            for j in 0..n {
                k[[i, j]] += ci * col[j];
            }
        }
    }
    let theta = op.meta.theta;
    let mut matrix = op.matrix.clone();
    for i in 0..n {
        for j in 0..n {
            matrix[[i, j]] -= C64::new(0.0, theta * k[[i, j]]);
        }
    }
    // absorber eigenbasis: the active columns, ordered by oscillator level
    let mut basis = Array2::<f64>::zeros((n, m_rank));
    let mut bj = 0;
    for (kk, &wgt) in weights.iter().enumerate() {
        if wgt > 1e-14 {
            basis.column_mut(bj).assign(&evecs.column(kk));
            bj += 1;
        }
    }
    Ok(DiscretizedOperator {
        matrix,
        grid: op.grid,
        meta: OpMeta {
            kind: OpKind::Reference,
            ..op.meta.clone()
        },
        absorber_rank: Some(m_rank),
        absorber: Some(k),
        basis: Some(basis),
    })
}

/// Numerical-range diagnostics at energy z.
#[derive(Debug, Clone, serde::Serialize)]
pub struct NumericalRangeReport {
    /// min over random unit vectors of |⟨(P−z)u,u⟩| (upper estimate).
    pub randomized_min: f64,
    /// Im z − λ_max(Im_H P): exact lower bound on −Im⟨(P−z)u,u⟩ ≤ |⟨…⟩|.
    pub hermitian_bound: f64,
    /// hermitian_bound − Im z / 2.
    pub margin: f64,
}

/// Estimates min |⟨(P^μ_θ−z)u,u⟩|/‖u‖² and its margin against Im z/2.
pub fn numerical_range_bound(
    op: &DiscretizedOperator,
    z: C64,
    trials: usize,
    seed: u64,
) -> Result<NumericalRangeReport> {
    use ndarray_linalg::Norm;
    use rand::Rng;
    use rand::SeedableRng;
    let n = op.grid.n_points;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut randomized_min = f64::INFINITY;
    for _ in 0..trials {
        let mut u = ndarray::Array1::<C64>::zeros(n);
        for c in u.iter_mut() {
            *c = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
        let nrm = u.norm_l2();
        u.mapv_inplace(|c| c / nrm);
        let pu = op.matrix.dot(&u);
        let q: C64 = u
            .iter()
            .zip(pu.iter())
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            - z;
        randomized_min = randomized_min.min(q.norm());
    }
    // Im⟨(P−z)u,u⟩ = ⟨Im_H(P)u,u⟩ − Im z ≤ λ_max(Im_H P) − Im z, so
    // |⟨(P−z)u,u⟩| ≥ Im z − λ_max(Im_H P) whenever the right side is ≥ 0.
    let imh = crate::linalg::imag_hermitian_part(&op.matrix);
    let lam_max = *crate::linalg::eigh_complex_vals(&imh)?
        .last()
        .ok_or_else(|| Error::LinAlg("empty spectrum".into()))?;
    let hermitian_bound = z.im - lam_max;
    Ok(NumericalRangeReport {
        randomized_min,
        hermitian_bound,
        margin: hermitian_bound - z.im / 2.0,
    })
}

/// Per-z resolvent norm samples of a reference operator and the fitted C̃
/// with ‖(z−P̃)^{−1}‖ ≤ C̃/θ.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ResolventFit {
    pub c_tilde: f64,
    /// (Re z, Im z, ‖(z−P̃)^{−1}‖) samples; singular points flagged out.
    pub samples: Vec<(f64, f64, f64)>,
    pub flagged: usize,
}

/// Scans ‖(z−P̃^μ_θ)^{−1}‖ over z_grid and returns θ·sup as the fitted C̃.
pub fn reference_resolvent_bound(
    op: &DiscretizedOperator,
    z_grid: &[C64],
) -> Result<ResolventFit> {
    if op.meta.kind != OpKind::Reference {
        return Err(Error::Precondition(
            "resolvent bound is for the reference operator".into(),
        ));
    }
    let mut samples = Vec::new();
    let mut flagged = 0;
    let mut sup: f64 = 0.0;
    for &z in z_grid {
        match crate::linalg::resolvent_norm(&op.matrix, z, 60, 17) {
            Ok(nrm) if nrm.is_finite() => {
                sup = sup.max(nrm);
                samples.push((z.re, z.im, nrm));
            }
            _ => {
                flagged += 1;
                samples.push((z.re, z.im, f64::INFINITY));
            }
        }
    }
    Ok(ResolventFit {
        c_tilde: op.meta.theta * sup,
        samples,
        flagged,
    })
}
