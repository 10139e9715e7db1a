//! Grushin reduction: the resolvent of the distorted operator is expressed
//! through an M×M effective matrix E^{−+}(z) built on the absorber eigenbasis,
//! (P^μ_θ−z)^{−1} = E(z) − E⁺(z)E^{−+}(z)^{−1}E⁻(z), and the resonances are
//! exactly the zeros of D(z) = det E^{−+}(z), located here by
//! argument-principle winding counts on boxes.

use crate::error::{Error, Result};
use crate::linalg::{det, singular_values, CMat, CVec, Lu};
use crate::operator::{DiscretizedOperator, OpKind};
use ndarray::Array2;
use num_complex::Complex64 as C64;

/// The reduction at one energy z, with the reference LU cached.
pub struct GrushinSystem {
    pub z: C64,
    pub theta: f64,
    /// Absorber rank M.
    pub m: usize,
    /// E^{−+}(z), M×M.
    pub e_minus_plus: CMat,
    /// D(z) = det E^{−+}(z).
    pub d: C64,
    /// Absorber eigenbasis (columns).
    pub basis: Array2<f64>,
    /// (P̃^μ_θ − z) factorized.
    lu: Lu,
    /// Columns (P̃−z)^{−1}Ke_j, reused by E⁺.
    qke: CMat,
}

/// Assemble the reduction from a reference operator at energy z.
///
/// Sign note: writing P = P̃ + iθK and expanding the block-inverse identity
/// gives E⁺δ_j = e_j − iθ(1−T_M)(P̃−z)^{−1}Ke_j and
/// E^{−+}v⁺ = −v⁺ − iθ(Σ_ℓ v_ℓ⁺⟨(P̃−z)^{−1}Ke_ℓ, e_j⟩)_j; the +iθ variant
/// does not close the identity (the K-terms then add instead of cancel),
/// which the resolvent-identity test pins down to machine precision.
pub fn build_grushin(refop: &DiscretizedOperator, z: C64) -> Result<GrushinSystem> {
    if refop.meta.kind != OpKind::Reference {
        return Err(Error::Precondition(
            "Grushin reduction needs the reference operator".into(),
        ));
    }
    let basis = refop
        .basis
        .clone()
        .ok_or_else(|| Error::Precondition("reference operator lacks its basis".into()))?;
    let k = refop
        .absorber
        .as_ref()
        .ok_or_else(|| Error::Precondition("reference operator lacks its absorber".into()))?;
    let theta = refop.meta.theta;
    let n = refop.grid.n_points;
    let m = basis.ncols();

    let mut a = refop.matrix.clone();
    for i in 0..n {
        a[[i, i]] -= z;
    }
    let lu = Lu::new(&a)
        .map_err(|_| Error::LinAlg(format!("P̃ − z singular at z = {z} (outside the window?)")))?;

    // columns Q K e_j
    let mut qke = CMat::zeros((n, m));
    for j in 0..m {
        let kej: CVec = k
            .dot(&basis.column(j).to_owned())
            .iter()
            .map(|&v| C64::new(v, 0.0))
            .collect();
        qke.column_mut(j).assign(&lu.solve(&kej)?);
    }

    let mut emp = CMat::zeros((m, m));
    for j in 0..m {
        emp[[j, j]] = C64::new(-1.0, 0.0);
        for l in 0..m {
            // ⟨QKe_ℓ, e_j⟩ with real e_j
            let ip: C64 = qke
                .column(l)
                .iter()
                .zip(basis.column(j).iter())
                .map(|(q, e)| q * e)
                .sum();
            emp[[j, l]] -= C64::new(0.0, theta) * ip;
        }
    }
    let d = det(&emp)?;
    Ok(GrushinSystem {
        z,
        theta,
        m,
        e_minus_plus: emp,
        d,
        basis,
        lu,
        qke,
    })
}

impl GrushinSystem {
    /// ‖E^{−+}‖₂ (spectral norm).
    pub fn e_minus_plus_norm(&self) -> Result<f64> {
        Ok(singular_values(&self.e_minus_plus)?[0])
    }

    /// ‖E^{−+}(z)^{−1}‖₂, or Err if numerically singular.
    pub fn e_minus_plus_inv_norm(&self) -> Result<f64> {
        let s = singular_values(&self.e_minus_plus)?;
        let smin = s[s.len() - 1];
        if smin < 1e-14 * s[0] {
            return Err(Error::Validation(format!(
                "E^{{-+}} singular at z = {}: numerically a resonance",
                self.z
            )));
        }
        Ok(1.0 / smin)
    }

    fn project_out(&self, v: &CVec) -> CVec {
        // (1 − T_M)v with T_M = Σ e_j⟨·,e_j⟩
        let mut out = v.clone();
        for j in 0..self.m {
            let c: C64 = v
                .iter()
                .zip(self.basis.column(j).iter())
                .map(|(a, e)| a * e)
                .sum();
            for (o, e) in out.iter_mut().zip(self.basis.column(j).iter()) {
                *o -= c * e;
            }
        }
        out
    }

    /// E(z)v = (1−T_M)(P̃−z)^{−1}v.
    pub fn e_apply(&self, v: &CVec) -> Result<CVec> {
        Ok(self.project_out(&self.lu.solve(v)?))
    }

    /// E⁺(z)v⁺ = Σ v_j⁺ (e_j − iθ(1−T_M)(P̃−z)^{−1}Ke_j).
    pub fn e_plus_apply(&self, vplus: &CVec) -> CVec {
        let n = self.basis.nrows();
        let mut out = CVec::zeros(n);
        for j in 0..self.m {
            let corr = self.project_out(&self.qke.column(j).to_owned());
            for i in 0..n {
                out[i] += vplus[j] * (C64::new(self.basis[[i, j]], 0.0)
                    - C64::new(0.0, self.theta) * corr[i]);
            }
        }
        out
    }

    /// E⁻(z)v = (⟨(P̃−z)^{−1}v, e_j⟩)_j.
    pub fn e_minus_apply(&self, v: &CVec) -> Result<CVec> {
        let q = self.lu.solve(v)?;
        let mut out = CVec::zeros(self.m);
        for j in 0..self.m {
            out[j] = q
                .iter()
                .zip(self.basis.column(j).iter())
                .map(|(a, e)| a * e)
                .sum();
        }
        Ok(out)
    }
}

/// Relative Frobenius residual of (P^μ_θ−z)^{−1} = E − E⁺(E^{−+})^{−1}E⁻,
/// both sides computed by independent dense solves.
pub fn verify_resolvent_identity(
    sys: &GrushinSystem,
    dist: &DiscretizedOperator,
) -> Result<f64> {
    let n = dist.grid.n_points;
    let z = sys.z;
    // left side directly
    let mut a = dist.matrix.clone();
    for i in 0..n {
        a[[i, i]] -= z;
    }
    let lhs = Lu::new(&a)
        .map_err(|_| Error::LinAlg(format!("P − z singular at z = {z}")))?
        .inverse(n)?;

    // right side from the reduction pieces
    sys.e_minus_plus_inv_norm()?; // distinct signal if singular
    let q = sys.lu.inverse(n)?;
    let mut rhs = CMat::zeros((n, n));
    // E = (1−T_M)Q column by column; then subtract E⁺ (E^{−+})^{-1} E⁻
    let emp_lu = Lu::new(&sys.e_minus_plus)?;
    for c in 0..n {
        let qc = q.column(c).to_owned();
        let ec = sys.project_out(&qc);
        // E⁻ applied to the unit vector δ_c is ⟨Qδ_c, e_j⟩ = column of BᵀQ
        let mut em = CVec::zeros(sys.m);
        for j in 0..sys.m {
            em[j] = qc
                .iter()
                .zip(sys.basis.column(j).iter())
                .map(|(a, e)| a * e)
                .sum();
        }
        let y = emp_lu.solve(&em)?;
        let corr = sys.e_plus_apply(&y);
        for r in 0..n {
            rhs[[r, c]] = ec[r] - corr[r];
        }
    }
    let diff = &lhs - &rhs;
    Ok(crate::linalg::fro_norm(&diff) / crate::linalg::fro_norm(&lhs))
}

/// Rectangle in the z-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZBox {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
}

impl ZBox {
    pub fn center(&self) -> C64 {
        C64::new(0.5 * (self.re_lo + self.re_hi), 0.5 * (self.im_lo + self.im_hi))
    }

    pub fn diam(&self) -> f64 {
        (self.re_hi - self.re_lo).hypot(self.im_hi - self.im_lo)
    }

    fn corners(&self) -> [C64; 4] {
        [
            C64::new(self.re_lo, self.im_lo),
            C64::new(self.re_hi, self.im_lo),
            C64::new(self.re_hi, self.im_hi),
            C64::new(self.re_lo, self.im_hi),
        ]
    }
}

/// Phase increment of D along [a, b], refining until each step turns < 1 rad.
fn arg_increment(
    refop: &DiscretizedOperator,
    a: C64,
    da: C64,
    b: C64,
    db: C64,
    depth: usize,
) -> Result<f64> {
    let floor = 1e-280;
    if da.norm() < floor || db.norm() < floor {
        return Err(Error::Validation(
            "contour passes through a zero of D".into(),
        ));
    }
    let step = (db / da).arg();
    if step.abs() < 1.0 {
        return Ok(step);
    }
    if depth == 0 {
        return Err(Error::Validation(
            "winding contour too close to a zero of D (refinement exhausted)".into(),
        ));
    }
    let mid = 0.5 * (a + b);
    let dm = build_grushin(refop, mid)?.d;
    Ok(arg_increment(refop, a, da, mid, dm, depth - 1)?
        + arg_increment(refop, mid, dm, b, db, depth - 1)?)
}

/// Argument-principle count of zeros of D inside the box (with multiplicity).
pub fn winding_number(
    refop: &DiscretizedOperator,
    zbox: ZBox,
    nodes_per_side: usize,
) -> Result<i64> {
    let corners = zbox.corners();
    let mut pts = Vec::new();
    for s in 0..4 {
        let (a, b) = (corners[s], corners[(s + 1) % 4]);
        for i in 0..nodes_per_side {
            let t = i as f64 / nodes_per_side as f64;
            pts.push(a + (b - a) * t);
        }
    }
    let ds: Result<Vec<C64>> = pts.iter().map(|&z| Ok(build_grushin(refop, z)?.d)).collect();
    let ds = ds?;
    let mut total = 0.0;
    for i in 0..pts.len() {
        let j = (i + 1) % pts.len();
        total += arg_increment(refop, pts[i], ds[i], pts[j], ds[j], 16)?;
    }
    let w = total / (2.0 * std::f64::consts::PI);
    let wi = w.round();
    if (w - wi).abs() > 0.05 {
        return Err(Error::Validation(format!(
            "winding number {w} not close to an integer"
        )));
    }
    Ok(wi as i64)
}

/// Locate the zeros of D in the box by recursive bisection of winding counts;
/// returns (center, multiplicity) pairs once boxes shrink below tol.
pub fn localize_zeros(
    refop: &DiscretizedOperator,
    zbox: ZBox,
    tol: f64,
    nodes_per_side: usize,
) -> Result<Vec<(C64, i64)>> {
    // retry bisection with a shifted split if the cut lands on a zero
    fn split(b: &ZBox, frac: f64) -> (ZBox, ZBox) {
        if b.re_hi - b.re_lo >= b.im_hi - b.im_lo {
            let m = b.re_lo + frac * (b.re_hi - b.re_lo);
            (
                ZBox { re_hi: m, ..*b },
                ZBox { re_lo: m, ..*b },
            )
        } else {
            let m = b.im_lo + frac * (b.im_hi - b.im_lo);
            (
                ZBox { im_hi: m, ..*b },
                ZBox { im_lo: m, ..*b },
            )
        }
    }
    let w = winding_number(refop, zbox, nodes_per_side)?;
    if w == 0 {
        return Ok(Vec::new());
    }
    if zbox.diam() < tol {
        return Ok(vec![(zbox.center(), w)]);
    }
    for frac in [0.5, 0.43, 0.57, 0.37] {
        let (lo, hi) = split(&zbox, frac);
        let try_both = (|| -> Result<Vec<(C64, i64)>> {
            let mut out = localize_zeros(refop, lo, tol, nodes_per_side)?;
            out.extend(localize_zeros(refop, hi, tol, nodes_per_side)?);
            Ok(out)
        })();
        match try_both {
            Ok(v) => return Ok(v),
            Err(Error::Validation(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Validation(
        "could not bisect the box away from zeros of D".into(),
    ))
}

/// CSV of log|D| over a z-grid (columns re, im, log_abs_d).
pub fn log_abs_d_csv(refop: &DiscretizedOperator, z_grid: &[C64]) -> Result<String> {
    let mut out = String::from("re,im,log_abs_d\n");
    for &z in z_grid {
        let d = build_grushin(refop, z)?.d;
        out.push_str(&format!("{},{},{}\n", z.re, z.im, d.norm().max(1e-300).ln()));
    }
    Ok(out)
}
