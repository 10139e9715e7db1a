//! Plot-data CSV writers for the CLI reports (the JSON side is plain
//! serde_json on the report structs).

use crate::approximation::{AnalyticApproximation, DecayFitReport};
use crate::error::Result;
use crate::experiments::{NontrapReport, ShapeReport};
use crate::ladder::LadderRun;
use crate::potential::Potential;

/// x, re(V^μ), im(V^μ), V, diff on a real grid.
pub fn approx_csv(approx: &AnalyticApproximation, v: &Potential, x_grid: &[f64]) -> Result<String> {
    let mut out = String::from("x,re_vmu,im_vmu,v,diff\n");
    for &x in x_grid {
        let re = approx.eval_real(x)?;
        let im = approx.imag_on_real(x)?;
        let vv = v.eval(x);
        out.push_str(&format!("{x},{re},{im},{vv},{}\n", re - vv));
    }
    Ok(out)
}

/// mu, sup of the decay fit samples.
pub fn verify_csv(report: &DecayFitReport) -> String {
    let mut out = String::from("mu,sup\n");
    for (mu, sup) in &report.samples {
        out.push_str(&format!("{mu},{sup}\n"));
    }
    out
}

/// One row per chain per rung: chain, rung, re, im, case.
pub fn ladder_csv(run: &LadderRun) -> String {
    let mut out = String::from("chain,rung,re,im,case\n");
    for (i, ch) in run.chains.iter().enumerate() {
        let case = match ch.case {
            crate::ladder::CaseTag::A => "A".to_string(),
            crate::ladder::CaseTag::B { exit_rung } => format!("B:{exit_rung}"),
        };
        for (j, z) in ch.values.iter().enumerate() {
            out.push_str(&format!(
                "{i},{},{},{},{case}\n",
                ch.start_rung + j,
                z.re,
                z.im
            ));
        }
    }
    out
}

/// One row per found level per h: h, mu, theta, level, re, im, re_defect.
pub fn shape_csv(report: &ShapeReport) -> String {
    let mut out = String::from("h,mu,theta,level,re,im,re_defect\n");
    for run in &report.runs {
        for (k, lv) in run.levels.iter().enumerate() {
            if let Some(z) = lv {
                let d = run.re_defects[k].unwrap_or(f64::NAN);
                out.push_str(&format!(
                    "{},{},{},{k},{},{},{d}\n",
                    run.h, run.mu, run.theta, z.re, z.im
                ));
            }
        }
    }
    out
}

/// One row per h: h, mu, count, min_distance.
pub fn nontrap_csv(report: &NontrapReport) -> String {
    let mut out = String::from("h,mu,count,min_distance\n");
    for run in &report.runs {
        out.push_str(&format!(
            "{},{},{},{}\n",
            run.h, run.mu, run.count, run.min_distance
        ));
    }
    out
}
