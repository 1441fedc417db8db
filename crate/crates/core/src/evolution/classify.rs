use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{MuhsError, Result};
use crate::spectral::{apply_a, derivative, mean, RealField};

const MEAN_ZERO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum VerdictTag {
    Global,
    BlowupCertified { t_bound: f64 },
    BlowupHS { t_crit: f64 },
    SteadyConstant,
    Indeterminate,
}

/// Outcome of the a-priori criteria on initial data, with a readable reason.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub tag: VerdictTag,
    pub justification: String,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self.tag {
            VerdictTag::Global => "Global",
            VerdictTag::BlowupCertified { .. } => "BlowupCertified",
            VerdictTag::BlowupHS { .. } => "BlowupHS",
            VerdictTag::SteadyConstant => "SteadyConstant",
            VerdictTag::Indeterminate => "Indeterminate",
        }
    }

    /// True when breaking in finite time is guaranteed, either by the mean-slope
    /// criterion or by the exact zero-mean solution.
    pub fn is_certified_blowup(&self) -> bool {
        matches!(
            self.tag,
            VerdictTag::BlowupCertified { .. } | VerdictTag::BlowupHS { .. }
        )
    }
}

/// Breaking time of the zero-mean reduction,
/// `T = (2/sqrt(-2a)) arctan(sqrt(-2a)/|min u0'|)` with `a = -(1/2) int u0'^2`.
pub fn hs_blowup_time(u0: &RealField) -> Result<f64> {
    let mu = mean(u0);
    if mu.abs() > MEAN_ZERO {
        return Err(MuhsError::Precondition(format!(
            "breaking-time formula needs zero mean, got {mu:.3e}"
        )));
    }
    let ux = derivative(u0, 1);
    let a = -0.5 * mean(&(&ux * &ux));
    let slope = ux.min();
    if !(a < 0.0) || !(slope < 0.0) {
        return Err(MuhsError::Precondition("initial data is constant".into()));
    }
    let s = (-2.0 * a).sqrt();
    Ok(2.0 / s * (s / slope.abs()).atan())
}

/// Slack for the sign test on `Au`: a relative floor plus the transform round-off of a
/// second derivative, which grows like `(pi n)^2`.
fn momentum_sign_tolerance(u: &RealField, m: &RealField) -> f64 {
    let scale = PI * u.n() as f64;
    1e-12 * m.max_abs().max(1.0) + f64::EPSILON * scale * scale * u.max_abs()
}

fn is_constant(u: &RealField) -> bool {
    u.max() - u.min() <= 1e-12 * u.max_abs().max(1.0)
}

pub fn classify_initial(u0: &RealField) -> Verdict {
    let mu = mean(u0);
    if is_constant(u0) {
        return Verdict {
            tag: VerdictTag::SteadyConstant,
            justification: format!("constant data u = {mu:.6} is a steady state"),
        };
    }
    let m = apply_a(u0);
    let tol = momentum_sign_tolerance(u0, &m);
    if mu.abs() > MEAN_ZERO && (m.min() >= -tol || m.max() <= tol) {
        let sign = if m.min() >= -tol { ">=" } else { "<=" };
        return Verdict {
            tag: VerdictTag::Global,
            justification: format!(
                "global (nonzero mean with sign-definite momentum): mu = {mu:.6}, Au0 {sign} 0"
            ),
        };
    }
    if mu.abs() <= MEAN_ZERO {
        let t = hs_blowup_time(u0).expect("nonconstant zero-mean data");
        return Verdict {
            tag: VerdictTag::BlowupHS { t_crit: t },
            justification: format!("BlowupHS (zero-mean breaking time): T = {t:.4}"),
        };
    }
    let ux = derivative(u0, 1);
    let norm = ux.l2();
    if 4.0 * mu.abs() <= norm * (1.0 + 1e-13) {
        let t = 2.0 / ux.min().abs();
        return Verdict {
            tag: VerdictTag::BlowupCertified { t_bound: t },
            justification: format!(
                "BlowupCertified (mean-slope criterion): 4|mu| = {:.4} <= {:.4} = ||u0'||; T <= {:.4}",
                4.0 * mu.abs(),
                norm,
                t
            ),
        };
    }
    Verdict {
        tag: VerdictTag::Indeterminate,
        justification: format!(
            "Indeterminate: momentum changes sign and 4|mu| = {:.4} > {:.4} = ||u0'||",
            4.0 * mu.abs(),
            norm
        ),
    }
}
