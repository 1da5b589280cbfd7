use crate::{sigma_max, FrequencyGrid, LtiError, StateSpace};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HinfNorm {
    pub value: f64,
    pub peak_omega: f64,
}

/// Peak of σ̄[G(jω)] over `grid`, refined by golden-section search between
/// the neighbours of the discrete maximiser.
pub fn hinf_norm(model: &StateSpace, grid: &FrequencyGrid) -> Result<HinfNorm, LtiError> {
    model.require_stable()?;
    let f = |w: f64| -> Result<f64, LtiError> { Ok(sigma_max(&model.eval_jw(w)?)) };
    let pts = grid.points();
    let mut best = (0usize, f64::NEG_INFINITY);
    for (k, &w) in pts.iter().enumerate() {
        let v = f(w)?;
        if v > best.1 {
            best = (k, v);
        }
    }
    let k = best.0;
    let lo = pts[k.saturating_sub(1)];
    let hi = pts[(k + 1).min(pts.len() - 1)];
    let (w_ref, v_ref) = golden_max(&f, lo.ln(), hi.ln())?;
    if v_ref > best.1 {
        Ok(HinfNorm { value: v_ref, peak_omega: w_ref })
    } else {
        Ok(HinfNorm { value: best.1, peak_omega: pts[k] })
    }
}

/// Golden-section maximisation of `f(e^x)` on `[a, b]`; returns `(e^x*, f)`.
pub fn golden_max<F>(f: &F, mut a: f64, mut b: f64) -> Result<(f64, f64), LtiError>
where
    F: Fn(f64) -> Result<f64, LtiError>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    if b <= a {
        let w = a.exp();
        return Ok((w, f(w)?));
    }
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1.exp())?;
    let mut f2 = f(x2.exp())?;
    for _ in 0..60 {
        if (b - a).abs() < 1e-10 {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2.exp())?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1.exp())?;
        }
    }
    Ok(if f1 >= f2 { (x1.exp(), f1) } else { (x2.exp(), f2) })
}
