use super::{min_snr, CodeSpec, OperatingPoint, RateMatchError};
use crate::model::{info_budget, LinkParams};

/// Upper end of the modulation-variance search range.
pub const V_MOD_MAX: f64 = 1e3;

/// Number of log-spaced points in the bracketing scan.
pub const V_MOD_SCAN_POINTS: usize = 256;

const GOLDEN_REL_TOL: f64 = 1e-8;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Channel transmittance that puts a link with modulation `v_mod` exactly at
/// the code threshold, capped at 1.
fn matched_t_ch(v_mod: f64, noise: f64, t_rec: f64, min_snr: f64) -> f64 {
    (min_snr * noise / (t_rec * v_mod)).min(1.0)
}

/// Finds the modulation variance that maximises the secret fraction of a
/// link held at the code threshold, the channel transmittance following from
/// the SNR constraint.
///
/// The search covers `[v_min, V_MOD_MAX]` where `v_min` is the modulation at
/// which the constraint requires `t_ch = 1`. A coarse log scan picks the best
/// grid point, golden-section search refines it inside the neighbouring
/// interval and the better of the two is kept (ties go to smaller `v_mod`).
///
/// A maximum on the `t_ch = 1` edge is a valid constrained optimum. A
/// maximum at `V_MOD_MAX` means the search range is too small and is
/// reported as a failure.
pub fn optimize_operating_point(
    xi_ch: f64,
    t_rec: f64,
    xi_rec: f64,
    code: &CodeSpec,
) -> Result<OperatingPoint, RateMatchError> {
    code.validate()?;
    let probe = LinkParams::new(0.0, 1.0, xi_ch, t_rec, xi_rec, 0.0)?;
    let noise = probe.noise_variance();
    let ms = min_snr(code);
    let v_min = ms * noise / t_rec;
    if !(v_min < V_MOD_MAX) {
        return Err(RateMatchError::Infeasible(format!(
            "threshold SNR {ms:.6} needs v_mod >= {v_min:.6} even at t_ch = 1 (search limit {V_MOD_MAX})"
        )));
    }

    let fixed_b = code.bits_per_symbol();
    let link_at = |v: f64| -> LinkParams {
        let t_ch = if v <= v_min {
            1.0
        } else {
            matched_t_ch(v, noise, t_rec, ms)
        };
        probe.with_v_mod(v).with_t_ch(t_ch)
    };
    let objective = |v: f64| -> Result<f64, RateMatchError> {
        Ok(info_budget(&link_at(v), code.beta, Some(fixed_b))?.r())
    };

    let grid = log_grid(v_min, V_MOD_MAX, V_MOD_SCAN_POINTS);
    let mut best = (0usize, f64::NEG_INFINITY);
    for (k, &v) in grid.iter().enumerate() {
        let r = objective(v)?;
        if !r.is_finite() {
            return Err(RateMatchError::OptimizationFailure(format!(
                "non-finite secret fraction at v_mod = {v}"
            )));
        }
        if r > best.1 {
            best = (k, r);
        }
    }
    let (k, r_grid) = best;
    if k == grid.len() - 1 {
        return Err(RateMatchError::OptimizationFailure(format!(
            "secret fraction still increasing at v_mod = {V_MOD_MAX}"
        )));
    }

    let lo = grid[k.saturating_sub(1)];
    let hi = grid[k + 1];
    let (v_gold, r_gold) = golden_section_max(lo, hi, &objective)?;
    let v_best = if r_gold > r_grid || (r_gold == r_grid && v_gold < grid[k]) {
        v_gold
    } else {
        grid[k]
    };
    OperatingPoint::pinned(link_at(v_best), code.clone(), 1.0)
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let mut grid: Vec<f64> = (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect();
    grid[0] = lo;
    grid[n - 1] = hi;
    grid
}

fn golden_section_max<F>(mut lo: f64, mut hi: f64, f: &F) -> Result<(f64, f64), RateMatchError>
where
    F: Fn(f64) -> Result<f64, RateMatchError>,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > GOLDEN_REL_TOL * 0.5 * (lo.abs() + hi.abs()) {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}
