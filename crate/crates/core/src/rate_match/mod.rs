//! Code-rate matching for a fixed-rate reconciliation code.
//!
//! A code of rate `R` that reconciles with efficiency `β` needs the link to
//! deliver at least `SNR_min = 2^{2R/β} − 1`. When the link is better than
//! that, Bob can pin the SNR back to `SNR_min` by adding trusted Gaussian
//! noise of variance
//!
//! ```text
//! ξ_art = T·V_mod / SNR_min − 2 − ξ_ch − ξ_rec
//! ```
//!
//! to his quadratures. This keeps the code's efficiency and lowers the
//! Holevo bound at the same time.

mod optimize;
mod sweep;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{self, info_budget, InfoBudget, LinkParams, ModelError};

pub use optimize::{optimize_operating_point, V_MOD_MAX, V_MOD_SCAN_POINTS};
pub use sweep::{format_sig, sweep_transmittance, RowStatus, SweepRow, SweepTable};

/// Slack on the SNR threshold when checking that a link can feed the code.
pub const THRESHOLD_TOL: f64 = 1e-12;

/// Artificial-noise values this close below zero are rounding and count as 0.
pub const XI_ART_TOL: f64 = 1e-10;

pub const DEFAULT_HEADROOM: f64 = 1.15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateMatchError {
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("link below code threshold: SNR {snr} < {min_snr}")]
    BelowThreshold { snr: f64, min_snr: f64 },
    #[error("infeasible scenario: {0}")]
    Infeasible(String),
    #[error("optimization failed: {0}")]
    OptimizationFailure(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no baseline point at total transmittance {0}")]
    NoBaselinePoint(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A forward-error-correction code, reduced to what rate matching needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub rate: f64,
    pub beta: f64,
    pub label: String,
}

impl CodeSpec {
    pub fn new(rate: f64, beta: f64, label: impl Into<String>) -> Result<Self, RateMatchError> {
        let code = Self {
            rate,
            beta,
            label: label.into(),
        };
        code.validate()?;
        Ok(code)
    }

    pub fn validate(&self) -> Result<(), RateMatchError> {
        if !(self.rate > 0.0 && self.rate < 1.0) {
            return Err(RateMatchError::InvalidCode(format!(
                "rate must be in (0, 1), got {}",
                self.rate
            )));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(RateMatchError::InvalidCode(format!(
                "beta must be in (0, 1], got {}",
                self.beta
            )));
        }
        Ok(())
    }

    /// Built-in codes.
    pub fn presets() -> Vec<CodeSpec> {
        vec![CodeSpec {
            rate: 0.1,
            beta: 0.9395,
            label: "met-ldpc-0.1".into(),
        }]
    }

    pub fn preset(label: &str) -> Option<CodeSpec> {
        Self::presets().into_iter().find(|c| c.label == label)
    }

    /// Bits per symbol this code reconciles: two binary channel uses per
    /// heterodyne symbol.
    pub fn bits_per_symbol(&self) -> f64 {
        2.0 * self.rate
    }
}

/// `2^{2R/β} − 1`.
pub fn min_snr(code: &CodeSpec) -> f64 {
    (2.0 * code.rate / code.beta * std::f64::consts::LN_2).exp_m1()
}

/// Artificial noise that brings `p` (ignoring its own `xi_art`) down to the
/// code threshold. Negative means the link is already below threshold.
pub fn required_artificial_noise(p: &LinkParams, code: &CodeSpec) -> f64 {
    p.total_transmittance() * p.v_mod / min_snr(code) - 2.0 - p.xi_ch - p.xi_rec
}

/// A point supplied from elsewhere, e.g. a punctured/shortened code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselinePoint {
    pub t_total: f64,
    pub snr: f64,
    pub beta_eff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    /// Fixed code used as-is; reconciles `2R` bits whatever the SNR.
    Unmatched,
    /// Hypothetical code of any rate at the nominal efficiency.
    IdealRate,
    /// Fixed code with the SNR pinned to threshold by trusted noise.
    ArtificialNoise,
    /// Externally supplied `(T, SNR, β_eff)` points, evaluated verbatim.
    ExternalBaseline(Vec<BaselinePoint>),
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Unmatched => "unmatched",
            Strategy::IdealRate => "ideal_rate",
            Strategy::ArtificialNoise => "artificial_noise",
            Strategy::ExternalBaseline(_) => "external_baseline",
        }
    }

    /// Parses one of the internal strategy names. `external_baseline` needs
    /// data and is built with [`Strategy::external_baseline`].
    pub fn from_name(name: &str) -> Option<Strategy> {
        match name {
            "unmatched" => Some(Strategy::Unmatched),
            "ideal_rate" => Some(Strategy::IdealRate),
            "artificial_noise" => Some(Strategy::ArtificialNoise),
            _ => None,
        }
    }

    pub fn external_baseline(points: Vec<BaselinePoint>) -> Result<Strategy, RateMatchError> {
        if points.is_empty() {
            return Err(RateMatchError::InvalidArgument(
                "external baseline needs at least one point".into(),
            ));
        }
        for pt in &points {
            let ok = pt.t_total > 0.0
                && pt.t_total <= 1.0
                && pt.snr >= 0.0
                && pt.snr.is_finite()
                && pt.beta_eff > 0.0
                && pt.beta_eff <= 1.0;
            if !ok {
                return Err(RateMatchError::InvalidArgument(format!(
                    "bad baseline point {pt:?}"
                )));
            }
        }
        Ok(Strategy::ExternalBaseline(points))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyResult {
    pub strategy: &'static str,
    /// Link actually evaluated, including the artificial noise used.
    pub params: LinkParams,
    pub budget: InfoBudget,
}

impl StrategyResult {
    pub fn xi_art(&self) -> f64 {
        self.params.xi_art
    }
}

fn check_threshold(p: &LinkParams, code: &CodeSpec) -> Result<(), RateMatchError> {
    let snr = model::snr(p);
    let min = min_snr(code);
    if snr < min - THRESHOLD_TOL {
        return Err(RateMatchError::BelowThreshold { snr, min_snr: min });
    }
    Ok(())
}

/// Rounding residue within [`XI_ART_TOL`] of zero becomes exactly zero.
fn snap_xi_art(xi_art: f64) -> f64 {
    if xi_art <= XI_ART_TOL {
        0.0
    } else {
        xi_art
    }
}

/// Evaluates one strategy on `p`. Any `xi_art` already in `p` is discarded.
///
/// For [`Strategy::ExternalBaseline`] the supplied point whose total
/// transmittance equals `T_ch·T_rec` of `p` is evaluated; there is no
/// interpolation.
pub fn evaluate_strategy(
    strategy: &Strategy,
    p: &LinkParams,
    code: &CodeSpec,
) -> Result<StrategyResult, RateMatchError> {
    code.validate()?;
    let base = p.with_xi_art(0.0);
    base.validate()?;
    let fixed_b = code.bits_per_symbol();
    let (params, budget) = match strategy {
        Strategy::Unmatched => {
            check_threshold(&base, code)?;
            (base, info_budget(&base, code.beta, Some(fixed_b))?)
        }
        Strategy::IdealRate => (base, info_budget(&base, code.beta, None)?),
        Strategy::ArtificialNoise => {
            check_threshold(&base, code)?;
            let xi_art = snap_xi_art(required_artificial_noise(&base, code));
            let params = base.with_xi_art(xi_art);
            (params, info_budget(&params, code.beta, Some(fixed_b))?)
        }
        Strategy::ExternalBaseline(points) => {
            let t = base.total_transmittance();
            let point = points
                .iter()
                .find(|pt| (pt.t_total - t).abs() <= 1e-12 * t.max(1e-300))
                .ok_or(RateMatchError::NoBaselinePoint(t))?;
            return evaluate_baseline_point(point, &base);
        }
    };
    Ok(StrategyResult {
        strategy: strategy.name(),
        params,
        budget,
    })
}

/// Evaluates a supplied baseline point against the link `p` moved to the
/// point's total transmittance: `b = β_eff·log2(1 + SNR_point)`, `χ` from `p`
/// at that transmittance with no artificial noise.
pub fn evaluate_baseline_point(
    point: &BaselinePoint,
    p: &LinkParams,
) -> Result<StrategyResult, RateMatchError> {
    let t_ch = point.t_total / p.t_rec;
    if !(t_ch > 0.0 && t_ch <= 1.0) {
        return Err(RateMatchError::Infeasible(format!(
            "baseline point T = {} needs t_ch = {t_ch}",
            point.t_total
        )));
    }
    if !(point.beta_eff > 0.0 && point.beta_eff <= 1.0) {
        return Err(ModelError::InvalidBeta(point.beta_eff).into());
    }
    let params = p.with_t_ch(t_ch).with_xi_art(0.0);
    let chi = model::holevo_bound(&params)?;
    let i_ab = model::mutual_information_ab(point.snr);
    let budget = InfoBudget::from_parts(point.snr, i_ab, chi, point.beta_eff * i_ab);
    Ok(StrategyResult {
        strategy: "external_baseline",
        params,
        budget,
    })
}

/// A link configuration whose SNR sits exactly at the code threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatingPoint {
    params: LinkParams,
    code: CodeSpec,
    t_total_nominal: f64,
    headroom_factor: f64,
}

impl OperatingPoint {
    /// Checks the pinning invariant and wraps the point.
    fn pinned(
        params: LinkParams,
        code: CodeSpec,
        headroom_factor: f64,
    ) -> Result<Self, RateMatchError> {
        params.validate()?;
        let snr = model::snr(&params);
        let min = min_snr(&code);
        if (snr - min).abs() > 1e-10 {
            return Err(RateMatchError::BelowThreshold { snr, min_snr: min });
        }
        Ok(Self {
            t_total_nominal: params.total_transmittance(),
            params,
            code,
            headroom_factor,
        })
    }

    /// Matched point at a given channel transmittance: `V_mod` is solved
    /// from the SNR constraint, no artificial noise.
    pub fn at_transmittance(
        t_ch: f64,
        xi_ch: f64,
        t_rec: f64,
        xi_rec: f64,
        code: &CodeSpec,
    ) -> Result<Self, RateMatchError> {
        code.validate()?;
        let probe = LinkParams::new(0.0, t_ch, xi_ch, t_rec, xi_rec, 0.0)?;
        let v_mod = min_snr(code) * probe.noise_variance() / probe.total_transmittance();
        Self::pinned(probe.with_v_mod(v_mod), code.clone(), 1.0)
    }

    /// Matched point at a given modulation variance: `T_ch` is solved from
    /// the SNR constraint.
    pub fn at_modulation(
        v_mod: f64,
        xi_ch: f64,
        t_rec: f64,
        xi_rec: f64,
        code: &CodeSpec,
    ) -> Result<Self, RateMatchError> {
        code.validate()?;
        let probe = LinkParams::new(v_mod, 1.0, xi_ch, t_rec, xi_rec, 0.0)?;
        let t_ch = min_snr(code) * probe.noise_variance() / (t_rec * v_mod);
        if !(t_ch <= 1.0) {
            return Err(RateMatchError::Infeasible(format!(
                "v_mod = {v_mod} would need t_ch = {t_ch} > 1"
            )));
        }
        Self::pinned(probe.with_t_ch(t_ch), code.clone(), 1.0)
    }

    /// Uses `p` as given and adds the artificial noise that pins it to the
    /// threshold. Fails if `p` is below threshold.
    pub fn from_link(p: &LinkParams, code: &CodeSpec) -> Result<Self, RateMatchError> {
        code.validate()?;
        let base = p.with_xi_art(0.0);
        base.validate()?;
        check_threshold(&base, code)?;
        let xi_art = snap_xi_art(required_artificial_noise(&base, code));
        Self::pinned(base.with_xi_art(xi_art), code.clone(), 1.0)
    }

    pub fn params(&self) -> &LinkParams {
        &self.params
    }

    pub fn code(&self) -> &CodeSpec {
        &self.code
    }

    pub fn t_total_nominal(&self) -> f64 {
        self.t_total_nominal
    }

    pub fn headroom_factor(&self) -> f64 {
        self.headroom_factor
    }

    /// Information budget at the operating point itself.
    pub fn budget(&self) -> Result<InfoBudget, RateMatchError> {
        Ok(info_budget(
            &self.params,
            self.code.beta,
            Some(self.code.bits_per_symbol()),
        )?)
    }
}

/// Raises `V_mod` by `headroom_factor` and re-pins the SNR with artificial
/// noise, so that later transmittance drops can be absorbed by removing it.
pub fn headroom_operating_point(
    base: &OperatingPoint,
    headroom_factor: f64,
) -> Result<OperatingPoint, RateMatchError> {
    if !(headroom_factor >= 1.0) || !headroom_factor.is_finite() {
        return Err(RateMatchError::InvalidArgument(format!(
            "headroom factor must be >= 1, got {headroom_factor}"
        )));
    }
    if headroom_factor == 1.0 {
        return Ok(base.clone());
    }
    let raised = base.params.with_v_mod(base.params.v_mod * headroom_factor);
    let xi_art = required_artificial_noise(&raised, &base.code);
    if xi_art < -XI_ART_TOL {
        return Err(RateMatchError::BelowThreshold {
            snr: model::snr(&raised.with_xi_art(0.0)),
            min_snr: min_snr(&base.code),
        });
    }
    let mut op = OperatingPoint::pinned(
        raised.with_xi_art(snap_xi_art(xi_art)),
        base.code.clone(),
        base.headroom_factor * headroom_factor,
    )?;
    op.t_total_nominal = base.t_total_nominal;
    Ok(op)
}

/// Moves the channel transmittance of `op` to `t_ch_new` and recomputes the
/// artificial noise that keeps the SNR at the code threshold.
pub fn rematch_after_transmittance_change(
    op: &OperatingPoint,
    t_ch_new: f64,
) -> Result<LinkParams, RateMatchError> {
    let moved = op.params.with_t_ch(t_ch_new).with_xi_art(0.0);
    moved.validate()?;
    let xi_art = required_artificial_noise(&moved, &op.code);
    if xi_art < -XI_ART_TOL {
        return Err(RateMatchError::BelowThreshold {
            snr: model::snr(&moved),
            min_snr: min_snr(&op.code),
        });
    }
    Ok(moved.with_xi_art(snap_xi_art(xi_art)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ldpc_code() -> CodeSpec {
        CodeSpec::preset("met-ldpc-0.1").unwrap()
    }

    #[test]
    fn min_snr_examples() {
        let ms = min_snr(&ldpc_code());
        assert_abs_diff_eq!(ms, 0.159, epsilon = 5e-4);
        assert_abs_diff_eq!(ms, 2f64.powf(0.2 / 0.9395) - 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(min_snr(&CodeSpec::new(0.5, 1.0, "half").unwrap()), 1.0, epsilon = 1e-15);
        let tiny = min_snr(&CodeSpec::new(1e-9, 0.9, "tiny").unwrap());
        assert!(tiny > 0.0 && tiny < 1e-8);
    }

    #[test]
    fn code_validation() {
        assert!(CodeSpec::new(0.0, 0.9, "x").is_err());
        assert!(CodeSpec::new(1.0, 0.9, "x").is_err());
        assert!(CodeSpec::new(0.1, 0.0, "x").is_err());
        assert!(CodeSpec::new(0.1, 1.1, "x").is_err());
        assert!(CodeSpec::new(0.1, 1.0, "x").is_ok());
        assert!(CodeSpec::preset("nope").is_none());
    }

    #[test]
    fn required_noise_examples() {
        let code = ldpc_code();
        let ms = min_snr(&code);

        let op = OperatingPoint::at_transmittance(0.4, 0.05, 0.7, 0.01, &code).unwrap();
        assert_abs_diff_eq!(required_artificial_noise(op.params(), &code), 0.0, epsilon = 1e-12);

        // T·V_mod = 1
        let p = LinkParams::new(1.0 / 0.35, 0.5, 0.05, 0.7, 0.01, 0.0).unwrap();
        let xi = required_artificial_noise(&p, &code);
        assert_abs_diff_eq!(xi, 1.0 / ms - 2.06, epsilon = 1e-12);
        let p2 = p.with_t_ch(1.0);
        assert_abs_diff_eq!(required_artificial_noise(&p2, &code), 2.0 / ms - 2.06, epsilon = 1e-12);

        // with the rounded threshold 0.15891 the hand values are 4.2329 and 10.5257
        assert_abs_diff_eq!(1.0 / 0.15891 - 2.06, 4.2329, epsilon = 1e-4);
        assert_abs_diff_eq!(2.0 / 0.15891 - 2.06, 10.5257, epsilon = 1e-4);

        let below = p.with_v_mod(0.01);
        assert!(required_artificial_noise(&below, &code) < 0.0);
    }

    #[test]
    fn strategies_coincide_at_nominal_point() {
        let code = ldpc_code();
        let op = OperatingPoint::at_transmittance(0.3, 0.02, 0.7, 0.01, &code).unwrap();
        let p = op.params();
        let results: Vec<_> = [Strategy::Unmatched, Strategy::IdealRate, Strategy::ArtificialNoise]
            .iter()
            .map(|s| evaluate_strategy(s, p, &code).unwrap())
            .collect();
        for res in &results {
            assert_abs_diff_eq!(res.budget.b(), 0.2, epsilon = 1e-12);
            assert_abs_diff_eq!(res.budget.r(), results[0].budget.r(), epsilon = 1e-10);
            assert_abs_diff_eq!(res.budget.chi(), results[0].budget.chi(), epsilon = 1e-10);
        }
        assert_eq!(results[0].budget.b(), 0.2);
        assert_eq!(results[2].budget.b(), 0.2);
    }

    #[test]
    fn artificial_noise_beats_unmatched_above_threshold() {
        let code = ldpc_code();
        let op = OperatingPoint::at_transmittance(0.3, 0.02, 0.7, 0.01, &code).unwrap();
        for t in [0.35, 0.5, 0.8, 1.0] {
            let p = op.params().with_t_ch(t);
            let un = evaluate_strategy(&Strategy::Unmatched, &p, &code).unwrap();
            let an = evaluate_strategy(&Strategy::ArtificialNoise, &p, &code).unwrap();
            assert!(an.xi_art() > 0.0);
            assert!(an.budget.r() > un.budget.r(), "t={t}");
            assert_abs_diff_eq!(an.budget.snr(), min_snr(&code), epsilon = 1e-10);
        }
    }

    #[test]
    fn below_threshold_is_an_error() {
        let code = ldpc_code();
        let op = OperatingPoint::at_transmittance(0.3, 0.02, 0.7, 0.01, &code).unwrap();
        let p = op.params().with_t_ch(0.2);
        for s in [Strategy::Unmatched, Strategy::ArtificialNoise] {
            assert!(matches!(
                evaluate_strategy(&s, &p, &code),
                Err(RateMatchError::BelowThreshold { .. })
            ));
        }
        assert!(evaluate_strategy(&Strategy::IdealRate, &p, &code).is_ok());
    }

    #[test]
    fn baseline_penalty() {
        let code = ldpc_code();
        let op = OperatingPoint::at_transmittance(0.3, 0.02, 0.7, 0.01, &code).unwrap();
        let p = op.params().with_t_ch(0.45);
        let ideal = evaluate_strategy(&Strategy::IdealRate, &p, &code).unwrap();
        let point = BaselinePoint {
            t_total: p.total_transmittance(),
            snr: ideal.budget.snr(),
            beta_eff: code.beta - 0.005,
        };
        let strategy = Strategy::external_baseline(vec![point]).unwrap();
        let base = evaluate_strategy(&strategy, &p, &code).unwrap();
        assert_eq!(base.budget.chi(), ideal.budget.chi());
        assert!(base.budget.b() < ideal.budget.b());
        assert!(base.budget.r() < ideal.budget.r());

        let elsewhere = p.with_t_ch(0.5);
        assert!(matches!(
            evaluate_strategy(&strategy, &elsewhere, &code),
            Err(RateMatchError::NoBaselinePoint(_))
        ));
        assert!(Strategy::external_baseline(vec![]).is_err());
    }

    #[test]
    fn baseline_point_beyond_unit_channel_is_infeasible() {
        let p = LinkParams::new(2.0, 0.5, 0.01, 0.7, 0.01, 0.0).unwrap();
        let pt = BaselinePoint {
            t_total: 0.9,
            snr: 0.2,
            beta_eff: 0.93,
        };
        assert!(matches!(
            evaluate_baseline_point(&pt, &p),
            Err(RateMatchError::Infeasible(_))
        ));
    }

    #[test]
    fn headroom_examples() {
        let code = ldpc_code();
        let ms = min_snr(&code);
        let base = OperatingPoint::at_transmittance(0.3, 0.02, 0.7, 0.01, &code).unwrap();
        assert_eq!(headroom_operating_point(&base, 1.0).unwrap(), base);

        let op = headroom_operating_point(&base, 1.15).unwrap();
        let t = base.params().total_transmittance();
        let expected = 0.15 * t * base.params().v_mod / ms;
        assert!(op.params().xi_art > 0.0);
        assert_abs_diff_eq!(op.params().xi_art, expected, epsilon = 1e-10);
        assert_abs_diff_eq!(model::snr(op.params()), ms, epsilon = 1e-10);
        assert_abs_diff_eq!(op.headroom_factor(), 1.15, epsilon = 1e-15);
        assert_eq!(op.t_total_nominal(), base.t_total_nominal());

        assert!(headroom_operating_point(&base, 0.9).is_err());
    }

    #[test]
    fn rematch_examples() {
        let code = ldpc_code();
        let base = OperatingPoint::at_transmittance(0.3, 0.02, 0.7, 0.01, &code).unwrap();
        let op = headroom_operating_point(&base, 1.15).unwrap();
        let t_nom = op.params().t_ch;

        let same = rematch_after_transmittance_change(&op, t_nom).unwrap();
        assert_abs_diff_eq!(same.xi_art, op.params().xi_art, epsilon = 1e-12);

        for f in [1.05, 1.15, 1.5] {
            let op_f = headroom_operating_point(&base, f).unwrap();
            let p = rematch_after_transmittance_change(&op_f, t_nom / f).unwrap();
            assert!(p.xi_art.abs() <= 1e-10, "f={f}: {}", p.xi_art);
            assert_abs_diff_eq!(model::snr(&p), min_snr(&code), epsilon = 1e-10);
        }

        assert!(matches!(
            rematch_after_transmittance_change(&op, t_nom / 1.2),
            Err(RateMatchError::BelowThreshold { .. })
        ));
        assert!(rematch_after_transmittance_change(&op, 1.5).is_err());
    }

    #[test]
    fn operating_point_constructors() {
        let code = ldpc_code();
        let ms = min_snr(&code);
        let a = OperatingPoint::at_modulation(2.0, 0.02, 0.7, 0.01, &code).unwrap();
        assert_abs_diff_eq!(model::snr(a.params()), ms, epsilon = 1e-12);
        assert!(matches!(
            OperatingPoint::at_modulation(0.1, 0.02, 0.7, 0.01, &code),
            Err(RateMatchError::Infeasible(_))
        ));

        let p = LinkParams::new(5.0, 0.4, 0.02, 0.7, 0.01, 0.0).unwrap();
        let b = OperatingPoint::from_link(&p, &code).unwrap();
        assert!(b.params().xi_art > 0.0);
        assert_abs_diff_eq!(model::snr(b.params()), ms, epsilon = 1e-12);
        assert!(OperatingPoint::from_link(&p.with_v_mod(0.0), &code).is_err());
    }
}
