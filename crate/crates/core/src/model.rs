//! Information budget of a Gaussian-modulated coherent-state link with
//! heterodyne detection, reverse reconciliation and a trusted receiver.
//!
//! All noise figures (`xi_ch`, `xi_rec`, `xi_art`) are referred to the
//! detector, so the measured signal-to-noise ratio is exactly
//!
//! ```text
//! SNR = T_ch·T_rec·V_mod / (2 + ξ_ch + ξ_rec + ξ_art)
//! ```
//!
//! The Holevo bound is evaluated in the entanglement-based picture:
//!
//! 1. Alice holds mode A of a two-mode squeezed vacuum with `V = V_mod + 1`,
//!    the other mode travels through the channel and arrives as B1 with
//!    excess noise `ξ_ch / T_rec` (so that it is `ξ_ch` after the receiver);
//! 2. Eve purifies `AB1`, hence `S(E) = S(AB1)`;
//! 3. the trusted receiver couples B1 on a beamsplitter of transmittance
//!    `T_rec` with one arm (N1) of an EPR pair (N1, N2) whose variance
//!    `1 + (ξ_rec + ξ_art)/(1 − T_rec)` reproduces the trusted noise;
//! 4. Bob heterodynes the output B2; `S(E|B)` is the entropy of the
//!    conditioned state of `(A, N1', N2)`;
//! 5. `χ = S(E) − S(E|B)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gaussian::{
    apply_beamsplitter, heterodyne_condition, tmsv_cm, von_neumann_entropy, CovMatrix,
    GaussianError,
};

/// Negative Holevo values down to this magnitude are rounding noise and are
/// reported as zero.
pub const HOLEVO_FLOOR_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid link parameters: {0}")]
    InvalidParams(String),
    #[error("reconciliation efficiency must be in (0, 1], got {0}")]
    InvalidBeta(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("Holevo bound evaluated to {0}, which indicates a construction error")]
    NegativeHolevo(f64),
    #[error(transparent)]
    Gaussian(#[from] GaussianError),
}

/// Scenario parameters of one link, all variances in shot-noise units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    /// Modulation variance `V_mod`.
    pub v_mod: f64,
    /// Channel transmittance `T_ch`, in `(0, 1]`.
    pub t_ch: f64,
    /// Untrusted channel excess noise, detector-referred.
    pub xi_ch: f64,
    /// Trusted receiver efficiency `T_rec`, in `(0, 1]`.
    pub t_rec: f64,
    /// Trusted receiver electronic noise.
    pub xi_rec: f64,
    /// Trusted digital noise added by Bob after detection.
    pub xi_art: f64,
}

impl LinkParams {
    pub fn new(
        v_mod: f64,
        t_ch: f64,
        xi_ch: f64,
        t_rec: f64,
        xi_rec: f64,
        xi_art: f64,
    ) -> Result<Self, ModelError> {
        let p = Self {
            v_mod,
            t_ch,
            xi_ch,
            t_rec,
            xi_rec,
            xi_art,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |what: &str, v: f64| Err(ModelError::InvalidParams(format!("{what} = {v}")));
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        let unit = |v: f64| v.is_finite() && v > 0.0 && v <= 1.0;
        if !nonneg(self.v_mod) {
            return bad("v_mod", self.v_mod);
        }
        if !unit(self.t_ch) {
            return bad("t_ch", self.t_ch);
        }
        if !nonneg(self.xi_ch) {
            return bad("xi_ch", self.xi_ch);
        }
        if !unit(self.t_rec) {
            return bad("t_rec", self.t_rec);
        }
        if !nonneg(self.xi_rec) {
            return bad("xi_rec", self.xi_rec);
        }
        if !nonneg(self.xi_art) {
            return bad("xi_art", self.xi_art);
        }
        Ok(())
    }

    /// `T = T_ch·T_rec`.
    pub fn total_transmittance(&self) -> f64 {
        self.t_ch * self.t_rec
    }

    /// Total detector-referred noise, including the heterodyne vacuum units.
    pub fn noise_variance(&self) -> f64 {
        2.0 + self.xi_ch + self.xi_rec + self.xi_art
    }

    pub fn with_xi_art(self, xi_art: f64) -> Self {
        Self { xi_art, ..self }
    }

    pub fn with_t_ch(self, t_ch: f64) -> Self {
        Self { t_ch, ..self }
    }

    pub fn with_v_mod(self, v_mod: f64) -> Self {
        Self { v_mod, ..self }
    }
}

/// Per-symbol information quantities at one link configuration.
///
/// `r = b − chi` holds exactly; the only constructor enforces it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfoBudget {
    snr: f64,
    i_ab: f64,
    chi: f64,
    b: f64,
    r: f64,
}

impl InfoBudget {
    pub fn from_parts(snr: f64, i_ab: f64, chi: f64, b: f64) -> Self {
        Self {
            snr,
            i_ab,
            chi,
            b,
            r: b - chi,
        }
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn i_ab(&self) -> f64 {
        self.i_ab
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    /// Reconciled bits per symbol.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Secret fraction in bits per symbol; negative means no key.
    pub fn r(&self) -> f64 {
        self.r
    }
}

pub fn snr(p: &LinkParams) -> f64 {
    p.total_transmittance() * p.v_mod / p.noise_variance()
}

/// Mutual information per symbol for heterodyne detection: two Gaussian
/// channel uses of `½·log2(1 + SNR)` each.
pub fn mutual_information_ab(snr: f64) -> f64 {
    snr.ln_1p() / std::f64::consts::LN_2
}

/// The two entropies whose difference is the Holevo bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolevoTerms {
    /// `S(E) = S(AB1)`.
    pub eve: f64,
    /// `S(E|B)`, entropy of `(A, N1', N2)` after Bob's heterodyne.
    pub eve_given_bob: f64,
}

/// Covariance matrix of Alice's mode and the channel output in front of the
/// trusted receiver.
pub fn ab_covariance(p: &LinkParams) -> Result<CovMatrix, ModelError> {
    p.validate()?;
    let v = p.v_mod + 1.0;
    let b1 = p.t_ch * (v - 1.0) + 1.0 + p.xi_ch / p.t_rec;
    let c = (p.t_ch * (v * v - 1.0)).sqrt();
    Ok(CovMatrix::two_mode_standard_form(v, b1, c))
}

pub fn holevo_terms(p: &LinkParams) -> Result<HolevoTerms, ModelError> {
    let sigma_ab = ab_covariance(p)?;
    let trusted = p.xi_rec + p.xi_art;
    if p.t_rec >= 1.0 && trusted > 0.0 {
        return Err(ModelError::Domain(format!(
            "trusted noise {trusted} cannot be modelled with t_rec = 1"
        )));
    }
    let eve = von_neumann_entropy(&sigma_ab)?;

    let v_noise = if trusted > 0.0 {
        1.0 + trusted / (1.0 - p.t_rec)
    } else {
        1.0
    };
    // modes: 0 = A, 1 = B1, 2 = N1, 3 = N2
    let full = sigma_ab.direct_sum(&tmsv_cm(v_noise)?);
    let detected = apply_beamsplitter(&full, 1, 2, p.t_rec)?;
    let conditioned = heterodyne_condition(&detected, 1)?;
    let eve_given_bob = von_neumann_entropy(&conditioned)?;
    Ok(HolevoTerms { eve, eve_given_bob })
}

/// Holevo bound on Eve's information about Bob's data, bits per symbol.
pub fn holevo_bound(p: &LinkParams) -> Result<f64, ModelError> {
    let terms = holevo_terms(p)?;
    let chi = terms.eve - terms.eve_given_bob;
    if chi >= 0.0 {
        Ok(chi)
    } else if chi >= -HOLEVO_FLOOR_TOL {
        Ok(0.0)
    } else {
        Err(ModelError::NegativeHolevo(chi))
    }
}

/// Evaluates the link. When `b_override` is given it replaces `β·I_AB` as
/// the number of reconciled bits (fixed-rate code used off its design SNR).
pub fn info_budget(
    p: &LinkParams,
    beta: f64,
    b_override: Option<f64>,
) -> Result<InfoBudget, ModelError> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(ModelError::InvalidBeta(beta));
    }
    p.validate()?;
    let snr = snr(p);
    let i_ab = mutual_information_ab(snr);
    let chi = holevo_bound(p)?;
    let b = b_override.unwrap_or(beta * i_ab);
    Ok(InfoBudget::from_parts(snr, i_ab, chi, b))
}
