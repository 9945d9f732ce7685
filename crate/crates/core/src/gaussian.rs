//! Zero-mean Gaussian states described by their covariance matrices.
//!
//! Conventions used throughout the crate:
//!
//! * shot-noise units, so the vacuum covariance matrix is the identity;
//! * quadratures are interleaved per mode, `(q1, p1, q2, p2, ...)`;
//! * the symplectic form is `Ω = ⊕ [[0, 1], [-1, 0]]`.
//!
//! Only the handful of operations needed to evaluate Holevo quantities are
//! provided: symplectic spectra, entropies, two-mode beamsplitters and
//! conditioning on a heterodyne (double-quadrature) measurement.

use nalgebra::{linalg::Schur, DMatrix, Matrix2, SymmetricEigen};
use thiserror::Error;

/// Maximum absolute asymmetry accepted when constructing a [`CovMatrix`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Symplectic eigenvalues in `[1 - PHYSICAL_TOL, 1)` are treated as exactly 1.
pub const PHYSICAL_TOL: f64 = 1e-9;

/// Largest tolerated disagreement between the two members of an eigenvalue
/// pair of `iΩσ`, relative to `max(1, ν)`.
pub const PAIR_TOL: f64 = 1e-6;

const SCHUR_EPS: f64 = 1e-14;
const SCHUR_MAX_ITER: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaussianError {
    #[error("covariance matrix must be square with even dimension, got {rows}x{cols}")]
    BadShape { rows: usize, cols: usize },
    #[error("covariance matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("mode index {mode} out of range for a {n_modes}-mode state")]
    ModeOutOfRange { mode: usize, n_modes: usize },
    #[error("beamsplitter needs two distinct modes, got {0} twice")]
    SameMode(usize),
    #[error("eigen-solver failed to converge")]
    Eigensolver,
    #[error("symplectic eigenvalue pair mismatch: {0} vs {1}")]
    PairMismatch(f64, f64),
    #[error("singular matrix in measurement conditioning (unphysical input)")]
    Singular,
    #[error("state is unphysical: smallest symplectic eigenvalue {0}")]
    Unphysical(f64),
}

/// Covariance matrix of an `n_modes`-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    entries: DMatrix<f64>,
}

impl CovMatrix {
    /// Wraps `entries`, checking shape and symmetry. The stored matrix is
    /// exactly symmetrised.
    pub fn new(entries: DMatrix<f64>) -> Result<Self, GaussianError> {
        let (rows, cols) = entries.shape();
        if rows != cols || rows == 0 || rows % 2 != 0 {
            return Err(GaussianError::BadShape { rows, cols });
        }
        let asym = (&entries - entries.transpose()).amax();
        if asym > SYMMETRY_TOL || !asym.is_finite() {
            return Err(GaussianError::NotSymmetric(asym));
        }
        Ok(Self::symmetrized(entries))
    }

    fn symmetrized(entries: DMatrix<f64>) -> Self {
        let sym = (&entries + entries.transpose()) * 0.5;
        Self { entries: sym }
    }

    /// The `n_modes`-mode vacuum.
    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            entries: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    /// Single-mode thermal state `diag(v, v)`.
    pub fn thermal(v: f64) -> Result<Self, GaussianError> {
        if !(v >= 1.0 - PHYSICAL_TOL) {
            return Err(GaussianError::Domain(format!(
                "thermal variance must be >= 1, got {v}"
            )));
        }
        Ok(Self {
            entries: DMatrix::from_diagonal_element(2, 2, v),
        })
    }

    /// Two-mode matrix in standard form: `a·I` and `b·I` on the diagonal
    /// blocks, `c·σz` on the off-diagonal blocks.
    pub fn two_mode_standard_form(a: f64, b: f64, c: f64) -> Self {
        #[rustfmt::skip]
        let entries = DMatrix::from_row_slice(4, 4, &[
            a,   0.0, c,   0.0,
            0.0, a,   0.0, -c,
            c,   0.0, b,   0.0,
            0.0, -c,  0.0, b,
        ]);
        Self { entries }
    }

    pub fn n_modes(&self) -> usize {
        self.entries.nrows() / 2
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Block-diagonal combination `self ⊕ other`; `other`'s modes follow.
    pub fn direct_sum(&self, other: &CovMatrix) -> CovMatrix {
        let n = self.entries.nrows();
        let m = other.entries.nrows();
        let mut out = DMatrix::zeros(n + m, n + m);
        out.view_mut((0, 0), (n, n)).copy_from(&self.entries);
        out.view_mut((n, n), (m, m)).copy_from(&other.entries);
        CovMatrix { entries: out }
    }

    /// Covariance matrix of the listed modes, in the order given.
    pub fn reduced(&self, modes: &[usize]) -> Result<CovMatrix, GaussianError> {
        let n_modes = self.n_modes();
        if let Some(&mode) = modes.iter().find(|&&m| m >= n_modes) {
            return Err(GaussianError::ModeOutOfRange { mode, n_modes });
        }
        let idx = quadrature_indices(modes);
        Ok(CovMatrix {
            entries: select(&self.entries, &idx, &idx),
        })
    }

    /// Checks that every symplectic eigenvalue is at least `1 - PHYSICAL_TOL`.
    pub fn validate_physical(&self) -> Result<(), GaussianError> {
        let spectrum = symplectic_spectrum(self)?;
        let min = spectrum.min();
        if min < 1.0 - PHYSICAL_TOL {
            return Err(GaussianError::Unphysical(min));
        }
        Ok(())
    }

    pub fn is_physical(&self) -> bool {
        self.validate_physical().is_ok()
    }
}

/// Symplectic eigenvalues of a covariance matrix, one per mode, descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    values: Vec<f64>,
}

impl SymplecticSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::INFINITY)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

/// Entropy in bits of a single-mode thermal state with symplectic eigenvalue
/// `nu`:
///
/// `g(ν) = ((ν+1)/2)·log2((ν+1)/2) − ((ν−1)/2)·log2((ν−1)/2)`.
pub fn g_func(nu: f64) -> Result<f64, GaussianError> {
    if !(nu >= 1.0 - PHYSICAL_TOL) || !nu.is_finite() {
        return Err(GaussianError::Domain(format!(
            "symplectic eigenvalue must be >= 1, got {nu}"
        )));
    }
    let nu = nu.max(1.0);
    let plus = 0.5 * (nu + 1.0);
    let minus = 0.5 * (nu - 1.0);
    Ok(xlog2x(plus) - xlog2x(minus))
}

fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Symplectic spectrum of `cm`: moduli of the eigenvalues of `iΩσ`, which
/// come in `±ν` pairs. The `2N` moduli are sorted and paired; a pair that
/// disagrees by more than [`PAIR_TOL`] is reported as corruption.
///
/// For positive-definite `σ` the moduli are taken from the similar matrix
/// `iσ^{1/2}Ωσ^{1/2}`, whose square `AᵀA` (with `A = σ^{1/2}Ωσ^{1/2}`) is
/// real symmetric. Other inputs go through a real Schur decomposition of
/// `Ωσ`.
pub fn symplectic_spectrum(cm: &CovMatrix) -> Result<SymplecticSpectrum, GaussianError> {
    let dim = cm.entries.nrows();
    let mut moduli = match symmetric_moduli(cm) {
        Some(m) => m,
        None => schur_moduli(cm)?,
    };
    if moduli.len() != dim || moduli.iter().any(|v| !v.is_finite()) {
        return Err(GaussianError::Eigensolver);
    }
    moduli.sort_by(|a, b| b.total_cmp(a));

    let mut values = Vec::with_capacity(dim / 2);
    for pair in moduli.chunks_exact(2) {
        let (hi, lo) = (pair[0], pair[1]);
        if hi - lo > PAIR_TOL * hi.max(1.0) {
            return Err(GaussianError::PairMismatch(hi, lo));
        }
        values.push(0.5 * (hi + lo));
    }
    Ok(SymplecticSpectrum { values })
}

fn symmetric_moduli(cm: &CovMatrix) -> Option<Vec<f64>> {
    let eig = SymmetricEigen::new(cm.entries.clone());
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return None;
    }
    let sqrt_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let root = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose();
    let a = &root * symplectic_form(cm.n_modes()) * &root;
    let gram = a.transpose() * &a;
    let gram = (&gram + gram.transpose()) * 0.5;
    Some(
        SymmetricEigen::new(gram)
            .eigenvalues
            .iter()
            .map(|&l| l.max(0.0).sqrt())
            .collect(),
    )
}

fn schur_moduli(cm: &CovMatrix) -> Result<Vec<f64>, GaussianError> {
    let omega_sigma = symplectic_form(cm.n_modes()) * &cm.entries;
    let schur =
        Schur::try_new(omega_sigma, SCHUR_EPS, SCHUR_MAX_ITER).ok_or(GaussianError::Eigensolver)?;
    Ok(schur.complex_eigenvalues().iter().map(|z| z.norm()).collect())
}

/// Von Neumann entropy in bits: `Σ_k g(ν_k)`.
pub fn von_neumann_entropy(cm: &CovMatrix) -> Result<f64, GaussianError> {
    symplectic_spectrum(cm)?
        .values
        .iter()
        .map(|&nu| g_func(nu))
        .sum()
}

/// Two-mode squeezed vacuum with local variance `v` (`v = V_mod + 1` for the
/// entanglement-based picture of Gaussian modulation).
pub fn tmsv_cm(v: f64) -> Result<CovMatrix, GaussianError> {
    if !(v >= 1.0) || !v.is_finite() {
        return Err(GaussianError::Domain(format!(
            "two-mode squeezed vacuum needs variance >= 1, got {v}"
        )));
    }
    let c = (v * v - 1.0).sqrt();
    Ok(CovMatrix::two_mode_standard_form(v, v, c))
}

/// Mixes modes `mode_i` and `mode_j` on a beamsplitter of transmittance
/// `transmittance`:
///
/// ```text
/// x_i' =  √T x_i + √(1−T) x_j
/// x_j' = −√(1−T) x_i + √T x_j      (x ∈ {q, p})
/// ```
///
/// With `T = 0` the modes are swapped, with `mode_i` picking up a sign.
pub fn apply_beamsplitter(
    cm: &CovMatrix,
    mode_i: usize,
    mode_j: usize,
    transmittance: f64,
) -> Result<CovMatrix, GaussianError> {
    let n_modes = cm.n_modes();
    for mode in [mode_i, mode_j] {
        if mode >= n_modes {
            return Err(GaussianError::ModeOutOfRange { mode, n_modes });
        }
    }
    if mode_i == mode_j {
        return Err(GaussianError::SameMode(mode_i));
    }
    if !(0.0..=1.0).contains(&transmittance) {
        return Err(GaussianError::Domain(format!(
            "beamsplitter transmittance must be in [0, 1], got {transmittance}"
        )));
    }
    let t = transmittance.sqrt();
    let r = (1.0 - transmittance).sqrt();
    let mut s = DMatrix::<f64>::identity(2 * n_modes, 2 * n_modes);
    for k in 0..2 {
        let (a, b) = (2 * mode_i + k, 2 * mode_j + k);
        s[(a, a)] = t;
        s[(a, b)] = r;
        s[(b, a)] = -r;
        s[(b, b)] = t;
    }
    let out = &s * &cm.entries * s.transpose();
    Ok(CovMatrix::symmetrized(out))
}

/// Covariance matrix of the remaining modes after heterodyne detection of
/// `measured_mode`:
///
/// `σ' = σ_R − σ_C (σ_M + I)⁻¹ σ_Cᵀ`
///
/// The result does not depend on the measurement outcome.
pub fn heterodyne_condition(
    cm: &CovMatrix,
    measured_mode: usize,
) -> Result<CovMatrix, GaussianError> {
    let n_modes = cm.n_modes();
    if measured_mode >= n_modes {
        return Err(GaussianError::ModeOutOfRange {
            mode: measured_mode,
            n_modes,
        });
    }
    if n_modes < 2 {
        return Err(GaussianError::Domain(
            "conditioning needs at least one unmeasured mode".into(),
        ));
    }
    let rest: Vec<usize> = (0..n_modes).filter(|&m| m != measured_mode).collect();
    let rest_idx = quadrature_indices(&rest);
    let meas_idx = quadrature_indices(&[measured_mode]);

    let sigma_r = select(&cm.entries, &rest_idx, &rest_idx);
    let sigma_c = select(&cm.entries, &rest_idx, &meas_idx);
    let m = &cm.entries;
    let (a, b) = (meas_idx[0], meas_idx[1]);
    let sigma_m = Matrix2::new(m[(a, a)], m[(a, b)], m[(b, a)], m[(b, b)]);
    let inv = (sigma_m + Matrix2::identity())
        .try_inverse()
        .ok_or(GaussianError::Singular)?;
    let inv = DMatrix::from_column_slice(2, 2, inv.as_slice());

    let out = sigma_r - &sigma_c * inv * sigma_c.transpose();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(GaussianError::Singular);
    }
    Ok(CovMatrix::symmetrized(out))
}

fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

fn quadrature_indices(modes: &[usize]) -> Vec<usize> {
    modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect()
}

fn select(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}
