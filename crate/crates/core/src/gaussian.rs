//! Multimode Gaussian states described by their phase-insensitive matrix
//! `N_ij = ⟨a†_i a_j⟩ − ⟨a†_i⟩⟨a_j⟩`, phase-sensitive matrix
//! `M_ij = ⟨a_i a_j⟩ − ⟨a_i⟩⟨a_j⟩` and mean field `ᾱ_i = ⟨a_i⟩`.
//!
//! The s-ordered covariance in the ladder basis `(a_1 … a_ℓ, a†_1 … a†_ℓ)` is
//!
//! ```text
//! Σ^(s) = (1 − s)/2 · I + [[Nᵀ, M], [M*, N]]
//! ```
//!
//! and the adjacency matrix fed to the matrix functions is `A^(s) = X Σ^(s)`.
//! Physicality is checked on construction through the uncertainty relation
//! `Σ^(1) + Z/2 + I/2 ⪰ 0` plus the cheaper consequences listed in
//! [`Tolerances`].

use std::fmt;

use nalgebra::SymmetricEigen;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haar_mc::haar_unitary;
use crate::matfunc::BlockAdjacency;
use crate::{CMatrix, CVector, C64};

/// Operator ordering of a covariance matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub enum SOrder {
    /// `s = 1`
    #[default]
    Normal,
    /// `s = 0`
    Symmetric,
    /// `s = −1`
    AntiNormal,
}

impl SOrder {
    pub fn value(self) -> f64 {
        match self {
            SOrder::Normal => 1.0,
            SOrder::Symmetric => 0.0,
            SOrder::AntiNormal => -1.0,
        }
    }

    /// The shift `(1 − s)/2` added to the diagonal.
    fn shift(self) -> f64 {
        (1.0 - self.value()) / 2.0
    }
}

impl TryFrom<i32> for SOrder {
    type Error = Error;

    fn try_from(s: i32) -> Result<Self> {
        match s {
            1 => Ok(SOrder::Normal),
            0 => Ok(SOrder::Symmetric),
            -1 => Ok(SOrder::AntiNormal),
            other => Err(Error::Domain(format!("s-order must be 1, 0 or -1, got {other}"))),
        }
    }
}

impl From<SOrder> for i32 {
    fn from(s: SOrder) -> i32 {
        s.value() as i32
    }
}

impl fmt::Display for SOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", i32::from(*self))
    }
}

/// Acceptance thresholds used when validating a state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// `max |N_ij − N*_ji|`
    pub hermitian: f64,
    /// lowest accepted eigenvalue of `N` (negated)
    pub psd: f64,
    /// `max |M_ij − M_ji|`
    pub symmetric: f64,
    /// lowest accepted eigenvalue of `Σ^(1) + Z/2 + I/2` (negated)
    pub uncertainty: f64,
    /// slack on `|M_ij| ≤ min(√(N_ii(1+N_jj)), √(N_jj(1+N_ii)))`
    pub eccentricity: f64,
    /// `max |(U†U − I)_ij|` for interferometers
    pub unitary: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-10,
            psd: 1e-10,
            symmetric: 1e-10,
            uncertainty: 1e-9,
            eccentricity: 1e-9,
            unitary: 1e-10,
        }
    }
}

/// Single-mode input states used in boson-sampling experiments, all with
/// zero displacement and characterised by mean photon number `n̄` and
/// eccentricity `m̄ = ⟨a²⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateFamily {
    /// `m̄ = √(n̄(n̄ + 1))`
    Squeezed,
    /// `m̄ = √(n̄(n̄ + η))`
    LossySqueezed { eta: f64 },
    /// `m̄ = n̄`
    Squashed,
    /// `m̄ = 0`
    Thermal,
}

impl StateFamily {
    pub fn eccentricity(&self, nbar: f64) -> Result<f64> {
        if !(nbar.is_finite() && nbar >= 0.0) {
            return Err(Error::Domain(format!("mean photon number must be finite and >= 0, got {nbar}")));
        }
        Ok(match *self {
            StateFamily::Squeezed => (nbar * (nbar + 1.0)).sqrt(),
            StateFamily::LossySqueezed { eta } => {
                if !(eta > 0.0 && eta <= 1.0) {
                    return Err(Error::Domain(format!("transmission must lie in (0, 1], got {eta}")));
                }
                (nbar * (nbar + eta)).sqrt()
            }
            StateFamily::Squashed => nbar,
            StateFamily::Thermal => 0.0,
        })
    }

    /// Short label used in tables, e.g. `lossy_squeezed(eta=0.5)`.
    pub fn label(&self) -> String {
        match self {
            StateFamily::Squeezed => "squeezed".into(),
            StateFamily::LossySqueezed { eta } => format!("lossy_squeezed(eta={eta})"),
            StateFamily::Squashed => "squashed".into(),
            StateFamily::Thermal => "thermal".into(),
        }
    }
}

/// A validated Gaussian state.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    n_mat: CMatrix,
    m_mat: CMatrix,
    alpha: CVector,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn min_hermitian_eigenvalue(h: &CMatrix) -> f64 {
    if h.nrows() == 0 {
        return 0.0;
    }
    let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(sym).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

impl GaussianState {
    /// Validates `(N, M, ᾱ)` with default [`Tolerances`].
    pub fn new(n_mat: CMatrix, m_mat: CMatrix, alpha: CVector) -> Result<Self> {
        Self::with_tolerances(n_mat, m_mat, alpha, &Tolerances::default())
    }

    pub fn with_tolerances(n_mat: CMatrix, m_mat: CMatrix, alpha: CVector, tol: &Tolerances) -> Result<Self> {
        let state = Self { n_mat, m_mat, alpha };
        state.validate(tol)?;
        Ok(state)
    }

    /// The `ℓ`-mode vacuum.
    pub fn vacuum(ell: usize) -> Self {
        Self {
            n_mat: CMatrix::zeros(ell, ell),
            m_mat: CMatrix::zeros(ell, ell),
            alpha: CVector::zeros(ell),
        }
    }

    /// `K` copies of a single-mode state from `family` in the first modes,
    /// vacuum in the remaining `ℓ − K`.
    pub fn from_family(family: StateFamily, nbar: f64, k: usize, ell: usize) -> Result<Self> {
        if k > ell {
            return Err(Error::Domain(format!("occupied modes K = {k} exceed mode count {ell}")));
        }
        let mbar = family.eccentricity(nbar)?;
        let diag = |v: f64| CMatrix::from_fn(ell, ell, |i, j| if i == j && i < k { C64::new(v, 0.0) } else { zero() });
        Self::new(diag(nbar), diag(mbar), CVector::zeros(ell))
    }

    /// A generic valid state: independent single-mode states with random
    /// thermal noise, squeezing and phase, mixed by a Haar-random
    /// interferometer and displaced by a random mean field of size up to
    /// `displacement`.
    pub fn random<R: Rng + ?Sized>(ell: usize, displacement: f64, rng: &mut R) -> Self {
        let mut n = CMatrix::zeros(ell, ell);
        let mut m = CMatrix::zeros(ell, ell);
        for k in 0..ell {
            let nk: f64 = rng.random_range(0.05..1.5);
            let frac: f64 = rng.random_range(0.0..1.0);
            let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            n[(k, k)] = C64::new(nk, 0.0);
            m[(k, k)] = C64::from_polar(frac * (nk * (nk + 1.0)).sqrt(), phase);
        }
        let alpha = CVector::from_fn(ell, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * displacement
        });
        let u = haar_unitary(ell, rng);
        let input = Self { n_mat: n, m_mat: m, alpha };
        input
            .apply_interferometer(&u)
            .expect("a Haar unitary applied to a valid state gives a valid state")
    }

    pub fn ell(&self) -> usize {
        self.n_mat.nrows()
    }

    pub fn n_mat(&self) -> &CMatrix {
        &self.n_mat
    }

    pub fn m_mat(&self) -> &CMatrix {
        &self.m_mat
    }

    pub fn alpha(&self) -> &CVector {
        &self.alpha
    }

    /// Mean vector `ζ̄ = (ᾱ, ᾱ*)`.
    pub fn zeta(&self) -> CVector {
        let ell = self.ell();
        CVector::from_fn(2 * ell, |i, _| if i < ell { self.alpha[i] } else { self.alpha[i - ell].conj() })
    }

    /// Conjugated mean vector `ζ̄* = (ᾱ*, ᾱ)`: the loop weights of the
    /// adjacency graph.
    pub fn zeta_conj(&self) -> CVector {
        self.zeta().map(|z| z.conj())
    }

    pub fn is_displaced(&self) -> bool {
        self.alpha.iter().any(|a| a.norm() > 0.0)
    }

    fn validate(&self, tol: &Tolerances) -> Result<()> {
        let ell = self.n_mat.nrows();
        if self.n_mat.ncols() != ell || self.m_mat.nrows() != ell || self.m_mat.ncols() != ell {
            return Err(Error::Validation(format!(
                "shape mismatch: N is {}x{}, M is {}x{}",
                self.n_mat.nrows(),
                self.n_mat.ncols(),
                self.m_mat.nrows(),
                self.m_mat.ncols()
            )));
        }
        if self.alpha.len() != ell {
            return Err(Error::Validation(format!(
                "displacement has length {} for {ell} modes",
                self.alpha.len()
            )));
        }
        let finite = |z: &C64| z.re.is_finite() && z.im.is_finite();
        if !(self.n_mat.iter().all(finite) && self.m_mat.iter().all(finite) && self.alpha.iter().all(finite)) {
            return Err(Error::Validation("non-finite entries".into()));
        }
        let herm = (&self.n_mat - self.n_mat.adjoint()).iter().fold(0.0f64, |w, z| w.max(z.norm()));
        if herm > tol.hermitian {
            return Err(Error::Validation(format!("N is not Hermitian (max |N_ij - N_ji*| = {herm:e})")));
        }
        let sym = (&self.m_mat - self.m_mat.transpose()).iter().fold(0.0f64, |w, z| w.max(z.norm()));
        if sym > tol.symmetric {
            return Err(Error::Validation(format!("M is not symmetric (max |M_ij - M_ji| = {sym:e})")));
        }
        let low = min_hermitian_eigenvalue(&self.n_mat);
        if low < -tol.psd {
            return Err(Error::Validation(format!("N is not positive semidefinite (min eigenvalue {low:e})")));
        }
        for i in 0..ell {
            let nii = self.n_mat[(i, i)].re;
            for j in 0..ell {
                let njj = self.n_mat[(j, j)].re;
                let mij = self.m_mat[(i, j)].norm();
                if nii == 0.0 && mij > tol.eccentricity {
                    return Err(Error::Validation(format!(
                        "N_{i}{i} = 0 but |M_{i}{j}| = {mij:e} (an empty mode has no phase-sensitive correlations)"
                    )));
                }
                let bound = (nii * (1.0 + njj)).max(0.0).sqrt().min((njj * (1.0 + nii)).max(0.0).sqrt());
                if mij > bound + tol.eccentricity {
                    return Err(Error::Validation(format!(
                        "|M_{i}{j}| = {mij} exceeds the uncertainty bound {bound}"
                    )));
                }
            }
        }
        let low = min_hermitian_eigenvalue(&self.uncertainty_matrix());
        if low < -tol.uncertainty {
            return Err(Error::Validation(format!(
                "uncertainty relation violated: Sigma + Z/2 + I/2 has eigenvalue {low:e}"
            )));
        }
        Ok(())
    }

    /// `Σ^(1) + Z/2 + I/2 = [[Nᵀ + I, M], [M*, N]]`; positive semidefinite
    /// for every physical state.
    pub fn uncertainty_matrix(&self) -> CMatrix {
        let ell = self.ell();
        let mut u = self.sigma(SOrder::Normal);
        for i in 0..ell {
            u[(i, i)] += C64::new(1.0, 0.0);
        }
        u
    }

    /// The `2ℓ × 2ℓ` Hermitian covariance `Σ^(s)`.
    pub fn sigma(&self, s: SOrder) -> CMatrix {
        let ell = self.ell();
        let mut out = CMatrix::zeros(2 * ell, 2 * ell);
        out.view_mut((0, 0), (ell, ell)).copy_from(&self.n_mat.transpose());
        out.view_mut((0, ell), (ell, ell)).copy_from(&self.m_mat);
        out.view_mut((ell, 0), (ell, ell)).copy_from(&self.m_mat.map(|z| z.conj()));
        out.view_mut((ell, ell), (ell, ell)).copy_from(&self.n_mat);
        for i in 0..2 * ell {
            out[(i, i)] += C64::new(s.shift(), 0.0);
        }
        out
    }

    /// `A^(s) = X Σ^(s) = [[M*, N + cI], [Nᵀ + cI, M]]` with `c = (1 − s)/2`.
    pub fn adjacency(&self, s: SOrder) -> BlockAdjacency {
        let ell = self.ell();
        let mut cross = self.n_mat.clone();
        for i in 0..ell {
            cross[(i, i)] += C64::new(s.shift(), 0.0);
        }
        // Hermitian N up to rounding, so Nᵀ + cI equals the transpose of the
        // cross block exactly.
        BlockAdjacency::from_blocks(&self.m_mat.map(|z| z.conj()), &cross, &self.m_mat)
            .expect("adjacency of a validated state is square, finite and symmetric")
    }

    /// Passes the state through the interferometer `U`:
    /// `N → U* N Uᵀ`, `M → U M Uᵀ`, `ᾱ → U ᾱ`.
    pub fn apply_interferometer(&self, u: &CMatrix) -> Result<Self> {
        let ell = self.ell();
        if u.nrows() != ell || u.ncols() != ell {
            return Err(Error::Domain(format!("interferometer must be {ell}x{ell}")));
        }
        let defect = (u.adjoint() * u - CMatrix::identity(ell, ell)).iter().fold(0.0f64, |w, z| w.max(z.norm()));
        if defect > Tolerances::default().unitary {
            return Err(Error::Domain(format!("interferometer is not unitary (max |U†U - I| = {defect:e})")));
        }
        let ut = u.transpose();
        let n_out = u.map(|z| z.conj()) * &self.n_mat * &ut;
        let m_out = u * &self.m_mat * &ut;
        // remove the rounding-level asymmetry introduced by the products
        let n_out = (&n_out + n_out.adjoint()) * C64::new(0.5, 0.0);
        let m_out = (&m_out + m_out.transpose()) * C64::new(0.5, 0.0);
        Self::new(n_out, m_out, u * &self.alpha)
    }

    /// Uniform pure loss with energy transmission `η`:
    /// `N → ηN`, `M → ηM`, `ᾱ → √η ᾱ`.
    pub fn apply_uniform_loss(&self, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Domain(format!("transmission must lie in [0, 1], got {eta}")));
        }
        let e = C64::new(eta, 0.0);
        Self::new(&self.n_mat * e, &self.m_mat * e, &self.alpha * C64::new(eta.sqrt(), 0.0))
    }

    /// Marginal state of the listed modes, in the listed order.
    pub fn restrict(&self, modes: &[usize]) -> Result<Self> {
        if let Some(&bad) = modes.iter().find(|&&k| k >= self.ell()) {
            return Err(Error::Domain(format!("mode {bad} out of range for {} modes", self.ell())));
        }
        let r = modes.len();
        Ok(Self {
            n_mat: CMatrix::from_fn(r, r, |i, j| self.n_mat[(modes[i], modes[j])]),
            m_mat: CMatrix::from_fn(r, r, |i, j| self.m_mat[(modes[i], modes[j])]),
            alpha: CVector::from_fn(r, |i, _| self.alpha[modes[i]]),
        })
    }

    /// Quadrature covariance `V^(s) = ħ R† Σ^(s) R` and quadrature means
    /// `r̄ = √ħ R† ζ̄`, in the ordering `(q_1 … q_ℓ, p_1 … p_ℓ)`.
    pub fn to_quadrature(&self, s: SOrder, hbar: f64) -> Result<(CMatrix, CVector)> {
        check_hbar(hbar)?;
        let r = quadrature_rotation(self.ell());
        let v = r.adjoint() * self.sigma(s) * &r * C64::new(hbar, 0.0);
        let means = r.adjoint() * self.zeta() * C64::new(hbar.sqrt(), 0.0);
        Ok((v, means))
    }

    /// Inverse of [`GaussianState::to_quadrature`].
    pub fn from_quadrature(v: &CMatrix, means: &CVector, s: SOrder, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        if v.nrows() != v.ncols() || v.nrows() % 2 != 0 || means.len() != v.nrows() {
            return Err(Error::Domain("quadrature covariance must be 2l x 2l with 2l means".into()));
        }
        let ell = v.nrows() / 2;
        let r = quadrature_rotation(ell);
        let mut sigma = &r * v * r.adjoint() / C64::new(hbar, 0.0);
        for i in 0..2 * ell {
            sigma[(i, i)] -= C64::new(s.shift(), 0.0);
        }
        let zeta = &r * means / C64::new(hbar.sqrt(), 0.0);
        let n = sigma.view((ell, ell), (ell, ell)).into_owned();
        let m = sigma.view((0, ell), (ell, ell)).into_owned();
        Self::new(n, m, zeta.rows(0, ell).into_owned())
    }

    /// Serialises the state as a versioned JSON document.
    pub fn to_document(&self, s: SOrder) -> StateDocument {
        let pairs = |m: &CMatrix| {
            let mut out = Vec::with_capacity(m.len());
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    out.push([m[(i, j)].re, m[(i, j)].im]);
                }
            }
            out
        };
        StateDocument {
            version: StateDocument::VERSION,
            ell: self.ell(),
            s_order: s,
            n: pairs(&self.n_mat),
            m: pairs(&self.m_mat),
            alpha: self.alpha.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

fn check_hbar(hbar: f64) -> Result<()> {
    if hbar.is_finite() && hbar > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("hbar must be positive, got {hbar}")))
    }
}

/// The unitary `R = (1/√2) [[I, iI], [I, −iI]]` with `ζ̂ = R r̂ / √ħ`.
pub fn quadrature_rotation(ell: usize) -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(2 * ell, 2 * ell, |i, j| {
        if i % ell != j % ell {
            return zero();
        }
        match (i < ell, j < ell) {
            (_, true) => C64::new(h, 0.0),
            (true, false) => C64::new(0.0, h),
            (false, false) => C64::new(0.0, -h),
        }
    })
}

/// On-disk state format.
///
/// ```json
/// {
///   "version": 1,
///   "ell": 2,
///   "s_order": 1,
///   "n": [[re, im], ...],      // ℓ² entries, row-major
///   "m": [[re, im], ...],      // ℓ² entries, row-major
///   "alpha": [[re, im], ...]   // ℓ entries
/// }
/// ```
///
/// `s_order` records the ordering the producer used; `N`, `M` and `alpha`
/// are ordering-independent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDocument {
    pub version: u32,
    pub ell: usize,
    #[serde(default)]
    pub s_order: SOrder,
    pub n: Vec<[f64; 2]>,
    pub m: Vec<[f64; 2]>,
    #[serde(default)]
    pub alpha: Vec<[f64; 2]>,
}

impl StateDocument {
    pub const VERSION: u32 = 1;

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Domain(format!("malformed state document: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state documents always serialise")
    }

    /// Checks the schema and validates the state it describes.
    pub fn into_state(self) -> Result<(GaussianState, SOrder)> {
        if self.version != Self::VERSION {
            return Err(Error::Domain(format!("unsupported state document version {}", self.version)));
        }
        let ell = self.ell;
        if self.n.len() != ell * ell || self.m.len() != ell * ell {
            return Err(Error::Validation(format!("N and M must each hold {} entries", ell * ell)));
        }
        let alpha = if self.alpha.is_empty() {
            CVector::zeros(ell)
        } else if self.alpha.len() == ell {
            CVector::from_iterator(ell, self.alpha.iter().map(|p| C64::new(p[0], p[1])))
        } else {
            return Err(Error::Validation(format!("alpha must hold {ell} entries")));
        };
        let mat = |v: &[[f64; 2]]| CMatrix::from_row_iterator(ell, ell, v.iter().map(|p| C64::new(p[0], p[1])));
        let state = GaussianState::new(mat(&self.n), mat(&self.m), alpha)?;
        Ok((state, self.s_order))
    }
}
