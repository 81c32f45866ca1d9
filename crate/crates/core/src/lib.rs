//! Photon-number moments and cumulants of multimode Gaussian states.
//!
//! Moments are loop Hafnians of the state's adjacency matrix; cumulants are
//! Montrealers, sums over the matchings that close into a single walk
//! alternating with the fixed matching `Y = {(k, k + ℓ)}`. Every matrix
//! function ships with a brute-force combinatorial reference, and the
//! Montrealer additionally has an `O(2^ℓ ℓ^3)` power-trace evaluation.
//!
//! Vertex and mode indices are 0-based everywhere. A 1-based pair `(i, j)`
//! from the physics literature is the pair `(i - 1, j - 1)` here.
//!
//! ```
//! use photon_cumulants::gaussian::{GaussianState, StateFamily};
//! use photon_cumulants::moments::{cumulant_via_montrealer, photon_moment, ModePattern};
//!
//! let state = GaussianState::from_family(StateFamily::Thermal, 1.0, 1, 1).unwrap();
//! let second = photon_moment(&state, &ModePattern::new(vec![2]).unwrap()).unwrap();
//! assert!((second - 3.0).abs() < 1e-12);
//! let mean = cumulant_via_montrealer(&state, &[0]).unwrap();
//! assert!((mean - 1.0).abs() < 1e-12);
//! ```

pub mod error;
pub mod gaussian;
pub mod haar_mc;
pub mod matchings;
pub mod matfunc;
pub mod moments;
mod reduce;

pub use error::{Error, Result};
pub use nalgebra::Complex;

/// Complex double-precision scalar.
pub type C64 = nalgebra::Complex<f64>;
/// Dense complex matrix, row/column indices 0-based.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVector = nalgebra::DVector<C64>;
