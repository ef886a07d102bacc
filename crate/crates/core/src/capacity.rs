//! Work capacities of a qubit battery and the duality relations between them.
//!
//! All capacities are the spread `max - min` of the mean energy reachable by
//! a family of unitaries:
//!
//! * `C_p`: every unitary, giving `r E`;
//! * `C_v`: the wave interferometer over all phases, giving `V E`;
//! * `C_d`: the two which-path unitaries `U_pm`, giving `|S_par| E`.
//!
//! The closed forms live next to brute-force oracles that evaluate the same
//! optimisations numerically through explicit matrices.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, Matrix2, C64};
use crate::optics::{evolve, mean_energy, particle_unitary, u_wave, BareHamiltonian, Convention, ParticleSign};
use crate::qstate::{to_stokes, DensityMatrix, StokesVector};

/// Absolute tolerance (units of `E`) of the inequality flag.
pub const INEQUALITY_TOL: f64 = 1e-9;

/// Standard errors attached to a capacity estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityErrors {
    pub c_p: f64,
    pub c_d: f64,
    pub c_v: f64,
    pub residual: f64,
}

/// Capacities in units of `E` together with the duality diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityReport {
    pub c_p: f64,
    pub c_d: f64,
    pub c_v: f64,
    pub convention: Convention,
    /// `|C_p^2 - C_d^2 - C_v^2|`
    pub equality_residual: f64,
    pub inequality_ok: bool,
    pub std_errors: Option<CapacityErrors>,
}

impl CapacityReport {
    pub fn from_capacities(c_p: f64, c_d: f64, c_v: f64, convention: Convention) -> Self {
        Self::with_tolerance(c_p, c_d, c_v, convention, INEQUALITY_TOL)
    }

    /// Same as [`from_capacities`](Self::from_capacities) with a custom
    /// inequality tolerance, used for noisy estimates.
    pub fn with_tolerance(c_p: f64, c_d: f64, c_v: f64, convention: Convention, tol: f64) -> Self {
        CapacityReport {
            c_p,
            c_d,
            c_v,
            convention,
            equality_residual: (c_p * c_p - c_d * c_d - c_v * c_v).abs(),
            inequality_ok: inequality_holds(c_p, c_d, c_v, tol),
            std_errors: None,
        }
    }

    /// Signed `C_p^2 - C_d^2 - C_v^2`.
    pub fn signed_residual(&self) -> f64 {
        self.c_p * self.c_p - self.c_d * self.c_d - self.c_v * self.c_v
    }

    pub fn to_document(&self, e_joules: f64) -> CapacityDocument {
        CapacityDocument {
            c_p: self.c_p,
            c_d: self.c_d,
            c_v: self.c_v,
            equality_residual: self.equality_residual,
            inequality_ok: self.inequality_ok,
            convention: self.convention.tag().to_string(),
            e_joules,
            c_p_joules: self.c_p * e_joules,
            c_d_joules: self.c_d * e_joules,
            c_v_joules: self.c_v * e_joules,
            std_errors: self.std_errors,
        }
    }
}

/// Serialised form of a [`CapacityReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityDocument {
    pub c_p: f64,
    pub c_d: f64,
    pub c_v: f64,
    pub equality_residual: f64,
    pub inequality_ok: bool,
    pub convention: String,
    #[serde(rename = "E_joules")]
    pub e_joules: f64,
    pub c_p_joules: f64,
    pub c_d_joules: f64,
    pub c_v_joules: f64,
    pub std_errors: Option<CapacityErrors>,
}

/// `max(C_d, C_v) <= C_p <= C_d + C_v` within `tol`.
pub fn inequality_holds(c_p: f64, c_d: f64, c_v: f64, tol: f64) -> bool {
    c_d.max(c_v) <= c_p + tol && c_p <= c_d + c_v + tol
}

/// `(C_p, C_d, C_v) / E` from a Stokes vector.
pub fn capacities_from_stokes(s: &StokesVector, conv: &Convention) -> (f64, f64, f64) {
    let (particle, wave) = conv.split(s.as_array());
    (s.radius(), particle.abs(), wave[0].hypot(wave[1]))
}

/// Full-unitary capacity `E (lambda_max - lambda_min) = r E`. Independent of
/// the eigendirection of `h`.
pub fn cap_p(rho: &DensityMatrix, h: &BareHamiltonian) -> f64 {
    h.energy_unit * to_stokes(rho).radius()
}

/// Wave capacity `V E`, in units of `E`.
pub fn cap_v(rho: &DensityMatrix, conv: &Convention) -> f64 {
    capacities_from_stokes(&to_stokes(rho), conv).2
}

/// Particle capacity `|S_par| E`, in units of `E`.
pub fn cap_d(rho: &DensityMatrix, conv: &Convention) -> f64 {
    capacities_from_stokes(&to_stokes(rho), conv).1
}

pub fn duality_check(rho: &DensityMatrix, conv: &Convention) -> CapacityReport {
    let (c_p, c_d, c_v) = capacities_from_stokes(&to_stokes(rho), conv);
    CapacityReport::from_capacities(c_p, c_d, c_v, *conv)
}

/// Mean energies `Tr(H U_pm rho U_pm^dag) / E` for the two which-path
/// unitaries, evaluated with explicit matrices.
pub fn particle_energies(rho: &DensityMatrix, conv: &Convention) -> [f64; 2] {
    let h = conv.hamiltonian(1.0);
    [ParticleSign::Plus, ParticleSign::Minus]
        .map(|sign| mean_energy(&evolve(rho, &particle_unitary(sign, conv)), &h))
}

pub const MIN_EULER_DENSITY: usize = 20;
pub const MIN_ORACLE_PHASES: usize = 100;

fn rz(theta: f64) -> Matrix2 {
    Matrix2::diag(C64::from_polar(1.0, -0.5 * theta), C64::from_polar(1.0, 0.5 * theta))
}

fn ry(theta: f64) -> Matrix2 {
    let (s, co) = (0.5 * theta).sin_cos();
    Matrix2::new(c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0))
}

/// Oracle for `C_p`: spread of `Tr(H U rho U^dag)` over the Euler-angle grid
/// `U = Rz(a) Ry(b) Rz(c)` with `density` points per angle. Approaches
/// [`cap_p`] from below.
pub fn brute_force_cap_p(rho: &DensityMatrix, h: &BareHamiltonian, density: usize) -> Result<f64> {
    if density < MIN_EULER_DENSITY {
        return Err(Error::InvalidArgument(format!(
            "Euler grid density must be at least {MIN_EULER_DENSITY}, got {density}"
        )));
    }
    let psi = h.eigendirection.amplitudes();
    let rm = *rho.matrix();
    let azimuth: Vec<Matrix2> = (0..density)
        .map(|i| rz(2.0 * PI * i as f64 / density as f64))
        .collect();
    let polar: Vec<Matrix2> = (0..density)
        .map(|j| ry(PI * j as f64 / (density - 1) as f64))
        .collect();

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for a in &azimuth {
        for b in &polar {
            let ab = *a * *b;
            for cz in &azimuth {
                let u = ab * *cz;
                // Tr(H U rho U^dag) with H = E|psi><psi|: only U^dag psi is needed
                let v = u.adjoint().apply(psi);
                let e = h.energy_unit * rm.expectation(v).re;
                lo = lo.min(e);
                hi = hi.max(e);
            }
        }
    }
    Ok(hi - lo)
}

/// Oracle for `C_v`: spread of the matrix-evaluated `W_phi` over `n_phi`
/// equally spaced phases in `[0, 2 pi)`.
pub fn brute_force_cap_v(rho: &DensityMatrix, conv: &Convention, n_phi: usize) -> Result<f64> {
    if n_phi < MIN_ORACLE_PHASES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_ORACLE_PHASES} phases, got {n_phi}"
        )));
    }
    let h = conv.hamiltonian(1.0);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n_phi {
        let phi = 2.0 * PI * i as f64 / n_phi as f64;
        let e = mean_energy(&evolve(rho, &u_wave(phi, conv)), &h);
        lo = lo.min(e);
        hi = hi.max(e);
    }
    Ok(hi - lo)
}

/// Upper bound on `cap_v - brute_force_cap_v` for a visibility `v`.
pub fn cap_v_grid_bound(v: f64, n_phi: usize) -> f64 {
    v * PI * PI / (2.0 * (n_phi * n_phi) as f64)
}
