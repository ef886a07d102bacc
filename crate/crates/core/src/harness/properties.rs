//! Randomised sweeps over the capacity and interferometer invariants.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::{
    brute_force_cap_p, brute_force_cap_v, cap_p, cap_v_grid_bound, capacities_from_stokes, inequality_holds,
    particle_energies, INEQUALITY_TOL,
};
use crate::error::{Error, Result};
use crate::optics::{evolve, frame_rotation, mean_energy, u_wave, w_phi_from_stokes, BareHamiltonian, Convention};
use crate::qstate::{random_pure_state, random_state, to_stokes, DensityMatrix, StateKind, StokesVector};

pub const MIN_PROPERTY_STATES: usize = 1000;
/// States beyond this count skip the expensive oracle sweeps.
pub const ORACLE_STATES: usize = 1000;
pub const PROPERTY_EQUALITY_TOL: f64 = 1e-10;
pub const CONSISTENCY_TOL: f64 = 1e-12;
pub const CAP_P_GRID_DENSITY: usize = 50;
pub const CAP_P_GRID_TOL: f64 = 5e-3;
pub const CAP_V_PHASES: usize = 200;

/// Stokes map under test; swapped out to check that the suite catches bugs.
pub type StokesFn = fn(&DensityMatrix) -> StokesVector;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyOutcome {
    pub name: String,
    pub samples: usize,
    pub violations: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertySummary {
    pub seed: u64,
    pub n_states: usize,
    pub properties: Vec<PropertyOutcome>,
    /// First violating state, with its Stokes vector.
    pub first_failure: Option<String>,
}

impl PropertySummary {
    pub fn violations(&self) -> usize {
        self.properties.iter().map(|p| p.violations).sum()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }
}

struct Probe {
    /// `(property, error, tolerance, violated)`
    results: Vec<(&'static str, f64, f64, bool)>,
    failure: Option<String>,
}

impl Probe {
    fn record(&mut self, name: &'static str, err: f64, tol: f64, ok: bool, state: &StokesVector) {
        if !ok && self.failure.is_none() {
            self.failure = Some(format!(
                "{name}: stokes = [{:.17e}, {:.17e}, {:.17e}], error {err:.3e} (tol {tol:e})",
                state.s1, state.s2, state.s3
            ));
        }
        self.results.push((name, err, tol, !ok));
    }
}

fn probe_state(index: usize, seed: u64, stokes: StokesFn) -> Probe {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let rho = random_state(&mut rng, StateKind::BlochBall);
    let phi = rng.random_range(0.0..std::f64::consts::TAU);
    let h_dir = random_pure_state(&mut rng);
    let s = stokes(&rho);
    let truth = to_stokes(&rho);
    let mut p = Probe {
        results: Vec::with_capacity(12),
        failure: None,
    };

    for conv in [Convention::MainText, Convention::Appendix] {
        let (c_p, c_d, c_v) = capacities_from_stokes(&s, &conv);
        let res = (c_p * c_p - c_d * c_d - c_v * c_v).abs();
        p.record("equality", res, PROPERTY_EQUALITY_TOL, res < PROPERTY_EQUALITY_TOL, &truth);
        let ok = inequality_holds(c_p, c_d, c_v, INEQUALITY_TOL);
        let excess = (c_d.max(c_v) - c_p).max(c_p - c_d - c_v).max(0.0);
        p.record("inequality", excess, INEQUALITY_TOL, ok, &truth);

        // closed form against explicit matrices
        let h = conv.hamiltonian(1.0);
        let direct = mean_energy(&evolve(&rho, &u_wave(phi, &conv)), &h);
        let err = (w_phi_from_stokes(&s, phi, &conv) - direct).abs();
        p.record("w_phi consistency", err, CONSISTENCY_TOL, err < CONSISTENCY_TOL, &truth);

        let [a, b] = particle_energies(&rho, &conv);
        let err = ((a - b).abs() - c_d).abs();
        p.record("particle spread", err, CONSISTENCY_TOL, err < CONSISTENCY_TOL, &truth);

        let err = (c_p - (0.5 * (1.0 + s.radius()) - 0.5 * (1.0 - s.radius()))).abs();
        let (lmax, lmin) = crate::qstate::eigvals(&rho);
        let err = err.max((c_p - (lmax - lmin)).abs());
        p.record("spectral C_p", err, CONSISTENCY_TOL, err < CONSISTENCY_TOL, &truth);
    }

    let h = BareHamiltonian::new(1.0, h_dir).expect("unit energy");
    let general = Convention::General(frame_rotation(&h, &Convention::Appendix));
    let (c_p, c_d, c_v) = capacities_from_stokes(&s, &general);
    let res = (c_p * c_p - c_d * c_d - c_v * c_v).abs();
    p.record("frame covariance", res, PROPERTY_EQUALITY_TOL, res < PROPERTY_EQUALITY_TOL, &truth);
    let err = (w_phi_from_stokes(&s, phi, &general)
        - mean_energy(&evolve(&rho, &u_wave(phi, &general)), &general.hamiltonian(1.0)))
    .abs();
    p.record("frame w_phi consistency", err, CONSISTENCY_TOL, err < CONSISTENCY_TOL, &truth);

    if index < ORACLE_STATES {
        let exact = cap_p(&rho, &h);
        let oracle = brute_force_cap_p(&rho, &h, CAP_P_GRID_DENSITY).expect("valid density");
        let ok = oracle <= exact + INEQUALITY_TOL && exact - oracle <= CAP_P_GRID_TOL;
        p.record("cap_p oracle", (exact - oracle).abs(), CAP_P_GRID_TOL, ok, &truth);

        for conv in [Convention::Appendix, general] {
            let cv = capacities_from_stokes(&s, &conv).2;
            let oracle = brute_force_cap_v(&rho, &conv, CAP_V_PHASES).expect("enough phases");
            let bound = cap_v_grid_bound(cv, CAP_V_PHASES) + 1e-12;
            let ok = oracle <= cv + 1e-12 && cv - oracle <= bound;
            p.record("cap_v oracle", (cv - oracle).abs(), bound, ok, &truth);
        }
    }
    p
}

/// Sweeps `n_states` Bloch-ball states through every invariant using the
/// library's own Stokes map.
pub fn run_property_suite(seed: u64, n_states: usize) -> Result<PropertySummary> {
    run_property_suite_with(seed, n_states, to_stokes)
}

/// Same as [`run_property_suite`] with an injected Stokes map. State `i` is
/// drawn from stream `i` of `seed`, so the result is independent of the
/// thread count.
pub fn run_property_suite_with(seed: u64, n_states: usize, stokes: StokesFn) -> Result<PropertySummary> {
    if n_states < MIN_PROPERTY_STATES {
        return Err(Error::InvalidArgument(format!(
            "the property suite needs at least {MIN_PROPERTY_STATES} states, got {n_states}"
        )));
    }
    let probes: Vec<Probe> = (0..n_states)
        .into_par_iter()
        .map(|i| probe_state(i, seed, stokes))
        .collect();

    let mut properties: Vec<PropertyOutcome> = Vec::new();
    let mut first_failure = None;
    for probe in probes {
        if first_failure.is_none() {
            first_failure = probe.failure;
        }
        for (name, err, tol, violated) in probe.results {
            let entry = match properties.iter_mut().position(|p| p.name == name) {
                Some(i) => &mut properties[i],
                None => {
                    properties.push(PropertyOutcome {
                        name: name.to_string(),
                        samples: 0,
                        violations: 0,
                        max_error: 0.0,
                        tolerance: tol,
                    });
                    properties.last_mut().expect("just pushed")
                }
            };
            entry.samples += 1;
            entry.violations += usize::from(violated);
            entry.max_error = entry.max_error.max(err);
            entry.tolerance = entry.tolerance.max(tol);
        }
    }
    Ok(PropertySummary {
        seed,
        n_states,
        properties,
        first_failure,
    })
}
