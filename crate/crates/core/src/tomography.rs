//! Maximum-likelihood state reconstruction from Pauli-basis counts.
//!
//! States are parametrised as `rho(t) = T^dag T / Tr(T^dag T)` with a
//! lower-triangular `T`, which keeps every iterate physical. The binomial
//! likelihood is minimised with the Nelder-Mead simplex, seeded by linear
//! inversion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{CapacityErrors, CapacityReport};
use crate::counts::{axis_totals, Axis, CountRecord};
use crate::error::{Error, Result};
use crate::linalg::{c, Matrix2};
use crate::optics::Convention;
use crate::qstate::{fidelity, from_stokes, to_stokes, DensityMatrix, PureState, StokesVector};
use crate::simplex::{minimize, SimplexOptions};

/// Probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` in the likelihood.
pub const PROB_CLAMP: f64 = 1e-12;
/// Smallest admissible `Tr(T^dag T)`.
pub const MIN_TRACE: f64 = 1e-300;
/// Bootstrap runs with fewer replicates are flagged invalid.
pub const MIN_BOOTSTRAP: usize = 100;
/// Inequality tolerance applied to capacity estimates from counts.
pub const ESTIMATE_INEQUALITY_TOL: f64 = 0.05;
/// Maximum number of warm restarts after the first simplex run.
const MAX_RESTARTS: usize = 8;

/// `T = [[t0, 0], [t2 + i t3, t1]]`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TParams(pub [f64; 4]);

impl TParams {
    fn factor(&self) -> Matrix2 {
        let t = &self.0;
        Matrix2::new(c(t[0], 0.0), c(0.0, 0.0), c(t[2], t[3]), c(t[1], 0.0))
    }
}

pub fn rho_from_t(t: &TParams) -> Result<DensityMatrix> {
    let f = t.factor();
    let m = f.adjoint() * f;
    let tr = m.trace().re;
    if !tr.is_finite() || tr <= MIN_TRACE {
        return Err(Error::DegenerateParams);
    }
    Ok(DensityMatrix::from_matrix_unchecked(m.scale(c(1.0 / tr, 0.0))))
}

/// Inverse of [`rho_from_t`] normalised to `Tr(T^dag T) = 1`.
pub fn t_from_rho(rho: &DensityMatrix) -> TParams {
    // T^dag T = [[t0^2 + |z|^2, conj(z) t1], [z t1, t1^2]] with z = t2 + i t3
    let r22 = rho.entry(1, 1).re.max(0.0);
    let r21 = rho.entry(1, 0);
    if r22 < 1e-14 {
        return TParams([1.0, 0.0, 0.0, 0.0]);
    }
    let t1 = r22.sqrt();
    let z = r21 / t1;
    let t0 = (rho.entry(0, 0).re - z.norm_sqr()).max(0.0).sqrt();
    TParams([t0, t1, z.re, z.im])
}

fn outcome_zero_probs(s: [f64; 3]) -> [f64; 3] {
    // Z -> |h>, X -> |D>, Y -> |R>
    [0.5 * (1.0 + s[2]), 0.5 * (1.0 + s[0]), 0.5 * (1.0 + s[1])]
}

fn nll_totals(rho: &DensityMatrix, totals: &[(u64, u64); 3]) -> f64 {
    let p = outcome_zero_probs(to_stokes(rho).as_array());
    let mut acc = 0.0;
    for (k, &(n0, n1)) in totals.iter().enumerate() {
        let p0 = p[k].clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        if n0 > 0 {
            acc -= n0 as f64 * p0.ln();
        }
        if n1 > 0 {
            acc -= n1 as f64 * (1.0 - p0).ln();
        }
    }
    acc
}

/// Binomial negative log-likelihood of `counts` under `rho(t)`. Degenerate
/// parameters map to `+inf`.
pub fn neg_log_likelihood(t: &TParams, counts: &[CountRecord]) -> f64 {
    match rho_from_t(t) {
        Ok(rho) => nll_totals(&rho, &axis_totals(counts)),
        Err(_) => f64::INFINITY,
    }
}

/// `s_k = 2 p_k - 1` from outcome-0 probabilities ordered `(Z, X, Y)`,
/// radially projected into the Bloch ball.
pub fn linear_inversion(probs: [f64; 3]) -> StokesVector {
    let s = StokesVector::new(2.0 * probs[1] - 1.0, 2.0 * probs[2] - 1.0, 2.0 * probs[0] - 1.0);
    let r = s.radius();
    if r > 1.0 {
        StokesVector::new(s.s1 / r, s.s2 / r, s.s3 / r)
    } else {
        s
    }
}

/// Pooled outcome-0 frequencies ordered `(Z, X, Y)`.
pub fn axis_frequencies(counts: &[CountRecord]) -> Result<[f64; 3]> {
    let totals = axis_totals(counts);
    let mut out = [0.0; 3];
    for axis in Axis::ALL {
        let (n0, n1) = totals[axis.index()];
        if n0 + n1 == 0 {
            return Err(Error::MissingAxis(axis.letter()));
        }
        out[axis.index()] = n0 as f64 / (n0 + n1) as f64;
    }
    Ok(out)
}

/// Unprojected Stokes estimate `(s1, s2, s3)` straight from frequencies.
pub fn raw_stokes(counts: &[CountRecord]) -> Result<[f64; 3]> {
    let p = axis_frequencies(counts)?;
    Ok([2.0 * p[1] - 1.0, 2.0 * p[2] - 1.0, 2.0 * p[0] - 1.0])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    pub max_iters: usize,
    pub f_tol: f64,
    pub initial_step: f64,
    /// Seeds the random restart used after a non-converged run.
    pub seed: u64,
    /// When set, the result reports its fidelity with this state.
    pub target: Option<DensityMatrix>,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions {
            max_iters: 100_000,
            f_tol: 1e-10,
            initial_step: 0.1,
            seed: 0,
            target: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TomographyResult {
    pub rho_hat: DensityMatrix,
    pub neg_log_lik: f64,
    pub iterations: usize,
    pub converged: bool,
    pub fidelity_vs_target: Option<f64>,
    /// Likelihood at the linear-inversion seed.
    pub seed_neg_log_lik: f64,
}

impl TomographyResult {
    pub fn to_document(&self) -> TomographyDocument {
        let e = |i, j| {
            let z = self.rho_hat.entry(i, j);
            [z.re, z.im]
        };
        let s = to_stokes(&self.rho_hat);
        TomographyDocument {
            rho_hat: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]],
            stokes: s.as_array(),
            neg_log_lik: self.neg_log_lik,
            seed_neg_log_lik: self.seed_neg_log_lik,
            iterations: self.iterations,
            converged: self.converged,
            fidelity_vs_target: self.fidelity_vs_target,
        }
    }
}

/// Serialised [`TomographyResult`]; each matrix entry is `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyDocument {
    pub rho_hat: [[[f64; 2]; 2]; 2],
    pub stokes: [f64; 3],
    pub neg_log_lik: f64,
    pub seed_neg_log_lik: f64,
    pub iterations: usize,
    pub converged: bool,
    pub fidelity_vs_target: Option<f64>,
}

pub fn mle_reconstruct(counts: &[CountRecord], opts: &MleOptions) -> Result<TomographyResult> {
    let freqs = axis_frequencies(counts)?;
    let totals = axis_totals(counts);
    let objective = |x: &[f64]| match rho_from_t(&TParams([x[0], x[1], x[2], x[3]])) {
        Ok(rho) => nll_totals(&rho, &totals),
        Err(_) => f64::INFINITY,
    };

    let seed_rho = from_stokes(&linear_inversion(freqs))?;
    let seed_t = t_from_rho(&seed_rho);
    let seed_nll = objective(&seed_t.0);

    let simplex = SimplexOptions {
        initial_step: opts.initial_step,
        f_tol: opts.f_tol,
        max_iters: opts.max_iters,
    };
    let mut run = minimize(objective, &seed_t.0, &simplex);
    let mut iterations = run.iterations;

    if !run.converged {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let start: Vec<f64> = run
            .x
            .iter()
            .map(|x| x + opts.initial_step * rng.random_range(-1.0..1.0))
            .collect();
        let retry = minimize(objective, &start, &simplex);
        iterations += retry.iterations;
        if retry.value <= run.value || retry.converged {
            let converged = retry.converged;
            run = if retry.value <= run.value { retry } else { run };
            run.converged = converged;
        }
    }

    // warm restarts from the best vertex guard against a collapsed simplex
    if run.converged {
        for _ in 0..MAX_RESTARTS {
            let again = minimize(objective, &run.x, &simplex);
            iterations += again.iterations;
            let improved = run.value - again.value;
            if again.value < run.value {
                run.x = again.x;
                run.value = again.value;
            }
            if improved < opts.f_tol {
                break;
            }
        }
    }

    let rho_hat = rho_from_t(&TParams([run.x[0], run.x[1], run.x[2], run.x[3]]))?;
    Ok(TomographyResult {
        rho_hat,
        neg_log_lik: run.value,
        iterations,
        converged: run.converged,
        fidelity_vs_target: opts.target.map(|t| fidelity(&t, &rho_hat)),
        seed_neg_log_lik: seed_nll,
    })
}

/// Capacities estimated from one tomographic data set.
///
/// `C_p` comes from the MLE state (it needs the full spectrum). `C_d` and
/// `C_v` come directly from the measured frequencies of the particle and
/// wave axes of `conv`, so the three estimates carry independent noise and
/// the duality residual is a genuine statistical quantity.
pub fn estimate_capacities(
    counts: &[CountRecord],
    conv: &Convention,
    opts: &MleOptions,
) -> Result<(CapacityReport, TomographyResult)> {
    let tomo = mle_reconstruct(counts, opts)?;
    let c_p = to_stokes(&tomo.rho_hat).radius();
    let (particle, wave) = conv.split(raw_stokes(counts)?);
    let report = CapacityReport::with_tolerance(
        c_p,
        particle.abs(),
        wave[0].hypot(wave[1]),
        *conv,
        ESTIMATE_INEQUALITY_TOL,
    );
    Ok((report, tomo))
}

/// Sample standard deviations from a parametric bootstrap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub replicates: usize,
    /// False when fewer than [`MIN_BOOTSTRAP`] replicates were drawn.
    pub valid: bool,
    pub non_converged: usize,
    pub std_errors: CapacityErrors,
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Resamples every record as `Binomial(n0 + n1, n0 / (n0 + n1))`, with the
/// record totals held fixed, and re-estimates the capacities per replicate.
/// Replicate `i` draws from stream `i` of `seed`.
pub fn bootstrap_capacities(
    counts: &[CountRecord],
    replicates: usize,
    conv: &Convention,
    seed: u64,
) -> Result<BootstrapReport> {
    axis_frequencies(counts)?;
    let opts = MleOptions::default();
    let draws: Vec<Result<(CapacityReport, bool)>> = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let resampled: Vec<CountRecord> = counts
                .iter()
                .map(|r| {
                    let n = r.total();
                    if n == 0 {
                        return *r;
                    }
                    let p = r.n0 as f64 / n as f64;
                    let n0 = Binomial::new(n, p).expect("p in [0, 1]").sample(&mut rng);
                    CountRecord { n0, n1: n - n0, ..*r }
                })
                .collect();
            let (report, tomo) = estimate_capacities(&resampled, conv, &opts)?;
            Ok((report, tomo.converged))
        })
        .collect();

    let mut cp = Vec::with_capacity(replicates);
    let mut cd = Vec::with_capacity(replicates);
    let mut cv = Vec::with_capacity(replicates);
    let mut res = Vec::with_capacity(replicates);
    let mut non_converged = 0;
    for d in draws {
        let (r, ok) = d?;
        cp.push(r.c_p);
        cd.push(r.c_d);
        cv.push(r.c_v);
        res.push(r.signed_residual());
        non_converged += usize::from(!ok);
    }
    Ok(BootstrapReport {
        replicates,
        valid: replicates >= MIN_BOOTSTRAP,
        non_converged,
        std_errors: CapacityErrors {
            c_p: sample_std(&cp),
            c_d: sample_std(&cd),
            c_v: sample_std(&cv),
            residual: sample_std(&res),
        },
    })
}

/// Counts equal to the rounded expectation values, `n` per axis.
pub fn expected_counts(rho: &DensityMatrix, n: u64) -> Vec<CountRecord> {
    let p = outcome_zero_probs(to_stokes(rho).as_array());
    Axis::ALL
        .iter()
        .map(|&axis| {
            let n0 = (p[axis.index()] * n as f64).round() as u64;
            CountRecord { axis, repeat: 0, n0, n1: n - n0 }
        })
        .collect()
}

/// Pure state with the Bloch direction of `s`, used for reporting.
pub fn nearest_pure(s: &StokesVector) -> Option<PureState> {
    let r = s.radius();
    if r < 1e-12 {
        return None;
    }
    let (x, y, z) = (s.s1 / r, s.s2 / r, s.s3 / r);
    let theta = z.clamp(-1.0, 1.0).acos();
    let phase = y.atan2(x);
    Some(PureState::normalized(
        c((0.5 * theta).cos(), 0.0),
        crate::linalg::C64::from_polar((0.5 * theta).sin(), phase),
    ))
}
