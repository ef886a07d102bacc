//! Qubit states: pure amplitudes, density matrices, Stokes vectors and the
//! closed-form spectral quantities used everywhere else.
//!
//! Stokes components are defined as `S_k = Tr(rho sigma_k)` with the standard
//! Pauli matrices, so `s1 = 2 Re rho_12`, `s2 = -2 Im rho_12`,
//! `s3 = rho_11 - rho_22`. Basis order is `(|h>, |v>)`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, Matrix2, C64};

/// Allowed deviation of `|alpha|^2 + |beta|^2` from one on ingest.
pub const NORMALIZATION_TOL: f64 = 1e-3;
/// Elementwise Hermiticity and trace tolerance for density matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted as positive semidefinite.
pub const PSD_TOL: f64 = -1e-10;
/// Stokes radii above `1 + BLOCH_REJECT_TOL` are rejected outright.
pub const BLOCH_REJECT_TOL: f64 = 1e-6;

/// Normalised pure state `alpha|h> + beta|v>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    alpha: C64,
    beta: C64,
}

impl PureState {
    /// Builds a state from amplitudes that are normalised to within
    /// [`NORMALIZATION_TOL`]; the stored amplitudes are renormalised exactly.
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        if ![alpha.re, alpha.im, beta.re, beta.im].iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Normalization {
                norm,
                tolerance: NORMALIZATION_TOL,
            });
        }
        Ok(Self::normalized(alpha, beta))
    }

    /// Normalises an arbitrary nonzero vector.
    pub(crate) fn normalized(alpha: C64, beta: C64) -> Self {
        let n = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        PureState {
            alpha: alpha / n,
            beta: beta / n,
        }
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn beta(&self) -> C64 {
        self.beta
    }

    pub fn amplitudes(&self) -> [C64; 2] {
        [self.alpha, self.beta]
    }

    /// The orthogonal state `(-beta*, alpha*)`.
    pub fn orthogonal(&self) -> PureState {
        PureState {
            alpha: -self.beta.conj(),
            beta: self.alpha.conj(),
        }
    }

    /// Same ray with the first nonzero amplitude made real and positive.
    pub fn canonical_phase(&self) -> PureState {
        let lead = if self.alpha.norm() > 1e-15 { self.alpha } else { self.beta };
        let phase = lead.conj() / lead.norm();
        PureState {
            alpha: self.alpha * phase,
            beta: self.beta * phase,
        }
    }

    /// `<self|other>`
    pub fn inner(&self, other: &PureState) -> C64 {
        self.alpha.conj() * other.alpha + self.beta.conj() * other.beta
    }

    pub fn h() -> Self {
        PureState { alpha: c(1.0, 0.0), beta: c(0.0, 0.0) }
    }
    pub fn v() -> Self {
        PureState { alpha: c(0.0, 0.0), beta: c(1.0, 0.0) }
    }
    pub fn d() -> Self {
        PureState { alpha: c(FRAC_1_SQRT_2, 0.0), beta: c(FRAC_1_SQRT_2, 0.0) }
    }
    pub fn a() -> Self {
        PureState { alpha: c(FRAC_1_SQRT_2, 0.0), beta: c(-FRAC_1_SQRT_2, 0.0) }
    }
    pub fn r() -> Self {
        PureState { alpha: c(FRAC_1_SQRT_2, 0.0), beta: c(0.0, FRAC_1_SQRT_2) }
    }
    pub fn l() -> Self {
        PureState { alpha: c(FRAC_1_SQRT_2, 0.0), beta: c(0.0, -FRAC_1_SQRT_2) }
    }
}

/// Real Stokes (Bloch) components; `s0` is identically one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StokesVector {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesVector {
    pub fn new(s1: f64, s2: f64, s3: f64) -> Self {
        StokesVector { s1, s2, s3 }
    }

    pub fn s0(&self) -> f64 {
        1.0
    }

    pub fn radius(&self) -> f64 {
        (self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3).sqrt()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.s1, self.s2, self.s3]
    }

    pub fn from_array(s: [f64; 3]) -> Self {
        StokesVector::new(s[0], s[1], s[2])
    }
}

/// A 2x2 Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    m: Matrix2,
}

impl DensityMatrix {
    /// Validates `m` against the density-matrix invariants.
    pub fn new(m: Matrix2) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let herm = (m - m.adjoint()).max_abs();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian ({herm:e})")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > HERMITIAN_TOL || tr.im.abs() > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} != 1")));
        }
        let rho = DensityMatrix::from_matrix_unchecked(m);
        let (_, lmin) = eigvals(&rho);
        if lmin < PSD_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {lmin:e}")));
        }
        Ok(rho)
    }

    /// Symmetrises `m` to exact Hermiticity; callers guarantee the rest.
    pub(crate) fn from_matrix_unchecked(m: Matrix2) -> Self {
        let h = (m + m.adjoint()).scale(c(0.5, 0.0));
        DensityMatrix { m: h }
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix {
            m: Matrix2::IDENTITY.scale(c(0.5, 0.0)),
        }
    }

    pub fn matrix(&self) -> &Matrix2 {
        &self.m
    }

    /// Entry `rho_ij` with zero-based indices.
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.m.0[i][j]
    }

    pub fn purity(&self) -> f64 {
        (self.m * self.m).trace().re
    }

    pub fn stokes(&self) -> StokesVector {
        to_stokes(self)
    }
}

/// `rho = |phi><phi|`
pub fn density_from_pure(state: &PureState) -> DensityMatrix {
    let u = state.amplitudes();
    DensityMatrix::from_matrix_unchecked(Matrix2::outer(u, u))
}

pub fn to_stokes(rho: &DensityMatrix) -> StokesVector {
    let m = rho.matrix();
    StokesVector {
        s1: 2.0 * m.0[0][1].re,
        s2: -2.0 * m.0[0][1].im,
        s3: (m.0[0][0] - m.0[1][1]).re,
    }
}

/// `rho = (I + s1 X + s2 Y + s3 Z) / 2`. Radii marginally above one are
/// pulled back onto the sphere.
pub fn from_stokes(s: &StokesVector) -> Result<DensityMatrix> {
    let arr = s.as_array();
    if !arr.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let r = s.radius();
    if r > 1.0 + BLOCH_REJECT_TOL {
        return Err(Error::BlochViolation { radius: r });
    }
    let k = if r > 1.0 { 1.0 / r } else { 1.0 };
    let (s1, s2, s3) = (s.s1 * k, s.s2 * k, s.s3 * k);
    let m = Matrix2::new(
        c(0.5 * (1.0 + s3), 0.0),
        c(0.5 * s1, -0.5 * s2),
        c(0.5 * s1, 0.5 * s2),
        c(0.5 * (1.0 - s3), 0.0),
    );
    Ok(DensityMatrix { m })
}

/// `(lambda_max, lambda_min) = ((1 + r)/2, (1 - r)/2)`.
pub fn eigvals(rho: &DensityMatrix) -> (f64, f64) {
    let r = to_stokes(rho).radius();
    (0.5 * (1.0 + r), 0.5 * (1.0 - r))
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`, evaluated with
/// the qubit identity `Tr(rho sigma) + 2 sqrt(det rho det sigma)`.
pub fn fidelity(rho_ideal: &DensityMatrix, rho_exp: &DensityMatrix) -> f64 {
    let overlap = (*rho_ideal.matrix() * *rho_exp.matrix()).trace().re;
    let d1 = rho_ideal.matrix().det().re.max(0.0);
    let d2 = rho_exp.matrix().det().re.max(0.0);
    (overlap + 2.0 * (d1 * d2).sqrt()).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    /// Haar-uniform pure states (uniform on the Bloch sphere).
    Pure,
    /// Uniform in the Bloch ball: radius distributed with density `3 r^2`.
    BlochBall,
}

/// Uniformly random unit vector in three dimensions.
fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-12 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Haar-random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R) -> PureState {
    loop {
        let x: [f64; 4] = [
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        ];
        let n2: f64 = x.iter().map(|v| v * v).sum();
        if n2 > 1e-24 {
            return PureState::normalized(c(x[0], x[1]), c(x[2], x[3]));
        }
    }
}

pub fn random_state<R: Rng + ?Sized>(rng: &mut R, kind: StateKind) -> DensityMatrix {
    match kind {
        StateKind::Pure => density_from_pure(&random_pure_state(rng)),
        StateKind::BlochBall => {
            let dir = random_direction(rng);
            let u: f64 = rng.random();
            let r = u.cbrt();
            from_stokes(&StokesVector::new(r * dir[0], r * dir[1], r * dir[2]))
                .expect("radius within the unit ball")
        }
    }
}

/// On-disk state description: either amplitudes or a Stokes vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stokes: Option<[f64; 3]>,
}

impl StateRecord {
    pub fn to_density(&self) -> Result<DensityMatrix> {
        match (self.alpha, self.beta, self.stokes) {
            (Some(a), Some(b), None) => {
                Ok(density_from_pure(&PureState::new(c(a[0], a[1]), c(b[0], b[1]))?))
            }
            (None, None, Some(s)) => from_stokes(&StokesVector::from_array(s)),
            _ => Err(Error::Parse(
                "state record needs exactly one of {alpha, beta} or stokes".into(),
            )),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
