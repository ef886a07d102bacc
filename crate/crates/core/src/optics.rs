//! Interferometer unitaries, bare Hamiltonians and the phase-dependent mean
//! energy `W_phi`.
//!
//! Two measurement frames are supported. In the [`Convention::MainText`]
//! frame the Hamiltonian is `E|h><h|` and the wave unitary is the full
//! Mach-Zehnder `U_bs U_phi U_bs^dag`; in the [`Convention::Appendix`] frame
//! the Hamiltonian is `E|D><D|` and the wave unitary is the bare phase plate
//! `U_phi`. [`Convention::General`] carries a frame rotation `U` and behaves
//! like the appendix frame applied to `U rho U^dag`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{c, Matrix2, C64};
use crate::qstate::{to_stokes, DensityMatrix, PureState, StokesVector};

/// Tolerance on `U^dag U = I` for caller-supplied matrices.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2 {
    m: Matrix2,
}

impl Unitary2 {
    pub fn new(m: Matrix2) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let dev = (m.adjoint() * m - Matrix2::IDENTITY).max_abs();
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Unitary2 { m })
    }

    pub fn identity() -> Self {
        Unitary2 { m: Matrix2::IDENTITY }
    }

    pub fn matrix(&self) -> &Matrix2 {
        &self.m
    }

    pub fn adjoint(&self) -> Self {
        Unitary2 { m: self.m.adjoint() }
    }

    /// `self * rhs`
    pub fn then_after(&self, rhs: &Unitary2) -> Self {
        Unitary2 { m: self.m * rhs.m }
    }

    pub fn apply(&self, state: &PureState) -> PureState {
        let v = self.m.apply(state.amplitudes());
        PureState::normalized(v[0], v[1])
    }

    /// `max |U^dag U - I|`
    pub fn unitarity_error(&self) -> f64 {
        (self.m.adjoint() * self.m - Matrix2::IDENTITY).max_abs()
    }

    /// SO(3) action on Stokes vectors: `R_ij = Tr(sigma_i U sigma_j U^dag) / 2`.
    pub fn bloch_rotation(&self) -> [[f64; 3]; 3] {
        let mut r = [[0.0; 3]; 3];
        let ud = self.m.adjoint();
        for (i, row) in r.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                let t = Matrix2::pauli(i + 1) * self.m * Matrix2::pauli(j + 1) * ud;
                *entry = 0.5 * t.trace().re;
            }
        }
        r
    }

    /// True when `self = e^{i theta} other` for some global phase.
    pub fn equal_up_to_phase(&self, other: &Unitary2, tol: f64) -> bool {
        // |Tr(A^dag B)| = 2 exactly when the two differ by a phase
        let overlap = (self.m.adjoint() * other.m).trace().norm();
        (overlap - 2.0).abs() < tol
    }
}

/// Measurement/energy frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Convention {
    MainText,
    #[default]
    Appendix,
    General(Unitary2),
}

impl Convention {
    pub fn tag(&self) -> &'static str {
        match self {
            Convention::MainText => "main",
            Convention::Appendix => "appendix",
            Convention::General(_) => "general",
        }
    }

    /// Eigendirection of the bare Hamiltonian in this frame.
    pub fn hamiltonian_direction(&self) -> PureState {
        match self {
            Convention::MainText => PureState::h(),
            Convention::Appendix => PureState::d(),
            Convention::General(u) => u.adjoint().apply(&PureState::d()),
        }
    }

    pub fn hamiltonian(&self, energy_unit: f64) -> BareHamiltonian {
        BareHamiltonian {
            energy_unit,
            eigendirection: self.hamiltonian_direction(),
        }
    }

    /// Stokes vector expressed in the frame where the canonical formulas
    /// apply. Identity except for `General`.
    pub fn frame_stokes(&self, s: [f64; 3]) -> [f64; 3] {
        match self {
            Convention::General(u) => {
                let r = u.bloch_rotation();
                let mut out = [0.0; 3];
                for i in 0..3 {
                    out[i] = r[i][0] * s[0] + r[i][1] * s[1] + r[i][2] * s[2];
                }
                out
            }
            _ => s,
        }
    }

    /// Splits a Stokes vector into its particle component and the two wave
    /// components of this frame.
    pub fn split(&self, s: [f64; 3]) -> (f64, [f64; 2]) {
        match self {
            Convention::MainText => (s[0], [s[1], s[2]]),
            Convention::Appendix => (s[2], [s[0], s[1]]),
            Convention::General(_) => {
                let f = self.frame_stokes(s);
                (f[2], [f[0], f[1]])
            }
        }
    }

    /// Conjugates a canonical-frame unitary back into the lab frame.
    fn lab(&self, u: Unitary2) -> Unitary2 {
        match self {
            Convention::General(f) => f.adjoint().then_after(&u).then_after(f),
            _ => u,
        }
    }
}

/// Rank-one Hamiltonian `E|psi><psi|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BareHamiltonian {
    pub energy_unit: f64,
    pub eigendirection: PureState,
}

impl BareHamiltonian {
    pub fn new(energy_unit: f64, eigendirection: PureState) -> Result<Self> {
        if !energy_unit.is_finite() || energy_unit < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "energy unit must be finite and nonnegative, got {energy_unit}"
            )));
        }
        Ok(BareHamiltonian {
            energy_unit,
            eigendirection,
        })
    }

    pub fn matrix(&self) -> Matrix2 {
        let u = self.eigendirection.amplitudes();
        Matrix2::outer(u, u).scale(c(self.energy_unit, 0.0))
    }
}

/// Polarising beam splitter `(sigma_x + sigma_z)/sqrt(2)`.
pub fn u_bs() -> Unitary2 {
    Unitary2 {
        m: (Matrix2::SIGMA_X + Matrix2::SIGMA_Z).scale(c(FRAC_1_SQRT_2, 0.0)),
    }
}

/// Phase plate `exp(i phi sigma_z / 2)`.
pub fn u_phase(phi: f64) -> Unitary2 {
    let half = 0.5 * phi;
    Unitary2 {
        m: Matrix2::diag(C64::from_polar(1.0, half), C64::from_polar(1.0, -half)),
    }
}

/// Wave-configuration unitary for phase `phi`.
pub fn u_wave(phi: f64, conv: &Convention) -> Unitary2 {
    match conv {
        Convention::MainText => {
            let bs = u_bs();
            bs.then_after(&u_phase(phi)).then_after(&bs.adjoint())
        }
        Convention::Appendix => u_phase(phi),
        Convention::General(_) => conv.lab(u_phase(phi)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParticleSign {
    Plus,
    Minus,
}

/// `U_pm = (sigma_x pm sigma_z)/sqrt(2)`.
pub fn u_particle(sign: ParticleSign) -> Unitary2 {
    let z = match sign {
        ParticleSign::Plus => Matrix2::SIGMA_Z,
        ParticleSign::Minus => Matrix2::SIGMA_Z.scale(c(-1.0, 0.0)),
    };
    Unitary2 {
        m: (Matrix2::SIGMA_X + z).scale(c(FRAC_1_SQRT_2, 0.0)),
    }
}

/// Particle-configuration unitary expressed in the lab frame of `conv`.
pub fn particle_unitary(sign: ParticleSign, conv: &Convention) -> Unitary2 {
    conv.lab(u_particle(sign))
}

/// `U rho U^dag`
pub fn evolve(rho: &DensityMatrix, u: &Unitary2) -> DensityMatrix {
    let out = u.m * *rho.matrix() * u.m.adjoint();
    DensityMatrix::from_matrix_unchecked(out)
}

/// `Tr(H rho) = E <psi|rho|psi>`
pub fn mean_energy(rho: &DensityMatrix, h: &BareHamiltonian) -> f64 {
    h.energy_unit * rho.matrix().expectation(h.eigendirection.amplitudes()).re
}

/// Closed-form `W_phi / E` for a given Stokes vector.
pub fn w_phi_from_stokes(s: &StokesVector, phi: f64, conv: &Convention) -> f64 {
    let (sin, cos) = phi.sin_cos();
    match conv {
        Convention::MainText => 0.5 * (1.0 - s.s2 * sin + s.s3 * cos),
        Convention::Appendix => 0.5 * (1.0 + s.s1 * cos + s.s2 * sin),
        Convention::General(_) => {
            let f = conv.frame_stokes(s.as_array());
            0.5 * (1.0 + f[0] * cos + f[1] * sin)
        }
    }
}

/// Mean energy after the wave interferometer, in units of `E`.
pub fn w_phi(rho: &DensityMatrix, phi: f64, conv: &Convention) -> f64 {
    w_phi_from_stokes(&to_stokes(rho), phi, conv)
}

/// Fringe visibility: amplitude of the `W_phi` sinusoid.
pub fn visibility(rho: &DensityMatrix, conv: &Convention) -> f64 {
    let (_, wave) = conv.split(to_stokes(rho).as_array());
    wave[0].hypot(wave[1])
}

/// Closed-form `(max, min)` of `W_phi / E` over all phases.
pub fn w_phi_extrema(rho: &DensityMatrix, conv: &Convention) -> (f64, f64) {
    let v = visibility(rho, conv);
    (0.5 * (1.0 + v), 0.5 * (1.0 - v))
}

pub const DEFAULT_SCAN_POINTS: usize = 1001;
pub const MIN_SCAN_POINTS: usize = 8;

/// `W_phi / E` sampled on a uniform phase grid over `[0, 2 pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseScan {
    pub phases: Vec<f64>,
    pub energies: Vec<f64>,
}

impl PhaseScan {
    pub fn new(phases: Vec<f64>, energies: Vec<f64>) -> Result<Self> {
        if phases.len() != energies.len() {
            return Err(Error::InvalidArgument("phase and energy lengths differ".into()));
        }
        if phases.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("phases must be strictly increasing".into()));
        }
        Ok(PhaseScan { phases, energies })
    }

    pub fn max(&self) -> f64 {
        self.energies.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.energies.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record(["phi_radians", "W_over_E"]).map_err(err)?;
        for (p, e) in self.phases.iter().zip(&self.energies) {
            w.write_record([format!("{p:.12}"), format!("{e:.12}")]).map_err(err)?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Uniform grid of `n` phases over `[0, 2 pi]`, both endpoints included.
pub fn phase_grid(n: usize) -> Vec<f64> {
    let step = 2.0 * PI / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { 2.0 * PI } else { i as f64 * step })
        .collect()
}

pub fn phase_scan(rho: &DensityMatrix, conv: &Convention, n_points: usize) -> Result<PhaseScan> {
    if n_points < MIN_SCAN_POINTS {
        return Err(Error::InvalidArgument(format!(
            "phase scan needs at least {MIN_SCAN_POINTS} points, got {n_points}"
        )));
    }
    let s = to_stokes(rho);
    let phases = phase_grid(n_points);
    let energies = phases.iter().map(|&p| w_phi_from_stokes(&s, p, conv)).collect();
    Ok(PhaseScan { phases, energies })
}

/// Unitary `U` with `U|psi> = |canonical>`, where `|psi>` is the eigendirection
/// of `h` and `|canonical>` that of `target`.
///
/// `|psi>` is first given the phase that makes its leading amplitude real and
/// positive. The result is a Householder reflection (times a phase) so a state
/// already on the canonical ray maps to the identity.
pub fn frame_rotation(h: &BareHamiltonian, target: &Convention) -> Unitary2 {
    let psi = h.eigendirection.canonical_phase();
    let canon = target.hamiltonian_direction();
    let overlap = canon.inner(&psi);
    let phase = if overlap.norm() > 1e-15 {
        overlap.conj() / overlap.norm()
    } else {
        c(1.0, 0.0)
    };
    let aligned = [psi.alpha() * phase, psi.beta() * phase];
    let cv = canon.amplitudes();
    let w = [aligned[0] - cv[0], aligned[1] - cv[1]];
    let wn = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
    let reflection = if wn < 1e-14 {
        Matrix2::IDENTITY
    } else {
        let unit = [w[0] / wn, w[1] / wn];
        Matrix2::IDENTITY - Matrix2::outer(unit, unit).scale(c(2.0, 0.0))
    };
    // U psi = R (phase * psi) = canonical, exactly for the phase-fixed psi
    Unitary2 {
        m: reflection.scale(phase),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{density_from_pure, from_stokes, random_pure_state, random_state, StateKind};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn close(a: &Matrix2, b: &Matrix2, tol: f64) -> bool {
        (*a - *b).max_abs() < tol
    }

    fn stokes_of(s: [f64; 3]) -> DensityMatrix {
        from_stokes(&StokesVector::from_array(s)).unwrap()
    }

    fn phi1() -> DensityMatrix {
        density_from_pure(&PureState::new(c(0.5417, 0.6645), c(-0.4545, 0.2418)).unwrap())
    }

    #[test]
    fn beam_splitter() {
        let bs = u_bs();
        let d = bs.apply(&PureState::h());
        assert_abs_diff_eq!(d.inner(&PureState::d()).norm(), 1.0, epsilon = 1e-15);
        assert!(close(&(bs.m * bs.m), &Matrix2::IDENTITY, 1e-15));
        let conj = bs.m * Matrix2::SIGMA_Z * bs.m.adjoint();
        assert!(close(&conj, &Matrix2::SIGMA_X, 1e-15));
    }

    #[test]
    fn phase_plate() {
        assert!(close(u_phase(0.0).matrix(), &Matrix2::IDENTITY, 1e-15));
        assert!(close(u_phase(2.0 * PI).matrix(), &Matrix2::IDENTITY.scale(c(-1.0, 0.0)), 1e-15));
        assert!(close(u_phase(PI).matrix(), &Matrix2::SIGMA_Z.scale(c(0.0, 1.0)), 1e-15));
    }

    #[test]
    fn wave_unitaries() {
        assert!(close(u_wave(0.0, &Convention::MainText).matrix(), &Matrix2::IDENTITY, 1e-15));
        for phi in [0.3f64, 1.7, 4.0] {
            let want = Matrix2::IDENTITY.scale(c((phi / 2.0).cos(), 0.0))
                + Matrix2::SIGMA_X.scale(c(0.0, (phi / 2.0).sin()));
            assert!(close(u_wave(phi, &Convention::MainText).matrix(), &want, 1e-15));
        }
        let app = u_wave(FRAC_PI_2, &Convention::Appendix);
        let want = Matrix2::diag(
            C64::from_polar(1.0, PI / 4.0),
            C64::from_polar(1.0, -PI / 4.0),
        );
        assert!(close(app.matrix(), &want, 1e-15));
    }

    #[test]
    fn particle_unitaries() {
        let plus = u_particle(ParticleSign::Plus);
        let minus = u_particle(ParticleSign::Minus);
        assert!(close(plus.matrix(), u_bs().matrix(), 1e-15));
        let v = minus.apply(&PureState::d());
        assert_abs_diff_eq!(v.inner(&PureState::v()).norm(), 1.0, epsilon = 1e-15);
        for u in [plus, minus] {
            assert!(close(&(u.m * u.m), &Matrix2::IDENTITY, 1e-15));
        }
    }

    #[test]
    fn evolve_examples() {
        let rho = phi1();
        assert_eq!(evolve(&rho, &Unitary2::identity()), rho);

        let out = evolve(&stokes_of([0.0, 0.0, 1.0]), &u_wave(FRAC_PI_2, &Convention::MainText));
        let s = to_stokes(&out).as_array();
        for (got, want) in s.iter().zip([0.0, 1.0, 0.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }

        let out = evolve(&stokes_of([1.0, 0.0, 0.0]), &u_wave(FRAC_PI_2, &Convention::Appendix));
        let s = to_stokes(&out).as_array();
        for (got, want) in s.iter().zip([0.0, -1.0, 0.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn stokes_rotation_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let rho = random_state(&mut rng, StateKind::BlochBall);
            let s = to_stokes(&rho);
            let phi: f64 = rng.random_range(0.0..2.0 * PI);
            let (sin, cos) = phi.sin_cos();

            let m = to_stokes(&evolve(&rho, &u_wave(phi, &Convention::MainText)));
            assert_abs_diff_eq!(m.s1, s.s1, epsilon = 1e-12);
            assert_abs_diff_eq!(m.s2, s.s2 * cos + s.s3 * sin, epsilon = 1e-12);
            assert_abs_diff_eq!(m.s3, -s.s2 * sin + s.s3 * cos, epsilon = 1e-12);

            let a = to_stokes(&evolve(&rho, &u_wave(phi, &Convention::Appendix)));
            assert_abs_diff_eq!(a.s1, s.s1 * cos + s.s2 * sin, epsilon = 1e-12);
            assert_abs_diff_eq!(a.s2, -s.s1 * sin + s.s2 * cos, epsilon = 1e-12);
            assert_abs_diff_eq!(a.s3, s.s3, epsilon = 1e-12);
        }
    }

    #[test]
    fn mean_energy_examples() {
        let h = Convention::MainText.hamiltonian(1.0);
        assert_abs_diff_eq!(mean_energy(&density_from_pure(&PureState::h()), &h), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mixed = DensityMatrix::maximally_mixed();
        for _ in 0..10 {
            let any = BareHamiltonian::new(2.5, random_pure_state(&mut rng)).unwrap();
            assert_abs_diff_eq!(mean_energy(&mixed, &any), 1.25, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(mean_energy(&phi1(), &h), 0.7350, epsilon = 1e-4);
        assert!(BareHamiltonian::new(-1.0, PureState::h()).is_err());
    }

    #[test]
    fn w_phi_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let rho = random_state(&mut rng, StateKind::BlochBall);
            let s3 = to_stokes(&rho).s3;
            assert_abs_diff_eq!(w_phi(&rho, 0.0, &Convention::MainText), 0.5 * (1.0 + s3), epsilon = 1e-15);
        }
        let (max, min) = w_phi_extrema(&phi1(), &Convention::Appendix);
        assert_abs_diff_eq!(max, 0.9414, epsilon = 1e-4);
        assert_abs_diff_eq!(min, 0.0586, epsilon = 1e-4);

        // |D><D| in the appendix frame: S1 = 1, S2 = 0
        let d = density_from_pure(&PureState::d());
        for phi in [0.0, 0.4, 2.0, 5.5] {
            assert_abs_diff_eq!(w_phi(&d, phi, &Convention::Appendix), 0.5 * (1.0 + phi.cos()), epsilon = 1e-15);
        }
    }

    #[test]
    fn w_phi_matches_matrix_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let general = Convention::General(frame_rotation(
            &BareHamiltonian::new(1.0, random_pure_state(&mut rng)).unwrap(),
            &Convention::Appendix,
        ));
        for _ in 0..1000 {
            let rho = random_state(&mut rng, StateKind::BlochBall);
            let phi: f64 = rng.random_range(0.0..2.0 * PI);
            for conv in [Convention::MainText, Convention::Appendix, general] {
                let direct = mean_energy(&evolve(&rho, &u_wave(phi, &conv)), &conv.hamiltonian(1.0));
                assert_abs_diff_eq!(w_phi(&rho, phi, &conv), direct, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn three_point_sinusoid_reconstruction() {
        // W = a + b cos(phi) + c sin(phi); fit from phi = 0, pi/2, pi
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let rho = random_state(&mut rng, StateKind::BlochBall);
            for conv in [Convention::MainText, Convention::Appendix] {
                let w0 = w_phi(&rho, 0.0, &conv);
                let w1 = w_phi(&rho, FRAC_PI_2, &conv);
                let w2 = w_phi(&rho, PI, &conv);
                let a = 0.5 * (w0 + w2);
                let b = 0.5 * (w0 - w2);
                let cc = w1 - a;
                let scan = phase_scan(&rho, &conv, 257).unwrap();
                for (p, e) in scan.phases.iter().zip(&scan.energies) {
                    assert_abs_diff_eq!(a + b * p.cos() + cc * p.sin(), *e, epsilon = 1e-10);
                }
                assert_abs_diff_eq!(a, 0.5, epsilon = 1e-12);
                assert_abs_diff_eq!(2.0 * b.hypot(cc), visibility(&rho, &conv), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn scan_examples() {
        let flat = phase_scan(&DensityMatrix::maximally_mixed(), &Convention::Appendix, 64).unwrap();
        assert!(flat.energies.iter().all(|&e| (e - 0.5).abs() < 1e-15));

        let scan = phase_scan(&phi1(), &Convention::Appendix, 1000).unwrap();
        let (max, min) = w_phi_extrema(&phi1(), &Convention::Appendix);
        // grid error bound: V (1 - cos(pi / (n - 1))) / 2
        let grid = 0.5 * (1.0 - (PI / 999.0).cos());
        assert!(scan.max() <= max + 1e-15 && scan.max() >= max - grid);
        assert!(scan.min() >= min - 1e-15 && scan.min() <= min + grid);
        assert_abs_diff_eq!(scan.phases[0], 0.0);
        assert_abs_diff_eq!(*scan.phases.last().unwrap(), 2.0 * PI);

        assert!(phase_scan(&phi1(), &Convention::Appendix, 7).is_err());
    }

    #[test]
    fn scan_csv_header() {
        let scan = phase_scan(&phi1(), &Convention::Appendix, 8).unwrap();
        let mut buf = Vec::new();
        scan.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("phi_radians,W_over_E\n"));
        assert_eq!(text.lines().count(), 9);
    }

    #[test]
    fn frame_rotation_examples() {
        let to_app = frame_rotation(&Convention::Appendix.hamiltonian(1.0), &Convention::Appendix);
        assert!(to_app.equal_up_to_phase(&Unitary2::identity(), 1e-12));

        let from_h = frame_rotation(&Convention::MainText.hamiltonian(1.0), &Convention::Appendix);
        assert!(from_h.equal_up_to_phase(&u_bs(), 1e-12));

        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let psi = random_pure_state(&mut rng);
            let h = BareHamiltonian::new(1.0, psi).unwrap();
            let u = frame_rotation(&h, &Convention::Appendix);
            assert!(u.unitarity_error() < 1e-12);
            let mapped = u.apply(&psi);
            assert_abs_diff_eq!(mapped.inner(&PureState::d()).norm(), 1.0, epsilon = 1e-12);
            let rho = random_state(&mut rng, StateKind::BlochBall);
            let lhs = mean_energy(&rho, &h);
            let rhs = mean_energy(&evolve(&rho, &u), &Convention::Appendix.hamiltonian(1.0));
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);

            let to_main = frame_rotation(&h, &Convention::MainText);
            let rhs = mean_energy(&evolve(&rho, &to_main), &Convention::MainText.hamiltonian(1.0));
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        }
    }

    #[test]
    fn constructed_unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let g = Convention::General(frame_rotation(
            &BareHamiltonian::new(1.0, random_pure_state(&mut rng)).unwrap(),
            &Convention::Appendix,
        ));
        for _ in 0..50 {
            let phi: f64 = rng.random_range(-10.0..10.0);
            for conv in [Convention::MainText, Convention::Appendix, g] {
                assert!(u_wave(phi, &conv).unitarity_error() < 1e-12);
                assert!(particle_unitary(ParticleSign::Plus, &conv).unitarity_error() < 1e-12);
                assert!(particle_unitary(ParticleSign::Minus, &conv).unitarity_error() < 1e-12);
            }
        }
        assert!(Unitary2::new(Matrix2::SIGMA_X.scale(c(2.0, 0.0))).is_err());
    }

    #[test]
    fn bloch_rotation_matches_evolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..50 {
            let u = frame_rotation(
                &BareHamiltonian::new(1.0, random_pure_state(&mut rng)).unwrap(),
                &Convention::Appendix,
            );
            let rho = random_state(&mut rng, StateKind::BlochBall);
            let direct = to_stokes(&evolve(&rho, &u)).as_array();
            let via = Convention::General(u).frame_stokes(to_stokes(&rho).as_array());
            for k in 0..3 {
                assert_abs_diff_eq!(direct[k], via[k], epsilon = 1e-12);
            }
        }
    }
}
