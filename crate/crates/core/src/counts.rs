//! Simulated coincidence counting in the six polarisation bases and the
//! frequency estimators built on the counts.
//!
//! Every (seed, block, axis, repeat) tuple owns its own ChaCha stream, so
//! records can be generated in any order or in parallel and still come out
//! bit-identical.

use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::BareHamiltonian;
use crate::qstate::{DensityMatrix, PureState};

/// Coincidence rate of the source, per second.
pub const DEFAULT_RATE: f64 = 16_000.0;
/// Number of coincidence sets per measurement setting.
pub const DEFAULT_REPEATS: u32 = 100;
/// Total coincidences per axis at the default settings.
pub const DEFAULT_COUNTS_PER_AXIS: f64 = 16_000.0;

/// Projector labels of the six tomographic bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    H,
    V,
    D,
    A,
    R,
    L,
}

impl Label {
    pub fn projector(&self) -> PureState {
        match self {
            Label::H => PureState::h(),
            Label::V => PureState::v(),
            Label::D => PureState::d(),
            Label::A => PureState::a(),
            Label::R => PureState::r(),
            Label::L => PureState::l(),
        }
    }

    pub fn axis(&self) -> Axis {
        match self {
            Label::H | Label::V => Axis::Z,
            Label::D | Label::A => Axis::X,
            Label::R | Label::L => Axis::Y,
        }
    }
}

/// Pauli measurement axis. Outcome 0 is `H`, `D`, `R` for `Z`, `X`, `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    Z,
    X,
    Y,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::Z, Axis::X, Axis::Y];

    pub fn letter(&self) -> char {
        match self {
            Axis::Z => 'Z',
            Axis::X => 'X',
            Axis::Y => 'Y',
        }
    }

    pub fn index(&self) -> usize {
        match self {
            Axis::Z => 0,
            Axis::X => 1,
            Axis::Y => 2,
        }
    }

    pub fn outcome(&self, outcome: u8) -> Label {
        match (self, outcome) {
            (Axis::Z, 0) => Label::H,
            (Axis::Z, _) => Label::V,
            (Axis::X, 0) => Label::D,
            (Axis::X, _) => Label::A,
            (Axis::Y, 0) => Label::R,
            (Axis::Y, _) => Label::L,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSetting {
    pub label: Label,
    pub projector: PureState,
}

impl MeasurementSetting {
    pub fn new(label: Label) -> Self {
        MeasurementSetting {
            label,
            projector: label.projector(),
        }
    }
}

/// Coincidence tallies of one repeat on one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub axis: Axis,
    pub repeat: u32,
    pub n0: u64,
    pub n1: u64,
}

impl CountRecord {
    pub fn total(&self) -> u64 {
        self.n0 + self.n1
    }
}

/// Poisson-rate source model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Mean coincidences per second.
    pub mean_rate: f64,
    /// Integration time of one repeat, in seconds.
    pub duration_s: f64,
    pub n_repeats: u32,
    pub seed: u64,
}

impl NoiseModel {
    /// About `counts_per_axis` coincidences per axis, split over `repeats`
    /// sets at the default rate.
    pub fn with_counts_per_axis(counts_per_axis: f64, repeats: u32, seed: u64) -> Self {
        NoiseModel {
            mean_rate: DEFAULT_RATE,
            duration_s: counts_per_axis / (DEFAULT_RATE * repeats.max(1) as f64),
            n_repeats: repeats,
            seed,
        }
    }

    pub fn experimental_scale(seed: u64) -> Self {
        Self::with_counts_per_axis(DEFAULT_COUNTS_PER_AXIS, DEFAULT_REPEATS, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean_rate.is_finite() && self.mean_rate > 0.0) {
            return Err(Error::InvalidArgument(format!("mean rate {} must be positive", self.mean_rate)));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::InvalidArgument(format!("duration {} must be positive", self.duration_s)));
        }
        if self.n_repeats == 0 {
            return Err(Error::InvalidArgument("at least one repeat is required".into()));
        }
        Ok(())
    }

    /// Expected coincidences of a single repeat.
    pub fn mean_counts(&self) -> f64 {
        self.mean_rate * self.duration_s
    }
}

/// `<proj|rho|proj>`
pub fn born_prob(rho: &DensityMatrix, setting: &MeasurementSetting) -> f64 {
    rho.matrix()
        .expectation(setting.projector.amplitudes())
        .re
        .clamp(0.0, 1.0)
}

/// Independent generator for one (block, axis, repeat) cell.
pub(crate) fn stream_rng(seed: u64, block: u64, axis: Axis, repeat: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((block << 34) | ((axis.index() as u64) << 32) | repeat as u64);
    rng
}

/// Records for `noise.n_repeats` repeats of one setting with outcome-0
/// probability `p0`. `block` separates independent experiments that share a
/// seed (for instance the points of a phase scan).
pub fn simulate_axis(p0: f64, axis: Axis, noise: &NoiseModel, block: u64) -> Result<Vec<CountRecord>> {
    noise.validate()?;
    if !(0.0..=1.0).contains(&p0) {
        return Err(Error::InvalidArgument(format!("probability {p0} outside [0, 1]")));
    }
    let poisson = Poisson::new(noise.mean_counts())
        .map_err(|e| Error::InvalidArgument(format!("Poisson mean: {e}")))?;
    (0..noise.n_repeats)
        .map(|repeat| {
            let mut rng = stream_rng(noise.seed, block, axis, repeat);
            let total = poisson.sample(&mut rng) as u64;
            let n0 = Binomial::new(total, p0)
                .map_err(|e| Error::InvalidArgument(format!("binomial: {e}")))?
                .sample(&mut rng);
            Ok(CountRecord {
                axis,
                repeat,
                n0,
                n1: total - n0,
            })
        })
        .collect()
}

/// Full tomographic record set: `n_repeats` records on each of Z, X, Y.
pub fn simulate_counts(rho: &DensityMatrix, noise: &NoiseModel) -> Result<Vec<CountRecord>> {
    let mut out = Vec::with_capacity(3 * noise.n_repeats as usize);
    for axis in Axis::ALL {
        let p0 = born_prob(rho, &MeasurementSetting::new(axis.outcome(0)));
        out.extend(simulate_axis(p0, axis, noise, 0)?);
    }
    Ok(out)
}

/// `p(0|x) = N^0 / (N^0 + N^1)`
pub fn estimate_prob(record: &CountRecord) -> Result<f64> {
    estimate_outcome_prob(record, 0)
}

pub fn estimate_outcome_prob(record: &CountRecord, outcome: u8) -> Result<f64> {
    let n = record.total();
    if n == 0 {
        return Err(Error::EmptyRecord {
            axis: record.axis.letter(),
        });
    }
    let k = if outcome == 0 { record.n0 } else { record.n1 };
    Ok(k as f64 / n as f64)
}

/// `W ~ E p(0|x)` for a record taken on the Hamiltonian's own axis. Returned
/// in the energy unit of `h`.
pub fn estimate_work(record: &CountRecord, h: &BareHamiltonian) -> Result<f64> {
    let proj = record.axis.outcome(0).projector();
    if (proj.inner(&h.eigendirection).norm_sqr() - 1.0).abs() > 1e-9 {
        return Err(Error::AxisMismatch {
            record: record.axis.letter(),
        });
    }
    Ok(h.energy_unit * estimate_prob(record)?)
}

/// Summed `(n0, n1)` per axis, indexed by [`Axis::index`].
pub fn axis_totals(records: &[CountRecord]) -> [(u64, u64); 3] {
    let mut t = [(0u64, 0u64); 3];
    for r in records {
        let e = &mut t[r.axis.index()];
        e.0 += r.n0;
        e.1 += r.n1;
    }
    t
}

/// Pooled record of all repeats on `axis`.
pub fn pooled(records: &[CountRecord], axis: Axis) -> CountRecord {
    let (n0, n1) = axis_totals(records)[axis.index()];
    CountRecord { axis, repeat: 0, n0, n1 }
}

pub fn write_counts_csv<W: Write>(records: &[CountRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(|e| Error::Parse(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}

pub fn read_counts_csv<R: Read>(input: R) -> Result<Vec<CountRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["axis", "repeat", "n0", "n1"] {
        return Err(Error::Parse(format!("unexpected count header {headers:?}")));
    }
    rdr.deserialize()
        .map(|row| row.map_err(|e| Error::Parse(e.to_string())))
        .collect()
}

pub fn save_counts(records: &[CountRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_counts_csv(records, std::io::BufWriter::new(file))
}

pub fn load_counts(path: &Path) -> Result<Vec<CountRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_counts_csv(std::io::BufReader::new(file))
}
