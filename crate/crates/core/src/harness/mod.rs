//! Experiment runner: presets, the three figure reproductions, the property
//! suite and the report types the CLI writes.

mod config;
mod figures;
mod properties;
mod reference;
mod report;

pub use config::{preset, ExperimentConfig, NamedState, DEFAULT_BOOTSTRAP, MIXED, PRESET_NAMES};
pub use figures::*;
pub use properties::*;
pub use reference::{reference, Bounds, Cited, ReferenceTable, StateReference};
pub use report::{Check, CheckKind, FigureReport, Quantity, StateRow};
