//! Transverse two-photon state of spontaneous parametric down-conversion
//! pumped by Laguerre-Gaussian beams.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod biphoton;
pub mod decomposition;
pub mod error;
pub mod hom;
pub mod modes;
pub mod numerics;

pub use biphoton::{BiphotonModel, CrystalParams, PumpSpec, Wavevector};
pub use decomposition::{CoefficientKey, CoefficientTable, Verdict, WitnessReport};
pub use error::{Error, Result};
pub use hom::{BeamSplitterSpec, CoincidenceMap, Regime, ScanGrid};
pub use modes::{BeamSpec, HGIndex, LGIndex, TransverseMode, TransversePoint};
pub use numerics::QuadratureSpec;

pub use num_complex;
