//! Shared fixtures for the criterion benches.

use spdc_core::{BeamSpec, BiphotonModel, LGIndex, PumpSpec, TransversePoint};

pub fn beam() -> BeamSpec {
    BeamSpec::from_nm_mm(351.1, 1.0).expect("valid beam")
}

pub fn lg_pump(p: u32, l: i32) -> PumpSpec {
    PumpSpec::lg(LGIndex { p, l }, beam())
}

/// Thin-crystal model with a 7 mm crystal and detectors 1 m away.
pub fn thin_model(p: u32, l: i32) -> BiphotonModel {
    BiphotonModel::thin(lg_pump(p, l), 7e-3, 1.0).expect("valid model")
}

/// `n` points on a square of half-width `half` in row-major order.
pub fn square_points(half: f64, n: usize) -> Vec<TransversePoint> {
    let step = 2.0 * half / (n - 1) as f64;
    (0..n * n)
        .map(|k| TransversePoint::new(-half + (k % n) as f64 * step, -half + (k / n) as f64 * step))
        .collect()
}
