//! Laguerre-Gaussian and Hermite-Gaussian transverse modes.
//!
//! Conventions used throughout the crate:
//!
//! * fields are normalized to unit L² norm over every transverse plane;
//! * the azimuthal factor is `e^{+ilφ}` and the propagation phase is
//!   `exp(i kρ²/2R(z) - i (N+1) arctan(z/z_R))` (time dependence `e^{ikz - iωt}`);
//! * Fourier transforms use the unitary kernel `e^{-i q·ρ} / 2π`.

mod converter;
mod hg;
mod lg;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{quad_plane, QuadratureSpec};

pub use converter::{pi2_convert, ConverterOrientation, Pi2Converter};
pub use hg::{hg_field, HgMode};
pub use lg::{lg_field, lg_fourier_profile, FourierProfile, LgMode};

/// Highest mode order `2p + |l|` or `m + n` accepted anywhere.
pub const MAX_MODE_ORDER: u32 = 200;

/// Laguerre-Gaussian mode label: radial index `p`, azimuthal (OAM) index `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LGIndex {
    pub p: u32,
    pub l: i32,
}

impl LGIndex {
    pub fn new(p: u32, l: i32) -> Result<Self> {
        let idx = Self { p, l };
        if idx.order() > MAX_MODE_ORDER {
            return Err(Error::Domain(format!(
                "LG order 2p+|l| = {} exceeds {MAX_MODE_ORDER} (p = {p}, l = {l})",
                idx.order()
            )));
        }
        Ok(idx)
    }

    pub fn order(&self) -> u32 {
        2 * self.p + self.l.unsigned_abs()
    }

    /// Every LG index with order at most `n_max`, ordered by (l, p).
    pub fn up_to_order(n_max: u32) -> Vec<LGIndex> {
        let n = n_max as i32;
        let mut out = Vec::new();
        for l in -n..=n {
            for p in 0..=((n_max - l.unsigned_abs()) / 2) {
                out.push(LGIndex { p, l });
            }
        }
        out
    }
}

impl std::fmt::Display for LGIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LG(p={}, l={})", self.p, self.l)
    }
}

/// Hermite-Gaussian mode label; `m` counts nodes along x, `n` along y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HGIndex {
    pub m: u32,
    pub n: u32,
}

impl HGIndex {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        if m + n > MAX_MODE_ORDER {
            return Err(Error::Domain(format!(
                "HG order m+n = {} exceeds {MAX_MODE_ORDER}",
                m + n
            )));
        }
        Ok(Self { m, n })
    }

    pub fn order(&self) -> u32 {
        self.m + self.n
    }
}

impl std::fmt::Display for HGIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "HG(m={}, n={})", self.m, self.n)
    }
}

/// Gaussian-family beam parameters, all lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSpec {
    pub wavelength: f64,
    /// 1/e field radius at the waist plane.
    pub waist: f64,
    pub waist_plane_z: f64,
}

impl BeamSpec {
    pub fn new(wavelength: f64, waist: f64, waist_plane_z: f64) -> Result<Self> {
        let beam = Self { wavelength, waist, waist_plane_z };
        beam.validate()?;
        Ok(beam)
    }

    /// Convenience constructor from nanometers and millimeters, waist at `z = 0`.
    pub fn from_nm_mm(wavelength_nm: f64, waist_mm: f64) -> Result<Self> {
        Self::new(wavelength_nm * 1e-9, waist_mm * 1e-3, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(Error::Domain(format!("wavelength must be positive, got {}", self.wavelength)));
        }
        if !(self.waist > 0.0 && self.waist.is_finite()) {
            return Err(Error::Domain(format!("waist must be positive, got {}", self.waist)));
        }
        if !self.waist_plane_z.is_finite() {
            return Err(Error::Domain("waist plane position must be finite".into()));
        }
        Ok(())
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength
    }

    pub fn rayleigh_range(&self) -> f64 {
        std::f64::consts::PI * self.waist * self.waist / self.wavelength
    }

    /// Beam radius at plane `z`.
    pub fn radius_at(&self, z: f64) -> f64 {
        let t = (z - self.waist_plane_z) / self.rayleigh_range();
        self.waist * (1.0 + t * t).sqrt()
    }

    pub(crate) fn propagation(&self, z: f64) -> Propagation {
        let dz = z - self.waist_plane_z;
        let zr = self.rayleigh_range();
        let t = dz / zr;
        let radius = self.waist * (1.0 + t * t).sqrt();
        // k/(2R) with 1/R = dz / (dz² + z_R²); zero at the waist plane.
        let curvature = self.wavenumber() * 0.5 * dz / (dz * dz + zr * zr);
        Propagation { radius, curvature, gouy: t.atan() }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Propagation {
    pub radius: f64,
    /// Coefficient of ρ² in the wavefront phase.
    pub curvature: f64,
    /// arctan((z - z₀)/z_R)
    pub gouy: f64,
}

/// Transverse position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TransversePoint {
    pub x: f64,
    pub y: f64,
}

impl TransversePoint {
    pub const ORIGIN: TransversePoint = TransversePoint { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(rho: f64, phi: f64) -> Self {
        Self { x: rho * phi.cos(), y: rho * phi.sin() }
    }

    pub fn rho(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Azimuth in `(-π, π]`.
    pub fn phi(&self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn scale(self, s: f64) -> Self {
        Self { x: self.x * s, y: self.y * s }
    }
}

impl std::ops::Add for TransversePoint {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { x: self.x + o.x, y: self.y + o.y }
    }
}

impl std::ops::Sub for TransversePoint {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { x: self.x - o.x, y: self.y - o.y }
    }
}

impl std::ops::Neg for TransversePoint {
    type Output = Self;
    fn neg(self) -> Self {
        Self { x: -self.x, y: -self.y }
    }
}

/// Either mode family, for places that accept any Gaussian-family pump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransverseMode {
    Lg(LGIndex),
    Hg(HGIndex),
}

impl TransverseMode {
    pub fn order(&self) -> u32 {
        match self {
            TransverseMode::Lg(i) => i.order(),
            TransverseMode::Hg(i) => i.order(),
        }
    }

    pub fn bind(self, beam: BeamSpec) -> Result<BoundMode> {
        Ok(match self {
            TransverseMode::Lg(i) => BoundMode::Lg(LgMode::new(i, beam)?),
            TransverseMode::Hg(i) => BoundMode::Hg(HgMode::new(i, beam)?),
        })
    }
}

impl From<LGIndex> for TransverseMode {
    fn from(i: LGIndex) -> Self {
        TransverseMode::Lg(i)
    }
}

impl From<HGIndex> for TransverseMode {
    fn from(i: HGIndex) -> Self {
        TransverseMode::Hg(i)
    }
}

/// A mode tied to a beam, with normalization constants precomputed.
#[derive(Debug, Clone, Copy)]
pub enum BoundMode {
    Lg(LgMode),
    Hg(HgMode),
}

impl BoundMode {
    pub fn beam(&self) -> &BeamSpec {
        match self {
            BoundMode::Lg(m) => m.beam(),
            BoundMode::Hg(m) => m.beam(),
        }
    }

    #[inline]
    pub fn field(&self, point: TransversePoint, z: f64) -> Complex64 {
        match self {
            BoundMode::Lg(m) => m.field(point, z),
            BoundMode::Hg(m) => m.field(point, z),
        }
    }

    /// `|field|` as a function of radius only; defined for LG modes.
    pub fn radial_magnitude(&self, rho: f64, z: f64) -> Option<f64> {
        match self {
            BoundMode::Lg(m) => Some(m.radial_amplitude(rho, z).abs()),
            BoundMode::Hg(_) => None,
        }
    }
}

/// `⟨A, B⟩ = ∫ A* B dA` over the square of half-width `half_width`.
pub fn mode_inner_product<A, B>(
    field_a: A,
    field_b: B,
    half_width: f64,
    spec: &QuadratureSpec,
) -> Result<Complex64>
where
    A: Fn(TransversePoint) -> Complex64,
    B: Fn(TransversePoint) -> Complex64,
{
    quad_plane(
        |x, y| {
            let p = TransversePoint { x, y };
            field_a(p).conj() * field_b(p)
        },
        half_width,
        spec,
    )
}

/// Integration half-width that contains an order-`order` mode of radius `radius`.
pub fn mode_extent(radius: f64, order: u32, spec: &QuadratureSpec) -> f64 {
    radius * (spec.radial_cutoff_factor + (order as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_limits() {
        assert!(LGIndex::new(100, 0).is_ok());
        assert!(LGIndex::new(100, 1).is_err());
        assert!(LGIndex::new(0, -201).is_err());
        assert!(HGIndex::new(100, 101).is_err());
        assert_eq!(LGIndex { p: 2, l: -3 }.order(), 7);
    }

    #[test]
    fn index_enumeration() {
        let all = LGIndex::up_to_order(4);
        // order N has N+1 LG modes
        assert_eq!(all.len(), 1 + 2 + 3 + 4 + 5);
        assert!(all.iter().all(|i| i.order() <= 4));
    }

    #[test]
    fn beam_validation_and_rayleigh() {
        assert!(BeamSpec::new(0.0, 1e-3, 0.0).is_err());
        assert!(BeamSpec::new(351e-9, -1.0, 0.0).is_err());
        let b = BeamSpec::from_nm_mm(351.1, 1.0).unwrap();
        let zr = b.rayleigh_range();
        assert!((zr - std::f64::consts::PI * 1e-6 / 351.1e-9).abs() < 1e-12);
        assert!((b.radius_at(zr) - 1e-3 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn polar_view_is_lossless() {
        for &(x, y) in &[(1.0, 0.0), (-1.0, 0.0), (0.3, -0.7), (-2.0, -1e-3)] {
            let p = TransversePoint::new(x, y);
            let q = TransversePoint::from_polar(p.rho(), p.phi());
            assert!((q.x - x).abs() < 1e-15 && (q.y - y).abs() < 1e-15);
            assert!(p.phi() > -std::f64::consts::PI && p.phi() <= std::f64::consts::PI);
        }
    }
}
