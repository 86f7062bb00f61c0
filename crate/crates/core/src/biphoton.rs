//! Two-photon detection amplitude `Ψ(ρs, ρi)` for degenerate, far-field SPDC.
//!
//! Signal and idler share the wavelength `2λ₀` and are detected on a common
//! plane `Z`. The amplitude factorizes into the pump profile rescaled to
//! wavelength `2λ₀` and waist `√2 w₀`, evaluated at the normalized sum
//! coordinate, times the phase-matching kernel of the normalized difference
//! coordinate. In the thin-crystal regime the kernel is replaced by 1.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modes::{
    lg_fourier_profile, mode_extent, BeamSpec, BoundMode, FourierProfile, HGIndex, HgMode,
    LGIndex, LgMode, TransverseMode, TransversePoint,
};
use crate::numerics::{one_minus_sinc, quad_radial, sinc, QuadratureSpec};

/// Nonlinear crystal: length along z and pump wavenumber `K = 2π/λ₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrystalParams {
    pub length: f64,
    pub pump_wavenumber: f64,
}

impl CrystalParams {
    pub fn new(length: f64, pump_wavenumber: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Domain(format!("crystal length must be positive, got {length}")));
        }
        if !(pump_wavenumber > 0.0 && pump_wavenumber.is_finite()) {
            return Err(Error::Domain(format!(
                "pump wavenumber must be positive, got {pump_wavenumber}"
            )));
        }
        Ok(Self { length, pump_wavenumber })
    }

    /// Crystal of the given length pumped by `beam` (vacuum wavenumber).
    pub fn for_pump(length: f64, beam: &BeamSpec) -> Result<Self> {
        Self::new(length, beam.wavenumber())
    }
}

/// Pump beam: transverse mode plus wavelength/waist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpSpec {
    pub mode: TransverseMode,
    pub beam: BeamSpec,
}

impl PumpSpec {
    pub fn lg(index: LGIndex, beam: BeamSpec) -> Self {
        Self { mode: TransverseMode::Lg(index), beam }
    }

    pub fn hg(index: HGIndex, beam: BeamSpec) -> Self {
        Self { mode: TransverseMode::Hg(index), beam }
    }

    /// LG label of the pump; errors for HG pumps.
    pub fn lg_index(&self) -> Result<LGIndex> {
        match self.mode {
            TransverseMode::Lg(i) => Ok(i),
            TransverseMode::Hg(i) => {
                Err(Error::Domain(format!("operation requires an LG pump, got {i}")))
            }
        }
    }

    /// Beam carrying the pump's angular spectrum at the down-converted wavelength:
    /// wavelength `2λ₀`, waist `√2 w₀`, same waist plane and Rayleigh range.
    pub fn rescaled_beam(&self) -> BeamSpec {
        BeamSpec {
            wavelength: 2.0 * self.beam.wavelength,
            waist: SQRT_2 * self.beam.waist,
            waist_plane_z: self.beam.waist_plane_z,
        }
    }
}

/// Transverse wavevector in rad/m.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wavevector {
    pub qx: f64,
    pub qy: f64,
}

impl Wavevector {
    pub fn new(qx: f64, qy: f64) -> Self {
        Self { qx, qy }
    }

    pub fn norm(&self) -> f64 {
        self.qx.hypot(self.qy)
    }
}

#[derive(Debug, Clone, Copy)]
enum PumpSpectrum {
    Lg(FourierProfile),
    // Transform of HG_{mn}(w) is (-i)^{m+n} HG_{mn}(2/w).
    Hg { mode: HgMode, phase: Complex64 },
}

impl PumpSpectrum {
    fn new(pump: &PumpSpec) -> Result<Self> {
        Ok(match pump.mode {
            TransverseMode::Lg(i) => PumpSpectrum::Lg(lg_fourier_profile(i, pump.beam)?),
            TransverseMode::Hg(i) => {
                let q_beam = BeamSpec { wavelength: pump.beam.wavelength, waist: 2.0 / pump.beam.waist, waist_plane_z: 0.0 };
                let phase = Complex64::new(0.0, -1.0).powu(i.order());
                PumpSpectrum::Hg { mode: HgMode::new(i, q_beam)?, phase }
            }
        })
    }

    fn value(&self, q: Wavevector) -> Complex64 {
        match self {
            PumpSpectrum::Lg(f) => f.value(q.qx, q.qy),
            PumpSpectrum::Hg { mode, phase } => *phase * mode.field(TransversePoint::new(q.qx, q.qy), 0.0),
        }
    }
}

/// Pump, crystal and detection geometry; immutable once built.
#[derive(Debug, Clone, Copy)]
pub struct BiphotonModel {
    pump: PumpSpec,
    crystal: CrystalParams,
    detection_z: f64,
    thin_crystal: bool,
    rescaled: BoundMode,
    spectrum: PumpSpectrum,
}

/// Relative mismatch allowed between the pump wavelength and `2π/K`.
const WAVENUMBER_MATCH: f64 = 1e-9;

impl BiphotonModel {
    pub fn new(
        pump: PumpSpec,
        crystal: CrystalParams,
        detection_z: f64,
        thin_crystal: bool,
    ) -> Result<Self> {
        pump.beam.validate()?;
        let crystal = CrystalParams::new(crystal.length, crystal.pump_wavenumber)?;
        let expected = pump.beam.wavenumber();
        if ((crystal.pump_wavenumber - expected) / expected).abs() > WAVENUMBER_MATCH {
            return Err(Error::Domain(format!(
                "pump wavenumber {} does not match 2π/λ₀ = {expected}",
                crystal.pump_wavenumber
            )));
        }
        if !detection_z.is_finite() {
            return Err(Error::Domain("detection plane must be finite".into()));
        }
        if !thin_crystal && !(detection_z > 0.0) {
            return Err(Error::Domain(format!(
                "finite-crystal model needs a detection plane Z > 0, got {detection_z}"
            )));
        }
        let rescaled = pump.mode.bind(pump.rescaled_beam())?;
        let spectrum = PumpSpectrum::new(&pump)?;
        Ok(Self { pump, crystal, detection_z, thin_crystal, rescaled, spectrum })
    }

    /// Thin-crystal model with the crystal built from the pump wavelength.
    pub fn thin(pump: PumpSpec, crystal_length: f64, detection_z: f64) -> Result<Self> {
        Self::new(pump, CrystalParams::for_pump(crystal_length, &pump.beam)?, detection_z, true)
    }

    pub fn pump(&self) -> &PumpSpec {
        &self.pump
    }

    pub fn crystal(&self) -> &CrystalParams {
        &self.crystal
    }

    pub fn detection_z(&self) -> f64 {
        self.detection_z
    }

    pub fn is_thin_crystal(&self) -> bool {
        self.thin_crystal
    }

    /// Same model with the regime flag switched.
    pub fn with_thin_crystal(&self, thin_crystal: bool) -> Result<Self> {
        Self::new(self.pump, self.crystal, self.detection_z, thin_crystal)
    }

    /// The rescaled pump mode `U` (wavelength `2λ₀`, waist `√2 w₀`).
    pub fn rescaled_mode(&self) -> &BoundMode {
        &self.rescaled
    }

    /// `U(ρ)` on the detection plane.
    #[inline]
    pub fn u_field(&self, rho: TransversePoint) -> Complex64 {
        self.rescaled.field(rho, self.detection_z)
    }

    /// `Φ(q_s, q_i) = (1/π) √(2L/K) v(q_s + q_i) sinc(L |q_s - q_i|² / 4K)`.
    pub fn angular_amplitude(&self, q_s: Wavevector, q_i: Wavevector) -> Complex64 {
        let k = self.crystal.pump_wavenumber;
        let l = self.crystal.length;
        let paraxial = 0.1 * k;
        if q_s.norm() > paraxial || q_i.norm() > paraxial {
            log::warn!("transverse wavevector beyond paraxial range |q| <= 0.1 K");
        }
        let sum = Wavevector::new(q_s.qx + q_i.qx, q_s.qy + q_i.qy);
        let dx = q_s.qx - q_i.qx;
        let dy = q_s.qy - q_i.qy;
        let prefactor = (2.0 * l / k).sqrt() / PI;
        self.spectrum.value(sum) * (prefactor * sinc(l * (dx * dx + dy * dy) / (4.0 * k)))
    }

    /// Phase-matching kernel `F(ρ) = √(KL)/(2πZ) sinc(KLρ²/8Z²)`.
    pub fn f_kernel(&self, rho: f64) -> Result<f64> {
        let z = self.detection_z;
        if !(z > 0.0) {
            return Err(Error::Domain(format!("F kernel needs a detection plane Z > 0, got {z}")));
        }
        Ok(self.f_kernel_sq(rho * rho, z))
    }

    #[inline]
    fn f_kernel_sq(&self, rho2: f64, z: f64) -> f64 {
        let kl = self.crystal.pump_wavenumber * self.crystal.length;
        kl.sqrt() / (2.0 * PI * z) * sinc(kl * rho2 / (8.0 * z * z))
    }

    /// `Ψ(ρs, ρi) = U((ρs+ρi)/√2) F((ρs-ρi)/√2)`, with `F ≡ 1` for a thin crystal.
    #[inline]
    pub fn psi(&self, rho_s: TransversePoint, rho_i: TransversePoint) -> Complex64 {
        let sum = (rho_s + rho_i).scale(FRAC_1_SQRT_2);
        let u = self.u_field(sum);
        if self.thin_crystal {
            return u;
        }
        let dx = rho_s.x - rho_i.x;
        let dy = rho_s.y - rho_i.y;
        u * self.f_kernel_sq(0.5 * (dx * dx + dy * dy), self.detection_z)
    }

    /// `P(ρs, ρi) = |Ψ(ρs, ρi)|²`.
    #[inline]
    pub fn coincidence_probability(&self, rho_s: TransversePoint, rho_i: TransversePoint) -> f64 {
        self.psi(rho_s, rho_i).norm_sqr()
    }
}

pub fn angular_amplitude(model: &BiphotonModel, q_s: Wavevector, q_i: Wavevector) -> Complex64 {
    model.angular_amplitude(q_s, q_i)
}

pub fn f_kernel(model: &BiphotonModel, rho: f64) -> Result<f64> {
    model.f_kernel(rho)
}

pub fn psi(model: &BiphotonModel, rho_s: TransversePoint, rho_i: TransversePoint) -> Complex64 {
    model.psi(rho_s, rho_i)
}

pub fn coincidence_probability(
    model: &BiphotonModel,
    rho_s: TransversePoint,
    rho_i: TransversePoint,
) -> f64 {
    model.coincidence_probability(rho_s, rho_i)
}

/// Thin-crystal error for one `(p, |l|)` split of a mode order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitError {
    pub p: u32,
    pub abs_l: u32,
    pub epsilon: f64,
}

/// Worst-case thin-crystal error at one mode order.
#[derive(Debug, Clone, PartialEq)]
pub struct ThinCrystalCheck {
    pub order: u32,
    pub detection_z: f64,
    /// Split realizing the maximum.
    pub worst: SplitError,
    pub splits: Vec<SplitError>,
}

impl ThinCrystalCheck {
    pub fn epsilon(&self) -> f64 {
        self.worst.epsilon
    }
}

/// Relative deviation of the kernel-weighted signal/idler convolution from the
/// unweighted one at `R = 0`.
///
/// For signal and idler modes `LG_p^{±l}` of order `N = 2p + |l|` on the plane
/// `Z`, the `S` integral at `R = 0` reduces to `2π(-1)^l ∫ u_p^l(s)² F̂(√2 s) s ds`
/// with `F̂ = F/F(0)`; `ε = |1 - A_F/A_1|`. Every split `p = 0..=⌊N/2⌋` is evaluated and
/// the maximum reported. Profiles take the beam radius at `Z` without the common
/// wavefront-curvature phase.
pub fn thin_crystal_error(
    crystal: &CrystalParams,
    pump_beam: &BeamSpec,
    order: u32,
    detection_z: f64,
    spec: &QuadratureSpec,
) -> Result<ThinCrystalCheck> {
    spec.validate()?;
    if order > crate::modes::MAX_MODE_ORDER {
        return Err(Error::Domain(format!("mode order {order} exceeds 200")));
    }
    if !(detection_z > 0.0) {
        return Err(Error::Domain(format!("detection plane must be positive, got {detection_z}")));
    }
    let rescaled = BeamSpec {
        wavelength: 2.0 * pump_beam.wavelength,
        waist: SQRT_2 * pump_beam.waist,
        waist_plane_z: pump_beam.waist_plane_z,
    };
    let radius = rescaled.radius_at(detection_z);
    let profile_beam = BeamSpec { wavelength: rescaled.wavelength, waist: radius, waist_plane_z: 0.0 };
    // sinc argument of F̂(√2 s): KL (√2 s)² / (8Z²)
    let coeff = crystal.pump_wavenumber * crystal.length / (4.0 * detection_z * detection_z);
    let cutoff = mode_extent(radius, order, spec);

    let mut splits = Vec::with_capacity(order as usize / 2 + 1);
    for p in 0..=order / 2 {
        let abs_l = order - 2 * p;
        let mode = LgMode::new(LGIndex { p, l: abs_l as i32 }, profile_beam)?;
        let weight = |s: f64| {
            let u = mode.radial_amplitude(s, 0.0);
            u * u * s
        };
        let a1 = quad_radial(|s| Complex64::new(weight(s), 0.0), cutoff, spec)?;
        let deficit = quad_radial(
            |s| Complex64::new(weight(s) * one_minus_sinc(coeff * s * s), 0.0),
            cutoff,
            spec,
        )?;
        splits.push(SplitError { p, abs_l, epsilon: (deficit.re / a1.re).abs() });
    }
    let worst = *splits
        .iter()
        .max_by(|a, b| a.epsilon.total_cmp(&b.epsilon))
        .expect("at least one split");
    Ok(ThinCrystalCheck { order, detection_z, worst, splits })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pump(p: u32, l: i32) -> PumpSpec {
        PumpSpec::lg(LGIndex { p, l }, BeamSpec::from_nm_mm(351.1, 1.0).unwrap())
    }

    fn pt(x_mm: f64, y_mm: f64) -> TransversePoint {
        TransversePoint::new(x_mm * 1e-3, y_mm * 1e-3)
    }

    #[test]
    fn rescaled_beam_keeps_rayleigh_range() {
        let p = pump(0, 1);
        let r = p.rescaled_beam();
        assert_eq!(r.wavelength, 2.0 * p.beam.wavelength);
        assert_eq!(r.waist, SQRT_2 * p.beam.waist);
        assert!((r.rayleigh_range() - p.beam.rayleigh_range()).abs() < 1e-12 * p.beam.rayleigh_range());
    }

    #[test]
    fn construction_checks() {
        let p = pump(0, 1);
        let k = p.beam.wavenumber();
        assert!(BiphotonModel::new(p, CrystalParams::new(7e-3, k).unwrap(), 1.0, false).is_ok());
        assert!(BiphotonModel::new(p, CrystalParams::new(7e-3, 1.01 * k).unwrap(), 1.0, true).is_err());
        assert!(BiphotonModel::new(p, CrystalParams::new(7e-3, k).unwrap(), 0.0, false).is_err());
        assert!(BiphotonModel::new(p, CrystalParams::new(7e-3, k).unwrap(), 0.0, true).is_ok());
        assert!(CrystalParams::new(0.0, k).is_err());
    }

    #[test]
    fn gaussian_angular_amplitude_peaks_at_origin() {
        let m = BiphotonModel::thin(pump(0, 0), 1e-3, 1.0).unwrap();
        let origin = m.angular_amplitude(Wavevector::default(), Wavevector::default()).norm();
        for &(a, b, c, d) in &[(1e3, 0.0, 0.0, 0.0), (500.0, -300.0, 200.0, 100.0), (0.0, 2e3, 0.0, -2e3)] {
            let v = m.angular_amplitude(Wavevector::new(a, b), Wavevector::new(c, d)).norm();
            assert!(v < origin);
        }
    }

    #[test]
    fn angular_amplitude_symmetry_and_vortex_null() {
        let m = BiphotonModel::thin(pump(0, 1), 7e-3, 1.0).unwrap();
        let pairs = [(800.0, -200.0, 150.0, 400.0), (-1e3, 50.0, 300.0, 300.0)];
        for &(a, b, c, d) in &pairs {
            let (qs, qi) = (Wavevector::new(a, b), Wavevector::new(c, d));
            assert_eq!(m.angular_amplitude(qs, qi), m.angular_amplitude(qi, qs));
            let opposite = Wavevector::new(-a, -b);
            assert_eq!(m.angular_amplitude(qs, opposite).norm(), 0.0);
        }
    }

    #[test]
    fn f_kernel_values() {
        let p = pump(0, 1);
        let m = BiphotonModel::new(p, CrystalParams::for_pump(7e-3, &p.beam).unwrap(), 1.0, false).unwrap();
        let kl = p.beam.wavenumber() * 7e-3;
        let peak = kl.sqrt() / (2.0 * PI);
        assert!((m.f_kernel(0.0).unwrap() - peak).abs() < 1e-12 * peak);
        let first_zero = (8.0 * PI / kl).sqrt();
        assert!(m.f_kernel(first_zero).unwrap().abs() < 1e-13 * peak);
        // independent evaluation (Python, same closed form): L=7 mm, λ=351.1 nm, Z=1 m, ρ=1 mm
        let v = m.f_kernel(1e-3).unwrap();
        assert!((v - 56.328_206_447_654_79).abs() < 1e-9, "{v}");
        let thin_at_origin = BiphotonModel::thin(p, 7e-3, 0.0).unwrap();
        assert!(thin_at_origin.f_kernel(1e-3).is_err());
    }

    #[test]
    fn vortex_pump_vanishes_on_anti_diagonal() {
        let m = BiphotonModel::thin(pump(0, 1), 7e-3, 1.0).unwrap();
        let rs = pt(0.4, -0.7);
        assert_eq!(m.psi(rs, -rs), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn transfer_and_exchange() {
        for thin in [true, false] {
            let p = pump(1, 2);
            let m = BiphotonModel::new(p, CrystalParams::for_pump(7e-3, &p.beam).unwrap(), 1.0, thin).unwrap();
            for &(a, b, c, d) in &[(0.3, -0.2, 1.1, 0.4), (-0.9, 0.5, 0.1, -1.3)] {
                let (rs, ri) = (pt(a, b), pt(c, d));
                assert_eq!(m.psi(rs, ri), m.psi(ri, rs));
                if thin {
                    assert_eq!(m.psi(rs, ri), m.u_field((rs + ri).scale(FRAC_1_SQRT_2)));
                }
            }
        }
    }

    #[test]
    fn finite_crystal_approaches_thin() {
        let p = pump(0, 1);
        let thin = BiphotonModel::thin(p, 1e-3, 1.0).unwrap();
        let grid: Vec<(TransversePoint, TransversePoint)> = (0..15)
            .flat_map(|i| (0..15).map(move |j| (pt(-3.0 + 0.4 * i as f64, 0.2), pt(0.5, -3.0 + 0.4 * j as f64))))
            .collect();
        let mut previous = f64::INFINITY;
        for length in [1e-1, 1e-3, 1e-5] {
            let m = BiphotonModel::new(p, CrystalParams::for_pump(length, &p.beam).unwrap(), 1.0, false).unwrap();
            let f0 = m.f_kernel(0.0).unwrap();
            let diff = grid
                .iter()
                .map(|&(a, b)| (m.psi(a, b) / f0 - thin.psi(a, b)).norm())
                .fold(0.0, f64::max);
            assert!(diff < previous, "L={length}: {diff} !< {previous}");
            previous = diff;
        }
    }

    #[test]
    fn thin_crystal_error_vanishes_with_length() {
        let beam = BeamSpec::from_nm_mm(351.0, 1.0).unwrap();
        let crystal = CrystalParams::for_pump(1e-9, &beam).unwrap();
        for n in [0, 4, 16] {
            let check = thin_crystal_error(&crystal, &beam, n, 1.0, &QuadratureSpec::default()).unwrap();
            assert!(check.epsilon() < 1e-8, "N={n}: {}", check.epsilon());
            assert_eq!(check.splits.len() as u32, n / 2 + 1);
        }
    }

    #[test]
    fn thin_crystal_error_rejects_bad_input() {
        let beam = BeamSpec::from_nm_mm(351.0, 1.0).unwrap();
        let crystal = CrystalParams::for_pump(1e-3, &beam).unwrap();
        let spec = QuadratureSpec::default();
        assert!(thin_crystal_error(&crystal, &beam, 201, 1.0, &spec).is_err());
        assert!(thin_crystal_error(&crystal, &beam, 4, 0.0, &spec).is_err());
    }

    #[test]
    fn hg_pump_spectrum() {
        let beam = BeamSpec::from_nm_mm(351.1, 1.0).unwrap();
        let m = BiphotonModel::thin(PumpSpec::hg(HGIndex { m: 0, n: 1 }, beam), 1e-3, 1.0).unwrap();
        // HG01 spectrum vanishes for q_y = 0
        let v = m.angular_amplitude(Wavevector::new(300.0, 0.0), Wavevector::new(100.0, 0.0));
        assert_eq!(v.norm(), 0.0);
        assert!(m.pump().lg_index().is_err());
    }
}
