use num_complex::Complex64;

use super::{BeamSpec, LGIndex, TransversePoint};
use crate::error::Result;
use crate::numerics::special::{laguerre_unchecked, ln_factorial};

/// Normalized LG radial profile `u_p^l(ρ)` for a beam of radius `w`, from `ρ²`.
#[inline]
fn lg_radial(p: u32, abs_l: u32, ln_norm: f64, rho2: f64, w: f64) -> f64 {
    let x = 2.0 * rho2 / (w * w);
    let lag = laguerre_unchecked(p, abs_l, x);
    if abs_l == 0 {
        (ln_norm - 0.5 * x).exp() * lag / w
    } else if x == 0.0 {
        0.0
    } else {
        (ln_norm + 0.5 * abs_l as f64 * x.ln() - 0.5 * x).exp() * lag / w
    }
}

/// `ln sqrt(2 p! / (π (p+|l|)!))`
fn lg_ln_norm(p: u32, abs_l: u32) -> f64 {
    0.5 * ((2.0 / std::f64::consts::PI).ln() + ln_factorial(p) - ln_factorial(p + abs_l))
}

/// LG mode bound to a beam.
#[derive(Debug, Clone, Copy)]
pub struct LgMode {
    index: LGIndex,
    beam: BeamSpec,
    abs_l: u32,
    ln_norm: f64,
}

impl LgMode {
    pub fn new(index: LGIndex, beam: BeamSpec) -> Result<Self> {
        let index = LGIndex::new(index.p, index.l)?;
        beam.validate()?;
        let abs_l = index.l.unsigned_abs();
        Ok(Self { index, beam, abs_l, ln_norm: lg_ln_norm(index.p, abs_l) })
    }

    pub fn index(&self) -> LGIndex {
        self.index
    }

    pub fn beam(&self) -> &BeamSpec {
        &self.beam
    }

    /// Real radial amplitude `u_p^l(ρ)` at plane `z` (no phase factors).
    pub fn radial_amplitude(&self, rho: f64, z: f64) -> f64 {
        let w = self.beam.radius_at(z);
        lg_radial(self.index.p, self.abs_l, self.ln_norm, rho * rho, w)
    }

    #[inline]
    pub fn field(&self, point: TransversePoint, z: f64) -> Complex64 {
        let prop = self.beam.propagation(z);
        let rho2 = point.x * point.x + point.y * point.y;
        let radial = lg_radial(self.index.p, self.abs_l, self.ln_norm, rho2, prop.radius);
        if radial == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let phase = self.index.l as f64 * point.phi() - (self.index.order() as f64 + 1.0) * prop.gouy
            + prop.curvature * rho2;
        Complex64::from_polar(radial, phase)
    }

    /// Field at the waist plane.
    #[inline]
    pub fn waist_field(&self, point: TransversePoint) -> Complex64 {
        self.field(point, self.beam.waist_plane_z)
    }

    /// Radius at which `|u_p^l|` peaks; closed form for `p = 0`, numerical otherwise.
    pub fn peak_radius(&self, z: f64) -> f64 {
        let w = self.beam.radius_at(z);
        if self.index.p == 0 {
            return w * (self.abs_l as f64 / 2.0).sqrt();
        }
        let extent = w * (3.0 + (self.index.order() as f64).sqrt());
        let n = 4000;
        let mut best = (0.0, 0.0);
        for k in 0..=n {
            let r = extent * k as f64 / n as f64;
            let v = self.radial_amplitude(r, z).abs();
            if v > best.1 {
                best = (r, v);
            }
        }
        best.0
    }
}

/// `LG_p^l(beam)` evaluated at `point` on plane `z`.
pub fn lg_field(index: LGIndex, beam: BeamSpec, point: TransversePoint, z: f64) -> Result<Complex64> {
    Ok(LgMode::new(index, beam)?.field(point, z))
}

/// Closed-form Fourier transform of a waist-plane LG mode.
///
/// The transform of `LG_p^l` with waist `w` is `(-i)^{2p+|l|}` times the
/// normalized `LG_p^l` profile with waist `2/w` in q-space.
#[derive(Debug, Clone, Copy)]
pub struct FourierProfile {
    index: LGIndex,
    abs_l: u32,
    ln_norm: f64,
    q_waist: f64,
    phase: Complex64,
}

impl FourierProfile {
    pub fn index(&self) -> LGIndex {
        self.index
    }

    /// 1/e half-width of the Gaussian envelope in q-space.
    pub fn q_waist(&self) -> f64 {
        self.q_waist
    }

    /// Azimuthal index of the transform; equal to the mode's `l`.
    pub fn azimuthal_index(&self) -> i32 {
        self.index.l
    }

    /// `v_p^l(q)` including the constant `(-i)^N` phase.
    #[inline]
    pub fn radial(&self, q: f64) -> Complex64 {
        self.phase * lg_radial(self.index.p, self.abs_l, self.ln_norm, q * q, self.q_waist)
    }

    /// `V(q) = v_p^l(|q|) e^{il φ_q}`.
    #[inline]
    pub fn value(&self, qx: f64, qy: f64) -> Complex64 {
        let q2 = qx * qx + qy * qy;
        let r = lg_radial(self.index.p, self.abs_l, self.ln_norm, q2, self.q_waist);
        if r == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.phase * Complex64::from_polar(r, self.index.l as f64 * qy.atan2(qx))
    }
}

pub fn lg_fourier_profile(index: LGIndex, beam: BeamSpec) -> Result<FourierProfile> {
    let index = LGIndex::new(index.p, index.l)?;
    beam.validate()?;
    let abs_l = index.l.unsigned_abs();
    let phase = match index.order() % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    };
    Ok(FourierProfile {
        index,
        abs_l,
        ln_norm: lg_ln_norm(index.p, abs_l),
        q_waist: 2.0 / beam.waist,
        phase,
    })
}
