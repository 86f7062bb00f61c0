//! Beam-splitter interference of the photon pair and coincidence maps.
//!
//! Detector `D₁` is scanned over a grid while `D₂` stays at `d2`. A photon
//! reflected at the splitter has its `y` coordinate mirrored.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::biphoton::{BiphotonModel, PumpSpec};
use crate::error::{Error, Result};
use crate::modes::{LgMode, TransversePoint};

/// Real transmission and reflection amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitterSpec {
    pub t: f64,
    pub r: f64,
}

impl BeamSplitterSpec {
    pub fn new(t: f64, r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) || !(0.0..=1.0).contains(&r) {
            return Err(Error::Domain(format!("t and r must lie in [0, 1], got t = {t}, r = {r}")));
        }
        if (t * t + r * r - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("t² + r² must equal 1, got {}", t * t + r * r)));
        }
        Ok(Self { t, r })
    }

    /// 50:50 splitter, `t = r = 1/√2`.
    pub fn balanced() -> Self {
        Self { t: FRAC_1_SQRT_2, r: FRAC_1_SQRT_2 }
    }

    /// From the intensity transmittance `T = t²`.
    pub fn from_transmittance(transmittance: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmittance) {
            return Err(Error::Domain(format!("transmittance must lie in [0, 1], got {transmittance}")));
        }
        Self::new(transmittance.sqrt(), (1.0 - transmittance).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Regime {
    /// Equal path lengths: the two pair paths interfere.
    #[default]
    Balanced,
    /// Paths distinguishable: probabilities add.
    Unbalanced,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Balanced => "balanced",
            Regime::Unbalanced => "unbalanced",
        })
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "balanced" => Ok(Regime::Balanced),
            "unbalanced" => Ok(Regime::Unbalanced),
            other => Err(Error::Domain(format!("unknown regime {other:?}"))),
        }
    }
}

/// Rectangular raster of `nx × ny` points including both ends, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

/// Default grid size per axis.
pub const DEFAULT_GRID_POINTS: usize = 201;
/// Default grid half-width in effective waists.
pub const DEFAULT_GRID_WAISTS: f64 = 3.0;

impl ScanGrid {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self> {
        let g = Self { x_min, x_max, y_min, y_max, nx, ny };
        g.validate()?;
        Ok(g)
    }

    /// Square grid of half-width `half_width` around `center`.
    pub fn centered(center: TransversePoint, half_width: f64, n: usize) -> Result<Self> {
        Self::new(center.x - half_width, center.x + half_width, center.y - half_width, center.y + half_width, n, n)
    }

    /// `201 × 201` points over ±3 effective waists around `-d2`, where the
    /// effective waist `√2 w_c(Z)` is the pattern radius seen by `D₁`.
    pub fn default_for(model: &BiphotonModel, d2: TransversePoint) -> Result<Self> {
        let half = DEFAULT_GRID_WAISTS * effective_waist(model);
        Self::centered(-d2, half, DEFAULT_GRID_POINTS)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite());
        if !finite || !(self.x_max > self.x_min) || !(self.y_max > self.y_min) {
            return Err(Error::Domain(format!(
                "grid bounds must satisfy x_min < x_max and y_min < y_max, got x [{}, {}], y [{}, {}]",
                self.x_min, self.x_max, self.y_min, self.y_max
            )));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::Domain(format!("grid needs at least 2 points per axis, got {} × {}", self.nx, self.ny)));
        }
        Ok(())
    }

    /// `x_i`; the endpoints are exact and a symmetric grid has an exact zero at its centre.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        lerp(self.x_min, self.x_max, i, self.nx)
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        lerp(self.y_min, self.y_max, j, self.ny)
    }

    pub fn point(&self, i: usize, j: usize) -> TransversePoint {
        TransversePoint::new(self.x(i), self.y(j))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[inline]
fn lerp(a: f64, b: f64, k: usize, n: usize) -> f64 {
    let t = k as f64 / (n - 1) as f64;
    a * (1.0 - t) + b * t
}

/// Radius `√2 w_c(Z)` of the rescaled pump seen in the coordinate of one detector.
pub fn effective_waist(model: &BiphotonModel) -> f64 {
    SQRT_2 * model.pump().rescaled_beam().radius_at(model.detection_z())
}

/// `(Ψ_tt, Ψ_rr) = (t² Ψ(ρ₁, ρ₂), -r² Ψ((x₂,-y₂), (x₁,-y₁)))`.
#[inline]
pub fn output_amplitudes(
    model: &BiphotonModel,
    bs: &BeamSplitterSpec,
    rho_1: TransversePoint,
    rho_2: TransversePoint,
) -> (Complex64, Complex64) {
    let tt = model.psi(rho_1, rho_2) * (bs.t * bs.t);
    let rr = model.psi(mirror_y(rho_2), mirror_y(rho_1)) * (-bs.r * bs.r);
    (tt, rr)
}

#[inline]
fn mirror_y(p: TransversePoint) -> TransversePoint {
    TransversePoint::new(p.x, -p.y)
}

/// `Ψ_c = Ψ_tt + Ψ_rr`.
#[inline]
pub fn coincidence_amplitude(
    model: &BiphotonModel,
    bs: &BeamSplitterSpec,
    rho_1: TransversePoint,
    rho_2: TransversePoint,
) -> Complex64 {
    let (tt, rr) = output_amplitudes(model, bs, rho_1, rho_2);
    tt + rr
}

/// Polar form of the normalized sum coordinate `(ρ₁ + ρ₂)/√2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RTheta {
    pub r: f64,
    /// `None` when `R = 0`.
    pub theta: Option<f64>,
}

pub fn rtheta_coords(rho_1: TransversePoint, rho_2: TransversePoint) -> RTheta {
    let sx = rho_1.x + rho_2.x;
    let sy = rho_1.y + rho_2.y;
    let r = sx.hypot(sy) * FRAC_1_SQRT_2;
    RTheta { r, theta: (r > 0.0).then(|| sy.atan2(sx)) }
}

/// `|u_p^l(R)|² sin²(lθ)` for the rescaled pump on plane `z`.
pub fn analytic_pattern(pump: &PumpSpec, r: f64, theta: f64, z: f64) -> Result<f64> {
    let index = pump.lg_index()?;
    let u = LgMode::new(index, pump.rescaled_beam())?;
    let s = (index.l as f64 * theta).sin();
    Ok(u.radial_amplitude(r, z).powi(2) * s * s)
}

/// Uniform-disc averaging over the two detector apertures.
#[derive(Debug, Clone, PartialEq)]
pub struct ApertureAveraging {
    offsets_1: Vec<TransversePoint>,
    offsets_2: Vec<TransversePoint>,
}

impl ApertureAveraging {
    /// Stratified samples: `rings × sectors` equal-area cells per disc, one
    /// jittered point per cell, drawn once from a seeded generator.
    pub fn new(radius_1: f64, radius_2: f64, rings: usize, sectors: usize, seed: u64) -> Result<Self> {
        for (name, r) in [("aperture 1", radius_1), ("aperture 2", radius_2)] {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Error::Domain(format!("{name} radius must be non-negative, got {r}")));
            }
        }
        if rings == 0 || sectors == 0 {
            return Err(Error::Domain("aperture sampling needs at least one ring and one sector".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let offsets_1 = stratified_disc(radius_1, rings, sectors, &mut rng);
        let offsets_2 = stratified_disc(radius_2, rings, sectors, &mut rng);
        Ok(Self { offsets_1, offsets_2 })
    }

    pub fn samples_per_point(&self) -> usize {
        self.offsets_1.len() * self.offsets_2.len()
    }
}

fn stratified_disc(radius: f64, rings: usize, sectors: usize, rng: &mut ChaCha8Rng) -> Vec<TransversePoint> {
    let mut out = Vec::with_capacity(rings * sectors);
    for a in 0..rings {
        for b in 0..sectors {
            let u: f64 = (a as f64 + rng.random::<f64>()) / rings as f64;
            let v: f64 = (b as f64 + rng.random::<f64>()) / sectors as f64;
            out.push(TransversePoint::from_polar(radius * u.sqrt(), 2.0 * PI * v));
        }
    }
    out
}

/// Max-normalized coincidence probability over a scan grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceMap {
    pub grid: ScanGrid,
    /// Row-major, `values[j * nx + i]` at `(x_i, y_j)`.
    pub values: Vec<f64>,
    pub fixed_detector: TransversePoint,
    pub regime: Regime,
    /// Largest value before normalization.
    pub raw_max: f64,
}

/// Maps whose raw maximum is at or below this are reported as identically zero.
pub const ZERO_FLOOR: f64 = 1e-30;

impl CoincidenceMap {
    fn from_raw(grid: ScanGrid, raw: Vec<f64>, fixed_detector: TransversePoint, regime: Regime) -> Self {
        let raw_max = raw.iter().copied().fold(0.0, f64::max);
        let values = if raw_max > ZERO_FLOOR {
            raw.into_iter().map(|v| v / raw_max).collect()
        } else {
            vec![0.0; raw.len()]
        };
        Self { grid, values, fixed_detector, regime, raw_max }
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }

    /// Bilinear interpolation; `None` outside the grid.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> Option<f64> {
        let g = &self.grid;
        let fx = (x - g.x_min) / (g.x_max - g.x_min) * (g.nx - 1) as f64;
        let fy = (y - g.y_min) / (g.y_max - g.y_min) * (g.ny - 1) as f64;
        let eps = 1e-9;
        if !(fx >= -eps && fy >= -eps && fx <= (g.nx - 1) as f64 + eps && fy <= (g.ny - 1) as f64 + eps) {
            return None;
        }
        let fx = fx.clamp(0.0, (g.nx - 1) as f64);
        let fy = fy.clamp(0.0, (g.ny - 1) as f64);
        let i = (fx.floor() as usize).min(g.nx - 2);
        let j = (fy.floor() as usize).min(g.ny - 2);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let v00 = self.value(i, j);
        let v10 = self.value(i + 1, j);
        let v01 = self.value(i, j + 1);
        let v11 = self.value(i + 1, j + 1);
        Some((1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11))
    }
}

#[inline]
fn point_value(
    model: &BiphotonModel,
    bs: &BeamSplitterSpec,
    regime: Regime,
    rho_1: TransversePoint,
    rho_2: TransversePoint,
) -> f64 {
    let (tt, rr) = output_amplitudes(model, bs, rho_1, rho_2);
    match regime {
        Regime::Balanced => (tt + rr).norm_sqr(),
        Regime::Unbalanced => tt.norm_sqr() + rr.norm_sqr(),
    }
}

/// Coincidence map in either regime, optionally averaged over detector apertures.
pub fn coincidence_map(
    model: &BiphotonModel,
    bs: &BeamSplitterSpec,
    grid: &ScanGrid,
    d2: TransversePoint,
    regime: Regime,
    aperture: Option<&ApertureAveraging>,
) -> Result<CoincidenceMap> {
    grid.validate()?;
    let raw: Vec<f64> = (0..grid.ny)
        .into_par_iter()
        .flat_map_iter(|j| {
            (0..grid.nx).map(move |i| {
                let rho_1 = grid.point(i, j);
                match aperture {
                    None => point_value(model, bs, regime, rho_1, d2),
                    Some(a) => {
                        let mut sum = 0.0;
                        for &o1 in &a.offsets_1 {
                            for &o2 in &a.offsets_2 {
                                sum += point_value(model, bs, regime, rho_1 + o1, d2 + o2);
                            }
                        }
                        sum / a.samples_per_point() as f64
                    }
                }
            })
        })
        .collect();
    Ok(CoincidenceMap::from_raw(*grid, raw, d2, regime))
}

/// `|Ψ_tt + Ψ_rr|²` over the grid with `D₂` at `d2`.
pub fn balanced_map(
    model: &BiphotonModel,
    bs: &BeamSplitterSpec,
    grid: &ScanGrid,
    d2: TransversePoint,
) -> Result<CoincidenceMap> {
    coincidence_map(model, bs, grid, d2, Regime::Balanced, None)
}

/// `|Ψ_tt|² + |Ψ_rr|²` over the grid with `D₂` at `d2`.
pub fn unbalanced_map(
    model: &BiphotonModel,
    bs: &BeamSplitterSpec,
    grid: &ScanGrid,
    d2: TransversePoint,
) -> Result<CoincidenceMap> {
    coincidence_map(model, bs, grid, d2, Regime::Unbalanced, None)
}

/// Number of 4-connected regions with value ≥ 0.5.
pub fn count_lobes(map: &CoincidenceMap) -> usize {
    let (nx, ny) = (map.grid.nx, map.grid.ny);
    if map.values.is_empty() {
        return 0;
    }
    let mut seen = vec![false; nx * ny];
    let mut lobes = 0;
    let mut stack = Vec::new();
    for start in 0..nx * ny {
        if seen[start] || map.values[start] < 0.5 {
            continue;
        }
        lobes += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(k) = stack.pop() {
            let (i, j) = (k % nx, k / nx);
            let mut visit = |n: usize| {
                if !seen[n] && map.values[n] >= 0.5 {
                    seen[n] = true;
                    stack.push(n);
                }
            };
            if i > 0 {
                visit(k - 1);
            }
            if i + 1 < nx {
                visit(k + 1);
            }
            if j > 0 {
                visit(k - nx);
            }
            if j + 1 < ny {
                visit(k + nx);
            }
        }
    }
    lobes
}
