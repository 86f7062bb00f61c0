//! LG ⊗ LG decomposition of the two-photon amplitude, OAM selection rule,
//! spiral spectrum and the classical-correlation witness.
//!
//! Coefficients are dimensionless: signal and idler modes share the waist of
//! the rescaled pump `w_c`, and lengths are measured in units of `w_c`. They
//! are raw overlaps `C = ∫∫ Ψ LG_s* LG_i*`; tables normalize them afterwards.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::biphoton::{BiphotonModel, PumpSpec};
use crate::error::{Error, Result};
use crate::modes::{lg_fourier_profile, BeamSpec, FourierProfile, LGIndex, LgMode, TransversePoint};
use crate::numerics::{gauss_hermite, integrate, quad_radial, sinc, QuadratureSpec};

/// Default truncation order for tables.
pub const DEFAULT_N_MAX: u32 = 8;
/// Highest truncation order a table may be built at.
pub const MAX_TABLE_ORDER: u32 = 14;
/// Mode-order limit of the four-dimensional quadrature.
pub const MAX_FULL_ORDER: u32 = 12;

/// Beam with `w_c = 1`; wavelength plays no role at the waist plane.
const UNIT_BEAM: BeamSpec = BeamSpec { wavelength: 1.0, waist: 1.0, waist_plane_z: 0.0 };

/// Key `(ls, ps, li, pi)` of a coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoefficientKey {
    pub ls: i32,
    pub ps: u32,
    pub li: i32,
    pub pi: u32,
}

impl CoefficientKey {
    pub fn new(ls: i32, ps: u32, li: i32, pi: u32) -> Self {
        Self { ls, ps, li, pi }
    }

    pub fn signal(&self) -> LGIndex {
        LGIndex { p: self.ps, l: self.ls }
    }

    pub fn idler(&self) -> LGIndex {
        LGIndex { p: self.pi, l: self.li }
    }

    pub fn swapped(&self) -> Self {
        Self { ls: self.li, ps: self.pi, li: self.ls, pi: self.ps }
    }
}

fn pump_lg(pump: &PumpSpec) -> Result<LGIndex> {
    let index = pump.lg_index()?;
    LGIndex::new(index.p, index.l)
}

fn unit_profile(index: LGIndex) -> Result<FourierProfile> {
    lg_fourier_profile(index, UNIT_BEAM)
}

/// Upper limit for radial q-integrals over products of unit-waist profiles.
fn q_cutoff(max_order: u32, spec: &QuadratureSpec) -> f64 {
    2.0 * (spec.radial_cutoff_factor + (max_order as f64).sqrt())
}

/// Thin-crystal coefficient `8π² ∫ q v(√2q) v_s*(q) v_i*(q) dq`, zero unless `ls + li = l`.
pub fn coefficient_thin(pump: &PumpSpec, ls: i32, ps: u32, li: i32, pi: u32) -> Result<Complex64> {
    coefficient_thin_with(pump, CoefficientKey::new(ls, ps, li, pi), &QuadratureSpec::default())
}

pub fn coefficient_thin_with(
    pump: &PumpSpec,
    key: CoefficientKey,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    let pump_index = pump_lg(pump)?;
    let signal = LGIndex::new(key.ps, key.ls)?;
    let idler = LGIndex::new(key.pi, key.li)?;
    if key.ls + key.li != pump_index.l {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let v = unit_profile(pump_index)?;
    let vs = unit_profile(signal)?;
    let vi = unit_profile(idler)?;
    let order = pump_index.order().max(signal.order()).max(idler.order());
    let radial = quad_radial(
        |q| v.radial(SQRT_2 * q) * (vs.radial(q) * vi.radial(q)).conj() * q,
        q_cutoff(order, spec),
        spec,
    )?;
    Ok(radial * (8.0 * PI * PI))
}

/// Finite-crystal coefficient from the full `R, S` integral with the phase-matching
/// kernel retained, in the units of [`coefficient_thin`].
///
/// With `R = ρs + ρi` and `S = (ρs - ρi)/2` the integrand carries the Gaussian
/// `exp(-R²/w_c² - 2S²/w_c²)`, so a tensor Gauss-Hermite rule in four dimensions
/// applies. The rule is refined until two successive node counts agree.
pub fn coefficient_full(model: &BiphotonModel, ls: i32, ps: u32, li: i32, pi: u32) -> Result<Complex64> {
    coefficient_full_with(model, CoefficientKey::new(ls, ps, li, pi), &QuadratureSpec::default())
}

/// Node counts tried per dimension before giving up.
const FULL_NODE_LIMIT: usize = 64;

pub fn coefficient_full_with(
    model: &BiphotonModel,
    key: CoefficientKey,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    if model.is_thin_crystal() {
        return Err(Error::Domain("coefficient_full needs a finite-crystal model".into()));
    }
    let pump_index = pump_lg(model.pump())?;
    let signal = LGIndex::new(key.ps, key.ls)?;
    let idler = LGIndex::new(key.pi, key.li)?;
    for (what, order) in [("pump", pump_index.order()), ("signal", signal.order()), ("idler", idler.order())] {
        if order > MAX_FULL_ORDER {
            return Err(Error::Domain(format!(
                "{what} order {order} exceeds the {MAX_FULL_ORDER} limit of the full quadrature"
            )));
        }
    }
    let wc = model.pump().rescaled_beam().waist;
    let crystal = model.crystal();
    // F̂(√2 S) at S = w_c b/√2: sinc(KL w_c² b² / 8Z²)
    let z = model.detection_z();
    let kernel_coeff = crystal.pump_wavenumber * crystal.length * wc * wc / (8.0 * z * z);
    let integrand = FullIntegrand {
        pump: LgMode::new(pump_index, UNIT_BEAM)?,
        signal: LgMode::new(signal, UNIT_BEAM)?,
        idler: LgMode::new(idler, UNIT_BEAM)?,
        kernel_coeff,
    };

    let degree = (pump_index.order() + signal.order() + idler.order()) as usize;
    let mut n = degree / 2 + 8;
    let mut previous = integrand.evaluate(n);
    loop {
        let next_n = n + 8;
        let current = integrand.evaluate(next_n);
        let diff = (current - previous).norm();
        // Gaussian factor alone integrates to π² / 2 in these units.
        let scale = 0.5 * PI * PI;
        if diff <= spec.relative_tolerance * current.norm() || diff <= spec.absolute_tolerance.max(1e-13 * scale) {
            return Ok(current);
        }
        if next_n + 8 > FULL_NODE_LIMIT {
            return Err(Error::NoConvergence { estimate: current, error: diff, subdivisions: next_n });
        }
        previous = current;
        n = next_n;
    }
}

struct FullIntegrand {
    pump: LgMode,
    signal: LgMode,
    idler: LgMode,
    kernel_coeff: f64,
}

impl FullIntegrand {
    /// Tensor rule with `n` nodes per axis in the scaled coordinates `a = R/w_c`, `b = √2 S/w_c`.
    fn evaluate(&self, n: usize) -> Complex64 {
        let (nodes, weights) = gauss_hermite(n);
        let w: Vec<f64> = nodes.iter().zip(&weights).map(|(x, w)| w * (x * x).exp()).collect();
        let kernel: Vec<f64> = nodes
            .iter()
            .flat_map(|&bx| nodes.iter().map(move |&by| (bx, by)))
            .map(|(bx, by)| sinc(self.kernel_coeff * (bx * bx + by * by)))
            .collect();

        let rows: Vec<Complex64> = (0..n * n)
            .into_par_iter()
            .map(|ra| {
                let (ax, ay) = (nodes[ra / n], nodes[ra % n]);
                let wa = w[ra / n] * w[ra % n];
                let u = self.pump.waist_field(TransversePoint::new(ax, ay).scale(std::f64::consts::FRAC_1_SQRT_2));
                if u == Complex64::new(0.0, 0.0) {
                    return u;
                }
                let mut acc = Complex64::new(0.0, 0.0);
                for (sb, &k) in kernel.iter().enumerate() {
                    let (bx, by) = (nodes[sb / n], nodes[sb % n]);
                    let half = TransversePoint::new(0.5 * ax, 0.5 * ay);
                    let s = TransversePoint::new(bx, by).scale(std::f64::consts::FRAC_1_SQRT_2);
                    let fs = self.signal.waist_field(half + s);
                    let fi = self.idler.waist_field(half - s);
                    acc += (fs * fi).conj() * (k * w[sb / n] * w[sb % n]);
                }
                u * acc * wa
            })
            .collect();
        // d²R d²S = d²a d²b / 2 with w_c = 1
        0.5 * rows.iter().fold(Complex64::new(0.0, 0.0), |acc, v| acc + v)
    }
}

/// Every allowed key `ls + li = l` with both orders at most `n_max`, in key order.
pub fn allowed_keys(pump_l: i32, n_max: u32) -> Vec<CoefficientKey> {
    let mut keys = Vec::new();
    for s in LGIndex::up_to_order(n_max) {
        let li = pump_l - s.l;
        if li.unsigned_abs() > n_max {
            continue;
        }
        for pi in 0..=(n_max - li.unsigned_abs()) / 2 {
            keys.push(CoefficientKey::new(s.l, s.p, li, pi));
        }
    }
    keys.sort();
    keys
}

/// Decomposition coefficients up to a truncation order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub pump: PumpSpec,
    pub max_order: u32,
    pub entries: BTreeMap<CoefficientKey, Complex64>,
    /// `Σ|C|²` of the stored entries before normalization.
    pub normalization: f64,
}

impl CoefficientTable {
    /// Rescales the entries so that `Σ|C|² = 1`, recording the previous sum.
    pub fn normalize(mut self) -> Self {
        let total: f64 = self.entries.values().map(|c| c.norm_sqr()).sum();
        if total > 0.0 {
            let s = 1.0 / total.sqrt();
            for c in self.entries.values_mut() {
                *c *= s;
            }
        }
        self.normalization = total;
        self
    }

    pub fn get(&self, ls: i32, ps: u32, li: i32, pi: u32) -> Complex64 {
        self.entries.get(&CoefficientKey::new(ls, ps, li, pi)).copied().unwrap_or_default()
    }

    /// `P(m) = Σ_{ps,pi} |C(l - m, ps, m, pi)|²` keyed by idler OAM `m`.
    pub fn marginal(&self) -> BTreeMap<i32, f64> {
        let mut out = BTreeMap::new();
        for (k, c) in &self.entries {
            *out.entry(k.li).or_insert(0.0) += c.norm_sqr();
        }
        out
    }

    /// Largest-magnitude entry for idler OAM `m`.
    pub fn dominant_for_idler(&self, m: i32) -> Option<(CoefficientKey, Complex64)> {
        self.entries
            .iter()
            .filter(|(k, _)| k.li == m)
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()).then(b.0.cmp(a.0)))
            .map(|(k, c)| (*k, *c))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

fn check_table_order(n_max: u32) -> Result<()> {
    if n_max > MAX_TABLE_ORDER {
        return Err(Error::Domain(format!("truncation order {n_max} exceeds {MAX_TABLE_ORDER}")));
    }
    Ok(())
}

fn raw_table(pump: &PumpSpec, n_max: u32, spec: &QuadratureSpec) -> Result<CoefficientTable> {
    check_table_order(n_max)?;
    let l = pump_lg(pump)?.l;
    let keys = allowed_keys(l, n_max);
    let values = keys
        .par_iter()
        .map(|&k| coefficient_thin_with(pump, k, spec))
        .collect::<Result<Vec<_>>>()?;
    let entries: BTreeMap<_, _> = keys.into_iter().zip(values).collect();
    let normalization = entries.values().map(|c| c.norm_sqr()).sum();
    Ok(CoefficientTable { pump: *pump, max_order: n_max, entries, normalization })
}

/// Normalized thin-crystal table up to order `n_max`.
pub fn spiral_spectrum(pump: &PumpSpec, n_max: u32) -> Result<CoefficientTable> {
    spiral_spectrum_with(pump, n_max, &QuadratureSpec::default())
}

pub fn spiral_spectrum_with(pump: &PumpSpec, n_max: u32, spec: &QuadratureSpec) -> Result<CoefficientTable> {
    Ok(raw_table(pump, n_max, spec)?.normalize())
}

/// `1 - S(n_max)/S(n_max + 2)` with `S` the un-normalized `Σ|C|²`.
///
/// The thin-crystal state is not normalizable, so this tail decays only slowly
/// with the truncation order.
pub fn truncation_tail(pump: &PumpSpec, n_max: u32) -> Result<f64> {
    let spec = QuadratureSpec::default();
    check_table_order(n_max + 2)?;
    let small = raw_table(pump, n_max, &spec)?.normalization;
    let large = raw_table(pump, n_max + 2, &spec)?.normalization;
    Ok(1.0 - small / large)
}

/// Outcome of the numerical selection-rule check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionDefect {
    pub max_forbidden: f64,
    pub max_allowed: f64,
    pub forbidden_pairs: usize,
}

impl SelectionDefect {
    /// `max |C_forbidden| / max |C_allowed|`.
    pub fn ratio(&self) -> f64 {
        self.max_forbidden / self.max_allowed
    }
}

/// `4π ∫∫ V(√2q) V_s*(q) V_i*(q) d²q` with the angular integral done numerically.
fn coefficient_polar(
    pump: &FourierProfile,
    signal: &FourierProfile,
    idler: &FourierProfile,
    cutoff: f64,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    let inner_spec = QuadratureSpec {
        relative_tolerance: 0.1 * spec.relative_tolerance,
        absolute_tolerance: 0.1 * spec.absolute_tolerance / cutoff,
        ..*spec
    };
    let failure = std::cell::RefCell::new(None);
    let radial = integrate(
        |q| {
            let angular = integrate(
                |phi| {
                    let (s, c) = phi.sin_cos();
                    let (qx, qy) = (q * c, q * s);
                    pump.value(SQRT_2 * qx, SQRT_2 * qy) * (signal.value(qx, qy) * idler.value(qx, qy)).conj()
                },
                0.0,
                2.0 * PI,
                &inner_spec,
            );
            match angular {
                Ok(v) => v.value * q,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            }
        },
        0.0,
        cutoff,
        spec,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(radial.value * (4.0 * PI))
}

/// Largest forbidden (`ls + li ≠ l`) coefficient, each computed by direct polar
/// quadrature of the Fourier-space overlap.
pub fn selection_defect(pump: &PumpSpec, n_max: u32) -> Result<SelectionDefect> {
    selection_defect_with(pump, n_max, &QuadratureSpec::default())
}

/// As [`selection_defect`]; the absolute tolerance of the forbidden integrals is
/// `10⁻³ · relative_tolerance · max|C_allowed|`.
pub fn selection_defect_with(pump: &PumpSpec, n_max: u32, spec: &QuadratureSpec) -> Result<SelectionDefect> {
    spec.validate()?;
    check_table_order(n_max)?;
    let pump_index = pump_lg(pump)?;
    let v = unit_profile(pump_index)?;
    let modes = LGIndex::up_to_order(n_max);
    let profiles = modes.iter().map(|&m| unit_profile(m)).collect::<Result<Vec<_>>>()?;
    let cutoff = q_cutoff(n_max.max(pump_index.order()), spec);

    let pairs: Vec<(usize, usize)> =
        (0..modes.len()).flat_map(|s| (0..modes.len()).map(move |i| (s, i))).collect();
    let (allowed, forbidden): (Vec<_>, Vec<_>) =
        pairs.into_iter().partition(|&(s, i)| modes[s].l + modes[i].l == pump_index.l);

    let max_allowed = allowed
        .par_iter()
        .map(|&(s, i)| coefficient_polar(&v, &profiles[s], &profiles[i], cutoff, spec).map(|c| c.norm()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let forbidden_spec = QuadratureSpec {
        absolute_tolerance: 1e-3 * spec.relative_tolerance * max_allowed,
        ..*spec
    };
    let max_forbidden = forbidden
        .par_iter()
        .map(|&(s, i)| coefficient_polar(&v, &profiles[s], &profiles[i], cutoff, &forbidden_spec).map(|c| c.norm()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(SelectionDefect { max_forbidden, max_allowed, forbidden_pairs: forbidden.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    EntangledConsistent,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::EntangledConsistent => "entangled_consistent",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// One term `P_li |F_{l-li}(ρs)|² |G_li(ρi)|²` of the classical mixture.
#[derive(Debug, Clone, Copy)]
pub struct ClassicalTerm {
    pub weight: f64,
    pub signal: LGIndex,
    pub idler: LGIndex,
}

#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub zero_point: (TransversePoint, TransversePoint),
    pub translation_samples: Vec<TransversePoint>,
    pub quantum_p_values: Vec<f64>,
    pub classical_pcc_values: Vec<f64>,
    /// `max |U|²`.
    pub quantum_scale: f64,
    /// Upper bound `Σ P_li max|F|² max|G|²` of the classical model.
    pub classical_scale: f64,
    pub classical_terms: Vec<ClassicalTerm>,
    pub verdict: Verdict,
}

/// Quantum values count as null below this fraction of `max |U|²`.
pub const QUANTUM_NULL: f64 = 1e-10;
/// A classical value is significant above this fraction of its upper bound.
pub const CLASSICAL_SIGNIFICANT: f64 = 1e-3;

/// Displacements `Δ` used when none are given, in units of the pump waist.
pub fn default_delta_samples(pump: &PumpSpec) -> Vec<TransversePoint> {
    let w = pump.beam.waist;
    [(0.0, 0.0), (0.3, 0.0), (0.0, 0.3), (0.3, 0.3), (-0.5, 0.2), (1.0, 0.0), (0.15, -0.6)]
        .iter()
        .map(|&(x, y)| TransversePoint::new(x * w, y * w))
        .collect()
}

pub fn classical_witness(pump: &PumpSpec, delta_samples: &[TransversePoint]) -> Result<WitnessReport> {
    classical_witness_with(pump, delta_samples, DEFAULT_N_MAX)
}

/// Compares `P(ρs0 + Δ, ρi0 - Δ)` on a line through the vortex null with the
/// best OAM-conserving product mixture built from the spiral spectrum.
pub fn classical_witness_with(
    pump: &PumpSpec,
    delta_samples: &[TransversePoint],
    n_max: u32,
) -> Result<WitnessReport> {
    let pump_index = pump_lg(pump)?;
    if pump_index.l == 0 {
        return Err(Error::Domain("witness needs a pump with l != 0".into()));
    }
    let rescaled = pump.rescaled_beam();
    let u = LgMode::new(pump_index, rescaled)?;
    let rho_s0 = TransversePoint::new(0.5 * pump.beam.waist, 0.0);
    let rho_i0 = -rho_s0;

    let table = spiral_spectrum(pump, n_max)?;
    let mut terms = Vec::new();
    for (&m, &weight) in &table.marginal() {
        if let Some((key, _)) = table.dominant_for_idler(m) {
            terms.push(ClassicalTerm { weight, signal: key.signal(), idler: key.idler() });
        }
    }
    let bound = terms
        .iter()
        .map(|t| {
            let f = LgMode::new(t.signal, rescaled)?;
            let g = LgMode::new(t.idler, rescaled)?;
            Ok((f, g, t.weight))
        })
        .collect::<Result<Vec<_>>>()?;
    let peak_sq = |m: &LgMode| {
        let r = m.peak_radius(rescaled.waist_plane_z);
        m.radial_amplitude(r, rescaled.waist_plane_z).powi(2)
    };
    let classical_scale: f64 = bound.iter().map(|(f, g, w)| w * peak_sq(f) * peak_sq(g)).sum();
    let quantum_scale = peak_sq(&u);

    let mut quantum = Vec::with_capacity(delta_samples.len());
    let mut classical = Vec::with_capacity(delta_samples.len());
    for &d in delta_samples {
        let (rs, ri) = (rho_s0 + d, rho_i0 - d);
        let sum = (rs + ri).scale(std::f64::consts::FRAC_1_SQRT_2);
        quantum.push(u.waist_field(sum).norm_sqr());
        classical.push(
            bound
                .iter()
                .map(|(f, g, w)| w * f.waist_field(rs).norm_sqr() * g.waist_field(ri).norm_sqr())
                .sum(),
        );
    }
    let null = quantum.iter().all(|&p| p < QUANTUM_NULL * quantum_scale);
    let distinct = classical.iter().any(|&p| p > CLASSICAL_SIGNIFICANT * classical_scale);
    let verdict = if null && distinct { Verdict::EntangledConsistent } else { Verdict::Inconclusive };
    Ok(WitnessReport {
        zero_point: (rho_s0, rho_i0),
        translation_samples: delta_samples.to_vec(),
        quantum_p_values: quantum,
        classical_pcc_values: classical,
        quantum_scale,
        classical_scale,
        classical_terms: terms,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biphoton::CrystalParams;
    use crate::numerics::quad_plane;

    fn pump(l: i32) -> PumpSpec {
        PumpSpec::lg(LGIndex { p: 0, l }, BeamSpec::from_nm_mm(351.1, 1.0).unwrap())
    }

    #[test]
    fn kronecker_delta() {
        assert_eq!(coefficient_thin(&pump(1), 1, 0, 1, 0).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(coefficient_thin(&pump(1), 1, 2, 1, 1).unwrap(), Complex64::new(0.0, 0.0));
        assert!(coefficient_thin(&pump(0), 0, 0, 0, 0).unwrap().re > 0.0);
    }

    #[test]
    fn gaussian_pump_closed_form() {
        // unit waist: v(q) = e^{-q²/4}/√(2π), so C = 8π² (2π)^{-3/2} ∫ q e^{-q²} dq
        let c = coefficient_thin(&pump(0), 0, 0, 0, 0).unwrap();
        let expected = 4.0 * PI * PI * (2.0 * PI).powf(-1.5);
        assert!((c.re - expected).abs() < 1e-12, "{c} vs {expected}");
    }

    #[test]
    fn plane_oracle_for_swapped_pair() {
        // Direct Cartesian quadrature of 4π ∫ V(√2q) V_s*(q) V_i*(q) d²q.
        let v = unit_profile(LGIndex { p: 0, l: 1 }).unwrap();
        let spec = QuadratureSpec::default().with_tolerance(1e-11, 1e-14);
        let overlap = |s: LGIndex, i: LGIndex| {
            let (fs, fi) = (unit_profile(s).unwrap(), unit_profile(i).unwrap());
            4.0 * PI
                * quad_plane(
                    |x, y| v.value(SQRT_2 * x, SQRT_2 * y) * (fs.value(x, y) * fi.value(x, y)).conj(),
                    12.0,
                    &spec,
                )
                .unwrap()
        };
        let a = overlap(LGIndex { p: 0, l: 1 }, LGIndex { p: 0, l: 0 });
        let b = overlap(LGIndex { p: 0, l: 0 }, LGIndex { p: 0, l: 1 });
        assert!((a.norm_sqr() / b.norm_sqr() - 1.0).abs() < 1e-9);
        let thin = coefficient_thin(&pump(1), 1, 0, 0, 0).unwrap();
        assert!((thin - a).norm() < 1e-9 * thin.norm(), "{thin} vs {a}");
    }

    #[test]
    fn exchange_symmetry() {
        let p = pump(2);
        for key in allowed_keys(2, 5) {
            let a = coefficient_thin_with(&p, key, &QuadratureSpec::default()).unwrap();
            let b = coefficient_thin_with(&p, key.swapped(), &QuadratureSpec::default()).unwrap();
            assert!((a - b).norm() <= 1e-10 * a.norm().max(1e-300), "{key:?}");
        }
    }

    #[test]
    fn spiral_spectrum_pinned() {
        // Independent radial quadrature of the same closed-form profiles (Python/scipy).
        let t = spiral_spectrum(&pump(1), 8).unwrap();
        let total: f64 = t.entries.values().map(|c| c.norm_sqr()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let m = t.marginal();
        assert!((m.values().sum::<f64>() - 1.0).abs() < 1e-12);
        for (l, expected) in [(0, 0.20285), (1, 0.20285), (-1, 0.16228), (2, 0.16228), (3, 0.08099), (-2, 0.08099)] {
            assert!((m[&l] - expected).abs() < 1e-5, "P({l}) = {}", m[&l]);
        }
        let mut sorted: Vec<_> = m.iter().collect();
        sorted.sort_by(|a, b| b.1.total_cmp(a.1));
        let top: Vec<i32> = sorted[..2].iter().map(|(l, _)| **l).collect();
        assert!(top.contains(&0) && top.contains(&1));
        let raw = t.get(1, 0, 0, 0).norm() * t.normalization.sqrt();
        assert!((raw - 0.022448 * 8.0 * PI * PI).abs() < 1e-4, "{raw}");
    }

    #[test]
    fn gaussian_pump_spectrum_is_mirror_symmetric() {
        let m = spiral_spectrum(&pump(0), 8).unwrap().marginal();
        assert!((m[&0] - 0.4125).abs() < 1e-4);
        for l in 1..=8 {
            assert!((m[&l] - m[&-l]).abs() < 1e-12, "l={l}");
        }
    }

    #[test]
    fn truncation_tail_decreases() {
        let p = pump(1);
        let t6 = truncation_tail(&p, 6).unwrap();
        let t8 = truncation_tail(&p, 8).unwrap();
        assert!(t8 < t6);
        assert!((t8 - 0.211).abs() < 2e-3, "{t8}");
    }

    #[test]
    fn selection_defect_small() {
        for l in [1, 2] {
            let d = selection_defect(&pump(l), 4).unwrap();
            assert!(d.ratio() < 1e-10, "l={l}: {d:?}");
            assert!(d.max_allowed > 0.0);
        }
    }

    #[test]
    fn full_matches_thin_for_thin_crystal() {
        let p = pump(1);
        let model = BiphotonModel::new(p, CrystalParams::for_pump(1e-5, &p.beam).unwrap(), 1.0, false).unwrap();
        for key in [CoefficientKey::new(1, 0, 0, 0), CoefficientKey::new(2, 0, -1, 1), CoefficientKey::new(3, 0, -2, 0)] {
            let thin = coefficient_thin_with(&p, key, &QuadratureSpec::default()).unwrap();
            let full = coefficient_full_with(&model, key, &QuadratureSpec::default()).unwrap();
            assert!((full - thin).norm() < 1e-6 * thin.norm(), "{key:?}: {full} vs {thin}");
        }
        let forbidden = coefficient_full(&model, 1, 0, 1, 0).unwrap();
        assert!(forbidden.norm() < 1e-8 * coefficient_thin(&p, 1, 0, 0, 0).unwrap().norm());
    }

    #[test]
    fn full_coefficient_with_long_crystal() {
        let p = pump(1);
        let model = BiphotonModel::new(p, CrystalParams::for_pump(7e-3, &p.beam).unwrap(), 1.0, false).unwrap();
        let full = coefficient_full(&model, 1, 0, 0, 0).unwrap();
        let thin = coefficient_thin(&p, 1, 0, 0, 0).unwrap();
        let rel = (full - thin).norm() / thin.norm();
        assert!(rel < 0.05, "{rel}");
        assert!(coefficient_full(&model.with_thin_crystal(true).unwrap(), 1, 0, 0, 0).is_err());
        assert!(coefficient_full(&model, 13, 0, -12, 0).is_err());
    }

    #[test]
    fn witness_verdicts() {
        for l in [1, 2] {
            let p = pump(l);
            let r = classical_witness(&p, &default_delta_samples(&p)).unwrap();
            assert_eq!(r.verdict, Verdict::EntangledConsistent, "l={l}");
            assert!(r.quantum_p_values.iter().all(|&v| v < QUANTUM_NULL * r.quantum_scale));
        }
        assert!(classical_witness(&pump(0), &[]).is_err());
    }

    #[test]
    fn witness_off_null_sample() {
        let p = pump(1);
        let w = p.beam.waist;
        let r = classical_witness(&p, &[TransversePoint::new(0.3 * w, 0.0)]).unwrap();
        assert!(r.quantum_p_values[0] < 1e-20 * r.quantum_scale);
        assert!(r.classical_pcc_values[0] > CLASSICAL_SIGNIFICANT * r.classical_scale);
    }
}
