//! Adaptive Gauss-Kronrod quadrature for complex integrands on intervals and squares.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerances and limits shared by every quadrature routine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub relative_tolerance: f64,
    pub absolute_tolerance: f64,
    pub max_subdivisions: usize,
    /// Integration radius in multiples of the relevant beam waist.
    pub radial_cutoff_factor: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-9,
            absolute_tolerance: 1e-14,
            max_subdivisions: 2000,
            radial_cutoff_factor: 8.0,
        }
    }
}

impl QuadratureSpec {
    pub fn new(
        relative_tolerance: f64,
        absolute_tolerance: f64,
        max_subdivisions: usize,
        radial_cutoff_factor: f64,
    ) -> Result<Self> {
        let spec = Self {
            relative_tolerance,
            absolute_tolerance,
            max_subdivisions,
            radial_cutoff_factor,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.relative_tolerance > 0.0) || !(self.absolute_tolerance > 0.0) {
            return Err(Error::Domain(format!(
                "quadrature tolerances must be positive (relative {}, absolute {})",
                self.relative_tolerance, self.absolute_tolerance
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Domain("max_subdivisions must be at least 1".into()));
        }
        if !(self.radial_cutoff_factor >= 5.0) {
            return Err(Error::Domain(format!(
                "radial_cutoff_factor must be at least 5 waists, got {}",
                self.radial_cutoff_factor
            )));
        }
        Ok(())
    }

    /// Same spec with both tolerances replaced.
    pub fn with_tolerance(mut self, relative: f64, absolute: f64) -> Self {
        self.relative_tolerance = relative;
        self.absolute_tolerance = absolute;
        self
    }

    fn target(&self, value: Complex64) -> f64 {
        self.absolute_tolerance.max(self.relative_tolerance * value.norm())
    }
}

/// Estimate and error bound of a converged integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    pub subdivisions: usize,
}

// 15-point Kronrod nodes on [-1, 1] (non-negative half) and weights; the
// embedded 7-point Gauss rule uses the odd-indexed nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    // Largest error first; ties broken by position so the refinement order is reproducible.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = fc.norm() * WGK[7];
    let mut fv1 = [Complex64::new(0.0, 0.0); 7];
    let mut fv2 = [Complex64::new(0.0, 0.0); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += (f1 + f2) * WGK[j];
        resabs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            resg += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = resk * 0.5;
    let mut resasc = (fc - mean).norm() * WGK[7];
    for j in 0..7 {
        resasc += ((fv1[j] - mean).norm() + (fv2[j] - mean).norm()) * WGK[j];
    }
    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut error = ((resk - resg) * half).norm();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Panel { a, b, value, error }
}

/// Globally adaptive G7/K15 quadrature of a complex integrand over `[a, b]`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral>
where
    F: FnMut(f64) -> Complex64,
{
    if a == b {
        return Ok(Integral { value: Complex64::new(0.0, 0.0), error: 0.0, subdivisions: 0 });
    }
    let first = kronrod15(&mut f, a, b);
    let mut total = first.value;
    let mut err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 1;
    while err > spec.target(total) {
        if subdivisions >= spec.max_subdivisions || !err.is_finite() {
            return Err(Error::NoConvergence { estimate: total, error: err, subdivisions });
        }
        let worst = heap.pop().expect("heap holds every panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be bisected in floating point.
            return Err(Error::NoConvergence { estimate: total, error: err, subdivisions });
        }
        let left = kronrod15(&mut f, worst.a, mid);
        let right = kronrod15(&mut f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
    // Re-sum from the panels in a fixed order so the result does not carry
    // the running-update rounding history.
    let mut panels = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = panels.iter().fold(Complex64::new(0.0, 0.0), |acc, p| acc + p.value);
    let error = panels.iter().map(|p| p.error).sum();
    Ok(Integral { value, error, subdivisions })
}

/// `∫₀^cutoff f(q) dq` for radial integrands.
pub fn quad_radial<F>(f: F, cutoff: f64, spec: &QuadratureSpec) -> Result<Complex64>
where
    F: FnMut(f64) -> Complex64,
{
    if !(cutoff > 0.0) {
        return Err(Error::Domain(format!("radial cutoff must be positive, got {cutoff}")));
    }
    integrate(f, 0.0, cutoff, spec).map(|i| i.value)
}

/// `∫∫ f(x, y) dx dy` over `[-h, h]²` by nested adaptive quadrature.
pub fn quad_plane<F>(f: F, half_width: f64, spec: &QuadratureSpec) -> Result<Complex64>
where
    F: Fn(f64, f64) -> Complex64,
{
    quad_rect(f, (-half_width, half_width), (-half_width, half_width), spec).map(|i| i.value)
}

/// Nested adaptive quadrature over a rectangle; the inner (y) integrals get a
/// tolerance share scaled to the outer interval length.
pub fn quad_rect<F>(
    f: F,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    spec: &QuadratureSpec,
) -> Result<Integral>
where
    F: Fn(f64, f64) -> Complex64,
{
    if !(x1 > x0) || !(y1 > y0) {
        return Err(Error::Domain("integration rectangle must have positive extent".into()));
    }
    let inner_spec = spec.with_tolerance(
        spec.relative_tolerance * 0.1,
        spec.absolute_tolerance * 0.1 / (x1 - x0),
    );
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let inner_error = RefCell::new(0.0f64);
    let outer = integrate(
        |x| {
            if failure.borrow().is_some() {
                return Complex64::new(0.0, 0.0);
            }
            match integrate(|y| f(x, y), y0, y1, &inner_spec) {
                Ok(i) => {
                    let mut e = inner_error.borrow_mut();
                    *e = e.max(i.error);
                    i.value
                }
                Err(err) => {
                    *failure.borrow_mut() = Some(err);
                    Complex64::new(0.0, 0.0)
                }
            }
        },
        x0,
        x1,
        spec,
    );
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    let outer = outer?;
    Ok(Integral {
        value: outer.value,
        error: outer.error + inner_error.into_inner() * (x1 - x0),
        subdivisions: outer.subdivisions,
    })
}

/// Gauss-Hermite nodes and weights for `∫ g(x) exp(-x²) dx`, ascending nodes.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let nf = n as f64;
    let m = n.div_ceil(2);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0f64;
    for i in 0..m {
        // Initial guesses for the largest roots, then extrapolation from the previous two.
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-0.166_67),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[m - 1] = 0.0;
    }
    x.reverse();
    w.reverse();
    (x, w)
}
