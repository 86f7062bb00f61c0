//! π/2 astigmatic mode converter.
//!
//! An HG mode whose axes sit at ±45° to the cylindrical lenses is expanded in
//! the converter-aligned basis `HG_{N-k,k}`; the converter multiplies
//! component `k` by `i^k` (a π/2 Gouy-phase step per y-quantum). All overlaps
//! are polynomial-times-Gaussian integrals, which Gauss-Hermite rules with
//! `N + 2` nodes per axis evaluate exactly.

use num_complex::Complex64;

use super::{BeamSpec, HGIndex, LGIndex, LgMode, TransversePoint};
use crate::error::Result;
use crate::numerics::quadrature::gauss_hermite;
use crate::numerics::special::{hermite_function, hermite_functions_into};

/// Orientation of the input HG axes relative to the converter's cylinder axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConverterOrientation {
    /// Input rotated by -45°: `HG_{m,n}` leaves as `LG` with `l = n - m`.
    #[default]
    Plus45,
    /// Input rotated by +45°: `l = m - n`.
    Minus45,
}

impl ConverterOrientation {
    fn input_angle(self) -> f64 {
        match self {
            ConverterOrientation::Plus45 => -std::f64::consts::FRAC_PI_4,
            ConverterOrientation::Minus45 => std::f64::consts::FRAC_PI_4,
        }
    }
}

/// Weights below this squared magnitude are dropped from the reported LG content.
const CONTENT_FLOOR: f64 = 1e-20;

#[derive(Debug, Clone)]
pub struct Pi2Converter {
    input: HGIndex,
    orientation: ConverterOrientation,
    /// `c_k` multiplying `HG_{N-k,k}` at the converter output.
    hg_weights: Vec<Complex64>,
    lg_content: Vec<(LGIndex, Complex64)>,
}

impl Pi2Converter {
    pub fn new(input: HGIndex, orientation: ConverterOrientation) -> Result<Self> {
        let input = HGIndex::new(input.m, input.n)?;
        let order = input.order() as usize;
        let (nodes, weights) = gauss_hermite(order + 2);
        // Weights for ∫ g(x) dx with g already carrying its Gaussian factor.
        let weights: Vec<f64> = nodes.iter().zip(&weights).map(|(x, w)| w * (x * x).exp()).collect();
        let n_nodes = nodes.len();

        // ψ_j(node) for j = 0..=N, tabulated once.
        let mut table = vec![0.0; n_nodes * (order + 1)];
        for (a, &x) in nodes.iter().enumerate() {
            hermite_functions_into(x, &mut table[a * (order + 1)..(a + 1) * (order + 1)]);
        }
        let psi = |a: usize, j: usize| table[a * (order + 1) + j];

        // Dimensionless beam whose field coordinate equals the Hermite argument.
        let unit = BeamSpec { wavelength: 1.0, waist: std::f64::consts::SQRT_2, waist_plane_z: 0.0 };
        let (s, c) = orientation.input_angle().sin_cos();

        let mut input_vals = vec![0.0; n_nodes * n_nodes];
        for a in 0..n_nodes {
            for b in 0..n_nodes {
                let (x, y) = (nodes[a], nodes[b]);
                let u = x * c + y * s;
                let v = -x * s + y * c;
                input_vals[a * n_nodes + b] =
                    hermite_function(input.m, u) * hermite_function(input.n, v);
            }
        }

        let i_pow = |k: usize| match k % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        let mut hg_weights = Vec::with_capacity(order + 1);
        for k in 0..=order {
            let mut b_k = 0.0;
            for a in 0..n_nodes {
                let mut row = 0.0;
                for b in 0..n_nodes {
                    row += weights[b] * input_vals[a * n_nodes + b] * psi(b, k);
                }
                b_k += weights[a] * psi(a, order - k) * row;
            }
            hg_weights.push(i_pow(k) * b_k);
        }

        let mut output_vals = vec![Complex64::new(0.0, 0.0); n_nodes * n_nodes];
        for a in 0..n_nodes {
            for b in 0..n_nodes {
                output_vals[a * n_nodes + b] = hg_weights
                    .iter()
                    .enumerate()
                    .map(|(k, w)| w * (psi(a, order - k) * psi(b, k)))
                    .sum();
            }
        }

        let mut lg_content = Vec::new();
        let n = order as i32;
        for l in (-n..=n).step_by(2) {
            let index = LGIndex { p: ((n - l.abs()) / 2) as u32, l };
            let mode = LgMode::new(index, unit)?;
            let mut overlap = Complex64::new(0.0, 0.0);
            for a in 0..n_nodes {
                for b in 0..n_nodes {
                    let pt = TransversePoint { x: nodes[a], y: nodes[b] };
                    overlap += mode.waist_field(pt).conj()
                        * output_vals[a * n_nodes + b]
                        * (weights[a] * weights[b]);
                }
            }
            if overlap.norm_sqr() > CONTENT_FLOOR {
                lg_content.push((index, overlap));
            }
        }
        lg_content.sort_by(|x, y| y.1.norm_sqr().total_cmp(&x.1.norm_sqr()).then(x.0.cmp(&y.0)));

        Ok(Self { input, orientation, hg_weights, lg_content })
    }

    pub fn input(&self) -> HGIndex {
        self.input
    }

    pub fn orientation(&self) -> ConverterOrientation {
        self.orientation
    }

    pub fn hg_weights(&self) -> &[Complex64] {
        &self.hg_weights
    }

    /// LG decomposition of the output, strongest term first.
    pub fn lg_content(&self) -> &[(LGIndex, Complex64)] {
        &self.lg_content
    }

    /// The rotated HG field entering the converter.
    pub fn input_field(&self, beam: &BeamSpec, point: TransversePoint, z: f64) -> Complex64 {
        let (s, c) = self.orientation.input_angle().sin_cos();
        let rotated = TransversePoint { x: point.x * c + point.y * s, y: -point.x * s + point.y * c };
        super::HgMode { index: self.input, beam: *beam }.field(rotated, z)
    }

    /// Converter output `Σ_k c_k HG_{N-k,k}` at plane `z` of `beam`.
    pub fn output_field(&self, beam: &BeamSpec, point: TransversePoint, z: f64) -> Complex64 {
        let order = self.input.order() as usize;
        let prop = beam.propagation(z);
        let scale = std::f64::consts::SQRT_2 / prop.radius;
        let mut hx = vec![0.0; order + 1];
        let mut hy = vec![0.0; order + 1];
        hermite_functions_into(scale * point.x, &mut hx);
        hermite_functions_into(scale * point.y, &mut hy);
        let sum: Complex64 = self
            .hg_weights
            .iter()
            .enumerate()
            .map(|(k, w)| w * (hx[order - k] * hy[k]))
            .sum();
        let rho2 = point.x * point.x + point.y * point.y;
        let phase = -(order as f64 + 1.0) * prop.gouy + prop.curvature * rho2;
        sum * Complex64::from_polar(scale, phase)
    }
}

/// LG content of a diagonal HG mode after the π/2 converter.
pub fn pi2_convert(
    index: HGIndex,
    orientation: ConverterOrientation,
) -> Result<Vec<(LGIndex, Complex64)>> {
    Ok(Pi2Converter::new(index, orientation)?.lg_content().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{mode_extent, mode_inner_product};
    use crate::numerics::QuadratureSpec;

    #[test]
    fn hg01_becomes_lg01() {
        let content = pi2_convert(HGIndex { m: 0, n: 1 }, ConverterOrientation::Plus45).unwrap();
        assert_eq!(content.len(), 1);
        assert_eq!(content[0].0, LGIndex { p: 0, l: 1 });
        assert!((content[0].1.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fundamental_unchanged() {
        let content = pi2_convert(HGIndex { m: 0, n: 0 }, ConverterOrientation::Plus45).unwrap();
        assert_eq!(content.len(), 1);
        assert_eq!(content[0].0, LGIndex { p: 0, l: 0 });
        assert!((content[0].1 - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn diagonal_mapping_and_orientation_flag() {
        for (m, n) in [(0u32, 2u32), (2, 0), (1, 2), (3, 1), (2, 2), (0, 5), (4, 7)] {
            let idx = HGIndex { m, n };
            let plus = Pi2Converter::new(idx, ConverterOrientation::Plus45).unwrap();
            let minus = Pi2Converter::new(idx, ConverterOrientation::Minus45).unwrap();
            let p = m.min(n);
            let l = n as i32 - m as i32;
            assert_eq!(plus.lg_content()[0].0, LGIndex { p, l }, "HG{m}{n}");
            assert_eq!(minus.lg_content()[0].0, LGIndex { p, l: -l }, "HG{m}{n}");
            for conv in [&plus, &minus] {
                let total: f64 = conv.lg_content().iter().map(|(_, w)| w.norm_sqr()).sum();
                assert!((total - 1.0).abs() < 1e-12, "HG{m}{n}: {total}");
                assert!((conv.lg_content()[0].1.norm_sqr() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hg02_overlap_oracle() {
        let beam = BeamSpec::from_nm_mm(351.1, 1.0).unwrap();
        let conv = Pi2Converter::new(HGIndex { m: 0, n: 2 }, ConverterOrientation::Plus45).unwrap();
        let target = LgMode::new(LGIndex { p: 0, l: 2 }, beam).unwrap();
        let spec = QuadratureSpec::default().with_tolerance(1e-11, 1e-13);
        let h = mode_extent(beam.waist, 2, &spec);
        let ip = mode_inner_product(
            |pt| target.field(pt, 0.0),
            |pt| conv.output_field(&beam, pt, 0.0),
            h,
            &spec,
        )
        .unwrap();
        assert!(ip.norm_sqr() > 1.0 - 1e-8, "{}", ip.norm_sqr());
        assert!((ip - conv.lg_content()[0].1).norm() < 1e-8);
    }

    #[test]
    fn input_is_rotated_mode() {
        let beam = BeamSpec::from_nm_mm(351.1, 1.0).unwrap();
        let conv = Pi2Converter::new(HGIndex { m: 0, n: 1 }, ConverterOrientation::Plus45).unwrap();
        // HG01 rotated by -45° has its nodal line along y = -x
        let on_node = TransversePoint { x: 4e-4, y: -4e-4 };
        assert!(conv.input_field(&beam, on_node, 0.0).norm() < 1e-12);
        let total: f64 = conv.hg_weights().iter().map(|w| w.norm_sqr()).sum();
        assert!((total - 1.0).abs() < 1e-13);
    }
}
