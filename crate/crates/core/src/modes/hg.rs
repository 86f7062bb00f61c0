use num_complex::Complex64;

use super::{BeamSpec, HGIndex, TransversePoint};
use crate::error::Result;
use crate::numerics::hermite_function;

/// HG mode bound to a beam.
#[derive(Debug, Clone, Copy)]
pub struct HgMode {
    pub(super) index: HGIndex,
    pub(super) beam: BeamSpec,
}

impl HgMode {
    pub fn new(index: HGIndex, beam: BeamSpec) -> Result<Self> {
        let index = HGIndex::new(index.m, index.n)?;
        beam.validate()?;
        Ok(Self { index, beam })
    }

    pub fn index(&self) -> HGIndex {
        self.index
    }

    pub fn beam(&self) -> &BeamSpec {
        &self.beam
    }

    #[inline]
    pub fn field(&self, point: TransversePoint, z: f64) -> Complex64 {
        let prop = self.beam.propagation(z);
        let scale = std::f64::consts::SQRT_2 / prop.radius;
        let amp = scale
            * hermite_function(self.index.m, scale * point.x)
            * hermite_function(self.index.n, scale * point.y);
        let rho2 = point.x * point.x + point.y * point.y;
        let phase = -(self.index.order() as f64 + 1.0) * prop.gouy + prop.curvature * rho2;
        Complex64::from_polar(1.0, phase) * amp
    }
}

/// `HG_{mn}(beam)` evaluated at `point` on plane `z`.
pub fn hg_field(index: HGIndex, beam: BeamSpec, point: TransversePoint, z: f64) -> Result<Complex64> {
    Ok(HgMode::new(index, beam)?.field(point, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{mode_extent, mode_inner_product, LGIndex, LgMode};
    use crate::numerics::QuadratureSpec;

    fn beam() -> BeamSpec {
        BeamSpec::from_nm_mm(702.2, 0.8).unwrap()
    }

    #[test]
    fn fundamental_equals_lg00() {
        let hg = HgMode::new(HGIndex { m: 0, n: 0 }, beam()).unwrap();
        let lg = LgMode::new(LGIndex { p: 0, l: 0 }, beam()).unwrap();
        let w = beam().waist;
        for &(x, y, z) in &[(0.0, 0.0, 0.0), (3e-4, -5e-4, 0.0), (1e-3, 1e-3, 2.5), (-2e-3, 7e-4, -1.0)] {
            let p = TransversePoint { x, y };
            let (a, b) = (hg.field(p, z), lg.field(p, z));
            assert!((a - b).norm() < 1e-12 / w, "{a} vs {b}");
        }
    }

    #[test]
    fn hg01_nodal_line() {
        let hg = HgMode::new(HGIndex { m: 0, n: 1 }, beam()).unwrap();
        for x in [-1e-3, 0.0, 2e-4, 1.5e-3] {
            assert_eq!(hg.field(TransversePoint { x, y: 0.0 }, 0.3).norm(), 0.0);
        }
        assert!(hg.field(TransversePoint { x: 0.0, y: 5e-4 }, 0.0).norm() > 0.0);
    }

    #[test]
    fn hg10_hg01_orthogonal() {
        let a = HgMode::new(HGIndex { m: 1, n: 0 }, beam()).unwrap();
        let b = HgMode::new(HGIndex { m: 0, n: 1 }, beam()).unwrap();
        let spec = QuadratureSpec::default().with_tolerance(1e-10, 1e-12);
        let h = mode_extent(beam().waist, 1, &spec);
        let ip = mode_inner_product(|p| a.field(p, 0.0), |p| b.field(p, 0.0), h, &spec).unwrap();
        assert!(ip.norm() < 1e-10);
        let nn = mode_inner_product(|p| b.field(p, 1.0), |p| b.field(p, 1.0), h, &spec).unwrap();
        assert!((nn.re - 1.0).abs() < 1e-9);
    }
}
