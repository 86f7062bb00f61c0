use std::f64::consts::FRAC_1_SQRT_2;

use proptest::prelude::*;
use spdc_core::decomposition::{coefficient_thin_with, CoefficientKey};
use spdc_core::hom::{coincidence_amplitude, output_amplitudes};
use spdc_core::modes::lg_field;
use spdc_core::{BeamSpec, BeamSplitterSpec, BiphotonModel, CrystalParams, LGIndex, PumpSpec, QuadratureSpec, TransversePoint};

fn beam() -> BeamSpec {
    BeamSpec::from_nm_mm(351.1, 1.0).unwrap()
}

fn thin(p: u32, l: i32) -> BiphotonModel {
    BiphotonModel::thin(PumpSpec::lg(LGIndex { p, l }, beam()), 7e-3, 1.0).unwrap()
}

fn point() -> impl Strategy<Value = TransversePoint> {
    (-3e-3..3e-3f64, -3e-3..3e-3f64).prop_map(|(x, y)| TransversePoint::new(x, y))
}

fn pump_index() -> impl Strategy<Value = (u32, i32)> {
    (0u32..3, -3i32..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn thin_amplitude_is_translation_invariant((p, l) in pump_index(), rs in point(), ri in point(), d in point()) {
        let m = thin(p, l);
        let a = m.psi(rs + d, ri - d);
        let b = m.psi(rs, ri);
        let peak = m.u_field(TransversePoint::ORIGIN).norm().max(1.0);
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(b.norm()).max(1e-6 * peak));
    }

    #[test]
    fn amplitude_is_exchange_symmetric((p, l) in pump_index(), rs in point(), ri in point(), thin_crystal in any::<bool>()) {
        let pump = PumpSpec::lg(LGIndex { p, l }, beam());
        let m = BiphotonModel::new(pump, CrystalParams::for_pump(7e-3, &pump.beam).unwrap(), 1.0, thin_crystal).unwrap();
        prop_assert_eq!(m.psi(rs, ri), m.psi(ri, rs));
    }

    #[test]
    fn opposite_oam_has_equal_magnitude((p, l) in pump_index(), pt in point(), z in 0.0..20.0f64) {
        let a = lg_field(LGIndex { p, l }, beam(), pt, z).unwrap().norm();
        let b = lg_field(LGIndex { p, l: -l }, beam(), pt, z).unwrap().norm();
        prop_assert!((a - b).abs() <= 1e-13 * a.max(1.0));
    }

    #[test]
    fn coincidence_amplitude_is_odd_in_y((p, l) in pump_index(), r1 in point()) {
        let m = thin(p, l);
        let bs = BeamSplitterSpec::balanced();
        let a = coincidence_amplitude(&m, &bs, r1, TransversePoint::ORIGIN);
        let b = coincidence_amplitude(&m, &bs, TransversePoint::new(r1.x, -r1.y), TransversePoint::ORIGIN);
        prop_assert!((a + b).norm() <= 1e-12 * a.norm().max(1e-300));
    }

    #[test]
    fn interference_bounded_by_incoherent_sum((p, l) in pump_index(), r1 in point(), r2 in point()) {
        let m = thin(p, l);
        let (tt, rr) = output_amplitudes(&m, &BeamSplitterSpec::balanced(), r1, r2);
        prop_assert!((tt + rr).norm_sqr() <= 2.0 * (tt.norm_sqr() + rr.norm_sqr()) * (1.0 + 1e-12));
    }

    #[test]
    fn nodal_plane_of_balanced_splitter((p, l) in pump_index(), x1 in -3e-3..3e-3f64, x2 in -3e-3..3e-3f64, y in -3e-3..3e-3f64) {
        let m = thin(p, l);
        let c = coincidence_amplitude(&m, &BeamSplitterSpec::balanced(), TransversePoint::new(x1, y), TransversePoint::new(x2, -y));
        let scale = m.u_field(TransversePoint::new(1e-3, 0.0)).norm().max(m.u_field(TransversePoint::ORIGIN).norm());
        prop_assert!(c.norm() <= 1e-12 * scale);
    }

    #[test]
    fn reflected_path_mirror_identity((p, l) in pump_index(), r1 in point(), r2 in point()) {
        // rr with the roles of t and r exchanged equals tt evaluated on mirrored, swapped points
        let m = thin(p, l);
        let one = BeamSplitterSpec::new(0.0, 1.0).unwrap();
        let (_, rr) = output_amplitudes(&m, &one, r1, r2);
        let mirrored = m.psi(TransversePoint::new(r2.x, -r2.y), TransversePoint::new(r1.x, -r1.y));
        prop_assert_eq!(rr, -mirrored);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn selection_rule_and_exchange(l in -2i32..=2, ls in -4i32..=4, li in -4i32..=4, ps in 0u32..3, pi in 0u32..3) {
        let pump = PumpSpec::lg(LGIndex { p: 0, l }, beam());
        let spec = QuadratureSpec::default();
        let c = coefficient_thin_with(&pump, CoefficientKey::new(ls, ps, li, pi), &spec).unwrap();
        let swapped = coefficient_thin_with(&pump, CoefficientKey::new(li, pi, ls, ps), &spec).unwrap();
        if ls + li != l {
            prop_assert_eq!(c.norm(), 0.0);
        }
        prop_assert!((c - swapped).norm() <= 1e-10 * c.norm().max(1e-300));
    }
}

#[test]
fn balanced_amplitude_halves_mirrored_difference() {
    let m = thin(1, 2);
    let bs = BeamSplitterSpec::balanced();
    let (r1, r2) = (TransversePoint::new(4e-4, -1e-3), TransversePoint::new(-7e-4, 3e-4));
    let s = (r1 + r2).scale(FRAC_1_SQRT_2);
    let expected = 0.5 * (m.u_field(s) - m.u_field(TransversePoint::new(s.x, -s.y)));
    assert!((coincidence_amplitude(&m, &bs, r1, r2) - expected).norm() < 1e-12 * expected.norm());
}
