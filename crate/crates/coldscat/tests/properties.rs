//! Property-based invariants over randomized inputs.

use proptest::prelude::*;

use coldscat::potentials::{InnerWallDeformation, PotentialCurve};
use coldscat::spectra_fit::{detect_nodes, FCSpectrum, FcEntry};
use coldscat::units::{convert, Quantity, Unit};

const ENERGY_UNITS: [Unit; 5] = [
    Unit::Hartree,
    Unit::WavenumberCm,
    Unit::Kelvin,
    Unit::Microkelvin,
    Unit::Megahertz,
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conversion_paths_commute(
        value in -1e6_f64..1e6,
        i in 0usize..5,
        j in 0usize..5,
        k in 0usize..5,
    ) {
        let q = Quantity::new(value, ENERGY_UNITS[i]);
        let direct = convert(q, ENERGY_UNITS[k]).unwrap().value;
        let via = convert(convert(q, ENERGY_UNITS[j]).unwrap(), ENERGY_UNITS[k]).unwrap().value;
        let scale = direct.abs().max(1e-30);
        prop_assert!(((direct - via) / scale).abs() < 1e-12);
    }

    #[test]
    fn tail_exact_beyond_join(
        depth in 1e-4_f64..5e-3,
        r_min in 8.0_f64..14.0,
        c6 in -9000.0_f64..-3000.0,
        probe in 1.0_f64..50.0,
    ) {
        let curve = PotentialCurve::model_c6_well("w", depth, r_min, c6, 20.0, 2.0, 0.0).unwrap();
        let r = curve.tail_from() + probe;
        prop_assert_eq!(curve.eval(r) - curve.asymptote(), c6 / r.powi(6));
    }

    #[test]
    fn deformation_never_touches_tail(
        lambda in -2e-4_f64..2e-4,
        center in 9.0_f64..14.0,
        sigma in 0.3_f64..3.0,
        probe in 0.0_f64..100.0,
    ) {
        let base = PotentialCurve::model_c6_well("w", 1.3e-3, 11.8, -6331.0, 20.0, 2.0, 0.0).unwrap();
        let def = base
            .apply_deformation(InnerWallDeformation { amplitude: lambda, center, sigma })
            .unwrap();
        let r = base.r_join() + probe;
        prop_assert_eq!(base.eval(r), def.eval(r));
    }

    #[test]
    fn node_positions_scale_invariant(scale in 1e-6_f64..1e6) {
        // scaling the continuum normalization rescales every FC factor by the
        // same constant; node detunings must not move
        let entries: Vec<FcEntry> = (0..30)
            .map(|v| {
                let d = 1.0 + v as f64 * 1.3;
                FcEntry { v, detuning_cm1: d, fc: (0.41 * d + 0.3).sin().powi(2) + 1e-4 }
            })
            .collect();
        let base = FCSpectrum { entries: entries.clone(), collision_energy: 1e-10 };
        let scaled = FCSpectrum {
            entries: entries
                .iter()
                .map(|e| FcEntry { v: e.v, detuning_cm1: e.detuning_cm1, fc: e.fc * scale })
                .collect(),
            collision_energy: 1e-10,
        };
        let n1 = detect_nodes(&base, 10.0).unwrap();
        let n2 = detect_nodes(&scaled, 10.0).unwrap();
        prop_assert_eq!(n1.detunings.len(), n2.detunings.len());
        for (a, b) in n1.detunings.iter().zip(&n2.detunings) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
