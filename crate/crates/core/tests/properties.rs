use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use fqc_core::measures::{tb_norm, Atom};
use fqc_core::progressions::{ap_count, MatchMode};
use fqc_core::regions::{generate_set, SetRequest};
use fqc_core::{AlgebraicReal, Ap, AtomicMeasure, Lattice2D, LatticeBox, SetKind, StaircaseSequences};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn box_enumeration_matches_scan(x0 in -15i64..15, y0 in -15i64..15, w in 0i64..16, h in 0i64..16, d in 1i64..4) {
        let l = Lattice2D::default_lattice();
        let bx = LatticeBox::new(q(x0, d), q(x0 + w, d), q(y0, d), q(y0 + h, d));
        let got: Vec<(i64, i64)> = l.enumerate_box(&bx).iter().map(|p| (p.m, p.n)).collect();
        let lo_x = AlgebraicReal::from_rational(bx.x_lo.clone());
        let hi_x = AlgebraicReal::from_rational(bx.x_hi.clone());
        let lo_y = AlgebraicReal::from_rational(bx.y_lo.clone());
        let hi_y = AlgebraicReal::from_rational(bx.y_hi.clone());
        // Corners stay within 31 of the origin, so |m|, |n| <= 52.
        let mut want = Vec::new();
        for m in -60..=60 {
            for n in -60..=60 {
                let p = l.point(m, n);
                if p.x >= lo_x && p.x <= hi_x && p.y >= lo_y && p.y <= hi_y {
                    want.push((m, n));
                }
            }
        }
        prop_assert_eq!(got, want);
    }

    #[test]
    fn comb_tb_norm(k in 1usize..6, shift in -0.49f64..0.49) {
        let atoms = (-40..=40).map(|i| Atom::synthetic(shift + i as f64 / k as f64, 1.0)).collect();
        let comb = AtomicMeasure::synthetic(atoms, 40.0);
        prop_assert_eq!(tb_norm(&comb), (k + 1) as f64);
    }

    #[test]
    fn lattice_progression_hits_its_own_points(m in -3i64..=3, n in 1i64..=3, m0 in -3i64..=3, n0 in -3i64..=3) {
        let l = Lattice2D::default_lattice();
        let ap = Ap::along_lattice(&l, (m0, n0), (m, n)).unwrap();
        let pts: Vec<AlgebraicReal> = (-5..=5).map(|k| l.point(m0 + k * m, n0 + k * n).x).collect();
        let hits = ap_count(&pts, &ap, MatchMode::Exact);
        prop_assert_eq!(hits.count, 11);
        let idx: Vec<i64> = hits.matches.iter().map(|h| h.index).collect();
        prop_assert_eq!(idx, (-5..=5).collect::<Vec<_>>());
    }

    #[test]
    fn lambda_is_symmetric_and_nested(w in 2.0f64..40.0) {
        let l = Lattice2D::default_lattice();
        let seqs = StaircaseSequences::default_primal();
        let small = generate_set(&SetRequest { kind: SetKind::Lambda, lattice: &l, seqs: &seqs, window: w, transverse_cap: None }).unwrap();
        let big = generate_set(&SetRequest { kind: SetKind::Lambda, lattice: &l, seqs: &seqs, window: 2.0 * w, transverse_cap: None }).unwrap();
        prop_assert!(small.is_symmetric());
        let inner: Vec<_> = big.points.iter().filter(|p| p.approx.abs() <= w).map(|p| (p.m, p.n)).collect();
        let direct: Vec<_> = small.points.iter().map(|p| (p.m, p.n)).collect();
        prop_assert_eq!(inner, direct);
    }
}
