use std::f64::consts::PI;

use mulspace_core::fixtures::{make_ensemble, parse_symbol, EnsembleKind, EnsembleSpec};
use mulspace_core::multiplier::{
    apply_multiplier, assemble_kernel, condition_report, extract_piece, hormander_integral,
    kernel_diagnostics, local_kernel_mass, mihlin_sup, tail_slope, top_resolved_scale, Column,
};
use mulspace_core::symbol::FnSymbol;
use mulspace_core::{Complex64, DyadicPartition, Exponent, Grid, Partitions, Side};
use proptest::prelude::*;

fn grid_1d() -> Grid {
    Grid::new(1, 1024, 16.0 * PI).unwrap()
}

#[test]
fn one_gives_psi_in_two_dimensions() {
    let g = Grid::new(2, 64, 8.0 * PI).unwrap();
    let p = DyadicPartition::default();
    let one = parse_symbol("one", 2).unwrap();
    for j in [-3, 0, 4] {
        let piece = extract_piece(&one, j, &p, &g).unwrap();
        for (i, v) in piece.values.samples().iter().enumerate() {
            let c = g.coords(Side::Frequency, i);
            assert_eq!(*v, Complex64::new(p.psi(&c), 0.0));
        }
    }
}

#[test]
fn homogeneous_symbols_have_j_independent_columns() {
    let g = Grid::new(1, 512, 16.0 * PI).unwrap();
    let parts = Partitions::new(1).unwrap();
    for label in ["one", "riesz:1", "sign", "imaginary_power:2"] {
        let m = parse_symbol(label, 1).unwrap();
        let report = condition_report(&m, 0.5, Exponent::INFINITY, (-6, 6), &parts, &g).unwrap();
        for column in Column::ALL {
            let first = report.per_j[0].get(column);
            for row in &report.per_j {
                let v = row.get(column);
                assert!(
                    (v - first).abs() <= 1e-10 * first,
                    "{label} {} j={}: {v} vs {first}",
                    column.name(),
                    row.j
                );
            }
        }
    }
}

#[test]
fn condition_report_is_sorted_with_sups() {
    let g = Grid::new(1, 512, 16.0 * PI).unwrap();
    let parts = Partitions::new(1).unwrap();
    let m = parse_symbol("oscillatory:0", 1).unwrap();
    let report = condition_report(&m, 0.5, Exponent::TWO, (-2, 3), &parts, &g).unwrap();
    let js: Vec<i32> = report.per_j.iter().map(|r| r.j).collect();
    assert_eq!(js, vec![-2, -1, 0, 1, 2, 3]);
    for column in Column::ALL {
        let sup = report.sup(column);
        let max = report
            .per_j
            .iter()
            .map(|r| r.get(column))
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(sup.value, max);
        assert_eq!(
            report
                .per_j
                .iter()
                .find(|r| r.j == sup.argmax_j)
                .unwrap()
                .get(column),
            max
        );
    }
    assert!(condition_report(&m, 0.5, Exponent::TWO, (3, 2), &parts, &g).is_err());
}

#[test]
fn mihlin_of_riesz_is_one_and_poly_is_finite() {
    let g = grid_1d();
    let r = mihlin_sup(&parse_symbol("riesz:1", 1).unwrap(), &g, None).unwrap();
    // ξ/|ξ| is locally constant away from 0.
    assert!((r.value - 1.0).abs() < 1e-12, "{r:?}");
    let p = mihlin_sup(&parse_symbol("mihlin_poly:1", 1).unwrap(), &g, None).unwrap();
    assert!(
        p.value.is_finite() && p.value > 0.99 && p.value <= 1.0,
        "{p:?}"
    );
}

#[test]
fn identity_multiplier_is_identity() {
    let g = grid_1d();
    let spec = EnsembleSpec::new(EnsembleKind::GaussianMix, 3, 5);
    let one = parse_symbol("one", 1).unwrap();
    for f in make_ensemble(&spec, &g).unwrap() {
        let out = apply_multiplier(&one, &f).unwrap();
        for (a, b) in out.samples().iter().zip(f.samples()) {
            assert!((a - b).norm() <= 1e-12 * f.max_modulus());
        }
    }
}

#[test]
fn hilbert_transform_of_a_cosine_packet_is_a_sine_packet() {
    let g = grid_1d();
    let f = mulspace_core::GridFunction::from_real_fn(&g, Side::Space, |x| {
        (-x[0] * x[0] / 50.0).exp() * (5.0 * x[0]).cos()
    });
    let h = apply_multiplier(&parse_symbol("riesz:1", 1).unwrap(), &f).unwrap();
    // -i sgn(ξ) maps cos to sin when the envelope is narrow in frequency.
    for (i, v) in h.samples().iter().enumerate() {
        let x = g.node(Side::Space, i);
        let expected = (-x * x / 50.0).exp() * (5.0 * x).sin();
        assert!((v - Complex64::new(expected, 0.0)).norm() < 1e-10);
    }
}

#[test]
fn kernel_of_one_has_identical_rows() {
    let g = grid_1d();
    let one = parse_symbol("one", 1).unwrap();
    let d = kernel_diagnostics(
        &one,
        (-3, 3),
        &DyadicPartition::default(),
        &g,
        &[4.0, 8.0, 16.0],
    )
    .unwrap();
    let first = &d.per_j[0];
    for row in &d.per_j {
        assert_eq!(row.k_l1, first.k_l1);
        assert_eq!(row.bernstein_ratio, first.bernstein_ratio);
        assert_eq!(row.tails, first.tails);
    }
    assert_eq!(d.hormander_sup, first.k_l1);
    assert!(kernel_diagnostics(&one, (0, 0), &DyadicPartition::default(), &g, &[]).is_err());
    assert!(kernel_diagnostics(
        &one,
        (0, 0),
        &DyadicPartition::default(),
        &g,
        &[g.half_width()]
    )
    .is_err());
}

#[test]
fn tail_slope_ignores_noise() {
    let radii = [1.0, 2.0, 4.0, 8.0];
    let tails = [1.0, 0.25, 1e-20, 1e-21];
    assert!((tail_slope(&radii, &tails, 1.0).unwrap() + 2.0).abs() < 1e-12);
    assert_eq!(tail_slope(&radii, &[1.0, 0.0, 0.0, 0.0], 1.0), None);
}

#[test]
fn hormander_direct_stays_below_proof_bound() {
    let g = grid_1d();
    let p = DyadicPartition::default();
    let offsets: Vec<Vec<i64>> = (0..6)
        .flat_map(|l| [vec![1i64 << l], vec![-(1i64 << l)]])
        .collect();
    for label in ["sign", "one", "mihlin_poly:1", "oscillatory:1"] {
        let m = parse_symbol(label, 1).unwrap();
        let r = hormander_integral(&m, (-20, 20), &p, &g, &offsets).unwrap();
        assert!(r.j_used.unwrap().1 <= top_resolved_scale(&g));
        for row in &r.per_y {
            assert!(
                row.direct <= row.proof_bound,
                "{label} y {:?}: {} > {}",
                row.y,
                row.direct,
                row.proof_bound
            );
        }
    }
}

#[test]
fn hormander_validates_offsets() {
    let g = grid_1d();
    let p = DyadicPartition::default();
    let m = parse_symbol("sign", 1).unwrap();
    for bad in [vec![vec![0]], vec![vec![200]], vec![vec![1, 1]], vec![]] {
        let err = hormander_integral(&m, (-4, 4), &p, &g, &bad).unwrap_err();
        assert_eq!(err.field(), "y");
    }
}

#[test]
fn clipped_octaves_are_counted_as_excluded() {
    let g = grid_1d();
    let p = DyadicPartition::default();
    let one = parse_symbol("one", 1).unwrap();
    let top = top_resolved_scale(&g);
    let a = assemble_kernel(&one, (0, top), &p, &g).unwrap();
    let b = assemble_kernel(&one, (0, top + 3), &p, &g).unwrap();
    assert_eq!(a.pieces.len(), b.pieces.len());
    assert_eq!(a.excluded_l1, b.excluded_l1);
    assert!(a.excluded_l1 > 0.0);
}

#[test]
fn local_mass_is_monotone_in_the_annulus() {
    let g = grid_1d();
    let p = DyadicPartition::default();
    let m = parse_symbol("mihlin_poly:1", 1).unwrap();
    let inner = local_kernel_mass(&m, (-8, 4), &p, &g, 1.0, 2.0).unwrap();
    let outer = local_kernel_mass(&m, (-8, 4), &p, &g, 1.0, 4.0).unwrap();
    assert!(inner > 0.0 && outer >= inner);
    assert!(local_kernel_mass(&m, (-8, 4), &p, &g, 2.0, 1.0).is_err());
}

#[test]
fn closure_and_catalog_symbols_agree() {
    let g = Grid::new(1, 256, 8.0 * PI).unwrap();
    let parts = Partitions::new(1).unwrap();
    let closed = parse_symbol("mihlin_poly:2", 1).unwrap();
    let plain = FnSymbol::new("poly", |x: &[f64]| {
        Complex64::new(1.0 / (1.0 + x[0] * x[0]), 0.0)
    });
    let a = condition_report(&closed, 0.5, Exponent::ONE, (-2, 2), &parts, &g).unwrap();
    let b = condition_report(&plain, 0.5, Exponent::ONE, (-2, 2), &parts, &g).unwrap();
    for (x, y) in a.per_j.iter().zip(&b.per_j) {
        for column in Column::ALL {
            assert!((x.get(column) - y.get(column)).abs() <= 1e-12 * x.get(column));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pieces_vanish_off_the_annulus(j in -6i32..6, b in 0.0..3.0_f64) {
        let g = Grid::new(1, 256, 8.0 * PI).unwrap();
        let p = DyadicPartition::default();
        let m = parse_symbol(&format!("mihlin_poly:{b}"), 1).unwrap();
        let piece = extract_piece(&m, j, &p, &g).unwrap();
        for (i, v) in piece.values.samples().iter().enumerate() {
            let r = g.node(Side::Frequency, i).abs();
            if !(0.5..=2.0).contains(&r) {
                prop_assert_eq!(*v, Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn multiplier_application_is_linear_in_the_symbol(c in -3.0..3.0_f64) {
        let g = Grid::new(1, 256, 8.0 * PI).unwrap();
        let f = make_ensemble(&EnsembleSpec::new(EnsembleKind::GaussianMix, 1, 1), &g).unwrap().remove(0);
        let base = parse_symbol("riesz:1", 1).unwrap();
        let scaled = FnSymbol::new("scaled", move |x: &[f64]| {
            if x[0] == 0.0 { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, -c * x[0].signum()) }
        });
        let a = apply_multiplier(&base, &f).unwrap();
        let b = apply_multiplier(&scaled, &f).unwrap();
        for (x, y) in a.samples().iter().zip(b.samples()) {
            prop_assert!((x * c - y).norm() <= 1e-12 * (1.0 + y.norm()));
        }
    }
}
