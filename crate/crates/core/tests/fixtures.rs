use mulspace_core::fixtures::{
    ensemble_member, make_ensemble, parse_symbol, symbol_catalog, Band, EnsembleKind, EnsembleSpec,
    CATALOG,
};
use mulspace_core::{Complex64, Grid, Side, Symbol};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn catalog_labels() -> Vec<&'static str> {
    vec![
        "one",
        "riesz:1",
        "sign",
        "oscillatory:0",
        "oscillatory:1.5",
        "mihlin_poly:1",
        "mihlin_poly:2.5",
        "imaginary_power:1",
    ]
}

fn eval_at(m: &dyn Symbol, xi: &[f64], axis: usize, shift: f64) -> Complex64 {
    let mut at = xi.to_vec();
    at[axis] += shift;
    m.eval(&at)
}

/// Richardson-extrapolated central differences of order one and two along one axis.
fn fd_along(m: &dyn Symbol, xi: &[f64], axis: usize, order: u8) -> Complex64 {
    let d = |h: f64| match order {
        1 => (eval_at(m, xi, axis, h) - eval_at(m, xi, axis, -h)) / (2.0 * h),
        _ => (eval_at(m, xi, axis, h) - 2.0 * m.eval(xi) + eval_at(m, xi, axis, -h)) / (h * h),
    };
    let h = 1e-3;
    (d(h / 2.0) * 4.0 - d(h)) / 3.0
}

/// `∂₁∂₂ m` by the four-point stencil, Richardson-extrapolated.
fn fd_mixed(m: &dyn Symbol, xi: &[f64]) -> Complex64 {
    let d = |h: f64| {
        let at = |a: f64, b: f64| m.eval(&[xi[0] + a, xi[1] + b]);
        (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h)
    };
    (d(2.5e-4) * 4.0 - d(5e-4)) / 3.0
}

fn random_point(rng: &mut ChaCha20Rng, dim: usize) -> Vec<f64> {
    let r: f64 = rng.random_range(0.2..6.0);
    if dim == 1 {
        vec![if rng.random::<bool>() { r } else { -r }]
    } else {
        let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        vec![r * a.cos(), r * a.sin()]
    }
}

#[test]
fn closed_form_partials_match_finite_differences() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for dim in [1, 2] {
        for label in catalog_labels() {
            let m = parse_symbol(label, dim).unwrap();
            for _ in 0..100 {
                let xi = random_point(&mut rng, dim);
                let mut cases: Vec<(Vec<u8>, Complex64)> = Vec::new();
                for axis in 0..dim {
                    for order in [1u8, 2] {
                        let mut alpha = vec![0u8; dim];
                        alpha[axis] = order;
                        cases.push((alpha, fd_along(&m, &xi, axis, order)));
                    }
                }
                if dim == 2 {
                    cases.push((vec![1, 1], fd_mixed(&m, &xi)));
                }
                for (alpha, approx) in cases {
                    let exact = m.partial(&xi, &alpha).expect("closed form");
                    let err = (exact - approx).norm() / exact.norm().max(1.0);
                    assert!(
                        err < 1e-6,
                        "{label} dim {dim} at {xi:?} alpha {alpha:?}: {exact} vs {approx}"
                    );
                }
            }
        }
    }
}

#[test]
fn catalog_values() {
    assert_eq!(
        parse_symbol("one", 1).unwrap().eval(&[7.3]),
        Complex64::new(1.0, 0.0)
    );
    let r = parse_symbol("riesz:1", 1).unwrap();
    assert_eq!(r.eval(&[2.0]), Complex64::new(0.0, -1.0));
    assert_eq!(r.eval(&[-2.0]), Complex64::new(0.0, 1.0));
    assert_eq!(
        parse_symbol("riesz:0", 1).unwrap().eval(&[2.0]),
        r.eval(&[2.0])
    );
    let o = parse_symbol("oscillatory:0", 2).unwrap();
    for xi in [[1.0, 0.0], [3.0, 4.0], [-10.0, 0.5]] {
        assert!((o.eval(&xi).norm() - 1.0).abs() < 1e-15);
    }
    let r2 = parse_symbol("riesz:2", 2).unwrap();
    assert!((r2.eval(&[3.0, 4.0]) - Complex64::new(0.0, -0.8)).norm() < 1e-15);
    assert_eq!(
        parse_symbol("sign", 1).unwrap().eval(&[0.0]),
        Complex64::new(0.0, 0.0)
    );
}

#[test]
fn catalog_rejects_bad_names_and_params() {
    assert!(parse_symbol("nope", 1).is_err());
    assert!(parse_symbol("riesz", 1).is_err());
    assert!(parse_symbol("riesz:2", 1).is_err());
    assert!(parse_symbol("riesz:1.5", 2).is_err());
    assert!(parse_symbol("mihlin_poly:x", 1).is_err());
    assert!(symbol_catalog("one", &[], 3).is_err());
    assert_eq!(CATALOG.len(), 6);
    for (name, arity) in CATALOG {
        let params = vec![1.0; *arity];
        assert!(symbol_catalog(name, &params, 2).is_ok(), "{name}");
    }
}

#[test]
fn atoms_satisfy_their_constraints() {
    for (dim, grid) in [
        (1, Grid::default_1d()),
        (2, Grid::new(2, 128, 8.0 * std::f64::consts::PI).unwrap()),
    ] {
        let h = grid.spacing();
        for scale in [4.0 * h, 1.0, 16.0 * h] {
            let spec = EnsembleSpec::new(EnsembleKind::H1Atom, 10, 3).with_atom_scale(scale);
            for f in make_ensemble(&spec, &grid).unwrap() {
                let mean: Complex64 = f.samples().iter().sum::<Complex64>() * h.powi(dim);
                assert!(mean.norm() < 1e-12, "mean {mean}");
                let support = f.samples().iter().filter(|v| v.norm() > 0.0).count();
                // Support lies in a cube of side `s` nodes; |Q| = (s h)^n ≥ support·hⁿ.
                let side = (support as f64).powf(1.0 / dim as f64).ceil();
                let volume = (side * h).powi(dim);
                assert!(f.max_modulus() * volume <= 1.0 + 1e-12);
            }
        }
    }
}

#[test]
fn band_limited_members_vanish_outside_the_band() {
    let grid = Grid::default_1d();
    let band = Band::Ball { radius: 4.0 };
    let spec = EnsembleSpec::new(EnsembleKind::BandLimited, 5, 1).with_band(band);
    for f in make_ensemble(&spec, &grid).unwrap() {
        let spectrum = f.fourier();
        let max = spectrum.max_modulus();
        for (i, v) in spectrum.samples().iter().enumerate() {
            if !band.contains(&[grid.node(Side::Frequency, i)]) {
                assert!(v.norm() <= 1e-13 * max);
            }
        }
    }
}

#[test]
fn bands_beyond_nyquist_are_rejected() {
    let grid = Grid::new(1, 64, 8.0).unwrap();
    let spec =
        EnsembleSpec::new(EnsembleKind::BandLimited, 1, 1).with_band(Band::Ball { radius: 20.0 });
    let err = make_ensemble(&spec, &grid).unwrap_err();
    assert_eq!(err.field(), "band");
}

#[test]
fn member_ids_are_stable() {
    let spec = EnsembleSpec::new(EnsembleKind::GaussianMix, 3, 9);
    assert_eq!(spec.member_id(2), "gaussian_mix-s9-2");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ensembles_are_deterministic(seed in 0u64..10_000, kind in 0usize..3) {
        let grid = Grid::new(1, 512, 16.0 * std::f64::consts::PI).unwrap();
        let kind = [EnsembleKind::BandLimited, EnsembleKind::H1Atom, EnsembleKind::GaussianMix][kind];
        let spec = EnsembleSpec::new(kind, 4, seed);
        let a = make_ensemble(&spec, &grid).unwrap();
        let b = make_ensemble(&spec, &grid).unwrap();
        prop_assert_eq!(&a, &b);
        // Member i does not depend on how many members were requested.
        let single = ensemble_member(&spec, &grid, 3).unwrap();
        prop_assert_eq!(&single, &a[3]);
        let bigger = make_ensemble(&EnsembleSpec::new(kind, 6, seed), &grid).unwrap();
        prop_assert_eq!(&bigger[..4], &a[..]);
    }
}
