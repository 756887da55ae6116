use mulspace_core::partitions::{partition_defect, smooth_step, PartitionOfUnity};
use mulspace_core::{DyadicPartition, Grid, Side, UniformPartition};
use proptest::prelude::*;
use rand_chacha::ChaCha20Rng;

/// A dyadic family whose bump is scaled by 0.9, so the sum is 0.9 everywhere.
struct Scaled(DyadicPartition);

impl PartitionOfUnity for Scaled {
    fn sum_of_terms(&self, xi: &[f64]) -> f64 {
        0.9 * self.0.sum_of_terms(xi)
    }
    fn sample_point(&self, rng: &mut ChaCha20Rng) -> [f64; 2] {
        self.0.sample_point(rng)
    }
    fn dim(&self) -> usize {
        self.0.dim()
    }
}

#[test]
fn default_defects_are_below_tolerance() {
    let dyadic = DyadicPartition::default();
    assert!(partition_defect(&dyadic, 10_000, 7) < 1e-10);
    for dim in [1, 2] {
        let uniform = UniformPartition::new(dim).unwrap();
        assert!(partition_defect(&uniform, 10_000, 7) < 1e-10);
    }
}

#[test]
fn broken_bump_is_detected() {
    let d = partition_defect(&Scaled(DyadicPartition::default()), 10_000, 7);
    assert!((d - 0.1).abs() < 1e-10, "defect {d}");
}

#[test]
fn dyadic_support_and_lower_bound() {
    let p = DyadicPartition::default();
    assert_eq!(p.psi(&[0.49]), 0.0);
    assert_eq!(p.psi(&[2.01]), 0.0);
    assert_eq!(p.psi(&[0.5]), 0.0);
    assert_eq!(p.psi(&[2.0]), 0.0);
    assert!(p.lower_bound() > 0.0);
    assert!(p.psi(&[1.0]) >= p.lower_bound());
    let sum: f64 = (-20..=20).map(|j| p.dilate_radial(j, 1.3)).sum();
    assert!((sum - 1.0).abs() < 1e-12);
}

#[test]
fn window_range_is_enforced() {
    assert!(DyadicPartition::new(0.5).is_err());
    assert!(DyadicPartition::new(1.01).is_err());
    assert!(DyadicPartition::new(0.6).is_ok());
    assert!(DyadicPartition::default().with_j_range(3, 2).is_err());
    assert!(UniformPartition::new(3).is_err());
    assert!(UniformPartition::new(1)
        .unwrap()
        .with_lattice_radius(2)
        .is_err());
}

#[test]
fn uniform_examples() {
    let p1 = UniformPartition::new(1).unwrap();
    let sum: f64 = (-3..=3).map(|k| p1.phi(&[0.37 - k as f64])).sum();
    assert!((sum - 1.0).abs() < 1e-12);
    let p2 = UniformPartition::new(2).unwrap();
    assert_eq!(p2.phi(&[1.01, 0.0]), 0.0);
}

#[test]
fn inhomogeneous_family_sums_to_one_on_grid() {
    let p = DyadicPartition::default();
    let grid = Grid::new(1, 1024, 8.0).unwrap();
    let radius = grid.freq_half_width();
    let pieces = p.pieces_to_cover(radius);
    for r in grid.radii(Side::Frequency) {
        let total: f64 = (0..pieces).map(|j| p.inhomogeneous_radial(j, r)).sum();
        assert!((total - 1.0).abs() < 1e-10, "r = {r}: {total}");
    }
}

fn windows() -> impl Strategy<Value = f64> {
    0.55..=1.0_f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn smooth_step_is_monotone(a in -0.5..1.5_f64, b in -0.5..1.5_f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(smooth_step(lo) <= smooth_step(hi));
    }

    #[test]
    fn psi_is_radial(r in 0.3..2.5_f64, angle in 0.0..std::f64::consts::TAU, w in windows()) {
        let p = DyadicPartition::new(w).unwrap();
        let a = p.psi(&[r * angle.cos(), r * angle.sin()]);
        let b = p.psi(&[r]);
        prop_assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn dyadic_sum_is_one_inside_validity_region(t in -19.0..19.0_f64, w in windows()) {
        let p = DyadicPartition::new(w).unwrap();
        let r = 2.0_f64.powf(t);
        let sum: f64 = (-20..=20).map(|j| p.dilate_radial(j, r)).sum();
        prop_assert!((sum - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dyadic_pieces_two_apart_are_disjoint(t in -10.0..10.0_f64, j in -8i32..8, gap in 2i32..5) {
        let p = DyadicPartition::default();
        let r = 2.0_f64.powf(t);
        prop_assert_eq!(p.dilate_radial(j, r) * p.dilate_radial(j + gap, r), 0.0);
    }

    #[test]
    fn psi_is_a_bump(r in 0.0..4.0_f64, w in windows()) {
        let p = DyadicPartition::new(w).unwrap();
        let v = p.psi(&[r]);
        prop_assert!((0.0..=1.0).contains(&v));
        if !(0.5..=2.0).contains(&r) {
            prop_assert_eq!(v, 0.0);
        }
        if (0.5_f64.sqrt()..=2.0_f64.sqrt()).contains(&r) {
            prop_assert!(v >= p.lower_bound());
        }
    }

    #[test]
    fn uniform_translates_sum_to_one(x in -13.0..13.0_f64, y in -13.0..13.0_f64) {
        let p = UniformPartition::new(2).unwrap();
        prop_assert!((p.sum_of_terms(&[x, y]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_translates_two_apart_are_disjoint(x in -5.0..5.0_f64, k in -4i64..4, gap in 2i64..4) {
        let p = UniformPartition::new(1).unwrap();
        let a = p.phi(&[x - k as f64]);
        let b = p.phi(&[x - (k + gap) as f64]);
        prop_assert_eq!(a * b, 0.0);
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn defect_is_deterministic(seed in 0u64..1000) {
        let p = UniformPartition::new(1).unwrap();
        prop_assert_eq!(partition_defect(&p, 100, seed), partition_defect(&p, 100, seed));
    }
}
