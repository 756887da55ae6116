//! Smooth partitions of unity in frequency.
//!
//! The dyadic family is built from a radial cutoff `ρ` with `ρ = 1` on
//! `|ξ| ≤ 1` and `ρ = 0` on `|ξ| ≥ 2^w`; setting `ψ(ξ) = ρ(|ξ|) - ρ(2|ξ|)`
//! makes `Σ_j ψ(2^{-j}ξ)` telescope to exactly one. The uniform family
//! normalizes a bump `σ ⊂ (-1, 1)` by the sum of its integer translates.

use alloc::format;

#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `C^∞` step: 0 for `u ≤ 0`, 1 for `u ≥ 1`, built from `e^{-1/t}`.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / u).exp();
    let b = (-1.0 / (1.0 - u)).exp();
    a / (a + b)
}

/// `(S, S', S'')` of [`smooth_step`].
pub fn smooth_step_derivatives(u: f64) -> (f64, f64, f64) {
    if u <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if u >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let v = 1.0 - u;
    let a = (-1.0 / u).exp();
    let b = (-1.0 / v).exp();
    let (da, dda) = if a == 0.0 {
        (0.0, 0.0)
    } else {
        (a / (u * u), a * (1.0 / u.powi(4) - 2.0 / u.powi(3)))
    };
    let (db, ddb) = if b == 0.0 {
        (0.0, 0.0)
    } else {
        (-b / (v * v), b * (1.0 / v.powi(4) - 2.0 / v.powi(3)))
    };
    let sum = a + b;
    let s = a / sum;
    let num = da * b - a * db;
    let ds = num / (sum * sum);
    let dds = (dda * b - a * ddb) / (sum * sum) - 2.0 * num * (da + db) / (sum * sum * sum);
    (s, ds, dds)
}

fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Common interface for checking a partition-of-unity identity.
pub trait PartitionOfUnity {
    /// `Σ` of all retained partition terms at `xi`.
    fn sum_of_terms(&self, xi: &[f64]) -> f64;

    /// Draws a point from the region where the identity must hold.
    fn sample_point(&self, rng: &mut ChaCha20Rng) -> [f64; 2];

    fn dim(&self) -> usize;
}

/// Largest `|Σ terms - 1|` over `sample_count` random points.
pub fn partition_defect<P: PartitionOfUnity + ?Sized>(
    partition: &P,
    sample_count: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let dim = partition.dim();
    (0..sample_count.max(1))
        .map(|_| {
            let x = partition.sample_point(&mut rng);
            (partition.sum_of_terms(&x[..dim]) - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// The radial Littlewood-Paley bump `ψ` and its dyadic dilates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicPartition {
    transition_window: f64,
    lower_bound: f64,
    j_min: i32,
    j_max: i32,
}

impl Default for DyadicPartition {
    fn default() -> Self {
        DyadicPartition::new(1.0).expect("default window is admissible")
    }
}

impl DyadicPartition {
    pub const DEFAULT_J_RANGE: (i32, i32) = (-20, 20);

    /// `transition_window = w ∈ (1/2, 1]`: `ρ` falls from 1 to 0 as `log₂|ξ|`
    /// goes from 0 to `w`. `w ≤ 1` keeps `supp ψ ⊂ {1/2 ≤ |ξ| ≤ 2}`; `w > 1/2`
    /// keeps `ψ > 0` on `{2^{-1/2} ≤ |ξ| ≤ 2^{1/2}}`.
    pub fn new(transition_window: f64) -> Result<Self> {
        if !(transition_window > 0.5 && transition_window <= 1.0) {
            return Err(Error::invalid(
                "transition_window",
                format!("{transition_window} is outside (0.5, 1]"),
            ));
        }
        let mut p = DyadicPartition {
            transition_window,
            lower_bound: 0.0,
            j_min: Self::DEFAULT_J_RANGE.0,
            j_max: Self::DEFAULT_J_RANGE.1,
        };
        // Dense sampling of the middle annulus.
        const SAMPLES: usize = 8192;
        let lo = -0.5_f64;
        let c = (0..=SAMPLES)
            .map(|i| {
                let t = lo + i as f64 / SAMPLES as f64;
                p.psi_radial(2.0_f64.powf(t))
            })
            .fold(f64::INFINITY, f64::min);
        if c <= 1e-6 {
            return Err(Error::DegeneratePartition { lower_bound: c });
        }
        p.lower_bound = c;
        Ok(p)
    }

    pub fn with_j_range(mut self, j_min: i32, j_max: i32) -> Result<Self> {
        if j_min > j_max {
            return Err(Error::invalid(
                "j_range",
                format!("[{j_min}, {j_max}] is empty"),
            ));
        }
        self.j_min = j_min;
        self.j_max = j_max;
        Ok(self)
    }

    pub fn transition_window(&self) -> f64 {
        self.transition_window
    }

    /// Stored `c` with `ψ ≥ c` on the middle annulus.
    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    pub fn j_range(&self) -> (i32, i32) {
        (self.j_min, self.j_max)
    }

    /// `ρ(r)`.
    pub fn cutoff(&self, r: f64) -> f64 {
        if r <= 1.0 {
            return 1.0;
        }
        let t = r.log2();
        let w = self.transition_window;
        if t >= w {
            return 0.0;
        }
        smooth_step((w - t) / w)
    }

    pub fn psi_radial(&self, r: f64) -> f64 {
        if r <= 0.5 || r >= 2.0 {
            return 0.0;
        }
        self.cutoff(r) - self.cutoff(2.0 * r)
    }

    /// `ψ(ξ)`.
    pub fn psi(&self, xi: &[f64]) -> f64 {
        self.psi_radial(norm(xi))
    }

    /// `ψ(2^{-j} ξ)` as a function of `|ξ|`, for any integer `j`.
    pub fn dilate_radial(&self, j: i32, r: f64) -> f64 {
        self.psi_radial(r * 2.0_f64.powi(-j))
    }

    /// Inhomogeneous family: `ψ_0 = ρ = 1 - Σ_{j≥1} ψ(2^{-j}·)`, `ψ_j = ψ(2^{-j}·)`.
    pub fn inhomogeneous_radial(&self, j: u32, r: f64) -> f64 {
        if j == 0 {
            self.cutoff(r)
        } else {
            self.dilate_radial(j as i32, r)
        }
    }

    /// Number of inhomogeneous pieces `ψ_0, …, ψ_{J-1}` whose sum is one on
    /// the ball of `radius`; later pieces vanish there.
    pub fn pieces_to_cover(&self, radius: f64) -> u32 {
        // ψ_j is supported in |ξ| ≥ 2^{j-1}.
        let mut j = 1u32;
        while 2.0_f64.powi(j as i32 - 1) < radius {
            j += 1;
        }
        j
    }
}

impl PartitionOfUnity for DyadicPartition {
    fn sum_of_terms(&self, xi: &[f64]) -> f64 {
        let r = norm(xi);
        (self.j_min..=self.j_max)
            .map(|j| self.dilate_radial(j, r))
            .sum()
    }

    /// Log-uniform radius in `[2^{j_min}, 2^{j_max}]`, uniform direction.
    fn sample_point(&self, rng: &mut ChaCha20Rng) -> [f64; 2] {
        let t: f64 = rng.random_range(self.j_min as f64..=self.j_max as f64);
        let angle: f64 = rng.random_range(0.0..core::f64::consts::TAU);
        let r = 2.0_f64.powf(t);
        [r * angle.cos(), r * angle.sin()]
    }

    fn dim(&self) -> usize {
        2
    }
}

/// The bump `φ` with `Σ_k φ(ξ - k) = 1`, `supp φ ⊂ [-1, 1]ⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformPartition {
    dim: usize,
    lattice_radius: i64,
}

impl UniformPartition {
    pub const DEFAULT_LATTICE_RADIUS: i64 = 16;

    pub fn new(dim: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::invalid(
                "dim",
                format!("dimension {dim} is not 1 or 2"),
            ));
        }
        Ok(UniformPartition {
            dim,
            lattice_radius: Self::DEFAULT_LATTICE_RADIUS,
        })
    }

    pub fn with_lattice_radius(mut self, radius: i64) -> Result<Self> {
        if radius < 3 {
            return Err(Error::invalid("lattice_radius", format!("{radius} < 3")));
        }
        self.lattice_radius = radius;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lattice_radius(&self) -> i64 {
        self.lattice_radius
    }

    /// `σ(t) = exp(-1/(1 - t²))` on `(-1, 1)`.
    fn bump(t: f64) -> f64 {
        if t.abs() >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - t * t)).exp()
        }
    }

    /// One-dimensional factor `θ(t) = σ(t) / Σ_k σ(t - k)`.
    pub fn theta(t: f64) -> f64 {
        let s = Self::bump(t);
        if s == 0.0 {
            return 0.0;
        }
        let base = t.floor();
        // σ(t - k) ≠ 0 only for k ∈ {⌊t⌋, ⌊t⌋ + 1}.
        let denom = Self::bump(t - base) + Self::bump(t - base - 1.0);
        s / denom
    }

    /// `φ(ξ) = Π θ(ξ_a)`.
    pub fn phi(&self, xi: &[f64]) -> f64 {
        xi.iter().map(|&t| Self::theta(t)).product()
    }
}

impl PartitionOfUnity for UniformPartition {
    fn sum_of_terms(&self, xi: &[f64]) -> f64 {
        let k_max = self.lattice_radius;
        let range = |t: f64| {
            let lo = (t.floor() as i64 - 1).max(-k_max);
            let hi = (t.floor() as i64 + 2).min(k_max);
            lo..=hi
        };
        match xi.len() {
            1 => range(xi[0]).map(|k| self.phi(&[xi[0] - k as f64])).sum(),
            _ => {
                let mut total = 0.0;
                for k0 in range(xi[0]) {
                    for k1 in range(xi[1]) {
                        total += self.phi(&[xi[0] - k0 as f64, xi[1] - k1 as f64]);
                    }
                }
                total
            }
        }
    }

    /// Uniform in the box `[-(K - 2), K - 2]ⁿ`.
    fn sample_point(&self, rng: &mut ChaCha20Rng) -> [f64; 2] {
        let half = (self.lattice_radius - 2) as f64;
        let mut out = [0.0; 2];
        for v in out.iter_mut().take(self.dim) {
            *v = rng.random_range(-half..=half);
        }
        out
    }

    fn dim(&self) -> usize {
        self.dim
    }
}

/// The pair of partitions every norm needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partitions {
    pub dyadic: DyadicPartition,
    pub uniform: UniformPartition,
}

impl Partitions {
    pub fn new(dim: usize) -> Result<Self> {
        Ok(Partitions {
            dyadic: DyadicPartition::default(),
            uniform: UniformPartition::new(dim)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_step_limits_and_symmetry() {
        assert_eq!(smooth_step(-1.0), 0.0);
        assert_eq!(smooth_step(2.0), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        for u in [0.1, 0.3, 0.77] {
            assert!((smooth_step(u) + smooth_step(1.0 - u) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn smooth_step_derivatives_match_differences() {
        for u in [0.05, 0.2, 0.5, 0.81, 0.97] {
            let (_, d1, d2) = smooth_step_derivatives(u);
            let h = 1e-5;
            let fd1 = (smooth_step(u + h) - smooth_step(u - h)) / (2.0 * h);
            let fd2 = (smooth_step(u + h) - 2.0 * smooth_step(u) + smooth_step(u - h)) / (h * h);
            assert!(
                (d1 - fd1).abs() < 1e-7 * (1.0 + d1.abs()),
                "u={u}: {d1} vs {fd1}"
            );
            assert!(
                (d2 - fd2).abs() < 1e-3 * (1.0 + d2.abs()),
                "u={u}: {d2} vs {fd2}"
            );
        }
        let (s, d1, d2) = smooth_step_derivatives(1e-300);
        assert!(s == 0.0 && d1 == 0.0 && d2 == 0.0);
    }

    #[test]
    fn default_dyadic_support_and_sum() {
        let p = DyadicPartition::default();
        assert_eq!(p.psi(&[0.49]), 0.0);
        assert_eq!(p.psi(&[2.01]), 0.0);
        assert_eq!(p.psi(&[0.0, -2.01]), 0.0);
        let total: f64 = (-30..=30).map(|j| p.psi(&[2.0_f64.powi(-j) * 1.3])).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(p.lower_bound() > 0.0);
        assert!(p.psi(&[1.0]) >= p.lower_bound());
    }

    #[test]
    fn dyadic_radial_symmetry() {
        let p = DyadicPartition::default();
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for _ in 0..200 {
            let r: f64 = rng.random_range(0.4..2.1);
            let a: f64 = rng.random_range(0.0..core::f64::consts::TAU);
            assert!((p.psi(&[r * a.cos(), r * a.sin()]) - p.psi(&[r])).abs() < 1e-14);
        }
    }

    #[test]
    fn dyadic_rejects_bad_windows() {
        assert!(matches!(
            DyadicPartition::new(1.2),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            DyadicPartition::new(0.5),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            DyadicPartition::new(0.52),
            Err(Error::DegeneratePartition { .. })
        ));
        let p = DyadicPartition::new(0.75).unwrap();
        assert!(p.lower_bound() > 1e-3);
    }

    #[test]
    fn dyadic_pieces_are_disjoint_two_apart() {
        let p = DyadicPartition::default();
        for i in 0..2000 {
            let r = 2.0_f64.powf(-8.0 + 16.0 * i as f64 / 2000.0);
            for j in -6..6 {
                assert_eq!(p.dilate_radial(j, r) * p.dilate_radial(j + 2, r), 0.0);
            }
        }
    }

    #[test]
    fn inhomogeneous_family_sums_to_one() {
        let p = DyadicPartition::default();
        for i in 0..500 {
            let r = 40.0 * i as f64 / 500.0;
            let total: f64 = (0..p.pieces_to_cover(40.0) + 1)
                .map(|j| p.inhomogeneous_radial(j, r))
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "r={r}");
        }
    }

    #[test]
    fn uniform_partition_identities() {
        let p = UniformPartition::new(1).unwrap();
        let total: f64 = (-5..=5).map(|k| p.phi(&[0.37 - k as f64])).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let p2 = UniformPartition::new(2).unwrap();
        assert_eq!(p2.phi(&[1.01, 0.0]), 0.0);
        assert!(p2.phi(&[0.2, -0.3]) > 0.0);
        for i in 0..400 {
            let t = -3.0 + 6.0 * i as f64 / 400.0;
            for k in -3..3 {
                let a = p.phi(&[t - k as f64]);
                let b = p.phi(&[t - (k + 2) as f64]);
                assert_eq!(a * b, 0.0);
                assert!(a >= 0.0);
            }
        }
    }

    struct Scaled(DyadicPartition, f64);

    impl PartitionOfUnity for Scaled {
        fn sum_of_terms(&self, xi: &[f64]) -> f64 {
            self.1 * self.0.sum_of_terms(xi)
        }
        fn sample_point(&self, rng: &mut ChaCha20Rng) -> [f64; 2] {
            self.0.sample_point(rng)
        }
        fn dim(&self) -> usize {
            2
        }
    }

    #[test]
    fn defects() {
        let d = DyadicPartition::default();
        assert!(partition_defect(&d, 10_000, 7) < 1e-10);
        let u = UniformPartition::new(2).unwrap();
        assert!(partition_defect(&u, 10_000, 7) < 1e-10);
        let broken = Scaled(d, 0.9);
        assert!((partition_defect(&broken, 1000, 7) - 0.1).abs() < 1e-10);
    }
}
