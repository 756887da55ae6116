//! Iterative radix-2 FFT for power-of-two lengths.
//!
//! Twiddles are evaluated directly from `2πk/N` rather than by recurrence, so
//! the transform error stays at `O(ε log N)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `X_k = Σ x_i e^{-2πi ki/N}`
    Forward,
    /// `x_i = Σ X_k e^{+2πi ki/N}` (unnormalized)
    Inverse,
}

#[derive(Debug, Clone)]
pub struct FftPlan {
    len: usize,
    twiddles: Vec<Complex64>,
    bit_reverse: Vec<usize>,
}

impl FftPlan {
    /// Panics unless `len` is a power of two.
    pub fn new(len: usize) -> Self {
        assert!(
            len.is_power_of_two(),
            "FFT length {len} is not a power of two"
        );
        let twiddles = (0..len / 2)
            .map(|k| {
                let angle = -2.0 * PI * k as f64 / len as f64;
                Complex64::new(angle.cos(), angle.sin())
            })
            .collect();
        let bits = len.trailing_zeros();
        let bit_reverse = (0..len)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (usize::BITS - bits)
                }
            })
            .collect();
        FftPlan {
            len,
            twiddles,
            bit_reverse,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn process(&self, buf: &mut [Complex64], direction: Direction) {
        let n = self.len;
        assert_eq!(buf.len(), n);
        for i in 0..n {
            let r = self.bit_reverse[i];
            if i < r {
                buf.swap(i, r);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let stride = n / size;
            for start in (0..n).step_by(size) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if direction == Direction::Inverse {
                        w = w.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            size *= 2;
        }
    }

    /// Transforms every axis of a row-major `len^dim` array.
    pub fn process_nd(&self, data: &mut [Complex64], dim: usize, direction: Direction) {
        let n = self.len;
        match dim {
            1 => self.process(data, direction),
            2 => {
                for row in data.chunks_exact_mut(n) {
                    self.process(row, direction);
                }
                let mut column = alloc::vec![Complex64::new(0.0, 0.0); n];
                for c in 0..n {
                    for r in 0..n {
                        column[r] = data[r * n + c];
                    }
                    self.process(&mut column, direction);
                    for r in 0..n {
                        data[r * n + c] = column[r];
                    }
                }
            }
            _ => panic!("unsupported dimension {dim}"),
        }
    }
}
