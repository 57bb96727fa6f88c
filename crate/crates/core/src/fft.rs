//! Thin cached wrapper around `rustfft`.
//!
//! One planner per thread; it caches plans, so Monte Carlo workers can call
//! these helpers in tight loops without re-planning.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

/// Unnormalized forward DFT in place: `X[k] = sum_n x[n] e^{-j2πkn/L}`.
pub fn forward(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    plan(buf.len(), FftDirection::Forward).process(buf);
}

/// Unnormalized inverse DFT in place: `x[n] = sum_k X[k] e^{+j2πkn/L}`.
pub fn inverse(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    plan(buf.len(), FftDirection::Inverse).process(buf);
}

/// Inverse DFT scaled by `1/L`, the exact inverse of [`forward`].
pub fn inverse_normalized(buf: &mut [Complex64]) {
    inverse(buf);
    let scale = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let orig: Vec<Complex64> = (0..12)
            .map(|i| Complex64::new(i as f64, (i * i) as f64 * 0.1))
            .collect();
        let mut buf = orig.clone();
        forward(&mut buf);
        inverse_normalized(&mut buf);
        for (a, b) in orig.iter().zip(&buf) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
