//! Shared FFT plans behind a read-mostly registry.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::sync::{Arc, Mutex, OnceLock};

static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    let mut planner = PLANNER
        .get_or_init(|| Mutex::new(FftPlanner::new()))
        .lock()
        .expect("fft planner poisoned");
    match direction {
        FftDirection::Forward => planner.plan_fft_forward(len),
        FftDirection::Inverse => planner.plan_fft_inverse(len),
    }
}

/// In-place complex FFT along every axis of a row-major `[m; dim]` array.
/// No normalisation is applied here; callers own the convention.
pub fn fft_nd(data: &mut [Complex64], m: usize, dim: usize, direction: FftDirection) {
    debug_assert_eq!(data.len(), m.pow(dim as u32));
    let fft = plan(m, direction);
    let mut line = vec![Complex64::default(); m];
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    for axis in 0..dim {
        let stride = m.pow((dim - 1 - axis) as u32);
        let block = stride * m;
        let outer = data.len() / block;
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * block + inner;
                for (t, v) in line.iter_mut().enumerate() {
                    *v = data[base + t * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (t, v) in line.iter().enumerate() {
                    data[base + t * stride] = *v;
                }
            }
        }
    }
}
