//! Power-of-two FFT and a Bluestein chirp-z transform.
//!
//! The chirp-z transform evaluates `X_k = Σ_n x_n e^{j n (θ0 + k Δθ)}` for an
//! arbitrary uniform set of angles, which is what the range/velocity spectra
//! need: grid points rarely fall on DFT bins.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

/// In-place iterative radix-2 FFT. `inverse` selects the `+j` kernel and
/// applies the `1/N` scale. The length must be a power of two.
pub fn fft_in_place(data: &mut [Complex64], inverse: bool) {
    let n = data.len();
    if n <= 1 {
        return;
    }
    assert!(n.is_power_of_two(), "fft length {n} is not a power of two");

    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }

    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let half = len / 2;
        // twiddles computed directly per index to avoid drift from repeated products
        let twiddles: Vec<Complex64> = (0..half)
            .map(|k| Complex64::from_polar(1.0, ang * k as f64))
            .collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let a = data[start + k];
                let b = data[start + k + half] * twiddles[k];
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }

    if inverse {
        let scale = 1.0 / n as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Chirp-z transform: `out[k] = Σ_{n<N} x[n] · e^{j n (start + k·step)}` for
/// `k < len`.
pub fn chirp_z(x: &[Complex64], start: f64, step: f64, len: usize) -> Vec<Complex64> {
    let n = x.len();
    if n == 0 || len == 0 {
        return vec![Complex64::new(0.0, 0.0); len];
    }
    let size = (n + len - 1).next_power_of_two();

    // n·k = (n² + k² − (k−n)²)/2, so the sum becomes a convolution with a chirp.
    let chirp = |t: i64| -> Complex64 {
        let t2 = (t * t) as f64;
        Complex64::from_polar(1.0, 0.5 * step * t2)
    };

    let mut a = vec![Complex64::new(0.0, 0.0); size];
    for (i, &xi) in x.iter().enumerate() {
        a[i] = xi * Complex64::from_polar(1.0, start * i as f64) * chirp(i as i64);
    }

    let mut b = vec![Complex64::new(0.0, 0.0); size];
    for t in 0..len {
        b[t] = chirp(t as i64).conj();
    }
    for t in 1..n {
        b[size - t] = chirp(t as i64).conj();
    }

    fft_in_place(&mut a, false);
    fft_in_place(&mut b, false);
    for (ai, bi) in a.iter_mut().zip(b.iter()) {
        *ai *= *bi;
    }
    fft_in_place(&mut a, true);

    (0..len).map(|k| a[k] * chirp(k as i64)).collect()
}

/// Smallest `d` with `2^d ≥ n`.
pub(crate) fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}
