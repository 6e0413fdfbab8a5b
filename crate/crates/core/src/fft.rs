//! Discrete Fourier transform, radix-2 for power-of-two lengths.
//!
//! Forward transform `X[k] = sum_n x[n] * exp(-2*pi*i*k*n/N)`, no
//! normalization.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// In-place iterative radix-2 Cooley-Tukey FFT.
///
/// `re` and `im` hold the real and imaginary parts; their common length
/// must be a power of two.
pub fn fft_in_place<S: Scalar>(re: &mut [S], im: &mut [S]) -> Result<()> {
    let n = re.len();
    if im.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "re has {} samples, im has {}",
            n,
            im.len()
        )));
    }
    if !n.is_power_of_two() || n < 2 {
        return Err(Error::InvalidArgument(format!("FFT length {n} is not a power of two")));
    }

    // bit-reversal permutation
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            re.swap(i, j);
            im.swap(i, j);
        }
    }

    let tau = S::from_f64(-2.0 * std::f64::consts::PI);
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let step = tau / S::from_usize(len);
        for start in (0..n).step_by(len) {
            for j in 0..half {
                let angle = step * S::from_usize(j);
                let (wr, wi) = (angle.cos(), angle.sin());
                let (a, b) = (start + j, start + j + half);
                let tr = wr * re[b] - wi * im[b];
                let ti = wr * im[b] + wi * re[b];
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
            }
        }
        len *= 2;
    }
    Ok(())
}

/// Full DFT of a real series; returns `(re, im)` spectra.
pub fn real_dft<S: Scalar>(series: &[S]) -> Result<(Vec<S>, Vec<S>)> {
    let mut re = series.to_vec();
    let mut im = vec![S::zero(); series.len()];
    fft_in_place(&mut re, &mut im)?;
    Ok((re, im))
}

/// One DFT bin of a real series, evaluated directly in O(N).
///
/// Used for the non-power-of-two path, where only a handful of bins are
/// needed.
pub fn dft_bin<S: Scalar>(series: &[S], k: usize) -> (S, S) {
    let n = series.len();
    let step = S::from_f64(-2.0 * std::f64::consts::PI) * S::from_usize(k) / S::from_usize(n);
    let mut re = S::zero();
    let mut im = S::zero();
    for (idx, &x) in series.iter().enumerate() {
        let angle = step * S::from_usize(idx);
        re += x * angle.cos();
        im += x * angle.sin();
    }
    (re, im)
}
