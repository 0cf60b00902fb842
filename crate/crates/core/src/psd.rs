//! Averaged-periodogram (Welch) power spectral density.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::sigmodel::SignalFrame;
use crate::{Error, Result};

/// Density floor used when a bin carries exactly zero power.
pub const DENSITY_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PsdBin {
    pub freq_hz: f64,
    /// One-sided density, V²/Hz.
    pub density: f64,
}

impl PsdBin {
    pub fn db(&self) -> f64 {
        10.0 * libm::log10(self.density.max(DENSITY_FLOOR))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    pub bins: Vec<PsdBin>,
    pub resolution_hz: f64,
    pub segments: usize,
}

impl Psd {
    pub fn integrated_power(&self) -> f64 {
        self.bins.iter().map(|b| b.density).sum::<f64>() * self.resolution_hz
    }

    pub fn peak(&self) -> Option<&PsdBin> {
        self.bins
            .iter()
            .max_by(|a, b| a.density.total_cmp(&b.density))
    }

    /// Bin nearest to `freq_hz`.
    pub fn bin_at(&self, freq_hz: f64) -> &PsdBin {
        let k = libm::round(freq_hz / self.resolution_hz) as usize;
        &self.bins[k.min(self.bins.len() - 1)]
    }
}

pub fn periodogram(frame: &SignalFrame, segment_len: usize) -> Result<Psd> {
    welch(frame.samples(), frame.grid().rate(), segment_len)
}

/// Hann window (periodic), 50 % overlap, one-sided density scaling so that
/// the integrated density equals the mean-square of the input.
pub fn welch(x: &[f64], rate: f64, segment_len: usize) -> Result<Psd> {
    let err = |reason| Error::InvalidSegment {
        segment_len,
        len: x.len(),
        reason,
    };
    if segment_len < 2 || !segment_len.is_power_of_two() {
        return Err(err("must be a power of two >= 2"));
    }
    if segment_len > x.len() {
        return Err(err("longer than the signal"));
    }

    let window: Vec<f64> = (0..segment_len)
        .map(|n| 0.5 - 0.5 * libm::cos(TAU * n as f64 / segment_len as f64))
        .collect();
    let window_power: f64 = window.iter().map(|w| w * w).sum();

    let hop = segment_len / 2;
    let half = segment_len / 2;
    let mut acc = alloc::vec![0.0; half + 1];
    let mut buf = alloc::vec![Complex64::new(0.0, 0.0); segment_len];
    let mut segments = 0;
    let mut start = 0;
    while start + segment_len <= x.len() {
        for (b, (s, w)) in buf.iter_mut().zip(x[start..].iter().zip(&window)) {
            *b = Complex64::new(s * w, 0.0);
        }
        fft_in_place(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += hop;
    }

    let scale = 1.0 / (rate * window_power * segments as f64);
    let resolution_hz = rate / segment_len as f64;
    let bins = acc
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let one_sided = if k == 0 || k == half { 1.0 } else { 2.0 };
            PsdBin {
                freq_hz: k as f64 * resolution_hz,
                density: p * scale * one_sided,
            }
        })
        .collect();
    Ok(Psd {
        bins,
        resolution_hz,
        segments,
    })
}

/// Iterative radix-2 decimation-in-time FFT; `buf.len()` must be a power of two.
fn fft_in_place(buf: &mut [Complex64]) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    let bits = n.trailing_zeros();
    if bits == 0 {
        return;
    }
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let ang = -2.0 * PI / len as f64;
        let step = Complex64::new(libm::cos(ang), libm::sin(ang));
        for chunk in buf.chunks_mut(len) {
            let mut w = Complex64::new(1.0, 0.0);
            let (lo, hi) = chunk.split_at_mut(len / 2);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let t = *b * w;
                *b = *a - t;
                *a += t;
                w *= step;
            }
        }
        len <<= 1;
    }
}
