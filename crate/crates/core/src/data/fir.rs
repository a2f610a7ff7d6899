//! Windowed-sinc FIR band-pass design and zero-phase decimation.

use alloc::vec;
use alloc::vec::Vec;

use super::{DataError, TrialSet};
use crate::math;
use crate::simd;

/// Linear-phase FIR band-pass filter.
#[derive(Clone, Debug, PartialEq)]
pub struct FirFilter {
    /// Odd-length, symmetric taps.
    pub coefficients: Vec<f64>,
    /// Nominal passband in Hz.
    pub passband_hz: (f64, f64),
    /// Sampling rate the filter was designed for.
    pub design_rate_hz: u32,
}

impl FirFilter {
    /// Single-tap all-pass (identity) filter.
    pub fn identity(rate_hz: u32) -> Self {
        Self {
            coefficients: vec![1.0],
            passband_hz: (0.0, rate_hz as f64 / 2.0),
            design_rate_hz: rate_hz,
        }
    }

    /// Filter group delay in samples: (taps − 1)/2.
    pub fn group_delay(&self) -> usize {
        (self.coefficients.len() - 1) / 2
    }

    /// Magnitude of the frequency response at `freq_hz`.
    pub fn gain_at(&self, freq_hz: f64) -> f64 {
        let omega = 2.0 * core::f64::consts::PI * freq_hz / self.design_rate_hz as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (n, &h) in self.coefficients.iter().enumerate() {
            re += h * math::cos(omega * n as f64);
            im -= h * math::sin(omega * n as f64);
        }
        math::sqrt(re * re + im * im)
    }
}

/// Hamming-windowed sinc band-pass design. Taps must be odd so the group
/// delay is integral; coefficients are computed for one half and mirrored,
/// making the symmetry exact.
pub fn design_fir_bandpass(
    low_hz: f64,
    high_hz: f64,
    rate_hz: u32,
    taps: usize,
) -> Result<FirFilter, DataError> {
    if !(low_hz > 0.0 && low_hz < high_hz && high_hz < rate_hz as f64 / 2.0) {
        return Err(DataError::InvalidArgument {
            reason: "band edges must satisfy 0 < low < high < rate/2",
        });
    }
    if taps < 3 || taps % 2 == 0 {
        return Err(DataError::InvalidArgument {
            reason: "tap count must be odd and at least 3",
        });
    }

    let mid = (taps - 1) / 2;
    let w_low = 2.0 * core::f64::consts::PI * low_hz / rate_hz as f64;
    let w_high = 2.0 * core::f64::consts::PI * high_hz / rate_hz as f64;
    let mut h = vec![0.0; taps];
    for i in 0..=mid {
        let x = (mid - i) as f64; // distance from center, nonnegative
        let ideal = if x == 0.0 {
            (w_high - w_low) / core::f64::consts::PI
        } else {
            (math::sin(w_high * x) - math::sin(w_low * x)) / (core::f64::consts::PI * x)
        };
        let window = 0.54 - 0.46 * math::cos(2.0 * core::f64::consts::PI * i as f64 / (taps - 1) as f64);
        let c = ideal * window;
        h[i] = c;
        h[taps - 1 - i] = c;
    }

    let mut filter = FirFilter {
        coefficients: h,
        passband_hz: (low_hz, high_hz),
        design_rate_hz: rate_hz,
    };
    // normalize the passband center to unit gain
    let center = filter.gain_at(math::sqrt(low_hz * high_hz));
    if center > 0.0 {
        simd::scale(&mut filter.coefficients, 1.0 / center);
    }
    Ok(filter)
}

/// Zero-phase FIR filtering followed by decimation: the group delay is
/// removed by centering the convolution window, then every `factor`-th
/// sample is kept. The signal is treated as zero outside its support.
pub fn filter_and_decimate(
    signal: &[f64],
    filter: &FirFilter,
    factor: usize,
) -> Result<Vec<f64>, DataError> {
    if factor == 0 {
        return Err(DataError::InvalidArgument {
            reason: "decimation factor must be at least 1",
        });
    }
    if filter.design_rate_hz as usize % factor != 0 {
        return Err(DataError::RateNotDivisible {
            rate: filter.design_rate_hz,
            factor,
        });
    }
    let taps = filter.coefficients.len();
    let mid = filter.group_delay();
    let len = signal.len();
    let out_len = len.div_ceil(factor);
    let mut out = Vec::with_capacity(out_len);
    for j in 0..out_len {
        let n = j * factor;
        // y[n] = sum_k h[k] * x[n - mid + k]; symmetric taps make this the
        // centered convolution
        let lo = mid.saturating_sub(n);
        let hi = taps.min(len + mid - n);
        let y = if lo < hi {
            let x0 = n + lo - mid;
            simd::dot(&filter.coefficients[lo..hi], &signal[x0..x0 + (hi - lo)])
        } else {
            0.0
        };
        out.push(y);
    }
    Ok(out)
}

/// Applies [`filter_and_decimate`] to every channel of every trial,
/// producing a set at `rate / factor`.
pub fn preprocess_trialset(
    set: &TrialSet,
    filter: &FirFilter,
    factor: usize,
) -> Result<TrialSet, DataError> {
    if set.sampling_rate_hz != filter.design_rate_hz {
        return Err(DataError::InvalidArgument {
            reason: "filter was designed for a different sampling rate",
        });
    }
    let channels = set.channels();
    if channels == 0 {
        return Err(DataError::NoChannels);
    }
    let mut trials = Vec::with_capacity(set.trials.len());
    for (i, t) in set.trials.iter().enumerate() {
        if t.data.len() % channels != 0 {
            return Err(DataError::TrialShape {
                trial: i,
                expected: channels,
                got: t.data.len(),
            });
        }
        let samples = t.data.len() / channels;
        let mut data = Vec::with_capacity(t.data.len() / factor + channels);
        for ch in 0..channels {
            let channel = &t.data[ch * samples..(ch + 1) * samples];
            data.extend_from_slice(&filter_and_decimate(channel, filter, factor)?);
        }
        trials.push(super::Trial {
            label: t.label,
            data,
        });
    }
    Ok(TrialSet {
        subject: set.subject.clone(),
        sampling_rate_hz: set.sampling_rate_hz / factor as u32,
        channel_names: set.channel_names.clone(),
        trials,
    })
}
