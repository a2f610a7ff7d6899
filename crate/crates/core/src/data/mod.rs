//! Trial containers, validation, optional FIR preprocessing, trial
//! segmentation, and a synthetic-signal generator for desk-scale testing.

mod fir;
mod synth;

pub use fir::{design_fir_bandpass, filter_and_decimate, preprocess_trialset, FirFilter};
pub use synth::{synth_generate, SynthConfig};

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Number of word classes.
pub const NUM_CLASSES: usize = 6;

/// Class label word order: 0..5.
pub const CLASS_WORDS: [&str; NUM_CLASSES] = ["up", "down", "right", "left", "forward", "backward"];

/// Expected recording setup: 6 electrodes at 128 Hz, 4-second windows.
pub const STANDARD_CHANNELS: [&str; 6] = ["F3", "F4", "C3", "C4", "P3", "P4"];
pub const STANDARD_RATE_HZ: u32 = 128;
pub const STANDARD_SAMPLES: usize = 512;
pub const STANDARD_TRIALS_PER_CLASS: usize = 40;

/// One trial: a channel-major (channels × samples) matrix plus its class.
#[derive(Clone, Debug, PartialEq)]
pub struct Trial {
    pub label: u8,
    /// Channel-major samples: channel 0 first, then channel 1, ...
    pub data: Vec<f64>,
}

/// A subject's worth of trials with the recording metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialSet {
    pub subject: String,
    pub sampling_rate_hz: u32,
    pub channel_names: Vec<String>,
    pub trials: Vec<Trial>,
}

/// Violations of hard invariants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DataError {
    LabelOutOfRange { trial: usize, label: u8 },
    TrialShape { trial: usize, expected: usize, got: usize },
    NoChannels,
    InvalidArgument { reason: &'static str },
    RateNotDivisible { rate: u32, factor: usize },
    WindowOutOfBounds { needed: usize, available: usize },
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataError::LabelOutOfRange { trial, label } => {
                write!(f, "trial {trial}: class label {label} outside 0..=5")
            }
            DataError::TrialShape {
                trial,
                expected,
                got,
            } => write!(
                f,
                "trial {trial}: {got} samples do not fill channels x samples = {expected}"
            ),
            DataError::NoChannels => write!(f, "trial set declares no channels"),
            DataError::InvalidArgument { reason } => write!(f, "{reason}"),
            DataError::RateNotDivisible { rate, factor } => {
                write!(f, "sampling rate {rate} Hz is not divisible by factor {factor}")
            }
            DataError::WindowOutOfBounds { needed, available } => write!(
                f,
                "segment window needs {needed} samples per channel, recording has {available}"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for DataError {}

/// Deviations from the expected recording setup; tolerated but reported.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DataWarning {
    UnexpectedRate { got: u32 },
    UnexpectedChannelCount { got: usize },
    UnexpectedChannelNames,
    UnexpectedSampleCount { got: usize },
    NonUniformSampleCounts,
    TrialsPerClass { class: u8, got: usize },
}

impl fmt::Display for DataWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataWarning::UnexpectedRate { got } =>

                write!(f, "sampling rate is {got} Hz (expected {STANDARD_RATE_HZ})"),
            DataWarning::UnexpectedChannelCount { got } => {
                write!(f, "{got} channels (expected {})", STANDARD_CHANNELS.len())
            }
            DataWarning::UnexpectedChannelNames => {
                write!(f, "channel names differ from F3,F4,C3,C4,P3,P4")
            }
            DataWarning::UnexpectedSampleCount { got } => {
                write!(f, "{got} samples per channel (expected {STANDARD_SAMPLES})")
            }
            DataWarning::NonUniformSampleCounts => {
                write!(f, "trials have differing sample counts")
            }
            DataWarning::TrialsPerClass { class, got } => write!(
                f,
                "class {class} ({}) has {got} trials (expected {STANDARD_TRIALS_PER_CLASS})",
                CLASS_WORDS[*class as usize]
            ),
        }
    }
}

impl TrialSet {
    pub fn channels(&self) -> usize {
        self.channel_names.len()
    }

    /// Samples per channel of the first trial (uniformity is a warning, not
    /// an invariant).
    pub fn samples_per_channel(&self) -> Option<usize> {
        self.trials
            .first()
            .map(|t| t.data.len() / self.channels().max(1))
    }

    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        let mut counts = [0usize; NUM_CLASSES];
        for t in &self.trials {
            if (t.label as usize) < NUM_CLASSES {
                counts[t.label as usize] += 1;
            }
        }
        counts
    }

    /// Checks hard invariants (errors) and expected-setup deviations
    /// (warnings).
    pub fn validate(&self) -> Result<Vec<DataWarning>, DataError> {
        let channels = self.channels();
        if channels == 0 {
            return Err(DataError::NoChannels);
        }
        for (i, t) in self.trials.iter().enumerate() {
            if t.label as usize >= NUM_CLASSES {
                return Err(DataError::LabelOutOfRange {
                    trial: i,
                    label: t.label,
                });
            }
            if t.data.len() % channels != 0 || t.data.is_empty() {
                return Err(DataError::TrialShape {
                    trial: i,
                    expected: channels,
                    got: t.data.len(),
                });
            }
        }

        let mut warnings = Vec::new();
        if self.sampling_rate_hz != STANDARD_RATE_HZ {
            warnings.push(DataWarning::UnexpectedRate {
                got: self.sampling_rate_hz,
            });
        }
        if channels != STANDARD_CHANNELS.len() {
            warnings.push(DataWarning::UnexpectedChannelCount { got: channels });
        } else if !self
            .channel_names
            .iter()
            .zip(STANDARD_CHANNELS)
            .all(|(a, b)| a == b)
        {
            warnings.push(DataWarning::UnexpectedChannelNames);
        }
        if let Some(samples) = self.samples_per_channel() {
            if self
                .trials
                .iter()
                .any(|t| t.data.len() != samples * channels)
            {
                warnings.push(DataWarning::NonUniformSampleCounts);
            } else if samples != STANDARD_SAMPLES {
                warnings.push(DataWarning::UnexpectedSampleCount { got: samples });
            }
            for (class, &count) in self.class_counts().iter().enumerate() {
                if count != STANDARD_TRIALS_PER_CLASS {
                    warnings.push(DataWarning::TrialsPerClass {
                        class: class as u8,
                        got: count,
                    });
                }
            }
        }
        Ok(warnings)
    }
}

/// Extracts the 4-second imagination window (4·rate samples per channel)
/// from a continuous channel-major recording, starting `cue_offset_s`
/// seconds in.
pub fn segment_trial(
    recording: &[f64],
    channels: usize,
    rate_hz: u32,
    cue_offset_s: f64,
) -> Result<Vec<f64>, DataError> {
    if channels == 0 {
        return Err(DataError::NoChannels);
    }
    if recording.len() % channels != 0 {
        return Err(DataError::InvalidArgument {
            reason: "recording length is not a multiple of the channel count",
        });
    }
    if !(cue_offset_s >= 0.0) || !cue_offset_s.is_finite() {
        return Err(DataError::InvalidArgument {
            reason: "cue offset must be a nonnegative number of seconds",
        });
    }
    let available = recording.len() / channels;
    let window = 4 * rate_hz as usize;
    let start = libm::round(cue_offset_s * rate_hz as f64) as usize;
    if start + window > available {
        return Err(DataError::WindowOutOfBounds {
            needed: start + window,
            available,
        });
    }
    let mut out = Vec::with_capacity(channels * window);
    for ch in 0..channels {
        let base = ch * available + start;
        out.extend_from_slice(&recording[base..base + window]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn standard_names() -> Vec<String> {
        STANDARD_CHANNELS.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn validate_flags_deviations_as_warnings() {
        let set = TrialSet {
            subject: "s1".into(),
            sampling_rate_hz: 128,
            channel_names: standard_names(),
            trials: vec![
                Trial {
                    label: 0,
                    data: vec![0.0; 6 * 512],
                };
                5
            ],
        };
        let warnings = set.validate().unwrap();
        // only the per-class counts deviate (5 trials of class 0)
        assert!(warnings
            .iter()
            .all(|w| matches!(w, DataWarning::TrialsPerClass { .. })));
        assert_eq!(warnings.len(), 6);
    }

    #[test]
    fn full_standard_set_validates_clean() {
        let mut trials = Vec::new();
        for c in 0..6u8 {
            for _ in 0..40 {
                trials.push(Trial {
                    label: c,
                    data: vec![0.0; 6 * 512],
                });
            }
        }
        let set = TrialSet {
            subject: "s1".into(),
            sampling_rate_hz: 128,
            channel_names: standard_names(),
            trials,
        };
        assert!(set.validate().unwrap().is_empty());
    }

    #[test]
    fn label_out_of_range_is_an_error() {
        let set = TrialSet {
            subject: "s1".into(),
            sampling_rate_hz: 128,
            channel_names: standard_names(),
            trials: vec![Trial {
                label: 6,
                data: vec![0.0; 6 * 512],
            }],
        };
        assert!(matches!(
            set.validate(),
            Err(DataError::LabelOutOfRange { trial: 0, label: 6 })
        ));
    }

    #[test]
    fn segment_extracts_the_window() {
        // 2 channels, 10 s at 4 Hz => 40 samples/channel; window = 16
        let rate = 4u32;
        let per_ch = 40usize;
        let mut rec = Vec::new();
        for ch in 0..2 {
            for n in 0..per_ch {
                rec.push((ch * 1000 + n) as f64);
            }
        }
        let seg = segment_trial(&rec, 2, rate, 4.0).unwrap();
        assert_eq!(seg.len(), 2 * 16);
        assert_eq!(seg[0], 16.0);
        assert_eq!(seg[16], 1016.0);

        // shifting by one sample (0.25 s at 4 Hz) shifts the window by one
        let seg2 = segment_trial(&rec, 2, rate, 4.25).unwrap();
        assert_eq!(seg2[0], 17.0);

        assert!(matches!(
            segment_trial(&rec, 2, rate, 7.0),
            Err(DataError::WindowOutOfBounds { .. })
        ));
    }

    #[test]
    fn four_seconds_at_128_hz_is_512_samples() {
        let rec = vec![0.0; 6 * 9 * 128];
        let seg = segment_trial(&rec, 6, 128, 4.0).unwrap();
        assert_eq!(seg.len(), 6 * 512);
    }
}
