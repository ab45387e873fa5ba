use serde::{Deserialize, Serialize};

use super::{FilterBank, WaveletError};

/// Signal extension used where the filters reach past either end.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Circular wrap. Odd-length inputs are first padded by repeating the
    /// last sample, so each level halves the length rounding up. The
    /// transform is orthogonal on the (padded) signal.
    #[default]
    Periodic,
    /// Half-sample mirror (`x[-1] = x[0]`). Each level produces
    /// `floor((n + L - 1) / 2)` coefficients.
    Symmetric,
}

/// Approximation and detail coefficients of a multilevel DWT.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletDecomposition {
    pub level: usize,
    /// `A_level`.
    pub approximation: Vec<f64>,
    /// `D_1 ..= D_level`; `details[0]` is the finest scale.
    pub details: Vec<Vec<f64>>,
    pub original_length: usize,
    pub boundary_mode: BoundaryMode,
    pub bank_name: String,
    pub filter_length: usize,
    /// Length of the signal entering each level; `input_lengths[0]` is the
    /// original length.
    pub input_lengths: Vec<usize>,
}

impl WaveletDecomposition {
    /// Same structure with every coefficient set to zero.
    pub fn zeroed(&self) -> Self {
        Self {
            approximation: vec![0.0; self.approximation.len()],
            details: self.details.iter().map(|d| vec![0.0; d.len()]).collect(),
            ..self.clone()
        }
    }

    /// Sum of squared coefficients over all sets.
    pub fn energy(&self) -> f64 {
        self.details
            .iter()
            .chain(std::iter::once(&self.approximation))
            .flat_map(|c| c.iter())
            .map(|x| x * x)
            .sum()
    }
}

/// Coefficient length produced by one analysis step.
fn level_output_len(n: usize, filter_len: usize, mode: BoundaryMode) -> usize {
    match mode {
        BoundaryMode::Periodic => n.div_ceil(2),
        BoundaryMode::Symmetric => (n + filter_len - 1) / 2,
    }
}

/// Input length at each level followed by the final approximation length,
/// i.e. `level + 1` entries.
pub fn coefficient_lengths(
    n: usize,
    level: usize,
    filter_len: usize,
    mode: BoundaryMode,
) -> Vec<usize> {
    let mut lens = Vec::with_capacity(level + 1);
    let mut cur = n;
    lens.push(cur);
    for _ in 0..level {
        cur = level_output_len(cur, filter_len, mode);
        lens.push(cur);
    }
    lens
}

pub(crate) fn validate_signal(signal: &[f64], level: usize) -> Result<(), WaveletError> {
    if level == 0 {
        return Err(WaveletError::ZeroLevel);
    }
    let required = 1usize.checked_shl(level as u32).unwrap_or(usize::MAX);
    if signal.len() < required {
        return Err(WaveletError::SignalTooShort {
            len: signal.len(),
            level,
            required,
        });
    }
    if let Some((index, &value)) = signal.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(WaveletError::NonFinite { index, value });
    }
    Ok(())
}

/// Mallat cascade: filter with the lowpass and highpass, keep every second
/// output, and recurse on the approximation.
///
/// In periodic mode one step computes
/// `A[i] = sum_j lowpass[j] * x[(2i - j) mod n]` (and likewise `D` with the
/// highpass).
pub fn dwt_decompose(
    signal: &[f64],
    bank: &FilterBank,
    level: usize,
    mode: BoundaryMode,
) -> Result<WaveletDecomposition, WaveletError> {
    validate_signal(signal, level)?;
    let mut details = Vec::with_capacity(level);
    let mut input_lengths = Vec::with_capacity(level);
    let mut approx = signal.to_vec();
    for _ in 0..level {
        input_lengths.push(approx.len());
        let (a, d) = analysis_step(&approx, bank, mode);
        details.push(d);
        approx = a;
    }
    Ok(WaveletDecomposition {
        level,
        approximation: approx,
        details,
        original_length: signal.len(),
        boundary_mode: mode,
        bank_name: bank.name.clone(),
        filter_length: bank.len(),
        input_lengths,
    })
}

/// Inverse transform. Exact up to rounding for decompositions produced by
/// [`dwt_decompose`] with the same bank.
pub fn idwt_reconstruct(
    decomp: &WaveletDecomposition,
    bank: &FilterBank,
) -> Result<Vec<f64>, WaveletError> {
    check_compatible(decomp, bank)?;
    let mut approx = decomp.approximation.clone();
    for lvl in (0..decomp.level).rev() {
        approx = synthesis_step(
            &approx,
            &decomp.details[lvl],
            decomp.input_lengths[lvl],
            bank,
            decomp.boundary_mode,
        );
    }
    Ok(approx)
}

fn check_compatible(decomp: &WaveletDecomposition, bank: &FilterBank) -> Result<(), WaveletError> {
    if decomp.bank_name != bank.name || decomp.filter_length != bank.len() {
        return Err(WaveletError::Mismatch(format!(
            "decomposed with {} ({} taps), reconstructing with {} ({} taps)",
            decomp.bank_name,
            decomp.filter_length,
            bank.name,
            bank.len()
        )));
    }
    if decomp.level == 0
        || decomp.details.len() != decomp.level
        || decomp.input_lengths.len() != decomp.level
    {
        return Err(WaveletError::Mismatch(format!(
            "level {} with {} detail sets",
            decomp.level,
            decomp.details.len()
        )));
    }
    let lens = coefficient_lengths(
        decomp.original_length,
        decomp.level,
        bank.len(),
        decomp.boundary_mode,
    );
    for lvl in 0..decomp.level {
        if decomp.input_lengths[lvl] != lens[lvl] || decomp.details[lvl].len() != lens[lvl + 1] {
            return Err(WaveletError::Mismatch(format!(
                "coefficient lengths at level {} do not follow the schedule",
                lvl + 1
            )));
        }
    }
    if decomp.approximation.len() != lens[decomp.level] {
        return Err(WaveletError::Mismatch(
            "approximation length does not follow the schedule".into(),
        ));
    }
    Ok(())
}

fn analysis_step(x: &[f64], bank: &FilterBank, mode: BoundaryMode) -> (Vec<f64>, Vec<f64>) {
    let lo = &bank.lowpass;
    let hi = &bank.highpass;
    let taps = lo.len();
    match mode {
        BoundaryMode::Periodic => {
            let n = x.len() + x.len() % 2;
            let at = |k: usize| if k < x.len() { x[k] } else { x[x.len() - 1] };
            let half = n / 2;
            let mut a = vec![0.0; half];
            let mut d = vec![0.0; half];
            for i in 0..half {
                let (mut sa, mut sd) = (0.0, 0.0);
                for j in 0..taps {
                    let k = (2 * i as isize - j as isize).rem_euclid(n as isize) as usize;
                    let v = at(k);
                    sa += lo[j] * v;
                    sd += hi[j] * v;
                }
                a[i] = sa;
                d[i] = sd;
            }
            (a, d)
        }
        BoundaryMode::Symmetric => {
            let n = x.len();
            let out = level_output_len(n, taps, mode);
            let mut a = vec![0.0; out];
            let mut d = vec![0.0; out];
            for i in 0..out {
                let (mut sa, mut sd) = (0.0, 0.0);
                for j in 0..taps {
                    let v = x[reflect(2 * i as isize + 1 - j as isize, n)];
                    sa += lo[j] * v;
                    sd += hi[j] * v;
                }
                a[i] = sa;
                d[i] = sd;
            }
            (a, d)
        }
    }
}

/// Transpose of [`analysis_step`], returning `out_len` samples.
fn synthesis_step(
    a: &[f64],
    d: &[f64],
    out_len: usize,
    bank: &FilterBank,
    mode: BoundaryMode,
) -> Vec<f64> {
    let lo = &bank.lowpass;
    let hi = &bank.highpass;
    let taps = lo.len();
    match mode {
        BoundaryMode::Periodic => {
            let n = out_len + out_len % 2;
            let mut y = vec![0.0; n];
            for i in 0..a.len() {
                for j in 0..taps {
                    let k = (2 * i as isize - j as isize).rem_euclid(n as isize) as usize;
                    y[k] += lo[j] * a[i] + hi[j] * d[i];
                }
            }
            y.truncate(out_len);
            y
        }
        BoundaryMode::Symmetric => {
            let mut y = vec![0.0; out_len];
            for i in 0..a.len() {
                for j in 0..taps {
                    let k = 2 * i as isize + 1 - j as isize;
                    if k >= 0 && (k as usize) < out_len {
                        y[k as usize] += lo[j] * a[i] + hi[j] * d[i];
                    }
                }
            }
            y
        }
    }
}

/// Half-sample symmetric index into a signal of length `n`.
fn reflect(k: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let r = k.rem_euclid(period);
    if r < n as isize {
        r as usize
    } else {
        (period - 1 - r) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    fn random_signal(len: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.random_range(-10.0..10.0)).collect()
    }

    #[test]
    fn constant_signal_level_one() {
        let bank = FilterBank::db4();
        let dec = dwt_decompose(&[5.0; 8], &bank, 1, BoundaryMode::Periodic).unwrap();
        for &d in &dec.details[0] {
            assert_abs_diff_eq!(d, 0.0, epsilon = 1e-10);
        }
        for &a in &dec.approximation {
            assert_abs_diff_eq!(a, 5.0 * std::f64::consts::SQRT_2, epsilon = 1e-10);
        }
    }

    #[test]
    fn round_trip_both_modes() {
        let bank = FilterBank::db4();
        for mode in [BoundaryMode::Periodic, BoundaryMode::Symmetric] {
            for len in [8, 9, 15, 64, 100, 257] {
                let x = random_signal(len, len as u64);
                let dec = dwt_decompose(&x, &bank, 3, mode).unwrap();
                let back = idwt_reconstruct(&dec, &bank).unwrap();
                assert!(max_abs_diff(&x, &back) < 1e-8, "{mode:?} len {len}");
            }
        }
    }

    #[test]
    fn zero_coefficients_reconstruct_zero() {
        let bank = FilterBank::db4();
        let dec = dwt_decompose(&random_signal(64, 1), &bank, 3, BoundaryMode::Periodic).unwrap();
        let back = idwt_reconstruct(&dec.zeroed(), &bank).unwrap();
        assert!(back.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn length_schedule_for_a_month_of_intervals() {
        let bank = FilterBank::db4();
        let x = random_signal(2880, 3);
        let dec = dwt_decompose(&x, &bank, 3, BoundaryMode::Periodic).unwrap();
        assert_eq!(coefficient_lengths(2880, 3, 8, BoundaryMode::Periodic), vec![2880, 1440, 720, 360]);
        assert_eq!(dec.details.iter().map(Vec::len).collect::<Vec<_>>(), vec![1440, 720, 360]);
        assert_eq!(dec.approximation.len(), 360);
        assert_eq!(coefficient_lengths(13, 2, 8, BoundaryMode::Periodic), vec![13, 7, 4]);
        assert_eq!(coefficient_lengths(13, 2, 8, BoundaryMode::Symmetric), vec![13, 10, 8]);
    }

    #[test]
    fn periodic_mode_conserves_energy() {
        let bank = FilterBank::db4();
        let x = random_signal(256, 9);
        let dec = dwt_decompose(&x, &bank, 3, BoundaryMode::Periodic).unwrap();
        let e: f64 = x.iter().map(|v| v * v).sum();
        assert!((dec.energy() - e).abs() / e < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let bank = FilterBank::db4();
        assert!(matches!(
            dwt_decompose(&[1.0; 7], &bank, 3, BoundaryMode::Periodic),
            Err(WaveletError::SignalTooShort { .. })
        ));
        assert!(matches!(
            dwt_decompose(&[1.0; 8], &bank, 0, BoundaryMode::Periodic),
            Err(WaveletError::ZeroLevel)
        ));
        let mut x = vec![1.0; 16];
        x[4] = f64::NAN;
        assert!(matches!(
            dwt_decompose(&x, &bank, 2, BoundaryMode::Periodic),
            Err(WaveletError::NonFinite { index: 4, .. })
        ));
    }

    #[test]
    fn rejects_mismatched_bank_or_level() {
        let bank = FilterBank::db4();
        let dec = dwt_decompose(&random_signal(32, 2), &bank, 2, BoundaryMode::Periodic).unwrap();
        let haar = FilterBank::by_name("haar").unwrap();
        assert!(matches!(idwt_reconstruct(&dec, &haar), Err(WaveletError::Mismatch(_))));
        let mut broken = dec.clone();
        broken.level = 3;
        assert!(idwt_reconstruct(&broken, &bank).is_err());
        let mut truncated = dec;
        truncated.details[1].pop();
        assert!(idwt_reconstruct(&truncated, &bank).is_err());
    }

    #[test]
    fn reflect_indexing() {
        let idx: Vec<usize> = (-3..6).map(|k| reflect(k, 3)).collect();
        assert_eq!(idx, vec![2, 1, 0, 0, 1, 2, 2, 1, 0]);
    }
}
