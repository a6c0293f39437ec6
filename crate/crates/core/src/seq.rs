//! Indexed coefficient sequences and the finite-sample ℓ₂ test.

use num_complex::Complex64;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeqKind {
    Kappa,
    Xi,
    Beta,
    Mu,
    Eta,
    KappaCon1,
}

/// Values for `n = first, first+1, …`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoeffSeq {
    pub kind: SeqKind,
    pub first: usize,
    pub values: Vec<Complex64>,
}

fn mean_square(v: &[Complex64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().map(|x| x.norm_sqr()).sum::<f64>() / v.len() as f64
    }
}

impl CoeffSeq {
    pub fn new(kind: SeqKind, first: usize, values: Vec<Complex64>) -> Self {
        Self { kind, first, values }
    }

    pub fn from_real(kind: SeqKind, first: usize, values: &[f64]) -> Self {
        Self::new(kind, first, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index(&self, i: usize) -> usize {
        self.first + i
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    fn quarter(&self, k: usize) -> &[Complex64] {
        let n = self.values.len();
        &self.values[k * n / 4..(k + 1) * n / 4]
    }

    /// Mean square of the last quarter.
    pub fn tail_stat(&self) -> f64 {
        mean_square(self.quarter(3))
    }

    /// The last quarter is not larger than 1.5 times the third one.
    pub fn decays(&self) -> bool {
        self.tail_stat() <= 1.5 * mean_square(self.quarter(2))
    }

    /// Elementwise `n·r_n`.
    pub fn scaled_by_index(&self) -> Self {
        let values = self.values.iter().enumerate().map(|(i, v)| v * self.index(i) as f64).collect();
        Self { kind: self.kind, first: self.first, values }
    }
}

/// Finite-sample stand-in for "the sequence is in ℓ₂".
///
/// Passes when the last quarter's mean square is at most `ratio` times the
/// second quarter's and no entry past the middle exceeds the largest entry
/// before it. Sequences whose last-quarter RMS is below `floor` pass
/// outright: at that level the entries are rounding noise and carry no
/// growth information.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct L2Criterion {
    pub ratio: f64,
    pub floor: f64,
}

impl Default for L2Criterion {
    fn default() -> Self {
        Self { ratio: 0.5, floor: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct L2Verdict {
    pub pass: bool,
    pub second_quarter_ms: f64,
    pub last_quarter_ms: f64,
    pub max_first_half: f64,
    pub max_second_half: f64,
}

impl L2Criterion {
    pub fn judge(&self, s: &CoeffSeq) -> L2Verdict {
        let n = s.values.len();
        let q2 = mean_square(s.quarter(1));
        let q4 = mean_square(s.quarter(3));
        let mx = |v: &[Complex64]| v.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let (m1, m2) = (mx(&s.values[..n / 2]), mx(&s.values[n / 2..]));
        let shape = n >= 8 && q4 <= self.ratio * q2 && m2 <= m1;
        let quiet = n >= 8 && q4.sqrt() <= self.floor;
        L2Verdict {
            pass: shape || quiet,
            second_quarter_ms: q2,
            last_quarter_ms: q4,
            max_first_half: m1,
            max_second_half: m2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(f: impl Fn(f64) -> f64, n: usize) -> CoeffSeq {
        let v: Vec<f64> = (1..=n).map(|k| f(k as f64)).collect();
        CoeffSeq::from_real(SeqKind::Mu, 1, &v)
    }

    #[test]
    fn decaying_sequences_pass() {
        let c = L2Criterion::default();
        assert!(c.judge(&seq(|n| 1.0 / n, 200)).pass);
        assert!(c.judge(&seq(|n| (n * 0.7).sin() / n, 200)).pass);
        assert!(seq(|n| 1.0 / n, 200).decays());
    }

    #[test]
    fn growth_fails_and_index_scaling_flips() {
        let c = L2Criterion::default();
        assert!(!c.judge(&seq(|_| 1.0, 200)).pass);
        let s = seq(|n| 1.0 / n, 200);
        assert!(c.judge(&s).pass);
        assert!(!c.judge(&s.scaled_by_index()).pass);
        assert!(!seq(|n| n, 200).decays());
    }

    #[test]
    fn noise_floor() {
        let noise = seq(|n| 1e-12 * (n * 12.9898).sin(), 200);
        assert!(!L2Criterion::default().judge(&noise).pass);
        assert!(L2Criterion { ratio: 0.5, floor: 1e-9 }.judge(&noise).pass);
    }
}
