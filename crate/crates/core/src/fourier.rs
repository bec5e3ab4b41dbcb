//! Walsh–Hadamard transform and the Fourier route to influences.

use serde::{Deserialize, Serialize};

use crate::function::BooleanFunction;
use crate::influence::influences;

/// In-place unnormalized Walsh–Hadamard transform; `data.len()` must be a
/// power of two.
pub fn fwht(data: &mut [f64]) {
    let len = data.len();
    assert!(
        len.is_power_of_two(),
        "transform length must be a power of two"
    );
    let mut h = 1;
    while h < len {
        for block in data.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// Fourier coefficients `f^(S) = E[f(x) (-1)^{|S ∩ x|}]` of the 0/1-valued
/// function, indexed by the table index of `S`.
pub fn fourier_coefficients(f: &BooleanFunction) -> Vec<f64> {
    let mut data: Vec<f64> = (0..f.table_len()).map(|x| f.get(x) as u8 as f64).collect();
    fwht(&mut data);
    let scale = (-(f.n() as f64)).exp2();
    data.iter_mut().for_each(|c| *c *= scale);
    data
}

/// `I_k = 4 * sum_{S ∋ k} f^(S)^2`, for every `k`.
pub fn fourier_influences(f: &BooleanFunction) -> Vec<f64> {
    let coeffs = fourier_coefficients(f);
    let mut out = vec![0.0; f.n()];
    for (s, c) in coeffs.iter().enumerate() {
        let sq = c * c;
        let mut bits = s;
        while bits != 0 {
            out[bits.trailing_zeros() as usize] += 4.0 * sq;
            bits &= bits - 1;
        }
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FourierCheck {
    /// `max_k |I_k(f) - 4 sum_{S ∋ k} f^(S)^2|`.
    #[serde(with = "crate::real")]
    pub max_deviation: f64,
    /// `|sum_S f^(S)^2 - mu(f)|`.
    #[serde(with = "crate::real")]
    pub parseval_deviation: f64,
}

pub fn fourier_influence_check(f: &BooleanFunction) -> FourierCheck {
    let coeffs = fourier_coefficients(f);
    let parseval: f64 = coeffs.iter().map(|c| c * c).sum();
    let direct = influences(f);
    let via_fourier = fourier_influences(f);
    let max_deviation = direct
        .iter()
        .zip(&via_fourier)
        .map(|(d, v)| (d.to_f64() - v).abs())
        .fold(0.0, f64::max);
    FourierCheck {
        max_deviation,
        parseval_deviation: (parseval - f.measure().to_f64()).abs(),
    }
}
