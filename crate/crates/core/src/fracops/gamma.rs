//! Gamma function.
//!
//! A single Lanczos approximation (g = 7, nine terms) covers `z >= 1`; smaller
//! and negative non-integer arguments are reached through the recurrence
//! `Γ(z) = Γ(z + 1) / z`, which keeps the relative error of the core
//! approximation.

use crate::error::{domain, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos(z: f64) -> f64 {
    debug_assert!(z >= 1.0);
    let x = z - 1.0;
    let mut sum = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let w = x + LANCZOS_G + 0.5;
    // w^(x+1/2) split in two halves so large z does not overflow early
    let half = w.powf(0.5 * (x + 0.5));
    (2.0 * std::f64::consts::PI).sqrt() * half * (half * (-w).exp()) * sum
}

/// Γ(z) for `z > 0`.
pub fn gamma(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return domain(format!("gamma requires a positive finite argument, got {z}"));
    }
    Ok(gamma_unchecked(z))
}

/// Γ(z) for any real `z` that is not a non-positive integer.
///
/// Used for coefficients such as Γ(α − 1) with α ∈ (0, 1).
pub fn gamma_signed(z: f64) -> Result<f64> {
    if !z.is_finite() || (z <= 0.0 && z == z.round()) {
        return domain(format!("gamma has a pole at {z}"));
    }
    Ok(gamma_unchecked(z))
}

fn gamma_unchecked(z: f64) -> f64 {
    if z >= 1.0 {
        return lanczos(z);
    }
    let mut shift = z;
    let mut denom = 1.0;
    while shift < 1.0 {
        denom *= shift;
        shift += 1.0;
    }
    lanczos(shift) / denom
}
