use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{LcftError, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// sin(πz) with the real part reduced modulo 2 first, so integers give exact zeros.
pub fn sin_pi(z: Complex64) -> Complex64 {
    let n = z.re.round();
    let f = z.re - n;
    let s = Complex64::new(PI * f, PI * z.im).sin();
    if (n as i64).rem_euclid(2) == 1 {
        -s
    } else {
        s
    }
}

/// Principal-sheet ln Γ(z) for Re z ≥ 1/2 (Lanczos).
fn ln_gamma_right(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS[0], 0.0);
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += *c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

fn is_nonpositive_integer(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// ln Γ(z) on some branch; only its exponential is meaningful.
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    if is_nonpositive_integer(z) {
        return Err(LcftError::Pole { re: z.re, im: z.im });
    }
    if z.re >= 0.5 {
        Ok(ln_gamma_right(z))
    } else {
        let s = sin_pi(z);
        Ok(Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma_right(1.0 - z))
    }
}

pub fn gamma(z: Complex64) -> Result<Complex64> {
    ln_gamma(z).map(|l| l.exp())
}

/// ln l(z) with l(z) = Γ(z)/Γ(1−z). A zero of l is returned with real part −∞.
pub fn ln_l_ratio(z: Complex64) -> Result<Complex64> {
    if is_nonpositive_integer(z) {
        return Err(LcftError::Pole { re: z.re, im: z.im });
    }
    // Γ(1−z) = π / (sin(πz) Γ(z)), so l(z) = Γ(z)² sin(πz) / π.
    if z.re >= 0.5 {
        let s = sin_pi(z);
        if s == Complex64::new(0.0, 0.0) {
            return Ok(Complex64::new(f64::NEG_INFINITY, 0.0));
        }
        Ok(2.0 * ln_gamma_right(z) + s.ln() - PI.ln())
    } else {
        let s = sin_pi(z);
        Ok(PI.ln() - s.ln() - 2.0 * ln_gamma_right(1.0 - z))
    }
}

/// l(z) = Γ(z)/Γ(1−z).
pub fn l_ratio(z: Complex64) -> Result<Complex64> {
    let l = ln_l_ratio(z)?;
    if l.re == f64::NEG_INFINITY {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(l.exp())
}
