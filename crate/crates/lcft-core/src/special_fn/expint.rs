use crate::error::{LcftError, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponential integral E₁(x) = ∫_x^∞ e^{−t}/t dt for x > 0.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(LcftError::Domain(format!("E1 needs x > 0, got {x}")));
    }
    if x < 1.0 {
        // −γ − ln x − Σ_{k≥1} (−x)^k / (k·k!).
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        return Ok(-EULER_GAMMA - x.ln() - sum);
    }
    // Continued fraction e^{−x}/(x + 1 − 1²/(x + 3 − 2²/(x + 5 − ...))), modified Lentz.
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok(h * (-x).exp());
        }
    }
    Err(LcftError::Guard(
        "E1 continued fraction did not converge".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // mpmath e1 at 30 digits.
        for (x, want) in [
            (0.1, 1.822_923_958_419_390_6),
            (0.9, 0.260_183_939_325_999_63),
            (1.0, 0.219_383_934_395_520_27),
            (5.0, 0.001_148_295_591_275_325_8),
            (30.0, 3.021_552_010_688_812_5e-15),
        ] {
            let got = exp_integral_e1(x).unwrap();
            assert!((got - want).abs() < 1e-14 * want, "{x}: {got} vs {want}");
        }
    }
}
