//! Statistical tests used by the evaluation reports: chi-squared uniformity,
//! one-sided Welch's t-test, and ordinary least squares, on top of in-module
//! regularized incomplete gamma/beta implementations.

use serde::{Deserialize, Serialize};

use crate::error::{NcgError, Result};

/// Outcome of a hypothesis test at significance level `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub degrees_of_freedom: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
}

impl TestResult {
    fn at(statistic: f64, degrees_of_freedom: f64, p_value: f64, alpha: f64) -> Self {
        Self {
            statistic,
            degrees_of_freedom,
            p_value,
            alpha,
            reject: p_value < alpha,
        }
    }
}

/// Chi-squared goodness-of-fit test of `counts` against the uniform
/// distribution over its `K` categories.
pub fn chi2_uniform(counts: &[u64], alpha: f64) -> Result<TestResult> {
    if counts.len() < 2 {
        return Err(NcgError::InvalidParameter {
            name: "counts",
            why: format!("need at least 2 categories, got {}", counts.len()),
        });
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(NcgError::InvalidParameter {
            name: "counts",
            why: "all counts are zero".into(),
        });
    }
    let expected = total as f64 / counts.len() as f64;
    let statistic: f64 = counts
        .iter()
        .map(|&o| {
            let diff = o as f64 - expected;
            diff * diff / expected
        })
        .sum();
    let df = (counts.len() - 1) as f64;
    Ok(TestResult::at(statistic, df, chi2_sf(statistic, df)?, alpha))
}

/// One-sided Welch's t-test of H₁: mean(a) > mean(b), without assuming
/// equal variances. Both samples degenerate (zero variance) with equal
/// means yields the no-evidence value p = 0.5.
pub fn welch_t_one_sided(a: &[f64], b: &[f64], alpha: f64) -> Result<TestResult> {
    for (name, sample) in [("a", a), ("b", b)] {
        if sample.len() < 2 {
            return Err(NcgError::InvalidParameter {
                name: "sample",
                why: format!("sample {name} has {} values; need at least 2", sample.len()),
            });
        }
        if sample.iter().any(|v| !v.is_finite()) {
            return Err(NcgError::InvalidParameter {
                name: "sample",
                why: format!("sample {name} contains a non-finite value"),
            });
        }
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mean_a = a.iter().sum::<f64>() / na;
    let mean_b = b.iter().sum::<f64>() / nb;
    let var_a = a.iter().map(|v| (v - mean_a).powi(2)).sum::<f64>() / (na - 1.0);
    let var_b = b.iter().map(|v| (v - mean_b).powi(2)).sum::<f64>() / (nb - 1.0);
    let se_sq = var_a / na + var_b / nb;
    let diff = mean_a - mean_b;
    if se_sq == 0.0 {
        let df = na + nb - 2.0;
        let (t, p) = if diff == 0.0 {
            (0.0, 0.5)
        } else if diff > 0.0 {
            (f64::INFINITY, 0.0)
        } else {
            (f64::NEG_INFINITY, 1.0)
        };
        return Ok(TestResult::at(t, df, p, alpha));
    }
    let t = diff / se_sq.sqrt();
    let df = se_sq * se_sq
        / ((var_a / na).powi(2) / (na - 1.0) + (var_b / nb).powi(2) / (nb - 1.0));
    Ok(TestResult::at(t, df, student_t_sf(t, df)?, alpha))
}

/// Ordinary least squares fit; returns `(slope, intercept)`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() {
        return Err(NcgError::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(NcgError::InvalidParameter {
            name: "xs",
            why: format!("need at least 2 points, got {}", xs.len()),
        });
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(NcgError::InvalidParameter {
            name: "xs",
            why: "all x values are equal".into(),
        });
    }
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = sxy / sxx;
    Ok((slope, mean_y - slope * mean_x))
}

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

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

/// Natural log of the gamma function for x > 0 (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1−x) = π/sin(πx).
        return (std::f64::consts::PI / (std::f64::consts::PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

const MAX_ITERS: usize = 500;
const EPS: f64 = 1e-16;

/// Regularized lower incomplete gamma P(a, x).
pub fn reg_gamma_p(a: f64, x: f64) -> Result<f64> {
    if a <= 0.0 || x < 0.0 {
        return Err(NcgError::InvalidParameter {
            name: "gamma",
            why: format!("P(a={a}, x={x}) undefined"),
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        Ok(1.0 - gamma_q_cf(a, x)?)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 − P(a, x).
pub fn reg_gamma_q(a: f64, x: f64) -> Result<f64> {
    if a <= 0.0 || x < 0.0 {
        return Err(NcgError::InvalidParameter {
            name: "gamma",
            why: format!("Q(a={a}, x={x}) undefined"),
        });
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x < a + 1.0 {
        Ok(1.0 - gamma_p_series(a, x)?)
    } else {
        gamma_q_cf(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> Result<f64> {
    let mut term = 1.0 / a;
    let mut sum = term;
    for n in 1..MAX_ITERS {
        term *= x / (a + n as f64);
        sum += term;
        if term.abs() < sum.abs() * EPS {
            return Ok(sum * (-x + a * x.ln() - ln_gamma(a)).exp());
        }
    }
    Err(NcgError::NumericalFailure(format!(
        "incomplete gamma series failed to converge (a={a}, x={x})"
    )))
}

fn gamma_q_cf(a: f64, x: f64) -> Result<f64> {
    // Modified Lentz continued fraction for Q(a, x), valid for x ≥ a + 1.
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITERS {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok(h * (-x + a * x.ln() - ln_gamma(a)).exp());
        }
    }
    Err(NcgError::NumericalFailure(format!(
        "incomplete gamma continued fraction failed to converge (a={a}, x={x})"
    )))
}

/// Regularized incomplete beta I_x(a, b).
pub fn reg_beta_i(x: f64, a: f64, b: f64) -> Result<f64> {
    if a <= 0.0 || b <= 0.0 {
        return Err(NcgError::InvalidParameter {
            name: "beta",
            why: format!("I_x(a={a}, b={b}) undefined"),
        });
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x >= 1.0 {
        return Ok(1.0);
    }
    let front = (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln())
        .exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_cf(x, a, b)? / a)
    } else {
        Ok(1.0 - front * beta_cf(1.0 - x, b, a)? / b)
    }
}

fn beta_cf(x: f64, a: f64, b: f64) -> Result<f64> {
    // Modified Lentz continued fraction for the incomplete beta.
    let tiny = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITERS {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(NcgError::NumericalFailure(format!(
        "incomplete beta continued fraction failed to converge (x={x}, a={a}, b={b})"
    )))
}

/// Upper-tail probability of the chi-squared distribution.
pub fn chi2_sf(statistic: f64, df: f64) -> Result<f64> {
    if statistic < 0.0 || df <= 0.0 {
        return Err(NcgError::InvalidParameter {
            name: "chi2",
            why: format!("sf(statistic={statistic}, df={df}) undefined"),
        });
    }
    reg_gamma_q(df / 2.0, statistic / 2.0)
}

/// Upper-tail probability P(T ≥ t) of Student's t distribution.
pub fn student_t_sf(t: f64, df: f64) -> Result<f64> {
    if df <= 0.0 {
        return Err(NcgError::InvalidParameter {
            name: "student_t",
            why: format!("sf(t={t}, df={df}) undefined"),
        });
    }
    if t.is_infinite() {
        return Ok(if t > 0.0 { 0.0 } else { 1.0 });
    }
    let x = df / (df + t * t);
    let tail = 0.5 * reg_beta_i(x, df / 2.0, 0.5)?;
    Ok(if t >= 0.0 { tail } else { 1.0 - tail })
}
