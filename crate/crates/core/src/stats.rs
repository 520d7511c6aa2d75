//! Validation statistics: sample moments, RSD, Student-t intervals, the
//! paired t-test with Cohen's d, and Pearson correlation.
//!
//! Standard deviations use the `n - 1` denominator throughout. The Student-t
//! CDF goes through the regularized incomplete beta function, evaluated with
//! a modified Lentz continued fraction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const CF_EPS: f64 = 1e-15;
const CF_MAX_ITER: usize = 500;
const TINY: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedTestResult {
    pub n: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub sd_a: f64,
    pub sd_b: f64,
    pub mean_diff: f64,
    pub sd_diff: f64,
    pub t_value: f64,
    pub df: usize,
    pub p_two_sided: f64,
    pub cohens_d: f64,
    pub level: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Mean and sample standard deviation.
pub fn mean_sd(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    Ok((mean, (ss / (n - 1.0)).sqrt()))
}

pub fn rsd_percent(xs: &[f64]) -> Result<f64> {
    let (mean, sd) = mean_sd(xs)?;
    if mean == 0.0 {
        return Err(Error::UndefinedRsd);
    }
    Ok(100.0 * sd / mean.abs())
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("confidence level {level} outside (0, 1)")))
    }
}

/// Two-sided Student-t interval from summary statistics.
pub fn confidence_interval_from_summary(
    mean: f64,
    sd: f64,
    n: usize,
    level: f64,
) -> Result<(f64, f64)> {
    check_level(level)?;
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    if sd == 0.0 {
        return Ok((mean, mean));
    }
    let q = student_t_quantile(0.5 * (1.0 + level), (n - 1) as f64)?;
    let half = q * sd / (n as f64).sqrt();
    Ok((mean - half, mean + half))
}

/// `mean ± t_{(1+level)/2, n-1} * sd / sqrt(n)`.
pub fn confidence_interval(xs: &[f64], level: f64) -> Result<(f64, f64)> {
    check_level(level)?;
    let (mean, sd) = mean_sd(xs)?;
    confidence_interval_from_summary(mean, sd, xs.len(), level)
}

pub fn paired_t_test(a: &[f64], b: &[f64], level: f64) -> Result<PairedTestResult> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    check_level(level)?;
    let (mean_a, sd_a) = mean_sd(a)?;
    let (mean_b, sd_b) = mean_sd(b)?;
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let (mean_diff, sd_diff) = mean_sd(&diffs)?;
    let n = a.len();
    let df = n - 1;

    let (t_value, p_two_sided, cohens_d) = if sd_diff == 0.0 {
        if mean_diff == 0.0 {
            (0.0, 1.0, 0.0)
        } else {
            let inf = f64::INFINITY.copysign(mean_diff);
            (inf, 0.0, inf)
        }
    } else {
        let t = mean_diff / (sd_diff / (n as f64).sqrt());
        let p = 2.0 * student_t_cdf(-t.abs(), df as f64)?;
        (t, p.min(1.0), mean_diff / sd_diff)
    };
    let (ci_low, ci_high) = confidence_interval_from_summary(mean_diff, sd_diff, n, level)?;

    Ok(PairedTestResult {
        n,
        mean_a,
        mean_b,
        sd_a,
        sd_b,
        mean_diff,
        sd_diff,
        t_value,
        df,
        p_two_sided,
        cohens_d,
        level,
        ci_low,
        ci_high,
    })
}

pub fn pearson_r(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: a.len(),
        });
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Lanczos approximation (g = 7, n = 9), good to ~1e-15 relative for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
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
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!("beta parameters must be positive ({a}, {b})")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("incomplete beta argument {x} outside [0, 1]")));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(x);
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    // The continued fraction converges fast for x < (a+1)/(a+b+2).
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_continued_fraction(a, b, x) / a)
    } else {
        Ok(1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b)
    }
}

/// Student-t CDF with `df` degrees of freedom (real-valued, `df >= 1`).
pub fn student_t_cdf(t: f64, df: f64) -> Result<f64> {
    if !(df >= 1.0) {
        return Err(Error::Domain(format!("degrees of freedom {df} below 1")));
    }
    if t.is_nan() {
        return Err(Error::Domain("t is NaN".into()));
    }
    if t.is_infinite() {
        return Ok(if t > 0.0 { 1.0 } else { 0.0 });
    }
    let x = df / (df + t * t);
    let tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, x)?;
    Ok(if t > 0.0 { 1.0 - tail } else { tail })
}

/// Inverse of [`student_t_cdf`] by bracketing bisection.
pub fn student_t_quantile(p: f64, df: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("probability {p} outside (0, 1)")));
    }
    if !(df >= 1.0) {
        return Err(Error::Domain(format!("degrees of freedom {df} below 1")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (-1.0, 1.0);
    while student_t_cdf(lo, df)? > p {
        lo *= 2.0;
    }
    while student_t_cdf(hi, df)? < p {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if student_t_cdf(mid, df)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments() {
        assert_eq!(mean_sd(&[4.0, 4.0, 4.0]).unwrap(), (4.0, 0.0));
        assert!(matches!(
            mean_sd(&[1.0]),
            Err(Error::InsufficientSamples { needed: 2, got: 1 })
        ));
        assert_eq!(rsd_percent(&[2.0, 2.0]).unwrap(), 0.0);
        assert!((rsd_percent(&[9.0, 10.0, 11.0]).unwrap() - 10.0).abs() < 1e-12);
        assert!(matches!(rsd_percent(&[-1.0, 1.0]), Err(Error::UndefinedRsd)));
    }

    #[test]
    fn t_cdf_closed_forms() {
        for df in [1.0, 2.0, 5.0, 18.0, 100.0] {
            assert_eq!(student_t_cdf(0.0, df).unwrap(), 0.5);
        }
        assert!((student_t_cdf(1.0, 1.0).unwrap() - 0.75).abs() < 1e-12);
        // df = 2: F(t) = 1/2 + t / (2 sqrt(2 + t^2))
        for t in [-3.0, -0.4, 0.9, 2.5] {
            let exact = 0.5 + t / (2.0 * (2.0f64 + t * t).sqrt());
            assert!((student_t_cdf(t, 2.0).unwrap() - exact).abs() < 1e-12);
        }
        assert!(student_t_cdf(1.0, 0.5).is_err());
    }

    #[test]
    fn ln_gamma_integers() {
        let mut fact = 1.0f64;
        for n in 1..20 {
            assert!((ln_gamma(n as f64) - fact.ln()).abs() < 1e-12, "n = {n}");
            fact *= n as f64;
        }
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
    }

    #[test]
    fn identical_pairs() {
        let a = [1.0, 2.0, 3.5];
        let r = paired_t_test(&a, &a, 0.95).unwrap();
        assert_eq!((r.t_value, r.p_two_sided, r.df), (0.0, 1.0, 2));
        assert_eq!((r.ci_low, r.ci_high), (0.0, 0.0));
    }

    #[test]
    fn input_errors() {
        assert!(matches!(
            paired_t_test(&[1.0, 2.0], &[1.0], 0.95),
            Err(Error::LengthMismatch(2, 1))
        ));
        assert!(paired_t_test(&[1.0], &[1.0], 0.95).is_err());
        assert!(paired_t_test(&[1.0, 2.0], &[1.0, 3.0], 1.0).is_err());
        assert!(matches!(
            pearson_r(&[1.0, 1.0], &[1.0, 2.0]),
            Err(Error::UndefinedCorrelation)
        ));
    }

    #[test]
    fn pearson_affine() {
        let a = [1.0, 2.0, 4.0, 8.0, 9.5];
        let b: Vec<f64> = a.iter().map(|x| 2.0 * x + 3.0).collect();
        assert!((pearson_r(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        assert!((pearson_r(&a, &neg).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn ci_zero_sd() {
        assert_eq!(confidence_interval(&[3.0, 3.0, 3.0], 0.9).unwrap(), (3.0, 3.0));
    }
}
