//! Logit route choice.

use crate::error::{Error, Result};

/// Writes logit choice probabilities for `times` into `out`.
///
/// Times are shifted by their minimum before exponentiating; the logit is
/// invariant under a common shift so the result is unchanged while the
/// exponentials stay in range.
pub(crate) fn logit_into(times: &[f64], theta: f64, out: &mut [f64]) {
    debug_assert_eq!(times.len(), out.len());
    let min = times.iter().copied().fold(f64::INFINITY, f64::min);
    let mut sum = 0.0;
    for (p, &t) in out.iter_mut().zip(times) {
        *p = (-theta * (t - min)).exp();
        sum += *p;
    }
    for p in out.iter_mut() {
        *p /= sum;
    }
}

/// Probability of choosing each path given its travel time, with dispersion
/// `theta`.
pub fn logit_split(times: &[f64], theta: f64) -> Result<Vec<f64>> {
    if times.is_empty() {
        return Err(Error::EmptyInput("path time list"));
    }
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::InvalidParams {
            name: "theta",
            reason: format!("must be positive, got {theta}"),
        });
    }
    if let Some(bad) = times.iter().find(|t| !t.is_finite()) {
        return Err(Error::InvalidAttribute {
            what: "path time",
            value: *bad,
        });
    }
    let mut out = vec![0.0; times.len()];
    logit_into(times, theta, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_times_split_evenly() {
        let p = logit_split(&[7.0, 7.0, 7.0], 0.3).unwrap();
        for x in p {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn shift_invariant() {
        let a = logit_split(&[10.0, 20.0], 0.3).unwrap();
        let b = logit_split(&[110.0, 120.0], 0.3).unwrap();
        assert!((a[0] - b[0]).abs() < 1e-15 && (a[1] - b[1]).abs() < 1e-15);
    }

    #[test]
    fn braess_base_times() {
        // exp(-0.3 * 23.1) evaluated directly
        let e = (-0.3f64 * 23.1).exp();
        let expected = [1.0 / (1.0 + 2.0 * e), e / (1.0 + 2.0 * e), e / (1.0 + 2.0 * e)];
        let p = logit_split(&[168.8, 191.9, 191.9], 0.3).unwrap();
        for (x, y) in p.iter().zip(expected) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((p[0] - 0.99805).abs() < 1e-5);
        assert!((p[1] - 0.00098).abs() < 1e-5);
    }

    #[test]
    fn huge_times_do_not_underflow() {
        let p = logit_split(&[1e6, 1e6 + 1.0], 0.3).unwrap();
        assert!((p[0] + p[1] - 1.0).abs() < 1e-15);
        assert!(p[0] > p[1]);
    }

    #[test]
    fn errors() {
        assert!(logit_split(&[], 0.3).is_err());
        assert!(logit_split(&[1.0], 0.0).is_err());
        assert!(logit_split(&[f64::NAN], 0.3).is_err());
    }
}
