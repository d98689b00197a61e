use super::{Interval, Tolerance};
use crate::error::{Error, Result};

/// Bisection on a sign-changing bracket.
///
/// Stops when `|f(x)| <= abs_tol` or when the bracket has shrunk below
/// `rel_tol * |x|`. Deterministic: the same inputs always take the same
/// path.
pub fn find_root<F>(mut f: F, bracket: Interval, tol: &Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut lo, mut hi) = (bracket.lo(), bracket.hi());
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo.signum() != f_hi.signum()) || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }
    let lo_negative = f_lo < 0.0;

    for _ in 0..tol.max_iter() {
        let mid = lo + 0.5 * (hi - lo);
        let f_mid = f(mid);
        if f_mid.abs() <= tol.abs_tol() {
            return Ok(mid);
        }
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if (f_mid < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol.rel_tol() * mid.abs() {
            return Ok(lo + 0.5 * (hi - lo));
        }
    }
    Err(Error::Convergence {
        iterations: tol.max_iter(),
        lo,
        hi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::e1;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn linear() {
        let x = find_root(|x| x - 2.0, Interval::new(0.0, 5.0).unwrap(), &tol()).unwrap();
        assert!((x - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_inverse() {
        let x = find_root(|x| (-x).exp() - 0.5, Interval::new(0.0, 2.0).unwrap(), &tol()).unwrap();
        assert!((x - std::f64::consts::LN_2).abs() < 1e-11);
    }

    #[test]
    fn inverts_e1() {
        let x = find_root(|x| e1(x) - 0.2193839, Interval::new(0.5, 2.0).unwrap(), &tol()).unwrap();
        assert!((x - 1.0).abs() < 1e-6, "{x}");
    }

    #[test]
    fn image_within_abs_tol() {
        let t = Tolerance::new(1e-10, 1e-14, 200).unwrap();
        for c in [0.1, 1.0, 3.0, 10.0] {
            let x = find_root(|x| x.powi(3) - c, Interval::new(0.0, 5.0).unwrap(), &t).unwrap();
            assert!((x.powi(3) - c).abs() <= 1e-10, "c = {c}");
        }
    }

    #[test]
    fn no_sign_change() {
        let err = find_root(|x| x * x + 1.0, Interval::new(-1.0, 1.0).unwrap(), &tol()).unwrap_err();
        assert!(matches!(err, Error::Bracket { .. }));
    }

    #[test]
    fn iteration_cap_reports_bracket() {
        let t = Tolerance::new(1e-15, 1e-15, 5).unwrap();
        match find_root(|x| x - 0.3, Interval::new(0.0, 1.0).unwrap(), &t) {
            Err(Error::Convergence { iterations, lo, hi }) => {
                assert_eq!(iterations, 5);
                assert!(lo <= 0.3 && 0.3 <= hi);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }
}
