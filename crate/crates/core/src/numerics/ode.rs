use crate::error::{Error, Result};

/// One classical fourth-order Runge-Kutta step of `d state / dy = f(y, state)`.
pub fn rk4_step<const D: usize, F>(f: F, y: f64, state: &[f64; D], h: f64) -> Result<[f64; D]>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    if !(h > 0.0) {
        return Err(crate::error::invalid(format!(
            "step must be positive, got {h}"
        )));
    }
    let eval = |y: f64, s: &[f64; D]| -> Result<[f64; D]> {
        let d = f(y, s);
        if d.iter().all(|v| v.is_finite()) {
            Ok(d)
        } else {
            Err(Error::NonFinite("rk4 derivative"))
        }
    };
    let offset = |base: &[f64; D], k: &[f64; D], c: f64| -> [f64; D] {
        let mut out = *base;
        for (o, ki) in out.iter_mut().zip(k) {
            *o += c * ki;
        }
        out
    };
    let k1 = eval(y, state)?;
    let k2 = eval(y + 0.5 * h, &offset(state, &k1, 0.5 * h))?;
    let k3 = eval(y + 0.5 * h, &offset(state, &k2, 0.5 * h))?;
    let k4 = eval(y + h, &offset(state, &k3, h))?;
    let mut out = *state;
    for i in 0..D {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// Bisection for a sign change of `f` on `[lo, hi]`, stopping once the
/// bracket is narrower than `tol`. Returns the bracket midpoint.
pub fn bisect_event(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(crate::error::invalid(format!(
            "bisection tolerance must be positive, got {tol}"
        )));
    }
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let fb = f(b);
    if !fa.is_finite() || !fb.is_finite() {
        return Err(Error::NonFinite("bisection endpoint"));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_step(h: f64) -> f64 {
        rk4_step(|_, s: &[f64; 1]| [s[0]], 0.0, &[1.0], h).unwrap()[0]
    }

    #[test]
    fn zero_derivative_leaves_state() {
        let s = rk4_step(|_, _: &[f64; 2]| [0.0, 0.0], 0.3, &[1.5, -2.0], 0.1).unwrap();
        assert_eq!(s, [1.5, -2.0]);
    }

    #[test]
    fn exponential_one_step() {
        let err = (exp_step(0.1) - 0.1f64.exp()).abs();
        // local error of RK4 on y' = y is h^5/120 to leading order
        assert!(err < 0.1f64.powi(5) / 120.0 * 1.2, "{err}");
        assert!(err > 0.1f64.powi(5) / 120.0 * 0.8, "{err}");
    }

    #[test]
    fn halving_step_gives_fifth_order_local_error() {
        let e1 = (exp_step(0.1) - 0.1f64.exp()).abs();
        let e2 = (exp_step(0.05) - 0.05f64.exp()).abs();
        let ratio = e1 / e2;
        assert!((ratio - 32.0).abs() < 2.0, "{ratio}");
    }

    #[test]
    fn global_error_is_fourth_order() {
        // y' = -2 t y on [0, 1], y(0) = 1  => y = exp(-t^2)
        let run = |n: usize| {
            let h = 1.0 / n as f64;
            let mut s = [1.0];
            for i in 0..n {
                s = rk4_step(|t, s: &[f64; 1]| [-2.0 * t * s[0]], i as f64 * h, &s, h).unwrap();
            }
            (s[0] - (-1.0f64).exp()).abs()
        };
        let errs: Vec<f64> = [10, 20, 40, 80].iter().map(|&n| run(n)).collect();
        for w in errs.windows(2) {
            let slope = (w[0] / w[1]).log2();
            assert!((slope - 4.0).abs() < 0.2, "slope {slope}");
        }
    }

    #[test]
    fn non_finite_derivative_is_reported() {
        let r = rk4_step(|_, _: &[f64; 1]| [f64::NAN], 0.0, &[1.0], 0.1);
        assert_eq!(r, Err(Error::NonFinite("rk4 derivative")));
    }

    #[test]
    fn bisection_finds_roots() {
        let r = bisect_event(|y| y - 0.5, 0.0, 1.0, 1e-12).unwrap();
        assert!((r - 0.5).abs() <= 1e-12);
        let r = bisect_event(|y| y * y - 2.0, 1.0, 2.0, 1e-12).unwrap();
        assert!((r - 2f64.sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn bisection_rejects_missing_sign_change_and_bad_tol() {
        assert!(matches!(
            bisect_event(|_| 1.0, 0.0, 1.0, 1e-6),
            Err(Error::NoSignChange { .. })
        ));
        assert!(bisect_event(|y| y, -1.0, 1.0, 0.0).is_err());
    }
}
