use super::Tolerance;
use crate::error::{Error, Result};

// 15-point Kronrod abscissae and weights, with the embedded 7-point Gauss
// weights on the odd Kronrod nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut res_g = f_center * WG[3];
    let mut res_k = f_center * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment { a, b, value, error }
}

/// Adaptive 15-point Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// The interval with the largest error estimate is bisected until the
/// summed estimate drops below `max(abs_tol, rel_tol·|I|)`; more than
/// `max_iter` subintervals is an accuracy error.
pub fn integrate<F>(mut f: F, a: f64, b: f64, tol: &Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Argument(format!("finite limits required, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut segments = vec![kronrod15(&mut f, a, b)];
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if !value.is_finite() {
            return Err(Error::Accuracy {
                estimate: value,
                error,
                intervals: segments.len(),
            });
        }
        if error <= tol.abs_tol().max(tol.rel_tol() * value.abs()) {
            return Ok(value);
        }
        if segments.len() >= tol.max_iter() {
            return Err(Error::Accuracy {
                estimate: value,
                error,
                intervals: segments.len(),
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Cannot split further in floating point.
            return Err(Error::Accuracy {
                estimate: value,
                error,
                intervals: segments.len() + 1,
            });
        }
        segments.push(kronrod15(&mut f, seg.a, mid));
        segments.push(kronrod15(&mut f, mid, seg.b));
    }
}

/// `∫_a^∞ f(t) dt` for integrands with exponential decay.
///
/// Maps `t = a + (1 - s)/s` onto `s ∈ (0, 1]` and integrates the
/// transformed integrand `f(t)/s²` adaptively. Kronrod nodes never touch
/// `s = 0`.
pub fn integrate_semi_infinite<F>(mut f: F, a: f64, tol: &Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !a.is_finite() {
        return Err(Error::Argument(format!("finite lower limit required, got {a}")));
    }
    integrate(
        |s| {
            let t = a + (1.0 - s) / s;
            let v = f(t);
            if v == 0.0 {
                0.0
            } else {
                v / (s * s)
            }
        },
        0.0,
        1.0,
        tol,
    )
}
