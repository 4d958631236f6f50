//! Adaptive Gauss-Kronrod (7/15) quadrature used by normalization checks
//! and theory diagnostics.

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
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Integral of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// The interval is pre-split into 64 panels so that narrow peaks far from
/// the panel midpoints are still sampled, then panels are bisected until
/// their Gauss/Kronrod discrepancy is below their share of `tol`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    const PANELS: usize = 64;
    const MAX_DEPTH: u32 = 40;
    let width = (b - a) / PANELS as f64;
    let mut total = 0.0;
    let mut stack: Vec<(f64, f64, u32)> =
        (0..PANELS).rev().map(|i| (a + i as f64 * width, a + (i + 1) as f64 * width, 0)).collect();
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, err) = gk15(&f, lo, hi);
        let share = tol * (hi - lo) / (b - a);
        if err <= share.max(f64::EPSILON * v.abs()) || depth >= MAX_DEPTH {
            total += v;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    total
}

/// Integral over `[0, upper]` at absolute tolerance 1e-10.
pub fn integrate_halfline<F: Fn(f64) -> f64>(f: F, upper: f64) -> f64 {
    integrate_adaptive(f, 0.0, upper, 1e-10)
}

/// Upper integration limit beyond which a gamma(shape, scale) density has
/// tail mass below 1e-10.
pub fn gamma_upper_limit(shape: f64, scale: f64) -> f64 {
    (shape + 30.0 * shape.sqrt() + 30.0) * scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_exponential() {
        let v = integrate_adaptive(|x| x * x, 0.0, 3.0, 1e-12);
        assert!((v - 9.0).abs() < 1e-12);
        let v = integrate_adaptive(|x: f64| (-x).exp(), 0.0, 40.0, 1e-12);
        assert!((v - (1.0 - (-40f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn narrow_peak() {
        let s: f64 = 1e-2;
        let v = integrate_adaptive(
            |x: f64| (-(x - 7.3).powi(2) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt()),
            0.0,
            20.0,
            1e-10,
        );
        assert!((v - 1.0).abs() < 1e-8, "{v}");
    }
}
