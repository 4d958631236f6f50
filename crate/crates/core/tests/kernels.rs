use ngkde::kernel::{
    gamma1_shape, gamma2_shape, gamma_pdf_log, gaussian_constants, gaussian_kernel, make_theta1, make_theta2,
    ng_alpha_shape, ng_pdf, GammaKernelParams, NgTheta,
};
use ngkde::quad::{gamma_upper_limit, integrate_adaptive, integrate_halfline};
use ngkde::Obs2;
use proptest::prelude::*;

const X2S: [f64; 4] = [0.0, 0.1, 1.0, 5.0];
const BS: [f64; 3] = [0.05, 0.3, 1.0];

#[test]
fn gaussian_constants_by_quadrature() {
    let (k2, k3) = gaussian_constants();
    let m2 = integrate_adaptive(|t| t * t * gaussian_kernel(t), -10.0, 10.0, 1e-13);
    let sq = integrate_adaptive(|t| gaussian_kernel(t).powi(2), -10.0, 10.0, 1e-13);
    assert!((m2 - k2).abs() < 1e-10);
    assert!((sq - k3).abs() < 1e-10);
}

#[test]
fn gamma_kernels_normalize_and_class1_mean() {
    for &x2 in &X2S {
        for &b in &BS {
            for p in [GammaKernelParams::class1(x2, b).unwrap(), GammaKernelParams::class2(x2, b).unwrap()] {
                let upper = gamma_upper_limit(p.shape, p.scale);
                let mass = integrate_halfline(|t| p.pdf(t).unwrap(), upper);
                assert!((mass - 1.0).abs() < 1e-6, "shape {} scale {}: {mass}", p.shape, p.scale);
            }
            let p = GammaKernelParams::class1(x2, b).unwrap();
            let mean = integrate_halfline(|t| t * p.pdf(t).unwrap(), gamma_upper_limit(p.shape, p.scale));
            assert!((mean - (x2 + b * b)).abs() < 1e-6);
            assert!((p.mean() - (x2 + b * b)).abs() < 1e-12);
        }
    }
}

fn ng_mass(theta: &NgTheta) -> f64 {
    let upper = gamma_upper_limit(theta.alpha, 1.0 / theta.beta);
    integrate_adaptive(
        |t2| {
            if t2 == 0.0 {
                return 0.0;
            }
            let sd = 1.0 / (theta.lambda * t2).sqrt();
            integrate_adaptive(|t1| ng_pdf(theta, t1, t2).unwrap(), theta.mu - 12.0 * sd, theta.mu + 12.0 * sd, 1e-12)
        },
        0.0,
        upper,
        1e-10,
    )
}

#[test]
fn ng_kernels_normalize_over_parameter_grid() {
    for &x1 in &[-2.0, 0.0, 1.5] {
        for &x2 in &X2S {
            for &(b1, b2) in &[(0.05, 0.05), (0.3, 0.1), (1.0, 1.0)] {
                let x = Obs2::new(x1, x2);
                for theta in [make_theta1(x, b1, b2).unwrap(), make_theta2(x, b1, b2).unwrap()] {
                    let m = ng_mass(&theta);
                    assert!((m - 1.0).abs() < 1e-6, "{theta:?}: {m}");
                }
            }
        }
    }
}

#[test]
fn shape_maps_monotone_and_knot_exact() {
    for &b in &BS {
        let mut prev2 = 0.0;
        let mut prev_a = 0.0;
        for k in 0..=4000 {
            let x2 = k as f64 * 1e-3 * b * b * 2.0;
            let r = gamma2_shape(x2, b).unwrap();
            let a = ng_alpha_shape(x2, b).unwrap();
            assert!(r >= prev2 && a >= prev_a);
            prev2 = r;
            prev_a = a;
        }
        assert!((gamma2_shape(2.0 * b * b, b).unwrap() - 2.0).abs() < 1e-15);
        assert!((ng_alpha_shape(3.0 * b, b).unwrap() - 3.0).abs() < 1e-15);
    }
    assert!(gamma1_shape(-1e-9, 1.0).is_err());
}

#[test]
fn log_space_is_safe_for_huge_shapes() {
    for &shape in &[1e3, 1e5, 1e6] {
        let scale = 1e-3;
        let v = gamma_pdf_log(shape, scale, shape * scale).unwrap();
        assert!(v.is_finite(), "shape {shape}: {v}");
        // peak of a gamma density with large shape is about 1 / (scale sqrt(2 pi shape))
        let approx = -(scale * (2.0 * std::f64::consts::PI * shape).sqrt()).ln();
        assert!((v - approx).abs() < 1e-3);
    }
}

proptest! {
    #[test]
    fn kernels_are_nonnegative_and_finite(
        x1 in -50.0f64..50.0, x2 in 0.0f64..50.0, t1 in -50.0f64..50.0, t2 in 0.0f64..50.0,
        b1 in 0.01f64..2.0, b2 in 0.01f64..2.0,
    ) {
        let x = Obs2::new(x1, x2);
        for theta in [make_theta1(x, b1, b2).unwrap(), make_theta2(x, b1, b2).unwrap()] {
            let v = ng_pdf(&theta, t1, t2).unwrap();
            prop_assert!(v >= 0.0 && v.is_finite());
        }
        for p in [GammaKernelParams::class1(x2, b1).unwrap(), GammaKernelParams::class2(x2, b1).unwrap()] {
            let v = p.pdf(t2).unwrap();
            prop_assert!(v >= 0.0 && v.is_finite());
        }
        prop_assert_eq!(gaussian_kernel(t1), gaussian_kernel(-t1));
    }

    #[test]
    fn shape_maps_nondecreasing(x2 in 0.0f64..10.0, dx in 0.0f64..1.0, b in 0.01f64..2.0) {
        prop_assert!(gamma2_shape(x2 + dx, b).unwrap() >= gamma2_shape(x2, b).unwrap());
        prop_assert!(ng_alpha_shape(x2 + dx, b).unwrap() >= ng_alpha_shape(x2, b).unwrap());
        prop_assert!(gamma2_shape(x2, b).unwrap() >= 1.0);
        prop_assert!(ng_alpha_shape(x2, b).unwrap() >= 2.0);
    }
}
