//! Values computed independently at 30 digits and frozen here.

#![allow(clippy::excessive_precision)]

use affine_spectra_core::exponent::{gammas, HorizonOptions, Side};
use affine_spectra_core::spectrum::{beta, beta_star};
use affine_spectra_core::*;

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b}");
}

#[test]
fn skew_takagi_case_b_constants() {
    let c = compute_constants(&preset("skew-takagi:0.3,0.5,0.25").unwrap()).unwrap();
    assert_eq!(c.regime, Regime::CaseB);
    close(c.sigma.unwrap(), 1.429_684_720_071_287_5, 1e-10);
    close(c.alpha0.unwrap(), 1.373_176_774_171_910_3, 1e-10);
    close(c.alpha_min, 1.151_433_284_986_890_0, 1e-12);
    close(c.alpha_max, 3.886_716_419_749_463_8, 1e-12);
    close(c.s_hat, 1.0, 1e-12);
    close(c.alpha_hat, 2.269_398_222_250_865_0, 1e-10);
    close(beta(&c, 1.0), -0.813_614_667_179_338_96, 1e-10);
}

#[test]
fn riesz_nagy_scaling_function() {
    let c = compute_constants(&preset("riesz-nagy:0.3").unwrap()).unwrap();
    close(beta(&c, 2.0), -0.785_875_194_647_152_58, 1e-10);
    close(beta(&c, 0.0), 1.0, 1e-12);
    // The Lebesgue-typical exponent is where beta* reaches 1.
    close(c.alpha_hat, 1.125_769_383_497_982_2, 1e-12);
    close(beta_star(&c, c.alpha_hat).unwrap(), 1.0, 1e-9);
}

#[test]
fn okamoto_scaling_function() {
    let c = compute_constants(&preset("okamoto:0.6").unwrap()).unwrap();
    close(beta(&c, 2.0), -0.249_803_182_189_478_99, 1e-10);
}

#[test]
fn riesz_nagy_periodic_exponents() {
    let expect = [(0.2, 1.321_928_094_887_362_3), (0.3, 1.125_769_383_497_982_2), (0.4, 1.029_446_844_526_784_3)];
    for (a, v) in expect {
        let c = compute_constants(&preset(&format!("riesz-nagy:{a}")).unwrap()).unwrap();
        let g = gammas(&c, &Coding::periodic(vec![1, 2]), Side::Right, HorizonOptions::default()).unwrap();
        close(g.gamma, v, 1e-12);
    }
}

#[test]
fn parabola_and_cantor_values() {
    let t = preset("takagi:2").unwrap();
    for x in [0.125, 0.3, 0.5, 0.9] {
        close(evaluate(&t, x, 1e-13).unwrap().value, 2.0 * x * (1.0 - x), 1e-12);
    }
    let c = preset("okamoto:0.5").unwrap();
    close(evaluate(&c, 0.5, 1e-13).unwrap().value, 0.5, 1e-13);
    close(evaluate(&c, 0.75, 1e-13).unwrap().value, 2.0 / 3.0, 1e-6);
}
