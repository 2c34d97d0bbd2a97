use std::f64::consts::PI;

use mvplc::cable_channel::{
    attenuation_matrix, build_rlgc, synthesize_channel, transfer_matrix, CableParams, MultipathProfile, PathTap,
};
use num_complex::Complex64;
use proptest::prelude::*;

/// Re sqrt(z) on the principal branch, written out without complex sqrt.
/// For `re < 0` it goes through the imaginary part to avoid cancellation.
fn re_sqrt(re: f64, im: f64) -> f64 {
    let m = re.hypot(im);
    if re >= 0.0 {
        ((m + re) / 2.0).sqrt()
    } else if im == 0.0 {
        0.0
    } else {
        im.abs() / (2.0 * ((m - re) / 2.0).sqrt())
    }
}

/// Element-wise attenuation from scratch for identical phases.
fn oracle_alpha(p: &CableParams, f: f64) -> [[f64; 3]; 3] {
    let w = 2.0 * PI * f;
    let r_phase = 0.5 * (PI * f * p.mu_c / p.sigma_c).sqrt();
    let ln = (p.spacing / p.radius).ln();
    let l_self = p.mu_0 / (2.0 * PI) * ln;
    let c_m = 4.0 * PI * p.eps_0;
    let c_g = 2.0 * PI * p.eps_0 / ln;
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, a) in row.iter_mut().enumerate() {
            let (r, l, c) = if i == j {
                (r_phase + p.ground_resistance, l_self, c_g + 2.0 * c_m)
            } else {
                (p.ground_resistance, p.coupling * l_self, -c_m)
            };
            let g = w * p.tan_delta * c;
            // (r + jwl)(g + jwc)
            let zr = r * g - w * l * w * c;
            let zi = r * w * c + w * l * g;
            *a = re_sqrt(zr, zi);
        }
    }
    out
}

fn cable_strategy() -> impl Strategy<Value = (CableParams, f64)> {
    (
        0.5f64..2.0,
        0.5f64..2.0,
        0.01f64..0.05,
        0.001f64..0.004,
        1.5f64..4.0,
        1e-4f64..1e-2,
        0.0f64..=1.0,
        0.0f64..1e-3,
        1e5f64..1e7,
    )
        .prop_map(|(mu, sig, d, r, eps_r, tan, k, r0, f)| {
            (
                CableParams {
                    mu_c: mu * 4e-7 * PI,
                    sigma_c: sig * 5.882e7,
                    spacing: d,
                    mu_0: 4e-7 * PI,
                    eps_0: eps_r / (36.0 * PI * 1e9),
                    radius: r,
                    tan_delta: tan,
                    coupling: k,
                    ground_resistance: r0,
                },
                f,
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn attenuation_matches_oracle((p, f) in cable_strategy()) {
        let a = attenuation_matrix(&build_rlgc(&p, f).unwrap());
        let o = oracle_alpha(&p, f);
        for i in 0..3 {
            for j in 0..3 {
                let rel = (a[(i, j)] - o[i][j]).abs() / o[i][j].abs().max(1e-300);
                prop_assert!(rel <= 1e-12, "({i},{j}) {} vs {}", a[(i, j)], o[i][j]);
            }
        }
    }

    #[test]
    fn transfer_matches_direct_sum((p, f) in cable_strategy(), mut lengths in prop::collection::vec(100.0f64..3000.0, 1..5)) {
        lengths.sort_by(f64::total_cmp);
        let gains: Vec<f64> = (0..lengths.len()).map(|i| 0.8f64.powi(i as i32)).collect();
        let prof = MultipathProfile::from_lengths(&p, &gains, &lengths).unwrap();
        let h = transfer_matrix(&p, &prof, f).unwrap();
        let o = oracle_alpha(&p, f);
        let v = 1.0 / (p.mu_0 * p.eps_0).sqrt();
        for i in 0..3 {
            for j in 0..3 {
                let mut want = Complex64::new(0.0, 0.0);
                for (g, d) in gains.iter().zip(&lengths) {
                    let phase = -2.0 * PI * f * d / v;
                    want += Complex64::new(phase.cos(), phase.sin()) * (g * (-o[i][j] * d).exp());
                }
                prop_assert!((h[(i, j)] - want).norm() <= 1e-9 * want.norm().max(1e-12));
            }
        }
        // reciprocity
        prop_assert_eq!(h, h.transpose());
    }

    #[test]
    fn single_path_magnitude_decreases_with_length(f in 1e5f64..1e7, d in 10.0f64..5000.0) {
        let p = CableParams::default();
        let mag = |len: f64| {
            let prof = MultipathProfile::new(vec![PathTap { gain: 1.0, length: len, delay: 0.0 }]).unwrap();
            transfer_matrix(&p, &prof, f).unwrap()[(0, 0)].norm()
        };
        prop_assert!(mag(2.0 * d) < mag(d));
        prop_assert!(mag(d) <= 1.0);
    }
}

#[test]
fn off_diagonal_attenuation_follows_coupling() {
    // Element-wise, alpha_ij ~ w sqrt(k l c_m) off the diagonal: stronger
    // coupling means larger attenuation, and k = 0 with r_0 = 0 means none.
    let alpha = |k: f64| {
        let p = CableParams { coupling: k, ..CableParams::default() };
        attenuation_matrix(&build_rlgc(&p, 2e6).unwrap())[(0, 1)]
    };
    assert_eq!(alpha(0.0), 0.0);
    assert!(alpha(0.3) < alpha(0.8));
    let w = 2.0 * PI * 2e6;
    let p = CableParams::default();
    let approx = w * (0.3 * p.self_inductance() * p.mutual_capacitance()).sqrt();
    assert!((alpha(0.3) / approx - 1.0).abs() < 1e-3);
}

#[test]
fn channel_grid_and_power() {
    let p = CableParams::default();
    let prof = MultipathProfile::default_four_path(&p);
    let ch = synthesize_channel(&p, &prof, (3e6, 5e6), 1024).unwrap();
    assert_eq!(ch.len(), 1024);
    assert_eq!(ch.freqs[0], 3e6);
    assert!(ch.freqs[1023] < 5e6);
    let bound = prof.gain_bound();
    for m in &ch.h {
        for z in m.iter() {
            assert!(z.norm() <= bound + 1e-12);
        }
    }
    let pw = ch.mean_rx_power();
    assert!(pw > 0.0 && pw <= bound * bound * 3.0);
}
