use std::f64::consts::PI;

use num_complex::Complex64;
use su11_core::jsf::*;

fn local_maxima(v: &[f64]) -> Vec<usize> {
    (1..v.len() - 1).filter(|&k| v[k] > v[k - 1] && v[k] > v[k + 1]).collect()
}

fn two_gaussian_ridge(n: usize, half: f64, s_plus: f64, s_minus: f64) -> JsfGrid {
    let ax = uniform_axis(n, half).unwrap();
    JsfGrid::from_fn(ax.clone(), ax, |ws, wi| {
        let p = ws + wi;
        let m = ws - wi;
        Complex64::new((-p * p / (2.0 * s_plus * s_plus) - m * m / (2.0 * s_minus * s_minus)).exp(), 0.0)
    })
    .unwrap()
    .normalized()
    .unwrap()
}

#[test]
fn factorable_function_has_unit_schmidt_number() {
    let ax = uniform_axis(121, 5.0).unwrap();
    let j = JsfGrid::from_fn(ax.clone(), ax, |ws, wi| {
        Complex64::new((-ws * ws).exp(), 0.0) * Complex64::from_polar((-(wi - 0.5).powi(2) / 3.0).exp(), 0.3 * wi.sin())
    })
    .unwrap()
    .normalized()
    .unwrap();
    let k = schmidt_analysis(&j).unwrap().schmidt_number;
    assert!((k - 1.0).abs() < 1e-6, "K = {k}");
}

#[test]
fn ridge_schmidt_number_matches_two_gaussian_formula() {
    let j = two_gaussian_ridge(201, 5.0, 0.1, 1.0);
    let k = schmidt_analysis(&j).unwrap().schmidt_number;
    assert!((k - 5.05).abs() / 5.05 < 1e-2, "K = {k}");
    let fine = two_gaussian_ridge(401, 5.0, 0.1, 1.0);
    let k2 = schmidt_analysis(&fine).unwrap().schmidt_number;
    assert!((k2 - k).abs() / k < 1e-2);
}

#[test]
fn broadband_ridge_is_multimode_and_anti_diagonal() {
    let ax = uniform_axis(121, 6.0).unwrap();
    let j = jsf_single(&ax, &ax, 0.3, &MismatchModel::Broadband).unwrap();
    for r in 0..ax.len() {
        for c in 0..ax.len() {
            // depends only on Ωs+Ωi, and is exchange symmetric
            let mirror = j.amp()[(ax.len() - 1 - c, ax.len() - 1 - r)];
            assert!((j.amp()[(r, c)] - mirror).norm() < 1e-12);
            assert!((j.amp()[(r, c)] - j.amp()[(c, r)]).norm() < 1e-12);
        }
    }
    assert!(schmidt_analysis(&j).unwrap().schmidt_number > 10.0);
}

#[test]
fn symmetric_mismatch_keeps_exchange_symmetry() {
    let ax = uniform_axis(81, 4.0).unwrap();
    let m = MismatchModel::Linear { k_s: 0.7, k_i: 0.7, length: 2.0 };
    let j = jsf_single(&ax, &ax, 1.0, &m).unwrap();
    assert!((&j.amp().transpose() - j.amp()).norm() < 1e-12);
    let ax = uniform_axis(161, 4.0).unwrap();
    let k = schmidt_analysis(&j).unwrap().schmidt_number;
    let k2 = schmidt_analysis(&jsf_single(&ax, &ax, 1.0, &m).unwrap()).unwrap().schmidt_number;
    assert!((k2 - k).abs() / k < 1e-2);
}

#[test]
fn equal_gain_interference_factor() {
    for n in [2usize, 3, 5] {
        let g = 0.05;
        let gains = vec![g; n];
        for k in 0..10_000 {
            let theta = 1e-3 + (2.0 * PI - 2e-3) * k as f64 / 9_999.0;
            let expected = g * ((n as f64 * theta / 2.0).sin() / (theta / 2.0).sin()).abs();
            assert!((stage_gain_total(theta, &gains).norm() - expected).abs() < 1e-12);
        }
        assert!((stage_gain_total(0.0, &gains).norm() - n as f64 * g).abs() < 1e-15);
    }
}

#[test]
fn binomial_apodization_is_monotone() {
    for n in [3usize, 4, 6] {
        let gains = binomial_lengths(n, 1.0).unwrap();
        let mut last = f64::INFINITY;
        for k in 1..10_000 {
            let theta = PI * k as f64 / 10_000.0;
            let v = stage_gain_total(theta, &gains).norm();
            let expected = 2f64.powi(n as i32 - 1) * (theta / 2.0).cos().powi(n as i32 - 1);
            assert!((v - expected).abs() < 1e-12);
            if expected > 1e-10 {
                assert!(v < last);
            }
            last = v;
        }
        let full: Vec<f64> = (0..=4000).map(|k| stage_gain_total(2.0 * PI * k as f64 / 4000.0, &gains).norm()).collect();
        // ignore round-off ripples around the zero at θ = π
        assert!(local_maxima(&full).iter().all(|&k| full[k] < 1e-9), "interior maxima for N={n}");
    }
}

fn island_design(gains: Vec<f64>) -> StageSpec {
    StageSpec { gains, beta: 1.0, l_dm: 1.0, sigma_p: 0.02 }
}

#[test]
fn multistage_factorises_pointwise() {
    let ax = uniform_axis(61, 3.0).unwrap();
    let spec = StageSpec { gains: vec![0.1, 0.2, 0.05], beta: 0.7, l_dm: 1.3, sigma_p: 0.5 };
    let model = MismatchModel::Linear { k_s: 0.4, k_i: -0.2, length: 1.0 };
    let single = jsf_single_raw(&ax, &ax, spec.sigma_p, &model).unwrap();
    let multi = jsf_multistage_raw(&ax, &ax, &spec, &model).unwrap();
    for r in 0..ax.len() {
        for c in 0..ax.len() {
            let theta = dispersion_phase(ax[r], ax[c], spec.beta, spec.l_dm);
            let expected = single.amp()[(r, c)] * stage_gain_total(theta, &spec.gains) / spec.reference_gain();
            assert!((multi.amp()[(r, c)] - expected).norm() < 1e-12);
        }
    }
    let one = StageSpec { gains: vec![0.1], ..spec };
    let a = jsf_multistage(&ax, &ax, &one, &model).unwrap();
    let b = jsf_single(&ax, &ax, one.sigma_p, &model).unwrap();
    assert!((a.amp() - b.amp()).norm() < 1e-12);
}

#[test]
fn marginal_is_normalised_and_single_stage_is_smooth() {
    let ax = uniform_axis(301, 3.0).unwrap();
    let j = jsf_single(&ax, &ax, 0.02, &MismatchModel::Linear { k_s: 1.0, k_i: -1.0, length: 0.5 }).unwrap();
    let m = marginal_intensity(&j).unwrap();
    let total: f64 = m.iter().sum::<f64>() * j.d_omega_s();
    assert!((total - 1.0).abs() < 1e-9);
    assert_eq!(local_maxima(&m).len(), 1);
}

#[test]
fn two_stage_marginal_shows_fringes() {
    let ax = uniform_axis(301, 3.0).unwrap();
    let j = jsf_multistage(&ax, &ax, &island_design(vec![0.1, 0.1]), &MismatchModel::Broadband).unwrap();
    let m = marginal_intensity(&j).unwrap();
    // central island and the first dark fringe at 4Ωs² = π
    let centre = ax.iter().position(|w| w.abs() < 1e-12).unwrap();
    let edge = ax.iter().position(|&w| w > (PI / 4.0).sqrt() + 0.2).unwrap();
    let max = m[centre..edge].iter().cloned().fold(f64::MIN, f64::max);
    let min = m[centre..edge].iter().cloned().fold(f64::MAX, f64::min);
    let visibility = (max - min) / (max + min);
    assert!(visibility > 0.9, "visibility {visibility}");
    assert!(local_maxima(&m).len() > 3);
}

#[test]
fn five_stage_islands_have_three_secondary_peaks() {
    let ax = uniform_axis(601, 1.5).unwrap();
    let j = jsf_multistage(&ax, &ax, &island_design(vec![0.05; 5]), &MismatchModel::Broadband).unwrap();
    let m = marginal_intensity(&j).unwrap();
    // main islands at θ = 4Ωs² = 0 and 2π
    let next = (PI / 2.0).sqrt();
    let inner: Vec<usize> = local_maxima(&m)
        .into_iter()
        .filter(|&k| ax[k] > 0.05 && ax[k] < next - 0.05)
        .collect();
    assert_eq!(inner.len(), 3, "peaks at {:?}", inner.iter().map(|&k| ax[k]).collect::<Vec<_>>());
}

#[test]
fn binomial_three_stage_marginal_has_no_secondary_peaks() {
    let ax = uniform_axis(601, 1.5).unwrap();
    let gains: Vec<f64> = binomial_lengths(3, 0.05).unwrap();
    let j = jsf_multistage(&ax, &ax, &island_design(gains), &MismatchModel::Broadband).unwrap();
    let m = marginal_intensity(&j).unwrap();
    let next = (PI / 2.0).sqrt();
    let inner = local_maxima(&m).into_iter().filter(|&k| ax[k] > 0.05 && ax[k] < next - 0.05).count();
    assert_eq!(inner, 0);
}

#[test]
fn filtering_the_central_island_lowers_schmidt_number() {
    let ax = uniform_axis(201, 3.0).unwrap();
    let spec = StageSpec { gains: vec![0.1, 0.1], beta: 1.0, l_dm: 1.0, sigma_p: 0.3 };
    let j = jsf_multistage(&ax, &ax, &spec, &MismatchModel::Broadband).unwrap();
    let k_full = schmidt_analysis(&j).unwrap().schmidt_number;
    let half = (PI / 4.0).sqrt();
    let filtered = filter_box(&j, (-half, half), (-half, half)).unwrap();
    let k_island = schmidt_analysis(&filtered).unwrap().schmidt_number;
    assert!(k_island < k_full, "{k_island} vs {k_full}");
    let same = filter_box(&j, (-3.0, 3.0), (-3.0, 3.0)).unwrap();
    assert!((same.amp() - j.amp()).norm() < 1e-12);
    // grid refinement
    let ax2 = uniform_axis(401, 3.0).unwrap();
    let j2 = jsf_multistage(&ax2, &ax2, &spec, &MismatchModel::Broadband).unwrap();
    let k2 = schmidt_analysis(&j2).unwrap().schmidt_number;
    assert!((k2 - k_full).abs() / k_full < 1e-2, "{k_full} -> {k2}");
    let f2 = schmidt_analysis(&filter_box(&j2, (-half, half), (-half, half)).unwrap()).unwrap().schmidt_number;
    assert!((f2 - k_island).abs() / k_island < 1e-2, "{k_island} -> {f2}");
}
