use super::*;
use crate::processes::{Limits, ProcessSpec, RngStream};
use crate::scores::{CliqueCount, Constant, EdgeLength};

fn replicate(
    spec: &ProcessSpec,
    volume: f64,
    margin: f64,
    reps: u64,
    seed: u64,
) -> Vec<PointConfiguration<f64>> {
    let w = Window::new(volume, 2).unwrap();
    (0..reps)
        .map(|i| {
            spec.sample(&w, margin, RngStream::new(seed, i), &Limits::default())
                .unwrap()
        })
        .collect()
}

fn within(x: f64, want: f64, se: f64, k: f64) -> bool {
    (x - want).abs() <= k * se
}

#[test]
fn poisson_constant_profile_is_flat() {
    let cfgs = replicate(&ProcessSpec::Poisson { intensity: 1.0 }, 400.0, 0.0, 200, 1);
    let est = estimate_m2_radial(&Constant { value: 1.0 }, &cfgs, 0.0, 0.25, 4.0).unwrap();
    assert!(est.empty_bins().is_empty());
    for b in &est.bins {
        assert!(
            within(b.m2, 1.0, b.stderr, 3.0),
            "bin {} m2 {} se {}",
            b.s_mid,
            b.m2,
            b.stderr
        );
    }
    let s = sigma_sq_plugin(&est).unwrap();
    assert!(within(s.value, 1.0, s.stderr, 3.0), "{s:?}");
    let g = sigma_sq_surface(&est).unwrap();
    assert!(within(g.value, 0.0, g.stderr, 3.0), "{g:?}");
}

#[test]
fn poisson_first_moments() {
    let r: f64 = 0.5;
    let cfgs = replicate(&ProcessSpec::Poisson { intensity: 1.0 }, 400.0, 1.5, 200, 2);
    let m = estimate_m1(&EdgeLength { r }, &cfgs, r).unwrap();
    let want = std::f64::consts::PI / 24.0;
    assert!(within(m.value, want, m.stderr, 3.0), "{m:?} vs {want}");
    // Čech edges join points within 2r
    let c = estimate_m1(&CliqueCount::new(2, r).unwrap(), &cfgs, 2.0 * r).unwrap();
    let want = 2.0 * std::f64::consts::PI * r * r;
    assert!(within(c.value, want, c.stderr, 3.0), "{c:?} vs {want}");
    let one = estimate_m1(&Constant { value: 1.0 }, &cfgs, 0.0).unwrap();
    assert!(within(one.value, 1.0, one.stderr, 3.0));
    assert!(matches!(
        estimate_m1(&Constant { value: 1.0 }, &cfgs[..10], 0.0),
        Err(MomentsError::InsufficientReplicates { got: 10, need: 30 })
    ));
}

#[test]
fn ginibre_profile_and_variances() {
    let cfgs = replicate(&ProcessSpec::Ginibre, 64.0, 0.0, 300, 3);
    let est = estimate_m2_radial(&Constant { value: 1.0 }, &cfgs, 0.0, 0.1, 3.0).unwrap();
    for b in est.bins.iter().filter(|b| b.s_mid >= 0.2) {
        let g = 1.0 - (-std::f64::consts::PI * b.s_mid * b.s_mid).exp();
        assert!(
            within(b.m2, g, b.stderr, 3.5),
            "s {} m2 {} g {g} se {}",
            b.s_mid,
            b.m2,
            b.stderr
        );
        if b.s_mid >= 0.5 {
            assert!(
                (b.m2 - g).abs() < 0.05 * g,
                "s {} m2 {} g {g}",
                b.s_mid,
                b.m2
            );
        }
    }
    // σ²(1) = 1 − ∫e^{−π|x|²} = 0 in intensity-one units
    let s = sigma_sq_plugin(&est).unwrap();
    assert!(s.value.abs() < 0.1, "{s:?}");
    // σ²(1,γ) = ∫ e^{−π|x|²}(|x₁|+|x₂|) dx by a polar quadrature oracle
    let mut oracle = 0.0;
    let n = 4000;
    for i in 0..n {
        let rho = (i as f64 + 0.5) * 6.0 / n as f64;
        oracle += (-std::f64::consts::PI * rho * rho).exp() * rho * rho * 8.0 * 6.0 / n as f64;
    }
    assert!((oracle - 2.0 / std::f64::consts::PI).abs() < 1e-9);
    // the γ weight grows like s³, so cut the profile where e^{−πs²} is ~1e-3
    let samples = score_samples(&Constant { value: 1.0 }, &cfgs, 0.0).unwrap();
    let g = sigma_sq_surface(&m2_from_samples(&samples, 0.1, 1.5).unwrap()).unwrap();
    assert!(
        (g.value - oracle).abs() < 0.15 * oracle,
        "{g:?} vs {oracle}"
    );
    // factorization: |m₂ − m₁²| stays under the closed form's square-root envelope
    let seps: Vec<f64> = (10..30).map(|i| i as f64 / 10.0 + 0.05).collect();
    for p in factorization_error_curve(&est, &seps) {
        assert!(
            p.envelope <= (-std::f64::consts::PI * p.s * p.s / 2.0).exp() + 3.5 * p.stderr + 0.01,
            "{p:?}"
        );
    }
}

#[test]
fn bin_halving_leaves_plugin_unchanged() {
    let r: f64 = 0.5;
    let cfgs = replicate(&ProcessSpec::Poisson { intensity: 1.0 }, 256.0, 1.0, 100, 4);
    let samples = score_samples(&EdgeLength { r }, &cfgs, r).unwrap();
    let a = sigma_sq_plugin(&m2_from_samples(&samples, 0.2, 2.0).unwrap()).unwrap();
    let b = sigma_sq_plugin(&m2_from_samples(&samples, 0.1, 2.0).unwrap()).unwrap();
    assert!(
        (a.value - b.value).abs() <= a.stderr.max(b.stderr),
        "{a:?} {b:?}"
    );
}

#[test]
fn finite_range_factorization() {
    let r: f64 = 0.3;
    let h = 0.2;
    let matern = ProcessSpec::Matern2 {
        proposal_intensity: 2.0,
        hardcore: h,
    };
    let cfgs = replicate(&matern, 400.0, 1.0, 120, 5);
    let est = estimate_m2_radial(&EdgeLength { r }, &cfgs, r, 0.1, 3.0).unwrap();
    let seps: Vec<f64> = (0..30)
        .map(|i| i as f64 / 10.0 + 0.05)
        .filter(|&s| s > 2.0 * r + h)
        .collect();
    for p in factorization_error_curve(&est, &seps) {
        assert!(p.error <= 3.5 * p.stderr, "{p:?}");
    }
    let pois = replicate(&ProcessSpec::Poisson { intensity: 1.0 }, 400.0, 1.0, 120, 6);
    let est = estimate_m2_radial(&EdgeLength { r }, &pois, r, 0.1, 3.0).unwrap();
    let seps: Vec<f64> = (0..30)
        .map(|i| i as f64 / 10.0 + 0.05)
        .filter(|&s| s > 2.0 * r)
        .collect();
    for p in factorization_error_curve(&est, &seps) {
        assert!(p.error <= 3.5 * p.stderr, "{p:?}");
    }
}

#[test]
fn reproducible_and_csv() {
    let cfgs = replicate(&ProcessSpec::Poisson { intensity: 1.0 }, 100.0, 0.0, 40, 7);
    let a = estimate_m2_radial(&Constant { value: 1.0 }, &cfgs, 0.0, 0.5, 3.0).unwrap();
    let again = replicate(&ProcessSpec::Poisson { intensity: 1.0 }, 100.0, 0.0, 40, 7);
    let b = estimate_m2_radial(&Constant { value: 1.0 }, &again, 0.0, 0.5, 3.0).unwrap();
    assert_eq!(a, b);
    let mut buf = Vec::new();
    a.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("s_mid,m2,stderr,count\n"));
    assert_eq!(text.lines().count(), a.bins.len() + 1);
}
