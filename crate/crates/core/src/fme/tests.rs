use super::*;
use crate::geometry::{SpatialIndex, Window};
use crate::processes::ProcessSpec;
use crate::scores::{KnnEdgeLength, ScoreFunction};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn p(x: f64, y: f64) -> Point<f64> {
    Point::xy(x, y)
}

fn pair_count(r: f64) -> impl Fn(&[Point<f64>]) -> f64 {
    move |m: &[Point<f64>]| {
        let mut c = 0.0;
        for i in 0..m.len() {
            for j in 0..i {
                if m[i].dist(&m[j]) <= r {
                    c += 1.0;
                }
            }
        }
        c
    }
}

#[test]
fn order_and_restriction() {
    let x = p(0.5, 0.0);
    let mu = [p(0.2, 0.0), p(0.0, 0.7)];
    assert_eq!(restrict_below(&mu, &x), vec![p(0.2, 0.0)]);
    assert!(restrict_below(&mu, &p(0.1, 0.0)).is_empty());
    // equal radii: the smaller angle in [0, 2π) comes first
    let a = p(0.0, 1.0);
    let b = p(-1.0, 0.0);
    let c = p(0.0, -1.0);
    assert_eq!(restrict_below(&[b, a, c], &b), vec![a]);
    assert_eq!(restrict_below(&[b, a, c], &c), vec![b, a]);
    assert!(precedes(&Point::origin(2), &p(1e-300, 0.0)));
    let cfg = OrderedConfiguration::new(vec![c, b, a, p(0.1, 0.1)]).unwrap();
    assert_eq!(cfg.points(), &[p(0.1, 0.1), a, b, c]);
    assert_eq!(cfg.below(&b), &[p(0.1, 0.1), a]);
    assert!(OrderedConfiguration::new(vec![a, a]).is_err());
}

#[test]
fn difference_examples() {
    let y = p(0.3, 0.1);
    let psi = |m: &[Point<f64>]| m.len() as f64 * 2.0 + 1.0;
    assert_eq!(
        difference_kernel(psi, &[y], &[]).unwrap(),
        psi(&[y]) - psi(&[])
    );
    let r = 0.5;
    assert_eq!(
        difference_kernel(pair_count(r), &[p(0.0, 0.0), p(0.3, 0.0)], &[]).unwrap(),
        1.0
    );
    assert_eq!(
        difference_kernel(pair_count(r), &[p(0.0, 0.0), p(0.0, 0.0)], &[]),
        Err(FmeError::DuplicateArgument)
    );
    let many: Vec<Point<f64>> = (0..13).map(|i| p(i as f64, 0.0)).collect();
    assert!(matches!(
        difference_kernel(pair_count(r), &many, &[]),
        Err(FmeError::TooManyArguments { l: 13, .. })
    ));
    // μ|_{y*} drops the points of μ that come after the smallest y
    let mu = [p(0.1, 0.0), p(2.0, 0.0)];
    let v = difference_kernel(|m: &[Point<f64>]| m.len() as f64, &[p(1.0, 0.0)], &mu).unwrap();
    assert_eq!(v, 1.0);
    let constant = |_: &[Point<f64>]| 3.5;
    for l in 1..5 {
        let ys: Vec<Point<f64>> = (0..l).map(|i| p(i as f64 * 0.1, 0.2)).collect();
        assert_eq!(difference_kernel(constant, &ys, &mu).unwrap(), 0.0);
    }
}

fn cluster(rng: &mut ChaCha8Rng, n: usize, spread: f64) -> Vec<Point<f64>> {
    (0..n)
        .map(|_| {
            p(
                rng.gen_range(-spread..spread),
                rng.gen_range(-spread..spread),
            )
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn iterated_equals_subset_form(seed in any::<u64>(), l in 1usize..6, n in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ys = cluster(&mut rng, l, 1.0);
        let mu = cluster(&mut rng, n, 1.0);
        let tri = UStatistic::cech_indicator(3, 0.5);
        let psi = |m: &[Point<f64>]| tri.total(m) + 2.0 * pair_count(0.7)(m);
        let a = difference_kernel(psi, &ys, &mu).unwrap();
        let b = difference_kernel_iterated(psi, &ys, &mu).unwrap();
        prop_assert_eq!(a, b);
        // symmetric in the arguments
        let mut rev = ys.clone();
        rev.reverse();
        prop_assert_eq!(difference_kernel(psi, &rev, &mu).unwrap(), a);
    }

    #[test]
    fn product_law(seed in any::<u64>(), n in 0usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mu = cluster(&mut rng, n, 1.0);
        let f = UStatistic::cech_indicator(2, 0.4);
        let g = UStatistic::cech_indicator(3, 0.5);
        for (a, b) in [(&f, &g), (&g, &g), (&f, &f)] {
            let parts = product_expansion(a, b);
            prop_assert_eq!(parts.len(), a.order().min(b.order()) + 1);
            let sum: f64 = parts.iter().map(|h| h.total(&mu)).sum();
            prop_assert_eq!(sum, a.total(&mu) * b.total(&mu));
        }
    }
}

/// D^l ψ = 0 for l > (k − 1)Σk_i on integer-valued clique indicators, for
/// orders k = 2, 3 and l up to two past the bound.
#[test]
fn difference_kernels_vanish_beyond_the_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cases: [(usize, Vec<u32>); 5] = [
        (2, vec![1]),
        (2, vec![2]),
        (2, vec![1, 1]),
        (3, vec![1]),
        (3, vec![1, 1]),
    ];
    for (k, exps) in cases {
        let anchors: Vec<Point<f64>> = (0..exps.len())
            .map(|i| p(0.05 * i as f64, -0.03 * i as f64))
            .collect();
        let prod =
            PalmProduct::new(UStatistic::cech_indicator(k, 0.6), anchors, exps.clone()).unwrap();
        let bound = prod.fme_order();
        let mut attained = false;
        for _ in 0..40 {
            let mu = cluster(&mut rng, 2, 0.4);
            for l in 1..=bound + 2 {
                let ys = cluster(&mut rng, l, 0.4);
                let v = difference_kernel(|m| prod.psi(m), &ys, &mu).unwrap();
                if l > bound {
                    assert_eq!(v, 0.0, "k {k} exps {exps:?} l {l}");
                } else if l == bound && v != 0.0 {
                    attained = true;
                }
            }
        }
        assert!(
            attained,
            "bound {bound} never attained for k {k} exps {exps:?}"
        );
    }
}

#[test]
fn far_arguments_vanish() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let r = 0.5;
    for (stat, reach) in [
        (UStatistic::edge_length(r), r),
        (UStatistic::cech_indicator(3, r / 2.0), r),
    ] {
        let anchors = vec![p(0.0, 0.0), p(0.3, 0.2)];
        let prod = PalmProduct::new(stat, anchors.clone(), vec![1, 2]).unwrap();
        for trial in 0..1000 {
            let l = 1 + trial % 4;
            let mut ys = cluster(&mut rng, l - 1, 0.6);
            // one argument outside every B_r(x_i), adversarially close to the rim
            let far = loop {
                let q = p(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
                if anchors.iter().all(|a| a.dist(&q) > reach)
                    && anchors.iter().any(|a| a.dist(&q) < reach * 1.05)
                {
                    break q;
                }
            };
            ys.insert(trial % l, far);
            let mu = cluster(&mut rng, trial % 3, 0.6);
            assert!(fme_vanishes(|m| prod.psi(m), &ys, &mu).unwrap(), "{ys:?}");
        }
        // a single nearby argument does interact
        assert!(!fme_vanishes(|m| prod.psi(m), &[p(0.1, 0.0)], &[]).unwrap());
    }
}

#[test]
fn edge_length_fme_matches_mecke() {
    let r = 0.5;
    let lambda = 5.0;
    let w = Window::new(4.0, 2).unwrap();
    let prod =
        PalmProduct::new(UStatistic::edge_length(r), vec![Point::origin(2)], vec![1]).unwrap();
    let pois = ProcessSpec::Poisson { intensity: lambda };
    let c = fme_truncated_expectation(&prod, &pois, &w, 100_000, 1).unwrap();
    assert_eq!(c.order, 1);
    let mecke = lambda * PI * r.powi(3) / 3.0;
    assert!(
        (c.fme.value - mecke).abs() <= 3.0 * c.fme.stderr,
        "{c:?} vs {mecke}"
    );
    assert!(c.relative_gap() < 0.02, "{c:?}");
    assert!(
        c.difference.value.abs() <= 3.5 * c.difference.stderr,
        "{c:?}"
    );
}

#[test]
fn squared_edge_length_fme_matches_palm() {
    let r = 0.5;
    let lambda = 5.0;
    let w = Window::new(4.0, 2).unwrap();
    let prod =
        PalmProduct::new(UStatistic::edge_length(r), vec![Point::origin(2)], vec![2]).unwrap();
    let pois = ProcessSpec::Poisson { intensity: lambda };
    let c = fme_truncated_expectation(&prod, &pois, &w, 100_000, 2).unwrap();
    assert_eq!(c.order, 2);
    // E ξ² = λ/4 ∫_{B_r}|y|² + (λ/2 ∫_{B_r}|y|)²
    let closed = lambda / 4.0 * PI * r.powi(4) / 2.0 + (lambda * PI * r.powi(3) / 3.0).powi(2);
    assert!(c.relative_gap() < 0.02, "{c:?}");
    assert!(
        (c.fme.value - closed).abs() <= 3.0 * c.fme.stderr,
        "{c:?} vs {closed}"
    );
    assert!(
        (c.direct.value - closed).abs() <= 3.0 * c.direct.stderr,
        "{c:?} vs {closed}"
    );
}

#[test]
fn fme_guards() {
    let w = Window::new(4.0, 2).unwrap();
    let prod = PalmProduct::new(
        UStatistic::edge_length(0.5),
        vec![Point::origin(2)],
        vec![1],
    )
    .unwrap();
    assert!(matches!(
        fme_truncated_expectation(&prod, &ProcessSpec::Ginibre, &w, 100, 0),
        Err(FmeError::NonPoisson(_))
    ));
    let big = Window::new(16.0, 2).unwrap();
    let pois = ProcessSpec::Poisson { intensity: 1.0 };
    assert!(fme_truncated_expectation(&prod, &pois, &big, 100, 0).is_err());
    assert!(
        fme_truncated_expectation(&prod, &ProcessSpec::Poisson { intensity: 9.0 }, &w, 100, 0)
            .is_err()
    );
    // constant ψ: the expansion is the constant itself
    let one = PalmProduct::new(
        UStatistic::new(1, 0.0, |_| 1.0).unwrap(),
        vec![Point::origin(2)],
        vec![1],
    )
    .unwrap();
    let c = fme_truncated_expectation(&one, &pois, &w, 100, 0).unwrap();
    assert_eq!((c.order, c.fme.value, c.direct.value), (0, 1.0, 1.0));
}

/// Changing the configuration outside B_t(x) leaves ξ̃ = ξ·1[R ≤ t] alone.
#[test]
fn truncated_radius_is_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for k in [1, 2, 3] {
        let t = 4.0;
        let score = Truncated {
            inner: KnnEdgeLength::new(k).unwrap(),
            t,
        };
        let mut nonzero = 0;
        for _ in 0..1000 {
            // x at the centre of a cluster dense enough that every sector fills up
            // most of the time
            let n = rng.gen_range(1..200);
            let mut pts = vec![p(0.0, 0.0)];
            pts.extend(cluster(&mut rng, n, 1.5));
            let x = pts[0];
            let base = score.evaluate(&SpatialIndex::build(&pts, 1.0), 0);
            assert_eq!(
                ScoreFunction::<f64>::stabilization_radius(
                    &score,
                    &SpatialIndex::build(&pts, 1.0),
                    0
                ),
                Some(t)
            );
            // keep B_t(x), then delete and insert outside it
            let mut moved: Vec<Point<f64>> =
                pts.iter().filter(|q| q.dist(&x) <= t).copied().collect();
            for _ in 0..rng.gen_range(0..20) {
                let ang = rng.gen_range(0.0..std::f64::consts::TAU);
                let rad = t * (1.0 + 1e-9) + rng.gen_range(0.0..3.0);
                moved.push(p(
                    x.coord(0) + rad * ang.cos(),
                    x.coord(1) + rad * ang.sin(),
                ));
            }
            let after = score.evaluate(&SpatialIndex::build(&moved, 1.0), 0);
            assert_eq!(base, after, "k {k}: {pts:?} -> {moved:?}");
            if base != 0.0 {
                nonzero += 1;
            }
        }
        assert!(nonzero > 100, "k {k}: truncation removed almost everything");
    }
}
