// SPDX-License-Identifier: MIT OR Apache-2.0

//! Planted-geometry generators checked by Monte-Carlo and analytic oracles.

mod common;

use common::{abs_cos, dot, norm};
use relcon::data::write_pack;
use relcon::synthetic::MULTIVARIATE_VARIANTS;
use relcon::{generate, ContrastSet, GeometryKind, GeometrySpec};

fn spec(kind: GeometryKind) -> GeometrySpec {
    GeometrySpec {
        kind,
        ..GeometrySpec::default()
    }
}

fn rows(set: &ContrastSet, v: usize) -> Vec<Vec<f64>> {
    let m = set.variant_at(v);
    (0..m.nrows()).map(|i| m.row(i)).collect()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[test]
fn mean_signed_displacement_points_along_t() {
    let (set, truth) = generate(&GeometrySpec {
        noise_std: 0.01,
        ..spec(GeometryKind::Ideal)
    })
    .unwrap();
    let labels = set.label("truth").unwrap();
    let (pos, neg) = (rows(&set, 0), rows(&set, 1));
    let mut mean = vec![0.0; set.dim()];
    for ((p, n), &l) in pos.iter().zip(&neg).zip(labels) {
        let s = if l { 1.0 } else { -1.0 };
        for (m, d) in mean.iter_mut().zip(sub(p, n)) {
            *m += s * d;
        }
    }
    assert!(abs_cos(&mean, &truth.t) >= 0.99);
}

#[test]
fn noiseless_ideal_pairs_differ_only_along_t() {
    let (set, truth) = generate(&spec(GeometryKind::Ideal)).unwrap();
    assert_eq!(truth.t, truth.n);
    let labels = set.label("truth").unwrap();
    for ((p, n), &l) in rows(&set, 0).iter().zip(&rows(&set, 1)).zip(labels) {
        let d = sub(p, n);
        let along = dot(&d, &truth.t);
        let residual: Vec<f64> = d.iter().zip(&truth.t).map(|(x, t)| x - along * t).collect();
        assert!(norm(&residual) <= 1e-12 * norm(&d).max(1.0));
        // the label fixes the sign of the displacement and the two sides of the hyperplane
        assert_eq!(along > 0.0, l);
        assert_eq!(dot(&truth.n, p) > 0.0, l);
        assert_eq!(dot(&truth.n, n) > 0.0, !l);
    }
}

#[test]
fn shear_angle_sets_the_normal() {
    for phi in [0.2, 0.7, -1.1] {
        let (set, truth) = generate(&GeometrySpec {
            shear: phi,
            ..spec(GeometryKind::Sheared)
        })
        .unwrap();
        assert!((dot(&truth.t, &truth.n) - f64::cos(phi)).abs() <= 1e-6, "shear {phi}");
        for (p, n) in rows(&set, 0).iter().zip(&rows(&set, 1)) {
            let mid: Vec<f64> = p.iter().zip(n).map(|(a, b)| a + b).collect();
            assert!(dot(&truth.n, &mid).abs() <= 1e-10);
            assert!(abs_cos(&sub(p, n), &truth.t) >= 1.0 - 1e-12);
        }
    }
}

#[test]
fn zero_shear_is_the_ideal_kind() {
    let ideal = generate(&spec(GeometryKind::Ideal)).unwrap();
    let sheared = generate(&spec(GeometryKind::Sheared)).unwrap();
    assert_eq!(ideal.0.variants(), sheared.0.variants());
    assert_eq!(ideal.1.t, sheared.1.t);
}

#[test]
fn distractor_variance_ratio_matches_scale() {
    let (set, truth) = generate(&GeometrySpec {
        distractor_scale: 3.0,
        ..spec(GeometryKind::Distractor)
    })
    .unwrap();
    let u = truth.direction("distractor").unwrap();
    let (mut vt, mut vu) = (0.0, 0.0);
    for (p, n) in rows(&set, 0).iter().zip(&rows(&set, 1)) {
        let d = sub(p, n);
        vt += dot(&d, &truth.t).powi(2);
        vu += dot(&d, u).powi(2);
    }
    let ratio = vu / vt;
    assert!((ratio - 3.0).abs() <= 0.3, "variance ratio {ratio}");
}

#[test]
fn distractor_labels_are_independent_of_truth() {
    let (set, _) = generate(&GeometrySpec {
        distractor_scale: 3.0,
        ..spec(GeometryKind::Distractor)
    })
    .unwrap();
    let to_f = |v: &[bool]| -> Vec<f64> { v.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect() };
    let a = to_f(set.label("truth").unwrap());
    let b = to_f(set.label("distractor").unwrap());
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    let corr = cov / (va * vb).sqrt();
    assert!(corr.abs() <= 0.1, "corr {corr}");
}

#[test]
fn vanishing_distractor_behaves_like_ideal() {
    let (set, truth) = generate(&GeometrySpec {
        distractor_scale: 1e-12,
        ..spec(GeometryKind::Distractor)
    })
    .unwrap();
    for (p, n) in rows(&set, 0).iter().zip(&rows(&set, 1)) {
        assert!(abs_cos(&sub(p, n), &truth.t) >= 1.0 - 1e-9);
    }
}

#[test]
fn multivariate_truth_labels_follow_the_semantics() {
    let (set, truth) = generate(&GeometrySpec {
        n_pairs: 40,
        dim: 10,
        ..spec(GeometryKind::Multivariate)
    })
    .unwrap();
    let names: Vec<&str> = set.variant_names().collect();
    assert_eq!(names, MULTIVARIATE_VARIANTS);
    let expected = [("pc", true), ("pi", false), ("nc", false), ("ni", true)];
    for (v, t) in expected {
        assert_eq!(set.variant_label(v, "truth"), Some(t), "{v}");
        assert_eq!(set.variant_label(v, "polarity"), Some(v.starts_with('p')));
        assert_eq!(set.variant_label(v, "base_truth"), Some(v.ends_with('c')));
    }
    // projections onto each planted direction recover the labels (noise off)
    let c = relcon::center(&set);
    for (k, name) in names.iter().enumerate() {
        for track in ["truth", "polarity", "base_truth"] {
            let dir = truth.direction(track).unwrap();
            let want = set.variant_label(name, track).unwrap();
            let m = c.variant_at(k);
            for i in 0..m.nrows() {
                assert_eq!(dot(&m.row(i), dir) > 0.0, want, "{name} row {i} on {track}");
            }
        }
    }
    // the summed commonality cancels along the planted directions
    let sum = relcon::commonality(&c);
    for track in ["truth", "polarity", "base_truth"] {
        let dir = truth.direction(track).unwrap();
        for i in 0..sum.nrows() {
            assert!(dot(&sum.row(i), dir).abs() <= 1e-9, "{track} row {i}");
        }
    }
}

#[test]
fn same_seed_same_bytes_different_seed_different_bytes() {
    for kind in [
        GeometryKind::Ideal,
        GeometryKind::Sheared,
        GeometryKind::Distractor,
        GeometryKind::Multivariate,
    ] {
        let s = GeometrySpec {
            n_pairs: 30,
            dim: 8,
            noise_std: 0.1,
            shear: 0.3,
            seed: 11,
            ..spec(kind)
        };
        let a = write_pack(&generate(&s).unwrap().0);
        let b = write_pack(&generate(&s).unwrap().0);
        let c = write_pack(&generate(&GeometrySpec { seed: 12, ..s.clone() }).unwrap().0);
        assert_eq!(a, b, "{kind:?}");
        assert_ne!(a, c, "{kind:?}");
    }
}

#[test]
fn planted_directions_are_unit_and_orthogonal() {
    let (_, truth) = generate(&GeometrySpec {
        salient_std: 2.0,
        ..spec(GeometryKind::Distractor)
    })
    .unwrap();
    assert!((norm(&truth.t) - 1.0).abs() <= 1e-12);
    for (name, v) in &truth.extra_dirs {
        assert!((norm(v) - 1.0).abs() <= 1e-12, "{name}");
        assert!(dot(v, &truth.t).abs() <= 1e-12, "{name}");
    }
}
