// SPDX-License-Identifier: MIT OR Apache-2.0

//! Contrastive eigenproblems against direct formulations and planted truth.

mod common;

use common::{abs_cos, gaussian, max_principal_angle, random_set, rng};
use nalgebra::DMatrix;
use relcon::data::Pair;
use relcon::spectral::{cross_term_matrix, gram, multivariate_drc_scaled};
use relcon::synthetic::planted_basis;
use relcon::{
    ccr_closed_form, center, crc_tpc, diagnose, drc, generate, multivariate_drc, rrc,
    ActivationMatrix, ContrastSet, GeometryKind, GeometrySpec, PairSpec, Verdict,
};

fn ideal() -> (ContrastSet, relcon::PlantedTruth) {
    generate(&GeometrySpec {
        n_pairs: 300,
        dim: 16,
        ..GeometrySpec::default()
    })
    .unwrap()
}

fn distractor() -> (ContrastSet, relcon::PlantedTruth) {
    generate(&GeometrySpec {
        kind: GeometryKind::Distractor,
        distractor_scale: 3.0,
        seed: 1,
        ..GeometrySpec::default()
    })
    .unwrap()
}

#[test]
fn cross_term_equals_commonality_gram_minus_stacked_gram() {
    let c = center(&random_set(1, 70, 8));
    let (xp, xm) = c.pair().unwrap();
    let sum = xp + xm;
    let stacked = DMatrix::from_fn(140, 8, |i, j| if i < 70 { xp[(i, j)] } else { xm[(i - 70, j)] });
    let direct = sum.transpose() * &sum - stacked.transpose() * &stacked;
    let s = cross_term_matrix(&c).unwrap();
    assert!((&s - &direct).amax() <= 1e-9 * direct.amax().max(1.0));
    assert!((gram(&c) - stacked.transpose() * stacked).amax() <= 1e-9);
}

#[test]
fn drc_recovers_planted_t() {
    let (set, truth) = ideal();
    let sp = drc(&center(&set)).unwrap();
    assert!(abs_cos(&sp.vectors[0], &truth.t) >= 1.0 - 1e-9);
    for (m, l) in sp.mu.iter().zip(&sp.lambda_c) {
        assert_eq!(*m, -*l);
    }
}

#[test]
fn rrc_top_matches_drc_top_on_ideal_data() {
    let (set, _) = ideal();
    let c = center(&set);
    let d = drc(&c).unwrap();
    let r = rrc(&c, relcon::linalg::DEFAULT_RTOL).unwrap();
    assert!(abs_cos(&r.vectors[0], &d.vectors[0]) >= 1.0 - 1e-6);
    assert!(r.mu.iter().all(|&m| (-1e-12..=2.0 + 1e-12).contains(&m)));
    for (m, l) in r.mu.iter().zip(&r.lambda_c) {
        assert!((m + l - 2.0).abs() <= 1e-9);
    }
}

#[test]
fn ccr_is_the_drc_top_direction_on_random_data() {
    for seed in 0..5 {
        let c = center(&random_set(seed, 60, 10));
        let ccr = ccr_closed_form(&c).unwrap();
        let top = drc(&c).unwrap();
        assert!(abs_cos(&ccr.vector, &top.vectors[0]) >= 1.0 - 1e-9);
    }
}

#[test]
fn ccr_with_identical_variants_picks_least_variance() {
    let mut r = rng(4);
    let scales = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 0.2, 1.5]));
    let x = ActivationMatrix::new(gaussian(&mut r, 200, 3) * scales).unwrap();
    let set = ContrastSet::pair(x.clone(), x, None).unwrap();
    let c = center(&set);
    let dir = ccr_closed_form(&c).unwrap();
    let xp = c.variant_at(0).matrix();
    let eig = (xp.transpose() * xp).symmetric_eigen();
    let k = eig.eigenvalues.imin();
    let least: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
    assert!(abs_cos(&dir.vector, &least) >= 1.0 - 1e-9);
}

#[test]
fn crc_tpc_separates_distractor_and_truth() {
    let (set, truth) = distractor();
    let dirs = crc_tpc(&center(&set), 2).unwrap();
    let u = truth.direction("distractor").unwrap();
    assert!(abs_cos(&dirs[0].vector, u) >= 0.99);
    assert!(abs_cos(&dirs[1].vector, &truth.t) >= 0.99);
}

#[test]
fn crc_tpc_full_rank_basis_is_orthonormal() {
    let c = center(&random_set(5, 40, 6));
    let dirs = crc_tpc(&c, 6).unwrap();
    for (i, a) in dirs.iter().enumerate() {
        for (j, b) in dirs.iter().enumerate() {
            let d = common::dot(&a.vector, &b.vector);
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((d - want).abs() <= 1e-10);
        }
    }
    assert!(crc_tpc(&c, 7).is_err());
}

#[test]
fn distractor_spectrum_is_multiple() {
    let (set, _) = distractor();
    let sp = drc(&center(&set)).unwrap();
    let diag = diagnose(&sp, 10, 3.0).unwrap();
    assert_eq!(diag.verdict, Verdict::Multiple, "{diag:?}");
}

#[test]
fn multivariate_top_three_span_the_planted_subspace() {
    let (set, truth) = generate(&GeometrySpec {
        kind: GeometryKind::Multivariate,
        n_pairs: 200,
        dim: 16,
        seed: 3,
        ..GeometrySpec::default()
    })
    .unwrap();
    let sp = multivariate_drc(&center(&set), &PairSpec::default_for(&set)).unwrap();
    let top = DMatrix::from_fn(16, 3, |i, j| sp.vectors[j][i]);
    let planted = planted_basis(&truth, &["truth", "base_truth", "polarity"]).unwrap();
    let angle = max_principal_angle(&top, &planted);
    assert!(angle <= 1e-6, "max principal angle {angle}");
}

#[test]
fn single_pair_multivariate_reduces_to_drc() {
    let c = center(&random_set(6, 50, 7));
    let spec = PairSpec::from_names(&[("neg", "pos", "")]).unwrap();
    let mv = multivariate_drc_scaled(&c, &spec, 1.0).unwrap();
    let d = drc(&c).unwrap();
    for (a, b) in mv.mu.iter().zip(&d.mu) {
        assert!((a - b).abs() <= 1e-9 * d.mu[0].abs().max(1.0));
    }
    for (a, b) in mv.vectors.iter().zip(&d.vectors).take(3) {
        assert!(abs_cos(a, b) >= 1.0 - 1e-8);
    }
    // the default scale on two variants is exactly 1
    let dflt = multivariate_drc(&c, &PairSpec::default_for(c.set())).unwrap();
    assert_eq!(dflt.mu, mv.mu);
}

#[test]
fn pair_order_and_direction_do_not_change_the_spectrum() {
    let (set, _) = generate(&GeometrySpec {
        kind: GeometryKind::Multivariate,
        n_pairs: 60,
        dim: 8,
        noise_std: 0.2,
        ..GeometrySpec::default()
    })
    .unwrap();
    let c = center(&set);
    let spec = PairSpec::default_for(&set);
    let base = multivariate_drc(&c, &spec).unwrap();
    let mut shuffled = spec.pairs.clone();
    shuffled.reverse();
    shuffled.swap(0, 3);
    let flipped: Vec<Pair> = shuffled
        .into_iter()
        .map(|p| Pair {
            a: p.b,
            b: p.a,
            tag: p.tag,
        })
        .collect();
    let other = multivariate_drc(&c, &PairSpec::new(flipped).unwrap()).unwrap();
    for (a, b) in base.mu.iter().zip(&other.mu) {
        assert!((a - b).abs() <= 1e-9 * base.mu[0].abs());
    }
}

#[test]
fn spectra_rotate_with_the_data() {
    let set = random_set(7, 80, 6);
    let q = gaussian(&mut rng(70), 6, 6).qr().q();
    let rotate = |v: usize| ActivationMatrix::new(set.variant_at(v).matrix() * &q).unwrap();
    let turned = ContrastSet::pair(rotate(0), rotate(1), None).unwrap();
    let a = drc(&center(&set)).unwrap();
    let b = drc(&center(&turned)).unwrap();
    for (x, y) in a.mu.iter().zip(&b.mu) {
        assert!((x - y).abs() <= 1e-9 * a.mu[0].abs());
    }
    for (va, vb) in a.vectors.iter().zip(&b.vectors) {
        let rotated: Vec<f64> = (q.transpose() * nalgebra::DVector::from_column_slice(va))
            .iter()
            .copied()
            .collect();
        assert!(abs_cos(&rotated, vb) >= 1.0 - 1e-8);
    }
}

#[test]
fn verdict_examples() {
    let mut sp = drc(&center(&random_set(8, 30, 4))).unwrap();
    sp.mu = vec![10.0, 1.0, 1.0, 0.5];
    assert_eq!(diagnose(&sp, 3, 3.0).unwrap().verdict, Verdict::Isolated);
    sp.mu = vec![10.0, 8.0, 1.0, 0.5];
    assert_eq!(diagnose(&sp, 3, 3.0).unwrap().verdict, Verdict::Multiple);
    sp.mu = vec![4.0, 3.0, 2.0, 1.0];
    assert_eq!(diagnose(&sp, 4, 3.0).unwrap().verdict, Verdict::Diffuse);
    assert!(diagnose(&sp, 5, 3.0).is_err());
}
