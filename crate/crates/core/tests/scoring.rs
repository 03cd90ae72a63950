use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ssp_core::scoring::{loss_vector, project_onto_hyperplane, ssp_gradients, ssp_score, transe_score};
use ssp_core::topic_semantics::normal_vector;
use ssp_core::{ScoreParams, TrainMode};

fn vec_in(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, d)
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 1e-3).then(|| v.iter().map(|x| x / n).collect())
}

fn random_vec(rng: &mut impl Rng, d: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(lo..hi)).collect()
}

// straightforward loops, no shared helpers with the crate
fn oracle_loss(h: &[f64], r: &[f64], t: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..h.len() {
        out.push(h[i] + r[i] - t[i]);
    }
    out
}

fn oracle_transe(h: &[f64], r: &[f64], t: &[f64]) -> f64 {
    let mut acc = 0.0;
    for x in oracle_loss(h, r, t) {
        acc += x * x;
    }
    acc
}

fn oracle_ssp(h: &[f64], r: &[f64], t: &[f64], s: &[f64], lambda: f64) -> f64 {
    let e = oracle_loss(h, r, t);
    let mut a = 0.0;
    for i in 0..e.len() {
        a += s[i] * e[i];
    }
    let mut p2 = 0.0;
    let mut e2 = 0.0;
    for i in 0..e.len() {
        let p = e[i] - a * s[i];
        p2 += p * p;
        e2 += e[i] * e[i];
    }
    e2 - lambda * p2
}

#[test]
fn loss_vector_and_transe_match_loop_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let h = random_vec(&mut rng, 10, -2.0, 2.0);
        let r = random_vec(&mut rng, 10, -2.0, 2.0);
        let t = random_vec(&mut rng, 10, -2.0, 2.0);
        assert_eq!(loss_vector(&h, &r, &t).unwrap(), oracle_loss(&h, &r, &t));
        let f = transe_score(&h, &r, &t).unwrap();
        assert!((f - oracle_transe(&h, &r, &t)).abs() < 1e-12);
    }
}

#[test]
fn ssp_score_matches_loop_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let d = rng.gen_range(1..16);
        let h = random_vec(&mut rng, d, -2.0, 2.0);
        let r = random_vec(&mut rng, d, -2.0, 2.0);
        let t = random_vec(&mut rng, d, -2.0, 2.0);
        let Some(s) = unit(&random_vec(&mut rng, d, 0.0, 1.0)) else {
            continue;
        };
        let lambda = rng.gen_range(0.0..0.999);
        let got = ssp_score(&h, &r, &t, &s, ScoreParams::new(lambda).unwrap()).unwrap();
        let want = oracle_ssp(&h, &r, &t, &s, lambda);
        assert!((got - want).abs() < 1e-10 * (1.0 + want.abs()), "{got} vs {want}");
    }
}

#[test]
fn mismatched_lengths_are_shape_errors() {
    assert!(loss_vector(&[1.0], &[1.0, 2.0], &[0.0]).is_err());
    assert!(transe_score(&[1.0, 2.0], &[1.0, 2.0], &[0.0]).is_err());
    assert!(project_onto_hyperplane(&[1.0, 2.0], &[1.0]).is_err());
}

#[test]
fn non_unit_normal_is_rejected() {
    assert!(project_onto_hyperplane(&[1.0, 1.0], &[1.0, 1.0]).is_err());
    let p = ScoreParams::new(0.2).unwrap();
    assert!(ssp_score(&[1.0, 0.0], &[0.0, 0.0], &[0.0, 0.0], &[0.5, 0.5], p).is_err());
}

fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

fn score_with_pair(h: &[f64], r: &[f64], t: &[f64], sh: &[f64], st: &[f64], lambda: f64) -> f64 {
    let s = normal_vector(sh, st).unwrap();
    oracle_ssp(h, r, t, &s, lambda)
}

#[test]
fn ssp_gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let step = 1e-5;
    for _ in 0..100 {
        let d = 6;
        let h = random_vec(&mut rng, d, -1.0, 1.0);
        let r = random_vec(&mut rng, d, -1.0, 1.0);
        let t = random_vec(&mut rng, d, -1.0, 1.0);
        let sh = random_vec(&mut rng, d, 0.1, 1.0);
        let st = random_vec(&mut rng, d, 0.1, 1.0);
        let lambda = rng.gen_range(0.05..0.95);
        let g = ssp_gradients(
            &h,
            &r,
            &t,
            &sh,
            &st,
            ScoreParams::new(lambda).unwrap(),
            TrainMode::Joint,
        )
        .unwrap();
        let blocks: [(&[f64], &Vec<f64>, usize); 5] = [
            (&h, &g.h, 0),
            (&r, &g.r, 1),
            (&t, &g.t, 2),
            (&sh, &g.s_h, 3),
            (&st, &g.s_t, 4),
        ];
        for (base, analytic, which) in blocks {
            for k in 0..d {
                let eval = |delta: f64| {
                    let mut args = [h.clone(), r.clone(), t.clone(), sh.clone(), st.clone()];
                    args[which][k] = base[k] + delta;
                    score_with_pair(&args[0], &args[1], &args[2], &args[3], &args[4], lambda)
                };
                let numeric = (eval(step) - eval(-step)) / (2.0 * step);
                let err = relative_error(analytic[k], numeric);
                assert!(
                    err < 1e-4 || (analytic[k] - numeric).abs() < 1e-8,
                    "block {which} coord {k}: analytic {} numeric {numeric}",
                    analytic[k]
                );
            }
        }
    }
}

#[test]
fn standard_mode_semantic_gradients_are_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..50 {
        let v: Vec<Vec<f64>> = (0..5)
            .map(|i| random_vec(&mut rng, 4, if i < 3 { -1.0 } else { 0.1 }, 1.0))
            .collect();
        let g = ssp_gradients(
            &v[0],
            &v[1],
            &v[2],
            &v[3],
            &v[4],
            ScoreParams::new(0.4).unwrap(),
            TrainMode::Standard,
        )
        .unwrap();
        assert!(g.s_h.iter().chain(&g.s_t).all(|&x| x == 0.0));
    }
}

#[test]
fn zero_lambda_gives_transe_gradient() {
    let (h, r, t) = ([0.3, -0.2], [0.1, 0.4], [1.0, 0.5]);
    let g = ssp_gradients(
        &h,
        &r,
        &t,
        &[0.2, 0.3],
        &[0.5, 0.1],
        ScoreParams::new(0.0).unwrap(),
        TrainMode::Joint,
    )
    .unwrap();
    let e = oracle_loss(&h, &r, &t);
    for k in 0..2 {
        assert_eq!(g.h[k], 2.0 * e[k]);
        assert_eq!(g.t[k], -2.0 * e[k]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn pythagoras(e in vec_in(8), s in vec_in(8)) {
        if let Some(s) = unit(&s) {
            let p = project_onto_hyperplane(&e, &s).unwrap();
            let a: f64 = s.iter().zip(&e).map(|(x, y)| x * y).sum();
            let lhs: f64 = e.iter().map(|x| x * x).sum();
            let rhs: f64 = p.iter().map(|x| x * x).sum::<f64>() + a * a;
            prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.max(1.0));
        }
    }

    #[test]
    fn projection_is_idempotent(e in vec_in(8), s in vec_in(8)) {
        if let Some(s) = unit(&s) {
            let p = project_onto_hyperplane(&e, &s).unwrap();
            let pp = project_onto_hyperplane(&p, &s).unwrap();
            for (x, y) in p.iter().zip(&pp) {
                prop_assert!((x - y).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn reduction_to_transe(h in vec_in(6), r in vec_in(6), t in vec_in(6), s in vec_in(6)) {
        if let Some(s) = unit(&s) {
            let a = ssp_score(&h, &r, &t, &s, ScoreParams::new(0.0).unwrap()).unwrap();
            let b = transe_score(&h, &r, &t).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn score_bounds(h in vec_in(6), r in vec_in(6), t in vec_in(6), s in vec_in(6), lambda in 0.0f64..0.999) {
        if let Some(s) = unit(&s) {
            let f = ssp_score(&h, &r, &t, &s, ScoreParams::new(lambda).unwrap()).unwrap();
            let e2 = transe_score(&h, &r, &t).unwrap();
            let tol = 1e-9 * e2.max(1.0);
            prop_assert!(f >= (1.0 - lambda) * e2 - tol);
            prop_assert!(f <= e2 + tol);
        }
    }

    #[test]
    fn score_ordering_over_rotation(len in 0.1f64..5.0, lambda in 0.01f64..0.99) {
        // e = len·(cos θ, sin θ) against s = (0, 1): θ = 0 lies in the plane
        let s = [0.0, 1.0];
        let p = ScoreParams::new(lambda).unwrap();
        let score = |theta: f64| {
            let e = [len * theta.cos(), len * theta.sin()];
            ssp_score(&e, &[0.0, 0.0], &[0.0, 0.0], &s, p).unwrap()
        };
        let in_plane = score(0.0);
        let normal = score(std::f64::consts::FRAC_PI_2);
        for i in 0..=32 {
            let f = score(i as f64 * std::f64::consts::PI / 32.0);
            prop_assert!(f >= in_plane - 1e-9);
            prop_assert!(f <= normal + 1e-9);
        }
    }
}
