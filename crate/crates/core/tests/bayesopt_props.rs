use bogp_core::bayesopt::{
    decode_point, encode_point, optimize, random_search, Dimension, HyperPoint, OptimizeConfig,
    ParamValue, SearchSpace,
};
use bogp_core::rng::seeded;
use proptest::prelude::*;

fn mixed_space() -> SearchSpace {
    SearchSpace::new(vec![
        Dimension::categorical("kind", &["a", "b", "c"]),
        Dimension::integer("n", 10, 500, true),
        Dimension::integer("leaf", 1, 1000, false),
        Dimension::continuous("rate", 0.001, 1.0, true),
        Dimension::continuous("mix", -3.0, 5.0, false),
    ])
    .unwrap()
}

#[test]
fn encode_decode_round_trips_1000_points() {
    let space = mixed_space();
    let mut rng = seeded(31);
    for _ in 0..1000 {
        let p = space.sample_uniform(&mut rng);
        let enc = encode_point(&p, &space).unwrap();
        assert_eq!(enc.len(), space.encoded_dim());
        assert!(enc.iter().all(|v| (0.0..=1.0).contains(v)));
        let back = decode_point(&enc, &space).unwrap();
        for (a, b) in p.0.iter().zip(&back.0) {
            match (a, b) {
                (ParamValue::Real(x), ParamValue::Real(y)) => {
                    assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{x} vs {y}")
                }
                _ => assert_eq!(a, b),
            }
        }
    }
}

proptest! {
    #[test]
    fn decode_lands_in_domain(v in prop::collection::vec(-0.5f64..1.5, 7)) {
        let space = mixed_space();
        let p = decode_point(&v, &space).unwrap();
        prop_assert!(space.check(&p).is_ok());
    }

    #[test]
    fn halton_design_lies_in_domain(seed in any::<u64>(), n in 1usize..40) {
        let space = mixed_space();
        let pts = space.quasi_random(n, &mut seeded(seed));
        prop_assert_eq!(pts.len(), n);
        for p in &pts {
            prop_assert!(space.check(p).is_ok());
        }
    }
}

fn bowl_space() -> SearchSpace {
    SearchSpace::new(vec![
        Dimension::continuous("x", -2.0, 2.0, false),
        Dimension::continuous("y", -2.0, 2.0, false),
    ])
    .unwrap()
}

fn bowl(p: &HyperPoint) -> Result<f64, String> {
    match p.0[..] {
        [ParamValue::Real(x), ParamValue::Real(y)] => Ok((x - 0.3).powi(2) + (y + 0.5).powi(2)),
        _ => Err("unexpected point".into()),
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    (v[4] + v[5]) / 2.0
}

#[test]
fn bo_finds_quadratic_minimum_and_beats_random_search() {
    let space = bowl_space();
    let (mut bo, mut rs) = (Vec::new(), Vec::new());
    for seed in 0..10 {
        let cfg = OptimizeConfig { seed, ..OptimizeConfig::default() };
        let trace = optimize(bowl, &space, &cfg).unwrap();
        assert_eq!(trace.len(), 30);
        assert!(trace.best_so_far.windows(2).all(|w| w[1] <= w[0]));
        bo.push(trace.best().unwrap());
        rs.push(random_search(bowl, &space, 30, seed).best().unwrap());
    }
    let (b, r) = (median(bo.clone()), median(rs));
    assert!(b < 1e-2, "BO median best {b}");
    assert!(b < r, "BO {b} vs random {r}");
    assert!(bo.iter().all(|&v| v < 1e-2), "{bo:?}");
}

#[test]
fn failures_are_penalized_and_do_not_abort() {
    let space = bowl_space();
    let cfg = OptimizeConfig { budget: 12, seed: 5, ..OptimizeConfig::default() };
    let mut calls = 0;
    let trace = optimize(
        |p: &HyperPoint| {
            calls += 1;
            if calls % 3 == 0 { Err("boom".to_string()) } else { bowl(p) }
        },
        &space,
        &cfg,
    )
    .unwrap();
    assert_eq!(trace.len(), 12);
    let failed: Vec<_> = trace.trials.iter().filter(|t| t.failure.is_some()).collect();
    assert_eq!(failed.len(), 4);
    assert!(failed.iter().all(|t| t.objective == bogp_core::bayesopt::FAILURE_PENALTY));
}

#[test]
fn same_seed_same_trace_points() {
    let space = mixed_space();
    let f = |p: &HyperPoint| -> Result<f64, String> {
        let enc = encode_point(p, &mixed_space()).map_err(|e| e.to_string())?;
        Ok(enc.iter().enumerate().map(|(i, v)| (v - 0.1 * i as f64).powi(2)).sum())
    };
    let cfg = OptimizeConfig { budget: 10, seed: 77, ..OptimizeConfig::default() };
    let a = optimize(f, &space, &cfg).unwrap();
    let b = optimize(f, &space, &cfg).unwrap();
    let pts = |t: &bogp_core::bayesopt::OptimizationTrace| t.trials.iter().map(|x| (x.point.clone(), x.objective)).collect::<Vec<_>>();
    assert_eq!(pts(&a), pts(&b));
}

#[test]
fn one_dimensional_quadratic_within_tolerance_of_closed_form_minimum() {
    let space = SearchSpace::new(vec![Dimension::continuous("x", -2.0, 3.0, false)]).unwrap();
    let f = |p: &HyperPoint| -> Result<f64, String> {
        match p.0[0] {
            ParamValue::Real(x) => Ok((x - 0.7).powi(2) + 0.1),
            _ => Err("unexpected point".into()),
        }
    };
    let (mut bo, mut rs) = (Vec::new(), Vec::new());
    for seed in 0..10 {
        let cfg = OptimizeConfig { seed, ..OptimizeConfig::default() };
        bo.push(optimize(f, &space, &cfg).unwrap().best().unwrap());
        rs.push(random_search(f, &space, 30, seed).best().unwrap());
    }
    let (b, r) = (median(bo), median(rs));
    assert!((b - 0.1).abs() < 1e-2, "median best {b}");
    assert!(b <= r, "BO {b} vs random {r}");
}
