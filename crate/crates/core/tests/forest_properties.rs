use cebp::analysis::{
    estimate_hurst, extract_crossing_forest, extract_passage_times, ingest_reader, ColumnSpec,
};
use cebp::simulate::{rescale_path, simulate_with_trees};
use cebp::{Family, Origin, SamplePath, SimulationConfig};
use proptest::prelude::*;

fn walk_csv(steps: &[bool], dt: &[f64]) -> String {
    let mut s = String::from("time,value\n0,0\n");
    let (mut t, mut x) = (0.0, 0i64);
    for (up, d) in steps.iter().zip(dt.iter().cycle()) {
        t += d;
        x += if *up { 1 } else { -1 };
        s.push_str(&format!("{t},{x}\n"));
    }
    s
}

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        Just(Family::FixedPairs { b: 2 }),
        (0.2f64..0.9).prop_map(|p| Family::GeometricPairs { p }),
        (0.2f64..3.0).prop_map(|lambda| Family::PoissonPairs { lambda }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn ingested_random_walks_nest(
        steps in prop::collection::vec(any::<bool>(), 200..4000),
        dt in prop::collection::vec(0.1f64..3.0, 1..20),
    ) {
        let p = ingest_reader(walk_csv(&steps, &dt).as_bytes(), &ColumnSpec::default()).unwrap();
        prop_assert_eq!(p.resolution_level, 0);
        for top in (1..=4).rev() {
            match extract_crossing_forest(&p, 0..=top) {
                Ok(f) => {
                    prop_assert_eq!(f.check_invariants(), Ok(()));
                    for n in f.level_range() {
                        for r in f.level(n) {
                            prop_assert!(r.duration > 0.0);
                            prop_assert!((r.end_time - r.start_time - r.duration).abs() < 1e-9);
                        }
                    }
                    break;
                }
                Err(e) => prop_assert_eq!(e.code(), "NO_COMPLETE_CROSSING"),
            }
        }
    }

    #[test]
    fn passages_move_one_lattice_step(
        steps in prop::collection::vec(any::<bool>(), 50..2000),
        level in 0i32..3,
    ) {
        let p = ingest_reader(walk_csv(&steps, &[1.0]).as_bytes(), &ColumnSpec::default()).unwrap();
        let h = 2f64.powi(level);
        let pass = extract_passage_times(&p, level).unwrap();
        for w in pass.windows(2) {
            prop_assert!(w[1].time > w[0].time);
            prop_assert_eq!((w[1].value - w[0].value).abs(), h);
            prop_assert_eq!((w[1].index - w[0].index).abs(), 1);
        }
    }

    #[test]
    fn simulated_forests_nest(fam in family(), depth in 2u32..6, seed in any::<u64>()) {
        let s = simulate_with_trees(&SimulationConfig::new(fam, depth, seed)).unwrap();
        let f = extract_crossing_forest(&s.path, -(depth as i32)..=0).unwrap();
        prop_assert_eq!(f.check_invariants(), Ok(()));
        let tree = &s.trees[0];
        for g in 0..=depth as usize {
            prop_assert_eq!(f.level(-(g as i32)).len(), tree.generation_len(g));
        }
    }

    #[test]
    fn hurst_estimate_is_scale_invariant(seed in any::<u64>(), n in -3i32..4) {
        let p = simulate_with_trees(&SimulationConfig::new(Family::GeometricPairs { p: 0.5 }, 5, seed))
            .unwrap()
            .path;
        let a = estimate_hurst(&extract_crossing_forest(&p, -5..=0).unwrap());
        let q = rescale_path(&p, n);
        let b = estimate_hurst(&extract_crossing_forest(&q, -5 - n..=-n).unwrap());
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.hurst_hat, b.hurst_hat),
            (Err(a), Err(b)) => prop_assert_eq!(a.code(), b.code()),
            _ => prop_assert!(false, "rescaling changed feasibility"),
        }
    }
}

#[test]
fn finest_level_below_resolution_is_rejected() {
    let t: Vec<f64> = (0..10).map(f64::from).collect();
    let v: Vec<f64> = (0..10).map(|i| f64::from(i % 2)).collect();
    let p = SamplePath::new(t, v, 0, f64::NAN, f64::NAN, Origin::Ingested).unwrap();
    assert_eq!(
        extract_crossing_forest(&p, -1..=0).unwrap_err().code(),
        "LEVEL_TOO_FINE"
    );
}
