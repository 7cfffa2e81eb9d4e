use degreelab::geometry::GridSpec;
use degreelab::lab::default_families;
use degreelab::maps::{gradient_norm, sample_map};
use degreelab::{SphereMap, SpherePoint};
use proptest::prelude::*;

fn s2_point() -> impl Strategy<Value = SpherePoint> {
    (-1.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(z, phi)| {
        let r = (1.0 - z * z).sqrt();
        SpherePoint::new([r * phi.cos(), r * phi.sin(), z]).unwrap()
    })
}

fn s2_map() -> impl Strategy<Value = SphereMap> {
    prop_oneof![
        Just(SphereMap::identity(2).unwrap()),
        Just(SphereMap::antipodal(2).unwrap()),
        (1i32..=4, 1.0f64..200.0).prop_map(|(k, l)| SphereMap::bubble(2, k, l).unwrap()),
        (1i32..=4, 0.0f64..0.85, any::<u64>()).prop_map(|(k, a, s)| {
            SphereMap::perturb(SphereMap::bubble(2, k, 2.0).unwrap(), a, s).unwrap()
        }),
        (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| {
            SphereMap::parse(&format!("rational:num={a},1,{b};den=1,0,1"), 2).unwrap()
        }),
    ]
}

fn s1_map() -> impl Strategy<Value = SphereMap> {
    prop_oneof![
        (-20i32..=20).prop_map(|k| SphereMap::power(k).unwrap()),
        (-3i32..=3, 1.0f64..200.0).prop_map(|(k, l)| SphereMap::bubble(1, k, l).unwrap()),
        (-5i32..=5, 0.0f64..0.85, any::<u64>()).prop_map(|(k, a, s)| {
            SphereMap::perturb(SphereMap::power(k).unwrap(), a, s).unwrap()
        }),
    ]
}

fn unit(p: &SpherePoint) -> bool {
    (p.dot(p).sqrt() - 1.0).abs() < 1e-10
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn s2_outputs_are_unit(m in s2_map(), xs in prop::collection::vec(s2_point(), 150)) {
        for x in &xs {
            prop_assert!(unit(&m.eval(x)), "{} at {:?}", m, x);
        }
    }

    #[test]
    fn s1_outputs_are_unit(m in s1_map(), ts in prop::collection::vec(0.0f64..std::f64::consts::TAU, 150)) {
        for &t in &ts {
            let y = m.eval(&SpherePoint::from_angle(t));
            prop_assert!(unit(&y));
            prop_assert_eq!(y.coords()[2], 0.0);
        }
    }

    #[test]
    fn power_maps_compose(k1 in -8i32..=8, k2 in -8i32..=8, t in 0.0f64..std::f64::consts::TAU) {
        let x = SpherePoint::from_angle(t);
        let inner = SphereMap::power(k2).unwrap().eval(&x);
        let composed = SphereMap::power(k1).unwrap().eval(&inner);
        let direct = SphereMap::power(k1 * k2).unwrap().eval(&x);
        for c in 0..3 {
            prop_assert!((composed.coords()[c] - direct.coords()[c]).abs() < 1e-12);
        }
    }
}

#[test]
fn sampled_zoo_values_are_unit() {
    for (dim, spec) in [(1, "circle:1024"), (2, "ico:3")] {
        let disc: GridSpec = spec.parse().unwrap();
        let disc = disc.build().unwrap();
        for m in default_families(dim).unwrap() {
            let sm = sample_map(&m, &disc.grid).unwrap();
            assert!(sm.values().iter().all(unit), "{m}");
        }
    }
}

#[test]
fn bubble_gradient_at_centre_orders_by_lambda() {
    let south = SpherePoint::new([0.0, 0.0, -1.0]).unwrap();
    let g: Vec<f64> = [1.0, 10.0, 100.0]
        .iter()
        .map(|&l| gradient_norm(&SphereMap::bubble(2, 1, l).unwrap(), &south, 1e-6).unwrap())
        .collect();
    assert!(g[0] < g[1] && g[1] < g[2], "{g:?}");
}
