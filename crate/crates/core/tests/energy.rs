use std::sync::Arc;

use degreelab::energy::{component_threshold_energy, threshold_energies, threshold_energy};
use degreelab::geometry::{GridSpec, QuadratureGrid};
use degreelab::lab::default_families;
use degreelab::maps::sample_map;
use degreelab::{SampledMap, SphereMap, SpherePoint};
use proptest::prelude::*;

fn sampled(map: &SphereMap, grid: &str) -> SampledMap {
    let disc = grid.parse::<GridSpec>().unwrap().build().unwrap();
    sample_map(map, &disc.grid).unwrap()
}

/// The same samples with the node order reversed.
fn reversed(sm: &SampledMap) -> SampledMap {
    let g = sm.grid();
    let n = g.len() as u32;
    let points = g.points().iter().rev().copied().collect();
    let weights = g.weights().iter().rev().copied().collect();
    let edges = g.edges().iter().map(|e| [n - 1 - e[0], n - 1 - e[1]]).collect();
    let grid = Arc::new(QuadratureGrid::from_parts(g.dim(), points, weights, edges).unwrap());
    SampledMap::from_values(grid, sm.values().iter().rev().copied().collect()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(a.abs())
    }
}

#[test]
fn reversed_pair_order_gives_the_same_sum() {
    for (dim, grid) in [(1, "circle:2048"), (2, "ico:4")] {
        for m in default_families(dim).unwrap() {
            let sm = sampled(&m, grid);
            let back = reversed(&sm);
            for delta in [0.1, 0.5, 1.2] {
                let a = threshold_energy(&sm, delta, false).unwrap().value;
                let b = threshold_energy(&back, delta, false).unwrap().value;
                assert!(rel(a, b) < 1e-12, "{m} δ={delta}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn codomain_rotation_is_exact() {
    for (dim, grid, angles) in [(1, "circle:2048", [0.7, 0.0, 0.0]), (2, "ico:4", [0.4, 2.1, -1.3])] {
        for m in default_families(dim).unwrap() {
            let rotated = SphereMap::rotate(m.clone(), angles).unwrap();
            let a = threshold_energies(&sampled(&m, grid), &[0.2, 0.9]).unwrap().reports(true);
            let b = threshold_energies(&sampled(&rotated, grid), &[0.2, 0.9]).unwrap().reports(true);
            for (x, y) in a.iter().zip(&b) {
                assert!(rel(x.value, y.value) < 1e-12, "{m}: {} vs {}", x.value, y.value);
            }
        }
    }
}

#[test]
fn domain_rotation_moves_energy_little() {
    let cases = [
        (1, "circle:4096", "power:k=2", [0.123, 0.0, 0.0]),
        (1, "circle:4096", "perturb:base=power:k=-2,amp=0.2,seed=2", [1.0, 0.0, 0.0]),
        (2, "ico:5", "perturb:base=identity,amp=0.3,seed=3", [0.3, 0.8, -0.5]),
        // Degree-2 maps need level 6 to move less than 1e-3 (level 5: about 2e-3).
        (2, "ico:6", "bubble:k=2,lambda=2", [1.1, 0.4, 0.2]),
    ];
    for (dim, grid, spec, angles) in cases {
        let m = SphereMap::parse(spec, dim).unwrap();
        let moved = SphereMap::prerotate(m.clone(), angles).unwrap();
        let a = threshold_energy(&sampled(&m, grid), 0.5, true).unwrap().value;
        let b = threshold_energy(&sampled(&moved, grid), 0.5, true).unwrap().value;
        assert!(rel(a, b) < 1e-3, "{spec}: {a} vs {b}");
    }
}

#[test]
fn component_energies_are_bounded_by_the_full_energy() {
    let sm = sampled(&SphereMap::parse("bubble:k=1,lambda=10", 2).unwrap(), "ico:4");
    for delta in [0.2, 0.6] {
        let full = threshold_energy(&sm, delta, true).unwrap().value;
        for j in 1..=3 {
            assert!(component_threshold_energy(&sm, j, delta).unwrap().value <= full);
        }
    }
}

fn unit_vec() -> impl Strategy<Value = SpherePoint> {
    (-1.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(z, phi)| {
        let r = (1.0 - z * z).sqrt();
        SpherePoint::new([r * phi.cos(), r * phi.sin(), z]).unwrap()
    })
}

proptest! {
    #[test]
    fn unscaled_energy_is_monotone_in_delta(
        pick in 0usize..10,
        mut deltas in prop::collection::vec(0.01f64..2.0, 2..8),
    ) {
        deltas.sort_by(f64::total_cmp);
        deltas.dedup();
        let m = default_families(1).unwrap().swap_remove(pick);
        let e = threshold_energies(&sampled(&m, "circle:512"), &deltas).unwrap().reports(false);
        for w in e.windows(2) {
            prop_assert!(w[1].value <= w[0].value);
        }
    }

    // A chord longer than δ√(d+1) has some coordinate difference above δ.
    #[test]
    fn component_predicate(pairs in prop::collection::vec((unit_vec(), unit_vec(), 0.01f64..1.15), 1000)) {
        for (p, q, delta) in &pairs {
            let diff: Vec<f64> = (0..3).map(|c| (p.coords()[c] - q.coords()[c]).abs()).collect();
            let chord = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
            if chord > delta * 3f64.sqrt() {
                prop_assert!(diff.iter().cloned().fold(0.0, f64::max) > *delta);
            }
        }
    }
}
