use proptest::prelude::*;

use cablefield::experiments::{ExperimentConfig, ExperimentKind, GraphSpec};
use cablefield::graph::{
    build_lattice_box, random_test_graph, refine, resolve_region, scaled_radius, RandomGraphParams,
    RegionKind, WeightedGraph,
};
use cablefield::potential::{capacity_from_green, check_identities, green};
use cablefield::sampler::{cluster_of, with_crossings, GffSampler, SampleId};

fn small_graph(seed: u64, index: u64, max_vertices: usize) -> WeightedGraph {
    let params = RandomGraphParams {
        max_vertices,
        ..Default::default()
    };
    random_test_graph(seed, index, &params)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn green_is_symmetric_and_cauchy_schwarz(seed in any::<u64>(), index in 0u64..1000) {
        let g = small_graph(seed, index, 40);
        let gm = green(&g, &[]).unwrap();
        let n = g.vertex_count();
        for x in 0..n {
            prop_assert!(gm.get(x, x) > 0.0);
            for y in 0..n {
                let (a, b) = (gm.get(x, y), gm.get(y, x));
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
                prop_assert!(a * a <= gm.get(x, x) * gm.get(y, y) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn identities_hold_on_random_graphs(seed in any::<u64>(), index in 0u64..1000, pick in any::<usize>()) {
        let g = small_graph(seed, index, 40);
        let x = 1 + pick % (g.vertex_count() - 1);
        let r = check_identities(&g, 0, x).unwrap();
        prop_assert!(r.max() < 1e-9, "{r:?}");
    }

    #[test]
    fn capacity_is_monotone(seed in any::<u64>(), index in 0u64..1000, mask in any::<u64>(), extra in any::<u64>()) {
        let g = small_graph(seed, index, 40);
        let n = g.vertex_count();
        let small: Vec<usize> = (0..n).filter(|&v| v == 0 || mask >> (v % 64) & 1 == 1).collect();
        let large: Vec<usize> = (0..n)
            .filter(|&v| small.contains(&v) || extra >> (v % 64) & 1 == 1)
            .collect();
        let a = capacity_from_green(&g, &small).unwrap();
        let b = capacity_from_green(&g, &large).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-10), "{a} > {b}");
    }

    #[test]
    fn refinement_keeps_green_on_original_vertices(
        seed in any::<u64>(),
        index in 0u64..1000,
        m in prop::sample::select(vec![1usize, 2, 4, 8]),
    ) {
        let g = small_graph(seed, index, 15);
        let (fine, embedding) = refine(&g, m).unwrap();
        let coarse = green(&g, &[]).unwrap();
        let refined = green(&fine, &[]).unwrap();
        for x in 0..g.vertex_count() {
            for y in 0..g.vertex_count() {
                let (fx, fy) = (embedding.new_of(x).unwrap(), embedding.new_of(y).unwrap());
                let exact = coarse.get(x, y);
                prop_assert!((refined.get(fx, fy) - exact).abs() < 1e-9 * exact.max(1.0));
            }
        }
    }

    #[test]
    fn clusters_grow_as_the_level_drops(
        seed in any::<u64>(),
        index in 0u64..1000,
        sample in 0u64..1000,
        high in -0.5f64..1.0,
        drop in 0.0f64..1.0,
    ) {
        let g = small_graph(seed, index, 40);
        let sampler = GffSampler::new(&g).unwrap();
        let id = SampleId { master: seed, index: sample };
        let phi = sampler.draw(id, &[]).unwrap();
        let upper = cluster_of(&g, &with_crossings(&g, phi.clone(), high, id), 0);
        let lower = cluster_of(&g, &with_crossings(&g, phi, high - drop, id), 0);
        prop_assert!(upper.vertices.iter().all(|&v| lower.contains(v)));
        prop_assert!(upper.open_edges.iter().all(|e| lower.open_edges.binary_search(e).is_ok()));
    }

    #[test]
    fn annulus_avoids_the_surrounded_hole(
        radius in 4usize..12,
        inner in 0.05f64..0.25,
        stretch in 2.0f64..4.0,
    ) {
        let g = build_lattice_box(3, 25, 1.0).unwrap();
        let center = g.lattice().unwrap().center();
        let outer = (inner * stretch).min(1.0);
        let annulus = resolve_region(&g, RegionKind::Annulus { center, radius, inner, outer });
        prop_assume!(annulus.is_ok());
        let annulus = annulus.unwrap();
        let hole = scaled_radius(radius, 1.0 - outer);
        let ball = resolve_region(&g, RegionKind::Ball { center, radius: hole }).unwrap();
        let surrounded = resolve_region(&g, RegionKind::SurroundedBall { center, radius: hole }).unwrap();
        prop_assert!(ball.members.iter().all(|&v| surrounded.contains(v)));
        prop_assert!(annulus.members.iter().all(|&v| !surrounded.contains(v)));
    }

    #[test]
    fn canonical_config_reproduces_its_fingerprint(
        samples in 1u64..1_000_000,
        seed in any::<u64>(),
        levels in prop::collection::vec(0.0f64..3.0, 1..4),
        slack in 0.0f64..0.1,
    ) {
        let mut c = ExperimentConfig::new(ExperimentKind::CapLaw, GraphSpec::Grid3, samples, seed);
        c.levels = levels;
        c.slack = slack;
        let mut back = ExperimentConfig::new(ExperimentKind::TwoPoint, GraphSpec::P2Killed, 1, 0);
        for line in c.canonical().lines() {
            let (k, v) = line.split_once(" = ").unwrap();
            if v != "-" {
                back.apply(k, v).unwrap();
            }
        }
        prop_assert_eq!(back.fingerprint(), c.fingerprint());
    }
}
