use proptest::prelude::*;

use ibplan::biclique::{biclique_cover_with_report, merge_cover, validate_cover, FiniteElementGraph};
use ibplan::cdc::{conflict_graph, ib_feasible, CdcInstance};
use ibplan::formulation::{parse_lp, write_lp, Group, MipModel, Sense};
use ibplan::geometry::{constrained_delaunay, point_in_convex, Environment, Location};
use ibplan::partition::{merge_all, partition_from_cdt};
use ibplan::scenario::{gen_env, prepare};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn free_space_area_is_conserved(seed in 0u64..10_000, k in 0usize..=3) {
        let env = gen_env(seed, k);
        let tri = constrained_delaunay(&env).unwrap();
        prop_assert!(tri.non_delaunay_edges(true).is_empty());
        let p = partition_from_cdt(&tri).unwrap();
        prop_assert!((p.area() + env.obstacle_area() - 1.0).abs() < 1e-9);
        // Internal obstacles only: n + 2h − 2 free triangles.
        prop_assert_eq!(p.len(), p.ground_set.len() + 2 * k - 2);
        prop_assert!(p.check().is_ok());
    }

    #[test]
    fn merging_faces_keeps_a_valid_partition(seed in 0u64..10_000, k in 0usize..=3) {
        let p = partition_from_cdt(&constrained_delaunay(&gen_env(seed, k)).unwrap()).unwrap();
        let (merged, count) = merge_all(&p);
        prop_assert_eq!(merged.len() + count, p.len());
        prop_assert!((merged.area() - p.area()).abs() < 1e-9);
        prop_assert!(merged.check().is_ok());
        for i in 0..merged.len() {
            let h = merged.halfspaces()[i].clone();
            for q in merged.face_points(i) {
                prop_assert!(h.contains(q, 1e-9));
            }
        }
    }

    #[test]
    fn covers_are_valid_and_merging_never_grows(seed in 0u64..10_000, k in 1usize..=3) {
        let prep = prepare(&gen_env(seed, k), false).unwrap();
        prop_assert_eq!(validate_cover(&prep.cover.cover, &prep.conflict), Ok(()));
        prop_assert_eq!(validate_cover(&prep.merged, &prep.conflict), Ok(()));
        prop_assert!(prep.merged.depth() <= prep.cover.cover.depth());
        prop_assert!(prep.cover.all_within_bounds());
        prop_assert_eq!(prep.cover.stats.residual_edges, 0);
    }

    #[test]
    fn ib_feasibility_matches_cdc_on_small_sets(seed in 0u64..10_000, k in 1usize..=2) {
        let prep = prepare(&gen_env(seed, k), false).unwrap();
        prop_assume!(prep.ib_check.representable);
        let cdc = prep.partition.cdc();
        let n = cdc.ground_set_size();
        for cover in [&prep.cover.cover, &prep.merged] {
            for f in cdc.families() {
                prop_assert!(ib_feasible(cover, f));
            }
            for u in 0..n {
                for v in u..n {
                    for w in v..n {
                        let mut t = vec![u, v, w];
                        t.dedup();
                        prop_assert_eq!(ib_feasible(cover, &t), cdc.is_feasible(&t), "{:?}", t);
                    }
                }
            }
        }
    }

    #[test]
    fn halfspaces_describe_the_face(seed in 0u64..10_000, k in 0usize..=3, px in 0.0f64..1.0, py in 0.0f64..1.0) {
        let p = partition_from_cdt(&constrained_delaunay(&gen_env(seed, k)).unwrap()).unwrap();
        let q = ibplan::geometry::Point2::new(px, py);
        for (i, h) in p.halfspaces().iter().enumerate() {
            let inside = point_in_convex(q, &p.face_points(i)) != Location::Outside;
            if inside {
                prop_assert!(h.contains(q, 1e-9));
            } else {
                prop_assert!(!h.contains(q, -1e-9));
            }
        }
    }

    #[test]
    fn environment_json_round_trips(seed in 0u64..10_000, k in 0usize..=3) {
        let env = gen_env(seed, k);
        let back = Environment::from_json(&env.to_json()).unwrap();
        prop_assert_eq!(back, env);
    }
}

type Terms = Vec<(String, String)>;

/// Name-keyed view of a model, independent of variable order.
fn canonical(m: &MipModel) -> (Vec<String>, Vec<(String, String, Terms)>, Terms, String) {
    let name = |j: usize| m.variables[j].name.clone();
    let terms = |t: &[(usize, f64)]| {
        let mut v: Terms = t.iter().map(|&(j, a)| (name(j), format!("{a}"))).collect();
        v.sort();
        v
    };
    let mut vars: Vec<String> =
        m.variables.iter().map(|v| format!("{} {:?} {} {}", v.name, v.var_type, v.lower, v.upper)).collect();
    vars.sort();
    let rows = m
        .constraints
        .iter()
        .map(|c| (c.name.clone(), format!("{:?} {}", c.sense, c.rhs), terms(&c.terms)))
        .collect();
    let objective: Vec<(usize, f64)> = m.objective.iter().copied().filter(|&(_, c)| c != 0.0).collect();
    (vars, rows, terms(&objective), format!("{:?} {}", m.sense, m.constant))
}

/// Random small models: continuous and binary variables, rows of all senses.
fn model_strategy() -> impl Strategy<Value = MipModel> {
    let var = (any::<bool>(), -5i32..5, 0i32..6);
    let row = (prop::collection::vec((0usize..6, -40i32..40), 1..5), 0u8..3, -20i32..20);
    (prop::collection::vec(var, 1..6), prop::collection::vec(row, 0..6), prop::collection::vec(-9i32..9, 0..6))
        .prop_map(|(vars, rows, obj)| {
            let mut m = MipModel::new();
            for (i, (binary, lo, width)) in vars.iter().enumerate() {
                if *binary {
                    m.add_binary(format!("b{i}"), Group::Motion);
                } else {
                    let lo = *lo as f64 / 4.0;
                    m.add_continuous(format!("c{i}"), lo, lo + *width as f64 / 2.0, Group::Motion);
                }
            }
            let n = vars.len();
            for (r, (terms, sense, rhs)) in rows.into_iter().enumerate() {
                let terms = terms.into_iter().map(|(j, a)| (j % n, a as f64 / 8.0)).collect();
                let sense = [Sense::Le, Sense::Ge, Sense::Eq][sense as usize];
                m.add_constraint(format!("r{r}"), terms, sense, rhs as f64 / 4.0, Group::Motion);
            }
            for (j, c) in obj.into_iter().enumerate() {
                if c != 0 && j < n {
                    m.objective.push((j, c as f64));
                }
            }
            m
        })
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn lp_files_round_trip(m in model_strategy()) {
        let text = write_lp(&m);
        let back = parse_lp(&text).unwrap();
        prop_assert_eq!(canonical(&back), canonical(&m));
        // Variable order may change once; after that the text is stable.
        let again = write_lp(&back);
        prop_assert_eq!(write_lp(&parse_lp(&again).unwrap()), again);
    }

    #[test]
    fn covers_of_random_triangle_strips(n in 4usize..24, skips in prop::collection::vec(any::<bool>(), 24)) {
        // Fan/strip triangulations with some triangles left out.
        let elements: Vec<Vec<usize>> = (0..n - 2)
            .filter(|&i| i == 0 || !skips[i])
            .map(|i| vec![i, i + 1, i + 2])
            .collect();
        let used: std::collections::BTreeSet<usize> = elements.iter().flatten().copied().collect();
        prop_assume!(used.len() == n);
        let cdc = CdcInstance::new(n, elements).unwrap();
        let g = FiniteElementGraph::from_cdc(&cdc);
        let conflict = conflict_graph(&cdc);
        let report = biclique_cover_with_report(&g);
        prop_assert_eq!(validate_cover(&report.cover, &conflict), Ok(()));
        prop_assert!(report.all_within_bounds());
        let merged = merge_cover(&report.cover, &conflict);
        prop_assert_eq!(validate_cover(&merged, &conflict), Ok(()));
        prop_assert!(merged.depth() <= report.cover.depth());
    }
}
