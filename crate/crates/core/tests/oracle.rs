use succinct_poset::compress::CompressConfig;
use succinct_poset::container::{inspect, load, save};
use succinct_poset::format::{parse_instance, write_instance};
use succinct_poset::gen::{
    generate, grid, oracle_precedes, oracle_reachable, random_dag, random_digraph, random_layered_poset,
    random_transitive_relation, EdgeSemantics, GenKind, GenSpec, SplitMix64,
};
use succinct_poset::oracle::check_transitive;
use succinct_poset::order::{transitive_closure, transitive_reduction};
use succinct_poset::{
    BitMatrix, Digraph, Error, Mode, Oracle, ReachabilityOracle, ReductionIndex, SuccinctPoset,
    TransitiveRelationOracle,
};

fn small_cfg(c_min: usize) -> CompressConfig {
    let mut cfg = CompressConfig::default();
    cfg.biclique.c_min = c_min;
    cfg
}

#[test]
fn poset_answers_and_order_axioms() {
    for seed in 0..60u64 {
        let n = 1 + (seed as usize * 7) % 90;
        let c = if seed % 2 == 0 {
            random_layered_poset(n, seed).unwrap()
        } else {
            transitive_closure(&random_dag(n, 0.08, seed)).unwrap()
        };
        let o = SuccinctPoset::build_with(&c, &small_cfg([4, 16, 64][(seed % 3) as usize])).unwrap();
        let ans: Vec<Vec<bool>> = (0..n).map(|a| (0..n).map(|b| o.precedes(a, b).unwrap()).collect()).collect();
        for a in 0..n {
            assert!(ans[a][a]);
            for b in 0..n {
                assert_eq!(ans[a][b], oracle_precedes(&c, a, b), "seed {seed} ({a},{b})");
                if a != b {
                    assert!(!(ans[a][b] && ans[b][a]));
                }
            }
        }
        // Transitivity on a sample of triples.
        let mut rng = SplitMix64::new(seed);
        for _ in 0..2000 {
            let (a, b, x) = (rng.below(n as u64) as usize, rng.below(n as u64) as usize, rng.below(n as u64) as usize);
            if ans[a][b] && ans[b][x] {
                assert!(ans[a][x]);
            }
        }
    }
}

#[test]
fn out_of_range_labels_are_rejected() {
    let o = SuccinctPoset::build(&grid(2, 2).unwrap()).unwrap();
    assert!(matches!(o.precedes(0, 4), Err(Error::Range { .. })));
    assert!(matches!(o.precedes(9, 0), Err(Error::Range { .. })));
}

#[test]
fn reachability_matches_search_and_agrees_with_precedes_on_dags() {
    for seed in 0..40u64 {
        let n = 5 + (seed as usize * 13) % 100;
        let g = random_digraph(n, [0.02, 0.1][(seed % 2) as usize], seed);
        let o = ReachabilityOracle::build_with(&g, &small_cfg(8)).unwrap();
        for a in 0..n {
            for b in 0..n {
                assert_eq!(o.reachable(a, b).unwrap(), oracle_reachable(&g, a, b), "seed {seed} ({a},{b})");
            }
        }
        let dag = random_dag(n, 0.1, seed);
        let r = ReachabilityOracle::build(&dag).unwrap();
        let p = SuccinctPoset::build(&transitive_closure(&dag).unwrap()).unwrap();
        assert_eq!(r.component_count(), n);
        for a in 0..n {
            for b in 0..n {
                assert_eq!(r.reachable(a, b).unwrap(), p.precedes(a, b).unwrap());
            }
        }
    }
}

#[test]
fn reduction_index_matches_cover_pairs() {
    for seed in 0..30u64 {
        let n = 2 + (seed as usize * 11) % 120;
        let c = transitive_closure(&random_dag(n, 0.1, seed)).unwrap();
        let red = transitive_reduction(&c);
        let idx = ReductionIndex::build(&red).unwrap();
        assert_eq!(idx, ReductionIndex::from_closure(&c).unwrap());
        let edges = red.edge_set();
        for a in 0..n {
            for b in 0..n {
                assert_eq!(idx.is_edge(a, b).unwrap(), edges.binary_search(&(a, b)).is_ok());
            }
        }
    }
    // A shortcut edge is not a reduction.
    let g = Digraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
    assert_eq!(ReductionIndex::build(&g).unwrap_err(), Error::NotAReduction { u: 0, v: 2 });
}

#[test]
fn relation_oracle_matches_matrix_including_diagonal() {
    for seed in 0..40u64 {
        let n = 1 + (seed as usize * 5) % 64;
        let m = random_transitive_relation(n, 0.03, seed).unwrap();
        let o = TransitiveRelationOracle::build_with(&m, &small_cfg(8)).unwrap();
        for a in 0..n {
            for b in 0..n {
                assert_eq!(o.query(a, b).unwrap(), m.get(a, b), "seed {seed} ({a},{b})");
            }
        }
    }
    let bad = BitMatrix::from_pairs(3, [(0, 1), (1, 2)]).unwrap();
    assert_eq!(check_transitive(&bad).unwrap_err(), Error::NotTransitive { a: 0, b: 1, c: 2 });
    assert!(TransitiveRelationOracle::build(&bad).is_err());
}

fn instances() -> Vec<(GenSpec, Mode)> {
    vec![
        (GenSpec::new(GenKind::RandomLayered, 120).with_seed(3), Mode::Poset),
        (GenSpec::new(GenKind::Grid, 9).with_cols(7), Mode::Reduction),
        (GenSpec::new(GenKind::RandomDigraph, 90).with_p(0.04).with_seed(5), Mode::Digraph),
        (GenSpec::new(GenKind::RandomRelation, 60).with_p(0.03).with_seed(6), Mode::Relation),
    ]
}

#[test]
fn containers_round_trip_and_are_deterministic() {
    for (spec, mode) in instances() {
        let inst = generate(&spec).unwrap();
        let o = Oracle::build(&inst, mode).unwrap();
        let bytes = save(&o);
        assert_eq!(save(&Oracle::build(&inst, mode).unwrap()), bytes, "{mode}");
        assert_eq!(inspect(&bytes).unwrap().mode, mode);
        let back = load(&bytes).unwrap();
        assert_eq!(back, o);
        for a in 0..inst.n {
            for b in 0..inst.n {
                assert_eq!(back.query(a, b).unwrap(), o.query(a, b).unwrap());
            }
        }
        // Every single-byte flip after the magic is caught.
        let mut rng = SplitMix64::new(mode.code() as u64);
        for _ in 0..200 {
            let mut v = bytes.clone();
            let i = 4 + rng.below(bytes.len() as u64 - 4) as usize;
            v[i] ^= 1 << rng.below(8);
            assert!(load(&v).is_err(), "{mode} byte {i}");
        }
    }
}

#[test]
fn text_format_round_trips_generated_instances() {
    for (spec, _) in instances() {
        let inst = generate(&spec).unwrap();
        let text = write_instance(&inst, Some(&spec.header()));
        assert!(text.starts_with("# kind="));
        assert_eq!(parse_instance(&text, inst.semantics).unwrap(), inst);
        assert_eq!(generate(&spec).unwrap(), inst);
    }
    let chain = generate(&GenSpec::new(GenKind::Chain, 3)).unwrap();
    assert_eq!(write_instance(&chain, None), "3 2\n1 2\n2 3\n");
    let anti = generate(&GenSpec::new(GenKind::Antichain, 2)).unwrap();
    assert_eq!(write_instance(&anti, None), "2 0\n");
}

#[test]
fn mode_mismatches_are_validation_errors() {
    let cyclic = succinct_poset::gen::Instance { n: 2, edges: vec![(0, 1), (1, 0)], semantics: EdgeSemantics::Cover };
    assert!(matches!(Oracle::build(&cyclic, Mode::Poset), Err(Error::NotADag { .. })));
    assert!(Oracle::build(&cyclic, Mode::Digraph).is_ok());
}
