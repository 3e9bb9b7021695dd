use succinct_poset::biclique::BicliqueConfig;
use succinct_poset::compress::{
    build_membership, compress_flat, connectivity_code, decode_edge, max_code, CompressConfig, CompressOutput,
    FlatElement,
};
use succinct_poset::flatten::{default_gamma, flatten};
use succinct_poset::gen::{random_dag, random_layered_poset, SplitMix64};
use succinct_poset::order::{height_decomposition, transitive_closure};
use succinct_poset::{AntichainDecomposition, BitMatrix, ClosureMatrix, Error};

fn config(c_min: usize) -> CompressConfig {
    CompressConfig { biclique: BicliqueConfig { c_min, ..BicliqueConfig::default() }, ..CompressConfig::default() }
}

/// Residual decomposition of the full pipeline's flatten step.
fn flat_view(c: &ClosureMatrix) -> AntichainDecomposition {
    let d = height_decomposition(c);
    flatten(&d, c.matrix(), default_gamma(c.n())).unwrap().residual().clone()
}

fn element(d: &AntichainDecomposition, a: usize) -> FlatElement {
    FlatElement { label: a, level: d.height_of(a), rank: d.rank_of(a) }
}

fn instance(seed: u64) -> ClosureMatrix {
    let mut rng = SplitMix64::new(seed);
    let n = 2 + rng.below(255) as usize;
    if seed % 2 == 0 {
        random_layered_poset(n, seed).unwrap()
    } else {
        let p = [0.05, 0.2, 0.5][(seed / 2 % 3) as usize];
        transitive_closure(&random_dag(n, p, seed)).unwrap()
    }
}

/// Rebuilds every cross-level relation bit by replaying merges and removals
/// in output order, without using the query path or the membership sequences.
fn replay(out: &CompressOutput, d: &AntichainDecomposition) -> (BitMatrix, BitMatrix) {
    let n = d.n();
    let mut rel = BitMatrix::new(n).unwrap();
    let mut seen = BitMatrix::new(n).unwrap();
    let mut mark = |a: usize, b: usize, bit: bool| {
        assert!(!seen.get(a, b), "pair ({a},{b}) encoded twice");
        seen.set(a, b);
        if bit {
            rel.set(a, b);
        }
    };
    let mut alive = vec![true; n];
    let mut group1_top = 0;
    let sparse = out.sparse_bits().to_bits();
    let r = out.removal_count();
    for ell in 1..=r + 1 {
        for j in 1..d.height() {
            let Some(rec) = out.merge_record(j) else { continue };
            if rec.delta != ell {
                continue;
            }
            assert_eq!(j, group1_top + 1, "merges must absorb the next level");
            let lower: Vec<usize> = (0..j).flat_map(|h| d.level(h).iter().copied()).filter(|&e| alive[e]).collect();
            let upper: Vec<usize> = d.level(j).iter().copied().filter(|&e| alive[e]).collect();
            assert_eq!((rec.len, rec.upper_len), (lower.len(), upper.len()));
            for (x, &l) in lower.iter().enumerate() {
                for (y, &u) in upper.iter().enumerate() {
                    mark(l, u, sparse.get(rec.seq_offset - 1 + x * upper.len() + y));
                }
            }
            group1_top = j;
        }
        if ell > r {
            break;
        }
        let rem = out.removal(ell, d).unwrap();
        let h = rem.header;
        let in_range = |e: usize, lo: usize, hi: usize| (lo..=hi).contains(&d.height_of(e)) && alive[e];
        let lower: Vec<usize> = (0..n)
            .filter(|&e| in_range(e, h.lower_first_level, h.upper_level - 1))
            .collect::<Vec<_>>();
        let mut lower = lower;
        lower.sort_by_key(|&e| (d.height_of(e), d.rank_of(e)));
        let mut upper: Vec<usize> = (0..n).filter(|&e| in_range(e, h.upper_level, h.upper_level)).collect();
        upper.sort_by_key(|&e| d.rank_of(e));
        assert_eq!(rem.lower, lower, "removal {ell} lower side");
        assert_eq!(rem.upper, upper, "removal {ell} upper side");
        assert!(h.lower_first_level == 0 || h.lower_first_level > group1_top);
        for (k, &b) in rem.left.iter().enumerate() {
            for (y, &u) in upper.iter().enumerate() {
                mark(b, u, rem.w_minus[k].get(y));
            }
        }
        for (k, &a) in rem.right.iter().enumerate() {
            for (x, &l) in lower.iter().enumerate() {
                if !rem.left.contains(&l) {
                    mark(l, a, rem.w_plus[k].get(x));
                }
            }
        }
        let members: Vec<(usize, usize, bool)> = rem
            .left
            .iter()
            .enumerate()
            .map(|(k, &e)| (e, k + 1, false))
            .chain(rem.right.iter().enumerate().map(|(k, &e)| (e, h.q + k + 1, true)))
            .collect();
        let mut outside: Vec<usize> =
            (0..n).filter(|&e| alive[e] && !lower.contains(&e) && !upper.contains(&e)).collect();
        outside.sort_by_key(|&e| (d.height_of(e), d.rank_of(e)));
        assert_eq!(rem.h, outside);
        for (k, &v) in outside.iter().enumerate() {
            let above = d.height_of(v) > h.upper_level;
            for &(e, rank, top) in &members {
                let bit = decode_edge(rem.y[k], h.q, rank, top, above).unwrap();
                if above {
                    mark(e, v, bit);
                } else {
                    mark(v, e, bit);
                }
            }
        }
        for &(e, _, _) in &members {
            alive[e] = false;
        }
    }
    (rel, seen)
}

#[test]
fn replay_decoder_rebuilds_the_closure() {
    let mut dense_runs = 0;
    for seed in 0..200u64 {
        let c = instance(seed);
        let d = flat_view(&c);
        let c_min = [4, 16, 64][seed as usize % 3];
        let out = compress_flat(&d, c.matrix(), &config(c_min)).unwrap();
        dense_runs += (out.removal_count() > 0) as usize;
        let (rel, seen) = replay(&out, &d);
        for a in 0..c.n() {
            for b in 0..c.n() {
                let cross = d.height_of(a) < d.height_of(b);
                assert_eq!(seen.get(a, b), cross, "seed {seed}: coverage of ({a},{b})");
                if cross {
                    assert_eq!(rel.get(a, b), c.less(a, b), "seed {seed}: ({a},{b})");
                }
            }
        }
    }
    println!("runs with at least one removal: {dense_runs}/200");
    assert!(dense_runs > 50);
}

#[test]
fn flat_queries_match_closure_on_all_pairs() {
    let mut worst_ops = 0;
    for seed in 0..200u64 {
        let c = instance(1000 + seed);
        let d = flat_view(&c);
        let out = compress_flat(&d, c.matrix(), &config([4, 16, 64][seed as usize % 3])).unwrap();
        for a in 0..c.n() {
            for b in 0..c.n() {
                if a == b {
                    continue;
                }
                let (ea, eb) = (element(&d, a), element(&d, b));
                let mut ops = 0;
                let got = out.query_counted(ea, eb, &mut ops).unwrap();
                worst_ops = worst_ops.max(ops);
                let want = ea.level < eb.level && c.less(a, b);
                assert_eq!(got, want, "seed {seed}: ({a},{b})");
            }
        }
    }
    println!("worst flat query op count: {worst_ops}");
    assert!(worst_ops <= 20);
}

#[test]
fn connectivity_patterns_are_legal() {
    let mut removals = 0;
    for seed in 0..60u64 {
        let c = random_layered_poset(48 + (seed as usize % 5) * 40, seed).unwrap();
        let d = flat_view(&c);
        let out = compress_flat(&d, c.matrix(), &config(4)).unwrap();
        for ell in 1..=out.removal_count() {
            removals += 1;
            let rem = out.removal(ell, &d).unwrap();
            let q = rem.header.q;
            assert_eq!(rem.header.y_len, rem.h.len());
            let mut distinct = std::collections::BTreeSet::new();
            for (k, &v) in rem.h.iter().enumerate() {
                let above = k >= rem.h_below;
                // Brute-force legality: above, an upper-side edge forces every lower-side edge.
                let to = |e: usize| if above { c.less(e, v) } else { c.less(v, e) };
                let (primary, secondary) = if above { (&rem.right, &rem.left) } else { (&rem.left, &rem.right) };
                if primary.iter().any(|&e| to(e)) {
                    assert!(secondary.iter().all(|&e| to(e)), "illegal pattern at removal {ell}");
                }
                let code = connectivity_code(v, &rem, c.matrix()).unwrap();
                assert_eq!(code, rem.y[k]);
                assert!(code <= max_code(q));
                distinct.insert(code);
                for (r, &e) in rem.left.iter().chain(&rem.right).enumerate() {
                    assert_eq!(decode_edge(code, q, r + 1, r >= q, above).unwrap(), to(e));
                }
            }
            assert!(distinct.len() as u64 <= max_code(q) + 1);
            assert_eq!(connectivity_code(rem.left[0], &rem, c.matrix()), Err(Error::Domain(rem.left[0])));
        }
    }
    assert!(removals > 0);
}

/// Every legal pattern for one and two vertices per side, decoded back bit by bit.
#[test]
fn code_round_trip_exhaustive_small_sides() {
    for q in 1..=2usize {
        // Elements: lower side 0..q, upper side q..2q, probe v = 2q (above) or 2q+1 (below).
        let n = 2 * q + 2;
        let (above_v, below_v) = (2 * q, 2 * q + 1);
        let mut codes = std::collections::BTreeSet::new();
        for above in [true, false] {
            for mask in 0u32..(1 << (2 * q)) {
                let mut pairs: Vec<(usize, usize)> = (0..q).flat_map(|l| (q..2 * q).map(move |u| (l, u))).collect();
                for k in 0..2 * q {
                    if mask >> k & 1 == 1 {
                        pairs.push(if above { (k, above_v) } else { (below_v, k) });
                    }
                }
                let rel = BitMatrix::from_pairs(n, pairs.clone()).unwrap();
                let legal = ClosureMatrix::new(rel.clone()).is_ok();
                let d = AntichainDecomposition::from_levels(
                    n,
                    vec![vec![below_v], (0..q).collect(), (q..2 * q).collect(), vec![above_v]],
                )
                .unwrap();
                let _ = d;
                let v = if above { above_v } else { below_v };
                let left: Vec<usize> = (0..q).collect();
                let right: Vec<usize> = (q..2 * q).collect();
                let rem = succinct_poset::compress::DenseRemoval {
                    ell: 1,
                    header: succinct_poset::compress::RemovalHeader {
                        lower_first_level: 1,
                        upper_level: 2,
                        q,
                        lower_size: q,
                        upper_size: q,
                        offset: 0,
                        y_len: 1,
                    },
                    left: left.clone(),
                    right: right.clone(),
                    lower: left,
                    upper: right,
                    h: vec![v],
                    h_below: if above { 0 } else { 1 },
                    w_minus: vec![],
                    w_plus: vec![],
                    y: vec![],
                };
                match connectivity_code(v, &rem, &rel) {
                    Ok(code) => {
                        assert!(legal, "q={q} mask={mask:b}: illegal pattern encoded");
                        assert!(code <= max_code(q));
                        codes.insert((above, code));
                        for k in 0..2 * q {
                            assert_eq!(decode_edge(code, q, k + 1, k >= q, above).unwrap(), mask >> k & 1 == 1);
                        }
                    }
                    Err(Error::NotTransitive { .. }) => assert!(!legal, "q={q} mask={mask:b}: legal pattern rejected"),
                    Err(e) => panic!("unexpected {e}"),
                }
            }
        }
        // Exactly 2^{q+1} - 1 legal patterns on each side, all with distinct codes.
        for above in [true, false] {
            assert_eq!(codes.iter().filter(|c| c.0 == above).count() as u64, max_code(q) + 1);
        }
    }
    // The single-vertex example: above, joined to the upper member.
    assert!(decode_edge(1, 1, 2, true, true).unwrap());
    assert!(decode_edge(1, 1, 1, false, true).unwrap());
}

#[test]
fn membership_ranks_match_set_difference() {
    let mut rng = SplitMix64::new(5);
    for _ in 0..50 {
        let n = 1 + rng.below(300) as usize;
        let mut pool: Vec<usize> = (1..=n).collect();
        let mut removed = Vec::new();
        while pool.len() >= 2 && rng.bernoulli(0.8) {
            let k = 2 + rng.below((pool.len() - 1).min(6) as u64) as usize;
            let k = k.min(pool.len());
            let mut set = Vec::new();
            for _ in 0..k {
                set.push(pool.remove(rng.below(pool.len() as u64) as usize));
            }
            set.sort_unstable();
            removed.push(set);
        }
        let seqs = build_membership(n, &removed);
        assert_eq!(seqs.len(), removed.len() + 1);
        for (l, s) in seqs.iter().enumerate() {
            let gone: Vec<usize> = removed[..l].iter().flatten().copied().collect();
            let mut count = 0;
            for x in 1..=n {
                count += !gone.contains(&x) as usize;
                assert_eq!(s.rank(x).unwrap(), count);
            }
            if l > 0 {
                let prev = seqs[l - 1].to_bits();
                assert!(s.to_bits().iter().zip(prev.iter()).all(|(a, b)| !a || b));
            }
        }
    }
}

#[test]
fn serialization_round_trips_and_rejects_damage() {
    let c = random_layered_poset(200, 3).unwrap();
    let d = flat_view(&c);
    let out = compress_flat(&d, c.matrix(), &config(4)).unwrap();
    assert!(out.removal_count() > 0);
    let mut w = succinct_poset::codec::ByteWriter::new();
    out.write_to(&mut w);
    let bytes = w.into_inner();
    let back = CompressOutput::read_from(&mut succinct_poset::codec::ByteReader::new(&bytes)).unwrap();
    assert_eq!(back, out);
    for cut in [0, 8, bytes.len() / 2, bytes.len() - 1] {
        assert!(CompressOutput::read_from(&mut succinct_poset::codec::ByteReader::new(&bytes[..cut])).is_err());
    }
}

#[test]
fn size_report_is_itemized() {
    let c = random_layered_poset(512, 1).unwrap();
    let d = flat_view(&c);
    let out = compress_flat(&d, c.matrix(), &CompressConfig::default()).unwrap();
    let r = out.size_report();
    assert_eq!(r.total_bits, r.w_bits + r.y_bits + r.sparse_bits + r.membership_bits + r.aux_bits);
    println!("{r:?} total/quarter={:.3}", r.total_bits as f64 / r.quarter);
    assert!(r.removals > 0);
}
