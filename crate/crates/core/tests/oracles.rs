//! The library's kernels checked against slow, independent reference
//! implementations on small graphs.

use std::collections::BTreeSet;

use grouptest::constructions::{
    expander_regular_graph, kautz_singleton, random_bernoulli_design, random_regular_graph,
    regular_inner_graph, trivial_expander, ExpanderSpec, RegularConstructionParams,
};
use grouptest::simulate::{measure, threshold_measure};
use grouptest::verify::{
    check_condenser, check_disjunct, check_expansion, check_extractor, check_regular,
    check_threshold_disjunct, condenser_excess, distance_check, extractor_distance, Limits,
};
use grouptest::{MeasurementGraph, Model, SparseVector};
use num_rational::Ratio;

fn all_subsets(n: usize, max: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize <= max)
        .map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect())
        .collect()
}

fn pools_of(g: &MeasurementGraph, s: &[usize]) -> BTreeSet<usize> {
    s.iter().flat_map(|&i| g.item(i).iter().copied()).collect()
}

/// Reed–Solomon evaluation by summing powers, no Horner.
fn codeword(q: usize, msg: &[usize]) -> Vec<usize> {
    (0..q)
        .map(|x| {
            msg.iter()
                .enumerate()
                .map(|(k, &c)| c * x.pow(k as u32))
                .sum::<usize>()
                % q
        })
        .collect()
}

#[test]
fn kautz_singleton_matches_codewords() {
    for (q, len) in [(3, 2), (5, 2), (5, 3), (7, 2)] {
        let g = kautz_singleton(q, len).unwrap();
        for f in 0..q.pow(len as u32) {
            let digits: Vec<usize> = (0..len).map(|k| f / q.pow(k as u32) % q).collect();
            let expected: Vec<usize> = codeword(q, &digits)
                .into_iter()
                .enumerate()
                .map(|(i, s)| i * q + s)
                .collect();
            assert_eq!(g.item(f), &expected[..], "q={q} len={len} item {f}");
        }
    }
    // 2 + x over GF(3) evaluates to (2, 0, 1)
    assert_eq!(kautz_singleton(3, 2).unwrap().item(5), &[2, 3, 7]);
}

fn disjunct_oracle(g: &MeasurementGraph, d: usize) -> i64 {
    let mut min = i64::MAX;
    for s in all_subsets(g.n_left(), d) {
        let covered = pools_of(g, &s);
        for i in (0..g.n_left()).filter(|i| !s.contains(i)) {
            let private = g.item(i).iter().filter(|r| !covered.contains(r)).count() as i64;
            min = min.min(private);
        }
    }
    min - 1
}

#[test]
fn disjunct_extremal_matches_oracle() {
    let cases = [
        (kautz_singleton(3, 2).unwrap(), 1),
        (kautz_singleton(3, 2).unwrap(), 2),
        (random_bernoulli_design(10, 24, 2, 3).unwrap(), 1),
        (random_bernoulli_design(10, 24, 2, 3).unwrap(), 2),
        (random_bernoulli_design(12, 30, 3, 9).unwrap(), 3),
        (trivial_expander(5, 3).unwrap(), 2),
    ];
    for (g, d) in cases {
        let r = check_disjunct(&g, d, 0, &Limits::default()).unwrap();
        assert_eq!(r.extremal_count(), Some(disjunct_oracle(&g, d)));
    }
    // q positions, two codewords agree in at most one of them
    for (q, d, e) in [(3, 1, 1), (3, 2, 0), (5, 1, 3), (5, 2, 2), (5, 4, 0)] {
        let r = check_disjunct(&kautz_singleton(q, 2).unwrap(), d, 0, &Limits::default()).unwrap();
        assert_eq!(r.extremal_count(), Some(e), "q={q} d={d}");
    }
}

fn loss_oracle(g: &MeasurementGraph, k: usize) -> Ratio<u64> {
    let t = g.left_degree().unwrap() as u64;
    all_subsets(g.n_left(), k)
        .into_iter()
        .filter(|s| !s.is_empty())
        .map(|s| {
            let edges = t * s.len() as u64;
            Ratio::new(edges - pools_of(g, &s).len() as u64, edges)
        })
        .max()
        .unwrap()
}

#[test]
fn expansion_extremal_matches_oracle() {
    for seed in 0..6 {
        let g = random_regular_graph(12, 16, 4, seed).unwrap();
        for k in [1, 2, 3, 5] {
            let r = check_expansion(&g, k, 1.0, &Limits::default()).unwrap();
            assert_eq!(r.extremal_ratio(), Some(loss_oracle(&g, k)));
        }
    }
}

/// Pool probabilities as sums of `1/(|S| t)` per edge.
fn pool_probabilities(g: &MeasurementGraph, s: &[usize]) -> Vec<Ratio<u64>> {
    let t = g.left_degree().unwrap() as u64;
    let mut p = vec![Ratio::from_integer(0); g.n_right()];
    for &i in s {
        for &r in g.item(i) {
            p[r] += Ratio::new(1, s.len() as u64 * t);
        }
    }
    p
}

fn distance_oracle(g: &MeasurementGraph, s: &[usize]) -> Ratio<u64> {
    let uniform = Ratio::new(1, g.n_right() as u64);
    let l1 = pool_probabilities(g, s)
        .into_iter()
        .map(|p| {
            if p > uniform {
                p - uniform
            } else {
                uniform - p
            }
        })
        .fold(Ratio::from_integer(0), |a, b| a + b);
    l1 / 2
}

/// Distance to the nearest distribution with point masses at most `cap`,
/// found by moving excess mass onto pools that are below the cap.
fn redistribution_oracle(g: &MeasurementGraph, s: &[usize], k_prime: usize) -> Ratio<u64> {
    let t = g.left_degree().unwrap() as u64;
    let cap = Ratio::new(1, t * k_prime as u64);
    let mut p = pool_probabilities(g, s);
    let mut moved = Ratio::from_integer(0);
    let mut room: Vec<usize> = (0..p.len()).filter(|&r| p[r] < cap).collect();
    for r in 0..p.len() {
        while p[r] > cap {
            let excess = p[r] - cap;
            let dst = room.pop().expect("cap leaves room");
            let take = excess.min(cap - p[dst]);
            p[r] -= take;
            p[dst] += take;
            moved += take;
            if p[dst] < cap {
                room.push(dst);
            }
        }
    }
    moved
}

#[test]
fn distribution_measures_match_oracles() {
    for seed in 0..4 {
        let g = random_regular_graph(10, 12, 3, seed).unwrap();
        for s in all_subsets(10, 4)
            .into_iter()
            .filter(|s| s.len() >= 2)
            .step_by(7)
        {
            assert_eq!(extractor_distance(&g, &s).unwrap(), distance_oracle(&g, &s));
            for kp in [1, 2, 4] {
                assert_eq!(
                    condenser_excess(&g, &s, kp).unwrap(),
                    redistribution_oracle(&g, &s, kp)
                );
            }
        }
    }
}

#[test]
fn distribution_certifiers_report_exact_worst_case() {
    let g = random_regular_graph(10, 12, 3, 2).unwrap();
    let sets: Vec<Vec<usize>> = all_subsets(10, 4)
        .into_iter()
        .filter(|s| s.len() == 4)
        .collect();
    let worst = sets.iter().map(|s| distance_oracle(&g, s)).max().unwrap();
    let r = check_extractor(&g, 4, 1.0, &Limits::default()).unwrap();
    assert_eq!(r.extremal_ratio(), Some(worst));
    let worst = sets
        .iter()
        .map(|s| redistribution_oracle(&g, s, 2))
        .max()
        .unwrap();
    let r = check_condenser(&g, 4, 2, 1.0, &Limits::default()).unwrap();
    assert_eq!(r.extremal_ratio(), Some(worst));
    // the identity on a single pool group is a perfect extractor
    let id = trivial_expander(4, 1).unwrap();
    let r = check_extractor(&id, 4, 0.0, &Limits::default()).unwrap();
    assert!(r.holds);
    assert_eq!(r.extremal_ratio(), Some(Ratio::from_integer(0)));
}

/// Count of pools with exactly `u` items of `s`, none of `z`, optionally
/// restricted to the pools of `special`.
fn threshold_count(
    g: &MeasurementGraph,
    s: &[usize],
    z: &[usize],
    u: usize,
    special: Option<usize>,
) -> usize {
    (0..g.n_right())
        .filter(|&r| special.map_or(true, |i| g.pool(r).contains(&i)))
        .filter(|&r| {
            let p = g.pool(r);
            p.iter().filter(|v| s.contains(v)).count() == u && !p.iter().any(|v| z.contains(v))
        })
        .count()
}

fn regular_oracle(g: &MeasurementGraph, d: usize, u: usize, lo: usize, special: bool) -> i64 {
    let n = g.n_left();
    let subsets = all_subsets(n, d);
    let mut min = usize::MAX;
    for s in subsets.iter().filter(|s| s.len() >= lo.max(u).max(1)) {
        for z in all_subsets(n, s.len()) {
            if z.iter().any(|v| s.contains(v)) {
                continue;
            }
            if special {
                for &i in s {
                    min = min.min(threshold_count(g, s, &z, u, Some(i)));
                }
            } else {
                min = min.min(threshold_count(g, s, &z, u, None));
            }
        }
    }
    min as i64 - 1
}

#[test]
fn regular_and_threshold_disjunct_match_oracle() {
    for seed in 0..3 {
        let g = random_bernoulli_design(7, 18, 2, seed).unwrap();
        for (d, u, lo) in [(2, 1, 1), (3, 2, 1), (3, 2, 3), (2, 2, 2)] {
            let r = check_regular(&g, d, 0, u, lo, &Limits::default()).unwrap();
            assert_eq!(
                r.extremal_count(),
                Some(regular_oracle(&g, d, u, lo, false))
            );
            let r = check_threshold_disjunct(&g, d, 0, u, &Limits::default()).unwrap();
            assert_eq!(r.extremal_count(), Some(regular_oracle(&g, d, u, 1, true)));
        }
    }
}

#[test]
fn distance_check_matches_oracle() {
    for seed in 0..3 {
        let g = random_bernoulli_design(9, 14, 2, seed).unwrap();
        for (d, model) in [(2, Model::Classical), (3, Model::Threshold(2))] {
            let lo = if model == Model::Classical { 0 } else { 2 };
            let vs: Vec<Vec<usize>> = all_subsets(9, d)
                .into_iter()
                .filter(|s| s.len() >= lo)
                .collect();
            let ys: Vec<Vec<bool>> = vs
                .iter()
                .map(|s| {
                    (0..g.n_right())
                        .map(|r| g.pool(r).iter().filter(|v| s.contains(v)).count() >= model.u())
                        .collect()
                })
                .collect();
            let mut min = usize::MAX;
            for a in 0..ys.len() {
                for b in a + 1..ys.len() {
                    min = min.min(ys[a].iter().zip(&ys[b]).filter(|(p, q)| p != q).count());
                }
            }
            let r = distance_check(&g, d, 0, model, &Limits::default()).unwrap();
            assert_eq!(r.extremal_count(), Some(min as i64 - 1));
        }
    }
}

/// Composition by enumerating length-two paths.
fn compose_oracle(outer: &MeasurementGraph, inner: &MeasurementGraph) -> Vec<BTreeSet<usize>> {
    let size = outer.group_size().unwrap();
    let width = inner.n_right();
    (0..outer.n_left())
        .map(|i| {
            let mut out = BTreeSet::new();
            for j in 0..outer.groups().unwrap() {
                for v in 0..size {
                    if !outer.item(i).contains(&(j * size + v)) {
                        continue;
                    }
                    for k in 0..width {
                        if inner.pool(k).contains(&v) {
                            out.insert(j * width + k);
                        }
                    }
                }
            }
            out
        })
        .collect()
}

#[test]
fn compose_matches_path_enumeration() {
    let outer = random_regular_graph(9, 12, 3, 4).unwrap();
    let inner = random_bernoulli_design(4, 7, 1, 11).unwrap();
    let c = outer.compose(&inner).unwrap();
    let oracle = compose_oracle(&outer, &inner);
    for i in 0..9 {
        assert_eq!(
            c.item(i).iter().copied().collect::<BTreeSet<_>>(),
            oracle[i]
        );
    }
}

#[test]
fn product_and_union_match_pool_semantics() {
    let a = random_bernoulli_design(6, 5, 2, 1).unwrap();
    let b = random_bernoulli_design(6, 4, 2, 2).unwrap();
    let p = a.product(&b).unwrap();
    let u = a.union(&b).unwrap();
    for i in 0..5 {
        for j in 0..4 {
            let expected: BTreeSet<usize> = a.pool(i).iter().chain(b.pool(j)).copied().collect();
            assert_eq!(
                p.pool(i * 4 + j).iter().copied().collect::<BTreeSet<_>>(),
                expected
            );
        }
    }
    for x in all_subsets(6, 3) {
        let x = SparseVector::new(6, x).unwrap();
        let mut bits = measure(&a, &x).unwrap().to_bits();
        bits.extend(measure(&b, &x).unwrap().to_bits());
        assert_eq!(measure(&u, &x).unwrap().to_bits(), bits);
        let t = threshold_measure(&p, &x, 2).unwrap();
        for r in 0..p.n_right() {
            let hits = p.pool(r).iter().filter(|&&v| x.contains(v)).count();
            assert_eq!(t.is_positive(r), hits >= 2);
        }
    }
}

/// Output of the regular construction rebuilt from its definition: hub `w`
/// receives the edges `(v, j)` with `v * 8u + j ≡ w (mod k)`, and each
/// `u`-subset of those edges is one output vertex.
fn inner_oracle(group: usize, k: usize, u: usize) -> Vec<BTreeSet<usize>> {
    let dl = 8 * u;
    let mut pools = Vec::new();
    for w in 0..k {
        let edges: Vec<usize> = (0..group * dl)
            .filter(|e| e % k == w)
            .map(|e| e / dl)
            .collect();
        for m in 0u64..1 << edges.len() {
            if m.count_ones() as usize == u {
                pools.push(
                    (0..edges.len())
                        .filter(|&b| m >> b & 1 == 1)
                        .map(|b| edges[b])
                        .collect(),
                );
            }
        }
    }
    pools
}

#[test]
fn regular_inner_graph_matches_definition() {
    for (group, k, u) in [(2, 4, 1), (2, 8, 2), (4, 16, 2), (1, 8, 1)] {
        let g = regular_inner_graph(group, k, u).unwrap();
        let mut got: Vec<BTreeSet<usize>> = g
            .pools()
            .iter()
            .map(|p| p.iter().copied().collect())
            .collect();
        let mut want = inner_oracle(group, k, u);
        assert_eq!(got.len(), want.len());
        got.sort();
        want.sort();
        assert_eq!(got, want);
    }
}

#[test]
fn regular_construction_output_sizes() {
    // t k C(8u|R|/k, u) with |R| = n
    for (n, t, k, u, size) in [
        (8, 2, 4, 2, 2 * 4 * 496),
        (8, 2, 8, 1, 2 * 8 * 8),
        (16, 1, 16, 2, 120 * 16),
    ] {
        let ing = trivial_expander(n, t).unwrap();
        let expander = ExpanderSpec {
            k,
            epsilon: 0.0,
            t,
            n_left: n,
            n_right: n * t,
        };
        let params = RegularConstructionParams {
            u,
            p: 0.5,
            k,
            expander,
        };
        let g = expander_regular_graph(&params, &ing).unwrap();
        assert_eq!(g.n_right(), size);
        assert_eq!(params.output_size().unwrap(), size as u128);
        let oracle = compose_oracle(&ing, &regular_inner_graph(n, k, u).unwrap());
        for i in 0..n {
            assert_eq!(
                g.item(i).iter().copied().collect::<BTreeSet<_>>(),
                oracle[i]
            );
        }
    }
}
