use proptest::prelude::*;
use rand::Rng;

use super::*;
use crate::rng;

fn digraph(n: usize, edges: &[(usize, usize)]) -> AttributedGraph {
    AttributedGraph::with_degree_features(n, edges.to_vec()).unwrap()
}

fn random_digraph(n: usize, density: f64, seed: u64) -> AttributedGraph {
    let mut r = rng::rng(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && r.random::<f64>() < density {
                edges.push((u, v));
            }
        }
    }
    digraph(n, &edges)
}

/// Dense Google-matrix power method, fixed step count.
fn pagerank_oracle(g: &AttributedGraph, steps: usize) -> Vec<f64> {
    let n = g.node_count();
    let nf = n as f64;
    let mut m = vec![vec![0.0; n]; n];
    for u in 0..n {
        let out = g.out_neighbors(u);
        for v in 0..n {
            let follow = if out.is_empty() {
                1.0 / nf
            } else if out.contains(&v) {
                1.0 / out.len() as f64
            } else {
                0.0
            };
            m[v][u] = 0.85 * follow + 0.15 / nf;
        }
    }
    let mut x = vec![1.0 / nf; n];
    for _ in 0..steps {
        x = (0..n)
            .map(|v| (0..n).map(|u| m[v][u] * x[u]).sum())
            .collect();
    }
    x
}

/// k-core by repeated deletion, for every k up to the max degree.
fn coreness_oracle(g: &AttributedGraph) -> Vec<usize> {
    let nbrs = undirected_neighbors(g);
    let n = nbrs.len();
    let mut core = vec![0; n];
    for k in 1..=n {
        let mut alive = vec![true; n];
        loop {
            let drop: Vec<usize> = (0..n)
                .filter(|&v| alive[v] && nbrs[v].iter().filter(|&&u| alive[u]).count() < k)
                .collect();
            if drop.is_empty() {
                break;
            }
            drop.into_iter().for_each(|v| alive[v] = false);
        }
        for v in 0..n {
            if alive[v] {
                core[v] = k;
            }
        }
    }
    core
}

/// Floyd–Warshall distances turned into corrected closeness.
fn closeness_oracle(g: &AttributedGraph) -> Vec<f64> {
    let n = g.node_count();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = 0;
        for &v in g.out_neighbors(u) {
            row[v] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    (0..n)
        .map(|v| {
            let reach: Vec<usize> = (0..n)
                .filter(|&u| u != v && d[v][u] < inf)
                .map(|u| d[v][u])
                .collect();
            if reach.is_empty() {
                return 0.0;
            }
            let r = reach.len() as f64;
            r / (n - 1) as f64 * r / reach.iter().sum::<usize>() as f64
        })
        .collect()
}

#[test]
fn path_closeness() {
    let g = AttributedGraph::undirected(3, &[(0, 1), (1, 2)]).unwrap();
    let c = closeness(&g);
    assert!((c[1] - 1.0).abs() < 1e-15);
    assert!((c[0] - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(closeness(&digraph(2, &[]))[0], 0.0);
}

#[test]
fn triangle_and_path_coreness() {
    let tri = AttributedGraph::undirected(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
    assert_eq!(coreness(&tri), vec![2, 2, 2]);
    let path = AttributedGraph::undirected(3, &[(0, 1), (1, 2)]).unwrap();
    assert_eq!(coreness(&path), vec![1, 1, 1]);
    // Direction is ignored: a directed triangle is still a 2-core.
    assert_eq!(
        coreness(&digraph(3, &[(0, 1), (1, 2), (2, 0)])),
        vec![2, 2, 2]
    );
}

#[test]
fn mutual_pair_pagerank() {
    let pr = pagerank(&digraph(2, &[(0, 1), (1, 0)]), DAMPING, PAGERANK_TOLERANCE).unwrap();
    assert!((pr[0] - 0.5).abs() < 1e-12 && (pr[1] - 0.5).abs() < 1e-12);
}

#[test]
fn star_pagerank_matches_oracle() {
    let g = digraph(3, &[(1, 0), (2, 0)]);
    let pr = centrality(&g, Measure::Pagerank).unwrap().scores;
    let oracle = pagerank_oracle(&g, 10_000);
    for (a, b) in pr.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-9, "{pr:?} {oracle:?}");
    }
}

#[test]
fn random_pagerank_matches_oracle() {
    for seed in 0..20 {
        let n = 5 + (seed as usize * 5) % 96;
        let g = random_digraph(n, 3.0 / n as f64, seed);
        let pr = pagerank(&g, DAMPING, PAGERANK_TOLERANCE).unwrap();
        let oracle = pagerank_oracle(&g, 10_000);
        let worst = pr
            .iter()
            .zip(&oracle)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-9, "seed {seed}: {worst:e}");
        assert!((pr.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn degree_is_in_plus_out() {
    let g = digraph(3, &[(0, 1), (1, 0), (2, 0)]);
    assert_eq!(
        centrality(&g, Measure::Degree).unwrap().scores,
        vec![3.0, 2.0, 1.0]
    );
}

#[test]
fn measure_names() {
    for m in Measure::ALL {
        assert_eq!(m.name().parse::<Measure>().unwrap(), m);
        assert_eq!(m.strategy().parse::<Measure>().unwrap(), m);
        assert_eq!(Measure::from_strategy(m.strategy()), Some(m));
    }
    assert!("betweenness".parse::<Measure>().is_err());
    assert!(centrality(&digraph(0, &[]), Measure::Degree).is_err());
}

#[test]
fn budget_examples() {
    let p20 = Partition::new((0..40).map(|v| v % 20).collect(), 20).unwrap();
    assert_eq!(allocate_budget(&p20, 20).unwrap(), vec![1; 20]);

    let sizes = Partition::new((0..40).map(|v| usize::from(v >= 30)).collect(), 2).unwrap();
    assert_eq!(allocate_budget(&sizes, 4).unwrap(), vec![3, 1]);

    let five = Partition::new(vec![0, 1, 1, 2, 3, 3, 3, 4], 5).unwrap();
    assert_eq!(allocate_budget(&five, 2).unwrap(), vec![0, 1, 0, 1, 0]);

    assert!(allocate_budget(&five, 0).is_err());
}

#[test]
fn largest_remainder_breaks_ties_by_size() {
    // Sizes 5, 3, 2 with k = 5: quotas 2.5, 1.5, 1.0.
    let p = Partition::new(vec![0, 0, 0, 0, 0, 1, 1, 1, 2, 2], 3).unwrap();
    assert_eq!(allocate_budget(&p, 5).unwrap(), vec![3, 1, 1]);
}

#[test]
fn star_center_by_degree() {
    let g = AttributedGraph::undirected(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
    let p = Partition::new(vec![0; 5], 1).unwrap();
    let s = select_seeds(&g, &p, &[1], Measure::Degree).unwrap();
    assert_eq!(s.order(), vec![0]);
}

#[test]
fn one_seed_per_clique() {
    let mut pairs = Vec::new();
    for (a, b) in [(0, 4), (4, 8)] {
        for u in a..b {
            for v in u + 1..b {
                pairs.push((u, v));
            }
        }
    }
    let g = AttributedGraph::undirected(8, &pairs).unwrap();
    let p = Partition::new((0..8).map(|v| usize::from(v >= 4)).collect(), 2).unwrap();
    for m in Measure::ALL {
        let s = select_seeds(&g, &p, &[1, 1], m).unwrap();
        // Every clique node ties; the lowest id wins.
        assert_eq!(s.order(), vec![0, 4], "{m}");
    }
}

#[test]
fn pagerank_and_degree_choose_differently() {
    // 0 fans out to many leaves; 5 collects a chain of endorsements.
    let g = digraph(
        8,
        &[
            (0, 1),
            (0, 2),
            (0, 3),
            (0, 4),
            (1, 5),
            (2, 5),
            (6, 5),
            (5, 7),
            (7, 6),
        ],
    );
    let p = Partition::new(vec![0; 8], 1).unwrap();
    let dd = select_seeds(&g, &p, &[1], Measure::Degree).unwrap().order()[0];
    let dpr = select_seeds(&g, &p, &[1], Measure::Pagerank)
        .unwrap()
        .order()[0];
    let deg: Vec<usize> = (0..8).map(|v| g.in_degree(v) + g.out_degree(v)).collect();
    let pr = pagerank_oracle(&g, 10_000);
    let argmax = |x: &[f64]| (0..x.len()).fold(0, |b, i| if x[i] > x[b] { i } else { b });
    assert_eq!(
        dd,
        argmax(&deg.iter().map(|&d| d as f64).collect::<Vec<_>>())
    );
    assert_eq!(dpr, argmax(&pr));
    assert_ne!(dd, dpr);
}

#[test]
fn centrality_uses_community_subgraph() {
    // Node 2 is a hub only through edges into the other community.
    let g = digraph(6, &[(0, 1), (1, 0), (2, 3), (2, 4), (2, 5), (1, 2), (3, 4)]);
    let p = Partition::new(vec![0, 0, 0, 1, 1, 1], 2).unwrap();
    let s = select_seeds(&g, &p, &[1, 1], Measure::Degree).unwrap();
    // Inside {0,1,2}: degrees 2, 3, 1.
    assert_eq!(s.order(), vec![1, 3]);
}

#[test]
fn shortfall_takes_whole_community() {
    let g = digraph(3, &[(0, 1)]);
    let p = Partition::new(vec![0, 0, 1], 2).unwrap();
    let s = select_seeds(&g, &p, &[1, 3], Measure::Closeness).unwrap();
    assert_eq!(s.len(), 2);
    assert!(select_seeds(&g, &p, &[1], Measure::Degree).is_err());
}

#[test]
fn seed_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("seeds.txt");
    let s = SeedSet::new(vec![
        Seed {
            node: 4,
            community: 0,
            rank: 0,
            score: 0.125,
        },
        Seed {
            node: 1,
            community: 1,
            rank: 0,
            score: 3.0,
        },
    ])
    .unwrap();
    s.save(&path).unwrap();
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        "4 0 0 0.125\n1 1 0 3\n"
    );
    assert_eq!(SeedSet::load(&path).unwrap(), s);
    assert!(SeedSet::from_ranked(&[1, 1], &[]).is_err());
}

proptest! {
    #[test]
    fn coreness_matches_peeling(seed in any::<u64>(), n in 1usize..50, density in 0.0f64..0.3) {
        let g = random_digraph(n, density, seed);
        prop_assert_eq!(coreness(&g), coreness_oracle(&g));
    }

    #[test]
    fn closeness_matches_floyd_warshall(seed in any::<u64>(), n in 2usize..30, density in 0.0f64..0.3) {
        let g = random_digraph(n, density, seed);
        for (a, b) in closeness(&g).iter().zip(closeness_oracle(&g)) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pagerank_is_a_distribution(seed in any::<u64>(), n in 1usize..60, density in 0.0f64..0.2) {
        let pr = pagerank(&random_digraph(n, density, seed), DAMPING, PAGERANK_TOLERANCE).unwrap();
        prop_assert!(pr.iter().all(|&x| x >= 0.0));
        prop_assert!((pr.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn seeds_are_distinct_and_fill_budgets(seed in any::<u64>(), k in 1usize..8) {
        let g = random_digraph(30, 0.1, seed);
        let mut r = rng::rng(seed ^ 1);
        let labels: Vec<usize> = (0..30).map(|v| if v < 4 { v } else { r.random_range(0..4) }).collect();
        let p = Partition::new(labels, 4).unwrap();
        let budgets = allocate_budget(&p, k).unwrap();
        prop_assert_eq!(budgets.iter().sum::<usize>(), k);
        for m in Measure::ALL {
            let s = select_seeds(&g, &p, &budgets, m).unwrap();
            prop_assert_eq!(s.nodes().len(), k);
            for seed in s.seeds() {
                prop_assert_eq!(p.community_of(seed.node), seed.community);
            }
        }
    }
}
