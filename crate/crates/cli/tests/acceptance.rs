//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Every expected value is recomputed here by brute force rather
//! than taken from the library.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use clusternet::io::read_matrix_path;
use clusternet::padic::{
    ball_network, basis_from_chain, intermediary_balls, linalg, maximal_chains, norm_eval,
    norm_from_chain, orderings, LatticeChain,
};
use clusternet::{
    build_dendrogram, chain_distance, merge_dendrograms, network_dimension, verify_correspondence,
    ClusterNetwork, Dendrogram, DistanceMatrix, Lattice, MetricId, NormSpec, Padic, PadicRing,
    Rational,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Members = BTreeSet<usize>;

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn zero() -> Rational {
    rat(0, 1)
}

fn ensure(cond: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message())
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i:02}")).collect()
}

fn raw(m: &DistanceMatrix) -> Vec<Vec<Rational>> {
    m.rows().to_vec()
}

// ---------------------------------------------------------------------------
// Oracles for single-metric clustering

/// Minimum over all simple paths of the largest step, by exhaustive search.
fn path_oracle(d: &[Vec<Rational>], a: usize, b: usize) -> Rational {
    fn walk(
        d: &[Vec<Rational>],
        at: usize,
        target: usize,
        seen: &mut [bool],
        worst: &Rational,
        best: &mut Option<Rational>,
    ) {
        if at == target {
            if best.as_ref().map_or(true, |b| worst < b) {
                *best = Some(worst.clone());
            }
            return;
        }
        for next in 0..d.len() {
            if !seen[next] {
                seen[next] = true;
                let step = d[at][next].clone().max(worst.clone());
                walk(d, next, target, seen, &step, best);
                seen[next] = false;
            }
        }
    }
    if a == b {
        return zero();
    }
    let mut seen = vec![false; d.len()];
    seen[a] = true;
    let mut best = None;
    walk(d, a, b, &mut seen, &zero(), &mut best);
    best.expect("complete graph")
}

/// Minimax closure by the Floyd-Warshall recurrence.
fn minimax_oracle(d: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = d.len();
    let mut u = d.to_vec();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let through = u[i][k].clone().max(u[k][j].clone());
                if through < u[i][j] {
                    u[i][j] = through;
                }
            }
        }
    }
    u
}

/// Every epsilon-component for every epsilon, found by breadth-first search
/// on the graph of steps of length at most epsilon.
fn cluster_oracle(d: &[Vec<Rational>]) -> BTreeSet<Members> {
    let n = d.len();
    let mut levels: BTreeSet<Rational> = d.iter().flatten().cloned().collect();
    levels.insert(zero());
    let mut out = BTreeSet::new();
    for eps in levels {
        let mut seen = vec![false; n];
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut component = Members::new();
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(at) = queue.pop_front() {
                component.insert(at);
                for next in 0..n {
                    if !seen[next] && d[at][next] <= eps {
                        seen[next] = true;
                        queue.push_back(next);
                    }
                }
            }
            out.insert(component);
        }
    }
    out
}

/// Pairs `(A, B)` with `A ⊂ B` and nothing strictly between.
fn cover_edges(clusters: &BTreeSet<Members>) -> BTreeSet<(Members, Members)> {
    let mut edges = BTreeSet::new();
    for a in clusters {
        for b in clusters {
            if a.len() < b.len() && a.is_subset(b) {
                let between = clusters
                    .iter()
                    .any(|c| a.len() < c.len() && c.len() < b.len() && a.is_subset(c) && c.is_subset(b));
                if !between {
                    edges.insert((a.clone(), b.clone()));
                }
            }
        }
    }
    edges
}

fn tree_clusters(tree: &Dendrogram) -> BTreeSet<Members> {
    tree.clusters()
        .iter()
        .map(|c| c.members.as_slice().iter().copied().collect())
        .collect()
}

fn tree_edges(tree: &Dendrogram) -> BTreeSet<(Members, Members)> {
    let members = |i: usize| -> Members { tree.clusters()[i].members.as_slice().iter().copied().collect() };
    tree.edges().into_iter().map(|(c, p)| (members(c), members(p))).collect()
}

/// Coverage, unique least cluster over each pair, no duplicates, and the
/// radius of that cluster equal to the chain distance.
fn check_axioms(tree: &Dendrogram, ultra: &[Vec<Rational>]) -> Result<(), String> {
    let n = ultra.len();
    let clusters = tree.clusters();
    let sets: Vec<Members> = clusters
        .iter()
        .map(|c| c.members.as_slice().iter().copied().collect())
        .collect();
    let unique: BTreeSet<_> = sets.iter().collect();
    ensure(unique.len() == sets.len(), || "duplicate cluster".into())?;
    ensure(sets.iter().any(|s| s.len() == n), || "no cluster holds every point".into())?;
    for a in 0..n {
        ensure(sets.iter().any(|s| s.contains(&a)), || format!("point {a} uncovered"))?;
        for b in 0..n {
            let containing: Vec<usize> = (0..sets.len())
                .filter(|&i| sets[i].contains(&a) && sets[i].contains(&b))
                .collect();
            let least: Vec<usize> = containing
                .iter()
                .copied()
                .filter(|&i| containing.iter().all(|&j| sets[i].is_subset(&sets[j])))
                .collect();
            ensure(least.len() == 1, || format!("sup({a},{b}) is not unique"))?;
            let sup = tree.sup_index(a, b);
            ensure(sup == least[0], || format!("sup({a},{b}) disagrees"))?;
            ensure(clusters[sup].radius == ultra[a][b], || {
                format!("radius of sup({a},{b}) is {} not {}", clusters[sup].radius, ultra[a][b])
            })?;
        }
    }
    Ok(())
}

fn random_dissimilarity(rng: &mut StdRng, n: usize) -> DistanceMatrix {
    let mut d = vec![vec![zero(); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rat(rng.gen_range(1..12), rng.gen_range(1..5));
            d[i][j] = v.clone();
            d[j][i] = v;
        }
    }
    DistanceMatrix::new(labels(n), d).unwrap()
}

/// Merges random clusters at nondecreasing heights; the merge height of two
/// points is an ultrametric.
fn random_ultrametric(rng: &mut StdRng, n: usize) -> DistanceMatrix {
    let mut d = vec![vec![zero(); n]; n];
    let mut groups: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut height = rat(rng.gen_range(1..4), rng.gen_range(1..4));
    while groups.len() > 1 {
        if rng.gen_bool(0.6) {
            height += rat(rng.gen_range(1..6), rng.gen_range(1..7));
        }
        let a = rng.gen_range(0..groups.len());
        let first = groups.swap_remove(a);
        let b = rng.gen_range(0..groups.len());
        let second = &mut groups[b];
        for &x in &first {
            for &y in second.iter() {
                d[x][y] = height.clone();
                d[y][x] = height.clone();
            }
        }
        second.extend(first);
    }
    DistanceMatrix::new(labels(n), d).unwrap()
}

// ---------------------------------------------------------------------------
// Criteria 1 to 4

struct Suite {
    /// Every dendrogram built along the way, with its oracle chain distance.
    trees: Vec<(String, Dendrogram, Vec<Vec<Rational>>)>,
}

fn criterion_1(suite: &mut Suite) -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    for case in 0..200 {
        let n = rng.gen_range(1..=6);
        let m = random_dissimilarity(&mut rng, n);
        let d = raw(&m);
        let u = chain_distance(&m);
        let mut ultra = vec![vec![zero(); n]; n];
        for a in 0..n {
            for b in 0..n {
                ultra[a][b] = path_oracle(&d, a, b);
                ensure(u.get(a, b) == &ultra[a][b], || {
                    format!("case {case}: d({a},{b}) = {} but the path oracle gives {}", u.get(a, b), ultra[a][b])
                })?;
            }
        }
        let tree = build_dendrogram(&m).map_err(|e| e.to_string())?;
        suite.trees.push((format!("random dissimilarity {case}"), tree, ultra));
    }
    Ok("200 random dissimilarities, n <= 6, exact".into())
}

fn criterion_2(suite: &mut Suite) -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0002);
    for case in 0..100 {
        let n = rng.gen_range(1..=16);
        let m = random_ultrametric(&mut rng, n);
        ensure(m.is_ultrametric(), || format!("case {case}: generator is broken"))?;
        let u = chain_distance(&m);
        ensure(u.as_matrix() == &m, || format!("case {case}: chain distance moved an ultrametric"))?;
        let tree = build_dendrogram(&m).map_err(|e| e.to_string())?;
        suite.trees.push((format!("random ultrametric {case}"), tree, raw(&m)));
    }
    Ok("100 random ultrametrics, n <= 16, unchanged".into())
}

fn names_to_members(net_labels: &[&str], text: &str) -> Members {
    text.chars()
        .map(|c| net_labels.iter().position(|l| *l == c.to_string()).expect("label exists"))
        .collect()
}

fn expected_edges(label_names: &[&str], edges: &[(&str, &str)]) -> BTreeSet<(Members, Members)> {
    edges
        .iter()
        .map(|(c, p)| (names_to_members(label_names, c), names_to_members(label_names, p)))
        .collect()
}

fn network_edges(net: &ClusterNetwork) -> BTreeSet<(Members, Members)> {
    let members = |i: usize| -> Members { net.vertices()[i].members.as_slice().iter().copied().collect() };
    net.edges().iter().map(|e| (members(e.child), members(e.parent))).collect()
}

fn network_vertices(net: &ClusterNetwork) -> BTreeSet<Members> {
    net.vertices()
        .iter()
        .map(|v| v.members.as_slice().iter().copied().collect())
        .collect()
}

fn check_tree(
    suite: &mut Suite,
    file: &str,
    expected: &[(&str, &str)],
) -> Result<Dendrogram, String> {
    let m = read_matrix_path(&fixture(file)).map_err(|e| e.to_string())?;
    let names: Vec<&str> = m.labels().iter().map(|l| l.as_str()).collect();
    let want = expected_edges(&names, expected);
    let tree = build_dendrogram(&m).map_err(|e| e.to_string())?;
    let d = raw(&m);
    let oracle = cluster_oracle(&d);
    ensure(tree_clusters(&tree) == oracle, || format!("{file}: clusters differ from the epsilon sweep"))?;
    ensure(cover_edges(&oracle) == want, || format!("{file}: the epsilon sweep disagrees with the reference edges"))?;
    ensure(tree_edges(&tree) == want, || format!("{file}: tree edges differ from the reference"))?;
    suite.trees.push((file.to_string(), tree.clone(), minimax_oracle(&d)));
    Ok(tree)
}

fn check_network(
    trees: &[Dendrogram],
    ids: &[&str],
    vertices: &[&str],
    edges: &[(&str, &str)],
) -> Result<ClusterNetwork, String> {
    let ids: Vec<MetricId> = ids.iter().map(|s| MetricId::new(*s)).collect();
    let net = merge_dendrograms(trees, &ids).map_err(|e| e.to_string())?;
    let names: Vec<&str> = net.labels().iter().map(|l| l.as_str()).collect();
    let want_vertices: BTreeSet<Members> = vertices.iter().map(|v| names_to_members(&names, v)).collect();
    let want_edges = expected_edges(&names, edges);
    let union_vertices: BTreeSet<Members> = trees.iter().flat_map(tree_clusters).collect();
    let union_edges: BTreeSet<_> = trees.iter().flat_map(tree_edges).collect();
    ensure(network_vertices(&net) == want_vertices, || "vertex set differs".into())?;
    ensure(union_vertices == want_vertices, || "union of trees differs".into())?;
    ensure(network_edges(&net) == want_edges, || "edge set differs".into())?;
    ensure(union_edges == want_edges, || "union of tree edges differs".into())?;
    ensure(net.edges().len() == edges.len(), || "edge count differs".into())?;
    Ok(net)
}

fn criterion_3(suite: &mut Suite) -> Outcome {
    let a1 = check_tree(suite, "fig1.csv", &[("A", "AB"), ("B", "AB"), ("AB", "ABC"), ("C", "ABC")])?;
    let b1 = check_tree(suite, "fig2.csv", &[("B", "BC"), ("C", "BC"), ("BC", "ABC"), ("A", "ABC")])?;
    check_network(
        &[a1, b1],
        &["A1", "B1"],
        &["A", "B", "C", "AB", "BC", "ABC"],
        &[
            ("A", "AB"),
            ("B", "AB"),
            ("AB", "ABC"),
            ("C", "ABC"),
            ("B", "BC"),
            ("C", "BC"),
            ("BC", "ABC"),
            ("A", "ABC"),
        ],
    )
    .map_err(|e| format!("C1: {e}"))?;
    let a2 = check_tree(
        suite,
        "quad_a.csv",
        &[("A", "AB"), ("B", "AB"), ("C", "CD"), ("D", "CD"), ("AB", "ABCD"), ("CD", "ABCD")],
    )?;
    let b2 = check_tree(
        suite,
        "quad_b.csv",
        &[("A", "AC"), ("C", "AC"), ("B", "BD"), ("D", "BD"), ("AC", "ABCD"), ("BD", "ABCD")],
    )?;
    check_network(
        &[a2, b2],
        &["A2", "B2"],
        &["A", "B", "C", "D", "AB", "CD", "AC", "BD", "ABCD"],
        &[
            ("A", "AB"),
            ("B", "AB"),
            ("C", "CD"),
            ("D", "CD"),
            ("AB", "ABCD"),
            ("CD", "ABCD"),
            ("A", "AC"),
            ("C", "AC"),
            ("B", "BD"),
            ("D", "BD"),
            ("AC", "ABCD"),
            ("BD", "ABCD"),
        ],
    )
    .map_err(|e| format!("C2: {e}"))?;
    Ok("A1, B1, A2, B2 trees; C1 6 vertices / 8 edges; C2 9 vertices / 12 edges".into())
}

fn criterion_4(suite: &Suite) -> Outcome {
    for (name, tree, ultra) in &suite.trees {
        check_axioms(tree, ultra).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(format!("{} dendrograms", suite.trees.len()))
}

// ---------------------------------------------------------------------------
// Oracles over F_p and Z_p

/// Integer vectors with coordinates in `[0, side)`.
fn vectors(d: usize, side: u64) -> Vec<Vec<u64>> {
    (0..side.pow(d as u32))
        .map(|mut code| {
            (0..d)
                .map(|_| {
                    let x = code % side;
                    code /= side;
                    x
                })
                .collect()
        })
        .collect()
}

/// Subspaces of F_p^d by closing sets of vectors under linear combination.
fn subspace_oracle(p: u64, d: usize) -> Vec<BTreeSet<Vec<u64>>> {
    let all = vectors(d, p);
    let close = |mut space: BTreeSet<Vec<u64>>| loop {
        let mut grown = space.clone();
        for a in &space {
            for b in &space {
                for c in 0..p {
                    grown.insert(a.iter().zip(b).map(|(x, y)| (x + c * y) % p).collect());
                }
            }
        }
        if grown == space {
            return space;
        }
        space = grown;
    };
    let mut found = BTreeSet::from([BTreeSet::from([vec![0; d]])]);
    let mut frontier: Vec<BTreeSet<Vec<u64>>> = found.iter().cloned().collect();
    while let Some(space) = frontier.pop() {
        for v in &all {
            if !space.contains(v) {
                let mut next = space.clone();
                next.insert(v.clone());
                let next = close(next);
                if found.insert(next.clone()) {
                    frontier.push(next);
                }
            }
        }
    }
    found.into_iter().collect()
}

fn oracle_dim(p: u64, space: &BTreeSet<Vec<u64>>) -> usize {
    let mut size = space.len() as u64;
    let mut k = 0;
    while size > 1 {
        size /= p;
        k += 1;
    }
    k
}

fn oracle_flags(p: u64, d: usize, spaces: &[BTreeSet<Vec<u64>>]) -> usize {
    fn count(p: u64, d: usize, spaces: &[BTreeSet<Vec<u64>>], at: &BTreeSet<Vec<u64>>) -> usize {
        let k = oracle_dim(p, at);
        if k == d {
            return 1;
        }
        spaces
            .iter()
            .filter(|s| oracle_dim(p, s) == k + 1 && at.is_subset(s))
            .map(|s| count(p, d, spaces, s))
            .sum()
    }
    count(p, d, spaces, &BTreeSet::from([vec![0; d]]))
}

fn padic_vec(ring: &PadicRing, xs: &[i64]) -> Vec<Padic> {
    xs.iter().map(|&x| ring.from_int(x)).collect()
}

fn residues(ring: &PadicRing, v: &[Padic]) -> Result<Vec<u64>, String> {
    v.iter().map(|x| ring.residue(x, 1).map_err(|e| e.to_string())).collect()
}

fn det_mod_p(p: u64, m: &[Vec<u64>]) -> u64 {
    let d = m.len();
    let mut a: Vec<Vec<u64>> = m.to_vec();
    let mut det = 1u64;
    for col in 0..d {
        let Some(pivot) = (col..d).find(|&r| a[r][col] % p != 0) else {
            return 0;
        };
        if pivot != col {
            a.swap(pivot, col);
            det = (p - det) % p;
        }
        det = det * a[col][col] % p;
        let inv = (1..p).find(|x| x * a[col][col] % p == 1).unwrap();
        for r in (col + 1)..d {
            let factor = a[r][col] * inv % p;
            for c in 0..d {
                a[r][c] = (a[r][c] + p * p - factor * a[col][c] % p) % p;
            }
        }
    }
    det
}

fn box_points(d: usize, side: i64) -> Vec<Vec<i64>> {
    vectors(d, side as u64)
        .into_iter()
        .map(|v| v.into_iter().map(|x| x as i64).collect())
        .collect()
}

const LEVELS: [(u64, usize); 3] = [(2, 2), (3, 2), (2, 3)];

fn generic_q(p: u64, d: usize) -> Vec<Rational> {
    match (p, d) {
        (_, 1) => vec![rat(3, 4)],
        (3, 3) => vec![rat(1, 2), rat(3, 5), rat(4, 5)],
        (_, 2) => vec![rat(3, 5), rat(4, 5)],
        _ => vec![rat(5, 8), rat(3, 4), rat(7, 8)],
    }
}

fn chains(p: u64, d: usize) -> Result<(PadicRing, Vec<LatticeChain>), String> {
    let ring = PadicRing::new(p, 10).map_err(|e| e.to_string())?;
    let chains = maximal_chains(&ring, &Lattice::standard(p, d)).map_err(|e| e.to_string())?;
    Ok((ring, chains))
}

// ---------------------------------------------------------------------------
// Criteria 5 to 10

fn criterion_5() -> Outcome {
    let expected = [(3usize, 3usize), (4, 4), (14, 21)];
    let mut summary = Vec::new();
    for ((p, d), (between, maximal)) in LEVELS.into_iter().zip(expected) {
        let spaces = subspace_oracle(p, d);
        let oracle_between = spaces
            .iter()
            .filter(|s| (1..d).contains(&oracle_dim(p, s)))
            .count();
        let oracle_chains = oracle_flags(p, d, &spaces);
        let (ring, found) = chains(p, d)?;
        let strictly: BTreeSet<Lattice> = clusternet::padic::lattices_between(&ring, &Lattice::standard(p, d))
            .map_err(|e| e.to_string())?
            .into_iter()
            .filter(|(k, _)| (1..d).contains(k))
            .map(|(_, l)| l)
            .collect();
        ensure(oracle_between == between && oracle_chains == maximal, || {
            format!("(p,d)=({p},{d}): the oracle gives {oracle_between} / {oracle_chains}")
        })?;
        ensure(strictly.len() == between, || {
            format!("(p,d)=({p},{d}): {} lattices strictly between, expected {between}", strictly.len())
        })?;
        ensure(found.len() == maximal, || {
            format!("(p,d)=({p},{d}): {} maximal chains, expected {maximal}", found.len())
        })?;
        summary.push(format!("({p},{d}): {between}/{maximal}"));
    }
    Ok(summary.join(", "))
}

fn criterion_6() -> Outcome {
    let mut total = 0;
    for (p, d) in LEVELS {
        let (ring, found) = chains(p, d)?;
        let points = box_points(d, (p * p) as i64);
        for (index, chain) in found.iter().enumerate() {
            let basis = basis_from_chain(&ring, chain).map_err(|e| e.to_string())?;
            let f: Vec<Vec<u64>> = basis.iter().map(|v| residues(&ring, v)).collect::<Result<_, _>>()?;
            ensure(det_mod_p(p, &f) != 0, || format!("({p},{d}) chain {index}: basis is not unimodular"))?;
            for (j, lattice) in chain.lattices().iter().enumerate() {
                // Vectors of sum_{i<=j} Z_p f_i + sum_{i>j} p Z_p f_i, read mod p.
                let span: BTreeSet<Vec<u64>> = vectors(j, p)
                    .into_iter()
                    .map(|c| {
                        (0..d)
                            .map(|k| c.iter().enumerate().map(|(i, ci)| ci * f[i][k]).sum::<u64>() % p)
                            .collect()
                    })
                    .collect();
                let span = if j == 0 { BTreeSet::from([vec![0; d]]) } else { span };
                for x in &points {
                    let inside = lattice
                        .contains(&ring, &padic_vec(&ring, x))
                        .map_err(|e| e.to_string())?;
                    let residue: Vec<u64> = x.iter().map(|&v| v as u64 % p).collect();
                    ensure(inside == span.contains(&residue), || {
                        format!("({p},{d}) chain {index}: L_{j} and the decomposition disagree at {x:?}")
                    })?;
                }
            }
            total += 1;
        }
    }
    Ok(format!("{total} chains, membership checked on (Z/p^2)^d"))
}

/// The distinct balls `{x : N(x) <= r}` with `pL ⊆ B ⊆ L`, as point sets
/// over `[0, p^2)^d`.
fn brute_force_balls(norm: &NormSpec, p: u64, d: usize) -> Result<Vec<BTreeSet<Vec<i64>>>, String> {
    let ring = *norm.ring();
    let points = box_points(d, (p * p) as i64);
    let values: Vec<Rational> = points
        .iter()
        .map(|x| norm_eval(norm, &padic_vec(&ring, x)).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let top = norm.weights().iter().max().unwrap().clone();
    let bottom = top.clone() / Rational::from_integer(p.into());
    let radii: BTreeSet<&Rational> = values.iter().filter(|v| **v >= bottom && **v <= top).collect();
    let mut balls: Vec<BTreeSet<Vec<i64>>> = Vec::new();
    for r in radii {
        let ball: BTreeSet<Vec<i64>> = points
            .iter()
            .zip(&values)
            .filter(|(_, v)| *v <= r)
            .map(|(x, _)| x.clone())
            .collect();
        if !balls.contains(&ball) {
            balls.push(ball);
        }
    }
    Ok(balls)
}

fn lattice_points(ring: &PadicRing, lattice: &Lattice, p: u64, d: usize) -> Result<BTreeSet<Vec<i64>>, String> {
    let mut out = BTreeSet::new();
    for x in box_points(d, (p * p) as i64) {
        if lattice.contains(ring, &padic_vec(ring, &x)).map_err(|e| e.to_string())? {
            out.insert(x);
        }
    }
    Ok(out)
}

fn criterion_7() -> Outcome {
    let mut summary = Vec::new();
    for (p, d) in LEVELS {
        let q = generic_q(p, d);
        let (ring, found) = chains(p, d)?;
        let flags = oracle_flags(p, d, &subspace_oracle(p, d));
        ensure(found.len() == flags, || format!("({p},{d}): {} chains but {flags} flags", found.len()))?;
        let mut ball_chains = BTreeSet::new();
        for (index, chain) in found.iter().enumerate() {
            let norm = norm_from_chain(&ring, chain, &q).map_err(|e| e.to_string())?;
            let back = intermediary_balls(&norm, chain.top()).map_err(|e| e.to_string())?;
            ensure(back.lattices() == chain.lattices(), || {
                format!("({p},{d}) chain {index}: intermediary balls differ from the chain")
            })?;
            let balls = brute_force_balls(&norm, p, d)?;
            let expected: Vec<BTreeSet<Vec<i64>>> = chain
                .lattices()
                .iter()
                .map(|l| lattice_points(&ring, l, p, d))
                .collect::<Result<_, _>>()?;
            ensure(balls == expected, || {
                format!("({p},{d}) chain {index}: brute-force balls differ from the chain")
            })?;
            ball_chains.insert(balls);
        }
        ensure(ball_chains.len() == found.len(), || format!("({p},{d}): two chains share a ball chain"))?;
        summary.push(format!("({p},{d}): {}/{} round trips", found.len(), flags));
    }
    Ok(summary.join(", "))
}

/// Nondegeneracy, p-homogeneity, unit invariance and the strong triangle
/// inequality over all representatives of `(Z/p^3)^d`.
fn check_norm_axioms(norm: &NormSpec, p: u64) -> Result<usize, String> {
    let d = norm.dim();
    let ring = *norm.ring();
    let side = p.pow(3) as usize;
    let wide = 2 * side;
    let table_points = box_points(d, wide as i64);
    let values: Vec<Rational> = std::thread::scope(|s| {
        let chunks: Vec<_> = table_points
            .chunks(table_points.len().div_ceil(8))
            .map(|chunk| {
                s.spawn(move || {
                    chunk
                        .iter()
                        .map(|x| norm_eval(norm, &padic_vec(&ring, x)).map_err(|e| e.to_string()))
                        .collect::<Result<Vec<_>, _>>()
                })
            })
            .collect();
        chunks
            .into_iter()
            .map(|h| h.join().unwrap())
            .collect::<Result<Vec<Vec<_>>, _>>()
            .map(|v| v.concat())
    })?;
    let ranks: BTreeMap<&Rational, u16> = values
        .iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, i as u16))
        .collect();
    let rank: Vec<u16> = values.iter().map(|v| ranks[v]).collect();
    let index = |x: &[usize]| x.iter().rev().fold(0, |acc, &c| acc * wide + c);

    let reps: Vec<Vec<usize>> = box_points(d, side as i64)
        .into_iter()
        .map(|x| x.into_iter().map(|c| c as usize).collect())
        .collect();
    let p_rat = Rational::from_integer(p.into());
    let units: Vec<i64> = [-1, p as i64 + 1, p as i64 - 1].into_iter().filter(|&u| u != 1).collect();
    for x in &reps {
        let value = &values[index(x)];
        let is_zero = x.iter().all(|&c| c == 0);
        ensure((*value == zero()) == is_zero, || format!("nondegeneracy fails at {x:?}"))?;
        let xi: Vec<i64> = x.iter().map(|&c| c as i64).collect();
        let scaled: Vec<i64> = xi.iter().map(|c| c * p as i64).collect();
        let n_scaled = norm_eval(norm, &padic_vec(&ring, &scaled)).map_err(|e| e.to_string())?;
        ensure(n_scaled == value / &p_rat, || format!("N(px) != N(x)/p at {x:?}"))?;
        for &u in &units {
            let ux: Vec<i64> = xi.iter().map(|c| c * u).collect();
            let n_ux = norm_eval(norm, &padic_vec(&ring, &ux)).map_err(|e| e.to_string())?;
            ensure(n_ux == *value, || format!("N({u}x) != N(x) at {x:?}"))?;
        }
    }

    let failures = std::thread::scope(|s| {
        let handles: Vec<_> = (0..8)
            .map(|t| {
                let reps = &reps;
                let rank = &rank;
                s.spawn(move || {
                    let mut sum = vec![0usize; d];
                    for a in (t..reps.len()).step_by(8) {
                        let x = &reps[a];
                        let rx = rank[index(x)];
                        for y in &reps[a..] {
                            for k in 0..d {
                                sum[k] = x[k] + y[k];
                            }
                            if rank[index(&sum)] > rx.max(rank[index(y)]) {
                                return Some((x.clone(), y.clone()));
                            }
                        }
                    }
                    None
                })
            })
            .collect();
        handles.into_iter().filter_map(|h| h.join().unwrap()).next()
    });
    if let Some((x, y)) = failures {
        return Err(format!("strong triangle inequality fails at {x:?} + {y:?}"));
    }
    Ok(reps.len() * (reps.len() + 1) / 2)
}

fn criterion_8() -> Outcome {
    let mut norms: Vec<(String, u64, NormSpec)> = Vec::new();
    for (p, d) in [(2u64, 1usize), (3, 1), (2, 2), (3, 2), (2, 3)] {
        let (ring, found) = chains(p, d)?;
        for (i, chain) in found.iter().enumerate() {
            let norm = norm_from_chain(&ring, chain, &generic_q(p, d)).map_err(|e| e.to_string())?;
            norms.push((format!("({p},{d}) chain {i}"), p, norm));
        }
    }
    for p in [2u64, 3] {
        let ring = PadicRing::new(p, 10).unwrap();
        let norm = NormSpec::identity(ring, vec![rat(4, 5), rat(4, 5)]).map_err(|e| e.to_string())?;
        norms.push((format!("({p},2) equal weights"), p, norm));
    }
    for d in [2usize, 3] {
        let ring = PadicRing::new(2, 10).unwrap();
        let frames = [linalg::identity(&ring, d)];
        let net = ball_network(&ring, &generic_q(2, d), &frames, &orderings(d), 2).map_err(|e| e.to_string())?;
        for (id, norm) in net.metrics.iter().zip(net.norms) {
            norms.push((format!("window {id}"), 2, norm));
        }
    }
    let (ring, found) = chains(3, 3)?;
    let q33 = generic_q(3, 3);
    norms.push((
        "(3,3) identity".into(),
        3,
        NormSpec::identity(ring, q33.clone()).map_err(|e| e.to_string())?,
    ));
    for i in [0, found.len() - 1] {
        let norm = norm_from_chain(&ring, &found[i], &q33).map_err(|e| e.to_string())?;
        norms.push((format!("(3,3) chain {i}"), 3, norm));
    }

    let mut pairs = 0;
    for (name, p, norm) in &norms {
        pairs += check_norm_axioms(norm, *p).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(format!("{} norms, {pairs} unordered pairs", norms.len()))
}

/// Dimension from the raw matrices: r-balls are sets that are clusters of
/// every metric; each is paired with the least r-ball above it.
fn dimension_oracle(matrices: &[Vec<Vec<Rational>>]) -> Result<usize, String> {
    let per_metric: Vec<BTreeSet<Members>> = matrices.iter().map(|m| cluster_oracle(m)).collect();
    let common: Vec<&Members> = per_metric[0]
        .iter()
        .filter(|c| per_metric.iter().all(|s| s.contains(*c)))
        .collect();
    let mut overall = 0;
    for lower in &common {
        let above: Vec<&&Members> = common
            .iter()
            .filter(|c| c.len() > lower.len() && lower.is_subset(c))
            .collect();
        let Some(upper) = above.iter().min_by_key(|c| c.len()) else {
            continue;
        };
        ensure(above.iter().all(|c| upper.is_subset(c)), || "least r-superball is not unique".into())?;
        for clusters in &per_metric {
            let chain = clusters
                .iter()
                .filter(|c| lower.is_subset(c) && c.is_subset(upper))
                .count();
            overall = overall.max(chain - 1);
        }
    }
    Ok(overall)
}

fn library_dimension(net: &ClusterNetwork) -> Result<usize, String> {
    Ok(network_dimension(net, net.metrics()).map_err(|e| e.to_string())?.overall)
}

fn window_matrix(norm: &NormSpec, points: &[Vec<i64>]) -> Result<Vec<Vec<Rational>>, String> {
    let ring = *norm.ring();
    points
        .iter()
        .map(|x| {
            points
                .iter()
                .map(|y| {
                    let diff: Vec<i64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
                    norm_eval(norm, &padic_vec(&ring, &diff)).map_err(|e| e.to_string())
                })
                .collect()
        })
        .collect()
}

fn criterion_9() -> Outcome {
    let mut summary = Vec::new();
    for (d, window) in [(1usize, 3u32), (2, 2), (3, 2)] {
        let ring = PadicRing::new(2, 10).unwrap();
        let frames = [linalg::identity(&ring, d)];
        let net = ball_network(&ring, &generic_q(2, d), &frames, &orderings(d), window)
            .map_err(|e| e.to_string())?;
        let side = 2i64.pow(window);
        let mut points = box_points(d, side);
        points.sort_by_key(|x| x.clone());
        let matrices: Vec<_> = net
            .norms
            .iter()
            .map(|n| window_matrix(n, &points))
            .collect::<Result<_, _>>()?;
        let oracle = dimension_oracle(&matrices)?;
        let found = library_dimension(&net.network)?;
        ensure(oracle == d && found == d, || {
            format!("d={d}: library {found}, oracle {oracle}, expected {d}")
        })?;
        summary.push(format!("d={d}: {} metrics on {} points -> {found}", net.metrics.len(), points.len()));
    }

    let fig1 = read_matrix_path(&fixture("fig1.csv")).map_err(|e| e.to_string())?;
    let fig2 = read_matrix_path(&fixture("fig2.csv")).map_err(|e| e.to_string())?;
    let trees = [build_dendrogram(&fig1).unwrap(), build_dendrogram(&fig2).unwrap()];
    let c1 = merge_dendrograms(&trees, &[MetricId::new("A1"), MetricId::new("B1")]).unwrap();
    let oracle = dimension_oracle(&[raw(&fig1), raw(&fig2)])?;
    let found = library_dimension(&c1)?;
    ensure(found == 2 && oracle == 2, || format!("C1: library {found}, oracle {oracle}"))?;
    summary.push("C1 -> 2".into());

    let mut rng = StdRng::seed_from_u64(0x5eed_0009);
    let mut singles: Vec<DistanceMatrix> = ["fig1.csv", "fig2.csv", "quad_a.csv", "quad_b.csv"]
        .iter()
        .map(|f| read_matrix_path(&fixture(f)).unwrap())
        .collect();
    singles.extend((0..30).map(|_| {
        let n = rng.gen_range(2..=9);
        random_dissimilarity(&mut rng, n)
    }));
    for (i, m) in singles.iter().enumerate() {
        let tree = build_dendrogram(m).unwrap();
        let net = merge_dendrograms(&[tree], &[MetricId::new("only")]).unwrap();
        let found = library_dimension(&net)?;
        let oracle = dimension_oracle(&[raw(m)])?;
        ensure(found == 1 && oracle == 1, || format!("single metric {i}: library {found}, oracle {oracle}"))?;
    }
    summary.push(format!("{} single-metric networks -> 1", singles.len()));
    Ok(summary.join(", "))
}

fn criterion_10() -> Outcome {
    let mut summary = Vec::new();
    for p in [2u64, 3] {
        let q = vec![rat(4, 5), rat(4, 5)];
        let report = verify_correspondence(p, 2, &q, 8, None).map_err(|e| e.to_string())?;
        let degenerate = report.degenerate.ok_or("no degenerate section in the report")?;
        let ring = PadicRing::new(p, 10).unwrap();
        let oracle = brute_force_balls(&NormSpec::identity(ring, q).unwrap(), p, 2)?.len();
        let generic = brute_force_balls(&NormSpec::identity(ring, generic_q(p, 2)).unwrap(), p, 2)?.len();
        ensure(degenerate.balls == 2 && oracle == 2, || {
            format!("p={p}: report {} balls, oracle {oracle}", degenerate.balls)
        })?;
        ensure(generic == 3, || format!("p={p}: generic weights give {generic} balls"))?;
        summary.push(format!("p={p}: 2 balls (generic 3)"));
    }
    Ok(summary.join(", "))
}

// ---------------------------------------------------------------------------
// Criterion 11

fn criterion_11() -> Outcome {
    let f = |name: &str| fixture(name).display().to_string();
    let runs: Vec<Vec<String>> = vec![
        vec!["cluster".into(), f("fig1.csv")],
        vec!["cluster".into(), f("quad_a.csv"), "--format".into(), "dot".into()],
        vec!["network".into(), f("fig1.csv"), f("fig2.csv")],
        vec!["network".into(), f("quad_a.csv"), f("quad_b.csv"), "--format".into(), "dot".into()],
        vec!["complex".into(), f("fig1.csv"), f("fig2.csv")],
        vec!["complex".into(), f("incompatible_1.csv"), f("incompatible_2.csv")],
        vec!["complex".into(), f("quad_a.csv"), f("quad_b.csv"), "--format".into(), "dot".into()],
        vec!["dimension".into(), f("quad_a.csv"), f("quad_b.csv")],
        vec!["padic-verify".into(), "--p".into(), "2".into(), "--d".into(), "3".into(), "--q".into(), "5/8,3/4,7/8".into(), "--window".into(), "2".into()],
        vec!["padic-verify".into(), "--p".into(), "3".into(), "--d".into(), "2".into(), "--q".into(), "4/5,4/5".into()],
        vec!["phylo-sweep".into(), f("markers/manifest.json"), "--sweep".into(), f("markers/simplex.json")],
        vec!["phylo-sweep".into(), f("markers/manifest.json"), "--sweep".into(), f("markers/units.json"), "--format".into(), "dot".into()],
    ];
    let run = |args: &[String]| {
        Command::new(env!("CARGO_BIN_EXE_clusternet"))
            .args(args)
            .output()
            .expect("binary runs")
    };
    for args in &runs {
        let first = run(args);
        let second = run(args);
        ensure(first.status.success(), || format!("{args:?} failed: {}", String::from_utf8_lossy(&first.stderr)))?;
        ensure(!first.stdout.is_empty(), || format!("{args:?} printed nothing"))?;
        ensure(first.stdout == second.stdout && first.stderr == second.stderr, || {
            format!("{args:?} differs between runs")
        })?;
    }
    Ok(format!("{} invocations over 6 subcommands", runs.len()))
}

fn main() {
    let mut suite = Suite { trees: Vec::new() };
    let mut failed = 0;
    let mut report = |n: usize, outcome: Outcome, started: Instant| {
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n:>2}: PASS ({secs:.1}s) {detail}"),
            Err(reason) => {
                failed += 1;
                println!("criterion {n:>2}: FAIL ({secs:.1}s) {reason}");
            }
        }
    };
    let t = Instant::now();
    report(1, criterion_1(&mut suite), t);
    let t = Instant::now();
    report(2, criterion_2(&mut suite), t);
    let t = Instant::now();
    report(3, criterion_3(&mut suite), t);
    let t = Instant::now();
    report(4, criterion_4(&suite), t);
    let t = Instant::now();
    report(5, criterion_5(), t);
    let t = Instant::now();
    report(6, criterion_6(), t);
    let t = Instant::now();
    report(7, criterion_7(), t);
    let t = Instant::now();
    report(8, criterion_8(), t);
    let t = Instant::now();
    report(9, criterion_9(), t);
    let t = Instant::now();
    report(10, criterion_10(), t);
    let t = Instant::now();
    report(11, criterion_11(), t);
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
