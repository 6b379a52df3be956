//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cgfam::clustering::{dbscan, kmedoids, Clustering, DbscanConfig, Init, KMedoidsConfig};
use cgfam::ged::{anneal_match, exact_min_ged, pair_similarity, AnnealConfig, SimilarityScore};
use cgfam::graph::{CallGraph, FunctionKind, GraphCorpus};
use cgfam::quality::{cluster_purity, diameter_tightness, frequency_table, kdist_curve, kdist_knee, silhouette, sum_of_error};
use cgfam::simmatrix::{compute_matrix, DistanceMatrix};
use cgfam::synth::{generate_corpus, SynthConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const APIS: [&str; 8] = [
    "Sleep", "ExitProcess", "CreateFileA", "ReadFile", "WriteFile", "GetProcAddress", "LoadLibraryA", "VirtualAlloc",
];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_graph(rng: &mut ChaCha8Rng, label: &str, order: usize, external_p: f64) -> CallGraph {
    let mut used = BTreeSet::new();
    let vertices: Vec<(String, FunctionKind)> = (0..order)
        .map(|i| {
            let api = APIS[rng.gen_range(0..APIS.len())];
            if rng.gen_bool(external_p) && used.insert(api) {
                (api.to_string(), FunctionKind::External)
            } else {
                (format!("sub_{i:x}"), FunctionKind::Local)
            }
        })
        .collect();
    let edges = if order == 0 {
        Vec::new()
    } else {
        let m = rng.gen_range(0..=2 * order);
        (0..m).map(|_| (rng.gen_range(0..order), rng.gen_range(0..order))).collect()
    };
    CallGraph::new(label, vertices, edges).unwrap()
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut equal, mut lower) = (0, 0);
    for case in 0..100u64 {
        let ng = rng.gen_range(1..=6);
        let nh = rng.gen_range(1..=12 - ng).min(6);
        let g = random_graph(&mut rng, "g", ng, 0.3);
        let h = random_graph(&mut rng, "h", nh, 0.3);
        let exact: SimilarityScore<f64> = exact_min_ged(&g, &h, 12).unwrap();
        let approx: SimilarityScore<f64> = anneal_match(&g, &h, &AnnealConfig::default().with_seed(case));
        equal += usize::from(approx.breakdown.total == exact.breakdown.total);
        lower += usize::from(approx.breakdown.total < exact.breakdown.total);
    }
    let elapsed = start.elapsed();
    outcome(
        equal >= 90 && lower == 0 && elapsed < Duration::from_secs(60),
        format!("{equal}/100 equal to exact, {lower} below exact, {elapsed:.2?}"),
    )
}

fn similarity_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cfg = AnnealConfig::default();
    let k0 = CallGraph::empty("k0");
    let mut failures = Vec::new();
    for case in 0..1000 {
        let order = rng.gen_range(0..=20);
        let g = random_graph(&mut rng, "g", order, 0.3);
        let order = rng.gen_range(0..=20);
        let h = random_graph(&mut rng, "h", order, 0.3);
        let cfg = cfg.clone().with_seed(case);
        let gh: f64 = pair_similarity(&g, &h, &cfg);
        let hg: f64 = pair_similarity(&h, &g, &cfg);
        let gg: f64 = pair_similarity(&g, &g.clone().with_label("g2"), &cfg);
        let gk: f64 = pair_similarity(&g, &k0, &cfg);
        if !(0.0..=1.0).contains(&gh) {
            failures.push(format!("case {case}: sigma {gh} outside [0, 1]"));
        }
        if gh != hg {
            failures.push(format!("case {case}: asymmetric {gh} vs {hg}"));
        }
        if gg != 0.0 {
            failures.push(format!("case {case}: self sigma {gg}"));
        }
        if g.order() > 0 && gk != 1.0 {
            failures.push(format!("case {case}: sigma to K0 {gk}"));
        }
    }
    outcome(
        failures.is_empty(),
        format!("1000 pairs, {} violations{}", failures.len(), first(&failures)),
    )
}

fn first(failures: &[String]) -> String {
    failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
}

fn rename_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = AnnealConfig::default();
    let mut failures = Vec::new();
    for case in 0..100 {
        let order = rng.gen_range(1..=60);
        let g = random_graph(&mut rng, "g", order, 0.3);
        let mut fresh: Vec<u32> = (0..g.order() as u32).collect();
        fresh.shuffle(&mut rng);
        let vertices: Vec<(String, FunctionKind)> = g
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, v)| match v.kind {
                FunctionKind::Local => (format!("renamed_{}", fresh[i]), FunctionKind::Local),
                FunctionKind::External => (v.name.clone(), FunctionKind::External),
            })
            .collect();
        let renamed = CallGraph::new("g2", vertices, g.edges().iter().copied()).unwrap();
        let sigma: f64 = pair_similarity(&g, &renamed, &cfg.clone().with_seed(case));
        if sigma != 0.0 {
            failures.push(format!("case {case}: sigma {sigma}"));
        }
    }
    outcome(failures.is_empty(), format!("100 renamed copies, {} non-zero{}", failures.len(), first(&failures)))
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DistanceMatrix<f64> {
    let labels = (0..n).map(|i| format!("s{i}")).collect();
    DistanceMatrix::from_fn(labels, |_, _| rng.gen_range(0..=1000) as f64 / 1000.0).unwrap()
}

fn kmedoids_convergence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = Vec::new();
    for run in 0..500u64 {
        let n = rng.gen_range(2..=60);
        let k = rng.gen_range(1..=n.min(10));
        let m = random_matrix(&mut rng, n);
        let init = match run % 3 {
            0 => Init::Random,
            1 => Init::PlusPlus,
            _ => {
                let mut labels = m.labels().to_vec();
                labels.shuffle(&mut rng);
                labels.truncate(k);
                Init::Trained(labels)
            }
        };
        let cfg = KMedoidsConfig::new(k, init).with_seed(run);
        let r = kmedoids(&m, &cfg).unwrap();
        if !r.trace.windows(2).all(|w| w[1] <= w[0]) {
            failures.push(format!("run {run}: trace {:?}", r.trace));
        }
        if r.iterations > cfg.max_iterations {
            failures.push(format!("run {run}: {} iterations", r.iterations));
        }
    }
    outcome(failures.is_empty(), format!("500 runs, {} violations{}", failures.len(), first(&failures)))
}

fn planted(seed: u64) -> SynthConfig {
    SynthConfig {
        families: 8,
        family_size_range: (3, 10),
        base_order_range: (20, 40),
        mutations_per_generation: 2,
        seed,
        ..SynthConfig::default()
    }
}

/// Per family, the member with the smallest summed dissimilarity to the
/// rest of its family.
fn family_medoids(m: &DistanceMatrix<f64>, families: &BTreeMap<String, String>) -> Vec<String> {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, label) in m.labels().iter().enumerate() {
        groups.entry(families[label].as_str()).or_default().push(i);
    }
    groups
        .values()
        .map(|members| {
            let cost = |c: usize| members.iter().map(|&j| m.get(c, j)).sum::<f64>();
            let best = members.iter().copied().min_by(|&a, &b| cost(a).total_cmp(&cost(b))).unwrap();
            m.label(best).to_string()
        })
        .collect()
}

fn initialization_quality() -> Outcome {
    let mut held = 0;
    let mut details = Vec::new();
    for corpus_seed in 0..4u64 {
        let corpus = generate_corpus(&planted(100 + corpus_seed)).unwrap();
        let m: DistanceMatrix<f64> = compute_matrix(&corpus, &AnnealConfig::default(), 1).unwrap();
        let trained = family_medoids(&m, corpus.family_labels().unwrap());
        let mean = |init: &Init| -> f64 {
            (0..50u64)
                .map(|seed| kmedoids(&m, &KMedoidsConfig::new(8, init.clone()).with_seed(seed)).unwrap().objective())
                .sum::<f64>()
                / 50.0
        };
        let t = mean(&Init::Trained(trained));
        let p = mean(&Init::PlusPlus);
        let r = mean(&Init::Random);
        let ok = t <= p && p <= r && t < r;
        held += usize::from(ok);
        details.push(format!("[{t:.3} {p:.3} {r:.3}]"));
    }
    outcome(
        held >= 3,
        format!("ordering held on {held}/4 corpora; mean objectives trained/plusplus/random {}", details.join(" ")),
    )
}

fn dbscan_recovery() -> Outcome {
    let start = Instant::now();
    let min_pts = 3;
    let cfg = SynthConfig {
        family_sizes: Some(vec![10, 9, 8, 7, 7, 6, 5, 4, 2, 2]),
        base_order_range: (50, 50),
        mutations_per_generation: 2,
        seed: 6,
        ..SynthConfig::default()
    };
    let corpus: GraphCorpus = generate_corpus(&cfg).unwrap();
    let families = corpus.family_labels().unwrap().clone();
    let m: DistanceMatrix<f64> = compute_matrix(&corpus, &AnnealConfig::default(), 1).unwrap();
    // a core point needs min_pts other samples within rad
    let curve = kdist_curve(&m, min_pts).unwrap();
    let Some((_, rad)) = kdist_knee(&curve) else {
        return outcome(false, "k-dist curve has no knee");
    };
    let clustering = dbscan(&m, &DbscanConfig::new(min_pts, rad)).unwrap();
    let purity: f64 = match cluster_purity(&clustering, &families) {
        Ok(p) => p,
        Err(e) => return outcome(false, format!("rad {rad:.4}: {e}")),
    };
    let table = frequency_table(&clustering, &families).unwrap();
    let undersized = ["family08", "family09"];
    let noisy = undersized
        .iter()
        .all(|f| 2 * table.noise(f) >= table.family_totals()[f]);
    let elapsed = start.elapsed();
    outcome(
        purity >= 0.9 && noisy && elapsed < Duration::from_secs(300),
        format!(
            "60 samples, rad {rad:.4} from knee, {} clusters, {} noise, purity {purity:.3}, undersized noise {}/{} and {}/{}, {elapsed:.2?}",
            clustering.cluster_count(),
            clustering.noise().len(),
            table.noise(undersized[0]),
            table.family_totals()[undersized[0]],
            table.noise(undersized[1]),
            table.family_totals()[undersized[1]],
        ),
    )
}

fn random_clustering(rng: &mut ChaCha8Rng, n: usize, medoids: bool) -> Clustering {
    let k = rng.gen_range(1..=n.min(6));
    let mut assignment: Vec<Option<usize>> = (0..n).map(|i| if i < k { Some(i) } else { Some(rng.gen_range(0..k)) }).collect();
    if !medoids {
        for a in assignment.iter_mut().skip(k) {
            if rng.gen_bool(0.2) {
                *a = None;
            }
        }
    }
    let labels = (0..n).map(|i| format!("s{i}")).collect();
    let medoids = medoids.then(|| (0..k).collect());
    Clustering::new(labels, assignment, medoids).unwrap()
}

fn metric_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = Vec::new();
    for case in 0..300 {
        let n = rng.gen_range(2..=40);
        let m = random_matrix(&mut rng, n);
        let c = random_clustering(&mut rng, n, case % 2 == 0);
        if let Ok(s) = silhouette(&m, &c) {
            let clusters = c.clusters();
            for (i, v) in s.per_sample.iter().enumerate() {
                let Some(v) = v else { continue };
                if !(-1.0..=1.0).contains(v) {
                    failures.push(format!("case {case}: silhouette {v}"));
                }
                let cluster = c.cluster_of(i).unwrap();
                if clusters[cluster].len() == 1 && *v != 0.0 {
                    failures.push(format!("case {case}: singleton silhouette {v}"));
                }
            }
        }
        if let Some(medoids) = c.medoids() {
            for p in 1..=3u32 {
                let got = sum_of_error(&m, &c, p, 100.0).unwrap();
                let mut want = 0.0;
                for (i, a) in c.assignment().iter().enumerate() {
                    if let Some(a) = a {
                        let d = 100.0 * m.get(i, medoids[*a]);
                        let mut term = 1.0;
                        for _ in 0..p {
                            term *= d;
                        }
                        want += term;
                    }
                }
                let rel = if want == 0.0 { got.abs() } else { ((got - want) / want).abs() };
                if rel > 1e-9 {
                    failures.push(format!("case {case}: SE_{p} {got} vs {want}"));
                }
            }
        }
        for (d, t) in diameter_tightness(&m, &c).unwrap() {
            if d < t {
                failures.push(format!("case {case}: diameter {d} < tightness {t}"));
            }
        }
        let families: BTreeMap<String, String> =
            (0..n).map(|i| (format!("s{i}"), format!("fam{}", rng.gen_range(0..4)))).collect();
        let table = frequency_table(&c, &families).unwrap();
        let mut totals: BTreeMap<&str, usize> = BTreeMap::new();
        for f in families.values() {
            *totals.entry(f.as_str()).or_default() += 1;
        }
        if table.family_totals() != totals {
            failures.push(format!("case {case}: frequency rows {:?} vs {totals:?}", table.family_totals()));
        }
    }
    outcome(failures.is_empty(), format!("300 random clusterings, {} violations{}", failures.len(), first(&failures)))
}

fn determinism() -> Outcome {
    let corpus = generate_corpus(&SynthConfig {
        families: 3,
        family_size_range: (3, 4),
        base_order_range: (15, 25),
        seed: 8,
        ..SynthConfig::default()
    })
    .unwrap();
    let cfg = AnnealConfig {
        exact_max_order: 0,
        ..AnnealConfig::default().with_seed(8)
    };
    let mut outputs = BTreeSet::new();
    for workers in [1, 2, 4] {
        for _ in 0..2 {
            let m: DistanceMatrix<f64> = compute_matrix(&corpus, &cfg, workers).unwrap();
            let km = kmedoids(&m, &KMedoidsConfig::new(3, Init::PlusPlus).with_seed(8)).unwrap();
            let db = dbscan(&m, &DbscanConfig::new(2, 0.2)).unwrap();
            outputs.insert((
                m.to_csv(),
                km.clustering.to_csv(),
                km.clustering.medoids_csv().unwrap(),
                db.to_csv(),
            ));
        }
    }
    outcome(
        outputs.len() == 1,
        format!("{} distinct outputs over 3 worker counts x 2 runs", outputs.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("oracle equivalence", oracle_equivalence),
        ("similarity axioms", similarity_axioms),
        ("local-rename invariance", rename_invariance),
        ("k-medoids convergence", kmedoids_convergence),
        ("initialization quality", initialization_quality),
        ("DBSCAN family recovery", dbscan_recovery),
        ("metric correctness", metric_correctness),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let o = check();
        failed += usize::from(!o.pass);
        println!("{} criterion {} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
