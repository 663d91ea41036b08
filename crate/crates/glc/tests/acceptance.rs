//! Acceptance gate: one check per criterion, each printing a single
//! pass/fail line (visible with `--nocapture`; the line is also embedded in
//! the panic message on failure).

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use glc::cli;
use glc::euler::{self, DichotomyVerdict, EulerVerdict};
use glc::generators::{
    add_edge, generate, random_multigraph, BaseGraph, GeneratorKind, GeneratorSpec,
};
use glc::multigraph::VertexId;
use glc::parity::{self, OracleVerdict, ParityVerdict, StrongDegreeVerdict};
use glc::prosys::{project_circuit, CylinderSet, InverseSystem};
use glc::regions::{self, Region};

fn criterion(n: usize, name: &str, f: impl FnOnce() -> Result<(), String>) {
    match f() {
        Ok(()) => println!("criterion {n:2} [{name}]: PASS"),
        Err(msg) => {
            println!("criterion {n:2} [{name}]: FAIL - {msg}");
            panic!("criterion {n} [{name}] failed: {msg}");
        }
    }
}

fn check(ok: bool, msg: &str) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.to_string())
    }
}

fn sys(kind: GeneratorKind, depth: usize) -> InverseSystem {
    generate(&GeneratorSpec::new(kind, depth)).expect("generator")
}

fn v(s: &str) -> VertexId {
    VertexId::new(s)
}

fn cyl(level: usize, cells: &[&str]) -> CylinderSet {
    CylinderSet {
        level,
        cells: cells.iter().map(|s| v(s)).collect(),
    }
}

#[test]
fn criterion_01_cbs_cut_sizes() {
    criterion(1, "cbs half/quarter cuts", || {
        let s = sys(GeneratorKind::Cbs, 6);
        let half = s
            .cylinder_cut(&cyl(1, &["cL"]))
            .map_err(|e| e.to_string())?;
        check(
            half.size() == 1,
            &format!("left half cut is {}", half.size()),
        )?;
        let quarter = s
            .cylinder_cut(&cyl(2, &["cLL"]))
            .map_err(|e| e.to_string())?;
        check(
            quarter.size() == 2,
            &format!("left quarter cut is {}", quarter.size()),
        )
    });
}

#[test]
fn criterion_02_ladder_ends() {
    criterion(
        2,
        "ladder end degrees and open/closed certification",
        || {
            let s = sys(GeneratorKind::Ladder, 8);
            for (n, g) in s.levels.iter().enumerate() {
                for end in ["endL", "endR"] {
                    let d = g.degree(&v(end)).map_err(|e| e.to_string())?;
                    check(d == 3, &format!("{end} degree {d} at level {n}"))?;
                }
            }
            let verdict = euler::is_open_eulerian(&s).map_err(|e| e.to_string())?;
            let ends = match verdict {
                EulerVerdict::OpenEulerianCertified { ends, .. } => ends,
                other => return Err(format!("open verdict: {other:?}")),
            };
            let names: BTreeSet<&str> = ends.iter().map(|t| t.vertices[0].as_str()).collect();
            check(
                names == BTreeSet::from(["endL", "endR"]),
                "open ends are not the end threads",
            )?;
            let closed = add_edge(&s, &ends[0], &ends[1]).map_err(|e| e.to_string())?;
            let verdict = euler::is_closed_eulerian(&closed).map_err(|e| e.to_string())?;
            check(
                verdict.is_certified(),
                &format!("after add_edge: {verdict:?}"),
            )
        },
    );
}

#[test]
fn criterion_03_cbc_euler_chain() {
    criterion(3, "cbc(6) compatible Euler circuit chain", || {
        let s = sys(GeneratorKind::Cbc, 6);
        let chain = euler::euler_chain(&s)
            .map_err(|e| e.to_string())?
            .ok_or("no chain produced")?;
        check(
            chain.circuits.len() == s.levels.len(),
            "chain length mismatch",
        )?;
        for (n, c) in chain.circuits.iter().enumerate() {
            check(
                c.is_euler_in(s.level(n).unwrap()),
                &format!("level {n} member is not an Euler circuit"),
            )?;
        }
        for n in 0..s.depth() {
            let down = project_circuit(s.bond(n).unwrap(), &chain.circuits[n + 1])
                .map_err(|e| e.to_string())?;
            check(
                down == chain.circuits[n],
                &format!("projection mismatch at bond {n}"),
            )?;
        }
        Ok(())
    });
}

#[test]
fn criterion_04_closed_euler_equivalences() {
    criterion(4, "closed-Eulerian equivalences across generators", || {
        let mut spec_tangent = GeneratorSpec::new(GeneratorKind::TangentChain, 5);
        spec_tangent.pattern = Some("10101".into());
        let mut spec_random = GeneratorSpec::new(GeneratorKind::Random, 5);
        spec_random.seed = Some(11);
        let systems: Vec<(String, InverseSystem)> = [
            GeneratorKind::Constant(BaseGraph::Triangle),
            GeneratorKind::Constant(BaseGraph::Path),
            GeneratorKind::Constant(BaseGraph::Parallel),
            GeneratorKind::Constant(BaseGraph::FigureEight),
            GeneratorKind::Constant(BaseGraph::C4),
            GeneratorKind::Ladder,
            GeneratorKind::Cbs,
            GeneratorKind::Cbc,
            GeneratorKind::XlDyadic,
            GeneratorKind::Hawaiian,
        ]
        .into_iter()
        .map(|k| (format!("{k:?}"), sys(k, 5)))
        .chain([
            (
                "tangent-10101".to_string(),
                generate(&spec_tangent).unwrap(),
            ),
            ("random-11".to_string(), generate(&spec_random).unwrap()),
        ])
        .collect();
        for (name, s) in &systems {
            let closed = euler::is_closed_eulerian(s)
                .map_err(|e| e.to_string())?
                .is_certified();
            let no_odd = s.level_degree_report().iter().all(|l| l.is_empty());
            let decomposes = s.levels.iter().all(|g| g.cycle_decomposition().is_ok());
            let all_even = s.all_threads().map_err(|e| e.to_string())?.iter().all(|t| {
                matches!(
                    parity::vertex_parity(s, t, s.depth()),
                    Ok(ParityVerdict::EvenCertified { .. })
                )
            });
            check(
                closed == no_odd && closed == decomposes && closed == all_even,
                &format!(
                    "{name}: closed={closed} no_odd={no_odd} decomposes={decomposes} all_even={all_even}"
                ),
            )?;
        }
        Ok(())
    });
}

#[test]
fn criterion_05_menger_duality_fuzz() {
    criterion(
        5,
        "flow equals brute-force min cut on random systems",
        || {
            for seed in 0..200u64 {
                let mut spec = GeneratorSpec::new(GeneratorKind::Random, 3);
                spec.seed = Some(seed);
                let s = generate(&spec).unwrap();
                let base = (0..=s.depth())
                    .find(|&n| s.level(n).unwrap().vertex_count() >= 2)
                    .ok_or("no level with two classes")?;
                let names: Vec<VertexId> = s.level(base).unwrap().vertices().cloned().collect();
                let a = CylinderSet {
                    level: base,
                    cells: BTreeSet::from([names[0].clone()]),
                };
                let b = CylinderSet {
                    level: base,
                    cells: BTreeSet::from([names[1].clone()]),
                };
                let w = glc::menger::menger(&s, &a, &b, s.depth()).map_err(|e| e.to_string())?;
                check(
                    w.per_level.windows(2).all(|x| x[1] <= x[0]),
                    &format!("seed {seed}: flow grew with depth: {:?}", w.per_level),
                )?;
                for (i, &flow) in w.per_level.iter().enumerate() {
                    let m = w.start_level + i;
                    let g = s.level(m).unwrap();
                    let fa = s.fiber(m, &a).unwrap();
                    let fb = s.fiber(m, &b).unwrap();
                    let free: Vec<VertexId> = g
                        .vertices()
                        .filter(|x| !fa.contains(x) && !fb.contains(x))
                        .cloned()
                        .collect();
                    check(free.len() <= 12, &format!("seed {seed}: level too big"))?;
                    let mut best = usize::MAX;
                    for mask in 0u32..(1 << free.len()) {
                        let mut side = fa.clone();
                        for (j, x) in free.iter().enumerate() {
                            if mask & (1 << j) != 0 {
                                side.insert(x.clone());
                            }
                        }
                        best = best.min(g.cut(&side).unwrap().size());
                    }
                    check(
                        flow == best,
                        &format!("seed {seed} level {m}: flow {flow} != cut {best}"),
                    )?;
                }
            }
            Ok(())
        },
    );
}

#[test]
fn criterion_06_parity_oracle_vs_degree_criterion() {
    criterion(6, "subset oracle agrees with degree parity", || {
        let mut rng = ChaCha8Rng::seed_from_u64(66);
        for case in 0..500 {
            let nv = rng.gen_range(4..=10);
            let extra = rng.gen_range(0..=4);
            let g = random_multigraph(&mut rng, nv, extra);
            let fibre: BTreeSet<VertexId> = g.vertices().cloned().collect();
            let root = fibre.iter().next().unwrap().clone();
            let got = parity::parity_oracle(&g, &fibre, &root, 12).map_err(|e| e.to_string())?;
            // Handshake: a subset cut is odd exactly when the degree sum over
            // the subset is odd.
            let free: Vec<VertexId> = fibre.iter().filter(|x| **x != root).cloned().collect();
            let (mut saw_even, mut saw_odd) = (false, false);
            for mask in 0u32..(1 << free.len()) {
                let mut deg_sum = g.degree(&root).unwrap();
                for (j, x) in free.iter().enumerate() {
                    if mask & (1 << j) != 0 {
                        deg_sum += g.degree(x).unwrap();
                    }
                }
                if deg_sum.is_multiple_of(2) {
                    saw_even = true;
                } else {
                    saw_odd = true;
                }
            }
            let want = match (saw_even, saw_odd) {
                (true, false) => OracleVerdict::AllEven,
                (false, true) => OracleVerdict::AllOdd,
                _ => OracleVerdict::Mixed,
            };
            check(
                got == want,
                &format!("case {case}: oracle {got:?}, degree parity {want:?}"),
            )?;
        }
        Ok(())
    });
}

#[test]
fn criterion_07_strong_degree_examples() {
    criterion(7, "tangent chain strong degrees", || {
        let mut spec = GeneratorSpec::new(GeneratorKind::TangentChain, 8);
        spec.pattern = Some("10101010".into());
        let s = generate(&spec).unwrap();
        let t = s.thread_through_named("lim");
        let got = parity::strong_degree(&s, &t, 8).map_err(|e| e.to_string())?;
        check(
            got == StrongDegreeVerdict::StronglyEven { value: 2 },
            &format!("alternating pattern: {got:?}"),
        )?;
        spec.pattern = Some("11111111".into());
        let s = generate(&spec).unwrap();
        let t = s.thread_through_named("lim");
        let got = parity::strong_degree(&s, &t, 8).map_err(|e| e.to_string())?;
        check(
            got == StrongDegreeVerdict::StronglyOdd { value: 3 },
            &format!("all-chord pattern: {got:?}"),
        )
    });
}

#[test]
fn criterion_08_counting_dichotomy_evidence() {
    criterion(8, "circuit counts: stabilized vs growing", || {
        let s = sys(GeneratorKind::Constant(BaseGraph::Triangle), 3);
        let counts = euler::count_euler(&s, 10_000).map_err(|e| e.to_string())?;
        check(
            counts.counts.iter().all(|&c| c == 2),
            &format!("triangle counts {:?}", counts.counts),
        )?;
        let probe = euler::dichotomy_probe(&s, 10_000).map_err(|e| e.to_string())?;
        check(
            probe == DichotomyVerdict::StabilizedGraph(0),
            &format!("triangle probe {probe:?}"),
        )?;

        let s = sys(GeneratorKind::Cbc, 4);
        let counts = euler::count_euler(&s, 2000).map_err(|e| e.to_string())?;
        check(
            counts.counts.windows(2).all(|w| w[0] < w[1]),
            &format!("cbc counts not strictly increasing: {:?}", counts.counts),
        )?;
        let probe = euler::dichotomy_probe(&s, 2000).map_err(|e| e.to_string())?;
        check(
            probe == DichotomyVerdict::GrowingEvidence,
            &format!("cbc probe {probe:?}"),
        )
    });
}

#[test]
fn criterion_09_submodularity_fuzz() {
    criterion(9, "boundary submodularity on random pairs", || {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for case in 0..1000 {
            let extra = rng.gen_range(0..=10);
            let g = random_multigraph(&mut rng, 12, extra);
            let names: Vec<VertexId> = g.vertices().cloned().collect();
            let mut pick = || -> BTreeSet<VertexId> {
                names
                    .iter()
                    .filter(|_| rng.gen_bool(0.4))
                    .cloned()
                    .collect()
            };
            let (y, z) = (pick(), pick());
            let ok = g
                .boundary_submodularity(&y, &z)
                .map_err(|e| e.to_string())?;
            check(ok, &format!("case {case}: submodularity failed"))?;
        }
        Ok(())
    });
}

#[test]
fn criterion_10_chase_and_contraction_machine() {
    criterion(10, "cbs odd-region chase and contraction machine", || {
        let s = sys(GeneratorKind::Cbs, 5);
        let chase = regions::odd_region_chase(&s, 5).map_err(|e| e.to_string())?;
        check(!chase.regions.is_empty(), "empty chase")?;
        for (i, r) in chase.regions.iter().enumerate() {
            check(r.is_odd(), &format!("region {i} is even"))?;
            check(r.size() == 1, &format!("region {i} boundary {}", r.size()))?;
            // No internal edges at all, which subsumes the enumerated-edge
            // avoidance condition.
            let g = s.level(r.level).unwrap();
            let internal = g
                .edges()
                .filter(|(_, (a, b))| r.cells.contains(a) && r.cells.contains(b))
                .count();
            check(internal == 0, &format!("region {i} has internal edges"))?;
            if i + 1 < chase.regions.len() {
                let fibre = s
                    .fiber(
                        chase.regions[i + 1].level,
                        &CylinderSet {
                            level: r.level,
                            cells: r.cells.clone(),
                        },
                    )
                    .unwrap();
                check(
                    chase.regions[i + 1].cells.is_subset(&fibre),
                    &format!("region {} not nested in region {i}", i + 1),
                )?;
            }
        }
        let u = Region::new(&s, 1, BTreeSet::from([v("cL")])).map_err(|e| e.to_string())?;
        let outcome = regions::contraction_machine(&s, &u, 2, 5, 8).map_err(|e| e.to_string())?;
        check(
            outcome.report.passed(),
            &format!("machine report failed: {:?}", outcome.report),
        )
    });
}

#[test]
fn criterion_11_embedding() {
    criterion(11, "figure-1 embedding and star counts", || {
        let star = glc::embed::star_operator(&glc::multigraph::c4()).map_err(|e| e.to_string())?;
        check(
            star.graph.vertex_count() == 8 && star.graph.edge_count() == 12,
            &format!(
                "star(C4): {} vertices, {} edges",
                star.graph.vertex_count(),
                star.graph.edge_count()
            ),
        )?;
        let s = glc::generators::figure_one_system(4);
        // All claim checks (connectivity, the placement properties, the
        // component bijection, the commuting squares) run inside the builder.
        let trace = glc::embed::build_embedding(&s, 4).map_err(|e| e.to_string())?;
        let f0 = &trace.steps[0].skeleton;
        check(
            f0.vertex_count() == 4
                && f0.edge_count() == 4
                && f0.is_connected()
                && f0.vertices().all(|x| f0.degree(x).unwrap() == 2),
            "base skeleton is not the midpoint 4-cycle",
        )?;
        glc::embed::freudenthal_truncations(&trace, 4).map_err(|e| e.to_string())?;
        Ok(())
    });
}

#[test]
fn criterion_12_cli_determinism() {
    criterion(12, "byte-identical CLI reports", || {
        let dir = std::env::temp_dir();
        let path = dir.join(format!("glc-acceptance-{}.json", std::process::id()));
        let path_s = path.to_str().unwrap().to_string();
        let fig = dir.join(format!("glc-acceptance-fig-{}.json", std::process::id()));
        let fig_s = fig.to_str().unwrap().to_string();
        let run = |parts: &[&str]| -> (i32, String) {
            let argv: Vec<String> = std::iter::once("glc".to_string())
                .chain(parts.iter().map(|s| s.to_string()))
                .collect();
            let (code, rep) = cli::run(&argv);
            (code, serde_json::to_string(&rep).unwrap())
        };
        let commands: Vec<Vec<&str>> = vec![
            vec!["generate", "cbc", "--depth", "3", "-o", &path_s],
            vec!["generate", "random", "--depth", "3", "--seed", "4"],
            vec!["validate", &path_s],
            vec![
                "euler", &path_s, "--chain", "--count", "--probe", "--cap", "2000",
            ],
            vec!["parity", &path_s, "--thread", "0", "--strong", "--oracle"],
            vec!["regions", &path_s, "--chase"],
            vec!["regions", &path_s],
            vec!["menger", &path_s, "--a", "1:cL", "--b", "1:cR"],
            vec!["decompose", &path_s],
            vec!["generate", "figure1", "--depth", "1", "-o", &fig_s],
            vec!["embed", &fig_s, "--depth", "1"],
            vec!["export", &path_s, "--dot"],
        ];
        for parts in &commands {
            let (c1, r1) = run(parts);
            let (c2, r2) = run(parts);
            check(
                c1 == c2 && r1 == r2,
                &format!("command {parts:?} differed across runs"),
            )?;
        }
        Ok(())
    });
}
