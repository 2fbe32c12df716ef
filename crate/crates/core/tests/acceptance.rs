//! Acceptance criteria 1 to 11. Runs without the test harness and prints one
//! PASS or FAIL line per criterion; the process fails if any criterion does.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use defectforge::defects::{generate, DefectType, ElongatedDefectParams};
use defectforge::delamination::{
    added_point_count, generate_delamination, triangulate_cell, CellSet, DelamParams,
};
use defectforge::dilation::{dilate, rectangles, DilatedPath, Mode};
use defectforge::geom::{point_in_polygon, Point2, Point3, Window};
use defectforge::io::{generate_instance, presets, DefectKind, InstanceParams, SlabSpec};
use defectforge::mesh::{box_mesh, boolean, imprint_into_slab, BooleanOp, SurfaceMesh, Tag};
use defectforge::pathing::{pick_endpoints, shortest_path, spanning_path, Path, PathGraph};
use defectforge::strip::{triangulate_side, Side, StripVertex};
use defectforge::tessellation::build_voronoi;
use defectforge::RandomStream;
use serde_json::json;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn elongated(t: DefectType) -> ElongatedDefectParams {
    ElongatedDefectParams::defaults(t)
}

/// Every directed edge used once and its reverse once: an independent
/// closedness and orientation check.
fn closed_and_oriented(m: &SurfaceMesh<f64>) -> bool {
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for t in &m.triangles {
        for k in 0..3 {
            *count.entry((t[k], t[(k + 1) % 3])).or_default() += 1;
        }
    }
    count.iter().all(|(&(a, b), &n)| n == 1 && count.get(&(b, a)) == Some(&1))
}

fn c1_closedness_sweep() -> Outcome {
    let start = Instant::now();
    let mut families: Vec<(&str, InstanceParams)> = DefectKind::ALL
        .iter()
        .map(|&k| (k.name(), InstanceParams::defaults(k)))
        .collect();
    families.insert(
        1,
        (
            "branched_crack",
            InstanceParams::with_overrides(DefectKind::Crack, &json!({"branches": 1})).unwrap(),
        ),
    );
    let mut failures = Vec::new();
    for (name, p) in &families {
        for seed in 0..25 {
            match generate_instance(p, seed) {
                Ok(g) => {
                    let own = g.parts.iter().all(closed_and_oriented);
                    if !(g.report.is_valid() && own) {
                        failures.push(format!("{name}/{seed}: {}", g.report.failure_summary()));
                    }
                }
                Err(e) => failures.push(format!("{name}/{seed}: {e}")),
            }
        }
    }
    let t = start.elapsed();
    check(
        failures.is_empty() && t < Duration::from_secs(60),
        format!(
            "{} families x 25 seeds, {} invalid, {:.1} s (limit 60 s) {:?}",
            families.len(),
            failures.len(),
            t.as_secs_f64(),
            failures.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

/// Minimum weight over all simple paths, summed in path order.
fn exhaustive_minimum(g: &PathGraph<f64>, s: usize, e: usize) -> Option<f64> {
    fn go(g: &PathGraph<f64>, u: usize, e: usize, acc: f64, on: &mut Vec<bool>, best: &mut Option<f64>) {
        if u == e {
            if best.is_none_or(|b| acc < b) {
                *best = Some(acc);
            }
            return;
        }
        for &(v, w) in &g.adjacency[u] {
            if !on[v] {
                on[v] = true;
                go(g, v, e, acc + w, on, best);
                on[v] = false;
            }
        }
    }
    let mut on = vec![false; g.vertices.len()];
    on[s] = true;
    let mut best = None;
    go(g, s, e, 0.0, &mut on, &mut best);
    best
}

fn c2_dijkstra_oracle() -> Outcome {
    let start = Instant::now();
    let w = Window::new(0.0, 4.0, 0.0, 3.0).unwrap();
    let mut mismatches = 0;
    let mut cases = 0;
    let mut seed = 0;
    while cases < 50 {
        seed += 1;
        let mut s = RandomStream::new(seed);
        let n = 2 + s.index(7);
        let Ok(t) = build_voronoi(&mut s, &w, 0.5, n) else { continue };
        let Ok((a, b)) = pick_endpoints(&mut s, &t) else { continue };
        let g = PathGraph::from_tessellation(&t);
        let oracle = exhaustive_minimum(&g, a, b);
        let dijkstra = shortest_path(&g, a, b).ok().map(|r| r.1);
        if a == b {
            continue;
        }
        cases += 1;
        if oracle != dijkstra {
            mismatches += 1;
        }
    }
    let t = start.elapsed();
    check(
        mismatches == 0 && t < Duration::from_secs(10),
        format!("{cases} tessellations with 2..=8 generators, {mismatches} mismatches (tolerance 0), {:.2} s", t.as_secs_f64()),
    )
}

struct Crack {
    seed: u64,
    path: Path<f64>,
    widths: Vec<f64>,
    params: ElongatedDefectParams,
    dilation: DilatedPath<f64>,
}

/// First `want` seeds from `first` whose spine dilates in strip mode, as the
/// generator would accept them, and how many seeds were skipped.
fn cracks(first: u64, n: usize, want: usize) -> (Vec<Crack>, usize) {
    let p = ElongatedDefectParams {
        n_generators: n,
        ..elongated(DefectType::Crack)
    };
    let mode = Mode::Strip {
        x0: p.window.w0min,
        x1: p.window.w0max,
    };
    let mut out = Vec::new();
    let mut skipped = 0;
    let mut seed = first;
    while out.len() < want {
        let mut s = RandomStream::new(seed);
        let t = build_voronoi(&mut s, &p.window, p.gamma, p.n_generators).unwrap();
        let path = spanning_path(&mut s, &t).unwrap().filter_short_arcs(p.short_arc_fraction);
        let widths: Vec<f64> = (0..path.arc_count())
            .map(|_| s.uniform(p.width_range[0], p.width_range[1]))
            .collect();
        match dilate(&path, &widths, mode) {
            Ok(dilation) => out.push(Crack {
                seed,
                path,
                widths,
                params: p.clone(),
                dilation,
            }),
            Err(_) => skipped += 1,
        }
        seed += 1;
    }
    (out, skipped)
}

fn mirrored(path: &Path<f64>) -> Path<f64> {
    Path::from_points(path.vertices.iter().map(|p| Point2::new(p.x, -p.y)).collect())
}

fn c3_dilation_coverage() -> Outcome {
    let mut violations = 0;
    let mut sampled = 0;
    let (cs, skipped) = cracks(100, 300, 20);
    for (k, c) in cs.iter().enumerate() {
        let (path, widths, p, d) = (&c.path, &c.widths, &c.params, &c.dilation);
        let (x0, x1) = (p.window.w0min, p.window.w0max);
        let mode = Mode::Strip { x0, x1 };
        let mut footprint = d.upper.vertices.clone();
        footprint.extend(d.lower.vertices.iter().rev());
        let mut rects = rectangles(path, widths, mode);
        rects.extend(
            rectangles(&mirrored(path), widths, mode)
                .into_iter()
                .map(|q| q.map(|c| Point2::new(c.x, -c.y))),
        );
        let mut s = RandomStream::new(k as u64);
        let mut n = 0;
        while n < 10_000 {
            let r = &rects[s.index(rects.len())];
            let (a, b) = (s.unit(), s.unit());
            // b measures the offset from the path towards the outer edge
            if !(1e-9..1.0 - 1e-6).contains(&b) {
                continue;
            }
            let q = r[0] + (r[1] - r[0]) * a + (r[3] - r[0]) * b;
            if q.x <= x0 + 1e-9 || q.x >= x1 - 1e-9 {
                continue;
            }
            n += 1;
            if !point_in_polygon(q, &footprint) {
                violations += 1;
            }
        }
        sampled += n;
    }
    check(
        violations == 0,
        format!(
            "20 paths ({skipped} seeds rejected by dilation), {sampled} points in the rectangle union, {violations} outside the footprint"
        ),
    )
}

fn strip_edges(tris: &[[StripVertex; 3]]) -> HashMap<(StripVertex, StripVertex), usize> {
    let mut m = HashMap::new();
    for t in tris {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *m.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    m
}

fn c4_contour_coverage() -> Outcome {
    let mut bad = Vec::new();
    let (cs, skipped) = cracks(200, p_default_n(), 20);
    for c in &cs {
        let (seed, path, d) = (c.seed, &c.path, &c.dilation);
        for (side, contour, v) in [
            (Side::Upper, &d.upper, StripVertex::Upper as fn(usize) -> StripVertex),
            (Side::Lower, &d.lower, StripVertex::Lower as fn(usize) -> StripVertex),
        ] {
            let strip = triangulate_side(path.arc_count(), contour, side).unwrap();
            let edges = strip_edges(&strip.triangles);
            for j in 0..contour.arc_count() {
                let (a, b) = (v(j), v(j + 1));
                let uses = edges.get(&(a.min(b), a.max(b))).copied().unwrap_or(0);
                if uses != 1 {
                    bad.push(format!("seed {seed} {side:?} arc {j} in {uses} triangles"));
                }
            }
        }
    }
    let mut straight = Vec::new();
    for k in [0usize, 1, 4, 9] {
        let path = Path::from_points((0..k + 2).map(|i| Point2::new(i as f64, 0.0)).collect());
        let widths = vec![0.1; k + 1];
        let d = dilate(&path, &widths, Mode::Strip { x0: 0.0, x1: (k + 1) as f64 }).unwrap();
        for (side, c) in [(Side::Upper, &d.upper), (Side::Lower, &d.lower)] {
            let strip = triangulate_side(path.arc_count(), c, side).unwrap();
            let counts = strip.case_counts();
            if strip.triangles.len() != 2 * (k + 1) || counts[0] != strip.triangles.len() {
                straight.push(format!("k={k} {side:?}: {} triangles, cases {counts:?}", strip.triangles.len()));
            }
        }
    }
    check(
        bad.is_empty() && straight.is_empty(),
        format!(
            "20 cracks ({} seeds rejected by dilation): {} contour arcs not in exactly one triangle; straight paths k in {{0,1,4,9}}: {} without 2(k+1) case-1 triangles {:?}",
            skipped,
            bad.len(),
            straight.len(),
            bad.iter().chain(&straight).take(3).collect::<Vec<_>>()
        ),
    )
}

fn p_default_n() -> usize {
    elongated(DefectType::Crack).n_generators
}

fn c5_fineness() -> Outcome {
    let mean_arc = |seed: u64, n: usize| {
        let p = ElongatedDefectParams {
            n_generators: n,
            ..elongated(DefectType::Crack)
        };
        let spine = generate(&RandomStream::new(seed), &p).unwrap().spine;
        spine.length() / spine.arc_count() as f64
    };
    let finer = (0..20).filter(|&s| mean_arc(s, 2000) < mean_arc(s, 150)).count();
    check(finer >= 18, format!("mean arc length at n=2000 below n=150 in {finer}/20 pairs (need 18)"))
}

fn c6_height_contracts() -> Outcome {
    let mut violations = Vec::new();
    let mut count = 0;
    for t in [DefectType::Crack, DefectType::ColdShut, DefectType::Bulge, DefectType::CoatLift] {
        let p = elongated(t);
        let h = p.surface_height;
        for seed in 0..25 {
            let inst = generate(&RandomStream::new(1000 + seed), &p).unwrap();
            count += 1;
            let hs = &inst.heights;
            let mut v = |cond: bool, what: &str| {
                if !cond {
                    violations.push(format!("{}/{seed}: {what}", t.name()));
                }
            };
            match t {
                DefectType::Crack | DefectType::ColdShut => {
                    v(hs.path.iter().all(|&z| z > 0.0 && z < h), "spine height outside (0, h)");
                    v(hs.upper.iter().chain(&hs.lower).all(|&z| z == h), "contour off h");
                }
                DefectType::Bulge => {
                    let n = hs.path.len();
                    v(hs.path[1..n - 1].iter().all(|&z| z > h), "interior spine not above h");
                    v(hs.upper.iter().chain(&hs.lower).all(|&z| z == h), "contour off h");
                }
                _ => {
                    let n = hs.upper.len();
                    v(hs.upper[1..n - 1].iter().all(|&z| z > h), "interior lifted contour not above h");
                    v(hs.upper[0] == h && hs.upper[n - 1] == h, "lifted contour ends off h");
                    v(hs.path.iter().chain(&hs.lower).all(|&z| z == h), "baseline off h");
                }
            }
        }
    }
    check(
        violations.is_empty(),
        format!("{count} instances, {} violations {:?}", violations.len(), violations.iter().take(3).collect::<Vec<_>>()),
    )
}

/// Circumcenter and squared radius of a triangle.
fn circumcircle(a: Point2<f64>, b: Point2<f64>, c: Point2<f64>) -> (Point2<f64>, f64) {
    let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    let (a2, b2, c2) = (a.x * a.x + a.y * a.y, b.x * b.x + b.y * b.y, c.x * c.x + c.y * c.y);
    let ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
    let uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
    let o = Point2::new(ux, uy);
    (o, (a.x - ux).powi(2) + (a.y - uy).powi(2))
}

fn c7_delaunay() -> Outcome {
    let p = DelamParams::default();
    let tol = 1e-9 * p.window.width();
    let (mut cells, mut violations, mut seed) = (0, 0, 0);
    while cells < 100 {
        let fine = CellSet::sample(&mut RandomStream::new(seed), &p.window, p.gamma, p.n_fine).unwrap();
        let max_area = (0..fine.len()).map(|j| fine.area(j)).fold(0.0, f64::max);
        for j in 0..fine.len() {
            if cells == 100 || fine.polygons[j].len() < 3 || added_point_count(fine.area(j), max_area, p.r_max) == 0 {
                continue;
            }
            let t = triangulate_cell(&mut RandomStream::new(seed).derive(j as u64), &fine.polygons[j], p.r_max, max_area).unwrap();
            cells += 1;
            for tr in &t.triangles {
                let (o, r2) = circumcircle(t.points[tr[0]], t.points[tr[1]], t.points[tr[2]]);
                let r = r2.sqrt();
                for (i, q) in t.points.iter().enumerate() {
                    if !tr.contains(&i) && q.dist(o) < r - tol {
                        violations += 1;
                    }
                }
            }
        }
        seed += 1;
    }
    check(
        violations == 0,
        format!("{cells} fine cells with R > 0, {violations} points inside a circumcircle (tolerance {tol:e})"),
    )
}

fn c8_partition_and_zero_set() -> Outcome {
    let p = DelamParams::default();
    let w = p.window;
    let mut worst: f64 = 0.0;
    for seed in 0..3 {
        let coarse = CellSet::sample(&mut RandomStream::new(seed), &w, p.gamma, p.n_coarse).unwrap();
        let mut s = RandomStream::new(500 + seed);
        let (mut covered, mut overlap) = (0usize, 0usize);
        let n = 100_000;
        for _ in 0..n {
            let q = Point2::new(s.uniform(w.w0min, w.w0max), s.uniform(w.w1min, w.w1max));
            let hits = coarse.polygons.iter().filter(|poly| poly.len() >= 3 && point_in_polygon(q, poly)).count();
            covered += (hits >= 1) as usize;
            overlap += (hits > 1) as usize;
        }
        worst = worst.max((n - covered) as f64 / n as f64).max(overlap as f64 / n as f64);
    }
    let mut zero_set = 0;
    let mut vertices = 0;
    for seed in 0..10 {
        let d = generate_delamination(&RandomStream::new(seed), &p).unwrap();
        let c = &d.cells[0];
        let hs = &c.heights;
        for i in 0..hs.elevation.len() {
            vertices += 1;
            if (hs.elevation[i] == 0.0) != (hs.dist_rel[i] <= hs.threshold[i]) {
                zero_set += 1;
            }
        }
    }
    check(
        worst <= 1e-3 && zero_set == 0,
        format!(
            "uncovered or doubly covered fraction {worst:e} (limit 1e-3) over 3 x 1e5 points; {zero_set} zero-set mismatches over {vertices} vertices of 10 cells"
        ),
    )
}

fn c9_r_formula() -> Outcome {
    let r = [
        added_point_count(7.5, 7.5, 12),
        added_point_count(11.0, 12.0, 12),
        added_point_count(1e-12, 12.0, 12),
    ];
    let square = vec![
        Point2::new(0.0, 0.0),
        Point2::new(2.0, 0.0),
        Point2::new(2.0, 2.0),
        Point2::new(0.0, 2.0),
    ];
    let t = triangulate_cell(&mut RandomStream::new(9), &square, 12, 4.0 * 12.0 / 11.0).unwrap();
    check(
        r == [12, 11, 0] && t.added == 11,
        format!("R for area ratios 1, 11/12, 1e-13: {r:?} (expect [12, 11, 0]); constructed cell gets {} points", t.added),
    )
}

fn c10_volumes() -> Outcome {
    let a = box_mesh(Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 1.0, 1.0), Tag::Slab);
    let b = box_mesh(Point3::new(0.5, 0.0, 0.0), Point3::new(1.5, 1.0, 1.0), Tag::Slab);
    let cubes = boolean(&a, &b, BooleanOp::Union).and_then(|m| m.signed_volume()).unwrap_or(f64::NAN);
    let crack = generate(&RandomStream::new(7), &elongated(DefectType::Crack)).unwrap();
    let params = InstanceParams::Elongated(elongated(DefectType::Crack));
    let slab = SlabSpec::default().slab_for(&params, &crack.mesh).unwrap();
    let slab_volume = slab.footprint.area() * (slab.top_z - slab.bottom_z);
    let expected = slab_volume - crack.volume();
    let imprinted = imprint_into_slab(&slab, &[(&crack.mesh, DefectType::Crack.polarity())])
        .and_then(|m| m.signed_volume())
        .unwrap_or(f64::NAN);
    let rel = ((imprinted - expected) / expected).abs();
    let mut smaller = 0;
    for seed in 0..10 {
        let vol = |t| generate(&RandomStream::new(seed), &elongated(t)).unwrap().volume();
        if vol(DefectType::BuckleOpen) < vol(DefectType::BuckleClosed) {
            smaller += 1;
        }
    }
    check(
        (cubes - 1.5).abs() <= 1e-6 && rel <= 1e-6 && smaller == 10,
        format!(
            "cube union {cubes:.9} (1.5 +- 1e-6); imprinted crack slab {imprinted:.9} vs {expected:.9} (relative {rel:e}); open < closed buckle in {smaller}/10 pairs"
        ),
    )
}

fn run_cli(args: &[&str]) -> (bool, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_defectforge"))
        .args(args)
        .output()
        .expect("binary runs");
    (out.status.success(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn c11_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let ok = run_cli(&["demo", "--type", "crack", "--seed", "42", "--out", out.to_str().unwrap()]).0;
        let read = |ext: &str| std::fs::read(out.join(format!("crack_000042.{ext}"))).unwrap_or_default();
        (ok, read("obj"), read("json"))
    };
    let (ok1, obj1, json1) = run("a");
    let (ok2, obj2, json2) = run("b");
    let identical = ok1 && ok2 && !obj1.is_empty() && obj1 == obj2 && json1 == json2;
    let start = Instant::now();
    let suite_dir = dir.path().join("presets");
    let (suite_ok, err) = run_cli(&["demo", "--type", "all", "--seed", "0", "--out", suite_dir.to_str().unwrap()]);
    let t = start.elapsed();
    let files = std::fs::read_dir(&suite_dir).map(|d| d.count()).unwrap_or(0);
    check(
        identical && suite_ok && files == 2 * presets().len() && t < Duration::from_secs(120),
        format!(
            "two crack demos byte-identical: {identical}; preset suite ok: {suite_ok}, {files} files, {:.1} s (limit 120 s) {}",
            t.as_secs_f64(),
            err.trim()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("closedness sweep", c1_closedness_sweep),
        ("Dijkstra oracle", c2_dijkstra_oracle),
        ("dilation coverage", c3_dilation_coverage),
        ("contour coverage", c4_contour_coverage),
        ("fineness", c5_fineness),
        ("height contracts", c6_height_contracts),
        ("Delaunay property", c7_delaunay),
        ("partition and zero set", c8_partition_and_zero_set),
        ("R formula", c9_r_formula),
        ("volume accounting", c10_volumes),
        ("determinism and presets", c11_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(d) => println!("criterion {:>2} PASS {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {d}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
