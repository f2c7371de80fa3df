//! Acceptance criteria, one line each: `criterion N (name): PASS|FAIL detail`.
//!
//! Runs as a plain binary so the report is printed whatever the capture
//! settings. Exits non-zero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use boxqp_core::bench::{
    builtin_bl, generate, run_t1, run_t2, run_t4, run_t56, GenSpec, SearchConfig, SuiteConfig, Table,
};
use boxqp_core::conic::{CapSet, SocCap};
use boxqp_core::cuts::{base_constraints, generate_local, CutCatalog};
use boxqp_core::driver::{run, DriverConfig, SolveReport};
use boxqp_core::exact::{
    affine_rank, all_extreme_points, lifted_coordinates, min_over, solve_exact_qpb3, switch_point,
    tight_count, tight_fixtures, ExtremeSet,
};
use boxqp_core::oracle::solve_global;
use boxqp_core::par::Execution;
use boxqp_core::{ClarabelBackend, Family, MomentPoint, RelaxationLevel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn backend() -> ClarabelBackend {
    ClarabelBackend::default()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn check_table(t: &Table, expected: &[&[f64]], tol: f64) -> Outcome {
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for (r, row) in expected.iter().enumerate() {
        for (c, &want) in row.iter().enumerate() {
            match t.value(r, c) {
                Some(got) => {
                    let d = (got - want).abs();
                    worst = worst.max(d);
                    if d > tol {
                        bad.push(format!(
                            "[{} / {}] {got:.5} vs {want}",
                            t.row_labels[r], t.col_labels[c]
                        ));
                    }
                }
                None => bad.push(format!("[{} / {}] no value", t.row_labels[r], t.col_labels[c])),
            }
        }
    }
    let cells: usize = expected.iter().map(|r| r.len()).sum();
    if bad.is_empty() {
        Outcome::new(true, format!("{cells} cells, max deviation {worst:.2e}"))
    } else {
        Outcome::new(false, bad.join("; "))
    }
}

fn c1_bl_ladder() -> Outcome {
    let expected = [1.09291, 1.06613, 1.05882, 1.00000];
    let levels = [
        RelaxationLevel::psd_rlt_tri(),
        RelaxationLevel::etri1(),
        RelaxationLevel::etri123(),
        RelaxationLevel::soc(),
    ];
    let b = backend();
    let mut got = Vec::new();
    for level in &levels {
        match run(&builtin_bl(), level, &DriverConfig::default(), &b) {
            Ok(r) => got.push(r.value),
            Err(e) => return Outcome::new(false, format!("{}: {e}", level.name())),
        }
    }
    let pass = got.iter().zip(&expected).all(|(g, e)| close(*g, *e, 1e-4));
    let text: Vec<String> = got.iter().map(|v| format!("{v:.5}")).collect();
    Outcome::new(pass, format!("values {}", text.join(" / ")))
}

fn c2_table1() -> Outcome {
    let t = run_t1(&backend(), Execution::default());
    check_table(
        &t,
        &[
            &[0.125, 0.125, 0.125, 0.125, 0.0625, 0.0377],
            &[0.0, 0.125, 0.1111, 0.0, 0.0625, 0.0335],
            &[0.0, 0.0, 0.0625, 0.0, 0.0, 0.0188],
        ],
        1e-3,
    )
}

fn c3_table2() -> Outcome {
    let t = run_t2(&backend(), Execution::default());
    check_table(
        &t,
        &[
            &[0.3333, 0.3333, 0.0471, 0.0311],
            &[0.1111, 0.2038, 0.0157, 0.0190],
            &[0.1005, 0.1005, 0.0142, 0.0094],
            &[0.0856, 0.0856, 0.0121, 0.0080],
        ],
        1e-3,
    )
}

fn norm2(row: &[i64; 10]) -> i64 {
    row[..9].iter().map(|v| v * v).sum()
}

fn c4_catalog() -> Outcome {
    let catalog = CutCatalog::generate();
    let mut notes = Vec::new();
    let mut pass = true;
    for (fam, rows, min2, base2) in [
        (Family::Etri1, 24, 11, 14),
        (Family::Etri2, 24, 50, 65),
        (Family::Etri3, 48, 115, 122),
    ] {
        let cuts = catalog.get(fam);
        let keys: Option<Vec<[i64; 10]>> = cuts.iter().map(|c| c.integer_key()).collect();
        let Some(keys) = keys else {
            return Outcome::new(false, format!("{} has non-integral rows", fam.name()));
        };
        let got_min = keys.iter().map(norm2).min().unwrap_or(-1);
        let bases: Vec<i64> = base_constraints(fam).iter().map(norm2).collect();
        let ok = cuts.len() == rows
            && catalog.matches_golden(fam)
            && got_min == min2
            && bases.iter().all(|&b| b == base2);
        pass &= ok;
        notes.push(format!(
            "{} {} rows, min norm^2 {got_min}, base norm^2 {bases:?}",
            fam.name(),
            cuts.len()
        ));
    }
    Outcome::new(pass, notes.join("; "))
}

fn c5_oracles() -> Outcome {
    let b = backend();
    let densities = [50, 60, 70, 80, 90, 100];
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for k in 0..100 {
        let spec = GenSpec::new(3, densities[k % densities.len()], k as u32 + 1, 5);
        let inst = generate(&spec);
        let exact = solve_exact_qpb3(&inst, &b);
        let global = solve_global(&inst);
        match (exact, global) {
            (Ok(e), Ok(g)) => {
                worst = worst.max((e - g.value).abs());
                if !close(e, g.value, 1e-5) {
                    bad.push(format!("{}: {e} vs {}", spec.label(), g.value));
                }
            }
            (e, g) => bad.push(format!("{}: {e:?} / {:?}", spec.label(), g.map(|s| s.value))),
        }
    }
    let bl_exact = solve_exact_qpb3(&builtin_bl(), &b).unwrap_or(f64::NAN);
    let bl_global = solve_global(&builtin_bl()).map(|s| s.value).unwrap_or(f64::NAN);
    let bl_ok = close(bl_exact, 1.0, 1e-5) && close(bl_global, 1.0, 1e-5);
    Outcome::new(
        bad.is_empty() && bl_ok,
        format!(
            "100 instances, max |exact - global| {worst:.2e}; BL {bl_exact:.6} / {bl_global:.6}{}",
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }
        ),
    )
}

fn c6_extreme_points() -> Outcome {
    let p0 = all_extreme_points(ExtremeSet::P0);
    let p1 = all_extreme_points(ExtremeSet::P1);
    let mut fails = Vec::new();
    for fam in [Family::Rlt, Family::Tri, Family::Etri1, Family::Etri2, Family::Etri3] {
        let cuts = generate_local(fam);
        let invalid = cuts.iter().filter(|c| min_over(c, &p0) < -1e-12).count();
        if invalid > 0 {
            fails.push(format!("{} {invalid}/{} cuts negative on P0", fam.name(), cuts.len()));
        }
    }
    for fam in [Family::Etri2, Family::Etri3] {
        let cuts = generate_local(fam);
        let invalid = cuts.iter().filter(|c| min_over(c, &p1) < -1e-12).count();
        if invalid > 0 {
            fails.push(format!("{} {invalid}/{} cuts negative on P1", fam.name(), cuts.len()));
        }
    }
    let etri1 = generate_local(Family::Etri1);
    let loose = etri1.iter().filter(|c| tight_count(c, &p0, 1e-9) < 2).count();
    if loose > 0 {
        fails.push(format!("ETRI1 {loose}/24 cuts tight on fewer than 2 P0 points"));
    }
    // The property that does hold: a switched cut is valid on the extreme
    // points carried along by the same switch.
    let mut transported_ok = true;
    for (fam, base_set) in [(Family::Etri1, &p0), (Family::Etri2, &p1), (Family::Etri3, &p1)] {
        for cut in generate_local(fam) {
            let inv = cut.tag.pattern.inverse();
            let pts: Vec<MomentPoint> = base_set.iter().map(|p| switch_point(p, &inv)).collect();
            transported_ok &= min_over(&cut, &pts) >= -1e-12;
        }
    }
    let head = format!("P0 {} points, P1 {} points", p0.len(), p1.len());
    let tail = format!(
        "switched cuts on the correspondingly switched base set (P0 for ETRI1, P1 for ETRI2/3): {}",
        if transported_ok { "all valid" } else { "violations" }
    );
    let sizes_ok = p0.len() == 60 && p1.len() == 192;
    if fails.is_empty() && sizes_ok {
        Outcome::new(true, format!("{head}; {tail}"))
    } else {
        Outcome::new(false, format!("{head}; {}; {tail}", fails.join("; ")))
    }
}

fn c7_tight_fixtures() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for (fam, count, rank) in [(Family::Etri1, 6, 5), (Family::Etri2, 6, 5), (Family::Etri3, 5, 4)] {
        let (cut, pts) = tight_fixtures(fam);
        let max_lhs = pts
            .iter()
            .map(|&x| cut.evaluate_local_rank_one(x).abs())
            .fold(0.0, f64::max);
        let on_lifts = pts.iter().all(|x| {
            x.iter().all(|v| (0.0..=1.0).contains(v)) && {
                let p = MomentPoint::rank_one(x, false);
                (cut.evaluate(&p) - cut.evaluate_local_rank_one(*x)).abs() <= 1e-12
            }
        });
        let coords: Vec<Vec<f64>> = pts.iter().map(|&x| lifted_coordinates(x)).collect();
        let r = affine_rank(&coords);
        let ok = pts.len() == count && max_lhs <= 1e-12 && on_lifts && r == rank;
        pass &= ok;
        notes.push(format!(
            "{} {} points, max |lhs| {max_lhs:.1e}, rank {r}",
            fam.name(),
            pts.len()
        ));
    }
    Outcome::new(pass, notes.join("; "))
}

/// A point of the trilinear hull: a random convex combination of the eight
/// vertex lifts, as `(x, off-diagonal X, z)`.
fn hull_sample(rng: &mut ChaCha8Rng) -> ([f64; 3], [f64; 3], f64) {
    let w: Vec<f64> = (0..8).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let total: f64 = w.iter().sum();
    let (mut x, mut off, mut z) = ([0.0; 3], [0.0; 3], 0.0);
    for (m, wm) in w.iter().enumerate() {
        let v: [f64; 3] = std::array::from_fn(|a| ((m >> a) & 1) as f64);
        let l = wm / total;
        for a in 0..3 {
            x[a] += l * v[a];
        }
        off[0] += l * v[0] * v[1];
        off[1] += l * v[0] * v[2];
        off[2] += l * v[1] * v[2];
        z += l * v[0] * v[1] * v[2];
    }
    (x, off, z)
}

fn local_matrix(diag: [f64; 3], off: [f64; 3]) -> [[f64; 3]; 3] {
    [
        [diag[0], off[0], off[1]],
        [off[0], diag[1], off[2]],
        [off[1], off[2], diag[2]],
    ]
}

fn caps_hold(caps: &[SocCap], x: &[f64; 3], xx: &[[f64; 3]; 3], z: f64) -> bool {
    caps.iter().all(|c| c.violation(x, xx, z) <= 0.0)
}

/// Minimum ETRI left-hand side over samples that satisfy the hull rows and
/// every cap, with the diagonal pushed down to the smallest feasible scale of
/// a random direction. Returns `(min lhs, samples used)`.
fn implied_min(caps: &[SocCap], families: &[Family], samples: usize, seed: u64) -> (f64, usize) {
    let cuts: Vec<_> = families.iter().flat_map(|&f| generate_local(f)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min = f64::INFINITY;
    let mut used = 0;
    for _ in 0..samples {
        let (x, off, z) = hull_sample(&mut rng);
        let w: [f64; 3] = std::array::from_fn(|_| 0.05 + rng.random::<f64>());
        let at = |t: f64| local_matrix(w.map(|v| t * v), off);
        let mut hi = 1.0;
        while !caps_hold(caps, &x, &at(hi), z) && hi < 1e6 {
            hi *= 2.0;
        }
        if !caps_hold(caps, &x, &at(hi), z) {
            continue;
        }
        let mut lo = 0.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if caps_hold(caps, &x, &at(mid), z) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let xx = at(hi);
        used += 1;
        for c in &cuts {
            min = min.min(c.form().eval(&x, &xx, z));
        }
    }
    (min, used)
}

fn c8_implication() -> Outcome {
    let n = 100_000;
    let (m4, u4) = implied_min(&CapSet::product_only().caps(), &[Family::Etri1, Family::Etri2], n, 4);
    let (m5, u5) = implied_min(&CapSet::etri3_only().caps(), &[Family::Etri3], n, 5);
    Outcome::new(
        m4 >= -1e-9 && m5 >= -1e-9 && u4 == n && u5 == n,
        format!("product caps: {u4} samples, min ETRI1/2 lhs {m4:.2e}; ETRI3 caps: {u5} samples, min ETRI3 lhs {m5:.2e}"),
    )
}

fn c9_table4() -> Outcome {
    let search = SearchConfig::default();
    let (t, rows) = run_t4(&backend(), Some(&search));
    let expected = [0.1768, 0.0625, 0.0188];
    let mut pass = true;
    let mut notes = Vec::new();
    for (i, want) in expected.iter().enumerate() {
        let got = rows[i].gap.unwrap_or(f64::NAN);
        pass &= close(got, *want, 1e-3);
        notes.push(format!("{} {got:.5}", rows[i].level.name()));
    }
    for r in &rows[3..] {
        match r.gap {
            Some(g) => notes.push(format!("{} {g:.5} (searched)", r.level.name())),
            None => {
                pass = false;
                notes.push(format!("{} search failed", r.level.name()));
            }
        }
    }
    for i in 0..rows.len() {
        for j in 0..i {
            if let (Some(gi), Some(gj)) = (rows[i].gap, rows[j].gap) {
                if gi > gj + 1e-6 {
                    pass = false;
                    notes.push(format!("{} exceeds {}", t.row_labels[i], t.row_labels[j]));
                }
            }
        }
    }
    notes.push(format!("budget {} per searched level", search.budget));
    Outcome::new(pass, notes.join("; "))
}

fn c10_suite() -> Outcome {
    let cfg = SuiteConfig::default();
    let (rows, _, _) = run_t56(&cfg, &backend());
    let mut issues = Vec::new();
    let mut non_tight = 0;
    let mut closed_non_tight = 0;
    let mut closed = 0;
    let mut extracted = 0;
    for r in &rows {
        if !r.errors.is_empty() {
            issues.push(format!("{}: {}", r.label, r.errors.join("; ")));
            continue;
        }
        let gaps = r.gaps();
        let slack = 1e-6 * (1.0 + r.opt.abs());
        if gaps.windows(2).any(|w| w[1] > w[0] + slack) {
            issues.push(format!("{}: gaps not monotone {gaps:?}", r.label));
        }
        if r.values.iter().any(|&v| v < r.opt - 1e-6) {
            issues.push(format!("{}: value below OPT {:?} < {}", r.label, r.values, r.opt));
        }
        if gaps[0] > 1e-4 {
            non_tight += 1;
            if gaps[3] < 1e-4 {
                closed_non_tight += 1;
            }
        }
        if gaps[3] < 1e-4 {
            closed += 1;
            match r.extracted_value {
                Some(v) if (v - r.values[3]).abs() <= 1e-4 && v <= r.opt + 1e-6 => extracted += 1,
                other => issues.push(format!("{}: extraction {other:?} vs bound {}", r.label, r.values[3])),
            }
        }
    }
    if 2 * closed_non_tight < non_tight {
        issues.push(format!("SOC closed only {closed_non_tight} of {non_tight} non-tight instances"));
    }
    let summary = format!(
        "{} instances, {non_tight} not tight at PSD+RLT+TRI, {closed_non_tight} of those closed by SOC, \
         {closed} closed overall, {extracted} extracted",
        rows.len()
    ) + if non_tight == 0 { " (SOC closure check vacuous on this sample)" } else { "" };
    if issues.is_empty() {
        Outcome::new(true, summary)
    } else {
        Outcome::new(false, format!("{summary}; {}", issues.join("; ")))
    }
}

fn permanent(r: &SolveReport) -> bool {
    let added: Vec<_> = r.log.iter().flat_map(|l| l.added.iter().cloned()).collect();
    let blocks: usize = r.log.iter().map(|l| l.blocks_added).sum();
    added == r.state.cuts && blocks == r.state.blocks.len()
}

fn non_increasing(r: &SolveReport) -> bool {
    r.log
        .windows(2)
        .all(|w| w[1].value <= w[0].value + 1e-6 * (1.0 + w[0].value.abs()))
}

fn c11_driver() -> Outcome {
    let b = backend();
    let cases = [
        (builtin_bl(), RelaxationLevel::soc()),
        (generate(&GenSpec::new(6, 70, 1, 11)), RelaxationLevel::soc()),
        (generate(&GenSpec::new(8, 80, 2, 11)), RelaxationLevel::etri123()),
    ];
    let mut notes = Vec::new();
    let mut pass = true;
    for (inst, level) in &cases {
        let cfg = DriverConfig {
            seed: 3,
            ..Default::default()
        };
        let (a, bb) = match (run(inst, level, &cfg, &b), run(inst, level, &cfg, &b)) {
            (Ok(a), Ok(bb)) => (a, bb),
            (a, bb) => {
                pass = false;
                notes.push(format!("{}: {:?} / {:?}", inst.label().unwrap_or("?"), a.err(), bb.err()));
                continue;
            }
        };
        let same = a.log == bb.log;
        let ok = same && permanent(&a) && non_increasing(&a);
        pass &= ok;
        notes.push(format!(
            "{} {}: {} rounds, {} cuts, identical logs {same}, permanent {}, non-increasing {}",
            inst.label().unwrap_or("?"),
            level.name(),
            a.log.len(),
            a.state.cuts.len(),
            permanent(&a),
            non_increasing(&a)
        ));
    }
    Outcome::new(pass, notes.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("BL ladder", c1_bl_ladder),
        ("maximum violations I", c2_table1),
        ("maximum violations II", c3_table2),
        ("catalog regeneration", c4_catalog),
        ("oracle agreement", c5_oracles),
        ("extreme-point suite", c6_extreme_points),
        ("equality fixtures", c7_tight_fixtures),
        ("cap implication", c8_implication),
        ("normalised gaps", c9_table4),
        ("regenerated suite", c10_suite),
        ("driver invariants", c11_driver),
    ];
    let only: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|_| Outcome::new(false, "panicked"));
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "criterion {n} ({name}): {} [{:.1}s] {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
