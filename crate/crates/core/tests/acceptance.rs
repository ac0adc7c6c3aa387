//! Acceptance battery. Each criterion prints one PASS/FAIL line; the
//! process exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use smallness_core::fixtures::{default_star_union, StarUnionFixture, StarUnionTarget};
use smallness_core::pipeline::{build_weighted_cover, GuardMode};
use smallness_core::random::{random_family, random_pipeline, random_singleton, random_tr2};
use smallness_core::rational::{self, Probability, Rational};
use smallness_core::singleton::build_singleton_cover;
use smallness_core::solvers::{self, threshold_chain, CertificateDocument};
use smallness_core::star_forest::build_schedule;
use smallness_core::{IncreasingFamily, Subset, Sweeper};

const SEED: u64 = 20261015;

struct Verdict {
    ok: bool,
    detail: String,
}

fn rng(stream: u64, i: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ (stream << 32) ^ i)
}

fn first_failures(fails: &[String]) -> String {
    if fails.is_empty() {
        return String::new();
    }
    format!("; first: {}", fails.iter().take(3).cloned().collect::<Vec<_>>().join(" | "))
}

struct ChainRun {
    family: IncreasingFamily,
    note: Option<String>,
    certificates: Vec<CertificateDocument>,
}

fn chain_one(i: u64) -> ChainRun {
    let tol = solvers::default_tolerance();
    let family = random_family(&mut rng(1, i), 8);
    let run = || -> smallness_core::Result<(bool, Vec<CertificateDocument>)> {
        let chain = threshold_chain(&family, &tol)?;
        Ok((chain.holds(), chain.certificates(&family)))
    };
    match run() {
        Ok((ok, certificates)) => ChainRun { note: (!ok).then(|| format!("family {i}: chain violated")), family, certificates },
        Err(e) => ChainRun { note: Some(format!("family {i}: {e}")), family, certificates: Vec::new() },
    }
}

fn criterion_1() -> (Verdict, Vec<CertificateDocument>) {
    let start = Instant::now();
    let runs: Vec<ChainRun> = (0..500).into_par_iter().map(chain_one).collect();
    let elapsed = start.elapsed();
    let fails: Vec<String> = runs.iter().filter_map(|r| r.note.clone()).collect();
    let max_n = runs.iter().map(|r| r.family.n()).max().unwrap_or(0);
    let ok = fails.is_empty() && elapsed < Duration::from_secs(300);
    let detail = format!(
        "500 families (n <= {max_n}), q <= q_f <= p_c at tol 2^-30, {} failures, {:.1}s{}",
        fails.len(),
        elapsed.as_secs_f64(),
        first_failures(&fails)
    );
    let docs = runs.into_iter().flat_map(|r| r.certificates).collect();
    (Verdict { ok, detail }, docs)
}

fn criterion_2() -> Verdict {
    let sweeper = Sweeper::default();
    let mut fails = Vec::new();
    let mut targets = 0u64;
    let mut strict_lower = 0u64;
    for i in 0..200 {
        let inst = random_singleton(&mut rng(2, i));
        let cover = build_singleton_cover(&inst);
        let pred = inst.target_predicate();
        let report = match cover.cover.verify_coverage(inst.n(), pred, &sweeper) {
            Ok(r) => r,
            Err(e) => {
                fails.push(format!("instance {i}: {e}"));
                continue;
            }
        };
        targets += report.targets;
        // 2e/(J - 2e) grows with e, so e rounded up gives the weaker, sufficient cap.
        let two_e = rational::int(2) * rational::e_upper();
        let cap = &two_e / (inst.j() - &two_e);
        let cost = cover.cost.exact.clone();
        let cost_ok = cost.as_ref().is_some_and(|c| *c < cap);
        if cover.within_bound() {
            strict_lower += 1;
        }
        if !report.verified || !cost_ok {
            fails.push(format!("instance {i}: coverage {} cost {}", report.verified, cost_ok));
        }
    }
    Verdict {
        ok: fails.is_empty(),
        detail: format!(
            "200 instances, {targets} targets covered, cost < 2e/(J-2e) exactly ({strict_lower}/200 also with e rounded down), {} failures{}",
            fails.len(),
            first_failures(&fails)
        ),
    }
}

struct Tr2Run {
    coverage_fail: Option<String>,
    chain_fail: Option<String>,
    internals_fail: Option<String>,
    targets: u64,
    enumerated: bool,
}

fn tr2_one(i: u64) -> Tr2Run {
    let inst = random_tr2(&mut rng(3, i));
    let pred = inst.target_predicate();
    let n = inst.graph().n();
    let mut out = Tr2Run { coverage_fail: None, chain_fail: None, internals_fail: None, targets: 0, enumerated: false };
    for bits in 0..1u64 << n {
        let u = Subset(bits);
        if !pred(u) {
            continue;
        }
        out.targets += 1;
        let check = inst.check_target(u);
        if !check.witness_ok && out.coverage_fail.is_none() {
            out.coverage_fail = Some(format!("graph {i}: no witness in {:#x}", u.bits()));
        }
        if !(check.sum_d_squared_ok && check.dichotomy_ok) && out.internals_fail.is_none() {
            out.internals_fail = Some(format!("graph {i}: greedy bounds fail at {:#x}", u.bits()));
        }
    }
    // The cover has to catch each target too, not only the greedy witness.
    let cover = inst.cover();
    let covered = cover.verify_coverage(n, &pred, &Sweeper::with_workers(1));
    if !matches!(covered, Ok(ref r) if r.verified) && out.coverage_fail.is_none() {
        out.coverage_fail = Some(format!("graph {i}: cover misses a target"));
    }
    match inst.cost_chain() {
        Some(chain) => {
            out.enumerated = chain.levels.iter().all(|l| l.enumerated.is_some());
            if !chain.holds() {
                out.chain_fail = Some(format!("graph {i}: {:?}", chain.failed_links()));
            }
        }
        None if inst.target_is_empty() => {}
        None => out.chain_fail = Some(format!("graph {i}: no cost chain")),
    }
    out
}

fn criteria_3_and_4() -> (Verdict, Verdict) {
    let runs: Vec<Tr2Run> = (0..200).into_par_iter().map(tr2_one).collect();
    let targets: u64 = runs.iter().map(|r| r.targets).sum();
    let enumerated = runs.iter().filter(|r| r.enumerated).count();
    let cov: Vec<String> = runs.iter().filter_map(|r| r.coverage_fail.clone().or(r.chain_fail.clone())).collect();
    let internals: Vec<String> = runs.iter().filter_map(|r| r.internals_fail.clone()).collect();
    (
        Verdict {
            ok: cov.is_empty(),
            detail: format!(
                "200 graphs (n 9..14), {targets} targets witnessed, cost chain holds ({enumerated} with exact enumeration), {} failures{}",
                cov.len(),
                first_failures(&cov)
            ),
        },
        Verdict {
            ok: internals.is_empty(),
            detail: format!(
                "sum d_j^2 >= |G[U]|/2 and bucket dichotomy on {targets} targets, {} failures{}",
                internals.len(),
                first_failures(&internals)
            ),
        },
    )
}

fn criterion_5() -> Verdict {
    let sweeper = Sweeper::default();
    let mut fails = Vec::new();
    let mut summary = Vec::new();
    for mode in [GuardMode::Theorem, GuardMode::Reduced] {
        let (mut targets, mut degenerate, mut nonempty, mut class_pieces) = (0u64, 0, 0, 0);
        for i in 0..100 {
            let stream = if mode == GuardMode::Theorem { 5 } else { 6 };
            let result = random_pipeline(&mut rng(stream, i), mode).and_then(|inst| {
                let wc = build_weighted_cover(&inst)?;
                let v = wc.verify(&sweeper)?;
                Ok((inst.is_degenerate(), wc.classes.len(), v, wc.cost_caps_ok(), wc.column_halving))
            });
            match result {
                Ok((deg, classes, v, caps, halving)) => {
                    targets += v.targets;
                    degenerate += deg as u32;
                    nonempty += (v.targets > 0) as u32;
                    class_pieces += classes;
                    let caps_ok = match mode {
                        GuardMode::Theorem => caps,
                        GuardMode::Reduced => halving,
                    };
                    if !v.passed() || !caps_ok {
                        fails.push(format!("{mode:?} graph {i}: coverage {} caps {caps_ok} {:?}", v.passed(), v.first_failure));
                    }
                }
                Err(e) => fails.push(format!("{mode:?} graph {i}: {e}")),
            }
        }
        summary.push(format!(
            "{mode:?}: {targets} targets, {nonempty} graphs with targets, {degenerate} degenerate, {class_pieces} class pieces"
        ));
    }
    Verdict {
        ok: fails.is_empty(),
        detail: format!(
            "100+100 weighted graphs (n <= 12), coverage of U_0, subtotal caps (theorem guard), heavy-class claim; {}; {} failures{}",
            summary.join("; "),
            fails.len(),
            first_failures(&fails)
        ),
    }
}

fn criterion_6() -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut fixtures = vec![default_star_union()];
    for m in [2u64, 4] {
        fixtures.push(StarUnionFixture::new(1, Probability::ratio(1, 2).unwrap(), m).unwrap());
    }
    fixtures.push(StarUnionFixture::new(2, Probability::ratio(1, 2).unwrap(), 6).unwrap());
    for f in fixtures {
        let json = serde_json::to_string(&f.to_fixture("star-union")).unwrap();
        for target in [StarUnionTarget::AtLeastT, StarUnionTarget::StarCopies] {
            match f.evaluate(target) {
                Ok(r) => {
                    // Not less than 1/K; the center cover shows equality is attained.
                    let good = r.at_least_one_over_k && r.centers_cover && r.center_cost == r.one_over_k && !json.is_empty();
                    ok &= good;
                    notes.push(format!("K={} m={} n={} {:?}: C* = {}", r.k, r.m, r.n, target, rational::format_rational(&r.min_cover_cost)));
                    if target == StarUnionTarget::AtLeastT && r.side_condition_targets != 0 {
                        ok = false;
                    }
                }
                Err(e) => {
                    ok = false;
                    notes.push(format!("K={} m={}: {e}", f.k, f.m));
                }
            }
        }
    }
    Verdict { ok, detail: format!("star-union fixtures, C* >= 1/K with the D(U) condition dropped (0 targets with it): {}", notes.join(", ")) }
}

fn criterion_7() -> Verdict {
    let mut fails = Vec::new();
    for k in 1..=20u32 {
        let s = match build_schedule(k) {
            Ok(s) => s,
            Err(e) => {
                fails.push(format!("k={k}: {e}"));
                continue;
            }
        };
        let mut sum = Rational::from_integer(0.into());
        for lv in &s.levels {
            let i = lv.i as i64;
            let ki = k as i64;
            let b = rational::pow2(2 * ki + 1 - 3 * i).max(rational::pow2(ki - i));
            let two_l = rational::pow2(lv.l as i64 + 4) * &lv.delta;
            if rational::from_u64(lv.b) != b || two_l < rational::from_u64(lv.l) {
                fails.push(format!("k={k} i={i}"));
            }
            sum += &lv.delta;
        }
        if sum > rational::rat(1, 2) {
            fails.push(format!("k={k}: sum delta = {sum}"));
        }
    }
    Verdict { ok: fails.is_empty(), detail: format!("k = 1..20, b_i closed form, sum delta_i <= 1/2, 2^(L+4) delta >= L, {} failures{}", fails.len(), first_failures(&fails)) }
}

fn criterion_8(docs: &[CertificateDocument]) -> Verdict {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut fails = Vec::new();
    for (i, doc) in docs.iter().enumerate() {
        let path = dir.path().join(format!("cert-{i}.json"));
        if let Err(e) = doc.write(&path) {
            fails.push(format!("write {i}: {e}"));
            continue;
        }
        match solvers::replay(&path, None) {
            Ok(r) if r.bit_exact && r.verified => {}
            Ok(r) => fails.push(format!("cert {i}: bit_exact {} verified {} {:?}", r.bit_exact, r.verified, r.reason)),
            Err(e) => fails.push(format!("cert {i}: {e}")),
        }
    }
    Verdict {
        ok: !docs.is_empty() && fails.is_empty(),
        detail: format!("{} certificates written and replayed from disk, {} failures{}", docs.len(), fails.len(), first_failures(&fails)),
    }
}

fn timed(id: &str, name: &str, f: impl FnOnce() -> Verdict) -> bool {
    let t = Instant::now();
    let v = f();
    report(id, name, &v, t.elapsed());
    v.ok
}

fn report(id: &str, name: &str, v: &Verdict, elapsed: Duration) {
    let tag = if v.ok { "PASS" } else { "FAIL" };
    println!("criterion {id} [{name}]: {tag} ({:.1}s) {}", elapsed.as_secs_f64(), v.detail);
}

fn main() -> ExitCode {
    let mut results = Vec::new();
    let mut docs = Vec::new();
    results.push(timed("1", "threshold chain", || {
        let (v, d) = criterion_1();
        docs = d;
        v
    }));
    results.push(timed("2", "singleton cover", criterion_2));
    let t = Instant::now();
    let (v3, v4) = criteria_3_and_4();
    let e = t.elapsed();
    report("3", "star-forest cover", &v3, e);
    report("4", "greedy decomposition", &v4, e);
    results.extend([v3.ok, v4.ok]);
    results.push(timed("5", "weighted pipeline", criterion_5));
    results.push(timed("6", "necessity fixture", criterion_6));
    results.push(timed("7", "schedule arithmetic", criterion_7));
    results.push(timed("8", "certificate replay", || criterion_8(&docs)));
    if results.iter().all(|&ok| ok) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
