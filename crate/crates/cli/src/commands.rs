use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use smallness_core::cover::{CostReport, CoverageReport};
use smallness_core::family::FamilyFile;
use smallness_core::fixtures::{all_fixtures, necessity_fixtures, Fixture, NecessityReport, StarUnionTarget};
use smallness_core::graph::GraphFile;
use smallness_core::pipeline::{build_weighted_cover, GuardMode, PipelineInstance, PipelineReport, PipelineVerification};
use smallness_core::random::random_family;
use smallness_core::rational::{self, Rational, RationalValue};
use smallness_core::singleton::{build_singleton_cover, SingletonCover, SingletonInstance};
use smallness_core::solvers::{self, replay, threshold_chain, CertificateDocument, ReplayReport};
use smallness_core::star_forest::{CostChain, Reduction, Schedule, Tr2Conditions, Tr2Instance, Tr2Verification};
use smallness_core::{Error, IncreasingFamily, Interval, Subset, Sweeper, WeightedGraph};

use crate::output::{Failure, Outcome, Row};
use crate::{ChainArgs, CheckArgs, Context, FixturesArgs, GraphArgs, SingletonArgs, ThresholdsArgs, VerifyMode, WeightedArgs};

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text).map_err(Error::from)?)
}

fn read_family(path: &Path) -> Result<IncreasingFamily, Failure> {
    let file: FamilyFile = read_json(path)?;
    Ok(IncreasingFamily::try_from(&file)?)
}

fn read_graph(path: &Path) -> Result<WeightedGraph, Failure> {
    let file: GraphFile = read_json(path)?;
    Ok(WeightedGraph::try_from(&file)?)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ZetaFile {
    List(Vec<RationalValue>),
    Object { zeta: Vec<RationalValue> },
}

fn read_zeta(path: &Path) -> Result<Vec<Rational>, Failure> {
    let zeta = match read_json::<ZetaFile>(path)? {
        ZetaFile::List(z) | ZetaFile::Object { zeta: z } => z,
    };
    Ok(zeta.into_iter().map(|v| v.0).collect())
}

fn sweeper(ctx: &Context) -> Sweeper {
    Sweeper::with_workers(ctx.workers)
}

#[derive(Serialize)]
struct ChainSummary {
    ordered: bool,
    widths_ok: bool,
    #[serde(with = "rational::serde_rational")]
    mu: Rational,
    #[serde(with = "rational::serde_rational")]
    weighted_mu: Rational,
    #[serde(with = "rational::serde_rational")]
    lambda_cost: Rational,
    holds: bool,
}

#[derive(Serialize)]
struct CertificateEntry {
    kind: &'static str,
    path: String,
    #[serde(with = "rational::serde_rational")]
    cost: Rational,
    replay: Option<ReplayReport>,
}

#[derive(Serialize)]
struct ThresholdsReport {
    n: usize,
    minimal_sets: Vec<Subset>,
    #[serde(with = "rational::serde_rational")]
    tol: Rational,
    p_c: Interval,
    q_f: Interval,
    q: Interval,
    chain: ChainSummary,
    certificates: Vec<CertificateEntry>,
    verdict: bool,
}

pub fn thresholds(_ctx: &Context, args: ThresholdsArgs) -> Result<Outcome, Failure> {
    let fam = read_family(&args.family)?;
    let tol = args.tol.unwrap_or_else(solvers::default_tolerance);
    if tol <= Rational::from_integer(0.into()) {
        return Err(Error::Guard("tolerance must be positive".into()).into());
    }
    log::info!("thresholds: n = {}, {} minimal sets", fam.n(), fam.minimal_sets().len());
    let chain = threshold_chain(&fam, &tol)?;
    let costs = [chain.q_f.certificate.cost(), chain.q.certificate.cost()];
    let mut certificates = Vec::new();
    if let Some(dir) = &args.cert_dir {
        fs::create_dir_all(dir)?;
        for ((doc, kind), cost) in chain.certificates(&fam).into_iter().zip(["q_f", "q"]).zip(costs.iter()) {
            let path = dir.join(format!("{kind}.json"));
            doc.write(&path)?;
            let replayed = if args.check { Some(replay(&path, None)?) } else { None };
            certificates.push(CertificateEntry { kind, path: path.display().to_string(), cost: cost.clone(), replay: replayed });
        }
    }
    let replays_ok = certificates.iter().all(|c| c.replay.as_ref().is_none_or(|r| r.verified));
    let verdict = chain.holds() && replays_ok;
    let n = fam.n();
    let rows = vec![
        Row::new("p_c", n, &chain.p_c.lo, Some(&chain.p_c.hi), None, verdict),
        Row::new("q_f", n, &chain.q_f.interval.lo, Some(&chain.q_f.interval.hi), Some(&costs[0]), verdict),
        Row::new("q", n, &chain.q.interval.lo, Some(&chain.q.interval.hi), Some(&costs[1]), verdict),
    ];
    let report = ThresholdsReport {
        n,
        minimal_sets: fam.minimal_sets().to_vec(),
        tol,
        chain: ChainSummary {
            ordered: chain.ordered,
            widths_ok: chain.widths_ok,
            holds: chain.holds(),
            mu: chain.terms.mu.clone(),
            weighted_mu: chain.terms.weighted_mu.clone(),
            lambda_cost: chain.terms.lambda_cost.clone(),
        },
        p_c: chain.p_c,
        q_f: chain.q_f.interval,
        q: chain.q.interval,
        certificates,
        verdict,
    };
    Outcome::new(&report, rows, verdict)
}

#[derive(Serialize)]
struct SingletonReport {
    n: usize,
    #[serde(with = "rational::serde_rational")]
    p: Rational,
    #[serde(rename = "J", with = "rational::serde_rational")]
    j: Rational,
    /// `J zeta(V) p`.
    #[serde(with = "rational::serde_rational")]
    threshold: Rational,
    cover: SingletonCover,
    within_bound: bool,
    verification: Option<CoverageReport>,
    verdict: bool,
}

pub fn cover_singleton(ctx: &Context, args: SingletonArgs) -> Result<Outcome, Failure> {
    let inst = match (&args.graph, &args.zeta) {
        (Some(g), _) => SingletonInstance::from_graph(&read_graph(g)?, args.p, args.j)?,
        (None, Some(z)) => SingletonInstance::new(read_zeta(z)?, args.p, args.j)?,
        (None, None) => return Err(Failure::usage("one of --graph or --zeta is required".into())),
    };
    let cover = build_singleton_cover(&inst);
    let verification = if args.verify {
        log::info!("cover-singleton: sweeping 2^{} subsets", inst.n());
        Some(cover.cover.verify_coverage(inst.n(), inst.target_predicate(), &sweeper(ctx))?)
    } else {
        None
    };
    let within_bound = cover.within_bound();
    let verdict = within_bound && verification.is_none_or(|v| v.verified);
    let row = Row::new("singleton", inst.n(), inst.p().value(), Some(&cover.bound), Some(cover.cost.best()), verdict);
    let report = SingletonReport {
        n: inst.n(),
        p: inst.p().value().clone(),
        j: inst.j().clone(),
        threshold: inst.threshold(),
        cover,
        within_bound,
        verification,
        verdict,
    };
    Outcome::new(&report, vec![row], verdict)
}

#[derive(Serialize)]
struct GraphReport {
    n: usize,
    edges: usize,
    #[serde(with = "rational::serde_rational")]
    p: Rational,
    #[serde(rename = "J", with = "rational::serde_rational")]
    j: Rational,
    #[serde(rename = "T", with = "rational::serde_rational")]
    t: Rational,
    #[serde(with = "rational::serde_rational")]
    mu: Rational,
    conditions: Tr2Conditions,
    reduction: Reduction,
    /// Per-vertex leaf minimum `ceil(J d_v p / 4)` of a good star.
    good_thresholds: Vec<u64>,
    schedule: Option<Schedule>,
    cost_chain: Option<CostChain>,
    failed_links: Vec<String>,
    cover_cost: CostReport,
    verification: Option<Tr2Verification>,
    verdict: bool,
}

pub fn cover_graph(ctx: &Context, args: GraphArgs) -> Result<Outcome, Failure> {
    let g = read_graph(&args.graph)?;
    let p = args.p;
    let mu = match args.mu {
        Some(mu) => mu,
        None => rational::from_u64(g.edge_count() as u64) * p.value() * p.value(),
    };
    let inst = Tr2Instance::new(Arc::new(g), p.clone(), args.j, mu, args.t)?;
    let chain = inst.cost_chain();
    let verification = if args.verify {
        log::info!("cover-graph: sweeping 2^{} subsets", inst.graph().n());
        Some(inst.verify(&sweeper(ctx))?)
    } else {
        None
    };
    let cover_cost = inst.cover().cost(&p);
    let verdict = chain.as_ref().is_none_or(|c| c.holds()) && verification.as_ref().is_none_or(|v| v.passed());
    let g = inst.graph();
    let row = Row::new("star-forest", g.n(), p.value(), chain.as_ref().map(|c| &c.total_bound), Some(cover_cost.best()), verdict);
    let report = GraphReport {
        n: g.n(),
        edges: g.edge_count(),
        p: p.value().clone(),
        j: inst.j().clone(),
        t: inst.t().clone(),
        mu: inst.mu().clone(),
        conditions: inst.conditions(),
        reduction: inst.reduction(),
        good_thresholds: inst.thresholds().to_vec(),
        schedule: inst.schedule(),
        failed_links: chain.as_ref().map(|c| c.failed_links().into_iter().map(String::from).collect()).unwrap_or_default(),
        cost_chain: chain,
        cover_cost,
        verification,
        verdict,
    };
    Outcome::new(&report, vec![row], verdict)
}

#[derive(Serialize)]
struct WeightedReport {
    #[serde(flatten)]
    pipeline: PipelineReport,
    /// Cost caps are asserted under the theorem guard only.
    caps_asserted: bool,
    caps_ok: bool,
    verification: Option<PipelineVerification>,
    verdict: bool,
}

pub fn cover_weighted(ctx: &Context, args: WeightedArgs) -> Result<Outcome, Failure> {
    let g = read_graph(&args.graph)?;
    let mode = if args.reduced_guard { GuardMode::Reduced } else { GuardMode::Theorem };
    let inst = PipelineInstance::new(g, args.p, args.r, mode)?;
    let wc = build_weighted_cover(&inst)?;
    let verification = match args.verify {
        None => None,
        Some(VerifyMode::Exhaustive) => Some(wc.verify(&sweeper(ctx))?),
        Some(VerifyMode::Sampled { samples, seed }) => Some(wc.audit(samples, seed)),
    };
    let caps_asserted = mode == GuardMode::Theorem;
    let caps_ok = wc.cost_caps_ok();
    let structure_ok = if caps_asserted { caps_ok } else { wc.column_halving };
    let verdict = structure_ok && verification.as_ref().is_none_or(|v| v.passed());
    let pipeline = wc.report();
    let s = &pipeline.subtotals;
    let caps = [&s.singleton.cap, &s.edges.cap, &s.star_forest.subtotal.cap];
    let bound = caps.iter().try_fold(Rational::from_integer(0.into()), |acc, c| c.as_ref().map(|c| acc + c));
    let row = Row::new("weighted", pipeline.n, &pipeline.p, bound.as_ref(), Some(&pipeline.total_cost), verdict);
    let report = WeightedReport { pipeline, caps_asserted, caps_ok, verification, verdict };
    Outcome::new(&report, vec![row], verdict)
}

#[derive(Serialize)]
struct Trial {
    trial: u64,
    n: usize,
    minimal_sets: Vec<Subset>,
    p_c: Option<Interval>,
    q_f: Option<Interval>,
    q: Option<Interval>,
    holds: bool,
    error: Option<String>,
}

#[derive(Serialize)]
struct ChainReport {
    max_n: usize,
    trials: u64,
    seed: u64,
    #[serde(with = "rational::serde_rational")]
    tol: Rational,
    failures: u64,
    results: Vec<Trial>,
    verdict: bool,
}

fn chain_trial(seed: u64, i: u64, max_n: usize, tol: &Rational) -> Trial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    let fam = random_family(&mut rng, max_n);
    let mut t = Trial {
        trial: i,
        n: fam.n(),
        minimal_sets: fam.minimal_sets().to_vec(),
        p_c: None,
        q_f: None,
        q: None,
        holds: false,
        error: None,
    };
    match threshold_chain(&fam, tol) {
        Ok(c) => {
            t.holds = c.holds();
            t.p_c = Some(c.p_c);
            t.q_f = Some(c.q_f.interval);
            t.q = Some(c.q.interval);
        }
        Err(e) => t.error = Some(e.to_string()),
    }
    t
}

pub fn verify_chain(ctx: &Context, args: ChainArgs) -> Result<Outcome, Failure> {
    if args.n == 0 || args.n > 12 {
        return Err(Error::Guard("verify-chain needs 1 <= n <= 12".into()).into());
    }
    let tol = args.tol.unwrap_or_else(solvers::default_tolerance);
    log::info!("verify-chain: {} trials, n <= {}, seed {}", args.trials, args.n, ctx.seed);
    let results: Vec<Trial> =
        sweeper(ctx).install(|| (0..args.trials).into_par_iter().map(|i| chain_trial(ctx.seed, i, args.n, &tol)).collect());
    let failures = results.iter().filter(|t| !t.holds).count() as u64;
    let rows = results
        .iter()
        .map(|t| match (&t.q_f, &t.p_c, &t.q) {
            (Some(qf), Some(pc), Some(q)) => Row::new(format!("trial-{}", t.trial), t.n, &qf.lo, Some(&pc.hi), Some(&q.lo), t.holds),
            _ => Row {
                id: format!("trial-{}", t.trial),
                n: t.n,
                p: String::new(),
                bound: String::new(),
                exact: String::new(),
                verdict: "fail",
            },
        })
        .collect();
    let report = ChainReport { max_n: args.n, trials: args.trials, seed: ctx.seed, tol, failures, results, verdict: failures == 0 };
    Outcome::new(&report, rows, failures == 0)
}

#[derive(Serialize)]
struct NecessityEntry {
    name: String,
    #[serde(flatten)]
    report: NecessityReport,
}

#[derive(Serialize)]
struct FixturesReport {
    fixtures: Vec<Fixture>,
    files: Vec<String>,
    necessity: Option<Vec<NecessityEntry>>,
    verdict: bool,
}

fn file_name(fixture: &str) -> String {
    format!("{}.json", fixture.replace('/', "__"))
}

pub fn fixtures(_ctx: &Context, args: FixturesArgs) -> Result<Outcome, Failure> {
    let fixtures = all_fixtures();
    let mut files = Vec::new();
    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir)?;
        for f in &fixtures {
            let path: PathBuf = dir.join(file_name(&f.name));
            let mut text = serde_json::to_string_pretty(f).map_err(Error::from)?;
            text.push('\n');
            fs::write(&path, text)?;
            files.push(path.display().to_string());
        }
    }
    let mut rows = Vec::new();
    let necessity = if args.evaluate {
        let mut out = Vec::new();
        for (name, f) in necessity_fixtures() {
            log::info!("fixtures: evaluating {name}");
            let report = f.evaluate(StarUnionTarget::AtLeastT)?;
            rows.push(Row::new(
                name.clone(),
                report.n,
                &report.p,
                Some(&report.one_over_k),
                Some(&report.min_cover_cost),
                report.at_least_one_over_k,
            ));
            out.push(NecessityEntry { name, report });
        }
        Some(out)
    } else {
        None
    };
    let verdict = necessity.as_ref().is_none_or(|v| v.iter().all(|e| e.report.at_least_one_over_k));
    let report = FixturesReport { fixtures, files, necessity, verdict };
    Outcome::new(&report, rows, verdict)
}

#[derive(Serialize)]
struct CheckReport {
    certificate: String,
    kind: &'static str,
    n: Option<usize>,
    #[serde(with = "rational::serde_rational")]
    p: Rational,
    #[serde(flatten)]
    replay: ReplayReport,
}

pub fn check(_ctx: &Context, args: CheckArgs) -> Result<Outcome, Failure> {
    let family = args.family.as_deref().map(read_family).transpose()?;
    let doc = CertificateDocument::read(&args.certificate)?;
    let replayed = replay(&args.certificate, family.as_ref())?;
    let n = family.as_ref().or(doc.family.as_ref()).map(|f| f.n());
    let p = doc.certificate.p().value().clone();
    let kind = match doc.certificate {
        solvers::Certificate::Fractional(_) => "fractional",
        solvers::Certificate::Integral(_) => "integral",
    };
    let verdict = replayed.verified;
    let row = Row::new("certificate", n.unwrap_or(0), &p, Some(&rational::rat(1, 2)), replayed.cost.as_ref(), verdict);
    let report = CheckReport { certificate: args.certificate.display().to_string(), kind, n, p, replay: replayed };
    Outcome::new(&report, vec![row], verdict)
}
