//! `mdsc`: density-evolution, window-optimization and finite-length
//! experiments for multi-dimensional spatially-coupled LDPC ensembles.

mod output;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use mdsc_core::de::{bp_threshold, Bracket, DeCaps, DEFAULT_DELTA};
use mdsc_core::ensemble::{design_rate_exact, fully_coupled_equivalent, p_stop_exact, EnsembleParams};
use mdsc_core::exact::to_f64;
use mdsc_core::optimizer::{optimize, OptimizeOptions, SearchSpace};
use mdsc_core::reference::{self, ReferenceRow};
use mdsc_core::sim::{self, Perspective};
use mdsc_core::window::{
    decode_chain, wc_threshold, worst_case_threshold, DecodeSchedule, ProcessingOrder, WindowOptions, WindowSpec,
    DEFAULT_MAX_WINDOW_ITERS,
};
use mdsc_core::{with_workers, Error};

use output::{csv_string, dp4, emit, sig6, Artifact, RunManifest};
use sweep::Sweep;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or input files: exit 2.
    Usage(String),
    /// Failure inside an analysis routine: exit 1.
    Compute(Error),
    /// Ran fine but a regression check failed: exit 1.
    Check(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Compute(e)
    }
}

#[derive(Parser, Debug)]
#[command(name = "mdsc", version, about = "MD-SC-LDPC ensemble analysis on the BEC")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Design rate (exact and floating).
    Rate(ParamsArgs),
    /// Full-code BP threshold.
    BpThreshold(BpArgs),
    /// Size-2 stopping-set probability over a range of section sizes.
    Pstop(PstopArgs),
    /// Worst-case window threshold for one window vector.
    WorstThreshold(WorstArgs),
    /// Windowed-decoder threshold over the whole chain.
    WcThreshold(WcArgs),
    /// Search window vectors with a fixed complexity.
    Optimize(OptimizeArgs),
    /// Per-window iteration counts of one chain decode.
    Profile(ProfileArgs),
    /// Monte Carlo experiments on sampled graphs.
    Mc(McArgs),
    /// Sample one graph and export its edge list.
    Graph(GraphArgs),
    /// Recompute the reference window table and compare.
    Table1(Table1Args),
}

#[derive(Args, Debug, Serialize)]
struct ParamsArgs {
    /// Ensemble parameters as JSON (`dl, dr, L1, gamma1, L2, gamma2, T`, optional `M`).
    #[arg(long)]
    params: PathBuf,
    /// Output directory; without it the JSON result goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct ThresholdArgs {
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = 1e-5)]
    resolution: f64,
}

#[derive(Args, Debug, Serialize)]
struct BpArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: ParamsArgs,
    #[command(flatten)]
    #[serde(flatten)]
    threshold: ThresholdArgs,
}

#[derive(Args, Debug, Serialize)]
struct PstopArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: ParamsArgs,
    /// Section sizes, `start:stop:step` or `start:stop:xK`; defaults to the params' `M`.
    #[arg(long)]
    m_range: Option<Sweep>,
}

#[derive(Args, Debug, Serialize)]
struct WorstArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: ParamsArgs,
    /// Window sizes relative to the targeted segment, e.g. `5,5,4,2,3,4,5`.
    #[arg(long)]
    #[serde(serialize_with = "as_display")]
    window: WindowSpec,
    #[command(flatten)]
    #[serde(flatten)]
    threshold: ThresholdArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum OrderArg {
    Natural,
    Reverse,
    Random,
}

#[derive(Args, Debug, Serialize)]
struct OrderArgs {
    #[arg(long, value_enum, default_value_t = OrderArg::Natural)]
    order: OrderArg,
    /// Seed for `--order random`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_MAX_WINDOW_ITERS)]
    max_window_iters: usize,
}

impl OrderArgs {
    fn order(&self) -> Result<ProcessingOrder, CliError> {
        match (self.order, self.seed) {
            (OrderArg::Natural, _) => Ok(ProcessingOrder::Natural),
            (OrderArg::Reverse, _) => Ok(ProcessingOrder::Reverse),
            (OrderArg::Random, Some(seed)) => Ok(ProcessingOrder::Random { seed }),
            (OrderArg::Random, None) => Err(CliError::Usage("--order random requires --seed".into())),
        }
    }

    fn options(&self) -> WindowOptions {
        WindowOptions { max_window_iters: self.max_window_iters, ..WindowOptions::default() }
    }
}

#[derive(Args, Debug, Serialize)]
struct WcArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: ParamsArgs,
    #[arg(long)]
    #[serde(serialize_with = "as_display")]
    window: WindowSpec,
    #[command(flatten)]
    #[serde(flatten)]
    order: OrderArgs,
    #[command(flatten)]
    #[serde(flatten)]
    threshold: ThresholdArgs,
}

#[derive(Args, Debug, Serialize)]
struct OptimizeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: ParamsArgs,
    /// Window complexity `s(W)`.
    #[arg(long)]
    complexity: usize,
    #[arg(long, default_value_t = 0)]
    min: usize,
    /// Upper bound per entry; defaults to the complexity.
    #[arg(long)]
    max: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    threshold: ThresholdArgs,
    #[arg(long, default_value_t = 1e-3)]
    coarse_resolution: f64,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
struct ProfileArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: ParamsArgs,
    #[arg(long)]
    #[serde(serialize_with = "as_display")]
    window: WindowSpec,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[command(flatten)]
    #[serde(flatten)]
    order: OrderArgs,
}

#[derive(Args, Debug, Serialize)]
struct McArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: ParamsArgs,
    #[command(subcommand)]
    kind: McKind,
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum PerspectiveArg {
    Variable,
    Check,
}

impl From<PerspectiveArg> for Perspective {
    fn from(p: PerspectiveArg) -> Self {
        match p {
            PerspectiveArg::Variable => Perspective::Variable,
            PerspectiveArg::Check => Perspective::Check,
        }
    }
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum McKind {
    /// Frequency of identical neighbourhoods for two VNs of one section.
    Pstop {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Purged CNs per position and empirical rate.
    Purged {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 10_000)]
        graphs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = PerspectiveArg::Check)]
        perspective: PerspectiveArg,
    },
    /// Peeling failure rate on one sampled graph.
    Peel {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug, Serialize)]
struct GraphArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: ParamsArgs,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = PerspectiveArg::Variable)]
    perspective: PerspectiveArg,
}

#[derive(Args, Debug, Serialize)]
struct Table1Args {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = reference::RESOLUTION)]
    resolution: f64,
    /// Also rerun the window search for every row (slow).
    #[arg(long)]
    search: bool,
    #[arg(long)]
    workers: Option<usize>,
}

fn as_display<T: std::fmt::Display, Ser: serde::Serializer>(v: &T, s: Ser) -> Result<Ser::Ok, Ser::Error> {
    s.collect_str(v)
}

fn load_params(path: &PathBuf) -> Result<EnsembleParams, CliError> {
    EnsembleParams::from_json_file(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn check_threshold_args(t: &ThresholdArgs) -> Result<(), CliError> {
    if !(t.delta > 0.0 && t.delta < 1.0) {
        return Err(CliError::Usage(format!("--delta {} must lie in (0, 1)", t.delta)));
    }
    if !(t.resolution > 0.0 && t.resolution < 1.0) {
        return Err(CliError::Usage(format!("--resolution {} must lie in (0, 1)", t.resolution)));
    }
    Ok(())
}

fn bracket_json(b: &Bracket<f64>) -> Value {
    let mid = b.midpoint();
    json!({
        "threshold": sig6(mid),
        "threshold_4dp": dp4(mid),
        "lower": sig6(b.lower),
        "upper": sig6(b.upper),
        "probes": b.probes,
    })
}

fn cmd_rate(a: &ParamsArgs, m: &mut RunManifest) -> Result<Artifact, CliError> {
    let p = load_params(&a.params)?;
    m.params = Some(p.to_json_value());
    let r = design_rate_exact(&p);
    Ok(Artifact::json(json!({
        "params": p.to_json_value(),
        "design_rate": sig6(to_f64(&r)),
        "design_rate_exact": r.to_string(),
    })))
}

fn cmd_bp(a: &BpArgs, m: &mut RunManifest) -> Result<Artifact, CliError> {
    check_threshold_args(&a.threshold)?;
    let p = load_params(&a.common.params)?;
    m.params = Some(p.to_json_value());
    let b = bp_threshold(&p, a.threshold.delta, a.threshold.resolution, DeCaps::default());
    let mut v = bracket_json(&b);
    v["params"] = p.to_json_value();
    v["delta"] = json!(a.threshold.delta);
    v["resolution"] = json!(a.threshold.resolution);
    Ok(Artifact::json(v))
}

#[derive(Debug, Serialize)]
struct PstopRow {
    #[serde(rename = "M")]
    m: usize,
    p_stop: f64,
    p_stop_exact: String,
    fc_section_size: usize,
    fc_1d: f64,
    fc_balanced_t: f64,
    fc_balanced: f64,
    fc_caption_t: f64,
    fc_caption: Option<f64>,
}

fn pstop_row(p: &EnsembleParams, m: usize) -> Result<PstopRow, Error> {
    let exact = p_stop_exact(p, m)?;
    let fc = fully_coupled_equivalent(p, m);
    let fc_1d = to_f64(&p_stop_exact(&fc.one_dimensional, fc.section_size)?);
    let full = |t: f64| -> Result<f64, Error> {
        let q = p.with_md_coupling(p.l2(), fc.md_gamma2, t)?;
        Ok(sig6(to_f64(&p_stop_exact(&q, m)?)))
    };
    Ok(PstopRow {
        m,
        p_stop: sig6(to_f64(&exact)),
        p_stop_exact: exact.to_string(),
        fc_section_size: fc.section_size,
        fc_1d: sig6(fc_1d),
        fc_balanced_t: sig6(fc.density_balanced),
        fc_balanced: full(fc.density_balanced)?,
        fc_caption_t: sig6(fc.density_caption),
        fc_caption: if fc.caption_in_range { Some(full(fc.density_caption)?) } else { None },
    })
}

fn cmd_pstop(a: &PstopArgs, m: &mut RunManifest) -> Result<Artifact, CliError> {
    let p = load_params(&a.common.params)?;
    m.params = Some(p.to_json_value());
    let sizes = match (&a.m_range, p.section_size()) {
        (Some(r), _) => r.values(),
        (None, Some(m)) => vec![m],
        (None, None) => return Err(CliError::Usage("give --m-range or an `M` entry in the params".into())),
    };
    let rows: Vec<PstopRow> = sizes.iter().map(|&m| pstop_row(&p, m)).collect::<Result<_, _>>()?;
    let csv = csv_string(|buf| {
        let mut w = csv::Writer::from_writer(buf);
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    })?;
    Ok(Artifact::json(json!({ "params": p.to_json_value(), "rows": rows })).with_csv(csv))
}

fn cmd_worst(a: &WorstArgs, m: &mut RunManifest) -> Result<Artifact, CliError> {
    check_threshold_args(&a.threshold)?;
    let p = load_params(&a.common.params)?;
    m.params = Some(p.to_json_value());
    let b = worst_case_threshold(&a.window, &p, a.threshold.delta, a.threshold.resolution, DeCaps::default())?;
    let mut v = bracket_json(&b);
    v["W"] = json!(a.window);
    v["complexity"] = json!(a.window.complexity());
    v["params"] = p.to_json_value();
    Ok(Artifact::json(v))
}

fn cmd_wc(a: &WcArgs, m: &mut RunManifest) -> Result<Artifact, CliError> {
    check_threshold_args(&a.threshold)?;
    let p = load_params(&a.common.params)?;
    m.params = Some(p.to_json_value());
    let order = a.order.order()?;
    m.seeds.extend(order.seed());
    let schedule = DecodeSchedule::new(&p, order)?;
    let b = wc_threshold(&a.window, &p, &schedule, a.threshold.delta, a.threshold.resolution, a.order.options())?;
    let mut v = bracket_json(&b);
    v["W"] = json!(a.window);
    v["order"] = json!(schedule.order.name());
    v["permutation"] = json!(schedule.permutation);
    v["params"] = p.to_json_value();
    Ok(Artifact::json(v))
}

fn cmd_optimize(a: &OptimizeArgs, m: &mut RunManifest) -> Result<Artifact, CliError> {
    check_threshold_args(&a.threshold)?;
    let p = load_params(&a.common.params)?;
    m.params = Some(p.to_json_value());
    let space = SearchSpace::new(p.l2(), a.complexity, a.min, a.max.unwrap_or(a.complexity));
    let opts = OptimizeOptions { coarse_resolution: a.coarse_resolution, workers: a.workers, ..OptimizeOptions::default() };
    let report = optimize(space, &p, a.threshold.delta, a.threshold.resolution, opts)?;
    let csv = csv_string(|buf| report.write_leaderboard(buf))?;
    Ok(Artifact::json(json!({
        "params": p.to_json_value(),
        "space": report.space,
        "best": report.best,
        "best_threshold": sig6(report.best_threshold),
        "best_threshold_4dp": dp4(report.best_threshold),
        "ties": report.ties,
        "candidates": report.all.len(),
        "refined": report.refined,
    }))
    .with_csv(csv))
}

fn cmd_profile(a: &ProfileArgs, m: &mut RunManifest) -> Result<Artifact, CliError> {
    let p = load_params(&a.common.params)?;
    m.params = Some(p.to_json_value());
    if !(0.0..=1.0).contains(&a.epsilon) {
        return Err(CliError::Usage(format!("--epsilon {} outside [0, 1]", a.epsilon)));
    }
    let order = a.order.order()?;
    m.seeds.extend(order.seed());
    let schedule = DecodeSchedule::new(&p, order)?;
    let profile = decode_chain(&p, &a.window, &schedule, a.epsilon, a.delta, a.order.options())?;
    let csv = csv_string(|buf| profile.write_csv(buf))?;
    let mut v = profile.header_json();
    v["average"] = json!(sig6(profile.average()));
    v["params"] = p.to_json_value();
    Ok(Artifact::json(v).with_csv(csv))
}

fn cmd_mc(a: &McArgs, m: &mut RunManifest) -> Result<Artifact, CliError> {
    let p = load_params(&a.common.params)?;
    m.params = Some(p.to_json_value());
    match a.kind {
        McKind::Pstop { m: size, trials, seed } => {
            m.seeds.push(seed);
            let est = with_workers(a.workers, || sim::mc_pstop(&p, size, trials, seed))??;
            let mut v = serde_json::to_value(&est).expect("estimate serializes");
            v["socket_model"] = json!(sig6(to_f64(&p_stop_exact(&p, size)?)));
            v["cn_uniform"] = match sim::cn_uniform_pstop(&p, size)? {
                Some(r) => json!(sig6(to_f64(&r))),
                None => Value::Null,
            };
            Ok(Artifact::json(v))
        }
        McKind::Purged { m: size, graphs, seed, perspective } => {
            m.seeds.push(seed);
            let stats = with_workers(a.workers, || sim::mc_purged(&p, size, graphs, seed, perspective.into()))??;
            let expected: Vec<f64> =
                (0..stats.mean.len()).map(|i| sim::expected_purged(&p, size, i)).collect::<Result<_, _>>()?;
            let mut v = serde_json::to_value(&stats).expect("stats serialize");
            v["expected"] = json!(expected);
            v["design_rate"] = json!(sig6(to_f64(&design_rate_exact(&p))));
            v["params"] = p.to_json_value();
            v["M"] = json!(size);
            Ok(Artifact::json(v))
        }
        McKind::Peel { m: size, epsilon, trials, seed } => {
            if !(0.0..=1.0).contains(&epsilon) {
                return Err(CliError::Usage(format!("--epsilon {epsilon} outside [0, 1]")));
            }
            m.seeds.push(seed);
            let g = sim::sample_graph(&p, size, seed)?;
            let mut failures = 0u64;
            for t in 0..trials {
                let e = sim::ErasurePattern::sample(&g, epsilon, seed.wrapping_add(t + 1));
                let rest = sim::peel(&g, &e);
                if !rest.is_empty() {
                    if !sim::is_stopping_set(&g, &rest) {
                        return Err(CliError::Check(format!("trial {t}: peeling residual is not a stopping set")));
                    }
                    failures += 1;
                }
            }
            Ok(Artifact::json(json!({
                "params": p.to_json_value(),
                "M": size,
                "epsilon": epsilon,
                "trials": trials,
                "seed": seed,
                "failures": failures,
                "failure_rate": sig6(failures as f64 / trials.max(1) as f64),
            })))
        }
    }
}

fn cmd_graph(a: &GraphArgs, m: &mut RunManifest) -> Result<Artifact, CliError> {
    let p = load_params(&a.common.params)?;
    m.params = Some(p.to_json_value());
    m.seeds.push(a.seed);
    let g = sim::sample_graph_with(&p, a.m, a.seed, a.perspective.into())?;
    let mut buf = Vec::new();
    g.write_edge_list(&mut buf)?;
    let purged = (0..g.num_cns()).filter(|&c| g.is_purged(c)).count();
    Ok(Artifact::json(json!({
        "params": p.to_json_value(),
        "M": a.m,
        "seed": a.seed,
        "vns": g.num_vns(),
        "cns": g.num_cns(),
        "purged": purged,
        "edges": g.num_vns() * p.dl(),
    }))
    .with_attachment("edges", String::from_utf8(buf).expect("edge list is ascii")))
}

#[derive(Debug, Serialize)]
struct Table1Row {
    #[serde(rename = "L2")]
    l2: usize,
    gamma2: usize,
    #[serde(rename = "T")]
    t: f64,
    complexity: usize,
    #[serde(rename = "W")]
    window: WindowSpec,
    worst: f64,
    wc: f64,
    reference: f64,
    worst_ok: bool,
    wc_ok: bool,
    gap_ok: bool,
    searched_best: Option<WindowSpec>,
    search_ok: Option<bool>,
}

fn table1_row(row: &ReferenceRow, a: &Table1Args) -> Result<Table1Row, Error> {
    let p = row.params()?;
    let spec = row.spec()?;
    let caps = DeCaps::default();
    let worst = worst_case_threshold(&spec, &p, reference::DELTA, a.resolution, caps)?.midpoint();
    let schedule = DecodeSchedule::natural(&p);
    let wc = wc_threshold(&spec, &p, &schedule, reference::DELTA, a.resolution, WindowOptions::default())?.midpoint();
    let searched_best = if a.search {
        let space = SearchSpace::new(row.l2, row.complexity, row.w_min, row.w_max);
        let opts = OptimizeOptions { workers: a.workers, ..OptimizeOptions::default() };
        Some(optimize(space, &p, reference::DELTA, a.resolution, opts)?.best)
    } else {
        None
    };
    let within = |v: f64| (v - row.worst).abs() <= reference::TOLERANCE;
    Ok(Table1Row {
        l2: row.l2,
        gamma2: row.gamma2,
        t: row.t,
        complexity: row.complexity,
        search_ok: searched_best.as_ref().map(|b| *b == spec),
        window: spec,
        worst: sig6(worst),
        wc: sig6(wc),
        reference: row.worst,
        worst_ok: within(worst),
        wc_ok: within(wc),
        gap_ok: (wc - worst).abs() <= reference::WC_GAP,
        searched_best,
    })
}

fn cmd_table1(a: &Table1Args, _m: &mut RunManifest) -> Result<(Artifact, bool), CliError> {
    let rows: Vec<Table1Row> = reference::ROWS.iter().map(|r| table1_row(r, a)).collect::<Result<_, _>>()?;
    let mut text = format!(
        "{:>3} {:>6} {:>5} {:>3}  {:<22} {:>8} {:>8} {:>8}  {}\n",
        "L2", "gamma2", "T", "C", "W", "worst", "WC", "ref", "status"
    );
    let mut all_ok = true;
    for r in &rows {
        let ok = r.worst_ok && r.wc_ok && r.gap_ok && r.search_ok.unwrap_or(true);
        all_ok &= ok;
        text += &format!(
            "{:>3} {:>6} {:>5} {:>3}  {:<22} {:>8} {:>8} {:>8}  {}\n",
            r.l2,
            r.gamma2,
            r.t,
            r.complexity,
            format!("({})", r.window),
            dp4(r.worst),
            dp4(r.wc),
            dp4(r.reference),
            if ok { "PASS" } else { "FAIL" }
        );
    }
    let v = json!({
        "delta": reference::DELTA,
        "resolution": a.resolution,
        "tolerance": reference::TOLERANCE,
        "wc_gap": reference::WC_GAP,
        "rows": rows,
        "pass": all_ok,
    });
    Ok((Artifact::json(v).with_summary(text), all_ok))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let start = Instant::now();
    macro_rules! simple {
        ($name:literal, $args:expr, $f:ident) => {{
            let mut m = RunManifest::new($name, $args);
            let art = $f($args, &mut m)?;
            emit($args.common_out(), m, start.elapsed(), art)
        }};
    }
    match &cli.command {
        Command::Rate(a) => simple!("rate", a, cmd_rate),
        Command::BpThreshold(a) => simple!("bp-threshold", a, cmd_bp),
        Command::Pstop(a) => simple!("pstop", a, cmd_pstop),
        Command::WorstThreshold(a) => simple!("worst-threshold", a, cmd_worst),
        Command::WcThreshold(a) => simple!("wc-threshold", a, cmd_wc),
        Command::Optimize(a) => simple!("optimize", a, cmd_optimize),
        Command::Profile(a) => simple!("profile", a, cmd_profile),
        Command::Mc(a) => simple!("mc", a, cmd_mc),
        Command::Graph(a) => simple!("graph", a, cmd_graph),
        Command::Table1(a) => {
            let mut m = RunManifest::new("table1", a);
            let (art, ok) = with_workers(a.workers, || cmd_table1(a, &mut m))??;
            emit(a.out.as_ref(), m, start.elapsed(), art)?;
            if ok {
                Ok(())
            } else {
                Err(CliError::Check("reference table mismatch".into()))
            }
        }
    }
}

trait CommonOut {
    fn common_out(&self) -> Option<&PathBuf>;
}

macro_rules! common_out {
    ($($t:ty),*) => {$(
        impl CommonOut for $t {
            fn common_out(&self) -> Option<&PathBuf> {
                self.common.out.as_ref()
            }
        }
    )*};
}

common_out!(BpArgs, PstopArgs, WorstArgs, WcArgs, OptimizeArgs, ProfileArgs, McArgs, GraphArgs);

impl CommonOut for ParamsArgs {
    fn common_out(&self) -> Option<&PathBuf> {
        self.out.as_ref()
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on malformed command lines
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Compute(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(CliError::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
    }
}
