use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;

use lcmst::assembler::{run_main, Params};
use lcmst::audit::{audit_hierarchy, audit_pieces, audit_restriction, audit_separator, Audit};
use lcmst::embedding::embed_planar;
use lcmst::generate::{generate, Family, GenConfig, HPolicy};
use lcmst::oracle::{exact_dst, exact_gst, exact_lcmst, exact_lcst, tree_distances, ExactResult};
use lcmst::reductions::{dst_to_lcst, gst_to_lcmst, lcmst_to_dst, lcst_to_lcmst, normalize_groups, ReductionBundle};
use lcmst::report::{write_csv, Report};
use lcmst::shortcuts::{beta_for, run_lp_variant_with_beta, BudgetProvider};
use lcmst::{Instance, ProblemKind, INF};

#[derive(Parser)]
#[command(name = "lcmst", version, about = "Length-constrained MST on planar graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a seeded planar instance.
    Gen {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one or more algorithms and write a report.
    Solve(SolveArgs),
    /// Transform an instance into another problem.
    Reduce {
        input: PathBuf,
        #[arg(long)]
        from: ProblemKind,
        #[arg(long)]
        to: ProblemKind,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sidecar JSON with vertex and edge correspondence tables.
        #[arg(long)]
        mapping: Option<PathBuf>,
        /// Split vertices shared by several groups before reducing.
        #[arg(long)]
        normalize_groups: bool,
    },
    /// Solve exactly by brute force (tiny instances only).
    SolveExact {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-verify separator, hierarchy and piece bounds on an instance.
    Audit {
        input: PathBuf,
        #[arg(long, default_value = "2")]
        alpha: String,
        #[arg(long, default_value = "2")]
        beta: String,
        /// Also check the restriction bound against the exact optimum.
        #[arg(long)]
        oracle: bool,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "triangulated-random")]
    family: FamilyArg,
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    rows: usize,
    #[arg(long, default_value_t = 4)]
    cols: usize,
    #[arg(long, default_value_t = 2)]
    groups: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Inclusive range `lo:hi`.
    #[arg(long, default_value = "1:5")]
    lengths: String,
    #[arg(long, default_value = "1:10")]
    weights: String,
    #[arg(long)]
    adversarial: bool,
    #[arg(long, default_value_t = 1.0)]
    density: f64,
    /// h as a multiple of the root's length eccentricity.
    #[arg(long, default_value = "6/5")]
    h_slack: String,
    #[arg(long)]
    h: Option<u64>,
    #[arg(long)]
    infeasible: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Grid,
    TriangulatedRandom,
    StackedTriangulation,
    GadgetFig1Analog,
    GstGadget,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Main,
    LpShortcuts,
    Exact,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, ValueEnum)]
enum AuditLevel {
    None,
    Basic,
    Full,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file; when absent one is generated from the generator flags.
    input: Option<PathBuf>,
    #[command(flatten)]
    gen: GenArgs,
    #[arg(long, value_enum, default_value = "main")]
    algo: Algo,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    /// Derive α, β, δ (main) and β (LP variant) from ε.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Budget provider for the LP variant: exact-opt, diameter or a number.
    #[arg(long, default_value = "exact-opt")]
    provider: String,
    #[arg(long, value_enum, default_value = "basic")]
    audit: AuditLevel,
    /// Report JSON path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    guess_cap: Option<u64>,
}

fn parse_ratio(s: &str) -> Result<Ratio<u64>> {
    let r = match s.split_once('/') {
        Some((a, b)) => Ratio::new(a.trim().parse()?, b.trim().parse()?),
        None if s.contains('.') => {
            let x: f64 = s.parse()?;
            Ratio::new((x * 1000.0).round() as u64, 1000)
        }
        None => Ratio::from_integer(s.trim().parse()?),
    };
    if *r.numer() == 0 {
        bail!("'{s}' must be positive");
    }
    Ok(r)
}

fn parse_range(s: &str) -> Result<(u64, u64)> {
    let (a, b) = s.split_once(':').context("range must be lo:hi")?;
    let (a, b) = (a.parse()?, b.parse()?);
    if a > b {
        bail!("empty range {s}");
    }
    Ok((a, b))
}

fn gen_instance(a: &GenArgs) -> Result<Instance> {
    let family = match a.family {
        FamilyArg::Grid => Family::Grid { rows: a.rows, cols: a.cols },
        FamilyArg::TriangulatedRandom => Family::TriangulatedRandom { n: a.n },
        FamilyArg::StackedTriangulation => Family::StackedTriangulation { n: a.n },
        FamilyArg::GadgetFig1Analog => Family::GadgetFig1Analog,
        FamilyArg::GstGadget => Family::GstGadget { n: a.n, groups: a.groups },
    };
    let mut cfg = GenConfig::new(family, a.seed);
    cfg.lengths = parse_range(&a.lengths)?;
    cfg.weights = parse_range(&a.weights)?;
    cfg.adversarial = a.adversarial;
    cfg.density = a.density;
    let slack = parse_ratio(&a.h_slack)?;
    cfg.h_policy = match (a.infeasible, a.h) {
        (true, _) => HPolicy::Infeasible,
        (false, Some(h)) => HPolicy::Fixed(h),
        _ => HPolicy::Slack { num: *slack.numer(), den: *slack.denom() },
    };
    Ok(generate(&cfg))
}

fn read_instance(p: &Path) -> Result<Instance> {
    let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    Instance::parse(&text).with_context(|| format!("parsing {}", p.display()))
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn exact(inst: &Instance) -> Result<ExactResult> {
    Ok(match inst.kind {
        ProblemKind::Lcmst => exact_lcmst(inst)?,
        ProblemKind::Lcst => exact_lcst(inst)?,
        ProblemKind::Dst => exact_dst(inst)?,
        ProblemKind::Gst => exact_gst(inst)?,
    })
}

fn is_spanning_tree(inst: &Instance, edges: &[usize]) -> bool {
    let d = tree_distances(&inst.graph(), edges, inst.root);
    edges.len() + 1 == inst.n && d.iter().all(|&x| x != INF)
}

fn full_audit(inst: &Instance, alpha: Ratio<u64>, beta: Ratio<u64>, opt: Option<&[usize]>) -> Result<Audit> {
    let g = inst.graph();
    let emb = embed_planar(inst)?;
    let mut a = audit_separator(&g, &emb, &vec![1; g.n], 2 * inst.h, inst.root)?;
    let (hier, ha) = audit_hierarchy(&g, &emb, alpha, inst.h, inst.root)?;
    a.merge(ha);
    a.merge(audit_pieces(&g, &hier, inst.h, beta));
    if let Some(t) = opt {
        a.merge(audit_restriction(&g, &hier, t));
    }
    Ok(a)
}

fn solve(args: SolveArgs) -> Result<ExitCode> {
    let (inst, id) = match &args.input {
        Some(p) => (read_instance(p)?, p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()),
        None => (gen_instance(&args.gen)?, format!("gen-{}", args.gen.seed)),
    };
    let mut params = match args.epsilon {
        Some(e) => Params::from_epsilon(inst.n, e),
        None => Params::new(Ratio::from_integer(2), Ratio::from_integer(2), Ratio::new(1, 2)),
    };
    if let Some(a) = &args.alpha {
        params.alpha = parse_ratio(a)?;
    }
    if let Some(b) = &args.beta {
        params.beta = parse_ratio(b)?;
    }
    if let Some(d) = &args.delta {
        params.delta = parse_ratio(d)?;
    }
    if let Some(c) = args.guess_cap {
        params.guess_cap = c;
    }
    let want = |a: Algo| args.algo == a || args.algo == Algo::All;
    let needs_opt = want(Algo::Exact) || (want(Algo::LpShortcuts) && args.provider == "exact-opt") || args.algo == Algo::All;
    let opt = if needs_opt {
        let t = Instant::now();
        let r = exact(&inst)?;
        Some((r, t.elapsed().as_secs_f64() * 1e3))
    } else {
        None
    };
    let opt_weight = opt.as_ref().and_then(|o| o.0.weight);
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    if want(Algo::Exact) {
        let (r, ms) = opt.as_ref().unwrap();
        let d = r.weight.map(|_| *tree_distances(&inst.graph(), &r.edges, inst.root).iter().filter(|&&x| x != INF).max().unwrap_or(&0));
        rows.push(Report::exact(&id, &inst, r, d, *ms));
    }
    if want(Algo::Main) {
        match run_main(&inst, &params) {
            Ok(sol) => {
                let row = Report::main(&id, &inst, &params, &sol).with_opt(opt_weight);
                if args.audit >= AuditLevel::Basic {
                    if row.length_bound_ok != Some(true) {
                        violations.push("main: length bound h(1 + 2·depth/β) violated".to_string());
                    }
                    if inst.kind == ProblemKind::Lcmst && !is_spanning_tree(&inst, &sol.edges) {
                        violations.push("main: output is not a spanning tree".to_string());
                    }
                }
                rows.push(row);
            }
            Err(e) => rows.push(Report::failed(&id, "main", &inst, e.to_string())),
        }
    }
    if want(Algo::LpShortcuts) {
        let provider = match args.provider.as_str() {
            "exact-opt" => BudgetProvider::ExactOpt(opt.as_ref().map(|o| o.0.edges.clone()).unwrap_or_default()),
            "diameter" => BudgetProvider::Diameter,
            v => BudgetProvider::Value(v.parse().context("provider must be exact-opt, diameter or an integer")?),
        };
        let beta = match (&args.beta, args.epsilon) {
            (Some(b), _) => parse_ratio(b)?,
            (None, Some(e)) => beta_for(inst.n, e),
            (None, None) => beta_for(inst.n, 1.0),
        };
        match run_lp_variant_with_beta(&inst, beta, &provider) {
            Ok(sol) => {
                let mut row = Report::lp(&id, &inst, provider.name(), &sol).with_opt(opt_weight);
                if let (BudgetProvider::ExactOpt(t), Some((r, _))) = (&provider, &opt) {
                    if r.weight.is_some() {
                        let reference = tree_distances(&inst.graph(), t, inst.root);
                        row.length_bound_ok = Some(sol.within_level_bound(&reference, inst.h, beta));
                    }
                }
                if args.audit >= AuditLevel::Basic {
                    if row.length_bound_ok == Some(false) {
                        violations.push("lp-shortcuts: level bound against the optimum violated".to_string());
                    }
                    if !is_spanning_tree(&inst, &sol.edges) {
                        violations.push("lp-shortcuts: output is not a spanning tree".to_string());
                    }
                }
                rows.push(row);
            }
            Err(e) => rows.push(Report::failed(&id, "lp-shortcuts", &inst, e.to_string())),
        }
    }
    if args.audit == AuditLevel::Full && inst.kind == ProblemKind::Lcmst {
        let a = full_audit(&inst, params.alpha, params.beta, opt.as_ref().map(|o| o.0.edges.as_slice()))?;
        violations.extend(a.violations);
    }
    let json = serde_json::to_string_pretty(&serde_json::json!({ "reports": rows, "violations": violations }))?;
    write_or_print(&args.out, &(json + "\n"))?;
    if let Some(p) = &args.csv {
        write_csv(&rows, fs::File::create(p)?)?;
    }
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("violation: {v}");
        }
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn reduce(inst: &Instance, from: ProblemKind, to: ProblemKind) -> Result<ReductionBundle> {
    if inst.kind != from {
        bail!("instance is {}, not {from}", inst.kind);
    }
    Ok(match (from, to) {
        (ProblemKind::Lcst, ProblemKind::Lcmst) => lcst_to_lcmst(inst)?,
        (ProblemKind::Lcmst, ProblemKind::Dst) => lcmst_to_dst(inst)?,
        (ProblemKind::Dst, ProblemKind::Lcst) => dst_to_lcst(inst)?,
        (ProblemKind::Gst, ProblemKind::Lcmst) => gst_to_lcmst(inst)?,
        _ => bail!("no reduction from {from} to {to}"),
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Gen { gen, out } => {
            let inst = gen_instance(&gen)?;
            write_or_print(&out, &inst.serialize())?;
        }
        Cmd::Solve(args) => return solve(args),
        Cmd::Reduce { input, from, to, out, mapping, normalize_groups: norm } => {
            let text = fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let inst = if norm {
                let (group_lines, rest): (Vec<&str>, Vec<&str>) = text.lines().partition(|l| l.trim_start().starts_with("g "));
                let mut raw = Instance::parse(&rest.join("\n"))?;
                raw.groups = group_lines
                    .iter()
                    .map(|l| l.split_whitespace().skip(1).map(|t| t.parse::<usize>()).collect::<std::result::Result<Vec<_>, _>>())
                    .collect::<std::result::Result<_, _>>()?;
                if raw.groups.iter().flatten().any(|&v| v >= raw.n) {
                    bail!("group vertex out of range");
                }
                normalize_groups(&raw)
            } else {
                Instance::parse(&text)?
            };
            let b = reduce(&inst, from, to)?;
            write_or_print(&out, &b.target.serialize())?;
            if let Some(p) = mapping {
                fs::write(&p, b.mapping_json())?;
            }
        }
        Cmd::SolveExact { input, out } => {
            let inst = read_instance(&input)?;
            let r = exact(&inst)?;
            write_or_print(&out, &(serde_json::to_string_pretty(&r)? + "\n"))?;
        }
        Cmd::Audit { input, alpha, beta, oracle } => {
            let inst = read_instance(&input)?;
            let opt = if oracle { Some(exact_lcmst(&inst)?.edges) } else { None };
            let a = full_audit(&inst, parse_ratio(&alpha)?, parse_ratio(&beta)?, opt.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&a)?);
            if !a.ok() {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
