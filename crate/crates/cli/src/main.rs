use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sttlp::analysis::{
    audit_weak_duality, integrality_gap, sample_directions, DirectionFlavor, GapRecord, ModelFlavor,
};
use sttlp::lpmodel::{
    add_refinements, build_dual, build_primal, build_refined, build_z_eliminated, build_z_eliminated_explicit, LpModel,
    Refinement, Sense, Var,
};
use sttlp::normals::{describe, scan, scan_to_closure, ScanOptions, ScanReport};
use sttlp::parallel::{set_threads, Parallelism};
use sttlp::polytope::{denominator_census, enumerate_vertices};
use sttlp::rational::{join, Rational};
use sttlp::rounding::{ratio_row, ratio_rows_on_face, RatioRow};
use sttlp::simplex::{is_vertex, lexmin_face, solve, solve_with_separation, Status};
use sttlp::stt::{best_stt, count_stts};
use sttlp::topology::{catalog, catalog_tsv, Topology};

const FORMAT_VERSION: &str = "sttlp-report/1";

#[derive(Parser, Debug)]
#[command(name = "sttlp", version, about = "Exact LP laboratory for search trees on trees")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Catalog topology, e.g. U_7_3
    #[arg(long, global = true)]
    topology: Option<String>,
    /// Edge file: node count, then one 1-based edge per line
    #[arg(long, global = true)]
    edges: Option<PathBuf>,
    /// Comma-separated weights, integers or p/q
    #[arg(long, global = true)]
    weights: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = ModelArg::Primal)]
    model: ModelArg,
    /// Comma-separated refined families (default: all)
    #[arg(long, global = true)]
    families: Option<String>,
    /// Run the long tier (later phases, bigger enumerations)
    #[arg(long, global = true)]
    long: bool,
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Wall-clock budget in seconds
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Directory receiving a copy of the report
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Tsv)]
    format: Format,
}

#[derive(Subcommand, Debug, Clone)]
enum Cmd {
    /// Every tree with 2..=8 nodes
    Catalog,
    /// Number of search trees
    Stts,
    /// Solve one LP in the given weight direction
    Solve,
    /// End-to-end check of the seven-node fractional optimum
    VerifyCounterexample,
    /// Normals scan (one phase, or to closure with --long)
    Normals,
    /// Integrality gap over the false-facet directions
    Gap,
    /// Root-rounding ratios in one direction
    Round,
    /// Strong duality and the subtree audit
    Dual,
    /// Vertex census by largest denominator
    Census,
    /// Denominators of optima in random directions
    Sample {
        #[arg(long, value_enum, default_value_t = DirArg::D)]
        directions: DirArg,
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
    /// List every vertex of a small model
    Vertices,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ModelArg {
    Primal,
    Refined,
    NoZ,
    Dual,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum DirArg {
    Xzd,
    Xd,
    D,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Tsv,
    Json,
}

/// A finished report: TSV lines and the same content as JSON.
struct Report {
    lines: Vec<String>,
    data: Value,
}

impl Report {
    fn new(lines: Vec<String>, data: Value) -> Self {
        Report { lines, data }
    }
}

#[derive(Debug)]
struct Failed(String);

impl std::fmt::Display for Failed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "verification failed: {}", self.0)
    }
}

impl std::error::Error for Failed {}

fn cmd_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Catalog => "catalog",
        Cmd::Stts => "stts",
        Cmd::Solve => "solve",
        Cmd::VerifyCounterexample => "verify-counterexample",
        Cmd::Normals => "normals",
        Cmd::Gap => "gap",
        Cmd::Round => "round",
        Cmd::Dual => "dual",
        Cmd::Census => "census",
        Cmd::Sample { .. } => "sample",
        Cmd::Vertices => "vertices",
    }
}

fn config_json(cli: &Cli) -> Value {
    let c = &cli.common;
    let mut v = json!({
        "subcommand": cmd_name(&cli.cmd),
        "topology": c.topology,
        "edges": c.edges.as_ref().map(|p| p.display().to_string()),
        "weights": c.weights,
        "model": c.model.to_possible_value().map(|v| v.get_name().to_string()),
        "families": c.families,
        "long": c.long,
        "jobs": c.jobs,
        "seed": c.seed,
        "budget": c.budget,
    });
    if let Cmd::Sample { directions, count } = &cli.cmd {
        v["directions"] = json!(directions.to_possible_value().map(|v| v.get_name().to_string()));
        v["count"] = json!(count);
    }
    v
}

fn topology(c: &Common) -> Result<Topology> {
    match (&c.topology, &c.edges) {
        (Some(name), None) => Ok(catalog(name)?),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(Topology::parse_text(&text)?)
        }
        (Some(_), Some(_)) => bail!(usage("give either --topology or --edges, not both")),
        (None, None) => bail!(usage("missing --topology or --edges")),
    }
}

fn weights(c: &Common, n: usize) -> Result<Vec<Rational>> {
    let Some(text) = &c.weights else { bail!(usage("missing --weights")) };
    let w: Vec<Rational> = text
        .split(',')
        .map(|s| s.trim().parse::<Rational>().map_err(|e| anyhow!(usage(&e.to_string()))))
        .collect::<Result<_>>()?;
    if w.len() != n {
        bail!(usage(&format!("expected {n} weights, got {}", w.len())));
    }
    if w.iter().any(|x| x.is_negative()) {
        bail!(usage("weights must be nonnegative"));
    }
    Ok(w)
}

fn families(c: &Common) -> Result<Vec<Refinement>> {
    match &c.families {
        None => Ok(Refinement::ALL.to_vec()),
        Some(s) => s.split(',').map(|f| Refinement::parse(f).map_err(|e| anyhow!(usage(&e.to_string())))).collect(),
    }
}

#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: &str) -> Usage {
    Usage(msg.to_string())
}

fn primal_model(c: &Common, u: &Topology) -> Result<LpModel> {
    Ok(match c.model {
        ModelArg::Primal => build_primal(u),
        ModelArg::Refined => build_refined(u, &families(c)?),
        ModelArg::NoZ => {
            let mut m = build_z_eliminated(u);
            if c.families.is_some() {
                add_refinements(&mut m, u, &families(c)?);
            }
            m
        }
        ModelArg::Dual => bail!(usage("this subcommand needs a primal model")),
    })
}

fn scan_options(c: &Common) -> ScanOptions {
    ScanOptions { parallelism: Parallelism::Auto, facet_cap: None, time_budget: c.budget.map(Duration::from_secs) }
}

fn ensure_complete(r: &ScanReport) -> Result<()> {
    if !r.complete {
        return Err(sttlp::Error::Budget(format!("phase {} did not finish", r.phase)).into());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<Report> {
    let c = &cli.common;
    match &cli.cmd {
        Cmd::Catalog => {
            let text = catalog_tsv();
            let lines: Vec<String> = text.lines().map(str::to_string).collect();
            let rows: Vec<Value> = lines
                .iter()
                .skip(1)
                .map(|l| {
                    let f: Vec<&str> = l.split('\t').collect();
                    json!({"name": f[0], "diameter": f[1], "edges": f[2]})
                })
                .collect();
            Ok(Report::new(lines, json!(rows)))
        }
        Cmd::Stts => {
            let u = topology(c)?;
            let k = count_stts(&u);
            Ok(Report::new(
                vec!["topology\tstts".into(), format!("{}\t{}", u.label(), k)],
                json!({"topology": u.label(), "stts": k.to_string()}),
            ))
        }
        Cmd::Solve => {
            let u = topology(c)?;
            let w = weights(c, u.n())?;
            if c.model == ModelArg::Dual {
                let m = build_dual(&u, &w)?;
                let (sense, obj) = m.objective.clone().expect("dual objective");
                let r = solve(&m, &obj, sense)?;
                if r.status != Status::Optimal {
                    bail!(Failed(format!("dual status {:?}", r.status)));
                }
                return Ok(Report::new(
                    vec!["model\tvalue".into(), format!("dual\t{}", r.value)],
                    json!({"model": "dual", "value": r.value}),
                ));
            }
            let m = primal_model(c, &u)?;
            let r = if m.families.is_empty() {
                lexmin_face(&m, &m.d_objective(&w), &d_vars(&m, u.n()))?
            } else {
                solve_with_separation(&m, &m.d_objective(&w), Sense::Min)?
            };
            if r.status != Status::Optimal {
                bail!(Failed(format!("status {:?}", r.status)));
            }
            let d = m.d_part(&r.point);
            Ok(Report::new(
                vec!["value\tD\tunique".into(), format!("{}\t({})\t{}", r.value, join(&d), r.unique)],
                json!({"value": r.value, "d": d, "unique": r.unique}),
            ))
        }
        Cmd::VerifyCounterexample => verify_counterexample(),
        Cmd::Normals => {
            let u = topology(c)?;
            let opts = scan_options(c);
            let reports = if c.long { scan_to_closure(&u, &opts, 8)? } else { vec![scan(&u, &opts)?] };
            let mut lines = vec![format!("phase\t{}", ScanReport::TSV_HEADER)];
            for r in &reports {
                lines.push(format!("{}\t{}", r.phase, r.tsv_row()));
            }
            for r in &reports {
                for l in describe(r).lines() {
                    lines.push(format!("# {l}"));
                }
            }
            let data = json!(reports);
            if let Some(r) = reports.iter().find(|r| !r.complete) {
                ensure_complete(r)?;
            }
            Ok(Report::new(lines, data))
        }
        Cmd::Gap => {
            let u = topology(c)?;
            let r = scan(&u, &scan_options(c))?;
            ensure_complete(&r)?;
            let g = integrality_gap(&u, &r);
            let mut lines = vec![format!("pick\t{}", GapRecord::TSV_HEADER)];
            for (tag, k) in [("ratio", g.ratio_best), ("additive", g.additive_best)] {
                if let Some(k) = k {
                    lines.push(format!("{tag}\t{}", g.rows[k].tsv_row()));
                }
            }
            if g.rows.is_empty() {
                lines.push(format!("none\t{}\t-\t-\t-\t1\t1.0000\t1\t0", u.label()));
            }
            Ok(Report::new(lines, json!({"gap": g.gap(), "table": g})))
        }
        Cmd::Round => {
            let u = topology(c)?;
            let w = weights(c, u.n())?;
            let r = scan(&u, &scan_options(c))?;
            ensure_complete(&r)?;
            let mut rows: Vec<(String, RatioRow)> = ratio_rows_on_face(&u, &w, &r)?
                .into_iter()
                .map(|(k, row)| (format!("({})", join(&r.new_vertices[k].d)), row))
                .collect();
            if rows.is_empty() {
                rows.push(("lexmin".into(), ratio_row(&u, &w)?));
            }
            let mut lines = vec![format!("vertex\t{}", RatioRow::TSV_HEADER)];
            lines.extend(rows.iter().map(|(v, row)| format!("{v}\t{}", row.tsv_row())));
            let data: Vec<Value> = rows.iter().map(|(v, row)| json!({"vertex": v, "row": row})).collect();
            Ok(Report::new(lines, json!(data)))
        }
        Cmd::Dual => {
            let u = topology(c)?;
            let w = weights(c, u.n())?;
            let pm = build_primal(&u);
            let p = solve(&pm, &pm.d_objective(&w), Sense::Min)?;
            let dm = build_dual(&u, &w)?;
            let (sense, obj) = dm.objective.clone().expect("dual objective");
            let d = solve(&dm, &obj, sense)?;
            if p.status != Status::Optimal || d.status != Status::Optimal {
                bail!(Failed("primal or dual not optimal".into()));
            }
            let best = best_stt(&u, &w)?;
            let audit = audit_weak_duality(&u, &best.tree, &dm, &d.point, &w)?;
            let mut lines = vec![
                "primal\tdual\tstt\tstrong\tchain".into(),
                format!("{}\t{}\t{}\t{}\t{}", p.value, d.value, best.value, p.value == d.value, audit.equality_chain),
                "node\tdual\tprimal\tslack".into(),
            ];
            for s in &audit.steps {
                lines.push(format!("{}\t{}\t{}\t{}", s.node + 1, s.dual, s.primal, s.slack));
            }
            let data = json!({"primal": p.value, "dual": d.value, "stt": best.value, "audit": audit});
            if p.value != d.value || !audit.holds() {
                bail!(Failed(format!("primal {} dual {}", p.value, d.value)));
            }
            Ok(Report::new(lines, data))
        }
        Cmd::Census => {
            let u = topology(c)?;
            let m = match c.model {
                ModelArg::NoZ => {
                    let mut m = build_z_eliminated_explicit(&u)?;
                    if c.families.is_some() {
                        add_refinements(&mut m, &u, &families(c)?);
                    }
                    m
                }
                _ => primal_model(c, &u)?,
            };
            let vs = enumerate_vertices(&m)?;
            let census = denominator_census(&vs, 3);
            let cells: Vec<String> = census.iter().map(|x| x.to_string()).collect();
            Ok(Report::new(
                vec![
                    "topology\tvertices\tby_denominator".into(),
                    format!("{}\t{}\t[{}]", u.label(), vs.len(), cells.join(",")),
                ],
                json!({"topology": u.label(), "vertices": vs.len(), "by_denominator": census}),
            ))
        }
        Cmd::Sample { directions, count } => {
            let u = topology(c)?;
            let flavor = match c.model {
                ModelArg::Primal => ModelFlavor::Primal,
                ModelArg::NoZ => ModelFlavor::ZEliminated,
                _ => bail!(usage("sampling supports --model primal or no-z")),
            };
            let dirs = match directions {
                DirArg::Xzd => DirectionFlavor::Xzd,
                DirArg::Xd => DirectionFlavor::Xd,
                DirArg::D => DirectionFlavor::D,
            };
            let s = sample_directions(&u, flavor, dirs, *count, c.seed, Parallelism::Auto)?;
            let dens: Vec<String> = s.denominators.iter().map(|d| d.to_string()).collect();
            Ok(Report::new(
                vec![
                    "topology\tsamples\tdenominators".into(),
                    format!("{}\t{}\t[{}]", u.label(), s.samples, dens.join(", ")),
                ],
                json!(s),
            ))
        }
        Cmd::Vertices => {
            let u = topology(c)?;
            let m = primal_model(c, &u)?;
            let m = if c.model == ModelArg::NoZ { build_z_eliminated_explicit(&u)? } else { m };
            let vs = enumerate_vertices(&m)?;
            let names: Vec<String> = m.vars().iter().map(|v| v.to_string()).collect();
            let mut lines = vec![names.join("\t")];
            for v in &vs {
                lines.push(v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("\t"));
            }
            Ok(Report::new(lines, json!({"variables": names, "vertices": vs})))
        }
    }
}

fn d_vars(m: &LpModel, n: usize) -> Vec<usize> {
    (0..n).map(|i| m.idx(Var::D(i))).collect()
}

fn verify_counterexample() -> Result<Report> {
    let u = catalog("U_7_3")?;
    let w: Vec<Rational> = [3, 2, 0, 2, 3, 3, 10].iter().map(|&x| Rational::from_int(x)).collect();
    let m = build_primal(&u);
    // node 3 has weight zero, so the optimal face is not a point
    let r = lexmin_face(&m, &m.d_objective(&w), &d_vars(&m, u.n()))?;
    let best = best_stt(&u, &w)?;
    let gap = &best.value / &r.value;
    let feasible = m.is_feasible(&r.point);
    let vertex = is_vertex(&m, &r.point)?;
    let d = m.d_part(&r.point);
    let pf = |b: bool| if b { "PASS" } else { "FAIL" };
    let lines = vec![
        format!("lp_value\t{}", r.value),
        format!("stt_best\t{}", best.value),
        format!("gap\t{}\t{}", gap, gap.to_decimal(4)),
        format!("d\t({})", join(&d)),
        format!("feasibility\t{}", pf(feasible)),
        format!("vertex\t{}", pf(vertex)),
    ];
    let data = json!({"lp_value": r.value, "stt_best": best.value, "gap": gap, "d": d, "feasible": feasible, "vertex": vertex});
    let expected: Vec<Rational> =
        [(2, 1), (2, 1), (9, 2), (2, 1), (2, 1), (3, 2), (1, 2)].iter().map(|&(a, b)| Rational::new(a, b)).collect();
    if !(feasible && vertex && r.value == Rational::new(59, 2) && best.value == Rational::from_int(30) && d == expected)
    {
        for l in &lines {
            eprintln!("{l}");
        }
        bail!(Failed("counterexample did not reproduce".into()));
    }
    Ok(Report::new(lines, data))
}

fn render(cli: &Cli, report: &Report) -> String {
    let config = config_json(cli);
    match cli.common.format {
        Format::Tsv => {
            let mut s = format!("# format\t{FORMAT_VERSION}\n# config\t{config}\n");
            for l in &report.lines {
                s.push_str(l);
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let v = json!({"format": FORMAT_VERSION, "config": config, "result": report.data});
            serde_json::to_string_pretty(&v).expect("serializable") + "\n"
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    if e.downcast_ref::<Failed>().is_some() {
        return 4;
    }
    match e.downcast_ref::<sttlp::Error>() {
        Some(sttlp::Error::Budget(_)) => 3,
        Some(sttlp::Error::Verification(_)) => 4,
        Some(sttlp::Error::Parse(_) | sttlp::Error::Topology(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.common.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(2);
        }
        set_threads(j);
    }
    if cli.common.budget == Some(0) {
        eprintln!("error: --budget must be positive");
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok(report) => {
            let text = render(&cli, &report);
            print!("{text}");
            if let Some(dir) = &cli.common.out {
                let ext = match cli.common.format {
                    Format::Tsv => "tsv",
                    Format::Json => "json",
                };
                let path = dir.join(format!("{}.{ext}", cmd_name(&cli.cmd)));
                if let Err(e) = fs::create_dir_all(dir).and_then(|_| fs::write(&path, &text)) {
                    eprintln!("error: writing {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
