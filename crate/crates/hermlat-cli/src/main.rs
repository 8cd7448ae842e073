//! Command-line driver: class groups, perfect-form enumeration, Hermite
//! constants, Voronoi neighbor graphs, and GL(L) generator sets over
//! imaginary quadratic fields, with JSON, table, and DOT output.

use clap::{Args, Parser, Subcommand, ValueEnum};
use hermlat::glgen::gl_generators_from;
use hermlat::ideals::ClassGroup;
use hermlat::jsonio;
use hermlat::lattice::OKLattice;
use hermlat::voronoi::{
    enumerate_perfect, hermite_constant, record_to_json, CheckpointCfg, EnumOpts,
    EnumerationResult, VoronoiError,
};
use serde_json::{json, Value};
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

#[derive(Parser)]
#[command(
    name = "hermlat",
    version,
    about = "Perfect Hermitian forms over imaginary quadratic fields"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
    Dot,
}

#[derive(Args, Clone)]
struct Common {
    /// Squarefree positive d in K = Q(sqrt(-d))
    #[arg(long)]
    d: u64,
    /// Lattice rank, 2 or 3
    #[arg(long)]
    n: usize,
    /// Lattice class: 1-based ideal-class index, or `all` for the reduced
    /// set of Steinitz representatives
    #[arg(long, default_value = "all")]
    class: String,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Worker threads for frontier expansion: 0 = library default,
    /// 1 = sequential
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Abort (after writing a checkpoint) once this many seconds have passed
    #[arg(long)]
    time_budget: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Class group of Q(sqrt(-d)): order, representatives, multiplication table
    Classgroup {
        /// Squarefree positive d in K = Q(sqrt(-d))
        #[arg(long)]
        d: u64,
        /// Output format
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Perfect Hermitian forms up to GL(L)-equivalence
    Perfect(Common),
    /// The Hermite constant gamma^n over all lattice classes
    HermiteConstant {
        /// Squarefree positive d in K = Q(sqrt(-d))
        #[arg(long)]
        d: u64,
        /// Lattice rank, 2 or 3
        #[arg(long)]
        n: usize,
        /// Output format
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// Worker threads for frontier expansion: 0 = library default,
        /// 1 = sequential
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Abort (after writing a checkpoint) once this many seconds have passed
        #[arg(long)]
        time_budget: Option<u64>,
    },
    /// Weighted Voronoi neighbor graph of each lattice class
    Graph(Common),
    /// Generators of GL(L): class stabilizers plus edge transformations
    Glgen(Common),
}

enum CliError {
    Usage(String),
    Run(String),
}

impl From<VoronoiError> for CliError {
    fn from(e: VoronoiError) -> CliError {
        CliError::Run(e.to_string())
    }
}

/// Everything one run needs: the class group, rank, selected lattice
/// classes, output format, and enumeration options.
struct RunConfig {
    cg: Arc<ClassGroup>,
    n: usize,
    classes: Vec<usize>,
    format: Format,
    opts: EnumOpts,
}

fn enum_opts(threads: usize, time_budget: Option<u64>) -> EnumOpts {
    if threads > 1 {
        // One global pool owned by the CLI; a second build attempt in the
        // same process is harmless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    EnumOpts {
        parallel: threads != 1 && EnumOpts::default().parallel,
        checkpoint: CheckpointCfg::from_env(),
        max_classes: None,
        deadline: time_budget.map(|s| Instant::now() + Duration::from_secs(s)),
    }
}

fn class_group(d: u64) -> Result<Arc<ClassGroup>, CliError> {
    ClassGroup::from_d(d)
        .map(Arc::new)
        .map_err(|e| CliError::Usage(format!("invalid d: {e}")))
}

fn config_from(common: &Common, allow_dot: bool) -> Result<RunConfig, CliError> {
    let cg = class_group(common.d)?;
    if !(2..=3).contains(&common.n) {
        return Err(CliError::Usage("n must be 2 or 3".into()));
    }
    if common.format == Format::Dot && !allow_dot {
        return Err(CliError::Usage(
            "dot output is only available for `graph`".into(),
        ));
    }
    let classes = if common.class == "all" {
        cg.lattice_class_reps(common.n)
    } else {
        let j: usize = common
            .class
            .parse()
            .map_err(|_| CliError::Usage("class must be a positive index or `all`".into()))?;
        if j < 1 || j > cg.h() {
            return Err(CliError::Usage(format!(
                "class must be between 1 and {} or `all`",
                cg.h()
            )));
        }
        vec![j - 1]
    };
    Ok(RunConfig {
        cg,
        n: common.n,
        classes,
        format: common.format,
        opts: enum_opts(common.threads, common.time_budget),
    })
}

/// Runs the enumeration for every selected lattice class, in order.
fn enumerate_selected(
    cfg: &RunConfig,
) -> Result<Vec<(usize, OKLattice, EnumerationResult)>, CliError> {
    let mut out = Vec::new();
    for &j in &cfg.classes {
        let l = OKLattice::standard(cfg.cg.clone(), cfg.n, j);
        let res = enumerate_perfect(&l, &cfg.opts)?;
        out.push((j, l, res));
    }
    Ok(out)
}

fn print_table(header: &[&str], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let line = |cells: Vec<String>| {
        let padded: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{:<w$}", c, w = widths[i]))
            .collect();
        println!("{}", padded.join("  ").trim_end());
    };
    line(header.iter().map(|h| h.to_string()).collect());
    for row in rows {
        line(row.clone());
    }
}

fn cmd_classgroup(d: u64, format: Format) -> Result<(), CliError> {
    if format == Format::Dot {
        return Err(CliError::Usage(
            "dot output is only available for `graph`".into(),
        ));
    }
    let cg = class_group(d)?;
    let k = cg.field();
    match format {
        Format::Json => {
            let reps: Vec<Value> = cg
                .reps()
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    json!({
                        "class": i + 1,
                        "ideal": c.fmt_ideal(k),
                        "norm": jsonio::q_to_string(&c.norm()),
                        "hnf": c.hnf_rows().iter().map(|r| {
                            vec![jsonio::q_to_string(&r[0]), jsonio::q_to_string(&r[1])]
                        }).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let table: Vec<Vec<usize>> = cg
                .table()
                .iter()
                .map(|row| row.iter().map(|c| c + 1).collect())
                .collect();
            let doc = json!({
                "schema": 1,
                "d": d,
                "h": cg.h(),
                "reps": reps,
                "table": table,
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("valid json"));
        }
        Format::Table | Format::Dot => {
            println!("K = Q(sqrt(-{d})), h = {}", cg.h());
            let rows: Vec<Vec<String>> = cg
                .reps()
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    vec![
                        format!("{}", i + 1),
                        c.fmt_ideal(k),
                        jsonio::q_to_string(&c.norm()),
                    ]
                })
                .collect();
            print_table(&["class", "ideal", "norm"], &rows);
            println!("multiplication table (classes are rows x columns):");
            for row in cg.table() {
                let cells: Vec<String> = row.iter().map(|c| format!("{}", c + 1)).collect();
                println!("  {}", cells.join(" "));
            }
        }
    }
    Ok(())
}

fn cmd_perfect(cfg: &RunConfig) -> Result<(), CliError> {
    let runs = enumerate_selected(cfg)?;
    match cfg.format {
        Format::Json => {
            let lattices: Vec<Value> = runs
                .iter()
                .map(|(j, l, res)| {
                    json!({
                        "class": j + 1,
                        "lattice": l.describe(),
                        "records": res.records.iter()
                            .map(|r| record_to_json(l, r)).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let doc = json!({
                "schema": 1,
                "d": cfg.cg.field().d(),
                "n": cfg.n,
                "lattices": lattices,
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("valid json"));
        }
        Format::Table | Format::Dot => {
            for (j, l, res) in &runs {
                println!("lattice class {}: L = {}", j + 1, l.describe());
                let rows: Vec<Vec<String>> = res
                    .records
                    .iter()
                    .map(|r| {
                        vec![
                            format!("P{}", r.class_id + 1),
                            jsonio::q_to_string(&r.det_rel),
                            format!("{}", r.minvecs.vectors.len()),
                            format!("{}", r.facet_count),
                            r.aut_label.clone(),
                        ]
                    })
                    .collect();
                print_table(&["P", "det_L(P)", "|S_L(P)|", "facets", "Aut(L,P)"], &rows);
                println!();
            }
        }
    }
    Ok(())
}

fn cmd_hermite(
    d: u64,
    n: usize,
    format: Format,
    threads: usize,
    time_budget: Option<u64>,
) -> Result<(), CliError> {
    if format == Format::Dot {
        return Err(CliError::Usage(
            "dot output is only available for `graph`".into(),
        ));
    }
    let cg = class_group(d)?;
    if !(2..=3).contains(&n) {
        return Err(CliError::Usage("n must be 2 or 3".into()));
    }
    let opts = enum_opts(threads, time_budget);
    let hr = hermite_constant(&cg, n, &opts)?;
    match format {
        Format::Json => {
            let maximizers: Vec<Value> = hr
                .maximizers
                .iter()
                .map(|(pos, rec)| {
                    json!({
                        "lattice_class": hr.classes[*pos].class_index + 1,
                        "record": rec,
                    })
                })
                .collect();
            let doc = json!({
                "schema": 1,
                "d": d,
                "n": n,
                "gamma_pow_n": jsonio::q_to_string(&hr.gamma_pow_n),
                "maximizers": maximizers,
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("valid json"));
        }
        Format::Table | Format::Dot => {
            println!("gamma^{n} = {}", jsonio::q_to_string(&hr.gamma_pow_n));
            for (pos, rec) in &hr.maximizers {
                let cls = &hr.classes[*pos];
                println!(
                    "maximizer: lattice class {} ({}), form P{}",
                    cls.class_index + 1,
                    cls.lattice.describe(),
                    rec + 1
                );
            }
        }
    }
    Ok(())
}

fn cmd_graph(cfg: &RunConfig) -> Result<(), CliError> {
    let runs = enumerate_selected(cfg)?;
    match cfg.format {
        Format::Dot => {
            for (j, _, res) in &runs {
                println!("digraph lattice_{} {{", j + 1);
                for r in &res.records {
                    let marked = res.graph.maximizers.contains(&r.class_id);
                    let label = format!(
                        "P{} det={}",
                        r.class_id + 1,
                        jsonio::q_to_string(&r.det_rel)
                    );
                    if marked {
                        println!(
                            "  P{} [label=\"{}\", peripheries=2];",
                            r.class_id + 1,
                            label
                        );
                    } else {
                        println!("  P{} [label=\"{}\"];", r.class_id + 1, label);
                    }
                }
                for (from, to, w) in &res.graph.edges {
                    println!(
                        "  P{} -> P{} [label=\"{}\", weight={}];",
                        from + 1,
                        to + 1,
                        w,
                        w
                    );
                }
                println!("}}");
            }
        }
        Format::Json => {
            let lattices: Vec<Value> = runs
                .iter()
                .map(|(j, _, res)| {
                    let edges: Vec<Value> = res
                        .graph
                        .edges
                        .iter()
                        .map(|(f, t, w)| json!({"from": f, "to": t, "weight": w}))
                        .collect();
                    json!({
                        "class": j + 1,
                        "vertex_count": res.graph.vertex_count,
                        "maximizers": res.graph.maximizers,
                        "edges": edges,
                    })
                })
                .collect();
            let doc = json!({
                "schema": 1,
                "d": cfg.cg.field().d(),
                "n": cfg.n,
                "lattices": lattices,
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("valid json"));
        }
        Format::Table => {
            for (j, l, res) in &runs {
                println!("lattice class {}: L = {}", j + 1, l.describe());
                for (from, to, w) in &res.graph.edges {
                    println!("  P{} -> P{}: weight {}", from + 1, to + 1, w);
                }
                let marks: Vec<String> = res
                    .graph
                    .maximizers
                    .iter()
                    .map(|m| format!("P{}", m + 1))
                    .collect();
                println!("  gamma maximizer: {}", marks.join(", "));
                println!();
            }
        }
    }
    Ok(())
}

fn cmd_glgen(cfg: &RunConfig) -> Result<(), CliError> {
    let runs = enumerate_selected(cfg)?;
    match cfg.format {
        Format::Json => {
            let lattices: Vec<Value> = runs
                .iter()
                .map(|(j, l, res)| {
                    let k = l.field();
                    let gens = gl_generators_from(l, res);
                    let mut list: Vec<Value> = Vec::new();
                    for (class_id, cls) in gens.stabilizer_gens.iter().enumerate() {
                        for g in cls {
                            list.push(json!({
                                "kind": "stabilizer",
                                "class_id": class_id,
                                "facet_id": Value::Null,
                                "matrix": jsonio::kmat_to_json(k, g),
                            }));
                        }
                    }
                    for e in &gens.edge_gens {
                        list.push(json!({
                            "kind": "edge",
                            "class_id": e.class_id,
                            "facet_id": e.facet_id,
                            "to_class": e.to_class,
                            "matrix": jsonio::kmat_to_json(k, &e.matrix),
                        }));
                    }
                    json!({
                        "class": j + 1,
                        "lattice": l.describe(),
                        "generators": list,
                    })
                })
                .collect();
            let doc = json!({
                "schema": 1,
                "d": cfg.cg.field().d(),
                "n": cfg.n,
                "lattices": lattices,
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("valid json"));
        }
        Format::Table | Format::Dot => {
            for (j, l, res) in &runs {
                let k = l.field();
                let gens = gl_generators_from(l, res);
                println!(
                    "lattice class {}: L = {} ({} generators)",
                    j + 1,
                    l.describe(),
                    gens.len()
                );
                for (class_id, cls) in gens.stabilizer_gens.iter().enumerate() {
                    for g in cls {
                        println!("  stabilizer of P{}: {}", class_id + 1, g.fmt_mat(k));
                    }
                }
                for e in &gens.edge_gens {
                    println!(
                        "  edge P{} facet {} -> P{}: {}",
                        e.class_id + 1,
                        e.facet_id,
                        e.to_class + 1,
                        e.matrix.fmt_mat(k)
                    );
                }
                println!();
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Classgroup { d, format } => cmd_classgroup(d, format),
        Cmd::Perfect(c) => cmd_perfect(&config_from(&c, false)?),
        Cmd::HermiteConstant {
            d,
            n,
            format,
            threads,
            time_budget,
        } => cmd_hermite(d, n, format, threads, time_budget),
        Cmd::Graph(c) => cmd_graph(&config_from(&c, true)?),
        Cmd::Glgen(c) => cmd_glgen(&config_from(&c, false)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let is_usage = e.use_stderr();
            let _ = e.print();
            return if is_usage {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match panic::catch_unwind(AssertUnwindSafe(|| run(cli))) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(CliError::Usage(m))) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Ok(Err(CliError::Run(m))) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(_) => {
            eprintln!("error: internal invariant violation");
            ExitCode::from(2)
        }
    }
}
