//! `sramsey`: command-line front end for partition arrows, Ramsey-degree
//! evidence, semi-retractions and Boolean-algebra encodings.
//!
//! Exit codes: 0 pass/holds, 1 internal alarm, 2 malformed input,
//! 3 fail with witness, 4 degenerate input, 5 budget exceeded.

mod inputs;
mod report;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};
use sramsey::constructions::{
    encode_graph_to_ba, encode_hypergraph_to_ba, make_chain, make_convex_equivalence, make_graph, make_hypergraph, make_tree,
    HypergraphSpec, TreeFlavor, TreeSpec,
};
use sramsey::indiscernibles::{atomic_locally_based_check, qf_indiscernible_check, FamilyDoc};
use sramsey::ramsey::{
    check_arrow, degree_evidence, two_degrees_check, validate_witness, ArrowQuery, Coloring, Mode, Outcome as ArrowOutcome,
    SearchOptions,
};
use sramsey::semiretraction::{
    preadjunction_check, restricted_sweep, transfer_pipeline_check, verify_semiretraction, TransferSetup, WitnessDoc,
};
use sramsey::structures::{
    age_enumerate, automorphism_group, enumerate_copies, enumerate_embeddings, qftp_fingerprint, StructureDoc,
};
use sramsey::{FiniteStructure, Limits};

use report::{CliError, Digest256, Format, Outcome, Report, EXIT_BUDGET, EXIT_DEGENERATE, EXIT_FAIL, EXIT_OK};

#[derive(Parser)]
#[command(name = "sramsey", version, about = "Finite structural Ramsey theory toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads (default: available parallelism). Verdicts do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(flatten)]
    budgets: Budgets,
}

#[derive(Args, Clone, Debug)]
struct Budgets {
    /// Longest tuple whose type may be fingerprinted.
    #[arg(long, global = true, default_value_t = Limits::default().max_tuple_len)]
    max_tuple_len: usize,
    /// Largest symbol arity.
    #[arg(long, global = true, default_value_t = Limits::default().max_arity)]
    max_arity: usize,
    /// Largest universe for embedding enumeration.
    #[arg(long, global = true, default_value_t = Limits::default().max_universe)]
    max_universe: usize,
    /// Cap on candidates in tuple sweeps and age enumeration.
    #[arg(long, global = true, default_value_t = Limits::default().max_candidates)]
    max_candidates: usize,
    /// Largest atom count exported to table form.
    #[arg(long, global = true, default_value_t = Limits::default().max_export_atoms)]
    max_export_atoms: usize,
    /// Node budget of the coloring search.
    #[arg(long, global = true, default_value_t = SearchOptions::default().max_nodes)]
    max_nodes: u64,
    /// Largest coloring domain for the pruned search.
    #[arg(long, global = true, default_value_t = SearchOptions::default().max_domain)]
    max_domain: usize,
    /// Largest coloring domain for brute-force enumeration.
    #[arg(long, global = true, default_value_t = SearchOptions::default().max_exhaustive)]
    max_exhaustive: usize,
}

impl Budgets {
    fn limits(&self) -> Limits {
        Limits {
            max_tuple_len: self.max_tuple_len,
            max_arity: self.max_arity,
            max_universe: self.max_universe,
            max_candidates: self.max_candidates,
            max_export_atoms: self.max_export_atoms,
        }
    }

    fn search(&self, exhaustive: bool) -> SearchOptions {
        SearchOptions {
            max_domain: self.max_domain,
            max_exhaustive: self.max_exhaustive,
            max_nodes: self.max_nodes,
            exhaustive,
            limits: self.limits(),
        }
    }

    fn echo(&self) -> Value {
        json!({
            "max_tuple_len": self.max_tuple_len,
            "max_arity": self.max_arity,
            "max_universe": self.max_universe,
            "max_candidates": self.max_candidates,
            "max_export_atoms": self.max_export_atoms,
            "max_nodes": self.max_nodes,
            "max_domain": self.max_domain,
            "max_exhaustive": self.max_exhaustive,
        })
    }
}

#[derive(Args)]
struct ArrowArgs {
    /// Host structure C.
    #[arg(long = "C")]
    c: String,
    /// Big structure B.
    #[arg(long = "B")]
    b: String,
    /// Small structure A.
    #[arg(long = "A")]
    a: String,
    #[arg(long)]
    r: usize,
    #[arg(long)]
    d: usize,
    /// Enumerate all r^N colorings instead of searching.
    #[arg(long)]
    exhaustive: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Substructure,
    Embedding,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Substructure => Mode::Substructure,
            ModeArg::Embedding => Mode::Embedding,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FlavorArg {
    Stree,
    Strtree,
}

#[derive(Subcommand)]
enum MakeKind {
    /// Linear order on n points.
    Chain {
        #[arg(long)]
        n: usize,
    },
    /// Graph on m vertices, edges like `0-1,1-2`.
    Graph {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "")]
        edges: String,
    },
    /// n-uniform hypergraph on m vertices, edges like `0-1-2,1-2-3`.
    Hyper {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "")]
        edges: String,
    },
    /// Equivalence relation with class sizes like `2,3`, convexly ordered.
    Eqrel {
        #[arg(long)]
        classes: String,
        /// Leave out the convex order.
        #[arg(long)]
        unordered: bool,
    },
    /// All sequences of length at most h over k letters.
    Tree {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        h: usize,
        #[arg(long, value_enum, default_value_t = FlavorArg::Strtree)]
        flavor: FlavorArg,
    },
}

#[derive(Subcommand)]
enum Command {
    /// Quantifier-free type fingerprint of a tuple.
    Qftp {
        #[arg(long = "A")]
        a: String,
        /// Elements like `0,2,1`.
        #[arg(long)]
        tuple: String,
    },
    /// Embeddings of A into C.
    Emb {
        #[arg(long = "A")]
        a: String,
        #[arg(long = "C")]
        c: String,
        /// Most embeddings listed in the report.
        #[arg(long, default_value_t = 100)]
        list: usize,
    },
    /// Copies (images of embeddings) of A in C.
    Copies {
        #[arg(long = "A")]
        a: String,
        #[arg(long = "C")]
        c: String,
        #[arg(long, default_value_t = 100)]
        list: usize,
    },
    /// Automorphism group of A.
    Aut {
        #[arg(long = "A")]
        a: String,
    },
    /// Isomorphism types generated by at most k elements of M.
    Age {
        #[arg(long = "M")]
        m: String,
        #[arg(long)]
        k: usize,
    },
    /// Arrow C -> (B)^A_{r,d}, coloring copies.
    Arrow(ArrowArgs),
    /// Arrow C -> (B)^A_{r,d}, coloring embeddings.
    Earrow(ArrowArgs),
    /// Least d over pools of B's and hosts, for r = 2..=r-max.
    Degree {
        #[arg(long = "A")]
        a: String,
        #[arg(long = "B", required = true)]
        b: Vec<String>,
        #[arg(long = "C", required = true)]
        c: Vec<String>,
        #[arg(long, default_value_t = 2)]
        r_max: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Substructure)]
        mode: ModeArg,
    },
    /// Least d for copies and for embeddings on one instance, against |Aut(A)|.
    Twodeg {
        #[arg(long = "A")]
        a: String,
        #[arg(long = "B")]
        b: String,
        #[arg(long = "C")]
        c: String,
        #[arg(long)]
        r: usize,
    },
    /// Check the three semi-retraction axioms on a witness.
    SemiretVerify {
        #[arg(long)]
        witness: String,
        /// Tuple length checked (default: the witness's depth).
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Restricted inverse images over all small tuples of a witness.
    Restricted {
        #[arg(long)]
        witness: String,
        #[arg(long, default_value_t = 2)]
        a_len: usize,
        #[arg(long, default_value_t = 2)]
        b_len: usize,
    },
    /// Transfer a coloring through a witness and check the color identity.
    Transfer {
        #[arg(long)]
        witness: String,
        /// Elements of a substructure A0 of the witness's first fragment.
        #[arg(long)]
        a0: String,
        /// Elements of a substructure B0.
        #[arg(long)]
        b0: String,
        /// Coloring document of Emb(A, host); random if absent.
        #[arg(long)]
        coloring: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        colors: usize,
    },
    /// Pre-adjunction identity over tuples of bounded length.
    Preadj {
        #[arg(long)]
        witness: String,
        #[arg(long, default_value_t = 2)]
        max_len: usize,
    },
    /// Encode a graph into a finite Boolean algebra.
    EncodeGraphBa {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "")]
        edges: String,
    },
    /// Encode an n-uniform hypergraph into a finite Boolean algebra.
    EncodeHyperBa {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "")]
        edges: String,
    },
    /// Emit a structure document.
    Make {
        #[command(subcommand)]
        kind: MakeKind,
    },
    /// Quantifier-free indiscernibility of an indexed family.
    Indisc {
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 2)]
        n_max: usize,
    },
    /// Whether family Y is locally based on family X.
    Based {
        #[arg(long = "X")]
        x: String,
        #[arg(long = "Y")]
        y: String,
        #[arg(long, default_value_t = 2)]
        n_max: usize,
    },
}

struct Ctx {
    limits: Limits,
    budgets: Budgets,
    digest: Digest256,
}

impl Ctx {
    fn structure(&mut self, label: &str, s: &str) -> Result<FiniteStructure, CliError> {
        let m = inputs::structure(s, &self.limits)?;
        self.digest.add(label, &StructureDoc::from_structure(&m));
        Ok(m)
    }

    fn param(&mut self, label: &str, v: &impl serde::Serialize) {
        self.digest.add(label, v);
    }
}

fn listed<T: serde::Serialize>(items: &[T], max: usize) -> Value {
    json!({ "items": &items[..items.len().min(max)], "truncated": items.len() > max })
}

fn arrow(ctx: &mut Ctx, args: &ArrowArgs, mode: Mode) -> Result<Outcome, CliError> {
    let c = ctx.structure("C", &args.c)?;
    let b = ctx.structure("B", &args.b)?;
    let a = ctx.structure("A", &args.a)?;
    ctx.param("params", &(args.r, args.d, mode, args.exhaustive));
    let q = ArrowQuery { host: &c, big: &b, small: &a, r: args.r, d: args.d, mode };
    let v = check_arrow(&q, &ctx.budgets.search(args.exhaustive))?;
    let details = json!({ "mode": mode, "r": args.r, "d": args.d, "reason": v.reason });
    let stats = serde_json::to_value(&v.stats).expect("serializable");
    Ok(match v.outcome {
        ArrowOutcome::Holds => Outcome::new("holds", EXIT_OK, details).stats(stats),
        ArrowOutcome::Degenerate => Outcome::new("degenerate", EXIT_DEGENERATE, details).stats(stats),
        ArrowOutcome::Fails => {
            let w = v.witness.expect("failing verdicts carry a witness");
            if !validate_witness(&q, &w, &ctx.limits)? {
                return Err(CliError::internal("emitted coloring does not validate"));
            }
            Outcome::new("fails", EXIT_FAIL, details).witness(serde_json::to_value(&w).unwrap()).stats(stats)
        }
    })
}

fn run(cli: &Cli, ctx: &mut Ctx) -> Result<Outcome, CliError> {
    let limits = ctx.limits.clone();
    match &cli.command {
        Command::Qftp { a, tuple } => {
            let m = ctx.structure("A", a)?;
            let t = inputs::list(tuple)?;
            ctx.param("tuple", &t);
            let fp = qftp_fingerprint(&m, &t, &limits)?;
            let hex: String = fp.to_bytes().iter().map(|b| format!("{b:02x}")).collect();
            Ok(Outcome::ok(json!({
                "tuple": t,
                "generators": fp.generator_count(),
                "local_size": fp.local_size(),
                "generator_map": fp.generator_map(),
                "fingerprint": hex,
            })))
        }
        Command::Emb { a, c, list } => {
            let (a, c) = (ctx.structure("A", a)?, ctx.structure("C", c)?);
            let embs: Vec<Vec<usize>> = enumerate_embeddings(&a, &c, &limits)?.into_iter().map(|e| e.map).collect();
            Ok(Outcome::ok(json!({ "count": embs.len(), "embeddings": listed(&embs, *list) })))
        }
        Command::Copies { a, c, list } => {
            let (a, c) = (ctx.structure("A", a)?, ctx.structure("C", c)?);
            let copies: Vec<Vec<usize>> = enumerate_copies(&a, &c, &limits)?.into_iter().collect();
            Ok(Outcome::ok(json!({ "count": copies.len(), "copies": listed(&copies, *list) })))
        }
        Command::Aut { a } => {
            let a = ctx.structure("A", a)?;
            let g = automorphism_group(&a, &limits)?;
            Ok(Outcome::ok(serde_json::to_value(&g).unwrap()))
        }
        Command::Age { m, k } => {
            let m = ctx.structure("M", m)?;
            ctx.param("k", k);
            let classes = age_enumerate(&m, *k, &limits)?;
            let docs: Vec<StructureDoc> = classes.iter().map(StructureDoc::from_structure).collect();
            Ok(Outcome::ok(json!({ "count": docs.len(), "classes": docs })))
        }
        Command::Arrow(args) => arrow(ctx, args, Mode::Substructure),
        Command::Earrow(args) => arrow(ctx, args, Mode::Embedding),
        Command::Degree { a, b, c, r_max, mode } => {
            let a = ctx.structure("A", a)?;
            let bigs = b.iter().map(|s| ctx.structure("B", s)).collect::<Result<Vec<_>, _>>()?;
            let hosts = c.iter().map(|s| ctx.structure("C", s)).collect::<Result<Vec<_>, _>>()?;
            let mode: Mode = (*mode).into();
            ctx.param("params", &(r_max, mode));
            let rep = degree_evidence(&a, &bigs, &hosts, *r_max, mode, &ctx.budgets.search(false));
            let budget_hit = rep.cells.iter().any(|c| c.error.is_some() && c.min_d.is_none());
            let out = serde_json::to_value(&rep).unwrap();
            Ok(if budget_hit { Outcome::new("incomplete", EXIT_BUDGET, out) } else { Outcome::ok(out) })
        }
        Command::Twodeg { a, b, c, r } => {
            let (a, b, c) = (ctx.structure("A", a)?, ctx.structure("B", b)?, ctx.structure("C", c)?);
            ctx.param("r", r);
            let rep = two_degrees_check(&a, &b, &c, *r, &ctx.budgets.search(false))?;
            if rep.d_sub.is_none() && rep.d_emb.is_none() {
                return Ok(Outcome::new("degenerate", EXIT_DEGENERATE, serde_json::to_value(&rep).unwrap()));
            }
            Ok(Outcome::pass_fail(rep.consistent, serde_json::to_value(&rep).unwrap()))
        }
        Command::SemiretVerify { witness, depth } => {
            let mut w = inputs::witness(witness, &limits)?;
            if let Some(d) = depth {
                w.depth = *d;
            }
            ctx.param("witness", &WitnessDoc::from_witness(&w));
            let rep = verify_semiretraction(&w, &limits)?;
            Ok(Outcome::pass_fail(rep.passed(), serde_json::to_value(&rep).unwrap()))
        }
        Command::Restricted { witness, a_len, b_len } => {
            let w = inputs::witness(witness, &limits)?;
            ctx.param("witness", &WitnessDoc::from_witness(&w));
            ctx.param("lengths", &(a_len, b_len));
            let rep = restricted_sweep(&w, *a_len, *b_len, &limits)?;
            Ok(Outcome::pass_fail(rep.failure.is_none(), serde_json::to_value(&rep).unwrap()))
        }
        Command::Transfer { witness, a0, b0, coloring, seed, colors } => {
            let w = inputs::witness(witness, &limits)?;
            ctx.param("witness", &WitnessDoc::from_witness(&w));
            let (a0, b0) = (inputs::list(a0)?, inputs::list(b0)?);
            ctx.param("substructures", &(&a0, &b0));
            let setup = TransferSetup::new(&w, &a0, &b0)?;
            let c = match coloring {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| CliError::malformed(format!("cannot read coloring `{path}`: {e}")))?;
                    serde_json::from_str::<Coloring>(&text).map_err(|e| CliError::malformed(format!("{path}: {e}")))?
                }
                None => {
                    if *colors == 0 {
                        return Err(CliError::malformed("need at least one color"));
                    }
                    let domain = setup.source_domain(&w, &limits)?;
                    let mut rng = StdRng::seed_from_u64(*seed);
                    let cols = domain.iter().map(|_| rng.gen_range(0..*colors)).collect();
                    Coloring { mode: Mode::Embedding, domain, colors: cols }
                }
            };
            ctx.param("coloring", &c);
            let rep = transfer_pipeline_check(&w, &setup, &c, None, &limits)?;
            Ok(Outcome::pass_fail(rep.passed(), serde_json::to_value(&rep).unwrap()))
        }
        Command::Preadj { witness, max_len } => {
            let w = inputs::witness(witness, &limits)?;
            ctx.param("witness", &WitnessDoc::from_witness(&w));
            ctx.param("max_len", max_len);
            let rep = preadjunction_check(&w, *max_len, &limits)?;
            Ok(Outcome::pass_fail(rep.failure.is_none(), serde_json::to_value(&rep).unwrap()))
        }
        Command::EncodeGraphBa { m, edges } => {
            let spec = inputs::graph_spec(*m, edges)?;
            ctx.param("graph", &spec);
            let enc = encode_graph_to_ba(&spec)?;
            let mut ok = true;
            for i in 0..*m {
                for j in 0..*m {
                    if i != j {
                        ok &= (enc.g[i] & enc.g[j] != 0) == spec.has_edge(i, j);
                        for k in 0..*m {
                            ok &= k == i || k == j || enc.g[i] & enc.g[j] & enc.g[k] == 0;
                        }
                    }
                }
            }
            let g: Vec<(usize, u64)> = enc.g.iter().copied().enumerate().collect();
            let g_atoms: Vec<Vec<String>> = enc.g.iter().map(|&x| enc.algebra.element_names(x)).collect();
            let export = enc.algebra.export_structure(&limits).ok().map(|s| StructureDoc::from_structure(&s));
            Ok(Outcome::pass_fail(
                ok,
                json!({
                    "atoms": enc.algebra.atom_names(),
                    "g": g,
                    "g_atoms": g_atoms,
                    "subalgebra_atoms": enc.algebra.subalgebra_atoms(&enc.g).len(),
                    "structure": export,
                }),
            ))
        }
        Command::EncodeHyperBa { m, n, edges } => {
            let spec = HypergraphSpec::new(*m, *n, inputs::edges(edges)?)?;
            ctx.param("hypergraph", &spec);
            let enc = encode_hypergraph_to_ba(&spec)?;
            let mut ok = true;
            for k in 1..=(*n + 1).min(*m) {
                for idx in sramsey::tuples::combinations(*m, k) {
                    let meet = idx.iter().fold(enc.algebra.one(), |acc, &i| acc & enc.g[i]);
                    ok &= (meet != 0) == (k < *n || (k == *n && spec.has_edge(&idx)));
                }
            }
            let g: Vec<(usize, u64)> = enc.g.iter().copied().enumerate().collect();
            let export = enc.algebra.export_structure(&limits).ok().map(|s| StructureDoc::from_structure(&s));
            Ok(Outcome::pass_fail(
                ok,
                json!({ "atoms": enc.algebra.atom_names(), "g": g, "structure": export }),
            ))
        }
        Command::Make { .. } => unreachable!("handled before reporting"),
        Command::Indisc { family, n_max } => {
            let fam = inputs::family(family)?;
            ctx.param("family", &FamilyDoc::from_family(&fam));
            ctx.param("n_max", n_max);
            let rep = qf_indiscernible_check(&fam, *n_max, &limits)?;
            Ok(Outcome::pass_fail(rep.passed(), serde_json::to_value(&rep).unwrap()))
        }
        Command::Based { x, y, n_max } => {
            let (x, y) = (inputs::family(x)?, inputs::family(y)?);
            ctx.param("X", &FamilyDoc::from_family(&x));
            ctx.param("Y", &FamilyDoc::from_family(&y));
            ctx.param("n_max", n_max);
            let rep = atomic_locally_based_check(&x, &y, *n_max, &limits)?;
            Ok(Outcome::pass_fail(rep.passed(), serde_json::to_value(&rep).unwrap()))
        }
    }
}

fn make(kind: &MakeKind, limits: &Limits) -> Result<FiniteStructure, CliError> {
    let check = |n: usize| {
        if n > limits.max_universe {
            Err(CliError { code: EXIT_BUDGET, message: format!("{n} points exceed the universe bound {}", limits.max_universe) })
        } else {
            Ok(())
        }
    };
    Ok(match kind {
        MakeKind::Chain { n } => {
            check(*n)?;
            make_chain(*n)
        }
        MakeKind::Graph { m, edges } => {
            check(*m)?;
            make_graph(&inputs::graph_spec(*m, edges)?)
        }
        MakeKind::Hyper { m, n, edges } => {
            check(*m)?;
            make_hypergraph(&HypergraphSpec::new(*m, *n, inputs::edges(edges)?)?, limits)?
        }
        MakeKind::Eqrel { classes, unordered } => {
            let sizes = inputs::list(classes)?;
            check(sizes.iter().sum())?;
            make_convex_equivalence(&sizes, !unordered)
        }
        MakeKind::Tree { k, h, flavor } => {
            let flavor = match flavor {
                FlavorArg::Stree => TreeFlavor::Stree,
                FlavorArg::Strtree => TreeFlavor::Strtree,
            };
            make_tree(&TreeSpec { branching: *k, height: *h, flavor }, limits)?.structure
        }
    })
}

/// Print to stdout; a closed pipe is not an error worth reporting.
fn emit(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{text}");
}

fn main() -> ExitCode {
    let started = Instant::now();
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: cannot start {n} workers: {e}");
            return ExitCode::from(report::EXIT_INTERNAL);
        }
    }
    let limits = cli.budgets.limits();
    if let Command::Make { kind } = &cli.command {
        return match make(kind, &limits) {
            Ok(m) => {
                emit(&m.to_json());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {}", e.message);
                ExitCode::from(e.code)
            }
        };
    }
    let mut ctx = Ctx { limits, budgets: cli.budgets.clone(), digest: Digest256::default() };
    let result = run(&cli, &mut ctx);
    let report = Report {
        command: std::env::args().collect(),
        budgets: cli.budgets.echo(),
        started,
        digest: ctx.digest,
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) if e.code == EXIT_BUDGET => Outcome::new("budget_exceeded", EXIT_BUDGET, json!({ "error": e.message })),
        Err(e) => {
            eprintln!("error: {}", e.message);
            return ExitCode::from(e.code);
        }
    };
    emit(&report.render(&outcome, cli.format));
    ExitCode::from(outcome.code)
}
