use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use treestar::count;
use treestar::forest::{self, Forest};
use treestar::inject::{self, MapOptions};
use treestar::tree::{parse_tree, RootedTree, Topology, VertexId};
use treestar::verify;
use treestar::VertexSet;

/// Exact counting, star transfers, and exhaustive verification for
/// independent-set stars in perfect r-ary trees and forests.
#[derive(Parser)]
#[command(name = "treestar", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Number of independent sets of size k containing a vertex.
    Count {
        /// Tree or forest: a file path or perfect:<r>:<h>.
        #[arg(long)]
        tree: String,
        /// Star centre (global id in a forest).
        #[arg(long)]
        vertex: VertexId,
        #[arg(long)]
        k: usize,
    },
    /// Counts of independent sets by size, optionally through one vertex.
    Profile {
        #[arg(long)]
        tree: String,
        /// Count only sets containing this vertex.
        #[arg(long)]
        vertex: Option<VertexId>,
    },
    /// Sizes of the three classes splitting the stars at v and a leaf:
    /// v-only, leaf-only, both.
    Classes {
        #[arg(long)]
        tree: String,
        #[arg(long)]
        v: VertexId,
        #[arg(long)]
        leaf: VertexId,
        #[arg(long)]
        k: usize,
    },
    /// Transfer a star member at v to the leftmost leaf.
    Map {
        /// A perfect tree: file path or perfect:<r>:<h>.
        #[arg(long)]
        tree: String,
        /// Vertex on the leftmost path whose membership moves to the leaf.
        #[arg(long)]
        v: VertexId,
        /// Input set: comma-separated vertex ids.
        #[arg(long)]
        set: String,
        /// Emit one JSON record per step before the result line.
        #[arg(long)]
        trace: bool,
        /// Skip the per-iteration invariant monitors.
        #[arg(long)]
        no_monitor: bool,
    },
    /// Alternating swap between the roots of two perfect trees. Global ids:
    /// the lower tree first, then the upper tree.
    Cas {
        /// The lower tree (odd level count): file path or perfect:<r>:<h>.
        #[arg(long)]
        td: String,
        /// The upper tree (more levels).
        #[arg(long)]
        tu: String,
        #[arg(long)]
        set: String,
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        no_monitor: bool,
    },
    /// The leaf attaining the maximum star size in a forest of perfect
    /// trees.
    BestLeaf {
        /// Forest file (blocks separated by blank lines) or perfect:<r>:<h>.
        #[arg(long)]
        forest: String,
    },
    /// Exhaustive verification sweeps. Verdicts stream to stdout as JSON
    /// records; timing goes to stderr. Exits 1 on any failed verdict.
    Verify {
        #[command(subcommand)]
        what: VerifyWhat,
    },
    /// One representative per isomorphism class of trees on n vertices,
    /// one parent array per line.
    EnumTrees {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// Vertex cap for the instance pool.
    #[arg(long)]
    n_max: Option<usize>,
    /// Largest set size to check where applicable.
    #[arg(long)]
    k_max: Option<usize>,
    /// Worker tasks for the sweep.
    #[arg(long, default_value_t = 4)]
    workers: usize,
    /// Run the per-iteration invariant monitors on every mapped set.
    #[arg(long)]
    monitor: bool,
}

#[derive(Subcommand)]
enum VerifyWhat {
    /// Map every source-family member on perfect trees and check the
    /// outputs are distinct valid target-family members.
    Injection(SweepArgs),
    /// Leaf maximality of star sizes on perfect trees.
    Main(SweepArgs),
    /// Forests: maximizing-leaf selection and the leaf-comparison maps.
    Forest(SweepArgs),
    /// Leaf maximality over all small trees, spiders, and caterpillars.
    Hk(SweepArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_tree(spec: &str) -> Result<RootedTree> {
    if spec.starts_with("perfect:") {
        return Ok(parse_tree(spec)?);
    }
    let text = fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
    Ok(parse_tree(&text)?)
}

fn load_forest(spec: &str) -> Result<Forest> {
    if spec.starts_with("perfect:") {
        return Ok(Forest::new(vec![parse_tree(spec)?])?);
    }
    let text = fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
    Ok(forest::parse_forest(&text)?)
}

fn parse_set(ids: &str, capacity: usize) -> Result<VertexSet> {
    let mut set = VertexSet::new(capacity);
    for tok in ids.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        let v: usize = tok
            .parse()
            .map_err(|_| anyhow!("malformed vertex id `{tok}`"))?;
        if v >= capacity {
            bail!("vertex {v} out of range (host has {capacity} vertices)");
        }
        set.insert(v);
    }
    Ok(set)
}

fn print_map_result(report: &inject::MapReport, trace: bool) {
    if trace {
        print!("{}", inject::trace_to_jsonl(&report.trace));
    }
    println!("{}", report.set.to_csv());
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Count { tree, vertex, k } => {
            let host = load_forest(&tree)?;
            println!("{}", forest::forest_count_star(&host, vertex, k)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Profile { tree, vertex } => {
            let host = load_forest(&tree)?;
            let profile = count::independence_profile(&host, vertex, None)?;
            let parts: Vec<String> = profile.coeffs().iter().map(|c| c.to_string()).collect();
            println!("{}", parts.join(" "));
            Ok(ExitCode::SUCCESS)
        }
        Command::Classes { tree, v, leaf, k } => {
            let host = load_forest(&tree)?;
            let cs = count::count_classes(&host, v, leaf, k)?;
            println!("{} {} {}", cs.a, cs.b, cs.c);
            Ok(ExitCode::SUCCESS)
        }
        Command::Map {
            tree,
            v,
            set,
            trace,
            no_monitor,
        } => {
            let host = load_tree(&tree)?;
            let input = parse_set(&set, host.vertex_count())?;
            let opts = MapOptions {
                trace,
                monitor: !no_monitor,
            };
            let report = inject::map_star(&host, v, &input, &opts)?;
            print_map_result(&report, trace);
            Ok(ExitCode::SUCCESS)
        }
        Command::Cas {
            td,
            tu,
            set,
            trace,
            no_monitor,
        } => {
            let lower = load_tree(&td)?;
            let upper = load_tree(&tu)?;
            let n = lower.vertex_count() + upper.vertex_count();
            let input = parse_set(&set, n)?;
            let opts = MapOptions {
                trace,
                monitor: !no_monitor,
            };
            let report = inject::cas(&lower, &upper, &input, &opts)?;
            print_map_result(&report, trace);
            Ok(ExitCode::SUCCESS)
        }
        Command::BestLeaf { forest: spec } => {
            let host = load_forest(&spec)?;
            let sel = forest::best_leaf(&host)?;
            println!("tree={} leaf={} rule={}", sel.tree_index, sel.leaf, sel.rule);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { what } => run_verify(what),
        Command::EnumTrees { n } => {
            for tree in treestar::canon::enumerate_unlabeled_trees(n)? {
                let parts: Vec<String> = tree
                    .parents()
                    .iter()
                    .map(|p| p.map_or_else(|| "-1".to_string(), |x| x.to_string()))
                    .collect();
                println!("{}", parts.join(" "));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Perfect (r, h) pool with h >= 2 and at most `n_max` vertices.
fn perfect_pool(n_max: usize) -> Vec<RootedTree> {
    let mut out = Vec::new();
    for r in 2..=8 {
        for h in 2..=8 {
            if let Ok(t) = RootedTree::perfect(r, h) {
                if t.vertex_count() <= n_max {
                    out.push(t);
                }
            }
        }
    }
    out.sort_by_key(|t| {
        let s = t.shape().unwrap();
        (t.vertex_count(), s.arity, s.levels)
    });
    out
}

/// Forests of 2 or 3 perfect components drawn from r in {2,3},
/// h in {2,3,4}, within the total vertex cap.
fn forest_pool(n_max: usize) -> Vec<Vec<(usize, usize)>> {
    let components = [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (3, 4)];
    let size = |&(r, h): &(usize, usize)| (0..h).map(|l| r.pow(l as u32)).sum::<usize>();
    let mut out = Vec::new();
    for count in 2..=3usize {
        let mut pick = vec![0usize; count];
        'odometer: loop {
            let specs: Vec<(usize, usize)> = pick.iter().map(|&i| components[i]).collect();
            if specs.iter().map(size).sum::<usize>() <= n_max {
                out.push(specs);
            }
            // multiset odometer: indices stay non-decreasing
            let mut i = count;
            loop {
                if i == 0 {
                    break 'odometer;
                }
                i -= 1;
                pick[i] += 1;
                if pick[i] < components.len() {
                    for j in i + 1..count {
                        pick[j] = pick[i];
                    }
                    break;
                }
                pick[i] = 0;
                if i == 0 {
                    break 'odometer;
                }
            }
        }
    }
    out
}

fn emit_verdicts(verdicts: Vec<verify::Verdict>) -> Result<ExitCode> {
    let mut all_passed = true;
    let mut checked = 0u64;
    let mut elapsed = std::time::Duration::ZERO;
    for v in &verdicts {
        println!("{}", v.to_json());
        eprintln!(
            "{} {}: {} instances in {:.1?}",
            v.check, v.instance, v.checked, v.elapsed
        );
        checked += v.checked;
        elapsed += v.elapsed;
        all_passed &= v.passed;
    }
    eprintln!(
        "{} verdicts, {} instances, {:.1?} work",
        verdicts.len(),
        checked,
        elapsed
    );
    Ok(if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run_verify(what: VerifyWhat) -> Result<ExitCode> {
    match what {
        VerifyWhat::Injection(args) => {
            // every source-family member gets mapped, so the pool cap keeps
            // the run desk-scale: 31 vertices is the largest that finishes
            // in minutes with bounded memory
            let n_max = args.n_max.unwrap_or(31);
            if n_max > 31 {
                eprintln!(
                    "note: injection sweeps above 31 vertices map hundreds of millions of sets"
                );
            }
            let opts = MapOptions {
                trace: false,
                monitor: args.monitor,
            };
            let mut items: Vec<(RootedTree, VertexId)> = Vec::new();
            for tree in perfect_pool(n_max) {
                let path = tree.leftmost_path(tree.root())?;
                for &v in path.iter().take(path.len() - 1) {
                    items.push((tree.clone(), v));
                }
            }
            let verdicts = verify::parallel_map(&items, args.workers, |(t, v)| {
                verify::check_injection_sweep(t, *v, &opts)
            });
            emit_verdicts(verdicts.into_iter().collect::<treestar::Result<_>>()?)
        }
        VerifyWhat::Main(args) => {
            let n_max = args.n_max.unwrap_or(40);
            let pool = perfect_pool(n_max);
            let verdicts = verify::parallel_map(&pool, args.workers, verify::check_theorem_main);
            emit_verdicts(verdicts.into_iter().collect::<treestar::Result<_>>()?)
        }
        VerifyWhat::Forest(args) => {
            let n_max = args.n_max.unwrap_or(60);
            let mut verdicts = Vec::new();
            let forests: Vec<Forest> = forest_pool(n_max)
                .iter()
                .map(|specs| {
                    Forest::new(
                        specs
                            .iter()
                            .map(|&(r, h)| RootedTree::perfect(r, h).unwrap())
                            .collect(),
                    )
                    .expect("nonempty")
                })
                .collect();
            verdicts.extend(
                verify::parallel_map(&forests, args.workers, verify::check_forest_theorem)
                    .into_iter()
                    .collect::<treestar::Result<Vec<_>>>()?,
            );
            let mut pairs = Vec::new();
            for f in &forests {
                if f.component_count() != 2 {
                    continue;
                }
                for (a, b) in [(0, 1), (1, 0)] {
                    if verify::classify_pair(f, a, b)?.is_some() {
                        pairs.push((f.clone(), a, b));
                    }
                }
            }
            verdicts.extend(
                verify::parallel_map(&pairs, args.workers, |(f, a, b)| {
                    verify::check_forest_injection(f, *a, *b)
                })
                .into_iter()
                .collect::<treestar::Result<Vec<_>>>()?,
            );
            emit_verdicts(verdicts)
        }
        VerifyWhat::Hk(args) => {
            let n_max = args.n_max.unwrap_or(10);
            let k_max = args.k_max.unwrap_or(4);
            let started = Instant::now();
            let mut reports = verify::sweep_hk_trees(n_max, k_max, args.workers)?;
            reports.extend(verify::sweep_hk_families(12, args.workers)?);
            let mut all = true;
            for r in &reports {
                println!("{}", r.to_json());
                all &= r.is_k_hk;
            }
            eprintln!("{} reports in {:.1?}", reports.len(), started.elapsed());
            Ok(if all {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}
