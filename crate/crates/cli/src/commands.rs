use std::collections::HashMap;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use anyhow::anyhow;
use bhvkit_core::link::{brute_force_automorphisms, build_link_graph, LinkReport};
use bhvkit_core::measure::{
    ball_volume, ball_volume_bounds, cone_path_length, same_orthant_distance,
};
use bhvkit_core::newick::{to_newick, LabelMap};
use bhvkit_core::topology::{
    binary_topology_count, count_refining_orthants, degree_sequence,
    enumerate_binary_refinements_capped, enumerate_binary_topologies_capped, random_face,
    DEFAULT_ENUMERATION_CAP,
};
use bhvkit_core::{
    distance_upper_bound, permutation_to_automorphism, Error, LeafCount, Permutation, Split,
    Topology, VertexMap,
};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::input::{load_label_map, load_one, load_trees};

#[derive(Parser, Debug)]
#[command(
    name = "bhvkit",
    version,
    about = "Combinatorics of phylogenetic tree space"
)]
pub struct Cli {
    /// Where to write the JSON report ("-" for stdout)
    #[arg(long, global = true, default_value = "-")]
    pub json: String,
    /// Also write a Graphviz rendering to this path
    #[arg(long, global = true)]
    pub dot: Option<PathBuf>,
    /// Maximum number of items any enumeration may produce
    #[arg(long, global = true, env = "BHVKIT_CAP", default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: u64,
    /// Seed for sampled checks
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// JSON object mapping leaf names to indices 1..n
    #[arg(long, global = true)]
    pub labels: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the link graph on n leaves and check every vertex degree
    Link { n: usize },
    /// Compute the automorphism group of the link graph (5 <= n <= 7)
    Aut { n: usize },
    /// Volume of the eps-ball around each tree
    Volume {
        /// Inline Newick / TreePoint JSON, or a file with one tree per line
        tree: String,
        #[arg(long)]
        eps: f64,
    },
    /// Number of binary topologies, or of those refining a face
    Count {
        n: usize,
        /// Face as a JSON list of split sides, e.g. [[1,2]]
        #[arg(long)]
        refine: Option<String>,
        /// Cross-check the formula by exhaustive enumeration
        #[arg(long)]
        oracle: bool,
        /// Also cross-check this many random faces (seeded by --seed)
        #[arg(long, default_value_t = 0)]
        random_faces: usize,
    },
    /// Distance bounds between two trees
    Dist { a: String, b: String },
    /// Parse trees and print them as TreePoint JSON
    Parse {
        tree: String,
        /// Print canonical Newick instead of JSON
        #[arg(long)]
        newick: bool,
    },
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

/// Exit codes: 1 general, 2 size limits, 3 epsilon too large, 4 leaf count mismatch.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::TooLarge(_)
        | Error::EnumerationTooLarge { .. }
        | Error::SearchBudgetExceeded(_)
        | Error::InvalidLeafCount(_) => 2,
        Error::EpsilonTooLarge { .. } => 3,
        Error::LeafCountMismatch(..) => 4,
        _ => 1,
    }
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        let code = err
            .chain()
            .find_map(|e| e.downcast_ref::<Error>())
            .map_or(1, exit_code);
        Failure::new(code, format!("{err:#}"))
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure::new(exit_code(&err), err.to_string())
    }
}

type CmdResult = Result<(), Failure>;

struct Output<'a> {
    target: &'a str,
    lines: Vec<String>,
}

impl<'a> Output<'a> {
    fn new(target: &'a str) -> Self {
        Output {
            target,
            lines: Vec::new(),
        }
    }

    fn json<T: Serialize>(&mut self, value: &T) {
        self.lines
            .push(serde_json::to_string(value).expect("serializable"));
    }

    fn text(&mut self, line: String) {
        self.lines.push(line);
    }

    fn flush(self) -> CmdResult {
        if self.lines.is_empty() {
            return Ok(());
        }
        let mut body = self.lines.join("\n");
        body.push('\n');
        if self.target == "-" {
            std::io::stdout()
                .write_all(body.as_bytes())
                .map_err(|e| Failure::new(1, e.to_string()))
        } else {
            fs::write(self.target, body)
                .map_err(|e| Failure::new(1, format!("{}: {e}", self.target)))
        }
    }
}

fn big_to_json(v: &num_bigint::BigUint) -> Value {
    match u64::try_from(v) {
        Ok(small) => json!(small),
        Err(_) => json!(v.to_string()),
    }
}

pub fn run(cli: &Cli) -> CmdResult {
    let labels = match &cli.labels {
        Some(path) => Some(load_label_map(path)?),
        None => None,
    };
    let mut out = Output::new(&cli.json);
    let status = match &cli.command {
        Command::Link { n } => cmd_link(cli, *n, &mut out),
        Command::Aut { n } => cmd_aut(*n, &mut out),
        Command::Volume { tree, eps } => cmd_volume(tree, *eps, labels.as_ref(), &mut out),
        Command::Count {
            n,
            refine,
            oracle,
            random_faces,
        } => cmd_count(cli, *n, refine.as_deref(), *oracle, *random_faces, &mut out),
        Command::Dist { a, b } => cmd_dist(a, b, labels.as_ref(), &mut out),
        Command::Parse { tree, newick } => cmd_parse(tree, *newick, labels.as_ref(), &mut out),
    };
    // reports are written even when a verification inside them failed
    let flushed = out.flush();
    status.and(flushed)
}

fn cmd_link(cli: &Cli, n: usize, out: &mut Output) -> CmdResult {
    let g = build_link_graph(LeafCount::new(n)?)?;
    let report = LinkReport::new(&g, None);
    if let Some(path) = &cli.dot {
        fs::write(path, g.to_dot())
            .map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))?;
    }
    out.json(&report);
    if !report.degrees_ok {
        return Err(Failure::new(
            1,
            "vertex degree does not match 2^k + 2^(n-k) - n - 4",
        ));
    }
    Ok(())
}

const AUT_N4_MESSAGE: &str = "aut requires 5 <= n <= 7. At n = 4 the link graph is three isolated \
vertices whose automorphism group has order 3! = 6, and leaf permutations act on it with a kernel \
(e.g. (1 2)(3 4) fixes every split), so there is no faithful S_4 action to check.";

#[derive(Serialize)]
struct AutReport {
    n: usize,
    vertices: usize,
    edges: usize,
    order: u64,
    n_factorial: u64,
    order_is_n_factorial: bool,
    realized: bool,
    generators: Vec<VertexMap>,
}

fn cmd_aut(n: usize, out: &mut Output) -> CmdResult {
    if n == 4 {
        return Err(Failure::new(2, AUT_N4_MESSAGE));
    }
    if !(5..=7).contains(&n) {
        return Err(Failure::new(
            2,
            format!("aut requires 5 <= n <= 7, got {n}"),
        ));
    }
    let leaves = LeafCount::new(n)?;
    let g = build_link_graph(leaves)?;
    let group = brute_force_automorphisms(&g)?;
    let n_factorial: u64 = (1..=n as u64).product();

    // how many leaf permutations induce each vertex map
    let mut preimages: HashMap<VertexMap, usize> = HashMap::new();
    for sigma in Permutation::all(leaves) {
        *preimages
            .entry(permutation_to_automorphism(&sigma, &g)?)
            .or_default() += 1;
    }
    let realized = match &group.elements {
        Some(elements) => {
            elements.len() == preimages.len()
                && elements.iter().all(|e| preimages.get(e) == Some(&1))
        }
        None => false,
    };

    let report = AutReport {
        n,
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        order: group.order,
        n_factorial,
        order_is_n_factorial: group.order == n_factorial,
        realized,
        generators: group.generators,
    };
    out.json(&report);
    if report.order_is_n_factorial && report.realized {
        Ok(())
    } else {
        Err(Failure::new(
            1,
            "automorphism group is not the leaf-permutation group",
        ))
    }
}

#[derive(Serialize)]
struct VolumeReport {
    n: usize,
    p: usize,
    degree_sequence: Vec<usize>,
    #[serde(rename = "s_F")]
    s_f: Value,
    mu: f64,
    lower: f64,
    upper: f64,
    is_binary: bool,
    is_cone_point: bool,
}

fn cmd_volume(tree: &str, eps: f64, labels: Option<&LabelMap>, out: &mut Output) -> CmdResult {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Failure::new(
            1,
            format!("--eps must be positive, got {eps}"),
        ));
    }
    for x in load_trees(tree, labels)? {
        let t = x.topology();
        let volume = ball_volume(&x, eps)?;
        let (lower, upper) = ball_volume_bounds(t.n(), t.p(), eps)?;
        out.json(&VolumeReport {
            n: t.n().get(),
            p: t.p(),
            degree_sequence: degree_sequence(t),
            s_f: big_to_json(&volume.s_f),
            mu: volume.value,
            lower,
            upper,
            is_binary: t.is_binary(),
            is_cone_point: t.is_cone_point(),
        });
    }
    Ok(())
}

fn parse_face(n: LeafCount, text: &str) -> Result<Topology, Failure> {
    let sides: Vec<Vec<usize>> = serde_json::from_str(text)
        .map_err(|e| Failure::new(1, format!("--refine expects a JSON list of lists: {e}")))?;
    let splits = sides
        .iter()
        .map(|s| Split::new(s, n))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Topology::new(splits, n)?)
}

/// Refinements built per node, checked to be distinct binary supersets.
fn refinement_oracle(face: &Topology, cap: u64) -> Result<bool, Failure> {
    let refinements = enumerate_binary_refinements_capped(face, cap)?;
    let distinct: std::collections::HashSet<&Topology> = refinements.iter().collect();
    let all_valid = refinements.iter().all(|r| {
        r.is_binary() && face.is_face_of(r) && Topology::new(r.splits().copied(), r.n()).is_ok()
    });
    Ok(all_valid
        && distinct.len() == refinements.len()
        && count_refining_orthants(face) == refinements.len().into())
}

fn cmd_count(
    cli: &Cli,
    n: usize,
    refine: Option<&str>,
    oracle: bool,
    random_faces: usize,
    out: &mut Output,
) -> CmdResult {
    let leaves = LeafCount::new(n)?;
    let face = refine.map(|text| parse_face(leaves, text)).transpose()?;
    let count = match &face {
        Some(f) => count_refining_orthants(f),
        None => binary_topology_count(leaves),
    };

    let mut report = serde_json::Map::new();
    report.insert("n".into(), json!(n));
    if let Some(f) = &face {
        report.insert(
            "refine".into(),
            json!(f.splits().map(Split::side).collect::<Vec<_>>()),
        );
    }
    report.insert("count".into(), big_to_json(&count));

    let mut ok = true;
    if oracle {
        let oracle_ok = match &face {
            Some(f) => refinement_oracle(f, cli.cap)?,
            None => {
                let all: std::collections::HashSet<Topology> =
                    enumerate_binary_topologies_capped(leaves, cli.cap)?.collect();
                all.iter().all(Topology::is_binary) && count == all.len().into()
            }
        };
        report.insert("oracle_ok".into(), json!(oracle_ok));
        ok &= oracle_ok;
    }
    if random_faces > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
        let mut sampled_ok = true;
        for _ in 0..random_faces {
            sampled_ok &= refinement_oracle(&random_face(leaves, &mut rng), cli.cap)?;
        }
        report.insert("random_faces".into(), json!(random_faces));
        report.insert("seed".into(), json!(cli.seed));
        report.insert("random_faces_ok".into(), json!(sampled_ok));
        ok &= sampled_ok;
    }
    out.json(&Value::Object(report));
    if ok {
        Ok(())
    } else {
        Err(Failure::new(
            1,
            "enumeration disagrees with the product formula",
        ))
    }
}

#[derive(Serialize)]
struct DistReport {
    same_orthant: Option<f64>,
    cone_path: f64,
    upper_bound: f64,
}

fn cmd_dist(a: &str, b: &str, labels: Option<&LabelMap>, out: &mut Output) -> CmdResult {
    let x = load_one(a, labels)?;
    let y = load_one(b, labels)?;
    out.json(&DistReport {
        same_orthant: same_orthant_distance(&x, &y)?,
        cone_path: cone_path_length(&x, &y)?,
        upper_bound: distance_upper_bound(&x, &y)?,
    });
    Ok(())
}

fn cmd_parse(tree: &str, newick: bool, labels: Option<&LabelMap>, out: &mut Output) -> CmdResult {
    let trees = load_trees(tree, labels).map_err(|e| Failure::from(e.context(anyhow!("parse"))))?;
    for x in trees {
        if newick {
            out.text(to_newick(&x));
        } else {
            out.json(&x);
        }
    }
    Ok(())
}
