//! Concrete structures and maps: chains, graphs, hypergraphs, convexly
//! ordered equivalence relations, trees, the Boolean-algebra encodings of
//! graphs and hypergraphs, and finite fragments of semi-retractions.
//!
//! Symbol names used throughout: `<` (chains), `R` (graphs, symmetric and
//! irreflexive), `H` (hypergraphs, all orderings of each edge), `E` and
//! `prec` (equivalence relations), and for trees `tri` (initial segment,
//! reflexive), `lex` (strict lexicographic order), `len` (strict length
//! preorder) or `P0..Ph` (levels), with the function `meet`.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boolalg::{AtomSetAlgebra, BoolAlgError};
use crate::limits::Limits;
use crate::semiretraction::{CrossMap, SemiRetractionError, SemiRetractionWitness};
use crate::structures::{FiniteStructure, Signature, StructureError};
use crate::tuples::{combinations, permutations};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("{what} of size {size} exceeds the bound {max}")]
    Budget { what: &'static str, size: usize, max: usize },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("sizing: {0}")]
    Sizing(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    BoolAlg(#[from] BoolAlgError),
    #[error(transparent)]
    SemiRetraction(#[from] SemiRetractionError),
}

fn no_symbols() -> Vec<(&'static str, usize)> {
    Vec::new()
}

fn check_universe(what: &'static str, size: usize, limits: &Limits) -> Result<(), ConstructionError> {
    if size > limits.max_universe {
        return Err(ConstructionError::Budget { what, size, max: limits.max_universe });
    }
    Ok(())
}

pub fn chain_signature() -> Signature {
    Signature::new([("<", 2)], no_symbols()).expect("valid")
}

pub fn graph_signature() -> Signature {
    Signature::new([("R", 2)], no_symbols()).expect("valid")
}

/// The n-element linear order `0 < 1 < .. < n-1`.
pub fn make_chain(n: usize) -> FiniteStructure {
    FiniteStructure::builder(chain_signature(), n).relation_from("<", |t| t[0] < t[1]).build().expect("valid")
}

/// `n` points in the empty signature.
pub fn make_set(n: usize) -> FiniteStructure {
    FiniteStructure::builder(Signature::empty(), n).build().expect("valid")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub m: usize,
    /// Unordered edges, normalized to `(i, j)` with `i < j`, sorted.
    pub edges: Vec<(usize, usize)>,
}

impl GraphSpec {
    pub fn new(m: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, ConstructionError> {
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i == j || i >= m || j >= m {
                return Err(ConstructionError::InvalidSpec(format!("bad edge ({i}, {j}) on {m} vertices")));
            }
            set.insert((i.min(j), i.max(j)));
        }
        Ok(GraphSpec { m, edges: set.into_iter().collect() })
    }

    pub fn complete(m: usize) -> Self {
        GraphSpec { m, edges: combinations(m, 2).into_iter().map(|p| (p[0], p[1])).collect() }
    }

    pub fn discrete(m: usize) -> Self {
        GraphSpec { m, edges: Vec::new() }
    }

    pub fn path(m: usize) -> Self {
        GraphSpec { m, edges: (1..m).map(|i| (i - 1, i)).collect() }
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.binary_search(&(i.min(j), i.max(j))).is_ok()
    }

    /// All graphs on `m` labeled vertices, one per edge subset.
    pub fn all_labeled(m: usize) -> Vec<GraphSpec> {
        let pairs = combinations(m, 2);
        (0..1usize << pairs.len())
            .map(|mask| GraphSpec {
                m,
                edges: pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| (p[0], p[1])).collect(),
            })
            .collect()
    }
}

pub fn make_graph(spec: &GraphSpec) -> FiniteStructure {
    FiniteStructure::builder(graph_signature(), spec.m)
        .relation_from("R", |t| t[0] != t[1] && spec.has_edge(t[0], t[1]))
        .build()
        .expect("valid")
}

/// Graph on `0..m` with the relation `R` and the order `<` of the labels.
pub fn make_ordered_graph(spec: &GraphSpec) -> FiniteStructure {
    let sig = Signature::new([("R", 2), ("<", 2)], no_symbols()).expect("valid");
    FiniteStructure::builder(sig, spec.m)
        .relation_from("R", |t| t[0] != t[1] && spec.has_edge(t[0], t[1]))
        .relation_from("<", |t| t[0] < t[1])
        .build()
        .expect("valid")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypergraphSpec {
    pub m: usize,
    pub n: usize,
    /// Edges as increasing n-element vectors, sorted.
    pub edges: Vec<Vec<usize>>,
}

impl HypergraphSpec {
    pub fn new(m: usize, n: usize, edges: impl IntoIterator<Item = Vec<usize>>) -> Result<Self, ConstructionError> {
        if n < 2 {
            return Err(ConstructionError::InvalidSpec(format!("uniformity {n} < 2")));
        }
        let mut set = BTreeSet::new();
        for mut e in edges {
            e.sort_unstable();
            e.dedup();
            if e.len() != n || e.iter().any(|&v| v >= m) {
                return Err(ConstructionError::InvalidSpec(format!("bad edge {e:?} for {n}-uniform on {m} vertices")));
            }
            set.insert(e);
        }
        Ok(HypergraphSpec { m, n, edges: set.into_iter().collect() })
    }

    pub fn has_edge(&self, vs: &[usize]) -> bool {
        let mut e = vs.to_vec();
        e.sort_unstable();
        self.edges.binary_search(&e).is_ok()
    }
}

/// Relation `H` holds of every ordering of every edge.
pub fn make_hypergraph(spec: &HypergraphSpec, limits: &Limits) -> Result<FiniteStructure, ConstructionError> {
    let sig = Signature::with_arity_limit([("H", spec.n)], no_symbols(), limits.max_arity)?;
    let mut b = FiniteStructure::builder(sig, spec.m);
    for e in &spec.edges {
        for p in permutations(spec.n) {
            let t: Vec<usize> = p.iter().map(|&i| e[i]).collect();
            b.tuple("H", &t);
        }
    }
    Ok(b.build()?)
}

/// Equivalence `E` with the given class sizes, elements numbered class by
/// class; with `ordered`, also the convex order `prec`:
/// `(i, j) prec (s, t)` iff `i < s` or (`i = s` and `j < t`).
pub fn make_convex_equivalence(classes: &[usize], ordered: bool) -> FiniteStructure {
    let class_of: Vec<usize> = classes.iter().enumerate().flat_map(|(i, &s)| std::iter::repeat(i).take(s)).collect();
    let n = class_of.len();
    let rels: Vec<(&str, usize)> = if ordered { vec![("E", 2), ("prec", 2)] } else { vec![("E", 2)] };
    let sig = Signature::new(rels, no_symbols()).expect("valid");
    let mut b = FiniteStructure::builder(sig, n);
    b.relation_from("E", |t| class_of[t[0]] == class_of[t[1]]);
    if ordered {
        // Elements are numbered in the convex order already.
        b.relation_from("prec", |t| t[0] < t[1]);
    }
    b.build().expect("valid")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeFlavor {
    /// Level predicates `P0..Ph`.
    Stree,
    /// Length preorder `len`.
    Strtree,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSpec {
    pub branching: usize,
    pub height: usize,
    pub flavor: TreeFlavor,
}

#[derive(Clone, Debug)]
pub struct Tree {
    pub structure: FiniteStructure,
    /// Node `i` is the sequence `nodes[i]`; nodes are listed by length, then
    /// lexicographically.
    pub nodes: Vec<Vec<usize>>,
}

impl Tree {
    pub fn index_of(&self, seq: &[usize]) -> Option<usize> {
        self.nodes.iter().position(|s| s == seq)
    }
}

fn common_prefix(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// `η <_lex ν`: `η` is a proper initial segment of `ν`, or they differ at
/// position `|η ∧ ν|` with `η` smaller there.
pub fn lex_less(a: &[usize], b: &[usize]) -> bool {
    let p = common_prefix(a, b);
    if p == a.len() {
        return p < b.len();
    }
    p < b.len() && a[p] < b[p]
}

pub fn tree_node_count(branching: usize, height: usize) -> usize {
    (0..=height).map(|i| branching.saturating_pow(i as u32)).fold(0, usize::saturating_add)
}

/// All sequences over `0..k` of length at most `h`.
pub fn make_tree(spec: &TreeSpec, limits: &Limits) -> Result<Tree, ConstructionError> {
    let (k, h) = (spec.branching, spec.height);
    if k == 0 {
        return Err(ConstructionError::InvalidSpec("branching must be positive".into()));
    }
    check_universe("tree", tree_node_count(k, h), limits)?;
    let mut nodes: Vec<Vec<usize>> = vec![Vec::new()];
    let mut level = vec![Vec::new()];
    for _ in 0..h {
        let next: Vec<Vec<usize>> = level
            .iter()
            .flat_map(|s: &Vec<usize>| {
                (0..k).map(move |x| {
                    let mut t = s.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
        nodes.extend(next.iter().cloned());
        level = next;
    }
    let mut rels: Vec<(String, usize)> = vec![("tri".into(), 2), ("lex".into(), 2)];
    match spec.flavor {
        TreeFlavor::Strtree => rels.push(("len".into(), 2)),
        TreeFlavor::Stree => rels.extend((0..=h).map(|i| (format!("P{i}"), 1))),
    }
    let sig = Signature::new(rels, [("meet".to_string(), 2)])?;
    let mut b = FiniteStructure::builder(sig, nodes.len());
    b.relation_from("tri", |t| nodes[t[1]].starts_with(&nodes[t[0]]))
        .relation_from("lex", |t| lex_less(&nodes[t[0]], &nodes[t[1]]));
    match spec.flavor {
        TreeFlavor::Strtree => {
            b.relation_from("len", |t| nodes[t[0]].len() < nodes[t[1]].len());
        }
        TreeFlavor::Stree => {
            for i in 0..=h {
                b.relation_from(&format!("P{i}"), |t| nodes[t[0]].len() == i);
            }
        }
    }
    b.function_from("meet", |t| {
        let p = common_prefix(&nodes[t[0]], &nodes[t[1]]);
        nodes.iter().position(|s| s[..] == nodes[t[0]][..p]).expect("prefixes are nodes")
    });
    Ok(Tree { structure: b.build()?, nodes })
}

/// The semi-retraction between a convexly ordered equivalence relation and
/// a strong tree: `c` classes of size `s`, tree branching `s + 1` and the
/// given height (at least `2c - 1`). Class `i` goes order-preservingly onto
/// the successors `η_i⌢(j + 1)` of `η_i = 0^{2i}`; `f` sends level `i` of the
/// tree, in lexicographic order, onto class `i` of a convex equivalence
/// relation whose class sizes are the level widths.
pub fn treeprop_maps(
    c: usize,
    s: usize,
    height: Option<usize>,
    limits: &Limits,
) -> Result<SemiRetractionWitness, ConstructionError> {
    if c == 0 || s == 0 {
        return Err(ConstructionError::InvalidSpec("need at least one class of at least one element".into()));
    }
    let need = 2 * c - 1;
    let h = height.unwrap_or(need);
    if h < need {
        return Err(ConstructionError::Sizing(format!("{c} classes need tree height at least {need}, got {h}")));
    }
    let k = s + 1;
    let nodes = tree_node_count(k, h);
    if nodes > limits.max_universe {
        return Err(ConstructionError::Sizing(format!(
            "tree with branching {k} and height {h} has {nodes} nodes, above the universe bound {}",
            limits.max_universe
        )));
    }
    let tree = make_tree(&TreeSpec { branching: k, height: h, flavor: TreeFlavor::Strtree }, limits)?;
    let a_frag = make_convex_equivalence(&vec![s; c], true);
    let widths: Vec<usize> = (0..=h).map(|i| k.pow(i as u32)).collect();
    let a_host = make_convex_equivalence(&widths, true);
    let g: Vec<usize> = (0..c)
        .flat_map(|i| (0..s).map(move |j| (i, j)))
        .map(|(i, j)| {
            let mut seq = vec![0; 2 * i];
            seq.push(j + 1);
            tree.index_of(&seq).expect("node inside the fragment")
        })
        .collect();
    // Nodes are listed level by level in lexicographic order, exactly like the
    // host's elements class by class, so f is the identity on labels.
    let f: Vec<usize> = (0..tree.nodes.len()).collect();
    Ok(SemiRetractionWitness::new(Arc::new(a_frag), Arc::new(tree.structure), Arc::new(a_host), g, f, 4)?)
}

/// The encoding of a graph into a finite Boolean algebra.
#[derive(Clone, Debug)]
pub struct GraphEncoding {
    pub algebra: AtomSetAlgebra,
    /// `g(v_n)` as an atom set.
    pub g: Vec<u64>,
}

/// Atoms `β_n` (named `b{n}`) for every vertex, then `β_i^n` (named
/// `b{i}^{n}`) for every edge `i < n`. `g(v_n)` is `β_n` joined with every
/// edge atom at `n`.
pub fn encode_graph_to_ba(spec: &GraphSpec) -> Result<GraphEncoding, ConstructionError> {
    let mut names: Vec<String> = (0..spec.m).map(|n| format!("b{n}")).collect();
    names.extend(spec.edges.iter().map(|&(i, n)| format!("b{i}^{n}")));
    let algebra = AtomSetAlgebra::new(names)?;
    let g = (0..spec.m)
        .map(|v| {
            let own = 1u64 << v;
            spec.edges
                .iter()
                .enumerate()
                .filter(|(_, &(i, n))| i == v || n == v)
                .fold(own, |acc, (e, _)| acc | 1 << (spec.m + e))
        })
        .collect();
    Ok(GraphEncoding { algebra, g })
}

/// `(x, y) ∈ R` iff `x ≠ y` and `x ∧ y ≠ 0`.
pub fn ba_graph_relation(x: u64, y: u64) -> bool {
    x != y && x & y != 0
}

/// The graph `(B, R)` on the elements of an exported algebra.
pub fn ba_graph(algebra: &AtomSetAlgebra, limits: &Limits) -> Result<FiniteStructure, ConstructionError> {
    let n = algebra.export_structure(limits)?.size();
    Ok(FiniteStructure::builder(graph_signature(), n)
        .relation_from("R", |t| ba_graph_relation(t[0] as u64, t[1] as u64))
        .build()?)
}

/// The graph-into-algebra semi-retraction at fragment scale: `g` is the
/// encoding, `f` the identity from the exported algebra onto its `R`-graph.
pub fn graph_ba_witness(spec: &GraphSpec, depth: usize, limits: &Limits) -> Result<SemiRetractionWitness, ConstructionError> {
    let enc = encode_graph_to_ba(spec)?;
    let b_frag = enc.algebra.export_structure(limits)?;
    let a_host = ba_graph(&enc.algebra, limits)?;
    let f: Vec<usize> = (0..b_frag.size()).collect();
    let g: Vec<usize> = enc.g.iter().map(|&x| x as usize).collect();
    Ok(SemiRetractionWitness::new(Arc::new(make_graph(spec)), Arc::new(b_frag), Arc::new(a_host), g, f, depth)?)
}

#[derive(Clone, Debug)]
pub struct HypergraphEncoding {
    pub algebra: AtomSetAlgebra,
    pub g: Vec<u64>,
    /// Atom `a` is the increasing index tuple `atoms[a]`.
    pub atoms: Vec<Vec<usize>>,
}

/// Atoms are the increasing `n`-tuples over the indices `0..m + n`; indices
/// `m..m + n` are padding that no vertex uses, so every increasing tuple of
/// fewer than `n` vertices has at least two extensions. `b_ī` is the join of
/// the atoms extending `ī`, and `g(v_l)` joins `b_ī` over increasing vertex
/// tuples `ī` ending at `l` of length `< n`, and `β_ī` over edges ending at `l`.
pub fn encode_hypergraph_to_ba(spec: &HypergraphSpec) -> Result<HypergraphEncoding, ConstructionError> {
    let (m, n) = (spec.m, spec.n);
    if n < 2 {
        return Err(ConstructionError::InvalidSpec("uniformity must be at least 2".into()));
    }
    let atoms = combinations(m + n, n);
    if atoms.len() > crate::boolalg::MAX_ATOMS {
        return Err(ConstructionError::Budget { what: "hypergraph atom set", size: atoms.len(), max: crate::boolalg::MAX_ATOMS });
    }
    let names: Vec<String> =
        atoms.iter().map(|t| format!("b{}", t.iter().map(usize::to_string).collect::<Vec<_>>().join("."))).collect();
    let algebra = AtomSetAlgebra::new(names)?;
    let g = (0..m)
        .map(|l| {
            atoms.iter().enumerate().fold(0u64, |acc, (a, t)| {
                // Prefixes of t ending at l, all of whose entries are vertices.
                let hit = (1..=n).any(|len| {
                    let p = &t[..len];
                    p[len - 1] == l && p.iter().all(|&v| v < m) && (len < n || spec.has_edge(p))
                });
                if hit {
                    acc | 1 << a
                } else {
                    acc
                }
            })
        })
        .collect();
    Ok(HypergraphEncoding { algebra, g, atoms })
}

/// Linear order into ordered complete graph and back: `a_frag` is the
/// `n`-chain, `b_frag` the complete graph on `0..n` ordered by labels, both
/// maps the identity on labels.
pub fn ordered_graph_indiscernible_fragment(n: usize, limits: &Limits) -> Result<SemiRetractionWitness, ConstructionError> {
    check_universe("ordered graph", n, limits)?;
    let a = Arc::new(make_chain(n));
    let b = Arc::new(make_ordered_graph(&GraphSpec::complete(n)));
    let id: Vec<usize> = (0..n).collect();
    Ok(SemiRetractionWitness::closed(a, b, id.clone(), id, 4)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interdefinable {
    /// `({0..n}, p)` with `p(0) = 0`, against the same with successor as a
    /// relation `S`.
    Pred,
    /// `({0..n}, S)` with successor as a relation, against the same with the
    /// predecessor relation `P` added.
    SuccReduct,
}

/// `({0..n}, p)`; with `fixed_zero` the predecessor of `0` is `0`, otherwise
/// it wraps around to `n` (the fragment must stay total).
pub fn make_pred(n: usize, fixed_zero: bool) -> FiniteStructure {
    let sig = Signature::new(no_symbols(), [("p", 1)]).expect("valid");
    FiniteStructure::builder(sig, n + 1)
        .function_from("p", |t| match t[0] {
            0 if fixed_zero => 0,
            0 => n,
            x => x - 1,
        })
        .build()
        .expect("valid")
}

pub fn interdefinability_fragments(kind: Interdefinable, n: usize, limits: &Limits) -> Result<SemiRetractionWitness, ConstructionError> {
    check_universe("fragment", n + 1, limits)?;
    let id: Vec<usize> = (0..=n).collect();
    let (a, b) = match kind {
        Interdefinable::Pred => {
            let a = make_pred(n, true);
            let sig = Signature::new([("S", 2)], [("p", 1)])?;
            let b = FiniteStructure::builder(sig, n + 1)
                .relation_from("S", |t| t[1] == t[0] + 1)
                .function_from("p", |t| t[0].saturating_sub(1))
                .build()?;
            (a, b)
        }
        Interdefinable::SuccReduct => {
            let a = FiniteStructure::builder(Signature::new([("S", 2)], no_symbols())?, n + 1)
                .relation_from("S", |t| t[1] == t[0] + 1)
                .build()?;
            let b = FiniteStructure::builder(Signature::new([("S", 2), ("P", 2)], no_symbols())?, n + 1)
                .relation_from("S", |t| t[1] == t[0] + 1)
                .relation_from("P", |t| t[0] == t[1] + 1)
                .build()?;
            (a, b)
        }
    };
    Ok(SemiRetractionWitness::closed(Arc::new(a), Arc::new(b), id.clone(), id, 4)?)
}

/// Two successor paths of length `n` mapped onto one path of length `2n`
/// by interleaving: the first path onto the even points, the second onto
/// the odd ones. Successor is the relation `S`.
pub fn interleaving_map(n: usize) -> Result<CrossMap, ConstructionError> {
    let sig = Signature::new([("S", 2)], no_symbols())?;
    let two = FiniteStructure::builder(sig.clone(), 2 * n)
        .relation_from("S", |t| t[1] == t[0] + 1 && t[1] % n != 0)
        .build()?;
    let one = FiniteStructure::builder(sig, 2 * n).relation_from("S", |t| t[1] == t[0] + 1).build()?;
    let map = (0..2 * n).map(|x| if x < n { 2 * x } else { 2 * (x - n) + 1 }).collect();
    Ok(CrossMap::new(Arc::new(two), Arc::new(one), map)?)
}
