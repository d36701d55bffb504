//! Built-in names and document files accepted wherever a structure, witness
//! or family is expected.

use sramsey::boolalg::AtomSetAlgebra;
use sramsey::constructions::{
    graph_ba_witness, interdefinability_fragments, make_chain, make_graph, make_ordered_graph, make_pred, make_set,
    make_tree, ordered_graph_indiscernible_fragment, treeprop_maps, GraphSpec, Interdefinable, TreeFlavor, TreeSpec,
};
use sramsey::indiscernibles::{noorder_family, FamilyDoc, IndexedFamily};
use sramsey::semiretraction::{SemiRetractionWitness, WitnessDoc};
use sramsey::structures::StructureDoc;
use sramsey::{FiniteStructure, Limits};

use crate::report::CliError;

pub const STRUCTURE_BUILTINS: &str =
    "chainN, kN (complete graph), emptyN (edgeless graph), pathN, setN, ordkN (ordered complete graph), baK, predN, treeKxH";
pub const WITNESS_BUILTINS: &str = "treeprop_cCsS, ordgraphN, predN, succN, graphba_pathM, graphba_kM, graphba_emptyM";
pub const FAMILY_BUILTINS: &str = "noorderN";

/// `name` followed by a decimal number.
fn numbered(s: &str, name: &str) -> Option<usize> {
    s.strip_prefix(name).filter(|r| !r.is_empty() && r.bytes().all(|b| b.is_ascii_digit()))?.parse().ok()
}

fn read(path: &str, what: &str, builtins: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| {
        CliError::malformed(format!("cannot read {what} `{path}` ({e}); built-ins are {builtins}"))
    })
}

fn builtin_structure(s: &str, limits: &Limits) -> Result<Option<FiniteStructure>, CliError> {
    let too_big = |n: usize| n > limits.max_universe;
    let m = if let Some(n) = numbered(s, "chain") {
        (!too_big(n)).then(|| make_chain(n))
    } else if let Some(n) = numbered(s, "ordk") {
        (!too_big(n)).then(|| make_ordered_graph(&GraphSpec::complete(n)))
    } else if let Some(n) = numbered(s, "k") {
        (!too_big(n)).then(|| make_graph(&GraphSpec::complete(n)))
    } else if let Some(n) = numbered(s, "empty") {
        (!too_big(n)).then(|| make_graph(&GraphSpec::discrete(n)))
    } else if let Some(n) = numbered(s, "path") {
        (!too_big(n)).then(|| make_graph(&GraphSpec::path(n)))
    } else if let Some(n) = numbered(s, "set") {
        (!too_big(n)).then(|| make_set(n))
    } else if let Some(n) = numbered(s, "pred") {
        (!too_big(n + 1)).then(|| make_pred(n, true))
    } else if let Some(k) = numbered(s, "ba") {
        return Ok(Some(AtomSetAlgebra::with_atoms(k)?.export_structure(limits)?));
    } else if let Some((k, h)) = s.strip_prefix("tree").and_then(|r| r.split_once('x')) {
        let (Ok(k), Ok(h)) = (k.parse(), h.parse()) else { return Ok(None) };
        return Ok(Some(make_tree(&TreeSpec { branching: k, height: h, flavor: TreeFlavor::Strtree }, limits)?.structure));
    } else {
        return Ok(None);
    };
    m.map(Some).ok_or_else(|| CliError {
        code: crate::report::EXIT_BUDGET,
        message: format!("`{s}` exceeds the universe bound {}", limits.max_universe),
    })
}

pub fn structure(s: &str, limits: &Limits) -> Result<FiniteStructure, CliError> {
    if let Some(m) = builtin_structure(s, limits)? {
        return Ok(m);
    }
    let text = read(s, "structure", STRUCTURE_BUILTINS)?;
    StructureDoc::parse(&text).map_err(|e| CliError::malformed(format!("{s}: {e}")))
}

pub fn witness(s: &str, limits: &Limits) -> Result<SemiRetractionWitness, CliError> {
    if let Some(rest) = s.strip_prefix("treeprop_c") {
        if let Some((c, sz)) = rest.split_once('s') {
            if let (Ok(c), Ok(sz)) = (c.parse(), sz.parse()) {
                return Ok(treeprop_maps(c, sz, None, limits)?);
            }
        }
    }
    if let Some(n) = numbered(s, "ordgraph") {
        return Ok(ordered_graph_indiscernible_fragment(n, limits)?);
    }
    if let Some(n) = numbered(s, "pred") {
        return Ok(interdefinability_fragments(Interdefinable::Pred, n, limits)?);
    }
    if let Some(n) = numbered(s, "succ") {
        return Ok(interdefinability_fragments(Interdefinable::SuccReduct, n, limits)?);
    }
    for (prefix, make) in [
        ("graphba_path", GraphSpec::path as fn(usize) -> GraphSpec),
        ("graphba_k", GraphSpec::complete),
        ("graphba_empty", GraphSpec::discrete),
    ] {
        if let Some(m) = numbered(s, prefix) {
            return Ok(graph_ba_witness(&make(m), 4, limits)?);
        }
    }
    let text = read(s, "witness", WITNESS_BUILTINS)?;
    let doc: WitnessDoc = serde_json::from_str(&text).map_err(|e| CliError::malformed(format!("{s}: {e}")))?;
    Ok(doc.to_witness()?)
}

pub fn family(s: &str) -> Result<IndexedFamily, CliError> {
    if let Some(n) = numbered(s, "noorder") {
        return Ok(noorder_family(n));
    }
    let text = read(s, "family", FAMILY_BUILTINS)?;
    let doc: FamilyDoc = serde_json::from_str(&text).map_err(|e| CliError::malformed(format!("{s}: {e}")))?;
    Ok(doc.to_family()?)
}

/// `0,1,2` (empty string for the empty list).
pub fn list(s: &str) -> Result<Vec<usize>, CliError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| CliError::malformed(format!("`{x}` in `{s}` is not an element"))))
        .collect()
}

/// `0-1,1-2` (or `0-1-2,...` for hyperedges).
pub fn edges(s: &str) -> Result<Vec<Vec<usize>>, CliError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|e| {
            e.split('-')
                .map(|x| x.trim().parse().map_err(|_| CliError::malformed(format!("bad edge `{e}`"))))
                .collect()
        })
        .collect()
}

pub fn graph_spec(m: usize, s: &str) -> Result<GraphSpec, CliError> {
    let mut pairs = Vec::new();
    for e in edges(s)? {
        let [a, b] = e[..] else { return Err(CliError::malformed(format!("graph edge {e:?} needs two ends"))) };
        pairs.push((a, b));
    }
    Ok(GraphSpec::new(m, pairs)?)
}
