//! Graph of matched summaries: connected components, size capping through
//! repeated global minimum cuts, and induced pairs inside each component.

pub mod mincut;

use std::collections::{BTreeMap, HashMap, HashSet};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aligner::{MatchedPair, PairKind, DEFAULT_TAU};
use crate::corpus_io::LangCode;
use crate::embedding_store::EmbeddingStore;
use crate::error::{Error, Result};
use crate::union_find::DisjointSet;

pub use mincut::{stoer_wagner, MinCut};

pub const DEFAULT_MAX_COMPONENT: usize = 50;
pub const DEFAULT_TAU_PRIME_DELTA: f32 = 0.10;

pub type ComponentId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapConfig {
    pub max_component_size: usize,
    pub tau: f32,
    pub tau_prime: f32,
}

impl Default for CapConfig {
    fn default() -> Self {
        CapConfig::from_tau(DEFAULT_TAU, DEFAULT_TAU_PRIME_DELTA, DEFAULT_MAX_COMPONENT)
    }
}

impl CapConfig {
    pub fn from_tau(tau: f32, delta: f32, max_component_size: usize) -> Self {
        CapConfig {
            max_component_size,
            tau,
            tau_prime: tau - delta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_component_size < 2 {
            return Err(Error::Config(format!(
                "max_component_size must be at least 2, got {}",
                self.max_component_size
            )));
        }
        if !(self.tau_prime > 0.0 && self.tau_prime < self.tau) {
            return Err(Error::Config(format!(
                "tau_prime must lie in (0, tau), got {}",
                self.tau_prime
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexRef {
    pub id: String,
    pub lang: LangCode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovedEdge {
    pub a_id: String,
    pub b_id: String,
    pub similarity: f32,
}

/// One line of the components manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub component_id: ComponentId,
    pub vertices: Vec<VertexRef>,
    pub removed_edges: Vec<RemovedEdge>,
}

#[derive(Debug, Clone)]
struct Edge {
    u: usize,
    v: usize,
    pair: MatchedPair,
}

/// Weighted undirected graph of direct pairs. Vertices are sorted by id and
/// components are ordered by their smallest vertex.
#[derive(Debug, Clone)]
pub struct ComponentGraph {
    vertices: Vec<VertexRef>,
    edges: Vec<Edge>,
    removed: Vec<RemovedEdge>,
    components: Vec<Vec<usize>>,
    component_of: Vec<ComponentId>,
}

/// A pair annotated with the component it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentPair {
    pub pair: MatchedPair,
    pub component_id: ComponentId,
}

impl ComponentGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[VertexRef] {
        &self.vertices
    }

    /// Components as lists of vertex ids.
    pub fn components(&self) -> Vec<Vec<&str>> {
        self.components
            .iter()
            .map(|c| c.iter().map(|&v| self.vertices[v].id.as_str()).collect())
            .collect()
    }

    pub fn component_sizes(&self) -> Vec<usize> {
        self.components.iter().map(Vec::len).collect()
    }

    pub fn component_of(&self, id: &str) -> Option<ComponentId> {
        self.vertex_index(id).map(|v| self.component_of[v])
    }

    pub fn removed_edges(&self) -> &[RemovedEdge] {
        &self.removed
    }

    /// Direct pairs still present in the graph, canonical file order.
    pub fn direct_pairs(&self) -> Vec<MatchedPair> {
        let mut out: Vec<MatchedPair> = self.edges.iter().map(|e| e.pair.clone()).collect();
        crate::corpus_io::sort_pairs(&mut out);
        out
    }

    fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.binary_search_by(|v| v.id.as_str().cmp(id)).ok()
    }

    fn recompute_components(&mut self) {
        let mut ds = DisjointSet::new(self.vertices.len());
        for e in &self.edges {
            ds.union(e.u, e.v);
        }
        self.components = ds.groups();
        self.component_of = vec![0; self.vertices.len()];
        for (c, members) in self.components.iter().enumerate() {
            for &v in members {
                self.component_of[v] = c;
            }
        }
    }

    /// Manifest records; each removed edge is listed under the component of
    /// its `a` endpoint.
    pub fn component_records(&self) -> Vec<ComponentRecord> {
        let mut removed_by_comp: BTreeMap<ComponentId, Vec<RemovedEdge>> = BTreeMap::new();
        for r in &self.removed {
            if let Some(c) = self.component_of(&r.a_id) {
                removed_by_comp.entry(c).or_default().push(r.clone());
            }
        }
        self.components
            .iter()
            .enumerate()
            .map(|(c, members)| ComponentRecord {
                component_id: c,
                vertices: members.iter().map(|&v| self.vertices[v].clone()).collect(),
                removed_edges: removed_by_comp.remove(&c).unwrap_or_default(),
            })
            .collect()
    }
}

/// One vertex per distinct summary, one edge per direct pair.
pub fn build_graph(direct_pairs: &[MatchedPair]) -> Result<ComponentGraph> {
    let mut langs: BTreeMap<&str, &LangCode> = BTreeMap::new();
    for p in direct_pairs {
        if p.a_id == p.b_id {
            return Err(Error::Invalid(format!("self-loop on {:?}", p.a_id)));
        }
        for (id, lang) in [(&p.a_id, &p.lang_a), (&p.b_id, &p.lang_b)] {
            if let Some(prev) = langs.insert(id, lang) {
                if prev != lang {
                    return Err(Error::Invalid(format!(
                        "summary {id:?} appears with languages {prev} and {lang}"
                    )));
                }
            }
        }
    }
    let vertices: Vec<VertexRef> = langs
        .into_iter()
        .map(|(id, lang)| VertexRef {
            id: id.to_string(),
            lang: lang.clone(),
        })
        .collect();
    let index: HashMap<&str, usize> = vertices.iter().enumerate().map(|(i, v)| (v.id.as_str(), i)).collect();
    let mut seen = HashSet::new();
    let mut edges = Vec::with_capacity(direct_pairs.len());
    for p in direct_pairs {
        let (x, y) = (index[p.a_id.as_str()], index[p.b_id.as_str()]);
        let (u, v) = (x.min(y), x.max(y));
        if !seen.insert((u, v)) {
            return Err(Error::DuplicateEdge(p.a_id.clone(), p.b_id.clone()));
        }
        edges.push(Edge { u, v, pair: p.clone() });
    }
    let mut g = ComponentGraph {
        vertices,
        edges,
        removed: Vec::new(),
        components: Vec::new(),
        component_of: Vec::new(),
    };
    g.recompute_components();
    Ok(g)
}

/// Edge indices to drop so that `members` splits into pieces no larger than
/// `cap`, by repeatedly severing the global minimum cut of oversize pieces.
fn split_component(g: &ComponentGraph, members: &[usize], incident: &[usize], cap: usize) -> Vec<usize> {
    let mut removed = Vec::new();
    let mut dropped: HashSet<usize> = HashSet::new();
    let mut work: Vec<Vec<usize>> = vec![members.to_vec()];
    while let Some(piece) = work.pop() {
        if piece.len() <= cap {
            continue;
        }
        let local: HashMap<usize, usize> = piece.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let piece_edges: Vec<usize> = incident
            .iter()
            .copied()
            .filter(|e| !dropped.contains(e))
            .filter(|&e| local.contains_key(&g.edges[e].u) && local.contains_key(&g.edges[e].v))
            .collect();
        let weighted: Vec<(usize, usize, f64)> = piece_edges
            .iter()
            .map(|&e| {
                let edge = &g.edges[e];
                (local[&edge.u], local[&edge.v], f64::from(edge.pair.similarity))
            })
            .collect();
        let cut = stoer_wagner(piece.len(), &weighted).expect("oversize piece has >= 2 vertices");
        let mut on_side = vec![false; piece.len()];
        for &v in &cut.side {
            on_side[v] = true;
        }
        let mut ds = DisjointSet::new(piece.len());
        for (&e, &(lu, lv, _)) in piece_edges.iter().zip(&weighted) {
            if on_side[lu] != on_side[lv] {
                dropped.insert(e);
                removed.push(e);
            } else {
                ds.union(lu, lv);
            }
        }
        for group in ds.groups().into_iter().rev() {
            work.push(group.into_iter().map(|l| piece[l]).collect());
        }
    }
    removed.sort_unstable();
    removed
}

/// Splits every component larger than `cfg.max_component_size`.
pub fn cap_components(mut g: ComponentGraph, cfg: &CapConfig) -> Result<ComponentGraph> {
    cfg.validate()?;
    let cap = cfg.max_component_size;
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); g.components.len()];
    for (e, edge) in g.edges.iter().enumerate() {
        incident[g.component_of[edge.u]].push(e);
    }
    let oversize: Vec<usize> = (0..g.components.len())
        .filter(|&c| g.components[c].len() > cap)
        .collect();
    if oversize.is_empty() {
        return Ok(g);
    }
    let removed: Vec<usize> = oversize
        .par_iter()
        .map(|&c| split_component(&g, &g.components[c], &incident[c], cap))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let removed: HashSet<usize> = removed.into_iter().collect();
    let mut total = 0.0f64;
    let mut kept = Vec::with_capacity(g.edges.len() - removed.len());
    let mut log = Vec::with_capacity(removed.len());
    for (e, edge) in std::mem::take(&mut g.edges).into_iter().enumerate() {
        if removed.contains(&e) {
            total += f64::from(edge.pair.similarity);
            log.push(RemovedEdge {
                a_id: edge.pair.a_id,
                b_id: edge.pair.b_id,
                similarity: edge.pair.similarity,
            });
        } else {
            kept.push(edge);
        }
    }
    info!(
        "capped {} oversize component(s): removed {} edge(s), total weight {:.6}",
        oversize.len(),
        log.len(),
        total
    );
    g.edges = kept;
    g.removed.extend(log);
    g.removed.sort_by(|x, y| (&x.a_id, &x.b_id).cmp(&(&y.a_id, &y.b_id)));
    g.recompute_components();
    Ok(g)
}

/// Mutual nearest neighbors inside a component that lack a direct edge and
/// score in `[tau_prime, tau)`.
pub fn induced_pairs(g: &ComponentGraph, store: &EmbeddingStore, cfg: &CapConfig) -> Result<Vec<MatchedPair>> {
    for v in &g.vertices {
        if !store.contains(&v.id) {
            return Err(Error::UnknownId(v.id.clone()));
        }
    }
    let direct: HashSet<(usize, usize)> = g.edges.iter().map(|e| (e.u, e.v)).collect();
    let per_component: Vec<Vec<MatchedPair>> = g
        .components
        .par_iter()
        .map(|members| -> Result<Vec<MatchedPair>> {
            let langs: Vec<&LangCode> = {
                let mut l: Vec<&LangCode> = members.iter().map(|&v| &g.vertices[v].lang).collect();
                l.sort();
                l.dedup();
                l
            };
            if langs.len() < 2 {
                return Ok(Vec::new());
            }
            let mut nn: HashMap<(usize, &LangCode), Option<(String, f32)>> = HashMap::new();
            for &u in members {
                for &l in &langs {
                    if *l != g.vertices[u].lang {
                        let hit = store
                            .nearest_in_language(&g.vertices[u].id, l)?
                            .map(|n| (n.neighbor_id, n.similarity));
                        nn.insert((u, l), hit);
                    }
                }
            }
            let mut out = Vec::new();
            for &u in members {
                let lu = &g.vertices[u].lang;
                for &l in &langs {
                    if l <= lu {
                        continue;
                    }
                    let Some((ref w_id, sim)) = nn[&(u, l)] else { continue };
                    let Some(w) = g.vertex_index(w_id) else { continue };
                    if g.component_of[w] != g.component_of[u] {
                        continue;
                    }
                    let back = nn[&(w, lu)].as_ref().map(|(id, _)| id.as_str());
                    if back != Some(g.vertices[u].id.as_str()) {
                        continue;
                    }
                    if direct.contains(&(u.min(w), u.max(w))) {
                        continue;
                    }
                    if sim >= cfg.tau_prime && sim < cfg.tau {
                        out.push(MatchedPair::oriented(
                            g.vertices[u].id.clone(),
                            lu.clone(),
                            w_id.clone(),
                            l.clone(),
                            sim,
                            PairKind::Induced,
                        ));
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<MatchedPair> = per_component.into_iter().flatten().collect();
    crate::corpus_io::sort_pairs(&mut out);
    Ok(out)
}

/// Disjoint union of the graph's direct pairs and the induced pairs, each
/// tagged with its component id.
pub fn finalize_pairs(g: &ComponentGraph, induced: &[MatchedPair]) -> Result<Vec<ComponentPair>> {
    let direct = g.direct_pairs();
    let direct_keys: HashSet<(&str, &str)> = direct.iter().map(MatchedPair::key).collect();
    let mut out = Vec::with_capacity(direct.len() + induced.len());
    for p in induced {
        if direct_keys.contains(&p.key()) {
            return Err(Error::PairOverlap(p.a_id.clone(), p.b_id.clone()));
        }
    }
    for p in direct.iter().chain(induced) {
        let ca = g.component_of(&p.a_id);
        let cb = g.component_of(&p.b_id);
        match (ca, cb) {
            (Some(a), Some(b)) if a == b => out.push(ComponentPair {
                pair: p.clone(),
                component_id: a,
            }),
            _ => {
                return Err(Error::Invalid(format!(
                    "pair ({}, {}) does not lie inside one component",
                    p.a_id, p.b_id
                )))
            }
        }
    }
    out.sort_by(|x, y| {
        let (p, q) = (&x.pair, &y.pair);
        (&p.lang_a, &p.lang_b, &p.a_id, &p.b_id).cmp(&(&q.lang_a, &q.lang_b, &q.a_id, &q.b_id))
    });
    Ok(out)
}

/// Rebuilds `ComponentPair`s from a pairs file and a components manifest.
pub fn attach_components(pairs: Vec<MatchedPair>, components: &[ComponentRecord]) -> Result<Vec<ComponentPair>> {
    let mut of: HashMap<&str, ComponentId> = HashMap::new();
    for c in components {
        for v in &c.vertices {
            of.insert(v.id.as_str(), c.component_id);
        }
    }
    pairs
        .into_iter()
        .map(|pair| {
            let ca = of.get(pair.a_id.as_str()).copied();
            let cb = of.get(pair.b_id.as_str()).copied();
            match (ca, cb) {
                (Some(a), Some(b)) if a == b => Ok(ComponentPair { pair, component_id: a }),
                _ => Err(Error::Invalid(format!(
                    "pair ({}, {}) is not inside a single listed component",
                    pair.a_id, pair.b_id
                ))),
            }
        })
        .collect()
}
