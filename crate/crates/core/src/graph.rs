//! Provenance-aware dynamic undirected graph.
//!
//! Nodes arrive and depart over time; every edge carries the mechanism that
//! created it. Three views of the adjacency are kept in lockstep:
//!
//! - per-node neighbor lists with provenance and creation time,
//! - a bit matrix over all edges (`full`),
//! - a bit matrix over non-algorithmic edges (`organic`).
//!
//! The bit matrices answer distance-2 queries with word-parallel ORs, and
//! per-node triangle counts are updated on every edge insertion and removal
//! so that clustering coefficients are O(1) lookups.
//!
//! Every mutation is appended to a ledger; [`Graph::replay`] rebuilds an
//! identical graph from it.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bits::{self, BitMatrix};
use crate::error::{Error, Result};

/// Node identifier. Ids are handed out sequentially and never reused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Mechanism that created an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Initial,
    Stranger,
    FriendUnmediated,
    /// Meeting-friends edge whose target was only reachable through an
    /// algorithmic edge when it formed.
    FriendMediated,
    Algorithmic,
}

impl Provenance {
    pub const ALL: [Provenance; 5] = [
        Provenance::Initial,
        Provenance::Stranger,
        Provenance::FriendUnmediated,
        Provenance::FriendMediated,
        Provenance::Algorithmic,
    ];

    pub fn is_algorithmic(self) -> bool {
        self == Provenance::Algorithmic
    }

    pub fn is_friend(self) -> bool {
        matches!(
            self,
            Provenance::FriendUnmediated | Provenance::FriendMediated
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Initial => "initial",
            Provenance::Stranger => "stranger",
            Provenance::FriendUnmediated => "friend_unmediated",
            Provenance::FriendMediated => "friend_mediated",
            Provenance::Algorithmic => "algorithmic",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Provenance::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown provenance `{s}`")))
    }
}

/// Which edges a distance-2 path may traverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeFilter {
    All,
    NonAlgorithmic,
}

impl EdgeFilter {
    pub fn admits(self, p: Provenance) -> bool {
        match self {
            EdgeFilter::All => true,
            EdgeFilter::NonAlgorithmic => !p.is_algorithmic(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub group: usize,
    pub embedding: Vec<f64>,
    pub birth_time: u32,
    pub alive: bool,
}

impl Node {
    pub fn age(&self, now: u32) -> u32 {
        now.saturating_sub(self.birth_time)
    }
}

/// Undirected edge; endpoints are stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub provenance: Provenance,
    pub created_at: u32,
}

impl Edge {
    pub fn new(a: NodeId, b: NodeId, provenance: Provenance, created_at: u32) -> Self {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        Edge {
            u,
            v,
            provenance,
            created_at,
        }
    }

    pub fn other(&self, x: NodeId) -> NodeId {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

/// Entry of a node's neighbor list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub to: NodeId,
    pub provenance: Provenance,
    pub created_at: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemovalReason {
    NodeDeparture,
    Rewire,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LedgerEvent {
    NodeAdded {
        id: NodeId,
        group: usize,
        embedding: Vec<f64>,
        t: u32,
    },
    EdgeAdded(Edge),
    EdgeRemoved {
        edge: Edge,
        t: u32,
        reason: RemovalReason,
    },
    NodeRemoved {
        id: NodeId,
        t: u32,
    },
}

#[derive(Debug, Clone)]
pub struct Graph {
    dim: usize,
    nodes: Vec<Node>,
    adj: Vec<Vec<Link>>,
    full: BitMatrix,
    organic: BitMatrix,
    alive_bits: Vec<u64>,
    alive: Vec<NodeId>,
    triangles: Vec<u64>,
    edge_count: usize,
    ledger: Vec<LedgerEvent>,
    now: u32,
}

impl Graph {
    /// Empty graph whose nodes carry embeddings of dimension `dim`.
    pub fn new(dim: usize) -> Self {
        Graph {
            dim,
            nodes: Vec::new(),
            adj: Vec::new(),
            full: BitMatrix::new(),
            organic: BitMatrix::new(),
            alive_bits: Vec::new(),
            alive: Vec::new(),
            triangles: Vec::new(),
            edge_count: 0,
            ledger: Vec::new(),
            now: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Latest timestep seen by any mutation.
    pub fn now(&self) -> u32 {
        self.now
    }

    pub fn advance_to(&mut self, t: u32) {
        self.now = self.now.max(t);
    }

    pub fn add_node(&mut self, group: usize, embedding: Vec<f64>, t: u32) -> Result<NodeId> {
        if embedding.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: embedding.len(),
            });
        }
        let id = NodeId(self.nodes.len() as u32);
        let n = self.nodes.len() + 1;
        self.full.ensure(n);
        self.organic.ensure(n);
        self.alive_bits.resize(self.full.words(), 0);
        bits_set(&mut self.alive_bits, id.index());
        self.ledger.push(LedgerEvent::NodeAdded {
            id,
            group,
            embedding: embedding.clone(),
            t,
        });
        self.nodes.push(Node {
            id,
            group,
            embedding,
            birth_time: t,
            alive: true,
        });
        self.adj.push(Vec::new());
        self.triangles.push(0);
        self.alive.push(id);
        self.advance_to(t);
        Ok(id)
    }

    pub fn is_alive(&self, u: NodeId) -> bool {
        self.nodes.get(u.index()).is_some_and(|n| n.alive)
    }

    fn check_alive(&self, u: NodeId) -> Result<()> {
        if self.is_alive(u) {
            Ok(())
        } else {
            Err(Error::DeadNode(u))
        }
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.is_alive(u) && self.is_alive(v) && self.full.get(u.index(), v.index())
    }

    /// Adds `u–v`. Returns `Ok(false)` without touching the graph when the
    /// edge already exists.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId, prov: Provenance, t: u32) -> Result<bool> {
        self.check_alive(u)?;
        self.check_alive(v)?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        let (ui, vi) = (u.index(), v.index());
        if self.full.get(ui, vi) {
            return Ok(false);
        }
        self.bump_triangles(ui, vi, true);
        self.full.set_sym(ui, vi, true);
        if !prov.is_algorithmic() {
            self.organic.set_sym(ui, vi, true);
        }
        self.adj[ui].push(Link {
            to: v,
            provenance: prov,
            created_at: t,
        });
        self.adj[vi].push(Link {
            to: u,
            provenance: prov,
            created_at: t,
        });
        self.edge_count += 1;
        self.ledger
            .push(LedgerEvent::EdgeAdded(Edge::new(u, v, prov, t)));
        self.advance_to(t);
        Ok(true)
    }

    /// Removes `u–v` if present and returns the removed edge.
    pub fn remove_edge(
        &mut self,
        u: NodeId,
        v: NodeId,
        t: u32,
        reason: RemovalReason,
    ) -> Result<Option<Edge>> {
        self.check_alive(u)?;
        self.check_alive(v)?;
        let (ui, vi) = (u.index(), v.index());
        if !self.full.get(ui, vi) {
            return Ok(None);
        }
        let pos = self.adj[ui]
            .iter()
            .position(|l| l.to == v)
            .expect("adjacency in sync");
        let link = self.adj[ui].remove(pos);
        let pos = self.adj[vi]
            .iter()
            .position(|l| l.to == u)
            .expect("adjacency in sync");
        self.adj[vi].remove(pos);
        self.full.set_sym(ui, vi, false);
        self.organic.set_sym(ui, vi, false);
        self.bump_triangles(ui, vi, false);
        self.edge_count -= 1;
        let edge = Edge::new(u, v, link.provenance, link.created_at);
        self.ledger
            .push(LedgerEvent::EdgeRemoved { edge, t, reason });
        self.advance_to(t);
        Ok(Some(edge))
    }

    /// Marks `u` dead and drops its incident edges. Returns how many edges
    /// were removed.
    pub fn remove_node(&mut self, u: NodeId, t: u32) -> Result<usize> {
        self.check_alive(u)?;
        let neighbors: Vec<NodeId> = self.adj[u.index()].iter().map(|l| l.to).collect();
        for &v in &neighbors {
            self.remove_edge(u, v, t, RemovalReason::NodeDeparture)?;
        }
        let ui = u.index();
        self.nodes[ui].alive = false;
        bits::clear_bit(&mut self.alive_bits, ui);
        if let Ok(pos) = self.alive.binary_search(&u) {
            self.alive.remove(pos);
        }
        self.ledger.push(LedgerEvent::NodeRemoved { id: u, t });
        self.advance_to(t);
        Ok(neighbors.len())
    }

    // Adjusts triangle counts for inserting (`add`) or after deleting the
    // edge a–b. Must be called while a–b is absent from `full`.
    fn bump_triangles(&mut self, a: usize, b: usize, add: bool) {
        let words = self.full.words();
        let mut c = 0u64;
        for w in 0..words {
            let mut x = self.full.row(a)[w] & self.full.row(b)[w];
            while x != 0 {
                let z = w * 64 + x.trailing_zeros() as usize;
                x &= x - 1;
                c += 1;
                if add {
                    self.triangles[z] += 1;
                } else {
                    self.triangles[z] -= 1;
                }
            }
        }
        if add {
            self.triangles[a] += c;
            self.triangles[b] += c;
        } else {
            self.triangles[a] -= c;
            self.triangles[b] -= c;
        }
    }

    pub fn node(&self, u: NodeId) -> &Node {
        &self.nodes[u.index()]
    }

    /// All nodes ever added, dead ones included.
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Alive node ids, ascending.
    pub fn alive_nodes(&self) -> &[NodeId] {
        &self.alive
    }

    pub fn n_alive(&self) -> usize {
        self.alive.len()
    }

    /// Bitset over node indices marking alive nodes.
    pub fn alive_bits(&self) -> &[u64] {
        &self.alive_bits
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adj[u.index()].len()
    }

    pub fn neighbors(&self, u: NodeId) -> &[Link] {
        &self.adj[u.index()]
    }

    pub fn provenance(&self, u: NodeId, v: NodeId) -> Option<Provenance> {
        self.adj
            .get(u.index())?
            .iter()
            .find(|l| l.to == v)
            .map(|l| l.provenance)
    }

    /// Number of edges among the neighbors of `u`.
    pub fn triangles(&self, u: NodeId) -> u64 {
        self.triangles[u.index()]
    }

    /// Number of common neighbors of `u` and `v`.
    pub fn common_neighbors(&self, u: NodeId, v: NodeId) -> usize {
        self.full.common_count(u.index(), v.index()) as usize
    }

    /// Adjacency row of `u` over all edges, as words.
    pub fn adjacency_bits(&self, u: NodeId) -> &[u64] {
        self.full.row(u.index())
    }

    /// Alive edges, each reported once with `u < v`, ordered by `u` then
    /// insertion order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.alive.iter().flat_map(move |&u| {
            self.adj[u.index()]
                .iter()
                .filter(move |l| u < l.to)
                .map(move |l| Edge::new(u, l.to, l.provenance, l.created_at))
        })
    }

    pub fn ledger(&self) -> &[LedgerEvent] {
        &self.ledger
    }

    /// Word-parallel distance-2 frontier of `u` written into `out`.
    ///
    /// A node `w` is set when `w ≠ u`, `w` is not adjacent to `u` in the full
    /// edge set, and some path `u–x–w` uses two edges admitted by `filter`.
    pub fn distance2_bits(&self, u: NodeId, filter: EdgeFilter, out: &mut Vec<u64>) -> Result<()> {
        self.check_alive(u)?;
        let m = match filter {
            EdgeFilter::All => &self.full,
            EdgeFilter::NonAlgorithmic => &self.organic,
        };
        out.clear();
        out.resize(m.words(), 0);
        let ui = u.index();
        for x in bits::ones(m.row(ui)) {
            m.or_into(x, out);
        }
        for (o, f) in out.iter_mut().zip(self.full.row(ui)) {
            *o &= !f;
        }
        bits::clear_bit(out, ui);
        Ok(())
    }

    /// Distance-2 frontier of `u` restricted to 2-paths whose edges satisfy
    /// `edge_filter`, ascending by id. Direct neighbors under the full edge
    /// set are always excluded.
    pub fn distance2<F>(&self, u: NodeId, edge_filter: F) -> Result<Vec<NodeId>>
    where
        F: Fn(Provenance) -> bool,
    {
        self.check_alive(u)?;
        let mut hit = vec![false; self.nodes.len()];
        for l in self.adj[u.index()]
            .iter()
            .filter(|l| edge_filter(l.provenance))
        {
            for l2 in self.adj[l.to.index()]
                .iter()
                .filter(|l| edge_filter(l.provenance))
            {
                hit[l2.to.index()] = true;
            }
        }
        hit[u.index()] = false;
        for l in &self.adj[u.index()] {
            hit[l.to.index()] = false;
        }
        Ok(hit
            .iter()
            .enumerate()
            .filter(|(_, &h)| h)
            .map(|(i, _)| NodeId(i as u32))
            .collect())
    }

    /// Degrees of alive nodes matching `subset`, ascending.
    pub fn degree_sequence<F>(&self, subset: F) -> Vec<usize>
    where
        F: Fn(&Node) -> bool,
    {
        let mut d: Vec<usize> = self
            .alive
            .iter()
            .map(|&u| &self.nodes[u.index()])
            .filter(|n| subset(n))
            .map(|n| self.adj[n.id.index()].len())
            .collect();
        d.sort_unstable();
        d
    }

    /// Rebuilds a graph by applying `ledger` to an empty graph.
    pub fn replay(dim: usize, ledger: &[LedgerEvent]) -> Result<Graph> {
        let mut g = Graph::new(dim);
        for ev in ledger {
            match ev {
                LedgerEvent::NodeAdded {
                    id,
                    group,
                    embedding,
                    t,
                } => {
                    let got = g.add_node(*group, embedding.clone(), *t)?;
                    if got != *id {
                        return Err(Error::Invalid(format!("ledger id {id} replayed as {got}")));
                    }
                }
                LedgerEvent::EdgeAdded(e) => {
                    g.add_edge(e.u, e.v, e.provenance, e.created_at)?;
                }
                LedgerEvent::EdgeRemoved { edge, t, reason } => {
                    g.remove_edge(edge.u, edge.v, *t, *reason)?;
                }
                LedgerEvent::NodeRemoved { id, t } => {
                    g.remove_node(*id, *t)?;
                }
            }
        }
        Ok(g)
    }

    /// True when both graphs have the same nodes, liveness and adjacency
    /// (neighbor sets with provenance).
    pub fn same_structure(&self, other: &Graph) -> bool {
        if self.nodes != other.nodes || self.alive != other.alive {
            return false;
        }
        self.adj.iter().zip(&other.adj).all(|(a, b)| {
            let mut a: Vec<_> = a
                .iter()
                .map(|l| (l.to, l.provenance, l.created_at))
                .collect();
            let mut b: Vec<_> = b
                .iter()
                .map(|l| (l.to, l.provenance, l.created_at))
                .collect();
            a.sort();
            b.sort();
            a == b
        }) && self.triangles == other.triangles
    }

    /// Edge list: header `u,v,provenance,created_at`, one alive edge per line.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "u,v,provenance,created_at")?;
        for e in self.edges() {
            writeln!(w, "{},{},{},{}", e.u, e.v, e.provenance, e.created_at)?;
        }
        Ok(())
    }

    /// Node list: header `id,group,emb_0..emb_{d-1},birth_time,alive`, every
    /// node ever added.
    pub fn write_node_list<W: Write>(&self, mut w: W) -> Result<()> {
        let emb: Vec<String> = (0..self.dim).map(|k| format!("emb_{k}")).collect();
        if emb.is_empty() {
            writeln!(w, "id,group,birth_time,alive")?;
        } else {
            writeln!(w, "id,group,{},birth_time,alive", emb.join(","))?;
        }
        for n in &self.nodes {
            write!(w, "{},{},", n.id, n.group)?;
            for x in &n.embedding {
                write!(w, "{},", crate::io::format_value(*x))?;
            }
            writeln!(w, "{},{}", n.birth_time, n.alive)?;
        }
        Ok(())
    }
}

#[inline]
fn bits_set(words: &mut [u64], i: usize) {
    words[i / 64] |= 1u64 << (i % 64);
}
