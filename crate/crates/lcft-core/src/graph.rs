//! Admissible oriented multigraphs encoding pants decompositions.
//!
//! Vertices are building blocks with three slots. A slot is either one end
//! of a linking edge (a glued boundary circle) or a marked point carrying a
//! weight α. Slots are numbered 1..=3 in the JSON form.

use std::collections::{HashMap, VecDeque};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LcftError, Result, Violation};
use crate::params::CftParams;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexSpec {
    pub id: usize,
    #[serde(default = "three")]
    pub slots: u8,
}

fn three() -> u8 {
    3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub from: [usize; 2],
    pub to: [usize; 2],
    pub q: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarkedSpec {
    pub vertex: usize,
    pub slot: usize,
    pub alpha: f64,
}

/// The on-disk graph format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphSpec {
    pub vertices: Vec<VertexSpec>,
    pub edges: Vec<EdgeSpec>,
    #[serde(default)]
    pub marked: Vec<MarkedSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlotUse {
    /// End 0 is the edge's `from` slot, end 1 its `to` slot.
    Link {
        edge: usize,
        end: usize,
    },
    Marked {
        alpha: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Vertex {
    pub id: usize,
    pub slots: [SlotUse; 3],
}

impl Vertex {
    /// Number of glued boundary slots b_j.
    pub fn boundary_count(&self) -> usize {
        self.slots
            .iter()
            .filter(|s| matches!(s, SlotUse::Link { .. }))
            .count()
    }

    pub fn marked_alphas(&self) -> Vec<f64> {
        self.slots
            .iter()
            .filter_map(|s| match s {
                SlotUse::Marked { alpha } => Some(*alpha),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    /// (vertex index, slot index), both 0-based.
    pub from: (usize, usize),
    pub to: (usize, usize),
    pub q: Complex64,
}

/// A structurally valid graph: every slot used once, connected.
#[derive(Debug, Clone)]
pub struct AdmissibleGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

impl AdmissibleGraph {
    pub fn from_spec(spec: &GraphSpec) -> Result<Self> {
        let bad = |m: String| LcftError::GraphInvalid(m);
        let mut index = HashMap::new();
        for (i, v) in spec.vertices.iter().enumerate() {
            if v.slots != 3 {
                return Err(bad(format!(
                    "vertex {} has {} slots, expected 3",
                    v.id, v.slots
                )));
            }
            if index.insert(v.id, i).is_some() {
                return Err(bad(format!("duplicate vertex id {}", v.id)));
            }
        }
        let mut slots: Vec<[Option<SlotUse>; 3]> = vec![[None; 3]; spec.vertices.len()];
        let mut claim = |vid: usize, slot: usize, u: SlotUse| -> Result<(usize, usize)> {
            let vi = *index
                .get(&vid)
                .ok_or_else(|| bad(format!("unknown vertex {vid}")))?;
            if !(1..=3).contains(&slot) {
                return Err(bad(format!("vertex {vid} slot {slot} out of range 1..=3")));
            }
            let cell = &mut slots[vi][slot - 1];
            if cell.is_some() {
                return Err(bad(format!("vertex {vid} slot {slot} used twice")));
            }
            *cell = Some(u);
            Ok((vi, slot - 1))
        };
        let mut edges = Vec::with_capacity(spec.edges.len());
        for (e, es) in spec.edges.iter().enumerate() {
            let from = claim(es.from[0], es.from[1], SlotUse::Link { edge: e, end: 0 })?;
            let to = claim(es.to[0], es.to[1], SlotUse::Link { edge: e, end: 1 })?;
            let q = Complex64::new(es.q[0], es.q[1]);
            if !q.re.is_finite() || !q.im.is_finite() {
                return Err(bad(format!("edge {e} has a non-finite modulus")));
            }
            edges.push(Edge { from, to, q });
        }
        for m in &spec.marked {
            if !m.alpha.is_finite() {
                return Err(bad(format!(
                    "marked point on vertex {} has non-finite α",
                    m.vertex
                )));
            }
            claim(m.vertex, m.slot, SlotUse::Marked { alpha: m.alpha })?;
        }
        let mut vertices = Vec::with_capacity(spec.vertices.len());
        for (vi, v) in spec.vertices.iter().enumerate() {
            let s = slots[vi];
            let mut full = [SlotUse::Marked { alpha: 0.0 }; 3];
            for k in 0..3 {
                full[k] =
                    s[k].ok_or_else(|| bad(format!("vertex {} slot {} unused", v.id, k + 1)))?;
            }
            vertices.push(Vertex {
                id: v.id,
                slots: full,
            });
        }
        let g = Self { vertices, edges };
        g.check_connected()?;
        Ok(g)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: GraphSpec = serde_json::from_str(text)
            .map_err(|e| LcftError::GraphInvalid(format!("graph JSON: {e}")))?;
        Self::from_spec(&spec)
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.vertices.len();
        if n == 0 {
            return Err(LcftError::GraphInvalid("graph has no vertices".into()));
        }
        let mut adj = vec![Vec::new(); n];
        for e in &self.edges {
            adj[e.from.0].push(e.to.0);
            adj[e.to.0].push(e.from.0);
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        if seen.iter().all(|&s| s) {
            Ok(())
        } else {
            Err(LcftError::GraphInvalid("graph is not connected".into()))
        }
    }

    /// g = L − N + 1.
    pub fn genus(&self) -> usize {
        self.edges.len() + 1 - self.vertices.len()
    }

    pub fn marked_count(&self) -> usize {
        self.vertices.iter().map(|v| 3 - v.boundary_count()).sum()
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.vertices
            .iter()
            .flat_map(|v| v.marked_alphas())
            .collect()
    }

    pub fn moduli(&self) -> Vec<Complex64> {
        self.edges.iter().map(|e| e.q).collect()
    }

    /// Single annulus with a self-loop and one marked point: the torus one-point graph.
    pub fn torus_one_point(alpha: f64, q: Complex64) -> Self {
        Self {
            vertices: vec![Vertex {
                id: 1,
                slots: [
                    SlotUse::Link { edge: 0, end: 0 },
                    SlotUse::Link { edge: 0, end: 1 },
                    SlotUse::Marked { alpha },
                ],
            }],
            edges: vec![Edge {
                from: (0, 0),
                to: (0, 1),
                q,
            }],
        }
    }

    /// Two pants joined by one edge, each closed by a self-loop on its slots 2 and 3.
    pub fn genus_two(q: [Complex64; 3]) -> Self {
        let link = |edge, end| SlotUse::Link { edge, end };
        Self {
            vertices: vec![
                Vertex {
                    id: 1,
                    slots: [link(0, 0), link(1, 0), link(1, 1)],
                },
                Vertex {
                    id: 2,
                    slots: [link(0, 1), link(2, 0), link(2, 1)],
                },
            ],
            edges: vec![
                Edge {
                    from: (0, 0),
                    to: (1, 0),
                    q: q[0],
                },
                Edge {
                    from: (0, 1),
                    to: (0, 2),
                    q: q[1],
                },
                Edge {
                    from: (1, 1),
                    to: (1, 2),
                    q: q[2],
                },
            ],
        }
    }
}

/// Seiberg-type admissibility: per-vertex Σα − (2 − b_j)Q > 0, each α < Q,
/// and Σα + 2Q(g − 1) > 0 globally.
pub fn validate_graph(graph: &AdmissibleGraph, params: &CftParams) -> Result<()> {
    let q = params.q();
    let mut out = Vec::new();
    for (vi, v) in graph.vertices.iter().enumerate() {
        let alphas = v.marked_alphas();
        let margin = alphas.iter().sum::<f64>() - (2.0 - v.boundary_count() as f64) * q;
        if margin <= 0.0 {
            out.push(Violation {
                vertex: Some(vi),
                rule: "vertex charge".into(),
                margin,
            });
        }
        for a in alphas {
            if a >= q {
                out.push(Violation {
                    vertex: Some(vi),
                    rule: "alpha below Q".into(),
                    margin: q - a,
                });
            }
        }
    }
    let total = graph.alphas().iter().sum::<f64>() + 2.0 * q * (graph.genus() as f64 - 1.0);
    if total <= 0.0 {
        out.push(Violation {
            vertex: None,
            rule: "global charge".into(),
            margin: total,
        });
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(LcftError::Validation(out))
    }
}
