//! Functional graphs: every vertex carries exactly one outgoing map
//! edge `v -> T(v)`, equivalently every vertex of the shift graph
//! `E = {(T v, v)}` has in-degree one. A finite connected component is
//! always a single cycle with finitely many rooted trees hanging off
//! it; `classify` recovers that shape deterministically.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

/// Opaque stable vertex identifier; ordering is byte-lexicographic on
/// the label, which fixes every tie-break in this crate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(String);

impl VertexId {
    pub fn new(label: impl Into<String>) -> Self {
        VertexId(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VertexId {
    fn from(label: &str) -> Self {
        VertexId::new(label)
    }
}

impl From<String> for VertexId {
    fn from(label: String) -> Self {
        VertexId::new(label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex set is empty")]
    Empty,
    #[error("duplicate vertex {0}")]
    DuplicateVertex(VertexId),
    #[error("no image assigned to vertex {0}")]
    MissingImage(VertexId),
    #[error("image {image} of vertex {vertex} is outside the vertex set")]
    ImageOutsideVertexSet { vertex: VertexId, image: VertexId },
    #[error("image map mentions unknown vertex {0}")]
    UnknownImageKey(VertexId),
    #[error("graph is not connected")]
    NotConnected,
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("no tree is rooted at {0}")]
    UnknownRoot(VertexId),
}

/// A finite self-map `T` presented as a graph. Construction validates
/// totality; accessors therefore never fail for member vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionalGraph {
    vertices: Vec<VertexId>,
    image: BTreeMap<VertexId, VertexId>,
    children: BTreeMap<VertexId, Vec<VertexId>>,
}

impl FunctionalGraph {
    pub fn new(
        vertices: Vec<VertexId>,
        image: BTreeMap<VertexId, VertexId>,
    ) -> Result<Self, GraphError> {
        if vertices.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut set = BTreeSet::new();
        for v in &vertices {
            if !set.insert(v.clone()) {
                return Err(GraphError::DuplicateVertex(v.clone()));
            }
        }
        for key in image.keys() {
            if !set.contains(key) {
                return Err(GraphError::UnknownImageKey(key.clone()));
            }
        }
        for v in &vertices {
            match image.get(v) {
                None => return Err(GraphError::MissingImage(v.clone())),
                Some(w) if !set.contains(w) => {
                    return Err(GraphError::ImageOutsideVertexSet {
                        vertex: v.clone(),
                        image: w.clone(),
                    })
                }
                Some(_) => {}
            }
        }
        let mut children: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        for (v, w) in &image {
            children.entry(w.clone()).or_default().push(v.clone());
        }
        for c in children.values_mut() {
            c.sort();
        }
        let mut vertices = vertices;
        vertices.sort();
        Ok(FunctionalGraph {
            vertices,
            image,
            children,
        })
    }

    /// All vertices in label order.
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        self.image.contains_key(v)
    }

    /// `T(v)`.
    pub fn image_of(&self, v: &VertexId) -> Result<&VertexId, GraphError> {
        self.image.get(v).ok_or_else(|| GraphError::UnknownVertex(v.clone()))
    }

    /// Preimages `T^{-1}({v})` in label order; these are exactly the
    /// out-neighbors of `v` in the shift graph.
    pub fn children_of(&self, v: &VertexId) -> &[VertexId] {
        self.children.get(v).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn out_degree(&self, v: &VertexId) -> usize {
        self.children_of(v).len()
    }

    /// Weakly connected components, each a standalone graph (the map
    /// never leaves a component). Ordered by smallest member label.
    pub fn connected_components(&self) -> Vec<FunctionalGraph> {
        let mut seen: BTreeSet<VertexId> = BTreeSet::new();
        let mut components = Vec::new();
        for start in &self.vertices {
            if seen.contains(start) {
                continue;
            }
            let mut member = BTreeSet::new();
            let mut queue = VecDeque::from([start.clone()]);
            while let Some(v) = queue.pop_front() {
                if !member.insert(v.clone()) {
                    continue;
                }
                queue.push_back(self.image[&v].clone());
                queue.extend(self.children_of(&v).iter().cloned());
            }
            seen.extend(member.iter().cloned());
            let image = member
                .iter()
                .map(|v| (v.clone(), self.image[v].clone()))
                .collect();
            components.push(
                FunctionalGraph::new(member.into_iter().collect(), image)
                    .expect("component of a valid graph is valid"),
            );
        }
        components
    }

    /// Shape of a connected graph: the unique cycle `v_0..v_{k-1}`
    /// (started at the smallest cycle label, ordered along shift edges
    /// so `T(v_{i+1}) = v_i`) plus the trees attached to it.
    pub fn classify(&self) -> Result<Classification, GraphError> {
        if self.connected_components().len() != 1 {
            return Err(GraphError::NotConnected);
        }
        // Walk v -> T(v) from any vertex; the walk must re-enter itself.
        let mut order: BTreeMap<VertexId, usize> = BTreeMap::new();
        let mut walk = Vec::new();
        let mut v = self.vertices[0].clone();
        let cycle_t_order: Vec<VertexId> = loop {
            if let Some(&at) = order.get(&v) {
                break walk[at..].to_vec();
            }
            order.insert(v.clone(), walk.len());
            walk.push(v.clone());
            v = self.image[&v].clone();
        };
        // Shift-edge order is the reverse of map-iteration order.
        let mut cycle: Vec<VertexId> = cycle_t_order.into_iter().rev().collect();
        let smallest = cycle
            .iter()
            .enumerate()
            .min_by_key(|(_, v)| *v)
            .map(|(i, _)| i)
            .expect("cycle is nonempty");
        cycle.rotate_left(smallest);

        let on_cycle: BTreeSet<&VertexId> = cycle.iter().collect();
        let kappa = cycle.len();
        let mut trees = Vec::new();
        for (i, vi) in cycle.iter().enumerate() {
            let next = &cycle[(i + 1) % kappa];
            for child in self.children_of(vi) {
                if child == next && on_cycle.contains(child) {
                    continue;
                }
                let mut members = Vec::new();
                let mut queue = VecDeque::from([child.clone()]);
                while let Some(u) = queue.pop_front() {
                    queue.extend(self.children_of(&u).iter().cloned());
                    members.push(u);
                }
                trees.push(TreePart {
                    root: child.clone(),
                    attachment: i,
                    members,
                });
            }
        }
        let covered: usize = kappa + trees.iter().map(|t| t.members.len()).sum::<usize>();
        debug_assert_eq!(covered, self.len(), "cycle and trees partition the vertex set");
        Ok(Classification::CycleWithTrees(CycleStructure {
            cycle,
            trees,
        }))
    }
}

/// Connected functional graphs are either a rootless directed tree
/// (impossible over a finite vertex set) or one cycle with rooted
/// trees attached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    RootlessTree,
    CycleWithTrees(CycleStructure),
}

impl Classification {
    pub fn cycle_structure(&self) -> Option<&CycleStructure> {
        match self {
            Classification::CycleWithTrees(s) => Some(s),
            Classification::RootlessTree => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleStructure {
    /// `v_0 .. v_{kappa-1}` with `T(v_{i+1 mod kappa}) = v_i`, started
    /// at the smallest cycle label.
    pub cycle: Vec<VertexId>,
    /// Attached trees, ordered by (attachment index, root label).
    pub trees: Vec<TreePart>,
}

impl CycleStructure {
    pub fn kappa(&self) -> usize {
        self.cycle.len()
    }

    /// Index of `v` on the cycle, if it lies there.
    pub fn cycle_index(&self, v: &VertexId) -> Option<usize> {
        self.cycle.iter().position(|c| c == v)
    }

    pub fn is_cycle_vertex(&self, v: &VertexId) -> bool {
        self.cycle_index(v).is_some()
    }

    /// Breadth-first member order of the tree rooted at `root`; every
    /// vertex appears after its map image.
    pub fn tree_order(&self, root: &VertexId) -> Result<&[VertexId], GraphError> {
        self.trees
            .iter()
            .find(|t| &t.root == root)
            .map(|t| t.members.as_slice())
            .ok_or_else(|| GraphError::UnknownRoot(root.clone()))
    }

    /// Vertices not on the cycle, in tree order.
    pub fn non_cycle_vertices(&self) -> impl Iterator<Item = &VertexId> {
        self.trees.iter().flat_map(|t| t.members.iter())
    }
}

/// One tree hanging off the cycle: its root `w` satisfies
/// `T(w) = v_{attachment}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreePart {
    pub root: VertexId,
    pub attachment: usize,
    pub members: Vec<VertexId>,
}
