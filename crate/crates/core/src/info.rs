//! Precomputed tables over a record dimension.
//!
//! Mappings and views never walk the [`RecordDim`] tree on the access path.
//! Instead every node and leaf is numbered once, in depth-first order, and
//! packed/aligned offsets are tabulated. A subtree always owns a contiguous
//! range of leaf ordinals.

use std::sync::{Arc, OnceLock};

use crate::error::{LayoutError, Result};
use crate::record::{aligned_layout, Packing, RecordCoord, RecordDim, ScalarType};

/// Index of a node in a [`RecordInfo`], in depth-first order. The root is `NodeId(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);
}

#[derive(Debug, Clone)]
pub struct NodeInfo {
    pub coord: RecordCoord,
    pub tags: Vec<String>,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub first_leaf: usize,
    pub leaf_count: usize,
    /// `Some` for leaves.
    pub scalar: Option<ScalarType>,
    /// Canonical text of the subtree; equal shapes mean structurally equal subtrees.
    pub shape: Arc<str>,
}

impl NodeInfo {
    pub fn is_leaf(&self) -> bool {
        self.scalar.is_some()
    }

    pub fn depth(&self) -> usize {
        self.coord.depth()
    }

    pub fn leaves(&self) -> std::ops::Range<usize> {
        self.first_leaf..self.first_leaf + self.leaf_count
    }
}

#[derive(Debug, Clone)]
pub struct LeafInfo {
    pub node: NodeId,
    pub coord: RecordCoord,
    pub tags: Vec<String>,
    /// Dotted tag path, e.g. `Pos.X`.
    pub path: String,
    pub ty: ScalarType,
    pub packed_offset: usize,
    pub aligned_offset: usize,
    /// Ordinal of the top-level field containing this leaf.
    pub top_field: usize,
}

impl LeafInfo {
    pub fn size(&self) -> usize {
        self.ty.size()
    }

    pub fn offset(&self, packing: Packing) -> usize {
        match packing {
            Packing::Packed => self.packed_offset,
            Packing::Aligned => self.aligned_offset,
        }
    }
}

/// A record dimension together with its node and leaf tables.
#[derive(Debug)]
pub struct RecordInfo {
    dim: RecordDim,
    nodes: Vec<NodeInfo>,
    leaves: Vec<LeafInfo>,
    packed_size: usize,
    aligned_size: usize,
    max_align: usize,
    subtrees: Vec<OnceLock<Arc<RecordInfo>>>,
}

impl RecordInfo {
    pub fn new(dim: RecordDim) -> Arc<Self> {
        let mut nodes = Vec::new();
        let mut leaves = Vec::new();
        build(&dim, None, &mut Vec::new(), &mut Vec::new(), &mut nodes, &mut leaves);

        let types: Vec<ScalarType> = leaves.iter().map(|l| l.ty).collect();
        let (aligned, aligned_size) = aligned_layout(types.iter().copied());
        let mut packed = 0;
        for (leaf, aligned_offset) in leaves.iter_mut().zip(aligned) {
            leaf.packed_offset = packed;
            leaf.aligned_offset = aligned_offset;
            packed += leaf.ty.size();
        }
        let max_align = types.iter().map(|t| t.align()).max().unwrap_or(1);
        let subtrees = (0..nodes.len()).map(|_| OnceLock::new()).collect();
        Arc::new(Self {
            dim,
            nodes,
            leaves,
            packed_size: packed,
            aligned_size,
            max_align,
            subtrees,
        })
    }

    pub fn dim(&self) -> &RecordDim {
        &self.dim
    }

    pub fn nodes(&self) -> &[NodeInfo] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &NodeInfo {
        &self.nodes[id.0]
    }

    pub fn leaves(&self) -> &[LeafInfo] {
        &self.leaves
    }

    pub fn leaf(&self, ordinal: usize) -> &LeafInfo {
        &self.leaves[ordinal]
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn packed_size(&self) -> usize {
        self.packed_size
    }

    pub fn aligned_size(&self) -> usize {
        self.aligned_size
    }

    pub fn size(&self, packing: Packing) -> usize {
        match packing {
            Packing::Packed => self.packed_size,
            Packing::Aligned => self.aligned_size,
        }
    }

    pub fn max_align(&self) -> usize {
        self.max_align
    }

    /// Number of top-level fields (1 for a scalar root).
    pub fn top_field_count(&self) -> usize {
        self.nodes[0].children.len().max(1)
    }

    pub fn shape(&self) -> &Arc<str> {
        &self.nodes[0].shape
    }

    pub fn child_by_tag(&self, node: NodeId, tag: &str) -> Result<NodeId> {
        let n = self.node(node);
        n.children
            .iter()
            .copied()
            .find(|c| self.nodes[c.0].tags.last().is_some_and(|t| t == tag))
            .ok_or_else(|| LayoutError::Lookup {
                tag: tag.to_string(),
                parent: if n.tags.is_empty() {
                    "<root>".to_string()
                } else {
                    n.tags.join(".")
                },
            })
    }

    pub fn node_by_tags<S: AsRef<str>>(&self, from: NodeId, tags: &[S]) -> Result<NodeId> {
        tags.iter()
            .try_fold(from, |node, tag| self.child_by_tag(node, tag.as_ref()))
    }

    /// Resolves a dotted path such as `Pos.Y`; the empty string is the root.
    pub fn node_by_path(&self, path: &str) -> Result<NodeId> {
        if path.is_empty() {
            return Ok(NodeId::ROOT);
        }
        let tags: Vec<&str> = path.split('.').collect();
        self.node_by_tags(NodeId::ROOT, &tags)
    }

    pub fn node_by_coord(&self, coord: &RecordCoord) -> Result<NodeId> {
        self.descend(NodeId::ROOT, coord.as_slice())
    }

    /// Follows child indices starting at `from`.
    pub fn descend(&self, from: NodeId, path: &[usize]) -> Result<NodeId> {
        path.iter().try_fold(from, |node, &i| {
            self.nodes[node.0].children.get(i).copied().ok_or_else(|| {
                LayoutError::Usage(format!("invalid record coord {path:?} below {node:?}"))
            })
        })
    }

    pub fn leaf_of_node(&self, node: NodeId) -> Result<usize> {
        let n = self.node(node);
        if n.is_leaf() {
            Ok(n.first_leaf)
        } else {
            Err(LayoutError::Usage(format!(
                "`{}` is a record, not a leaf",
                n.tags.join(".")
            )))
        }
    }

    pub fn leaf_by_coord(&self, coord: &RecordCoord) -> Result<usize> {
        self.leaf_of_node(self.node_by_coord(coord)?)
    }

    pub fn leaf_by_path(&self, path: &str) -> Result<usize> {
        self.leaf_of_node(self.node_by_path(path)?)
    }

    pub fn is_ancestor_or_self(&self, ancestor: NodeId, node: NodeId) -> bool {
        self.node(ancestor).coord.is_prefix_of(&self.node(node).coord)
    }

    /// Table for the subtree rooted at `node`, as a standalone record dimension.
    /// Built on first use and cached.
    pub fn subtree(self: &Arc<Self>, node: NodeId) -> Arc<RecordInfo> {
        if node == NodeId::ROOT {
            return Arc::clone(self);
        }
        self.subtrees[node.0]
            .get_or_init(|| {
                let dim = self
                    .dim
                    .at(&self.nodes[node.0].coord)
                    .expect("node coords are valid")
                    .clone();
                RecordInfo::new(dim)
            })
            .clone()
    }
}

fn build(
    dim: &RecordDim,
    parent: Option<NodeId>,
    coord: &mut Vec<usize>,
    tags: &mut Vec<String>,
    nodes: &mut Vec<NodeInfo>,
    leaves: &mut Vec<LeafInfo>,
) -> NodeId {
    let id = NodeId(nodes.len());
    nodes.push(NodeInfo {
        coord: RecordCoord(coord.clone()),
        tags: tags.clone(),
        parent,
        children: Vec::new(),
        first_leaf: leaves.len(),
        leaf_count: 0,
        scalar: None,
        shape: Arc::from(dim.to_string()),
    });
    match dim {
        RecordDim::Leaf(ty) => {
            nodes[id.0].scalar = Some(*ty);
            leaves.push(LeafInfo {
                node: id,
                coord: RecordCoord(coord.clone()),
                tags: tags.clone(),
                path: tags.join("."),
                ty: *ty,
                packed_offset: 0,
                aligned_offset: 0,
                top_field: coord.first().copied().unwrap_or(0),
            });
        }
        RecordDim::Record(fields) => {
            for (i, f) in fields.iter().enumerate() {
                coord.push(i);
                tags.push(f.tag.clone());
                let child = build(&f.dim, Some(id), coord, tags, nodes, leaves);
                coord.pop();
                tags.pop();
                nodes[id.0].children.push(child);
            }
        }
    }
    nodes[id.0].leaf_count = leaves.len() - nodes[id.0].first_leaf;
    id
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record_dim;

    fn particle() -> Arc<RecordInfo> {
        RecordInfo::new(record_dim!({
            Id: u16,
            Pos: { X: f32, Y: f32 },
            Mass: f64,
            Flags: [bool; 3],
        }))
    }

    #[test]
    fn tables_match_record_dim() {
        let info = particle();
        let dim = info.dim().clone();
        assert_eq!(info.leaf_count(), 7);
        assert_eq!(info.packed_size(), dim.size_packed());
        assert_eq!(info.aligned_size(), dim.size_aligned());
        for (leaf, flat) in info.leaves().iter().zip(dim.flatten_leaves()) {
            assert_eq!(leaf.coord, flat.coord);
            assert_eq!(leaf.tags, flat.tags);
            assert_eq!(leaf.packed_offset, dim.offset_of(&flat.coord, Packing::Packed).unwrap());
            assert_eq!(leaf.aligned_offset, dim.offset_of(&flat.coord, Packing::Aligned).unwrap());
        }
        assert_eq!(info.leaf(3).path, "Mass");
        assert_eq!(info.leaf(5).top_field, 3);
    }

    #[test]
    fn subtrees_own_contiguous_leaf_ranges() {
        let info = particle();
        let pos = info.node_by_path("Pos").unwrap();
        assert_eq!(info.node(pos).leaves(), 1..3);
        let flags = info.node_by_path("Flags").unwrap();
        assert_eq!(info.node(flags).leaves(), 4..7);
        assert_eq!(info.node(NodeId::ROOT).leaves(), 0..7);
    }

    #[test]
    fn lookups() {
        let info = particle();
        assert_eq!(info.leaf_by_path("Pos.Y").unwrap(), 2);
        assert_eq!(info.leaf_by_coord(&RecordCoord::from([3, 2])).unwrap(), 6);
        assert!(matches!(info.leaf_by_path("Pos"), Err(LayoutError::Usage(_))));
        assert!(matches!(
            info.node_by_path("Pos.Z"),
            Err(LayoutError::Lookup { .. })
        ));
    }

    #[test]
    fn subtree_is_cached_and_standalone() {
        let info = particle();
        let pos = info.node_by_path("Pos").unwrap();
        let a = info.subtree(pos);
        let b = info.subtree(pos);
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(a.leaf_count(), 2);
        assert_eq!(&**a.shape(), "{X:f32,Y:f32}");
        assert!(Arc::ptr_eq(&info.subtree(NodeId::ROOT), &info));
    }
}
