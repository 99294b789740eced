//! Static R-tree over PAA points, bulk loaded with Sort-Tile-Recursive.

use crate::paa::Mbr;

#[derive(Debug, Clone, PartialEq)]
pub enum NodeChildren {
    /// Indices into the tree's node arena.
    Internal(Vec<usize>),
    /// Indices into the point set the tree was built from.
    Leaf(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RTreeNode {
    pub(crate) mbr: Mbr,
    pub(crate) children: NodeChildren,
    pub(crate) entry_count: usize,
}

impl RTreeNode {
    pub fn mbr(&self) -> &Mbr {
        &self.mbr
    }

    pub fn children(&self) -> &NodeChildren {
        &self.children
    }

    /// Number of points stored below this node.
    pub fn entry_count(&self) -> usize {
        self.entry_count
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.children, NodeChildren::Leaf(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RTree {
    pub(crate) nodes: Vec<RTreeNode>,
    pub(crate) root: usize,
    pub(crate) capacity: usize,
}

impl RTree {
    /// Packs `points` (all of equal dimension, at least one) into a tree whose
    /// nodes hold at most `capacity` children.
    pub fn bulk_load(points: &[&[f64]], capacity: usize) -> Self {
        assert!(!points.is_empty(), "cannot bulk load an empty point set");
        assert!(capacity >= 2, "node capacity must be at least 2");
        let dims = points[0].len();
        let mut nodes = Vec::new();

        let groups = str_groups(
            (0..points.len()).collect(),
            0,
            dims,
            capacity,
            &|p, axis| points[p][axis],
        );
        let mut level: Vec<usize> = groups
            .into_iter()
            .map(|g| {
                let mbr = Mbr::bounding(g.iter().map(|&p| points[p])).expect("non-empty group");
                nodes.push(RTreeNode {
                    mbr,
                    entry_count: g.len(),
                    children: NodeChildren::Leaf(g),
                });
                nodes.len() - 1
            })
            .collect();

        while level.len() > 1 {
            let groups = {
                let view = &nodes;
                str_groups(level, 0, dims, capacity, &|n, axis| view[n].mbr.center(axis))
            };
            level = groups
                .into_iter()
                .map(|g| {
                    let mut mbr = nodes[g[0]].mbr.clone();
                    for &c in &g[1..] {
                        mbr.expand(&nodes[c].mbr);
                    }
                    let entry_count = g.iter().map(|&c| nodes[c].entry_count).sum();
                    nodes.push(RTreeNode {
                        mbr,
                        entry_count,
                        children: NodeChildren::Internal(g),
                    });
                    nodes.len() - 1
                })
                .collect();
        }

        RTree {
            root: level[0],
            nodes,
            capacity,
        }
    }

    pub fn root(&self) -> &RTreeNode {
        &self.nodes[self.root]
    }

    pub fn root_index(&self) -> usize {
        self.root
    }

    pub fn node(&self, index: usize) -> &RTreeNode {
        &self.nodes[index]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn height(&self) -> usize {
        let mut h = 1;
        let mut n = self.root();
        while let NodeChildren::Internal(c) = &n.children {
            n = &self.nodes[c[0]];
            h += 1;
        }
        h
    }

    /// Structural audit: every box is the tight hull of its subtree, counts add
    /// up, no node overflows, and each point appears exactly once.
    pub fn check(&self, points: &[&[f64]]) -> Result<(), String> {
        let mut seen = vec![false; points.len()];
        self.check_node(self.root, points, &mut seen)?;
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(format!("point {missing} is not reachable"));
        }
        Ok(())
    }

    fn check_node(&self, idx: usize, points: &[&[f64]], seen: &mut [bool]) -> Result<Mbr, String> {
        let node = &self.nodes[idx];
        let (hull, count) = match &node.children {
            NodeChildren::Leaf(entries) => {
                if entries.is_empty() || entries.len() > self.capacity {
                    return Err(format!("leaf {idx} holds {} entries", entries.len()));
                }
                for &e in entries {
                    if e >= points.len() || std::mem::replace(&mut seen[e], true) {
                        return Err(format!("entry {e} duplicated or out of range"));
                    }
                }
                let hull = Mbr::bounding(entries.iter().map(|&e| points[e])).expect("non-empty");
                (hull, entries.len())
            }
            NodeChildren::Internal(children) => {
                if children.is_empty() || children.len() > self.capacity {
                    return Err(format!("node {idx} has {} children", children.len()));
                }
                let mut hull = self.check_node(children[0], points, seen)?;
                for &c in &children[1..] {
                    hull.expand(&self.check_node(c, points, seen)?);
                }
                let count = children.iter().map(|&c| self.nodes[c].entry_count).sum();
                (hull, count)
            }
        };
        if hull != node.mbr {
            return Err(format!("node {idx} box is not the tight hull of its subtree"));
        }
        if count != node.entry_count {
            return Err(format!("node {idx} entry count {} != {count}", node.entry_count));
        }
        Ok(hull)
    }
}

/// Sort-Tile-Recursive grouping: sort by the current axis, cut into slabs,
/// recurse on the next axis; the last axis is cut into runs of `capacity`.
fn str_groups(
    mut items: Vec<usize>,
    axis: usize,
    dims: usize,
    capacity: usize,
    key: &dyn Fn(usize, usize) -> f64,
) -> Vec<Vec<usize>> {
    if items.len() <= capacity {
        return vec![items];
    }
    items.sort_by(|&a, &b| key(a, axis).total_cmp(&key(b, axis)).then(a.cmp(&b)));
    if axis + 1 >= dims {
        return items.chunks(capacity).map(<[usize]>::to_vec).collect();
    }
    let pages = items.len().div_ceil(capacity);
    let slabs = (pages as f64).powf(1.0 / (dims - axis) as f64).ceil() as usize;
    let slab_len = capacity * pages.div_ceil(slabs.max(1));
    items
        .chunks(slab_len)
        .flat_map(|slab| str_groups(slab.to_vec(), axis + 1, dims, capacity, key))
        .collect()
}
