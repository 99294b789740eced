//! Binary index file.
//!
//! ```text
//! "DTWI" | version u32 | metadata (u64 len + UTF-8 key=value lines)
//! | sequences (u64 len + u64 count + per entry: id u64, len u32, samples f64...)
//! | paa       (u64 len + per entry: n_paa f64)
//! | tree      (u64 len + preorder node records)
//! | crc32 u32 over every preceding byte
//! ```
//! Integers and floats are little-endian. A node record is
//! `kind u8 (0 internal, 1 leaf) | low f64 x n_paa | high f64 x n_paa |
//! count u32 | count x u64`, where the trailing words are byte offsets of child
//! records within the tree section (internal) or entry ids (leaf).

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::bounds::{extend_values, ExtensionParams};
use crate::error::{Error, Result};
use crate::index::{DtwIndex, IndexConfig, IndexEntry, LmaxPolicy};
use crate::paa::{paa_transform, Mbr, PaaVector};
use crate::rtree::{NodeChildren, RTree, RTreeNode};
use crate::series::TimeSeries;

pub const MAGIC: &[u8; 4] = b"DTWI";
pub const FORMAT_VERSION: u32 = 1;

const KIND_INTERNAL: u8 = 0;
const KIND_LEAF: u8 = 1;

/// Hex prefix of a SHA-256 over a canonical parameter string.
pub fn params_hash(canonical: &str) -> String {
    Sha256::digest(canonical.as_bytes())[..8]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Float text that parses back to the identical value (17 significant digits).
pub fn full_precision(v: f64) -> String {
    format!("{v:.16e}")
}

fn metadata(index: &DtwIndex) -> String {
    let c = index.config();
    let canonical = format!(
        "r={};n_paa={};lmax={};pad={};cap={};keogh={}",
        c.band_radius,
        c.n_paa,
        index.lmax(),
        full_precision(c.pad_value),
        c.node_capacity,
        c.keogh_filter
    );
    format!(
        "band_radius={}\nn_paa={}\nlmax={}\npad_value={}\nnode_capacity={}\nkeogh_filter={}\nentry_count={}\nparams_hash={}\n",
        c.band_radius,
        c.n_paa,
        index.lmax(),
        full_precision(c.pad_value),
        c.node_capacity,
        c.keogh_filter,
        index.len(),
        params_hash(&canonical)
    )
}

fn put_section(out: &mut Vec<u8>, body: &[u8]) {
    out.extend_from_slice(&(body.len() as u64).to_le_bytes());
    out.extend_from_slice(body);
}

fn record_len(tree: &RTree, idx: usize, n_paa: usize) -> usize {
    let node = tree.node(idx);
    let words = match node.children() {
        NodeChildren::Internal(c) | NodeChildren::Leaf(c) => c.len(),
    };
    1 + 16 * n_paa + 4 + 8 * words
}

fn subtree_len(tree: &RTree, idx: usize, n_paa: usize, memo: &mut [usize]) -> usize {
    let mut total = record_len(tree, idx, n_paa);
    if let NodeChildren::Internal(children) = tree.node(idx).children() {
        for &c in children {
            total += subtree_len(tree, c, n_paa, memo);
        }
    }
    memo[idx] = total;
    total
}

fn write_node(out: &mut Vec<u8>, index: &DtwIndex, idx: usize, sizes: &[usize]) {
    let tree = index.tree();
    let node = tree.node(idx);
    let start = out.len();
    out.push(if node.is_leaf() { KIND_LEAF } else { KIND_INTERNAL });
    for v in node.mbr().low().iter().chain(node.mbr().high()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    match node.children() {
        NodeChildren::Leaf(entries) => {
            out.extend_from_slice(&(entries.len() as u32).to_le_bytes());
            for &e in entries {
                out.extend_from_slice(&index.entries()[e].id().to_le_bytes());
            }
        }
        NodeChildren::Internal(children) => {
            out.extend_from_slice(&(children.len() as u32).to_le_bytes());
            let mut offset = start + record_len(tree, idx, index.config().n_paa);
            for &c in children {
                out.extend_from_slice(&(offset as u64).to_le_bytes());
                offset += sizes[c];
            }
            for &c in children {
                write_node(out, index, c, sizes);
            }
        }
    }
}

/// Serializes an index into the on-disk layout.
pub fn to_bytes(index: &DtwIndex) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    put_section(&mut out, metadata(index).as_bytes());

    let mut seqs = Vec::new();
    seqs.extend_from_slice(&(index.len() as u64).to_le_bytes());
    for e in index.entries() {
        seqs.extend_from_slice(&e.id().to_le_bytes());
        seqs.extend_from_slice(&(e.series().len() as u32).to_le_bytes());
        for v in e.series().values() {
            seqs.extend_from_slice(&v.to_le_bytes());
        }
    }
    put_section(&mut out, &seqs);

    let mut paa = Vec::new();
    for e in index.entries() {
        for v in e.paa().coords() {
            paa.extend_from_slice(&v.to_le_bytes());
        }
    }
    put_section(&mut out, &paa);

    let tree = index.tree();
    let mut sizes = vec![0; tree.node_count()];
    subtree_len(tree, tree.root_index(), index.config().n_paa, &mut sizes);
    let mut nodes = Vec::with_capacity(sizes[tree.root_index()]);
    write_node(&mut nodes, index, tree.root_index(), &sizes);
    put_section(&mut out, &nodes);

    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn save_index(index: &DtwIndex, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_bytes(index))?;
    Ok(())
}

pub fn load_index(path: impl AsRef<Path>) -> Result<DtwIndex> {
    from_bytes(&fs::read(path)?)
}

/// Bounds-checked little-endian reader.
struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Truncated(format!("{what} needs {n} bytes at offset {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }

    fn section(&mut self, what: &str) -> Result<&'a [u8]> {
        let len = usize::try_from(self.u64(what)?)
            .map_err(|_| Error::Truncated(format!("{what} length overflows")))?;
        self.take(len, what)
    }

    fn is_done(&self) -> bool {
        self.pos == self.buf.len()
    }
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::Malformed(msg.into())
}

fn parse_metadata(text: &str) -> Result<HashMap<&str, &str>> {
    text.lines()
        .filter(|l| !l.is_empty())
        .map(|l| l.split_once('=').ok_or_else(|| malformed(format!("metadata line '{l}'"))))
        .collect()
}

fn meta_value<T: std::str::FromStr>(meta: &HashMap<&str, &str>, key: &str) -> Result<T> {
    meta.get(key)
        .ok_or_else(|| malformed(format!("metadata key '{key}' missing")))?
        .parse()
        .map_err(|_| malformed(format!("metadata key '{key}' unparsable")))
}

/// Parses and verifies an index image. Truncation, checksum and version
/// problems are reported as distinct errors.
pub fn from_bytes(bytes: &[u8]) -> Result<DtwIndex> {
    let mut rd = Reader::new(bytes);
    if rd.take(4, "magic")? != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = rd.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let meta_bytes = rd.section("metadata")?;
    let seq_bytes = rd.section("sequence table")?;
    let paa_bytes = rd.section("paa table")?;
    let tree_bytes = rd.section("tree")?;
    let body_len = rd.pos;
    let stored = rd.u32("checksum")?;
    if !rd.is_done() {
        return Err(malformed("trailing bytes after checksum"));
    }
    let computed = crc32fast::hash(&bytes[..body_len]);
    if stored != computed {
        return Err(Error::ChecksumMismatch { stored, computed });
    }

    let meta_text = std::str::from_utf8(meta_bytes).map_err(|_| malformed("metadata is not UTF-8"))?;
    let meta = parse_metadata(meta_text)?;
    let pad_text: String = meta_value(&meta, "pad_value")?;
    let config = IndexConfig {
        band_radius: meta_value(&meta, "band_radius")?,
        n_paa: meta_value(&meta, "n_paa")?,
        pad_value: pad_text.parse().map_err(|_| malformed("pad_value"))?,
        node_capacity: meta_value(&meta, "node_capacity")?,
        lmax: LmaxPolicy::Fixed(meta_value(&meta, "lmax")?),
        keogh_filter: meta_value(&meta, "keogh_filter")?,
    };
    config.validate()?;
    let lmax: usize = meta_value(&meta, "lmax")?;
    let entry_count: usize = meta_value(&meta, "entry_count")?;
    let ext = ExtensionParams::new(lmax, config.pad_value)?;

    let mut srd = Reader::new(seq_bytes);
    let count = srd.u64("entry count")? as usize;
    if count != entry_count || count == 0 {
        return Err(malformed(format!("entry count {count} vs metadata {entry_count}")));
    }
    let mut prd = Reader::new(paa_bytes);
    let mut entries = Vec::with_capacity(count);
    let mut positions = HashMap::with_capacity(count);
    for pos in 0..count {
        let id = srd.u64("entry id")?;
        let len = srd.u32("entry length")? as usize;
        let values = (0..len).map(|_| srd.f64("sample")).collect::<Result<Vec<_>>>()?;
        let series = TimeSeries::new(values)
            .map_err(|e| malformed(format!("entry {id}: {e}")))?
            .with_id(id);
        let coords = (0..config.n_paa).map(|_| prd.f64("paa coordinate")).collect::<Result<Vec<_>>>()?;
        let paa = PaaVector::from_coords(coords, lmax)?;
        if paa != paa_transform(&extend_values(&series, ext)?, config.n_paa)? {
            return Err(malformed(format!("entry {id}: stored PAA does not match its sequence")));
        }
        if positions.insert(id, pos).is_some() {
            return Err(Error::DuplicateId(id));
        }
        entries.push(IndexEntry { id, series, paa });
    }
    if !srd.is_done() || !prd.is_done() {
        return Err(malformed("sequence or paa table has trailing bytes"));
    }

    let mut nodes = Vec::new();
    let root = read_node(tree_bytes, 0, config.n_paa, &positions, &mut nodes, 0)?;
    let tree = RTree {
        nodes,
        root,
        capacity: config.node_capacity,
    };
    let points: Vec<&[f64]> = entries.iter().map(|e| e.paa.coords()).collect();
    tree.check(&points).map_err(malformed)?;

    Ok(DtwIndex {
        config,
        lmax,
        entries,
        tree,
    })
}

fn read_node(
    tree: &[u8],
    offset: usize,
    n_paa: usize,
    positions: &HashMap<u64, usize>,
    nodes: &mut Vec<RTreeNode>,
    depth: usize,
) -> Result<usize> {
    if depth > 64 {
        return Err(malformed("tree too deep"));
    }
    let mut rd = Reader::new(tree);
    rd.take(offset, "node offset")?;
    let kind = rd.u8("node kind")?;
    let low = (0..n_paa).map(|_| rd.f64("box low")).collect::<Result<Vec<_>>>()?;
    let high = (0..n_paa).map(|_| rd.f64("box high")).collect::<Result<Vec<_>>>()?;
    let mbr = Mbr::new(low, high)?;
    let count = rd.u32("child count")? as usize;
    let words = (0..count).map(|_| rd.u64("child word")).collect::<Result<Vec<_>>>()?;
    let (children, entry_count) = match kind {
        KIND_LEAF => {
            let entries = words
                .iter()
                .map(|id| positions.get(id).copied().ok_or_else(|| malformed(format!("unknown entry id {id}"))))
                .collect::<Result<Vec<_>>>()?;
            let n = entries.len();
            (NodeChildren::Leaf(entries), n)
        }
        KIND_INTERNAL => {
            let mut kids = Vec::with_capacity(count);
            let mut total = 0;
            for &w in &words {
                if (w as usize) <= offset {
                    return Err(malformed("child offset does not move forward"));
                }
                let k = read_node(tree, w as usize, n_paa, positions, nodes, depth + 1)?;
                total += nodes[k].entry_count;
                kids.push(k);
            }
            (NodeChildren::Internal(kids), total)
        }
        other => return Err(malformed(format!("unknown node kind {other}"))),
    };
    nodes.push(RTreeNode {
        mbr,
        children,
        entry_count,
    });
    Ok(nodes.len() - 1)
}
