//! Versioned single-file model format.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//! 0       8     magic "TKRFORST"
//! 8       4     format version (u32, currently 1)
//! 12      8     header length H (u64)
//! 20      H     JSON header: {"hyperparams": ..., "feature_names": [...],
//!               "n_train": N, "n_trees": B}
//! ..      8     N (u64), then N f64 training responses
//! ..            B tree tables, each:
//!                 u64 node count, then per node:
//!                   u8 tag (0 internal, 1 leaf)
//!                   internal: u32 feature, f64 threshold, u32 left, u32 right
//!                   leaf:     u64 member count, then u32 member indices
//! ```
//!
//! A save/load round trip reproduces identical predictions; `to_json`
//! provides a debug dump of the whole forest.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::forest::{Forest, Hyperparams, Node, Tree};
use crate::Result;

const MAGIC: &[u8; 8] = b"TKRFORST";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    hyperparams: Hyperparams,
    feature_names: Vec<String>,
    n_train: usize,
    n_trees: usize,
}

pub fn to_bytes(forest: &Forest) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    let header = serde_json::to_vec(&Header {
        hyperparams: forest.hyperparams.clone(),
        feature_names: forest.feature_names.clone(),
        n_train: forest.n_train(),
        n_trees: forest.trees.len(),
    })?;
    out.extend_from_slice(&(header.len() as u64).to_le_bytes());
    out.extend_from_slice(&header);

    out.extend_from_slice(&(forest.training_response.len() as u64).to_le_bytes());
    for y in &forest.training_response {
        out.extend_from_slice(&y.to_le_bytes());
    }
    for tree in &forest.trees {
        out.extend_from_slice(&(tree.nodes.len() as u64).to_le_bytes());
        for node in &tree.nodes {
            match node {
                Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    out.push(0);
                    out.extend_from_slice(&feature.to_le_bytes());
                    out.extend_from_slice(&threshold.to_le_bytes());
                    out.extend_from_slice(&left.to_le_bytes());
                    out.extend_from_slice(&right.to_le_bytes());
                }
                Node::Leaf { members } => {
                    out.push(1);
                    out.extend_from_slice(&(members.len() as u64).to_le_bytes());
                    for m in members {
                        out.extend_from_slice(&m.to_le_bytes());
                    }
                }
            }
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::BadModelFile("unexpected end of file".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn from_bytes(buf: &[u8]) -> Result<Forest> {
    let mut c = Cursor { buf, pos: 0 };
    if c.take(8)? != MAGIC {
        return Err(Error::BadModelFile("bad magic".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(Error::BadModelFile(format!(
            "unsupported format version {version}"
        )));
    }
    let header_len = c.u64()? as usize;
    let header: Header = serde_json::from_slice(c.take(header_len)?)
        .map_err(|e| Error::BadModelFile(format!("bad header: {e}")))?;

    let n = c.u64()? as usize;
    if n != header.n_train {
        return Err(Error::BadModelFile("response length disagrees with header".into()));
    }
    let mut training_response = Vec::with_capacity(n);
    for _ in 0..n {
        training_response.push(c.f64()?);
    }

    let mut trees = Vec::with_capacity(header.n_trees);
    for _ in 0..header.n_trees {
        let n_nodes = c.u64()? as usize;
        let mut nodes = Vec::with_capacity(n_nodes);
        for _ in 0..n_nodes {
            let node = match c.u8()? {
                0 => Node::Internal {
                    feature: c.u32()?,
                    threshold: c.f64()?,
                    left: c.u32()?,
                    right: c.u32()?,
                },
                1 => {
                    let count = c.u64()? as usize;
                    let mut members = Vec::with_capacity(count);
                    for _ in 0..count {
                        members.push(c.u32()?);
                    }
                    Node::Leaf { members }
                }
                tag => return Err(Error::BadModelFile(format!("unknown node tag {tag}"))),
            };
            nodes.push(node);
        }
        trees.push(Tree { nodes });
    }
    if c.pos != buf.len() {
        return Err(Error::BadModelFile("trailing bytes".into()));
    }
    Ok(Forest {
        trees,
        training_response,
        feature_names: header.feature_names,
        hyperparams: header.hyperparams,
    })
}

pub fn save(forest: &Forest, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&to_bytes(forest)?)?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Forest> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    from_bytes(&buf)
}

/// Debug dump of the whole forest as JSON.
pub fn to_json(forest: &Forest) -> Result<String> {
    Ok(serde_json::to_string_pretty(forest)?)
}
