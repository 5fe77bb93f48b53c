use std::io::{BufRead, Write};
use std::sync::Arc;

use super::IoError;
use crate::signed::{NodeMap, Partition};

/// `# k=<k>` then one `node group` line per node in node order.
pub fn write_partition<W: Write>(mut w: W, partition: &Partition) -> Result<(), IoError> {
    writeln!(w, "# k={}", partition.k())?;
    let nodes = partition.nodes();
    for (v, g) in partition.assignment().iter().enumerate() {
        writeln!(w, "{} {}", nodes.id(v), g)?;
    }
    Ok(())
}

/// Reads a partition file. Without a `# k=` header, k is one more than the
/// largest group label.
pub fn read_partition<R: BufRead>(reader: R) -> Result<Partition, IoError> {
    let mut k: Option<usize> = None;
    let mut pairs: Vec<(String, u32)> = Vec::new();
    for (i, text) in reader.lines().enumerate() {
        let text = text?;
        let line = i as u64 + 1;
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(comment) = text.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("k=") {
                k = Some(
                    v.trim()
                        .parse()
                        .map_err(|_| IoError::format(line, format!("bad group count `{v}`")))?,
                );
            }
            continue;
        }
        let fields: Vec<&str> = text.split_whitespace().collect();
        let [node, group] = fields[..] else {
            return Err(IoError::format(line, "expected `node group`"));
        };
        let group = group
            .parse()
            .map_err(|_| IoError::format(line, format!("bad group label `{group}`")))?;
        pairs.push((node.to_string(), group));
    }
    let k = k.unwrap_or_else(|| pairs.iter().map(|(_, g)| *g as usize + 1).max().unwrap_or(0));
    let nodes = NodeMap::new(pairs.iter().map(|(n, _)| n.clone())).map_err(|e| IoError::format(0, e.to_string()))?;
    Partition::from_pairs(Arc::new(nodes), pairs, k).map_err(|e| IoError::format(0, e.to_string()))
}
