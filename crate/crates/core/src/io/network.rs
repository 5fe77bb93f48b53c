use std::io::{BufRead, Write};

use super::{interactions::parse_sign, IoError};
use crate::inference::{BetaPrior, EdgeRule};
use crate::signed::{EdgeEvidence, SignedNetwork};

/// How a network file's edges were obtained.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NetworkProvenance {
    pub prior: Option<BetaPrior>,
    pub rule: Option<EdgeRule>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkFile {
    pub network: SignedNetwork,
    pub provenance: NetworkProvenance,
}

/// Header comments, one `u v sign [pos neg mean var]` line per edge, then one
/// line per isolated node.
pub fn write_network<W: Write>(
    mut w: W,
    network: &SignedNetwork,
    provenance: &NetworkProvenance,
) -> Result<(), IoError> {
    writeln!(w, "# n={} m={}", network.node_count(), network.edge_count())?;
    if let Some(p) = provenance.prior {
        writeln!(w, "# prior alpha0={} beta0={}", p.alpha0, p.beta0)?;
    }
    if let Some(r) = provenance.rule {
        writeln!(
            w,
            "# rule mean_high={} mean_low={} var_max={}",
            r.mean_high, r.mean_low, r.var_max
        )?;
    }
    let nodes = network.nodes();
    for e in network.edges() {
        write!(w, "{} {} {}", nodes.id(e.u), nodes.id(e.v), e.sign)?;
        if let Some(ev) = e.evidence {
            write!(
                w,
                " {} {} {} {}",
                ev.pos_count, ev.neg_count, ev.posterior_mean, ev.posterior_var
            )?;
        }
        writeln!(w)?;
    }
    for v in 0..network.node_count() {
        if network.degree(v) == 0 {
            writeln!(w, "{}", nodes.id(v))?;
        }
    }
    Ok(())
}

fn key_values(line: u64, text: &str) -> Result<Vec<(&str, f64)>, IoError> {
    text.split_whitespace()
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| IoError::format(line, format!("expected key=value, found `{kv}`")))?;
            let v = v
                .parse::<f64>()
                .map_err(|_| IoError::format(line, format!("bad number in `{kv}`")))?;
            Ok((k, v))
        })
        .collect()
}

fn lookup(line: u64, kv: &[(&str, f64)], key: &str) -> Result<f64, IoError> {
    kv.iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| IoError::format(line, format!("header lacks `{key}`")))
}

pub fn read_network<R: BufRead>(reader: R) -> Result<NetworkFile, IoError> {
    let mut declared: Option<(u64, usize, usize)> = None;
    let mut provenance = NetworkProvenance::default();
    let mut isolated = Vec::new();
    let mut edges = Vec::new();
    for (i, text) in reader.lines().enumerate() {
        let text = text?;
        let line = i as u64 + 1;
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(comment) = text.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(rest) = comment.strip_prefix("prior ") {
                let kv = key_values(line, rest)?;
                provenance.prior = Some(BetaPrior {
                    alpha0: lookup(line, &kv, "alpha0")?,
                    beta0: lookup(line, &kv, "beta0")?,
                });
            } else if let Some(rest) = comment.strip_prefix("rule ") {
                let kv = key_values(line, rest)?;
                provenance.rule = Some(EdgeRule {
                    mean_high: lookup(line, &kv, "mean_high")?,
                    mean_low: lookup(line, &kv, "mean_low")?,
                    var_max: lookup(line, &kv, "var_max")?,
                });
            } else if comment.starts_with("n=") {
                let kv = key_values(line, comment)?;
                declared = Some((
                    line,
                    lookup(line, &kv, "n")? as usize,
                    lookup(line, &kv, "m")? as usize,
                ));
            }
            continue;
        }
        let fields: Vec<&str> = text.split_whitespace().collect();
        match fields.len() {
            1 => isolated.push(fields[0].to_string()),
            3 | 7 => {
                let sign = parse_sign(fields[2])
                    .ok_or_else(|| IoError::format(line, format!("bad sign `{}`", fields[2])))?;
                let evidence = if fields.len() == 7 {
                    let bad = |f: &str| IoError::format(line, format!("bad evidence value `{f}`"));
                    Some(EdgeEvidence {
                        pos_count: fields[3].parse().map_err(|_| bad(fields[3]))?,
                        neg_count: fields[4].parse().map_err(|_| bad(fields[4]))?,
                        posterior_mean: fields[5].parse().map_err(|_| bad(fields[5]))?,
                        posterior_var: fields[6].parse().map_err(|_| bad(fields[6]))?,
                    })
                } else {
                    None
                };
                edges.push((fields[0].to_string(), fields[1].to_string(), sign, evidence));
            }
            n => {
                return Err(IoError::format(
                    line,
                    format!("expected `u v sign`, `u v sign pos neg mean var` or a node id, found {n} fields"),
                ))
            }
        }
    }
    let network = SignedNetwork::from_labelled(isolated, edges).map_err(|e| IoError::format(0, e.to_string()))?;
    if let Some((line, n, m)) = declared {
        if n != network.node_count() || m != network.edge_count() {
            return Err(IoError::format(
                line,
                format!(
                    "header declares n={n} m={m}, body has n={} m={}",
                    network.node_count(),
                    network.edge_count()
                ),
            ));
        }
    }
    Ok(NetworkFile {
        network,
        provenance,
    })
}
