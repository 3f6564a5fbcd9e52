//! Tree arguments: inline Newick, or a file of Newick / TreePoint JSON lines.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use bhvkit_core::newick::{parse_newick, LabelMap};
use bhvkit_core::TreePoint;

pub fn load_label_map(path: &Path) -> Result<LabelMap> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let pairs: HashMap<String, usize> =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(LabelMap::new(pairs)?)
}

fn looks_inline(arg: &str) -> bool {
    let t = arg.trim();
    t.starts_with('(') || t.ends_with(';') || t.starts_with('{')
}

fn parse_line(line: &str, labels: Option<&LabelMap>) -> Result<TreePoint> {
    if line.starts_with('{') {
        Ok(serde_json::from_str(line)?)
    } else {
        Ok(parse_newick(line, labels)?)
    }
}

/// All trees named by `arg`.
pub fn load_trees(arg: &str, labels: Option<&LabelMap>) -> Result<Vec<TreePoint>> {
    if looks_inline(arg) {
        return Ok(vec![parse_line(arg.trim(), labels)?]);
    }
    let text = fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?;
    let trees = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(no, l)| parse_line(l, labels).with_context(|| format!("{arg}:{no}")))
        .collect::<Result<Vec<_>>>()?;
    anyhow::ensure!(!trees.is_empty(), "{arg} contains no trees");
    Ok(trees)
}

pub fn load_one(arg: &str, labels: Option<&LabelMap>) -> Result<TreePoint> {
    Ok(load_trees(arg, labels)?.remove(0))
}
