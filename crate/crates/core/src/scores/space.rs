use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nodeset::NodeSet;

/// Potential parents of one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeSpace {
    pub preselected: NodeSet,
    /// Whether one extra parent from outside `preselected` is allowed.
    pub plus1: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSpace {
    nodes: Vec<NodeSpace>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeEntry {
    #[serde(default)]
    preselected: Vec<String>,
    #[serde(default)]
    plus1: bool,
}

impl SearchSpace {
    pub fn new(nodes: Vec<NodeSpace>) -> Self {
        SearchSpace { nodes }
    }

    /// Every other node preselected. Table size grows as `2^(p-1)`.
    pub fn full(p: usize) -> Self {
        let all = NodeSet::full(p);
        SearchSpace {
            nodes: (0..p)
                .map(|i| NodeSpace {
                    preselected: all.without(i),
                    plus1: false,
                })
                .collect(),
        }
    }

    /// Preselected sets from the neighbourhoods of an undirected skeleton.
    pub fn from_skeleton(p: usize, edges: &[(usize, usize)], plus1: bool) -> Self {
        let mut nodes = vec![
            NodeSpace {
                preselected: NodeSet::EMPTY,
                plus1,
            };
            p
        ];
        for &(a, b) in edges {
            nodes[a].preselected.insert(b);
            nodes[b].preselected.insert(a);
        }
        SearchSpace { nodes }
    }

    pub fn nodes(&self) -> &[NodeSpace] {
        &self.nodes
    }

    pub fn p(&self) -> usize {
        self.nodes.len()
    }

    /// Largest preselected set.
    pub fn k(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| n.preselected.len())
            .max()
            .unwrap_or(0)
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if self.nodes.len() != p {
            return Err(Error::Invalid(format!(
                "search space has {} nodes, expected {}",
                self.nodes.len(),
                p
            )));
        }
        let all = NodeSet::full(p);
        for (i, n) in self.nodes.iter().enumerate() {
            if n.preselected.contains(i) {
                return Err(Error::Invalid(format!("node {i} preselected as its own parent")));
            }
            if !n.preselected.is_subset(all) {
                return Err(Error::Invalid(format!("node {i} has out-of-range parents")));
            }
        }
        Ok(())
    }

    /// Parses `{"name": {"preselected": [...], "plus1": bool}, ...}`. Every
    /// variable in `names` must appear.
    pub fn from_json_str(text: &str, names: &[String]) -> Result<Self> {
        let map: BTreeMap<String, NodeEntry> = serde_json::from_str(text)?;
        let index = |n: &str| {
            names
                .iter()
                .position(|x| x == n)
                .ok_or_else(|| Error::Invalid(format!("unknown variable {n:?} in search space")))
        };
        for key in map.keys() {
            index(key)?;
        }
        let nodes = names
            .iter()
            .map(|name| {
                let e = map.get(name).ok_or_else(|| {
                    Error::Invalid(format!("variable {name:?} missing from search space"))
                })?;
                let mut pre = NodeSet::EMPTY;
                for parent in &e.preselected {
                    pre.insert(index(parent)?);
                }
                Ok(NodeSpace {
                    preselected: pre,
                    plus1: e.plus1,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let space = SearchSpace { nodes };
        space.validate(names.len())?;
        Ok(space)
    }

    pub fn load(path: &Path, names: &[String]) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?, names)
    }

    pub fn to_json_string(&self, names: &[String]) -> String {
        let map: BTreeMap<&str, NodeEntry> = self
            .nodes
            .iter()
            .zip(names)
            .map(|(n, name)| {
                (
                    name.as_str(),
                    NodeEntry {
                        preselected: n.preselected.iter().map(|j| names[j].clone()).collect(),
                        plus1: n.plus1,
                    },
                )
            })
            .collect();
        serde_json::to_string_pretty(&map).expect("serialisable")
    }
}
