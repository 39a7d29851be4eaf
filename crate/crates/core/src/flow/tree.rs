use serde::Serialize;

use super::transition::BranchOption;
use super::walk::{apply_option, walk_until, WalkEnd};
use super::{initial_state, Arc, Direction, FlowOptions, State};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::system::PiecewiseSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Policy {
    /// A branch point is an error.
    Deterministic,
    /// Follow every option breadth-first, keeping at most `cap` leaves.
    AllBranches { cap: usize },
}

impl Default for Policy {
    fn default() -> Self {
        Policy::AllBranches { cap: 64 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeEnd {
    TimeLimit,
    DomainExit,
    Branch,
    /// Branch point whose children were dropped by the leaf cap.
    Truncated,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchNode {
    pub parent: Option<usize>,
    /// Option taken at the parent's branch point.
    pub option: Option<BranchOption>,
    pub arcs: Vec<Arc>,
    pub end: NodeEnd,
    pub end_point: Vec2,
    /// Signed time at the end of this node.
    pub end_time: f64,
    pub children: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchTree {
    pub nodes: Vec<BranchNode>,
    pub truncated: bool,
}

impl BranchTree {
    pub fn leaves(&self) -> impl Iterator<Item = &BranchNode> {
        self.nodes.iter().filter(|n| n.children.is_empty())
    }

    /// End points of the leaves that ran to the time horizon.
    pub fn endpoints(&self) -> Vec<Vec2> {
        self.leaves().filter(|n| n.end == NodeEnd::TimeLimit).map(|n| n.end_point).collect()
    }

    /// Arcs from the root to `leaf`, in time order.
    pub fn path(&self, leaf: usize) -> Vec<&Arc> {
        let mut chain = vec![leaf];
        while let Some(p) = self.nodes[*chain.last().unwrap()].parent {
            chain.push(p);
        }
        chain.iter().rev().flat_map(|&i| self.nodes[i].arcs.iter()).collect()
    }
}

/// All Filippov solutions from `p0` over time `t` (negative for backward).
pub fn flow_point(sys: &PiecewiseSystem, p0: Vec2, t: f64, policy: Policy, opts: &FlowOptions) -> Result<BranchTree> {
    let dir = Direction::of(t);
    let horizon = t.abs();
    let cap = match policy {
        Policy::Deterministic => 1,
        Policy::AllBranches { cap } => cap.max(1),
    };
    let mut tree = BranchTree { nodes: Vec::new(), truncated: false };
    let mut queue: std::collections::VecDeque<(Option<usize>, Option<BranchOption>, State)> = Default::default();
    queue.push_back((None, None, initial_state(sys, p0)?));
    // Leaves = finished leaves plus everything still queued.
    let mut leaves = 1usize;
    while let Some((parent, option, state)) = queue.pop_front() {
        let report = walk_until(sys, state, 0.0, dir, horizon, opts, &mut |_| false)?;
        let end_time = dir.sign() * report.state.tau;
        let idx = tree.nodes.len();
        let mut node = BranchNode {
            parent,
            option,
            arcs: report.arcs,
            end: NodeEnd::TimeLimit,
            end_point: report.state.p,
            end_time,
            children: Vec::new(),
        };
        match report.end {
            WalkEnd::TimeLimit | WalkEnd::Stopped(_) => {}
            WalkEnd::DomainExit => node.end = NodeEnd::DomainExit,
            WalkEnd::Branch { options, transition } => {
                if policy == Policy::Deterministic {
                    return Err(Error::DeterministicBranch { t: end_time, point: report.state.p });
                }
                if leaves - 1 + options.len() > cap {
                    tree.truncated = true;
                    node.end = NodeEnd::Truncated;
                } else {
                    node.end = NodeEnd::Branch;
                    leaves += options.len() - 1;
                    for opt in options {
                        queue.push_back((Some(idx), Some(opt), apply_option(sys, &transition, opt, report.state.tau)));
                    }
                }
            }
        }
        tree.nodes.push(node);
        if let Some(p) = parent {
            tree.nodes[p].children.push(idx);
        }
    }
    Ok(tree)
}
