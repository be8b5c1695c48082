//! A small dataflow executor. Nodes are pure functions over type-erased
//! values; wires connect output ports to input ports. Execution follows
//! Kahn's algorithm with the lowest node index first among ready nodes.

use std::any::Any;
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::Arc;

use super::cdr::{cdr_collate, cdr_noisy_original, cdr_noisy_training, cdr_training, CdrTraining};
use super::zne::{zne_collate, zne_evaluate, zne_plan};
use super::{CdrConfig, Experiment, MitigatedEstimate, ZneConfig};
use crate::error::{Error, Result};
use crate::sim::{Backend, EstimatorValue};

pub type Value = Arc<dyn Any + Send + Sync>;

type TaskFn = Box<dyn Fn(&[Value]) -> Result<Vec<Value>> + Send + Sync>;

pub struct Task {
    pub name: String,
    pub n_inputs: usize,
    pub n_outputs: usize,
    func: TaskFn,
}

/// Where a wire starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    /// Graph input by position.
    Input(usize),
    Node { node: usize, port: usize },
}

#[derive(Default)]
pub struct TaskGraph {
    tasks: Vec<Task>,
    wires: Vec<(Source, usize, usize)>,
    outputs: Vec<Source>,
}

/// Wrap a value for the graph.
pub fn value<T: Any + Send + Sync>(v: T) -> Value {
    Arc::new(v)
}

/// Borrow a graph value as `T`.
pub fn downcast<T: Any>(v: &Value) -> Result<&T> {
    v.downcast_ref::<T>()
        .ok_or_else(|| Error::Wiring(format!("expected a value of type {}", std::any::type_name::<T>())))
}

impl TaskGraph {
    pub fn new() -> TaskGraph {
        TaskGraph::default()
    }

    /// Add a node and return its index.
    pub fn add_task<F>(&mut self, name: impl Into<String>, n_inputs: usize, n_outputs: usize, f: F) -> usize
    where
        F: Fn(&[Value]) -> Result<Vec<Value>> + Send + Sync + 'static,
    {
        self.tasks.push(Task {
            name: name.into(),
            n_inputs,
            n_outputs,
            func: Box::new(f),
        });
        self.tasks.len() - 1
    }

    /// Connect `from` to input `port` of `node`.
    pub fn wire(&mut self, from: Source, node: usize, port: usize) {
        self.wires.push((from, node, port));
    }

    /// Declare a graph output.
    pub fn output(&mut self, from: Source) {
        self.outputs.push(from);
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    fn check_source(&self, s: Source, n_inputs: usize) -> Result<()> {
        match s {
            Source::Input(i) if i >= n_inputs => Err(Error::Wiring(format!(
                "graph input {i} requested but {n_inputs} supplied"
            ))),
            Source::Node { node, port } => match self.tasks.get(node) {
                None => Err(Error::Wiring(format!("no node {node}"))),
                Some(t) if port >= t.n_outputs => Err(Error::Wiring(format!(
                    "node '{}' has {} outputs, port {port} requested",
                    t.name, t.n_outputs
                ))),
                _ => Ok(()),
            },
            _ => Ok(()),
        }
    }

    /// Validate wiring and return a topological order.
    pub fn topological_order(&self, n_inputs: usize) -> Result<Vec<usize>> {
        let n = self.tasks.len();
        let mut filled: Vec<Vec<usize>> = self.tasks.iter().map(|t| vec![0; t.n_inputs]).collect();
        let mut indegree = vec![0usize; n];
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(from, node, port) in &self.wires {
            self.check_source(from, n_inputs)?;
            let t = self
                .tasks
                .get(node)
                .ok_or_else(|| Error::Wiring(format!("no node {node}")))?;
            if port >= t.n_inputs {
                return Err(Error::Wiring(format!(
                    "node '{}' has {} inputs, port {port} wired",
                    t.name, t.n_inputs
                )));
            }
            filled[node][port] += 1;
            if let Source::Node { node: src, .. } = from {
                indegree[node] += 1;
                children[src].push(node);
            }
        }
        for (t, f) in self.tasks.iter().zip(&filled) {
            if let Some(p) = f.iter().position(|&k| k != 1) {
                return Err(Error::Wiring(format!(
                    "input {p} of node '{}' is wired {} times",
                    t.name, f[p]
                )));
            }
        }
        for &o in &self.outputs {
            self.check_source(o, n_inputs)?;
        }
        let mut ready: BinaryHeap<Reverse<usize>> = (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(i)) = ready.pop() {
            order.push(i);
            for &c in &children[i] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.push(Reverse(c));
                }
            }
        }
        if order.len() != n {
            return Err(Error::InvalidGraph("the graph contains a cycle".into()));
        }
        Ok(order)
    }

    /// Run every task once and return the declared outputs.
    pub fn run(&self, inputs: &[Value]) -> Result<Vec<Value>> {
        let order = self.topological_order(inputs.len())?;
        let mut results: Vec<Option<Vec<Value>>> = vec![None; self.tasks.len()];
        let fetch = |s: Source, results: &[Option<Vec<Value>>]| -> Value {
            match s {
                Source::Input(i) => inputs[i].clone(),
                Source::Node { node, port } => results[node].as_ref().expect("topological order")[port].clone(),
            }
        };
        for i in order {
            let t = &self.tasks[i];
            let mut args: Vec<Option<Value>> = vec![None; t.n_inputs];
            for &(from, node, port) in &self.wires {
                if node == i {
                    args[port] = Some(fetch(from, &results));
                }
            }
            let args: Vec<Value> = args.into_iter().map(|a| a.expect("validated wiring")).collect();
            let out = (t.func)(&args).map_err(|e| Error::Task {
                task: t.name.clone(),
                message: e.to_string(),
            })?;
            if out.len() != t.n_outputs {
                return Err(Error::Wiring(format!(
                    "node '{}' returned {} values, declared {}",
                    t.name,
                    out.len(),
                    t.n_outputs
                )));
            }
            results[i] = Some(out);
        }
        Ok(self.outputs.iter().map(|&o| fetch(o, &results)).collect())
    }
}

/// ZNE as a graph: one fold-and-evaluate node per noise level feeding a
/// collation node. Input 0 is the [`Experiment`]; output 0 the
/// [`MitigatedEstimate`].
pub fn zne_graph(cfg: ZneConfig, backend: Arc<dyn Backend>, e: &Experiment) -> Result<TaskGraph> {
    let levels = zne_plan(e, &cfg)?;
    let mut g = TaskGraph::new();
    let mut evals = Vec::new();
    for level in levels.clone() {
        let cfg = cfg.clone();
        let b = backend.clone();
        let node = g.add_task(format!("evaluate λ={}", level.lambda), 1, 1, move |args| {
            let e = downcast::<Experiment>(&args[0])?;
            Ok(vec![value(zne_evaluate(e, &cfg, &level, b.as_ref())?)])
        });
        g.wire(Source::Input(0), node, 0);
        evals.push(node);
    }
    let k = evals.len();
    let collate = g.add_task("collate", k, 1, move |args| {
        let values = args
            .iter()
            .map(|a| downcast::<EstimatorValue>(a).copied())
            .collect::<Result<Vec<_>>>()?;
        Ok(vec![value(zne_collate(&cfg, &levels, &values)?)])
    });
    for (port, &node) in evals.iter().enumerate() {
        g.wire(Source::Node { node, port: 0 }, collate, port);
    }
    g.output(Source::Node { node: collate, port: 0 });
    Ok(g)
}

/// CDR as a graph: training generation (classical) and the noisy original
/// run in parallel branches, the noisy training runs follow generation, and
/// a regression node collates. Input 0 is the [`Experiment`].
pub fn cdr_graph(cfg: CdrConfig, noisy: Arc<dyn Backend>, ideal: Arc<dyn Backend>) -> TaskGraph {
    let mut g = TaskGraph::new();
    let c1 = cfg.clone();
    let train = g.add_task("training", 1, 1, move |args| {
        let e = downcast::<Experiment>(&args[0])?;
        Ok(vec![value(cdr_training(e, &c1, ideal.as_ref())?)])
    });
    let c2 = cfg.clone();
    let n2 = noisy.clone();
    let noisy_train = g.add_task("noisy training", 2, 1, move |args| {
        let e = downcast::<Experiment>(&args[0])?;
        let t = downcast::<CdrTraining>(&args[1])?;
        Ok(vec![value(cdr_noisy_training(e, &c2, t, n2.as_ref())?)])
    });
    let c3 = cfg.clone();
    let original = g.add_task("noisy original", 1, 1, move |args| {
        let e = downcast::<Experiment>(&args[0])?;
        Ok(vec![value(cdr_noisy_original(e, &c3, noisy.as_ref())?)])
    });
    let regress = g.add_task("regress", 3, 1, move |args| {
        let t = downcast::<CdrTraining>(&args[0])?;
        let nt = downcast::<Vec<EstimatorValue>>(&args[1])?;
        let o = downcast::<EstimatorValue>(&args[2])?;
        Ok(vec![value(cdr_collate(&cfg, t, nt, *o)?)])
    });
    g.wire(Source::Input(0), train, 0);
    g.wire(Source::Input(0), noisy_train, 0);
    g.wire(Source::Node { node: train, port: 0 }, noisy_train, 1);
    g.wire(Source::Input(0), original, 0);
    g.wire(Source::Node { node: train, port: 0 }, regress, 0);
    g.wire(Source::Node { node: noisy_train, port: 0 }, regress, 1);
    g.wire(Source::Node { node: original, port: 0 }, regress, 2);
    g.output(Source::Node { node: regress, port: 0 });
    g
}

/// Run a single-output mitigation graph on an experiment.
pub fn run_estimate(g: &TaskGraph, e: &Experiment) -> Result<MitigatedEstimate> {
    let out = g.run(&[value(e.clone())])?;
    let first = out
        .first()
        .ok_or_else(|| Error::Wiring("graph has no outputs".into()))?;
    downcast::<MitigatedEstimate>(first).cloned()
}
