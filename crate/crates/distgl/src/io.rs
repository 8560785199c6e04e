//! On-disk formats. Everything is plain CSV with fixed column orders:
//!
//! * `nodes.csv`: `node,x,y` — one row per node, ids ascending.
//! * `comm_edges.csv`: `i,j` — communication edges with i < j, sorted.
//! * `data_edges.csv`: `i,j,weight` — nonzero ground-truth edges, sorted.
//! * `signals.csv`: `node,s0,...,s{M-1}` — one row per node.
//! * `ledger.csv`: `phase,count` — fixed phase order.
//! * `learned_edges.csv`: `i,j,weight` — learned weight for every
//!   communication edge (zeros included), sorted.
//! * `trace.csv`: `round,objective_after_local,objective,max_change`.
//!
//! Floats are written in Rust's shortest round-trip form, so identical runs
//! produce byte-identical files.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::dist::RunResult;
use crate::graph::{CommGraph, DataGraph, GraphError, SignalMatrix, UpperWeights};
use crate::ledger::MessageLedger;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("malformed {file} row {row}: {reason}")]
    Malformed {
        file: String,
        row: usize,
        reason: String,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn malformed(file: &str, row: usize, reason: impl Into<String>) -> IoError {
    IoError::Malformed {
        file: file.to_string(),
        row,
        reason: reason.into(),
    }
}

pub fn write_comm_graph(dir: &Path, g: &CommGraph) -> Result<(), IoError> {
    fs::create_dir_all(dir)?;
    let mut nodes = csv::Writer::from_path(dir.join("nodes.csv"))?;
    nodes.write_record(["node", "x", "y"])?;
    for (i, p) in g.positions().iter().enumerate() {
        nodes.write_record([i.to_string(), p[0].to_string(), p[1].to_string()])?;
    }
    nodes.flush()?;

    let mut edges = csv::Writer::from_path(dir.join("comm_edges.csv"))?;
    edges.write_record(["i", "j"])?;
    for &(i, j) in g.edges() {
        edges.write_record([i.to_string(), j.to_string()])?;
    }
    edges.flush()?;
    Ok(())
}

pub fn write_data_graph(dir: &Path, d: &DataGraph) -> Result<(), IoError> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("data_edges.csv"))?;
    w.write_record(["i", "j", "weight"])?;
    for (i, j, weight) in d.edges() {
        w.write_record([i.to_string(), j.to_string(), weight.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_signals(dir: &Path, x: &SignalMatrix) -> Result<(), IoError> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("signals.csv"))?;
    let mut header = vec!["node".to_string()];
    header.extend((0..x.n_signals()).map(|m| format!("s{m}")));
    w.write_record(&header)?;
    for i in 0..x.n_nodes() {
        let mut record = vec![i.to_string()];
        record.extend(x.row(i).iter().map(|v| v.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ledger(path: &Path, ledger: &MessageLedger) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["phase", "count"])?;
    for (phase, count) in ledger.rows() {
        w.write_record([phase.to_string(), count.to_string()])?;
    }
    w.write_record(["total".to_string(), ledger.total().to_string()])?;
    w.flush()?;
    Ok(())
}

/// Learned edges, trace and ledger of one run under `dir`.
pub fn write_run_result(dir: &Path, g: &CommGraph, res: &RunResult) -> Result<(), IoError> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("learned_edges.csv"))?;
    w.write_record(["i", "j", "weight"])?;
    for &(i, j) in g.edges() {
        w.write_record([
            i.to_string(),
            j.to_string(),
            res.learned.get(i, j).to_string(),
        ])?;
    }
    w.flush()?;

    let mut t = csv::Writer::from_path(dir.join("trace.csv"))?;
    t.write_record(["round", "objective_after_local", "objective", "max_change"])?;
    for e in &res.trace {
        t.write_record([
            e.round.to_string(),
            e.objective_after_local.to_string(),
            e.objective.to_string(),
            e.max_change.to_string(),
        ])?;
    }
    t.flush()?;

    write_ledger(&dir.join("ledger.csv"), &res.ledger)?;
    Ok(())
}

/// Reads `nodes.csv` + `comm_edges.csv` back into a graph. The radius is not
/// stored; edges are taken as written.
pub fn read_comm_graph(dir: &Path) -> Result<CommGraph, IoError> {
    let mut nodes = csv::Reader::from_path(dir.join("nodes.csv"))?;
    let mut positions: Vec<[f64; 2]> = Vec::new();
    for (row, rec) in nodes.records().enumerate() {
        let rec = rec?;
        if rec.len() != 3 {
            return Err(malformed("nodes.csv", row, "expected 3 columns"));
        }
        let id: usize = rec[0]
            .parse()
            .map_err(|e| malformed("nodes.csv", row, format!("bad node id: {e}")))?;
        if id != positions.len() {
            return Err(malformed("nodes.csv", row, "node ids must be consecutive"));
        }
        let x: f64 = rec[1]
            .parse()
            .map_err(|e| malformed("nodes.csv", row, format!("bad x: {e}")))?;
        let y: f64 = rec[2]
            .parse()
            .map_err(|e| malformed("nodes.csv", row, format!("bad y: {e}")))?;
        positions.push([x, y]);
    }
    let n = positions.len();

    let mut edges_reader = csv::Reader::from_path(dir.join("comm_edges.csv"))?;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (row, rec) in edges_reader.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(malformed("comm_edges.csv", row, "expected 2 columns"));
        }
        let i: usize = rec[0]
            .parse()
            .map_err(|e| malformed("comm_edges.csv", row, format!("bad i: {e}")))?;
        let j: usize = rec[1]
            .parse()
            .map_err(|e| malformed("comm_edges.csv", row, format!("bad j: {e}")))?;
        if i >= n || j >= n || i == j {
            return Err(malformed("comm_edges.csv", row, "edge endpoints invalid"));
        }
        edges.push((i, j));
    }
    Ok(CommGraph::from_positions_and_edges(positions, edges))
}

/// Reads `data_edges.csv` against an existing communication graph.
pub fn read_data_graph(dir: &Path, g: &Arc<CommGraph>) -> Result<DataGraph, IoError> {
    let mut reader = csv::Reader::from_path(dir.join("data_edges.csv"))?;
    let mut weights = UpperWeights::zeros(g.n_nodes());
    for (row, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.len() != 3 {
            return Err(malformed("data_edges.csv", row, "expected 3 columns"));
        }
        let i: usize = rec[0]
            .parse()
            .map_err(|e| malformed("data_edges.csv", row, format!("bad i: {e}")))?;
        let j: usize = rec[1]
            .parse()
            .map_err(|e| malformed("data_edges.csv", row, format!("bad j: {e}")))?;
        let w: f64 = rec[2]
            .parse()
            .map_err(|e| malformed("data_edges.csv", row, format!("bad weight: {e}")))?;
        weights.set(i, j, w);
    }
    Ok(DataGraph::new(weights, Arc::clone(g))?)
}

pub fn read_signals(dir: &Path) -> Result<SignalMatrix, IoError> {
    let mut reader = csv::Reader::from_path(dir.join("signals.csv"))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.len() < 2 {
            return Err(malformed("signals.csv", row, "expected node plus signals"));
        }
        let id: usize = rec[0]
            .parse()
            .map_err(|e| malformed("signals.csv", row, format!("bad node id: {e}")))?;
        if id != rows.len() {
            return Err(malformed(
                "signals.csv",
                row,
                "node ids must be consecutive",
            ));
        }
        let mut values = Vec::with_capacity(rec.len() - 1);
        for field in rec.iter().skip(1) {
            values.push(
                field
                    .parse()
                    .map_err(|e| malformed("signals.csv", row, format!("bad value: {e}")))?,
            );
        }
        rows.push(values);
    }
    Ok(SignalMatrix::from_rows(rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_instance, GenConfig};

    #[test]
    fn graph_and_signal_round_trip() {
        let mut cfg = GenConfig::new(15, 4);
        cfg.n_signals = 6;
        let (g, d, x) = generate_instance(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_comm_graph(dir.path(), &g).unwrap();
        write_data_graph(dir.path(), &d).unwrap();
        write_signals(dir.path(), &x).unwrap();

        let g2 = Arc::new(read_comm_graph(dir.path()).unwrap());
        assert_eq!(g2.edges(), g.edges());
        assert_eq!(g2.positions(), g.positions());
        let d2 = read_data_graph(dir.path(), &g2).unwrap();
        assert_eq!(d2.weights(), d.weights());
        let x2 = read_signals(dir.path()).unwrap();
        assert_eq!(x2, x);
    }

    #[test]
    fn run_result_artifacts_are_written() {
        use crate::dist::{run_distributed, GlobalRunConfig};
        use crate::graph::edge_differences;
        use crate::ledger::Transport;

        let mut cfg = GenConfig::new(10, 2);
        cfg.n_signals = 4;
        cfg.radius = 0.7;
        let (g, _d, x) = generate_instance(&cfg).unwrap();
        let z = edge_differences(&x, &g).unwrap();
        let mut t = Transport::new();
        let res = run_distributed(&g, &z, &GlobalRunConfig::default(), &mut t).unwrap();

        let dir = tempfile::tempdir().unwrap();
        write_run_result(dir.path(), &g, &res).unwrap();
        for file in ["learned_edges.csv", "trace.csv", "ledger.csv"] {
            assert!(dir.path().join(file).exists(), "missing {file}");
        }
        let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
        assert!(trace.lines().count() >= res.trace.len());
        let learned = fs::read_to_string(dir.path().join("learned_edges.csv")).unwrap();
        assert_eq!(learned.lines().count(), g.n_edges() + 1);
    }

    #[test]
    fn ledger_csv_has_all_phases() {
        let mut ledger = MessageLedger::new();
        ledger.charge(crate::ledger::Phase::InitSignals, 12);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ledger.csv");
        write_ledger(&path, &ledger).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("init_signals,12"));
        assert!(text.contains("central_down,0"));
        assert!(text.contains("total,12"));
    }

    #[test]
    fn malformed_rows_are_reported_with_position() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("nodes.csv"), "node,x,y\n0,0.1,oops\n").unwrap();
        fs::write(dir.path().join("comm_edges.csv"), "i,j\n").unwrap();
        match read_comm_graph(dir.path()) {
            Err(IoError::Malformed { file, row, .. }) => {
                assert_eq!(file, "nodes.csv");
                assert_eq!(row, 0);
            }
            other => panic!("expected malformed error, got {other:?}"),
        }
    }
}
