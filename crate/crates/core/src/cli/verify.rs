use std::path::PathBuf;

use serde::Serialize;

use crate::graph::{
    grid3_corner_killed, p2_killed, random_test_graph, read_graph_file, RandomGraphParams,
    WeightedGraph,
};
use crate::potential::{check_identities, doob_capacity_identity};

use super::CliError;

/// Largest acceptable residual of any identity.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

/// Targets `x` tried per graph, counted from vertex 1.
const MAX_TARGETS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityRow {
    pub graph: String,
    pub green_factorization: f64,
    pub killed_at_target: f64,
    pub last_exit: f64,
    pub hitting: f64,
    pub capacity: f64,
    pub doob: f64,
}

impl IdentityRow {
    pub fn max(&self) -> f64 {
        [
            self.green_factorization,
            self.killed_at_target,
            self.last_exit,
            self.hitting,
            self.capacity,
            self.doob,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Resolves a fixture list such as `p2, grid3, random:50, file:g.txt`.
pub fn fixtures(list: &str, seed: u64) -> Result<Vec<(String, WeightedGraph)>, CliError> {
    let mut out = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item {
            "p2" => out.push(("p2".to_string(), p2_killed())),
            "grid3" => out.push(("grid3".to_string(), grid3_corner_killed())),
            _ => {
                if let Some(count) = item.strip_prefix("random:") {
                    let count: u64 = count
                        .parse()
                        .map_err(|_| CliError::Config(format!("bad fixture `{item}`")))?;
                    let params = RandomGraphParams::default();
                    for index in 0..count {
                        out.push((
                            format!("random:{seed}:{index}"),
                            random_test_graph(seed, index, &params),
                        ));
                    }
                } else if let Some(path) = item.strip_prefix("file:") {
                    let g = read_graph_file(&PathBuf::from(path))
                        .map_err(|e| CliError::Input(format!("{path}: {e}")))?;
                    out.push((item.to_string(), g));
                } else {
                    return Err(CliError::Config(format!("unknown fixture `{item}`")));
                }
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::Config("no fixtures listed".into()));
    }
    Ok(out)
}

/// Worst residual of every identity over base 0 and the first targets.
pub fn identity_row(label: &str, g: &WeightedGraph) -> Result<IdentityRow, CliError> {
    let mut row = IdentityRow {
        graph: label.to_string(),
        green_factorization: 0.0,
        killed_at_target: 0.0,
        last_exit: 0.0,
        hitting: 0.0,
        capacity: 0.0,
        doob: 0.0,
    };
    let n = g.vertex_count();
    for x in (1..n).take(MAX_TARGETS) {
        let r = check_identities(g, 0, x).map_err(|e| CliError::Input(e.to_string()))?;
        row.green_factorization = row.green_factorization.max(r.green_factorization);
        row.killed_at_target = row.killed_at_target.max(r.killed_at_target);
        row.last_exit = row.last_exit.max(r.last_exit);
        row.hitting = row.hitting.max(r.hitting);
        row.capacity = row.capacity.max(r.capacity);
        let d = doob_capacity_identity(g, x, &[0]).map_err(|e| CliError::Input(e.to_string()))?;
        row.doob = row.doob.max(d.residual());
    }
    Ok(row)
}

pub fn render(rows: &[IdentityRow]) -> String {
    let mut out = format!(
        "{:<18} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}\n",
        "graph", "factor", "killed", "last-exit", "hitting", "capacity", "doob"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<18} {:>10.2e} {:>10.2e} {:>10.2e} {:>10.2e} {:>10.2e} {:>10.2e}\n",
            r.graph, r.green_factorization, r.killed_at_target, r.last_exit, r.hitting, r.capacity, r.doob
        ));
    }
    let worst = rows.iter().map(IdentityRow::max).fold(0.0, f64::max);
    out.push_str(&format!("max residual {worst:.3e} (tolerance {IDENTITY_TOLERANCE:e})\n"));
    out
}
