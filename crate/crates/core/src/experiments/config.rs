use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::graph::{
    build_lattice_box, grid3_corner_killed, p2_killed, read_graph_file, GraphError, Vertex,
    WeightedGraph,
};

use super::ExperimentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ExperimentKind {
    TwoPoint,
    GreenGap,
    CapLaw,
    CapTail,
    OneArm,
    AnnulusJoint,
    Crossing,
}

impl ExperimentKind {
    pub const ALL: [Self; 7] = [
        Self::TwoPoint,
        Self::GreenGap,
        Self::CapLaw,
        Self::CapTail,
        Self::OneArm,
        Self::AnnulusJoint,
        Self::Crossing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::TwoPoint => "two-point",
            Self::GreenGap => "green-gap",
            Self::CapLaw => "cap-law",
            Self::CapTail => "cap-tail",
            Self::OneArm => "one-arm",
            Self::AnnulusJoint => "annulus-joint",
            Self::Crossing => "crossing",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ExperimentError::UnknownExperiment(s.to_string()))
    }
}

/// Graph an experiment runs on.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    /// Two vertices, unit edge, unit killing at both.
    P2Killed,
    /// 3×3 grid with unit killing on the corners.
    Grid3,
    LatticeBox {
        dimension: usize,
        side: usize,
        weight: f64,
    },
    File(PathBuf),
}

impl GraphSpec {
    pub fn build(&self) -> Result<WeightedGraph, GraphError> {
        match self {
            Self::P2Killed => Ok(p2_killed()),
            Self::Grid3 => Ok(grid3_corner_killed()),
            &Self::LatticeBox {
                dimension,
                side,
                weight,
            } => build_lattice_box(dimension, side, weight),
            Self::File(path) => read_graph_file(path),
        }
    }

    /// Box center, the middle of the grid, else vertex 0.
    pub fn default_base(&self, g: &WeightedGraph) -> Vertex {
        match self {
            Self::Grid3 => 4,
            _ => g.lattice().map_or(0, |geo| geo.center()),
        }
    }
}

impl std::fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::P2Killed => write!(f, "p2"),
            Self::Grid3 => write!(f, "grid3"),
            Self::LatticeBox {
                dimension,
                side,
                weight,
            } => write!(f, "box:{dimension}:{side}:{weight:?}"),
            Self::File(path) => write!(f, "file:{}", path.display()),
        }
    }
}

impl FromStr for GraphSpec {
    type Err = ExperimentError;

    /// `p2`, `grid3`, `box:DIM:SIDE[:WEIGHT]` or `file:PATH`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ExperimentError::InvalidConfig(format!("unrecognized graph `{s}`"));
        match s {
            "p2" => return Ok(Self::P2Killed),
            "grid3" => return Ok(Self::Grid3),
            _ => {}
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(Self::File(PathBuf::from(path)));
        }
        let rest = s.strip_prefix("box:").ok_or_else(bad)?;
        let parts: Vec<&str> = rest.split(':').collect();
        if !(2..=3).contains(&parts.len()) {
            return Err(bad());
        }
        let dimension = parts[0].parse().map_err(|_| bad())?;
        let side = parts[1].parse().map_err(|_| bad())?;
        let weight = match parts.get(2) {
            Some(w) => w.parse().map_err(|_| bad())?,
            None => 1.0,
        };
        Ok(Self::LatticeBox {
            dimension,
            side,
            weight,
        })
    }
}

/// Everything that determines an experiment's output, plus the worker
/// count, which does not.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub graph: GraphSpec,
    pub samples: u64,
    pub seed: u64,
    pub threads: usize,
    /// Cluster base point; defaults to [`GraphSpec::default_base`].
    pub base: Option<Vertex>,
    /// The vertex `x` of gap and conditioning experiments.
    pub target: Option<Vertex>,
    /// Two-point targets given as vertex ids.
    pub targets: Vec<Vertex>,
    /// Two-point targets given as lattice offsets from the base.
    pub offsets: Vec<Vec<i64>>,
    pub refinements: Vec<usize>,
    /// Adds the exact cable gap series to the gap experiment.
    pub cable_series: bool,
    /// Gap thresholds as fractions of the largest possible gap.
    pub t_fractions: Vec<f64>,
    /// Values `t` of the levels `−t` in the capacity-law experiment.
    pub levels: Vec<f64>,
    pub bins: usize,
    pub radii: Vec<usize>,
    pub annulus_inner: f64,
    pub annulus_outer: f64,
    pub s_grid: Vec<f64>,
    /// Volume growth exponent; defaults to the lattice dimension.
    pub alpha: Option<f64>,
    pub tail_points: usize,
    /// Capacities beyond the level with this exact survival are censored.
    pub cutoff_survival: f64,
    pub screen_size: usize,
    /// Fixed endpoint heights of the crossing oracle and the conductance.
    pub endpoint_values: (f64, f64),
    pub edge_weight: f64,
    /// Slope tolerance, or absolute tolerance of the crossing oracle.
    pub tolerance: f64,
    /// Extra absolute slack granted to refined gap series.
    pub slack: f64,
    /// Coarsest refinement whose gap series is asserted against the law;
    /// coarser ones only enter the convergence check.
    pub assert_from: usize,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, graph: GraphSpec, samples: u64, seed: u64) -> Self {
        let tolerance = match kind {
            ExperimentKind::CapTail => 0.1,
            ExperimentKind::OneArm => 0.15,
            ExperimentKind::Crossing => 0.01,
            _ => 0.0,
        };
        Self {
            kind,
            graph,
            samples,
            seed,
            threads: 1,
            base: None,
            target: None,
            targets: Vec::new(),
            offsets: Vec::new(),
            refinements: vec![1],
            cable_series: false,
            t_fractions: vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
            levels: vec![0.0],
            bins: 10,
            radii: vec![4, 8, 16, 24],
            annulus_inner: 0.125,
            annulus_outer: 0.5,
            s_grid: vec![0.0, 1.0, 2.0, 4.0, 8.0, 12.0, 16.0, 24.0, 32.0, f64::INFINITY],
            alpha: None,
            tail_points: 12,
            cutoff_survival: 0.04,
            screen_size: 400,
            endpoint_values: (1.0, 1.0),
            edge_weight: 1.0,
            tolerance,
            slack: 0.0,
            assert_from: 1,
        }
    }

    /// Sets one field from its config-file spelling.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), ExperimentError> {
        let bad = |what: &str| {
            ExperimentError::InvalidConfig(format!("key `{key}`: bad {what} `{value}`"))
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad("number"));
        let int = |v: &str| v.trim().parse::<usize>().map_err(|_| bad("integer"));
        let list = |v: &str| -> Vec<String> {
            v.split(',')
                .map(|t| t.trim().to_string())
                .filter(|t| !t.is_empty())
                .collect()
        };
        match key {
            "experiment" => self.kind = value.trim().parse()?,
            "graph" => self.graph = value.trim().parse()?,
            "samples" => self.samples = value.trim().parse().map_err(|_| bad("count"))?,
            "seed" => self.seed = value.trim().parse().map_err(|_| bad("seed"))?,
            "threads" => self.threads = int(value)?,
            "base" => self.base = Some(int(value)?),
            "target" => self.target = Some(int(value)?),
            "targets" => {
                self.targets = list(value).iter().map(|t| int(t)).collect::<Result<_, _>>()?
            }
            "offsets" => {
                self.offsets = value
                    .split(';')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(|t| {
                        list(t)
                            .iter()
                            .map(|c| c.parse::<i64>().map_err(|_| bad("offset")))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<_, _>>()?
            }
            "refinements" => {
                self.refinements = list(value).iter().map(|t| int(t)).collect::<Result<_, _>>()?
            }
            "cable_series" => {
                self.cable_series = value.trim().parse().map_err(|_| bad("boolean"))?
            }
            "t_fractions" => {
                self.t_fractions = list(value).iter().map(|t| num(t)).collect::<Result<_, _>>()?
            }
            "levels" => {
                self.levels = list(value).iter().map(|t| num(t)).collect::<Result<_, _>>()?
            }
            "bins" => self.bins = int(value)?,
            "radii" => self.radii = list(value).iter().map(|t| int(t)).collect::<Result<_, _>>()?,
            "annulus_inner" => self.annulus_inner = num(value)?,
            "annulus_outer" => self.annulus_outer = num(value)?,
            "s_grid" => {
                self.s_grid = list(value).iter().map(|t| num(t)).collect::<Result<_, _>>()?
            }
            "alpha" => self.alpha = Some(num(value)?),
            "tail_points" => self.tail_points = int(value)?,
            "cutoff_survival" => self.cutoff_survival = num(value)?,
            "screen_size" => self.screen_size = int(value)?,
            "endpoint_values" => {
                let v: Vec<f64> = list(value).iter().map(|t| num(t)).collect::<Result<_, _>>()?;
                if v.len() != 2 {
                    return Err(bad("pair"));
                }
                self.endpoint_values = (v[0], v[1]);
            }
            "edge_weight" => self.edge_weight = num(value)?,
            "tolerance" => self.tolerance = num(value)?,
            "slack" => self.slack = num(value)?,
            "assert_from" => self.assert_from = int(value)?,
            _ => return Err(ExperimentError::InvalidConfig(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let fail = |m: String| Err(ExperimentError::InvalidConfig(m));
        if self.samples == 0 {
            return fail("samples must be at least 1".into());
        }
        if self.threads == 0 {
            return fail("threads must be at least 1".into());
        }
        if self.refinements.is_empty() || self.refinements.contains(&0) {
            return fail("refinements must be positive".into());
        }
        if self.kind == ExperimentKind::AnnulusJoint {
            let (a, b) = (self.annulus_inner, self.annulus_outer);
            if !(a > 0.0 && 2.0 * a <= b && b <= 1.0) {
                return fail(format!("annulus fractions need 0 < 2a <= b <= 1, got {a}, {b}"));
            }
        }
        if self.kind == ExperimentKind::CapLaw && self.bins < 2 {
            return fail("need at least two capacity bins".into());
        }
        if self.kind == ExperimentKind::CapTail && self.tail_points < 3 {
            return fail("need at least three tail points".into());
        }
        if !(self.cutoff_survival > 0.0 && self.cutoff_survival < 0.5) {
            return fail("cutoff_survival must lie in (0, 1/2)".into());
        }
        Ok(())
    }

    /// Output-relevant fields as `key = value` lines; the worker count is
    /// left out since it does not change any result.
    pub fn canonical(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let joinu = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let offsets = self
            .offsets
            .iter()
            .map(|o| o.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join(";");
        let opt = |v: Option<usize>| v.map_or("-".to_string(), |x| x.to_string());
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        line("experiment", self.kind.name().into());
        line("graph", self.graph.to_string());
        line("samples", self.samples.to_string());
        line("seed", self.seed.to_string());
        line("base", opt(self.base));
        line("target", opt(self.target));
        line("targets", joinu(&self.targets));
        line("offsets", offsets);
        line("refinements", joinu(&self.refinements));
        line("cable_series", self.cable_series.to_string());
        line("t_fractions", join(&self.t_fractions));
        line("levels", join(&self.levels));
        line("bins", self.bins.to_string());
        line("radii", joinu(&self.radii));
        line("annulus_inner", format!("{:?}", self.annulus_inner));
        line("annulus_outer", format!("{:?}", self.annulus_outer));
        line("s_grid", join(&self.s_grid));
        line("alpha", self.alpha.map_or("-".into(), |a| format!("{a:?}")));
        line("tail_points", self.tail_points.to_string());
        line("cutoff_survival", format!("{:?}", self.cutoff_survival));
        line("screen_size", self.screen_size.to_string());
        line(
            "endpoint_values",
            join(&[self.endpoint_values.0, self.endpoint_values.1]),
        );
        line("edge_weight", format!("{:?}", self.edge_weight));
        line("tolerance", format!("{:?}", self.tolerance));
        line("slack", format!("{:?}", self.slack));
        line("assert_from", self.assert_from.to_string());
        out
    }

    /// Hex SHA-256 of [`ExperimentConfig::canonical`].
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_spec_round_trip() {
        for s in ["p2", "grid3", "box:3:48:1.0", "file:/tmp/g.txt"] {
            let spec: GraphSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert_eq!(
            "box:2:5".parse::<GraphSpec>().unwrap(),
            GraphSpec::LatticeBox {
                dimension: 2,
                side: 5,
                weight: 1.0
            }
        );
        assert!("box:3".parse::<GraphSpec>().is_err());
        assert!("torus".parse::<GraphSpec>().is_err());
    }

    #[test]
    fn apply_and_fingerprint() {
        let mut c = ExperimentConfig::new(ExperimentKind::TwoPoint, GraphSpec::P2Killed, 10, 1);
        let before = c.fingerprint();
        c.apply("threads", "8").unwrap();
        assert_eq!(c.fingerprint(), before);
        c.apply("offsets", "1,0,0; 2, 1, 0").unwrap();
        assert_eq!(c.offsets, vec![vec![1, 0, 0], vec![2, 1, 0]]);
        assert_ne!(c.fingerprint(), before);
        c.apply("s_grid", "0, 1, inf").unwrap();
        assert!(c.s_grid[2].is_infinite());
        assert!(c.apply("bogus", "1").is_err());
        assert!(c.apply("samples", "-3").is_err());
        assert!(c.apply("experiment", "nope").is_err());
    }

    #[test]
    fn annulus_fractions_validated() {
        let mut c = ExperimentConfig::new(
            ExperimentKind::AnnulusJoint,
            GraphSpec::P2Killed,
            10,
            1,
        );
        assert!(c.validate().is_ok());
        c.annulus_inner = 0.3;
        assert!(c.validate().is_err());
        c.samples = 0;
        c.annulus_inner = 0.1;
        assert!(c.validate().is_err());
    }
}
