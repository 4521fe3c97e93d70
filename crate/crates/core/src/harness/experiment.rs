use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::clustering::{Task, Worker};
use crate::evaluation::EvalBasis;
use crate::metrics::{standardize, IndicatorReport, StandardizedReport};
use crate::ncgraph::Reconfiguration;

use super::config::{OrderKind, RunConfig};
use super::pipeline::{cell_artifacts, cluster_stage, reconfigure_stage, run_cell, upstream_artifacts, Artifacts};
use super::HarnessError;

/// Matching weight used throughout stage 1.
pub const STAGE1_W: f64 = 0.5;
const STAGE1_LAYERS: [usize; 2] = [1, 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey {
    pub layers: usize,
    pub basis: EvalBasis,
    pub order: OrderKind,
}

impl CellKey {
    pub fn path(&self) -> String {
        format!("L{}/{}/{}", self.layers, self.basis, self.order.name())
    }

    pub fn config(&self, base: &RunConfig) -> RunConfig {
        RunConfig {
            layers: self.layers,
            basis: self.basis,
            order: self.order,
            w: STAGE1_W,
            ..base.clone()
        }
    }
}

#[derive(Debug, Clone)]
pub struct Stage1Report {
    /// All 40 cells; a failed cell keeps its error message.
    pub cells: BTreeMap<CellKey, Result<IndicatorReport, String>>,
    /// Payoff indicators relative to the Random cell with the same layers
    /// and basis.
    pub standardized: BTreeMap<CellKey, StandardizedReport>,
    pub standardization_errors: BTreeMap<(usize, EvalBasis), String>,
    pub artifacts: Artifacts,
}

/// 5 traversal orders × 4 evaluation bases × {1, 2} layers at `w = 0.5`.
pub fn run_stage1(base: &RunConfig, tasks: &[Task], workers: &[Worker]) -> Result<Stage1Report, HarnessError> {
    base.validate()?;
    let clustered = cluster_stage(base, tasks, workers)?;
    let reconfigs: BTreeMap<usize, Result<Reconfiguration, String>> = STAGE1_LAYERS
        .par_iter()
        .map(|&l| (l, reconfigure_stage(l, &clustered).map_err(|e| e.to_string())))
        .collect();

    let keys: Vec<CellKey> = STAGE1_LAYERS
        .iter()
        .flat_map(|&layers| {
            EvalBasis::ALL.into_iter().flat_map(move |basis| {
                OrderKind::ALL
                    .into_iter()
                    .map(move |order| CellKey { layers, basis, order })
            })
        })
        .collect();

    let outputs: Vec<(CellKey, Result<(IndicatorReport, Artifacts), String>)> = keys
        .par_iter()
        .map(|key| {
            let cfg = key.config(base);
            let out = match &reconfigs[&key.layers] {
                Ok(r) => run_cell(&cfg, &clustered, &r.adjacency)
                    .map(|cell| (cell.report, cell_artifacts(&cfg, &clustered, &cell)))
                    .map_err(|e| e.to_string()),
                Err(e) => Err(e.clone()),
            };
            (*key, out)
        })
        .collect();

    let mut artifacts = Artifacts::default();
    // Base graphs do not depend on the layer count.
    if let Some(Ok(r)) = reconfigs.values().next() {
        artifacts = upstream_artifacts(base, &clustered, r);
    } else {
        artifacts.insert("config.txt", base.to_kv());
    }
    let mut cells = BTreeMap::new();
    for (key, out) in outputs {
        match out {
            Ok((report, files)) => {
                artifacts.nest(&key.path(), files);
                cells.insert(key, Ok(report));
            }
            Err(e) => {
                artifacts.insert(format!("{}/error.txt", key.path()), format!("{e}\n"));
                cells.insert(key, Err(e));
            }
        }
    }

    let mut standardized = BTreeMap::new();
    let mut standardization_errors = BTreeMap::new();
    for &layers in &STAGE1_LAYERS {
        for basis in EvalBasis::ALL {
            let group: BTreeMap<OrderKind, IndicatorReport> = OrderKind::ALL
                .into_iter()
                .filter_map(|order| match &cells[&CellKey { layers, basis, order }] {
                    Ok(r) => Some((order, *r)),
                    Err(_) => None,
                })
                .collect();
            match standardize(&group, &OrderKind::Random) {
                Ok(s) => {
                    for (order, r) in s {
                        standardized.insert(CellKey { layers, basis, order }, r);
                    }
                }
                Err(e) => {
                    standardization_errors.insert((layers, basis), e.to_string());
                }
            }
        }
    }

    artifacts.insert("grid.csv", grid_csv(base, &cells));
    artifacts.insert(
        "standardized.csv",
        standardized_csv(&standardized, &standardization_errors),
    );
    Ok(Stage1Report {
        cells,
        standardized,
        standardization_errors,
        artifacts,
    })
}

fn grid_csv(base: &RunConfig, cells: &BTreeMap<CellKey, Result<IndicatorReport, String>>) -> String {
    let mut out = format!("layers,basis,order,cap,w,status,{}\n", IndicatorReport::CSV_HEADER);
    for (key, r) in cells {
        let cap = key.config(base).effective_cap();
        match r {
            Ok(r) => out.push_str(&format!(
                "{},{},{},{},{},ok,{}\n",
                key.layers,
                key.basis,
                key.order.name(),
                cap,
                STAGE1_W,
                r.csv_row()
            )),
            Err(_) => out.push_str(&format!(
                "{},{},{},{},{},error,,,,,,\n",
                key.layers,
                key.basis,
                key.order.name(),
                cap,
                STAGE1_W
            )),
        }
    }
    out
}

fn standardized_csv(
    standardized: &BTreeMap<CellKey, StandardizedReport>,
    errors: &BTreeMap<(usize, EvalBasis), String>,
) -> String {
    let mut out = format!("layers,basis,order,baseline,{}\n", IndicatorReport::CSV_HEADER);
    for (key, s) in standardized {
        out.push_str(&format!(
            "{},{},{},Random,{},{},{},{},{},{}\n",
            key.layers,
            key.basis,
            key.order.name(),
            s.task_allocation_rate,
            s.worker_utilization_rate,
            s.total_requester_payoff,
            s.total_worker_payoff,
            s.requester_payoff_variance,
            s.worker_payoff_variance
        ));
    }
    for ((layers, basis), e) in errors {
        out.push_str(&format!("# L{layers} {basis}: {e}\n"));
    }
    out
}

#[derive(Debug, Clone)]
pub struct Stage2Report {
    pub points: Vec<(f64, IndicatorReport)>,
    pub artifacts: Artifacts,
}

/// `start:end:step` (inclusive) or a comma-separated list.
pub fn parse_w_grid(s: &str) -> Result<Vec<f64>, HarnessError> {
    let bad = || HarnessError::InvalidConfig(format!("bad w grid {s:?}"));
    let values: Vec<f64> = if s.contains(':') {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        let [start, end, step] = parts[..] else {
            return Err(bad());
        };
        if !(step > 0.0) || end < start {
            return Err(bad());
        }
        let n = ((end - start) / step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
            .collect()
    } else {
        s.split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?
    };
    if values.is_empty() || values.iter().any(|w| !(0.0..=1.0).contains(w)) {
        return Err(HarnessError::InvalidConfig(format!(
            "w grid {s:?} must be non-empty and inside [0, 1]"
        )));
    }
    Ok(values)
}

/// Runs the base configuration once per `w`.
pub fn run_stage2(
    base: &RunConfig,
    tasks: &[Task],
    workers: &[Worker],
    w_grid: &[f64],
) -> Result<Stage2Report, HarnessError> {
    base.validate()?;
    if let Some(w) = w_grid.iter().find(|w| !(0.0..=1.0).contains(*w)) {
        return Err(HarnessError::InvalidConfig(format!("w = {w} is outside [0, 1]")));
    }
    let clustered = cluster_stage(base, tasks, workers)?;
    let reconf = reconfigure_stage(base.layers, &clustered)?;
    let cells = w_grid
        .par_iter()
        .map(|&w| {
            let cfg = RunConfig { w, ..base.clone() };
            run_cell(&cfg, &clustered, &reconf.adjacency).map(|cell| {
                let files = cell_artifacts(&cfg, &clustered, &cell);
                (w, cell.report, files)
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    let mut artifacts = upstream_artifacts(base, &clustered, &reconf);
    let mut sweep = format!("w,{}\n", IndicatorReport::CSV_HEADER);
    let mut points = Vec::with_capacity(cells.len());
    for (w, report, files) in cells {
        sweep.push_str(&format!("{w},{}\n", report.csv_row()));
        artifacts.nest(&format!("w_{w}"), files);
        points.push((w, report));
    }
    artifacts.insert("sweep.csv", sweep);
    Ok(Stage2Report { points, artifacts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn w_grids() {
        let g = parse_w_grid("0:1:0.1").unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g[3], 0.3);
        assert_eq!(g[10], 1.0);
        assert_eq!(parse_w_grid("0.2, 0.7").unwrap(), vec![0.2, 0.7]);
        assert!(parse_w_grid("0:2:0.5").is_err());
        assert!(parse_w_grid("1:0:0.1").is_err());
        assert!(parse_w_grid("a:b").is_err());
    }
}
