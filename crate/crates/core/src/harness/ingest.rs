use std::collections::{BTreeMap, HashSet};
use std::io::Read;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::clustering::{trajectory_to_location, Task, Worker};
use crate::geometry::PlanarPoint;

use super::config::RunConfig;
use super::geo::Projection;
use super::synth::TrajectoryPoint;
use super::{seed_for, HarnessError};

/// Row accounting for one ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IngestReport {
    pub rows: usize,
    pub outside_box: usize,
    pub duplicates: usize,
    /// Rewards or abilities filled in from the configured distribution.
    pub drawn: usize,
    pub kept: usize,
}

impl std::fmt::Display for IngestReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "rows={} outside_box={} duplicates={} drawn={} kept={}",
            self.rows, self.outside_box, self.duplicates, self.drawn, self.kept
        )
    }
}

struct Rows {
    header: Vec<String>,
    records: Vec<(usize, csv::StringRecord)>,
}

fn read_rows(reader: impl Read) -> Result<Rows, HarnessError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(e, 1))?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(e, 0))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        records.push((line, rec));
    }
    Ok(Rows { header, records })
}

fn csv_error(e: csv::Error, fallback_line: usize) -> HarnessError {
    let line = e
        .position()
        .map_or(fallback_line, |p| p.line() as usize);
    HarnessError::Parse {
        line,
        message: e.to_string(),
    }
}

fn column(header: &[String], name: &str) -> Option<usize> {
    header.iter().position(|h| h == name)
}

fn require(header: &[String], name: &str) -> Result<usize, HarnessError> {
    column(header, name).ok_or_else(|| HarnessError::Parse {
        line: 1,
        message: format!("missing column {name:?}"),
    })
}

fn field<'a>(rec: &'a csv::StringRecord, idx: usize, line: usize, name: &str) -> Result<&'a str, HarnessError> {
    match rec.get(idx) {
        Some(v) if !v.is_empty() => Ok(v),
        _ => Err(HarnessError::Parse {
            line,
            message: format!("missing {name}"),
        }),
    }
}

fn number(rec: &csv::StringRecord, idx: usize, line: usize, name: &str) -> Result<f64, HarnessError> {
    let raw = field(rec, idx, line, name)?;
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| HarnessError::Parse {
            line,
            message: format!("malformed {name} {raw:?}"),
        })
}

fn optional_positive(
    rec: &csv::StringRecord,
    idx: Option<usize>,
    line: usize,
    name: &str,
) -> Result<Option<f64>, HarnessError> {
    let Some(idx) = idx else { return Ok(None) };
    match rec.get(idx) {
        None | Some("") => Ok(None),
        Some(_) => {
            let v = number(rec, idx, line, name)?;
            if v <= 0.0 {
                return Err(HarnessError::Parse {
                    line,
                    message: format!("{name} must be positive, got {v}"),
                });
            }
            Ok(Some(v))
        }
    }
}

fn lon_lat(rec: &csv::StringRecord, lon: usize, lat: usize, line: usize) -> Result<(f64, f64), HarnessError> {
    let lo = number(rec, lon, line, "longitude")?;
    let la = number(rec, lat, line, "latitude")?;
    if !(-180.0..=180.0).contains(&lo) {
        return Err(HarnessError::Parse {
            line,
            message: format!("longitude {lo} out of range"),
        });
    }
    if !(-90.0..=90.0).contains(&la) {
        return Err(HarnessError::Parse {
            line,
            message: format!("latitude {la} out of range"),
        });
    }
    Ok((lo, la))
}

/// Reads `id,lon,lat[,reward]` rows, keeps those inside the configured box,
/// drops later rows landing on an already seen grid point, and draws any
/// missing reward.
pub fn ingest_tasks(reader: impl Read, cfg: &RunConfig) -> Result<(Vec<Task>, IngestReport), HarnessError> {
    let rows = read_rows(reader)?;
    let (id_c, lon_c, lat_c) = (
        require(&rows.header, "id")?,
        require(&rows.header, "lon")?,
        require(&rows.header, "lat")?,
    );
    let reward_c = column(&rows.header, "reward");
    let proj = cfg.bbox.projection();
    let mut rng = ChaCha8Rng::seed_from_u64(seed_for(cfg.seed, "ingest-rewards"));
    let mut report = IngestReport::default();
    let mut seen = HashSet::new();
    let mut tasks = Vec::new();
    for (line, rec) in &rows.records {
        let line = *line;
        report.rows += 1;
        let id = field(rec, id_c, line, "id")?.to_string();
        let (lon, lat) = lon_lat(rec, lon_c, lat_c, line)?;
        let reward = optional_positive(rec, reward_c, line, "reward")?;
        if !cfg.bbox.contains(lon, lat) {
            report.outside_box += 1;
            continue;
        }
        let location = proj.project(lon, lat);
        if !seen.insert(location) {
            report.duplicates += 1;
            continue;
        }
        let reward = reward.unwrap_or_else(|| {
            report.drawn += 1;
            cfg.reward.sample(&mut rng)
        });
        tasks.push(Task { id, location, reward });
    }
    report.kept = tasks.len();
    if tasks.is_empty() {
        return Err(HarnessError::EmptyAfterFilter("tasks"));
    }
    Ok((tasks, report))
}

/// Reads either raw trajectories (`driver_id,timestamp,lon,lat`) or canonical
/// workers (`id,lon,lat[,ability]`), chosen by the header.
///
/// Trajectory points are grouped by driver, exact repeats of a grid point are
/// dropped, and each driver becomes one worker at the reduced location of its
/// trajectory. Workers outside the box are dropped. Missing abilities are
/// drawn in ascending id order.
pub fn ingest_workers(reader: impl Read, cfg: &RunConfig) -> Result<(Vec<Worker>, IngestReport), HarnessError> {
    let rows = read_rows(reader)?;
    if column(&rows.header, "driver_id").is_some() {
        ingest_trajectories(rows, cfg)
    } else {
        ingest_canonical_workers(rows, cfg)
    }
}

fn ingest_trajectories(rows: Rows, cfg: &RunConfig) -> Result<(Vec<Worker>, IngestReport), HarnessError> {
    let (id_c, lon_c, lat_c) = (
        require(&rows.header, "driver_id")?,
        require(&rows.header, "lon")?,
        require(&rows.header, "lat")?,
    );
    require(&rows.header, "timestamp")?;
    let proj = cfg.bbox.projection();
    let mut report = IngestReport::default();
    let mut by_driver: BTreeMap<String, Vec<PlanarPoint>> = BTreeMap::new();
    let mut seen: HashSet<(String, PlanarPoint)> = HashSet::new();
    for (line, rec) in &rows.records {
        let line = *line;
        report.rows += 1;
        let id = field(rec, id_c, line, "driver_id")?.to_string();
        let (lon, lat) = lon_lat(rec, lon_c, lat_c, line)?;
        let p = proj.project(lon, lat);
        if !seen.insert((id.clone(), p)) {
            report.duplicates += 1;
            continue;
        }
        by_driver.entry(id).or_default().push(p);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed_for(cfg.seed, "ingest-abilities"));
    let mut workers = Vec::new();
    for (id, points) in by_driver {
        let location = trajectory_to_location(&points, cfg.trajectory_eps_m, cfg.trajectory_min_pts)
            .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
        let (lon, lat) = proj.unproject(location);
        if !cfg.bbox.contains(lon, lat) {
            report.outside_box += 1;
            continue;
        }
        report.drawn += 1;
        workers.push(Worker {
            id,
            location,
            ability: cfg.ability.sample(&mut rng),
        });
    }
    report.kept = workers.len();
    if workers.is_empty() {
        return Err(HarnessError::EmptyAfterFilter("workers"));
    }
    Ok((workers, report))
}

fn ingest_canonical_workers(rows: Rows, cfg: &RunConfig) -> Result<(Vec<Worker>, IngestReport), HarnessError> {
    let (id_c, lon_c, lat_c) = (
        require(&rows.header, "id")?,
        require(&rows.header, "lon")?,
        require(&rows.header, "lat")?,
    );
    let ability_c = column(&rows.header, "ability");
    let proj = cfg.bbox.projection();
    let mut report = IngestReport::default();
    let mut parsed = Vec::new();
    let mut ids = HashSet::new();
    for (line, rec) in &rows.records {
        let line = *line;
        report.rows += 1;
        let id = field(rec, id_c, line, "id")?.to_string();
        let (lon, lat) = lon_lat(rec, lon_c, lat_c, line)?;
        let ability = optional_positive(rec, ability_c, line, "ability")?;
        if !cfg.bbox.contains(lon, lat) {
            report.outside_box += 1;
            continue;
        }
        if !ids.insert(id.clone()) {
            report.duplicates += 1;
            continue;
        }
        parsed.push((id, proj.project(lon, lat), ability));
    }
    let mut missing: Vec<usize> = (0..parsed.len()).filter(|&i| parsed[i].2.is_none()).collect();
    missing.sort_by(|&a, &b| parsed[a].0.cmp(&parsed[b].0));
    let mut rng = ChaCha8Rng::seed_from_u64(seed_for(cfg.seed, "ingest-abilities"));
    for i in missing {
        parsed[i].2 = Some(cfg.ability.sample(&mut rng));
        report.drawn += 1;
    }
    let workers: Vec<Worker> = parsed
        .into_iter()
        .map(|(id, location, ability)| Worker {
            id,
            location,
            ability: ability.expect("filled above"),
        })
        .collect();
    report.kept = workers.len();
    if workers.is_empty() {
        return Err(HarnessError::EmptyAfterFilter("workers"));
    }
    Ok((workers, report))
}

fn write_csv(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn degrees(proj: &Projection, p: PlanarPoint) -> (String, String) {
    let (lon, lat) = proj.unproject(p);
    (format!("{lon:.10}"), format!("{lat:.10}"))
}

/// Canonical `id,lon,lat,reward`.
pub fn tasks_to_csv(tasks: &[Task], proj: &Projection) -> String {
    write_csv(
        &["id", "lon", "lat", "reward"],
        tasks.iter().map(|t| {
            let (lon, lat) = degrees(proj, t.location);
            vec![t.id.clone(), lon, lat, t.reward.to_string()]
        }),
    )
}

/// Canonical `id,lon,lat,ability`.
pub fn workers_to_csv(workers: &[Worker], proj: &Projection) -> String {
    write_csv(
        &["id", "lon", "lat", "ability"],
        workers.iter().map(|w| {
            let (lon, lat) = degrees(proj, w.location);
            vec![w.id.clone(), lon, lat, w.ability.to_string()]
        }),
    )
}

pub fn trajectories_to_csv(points: &[TrajectoryPoint], proj: &Projection) -> String {
    write_csv(
        &["driver_id", "timestamp", "lon", "lat"],
        points.iter().map(|t| {
            let (lon, lat) = degrees(proj, t.location);
            vec![t.driver_id.clone(), t.timestamp.to_string(), lon, lat]
        }),
    )
}
