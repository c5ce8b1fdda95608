use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use onroad_core::compare::{compare_all, pair_buffer_hours, parse_stations, write_metrics_csv};
use onroad_core::config::{parse_synth_config, RunConfig};
use onroad_core::export::{hotspots_geojson, summaries_geojson, write_geojson};
use onroad_core::geo::Projection;
use onroad_core::hotspot::{identify_hotspots, write_hotspots_csv, HotspotParams, LevelThresholds};
use onroad_core::ingest::{qa_filter, write_observations_csv, Observation, ObservationReader, QaReport};
use onroad_core::network::io::{read_roads, read_segments_csv, segments_from_records, write_roads_csv, write_segments_csv};
use onroad_core::network::{build_segments, SegmentIndex};
use onroad_core::parallel::with_workers;
use onroad_core::reduce::{
    aggregate_hourly, snap_observations, summarize_segments, write_estimates_csv, write_summaries_csv,
    SnappedObservation,
};
use onroad_core::synth::{
    gen_network, gen_observations, gen_stations, gen_trajectories, write_ground_truth_csv, write_stations_csv,
};

use crate::output::write_atomic;

/// Error plus the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self { code: 1, error: anyhow!(msg.into()) }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Self { code: 2, error }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    path.as_deref().ok_or_else(|| Failure::usage(format!("--{flag} is required (or set it in --config)")))
}

fn read_file(path: &Path) -> anyhow::Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn pooled<T: Send>(workers: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    with_workers(workers, f).map_err(|e| anyhow!("cannot start worker pool: {e}"))?
}

struct Network {
    index: SegmentIndex,
    projection: Projection,
}

fn load_network(cfg: &RunConfig) -> Result<Network> {
    let (segments, projection) = if let Some(path) = &cfg.segments {
        let records = read_segments_csv(&read_file(path)?[..]).with_context(|| format!("{}", path.display()))?;
        let projection = match cfg.origin {
            Some(o) => Projection::new(o),
            None => Projection::centered_on(records.iter().flat_map(|r| &r.points))
                .ok_or_else(|| anyhow!("{} contains no segments", path.display()))?,
        };
        let segs = segments_from_records(&records, &projection).with_context(|| format!("{}", path.display()))?;
        (segs, projection)
    } else {
        let path = required(&cfg.roads, "roads")?;
        let roads = read_roads(&read_file(path)?).with_context(|| format!("{}", path.display()))?;
        let projection = match cfg.origin {
            Some(o) => Projection::new(o),
            None => Projection::centered_on(roads.iter().flat_map(|r| &r.points))
                .ok_or_else(|| anyhow!("{} contains no roads", path.display()))?,
        };
        let segs = build_segments(&roads, cfg.target_len_m, &projection).with_context(|| format!("{}", path.display()))?;
        (segs, projection)
    };
    let index = SegmentIndex::build(segments).context("building segment index")?;
    log::info!("{} segments", index.len());
    Ok(Network { index, projection })
}

/// One line of rejects.csv.
struct Reject {
    stage: &'static str,
    line: Option<u64>,
    device: String,
    timestamp: Option<i64>,
    reason: String,
}

#[derive(Default)]
struct Ingested {
    report: QaReport,
    rejects: Vec<Reject>,
}

const CHUNK: usize = 65_536;

/// Stream-parse and QA the observation file, handing accepted records to
/// `sink` in input-order chunks.
fn ingest(cfg: &RunConfig, mut sink: impl FnMut(Vec<Observation>, &mut Ingested)) -> Result<Ingested> {
    let path = required(&cfg.observations, "observations")?;
    let file = File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut out = Ingested::default();
    if file.metadata().map(|m| m.len() == 0).unwrap_or(false) {
        log::warn!("{} is empty", path.display());
        return Ok(out);
    }
    let mut reader = ObservationReader::new(std::io::BufReader::new(file)).with_context(|| format!("{}", path.display()))?;
    let mut chunk = Vec::with_capacity(CHUNK);
    let mut flush = |chunk: Vec<Observation>, out: &mut Ingested| {
        let qa = qa_filter(chunk);
        out.report.merge(&qa.report);
        for (o, rule) in qa.rejected {
            out.rejects.push(Reject {
                stage: "qa",
                line: None,
                device: o.device_id.to_string(),
                timestamp: Some(o.timestamp),
                reason: rule.as_str().to_string(),
            });
        }
        sink(qa.accepted, out);
    };
    while let Some(rec) = reader.next_record().with_context(|| format!("{}", path.display()))? {
        match rec {
            Ok(o) => {
                chunk.push(o);
                if chunk.len() == CHUNK {
                    flush(std::mem::replace(&mut chunk, Vec::with_capacity(CHUNK)), &mut out);
                }
            }
            Err(r) => {
                out.report.record_unparseable(1);
                out.rejects.push(Reject {
                    stage: "parse",
                    line: Some(r.line),
                    device: String::new(),
                    timestamp: None,
                    reason: r.reason,
                });
            }
        }
    }
    flush(chunk, &mut out);
    log::info!(
        "{} records: {} accepted, {} rejected by QA, {} unparseable",
        out.report.input_total(),
        out.report.accepted,
        out.report.rejected_total(),
        out.report.unparseable
    );
    Ok(out)
}

fn ingest_snapped(cfg: &RunConfig, net: &Network) -> Result<(Vec<SnappedObservation>, Ingested)> {
    let mut snapped = Vec::new();
    let ingested = ingest(cfg, |accepted, out| {
        let s = snap_observations(accepted, &net.index, &net.projection, cfg.max_snap_m);
        if s.rejected > 0 {
            out.rejects.push(Reject {
                stage: "snap",
                line: None,
                device: String::new(),
                timestamp: None,
                reason: format!("{} records farther than {} m from any segment", s.rejected, cfg.max_snap_m),
            });
        }
        snapped.extend(s.snapped);
    })?;
    log::info!("{} records snapped", snapped.len());
    Ok((snapped, ingested))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_ingest_outputs(dir: &Path, ingested: &Ingested) -> Result<()> {
    write_atomic(dir, "rejects.csv", |w| {
        writeln!(w, "stage,line,device_id,timestamp,reason")?;
        for r in &ingested.rejects {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.stage,
                r.line.map(|l| l.to_string()).unwrap_or_default(),
                csv_field(&r.device),
                r.timestamp.map(|t| t.to_string()).unwrap_or_default(),
                csv_field(&r.reason)
            )?;
        }
        Ok(())
    })?;
    write_atomic(dir, "qa_report.txt", |w| Ok(w.write_all(ingested.report.to_text().as_bytes())?))?;
    Ok(())
}

fn write_reduce_outputs(cfg: &RunConfig, net: &Network, snapped: &[SnappedObservation]) -> Result<()> {
    let estimates = aggregate_hourly(snapped, cfg.tz_offset_s);
    let summaries = summarize_segments(&estimates, cfg.tz_offset_s);
    log::info!("{} segment-hours, {} segments with data", estimates.len(), summaries.len());
    let dir = &cfg.out_dir;
    write_atomic(dir, "estimates.csv", |w| Ok(write_estimates_csv(w, &estimates)?))?;
    write_atomic(dir, "summaries.csv", |w| Ok(write_summaries_csv(w, &summaries)?))?;
    let geo = summaries_geojson(net.index.segments(), &net.projection, &summaries);
    write_atomic(dir, "summaries.geojson", |w| Ok(write_geojson(w, &geo)?))?;
    Ok(())
}

fn write_hotspot_outputs(cfg: &RunConfig, net: &Network, snapped: &[SnappedObservation]) -> Result<()> {
    let params = HotspotParams {
        gap_s: cfg.gap_s,
        vms_days: cfg.vms_days,
        tz_offset_s: cfg.tz_offset_s,
        thresholds: LevelThresholds::default(),
        counter_mode: cfg.counter_mode,
    };
    let results = identify_hotspots(snapped, &params).context("hotspot detection")?;
    let vms = results.iter().filter(|r| r.is_vms).count();
    let hot = results.iter().filter(|r| r.any_hotspot()).count();
    log::info!("{} segments observed, {vms} on at least {} days, {hot} hotspots", results.len(), cfg.vms_days);
    write_atomic(&cfg.out_dir, "hotspots.csv", |w| Ok(write_hotspots_csv(w, &results)?))?;
    let geo = hotspots_geojson(net.index.segments(), &net.projection, &results);
    write_atomic(&cfg.out_dir, "hotspots.geojson", |w| Ok(write_geojson(w, &geo)?))?;
    Ok(())
}

fn write_compare_outputs(cfg: &RunConfig, obs: &[Observation], projection: Option<&Projection>) -> Result<()> {
    let path = required(&cfg.stations, "stations")?;
    let parsed = parse_stations(&read_file(path)?[..]).with_context(|| format!("{}", path.display()))?;
    for r in &parsed.rejects {
        log::warn!("{}:{}: {}", path.display(), r.line, r.reason);
    }
    let projection = match (projection, cfg.origin) {
        (Some(p), _) => *p,
        (None, Some(o)) => Projection::new(o),
        (None, None) => match Projection::centered_on(parsed.records.iter().map(|r| &r.location)) {
            Some(p) => p,
            None => Projection::new(onroad_core::geo::GeoPoint { lat: 0.0, lon: 0.0 }),
        },
    };
    let pairs = pair_buffer_hours(obs, &parsed.records, &projection, cfg.buffer_radius_m, cfg.tz_offset_s);
    let reports = compare_all(&pairs);
    if pairs.is_empty() {
        log::warn!("no station hours overlap the mobile data; writing an empty report");
    } else {
        log::info!("{} paired hours, {} station/pollutant reports", pairs.len(), reports.len());
    }
    write_atomic(&cfg.out_dir, "metrics.csv", |w| Ok(write_metrics_csv(w, &reports)?))?;
    Ok(())
}

pub fn segment(cfg: &RunConfig) -> Result<()> {
    pooled(cfg.workers, || {
        let net = load_network(cfg)?;
        write_atomic(&cfg.out_dir, "segments.csv", |w| {
            Ok(write_segments_csv(w, net.index.segments(), &net.projection)?)
        })?;
        Ok(())
    })
}

pub fn reduce(cfg: &RunConfig) -> Result<()> {
    pooled(cfg.workers, || {
        let net = load_network(cfg)?;
        let (snapped, ingested) = ingest_snapped(cfg, &net)?;
        write_ingest_outputs(&cfg.out_dir, &ingested)?;
        write_reduce_outputs(cfg, &net, &snapped)
    })
}

pub fn hotspots(cfg: &RunConfig) -> Result<()> {
    pooled(cfg.workers, || {
        let net = load_network(cfg)?;
        let (snapped, _) = ingest_snapped(cfg, &net)?;
        write_hotspot_outputs(cfg, &net, &snapped)
    })
}

pub fn compare(cfg: &RunConfig) -> Result<()> {
    pooled(cfg.workers, || {
        required(&cfg.stations, "stations")?;
        let mut obs = Vec::new();
        ingest(cfg, |accepted, _| obs.extend(accepted))?;
        write_compare_outputs(cfg, &obs, None)
    })
}

pub fn run_all(cfg: &RunConfig) -> Result<()> {
    pooled(cfg.workers, || {
        let net = load_network(cfg)?;
        write_atomic(&cfg.out_dir, "segments.csv", |w| {
            Ok(write_segments_csv(w, net.index.segments(), &net.projection)?)
        })?;
        let (snapped, ingested) = ingest_snapped(cfg, &net)?;
        write_ingest_outputs(&cfg.out_dir, &ingested)?;
        write_reduce_outputs(cfg, &net, &snapped)?;
        write_hotspot_outputs(cfg, &net, &snapped)?;
        if cfg.stations.is_some() {
            // Records too far from any road still count inside a station buffer.
            let mut obs = Vec::new();
            ingest(cfg, |accepted, _| obs.extend(accepted))?;
            write_compare_outputs(cfg, &obs, Some(&net.projection))?;
        }
        Ok(())
    })
}

pub struct SynthRequest {
    pub config: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub tz_offset_s: Option<i64>,
    pub seed: Option<u64>,
}

pub fn synth(req: &SynthRequest) -> Result<()> {
    let mut cfg = match &req.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
            parse_synth_config(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?
        }
        None => Default::default(),
    };
    if let Some(s) = req.seed {
        cfg.seed = s;
    }
    if let Some(tz) = req.tz_offset_s {
        cfg.tz_offset_s = tz;
    }
    cfg.validate().map_err(|e| Failure::usage(e.to_string()))?;
    let dir = &req.out_dir;
    pooled(req.workers, || {
        let roads = gen_network(&cfg);
        let projection = Projection::centered_on(roads.iter().flat_map(|r| &r.points)).expect("grid has roads");
        let segments = build_segments(&roads, cfg.target_len_m, &projection).context("segmenting synthetic grid")?;
        let index = SegmentIndex::build(segments).context("indexing synthetic grid")?;
        let trajectories = gen_trajectories(&cfg, &roads).map_err(|e| Failure::usage(e.to_string()))?;
        let out = gen_observations(&cfg, &trajectories, &index, &projection).map_err(|e| Failure::usage(e.to_string()))?;
        drop(trajectories);
        log::info!(
            "{} roads, {} segments, {} observations, {} planted PM2.5 segments",
            roads.len(),
            index.len(),
            out.observations.len(),
            out.truth.planted.pm25.len()
        );
        write_atomic(dir, "roads.csv", |w| Ok(write_roads_csv(w, &roads)?))?;
        write_atomic(dir, "observations.csv", |w| Ok(write_observations_csv(w, &out.observations)?))?;
        write_atomic(dir, "ground_truth.csv", |w| Ok(write_ground_truth_csv(w, &out.truth)?))?;
        let stations = gen_stations(&cfg);
        if !stations.is_empty() {
            write_atomic(dir, "stations.csv", |w| Ok(write_stations_csv(w, &stations)?))?;
        }
        Ok(())
    })
}
