//! Deterministic synthetic worlds for end-to-end testing.
//!
//! A Manhattan road grid, a taxi fleet doing seeded random walks along it, a
//! diurnal pollution field with planted high-concentration zones, and
//! Gaussian GPS error. Every random draw comes from a ChaCha stream keyed by
//! the seed and the taxi number, so output is byte-identical for a given
//! configuration regardless of how many threads generate it.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::TAU;
use std::io::{self, Write};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::compare::StationRecord;
use crate::geo::{GeoPoint, PlanarPoint, Projection};
use crate::ingest::Observation;
use crate::network::{RoadClass, RoadPolyline, RoadSegment, SegmentIndex};
use crate::pollutant::{PerPollutant, Pollutant};
use crate::time::{local_hour_of_day, HOUR_S};

#[derive(Debug, Clone, PartialEq)]
pub struct FieldParams {
    /// Background level in pollutant units.
    pub base: f64,
    /// Peak height of the diurnal cycle above the background.
    pub amplitude: f64,
    /// Standard deviation of per-sample measurement noise.
    pub noise_sigma: f64,
}

/// Circular zone that adds a fixed elevation to every pollutant inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct HotspotZone {
    /// Metres from the grid centre.
    pub center: PlanarPoint,
    pub radius_m: f64,
    pub elevation: PerPollutant<f64>,
}

impl HotspotZone {
    pub fn contains(&self, p: PlanarPoint) -> bool {
        p.distance(&self.center) <= self.radius_m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    /// Geographic position of the grid centre.
    pub origin: GeoPoint,
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub spacing_m: f64,
    pub n_taxis: usize,
    pub start_epoch: i64,
    pub duration_s: i64,
    pub sample_interval_s: i64,
    pub speed_mps: f64,
    pub gps_sigma_m: f64,
    pub tz_offset_s: i64,
    pub target_len_m: f64,
    pub field: PerPollutant<FieldParams>,
    pub zones: Vec<HotspotZone>,
    /// Fixed monitoring sites, metres from the grid centre.
    pub stations: Vec<PlanarPoint>,
    /// Station readings are this fraction of the on-road background.
    pub station_ambient_factor: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            origin: GeoPoint { lat: 23.13, lon: 113.26 },
            grid_rows: 20,
            grid_cols: 20,
            spacing_m: 500.0,
            n_taxis: 314,
            // 2024-01-01T00:00:00+08:00
            start_epoch: 1_704_038_400,
            duration_s: 86_400,
            sample_interval_s: 10,
            speed_mps: 10.0,
            gps_sigma_m: 10.0,
            tz_offset_s: crate::time::DEFAULT_TZ_OFFSET_S,
            target_len_m: crate::network::DEFAULT_SEGMENT_LEN_M,
            field: PerPollutant {
                no2: FieldParams { base: 25.0, amplitude: 20.0, noise_sigma: 5.0 },
                pm25: FieldParams { base: 20.0, amplitude: 12.0, noise_sigma: 4.0 },
                pm10: FieldParams { base: 45.0, amplitude: 20.0, noise_sigma: 6.0 },
            },
            zones: Vec::new(),
            stations: Vec::new(),
            station_ambient_factor: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synthetic config: {0}")]
    Config(String),
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::Config(m.to_string()));
        if self.grid_rows < 2 || self.grid_cols < 2 {
            return bad("grid must be at least 2x2");
        }
        if !(self.spacing_m > 0.0) || self.n_taxis == 0 || self.duration_s <= 0 || self.sample_interval_s <= 0 {
            return bad("spacing, taxi count, duration and sample interval must be positive");
        }
        if !(self.speed_mps > 0.0) || !(self.gps_sigma_m >= 0.0) || !(self.target_len_m > 0.0) {
            return bad("speed and target length must be positive, gps sigma non-negative");
        }
        if self.start_epoch <= 0 {
            return bad("start_epoch must be positive");
        }
        for p in Pollutant::ALL {
            let f = self.field.get(p);
            if !(f.base >= 0.0) || !(f.amplitude >= 0.0) || !(f.noise_sigma >= 0.0) {
                return bad("field parameters must be non-negative");
            }
        }
        if self.zones.iter().any(|z| !(z.radius_m > 0.0)) {
            return bad("zone radius must be positive");
        }
        Ok(())
    }

    pub fn projection(&self) -> Projection {
        Projection::new(self.origin)
    }

    /// Observations the fleet will emit.
    pub fn expected_observations(&self) -> usize {
        self.n_taxis * (self.duration_s / self.sample_interval_s) as usize
    }

    fn grid_node(&self, row: usize, col: usize) -> PlanarPoint {
        PlanarPoint::new(
            (col as f64 - (self.grid_cols - 1) as f64 / 2.0) * self.spacing_m,
            (row as f64 - (self.grid_rows - 1) as f64 / 2.0) * self.spacing_m,
        )
    }

    /// Noise-free concentration at planar position `p` and time `ts`.
    pub fn true_concentration(&self, pollutant: Pollutant, p: PlanarPoint, ts: i64) -> f64 {
        let f = self.field.get(pollutant);
        let h = local_hour_of_day(ts, self.tz_offset_s);
        let zone: f64 = self.zones.iter().filter(|z| z.contains(p)).map(|z| *z.elevation.get(pollutant)).sum();
        (f.base + f.amplitude * diurnal_shape(pollutant, h) + zone).max(0.0)
    }
}

fn bump(h: f64, center: f64, width: f64) -> f64 {
    // Circular distance on the 24-h clock.
    let d = ((h - center).rem_euclid(24.0)).min((center - h).rem_euclid(24.0));
    (-(d * d) / (2.0 * width * width)).exp()
}

/// Diurnal profile in `[0, 1]`-ish units.
///
/// Particles peak in the morning (about 09:00) and evening (about 19:00).
/// NO₂ bottoms out at noon and peaks near 18:00.
pub fn diurnal_shape(pollutant: Pollutant, hour: f64) -> f64 {
    match pollutant {
        Pollutant::Pm25 | Pollutant::Pm10 => bump(hour, 9.0, 1.5) + bump(hour, 19.0, 1.5),
        Pollutant::No2 => 0.6 * 0.5 * (1.0 - (TAU * (hour - 12.0) / 24.0).cos()) + 0.4 * bump(hour, 18.0, 1.5),
    }
}

/// Horizontal and vertical grid lines. Classes rotate through the five road classes.
pub fn gen_network(config: &SynthConfig) -> Vec<RoadPolyline> {
    let proj = config.projection();
    let mut roads = Vec::with_capacity(config.grid_rows + config.grid_cols);
    let mut class = RoadClass::ALL.iter().cycle();
    for r in 0..config.grid_rows {
        let points = (0..config.grid_cols).map(|c| proj.unproject(config.grid_node(r, c))).collect();
        roads.push(RoadPolyline {
            road_id: format!("h{r}"),
            road_class: *class.next().expect("cycle"),
            points,
        });
    }
    for c in 0..config.grid_cols {
        let points = (0..config.grid_rows).map(|r| proj.unproject(config.grid_node(r, c))).collect();
        roads.push(RoadPolyline {
            road_id: format!("v{c}"),
            road_class: *class.next().expect("cycle"),
            points,
        });
    }
    roads
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub device_id: Arc<str>,
    /// `(timestamp, on-network position in the config's planar frame)`.
    pub points: Vec<(i64, PlanarPoint)>,
}

/// Undirected graph over polyline vertices.
struct WalkGraph {
    nodes: Vec<PlanarPoint>,
    adj: Vec<Vec<usize>>,
}

impl WalkGraph {
    fn from_roads(roads: &[RoadPolyline], proj: &Projection) -> Self {
        // Millimetre keys merge shared vertices that went through unproject/project.
        let key = |p: PlanarPoint| ((p.x * 1000.0).round() as i64, (p.y * 1000.0).round() as i64);
        let mut ids: BTreeMap<(i64, i64), usize> = BTreeMap::new();
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        for road in roads {
            let mut prev: Option<usize> = None;
            for g in &road.points {
                let p = proj.project(*g);
                let id = *ids.entry(key(p)).or_insert_with(|| {
                    nodes.push(p);
                    nodes.len() - 1
                });
                if let Some(a) = prev.filter(|a| *a != id) {
                    edges.push((a, id));
                }
                prev = Some(id);
            }
        }
        let mut adj = vec![Vec::new(); nodes.len()];
        for (a, b) in edges {
            if !adj[a].contains(&b) {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        Self { nodes, adj }
    }
}

fn taxi_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn device_name(i: usize) -> Arc<str> {
    Arc::from(format!("taxi{i:04}"))
}

/// One random walk per taxi, sampled every `sample_interval_s`.
///
/// Taxis start at a random node and at every node pick a random next edge,
/// avoiding an immediate U-turn where another edge exists.
pub fn gen_trajectories(config: &SynthConfig, network: &[RoadPolyline]) -> Result<Vec<Trajectory>, SynthError> {
    config.validate()?;
    let graph = WalkGraph::from_roads(network, &config.projection());
    if graph.nodes.is_empty() || graph.adj.iter().all(Vec::is_empty) {
        return Err(SynthError::Config("network has no edges".into()));
    }
    let steps = (config.duration_s / config.sample_interval_s) as usize;
    let step_m = config.speed_mps * config.sample_interval_s as f64;

    Ok((0..config.n_taxis)
        .into_par_iter()
        .map(|taxi| {
            let mut rng = taxi_rng(config.seed, taxi as u64);
            let mut from = loop {
                let n = rng.random_range(0..graph.nodes.len());
                if !graph.adj[n].is_empty() {
                    break n;
                }
            };
            let mut to = graph.adj[from][rng.random_range(0..graph.adj[from].len())];
            // Random start offset, so fleets do not sample on a shared lattice.
            let mut along = rng.random_range(0.0..graph.nodes[from].distance(&graph.nodes[to]));
            let mut points = Vec::with_capacity(steps);
            for k in 0..steps {
                let (a, b) = (graph.nodes[from], graph.nodes[to]);
                let len = a.distance(&b);
                let t = if len > 0.0 { along / len } else { 0.0 };
                let pos = PlanarPoint::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
                points.push((config.start_epoch + k as i64 * config.sample_interval_s, pos));

                along += step_m;
                loop {
                    let len = graph.nodes[from].distance(&graph.nodes[to]);
                    if along < len {
                        break;
                    }
                    along -= len;
                    let options = &graph.adj[to];
                    let next = if options.len() == 1 {
                        options[0]
                    } else {
                        loop {
                            let n = options[rng.random_range(0..options.len())];
                            if n != from {
                                break n;
                            }
                        }
                    };
                    from = to;
                    to = next;
                }
            }
            Trajectory {
                device_id: device_name(taxi),
                points,
            }
        })
        .collect())
}

/// Noise-free per-segment means and the segments planted inside zones.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    /// Mean true concentration over samples whose true position lies on the segment.
    pub segment_means: BTreeMap<u32, PerPollutant<f64>>,
    /// Segments lying entirely inside a zone that raises the pollutant.
    pub planted: PerPollutant<Vec<u32>>,
    /// Segments lying entirely outside every zone.
    pub clean: Vec<u32>,
}

impl GroundTruth {
    pub fn is_planted(&self, pollutant: Pollutant, segment_id: u32) -> bool {
        self.planted.get(pollutant).binary_search(&segment_id).is_ok()
    }
}

const BOUNDARY_EPS_M: f64 = 1e-3;

fn segment_vs_zones(config: &SynthConfig, seg: &RoadSegment, to_synth: impl Fn(PlanarPoint) -> PlanarPoint) -> (Vec<usize>, bool) {
    // Discs are convex, so a straight-piece polyline is inside iff all vertices are.
    let pts: Vec<PlanarPoint> = seg.polyline.iter().map(|p| to_synth(*p)).collect();
    let inside: Vec<usize> = config
        .zones
        .iter()
        .enumerate()
        .filter(|(_, z)| pts.iter().all(|p| z.contains(*p)))
        .map(|(i, _)| i)
        .collect();
    // Segments that only touch a zone edge (up to projection round-off) are neither.
    let clear = config.zones.iter().all(|z| {
        crate::network::point_polyline_distance(z.center, &pts) > z.radius_m + BOUNDARY_EPS_M
    });
    (inside, clear)
}

/// Generated observation stream plus the ground truth behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub observations: Vec<Observation>,
    pub truth: GroundTruth,
}

/// Sample the pollution field along each trajectory and add measurement and
/// GPS noise. `index` and `projection` describe the segments the ground
/// truth is reported against.
pub fn gen_observations(
    config: &SynthConfig,
    trajectories: &[Trajectory],
    index: &SegmentIndex,
    projection: &Projection,
) -> Result<SynthOutput, SynthError> {
    config.validate()?;
    let synth_proj = config.projection();
    let gps = Normal::new(0.0, config.gps_sigma_m).map_err(|e| SynthError::Config(e.to_string()))?;
    let noise = config
        .field
        .map(|_, f| Normal::new(0.0, f.noise_sigma).map_err(|e| SynthError::Config(e.to_string())));
    let noise = PerPollutant {
        no2: noise.no2.clone()?,
        pm25: noise.pm25.clone()?,
        pm10: noise.pm10.clone()?,
    };
    let stream_base = config.n_taxis as u64;

    type Sums = HashMap<u32, (PerPollutant<f64>, u64)>;
    let per_taxi: Vec<(Vec<Observation>, Sums)> = trajectories
        .par_iter()
        .enumerate()
        .map(|(i, traj)| {
            let mut rng = taxi_rng(config.seed, stream_base + i as u64);
            let mut obs = Vec::with_capacity(traj.points.len());
            let mut sums: Sums = HashMap::new();
            for &(ts, pos) in &traj.points {
                let truth = PerPollutant::from_fn(|p| config.true_concentration(p, pos, ts));
                let measured = PerPollutant::from_fn(|p| (truth.get(p) + noise.get(p).sample(&mut rng)).max(0.0));
                let noisy = PlanarPoint::new(pos.x + gps.sample(&mut rng), pos.y + gps.sample(&mut rng));
                let hour = local_hour_of_day(ts, config.tz_offset_s);
                let temp = 24.0 + 5.0 * (TAU * (hour - 15.0) / 24.0).cos() + rng.random_range(-0.5..0.5);
                let rh = 65.0 - 15.0 * (TAU * (hour - 15.0) / 24.0).cos() + rng.random_range(-2.0..2.0);
                obs.push(Observation {
                    device_id: Arc::clone(&traj.device_id),
                    timestamp: ts,
                    location: synth_proj.unproject(noisy),
                    no2: measured.no2,
                    pm25: measured.pm25,
                    pm10: measured.pm10,
                    temp,
                    rh,
                });
                let on_net = projection.project(synth_proj.unproject(pos));
                if let Some(hit) = index.nearest(on_net, 1.0) {
                    let e = sums.entry(hit.segment_id).or_default();
                    e.0.no2 += truth.no2;
                    e.0.pm25 += truth.pm25;
                    e.0.pm10 += truth.pm10;
                    e.1 += 1;
                }
            }
            (obs, sums)
        })
        .collect();

    let mut totals: BTreeMap<u32, (PerPollutant<f64>, u64)> = BTreeMap::new();
    let mut observations = Vec::with_capacity(per_taxi.iter().map(|t| t.0.len()).sum());
    for (obs, sums) in per_taxi {
        observations.extend(obs);
        // Deterministic merge order: taxi order, then segment id.
        let mut sums: Vec<_> = sums.into_iter().collect();
        sums.sort_by_key(|(id, _)| *id);
        for (id, (s, n)) in sums {
            let e = totals.entry(id).or_default();
            e.0.no2 += s.no2;
            e.0.pm25 += s.pm25;
            e.0.pm10 += s.pm10;
            e.1 += n;
        }
    }
    observations.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.device_id.cmp(&b.device_id)));

    let segment_means = totals
        .into_iter()
        .map(|(id, (s, n))| (id, s.map(|_, v| v / n as f64)))
        .collect();

    let mut truth = GroundTruth { segment_means, ..GroundTruth::default() };
    let to_synth = |p: PlanarPoint| synth_proj.project(projection.unproject(p));
    for seg in index.segments() {
        let (inside, clear) = segment_vs_zones(config, seg, to_synth);
        for p in Pollutant::ALL {
            if inside.iter().any(|&z| *config.zones[z].elevation.get(p) > 0.0) {
                truth.planted.get_mut(p).push(seg.segment_id);
            }
        }
        if clear {
            truth.clean.push(seg.segment_id);
        }
    }
    Ok(SynthOutput { observations, truth })
}

/// Hourly fixed-site readings at the configured station positions.
///
/// Stations see `station_ambient_factor` times the noise-free on-road field
/// evaluated at the middle of each hour.
pub fn gen_stations(config: &SynthConfig) -> Vec<StationRecord> {
    let proj = config.projection();
    let first = crate::time::local_hour_start(config.start_epoch, config.tz_offset_s);
    let end = config.start_epoch + config.duration_s;
    let mut out = Vec::new();
    for (i, &site) in config.stations.iter().enumerate() {
        let mut hour = first;
        while hour < end {
            let mid = hour + HOUR_S / 2;
            out.push(StationRecord {
                station_id: format!("station{}", i + 1),
                location: proj.unproject(site),
                hour_start: hour,
                values: PerPollutant::from_fn(|p| Some(config.station_ambient_factor * config.true_concentration(p, site, mid))),
            });
            hour += HOUR_S;
        }
    }
    out
}

pub const GROUND_TRUTH_CSV_HEADER: &str = "segment_id,pollutant,true_mean,is_planted_hotspot";

/// Rows for every segment that was sampled or planted.
pub fn write_ground_truth_csv<W: Write>(w: W, truth: &GroundTruth) -> io::Result<()> {
    let mut w = io::BufWriter::new(w);
    writeln!(w, "{GROUND_TRUTH_CSV_HEADER}")?;
    let mut ids: Vec<u32> = truth.segment_means.keys().copied().collect();
    for p in Pollutant::ALL {
        ids.extend(truth.planted.get(p));
    }
    ids.sort_unstable();
    ids.dedup();
    for id in ids {
        for p in Pollutant::ALL {
            let mean = truth.segment_means.get(&id).map(|m| format!("{}", m.get(p))).unwrap_or_default();
            writeln!(w, "{id},{p},{mean},{}", truth.is_planted(p, id))?;
        }
    }
    w.flush()
}

pub fn write_stations_csv<W: Write>(w: W, records: &[StationRecord]) -> io::Result<()> {
    let mut w = io::BufWriter::new(w);
    writeln!(w, "{}", crate::compare::STATIONS_CSV_HEADER.join(","))?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.1}")).unwrap_or_default();
    for r in records {
        writeln!(
            w,
            "{},{:.6},{:.6},{},{},{},{}",
            r.station_id,
            r.location.lat,
            r.location.lon,
            r.hour_start,
            opt(r.values.no2),
            opt(r.values.pm25),
            opt(r.values.pm10)
        )?;
    }
    w.flush()
}
