//! Acceptance suite. One PASS/FAIL line per criterion; exit status 1 if any
//! criterion fails on hardware that can meet it.

use std::alloc::{GlobalAlloc, Layout, System};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use onroad_core::compare::{compute_metrics, HourPair};
use onroad_core::geo::{PlanarPoint, Projection};
use onroad_core::hotspot::{
    classify_segment, get_level, identify_hotspots, write_hotspots_csv, ExposureLevel, HotspotParams, Sample,
};
use onroad_core::ingest::{inter_device_deviation, parse_observations, qa_filter, Observation};
use onroad_core::network::{build_segments, RoadClass, RoadSegment, SegmentIndex};
use onroad_core::parallel::with_workers;
use onroad_core::pollutant::{PerPollutant, Pollutant};
use onroad_core::reduce::{
    aggregate_hourly, median, snap_observations, summarize_segments, write_estimates_csv, write_summaries_csv,
    SnappedObservation,
};
use onroad_core::synth::{gen_network, gen_observations, gen_trajectories, FieldParams, HotspotZone, SynthConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances and budgets.
const C1_BUDGET: Duration = Duration::from_secs(1);
const C2_BUDGET: Duration = Duration::from_secs(5);
const C4_IDENTITY_TOL: f64 = 1e-12;
const C4_CONSTANT_TOL: f64 = 1e-9;
const C4_SYMMETRY_TOL: f64 = 1e-9;
const C6_MIN_RECALL: f64 = 0.95;
const C6_MAX_FALSE_POSITIVE: f64 = 0.02;
const C6_BUDGET: Duration = Duration::from_secs(120);
const C8_BUDGET: Duration = Duration::from_secs(120);
const C8_PEAK_BYTES: usize = 2 * 1024 * 1024 * 1024;
const C8_MIN_SCALING: f64 = 2.5;
const C8_SCALING_CORES: usize = 4;
const C9_DEVIATION_PCT: f64 = 9.52;
const C9_DEVIATION_TOL: f64 = 0.01;

struct Counting;

static CURRENT: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for Counting {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = unsafe { System.alloc(layout) };
        if !p.is_null() {
            let now = CURRENT.fetch_add(layout.size(), Ordering::Relaxed) + layout.size();
            PEAK.fetch_max(now, Ordering::Relaxed);
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        unsafe { System.dealloc(ptr, layout) };
        CURRENT.fetch_sub(layout.size(), Ordering::Relaxed);
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        let p = unsafe { System.realloc(ptr, layout, new_size) };
        if !p.is_null() {
            if new_size >= layout.size() {
                let now = CURRENT.fetch_add(new_size - layout.size(), Ordering::Relaxed) + new_size - layout.size();
                PEAK.fetch_max(now, Ordering::Relaxed);
            } else {
                CURRENT.fetch_sub(layout.size() - new_size, Ordering::Relaxed);
            }
        }
        p
    }
}

#[global_allocator]
static ALLOC: Counting = Counting;

fn reset_peak() {
    PEAK.store(CURRENT.load(Ordering::Relaxed), Ordering::Relaxed);
}

struct Outcome {
    pass: bool,
    detail: String,
    /// Failed only because the host lacks the hardware the criterion assumes.
    hardware_limited: bool,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail, hardware_limited: false }
    }
}

fn mib(b: usize) -> f64 {
    b as f64 / (1024.0 * 1024.0)
}

// ---------------------------------------------------------------- C1

/// Printed level table, in tenths of a unit so decimal bounds are exact.
/// `(lower, upper)` per level.
type Bands = [(i64, i64); 4];

const PRINTED: [(Pollutant, Bands, i64); 3] = [
    (Pollutant::No2, [(0, 500), (510, 1000), (1010, 1500), (1510, 2000)], 10),
    (Pollutant::Pm25, [(0, 90), (91, 354), (355, 554), (555, 1254)], 1),
    (Pollutant::Pm10, [(0, 540), (550, 1540), (1550, 2540), (2550, 3540)], 10),
];

fn c1_levels() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut checked = 0;
    let at = |tenths: i64| tenths as f64 / 10.0;
    for (p, bands, step) in PRINTED {
        for (i, &(lo, hi)) in bands.iter().enumerate() {
            let want = ExposureLevel::ALL[i];
            for v in [lo, hi] {
                checked += 1;
                match get_level(at(v), p) {
                    Ok(c) if c.level == want && !c.overflow => {}
                    other => bad.push(format!("{p} {} -> {other:?}, want {want:?}", at(v))),
                }
            }
            // One resolution step past each bound lands in the neighbouring level.
            let above = get_level(at(hi + step), p).unwrap();
            let want_above = ExposureLevel::ALL.get(i + 1).copied().unwrap_or(ExposureLevel::Unhealthy);
            if above.level != want_above || above.overflow != (i == 3) {
                bad.push(format!("{p} {} -> {above:?}", at(hi + step)));
            }
            if i > 0 {
                let below = get_level(at(lo - step), p).unwrap();
                if below.level != ExposureLevel::ALL[i - 1] {
                    bad.push(format!("{p} {} -> {below:?}", at(lo - step)));
                }
            } else if get_level(at(lo - step), p).is_ok() {
                bad.push(format!("{p} {} accepted", at(lo - step)));
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = bad.is_empty() && checked == 24 && elapsed < C1_BUDGET;
    Outcome::new(pass, format!("{checked} bound values, {} mismatches {bad:?}, {elapsed:.2?}", bad.len()))
}

// ---------------------------------------------------------------- C2

fn random_network(rng: &mut ChaCha8Rng, n: usize) -> Vec<RoadSegment> {
    (0..n as u32)
        .map(|id| {
            let mut p = PlanarPoint::new(rng.random_range(-1500.0..1500.0), rng.random_range(-1500.0..1500.0));
            let mut polyline = vec![p];
            for _ in 0..rng.random_range(1..4) {
                let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let l: f64 = rng.random_range(5.0..60.0);
                p = PlanarPoint::new(p.x + l * a.cos(), p.y + l * a.sin());
                polyline.push(p);
            }
            let length_m = polyline.windows(2).map(|w| w[0].distance(&w[1])).sum();
            RoadSegment { segment_id: id, road_class: RoadClass::Residential, polyline, length_m }
        })
        .collect()
}

/// Closed-form point-to-segment distance, written independently of the library.
fn oracle_distance(p: PlanarPoint, poly: &[PlanarPoint]) -> f64 {
    poly.windows(2)
        .map(|w| {
            let (ax, ay, bx, by) = (w[0].x, w[0].y, w[1].x, w[1].y);
            let (dx, dy) = (bx - ax, by - ay);
            let len2 = dx * dx + dy * dy;
            let t = if len2 == 0.0 { 0.0 } else { (((p.x - ax) * dx + (p.y - ay) * dy) / len2).clamp(0.0, 1.0) };
            ((p.x - ax - t * dx).powi(2) + (p.y - ay - t * dy).powi(2)).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

fn c2_spatial() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let segments = random_network(&mut rng, 500);
    let queries: Vec<PlanarPoint> = (0..1000)
        .map(|_| PlanarPoint::new(rng.random_range(-1700.0..1700.0), rng.random_range(-1700.0..1700.0)))
        .collect();
    let start = Instant::now();
    let index = SegmentIndex::build(segments.clone()).unwrap();
    let mut mismatches = 0;
    let mut hits = 0;
    for max in [100.0, 1.0e7] {
        for &q in &queries {
            let got = index.nearest(q, max).map(|n| (n.segment_id, n.distance_m));
            let mut want: Option<(u32, f64)> = None;
            for s in &segments {
                let d = s.distance_to(q);
                if d <= max && want.is_none_or(|(_, b)| d < b) {
                    want = Some((s.segment_id, d));
                }
            }
            if got != want {
                mismatches += 1;
            }
            if let Some((id, d)) = want {
                hits += 1;
                if (oracle_distance(q, &segments[id as usize].polyline) - d).abs() > 1e-9 {
                    mismatches += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        mismatches == 0 && elapsed < C2_BUDGET,
        format!("500 segments, 2x1000 queries ({hits} within cutoff), {mismatches} mismatches, {elapsed:.2?}"),
    )
}

// ---------------------------------------------------------------- C3

fn sorted_median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

fn c3_median() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let hour0 = 1_704_038_400;
    let mut sets = Vec::with_capacity(10_000);
    for _ in 0..10_000 {
        let n = rng.random_range(1..=200);
        // Coarse values so ties are common.
        let coarse = rng.random_bool(0.5);
        let set: Vec<f64> = (0..n)
            .map(|_| if coarse { rng.random_range(0..20) as f64 * 0.5 } else { rng.random_range(0.0..300.0) })
            .collect();
        sets.push(set);
    }
    let even = sets.iter().filter(|s| s.len() % 2 == 0).count();
    let mut direct_bad = 0;
    let mut snapped = Vec::new();
    for (i, set) in sets.iter().enumerate() {
        if median(set).unwrap() != sorted_median(set) {
            direct_bad += 1;
        }
        for (k, &v) in set.iter().enumerate() {
            snapped.push(SnappedObservation {
                segment_id: i as u32,
                snap_distance_m: 0.0,
                observation: Observation {
                    device_id: Arc::from("m"),
                    timestamp: hour0 + (k as i64 % 3600),
                    location: onroad_core::geo::GeoPoint { lat: 23.0, lon: 113.0 },
                    no2: v,
                    pm25: v,
                    pm10: v,
                    temp: 20.0,
                    rh: 50.0,
                },
            });
        }
    }
    let estimates = aggregate_hourly(&snapped, onroad_core::time::DEFAULT_TZ_OFFSET_S);
    let mut agg_bad = (estimates.len() != sets.len()) as usize;
    for e in &estimates {
        let want = sorted_median(&sets[e.segment_id as usize]);
        if Pollutant::ALL.iter().any(|p| *e.median.get(*p) != want) {
            agg_bad += 1;
        }
    }
    Outcome::new(
        direct_bad == 0 && agg_bad == 0,
        format!("10000 sets ({even} even-sized), direct mismatches {direct_bad}, aggregated mismatches {agg_bad}"),
    )
}

// ---------------------------------------------------------------- C4

fn pairs(m: &[f64], f: &[f64]) -> Vec<HourPair> {
    m.iter()
        .zip(f)
        .enumerate()
        .map(|(i, (&m, &f))| HourPair {
            station_id: "S".into(),
            hour_start: i as i64 * 3600,
            pollutant: Pollutant::Pm25,
            mobile: m,
            fixed: f,
            mobile_samples: 1,
        })
        .collect()
}

fn c4_metrics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut problems = Vec::new();
    let close = |a: Option<f64>, b: f64, tol: f64| a.is_some_and(|a| (a - b).abs() <= tol);

    let series: Vec<f64> = (0..48).map(|_| rng.random_range(1.0..120.0)).collect();
    let r = compute_metrics(&pairs(&series, &series)).unwrap();
    let t = C4_IDENTITY_TOL;
    if !(close(r.fb, 0.0, t) && close(r.nmse, 0.0, t) && close(r.vg, 1.0, t) && close(r.fac2, 1.0, t))
        || !(close(r.r, 1.0, t) && close(r.er_median, 0.0, t))
    {
        problems.push(format!("identical: {r:?}"));
    }

    let r = compute_metrics(&pairs(&[3.0; 24], &[1.0; 24])).unwrap();
    let t = C4_CONSTANT_TOL;
    let vg = (3.0f64.ln().powi(2)).exp();
    if !(close(r.fb, 1.0, t) && close(r.nmse, 4.0 / 3.0, t) && close(r.vg, vg, t) && close(r.fac2, 0.0, t)) {
        problems.push(format!("constant: {r:?}"));
    }

    let mut sym_bad = 0;
    for _ in 0..1000 {
        let n = rng.random_range(2..60);
        let m: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..200.0)).collect();
        let f: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..200.0)).collect();
        let k: f64 = rng.random_range(0.01..100.0);
        let fb = compute_metrics(&pairs(&m, &f)).unwrap().fb.unwrap();
        let fb_swapped = compute_metrics(&pairs(&f, &m)).unwrap().fb.unwrap();
        let ms: Vec<f64> = m.iter().map(|v| v * k).collect();
        let fs: Vec<f64> = f.iter().map(|v| v * k).collect();
        let fb_scaled = compute_metrics(&pairs(&ms, &fs)).unwrap().fb.unwrap();
        if (fb + fb_swapped).abs() > C4_SYMMETRY_TOL || (fb - fb_scaled).abs() > C4_SYMMETRY_TOL {
            sym_bad += 1;
        }
    }
    if sym_bad > 0 {
        problems.push(format!("{sym_bad}/1000 random pairs break FB antisymmetry or scale invariance"));
    }
    Outcome::new(problems.is_empty(), format!("identity, constant-pair and 1000 random-pair checks; problems {problems:?}"))
}

// ---------------------------------------------------------------- C5

/// `days` local days, ten PM2.5 = 60 samples per day from 10:00, `gap` apart.
fn hand_fixture(days: i64, gap: i64) -> Vec<Sample> {
    // 2024-01-01 10:00 local (UTC+8).
    let t0 = 1_704_074_400;
    (0..days)
        .flat_map(|d| (0..10).map(move |k| t0 + d * 86_400 + k * gap))
        .map(|timestamp| Sample { timestamp, values: PerPollutant { no2: 20.0, pm25: 60.0, pm10: 40.0 } })
        .collect()
}

fn c5_hand_walk() -> Outcome {
    let params = HotspotParams::default();
    let mut problems = Vec::new();

    let r12 = classify_segment(1, &hand_fixture(12, 600), &params).unwrap();
    // Nine of each day's ten samples have a successor within 600 s.
    if !(r12.is_vms && r12.is_hotspot.pm25 && r12.valid_samples == 108 && r12.valid_days == 12) {
        problems.push(format!("12-day: {r12:?}"));
    }
    if r12.counts.pm25 != [0, 0, 0, 108] || r12.dominant.pm25 != Some(ExposureLevel::Unhealthy) || r12.is_hotspot.no2 {
        problems.push(format!("12-day counters: {:?}", r12.counts));
    }

    let r5 = classify_segment(1, &hand_fixture(5, 600), &params).unwrap();
    if r5.is_vms || r5.any_hotspot() || r5.valid_days != 5 {
        problems.push(format!("5-day: {r5:?}"));
    }

    let r_eq = classify_segment(1, &hand_fixture(12, 1800), &params).unwrap();
    let r_lt = classify_segment(1, &hand_fixture(12, 1799), &params).unwrap();
    if r_eq.valid_samples != 0 || r_eq.is_vms || r_lt.valid_samples != 108 {
        problems.push(format!("1800 s gap: {} valid, 1799 s gap: {} valid", r_eq.valid_samples, r_lt.valid_samples));
    }

    for r in [&r12, &r5, &r_eq, &r_lt] {
        for p in Pollutant::ALL {
            if r.counts.get(p).iter().sum::<u64>() != r.valid_samples {
                problems.push(format!("counter total != valid count for {p}"));
            }
        }
    }

    // Same fixture through the snapped-observation entry point.
    let snapped: Vec<SnappedObservation> = hand_fixture(12, 600)
        .into_iter()
        .map(|s| SnappedObservation {
            segment_id: 4,
            snap_distance_m: 0.0,
            observation: Observation {
                device_id: Arc::from("taxi"),
                timestamp: s.timestamp,
                location: onroad_core::geo::GeoPoint { lat: 23.0, lon: 113.0 },
                no2: s.values.no2,
                pm25: s.values.pm25,
                pm10: s.values.pm10,
                temp: 20.0,
                rh: 50.0,
            },
        })
        .collect();
    let via = identify_hotspots(&snapped, &params).unwrap();
    if via.len() != 1 || via[0].counts != r12.counts || !via[0].is_hotspot.pm25 {
        problems.push("pipeline entry point disagrees with hand walk".into());
    }
    Outcome::new(problems.is_empty(), format!("12-day hotspot, 5-day not, 1800 s invalid; problems {problems:?}"))
}

// ---------------------------------------------------------------- C6

fn build_world(cfg: &SynthConfig) -> (SegmentIndex, Projection, Vec<onroad_core::network::RoadPolyline>) {
    let roads = gen_network(cfg);
    let proj = Projection::centered_on(roads.iter().flat_map(|r| &r.points)).unwrap();
    let segs = build_segments(&roads, cfg.target_len_m, &proj).unwrap();
    (SegmentIndex::build(segs).unwrap(), proj, roads)
}

fn c6_recovery() -> Outcome {
    let start = Instant::now();
    let zone = |x: f64, y: f64| HotspotZone {
        center: PlanarPoint::new(x, y),
        radius_m: 300.0,
        elevation: PerPollutant { no2: 0.0, pm25: 50.0, pm10: 0.0 },
    };
    let cfg = SynthConfig {
        seed: 6,
        grid_rows: 6,
        grid_cols: 6,
        spacing_m: 500.0,
        n_taxis: 50,
        duration_s: 14 * 86_400,
        zones: vec![zone(-750.0, -250.0), zone(750.0, 250.0)],
        ..SynthConfig::default()
    };
    let (index, proj, roads) = build_world(&cfg);
    let trajectories = gen_trajectories(&cfg, &roads).unwrap();
    let out = gen_observations(&cfg, &trajectories, &index, &proj).unwrap();
    drop(trajectories);
    let n_obs = out.observations.len();
    let snapped = snap_observations(out.observations, &index, &proj, onroad_core::network::DEFAULT_MAX_SNAP_M);
    let results = identify_hotspots(&snapped.snapped, &HotspotParams::default()).unwrap();
    let flagged: std::collections::BTreeSet<u32> =
        results.iter().filter(|r| r.is_hotspot.pm25).map(|r| r.segment_id).collect();

    let planted = &out.truth.planted.pm25;
    let clean = &out.truth.clean;
    let recovered = planted.iter().filter(|id| flagged.contains(id)).count();
    let false_pos = clean.iter().filter(|id| flagged.contains(id)).count();
    let recall = recovered as f64 / planted.len().max(1) as f64;
    let fp_rate = false_pos as f64 / clean.len().max(1) as f64;
    let elapsed = start.elapsed();
    Outcome::new(
        !planted.is_empty() && recall >= C6_MIN_RECALL && fp_rate < C6_MAX_FALSE_POSITIVE && elapsed < C6_BUDGET,
        format!(
            "{n_obs} obs; in-zone {recovered}/{} flagged ({:.1}%), outside {false_pos}/{} flagged ({:.2}%), {elapsed:.1?}",
            planted.len(),
            recall * 100.0,
            clean.len(),
            fp_rate * 100.0
        ),
    )
}

// ---------------------------------------------------------------- C7

fn pipeline_bytes(cfg: &SynthConfig, workers: usize) -> Vec<Vec<u8>> {
    with_workers(workers, || {
        let (index, proj, roads) = build_world(cfg);
        let trajectories = gen_trajectories(cfg, &roads).unwrap();
        let out = gen_observations(cfg, &trajectories, &index, &proj).unwrap();
        let snapped = snap_observations(out.observations, &index, &proj, 100.0).snapped;
        let estimates = aggregate_hourly(&snapped, cfg.tz_offset_s);
        let summaries = summarize_segments(&estimates, cfg.tz_offset_s);
        let params = HotspotParams { vms_days: 2, ..HotspotParams::default() };
        let hotspots = identify_hotspots(&snapped, &params).unwrap();
        let mut files = vec![Vec::new(), Vec::new(), Vec::new()];
        write_estimates_csv(&mut files[0], &estimates).unwrap();
        write_summaries_csv(&mut files[1], &summaries).unwrap();
        write_hotspots_csv(&mut files[2], &hotspots).unwrap();
        files
    })
    .unwrap()
}

fn c7_determinism() -> Outcome {
    let cfg = SynthConfig {
        seed: 7,
        grid_rows: 6,
        grid_cols: 6,
        n_taxis: 12,
        duration_s: 3 * 86_400,
        zones: vec![HotspotZone {
            center: PlanarPoint::new(0.0, 0.0),
            radius_m: 400.0,
            elevation: PerPollutant { no2: 0.0, pm25: 45.0, pm10: 0.0 },
        }],
        ..SynthConfig::default()
    };
    let runs: Vec<(usize, Vec<Vec<u8>>)> = [1, 4, 8].into_iter().map(|w| (w, pipeline_bytes(&cfg, w))).collect();
    let identical = runs.iter().all(|(_, f)| *f == runs[0].1);
    let sizes: Vec<usize> = runs[0].1.iter().map(Vec::len).collect();
    Outcome::new(
        identical && sizes.iter().all(|&s| s > 100),
        format!("estimates/summaries/hotspots bytes {sizes:?} identical across workers 1, 4, 8: {identical}"),
    )
}

// ---------------------------------------------------------------- C8

fn full_scale_config() -> SynthConfig {
    // 30x30 grid at 750 m: 60 lines of 435 segments = 26,100 segments.
    // 314 taxis x 15,924 samples = 5,000,136 observations.
    SynthConfig {
        seed: 8,
        grid_rows: 30,
        grid_cols: 30,
        spacing_m: 750.0,
        n_taxis: 314,
        duration_s: 15_924 * 10,
        sample_interval_s: 10,
        field: PerPollutant {
            no2: FieldParams { base: 25.0, amplitude: 20.0, noise_sigma: 5.0 },
            pm25: FieldParams { base: 20.0, amplitude: 12.0, noise_sigma: 4.0 },
            pm10: FieldParams { base: 45.0, amplitude: 20.0, noise_sigma: 6.0 },
        },
        ..SynthConfig::default()
    }
}

struct Timed {
    elapsed: Duration,
    peak: usize,
    observations: usize,
    segments: usize,
    estimates: usize,
}

fn c8_run(cfg: &SynthConfig, workers: usize) -> Timed {
    let (index, proj, roads) = build_world(cfg);
    let obs = {
        let trajectories = gen_trajectories(cfg, &roads).unwrap();
        gen_observations(cfg, &trajectories, &index, &proj).unwrap().observations
    };
    let observations = obs.len();
    let segments = index.len();
    reset_peak();
    let start = Instant::now();
    let estimates = with_workers(workers, || {
        let snapped = snap_observations(obs, &index, &proj, 100.0).snapped;
        let estimates = aggregate_hourly(&snapped, cfg.tz_offset_s);
        drop(snapped);
        let summaries = summarize_segments(&estimates, cfg.tz_offset_s);
        assert!(!summaries.is_empty());
        estimates.len()
    })
    .unwrap();
    Timed { elapsed: start.elapsed(), peak: PEAK.load(Ordering::Relaxed), observations, segments, estimates }
}

fn c8_performance() -> Outcome {
    let cfg = full_scale_config();
    let one = c8_run(&cfg, 1);
    let four = c8_run(&cfg, 4);
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let scaling = one.elapsed.as_secs_f64() / four.elapsed.as_secs_f64();
    let slowest = one.elapsed.max(four.elapsed);
    let peak = one.peak.max(four.peak);
    let time_ok = slowest <= C8_BUDGET;
    let mem_ok = peak <= C8_PEAK_BYTES;
    let scale_ok = scaling >= C8_MIN_SCALING;
    let detail = format!(
        "{} obs on {} segments -> {} segment-hours; 1 worker {:.1?}, 4 workers {:.1?} (<= {C8_BUDGET:?}: {time_ok}); \
         peak {:.0} MiB (<= 2048 MiB: {mem_ok}); scaling {scaling:.2}x (>= {C8_MIN_SCALING}x: {scale_ok}); host cores {cores}",
        one.observations,
        one.segments,
        one.estimates,
        one.elapsed,
        four.elapsed,
        mib(peak)
    );
    Outcome {
        pass: time_ok && mem_ok && scale_ok,
        hardware_limited: time_ok && mem_ok && !scale_ok && cores < C8_SCALING_CORES,
        detail,
    }
}

// ---------------------------------------------------------------- C9

fn c9_qa() -> Outcome {
    let header = "device_id,timestamp,lat,lon,no2_ppb,pm25_ugm3,pm10_ugm3,temp_c,rh_pct\n";
    let good = (0..10).map(|i| format!("t{},{},23.1,113.3,30,20,40,25,60\n", i % 3, 1_704_038_400 + i * 10));
    let bad = [
        "t1,yesterday,23.1,113.3,30,20,40,25,60\n",     // unparseable timestamp
        "t1,1704038500,23.1,113.3,30,20\n",             // short row
        "t1,1704038510,95.0,113.3,30,20,40,25,60\n",    // latitude out of range
        "t1,1704038520,23.1,113.3,-4,20,40,25,60\n",    // negative concentration
        "t1,1704038530,23.1,113.3,30,20,1400,25,60\n",  // above ceiling
        "t1,1704038540,23.1,113.3,30,20,40,71,60\n",    // temperature
        "t1,1704038550,23.1,113.3,30,20,40,25,101\n",   // humidity
        "t1,1704038560,23.1,113.3,30,55,40,25,60\n",    // PM2.5 > PM10: kept, flagged
    ];
    let input_rows = 10 + bad.len() as u64;
    let text: String = std::iter::once(header.to_string()).chain(good).chain(bad.iter().map(|s| s.to_string())).collect();
    let parsed = parse_observations(text.as_bytes()).unwrap();
    let mut qa = qa_filter(parsed.observations);
    qa.report.record_unparseable(parsed.rejects.len() as u64);
    let r = &qa.report;
    let conserved = r.accepted + r.rejected_total() + r.unparseable == input_rows;
    let expected = r.accepted == 11 && r.rejected_total() == 4 && r.unparseable == 3 && r.flagged_inversions == 1;

    let a: Vec<(i64, f64)> = (0..100).map(|i| (1_704_038_400 + i * 10, 10.0 + (i % 17) as f64)).collect();
    let b: Vec<(i64, f64)> = a.iter().map(|&(t, v)| (t, 1.1 * v)).collect();
    let dev = inter_device_deviation(&a, &b, 60).unwrap();
    let dev_ok = (dev.percent - C9_DEVIATION_PCT).abs() <= C9_DEVIATION_TOL;
    Outcome::new(
        conserved && expected && dev_ok,
        format!(
            "input {input_rows} = accepted {} + rejected {} + unparseable {} ({conserved}), flagged {}; deviation {:.4}% (target {C9_DEVIATION_PCT} +/- {C9_DEVIATION_TOL})",
            r.accepted,
            r.rejected_total(),
            r.unparseable,
            r.flagged_inversions,
            dev.percent
        ),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, &'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("C1", "level table boundaries", c1_levels),
        ("C2", "spatial index vs brute force", c2_spatial),
        ("C3", "median vs sort oracle", c3_median),
        ("C4", "comparison metric identities", c4_metrics),
        ("C5", "hotspot hand walk", c5_hand_walk),
        ("C6", "planted hotspot recovery", c6_recovery),
        ("C7", "worker-count determinism", c7_determinism),
        ("C8", "full-scale performance", c8_performance),
        ("C9", "QA conservation and device deviation", c9_qa),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| id.eq_ignore_ascii_case(f)) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Outcome::new(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        let note = if outcome.hardware_limited {
            " [host has fewer cores than the criterion assumes; not counted in exit status]"
        } else {
            ""
        };
        println!("{verdict} {id} {name}: {}{note}", outcome.detail);
        if !outcome.pass && !outcome.hardware_limited {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
