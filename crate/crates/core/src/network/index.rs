use crate::geo::PlanarPoint;

use super::{NetworkError, RoadSegment};

pub const DEFAULT_CELL_SIZE_M: f64 = 100.0;

/// Bounding boxes are padded by this much before rasterising so that a
/// point lying exactly on a cell edge never loses a candidate to rounding.
const BBOX_PAD_M: f64 = 1e-6;

/// Uniform-grid index over road segments.
///
/// Each segment is registered in every cell its (padded) bounding box
/// touches. Cell contents are stored CSR-style: `cell_start[c]..cell_start[c+1]`
/// slices into `entries`, sorted by segment id. The index is immutable once
/// built and is `Send + Sync`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentIndex {
    cell_size: f64,
    min: PlanarPoint,
    nx: i64,
    ny: i64,
    cell_start: Vec<u32>,
    entries: Vec<u32>,
    segments: Vec<RoadSegment>,
}

/// Result of a nearest-segment query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nearest {
    pub segment_id: u32,
    pub distance_m: f64,
}

impl SegmentIndex {
    pub fn build(segments: Vec<RoadSegment>) -> Result<Self, NetworkError> {
        Self::with_cell_size(segments, DEFAULT_CELL_SIZE_M)
    }

    pub fn with_cell_size(segments: Vec<RoadSegment>, cell_size: f64) -> Result<Self, NetworkError> {
        if segments.is_empty() {
            return Err(NetworkError::EmptyNetwork);
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(NetworkError::InvalidCellSize(cell_size));
        }
        for (i, s) in segments.iter().enumerate() {
            if s.segment_id as usize != i {
                return Err(NetworkError::NonDenseIds { position: i, found: s.segment_id });
            }
            if s.polyline.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
                return Err(NetworkError::NonFiniteCoordinate(s.segment_id));
            }
        }

        let mut min = PlanarPoint::new(f64::INFINITY, f64::INFINITY);
        let mut max = PlanarPoint::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for s in &segments {
            let (lo, hi) = s.bounds();
            min.x = min.x.min(lo.x - BBOX_PAD_M);
            min.y = min.y.min(lo.y - BBOX_PAD_M);
            max.x = max.x.max(hi.x + BBOX_PAD_M);
            max.y = max.y.max(hi.y + BBOX_PAD_M);
        }
        let nx = (((max.x - min.x) / cell_size).floor() as i64 + 1).max(1);
        let ny = (((max.y - min.y) / cell_size).floor() as i64 + 1).max(1);
        let n_cells = usize::try_from(nx * ny).map_err(|_| NetworkError::GridTooLarge)?;

        let mut index = Self {
            cell_size,
            min,
            nx,
            ny,
            cell_start: Vec::new(),
            entries: Vec::new(),
            segments,
        };

        // Two passes: count, then fill. Segments are visited in id order so
        // every cell list comes out sorted.
        let mut counts = vec![0u32; n_cells + 1];
        index.for_each_cell_of_segments(|cell, _| counts[cell + 1] += 1);
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let mut cursor = counts.clone();
        let mut entries = vec![0u32; counts[n_cells] as usize];
        index.for_each_cell_of_segments(|cell, id| {
            entries[cursor[cell] as usize] = id;
            cursor[cell] += 1;
        });
        index.cell_start = counts;
        index.entries = entries;
        Ok(index)
    }

    fn for_each_cell_of_segments(&self, mut f: impl FnMut(usize, u32)) {
        for s in &self.segments {
            let (lo, hi) = s.bounds();
            let (x0, y0) = self.cell_of(PlanarPoint::new(lo.x - BBOX_PAD_M, lo.y - BBOX_PAD_M));
            let (x1, y1) = self.cell_of(PlanarPoint::new(hi.x + BBOX_PAD_M, hi.y + BBOX_PAD_M));
            for cy in y0.max(0)..=y1.min(self.ny - 1) {
                for cx in x0.max(0)..=x1.min(self.nx - 1) {
                    f((cy * self.nx + cx) as usize, s.segment_id);
                }
            }
        }
    }

    fn cell_of(&self, p: PlanarPoint) -> (i64, i64) {
        (
            ((p.x - self.min.x) / self.cell_size).floor() as i64,
            ((p.y - self.min.y) / self.cell_size).floor() as i64,
        )
    }

    fn cell(&self, cx: i64, cy: i64) -> &[u32] {
        let c = (cy * self.nx + cx) as usize;
        &self.entries[self.cell_start[c] as usize..self.cell_start[c + 1] as usize]
    }

    pub fn segments(&self) -> &[RoadSegment] {
        &self.segments
    }

    pub fn segment(&self, id: u32) -> Option<&RoadSegment> {
        self.segments.get(id as usize)
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    /// Grid dimensions in cells, `(columns, rows)`.
    pub fn dimensions(&self) -> (usize, usize) {
        (self.nx as usize, self.ny as usize)
    }

    /// Segment ids registered in the cell containing `p`, if `p` is on the grid.
    pub fn candidates_at(&self, p: PlanarPoint) -> Option<&[u32]> {
        let (cx, cy) = self.cell_of(p);
        (0..self.nx).contains(&cx).then_some(())?;
        (0..self.ny).contains(&cy).then_some(())?;
        Some(self.cell(cx, cy))
    }

    /// Closest segment to `p` within `max_dist_m`, ties to the smaller id.
    ///
    /// Searches square rings of cells outward from the query cell and stops
    /// once every unvisited cell is provably farther than the best hit.
    pub fn nearest(&self, p: PlanarPoint, max_dist_m: f64) -> Option<Nearest> {
        if !(max_dist_m > 0.0) || !p.x.is_finite() || !p.y.is_finite() {
            return None;
        }
        let (qx, qy) = self.cell_of(p);
        // Ring beyond which no cell overlaps the grid.
        let last_ring = [qx, self.nx - 1 - qx, qy, self.ny - 1 - qy]
            .into_iter()
            .map(i64::abs)
            .max()
            .unwrap_or(0);

        let mut best: Option<Nearest> = None;
        let mut ring = 0i64;
        loop {
            let bound = (ring - 1).max(0) as f64 * self.cell_size;
            let limit = best.map_or(max_dist_m, |b| b.distance_m.min(max_dist_m));
            if bound > limit || ring > last_ring {
                break;
            }
            self.visit_ring(qx, qy, ring, |id| {
                let d = self.segments[id as usize].distance_to(p);
                if d > max_dist_m {
                    return;
                }
                let better = match best {
                    None => true,
                    Some(b) => d < b.distance_m || (d == b.distance_m && id < b.segment_id),
                };
                if better {
                    best = Some(Nearest { segment_id: id, distance_m: d });
                }
            });
            ring += 1;
        }
        best
    }

    fn visit_ring(&self, qx: i64, qy: i64, ring: i64, mut f: impl FnMut(u32)) {
        let mut visit = |cx: i64, cy: i64| {
            if (0..self.nx).contains(&cx) && (0..self.ny).contains(&cy) {
                for &id in self.cell(cx, cy) {
                    f(id);
                }
            }
        };
        if ring == 0 {
            visit(qx, qy);
            return;
        }
        for cx in qx - ring..=qx + ring {
            visit(cx, qy - ring);
            visit(cx, qy + ring);
        }
        for cy in qy - ring + 1..=qy + ring - 1 {
            visit(qx - ring, cy);
            visit(qx + ring, cy);
        }
    }
}

/// Exhaustive nearest-segment scan. Reference path for the grid index.
pub fn nearest_brute_force(segments: &[RoadSegment], p: PlanarPoint, max_dist_m: f64) -> Option<Nearest> {
    let mut best: Option<Nearest> = None;
    for s in segments {
        let d = s.distance_to(p);
        if d > max_dist_m {
            continue;
        }
        if best.is_none_or(|b| d < b.distance_m || (d == b.distance_m && s.segment_id < b.segment_id)) {
            best = Some(Nearest { segment_id: s.segment_id, distance_m: d });
        }
    }
    best
}
