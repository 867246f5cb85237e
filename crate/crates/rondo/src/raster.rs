//! SDV-centric binary BEV rasterization and the grid/scene augmentations
//! with label co-transformation.
//!
//! Grid convention: the SDV reference point sits at pixel (row 84, col 128)
//! facing down-grid, so forward distance grows with the row index and leaves
//! the larger share of the field of view ahead. Pixel (r, c) has its centre
//! at SDV-frame coordinates `x = (r - 84) * 0.25` (forward), `y = (c - 128)
//! * 0.25` (left). All operations here are pure.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{VehicleDims, VehicleState};
use crate::geom::{BoundaryKind, Polyline, RoadMap, Vec2};
use crate::policy::{WaypointPlan, PLAN_STEPS};

pub const GRID_SIZE: usize = 256;
pub const GRID_CHANNELS: usize = 13;
/// Metres per pixel.
pub const CELL_M: f64 = 0.25;
/// SDV anchor pixel.
pub const ANCHOR_ROW: f64 = 84.0;
pub const ANCHOR_COL: f64 = 128.0;
/// Prediction anchors per side; each anchor cell covers 16 px = 4 m.
pub const ANCHOR_GRID: usize = 16;
pub const ANCHOR_CELL_PX: usize = GRID_SIZE / ANCHOR_GRID;

/// Channel layout: 3 SDV pose channels (t, t-0.2, t-0.4), 3 traffic pose
/// channels at the same offsets, then the 7 static channels.
pub mod channel {
    pub const SDV_NOW: usize = 0;
    pub const SDV_H1: usize = 1;
    pub const SDV_H2: usize = 2;
    pub const TRAFFIC_NOW: usize = 3;
    pub const TRAFFIC_H1: usize = 4;
    pub const TRAFFIC_H2: usize = 5;
    pub const SOLID: usize = 6;
    pub const BROKEN: usize = 7;
    pub const DRIVABLE: usize = 8;
    pub const SPEED_LOW: usize = 9;
    pub const SPEED_MID: usize = 10;
    pub const SPEED_HIGH: usize = 11;
    pub const ROUTE: usize = 12;
}

const PLANE_BITS: usize = GRID_SIZE * GRID_SIZE;
const PLANE_WORDS: usize = PLANE_BITS / 64;
const TOTAL_WORDS: usize = PLANE_WORDS * GRID_CHANNELS;

/// Bit-packed binary tensor of shape [256, 256, 13].
#[derive(Clone, PartialEq, Eq)]
pub struct BevGrid {
    words: Vec<u64>,
}

impl BevGrid {
    pub fn empty() -> Self {
        BevGrid {
            words: vec![0; TOTAL_WORDS],
        }
    }

    #[inline]
    fn bit_index(r: usize, c: usize, ch: usize) -> usize {
        ch * PLANE_BITS + r * GRID_SIZE + c
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize, ch: usize) -> bool {
        let i = Self::bit_index(r, c, ch);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, ch: usize, v: bool) {
        let i = Self::bit_index(r, c, ch);
        if v {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    #[inline]
    pub fn set_true(&mut self, r: usize, c: usize, ch: usize) {
        let i = Self::bit_index(r, c, ch);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn count_ones(&self, ch: usize) -> usize {
        self.words[ch * PLANE_WORDS..(ch + 1) * PLANE_WORDS]
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    pub fn total_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn flip(&mut self, bit: usize) {
        self.words[bit / 64] ^= 1 << (bit % 64);
    }

    pub fn get_bit(&self, bit: usize) -> bool {
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub const TOTAL_BITS: usize = PLANE_BITS * GRID_CHANNELS;

    pub fn complemented(&self) -> BevGrid {
        BevGrid {
            words: self.words.iter().map(|w| !w).collect(),
        }
    }

    /// Dense f64 view of one channel pooled by `factor` (max pooling), CHW order
    /// appended to `out`.
    fn pooled_channel_into(&self, ch: usize, factor: usize, out: &mut Vec<f64>) {
        let side = GRID_SIZE / factor;
        for pr in 0..side {
            for pc in 0..side {
                let mut v = 0.0;
                'scan: for r in pr * factor..(pr + 1) * factor {
                    for c in pc * factor..(pc + 1) * factor {
                        if self.get(r, c, ch) {
                            v = 1.0;
                            break 'scan;
                        }
                    }
                }
                out.push(v);
            }
        }
    }

    /// Dense CHW f64 tensor of all channels, max-pooled down to `side x side`.
    /// `side` must divide 256.
    pub fn to_chw_f64(&self, side: usize) -> Vec<f64> {
        assert!(GRID_SIZE % side == 0);
        let factor = GRID_SIZE / side;
        let mut out = Vec::with_capacity(GRID_CHANNELS * side * side);
        for ch in 0..GRID_CHANNELS {
            if factor == 1 {
                for r in 0..GRID_SIZE {
                    for c in 0..GRID_SIZE {
                        out.push(self.get(r, c, ch) as u8 as f64);
                    }
                }
            } else {
                self.pooled_channel_into(ch, factor, &mut out);
            }
        }
        out
    }

    /// One channel as a binary PGM image (P5), for visual inspection.
    pub fn channel_pgm(&self, ch: usize) -> Vec<u8> {
        let mut out = format!("P5\n{GRID_SIZE} {GRID_SIZE}\n255\n").into_bytes();
        for r in 0..GRID_SIZE {
            for c in 0..GRID_SIZE {
                out.push(if self.get(r, c, ch) { 255 } else { 0 });
            }
        }
        out
    }
}

impl std::fmt::Debug for BevGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BevGrid[{} set bits]", self.total_ones())
    }
}

/// Map-frame pose of the SDV used to define the grid frame.
#[derive(Debug, Clone, Copy)]
pub struct GridFrame {
    pub pos: Vec2,
    pub heading: f64,
}

impl GridFrame {
    pub fn of(state: &VehicleState) -> Self {
        GridFrame {
            pos: state.pos(),
            heading: state.heading,
        }
    }

    /// Map-frame point to SDV-frame metres.
    #[inline]
    pub fn to_local(&self, p: Vec2) -> Vec2 {
        (p - self.pos).rotated(-self.heading)
    }

    /// SDV-frame metres to continuous pixel coordinates (row, col).
    #[inline]
    pub fn local_to_pixel(p: Vec2) -> (f64, f64) {
        (ANCHOR_ROW + p.x / CELL_M, ANCHOR_COL + p.y / CELL_M)
    }

    #[inline]
    pub fn to_pixel(&self, p: Vec2) -> (f64, f64) {
        Self::local_to_pixel(self.to_local(p))
    }

    /// Pixel-centre of (r, c) in SDV-frame metres.
    #[inline]
    pub fn pixel_centre_local(r: usize, c: usize) -> Vec2 {
        Vec2::new(
            (r as f64 - ANCHOR_ROW) * CELL_M,
            (c as f64 - ANCHOR_COL) * CELL_M,
        )
    }
}

/// Everything the rasterizer needs about one frame.
pub struct RasterScene<'a> {
    /// SDV states at t, t-0.2, t-0.4.
    pub sdv: [VehicleState; 3],
    pub sdv_dims: VehicleDims,
    /// Traffic states at the same offsets plus dims.
    pub traffic: &'a [([VehicleState; 3], VehicleDims)],
    /// Navigation route as a map-frame polyline with its ribbon width.
    pub route: &'a Polyline,
    pub route_width: f64,
}

/// Render a scene into the 13-channel binary grid.
pub fn rasterize(scene: &RasterScene<'_>, map: &RoadMap) -> BevGrid {
    let mut grid = BevGrid::empty();
    let frame = GridFrame::of(&scene.sdv[0]);

    // vehicle footprints: SDV history then traffic history
    for (k, st) in scene.sdv.iter().enumerate() {
        fill_footprint(&mut grid, channel::SDV_NOW + k, &frame, st, &scene.sdv_dims);
    }
    for (states, dims) in scene.traffic {
        for (k, st) in states.iter().enumerate() {
            fill_footprint(&mut grid, channel::TRAFFIC_NOW + k, &frame, st, dims);
        }
    }

    // boundaries, 1 px wide
    for b in &map.boundaries {
        let ch = match b.kind {
            BoundaryKind::Solid => channel::SOLID,
            BoundaryKind::Broken => channel::BROKEN,
        };
        draw_polyline(&mut grid, ch, &frame, &b.line);
    }

    // filled polygons: drivable surface and speed zones
    for poly in &map.drivable {
        fill_polygon(&mut grid, channel::DRIVABLE, &frame, poly.vertices());
    }
    for (poly, class) in &map.speed_zones {
        fill_polygon(&mut grid, channel::SPEED_LOW + class.index(), &frame, poly.vertices());
    }

    // navigation route as a ribbon of quads along the path
    for quad in route_quads(scene.route, scene.route_width) {
        fill_polygon(&mut grid, channel::ROUTE, &frame, &quad);
    }

    grid
}

/// Decompose the route ribbon into quads; also used by the raster test oracle.
pub fn route_quads(route: &Polyline, width: f64) -> Vec<[Vec2; 4]> {
    let line = route.resampled(2.0);
    let pts = line.points();
    let half = width / 2.0;
    let mut quads = Vec::with_capacity(pts.len());
    for w in pts.windows(2) {
        let dir = (w[1] - w[0]).normalized();
        if dir == Vec2::ZERO {
            continue;
        }
        let side = dir.perp_left() * half;
        quads.push([w[0] + side, w[1] + side, w[1] - side, w[0] - side]);
    }
    quads
}

/// Oriented-rectangle footprint fill. Pixel centres inside the half-open box
/// `[-l/2, l/2) x [-w/2, w/2)` (vehicle frame) are set.
fn fill_footprint(
    grid: &mut BevGrid,
    ch: usize,
    frame: &GridFrame,
    state: &VehicleState,
    dims: &VehicleDims,
) {
    let centre = frame.to_local(state.pos());
    let heading = state.heading - frame.heading;
    let half_l = dims.length / 2.0;
    let half_w = dims.width / 2.0;
    let radius = (half_l * half_l + half_w * half_w).sqrt();

    let (pr, pc) = GridFrame::local_to_pixel(centre);
    let pr_lo = ((pr - radius / CELL_M).floor().max(0.0)) as usize;
    let pr_hi = ((pr + radius / CELL_M).ceil().min((GRID_SIZE - 1) as f64)) as usize;
    let pc_lo = ((pc - radius / CELL_M).floor().max(0.0)) as usize;
    let pc_hi = ((pc + radius / CELL_M).ceil().min((GRID_SIZE - 1) as f64)) as usize;
    if pr_lo > pr_hi || pc_lo > pc_hi {
        return;
    }

    let (sin_h, cos_h) = heading.sin_cos();
    for r in pr_lo..=pr_hi {
        for c in pc_lo..=pc_hi {
            let p = GridFrame::pixel_centre_local(r, c) - centre;
            let u = p.x * cos_h + p.y * sin_h;
            let v = -p.x * sin_h + p.y * cos_h;
            if u >= -half_l && u < half_l && v >= -half_w && v < half_w {
                grid.set_true(r, c, ch);
            }
        }
    }
}

/// Even-odd scanline polygon fill over pixel centres.
fn fill_polygon(grid: &mut BevGrid, ch: usize, frame: &GridFrame, vertices: &[Vec2]) {
    let px: Vec<(f64, f64)> = vertices.iter().map(|&v| frame.to_pixel(v)).collect();
    let r_min = px.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let r_max = px.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let lo = r_min.floor().max(0.0) as usize;
    let hi = r_max.ceil().min((GRID_SIZE - 1) as f64) as usize;
    if r_min > r_max {
        return;
    }
    let mut crossings: Vec<f64> = Vec::with_capacity(8);
    for r in lo..=hi {
        let scan = r as f64;
        crossings.clear();
        let n = px.len();
        let mut j = n - 1;
        for i in 0..n {
            let (ar, ac) = px[i];
            let (br, bc) = px[j];
            if (ar > scan) != (br > scan) {
                crossings.push(ac + (scan - ar) / (br - ar) * (bc - ac));
            }
            j = i;
        }
        crossings.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for pair in crossings.chunks_exact(2) {
            let c0 = pair[0].ceil().max(0.0) as usize;
            let c1f = pair[1].ceil() - 1.0;
            if c1f < 0.0 {
                continue;
            }
            let c1 = (c1f as usize).min(GRID_SIZE - 1);
            for c in c0..=c1.min(GRID_SIZE - 1) {
                if (c as f64) >= pair[0] && (c as f64) < pair[1] {
                    grid.set_true(r, c, ch);
                }
            }
        }
    }
}

/// 1 px-wide polyline stroke: walk segments at sub-pixel steps and mark the
/// nearest pixel.
fn draw_polyline(grid: &mut BevGrid, ch: usize, frame: &GridFrame, line: &Polyline) {
    let pts = line.points();
    for w in pts.windows(2) {
        let (ar, ac) = frame.to_pixel(w[0]);
        let (br, bc) = frame.to_pixel(w[1]);
        let len = ((br - ar).powi(2) + (bc - ac).powi(2)).sqrt();
        // skip segments entirely outside the grid
        let margin = 2.0;
        let inside = |r: f64, c: f64| {
            r > -margin && r < GRID_SIZE as f64 + margin && c > -margin && c < GRID_SIZE as f64 + margin
        };
        if !inside(ar, ac) && !inside(br, bc) && len < 600.0 {
            continue;
        }
        let steps = (len / 0.4).ceil().max(1.0) as usize;
        for i in 0..=steps {
            let t = i as f64 / steps as f64;
            let r = ar + (br - ar) * t;
            let c = ac + (bc - ac) * t;
            let ri = r.round();
            let ci = c.round();
            if (0.0..GRID_SIZE as f64).contains(&ri) && (0.0..GRID_SIZE as f64).contains(&ci) {
                grid.set_true(ri as usize, ci as usize, ch);
            }
        }
    }
}

/// One prediction anchor cell: existence, offset from the cell centre in
/// metres, and orientation as a (sin, cos) pair, all in the SDV frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AnchorCell {
    pub existence: bool,
    pub dx: f64,
    pub dy: f64,
    pub sin: f64,
    pub cos: f64,
}

/// Waypoint and prediction labels of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameLabels {
    pub waypoints: WaypointPlan,
    pub anchors: [AnchorCell; ANCHOR_GRID * ANCHOR_GRID],
}

impl FrameLabels {
    pub fn empty() -> Self {
        FrameLabels {
            waypoints: WaypointPlan::standstill(),
            anchors: [AnchorCell::default(); ANCHOR_GRID * ANCHOR_GRID],
        }
    }

    /// Build anchor labels by binning future object poses (SDV frame).
    /// When two objects land in the same cell the one closer to the cell
    /// centre wins.
    pub fn bin_anchors(objects: &[(Vec2, f64)]) -> [AnchorCell; ANCHOR_GRID * ANCHOR_GRID] {
        let mut anchors = [AnchorCell::default(); ANCHOR_GRID * ANCHOR_GRID];
        for &(pos, heading) in objects {
            if let Some((i, j)) = anchor_index_for(pos) {
                let centre = anchor_cell_centre(i, j);
                let off = pos - centre;
                let idx = i * ANCHOR_GRID + j;
                let cell = &mut anchors[idx];
                let dist = off.norm();
                if !cell.existence || dist < Vec2::new(cell.dx, cell.dy).norm() {
                    *cell = AnchorCell {
                        existence: true,
                        dx: off.x,
                        dy: off.y,
                        sin: heading.sin(),
                        cos: heading.cos(),
                    };
                }
            }
        }
        anchors
    }

    /// Extract the represented objects as (position, heading) in the SDV frame.
    pub fn anchor_objects(&self) -> Vec<(Vec2, f64)> {
        let mut out = Vec::new();
        for i in 0..ANCHOR_GRID {
            for j in 0..ANCHOR_GRID {
                let cell = &self.anchors[i * ANCHOR_GRID + j];
                if cell.existence {
                    let pos = anchor_cell_centre(i, j) + Vec2::new(cell.dx, cell.dy);
                    out.push((pos, cell.sin.atan2(cell.cos)));
                }
            }
        }
        out
    }
}

/// Centre of anchor cell (i, j) in SDV-frame metres.
pub fn anchor_cell_centre(i: usize, j: usize) -> Vec2 {
    Vec2::new(
        ((i * ANCHOR_CELL_PX) as f64 + (ANCHOR_CELL_PX as f64 - 1.0) / 2.0 - ANCHOR_ROW) * CELL_M,
        ((j * ANCHOR_CELL_PX) as f64 + (ANCHOR_CELL_PX as f64 - 1.0) / 2.0 - ANCHOR_COL) * CELL_M,
    )
}

/// Anchor cell containing an SDV-frame point, if inside the field of view.
pub fn anchor_index_for(p: Vec2) -> Option<(usize, usize)> {
    let (pr, pc) = GridFrame::local_to_pixel(p);
    if pr < 0.0 || pc < 0.0 {
        return None;
    }
    let i = (pr / ANCHOR_CELL_PX as f64) as usize;
    let j = (pc / ANCHOR_CELL_PX as f64) as usize;
    (i < ANCHOR_GRID && j < ANCHOR_GRID).then_some((i, j))
}

/// Augmentation parameters, applied online at training time.
#[derive(Debug, Clone)]
pub struct AugmentConfig {
    /// Per-augmentation application probability (rotation and translation).
    pub p_apply: f64,
    /// Rotation range, radians (uniform in +-).
    pub rot_range: f64,
    /// Translation range per component, metres (uniform in +-).
    pub trans_range: f64,
    /// Pixel bitflip probability.
    pub p_flip: f64,
    /// Traffic dims resampling ranges, metres.
    pub dims_length_range: (f64, f64),
    pub dims_width_range: (f64, f64),
    /// Off-road standing vehicles added per sequence.
    pub offroad_vehicle_range: (usize, usize),
    /// Which augmentations are enabled (for ablations).
    pub enable_rotation: bool,
    pub enable_translation: bool,
    pub enable_bitflip: bool,
    pub enable_dims: bool,
    pub enable_offroad: bool,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            p_apply: 0.5,
            rot_range: 5.0_f64.to_radians(),
            trans_range: 2.0,
            p_flip: 0.01,
            dims_length_range: (4.0, 6.0),
            dims_width_range: (1.0, 3.0),
            offroad_vehicle_range: (2, 8),
            enable_rotation: true,
            enable_translation: true,
            enable_bitflip: true,
            enable_dims: true,
            enable_offroad: false,
        }
    }
}

/// Rotate all channels about the SDV anchor pixel (nearest-neighbour) and the
/// labels by the same angle.
pub fn aug_rotate(grid: &BevGrid, labels: &FrameLabels, angle: f64) -> (BevGrid, FrameLabels) {
    let rotated_grid = rotate_grid(grid, angle);
    let mut wp = [Vec2::ZERO; PLAN_STEPS];
    for (i, p) in labels.waypoints.points.iter().enumerate() {
        wp[i] = p.rotated(angle);
    }
    let objects: Vec<(Vec2, f64)> = labels
        .anchor_objects()
        .into_iter()
        .map(|(pos, h)| (pos.rotated(angle), h + angle))
        .collect();
    let new_labels = FrameLabels {
        waypoints: WaypointPlan::new(wp),
        anchors: FrameLabels::bin_anchors(&objects),
    };
    (rotated_grid, new_labels)
}

fn rotate_grid(grid: &BevGrid, angle: f64) -> BevGrid {
    if angle == 0.0 {
        return grid.clone();
    }
    let mut out = BevGrid::empty();
    let (sin_a, cos_a) = (-angle).sin_cos(); // inverse map: output -> source
    for r in 0..GRID_SIZE {
        let dr = r as f64 - ANCHOR_ROW;
        for c in 0..GRID_SIZE {
            let dc = c as f64 - ANCHOR_COL;
            let sr = ANCHOR_ROW + cos_a * dr - sin_a * dc;
            let sc = ANCHOR_COL + sin_a * dr + cos_a * dc;
            let sri = sr.round();
            let sci = sc.round();
            if sri < 0.0 || sci < 0.0 || sri >= GRID_SIZE as f64 || sci >= GRID_SIZE as f64 {
                continue;
            }
            let (sri, sci) = (sri as usize, sci as usize);
            for ch in 0..GRID_CHANNELS {
                if grid.get(sri, sci, ch) {
                    out.set_true(r, c, ch);
                }
            }
        }
    }
    out
}

/// Translate every channel except the SDV ones by `offset` (SDV-frame metres,
/// rounded to whole pixels on the grid); labels shift by the exact offset.
pub fn aug_translate(grid: &BevGrid, labels: &FrameLabels, offset: Vec2) -> (BevGrid, FrameLabels) {
    let dr = (offset.x / CELL_M).round() as isize;
    let dc = (offset.y / CELL_M).round() as isize;
    let mut out = grid.clone();
    if dr != 0 || dc != 0 {
        for ch in channel::TRAFFIC_NOW..GRID_CHANNELS {
            // clear and refill the shifted channel
            for r in 0..GRID_SIZE {
                for c in 0..GRID_SIZE {
                    let sr = r as isize - dr;
                    let sc = c as isize - dc;
                    let v = if sr >= 0 && sc >= 0 && (sr as usize) < GRID_SIZE && (sc as usize) < GRID_SIZE
                    {
                        grid.get(sr as usize, sc as usize, ch)
                    } else {
                        false
                    };
                    out.set(r, c, ch, v);
                }
            }
        }
    }
    let mut wp = [Vec2::ZERO; PLAN_STEPS];
    for (i, p) in labels.waypoints.points.iter().enumerate() {
        wp[i] = *p + offset;
    }
    let objects: Vec<(Vec2, f64)> = labels
        .anchor_objects()
        .into_iter()
        .map(|(pos, h)| (pos + offset, h))
        .collect();
    let new_labels = FrameLabels {
        waypoints: WaypointPlan::new(wp),
        anchors: FrameLabels::bin_anchors(&objects),
    };
    (out, new_labels)
}

/// Flip every grid bit independently with probability `p_flip`.
///
/// Uses geometric gap sampling so the cost scales with the number of flips,
/// not the number of bits.
pub fn aug_bitflip(grid: &BevGrid, p_flip: f64, rng: &mut ChaCha8Rng) -> BevGrid {
    assert!((0.0..=1.0).contains(&p_flip));
    if p_flip == 0.0 {
        return grid.clone();
    }
    if p_flip == 1.0 {
        return grid.complemented();
    }
    let mut out = grid.clone();
    let ln_q = (1.0 - p_flip).ln();
    let mut bit: f64 = 0.0;
    loop {
        let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
        bit += (u.ln() / ln_q).floor() + 1.0;
        if bit as usize > BevGrid::TOTAL_BITS {
            break;
        }
        out.flip(bit as usize - 1);
    }
    out
}

/// Resample traffic dims uniformly in the configured ranges.
pub fn aug_dims(dims: &mut VehicleDims, cfg: &AugmentConfig, rng: &mut ChaCha8Rng) {
    dims.length = rng.gen_range(cfg.dims_length_range.0..=cfg.dims_length_range.1);
    dims.width = rng.gen_range(cfg.dims_width_range.0..=cfg.dims_width_range.1);
}

/// Distance band off the drivable area where standing vehicles are placed.
pub const OFFROAD_PLACEMENT_BAND: (f64, f64) = (3.0, 15.0);

/// Add `count` standing vehicles near (but off) the road, fixed for the whole
/// episode. Placements are collision-free against existing agents; when a
/// spot cannot be found after bounded retries the vehicle is skipped with a
/// warning.
pub fn aug_offroad_vehicles(
    config: &mut crate::scenario::EpisodeConfig,
    map: &RoadMap,
    count: usize,
    rng: &mut ChaCha8Rng,
) {
    use crate::dynamics::{Agent, AgentRole, AgentScript, IdmParams};
    use crate::geom::Route;

    let (lo, hi) = map.bbox();
    let mut placed = 0;
    for _ in 0..count {
        let mut found = false;
        for _try in 0..120 {
            let p = Vec2::new(rng.gen_range(lo.x..=hi.x), rng.gen_range(lo.y..=hi.y));
            let dist = map.distance_to_drivable(p);
            if dist < OFFROAD_PLACEMENT_BAND.0 || dist > OFFROAD_PLACEMENT_BAND.1 {
                continue;
            }
            let heading = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            let dims = VehicleDims::new(rng.gen_range(4.0..=6.0), rng.gen_range(1.0..=3.0));
            let state = VehicleState::new(p.x, p.y, heading, 0.0);
            let clear = config.agents.iter().all(|a| {
                !crate::sim::obb_overlap(
                    state.pos(),
                    state.heading,
                    &dims,
                    a.state.pos(),
                    a.state.heading,
                    &a.dims,
                )
            });
            if !clear {
                continue;
            }
            config.agents.push(Agent {
                state,
                dims,
                route: Route {
                    lane_sequence: vec![],
                    goal_s: 0.0,
                },
                idm: IdmParams::default(),
                role: AgentRole::Traffic,
                script: AgentScript::Parked,
            });
            placed += 1;
            found = true;
            break;
        }
        if !found {
            log::warn!("off-road vehicle placement failed after retries; placing fewer");
        }
    }
    let _ = placed;
}
