//! Binary road-map container, magic `RONDOMAP1`.

use super::{Boundary, BoundaryKind, Lane, LimitClass, Polygon, Polyline, RoadMap, Vec2};
use crate::codec::{ByteReader, ByteWriter, FormatError};

pub const MAP_MAGIC: &[u8] = b"RONDOMAP1";

pub fn encode_map(map: &RoadMap) -> Vec<u8> {
    let mut w = ByteWriter::new();
    w.magic(MAP_MAGIC);
    w.str(&map.id);
    w.u32(map.lanes.len() as u32);
    for lane in &map.lanes {
        w.str(&lane.id);
        write_polyline(&mut w, &lane.centreline);
        w.f64(lane.width);
        w.u32(lane.successors.len() as u32);
        for s in &lane.successors {
            w.str(s);
        }
        w.u32(lane.yield_to.len() as u32);
        for s in &lane.yield_to {
            w.str(s);
        }
        w.u8(lane.limit_class.index() as u8);
        w.u8(lane.closed_loop as u8);
    }
    w.u32(map.boundaries.len() as u32);
    for b in &map.boundaries {
        w.u8(match b.kind {
            BoundaryKind::Solid => 0,
            BoundaryKind::Broken => 1,
        });
        write_polyline(&mut w, &b.line);
    }
    w.u32(map.drivable.len() as u32);
    for poly in &map.drivable {
        write_polygon(&mut w, poly);
    }
    w.u32(map.speed_zones.len() as u32);
    for (poly, class) in &map.speed_zones {
        write_polygon(&mut w, poly);
        w.u8(class.index() as u8);
    }
    w.into_bytes()
}

pub fn decode_map(bytes: &[u8]) -> Result<RoadMap, FormatError> {
    let mut r = ByteReader::new(bytes);
    let map = read_map(&mut r)?;
    r.expect_end()?;
    Ok(map)
}

pub(crate) fn read_map(r: &mut ByteReader<'_>) -> Result<RoadMap, FormatError> {
    r.magic(MAP_MAGIC)?;
    let id = r.str()?;
    let n_lanes = r.u32()? as usize;
    let mut lanes = Vec::with_capacity(n_lanes);
    for _ in 0..n_lanes {
        let id = r.str()?;
        let centreline = read_polyline(r)?;
        let width = r.f64()?;
        let n = r.u32()? as usize;
        let successors = (0..n).map(|_| r.str()).collect::<Result<_, _>>()?;
        let n = r.u32()? as usize;
        let yield_to = (0..n).map(|_| r.str()).collect::<Result<_, _>>()?;
        let off = r.offset();
        let limit_class = LimitClass::from_index(r.u8()? as usize).ok_or_else(|| {
            FormatError::Invalid {
                offset: off,
                what: "unknown limit class".into(),
            }
        })?;
        let closed_loop = r.u8()? != 0;
        lanes.push(Lane {
            id,
            centreline,
            width,
            successors,
            yield_to,
            limit_class,
            closed_loop,
        });
    }
    let n = r.u32()? as usize;
    let mut boundaries = Vec::with_capacity(n);
    for _ in 0..n {
        let off = r.offset();
        let kind = match r.u8()? {
            0 => BoundaryKind::Solid,
            1 => BoundaryKind::Broken,
            k => {
                return Err(FormatError::Invalid {
                    offset: off,
                    what: format!("unknown boundary kind {k}"),
                })
            }
        };
        boundaries.push(Boundary {
            kind,
            line: read_polyline(r)?,
        });
    }
    let n = r.u32()? as usize;
    let drivable = (0..n).map(|_| read_polygon(r)).collect::<Result<_, _>>()?;
    let n = r.u32()? as usize;
    let mut speed_zones = Vec::with_capacity(n);
    for _ in 0..n {
        let poly = read_polygon(r)?;
        let off = r.offset();
        let class = LimitClass::from_index(r.u8()? as usize).ok_or_else(|| {
            FormatError::Invalid {
                offset: off,
                what: "unknown limit class".into(),
            }
        })?;
        speed_zones.push((poly, class));
    }
    Ok(RoadMap::new(id, lanes, boundaries, drivable, speed_zones))
}

pub(crate) fn write_map(w: &mut ByteWriter, map: &RoadMap) {
    w.bytes(&encode_map(map));
}

fn write_polyline(w: &mut ByteWriter, pl: &Polyline) {
    w.u32(pl.points().len() as u32);
    for p in pl.points() {
        w.f64(p.x);
        w.f64(p.y);
    }
}

fn read_polyline(r: &mut ByteReader<'_>) -> Result<Polyline, FormatError> {
    let off = r.offset();
    let n = r.u32()? as usize;
    if !(2..1 << 24).contains(&n) {
        return Err(FormatError::Invalid {
            offset: off,
            what: format!("polyline point count {n} out of range"),
        });
    }
    let mut pts = Vec::with_capacity(n);
    for _ in 0..n {
        let x = r.f64()?;
        let y = r.f64()?;
        pts.push(Vec2::new(x, y));
    }
    Ok(Polyline::new(pts))
}

fn write_polygon(w: &mut ByteWriter, poly: &Polygon) {
    w.u32(poly.vertices().len() as u32);
    for p in poly.vertices() {
        w.f64(p.x);
        w.f64(p.y);
    }
}

fn read_polygon(r: &mut ByteReader<'_>) -> Result<Polygon, FormatError> {
    let off = r.offset();
    let n = r.u32()? as usize;
    if !(3..1 << 24).contains(&n) {
        return Err(FormatError::Invalid {
            offset: off,
            what: format!("polygon vertex count {n} out of range"),
        });
    }
    let mut pts = Vec::with_capacity(n);
    for _ in 0..n {
        let x = r.f64()?;
        let y = r.f64()?;
        pts.push(Vec2::new(x, y));
    }
    Ok(Polygon::new(pts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{synthesize_roundabout, RoundaboutParams};

    #[test]
    fn map_round_trip_is_byte_identical() {
        let p = RoundaboutParams::symmetric(4, 15.0, 60.0, 3.5);
        let map = synthesize_roundabout(&p).unwrap();
        let bytes = encode_map(&map);
        let decoded = decode_map(&bytes).unwrap();
        assert_eq!(encode_map(&decoded), bytes);
        assert_eq!(decoded.lanes.len(), map.lanes.len());
    }

    #[test]
    fn truncated_map_is_an_error() {
        let p = RoundaboutParams::symmetric(3, 14.0, 50.0, 3.5);
        let map = synthesize_roundabout(&p).unwrap();
        let bytes = encode_map(&map);
        let short = &bytes[..bytes.len() / 2];
        assert!(decode_map(short).is_err());
    }
}
