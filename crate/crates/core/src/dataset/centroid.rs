use super::DatasetError;
use crate::geo::GeoPoint;

// Twice-area threshold (square degrees) below which a ring is treated as degenerate.
const DEGENERATE_AREA2: f64 = 1e-12;

/// Area centroid of a polygon ring, treating lon/lat as planar.
///
/// A closing vertex equal to the first is ignored. Longitudes are unwrapped
/// relative to the first vertex so rings crossing the antimeridian work.
/// Near-zero-area rings fall back to the vertex mean.
pub fn zip_centroid(boundary: &[GeoPoint]) -> Result<GeoPoint, DatasetError> {
    let mut ring = boundary;
    if ring.len() > 1 && ring.first() == ring.last() {
        ring = &ring[..ring.len() - 1];
    }
    if ring.len() < 3 {
        return Err(DatasetError::InvalidPolygon(format!(
            "{} distinct vertices, need at least 3",
            ring.len()
        )));
    }
    let lon0 = ring[0].lon();
    let lat0 = ring[0].lat();
    // Local coordinates relative to the first vertex keep the cross products small.
    let local: Vec<(f64, f64)> = ring
        .iter()
        .map(|p| {
            let mut dx = p.lon() - lon0;
            if dx > 180.0 {
                dx -= 360.0;
            } else if dx < -180.0 {
                dx += 360.0;
            }
            (dx, p.lat() - lat0)
        })
        .collect();

    let mut a2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..local.len() {
        let (x0, y0) = local[i];
        let (x1, y1) = local[(i + 1) % local.len()];
        let cross = x0 * y1 - x1 * y0;
        a2 += cross;
        cx += (x0 + x1) * cross;
        cy += (y0 + y1) * cross;
    }
    let (x, y) = if a2.abs() <= DEGENERATE_AREA2 {
        let n = local.len() as f64;
        (
            local.iter().map(|p| p.0).sum::<f64>() / n,
            local.iter().map(|p| p.1).sum::<f64>() / n,
        )
    } else {
        (cx / (3.0 * a2), cy / (3.0 * a2))
    };
    GeoPoint::new(lat0 + y, lon0 + x).map_err(|e| DatasetError::InvalidPolygon(e.to_string()))
}
