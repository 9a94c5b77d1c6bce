//! k-d tree over unit-sphere positions.
//!
//! Chord length is a monotone function of great-circle distance, so the tree
//! can prune in 3-space. Results are returned as a candidate superset that
//! still has to be ranked by exact haversine distance; [`SpatialIndex::nearest`]
//! does that ranking with a caller-supplied tie-break.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geo::{haversine_km, GeoPoint, EARTH_RADIUS_KM};

// Absolute slack on squared chord length: covers rounding differences between
// the vector and the haversine routes (a few metres on the ground).
const CHORD2_SLACK: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SpatialIndex {
    points: Vec<GeoPoint>,
    vectors: Vec<[f64; 3]>,
    // Implicit balanced tree: the median of order[lo..hi] splits on axis depth % 3.
    order: Vec<usize>,
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

fn chord2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Squared chord length subtending `km` of great-circle arc.
fn chord2_for_km(km: f64) -> f64 {
    if !km.is_finite() {
        return f64::INFINITY;
    }
    let half_angle = (km / EARTH_RADIUS_KM / 2.0).min(std::f64::consts::FRAC_PI_2);
    let c = 2.0 * half_angle.sin();
    c * c
}

impl SpatialIndex {
    pub fn build(points: Vec<GeoPoint>) -> Self {
        let vectors: Vec<[f64; 3]> = points.iter().map(GeoPoint::unit_vector).collect();
        let mut order: Vec<usize> = (0..points.len()).collect();
        build_recursive(&vectors, &mut order, 0);
        Self {
            points,
            vectors,
            order,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, index: usize) -> GeoPoint {
        self.points[index]
    }

    /// Indices that may belong to the `k` nearest points within `radius_km`,
    /// skipping those for which `exclude` is true. Always a superset of the
    /// exact answer, including every point tied with the k-th.
    pub fn candidates(
        &self,
        query: GeoPoint,
        k: usize,
        radius_km: f64,
        exclude: &dyn Fn(usize) -> bool,
    ) -> Vec<usize> {
        if k == 0 || self.is_empty() || radius_km < 0.0 {
            return Vec::new();
        }
        let q = query.unit_vector();
        let radius2 = chord2_for_km(radius_km) + CHORD2_SLACK;

        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.knn_recursive(&q, 0, self.order.len(), 0, k, radius2, exclude, &mut heap);
        let bound = if heap.len() == k {
            heap.peek().map(|h| h.0 + CHORD2_SLACK).unwrap_or(radius2).min(radius2)
        } else {
            radius2
        };

        let mut out = Vec::new();
        self.range_recursive(&q, 0, self.order.len(), 0, bound, exclude, &mut out);
        out
    }

    /// The `k` nearest points within `radius_km` ranked by exact distance,
    /// then by `tie_break`. Returns `(index, distance_km)` pairs.
    pub fn nearest<F>(
        &self,
        query: GeoPoint,
        k: usize,
        radius_km: f64,
        exclude: &dyn Fn(usize) -> bool,
        tie_break: F,
    ) -> Vec<(usize, f64)>
    where
        F: Fn(usize, usize) -> Ordering,
    {
        let mut ranked: Vec<(usize, f64)> = self
            .candidates(query, k, radius_km, exclude)
            .into_iter()
            .map(|i| (i, haversine_km(query, self.points[i]).exact_km()))
            .filter(|&(_, d)| d <= radius_km)
            .collect();
        ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| tie_break(a.0, b.0)));
        ranked.truncate(k);
        ranked
    }

    #[allow(clippy::too_many_arguments)]
    fn knn_recursive(
        &self,
        q: &[f64; 3],
        lo: usize,
        hi: usize,
        depth: usize,
        k: usize,
        radius2: f64,
        exclude: &dyn Fn(usize) -> bool,
        heap: &mut BinaryHeap<HeapItem>,
    ) {
        if lo >= hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let idx = self.order[mid];
        let v = &self.vectors[idx];
        let d2 = chord2(q, v);
        if d2 <= radius2 && !exclude(idx) {
            heap.push(HeapItem(d2, idx));
            if heap.len() > k {
                heap.pop();
            }
        }
        let axis = depth % 3;
        let diff = q[axis] - v[axis];
        let (near, far) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.knn_recursive(q, near.0, near.1, depth + 1, k, radius2, exclude, heap);
        let bound = if heap.len() == k {
            heap.peek().map(|h| h.0).unwrap_or(radius2).min(radius2)
        } else {
            radius2
        };
        if diff * diff <= bound + CHORD2_SLACK {
            self.knn_recursive(q, far.0, far.1, depth + 1, k, radius2, exclude, heap);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn range_recursive(
        &self,
        q: &[f64; 3],
        lo: usize,
        hi: usize,
        depth: usize,
        bound: f64,
        exclude: &dyn Fn(usize) -> bool,
        out: &mut Vec<usize>,
    ) {
        if lo >= hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let idx = self.order[mid];
        let v = &self.vectors[idx];
        if chord2(q, v) <= bound && !exclude(idx) {
            out.push(idx);
        }
        let axis = depth % 3;
        let diff = q[axis] - v[axis];
        if diff < 0.0 || diff * diff <= bound {
            self.range_recursive(q, lo, mid, depth + 1, bound, exclude, out);
        }
        if diff >= 0.0 || diff * diff <= bound {
            self.range_recursive(q, mid + 1, hi, depth + 1, bound, exclude, out);
        }
    }
}

fn build_recursive(vectors: &[[f64; 3]], order: &mut [usize], depth: usize) {
    if order.len() <= 1 {
        return;
    }
    let axis = depth % 3;
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        vectors[a][axis].total_cmp(&vectors[b][axis]).then(a.cmp(&b))
    });
    let (left, right) = order.split_at_mut(mid);
    build_recursive(vectors, left, depth + 1);
    build_recursive(vectors, &mut right[1..], depth + 1);
}
