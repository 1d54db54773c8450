//! Nearest-neighbour queries in the chordal metric.
//!
//! Points are lifted to the unit sphere in R^3, where chordal distance is
//! Euclidean distance, and stored in a k-d tree. The lift is followed by a
//! fixed generic rotation: kiddo's immutable tree misbehaves when many points
//! share one coordinate exactly, which happens for sets on the unit circle or
//! the real line.

use crate::ratmap::SpherePoint;
use kiddo::{ImmutableKdTree, SquaredEuclidean};
use std::collections::HashMap;

// Rotation by Euler angles (0.7, 1.1, 0.3); any rotation preserves distances.
fn rotation() -> [[f64; 3]; 3] {
    let (a, b, c) = (0.7f64, 1.1f64, 0.3f64);
    let rz = |t: f64| [[t.cos(), -t.sin(), 0.0], [t.sin(), t.cos(), 0.0], [0.0, 0.0, 1.0]];
    let rx = |t: f64| [[1.0, 0.0, 0.0], [0.0, t.cos(), -t.sin()], [0.0, t.sin(), t.cos()]];
    let mul = |p: [[f64; 3]; 3], q: [[f64; 3]; 3]| {
        let mut r = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] = (0..3).map(|k| p[i][k] * q[k][j]).sum();
            }
        }
        r
    };
    mul(rz(a), mul(rx(b), rz(c)))
}

fn lift(p: &SpherePoint, r: &[[f64; 3]; 3]) -> [f64; 3] {
    let v = p.to_unit_vector();
    [0, 1, 2].map(|i| r[i][0] * v[0] + r[i][1] * v[1] + r[i][2] * v[2])
}

pub struct SphereIndex {
    tree: Option<ImmutableKdTree<f64, 3>>,
    // tree item -> index into the caller's point list
    owners: Vec<usize>,
    rot: [[f64; 3]; 3],
}

impl SphereIndex {
    pub fn new(points: &[SpherePoint]) -> Self {
        let mut seen: HashMap<[u64; 3], ()> = HashMap::with_capacity(points.len());
        let mut coords = Vec::with_capacity(points.len());
        let mut owners = Vec::with_capacity(points.len());
        let rot = rotation();
        for (k, p) in points.iter().enumerate() {
            let v = lift(p, &rot);
            let key = [v[0].to_bits(), v[1].to_bits(), v[2].to_bits()];
            if seen.insert(key, ()).is_none() {
                coords.push(v);
                owners.push(k);
            }
        }
        let tree = if coords.is_empty() {
            None
        } else {
            Some(ImmutableKdTree::new_from_slice(&coords))
        };
        Self { tree, owners, rot }
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_none()
    }

    /// Index of the nearest stored point and its chordal distance.
    pub fn nearest(&self, p: &SpherePoint) -> Option<(usize, f64)> {
        let tree = self.tree.as_ref()?;
        let nn = tree.nearest_one::<SquaredEuclidean>(&lift(p, &self.rot));
        Some((self.owners[nn.item as usize], nn.distance.max(0.0).sqrt()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_matches_brute_force() {
        let pts: Vec<SpherePoint> = (0..500)
            .map(|k| {
                let t = k as f64 * 0.7;
                SpherePoint::from_re_im(t.cos() * (1.0 + 0.01 * k as f64), (2.0 * t).sin())
            })
            .chain(std::iter::repeat(SpherePoint::ZERO).take(100))
            .chain([SpherePoint::Infinity])
            .collect();
        let index = SphereIndex::new(&pts);
        for q in [
            SpherePoint::from_re_im(0.3, 0.2),
            SpherePoint::from_re_im(-4.0, 1.0),
            SpherePoint::from_re_im(1e9, 0.0),
        ] {
            let (_, d) = index.nearest(&q).unwrap();
            let brute = pts.iter().map(|p| p.chordal_distance(&q)).fold(f64::INFINITY, f64::min);
            assert!((d - brute).abs() < 1e-12, "{q} {d} {brute}");
        }
        // many samples sharing a coordinate exactly
        let circle: Vec<SpherePoint> = (0..50_000)
            .map(|k| SpherePoint::new(num_complex::Complex64::from_polar(1.0, k as f64 * 0.001)))
            .collect();
        let index = SphereIndex::new(&circle);
        for q in [SpherePoint::from_re_im(0.5, 0.1), SpherePoint::from_re_im(1.0, 1.0)] {
            let (_, d) = index.nearest(&q).unwrap();
            let brute = circle.iter().map(|p| p.chordal_distance(&q)).fold(f64::INFINITY, f64::min);
            assert!((d - brute).abs() < 1e-12, "{q} {d} {brute}");
        }
        assert!(SphereIndex::new(&[]).nearest(&SpherePoint::ZERO).is_none());
    }
}
