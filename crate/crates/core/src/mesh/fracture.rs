use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::MeshError;
use crate::math::{cos, round, sin};

/// Straight fracture segment in the unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl Segment {
    pub fn new(a: [f64; 2], b: [f64; 2]) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        crate::math::hypot(self.b[0] - self.a[0], self.b[1] - self.a[1])
    }

    pub fn is_inside_unit_square(&self) -> bool {
        let ok = |p: [f64; 2]| p.iter().all(|&x| (0.0..=1.0).contains(&x));
        ok(self.a) && ok(self.b)
    }
}

/// Random network: centers uniform in the square, lengths uniform in
/// `[length_min, length_max]`, angles drawn from `orientations` (radians).
/// Segments are clipped to the unit square.
#[derive(Debug, Clone, PartialEq)]
pub struct FractureGenerator {
    pub count: usize,
    pub length_min: f64,
    pub length_max: f64,
    pub orientations: Vec<f64>,
    pub seed: u64,
}

/// Explicit segments plus an optional generated network, in that order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FractureSpec {
    pub segments: Vec<Segment>,
    pub generator: Option<FractureGenerator>,
}

impl FractureSpec {
    pub fn from_segments(segments: Vec<Segment>) -> Self {
        Self {
            segments,
            generator: None,
        }
    }

    /// All segments, generated ones appended after the explicit list.
    pub fn resolve(&self) -> Result<Vec<Segment>, MeshError> {
        let mut out = self.segments.clone();
        if let Some(g) = &self.generator {
            out.extend(generate_segments(g)?);
        }
        Ok(out)
    }
}

pub fn generate_segments(g: &FractureGenerator) -> Result<Vec<Segment>, MeshError> {
    if g.orientations.is_empty() && g.count > 0 {
        return Err(MeshError::InvalidGenerator("orientation set is empty"));
    }
    if !(g.length_min > 0.0 && g.length_min <= g.length_max) {
        return Err(MeshError::InvalidGenerator(
            "lengths must satisfy 0 < length_min <= length_max",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let mut out = Vec::with_capacity(g.count);
    for _ in 0..g.count {
        let cx: f64 = rng.random();
        let cy: f64 = rng.random();
        let u: f64 = rng.random();
        let len = g.length_min + u * (g.length_max - g.length_min);
        let theta = g.orientations[rng.random_range(0..g.orientations.len())];
        let (dx, dy) = (0.5 * len * cos(theta), 0.5 * len * sin(theta));
        // the center is inside, so each half is clipped independently
        let (mut t_plus, mut t_minus) = (1.0f64, 1.0f64);
        for (c, d) in [(cx, dx), (cy, dy)] {
            if d > 0.0 {
                t_plus = t_plus.min((1.0 - c) / d);
                t_minus = t_minus.min(c / d);
            } else if d < 0.0 {
                t_plus = t_plus.min(c / -d);
                t_minus = t_minus.min((1.0 - c) / -d);
            }
        }
        let clamp = |x: f64| x.clamp(0.0, 1.0);
        out.push(Segment::new(
            [clamp(cx - t_minus * dx), clamp(cy - t_minus * dy)],
            [clamp(cx + t_plus * dx), clamp(cy + t_plus * dy)],
        ));
    }
    Ok(out)
}

/// Lattice path from the snapped start to the snapped end of `seg` using
/// moves along x, y and the SW-NE diagonal.
pub(super) fn snap_segment(n: usize, seg: &Segment) -> Vec<(usize, usize)> {
    let snap = |x: f64| round(x * n as f64) as i64;
    let (x0, y0) = (snap(seg.a[0]), snap(seg.a[1]));
    let (x1, y1) = (snap(seg.b[0]), snap(seg.b[1]));
    let mut path = Vec::new();
    path.push((x0 as usize, y0 as usize));
    if (x0, y0) == (x1, y1) {
        return path;
    }
    let (lx, ly) = ((x1 - x0) as f64, (y1 - y0) as f64);
    let line_norm = crate::math::hypot(lx, ly);
    let deviation = |x: i64, y: i64| ((x - x0) as f64 * ly - (y - y0) as f64 * lx).abs() / line_norm;
    let (mut x, mut y) = (x0, y0);
    while (x, y) != (x1, y1) {
        let (dx, dy) = (x1 - x, y1 - y);
        let mut moves: [(i64, i64); 3] = [(0, 0); 3];
        let mut k = 0;
        if dx != 0 {
            moves[k] = (dx.signum(), 0);
            k += 1;
        }
        if dy != 0 {
            moves[k] = (0, dy.signum());
            k += 1;
        }
        if dx.signum() == dy.signum() && dx != 0 {
            moves[k] = (dx.signum(), dy.signum());
            k += 1;
        }
        let mut best = moves[0];
        let mut best_dev = f64::INFINITY;
        for &(mx, my) in &moves[..k] {
            let d = deviation(x + mx, y + my);
            // prefer the diagonal on ties: it is one edge instead of two
            if d < best_dev - 1e-12 || (d <= best_dev + 1e-12 && mx != 0 && my != 0) {
                best_dev = d;
                best = (mx, my);
            }
        }
        x += best.0;
        y += best.1;
        path.push((x as usize, y as usize));
    }
    path
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_length(n: usize, path: &[(usize, usize)]) -> f64 {
        path.windows(2)
            .map(|w| {
                let dx = w[1].0 as f64 - w[0].0 as f64;
                let dy = w[1].1 as f64 - w[0].1 as f64;
                crate::math::hypot(dx, dy) / n as f64
            })
            .sum()
    }

    fn chebyshev_to_segment(p: [f64; 2], s: &Segment) -> f64 {
        (0..=4000)
            .map(|k| {
                let t = k as f64 / 4000.0;
                let q = [
                    s.a[0] + t * (s.b[0] - s.a[0]),
                    s.a[1] + t * (s.b[1] - s.a[1]),
                ];
                (p[0] - q[0]).abs().max((p[1] - q[1]).abs())
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn oblique_paths_stay_close_and_short() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 40;
        let h = 1.0 / n as f64;
        for _ in 0..200 {
            let s = Segment::new(
                [rng.random(), rng.random()],
                [rng.random(), rng.random()],
            );
            if s.length() < 0.2 {
                continue;
            }
            let path = snap_segment(n, &s);
            let len = path_length(n, &path);
            assert!(len <= core::f64::consts::SQRT_2 * s.length() + 2.0 * h);
            assert!(len >= s.length() - 2.0 * h);
            for &(i, j) in &path {
                let p = [i as f64 * h, j as f64 * h];
                assert!(chebyshev_to_segment(p, &s) <= h * (1.0 + 1e-3));
            }
        }
    }

    #[test]
    fn generator_is_deterministic_and_clipped() {
        let g = FractureGenerator {
            count: 30,
            length_min: 0.1,
            length_max: 0.4,
            orientations: alloc::vec![0.0, core::f64::consts::FRAC_PI_4, 1.2],
            seed: 42,
        };
        let a = generate_segments(&g).unwrap();
        let b = generate_segments(&g).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 30);
        assert!(a.iter().all(|s| s.is_inside_unit_square()));
        let c = generate_segments(&FractureGenerator { seed: 43, ..g }).unwrap();
        assert_ne!(a, c);
    }
}
