//! Three-segment planar arm in a square room of simple shapes.
//!
//! The room frame has its origin in a corner with walls at 0 and
//! [`ROOM_WIDTH`]. The arm base sits at the room centre; translating the
//! environment by `ε` places the base at `base − ε` in room coordinates.
//! Sensor rays have fixed world directions whatever the joint angles.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{MotorState, Position};
use crate::error::{Error, Result};
use crate::rng::Rng;

pub const ROOM_WIDTH: f64 = 12.0;
pub const SEGMENT_LENGTHS: [f64; 3] = [1.0, 1.0, 1.0];
pub const WALL_COLOR: [f64; 3] = [0.5, 0.5, 0.5];
pub const MISS_COLOR: [f64; 3] = [0.0, 0.0, 0.0];
/// Longer than the room diagonal, so in-room rays never saturate.
pub const DEFAULT_MAX_RANGE: f64 = 24.0;
pub const DISTANCE_RAYS: usize = 10;
pub const RGB_PIXELS: usize = 16;
/// Minimum distance between the translated base and any wall.
pub const BASE_WALL_MARGIN: f64 = 0.1;
/// Radius of the object-free disc around the untranslated base.
pub const BASE_CLEARANCE: f64 = 0.5;
const MAX_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Circle,
    Square,
    Triangle,
}

/// A coloured shape. `size` is the radius of a circle, the half-side of a
/// square and the circumradius of an equilateral triangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub kind: ShapeKind,
    pub center: [f64; 2],
    pub size: f64,
    pub color: [f64; 3],
    pub orientation: f64,
}

impl SceneObject {
    /// Radius of the smallest centred disc containing the shape.
    pub fn bounding_radius(&self) -> f64 {
        match self.kind {
            ShapeKind::Circle | ShapeKind::Triangle => self.size,
            ShapeKind::Square => self.size * std::f64::consts::SQRT_2,
        }
    }

    /// Polygon vertices in counter-clockwise order (empty for circles).
    pub fn vertices(&self) -> Vec<[f64; 2]> {
        let n = match self.kind {
            ShapeKind::Circle => return Vec::new(),
            ShapeKind::Square => 4,
            ShapeKind::Triangle => 3,
        };
        let r = self.bounding_radius();
        // Squares get their first vertex on the diagonal so orientation 0 is axis-aligned.
        let phase = if n == 4 { PI / 4.0 } else { 0.0 };
        (0..n)
            .map(|k| {
                let a = self.orientation + phase + TAU * k as f64 / n as f64;
                [self.center[0] + r * a.cos(), self.center[1] + r * a.sin()]
            })
            .collect()
    }

    /// Closed containment test.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        match self.kind {
            ShapeKind::Circle => {
                let d = [p[0] - self.center[0], p[1] - self.center[1]];
                d[0] * d[0] + d[1] * d[1] <= self.size * self.size
            }
            _ => {
                let v = self.vertices();
                (0..v.len()).all(|i| {
                    let a = v[i];
                    let b = v[(i + 1) % v.len()];
                    cross([b[0] - a[0], b[1] - a[1]], [p[0] - a[0], p[1] - a[1]]) >= 0.0
                })
            }
        }
    }

    /// Distance along the ray to the nearest boundary crossing, if any.
    fn intersect(&self, origin: [f64; 2], dir: [f64; 2]) -> Option<f64> {
        match self.kind {
            ShapeKind::Circle => ray_circle(origin, dir, self.center, self.size),
            _ => {
                let v = self.vertices();
                (0..v.len())
                    .filter_map(|i| ray_segment(origin, dir, v[i], v[(i + 1) % v.len()]))
                    .min_by(f64::total_cmp)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorKind {
    /// Ten range readings.
    DistanceRing,
    /// Sixteen pixels of hit colour, three channels each.
    RgbPanorama,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorSpec {
    pub kind: SensorKind,
    pub max_range: f64,
    /// World angle of the first ray.
    pub world_orientation: f64,
}

impl SensorSpec {
    pub fn new(kind: SensorKind) -> Self {
        Self { kind, max_range: DEFAULT_MAX_RANGE, world_orientation: 0.0 }
    }

    pub fn ray_count(&self) -> usize {
        match self.kind {
            SensorKind::DistanceRing => DISTANCE_RAYS,
            SensorKind::RgbPanorama => RGB_PIXELS,
        }
    }

    pub fn sensory_dim(&self) -> usize {
        match self.kind {
            SensorKind::DistanceRing => DISTANCE_RAYS,
            SensorKind::RgbPanorama => 3 * RGB_PIXELS,
        }
    }

    /// Unit ray directions, evenly spread over the full circle.
    pub fn directions(&self) -> Vec<[f64; 2]> {
        let n = self.ray_count();
        (0..n)
            .map(|k| {
                let a = self.world_orientation + TAU * k as f64 / n as f64;
                [a.cos(), a.sin()]
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmRoom {
    pub room_width: f64,
    pub objects: Vec<SceneObject>,
    /// Untranslated base position in the room frame.
    pub base: [f64; 2],
    /// Displacement `ε` of the environment relative to the base.
    pub translation: [f64; 2],
    pub sensor: SensorSpec,
}

/// Tip of the arm in the base frame: the sum of the segment vectors at their
/// cumulative joint angles.
pub fn arm_kinematics(m: &MotorState) -> Result<Position> {
    if let Some(bad) = m.iter().find(|a| a.is_nan() || a.abs() > PI) {
        return Err(Error::Domain(format!("joint angle {bad} outside [-π, π]")));
    }
    let mut theta = 0.0;
    let mut tip = [0.0, 0.0];
    for (angle, len) in m.iter().zip(SEGMENT_LENGTHS) {
        theta += angle;
        tip[0] += len * theta.cos();
        tip[1] += len * theta.sin();
    }
    Ok(tip)
}

impl ArmRoom {
    /// Random room: 3–8 objects of random shape, size in `[0.3, 1.5]` and
    /// colour, fully inside the walls and clear of the base.
    pub fn random(sensor: SensorKind, rng: &mut Rng) -> Result<Self> {
        let base = [ROOM_WIDTH / 2.0, ROOM_WIDTH / 2.0];
        let count = rng.int_in(3, 8);
        let mut objects = Vec::with_capacity(count);
        for _ in 0..count {
            let kind = match rng.below(3) {
                0 => ShapeKind::Circle,
                1 => ShapeKind::Square,
                _ => ShapeKind::Triangle,
            };
            let size = rng.uniform_in(0.3, 1.5);
            let color = [rng.uniform(), rng.uniform(), rng.uniform()];
            let orientation = match kind {
                ShapeKind::Circle => 0.0,
                ShapeKind::Square => rng.uniform_in(0.0, PI / 2.0),
                ShapeKind::Triangle => rng.uniform_in(0.0, TAU / 3.0),
            };
            let mut obj = SceneObject { kind, center: [0.0; 2], size, color, orientation };
            let r = obj.bounding_radius();
            let mut placed = false;
            for _ in 0..MAX_ATTEMPTS {
                let c = [rng.uniform_in(r, ROOM_WIDTH - r), rng.uniform_in(r, ROOM_WIDTH - r)];
                let d = ((c[0] - base[0]).powi(2) + (c[1] - base[1]).powi(2)).sqrt();
                if d > r + BASE_CLEARANCE {
                    obj.center = c;
                    placed = true;
                    break;
                }
            }
            if !placed {
                return Err(Error::SceneGeneration {
                    attempts: MAX_ATTEMPTS,
                    what: format!("could not place a {kind:?} of size {size}"),
                });
            }
            objects.push(obj);
        }
        Ok(Self {
            room_width: ROOM_WIDTH,
            objects,
            base,
            translation: [0.0, 0.0],
            sensor: SensorSpec::new(sensor),
        })
    }

    pub fn empty(sensor: SensorKind) -> Self {
        Self {
            room_width: ROOM_WIDTH,
            objects: Vec::new(),
            base: [ROOM_WIDTH / 2.0, ROOM_WIDTH / 2.0],
            translation: [0.0, 0.0],
            sensor: SensorSpec::new(sensor),
        }
    }

    /// Base position in the room frame under the current translation.
    pub fn effective_base(&self) -> [f64; 2] {
        [self.base[0] - self.translation[0], self.base[1] - self.translation[1]]
    }

    fn strictly_inside_walls(&self, p: [f64; 2]) -> bool {
        p.iter().all(|&c| c > 0.0 && c < self.room_width)
    }

    /// Whether a point can host the sensor: inside the walls and outside every object.
    pub fn is_free(&self, p: [f64; 2]) -> bool {
        self.strictly_inside_walls(p) && !self.objects.iter().any(|o| o.contains(p))
    }

    /// Nearest hit along a ray: distance (clamped to the sensor range) and
    /// surface colour.
    pub fn raycast(&self, origin: [f64; 2], dir: [f64; 2]) -> Result<(f64, [f64; 3])> {
        if !self.is_free(origin) {
            return Err(Error::Geometry(format!(
                "ray origin ({}, {}) is not in free space",
                origin[0], origin[1]
            )));
        }
        let w = self.room_width;
        let corners = [[0.0, 0.0], [w, 0.0], [w, w], [0.0, w]];
        let mut best = (f64::INFINITY, WALL_COLOR);
        for i in 0..4 {
            if let Some(t) = ray_segment(origin, dir, corners[i], corners[(i + 1) % 4]) {
                if t < best.0 {
                    best = (t, WALL_COLOR);
                }
            }
        }
        for obj in &self.objects {
            if let Some(t) = obj.intersect(origin, dir) {
                if t < best.0 {
                    best = (t, obj.color);
                }
            }
        }
        if best.0 >= self.sensor.max_range {
            return Ok((self.sensor.max_range, MISS_COLOR));
        }
        Ok(best)
    }

    /// Sensor tip in the room frame, or `None` if the configuration is
    /// physically impossible (outside the walls or inside an object).
    pub fn tip(&self, m: &MotorState) -> Result<Option<[f64; 2]>> {
        let p = arm_kinematics(m)?;
        let b = self.effective_base();
        let tip = [b[0] + p[0], b[1] + p[1]];
        Ok(self.is_free(tip).then_some(tip))
    }

    pub fn sense(&self, m: &MotorState) -> Result<Option<Vec<f64>>> {
        let Some(tip) = self.tip(m)? else {
            return Ok(None);
        };
        let dirs = self.sensor.directions();
        let mut out = Vec::with_capacity(self.sensor.sensory_dim());
        for d in dirs {
            let (dist, color) = self.raycast(tip, d)?;
            match self.sensor.kind {
                SensorKind::DistanceRing => out.push(dist),
                SensorKind::RgbPanorama => out.extend_from_slice(&color),
            }
        }
        Ok(Some(out))
    }

    /// A new translation uniform over the square of side `room_width` centred
    /// on the initial placement, redrawn until the base is at least
    /// [`BASE_WALL_MARGIN`] inside the walls.
    pub fn translated(&self, rng: &mut Rng) -> Result<Self> {
        let half = self.room_width / 2.0;
        for _ in 0..MAX_ATTEMPTS {
            let t = [rng.uniform_in(-half, half), rng.uniform_in(-half, half)];
            let b = [self.base[0] - t[0], self.base[1] - t[1]];
            let lo = BASE_WALL_MARGIN;
            let hi = self.room_width - BASE_WALL_MARGIN;
            if b.iter().all(|&c| c >= lo && c <= hi) {
                return Ok(Self { translation: t, ..self.clone() });
            }
        }
        Err(Error::Geometry(format!("no admissible translation after {MAX_ATTEMPTS} draws")))
    }

    /// Uniform joint angles in `[-π, π)`.
    pub fn sample_motor(rng: &mut Rng) -> MotorState {
        [rng.uniform_in(-PI, PI), rng.uniform_in(-PI, PI), rng.uniform_in(-PI, PI)]
    }
}

#[inline]
fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Smallest positive `t` with `origin + t·dir` on segment `[a, b]`.
pub(crate) fn ray_segment(origin: [f64; 2], dir: [f64; 2], a: [f64; 2], b: [f64; 2]) -> Option<f64> {
    let e = [b[0] - a[0], b[1] - a[1]];
    let denom = cross(dir, e);
    if denom.abs() < 1e-15 {
        return None;
    }
    let ao = [a[0] - origin[0], a[1] - origin[1]];
    let t = cross(ao, e) / denom;
    let s = cross(ao, dir) / denom;
    (t > 0.0 && (0.0..=1.0).contains(&s)).then_some(t)
}

/// Smallest positive `t` with `origin + t·dir` on the circle; `dir` must be unit length.
pub(crate) fn ray_circle(origin: [f64; 2], dir: [f64; 2], center: [f64; 2], r: f64) -> Option<f64> {
    let oc = [origin[0] - center[0], origin[1] - center[1]];
    let b = oc[0] * dir[0] + oc[1] * dir[1];
    let c = oc[0] * oc[0] + oc[1] * oc[1] - r * r;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let near = -b - sq;
    if near > 0.0 {
        return Some(near);
    }
    let far = -b + sq;
    (far > 0.0).then_some(far)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(center: [f64; 2], r: f64) -> SceneObject {
        SceneObject { kind: ShapeKind::Circle, center, size: r, color: [1.0, 0.0, 0.0], orientation: 0.0 }
    }

    #[test]
    fn kinematics_examples() {
        let close = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12;
        assert!(close(arm_kinematics(&[0.0, 0.0, 0.0]).unwrap(), [3.0, 0.0]));
        assert!(close(arm_kinematics(&[PI / 2.0, 0.0, 0.0]).unwrap(), [0.0, 3.0]));
        assert!(close(arm_kinematics(&[PI / 2.0, -PI / 2.0, 0.0]).unwrap(), [2.0, 1.0]));
        assert!(matches!(arm_kinematics(&[4.0, 0.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn ray_hits_circle() {
        let t = ray_circle([0.0, 0.0], [1.0, 0.0], [3.0, 0.0], 1.0).unwrap();
        assert!((t - 2.0).abs() < 1e-12);
        assert!(ray_circle([0.0, 0.0], [-1.0, 0.0], [3.0, 0.0], 1.0).is_none());
    }

    #[test]
    fn empty_room_distances() {
        let room = ArmRoom::empty(SensorKind::DistanceRing);
        let (d, c) = room.raycast([6.0, 6.0], [1.0, 0.0]).unwrap();
        assert!((d - 6.0).abs() < 1e-12);
        assert_eq!(c, WALL_COLOR);
    }

    #[test]
    fn nearest_of_several_objects() {
        let mut room = ArmRoom::empty(SensorKind::DistanceRing);
        room.objects = vec![circle([10.0, 2.0], 0.5), circle([8.0, 2.0], 0.5)];
        let (d, _) = room.raycast([2.0, 2.0], [1.0, 0.0]).unwrap();
        assert!((d - 5.5).abs() < 1e-12);
    }

    #[test]
    fn invalid_origin() {
        let mut room = ArmRoom::empty(SensorKind::DistanceRing);
        room.objects = vec![circle([3.0, 3.0], 1.0)];
        assert!(matches!(room.raycast([3.0, 3.0], [1.0, 0.0]), Err(Error::Geometry(_))));
        assert!(matches!(room.raycast([13.0, 3.0], [1.0, 0.0]), Err(Error::Geometry(_))));
    }

    #[test]
    fn tip_inside_object_is_discarded() {
        let mut room = ArmRoom::empty(SensorKind::DistanceRing);
        room.objects = vec![circle([9.0, 6.0], 0.5)];
        assert_eq!(room.sense(&[0.0, 0.0, 0.0]).unwrap(), None);
        assert!(room.sense(&[PI, 0.0, 0.0]).unwrap().is_some());
    }

    #[test]
    fn tip_outside_walls_is_discarded() {
        let mut room = ArmRoom::empty(SensorKind::DistanceRing);
        room.translation = [4.0, 0.0];
        // base at x = 2, arm pointing -x reaches x = -1
        assert_eq!(room.sense(&[PI, 0.0, 0.0]).unwrap(), None);
    }

    #[test]
    fn sensory_dimensions() {
        let ring = ArmRoom::empty(SensorKind::DistanceRing);
        let rgb = ArmRoom::empty(SensorKind::RgbPanorama);
        let m = [0.3, -0.2, 1.0];
        assert_eq!(ring.sense(&m).unwrap().unwrap().len(), 10);
        assert_eq!(rgb.sense(&m).unwrap().unwrap().len(), 48);
    }

    #[test]
    fn square_and_triangle_containment() {
        let sq = SceneObject { kind: ShapeKind::Square, center: [5.0, 5.0], size: 1.0, color: [0.0; 3], orientation: 0.0 };
        assert!(sq.contains([5.9, 5.9]));
        assert!(!sq.contains([6.1, 5.0]));
        let tri = SceneObject { kind: ShapeKind::Triangle, center: [0.0, 0.0], size: 1.0, color: [0.0; 3], orientation: 0.0 };
        assert!(tri.contains([0.0, 0.0]));
        assert!(tri.contains([0.9, 0.0]));
        assert!(!tri.contains([-0.6, 0.0]));
    }

    #[test]
    fn random_rooms_respect_layout_rules() {
        let mut rng = Rng::new(8);
        for _ in 0..200 {
            let room = ArmRoom::random(SensorKind::DistanceRing, &mut rng).unwrap();
            assert!((3..=8).contains(&room.objects.len()));
            for o in &room.objects {
                assert!(o.size >= 0.3 && o.size <= 1.5);
                let r = o.bounding_radius();
                assert!(o.center.iter().all(|&c| c - r >= 0.0 && c + r <= ROOM_WIDTH));
                for v in o.vertices() {
                    assert!(v.iter().all(|&c| (0.0..=ROOM_WIDTH).contains(&c)));
                }
                let d = ((o.center[0] - 6.0).powi(2) + (o.center[1] - 6.0).powi(2)).sqrt();
                assert!(d - r > BASE_CLEARANCE);
            }
        }
        let a = ArmRoom::random(SensorKind::RgbPanorama, &mut Rng::new(3)).unwrap();
        let b = ArmRoom::random(SensorKind::RgbPanorama, &mut Rng::new(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn translations_keep_base_inside() {
        let mut rng = Rng::new(10);
        let room = ArmRoom::random(SensorKind::DistanceRing, &mut rng).unwrap();
        for _ in 0..1000 {
            let t = room.translated(&mut rng).unwrap();
            let b = t.effective_base();
            assert!(b.iter().all(|c| (BASE_WALL_MARGIN..=ROOM_WIDTH - BASE_WALL_MARGIN).contains(c)));
            assert!(t.translation.iter().all(|c| c.abs() <= ROOM_WIDTH));
        }
    }
}
