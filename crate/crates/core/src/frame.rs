//! Frames as cosets of unit quaternions, and geodesics on S³.
//!
//! A unit quaternion `q` denotes the frame whose axes are the columns of its
//! rotation matrix. Right-multiplying by any element of 2D₃ permutes and
//! flips those columns, so `q` and `q·g` denote the same frame: a frame is the
//! coset `q·2D₃`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Quaternion, UnitQuaternion, Vector3, Vector4};

use crate::error::{HolonomyError, ParseError};
use crate::octa::{group, GroupElement};
use crate::text::{parse_fixed, LineReader};

/// Tolerance on `|q|` for quaternions accepted as frames.
pub const UNIT_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    q: UnitQuaternion<f64>,
}

impl Frame {
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self, HolonomyError> {
        let raw = Quaternion::new(w, x, y, z);
        let n = raw.norm();
        if (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(HolonomyError::NotUnit(n));
        }
        Ok(Self { q: UnitQuaternion::from_quaternion(raw) })
    }

    pub fn from_unit(q: UnitQuaternion<f64>) -> Self {
        Self { q }
    }

    pub fn identity() -> Self {
        Self { q: UnitQuaternion::identity() }
    }

    /// The stored coset representative.
    pub fn representative(&self) -> UnitQuaternion<f64> {
        self.q
    }

    /// The three (unordered, unsigned) axes.
    pub fn axes(&self) -> [Vector3<f64>; 3] {
        let m = self.q.to_rotation_matrix();
        [m.matrix().column(0).into(), m.matrix().column(1).into(), m.matrix().column(2).into()]
    }

    /// The representative `q·g` closest to `target`, with its distance and the
    /// distance of the runner-up.
    pub fn nearest_representative(&self, target: &UnitQuaternion<f64>) -> Representative {
        let local = self.q.inverse() * target;
        let (g, distance, runner_up) = group().nearest_two(&local);
        Representative { quat: self.q * g.to_unit_quaternion(), element: g, distance, runner_up }
    }

    /// True when both denote the same frame up to `eps`.
    pub fn same_frame(&self, other: &Frame, eps: f64) -> bool {
        self.nearest_representative(&other.q).distance < eps
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Representative {
    pub quat: UnitQuaternion<f64>,
    pub element: GroupElement,
    pub distance: f64,
    pub runner_up: f64,
}

/// Ordered frame samples along a path.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct FramePath {
    pub samples: Vec<Frame>,
    /// Last sample denotes the same frame as the first.
    pub closed: bool,
}

impl FramePath {
    pub fn new(samples: Vec<Frame>) -> Self {
        Self { samples, closed: false }
    }

    pub fn closed(samples: Vec<Frame>) -> Self {
        Self { samples, closed: true }
    }

    pub fn from_quats(qs: impl IntoIterator<Item = UnitQuaternion<f64>>) -> Self {
        Self::new(qs.into_iter().map(Frame::from_unit).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn reversed(&self) -> Self {
        let mut samples = self.samples.clone();
        samples.reverse();
        Self { samples, closed: self.closed }
    }

    /// `self` followed by `other`; the shared joint sample is kept once.
    pub fn then(&self, other: &FramePath) -> Self {
        let mut samples = self.samples.clone();
        let skip = usize::from(!samples.is_empty() && !other.samples.is_empty());
        samples.extend(other.samples.iter().skip(skip).copied());
        Self { samples, closed: false }
    }
}

/// Chordal distance between unit quaternions as points of S³.
pub fn chord(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>) -> f64 {
    (a.coords - b.coords).norm()
}

/// Point at parameter `t` on the great-circle arc from `a` to `b` in S³.
/// No sign flipping: `a` and `−a` are different points here.
pub fn geodesic(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>, t: f64) -> UnitQuaternion<f64> {
    let (va, vb) = (a.coords, b.coords);
    let cos = va.dot(&vb).clamp(-1.0, 1.0);
    let theta = cos.acos();
    if theta < 1e-12 {
        return *a;
    }
    let s = theta.sin();
    let v: Vector4<f64> = va * (((1.0 - t) * theta).sin() / s) + vb * ((t * theta).sin() / s);
    UnitQuaternion::from_quaternion(Quaternion::from(v))
}

/// Samples of the arc `a → b`, both ends included, with chord steps at most
/// `max_step`. Subdivision doubles from one segment up to `2^10`.
pub fn sample_geodesic(
    a: &UnitQuaternion<f64>,
    b: &UnitQuaternion<f64>,
    max_step: f64,
) -> Vec<UnitQuaternion<f64>> {
    let total = chord(a, b);
    let mut n = 1usize;
    while n < 1 << 10 {
        let step = chord(a, &geodesic(a, b, 1.0 / n as f64));
        if step <= max_step || total == 0.0 {
            break;
        }
        n *= 2;
    }
    let mut out: Vec<UnitQuaternion<f64>> =
        (0..n).map(|k| geodesic(a, b, k as f64 / n as f64)).collect();
    out.push(*b);
    out
}

/// Boundary frames keyed by mesh vertex id.
pub type BoundaryFrames = BTreeMap<usize, Frame>;

/// Reads the `frames v1` format: one `vertex_id qw qx qy qz` line per vertex.
pub fn parse_frames(text: &str) -> Result<BoundaryFrames, ParseError> {
    let mut r = LineReader::new("frames", text);
    r.expect_header("frames v1")?;
    let mut out = BTreeMap::new();
    while let Some((n, line)) = r.next_line() {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 5 {
            return Err(r.error(n, "expected `vertex_id qw qx qy qz`"));
        }
        let id: usize = tokens[0].parse().map_err(|_| r.error(n, "bad vertex id"))?;
        let [w, x, y, z] = parse_fixed::<f64, 4>(&r, n, &tokens[1..].join(" "))?;
        let f = Frame::new(w, x, y, z).map_err(|e| r.error(n, e.to_string()))?;
        if out.insert(id, f).is_some() {
            return Err(r.error(n, format!("vertex {id} listed twice")));
        }
    }
    Ok(out)
}

pub fn load_frames(path: impl AsRef<Path>) -> Result<BoundaryFrames, ParseError> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| ParseError::new("frames", 0, e.to_string()))?;
    parse_frames(&text)
}

pub fn frames_to_text(frames: &BoundaryFrames) -> String {
    let mut s = String::from("frames v1\n");
    for (v, f) in frames {
        let q = f.representative();
        let _ = writeln!(s, "{} {} {} {} {}", v, q.w, q.i, q.j, q.k);
    }
    s
}

pub(crate) fn write_quat(s: &mut String, q: &UnitQuaternion<f64>) {
    let _ = writeln!(s, "{} {} {} {}", q.w, q.i, q.j, q.k);
}
