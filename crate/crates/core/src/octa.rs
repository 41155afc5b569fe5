//! Exact arithmetic for the binary octahedral group 2D₃.
//!
//! Every coordinate of the 48 unit quaternions in the group lies in
//! `{0, ±1, ±1/2, ±1/√2}`, so each is stored exactly as `(p + q√2)/4` with
//! integer `p`, `q`. Products are formed over a common denominator of 16 and
//! reduced back; a product that does not reduce indicates it left the group.
//!
//! The group is built once, as the closure of the generators
//! `r = (i + j)/√2`, `s = (1 + i + j + k)/2`, `t = (1 + i)/√2`, and shared
//! through [`group`].

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::ops::{Mul, Neg};
use std::sync::OnceLock;

use nalgebra::{Quaternion, UnitQuaternion};
use serde::{Deserialize, Serialize};

use crate::error::GroupError;

/// Number of elements of 2D₃.
pub const ORDER: usize = 48;
/// Number of rotations in D₃.
pub const ROTATION_ORDER: usize = 24;

/// An exact scalar `(p + q·√2) / 4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ExactScalar {
    pub p: i64,
    pub q: i64,
}

impl ExactScalar {
    pub const ZERO: Self = Self { p: 0, q: 0 };
    pub const ONE: Self = Self { p: 4, q: 0 };
    pub const HALF: Self = Self { p: 2, q: 0 };
    /// `1/√2 = 2√2/4`
    pub const INV_SQRT2: Self = Self { p: 0, q: 2 };

    pub const fn new(p: i64, q: i64) -> Self {
        Self { p, q }
    }

    pub fn to_f64(self) -> f64 {
        (self.p as f64 + self.q as f64 * std::f64::consts::SQRT_2) / 4.0
    }

    fn widening_mul(self, other: Self) -> Wide {
        Wide {
            p: self.p * other.p + 2 * self.q * other.q,
            q: self.p * other.q + self.q * other.p,
        }
    }
}

impl Neg for ExactScalar {
    type Output = Self;
    fn neg(self) -> Self {
        Self { p: -self.p, q: -self.q }
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.p, self.q) {
            (p, 0) => write!(f, "{}/4", p),
            (0, q) => write!(f, "{}√2/4", q),
            (p, q) => write!(f, "({}{:+}√2)/4", p, q),
        }
    }
}

/// `(p + q·√2) / 16`, the value of a product of two [`ExactScalar`]s.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Wide {
    p: i64,
    q: i64,
}

impl Wide {
    fn add(self, o: Self) -> Self {
        Wide { p: self.p + o.p, q: self.q + o.q }
    }

    fn sub(self, o: Self) -> Self {
        Wide { p: self.p - o.p, q: self.q - o.q }
    }

    fn reduce(self) -> Option<ExactScalar> {
        (self.p % 4 == 0 && self.q % 4 == 0).then(|| ExactScalar::new(self.p / 4, self.q / 4))
    }

    /// Exact integer value of `2·self`, if it is one.
    fn doubled_integer(self) -> Option<i64> {
        (self.q == 0 && self.p % 8 == 0).then_some(self.p / 8)
    }
}

/// A quaternion `w + x·i + y·j + z·k` with exact coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExactQuat {
    pub w: ExactScalar,
    pub x: ExactScalar,
    pub y: ExactScalar,
    pub z: ExactScalar,
}

impl ExactQuat {
    pub const IDENTITY: Self = Self {
        w: ExactScalar::ONE,
        x: ExactScalar::ZERO,
        y: ExactScalar::ZERO,
        z: ExactScalar::ZERO,
    };

    pub const fn new(w: ExactScalar, x: ExactScalar, y: ExactScalar, z: ExactScalar) -> Self {
        Self { w, x, y, z }
    }

    pub fn coords(&self) -> [ExactScalar; 4] {
        [self.w, self.x, self.y, self.z]
    }

    /// Product, or `None` when a coordinate leaves the `(p + q√2)/4` ring.
    pub fn checked_mul(&self, o: &Self) -> Option<Self> {
        let (a, b) = (self, o);
        let m = |u: ExactScalar, v: ExactScalar| u.widening_mul(v);
        let w = m(a.w, b.w).sub(m(a.x, b.x)).sub(m(a.y, b.y)).sub(m(a.z, b.z));
        let x = m(a.w, b.x).add(m(a.x, b.w)).add(m(a.y, b.z)).sub(m(a.z, b.y));
        let y = m(a.w, b.y).sub(m(a.x, b.z)).add(m(a.y, b.w)).add(m(a.z, b.x));
        let z = m(a.w, b.z).add(m(a.x, b.y)).sub(m(a.y, b.x)).add(m(a.z, b.w));
        Some(Self::new(w.reduce()?, x.reduce()?, y.reduce()?, z.reduce()?))
    }

    pub fn conjugate(&self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    /// True when the squared norm is exactly one.
    pub fn is_unit(&self) -> bool {
        let n = self
            .coords()
            .iter()
            .fold(Wide::default(), |acc, c| acc.add(c.widening_mul(*c)));
        n == Wide { p: 16, q: 0 }
    }

    pub fn to_unit_quaternion(&self) -> UnitQuaternion<f64> {
        UnitQuaternion::new_unchecked(Quaternion::new(
            self.w.to_f64(),
            self.x.to_f64(),
            self.y.to_f64(),
            self.z.to_f64(),
        ))
    }

    /// Rotation matrix of the quaternion, exactly, if all entries are integers.
    pub fn rotation_matrix(&self) -> Option<[[i8; 3]; 3]> {
        let m = |u: ExactScalar, v: ExactScalar| u.widening_mul(v);
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        let entry = |v: Wide| v.doubled_integer();
        let diag = |a: Wide, b: Wide| entry(a.add(b)).map(|v| 1 - v);
        let r = [
            [
                diag(m(y, y), m(z, z))?,
                entry(m(x, y).sub(m(w, z)))?,
                entry(m(x, z).add(m(w, y)))?,
            ],
            [
                entry(m(x, y).add(m(w, z)))?,
                diag(m(x, x), m(z, z))?,
                entry(m(y, z).sub(m(w, x)))?,
            ],
            [
                entry(m(x, z).sub(m(w, y)))?,
                entry(m(y, z).add(m(w, x)))?,
                diag(m(x, x), m(y, y))?,
            ],
        ];
        let mut out = [[0i8; 3]; 3];
        for (i, row) in r.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                out[i][j] = i8::try_from(*v).ok()?;
            }
        }
        Some(out)
    }
}

impl Neg for ExactQuat {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl fmt::Display for ExactQuat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.w, self.x, self.y, self.z)
    }
}

/// One of the 48 elements of 2D₃, by canonical id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(u8);

impl GroupElement {
    pub const IDENTITY: Self = GroupElement(0);

    pub fn from_id(id: usize) -> Option<Self> {
        (id < ORDER).then_some(GroupElement(id as u8))
    }

    pub fn id(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = GroupElement> {
        (0..ORDER as u8).map(GroupElement)
    }

    pub fn quat(self) -> ExactQuat {
        group().elements[self.id()]
    }

    pub fn to_unit_quaternion(self) -> UnitQuaternion<f64> {
        group().floats[self.id()]
    }

    pub fn inverse(self) -> Self {
        GroupElement(group().inv[self.id()])
    }

    pub fn pow(self, exp: i32) -> Self {
        let base = if exp < 0 { self.inverse() } else { self };
        (0..exp.unsigned_abs()).fold(Self::IDENTITY, |acc, _| acc * base)
    }

    /// `x⁻¹ · self · x`
    pub fn conjugate_by(self, x: Self) -> Self {
        x.inverse() * self * x
    }

    pub fn order(self) -> usize {
        let mut g = self;
        let mut n = 1;
        while g != Self::IDENTITY {
            g = g * self;
            n += 1;
        }
        n
    }

    pub fn project_to_rotation(self) -> RotationElement {
        let g = group();
        let id = g.rotation_of[self.id()];
        RotationElement { id, matrix: g.rotations[id as usize] }
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;
    fn mul(self, rhs: Self) -> Self {
        GroupElement(group().mul[self.id()][rhs.id()])
    }
}

impl Neg for GroupElement {
    type Output = GroupElement;
    fn neg(self) -> Self {
        GroupElement(group().neg[self.id()])
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

/// A rotational symmetry of the cube: a signed permutation matrix of determinant one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RotationElement {
    pub id: u8,
    pub matrix: [[i8; 3]; 3],
}

impl RotationElement {
    pub fn determinant(&self) -> i32 {
        let m = self.matrix.map(|r| r.map(i32::from));
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

/// Precomputed tables for 2D₃. Immutable once built.
#[derive(Debug)]
pub struct OctaGroup {
    elements: Vec<ExactQuat>,
    floats: Vec<UnitQuaternion<f64>>,
    mul: Vec<[u8; ORDER]>,
    inv: [u8; ORDER],
    neg: [u8; ORDER],
    rotation_of: [u8; ORDER],
    rotations: Vec<[[i8; 3]; 3]>,
    min_distance: f64,
}

/// Generator `r = (i + j)/√2`.
pub const R: ExactQuat = ExactQuat::new(
    ExactScalar::ZERO,
    ExactScalar::INV_SQRT2,
    ExactScalar::INV_SQRT2,
    ExactScalar::ZERO,
);
/// Generator `s = (1 + i + j + k)/2`.
pub const S: ExactQuat =
    ExactQuat::new(ExactScalar::HALF, ExactScalar::HALF, ExactScalar::HALF, ExactScalar::HALF);
/// Generator `t = (1 + i)/√2`.
pub const T: ExactQuat = ExactQuat::new(
    ExactScalar::INV_SQRT2,
    ExactScalar::INV_SQRT2,
    ExactScalar::ZERO,
    ExactScalar::ZERO,
);

impl OctaGroup {
    /// Closure of `{r, s, t}` under multiplication, in canonical order.
    #[allow(clippy::result_large_err)]
    pub fn build() -> Result<Self, GroupError> {
        let gens = [R, S, T];
        let mut seen: BTreeSet<ExactQuat> = BTreeSet::new();
        let mut queue = VecDeque::from([ExactQuat::IDENTITY]);
        seen.insert(ExactQuat::IDENTITY);
        while let Some(q) = queue.pop_front() {
            for g in &gens {
                let p = q.checked_mul(g).ok_or(GroupError::LeftRing(q, *g))?;
                if seen.insert(p) {
                    if seen.len() > ORDER {
                        return Err(GroupError::ClosureSize(seen.len()));
                    }
                    queue.push_back(p);
                }
            }
        }
        if seen.len() != ORDER {
            return Err(GroupError::ClosureSize(seen.len()));
        }
        let mut elements: Vec<ExactQuat> = seen.into_iter().collect();
        elements.retain(|q| *q != ExactQuat::IDENTITY);
        elements.insert(0, ExactQuat::IDENTITY);
        if let Some(q) = elements.iter().find(|q| !q.is_unit()) {
            return Err(GroupError::NotUnit(*q));
        }

        let index_of = |q: &ExactQuat| elements.iter().position(|e| e == q);
        let mut mul = vec![[0u8; ORDER]; ORDER];
        for (a, qa) in elements.iter().enumerate() {
            for (b, qb) in elements.iter().enumerate() {
                let p = qa.checked_mul(qb).ok_or(GroupError::LeftRing(*qa, *qb))?;
                mul[a][b] = index_of(&p).ok_or(GroupError::NotClosed(*qa, *qb))? as u8;
            }
        }
        let mut inv = [0u8; ORDER];
        let mut neg = [0u8; ORDER];
        for (a, qa) in elements.iter().enumerate() {
            inv[a] = (0..ORDER)
                .find(|&b| mul[a][b] == 0)
                .ok_or(GroupError::NoInverse(*qa))? as u8;
            neg[a] = index_of(&-*qa).ok_or(GroupError::NotClosed(*qa, -ExactQuat::IDENTITY))? as u8;
        }

        let mut rotations: Vec<[[i8; 3]; 3]> = Vec::with_capacity(ROTATION_ORDER);
        let mut rotation_of = [0u8; ORDER];
        for (a, qa) in elements.iter().enumerate() {
            let m = qa.rotation_matrix().ok_or(GroupError::NotSignedPermutation(*qa))?;
            let id = match rotations.iter().position(|r| *r == m) {
                Some(id) => id,
                None => {
                    rotations.push(m);
                    rotations.len() - 1
                }
            };
            rotation_of[a] = id as u8;
        }
        if rotations.len() != ROTATION_ORDER {
            return Err(GroupError::RotationCount(rotations.len()));
        }

        let floats: Vec<UnitQuaternion<f64>> =
            elements.iter().map(ExactQuat::to_unit_quaternion).collect();
        let mut min_distance = f64::INFINITY;
        for a in 0..ORDER {
            for b in (a + 1)..ORDER {
                let d = (floats[a].coords - floats[b].coords).norm();
                min_distance = min_distance.min(d);
            }
        }

        Ok(Self { elements, floats, mul, inv, neg, rotation_of, rotations, min_distance })
    }

    pub fn elements(&self) -> &[ExactQuat] {
        &self.elements
    }

    pub fn element_of(&self, q: &ExactQuat) -> Option<GroupElement> {
        self.elements.iter().position(|e| e == q).map(|i| GroupElement(i as u8))
    }

    pub fn neg_one(&self) -> GroupElement {
        GroupElement(self.neg[0])
    }

    pub fn r(&self) -> GroupElement {
        self.element_of(&R).expect("r is a member")
    }

    pub fn s(&self) -> GroupElement {
        self.element_of(&S).expect("s is a member")
    }

    pub fn t(&self) -> GroupElement {
        self.element_of(&T).expect("t is a member")
    }

    pub fn rotations(&self) -> &[[[i8; 3]; 3]] {
        &self.rotations
    }

    /// Minimal chordal distance `‖g − h‖` between distinct elements.
    pub fn min_distance(&self) -> f64 {
        self.min_distance
    }

    /// Default snapping tolerance, a quarter of [`Self::min_distance`].
    pub fn default_epsilon(&self) -> f64 {
        self.min_distance / 4.0
    }

    /// The element closest in chordal distance to `q`; ties go to the lowest id.
    pub fn nearest_element(&self, q: &UnitQuaternion<f64>) -> (GroupElement, f64) {
        let mut best = (GroupElement::IDENTITY, f64::INFINITY);
        for (i, g) in self.floats.iter().enumerate() {
            let d = (g.coords - q.coords).norm();
            if d < best.1 {
                best = (GroupElement(i as u8), d);
            }
        }
        best
    }

    /// Closest and second-closest chordal distances, used for ambiguity checks.
    pub fn nearest_two(&self, q: &UnitQuaternion<f64>) -> (GroupElement, f64, f64) {
        let mut best = (GroupElement::IDENTITY, f64::INFINITY);
        let mut second = f64::INFINITY;
        for (i, g) in self.floats.iter().enumerate() {
            let d = (g.coords - q.coords).norm();
            if d < best.1 {
                second = best.1;
                best = (GroupElement(i as u8), d);
            } else if d < second {
                second = d;
            }
        }
        (best.0, best.1, second)
    }

    pub fn structure_report(&self) -> StructureReport {
        let all: Vec<GroupElement> = GroupElement::all().collect();
        let commutators: Vec<GroupElement> = all
            .iter()
            .flat_map(|&a| all.iter().map(move |&b| a.inverse() * b.inverse() * a * b))
            .collect();
        let commutator_subgroup = generated_subgroup(&commutators);
        let center: Vec<GroupElement> = all
            .iter()
            .copied()
            .filter(|&z| all.iter().all(|&g| z * g == g * z))
            .collect();

        let mut classes: Vec<Vec<GroupElement>> = Vec::new();
        let mut assigned = [false; ORDER];
        for &g in &all {
            if assigned[g.id()] {
                continue;
            }
            let class: BTreeSet<GroupElement> = all.iter().map(|&x| g.conjugate_by(x)).collect();
            for c in &class {
                assigned[c.id()] = true;
            }
            classes.push(class.into_iter().collect());
        }

        let involutions: Vec<GroupElement> = all.iter().copied().filter(|g| g.order() == 2).collect();
        // Any subgroup of order 24 contains an involution (Cauchy); with −1 the
        // only involution, no complement to {±1} exists.
        let non_split = involutions == [self.neg_one()];

        StructureReport {
            order: ORDER,
            commutator_subgroup_order: commutator_subgroup.len(),
            abelianization_order: ORDER / commutator_subgroup.len(),
            center,
            conjugacy_classes: classes,
            non_split,
        }
    }
}

fn generated_subgroup(gens: &[GroupElement]) -> BTreeSet<GroupElement> {
    let mut set = BTreeSet::from([GroupElement::IDENTITY]);
    let mut queue = VecDeque::from([GroupElement::IDENTITY]);
    let gens: BTreeSet<GroupElement> = gens.iter().copied().collect();
    while let Some(h) = queue.pop_front() {
        for &g in &gens {
            let p = h * g;
            if set.insert(p) {
                queue.push_back(p);
            }
        }
    }
    set
}

/// Exhaustively computed facts about the group.
#[derive(Clone, Debug)]
pub struct StructureReport {
    pub order: usize,
    pub commutator_subgroup_order: usize,
    pub abelianization_order: usize,
    pub center: Vec<GroupElement>,
    pub conjugacy_classes: Vec<Vec<GroupElement>>,
    pub non_split: bool,
}

impl StructureReport {
    pub fn class_of(&self, g: GroupElement) -> usize {
        self.conjugacy_classes
            .iter()
            .position(|c| c.contains(&g))
            .expect("every element lies in a class")
    }
}

static GROUP: OnceLock<OctaGroup> = OnceLock::new();

/// The shared group tables.
pub fn group() -> &'static OctaGroup {
    GROUP.get_or_init(|| OctaGroup::build().expect("2D3 closure is an exact computation"))
}

/// All 48 elements in canonical order.
pub fn enumerate() -> Vec<GroupElement> {
    GroupElement::all().collect()
}

pub fn nearest_element(q: &UnitQuaternion<f64>) -> (GroupElement, f64) {
    group().nearest_element(q)
}
