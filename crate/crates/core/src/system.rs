//! The monomial system over 2D₃: one equation `Π z_e^δ = 1` per interior face.
//!
//! `z_e` is the unknown `y_e` on an interior non-tree edge, the conjugated
//! constant `x_i⁻¹·c·x_i` on a non-tree edge of boundary component `i`
//! (with `x_0 = 1`), and the identity on tree edges, which are dropped.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::complex::CwComplex;
use crate::error::{ParseError, SystemError};
use crate::octa::GroupElement;
use crate::trees::SpanningTree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Term {
    /// Unknown `y_e` for an interior non-tree edge.
    Y { edge: usize },
    /// `x_i⁻¹·c·x_i` for a non-tree edge of boundary component `i`.
    Conj { component: usize, class: GroupElement },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Literal {
    pub term: Term,
    /// +1 or −1.
    pub exponent: i8,
}

impl Literal {
    pub fn y(edge: usize, exponent: i8) -> Self {
        Self { term: Term::Y { edge }, exponent }
    }

    pub fn conj(component: usize, class: GroupElement, exponent: i8) -> Self {
        Self { term: Term::Conj { component, class }, exponent }
    }

    /// Value under the given `y` and `x`; `None` if a needed variable is missing.
    pub fn eval(&self, a: &Assignment) -> Option<GroupElement> {
        let v = match self.term {
            Term::Y { edge } => *a.y.get(&edge)?,
            Term::Conj { component, class } => class.conjugate_by(*a.x.get(component)?),
        };
        Some(if self.exponent < 0 { v.inverse() } else { v })
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inv = self.exponent < 0;
        match self.term {
            Term::Y { edge } => write!(f, "{}{edge}", if inv { 'Y' } else { 'y' }),
            Term::Conj { component, class } => {
                write!(f, "[{component}]{}{}", if inv { 'C' } else { 'c' }, class.id())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonomialEquation {
    pub face: usize,
    pub literals: Vec<Literal>,
}

impl MonomialEquation {
    /// Product of the literals in order.
    pub fn eval(&self, a: &Assignment) -> Option<GroupElement> {
        self.literals.iter().try_fold(GroupElement::IDENTITY, |acc, l| Some(acc * l.eval(a)?))
    }

    /// Same cycle started `k` literals later; the product is conjugated.
    pub fn rotated(&self, k: usize) -> Self {
        let mut literals = self.literals.clone();
        if !literals.is_empty() {
            let n = literals.len();
            literals.rotate_left(k % n);
        }
        Self { face: self.face, literals }
    }
}

/// Values for the unknowns. `x[0]` is always the identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Assignment {
    pub x: Vec<GroupElement>,
    pub y: BTreeMap<usize, GroupElement>,
}

impl Assignment {
    pub fn identity(sys: &MonomialSystem) -> Self {
        Self {
            x: vec![GroupElement::IDENTITY; sys.components],
            y: sys.y_edges.iter().map(|&e| (e, GroupElement::IDENTITY)).collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, g) in self.x.iter().enumerate().skip(1) {
            let _ = writeln!(s, "x{i}={}", g.id());
        }
        for (e, g) in &self.y {
            let _ = writeln!(s, "y{e}={}", g.id());
        }
        s
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SystemStats {
    pub equations: usize,
    pub literals: usize,
    /// `x_i` (i ≥ 1) occurring in some equation.
    pub x_unknowns: usize,
    /// `y_e` occurring in some equation.
    pub y_unknowns: usize,
    /// `y_e` that occur nowhere; they are set to the identity.
    pub y_free: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonomialSystem {
    /// Number of boundary components, so `x_0 … x_{components-1}`.
    pub components: usize,
    pub equations: Vec<MonomialEquation>,
    /// Every `y` variable, occurring or not, sorted.
    pub y_edges: Vec<usize>,
}

/// A variable of the system in solver order: all `x` before all `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X(usize),
    Y(usize),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{i}"),
            Var::Y(e) => write!(f, "y{e}"),
        }
    }
}

impl MonomialSystem {
    /// A system whose `y` variables are exactly those in the equations.
    pub fn new(components: usize, equations: Vec<MonomialEquation>) -> Self {
        let y_edges: BTreeSet<usize> = equations
            .iter()
            .flat_map(|eq| eq.literals.iter())
            .filter_map(|l| match l.term {
                Term::Y { edge } => Some(edge),
                Term::Conj { .. } => None,
            })
            .collect();
        let components = equations
            .iter()
            .flat_map(|eq| eq.literals.iter())
            .filter_map(|l| match l.term {
                Term::Conj { component, .. } => Some(component + 1),
                Term::Y { .. } => None,
            })
            .max()
            .unwrap_or(1)
            .max(components);
        Self { components, equations, y_edges: y_edges.into_iter().collect() }
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    /// Unknowns that occur in some equation, in solver order.
    pub fn unknowns(&self) -> Vec<Var> {
        let mut vars = BTreeSet::new();
        for l in self.equations.iter().flat_map(|eq| eq.literals.iter()) {
            match l.term {
                Term::Y { edge } => {
                    vars.insert(Var::Y(edge));
                }
                Term::Conj { component, .. } if component > 0 => {
                    vars.insert(Var::X(component));
                }
                Term::Conj { .. } => {}
            }
        }
        vars.into_iter().collect()
    }

    pub fn stats(&self) -> SystemStats {
        let unknowns = self.unknowns();
        let y_unknowns = unknowns.iter().filter(|v| matches!(v, Var::Y(_))).count();
        SystemStats {
            equations: self.equations.len(),
            literals: self.equations.iter().map(|eq| eq.literals.len()).sum(),
            x_unknowns: unknowns.len() - y_unknowns,
            y_unknowns,
            y_free: self.y_edges.len() - y_unknowns,
        }
    }

    /// Faces whose equation does not evaluate to the identity under `a`
    /// (missing variables count as violations), with the evaluated product.
    pub fn violations(&self, a: &Assignment) -> Vec<(usize, Option<GroupElement>)> {
        self.equations
            .iter()
            .filter_map(|eq| match eq.eval(a) {
                Some(g) if g == GroupElement::IDENTITY => None,
                v => Some((eq.face, v)),
            })
            .collect()
    }

    pub fn is_satisfied_by(&self, a: &Assignment) -> bool {
        a.x.first().is_none_or(|&x0| x0 == GroupElement::IDENTITY) && self.violations(a).is_empty()
    }

    /// Every constant `c` replaced by `g⁻¹·c·g`.
    pub fn conjugated(&self, g: GroupElement) -> Self {
        let mut out = self.clone();
        for l in out.equations.iter_mut().flat_map(|eq| eq.literals.iter_mut()) {
            if let Term::Conj { class, .. } = &mut l.term {
                *class = class.conjugate_by(g);
            }
        }
        out
    }

    /// One line per equation: `F: lit lit ...`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for eq in &self.equations {
            let _ = write!(s, "{}:", eq.face);
            for l in &eq.literals {
                let _ = write!(s, " {l}");
            }
            s.push('\n');
        }
        s
    }

    /// Reads the format of [`MonomialSystem::to_text`]; blank and `#` lines are skipped.
    pub fn parse(text: &str) -> Result<Self, SystemError> {
        let mut equations = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: String| ParseError::new("system", n + 1, m);
            let (face, rest) = line.split_once(':').ok_or_else(|| err("expected `F: literals`".into()))?;
            let face = face.trim().parse().map_err(|_| err(format!("bad face id `{face}`")))?;
            let literals = rest
                .split_whitespace()
                .map(|t| parse_literal(t).ok_or_else(|| err(format!("bad literal `{t}`"))))
                .collect::<Result<_, _>>()?;
            equations.push(MonomialEquation { face, literals });
        }
        Ok(Self::new(1, equations))
    }
}

fn parse_literal(t: &str) -> Option<Literal> {
    if let Some(rest) = t.strip_prefix('[') {
        let (i, rest) = rest.split_once(']')?;
        let exponent = match rest.chars().next()? {
            'c' => 1,
            'C' => -1,
            _ => return None,
        };
        let class = GroupElement::from_id(rest[1..].parse().ok()?)?;
        return Some(Literal::conj(i.parse().ok()?, class, exponent));
    }
    let exponent = match t.chars().next()? {
        'y' => 1,
        'Y' => -1,
        _ => return None,
    };
    Some(Literal::y(t[1..].parse().ok()?, exponent))
}

/// One equation per interior face, literals in face-cycle order with the
/// cycle signs as exponents; tree edges are dropped.
pub fn build_system(
    cw: &CwComplex,
    tree: &SpanningTree,
    zeta: &BTreeMap<usize, GroupElement>,
) -> Result<MonomialSystem, SystemError> {
    let mut equations = Vec::new();
    for f in cw.interior_faces() {
        let mut literals = Vec::new();
        for step in &cw.faces()[f].cycle {
            let e = step.edge;
            if tree.contains(e) {
                continue;
            }
            let exponent = step.sign() as i8;
            if cw.edges()[e].on_boundary {
                let component = tree.edge_component(e).ok_or(SystemError::MissingZeta(e))?;
                let class = *zeta.get(&e).ok_or(SystemError::MissingZeta(e))?;
                literals.push(Literal::conj(component, class, exponent));
            } else {
                literals.push(Literal::y(e, exponent));
            }
        }
        equations.push(MonomialEquation { face: f, literals });
    }
    Ok(MonomialSystem {
        components: cw.boundary_components().len().max(1),
        equations,
        y_edges: tree.interior_non_tree_edges(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::carve;
    use crate::fixtures;
    use crate::merge::merge_cells;
    use crate::mesh::SingularityGraph;
    use crate::octa::group;

    fn identity_zeta(tree: &SpanningTree) -> BTreeMap<usize, GroupElement> {
        tree.boundary_non_tree_edges().into_iter().map(|e| (e, GroupElement::IDENTITY)).collect()
    }

    #[test]
    fn merged_ball_has_no_equations() {
        let cw = carve(&fixtures::ball(3), &SingularityGraph::empty()).unwrap();
        let (cw, _) = merge_cells(&cw);
        let tree = SpanningTree::build(&cw).unwrap();
        let sys = build_system(&cw, &tree, &identity_zeta(&tree)).unwrap();
        assert!(sys.is_empty());
    }

    #[test]
    fn merged_torus_has_two_equations() {
        let cw = carve(&fixtures::torus(), &SingularityGraph::empty()).unwrap();
        let (cw, _) = merge_cells(&cw);
        let tree = SpanningTree::build(&cw).unwrap();
        let sys = build_system(&cw, &tree, &identity_zeta(&tree)).unwrap();
        assert_eq!(sys.equations.len(), 2);
        assert!(sys.is_satisfied_by(&Assignment::identity(&sys)));
    }

    #[test]
    fn minimal_torus_equations_follow_face_cycles() {
        let cw = fixtures::minimal_solid_torus();
        let tree = SpanningTree::build(&cw).unwrap();
        let zeta = identity_zeta(&tree);
        let sys = build_system(&cw, &tree, &zeta).unwrap();
        assert_eq!(sys.equations.iter().map(|e| e.face).collect::<Vec<_>>(), cw.interior_faces());
        for eq in &sys.equations {
            let expected: Vec<i8> = cw.faces()[eq.face]
                .cycle
                .iter()
                .filter(|s| !tree.contains(s.edge))
                .map(|s| s.sign() as i8)
                .collect();
            assert_eq!(eq.literals.iter().map(|l| l.exponent).collect::<Vec<_>>(), expected);
        }
        let mut missing = zeta.clone();
        let first = *missing.keys().next().unwrap();
        missing.remove(&first);
        assert!(matches!(build_system(&cw, &tree, &missing), Err(SystemError::MissingZeta(e)) if e == first));
    }

    #[test]
    fn interior_face_on_one_interior_edge_has_one_y() {
        // A ball cut by two bigons sharing the interior edge 2.
        let cw = CwComplex::from_lists(
            2,
            &[[0, 1], [0, 1], [0, 1]],
            &[&[0, 1], &[0, 1], &[0, 2], &[2, 1]],
            &[&[0, 2, 3], &[1, 2, 3]],
        )
        .unwrap();
        let tree = SpanningTree::build(&cw).unwrap();
        assert!(tree.contains(0));
        let sys = build_system(&cw, &tree, &identity_zeta(&tree)).unwrap();
        assert_eq!(sys.equations.len(), 2);
        assert_eq!(sys.equations[0].literals.len(), 1);
        assert_eq!(sys.equations[0].literals[0].term, Term::Y { edge: 2 });
        assert_eq!(sys.y_edges, vec![2]);
    }

    #[test]
    fn dump_round_trip() {
        let g = group();
        let sys = MonomialSystem::new(
            3,
            vec![
                MonomialEquation {
                    face: 4,
                    literals: vec![Literal::y(7, 1), Literal::conj(2, g.s(), -1), Literal::y(9, -1)],
                },
                MonomialEquation { face: 5, literals: vec![Literal::conj(0, g.t(), 1)] },
            ],
        );
        let text = sys.to_text();
        assert_eq!(text.lines().next().unwrap(), format!("4: y7 [2]C{} Y9", g.s().id()));
        let back = MonomialSystem::parse(&text).unwrap();
        assert_eq!(back, sys);
        assert!(MonomialSystem::parse("1: q3").is_err());
        assert!(MonomialSystem::parse("x: y3").is_err());
    }

    #[test]
    fn conjugation_maps_witnesses() {
        let g = group();
        let sys = MonomialSystem::new(
            2,
            vec![MonomialEquation {
                face: 0,
                literals: vec![Literal::conj(0, g.r(), 1), Literal::y(3, 1), Literal::conj(1, g.s(), 1)],
            }],
        );
        let mut a = Assignment::identity(&sys);
        a.x[1] = g.t();
        // r·y·(t⁻¹st) = 1 ⇒ y = r⁻¹·(t⁻¹st)⁻¹.
        a.y.insert(3, g.r().inverse() * g.s().conjugate_by(g.t()).inverse());
        assert!(sys.is_satisfied_by(&a));
        let h = g.s() * g.t();
        let conj = sys.conjugated(h);
        let mapped = Assignment {
            x: a.x.iter().map(|x| x.conjugate_by(h)).collect(),
            y: a.y.iter().map(|(e, y)| (*e, y.conjugate_by(h))).collect(),
        };
        assert!(conj.is_satisfied_by(&mapped));
    }
}
