//! Unit propagation plus depth-first search over the 48 group elements.

use serde::Serialize;

use crate::error::SystemError;
use crate::octa::{GroupElement, ORDER};
use crate::system::{Assignment, MonomialSystem, Term, Var};

pub const DEFAULT_MAX_NODES: u64 = 100_000_000;
/// Largest number of unknowns `exhaustive_solve` accepts.
pub const EXHAUSTIVE_LIMIT: usize = 4;

/// An equation whose literals are all fixed and whose product is not the identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub face: usize,
    pub constant: GroupElement,
    /// True when the conflict follows from propagation alone, before any guess.
    /// Otherwise it is the first conflict met in search order.
    pub forced_at_root: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum SolveOutcome {
    Solvable { assignment: Assignment },
    Unsolvable { certificate: Certificate },
    CapExceeded { nodes: u64 },
}

impl SolveOutcome {
    pub fn verdict(&self) -> &'static str {
        match self {
            SolveOutcome::Solvable { .. } => "solvable",
            SolveOutcome::Unsolvable { .. } => "unsolvable",
            SolveOutcome::CapExceeded { .. } => "cap-exceeded",
        }
    }

    pub fn is_solvable(&self) -> bool {
        matches!(self, SolveOutcome::Solvable { .. })
    }

    pub fn assignment(&self) -> Option<&Assignment> {
        match self {
            SolveOutcome::Solvable { assignment } => Some(assignment),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SolveStats {
    /// Trial assignments made by the search.
    pub nodes: u64,
    /// Values fixed by propagation.
    pub propagated: u64,
}

#[derive(Clone, Copy)]
enum Slot {
    Fixed(GroupElement),
    /// Unknown `y`, inverted when the flag is set.
    Y(usize, bool),
    /// `x⁻¹·c·x` with the exponent already applied to `c`.
    X(usize, GroupElement),
}

struct Compiled {
    face: usize,
    slots: Vec<Slot>,
}

struct Search {
    vars: Vec<Var>,
    eqs: Vec<Compiled>,
    /// Equations mentioning each variable.
    watch: Vec<Vec<usize>>,
    value: Vec<Option<GroupElement>>,
    trail: Vec<usize>,
    stats: SolveStats,
    max_nodes: u64,
    first_conflict: Option<Certificate>,
}

enum Step {
    Ok,
    Conflict(usize, GroupElement),
}

impl Search {
    fn new(sys: &MonomialSystem, max_nodes: u64) -> Self {
        let vars = sys.unknowns();
        let index = |v: Var| vars.binary_search(&v).expect("unknown listed");
        let mut watch = vec![Vec::new(); vars.len()];
        let mut eqs = Vec::with_capacity(sys.equations.len());
        for (k, eq) in sys.equations.iter().enumerate() {
            let mut slots = Vec::with_capacity(eq.literals.len());
            for l in &eq.literals {
                let slot = match l.term {
                    Term::Y { edge } => {
                        let i = index(Var::Y(edge));
                        watch[i].push(k);
                        Slot::Y(i, l.exponent < 0)
                    }
                    Term::Conj { component: 0, class } => {
                        Slot::Fixed(if l.exponent < 0 { class.inverse() } else { class })
                    }
                    Term::Conj { component, class } => {
                        let i = index(Var::X(component));
                        watch[i].push(k);
                        Slot::X(i, if l.exponent < 0 { class.inverse() } else { class })
                    }
                };
                slots.push(slot);
            }
            eqs.push(Compiled { face: eq.face, slots });
        }
        for w in &mut watch {
            w.dedup();
        }
        let n = vars.len();
        Self {
            vars,
            eqs,
            watch,
            value: vec![None; n],
            trail: Vec::new(),
            stats: SolveStats::default(),
            max_nodes,
            first_conflict: None,
        }
    }

    fn slot_value(&self, s: Slot) -> Option<GroupElement> {
        match s {
            Slot::Fixed(g) => Some(g),
            Slot::Y(i, false) => self.value[i],
            Slot::Y(i, true) => self.value[i].map(GroupElement::inverse),
            Slot::X(i, c) => self.value[i].map(|x| c.conjugate_by(x)),
        }
    }

    fn assign(&mut self, i: usize, g: GroupElement) {
        self.value[i] = Some(g);
        self.trail.push(i);
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let i = self.trail.pop().expect("non-empty");
            self.value[i] = None;
        }
    }

    /// Checks or propagates one equation.
    fn visit(&mut self, k: usize, queue: &mut Vec<usize>) -> Step {
        let eq = &self.eqs[k];
        let mut unknown = None;
        for (pos, &s) in eq.slots.iter().enumerate() {
            if self.slot_value(s).is_none() {
                if unknown.is_some() {
                    return Step::Ok;
                }
                unknown = Some(pos);
            }
        }
        let prefix = |range: &[Slot]| {
            range.iter().fold(GroupElement::IDENTITY, |acc, &s| acc * self.slot_value(s).expect("known"))
        };
        match unknown {
            None => {
                let c = prefix(&eq.slots);
                if c == GroupElement::IDENTITY { Step::Ok } else { Step::Conflict(eq.face, c) }
            }
            Some(pos) => {
                let Slot::Y(i, inverted) = eq.slots[pos] else {
                    return Step::Ok;
                };
                // A·y^δ·B = 1 ⇒ y^δ = (B·A)⁻¹.
                let a = prefix(&eq.slots[..pos]);
                let b = prefix(&eq.slots[pos + 1..]);
                let target = (b * a).inverse();
                let y = if inverted { target.inverse() } else { target };
                self.assign(i, y);
                self.stats.propagated += 1;
                queue.extend(self.watch[i].iter().copied().filter(|&j| j != k));
                Step::Ok
            }
        }
    }

    fn propagate(&mut self, mut queue: Vec<usize>) -> Step {
        while let Some(k) = queue.pop() {
            if let Step::Conflict(face, c) = self.visit(k, &mut queue) {
                return Step::Conflict(face, c);
            }
        }
        Step::Ok
    }

    /// `Ok(true)` when a full solution is found below this node.
    fn search(&mut self) -> Result<bool, ()> {
        let Some(i) = (0..self.vars.len()).find(|&i| self.value[i].is_none()) else {
            return Ok(true);
        };
        for g in GroupElement::all() {
            self.stats.nodes += 1;
            if self.stats.nodes > self.max_nodes {
                return Err(());
            }
            let mark = self.trail.len();
            self.assign(i, g);
            match self.propagate(self.watch[i].clone()) {
                Step::Ok => {
                    if self.search()? {
                        return Ok(true);
                    }
                }
                Step::Conflict(face, constant) => {
                    self.first_conflict.get_or_insert(Certificate { face, constant, forced_at_root: false });
                }
            }
            self.undo(mark);
        }
        Ok(false)
    }

    fn assignment(&self, sys: &MonomialSystem) -> Assignment {
        let mut a = Assignment::identity(sys);
        for (i, v) in self.vars.iter().enumerate() {
            let g = self.value[i].expect("complete");
            match *v {
                Var::X(c) => a.x[c] = g,
                Var::Y(e) => {
                    a.y.insert(e, g);
                }
            }
        }
        a
    }
}

/// Solves with propagation first, then search over `x` ascending and `y` by
/// edge id, values by group id. The first solution in that order is returned.
///
/// # Panics
/// If a returned assignment fails to satisfy the system.
pub fn solve(sys: &MonomialSystem, max_nodes: u64) -> (SolveOutcome, SolveStats) {
    let mut s = Search::new(sys, max_nodes);
    let all: Vec<usize> = (0..s.eqs.len()).rev().collect();
    if let Step::Conflict(face, constant) = s.propagate(all) {
        let certificate = Certificate { face, constant, forced_at_root: true };
        return (SolveOutcome::Unsolvable { certificate }, s.stats);
    }
    let outcome = match s.search() {
        Err(()) => SolveOutcome::CapExceeded { nodes: s.stats.nodes - 1 },
        Ok(true) => {
            let assignment = s.assignment(sys);
            assert!(
                sys.is_satisfied_by(&assignment),
                "solver returned an assignment that does not satisfy the system"
            );
            SolveOutcome::Solvable { assignment }
        }
        Ok(false) => SolveOutcome::Unsolvable {
            certificate: s.first_conflict.expect("an exhausted search met a conflict"),
        },
    };
    (outcome, s.stats)
}

/// Every assignment of the occurring unknowns that satisfies the system;
/// non-occurring variables are the identity.
pub fn exhaustive_solve(sys: &MonomialSystem) -> Result<Vec<Assignment>, SystemError> {
    let vars = sys.unknowns();
    if vars.len() > EXHAUSTIVE_LIMIT {
        return Err(SystemError::TooManyUnknowns(vars.len()));
    }
    let mut search = Search::new(sys, 0);
    let mut out = Vec::new();
    for mut code in 0..ORDER.pow(vars.len() as u32) {
        // Last variable varies fastest, so solutions come in search order.
        for slot in search.value.iter_mut().rev() {
            *slot = GroupElement::from_id(code % ORDER);
            code /= ORDER;
        }
        let satisfied = search.eqs.iter().all(|eq| {
            eq.slots.iter().fold(GroupElement::IDENTITY, |acc, &s| acc * search.slot_value(s).expect("set"))
                == GroupElement::IDENTITY
        });
        if satisfied {
            out.push(search.assignment(sys));
        }
    }
    Ok(out)
}
