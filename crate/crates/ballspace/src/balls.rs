//! Ball construction for the four ball families, strong-contractivity and
//! spherical-completeness checking, nest utilities, and the singleton
//! descent engine that replaces the maximal-nest argument constructively.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::functions::{CkFunction, CkInfFunction, OtFunction};
use crate::scalar::{ExtScalar, Scalar};
use crate::space::{FiniteMetricSpace, PointId};

/// Which construction produced a ball.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BallOrigin {
    Ck,
    Ot,
    CkInf,
    Petal,
    Explicit,
}

/// One ball: its center, its members, and where it came from.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Ball {
    pub center: PointId,
    pub members: BTreeSet<PointId>,
    pub origin: BallOrigin,
}

impl Ball {
    pub fn is_singleton_of_center(&self) -> bool {
        self.members.len() == 1 && self.members.contains(&self.center)
    }
}

/// The map `x -> B_x` over a domain of centers. The domain may be a strict
/// subset of the space (generated ball spaces live on `B_0`).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BallAssignment {
    balls: BTreeMap<PointId, Ball>,
}

impl BallAssignment {
    pub fn from_balls(balls: impl IntoIterator<Item = Ball>) -> Self {
        BallAssignment {
            balls: balls.into_iter().map(|b| (b.center, b)).collect(),
        }
    }

    /// Explicit assignment from raw member sets, for planted examples.
    pub fn explicit(sets: impl IntoIterator<Item = (PointId, BTreeSet<PointId>)>) -> Self {
        Self::from_balls(sets.into_iter().map(|(center, members)| Ball {
            center,
            members,
            origin: BallOrigin::Explicit,
        }))
    }

    pub fn domain(&self) -> impl Iterator<Item = PointId> + '_ {
        self.balls.keys().copied()
    }

    pub fn contains(&self, x: PointId) -> bool {
        self.balls.contains_key(&x)
    }

    pub fn ball(&self, x: PointId) -> Option<&Ball> {
        self.balls.get(&x)
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn balls(&self) -> impl Iterator<Item = &Ball> {
        self.balls.values()
    }

    /// The distinct member sets of the family, deduplicated setwise.
    pub fn family(&self) -> Vec<BTreeSet<PointId>> {
        let mut seen = BTreeSet::new();
        let mut family = Vec::new();
        for ball in self.balls.values() {
            if seen.insert(ball.members.clone()) {
                family.push(ball.members.clone());
            }
        }
        family
    }
}

/// CK ball: `B_x = {y : d(x,y) <= varphi(x) - varphi(y)}`.
pub fn ck_ball(space: &FiniteMetricSpace, varphi: &CkFunction, x: PointId) -> Ball {
    assert_eq!(varphi.len(), space.len(), "function/space size mismatch");
    let members = space
        .points()
        .filter(|y| space.dist(x, *y) <= &(varphi.value(x) - varphi.value(*y)))
        .collect();
    Ball {
        center: x,
        members,
        origin: BallOrigin::Ck,
    }
}

/// OT ball: `B_x = {y : d(x,y) <= -phi(x,y)}`, evaluated as
/// `phi(x,y) + d(x,y) <= 0` so that `+inf` entries exclude membership.
pub fn ot_ball(space: &FiniteMetricSpace, phi: &OtFunction, x: PointId) -> Ball {
    assert_eq!(phi.len(), space.len(), "function/space size mismatch");
    let members = space
        .points()
        .filter(|y| (phi.value(x, *y) + space.dist(x, *y)) <= ExtScalar::zero())
        .collect();
    Ball {
        center: x,
        members,
        origin: BallOrigin::Ot,
    }
}

/// CK-infinity ball: `B_x = {y : phitilde(y) + d(x,y) <= phitilde(x)}`.
/// A center of infinite value has the whole space as its ball.
pub fn ckinf_ball(space: &FiniteMetricSpace, phitilde: &CkInfFunction, x: PointId) -> Ball {
    assert_eq!(phitilde.len(), space.len(), "function/space size mismatch");
    let members = space
        .points()
        .filter(|y| (phitilde.value(*y) + space.dist(x, *y)) <= *phitilde.value(x))
        .collect();
    Ball {
        center: x,
        members,
        origin: BallOrigin::CkInf,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("petal parameter gamma must be positive, got {0}")]
pub struct PetalError(pub Scalar);

/// The petal `P_gamma(a, b) = {y : gamma*d(y,a) + d(y,b) <= d(a,b)}`.
pub fn petal(
    space: &FiniteMetricSpace,
    gamma: &Scalar,
    a: PointId,
    b: PointId,
) -> Result<BTreeSet<PointId>, PetalError> {
    if !gamma.is_positive() {
        return Err(PetalError(gamma.clone()));
    }
    Ok(space
        .points()
        .filter(|y| &(&(gamma * space.dist(*y, a)) + space.dist(*y, b)) <= space.dist(a, b))
        .collect())
}

/// The CK assignment over the whole space.
pub fn ck_assignment(space: &FiniteMetricSpace, varphi: &CkFunction) -> BallAssignment {
    BallAssignment::from_balls(space.points().map(|x| ck_ball(space, varphi, x)))
}

/// The OT assignment over the whole space.
pub fn ot_assignment(space: &FiniteMetricSpace, phi: &OtFunction) -> BallAssignment {
    BallAssignment::from_balls(space.points().map(|x| ot_ball(space, phi, x)))
}

/// The CK-infinity assignment over the whole space. Not strongly
/// contractive in general (two infinite-valued centers share the ball X);
/// use [`ckinf_singleton`] for descent.
pub fn ckinf_assignment(space: &FiniteMetricSpace, phitilde: &CkInfFunction) -> BallAssignment {
    BallAssignment::from_balls(space.points().map(|x| ckinf_ball(space, phitilde, x)))
}

/// The OT ball space generated by `x0`: the assignment restricted to the
/// centers in `B_x0`. Every ball of the family is contained in `B_x0`.
pub fn generated_ball_space(
    space: &FiniteMetricSpace,
    phi: &OtFunction,
    x0: PointId,
) -> BallAssignment {
    let base = ot_ball(space, phi, x0);
    BallAssignment::from_balls(base.members.iter().map(|x| ot_ball(space, phi, *x)))
}

/// One violated strong-contractivity condition with its witness.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ContractivityViolation {
    /// Condition (1): x not in B_x.
    CenterMissing { x: PointId },
    /// A member of B_x has no ball of its own in the assignment.
    OutsideDomain { x: PointId, y: PointId },
    /// Condition (2): y in B_x but B_y not a subset of B_x.
    NotSubset { x: PointId, y: PointId },
    /// Condition (3): y in B_x \ {x} but B_y equals B_x setwise.
    NotProper { x: PointId, y: PointId },
}

impl ContractivityViolation {
    pub fn render(&self, space: &FiniteMetricSpace) -> String {
        match self {
            ContractivityViolation::CenterMissing { x } => {
                format!("(1) at {}: center not in its own ball", space.label(*x))
            }
            ContractivityViolation::OutsideDomain { x, y } => format!(
                "member {} of B({}) has no ball in the assignment",
                space.label(*y),
                space.label(*x)
            ),
            ContractivityViolation::NotSubset { x, y } => format!(
                "(2) at ({},{}): B({1}) is not contained in B({0})",
                space.label(*x),
                space.label(*y)
            ),
            ContractivityViolation::NotProper { x, y } => format!(
                "(3) at ({},{}): B({1}) equals B({0}) instead of shrinking",
                space.label(*x),
                space.label(*y)
            ),
        }
    }
}

impl fmt::Display for ContractivityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContractivityViolation::CenterMissing { x } => write!(f, "(1) at {x}"),
            ContractivityViolation::OutsideDomain { x, y } => {
                write!(f, "member {y} of B({x}) outside domain")
            }
            ContractivityViolation::NotSubset { x, y } => write!(f, "(2) at ({x},{y})"),
            ContractivityViolation::NotProper { x, y } => write!(f, "(3) at ({x},{y})"),
        }
    }
}

/// Checks conditions (1)-(3) of strong contractivity over the assignment's
/// domain. Ball comparison is set equality of members, never center
/// identity: distinct centers may legitimately share one ball.
pub fn check_strongly_contractive(assignment: &BallAssignment) -> Vec<ContractivityViolation> {
    let mut violations = Vec::new();
    for x in assignment.domain() {
        let bx = &assignment.ball(x).expect("domain key").members;
        if !bx.contains(&x) {
            violations.push(ContractivityViolation::CenterMissing { x });
        }
        for &y in bx {
            let Some(by) = assignment.ball(y) else {
                violations.push(ContractivityViolation::OutsideDomain { x, y });
                continue;
            };
            if !by.members.is_subset(bx) {
                violations.push(ContractivityViolation::NotSubset { x, y });
            } else if y != x && by.members == *bx {
                violations.push(ContractivityViolation::NotProper { x, y });
            }
        }
    }
    violations
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("family of {got} distinct balls exceeds the nest enumeration bound {bound}: instance too large")]
pub struct NestBoundError {
    pub got: usize,
    pub bound: usize,
}

/// Default cap on distinct balls for nest enumeration; the chain count is
/// exponential in general and silent truncation would corrupt the checks.
pub const NEST_ENUMERATION_BOUND: usize = 20;

fn distinct_sets(family: &[BTreeSet<PointId>]) -> Vec<BTreeSet<PointId>> {
    let mut distinct: Vec<BTreeSet<PointId>> = Vec::new();
    for set in family {
        if !distinct.contains(set) {
            distinct.push(set.clone());
        }
    }
    // Canonical order: by size, then lexicographically by members.
    distinct.sort_by(|a, b| {
        a.len()
            .cmp(&b.len())
            .then_with(|| a.iter().collect::<Vec<_>>().cmp(&b.iter().collect()))
    });
    distinct
}

/// Enumerates every maximal nest (inclusion-chain not extendable within
/// the family) of a family of point sets. Errors out above `bound`
/// distinct sets instead of truncating.
pub fn enumerate_maximal_nests(
    family: &[BTreeSet<PointId>],
    bound: usize,
) -> Result<Vec<Vec<BTreeSet<PointId>>>, NestBoundError> {
    let sets = distinct_sets(family);
    if sets.len() > bound {
        return Err(NestBoundError {
            got: sets.len(),
            bound,
        });
    }
    if sets.is_empty() {
        return Ok(Vec::new());
    }

    let n = sets.len();
    let proper_subset =
        |a: usize, b: usize| sets[a] != sets[b] && sets[a].is_subset(&sets[b]);
    // covers[i] = j such that sets[i] is a proper subset of sets[j] with
    // nothing strictly between.
    let mut covers: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if proper_subset(i, j)
                && !(0..n).any(|m| proper_subset(i, m) && proper_subset(m, j))
            {
                covers[i].push(j);
            }
        }
    }
    let minimal: Vec<usize> = (0..n)
        .filter(|&i| !(0..n).any(|j| proper_subset(j, i)))
        .collect();

    let mut chains = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    fn extend(
        at: usize,
        covers: &[Vec<usize>],
        stack: &mut Vec<usize>,
        chains: &mut Vec<Vec<usize>>,
    ) {
        stack.push(at);
        if covers[at].is_empty() {
            chains.push(stack.clone());
        } else {
            for &next in &covers[at] {
                extend(next, covers, stack, chains);
            }
        }
        stack.pop();
    }
    let mut index_chains = Vec::new();
    for &start in &minimal {
        extend(start, &covers, &mut stack, &mut index_chains);
    }
    for chain in index_chains {
        chains.push(chain.into_iter().map(|i| sets[i].clone()).collect());
    }
    Ok(chains)
}

/// A nest whose intersection came out empty, naming the empty member.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CompletenessViolation {
    pub nest: Vec<BTreeSet<PointId>>,
    pub empty_member_position: usize,
}

/// Checks that every nest of the family has nonempty intersection. On
/// well-formed families of nonempty finite sets this is always the case;
/// a violation pinpoints an empty member, which signals corrupted input.
pub fn check_spherical_completeness(
    family: &[BTreeSet<PointId>],
    bound: usize,
) -> Result<Vec<CompletenessViolation>, NestBoundError> {
    let nests = enumerate_maximal_nests(family, bound)?;
    let mut violations = Vec::new();
    for nest in nests {
        let mut intersection = nest[0].clone();
        for set in &nest[1..] {
            intersection = intersection.intersection(set).copied().collect();
        }
        if intersection.is_empty() {
            let empty_member_position = nest
                .iter()
                .position(|s| s.is_empty())
                .expect("a chain of finite sets intersects to its minimum");
            violations.push(CompletenessViolation {
                nest,
                empty_member_position,
            });
        }
    }
    Ok(violations)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NestPreconditionError {
    #[error("centers {0} and {1} have incomparable balls: not a nest")]
    Incomparable(PointId, PointId),
    #[error("center {0} lies outside the base ball B(x0)")]
    OutsideBaseBall(PointId),
}

/// One failure of the nest lemma on a pair of centers.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum NestViolation {
    /// d(x,y) > |phi(x0,x) - phi(x0,y)|
    Inequality { x: PointId, y: PointId },
    /// (i) y in B_x and (ii) phi(x,y) <= phi(y,x) disagree.
    EquivMembershipSwap { x: PointId, y: PointId },
    /// (i) y in B_x and (iii) phi(x0,y) <= phi(x0,x) disagree.
    EquivBasePotential { x: PointId, y: PointId },
}

impl fmt::Display for NestViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NestViolation::Inequality { x, y } => {
                write!(f, "nest inequality broken at ({x},{y})")
            }
            NestViolation::EquivMembershipSwap { x, y } => {
                write!(f, "(i)<=>(ii) broken at ({x},{y})")
            }
            NestViolation::EquivBasePotential { x, y } => {
                write!(f, "(i)<=>(iii) broken at ({x},{y})")
            }
        }
    }
}

/// Verifies, for a nest `{B_x : x in A}` inside the ball space generated
/// by `x0`, the distance bound `d(x,y) <= |phi(x0,x) - phi(x0,y)|` and the
/// pairwise equivalence of (i) `y in B_x`, (ii) `phi(x,y) <= phi(y,x)`,
/// (iii) `phi(x0,y) <= phi(x0,x)`.
pub fn check_nest_equivalences(
    centers: &[PointId],
    phi: &OtFunction,
    x0: PointId,
    space: &FiniteMetricSpace,
) -> Result<Vec<NestViolation>, NestPreconditionError> {
    let base = ot_ball(space, phi, x0);
    for &a in centers {
        if !base.members.contains(&a) {
            return Err(NestPreconditionError::OutsideBaseBall(a));
        }
    }
    let ball_of: BTreeMap<PointId, BTreeSet<PointId>> = centers
        .iter()
        .map(|&a| (a, ot_ball(space, phi, a).members))
        .collect();
    for (i, &x) in centers.iter().enumerate() {
        for &y in &centers[i + 1..] {
            let bx = &ball_of[&x];
            let by = &ball_of[&y];
            if !bx.is_subset(by) && !by.is_subset(bx) {
                return Err(NestPreconditionError::Incomparable(x, y));
            }
        }
    }

    // x in B_0 forces phi(x0,x) finite: d(x0,x) <= -phi(x0,x).
    let potential = |p: PointId| -> &Scalar {
        phi.value(x0, p)
            .as_finite()
            .expect("base-ball member has finite phi(x0,.)")
    };

    let mut violations = Vec::new();
    for &x in centers {
        for &y in centers {
            if x == y {
                continue;
            }
            let gap = (potential(x) - potential(y)).abs();
            if space.dist(x, y) > &gap {
                violations.push(NestViolation::Inequality { x, y });
            }
            let in_ball = ball_of[&x].contains(&y);
            let swap = phi.value(x, y) <= phi.value(y, x);
            let base_pot = phi.value(x0, y) <= phi.value(x0, x);
            if in_ball != swap {
                violations.push(NestViolation::EquivMembershipSwap { x, y });
            }
            if in_ball != base_pot {
                violations.push(NestViolation::EquivBasePotential { x, y });
            }
        }
    }
    Ok(violations)
}

/// The strictly shrinking chain produced by singleton descent, ending at
/// a point whose ball is exactly the singleton of itself.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DescentTrace {
    pub chain: Vec<PointId>,
    pub balls: Vec<BTreeSet<PointId>>,
    pub terminal: PointId,
}

impl DescentTrace {
    /// Re-checks the trace invariants; used by tests and the certificate
    /// renderer, never relied on by the descent itself.
    pub fn is_sound(&self) -> bool {
        if self.chain.is_empty() || self.chain.len() != self.balls.len() {
            return false;
        }
        if *self.chain.last().unwrap() != self.terminal {
            return false;
        }
        let last = self.balls.last().unwrap();
        if last.len() != 1 || !last.contains(&self.terminal) {
            return false;
        }
        self.balls
            .windows(2)
            .all(|w| w[1].is_subset(&w[0]) && w[1] != w[0])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DescentError {
    #[error("assignment is not strongly contractive: {}", render_contractivity(.0))]
    NotContractive(Vec<ContractivityViolation>),
    #[error("start point {0} is outside the assignment domain")]
    StartOutsideDomain(PointId),
}

fn render_contractivity(violations: &[ContractivityViolation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Walks from `x` along strictly shrinking balls until reaching a point
/// `a` with `B_a = {a}`. Refuses assignments that are not strongly
/// contractive, returning the violations instead of descending.
///
/// Pivot rule: among the members of the current ball other than the
/// center, take the one with the smallest ball, ties broken by smallest
/// point index. Any strictly shrinking rule terminates on a finite
/// domain; this one makes traces reproducible.
pub fn singleton_descent(
    assignment: &BallAssignment,
    x: PointId,
) -> Result<DescentTrace, DescentError> {
    let violations = check_strongly_contractive(assignment);
    if !violations.is_empty() {
        return Err(DescentError::NotContractive(violations));
    }
    if !assignment.contains(x) {
        return Err(DescentError::StartOutsideDomain(x));
    }

    let mut current = x;
    let mut chain = vec![current];
    let mut balls = vec![assignment.ball(current).expect("in domain").members.clone()];
    loop {
        let here = balls.last().expect("nonempty");
        let next = here
            .iter()
            .copied()
            .filter(|&y| y != current)
            .min_by_key(|&y| {
                let by = assignment.ball(y).expect("contractive domain is closed");
                (by.members.len(), y)
            });
        match next {
            None => {
                return Ok(DescentTrace {
                    chain,
                    balls,
                    terminal: current,
                })
            }
            Some(y) => {
                let by = assignment.ball(y).expect("in domain").members.clone();
                chain.push(y);
                balls.push(by);
                current = y;
            }
        }
    }
}

/// Singleton descent for a CK-infinity function from an arbitrary start,
/// CK element or not. A start of infinite value has `B_0 = X`; the walk
/// first enters the smallest-index finite-valued point and then descends
/// through strictly shrinking balls of finite-valued centers, using the
/// same pivot rule as [`singleton_descent`].
pub fn ckinf_singleton(
    space: &FiniteMetricSpace,
    phitilde: &CkInfFunction,
    x0: PointId,
) -> DescentTrace {
    assert_eq!(phitilde.len(), space.len(), "function/space size mismatch");
    let all_balls: Vec<BTreeSet<PointId>> = space
        .points()
        .map(|p| ckinf_ball(space, phitilde, p).members)
        .collect();

    let mut current = x0;
    let mut chain = vec![current];
    let mut balls = vec![all_balls[x0.0].clone()];

    if !phitilde.is_ck_element(x0) {
        let entry = phitilde.first_ck_element();
        chain.push(entry);
        balls.push(all_balls[entry.0].clone());
        current = entry;
    }

    loop {
        let here = balls.last().expect("nonempty");
        let next = here
            .iter()
            .copied()
            .filter(|&y| y != current)
            .min_by_key(|&y| (all_balls[y.0].len(), y));
        match next {
            None => {
                return DescentTrace {
                    chain,
                    balls,
                    terminal: current,
                }
            }
            Some(y) => {
                chain.push(y);
                balls.push(all_balls[y.0].clone());
                current = y;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{ck_to_ot, generate_instance, restrict_ckinf};
    use crate::scalar::Scalar;
    use crate::space::FiniteMetricSpace;

    fn line_space() -> FiniteMetricSpace {
        FiniteMetricSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                vec![Scalar::from_int(0), Scalar::from_int(1), Scalar::from_int(2)],
                vec![Scalar::from_int(1), Scalar::from_int(0), Scalar::from_int(1)],
                vec![Scalar::from_int(2), Scalar::from_int(1), Scalar::from_int(0)],
            ],
        )
        .unwrap()
    }

    fn four_line_space() -> FiniteMetricSpace {
        let labels = (0..4).map(|i| i.to_string()).collect();
        let dist = (0..4i64)
            .map(|i| (0..4i64).map(|j| Scalar::from_int((i - j).abs())).collect())
            .collect();
        FiniteMetricSpace::new(labels, dist).unwrap()
    }

    fn golden_ck() -> CkFunction {
        CkFunction::new(vec![
            Scalar::from_int(3),
            Scalar::from_int(1),
            Scalar::from_int(0),
        ])
    }

    fn golden_ckinf() -> CkInfFunction {
        CkInfFunction::new(vec![
            ExtScalar::Infinity,
            ExtScalar::from_int(1),
            ExtScalar::from_int(0),
        ])
        .unwrap()
    }

    fn set(ids: &[usize]) -> BTreeSet<PointId> {
        ids.iter().map(|&i| PointId(i)).collect()
    }

    #[test]
    fn ck_balls_of_golden_function() {
        let space = line_space();
        let varphi = golden_ck();
        assert_eq!(ck_ball(&space, &varphi, PointId(0)).members, set(&[0, 1, 2]));
        assert_eq!(ck_ball(&space, &varphi, PointId(1)).members, set(&[1, 2]));
        assert_eq!(ck_ball(&space, &varphi, PointId(2)).members, set(&[2]));
    }

    #[test]
    fn ot_ball_agrees_with_ck_ball_through_the_embedding() {
        let space = line_space();
        let varphi = golden_ck();
        let phi = ck_to_ot(&varphi);
        for x in space.points() {
            assert_eq!(
                ot_ball(&space, &phi, x).members,
                ck_ball(&space, &varphi, x).members
            );
        }
    }

    #[test]
    fn zero_ot_function_gives_singletons() {
        let space = line_space();
        let zero = OtFunction::new(vec![
            vec![ExtScalar::zero(), ExtScalar::zero(), ExtScalar::zero()],
            vec![ExtScalar::zero(), ExtScalar::zero(), ExtScalar::zero()],
            vec![ExtScalar::zero(), ExtScalar::zero(), ExtScalar::zero()],
        ])
        .unwrap();
        for x in space.points() {
            assert_eq!(ot_ball(&space, &zero, x).members, set(&[x.0]));
        }
    }

    #[test]
    fn remark_truncation_ball_at_one() {
        let (space, phi) = crate::functions::tests::remark_truncation();
        assert_eq!(ot_ball(&space, &phi, PointId(1)).members, set(&[1, 2, 3]));
    }

    #[test]
    fn ckinf_balls_of_golden_function() {
        let space = line_space();
        let phitilde = golden_ckinf();
        assert_eq!(
            ckinf_ball(&space, &phitilde, PointId(0)).members,
            set(&[0, 1, 2])
        );
        assert_eq!(ckinf_ball(&space, &phitilde, PointId(1)).members, set(&[1, 2]));
        assert_eq!(ckinf_ball(&space, &phitilde, PointId(2)).members, set(&[2]));
    }

    #[test]
    fn petal_examples_on_the_line() {
        let space = four_line_space();
        let p = |g: i64, a: usize, b: usize| {
            petal(&space, &Scalar::from_int(g), PointId(a), PointId(b)).unwrap()
        };
        assert_eq!(p(1, 3, 0), set(&[0, 1, 2, 3]));
        assert_eq!(p(2, 3, 0), set(&[3]));
        assert_eq!(p(2, 1, 1), set(&[1]));
        assert!(petal(&space, &Scalar::from_int(0), PointId(0), PointId(1)).is_err());
    }

    #[test]
    fn generated_ball_space_restricts_the_domain() {
        let space = line_space();
        let phi = ck_to_ot(&golden_ck());
        let family = generated_ball_space(&space, &phi, PointId(1));
        let domain: Vec<PointId> = family.domain().collect();
        assert_eq!(domain, vec![PointId(1), PointId(2)]);
        assert_eq!(family.ball(PointId(1)).unwrap().members, set(&[1, 2]));
        assert_eq!(family.ball(PointId(2)).unwrap().members, set(&[2]));
        let base = ot_ball(&space, &phi, PointId(1)).members;
        for ball in family.balls() {
            assert!(ball.members.is_subset(&base));
        }
    }

    #[test]
    fn ck_assignments_are_strongly_contractive() {
        let space = line_space();
        let assignment = ck_assignment(&space, &golden_ck());
        assert!(check_strongly_contractive(&assignment).is_empty());
    }

    #[test]
    fn planted_shared_full_ball_violates_condition_three() {
        let everything = set(&[0, 1]);
        let assignment = BallAssignment::explicit(vec![
            (PointId(0), everything.clone()),
            (PointId(1), everything),
        ]);
        let violations = check_strongly_contractive(&assignment);
        assert!(violations
            .iter()
            .any(|v| matches!(v, ContractivityViolation::NotProper { .. })));
    }

    #[test]
    fn member_without_ball_is_reported() {
        let assignment = BallAssignment::explicit(vec![(PointId(0), set(&[0, 1]))]);
        let violations = check_strongly_contractive(&assignment);
        assert_eq!(
            violations,
            vec![ContractivityViolation::OutsideDomain {
                x: PointId(0),
                y: PointId(1)
            }]
        );
    }

    #[test]
    fn maximal_nests_of_a_chain_family() {
        let family = vec![set(&[2]), set(&[1, 2]), set(&[0, 1, 2])];
        let nests = enumerate_maximal_nests(&family, NEST_ENUMERATION_BOUND).unwrap();
        assert_eq!(nests, vec![vec![set(&[2]), set(&[1, 2]), set(&[0, 1, 2])]]);
    }

    #[test]
    fn maximal_nests_of_an_antichain() {
        let family = vec![set(&[0]), set(&[1])];
        let nests = enumerate_maximal_nests(&family, NEST_ENUMERATION_BOUND).unwrap();
        assert_eq!(nests, vec![vec![set(&[0])], vec![set(&[1])]]);
    }

    #[test]
    fn golden_ck_family_has_one_maximal_nest() {
        let space = line_space();
        let family = ck_assignment(&space, &golden_ck()).family();
        let nests = enumerate_maximal_nests(&family, NEST_ENUMERATION_BOUND).unwrap();
        assert_eq!(nests.len(), 1);
        assert_eq!(nests[0].len(), 3);
    }

    #[test]
    fn nest_bound_is_enforced() {
        let family: Vec<BTreeSet<PointId>> = (0..25).map(|i| set(&[i])).collect();
        assert!(enumerate_maximal_nests(&family, NEST_ENUMERATION_BOUND).is_err());
    }

    #[test]
    fn spherical_completeness_of_well_formed_families() {
        let space = line_space();
        let family = ck_assignment(&space, &golden_ck()).family();
        assert!(check_spherical_completeness(&family, NEST_ENUMERATION_BOUND)
            .unwrap()
            .is_empty());
        let singleton_family = vec![set(&[0, 1, 2])];
        assert!(
            check_spherical_completeness(&singleton_family, NEST_ENUMERATION_BOUND)
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn empty_member_breaks_completeness() {
        let family = vec![BTreeSet::new(), set(&[0])];
        let violations =
            check_spherical_completeness(&family, NEST_ENUMERATION_BOUND).unwrap();
        assert_eq!(violations.len(), 1);
        let v = &violations[0];
        assert!(v.nest[v.empty_member_position].is_empty());
    }

    #[test]
    fn nest_equivalences_hold_on_the_golden_nest() {
        let space = line_space();
        let phi = ck_to_ot(&golden_ck());
        let centers = [PointId(0), PointId(1), PointId(2)];
        let violations =
            check_nest_equivalences(&centers, &phi, PointId(0), &space).unwrap();
        assert!(violations.is_empty(), "{violations:?}");

        let single =
            check_nest_equivalences(&[PointId(0)], &phi, PointId(0), &space).unwrap();
        assert!(single.is_empty());
    }

    #[test]
    fn incomparable_pair_is_a_precondition_error() {
        // varphi = (1, 1, 5): B_a = {a}, B_b = {b} are incomparable, and
        // both lie inside B_c = {a, b, c}.
        let space = line_space();
        let varphi = CkFunction::new(vec![
            Scalar::from_int(1),
            Scalar::from_int(1),
            Scalar::from_int(5),
        ]);
        let phi = ck_to_ot(&varphi);
        let err =
            check_nest_equivalences(&[PointId(0), PointId(1)], &phi, PointId(2), &space)
                .unwrap_err();
        assert_eq!(
            err,
            NestPreconditionError::Incomparable(PointId(0), PointId(1))
        );
    }

    #[test]
    fn descent_follows_the_size_then_index_rule() {
        let space = line_space();
        let assignment = ck_assignment(&space, &golden_ck());
        let trace = singleton_descent(&assignment, PointId(0)).unwrap();
        assert_eq!(trace.chain, vec![PointId(0), PointId(2)]);
        assert_eq!(trace.terminal, PointId(2));
        assert!(trace.is_sound());
    }

    #[test]
    fn descent_from_a_singleton_is_immediate() {
        let space = line_space();
        let assignment = ck_assignment(&space, &golden_ck());
        let trace = singleton_descent(&assignment, PointId(2)).unwrap();
        assert_eq!(trace.chain, vec![PointId(2)]);
        assert!(trace.is_sound());
    }

    #[test]
    fn descent_refuses_non_contractive_assignments() {
        let everything = set(&[0, 1]);
        let assignment = BallAssignment::explicit(vec![
            (PointId(0), everything.clone()),
            (PointId(1), everything),
        ]);
        assert!(matches!(
            singleton_descent(&assignment, PointId(0)),
            Err(DescentError::NotContractive(_))
        ));
    }

    #[test]
    fn descent_on_generated_instances_is_sound() {
        for seed in 1..=25 {
            let n = 2 + ((seed - 1) % 11) as usize;
            let inst = generate_instance(seed, n);
            let assignment = ot_assignment(&inst.space, &inst.ot);
            for start in inst.space.points() {
                let trace = singleton_descent(&assignment, start).unwrap();
                assert!(trace.is_sound(), "seed {seed} start {start}");
                assert!(trace.chain.len() <= n);
                let start_ball = &assignment.ball(start).unwrap().members;
                assert!(start_ball.contains(&trace.terminal));
            }
        }
    }

    #[test]
    fn ckinf_descent_enters_through_the_first_finite_point() {
        let space = line_space();
        let trace = ckinf_singleton(&space, &golden_ckinf(), PointId(0));
        assert_eq!(trace.chain, vec![PointId(0), PointId(1), PointId(2)]);
        assert_eq!(trace.terminal, PointId(2));
        assert!(trace.is_sound());
        assert_eq!(trace.balls[0], set(&[0, 1, 2]));
    }

    #[test]
    fn ckinf_descent_on_all_finite_matches_ck_descent() {
        let space = line_space();
        let varphi = golden_ck();
        let phitilde: CkInfFunction = varphi.clone().into();
        for start in space.points() {
            let via_ckinf = ckinf_singleton(&space, &phitilde, start);
            let via_ck = singleton_descent(&ck_assignment(&space, &varphi), start).unwrap();
            assert_eq!(via_ckinf, via_ck);
        }
    }

    #[test]
    fn unique_finite_point_is_the_forced_terminal() {
        let space = line_space();
        let phitilde = CkInfFunction::new(vec![
            ExtScalar::Infinity,
            ExtScalar::from_int(2),
            ExtScalar::Infinity,
        ])
        .unwrap();
        let trace = ckinf_singleton(&space, &phitilde, PointId(0));
        assert_eq!(trace.terminal, PointId(1));
        assert_eq!(
            ckinf_ball(&space, &phitilde, PointId(1)).members,
            set(&[1])
        );
    }

    #[test]
    fn ckinf_ball_equals_restricted_ck_ball_inside_the_base() {
        let space = line_space();
        let phitilde = golden_ckinf();
        let x0 = PointId(1);
        let restriction = restrict_ckinf(&phitilde, x0, &space).unwrap();
        for sub in restriction.space.points() {
            let original = restriction.original(sub);
            let tilde_ball = ckinf_ball(&space, &phitilde, original).members;
            let ck_ball_sub = ck_ball(&restriction.space, &restriction.varphi, sub).members;
            let mapped: BTreeSet<PointId> =
                ck_ball_sub.iter().map(|p| restriction.original(*p)).collect();
            assert_eq!(tilde_ball, mapped);
        }
    }
}
