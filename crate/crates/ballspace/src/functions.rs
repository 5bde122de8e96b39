//! CK, CK-infinity and OT functions: representations, axiom checkers,
//! conversions between the families, and seeded random generation.

use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::{ExtScalar, Scalar};
use crate::space::{FiniteMetricSpace, PointId};

/// A real-valued function on the points of one space. On a finite space
/// lower semicontinuity and boundedness below hold automatically, so the
/// only representation invariant is finiteness of every value.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CkFunction {
    values: Vec<Scalar>,
}

impl CkFunction {
    pub fn new(values: Vec<Scalar>) -> Self {
        assert!(!values.is_empty(), "a CK function needs at least one value");
        CkFunction { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, x: PointId) -> &Scalar {
        &self.values[x.0]
    }

    pub fn values(&self) -> &[Scalar] {
        &self.values
    }

    /// Pointwise minimum; the exact lower bound witnessing boundedness.
    pub fn min_value(&self) -> &Scalar {
        self.values.iter().min().expect("nonempty")
    }

    /// Scales every value by a strictly positive rational.
    pub fn scale_pos(&self, by: &Scalar) -> CkFunction {
        assert!(by.is_positive());
        CkFunction {
            values: self.values.iter().map(|v| v * by).collect(),
        }
    }
}

/// A function into `(-inf, +inf]`, not constantly `+inf`. Points of
/// finite value are the CK elements.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CkInfFunction {
    values: Vec<ExtScalar>,
}

impl CkInfFunction {
    pub fn new(values: Vec<ExtScalar>) -> Result<Self, FunctionError> {
        if values.is_empty() {
            return Err(FunctionError::EmptyFunction);
        }
        if values.iter().all(|v| v.is_infinite()) {
            return Err(FunctionError::ConstantlyInfinite);
        }
        Ok(CkInfFunction { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, x: PointId) -> &ExtScalar {
        &self.values[x.0]
    }

    pub fn values(&self) -> &[ExtScalar] {
        &self.values
    }

    pub fn is_ck_element(&self, x: PointId) -> bool {
        self.values[x.0].is_finite()
    }

    /// The smallest-index point of finite value.
    pub fn first_ck_element(&self) -> PointId {
        self.values
            .iter()
            .position(|v| v.is_finite())
            .map(PointId)
            .expect("invariant: not constantly +inf")
    }

    /// Every value finite? Then the function is an ordinary CK function.
    pub fn as_ck(&self) -> Option<CkFunction> {
        let mut values = Vec::with_capacity(self.values.len());
        for v in &self.values {
            values.push(v.as_finite()?.clone());
        }
        Some(CkFunction::new(values))
    }

    pub fn scale_pos(&self, by: &Scalar) -> CkInfFunction {
        assert!(by.is_positive());
        CkInfFunction {
            values: self.values.iter().map(|v| v.scale_pos(by)).collect(),
        }
    }
}

impl From<CkFunction> for CkInfFunction {
    fn from(varphi: CkFunction) -> Self {
        CkInfFunction {
            values: varphi.values.into_iter().map(ExtScalar::Finite).collect(),
        }
    }
}

/// A two-argument function into `(-inf, +inf]`, stored as a square matrix.
///
/// Construction checks shape only. The semantic axioms — zero diagonal (b),
/// triangle subadditivity (c), finite infima (d) — are verified by
/// [`check_ot_axioms`], so that defective candidates can still be loaded
/// and their violations reported.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OtFunction {
    values: Vec<Vec<ExtScalar>>,
}

impl OtFunction {
    pub fn new(values: Vec<Vec<ExtScalar>>) -> Result<Self, FunctionError> {
        if values.is_empty() {
            return Err(FunctionError::EmptyFunction);
        }
        let n = values.len();
        for (row, entries) in values.iter().enumerate() {
            if entries.len() != n {
                return Err(FunctionError::NotSquare {
                    row,
                    got: entries.len(),
                    expected: n,
                });
            }
        }
        Ok(OtFunction { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, x: PointId, y: PointId) -> &ExtScalar {
        &self.values[x.0][y.0]
    }

    pub fn rows(&self) -> &[Vec<ExtScalar>] {
        &self.values
    }

    /// Scales every entry by a strictly positive rational; conditions
    /// (a)-(d) are preserved, so the scaled function is OT whenever the
    /// original is.
    pub fn scale_pos(&self, by: &Scalar) -> OtFunction {
        assert!(by.is_positive());
        OtFunction {
            values: self
                .values
                .iter()
                .map(|row| row.iter().map(|v| v.scale_pos(by)).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FunctionError {
    #[error("function has no values")]
    EmptyFunction,
    #[error("matrix is not square: row {row} has {got} entries, expected {expected}")]
    NotSquare {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("function is constantly +inf")]
    ConstantlyInfinite,
    #[error("function has {got} values but the space has {expected} points")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("{0} is not a CK element: its value is +inf")]
    NotCkElement(String),
}

/// One violated OT condition together with the witnessing tuple.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum OtViolation {
    /// Condition (b): phi(x,x) != 0.
    Diagonal { x: usize, value: ExtScalar },
    /// Condition (c): phi(x,y) > phi(x,z) + phi(z,y), witness (x,z,y).
    Triangle {
        x: usize,
        z: usize,
        y: usize,
        lhs: ExtScalar,
        rhs: ExtScalar,
    },
}

impl fmt::Display for OtViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OtViolation::Diagonal { x, value } => {
                write!(f, "(b) at ({x}): phi({x},{x}) = {value}")
            }
            OtViolation::Triangle { x, z, y, lhs, rhs } => {
                write!(
                    f,
                    "(c) at ({x},{z},{y}): phi({x},{y}) = {lhs} > {rhs} = phi({x},{z}) + phi({z},{y})"
                )
            }
        }
    }
}

/// Outcome of checking conditions (a)-(d) on a candidate OT matrix.
///
/// Condition (a), lower semicontinuity, is vacuous on a finite space
/// (discrete topology) and is recorded as a note rather than tested.
/// Condition (d) is reported as the exact infimum per point; with `-inf`
/// unrepresentable it is automatic here, and after (b) holds every
/// infimum is finite.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OtAxiomReport {
    pub violations: Vec<OtViolation>,
    pub infima: Vec<ExtScalar>,
    pub lsc_note: &'static str,
}

impl OtAxiomReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

pub const LSC_VACUOUS: &str = "vacuous (finite discrete topology)";

/// Checks OT conditions (b) and (c) exactly, reporting every violation in
/// lexicographic witness order; (a) and (d) are reported informationally.
pub fn check_ot_axioms(
    phi: &OtFunction,
    space: &FiniteMetricSpace,
) -> Result<OtAxiomReport, FunctionError> {
    let n = phi.len();
    if n != space.len() {
        return Err(FunctionError::DimensionMismatch {
            got: n,
            expected: space.len(),
        });
    }

    let mut violations = Vec::new();
    for x in 0..n {
        if !phi.values[x][x].is_zero() {
            violations.push(OtViolation::Diagonal {
                x,
                value: phi.values[x][x].clone(),
            });
        }
    }
    for x in 0..n {
        for z in 0..n {
            for y in 0..n {
                let lhs = &phi.values[x][y];
                let rhs = &phi.values[x][z] + &phi.values[z][y];
                if lhs > &rhs {
                    violations.push(OtViolation::Triangle {
                        x,
                        z,
                        y,
                        lhs: lhs.clone(),
                        rhs,
                    });
                }
            }
        }
    }

    let infima = (0..n)
        .map(|x| phi.values[x].iter().min().expect("nonempty row").clone())
        .collect();

    Ok(OtAxiomReport {
        violations,
        infima,
        lsc_note: LSC_VACUOUS,
    })
}

/// Every point paired with its exact infimum `min_y phi(x,y)`.
///
/// On a finite space with `-inf` unrepresentable every point satisfies
/// condition (d), so this returns all of them.
pub fn ot_elements(phi: &OtFunction) -> Vec<(PointId, ExtScalar)> {
    (0..phi.len())
        .map(|x| {
            let inf = phi.values[x].iter().min().expect("nonempty row").clone();
            (PointId(x), inf)
        })
        .collect()
}

/// The OT function induced by a CK function: `phi(x,y) = varphi(y) - varphi(x)`.
pub fn ck_to_ot(varphi: &CkFunction) -> OtFunction {
    let values = varphi
        .values
        .iter()
        .map(|vx| {
            varphi
                .values
                .iter()
                .map(|vy| ExtScalar::Finite(vy - vx))
                .collect()
        })
        .collect();
    OtFunction { values }
}

/// The restriction of a CK-infinity function to the ball of a CK element:
/// the ball itself, the induced subspace, and the finite restricted values.
#[derive(Clone, Debug)]
pub struct CkRestriction {
    /// Original ids of the ball members, ascending.
    pub members: Vec<PointId>,
    /// The induced metric space on the ball, labels preserved.
    pub space: FiniteMetricSpace,
    /// The restricted function on subspace indexing; all values finite.
    pub varphi: CkFunction,
}

impl CkRestriction {
    /// Maps a subspace point back to its id in the original space.
    pub fn original(&self, sub: PointId) -> PointId {
        self.members[sub.0]
    }

    /// Maps an original-space point into the subspace, if it belongs.
    pub fn to_sub(&self, original: PointId) -> Option<PointId> {
        self.members
            .iter()
            .position(|p| *p == original)
            .map(PointId)
    }
}

/// Restricts a CK-infinity function to `B_0`, the ball of the CK element
/// `x0`. Every member of `B_0` has a finite value, so the restriction is
/// an ordinary CK function on the induced subspace.
pub fn restrict_ckinf(
    phitilde: &CkInfFunction,
    x0: PointId,
    space: &FiniteMetricSpace,
) -> Result<CkRestriction, FunctionError> {
    assert_eq!(phitilde.len(), space.len(), "function/space size mismatch");
    let bound = match phitilde.value(x0) {
        ExtScalar::Finite(s) => s.clone(),
        ExtScalar::Infinity => {
            return Err(FunctionError::NotCkElement(space.label(x0).to_owned()))
        }
    };

    let ball: std::collections::BTreeSet<PointId> = space
        .points()
        .filter(|y| {
            let reach = phitilde.value(*y) + space.dist(x0, *y);
            reach <= ExtScalar::Finite(bound.clone())
        })
        .collect();
    let (sub, back) = space.subspace(&ball);
    let values = back
        .iter()
        .map(|p| {
            phitilde
                .value(*p)
                .as_finite()
                .expect("ball members of a CK element have finite values")
                .clone()
        })
        .collect();
    Ok(CkRestriction {
        members: back,
        space: sub,
        varphi: CkFunction::new(values),
    })
}

// ---------------------------------------------------------------------------
// Seeded generation
// ---------------------------------------------------------------------------

/// In-place min-plus closure (all-pairs shortest paths).
fn apsp_closure(m: &mut [Vec<Scalar>]) {
    let n = m.len();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = &m[i][k] + &m[k][j];
                if via < m[i][j] {
                    m[i][j] = via;
                }
            }
        }
    }
}

/// Closure of a zero-diagonal weight matrix over the complete digraph.
/// Returns `None` when a negative cycle drives a diagonal entry below zero.
pub(crate) fn ot_closure(mut g: Vec<Vec<Scalar>>) -> Option<Vec<Vec<Scalar>>> {
    apsp_closure(&mut g);
    let n = g.len();
    if (0..n).any(|i| g[i][i].is_negative()) {
        return None;
    }
    Some(g)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Quarter-integer in `[lo, hi]`, drawn uniformly over 4*(hi-lo)+1 steps.
fn draw_quarters(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Scalar {
    let steps = (hi - lo) * 4;
    let k = rng.random_range(0..=steps);
    Scalar::ratio(lo * 4 + k, 4)
}

/// Deterministic random metric: positive symmetric weights in
/// `[lo, hi]`, triangle-closed by all-pairs shortest paths.
pub fn generate_metric(
    seed: u64,
    n_points: usize,
    weight_range: (&Scalar, &Scalar),
) -> FiniteMetricSpace {
    assert!(n_points >= 1, "need at least one point");
    let (lo, hi) = weight_range;
    assert!(lo.is_positive() && hi >= lo, "weight range must be positive");
    let mut rng = rng_for(seed, 1);
    let mut dist = vec![vec![Scalar::zero(); n_points]; n_points];
    let span = hi - lo;
    for i in 0..n_points {
        for j in (i + 1)..n_points {
            // lo + k/16 * (hi - lo), k uniform in 0..=16
            let k = rng.random_range(0i64..=16);
            let w = lo + &(&span * &Scalar::ratio(k, 16));
            dist[i][j] = w.clone();
            dist[j][i] = w;
        }
    }
    apsp_closure(&mut dist);
    let labels = (0..n_points).map(|i| format!("p{i}")).collect();
    FiniteMetricSpace::new(labels, dist).expect("closed positive weights form a metric")
}

const OT_RETRY_BUDGET: usize = 32;

/// Deterministic random OT function on `n` points alongside its space.
///
/// The metric comes from triangle-closing random positive weights. The OT
/// matrix is the shortest-path closure of a random zero-diagonal weight
/// matrix over the complete digraph, so condition (c) holds by path
/// optimality; draws whose closure shows a negative diagonal entry
/// (negative cycle) are rejected and redrawn. After the retry budget the
/// generator falls back to `ck_to_ot` of a random CK function.
pub fn generate_ot(
    seed: u64,
    n_points: usize,
    weight_range: (&Scalar, &Scalar),
) -> (FiniteMetricSpace, OtFunction) {
    assert!(n_points >= 1, "need at least one point");
    let space = generate_metric(seed, n_points, weight_range);
    let mut rng = rng_for(seed, 2);

    for _ in 0..OT_RETRY_BUDGET {
        // Potential differences plus mostly-nonnegative slack: asymmetric,
        // frequently negative entries, negative cycles possible but rare.
        let potential: Vec<Scalar> = (0..n_points).map(|_| draw_quarters(&mut rng, 0, 4)).collect();
        let mut g = vec![vec![Scalar::zero(); n_points]; n_points];
        for (x, row) in g.iter_mut().enumerate() {
            for (y, entry) in row.iter_mut().enumerate() {
                if x == y {
                    continue;
                }
                let slack_step = rng.random_range(0i64..=17);
                let slack = Scalar::ratio(slack_step - 1, 4);
                *entry = &(&potential[y] - &potential[x]) + &slack;
            }
        }
        if let Some(closed) = ot_closure(g) {
            let values = closed
                .into_iter()
                .map(|row| row.into_iter().map(ExtScalar::Finite).collect())
                .collect();
            return (space, OtFunction { values });
        }
    }

    let varphi = generate_ck(seed, n_points);
    (space, ck_to_ot(&varphi))
}

/// Deterministic random CK function: quarter-integer values in `[0, 4]`.
pub fn generate_ck(seed: u64, n_points: usize) -> CkFunction {
    assert!(n_points >= 1);
    let mut rng = rng_for(seed, 3);
    CkFunction::new((0..n_points).map(|_| draw_quarters(&mut rng, 0, 4)).collect())
}

/// Deterministic random CK-infinity function: each value is `+inf` with
/// probability 1/4, otherwise a quarter-integer in `[0, 4]`; one point is
/// forced finite when the draw comes out constantly infinite.
pub fn generate_ckinf(seed: u64, n_points: usize) -> CkInfFunction {
    assert!(n_points >= 1);
    let mut rng = rng_for(seed, 4);
    let mut values: Vec<ExtScalar> = (0..n_points)
        .map(|_| {
            if rng.random_range(0u32..4) == 0 {
                ExtScalar::Infinity
            } else {
                ExtScalar::Finite(draw_quarters(&mut rng, 0, 4))
            }
        })
        .collect();
    if values.iter().all(|v| v.is_infinite()) {
        let idx = rng.random_range(0..n_points);
        values[idx] = ExtScalar::Finite(draw_quarters(&mut rng, 0, 4));
    }
    CkInfFunction::new(values).expect("one finite value forced")
}

/// A full generated instance: one metric space with an OT matrix, a CK
/// function and a CK-infinity function drawn from independent streams.
#[derive(Clone, Debug)]
pub struct GeneratedInstance {
    pub seed: u64,
    pub space: FiniteMetricSpace,
    pub ot: OtFunction,
    pub ck: CkFunction,
    pub ckinf: CkInfFunction,
}

/// Default weight range used by `generate_instance` and the CLI generator.
pub fn default_weight_range() -> (Scalar, Scalar) {
    (Scalar::one(), Scalar::from_int(4))
}

pub fn generate_instance(seed: u64, n_points: usize) -> GeneratedInstance {
    let (lo, hi) = default_weight_range();
    let (space, ot) = generate_ot(seed, n_points, (&lo, &hi));
    GeneratedInstance {
        seed,
        space,
        ot,
        ck: generate_ck(seed, n_points),
        ckinf: generate_ckinf(seed, n_points),
    }
}
