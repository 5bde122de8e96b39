//! Shared fixtures for unit tests across modules.

use crate::functions::{CkFunction, CkInfFunction, OtFunction};
use crate::scalar::{ExtScalar, Scalar};
use crate::space::FiniteMetricSpace;

/// Three points a, b, c on a line: d(a,b) = 1, d(a,c) = 2, d(b,c) = 1.
pub fn line_space() -> FiniteMetricSpace {
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

/// Four integer points 0..3 with d = |x - y|.
pub fn four_line_space() -> FiniteMetricSpace {
    let labels = (0..4).map(|i| i.to_string()).collect();
    let dist = (0..4i64)
        .map(|i| (0..4i64).map(|j| Scalar::from_int((i - j).abs())).collect())
        .collect();
    FiniteMetricSpace::new(labels, dist).unwrap()
}

/// The CK function (3, 1, 0) on the three-point line space.
pub fn golden_ck() -> CkFunction {
    CkFunction::new(vec![
        Scalar::from_int(3),
        Scalar::from_int(1),
        Scalar::from_int(0),
    ])
}

/// The CK-infinity function (+inf, 1, 0) on the three-point line space.
pub fn golden_ckinf() -> CkInfFunction {
    CkInfFunction::new(vec![
        ExtScalar::Infinity,
        ExtScalar::from_int(1),
        ExtScalar::from_int(0),
    ])
    .unwrap()
}

pub fn int_matrix(rows: &[&[i64]]) -> OtFunction {
    OtFunction::new(
        rows.iter()
            .map(|row| row.iter().map(|&v| ExtScalar::from_int(v)).collect())
            .collect(),
    )
    .unwrap()
}

/// The piecewise function from the paper's remark, truncated to the four
/// point line: phi(x,y) = x - y for x != 0 and phi(0,y) = 0. Its checker
/// report shows a condition (c) violation at (0,1,2).
pub fn remark_truncation() -> (FiniteMetricSpace, OtFunction) {
    let phi = int_matrix(&[
        &[0, 0, 0, 0],
        &[1, 0, -1, -2],
        &[2, 1, 0, -1],
        &[3, 2, 1, 0],
    ]);
    (four_line_space(), phi)
}
