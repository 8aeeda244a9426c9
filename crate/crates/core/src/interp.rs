//! Interpolation matrices of linear systems and specialty verdicts.
//!
//! A system `L_D(m_1, ..., m_r)` is the space of polynomials supported on the
//! diagram `D` that vanish to order `m_i` at `r` generic points. Its condition
//! matrix has one row per derivative condition and one column per point of
//! `D`. Generic points are replaced by seeded random points of a large prime
//! field: a full-rank evaluation certifies full generic rank, while a rank
//! drop is only evidence of specialty with a Schwartz–Zippel error bound.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{Diagram, Point};
use crate::linalg::{seeded_points, FieldError, MatrixModP, PrimeField, MERSENNE_31, SECOND_PRIME};
use crate::rng;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InterpError {
    #[error("system has an empty condition matrix ({rows} rows, {cols} columns)")]
    EmptyMatrix { rows: usize, cols: usize },
    #[error("diagram has {len} points but degree {degree} needs {expected}")]
    SizeMismatch {
        len: usize,
        degree: u32,
        expected: usize,
    },
    #[error("expected {expected} point coordinates, got {got}")]
    PointCount { expected: usize, got: usize },
    #[error("diagram is special of degree {0}")]
    SpecialDiagram(u32),
    #[error("rank verdicts disagree between the two moduli for diagram {0}")]
    PrimeDisagreement(String),
    #[error("at least one trial is required")]
    NoTrials,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// `binom(m + 1, 2)`, the number of conditions imposed by a point of
/// multiplicity `m`.
pub fn conditions(m: u32) -> usize {
    let m = m as usize;
    m * (m + 1) / 2
}

/// The `m` with `binom(m + 1, 2) = size`, if `size` is triangular.
pub fn degree_for_size(size: usize) -> Option<u32> {
    (0u32..)
        .take_while(|&m| conditions(m) <= size)
        .find(|&m| conditions(m) == size)
}

/// Projective expected dimension of `L_(d,e)(mults)`.
pub fn expected_dimension(d: u32, e: u32, mults: &[u32]) -> i64 {
    expected_dimension_for_size((d as usize + 1) * (e as usize + 1), mults)
}

pub fn expected_dimension_for_size(columns: usize, mults: &[u32]) -> i64 {
    let rows: usize = mults.iter().map(|&m| conditions(m)).sum();
    (columns as i64 - rows as i64 - 1).max(-1)
}

/// A diagram together with base-point multiplicities. Zero multiplicities are
/// allowed and contribute no rows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub diagram: Diagram,
    pub multiplicities: Vec<u32>,
}

impl SystemSpec {
    pub fn new(diagram: Diagram, multiplicities: Vec<u32>) -> Self {
        SystemSpec {
            diagram,
            multiplicities,
        }
    }

    /// `L_(d,e)(mults)`, spanned over `{0..d} × {0..e}`.
    pub fn bidegree(d: u16, e: u16, multiplicities: Vec<u32>) -> Self {
        SystemSpec {
            diagram: Diagram::bidegree(d, e),
            multiplicities,
        }
    }

    pub fn row_count(&self) -> usize {
        self.multiplicities.iter().map(|&m| conditions(m)).sum()
    }

    pub fn col_count(&self) -> usize {
        self.diagram.len()
    }

    pub fn expected_dimension(&self) -> i64 {
        expected_dimension_for_size(self.col_count(), &self.multiplicities)
    }
}

/// The derivative condition `∂^(dx+dy) f / ∂X^dx ∂Y^dy (x_i, y_i) = 0`.
/// `point` is zero-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub point: usize,
    pub dx: u32,
    pub dy: u32,
}

/// Rows ordered by point, then total derivative order, then descending
/// `dx` (so `f`, `f_X`, `f_Y`, `f_XX`, `f_XY`, `f_YY`, ...).
pub fn build_matrix_rows(spec: &SystemSpec) -> Vec<ConditionRow> {
    let mut rows = Vec::with_capacity(spec.row_count());
    for (point, &m) in spec.multiplicities.iter().enumerate() {
        for order in 0..m {
            for dx in (0..=order).rev() {
                rows.push(ConditionRow {
                    point,
                    dx,
                    dy: order - dx,
                });
            }
        }
    }
    rows
}

/// `n (n-1) ... (n-k+1)`, zero when `k > n`.
fn falling_factorial(field: PrimeField, n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| field.mul(acc, u64::from(n - i)))
}

/// Evaluates the condition matrix at `points = [x_1, y_1, ..., x_r, y_r]`.
/// Columns follow the diagram's lexicographic point order.
pub fn evaluate_matrix(
    spec: &SystemSpec,
    field: PrimeField,
    points: &[u64],
) -> Result<MatrixModP, InterpError> {
    let r = spec.multiplicities.len();
    if points.len() != 2 * r {
        return Err(InterpError::PointCount {
            expected: 2 * r,
            got: points.len(),
        });
    }
    let rows = build_matrix_rows(spec);
    let cols = spec.diagram.points();
    let max_x = cols.iter().map(|p| p.x).max().unwrap_or(0) as usize;
    let max_y = cols.iter().map(|p| p.y).max().unwrap_or(0) as usize;
    let powers = |base: u64, up_to: usize| {
        let mut out = Vec::with_capacity(up_to + 1);
        let mut acc = 1 % field.modulus();
        for _ in 0..=up_to {
            out.push(acc);
            acc = field.mul(acc, base);
        }
        out
    };
    let x_pows: Vec<Vec<u64>> = (0..r)
        .map(|i| powers(field.reduce(points[2 * i]), max_x))
        .collect();
    let y_pows: Vec<Vec<u64>> = (0..r)
        .map(|i| powers(field.reduce(points[2 * i + 1]), max_y))
        .collect();
    Ok(MatrixModP::from_fn(
        field,
        rows.len(),
        cols.len(),
        |i, j| {
            let row = rows[i];
            let Point { x, y } = cols[j];
            let (x, y) = (u32::from(x), u32::from(y));
            if row.dx > x || row.dy > y {
                return 0;
            }
            let coeff = field.mul(
                falling_factorial(field, x, row.dx),
                falling_factorial(field, y, row.dy),
            );
            let mono = field.mul(
                x_pows[row.point][(x - row.dx) as usize],
                y_pows[row.point][(y - row.dy) as usize],
            );
            field.mul(coeff, mono)
        },
    ))
}

/// Field, base seed and trial count for randomized rank tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalConfig {
    pub field: PrimeField,
    pub seed: u64,
    pub trials: u32,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            field: PrimeField::default(),
            seed: 0,
            trials: 3,
        }
    }
}

impl EvalConfig {
    /// Seed of the `k`-th trial; its points are `seeded_points(field, seed, r)`.
    pub fn trial_seed(&self, k: u32) -> u64 {
        rng::derive_seed(self.seed, rng::labels::TRIAL_BASE + u64::from(k))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    /// Some evaluation reached full rank, so the generic matrix has full rank.
    NonSpecialCertified,
    /// Every evaluation was rank deficient.
    ProbablySpecial,
}

/// Outcome of [`specialty_test`].
///
/// `empty_by_count` records that there are more conditions than monomials;
/// it is a statement about counts only and does not affect `kind`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecialtyVerdict {
    pub kind: VerdictKind,
    /// Best rank over all trials.
    pub rank: usize,
    pub rows: usize,
    pub cols: usize,
    pub edim: i64,
    /// Seed whose points achieved full rank (certified verdicts only).
    pub witness_seed: Option<u64>,
    pub trials: u32,
    /// Schwartz–Zippel bound for a single trial.
    pub per_trial_bound: Option<f64>,
    /// Upper bound on the probability that a probably-special verdict is wrong.
    pub confidence: Option<f64>,
    pub empty_by_count: bool,
}

impl SpecialtyVerdict {
    pub fn is_special(&self) -> bool {
        self.kind == VerdictKind::ProbablySpecial
    }
}

/// Degree bound for a maximal minor: `min(rows, cols) · max(x + y)`.
fn minor_degree_bound(spec: &SystemSpec) -> u64 {
    let top = spec
        .diagram
        .points()
        .iter()
        .map(|p| u64::from(p.x) + u64::from(p.y))
        .max()
        .unwrap_or(0);
    spec.row_count().min(spec.col_count()) as u64 * top
}

/// Randomized specialty test of `spec`.
pub fn specialty_test(
    spec: &SystemSpec,
    config: &EvalConfig,
) -> Result<SpecialtyVerdict, InterpError> {
    if config.trials == 0 {
        return Err(InterpError::NoTrials);
    }
    let (rows, cols) = (spec.row_count(), spec.col_count());
    if rows == 0 || cols == 0 {
        return Err(InterpError::EmptyMatrix { rows, cols });
    }
    let full = rows.min(cols);
    let r = spec.multiplicities.len();
    let mut best = 0;
    let mut witness = None;
    for k in 0..config.trials {
        let seed = config.trial_seed(k);
        let m = evaluate_matrix(spec, config.field, &seeded_points(config.field, seed, r))?;
        let rank = m.rank();
        best = best.max(rank);
        if rank == full {
            witness = Some(seed);
            break;
        }
    }
    let (kind, per_trial_bound, confidence) = match witness {
        Some(_) => (VerdictKind::NonSpecialCertified, None, None),
        None => {
            let bound =
                (minor_degree_bound(spec) as f64 / (config.field.modulus() - 1) as f64).min(1.0);
            (
                VerdictKind::ProbablySpecial,
                Some(bound),
                Some(bound.powi(config.trials as i32)),
            )
        }
    };
    Ok(SpecialtyVerdict {
        kind,
        rank: best,
        rows,
        cols,
        edim: spec.expected_dimension(),
        witness_seed: witness,
        trials: config.trials,
        per_trial_bound,
        confidence,
        empty_by_count: rows > cols,
    })
}

/// Matrix of the monomials `X^a Y^b` (`a + b < degree`) at the points of `d`,
/// rows indexed by points.
pub fn vanishing_matrix(d: &Diagram, degree: u32, field: PrimeField) -> MatrixModP {
    let monomials: Vec<(u32, u32)> = (0..degree)
        .flat_map(|t| (0..=t).rev().map(move |a| (a, t - a)))
        .collect();
    let pts = d.points();
    MatrixModP::from_fn(field, pts.len(), monomials.len(), |i, j| {
        let (a, b) = monomials[j];
        field.mul(
            field.pow(u64::from(pts[i].x), u64::from(a)),
            field.pow(u64::from(pts[i].y), u64::from(b)),
        )
    })
}

/// True iff some nonzero polynomial of total degree `< degree` vanishes on
/// every point of `d`, i.e. `d` is special of that degree.
///
/// The check is a rank test over both `2^31 - 1` and `2^31 - 19`; if they
/// disagree the result is an error rather than a verdict.
pub fn diagram_degree_specialty(d: &Diagram, degree: u32) -> Result<bool, InterpError> {
    let expected = conditions(degree);
    if d.len() != expected {
        return Err(InterpError::SizeMismatch {
            len: d.len(),
            degree,
            expected,
        });
    }
    let mut verdicts = [MERSENNE_31, SECOND_PRIME].into_iter().map(|p| {
        let field = PrimeField::new(p).expect("fixed primes");
        vanishing_matrix(d, degree, field).rank() < expected
    });
    let first = verdicts.next().expect("two primes");
    if verdicts.all(|v| v == first) {
        Ok(first)
    } else {
        Err(InterpError::PrimeDisagreement(d.to_string()))
    }
}

/// Specialty of a diagram whose size is triangular, at its inferred degree.
pub fn is_special_diagram(d: &Diagram) -> Result<bool, InterpError> {
    let degree = degree_for_size(d.len()).ok_or(InterpError::SizeMismatch {
        len: d.len(),
        degree: 0,
        expected: 0,
    })?;
    diagram_degree_specialty(d, degree)
}

/// Exponents `(a, b)` with `det M_D(m) = A · x^a · y^b` for a non-special
/// diagram of size `binom(m+1, 2)`: the coordinate sums of `D` minus the sum
/// of derivative orders over the rows, which is `binom(m+1, 3)` per axis.
pub fn monomial_exponents(d: &Diagram, degree: u32) -> (i64, i64) {
    let (sx, sy) = d.coordinate_sums();
    let m = i64::from(degree);
    let shift = (m + 1) * m * (m - 1) / 6;
    (sx as i64 - shift, sy as i64 - shift)
}

/// Checks the monomial form of the single-point determinant by evaluating it
/// at `(x, y)` and `(x t, y u)` and comparing the ratio with `t^a u^b`.
pub fn single_point_monomial_check(
    d: &Diagram,
    degree: u32,
    seed: u64,
) -> Result<bool, InterpError> {
    if diagram_degree_specialty(d, degree)? {
        return Err(InterpError::SpecialDiagram(degree));
    }
    let field = PrimeField::default();
    let spec = SystemSpec::new(d.clone(), vec![degree]);
    let draw = seeded_points(
        field,
        rng::derive_seed(seed, rng::labels::MONOMIAL_CHECK),
        2,
    );
    let (x, y, t, u) = (draw[0], draw[1], draw[2], draw[3]);
    let det_at = |px: u64, py: u64| -> Result<u64, InterpError> {
        Ok(evaluate_matrix(&spec, field, &[px, py])?
            .determinant()
            .expect("square"))
    };
    let base = det_at(x, y)?;
    let scaled = det_at(field.mul(x, t), field.mul(y, u))?;
    let (a, b) = monomial_exponents(d, degree);
    let factor = field.mul(field.pow_signed(t, a), field.pow_signed(u, b));
    Ok(base != 0 && scaled == field.mul(base, factor))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(coords: &[(u16, u16)]) -> Diagram {
        Diagram::from_coords(coords).unwrap()
    }

    #[test]
    fn expected_dimension_examples() {
        assert_eq!(expected_dimension(1, 1, &[]), 3);
        assert_eq!(expected_dimension(2, 2, &[2, 2, 2]), -1);
        assert_eq!(expected_dimension(4, 5, &[3, 3, 3, 3, 3]), -1);
        assert_eq!(expected_dimension(3, 3, &[2]), 12);
    }

    #[test]
    fn triangular_sizes() {
        assert_eq!(degree_for_size(0), Some(0));
        assert_eq!(degree_for_size(1), Some(1));
        assert_eq!(degree_for_size(3), Some(2));
        assert_eq!(degree_for_size(6), Some(3));
        assert_eq!(degree_for_size(10), Some(4));
        assert_eq!(degree_for_size(4), None);
    }

    #[test]
    fn row_order() {
        let rows = |mults: Vec<u32>| {
            build_matrix_rows(&SystemSpec::new(d(&[(0, 0)]), mults))
                .into_iter()
                .map(|r| (r.point, r.dx, r.dy))
                .collect::<Vec<_>>()
        };
        assert_eq!(rows(vec![1]), vec![(0, 0, 0)]);
        assert_eq!(rows(vec![2]), vec![(0, 0, 0), (0, 1, 0), (0, 0, 1)]);
        let r = rows(vec![3, 1]);
        assert_eq!(r.len(), 7);
        assert_eq!(r.iter().filter(|x| x.0 == 0).count(), 6);
        assert_eq!(r[6], (1, 0, 0));
        assert_eq!(&r[3..6], &[(0, 2, 0), (0, 1, 1), (0, 0, 2)]);
        assert!(rows(vec![0, 0]).is_empty());
    }

    #[test]
    fn evaluate_examples() {
        let f = PrimeField::default();
        let one = evaluate_matrix(&SystemSpec::new(d(&[(0, 0)]), vec![1]), f, &[17, 23]).unwrap();
        assert_eq!((one.rows(), one.cols(), one.get(0, 0)), (1, 1, 1));

        // Columns 1, Y, X, XY in lexicographic order; the f_X row is
        // (0, 0, 1, y).
        let (x, y) = (5, 9);
        let sq = evaluate_matrix(
            &SystemSpec::new(Diagram::rectangle(2, 2), vec![2]),
            f,
            &[x, y],
        )
        .unwrap();
        assert_eq!(sq.row(0), &[1, y, x, x * y]);
        assert_eq!(sq.row(1), &[0, 0, 1, y]);
        assert_eq!(sq.row(2), &[0, 1, 0, x]);

        let column = evaluate_matrix(
            &SystemSpec::new(Diagram::rectangle(1, 4), vec![2]),
            f,
            &[3, 4],
        )
        .unwrap();
        assert!(column.row(1).iter().all(|&v| v == 0));

        assert!(evaluate_matrix(&SystemSpec::new(d(&[(0, 0)]), vec![1]), f, &[1]).is_err());
    }

    #[test]
    fn zero_multiplicity_adds_nothing() {
        let f = PrimeField::default();
        let base = SystemSpec::new(Diagram::rectangle(3, 2), vec![2]);
        let padded = SystemSpec::new(Diagram::rectangle(3, 2), vec![2, 0]);
        let a = evaluate_matrix(&base, f, &[11, 13]).unwrap();
        let b = evaluate_matrix(&padded, f, &[11, 13, 99, 98]).unwrap();
        assert_eq!(a, b);
    }

    fn det3(m: [[i128; 3]; 3]) -> i128 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    #[test]
    fn l11_double_point_is_non_special() {
        // M for L_(1,1)(2), columns 1, Y, X, XY: rows (1, y, x, xy),
        // (0, 0, 1, y), (0, 1, 0, x). The minor on columns {1, Y, X} is
        // det [[1, y, x], [0, 0, 1], [0, 1, 0]] = -1 for every (x, y).
        for (x, y) in [(2i128, 3i128), (7, 1), (0, 0)] {
            assert_eq!(det3([[1, y, x], [0, 0, 1], [0, 1, 0]]), -1);
        }
        let v =
            specialty_test(&SystemSpec::bidegree(1, 1, vec![2]), &EvalConfig::default()).unwrap();
        assert_eq!(v.kind, VerdictKind::NonSpecialCertified);
        assert_eq!((v.rank, v.rows, v.cols), (3, 3, 4));
        assert!(v.witness_seed.is_some());
    }

    #[test]
    fn known_special_systems() {
        let cfg = EvalConfig::default();
        let v = specialty_test(&SystemSpec::bidegree(2, 2, vec![2, 2, 2]), &cfg).unwrap();
        assert_eq!(v.kind, VerdictKind::ProbablySpecial);
        assert!(v.confidence.unwrap() < 1e-15);
        let v = specialty_test(&SystemSpec::bidegree(0, 3, vec![2]), &cfg).unwrap();
        assert_eq!(v.kind, VerdictKind::ProbablySpecial);
        assert!(specialty_test(&SystemSpec::bidegree(1, 1, vec![]), &cfg).is_err());
        assert!(specialty_test(&SystemSpec::bidegree(1, 1, vec![0]), &cfg).is_err());
        let no_trials = EvalConfig { trials: 0, ..cfg };
        assert_eq!(
            specialty_test(&SystemSpec::bidegree(1, 1, vec![1]), &no_trials),
            Err(InterpError::NoTrials)
        );
    }

    #[test]
    fn witness_replays() {
        let cfg = EvalConfig {
            seed: 42,
            ..EvalConfig::default()
        };
        let spec = SystemSpec::bidegree(3, 4, vec![3, 2, 2]);
        let v = specialty_test(&spec, &cfg).unwrap();
        let seed = v.witness_seed.unwrap();
        let m = evaluate_matrix(&spec, cfg.field, &seeded_points(cfg.field, seed, 3)).unwrap();
        assert_eq!(m.rank(), v.rows.min(v.cols));
    }

    #[test]
    fn degree_specialty_examples() {
        assert!(diagram_degree_specialty(&d(&[(0, 0), (1, 0), (2, 0)]), 2).unwrap());
        assert!(!diagram_degree_specialty(&d(&[(0, 0), (1, 0), (0, 1)]), 2).unwrap());
        assert!(diagram_degree_specialty(&Diagram::rectangle(2, 3), 3).unwrap());
        let triangle = d(&[(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (0, 2)]);
        assert!(!diagram_degree_specialty(&triangle, 3).unwrap());
        assert!(matches!(
            diagram_degree_specialty(&triangle, 2),
            Err(InterpError::SizeMismatch {
                len: 6,
                degree: 2,
                expected: 3
            })
        ));
    }

    #[test]
    fn monomial_form_examples() {
        // Singleton: the 1x1 matrix is x^a y^b itself.
        let single = d(&[(4, 2)]);
        assert_eq!(monomial_exponents(&single, 1), (4, 2));
        assert!(single_point_monomial_check(&single, 1, 1).unwrap());

        // L-tromino, columns 1, Y, X: det [[1, y, x], [0, 0, 1], [0, 1, 0]] = -1,
        // a constant, so both exponents are zero.
        let l = d(&[(0, 0), (1, 0), (0, 1)]);
        assert_eq!(monomial_exponents(&l, 2), (0, 0));
        let f = PrimeField::default();
        let m = evaluate_matrix(&SystemSpec::new(l.clone(), vec![2]), f, &[123, 456]).unwrap();
        assert_eq!(m.determinant(), Some(f.neg(1)));
        assert!(single_point_monomial_check(&l, 2, 1).unwrap());

        let triangle = d(&[(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (0, 2)]);
        for seed in 0..4 {
            assert!(single_point_monomial_check(&triangle, 3, seed).unwrap());
        }
        assert!(matches!(
            single_point_monomial_check(&d(&[(0, 0), (1, 0), (2, 0)]), 2, 0),
            Err(InterpError::SpecialDiagram(2))
        ));
    }
}
