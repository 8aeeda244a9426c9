//! The classification predicate for `L_(d,e)(1^p, 2^q, 3^r)` and a sweep that
//! compares it with randomized rank verdicts.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::interp::{specialty_test, EvalConfig, InterpError, SystemSpec};
use crate::linalg::PrimeField;
use crate::rng;

/// Bidegree `(d, e)` with `d ≤ e` and `p`, `q`, `r` points of multiplicity
/// 1, 2 and 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassificationCase {
    pub d: u32,
    pub e: u32,
    pub p: u32,
    pub q: u32,
    pub r: u32,
}

impl ClassificationCase {
    /// Swaps `d` and `e` if needed; specialty is symmetric under transposition.
    pub fn new(d: u32, e: u32, p: u32, q: u32, r: u32) -> Self {
        let (d, e) = if d <= e { (d, e) } else { (e, d) };
        ClassificationCase { d, e, p, q, r }
    }

    /// Multiplicities in descending order.
    pub fn multiplicities(&self) -> Vec<u32> {
        let mut m = vec![3; self.r as usize];
        m.extend(std::iter::repeat_n(2, self.q as usize));
        m.extend(std::iter::repeat_n(1, self.p as usize));
        m
    }

    pub fn spec(&self) -> SystemSpec {
        SystemSpec::bidegree(self.d as u16, self.e as u16, self.multiplicities())
    }

    /// The same system on the transposed rectangle.
    pub fn transposed_spec(&self) -> SystemSpec {
        SystemSpec::bidegree(self.e as u16, self.d as u16, self.multiplicities())
    }

    /// Number of conditions `p + 3q + 6r`.
    pub fn conditions(&self) -> u32 {
        self.p + 3 * self.q + 6 * self.r
    }

    fn label(&self) -> u64 {
        let mut x = 0u64;
        for v in [self.d, self.e, self.p, self.q, self.r] {
            x = x << 12 | u64::from(v & 0xfff);
        }
        x
    }
}

impl fmt::Display for ClassificationCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{},{})",
            self.d, self.e, self.p, self.q, self.r
        )
    }
}

/// Which special family a case belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpecialFamily {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "3.1")]
    ThreeOne,
    #[serde(rename = "3.2")]
    ThreeTwo,
    #[serde(rename = "3.3")]
    ThreeThree,
    #[serde(rename = "3.4")]
    ThreeFour,
    #[serde(rename = "4")]
    Four,
}

/// The special family containing `c`, if any. `c` must be normalized.
///
/// The family for `d = 0` reads `p + 2q + 3r ≤ e` and (`q ≥ 1` or `r ≥ 1`).
pub fn special_family(c: &ClassificationCase) -> Option<SpecialFamily> {
    let ClassificationCase { d, e, p, q, r } = *c;
    match d {
        0 if p + 2 * q + 3 * r <= e && (q >= 1 || r >= 1) => Some(SpecialFamily::Zero),
        1 if p + 3 * q + 5 * r <= 2 * e + 1 && r >= 1 => Some(SpecialFamily::One),
        2 if p == 0 && e + 1 == q + 2 * r && (q + r) % 2 == 1 => Some(SpecialFamily::Two),
        3 => {
            let n = e / 3;
            if n == 0 {
                return None;
            }
            match e % 3 {
                0 if p == 0 && q == 0 && r == 2 * n + 1 => Some(SpecialFamily::ThreeOne),
                0 if p <= 1 && q == 1 && r == 2 * n => Some(SpecialFamily::ThreeTwo),
                1 if p <= 2 && q == 0 && r == 2 * n + 1 => Some(SpecialFamily::ThreeThree),
                2 if p == 0 && q == 2 && r == 2 * n + 1 => Some(SpecialFamily::ThreeFour),
                _ => None,
            }
        }
        4 if e == 5 && p == 0 && q == 0 && r == 5 => Some(SpecialFamily::Four),
        _ => None,
    }
}

pub fn predicted_special(c: &ClassificationCase) -> bool {
    special_family(c).is_some()
}

/// Every normalized case with `d ≤ e ≤ max_e`, at least one point, and
/// `p + 3q + 6r ≤ (d+1)(e+1) + slack`, in increasing order.
pub fn cases_in_range(max_e: u32, slack: u32) -> Vec<ClassificationCase> {
    let mut out = Vec::new();
    for e in 0..=max_e {
        for d in 0..=e {
            let limit = (d + 1) * (e + 1) + slack;
            for p in 0..=limit {
                for q in 0..=(limit - p) / 3 {
                    for r in 0..=(limit - p - 3 * q) / 6 {
                        if p + q + r > 0 {
                            out.push(ClassificationCase { d, e, p, q, r });
                        }
                    }
                }
            }
        }
    }
    out.sort();
    out
}

/// A case where the predicate and the rank test disagree, with what is
/// needed to reproduce the rank test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub case: ClassificationCase,
    pub predicted_special: bool,
    pub observed_special: bool,
    pub case_seed: u64,
    pub rank: usize,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeReport {
    pub max_e: u32,
    pub slack: u32,
    pub seed: u64,
    pub trials: u32,
    pub prime: u64,
    pub cases_checked: usize,
    /// Cases both sides call special, with their family.
    pub special_agreed: Vec<(ClassificationCase, SpecialFamily)>,
    pub discrepancies: Vec<Discrepancy>,
    /// Largest bound on the error probability of any special verdict.
    pub worst_special_error_bound: f64,
}

/// Seed of the rank test for one case, derived from the sweep seed.
pub fn case_seed(seed: u64, c: &ClassificationCase) -> u64 {
    rng::derive_seed(seed, c.label())
}

/// Compares [`predicted_special`] with [`specialty_test`] on every case of
/// [`cases_in_range`]. Cases run in parallel; the report is in case order.
pub fn verify_range(
    max_e: u32,
    slack: u32,
    seed: u64,
    trials: u32,
    field: PrimeField,
) -> Result<RangeReport, InterpError> {
    let cases = cases_in_range(max_e, slack);
    let results: Vec<Result<_, InterpError>> = cases
        .par_iter()
        .map(|c| {
            let config = EvalConfig {
                field,
                seed: case_seed(seed, c),
                trials,
            };
            specialty_test(&c.spec(), &config).map(|v| (config.seed, v))
        })
        .collect();
    let mut report = RangeReport {
        max_e,
        slack,
        seed,
        trials,
        prime: field.modulus(),
        cases_checked: cases.len(),
        special_agreed: Vec::new(),
        discrepancies: Vec::new(),
        worst_special_error_bound: 0.0,
    };
    for (c, res) in cases.iter().zip(results) {
        let (case_seed, v) = res?;
        let family = special_family(c);
        if v.is_special() {
            report.worst_special_error_bound = report
                .worst_special_error_bound
                .max(v.confidence.unwrap_or(1.0));
        }
        if family.is_some() != v.is_special() {
            report.discrepancies.push(Discrepancy {
                case: *c,
                predicted_special: family.is_some(),
                observed_special: v.is_special(),
                case_seed,
                rank: v.rank,
                rows: v.rows,
                cols: v.cols,
            });
        } else if let Some(f) = family {
            report.special_agreed.push((*c, f));
        }
    }
    Ok(report)
}
