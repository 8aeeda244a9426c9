//! Checks and generators shared by the property suite and the acceptance
//! binary. Each check returns `Err(description)` on a violation.

#![allow(dead_code)]

use std::ops::ControlFlow;

use proptest::prelude::*;
use tilecert_core::interp::{
    build_matrix_rows, diagram_degree_specialty, evaluate_matrix, single_point_monomial_check,
};
use tilecert_core::linalg::seeded_points;
use tilecert_core::tiling::{for_each_congruent, precedes};
use tilecert_core::{is_stable, Diagram, Isometry, PrimeField, Rational, SystemSpec, Tiling};

pub type Check = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// A diagram with 1 to `max_len` points in a `side × side` box.
pub fn diagram(max_len: usize, side: u16) -> impl Strategy<Value = Diagram> {
    prop::collection::btree_set((0..side, 0..side), 1..=max_len)
        .prop_map(|s| Diagram::from_coords(&s.into_iter().collect::<Vec<_>>()).unwrap())
}

/// A diagram of exactly `len` points in a `side × side` box.
pub fn diagram_of_size(len: usize, side: u16) -> impl Strategy<Value = Diagram> {
    let cells: Vec<(u16, u16)> = (0..side)
        .flat_map(|x| (0..side).map(move |y| (x, y)))
        .collect();
    prop::sample::subsequence(cells, len).prop_map(|c| Diagram::from_coords(&c).unwrap())
}

/// A diagram of size 1, 3 or 6.
pub fn small_triangular(side: u16) -> impl Strategy<Value = Diagram> {
    prop_oneof![
        diagram_of_size(1, side),
        diagram_of_size(3, side),
        diagram_of_size(6, side)
    ]
}

pub fn isometry() -> impl Strategy<Value = Isometry> {
    (0..8usize).prop_map(|i| Isometry::ALL[i])
}

/// A diagram split into up to `parts` non-empty pieces.
pub fn partition(max_len: usize, side: u16, parts: usize) -> impl Strategy<Value = Vec<Diagram>> {
    diagram(max_len, side).prop_flat_map(move |d| {
        let n = d.len();
        prop::collection::vec(0..parts, n).prop_map(move |labels| {
            (0..parts)
                .filter_map(|k| {
                    let pts = d
                        .points()
                        .iter()
                        .zip(&labels)
                        .filter(|(_, &l)| l == k)
                        .map(|(p, _)| *p);
                    Diagram::new(pts).ok()
                })
                .collect()
        })
    })
}

/// Multiplicity lists of points of multiplicity 1 to 3 whose condition
/// count is at most `max_rows`.
fn square_multiplicities(max_rows: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for r in 0..=max_rows / 6 {
        for q in 0..=(max_rows - 6 * r) / 3 {
            for p in 0..=max_rows - 6 * r - 3 * q {
                if p + q + r == 0 {
                    continue;
                }
                let mut m = vec![3; r];
                m.extend(std::iter::repeat_n(2, q));
                m.extend(std::iter::repeat_n(1, p));
                out.push(m);
            }
        }
    }
    out
}

/// A square spec: the diagram has exactly as many points as conditions.
pub fn square_spec(max_cells: usize, side: u16) -> impl Strategy<Value = SystemSpec> {
    prop::sample::select(square_multiplicities(max_cells)).prop_flat_map(move |mults| {
        let n = mults.iter().map(|&m| (m * (m + 1) / 2) as usize).sum();
        (Just(mults), diagram_of_size(n, side), any::<bool>()).prop_map(|(mults, d, reverse)| {
            let mut mults = mults;
            if reverse {
                mults.reverse();
            }
            SystemSpec::new(d, mults)
        })
    })
}

pub fn any_spec(max_cells: usize, side: u16) -> impl Strategy<Value = SystemSpec> {
    (
        diagram(max_cells, side),
        prop::collection::vec(0u32..4, 0..5),
    )
        .prop_map(|(d, m)| SystemSpec::new(d, m))
}

fn moved(d: &Diagram, g: Isometry, dx: u16, dy: u16) -> Diagram {
    d.transformed(g)
        .translate(i64::from(dx), i64::from(dy))
        .unwrap()
}

/// `Σ #D_j ‖c(D_j)‖² + i(D_j) = Σ_{d ∈ ∪D_j} ‖d‖²` for a partition.
pub fn parallel_axis(parts: &[Diagram]) -> Check {
    let lhs: Rational = parts
        .iter()
        .map(|d| {
            let (cx, cy) = d.center_of_mass();
            Rational::from(d.len() as i128) * (cx * cx + cy * cy) + d.inertia()
        })
        .sum();
    let rhs: i128 = parts.iter().map(Diagram::norm_sq_sum).sum();
    ensure(lhs == Rational::from(rhs), || {
        format!("{lhs} != {rhs} for {parts:?}")
    })
}

/// The balance identity on both sides of every congruent re-partition.
pub fn congruent_balance(t: &Tiling) -> Check {
    let mut result = Ok(());
    for_each_congruent(t, false, |parts| {
        result = parallel_axis(parts).and_then(|_| parallel_axis(t.tiles()));
        if result.is_err() {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })
    .map_err(|e| e.to_string())?;
    result
}

pub fn inertia_invariant(d: &Diagram, g: Isometry, dx: u16, dy: u16) -> Check {
    let e = moved(d, g, dx, dy);
    ensure(d.inertia() == e.inertia(), || {
        format!("inertia of {d} differs from {e}")
    })
}

pub fn stability_invariant(d: &Diagram, g: Isometry, dx: u16, dy: u16) -> Check {
    let e = moved(d, g, dx, dy);
    let a = is_stable(d).map_err(|x| x.to_string())?.stable;
    let b = is_stable(&e).map_err(|x| x.to_string())?.stable;
    let c = is_stable(&d.canonical_form())
        .map_err(|x| x.to_string())?
        .stable;
    ensure(a == b && a == c, || {
        format!("stability of {d} ({a}), {e} ({b}), canonical ({c})")
    })
}

pub fn specialty_invariant(d: &Diagram, g: Isometry, dx: u16, dy: u16) -> Check {
    let m = tilecert_core::interp::degree_for_size(d.len()).ok_or("not triangular")?;
    let e = moved(d, g, dx, dy);
    let a = diagram_degree_specialty(d, m).map_err(|x| x.to_string())?;
    let b = diagram_degree_specialty(&e, m).map_err(|x| x.to_string())?;
    ensure(a == b, || {
        format!("degree specialty of {d} ({a}) and {e} ({b})")
    })
}

pub fn precedes_translation(a: &Diagram, b: &Diagram, dx: u16, dy: u16) -> Check {
    let (ta, tb) = (
        a.translate(i64::from(dx), i64::from(dy)).unwrap(),
        b.translate(i64::from(dx), i64::from(dy)).unwrap(),
    );
    ensure(
        precedes(a, b) == precedes(&ta, &tb) && precedes(b, a) == precedes(&tb, &ta),
        || format!("precedes changes under joint shift ({dx},{dy}) of {a}, {b}"),
    )
}

pub fn matrix_shape(spec: &SystemSpec, seed: u64) -> Check {
    let field = PrimeField::default();
    let rows: usize = spec
        .multiplicities
        .iter()
        .map(|&m| (m * (m + 1) / 2) as usize)
        .sum();
    let pts = seeded_points(field, seed, spec.multiplicities.len());
    let m = evaluate_matrix(spec, field, &pts).map_err(|e| e.to_string())?;
    ensure(
        m.rows() == rows
            && m.cols() == spec.diagram.len()
            && spec.row_count() == rows
            && spec.col_count() == spec.diagram.len()
            && build_matrix_rows(spec).len() == rows,
        || format!("shape {}x{} for {spec:?}", m.rows(), m.cols()),
    )
}

/// For a non-special triangular diagram, the one-point determinant scales
/// as a monomial. Special diagrams are skipped.
pub fn monomial_scaling(d: &Diagram, seed: u64) -> Check {
    let m = tilecert_core::interp::degree_for_size(d.len()).ok_or("not triangular")?;
    if diagram_degree_specialty(d, m).map_err(|e| e.to_string())? {
        return Ok(());
    }
    let ok = single_point_monomial_check(d, m, seed).map_err(|e| e.to_string())?;
    ensure(ok, || {
        format!("monomial scaling fails for {d} with seed {seed}")
    })
}

fn sign_of(order: &[usize]) -> bool {
    let mut inversions = 0;
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            if order[i] > order[j] {
                inversions += 1;
            }
        }
    }
    inversions % 2 == 1
}

/// Signed sum over all ways to give each point block its own column set of
/// the right size, of the product of the block minors.
pub fn laplace_expansion(m: &tilecert_core::MatrixModP, blocks: &[std::ops::Range<usize>]) -> u64 {
    fn go(
        m: &tilecert_core::MatrixModP,
        blocks: &[std::ops::Range<usize>],
        k: usize,
        free: &mut [usize],
        order: &mut Vec<usize>,
        acc: u64,
        total: &mut u64,
    ) {
        let f = m.field();
        if k == blocks.len() {
            let term = if sign_of(order) { f.neg(acc) } else { acc };
            *total = f.add(*total, term);
            return;
        }
        let size = blocks[k].len();
        let rows: Vec<usize> = blocks[k].clone().collect();
        let mut choose = Vec::with_capacity(size);
        subsets(free.to_vec(), size, 0, &mut choose, &mut |cols| {
            let minor = m
                .select_rows(&rows)
                .select_columns(cols)
                .determinant()
                .unwrap();
            if minor == 0 {
                return;
            }
            let mut rest: Vec<usize> = free.iter().copied().filter(|c| !cols.contains(c)).collect();
            let before = order.len();
            order.extend_from_slice(cols);
            go(m, blocks, k + 1, &mut rest, order, f.mul(acc, minor), total);
            order.truncate(before);
        });
    }
    fn subsets(
        pool: Vec<usize>,
        size: usize,
        start: usize,
        chosen: &mut Vec<usize>,
        sink: &mut dyn FnMut(&[usize]),
    ) {
        if chosen.len() == size {
            sink(chosen);
            return;
        }
        for i in start..pool.len() {
            chosen.push(pool[i]);
            subsets(pool.clone(), size, i + 1, chosen, sink);
            chosen.pop();
        }
    }
    let mut total = 0;
    let mut free: Vec<usize> = (0..m.cols()).collect();
    go(m, blocks, 0, &mut free, &mut Vec::new(), 1, &mut total);
    total
}

/// `det M` equals its expansion along the row blocks of the points.
pub fn laplace(spec: &SystemSpec, seed: u64) -> Check {
    let field = PrimeField::default();
    let pts = seeded_points(field, seed, spec.multiplicities.len());
    let m = evaluate_matrix(spec, field, &pts).map_err(|e| e.to_string())?;
    let det = m.determinant().ok_or("matrix is not square")?;
    let mut blocks = Vec::new();
    let mut start = 0;
    for &k in &spec.multiplicities {
        let len = (k * (k + 1) / 2) as usize;
        blocks.push(start..start + len);
        start += len;
    }
    let expansion = laplace_expansion(&m, &blocks);
    ensure(det == expansion, || {
        format!("det {det} != expansion {expansion} for {spec:?} seed {seed}")
    })
}
