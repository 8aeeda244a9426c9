//! Tilings, congruence, the column-precedence relation, and two uniqueness
//! tests: the sufficient condition (stable tiles whose precedence relation
//! extends to a partial order) and a brute-force oracle that enumerates every
//! congruent re-partition of the union.

use std::collections::HashMap;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{Diagram, Point};
use crate::interp::{degree_for_size, diagram_degree_specialty, InterpError};
use crate::stability::{is_stable, StabilityError};

/// Largest union the brute-force oracle accepts.
pub const ORACLE_MAX_CELLS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TilingError {
    #[error("a tiling needs at least one tile")]
    Empty,
    #[error("tiles {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("tile {0} has {1} points, which is not a triangular number")]
    NotTriangular(usize, usize),
    #[error("tile {0} does not project onto a segment of columns")]
    ProjectionNotSegment(usize),
    #[error("pairwise antisymmetry and acyclicity of the precedence relation disagree")]
    ObservationDisagreement,
    #[error("union has {0} cells; the oracle handles at most {ORACLE_MAX_CELLS}")]
    UnionTooLarge(usize),
    #[error("malformed tiling: {0}")]
    Parse(String),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error(transparent)]
    Interp(#[from] InterpError),
}

/// A set of pairwise-disjoint diagrams, each of triangular size. Tiles are
/// kept in canonical order (by their sorted point lists).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Tiling {
    tiles: Vec<Diagram>,
}

impl Tiling {
    pub fn new(mut tiles: Vec<Diagram>) -> Result<Self, TilingError> {
        if tiles.is_empty() {
            return Err(TilingError::Empty);
        }
        tiles.sort();
        for (i, t) in tiles.iter().enumerate() {
            if degree_for_size(t.len()).is_none() {
                return Err(TilingError::NotTriangular(i, t.len()));
            }
        }
        for i in 0..tiles.len() {
            for j in i + 1..tiles.len() {
                if !tiles[i].is_disjoint(&tiles[j]) {
                    return Err(TilingError::Overlap(i, j));
                }
            }
        }
        Ok(Tiling { tiles })
    }

    pub fn tiles(&self) -> &[Diagram] {
        &self.tiles
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    /// The multiplicity tag `m` of each tile, with `binom(m+1, 2) = #tile`.
    pub fn multiplicities(&self) -> Vec<u32> {
        self.tiles
            .iter()
            .map(|t| degree_for_size(t.len()).expect("validated on construction"))
            .collect()
    }

    pub fn union(&self) -> Diagram {
        let points: Vec<Point> = self
            .tiles
            .iter()
            .flat_map(|t| t.points().iter().copied())
            .collect();
        Diagram::new(points).expect("non-empty tiles")
    }

    pub fn cell_count(&self) -> usize {
        self.tiles.iter().map(Diagram::len).sum()
    }
}

impl<'de> Deserialize<'de> for Tiling {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            tiles: Vec<Diagram>,
        }
        let repr = Repr::deserialize(deserializer)?;
        Tiling::new(repr.tiles).map_err(serde::de::Error::custom)
    }
}

pub fn parse_tiling_json(text: &str) -> Result<Tiling, TilingError> {
    serde_json::from_str(text).map_err(|e| TilingError::Parse(e.to_string()))
}

/// A pairing of tiles: tile `i` of the first tiling goes to tile
/// `pairing[i]` of the second.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceMap {
    pub pairing: Vec<usize>,
}

impl CongruenceMap {
    pub fn identity(n: usize) -> Self {
        CongruenceMap {
            pairing: (0..n).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.pairing.iter().enumerate().all(|(i, &j)| i == j)
    }
}

/// True iff `pairing` is a bijection preserving sizes and centers of mass
/// tile by tile, and both tilings cover the same cells.
pub fn is_congruent(t: &Tiling, t2: &Tiling, map: &CongruenceMap) -> bool {
    if t.len() != t2.len() || map.pairing.len() != t.len() {
        return false;
    }
    let mut seen = vec![false; t2.len()];
    for (i, &j) in map.pairing.iter().enumerate() {
        if j >= t2.len() || seen[j] {
            return false;
        }
        seen[j] = true;
        let (a, b) = (&t.tiles[i], &t2.tiles[j]);
        if a.len() != b.len() || a.coordinate_sums() != b.coordinate_sums() {
            return false;
        }
    }
    t.union() == t2.union()
}

/// `d ⪯ d2`: some column is occupied by both and, in it, the lowest point of
/// `d` is not above the lowest point of `d2`.
///
/// For disjoint tiles whose columns are segments this reads "in some shared
/// column, `d` lies below `d2`".
pub fn precedes(d: &Diagram, d2: &Diagram) -> bool {
    minima_precede(&d.column_minima(), &d2.column_minima())
}

pub(crate) fn minima_precede(a: &[(u16, u16)], b: &[(u16, u16)]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                if a[i].1 <= b[j].1 {
                    return true;
                }
                i += 1;
                j += 1;
            }
        }
    }
    false
}

fn relation_matrix(t: &Tiling) -> Vec<Vec<bool>> {
    let minima: Vec<Vec<(u16, u16)>> = t.tiles.iter().map(Diagram::column_minima).collect();
    (0..t.len())
        .map(|i| {
            (0..t.len())
                .map(|j| i != j && minima_precede(&minima[i], &minima[j]))
                .collect()
        })
        .collect()
}

fn pairwise_antisymmetric(rel: &[Vec<bool>]) -> bool {
    (0..rel.len()).all(|i| (i + 1..rel.len()).all(|j| !(rel[i][j] && rel[j][i])))
}

fn acyclic(rel: &[Vec<bool>]) -> bool {
    // Kahn's algorithm on the strict relation.
    let n = rel.len();
    let mut indegree: Vec<usize> = (0..n)
        .map(|j| (0..n).filter(|&i| rel[i][j]).count())
        .collect();
    let mut ready: Vec<usize> = (0..n).filter(|&j| indegree[j] == 0).collect();
    let mut removed = 0;
    while let Some(i) = ready.pop() {
        removed += 1;
        for j in 0..n {
            if rel[i][j] {
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    ready.push(j);
                }
            }
        }
    }
    removed == n
}

/// True iff `⪯` restricted to `t` extends to a partial order, checked as
/// acyclicity of the strict relation. Needs no hypothesis on the tiles.
pub fn relation_acyclic(t: &Tiling) -> bool {
    acyclic(&relation_matrix(t))
}

/// Extendability of `⪯` to a partial order on `t`, for tilings whose tiles
/// each project onto a segment of columns.
///
/// The answer is the pairwise test (no two distinct tiles related both
/// ways). Acyclicity of the full relation is computed as well; if the two
/// disagree the result is [`TilingError::ObservationDisagreement`].
pub fn order_extendable(t: &Tiling) -> Result<bool, TilingError> {
    if let Some(i) = t
        .tiles
        .iter()
        .position(|d| !d.column_projection_is_segment())
    {
        return Err(TilingError::ProjectionNotSegment(i));
    }
    let rel = relation_matrix(t);
    let pairwise = pairwise_antisymmetric(&rel);
    if pairwise != acyclic(&rel) {
        return Err(TilingError::ObservationDisagreement);
    }
    Ok(pairwise)
}

/// Memo of stability verdicts keyed by canonical form. Stability is
/// invariant under translations and lattice isometries.
#[derive(Debug, Default)]
pub struct StabilityCache {
    verdicts: HashMap<Diagram, bool>,
}

impl StabilityCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_stable(&mut self, d: &Diagram) -> Result<bool, StabilityError> {
        let key = d.canonical_form();
        if let Some(&v) = self.verdicts.get(&key) {
            return Ok(v);
        }
        let v = is_stable(&key)?.stable;
        self.verdicts.insert(key, v);
        Ok(v)
    }
}

/// Extendability of `⪯`, via [`order_extendable`] when every tile projects
/// onto a column segment and via plain acyclicity otherwise.
pub fn extendable(t: &Tiling) -> Result<bool, TilingError> {
    if t.tiles.iter().all(Diagram::column_projection_is_segment) {
        order_extendable(t)
    } else {
        Ok(relation_acyclic(t))
    }
}

/// Sufficient condition for uniqueness: every tile is stable and `⪯`
/// extends to a partial order on the tiling.
pub fn uniqueness_sufficient(t: &Tiling) -> Result<bool, TilingError> {
    uniqueness_sufficient_with(t, &mut StabilityCache::new())
}

pub fn uniqueness_sufficient_with(
    t: &Tiling,
    cache: &mut StabilityCache,
) -> Result<bool, TilingError> {
    for tile in &t.tiles {
        if !cache.is_stable(tile)? {
            return Ok(false);
        }
    }
    extendable(t)
}

/// Visits every tiling `T'` of `∪t` with a pairing `f` such that `f(D)` has
/// the size and center of `D` for each tile. With `non_special_only`, parts
/// that are special are pruned (and never visited).
pub fn for_each_congruent<F>(
    t: &Tiling,
    non_special_only: bool,
    mut visit: F,
) -> Result<(), TilingError>
where
    F: FnMut(&[Diagram]) -> ControlFlow<()>,
{
    let union = t.union();
    let cells = union.points().to_vec();
    if cells.len() > 64 {
        return Err(TilingError::UnionTooLarge(cells.len()));
    }
    let specs: Vec<(usize, (i128, i128))> = t
        .tiles
        .iter()
        .map(|d| (d.len(), d.coordinate_sums()))
        .collect();
    let mut search = CongruenceSearch {
        cells: &cells,
        specs: &specs,
        non_special_only,
        special_memo: HashMap::new(),
        parts: Vec::with_capacity(specs.len()),
        error: None,
    };
    let full = if cells.len() == 64 {
        u64::MAX
    } else {
        (1u64 << cells.len()) - 1
    };
    let _ = search.assign(full, &mut visit);
    match search.error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

struct CongruenceSearch<'a> {
    cells: &'a [Point],
    specs: &'a [(usize, (i128, i128))],
    non_special_only: bool,
    special_memo: HashMap<u64, bool>,
    parts: Vec<Diagram>,
    error: Option<TilingError>,
}

impl CongruenceSearch<'_> {
    fn assign<F>(&mut self, free: u64, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[Diagram]) -> ControlFlow<()>,
    {
        let j = self.parts.len();
        if j == self.specs.len() {
            return visit(&self.parts);
        }
        let (size, sums) = self.specs[j];
        let mut subsets = Vec::new();
        collect_sum_subsets(self.cells, free, 0, size, sums, (0, 0), 0, &mut subsets);
        for mask in subsets {
            if self.non_special_only {
                match self.is_special(mask, size) {
                    Ok(true) => continue,
                    Ok(false) => {}
                    Err(e) => {
                        self.error = Some(e);
                        return ControlFlow::Break(());
                    }
                }
            }
            self.parts.push(mask_to_diagram(self.cells, mask));
            let flow = self.assign(free & !mask, visit);
            self.parts.pop();
            flow?;
        }
        ControlFlow::Continue(())
    }

    fn is_special(&mut self, mask: u64, size: usize) -> Result<bool, TilingError> {
        if let Some(&v) = self.special_memo.get(&mask) {
            return Ok(v);
        }
        let degree = degree_for_size(size).expect("triangular");
        let v = diagram_degree_specialty(&mask_to_diagram(self.cells, mask), degree)?;
        self.special_memo.insert(mask, v);
        Ok(v)
    }
}

fn mask_to_diagram(cells: &[Point], mask: u64) -> Diagram {
    let pts: Vec<Point> = (0..cells.len())
        .filter(|&i| mask >> i & 1 == 1)
        .map(|i| cells[i])
        .collect();
    Diagram::new(pts).expect("non-empty part")
}

#[allow(clippy::too_many_arguments)]
fn collect_sum_subsets(
    cells: &[Point],
    free: u64,
    start: usize,
    size: usize,
    target: (i128, i128),
    partial: (i128, i128),
    mask: u64,
    out: &mut Vec<u64>,
) {
    if size == 0 {
        if partial == target {
            out.push(mask);
        }
        return;
    }
    for i in start..cells.len() {
        if free >> i & 1 == 0 {
            continue;
        }
        let p = cells[i];
        let next = (partial.0 + p.x as i128, partial.1 + p.y as i128);
        // Cells are sorted by x, so once x overshoots nothing later fits.
        if next.0 > target.0 {
            break;
        }
        if next.1 > target.1 {
            continue;
        }
        collect_sum_subsets(
            cells,
            free,
            i + 1,
            size - 1,
            target,
            next,
            mask | 1 << i,
            out,
        );
    }
}

/// Brute-force uniqueness: true iff `t` consists of non-special tiles and
/// every congruent `(T', f)` other than `(t, id)` contains a special tile.
pub fn uniqueness_bruteforce(t: &Tiling) -> Result<bool, TilingError> {
    let n = t.cell_count();
    if n > ORACLE_MAX_CELLS {
        return Err(TilingError::UnionTooLarge(n));
    }
    for (tile, m) in t.tiles.iter().zip(t.multiplicities()) {
        if diagram_degree_specialty(tile, m)? {
            return Ok(false);
        }
    }
    let mut unique = true;
    for_each_congruent(t, true, |parts| {
        if parts.iter().zip(&t.tiles).any(|(a, b)| a != b) {
            unique = false;
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    Ok(unique)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(coords: &[(u16, u16)]) -> Diagram {
        Diagram::from_coords(coords).unwrap()
    }

    fn two_trominoes() -> Tiling {
        // Lower L and upper L inside the 2x3 block.
        Tiling::new(vec![
            d(&[(0, 0), (1, 0), (0, 1)]),
            d(&[(1, 1), (0, 2), (1, 2)]),
        ])
        .unwrap()
    }

    #[test]
    fn construction_checks() {
        assert_eq!(Tiling::new(vec![]), Err(TilingError::Empty));
        assert!(matches!(
            Tiling::new(vec![d(&[(0, 0), (1, 0)])]),
            Err(TilingError::NotTriangular(0, 2))
        ));
        assert!(matches!(
            Tiling::new(vec![d(&[(0, 0)]), d(&[(0, 0), (1, 0), (0, 1)])]),
            Err(TilingError::Overlap(0, 1))
        ));
        let t = two_trominoes();
        assert_eq!(t.union(), Diagram::rectangle(2, 3));
        assert_eq!(t.multiplicities(), vec![2, 2]);
    }

    #[test]
    fn json_round_trip() {
        let t = two_trominoes();
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(
            json,
            r#"{"tiles":[{"points":[[0,0],[0,1],[1,0]]},{"points":[[0,2],[1,1],[1,2]]}]}"#
        );
        assert_eq!(parse_tiling_json(&json).unwrap(), t);
        assert!(parse_tiling_json(r#"{"tiles":[{"points":[[0,0]]},{"points":[[0,0]]}]}"#).is_err());
    }

    #[test]
    fn congruence_examples() {
        let t = two_trominoes();
        assert!(is_congruent(&t, &t, &CongruenceMap::identity(2)));

        // 3x2 block split as A = {(0,0),(1,0),(0,1)}, B = rest. A 3-subset
        // with coordinate sum (1, 1) must use x-values summing to 1 and
        // y-values summing to 1, so A is the only candidate.
        let a = d(&[(0, 0), (1, 0), (0, 1)]);
        let b = d(&[(1, 1), (2, 0), (2, 1)]);
        let t = Tiling::new(vec![a.clone(), b.clone()]).unwrap();
        let mut rivals = 0;
        for_each_congruent(&t, false, |parts| {
            rivals += 1;
            assert_eq!(parts, &[a.clone(), b.clone()]);
            ControlFlow::Continue(())
        })
        .unwrap();
        assert_eq!(rivals, 1);
        let rows = Tiling::new(vec![
            d(&[(0, 0), (1, 0), (2, 0)]),
            d(&[(0, 1), (1, 1), (2, 1)]),
        ])
        .unwrap();
        assert!(!is_congruent(&t, &rows, &CongruenceMap::identity(2)));
        assert!(!is_congruent(
            &t,
            &rows,
            &CongruenceMap {
                pairing: vec![1, 0]
            }
        ));
        // A swapped pairing of tiles with different centers.
        assert!(!is_congruent(
            &t,
            &t,
            &CongruenceMap {
                pairing: vec![1, 0]
            }
        ));
        assert!(!is_congruent(
            &t,
            &t,
            &CongruenceMap {
                pairing: vec![0, 0]
            }
        ));
    }

    #[test]
    fn precedes_examples() {
        let (low, high) = (d(&[(0, 0)]), d(&[(0, 5)]));
        assert!(precedes(&low, &high));
        assert!(!precedes(&high, &low));
        let side = d(&[(3, 0)]);
        assert!(!precedes(&low, &side) && !precedes(&side, &low));
        let l = d(&[(0, 0), (1, 0), (0, 1)]);
        let up = l.translate(0, 2).unwrap();
        assert!(precedes(&l, &up));
        assert!(!precedes(&up, &l));
    }

    #[test]
    fn order_examples() {
        assert!(
            order_extendable(&Tiling::new(vec![d(&[(0, 0), (1, 0), (0, 1)])]).unwrap()).unwrap()
        );
        assert!(order_extendable(&two_trominoes()).unwrap());
        // Interleaved: a is below b in column 0, b is below a in column 1.
        let a = d(&[(0, 0), (1, 1), (1, 2)]);
        let b = d(&[(0, 1), (0, 2), (1, 0)]);
        let t = Tiling::new(vec![a, b]).unwrap();
        assert!(!order_extendable(&t).unwrap());
        assert!(!relation_acyclic(&t));
        let gap = Tiling::new(vec![d(&[(0, 0), (2, 0), (2, 1)])]).unwrap();
        assert_eq!(
            order_extendable(&gap),
            Err(TilingError::ProjectionNotSegment(0))
        );
    }

    #[test]
    fn sufficiency_examples() {
        let single = Tiling::new(vec![d(&[(0, 0), (1, 0), (0, 1)])]).unwrap();
        assert!(uniqueness_sufficient(&single).unwrap());
        assert!(uniqueness_bruteforce(&single).unwrap());
        assert!(uniqueness_sufficient(&two_trominoes()).unwrap());
        assert!(uniqueness_bruteforce(&two_trominoes()).unwrap());
        let rows = Tiling::new(vec![
            d(&[(0, 0), (1, 0), (2, 0)]),
            d(&[(0, 1), (1, 1), (2, 1)]),
        ])
        .unwrap();
        assert!(!uniqueness_sufficient(&rows).unwrap());
        assert!(!uniqueness_bruteforce(&rows).unwrap());
    }

    #[test]
    fn oracle_detects_non_unique_tilings() {
        let t = Tiling::new(vec![d(&[(0, 0)]), d(&[(0, 1)])]).unwrap();
        assert!(uniqueness_bruteforce(&t).unwrap());

        // Skew trominoes in the 3x2 block. {(0,0),(1,1),(2,0)} has the
        // center of `a` and its complement has the center of `b`.
        let a = d(&[(0, 0), (1, 0), (2, 1)]);
        let b = d(&[(0, 1), (1, 1), (2, 0)]);
        let t = Tiling::new(vec![a, b]).unwrap();
        assert!(!uniqueness_bruteforce(&t).unwrap());

        let mut pts = Diagram::rectangle(4, 5).points().to_vec();
        pts.push(Point::new(9, 9));
        let big = Tiling::new(vec![Diagram::new(pts).unwrap()]).unwrap();
        assert_eq!(
            uniqueness_bruteforce(&big),
            Err(TilingError::UnionTooLarge(21))
        );
    }
}
