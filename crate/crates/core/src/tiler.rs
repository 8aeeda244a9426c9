//! Exact-cover search for tilings by catalog shapes that pass the uniqueness
//! sufficient condition, so that they certify non-specialty of a system.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{predicted_special, ClassificationCase};
use crate::diagram::{Diagram, Point};
use crate::interp::{
    conditions, specialty_test, EvalConfig, InterpError, SpecialtyVerdict, SystemSpec,
};
use crate::rng;
use crate::stability::{default_catalog, StabilityError, TileCatalog};
use crate::tiling::{extendable, minima_precede, StabilityCache, Tiling, TilingError};

pub const DEFAULT_BUDGET: u64 = 100_000_000;
pub const DEFAULT_MARGIN: u16 = 2;
pub const DEFAULT_RESTART_NODES: u64 = 20_000;
/// Largest search region (target plus margin) in cells.
pub const MAX_REGION: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// The tiles cover the target exactly.
    Exact,
    /// The union of the tiles lies inside the target.
    Subset,
    /// The union of the tiles contains the target.
    Superset,
}

impl Mode {
    /// The mode whose count condition holds with equality where possible.
    pub fn for_counts(target: usize, area: usize) -> Mode {
        match area.cmp(&target) {
            std::cmp::Ordering::Equal => Mode::Exact,
            std::cmp::Ordering::Less => Mode::Subset,
            std::cmp::Ordering::Greater => Mode::Superset,
        }
    }

    fn counts_ok(self, target: usize, area: usize) -> bool {
        match self {
            Mode::Exact => area == target,
            Mode::Subset => area <= target,
            Mode::Superset => area >= target,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Subset => "subset",
            Mode::Superset => "superset",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Mode::Exact),
            "subset" => Ok(Mode::Subset),
            "superset" => Ok(Mode::Superset),
            _ => Err(format!(
                "unknown mode {s:?} (expected exact, subset or superset)"
            )),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TilerError {
    #[error("{mode} mode needs tile area {area} to fit a target of {target} cells")]
    CountMismatch {
        mode: Mode,
        area: usize,
        target: usize,
    },
    #[error("no catalog for tiles of size {0}")]
    MissingCatalog(usize),
    #[error("search region of {0} cells exceeds {MAX_REGION}")]
    RegionTooLarge(usize),
    #[error("certificate failed re-verification: {0}")]
    Verification(String),
    #[error(transparent)]
    Tiling(#[from] TilingError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error(transparent)]
    Interp(#[from] InterpError),
}

#[derive(Clone, Debug)]
pub struct TilingProblem {
    pub target: Diagram,
    pub multiplicities: Vec<u32>,
    pub mode: Mode,
    pub catalogs: Vec<TileCatalog>,
    /// Node limit for the search.
    pub budget: u64,
    /// Reject a placement as soon as it is related both ways to a placed tile.
    pub order_pruning: bool,
    /// Superset mode may place tiles up to this far beyond the target's
    /// bounding box, in each axis.
    pub margin: u16,
    /// Node budget of the first attempt. Later attempts double it and try
    /// placements in an order shuffled from `seed`. Zero means one attempt
    /// in canonical order.
    pub restart_nodes: u64,
    pub seed: u64,
}

impl TilingProblem {
    /// Problem with the default catalogs for sizes 3 and 6.
    pub fn new(target: Diagram, multiplicities: Vec<u32>, mode: Mode) -> Result<Self, TilerError> {
        let mut catalogs = Vec::new();
        for size in [3, 6] {
            catalogs.push(default_catalog(size)?.clone());
        }
        Ok(TilingProblem {
            target,
            multiplicities,
            mode,
            catalogs,
            budget: DEFAULT_BUDGET,
            order_pruning: true,
            margin: DEFAULT_MARGIN,
            restart_nodes: DEFAULT_RESTART_NODES,
            seed: 0,
        })
    }

    /// Picks the mode from the counts.
    pub fn auto(target: Diagram, multiplicities: Vec<u32>) -> Result<Self, TilerError> {
        let mode = Mode::for_counts(target.len(), tile_area(&multiplicities));
        Self::new(target, multiplicities, mode)
    }

    pub fn tile_area(&self) -> usize {
        tile_area(&self.multiplicities)
    }

    fn catalog(&self, size: usize) -> Option<&TileCatalog> {
        self.catalogs
            .iter()
            .find(|c| c.size == size && !c.members.is_empty())
    }
}

fn tile_area(mults: &[u32]) -> usize {
    mults.iter().map(|&m| conditions(m)).sum()
}

/// Which certificate conditions held, each checked from scratch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateChecks {
    pub sizes_match: bool,
    pub mode_holds: bool,
    pub all_stable: bool,
    pub order_extendable: bool,
}

impl CertificateChecks {
    pub fn all(&self) -> bool {
        self.sizes_match && self.mode_holds && self.all_stable && self.order_extendable
    }
}

/// A unique tiling related to the target as `mode` requires. It implies that
/// `L_target(multiplicities)` is non-special.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub target: Diagram,
    pub multiplicities: Vec<u32>,
    pub mode: Mode,
    pub tiling: Tiling,
    pub checks: CertificateChecks,
}

impl Certificate {
    pub fn system(&self) -> SystemSpec {
        SystemSpec::new(self.target.clone(), self.multiplicities.clone())
    }

    /// Randomized rank test of the implied non-special system.
    pub fn bridge_verdict(&self, config: &EvalConfig) -> Result<SpecialtyVerdict, InterpError> {
        specialty_test(&self.system(), config)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SearchOutcome {
    Found {
        certificate: Certificate,
        explored: u64,
    },
    /// `exhausted` is true when the whole tree was explored, false when the
    /// node budget ran out first.
    NotFound { explored: u64, exhausted: bool },
}

impl SearchOutcome {
    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            SearchOutcome::Found { certificate, .. } => Some(certificate),
            SearchOutcome::NotFound { .. } => None,
        }
    }

    pub fn explored(&self) -> u64 {
        match *self {
            SearchOutcome::Found { explored, .. } | SearchOutcome::NotFound { explored, .. } => {
                explored
            }
        }
    }
}

/// Checks every certificate condition for `tiling` against the target.
pub fn check_certificate(
    target: &Diagram,
    multiplicities: &[u32],
    mode: Mode,
    tiling: &Tiling,
    cache: &mut StabilityCache,
) -> Result<CertificateChecks, TilerError> {
    let mut want: Vec<u32> = multiplicities.iter().copied().filter(|&m| m > 0).collect();
    let mut have = tiling.multiplicities();
    want.sort_unstable();
    have.sort_unstable();
    let union = tiling.union();
    let mode_holds = match mode {
        Mode::Exact => union == *target,
        Mode::Subset => union.is_subset(target),
        Mode::Superset => target.is_subset(&union),
    };
    let mut all_stable = true;
    for tile in tiling.tiles() {
        if !cache.is_stable(tile)? {
            all_stable = false;
            break;
        }
    }
    Ok(CertificateChecks {
        sizes_match: want == have,
        mode_holds,
        all_stable,
        order_extendable: extendable(tiling)?,
    })
}

/// Builds a certificate after checking every condition from scratch.
pub fn verify_certificate(
    target: &Diagram,
    multiplicities: &[u32],
    mode: Mode,
    tiling: Tiling,
) -> Result<Certificate, TilerError> {
    let checks = check_certificate(
        target,
        multiplicities,
        mode,
        &tiling,
        &mut StabilityCache::new(),
    )?;
    if !checks.all() {
        return Err(TilerError::Verification(format!("{checks:?}")));
    }
    Ok(Certificate {
        target: target.clone(),
        multiplicities: multiplicities.to_vec(),
        mode,
        tiling,
        checks,
    })
}

#[derive(Clone, Copy, Default, PartialEq, Eq)]
struct CellSet([u64; 4]);

impl CellSet {
    fn insert(&mut self, i: usize) {
        self.0[i >> 6] |= 1 << (i & 63);
    }

    fn contains(&self, i: usize) -> bool {
        self.0[i >> 6] >> (i & 63) & 1 == 1
    }

    fn intersects(&self, other: &CellSet) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }

    fn union_with(&mut self, other: &CellSet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    fn remove_all(&mut self, other: &CellSet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= !b;
        }
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Least index in `self` and not in `other`.
    fn first_outside(&self, other: &CellSet) -> Option<usize> {
        self.0
            .iter()
            .zip(&other.0)
            .enumerate()
            .find_map(|(k, (a, b))| {
                let w = a & !b;
                (w != 0).then(|| k * 64 + w.trailing_zeros() as usize)
            })
    }
}

struct Placement {
    cells: CellSet,
    class: usize,
    shape: Diagram,
    minima: Vec<(u16, u16)>,
}

struct Search {
    region: Vec<Point>,
    target: CellSet,
    class_size: Vec<usize>,
    placements: Vec<Placement>,
    /// Placements whose least target cell is the given region cell.
    anchored: Vec<Vec<usize>>,
    /// Placements touching no target cell (superset mode only).
    outside: Vec<usize>,
    remaining: Vec<usize>,
    singles: usize,
    covered: CellSet,
    skipped: CellSet,
    skips_left: usize,
    placed: Vec<usize>,
    explored: u64,
    budget: u64,
    order_pruning: bool,
    mode: Mode,
}

enum Stop {
    Found(Tiling),
    Budget,
    Error(TilerError),
}

/// Depth-first search for a certified tiling of `p.target`.
///
/// Cells are scanned in lexicographic `(x, y)` order, or `(y, x)` order when
/// the target is taller than wide. The search branches on the least target
/// cell not yet decided; that cell
/// is covered by a placement anchored there or, while the skip allowance
/// lasts, left for a singleton (or left empty in subset mode). Singletons
/// are placed at the end: first on skipped cells in order, then on the least
/// free margin cells. Every leaf is re-verified from scratch, and the first
/// one that passes is returned.
///
/// The first attempt tries placements in canonical order. If it runs out of
/// its share of the budget, the search restarts with a doubled share and a
/// seeded shuffle of the placement order. The result depends only on the
/// problem, including its seed.
pub fn find_certified_tiling(p: &TilingProblem) -> Result<SearchOutcome, TilerError> {
    let area = p.tile_area();
    if !p.mode.counts_ok(p.target.len(), area) {
        return Err(TilerError::CountMismatch {
            mode: p.mode,
            area,
            target: p.target.len(),
        });
    }
    let mut sizes: Vec<usize> = p
        .multiplicities
        .iter()
        .filter(|&&m| m > 1)
        .map(|&m| conditions(m))
        .collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes.dedup();
    let mut catalogs = Vec::with_capacity(sizes.len());
    for &s in &sizes {
        catalogs.push(p.catalog(s).ok_or(TilerError::MissingCatalog(s))?);
    }
    let remaining: Vec<usize> = sizes
        .iter()
        .map(|&s| {
            p.multiplicities
                .iter()
                .filter(|&&m| m > 1 && conditions(m) == s)
                .count()
        })
        .collect();
    let singles = p.multiplicities.iter().filter(|&&m| m == 1).count();
    let big_area: usize = sizes.iter().zip(&remaining).map(|(s, r)| s * r).sum();

    let (_, _, max_x, max_y) = p.target.bounding_box();
    let (width, height) = match p.mode {
        Mode::Superset => (
            max_x as usize + 1 + p.margin as usize,
            max_y as usize + 1 + p.margin as usize,
        ),
        _ => (max_x as usize + 1, max_y as usize + 1),
    };
    let mut region: Vec<Point> = match p.mode {
        Mode::Superset => (0..width as u16)
            .flat_map(|x| (0..height as u16).map(move |y| Point::new(x, y)))
            .collect(),
        _ => p.target.points().to_vec(),
    };
    // Scan along the shorter side so the frontier stays short.
    let rows_first = max_y > max_x;
    if rows_first {
        region.sort_by_key(|q| (q.y, q.x));
    }
    if region.len() > MAX_REGION {
        return Err(TilerError::RegionTooLarge(region.len()));
    }
    let mut grid = vec![usize::MAX; width * height];
    let mut target = CellSet::default();
    for (i, q) in region.iter().enumerate() {
        grid[q.x as usize * height + q.y as usize] = i;
        if p.target.contains(*q) {
            target.insert(i);
        }
    }

    let mut placements = Vec::new();
    let mut anchored = vec![Vec::new(); region.len()];
    let mut outside = Vec::new();
    for (class, catalog) in catalogs.iter().enumerate() {
        for member in &catalog.members {
            for image in member.distinct_images() {
                let (_, _, w, h) = image.bounding_box();
                for tx in 0..width.saturating_sub(w as usize) {
                    for ty in 0..height.saturating_sub(h as usize) {
                        let mut cells = CellSet::default();
                        let mut anchor = None;
                        let fits = image.points().iter().all(|q| {
                            let i = grid[(q.x as usize + tx) * height + q.y as usize + ty];
                            if i == usize::MAX {
                                return false;
                            }
                            cells.insert(i);
                            if target.contains(i) && anchor.is_none_or(|a| i < a) {
                                anchor = Some(i);
                            }
                            true
                        });
                        if !fits {
                            continue;
                        }
                        let shape = image
                            .translate(tx as i64, ty as i64)
                            .expect("inside the region");
                        match anchor {
                            Some(a) => anchored[a].push(placements.len()),
                            None => outside.push(placements.len()),
                        }
                        placements.push(Placement {
                            cells,
                            class,
                            minima: shape.column_minima(),
                            shape,
                        });
                    }
                }
            }
        }
    }

    let skips_left = match p.mode {
        Mode::Exact | Mode::Superset => singles,
        Mode::Subset => p.target.len() - big_area,
    };
    let mut search = Search {
        region,
        target,
        class_size: sizes,
        placements,
        anchored,
        outside,
        remaining,
        singles,
        covered: CellSet::default(),
        skipped: CellSet::default(),
        skips_left,
        placed: Vec::new(),
        explored: 0,
        budget: p.budget,
        order_pruning: p.order_pruning,
        mode: p.mode,
    };
    let mut cache = StabilityCache::new();
    let canonical = search.anchored.clone();
    let mut explored = 0u64;
    for attempt in 0u32.. {
        let left = p.budget - explored;
        let cap = match p.restart_nodes {
            0 => left,
            base => base.saturating_mul(1 << attempt.min(40)).min(left),
        };
        if attempt > 0 {
            let mut rng = rng::stream(p.seed, rng::labels::TILER_RESTART + u64::from(attempt));
            for (list, base) in search.anchored.iter_mut().zip(&canonical) {
                list.clone_from(base);
                list.shuffle(&mut rng);
            }
        }
        search.explored = 0;
        search.budget = cap;
        let result = search.dfs(p, &mut cache);
        explored += search.explored;
        match result {
            // A run that finishes has seen the whole tree, whatever its order.
            Ok(()) => {
                return Ok(SearchOutcome::NotFound {
                    explored,
                    exhausted: true,
                })
            }
            Err(Stop::Budget) if explored < p.budget => continue,
            Err(Stop::Budget) => {
                return Ok(SearchOutcome::NotFound {
                    explored,
                    exhausted: false,
                })
            }
            Err(Stop::Found(tiling)) => {
                let certificate = verify_certificate(&p.target, &p.multiplicities, p.mode, tiling)?;
                return Ok(SearchOutcome::Found {
                    certificate,
                    explored,
                });
            }
            Err(Stop::Error(e)) => return Err(e),
        }
    }
    unreachable!("the budget ends the restart loop")
}

impl Search {
    fn dfs(&mut self, p: &TilingProblem, cache: &mut StabilityCache) -> Result<(), Stop> {
        if self.explored >= self.budget {
            return Err(Stop::Budget);
        }
        self.explored += 1;
        let mut decided = self.covered;
        decided.union_with(&self.skipped);
        let Some(cell) = self.target.first_outside(&decided) else {
            return self.leaf(p, cache);
        };

        let mut undecided = self.target;
        undecided.remove_all(&decided);
        let open = undecided.count();
        let tiles: usize = self
            .class_size
            .iter()
            .zip(&self.remaining)
            .map(|(s, r)| s * r)
            .sum();
        if open > tiles + self.skips_left || (self.mode != Mode::Superset && tiles > open) {
            return Ok(());
        }

        for k in 0..self.anchored[cell].len() {
            let id = self.anchored[cell][k];
            let pl = &self.placements[id];
            if self.remaining[pl.class] == 0
                || pl.cells.intersects(&self.covered)
                || pl.cells.intersects(&self.skipped)
            {
                continue;
            }
            if self.order_pruning && self.conflicts(id) {
                continue;
            }
            let (class, cells) = (pl.class, pl.cells);
            self.remaining[class] -= 1;
            self.covered.union_with(&cells);
            self.placed.push(id);
            let r = self.dfs(p, cache);
            self.placed.pop();
            self.covered.remove_all(&cells);
            self.remaining[class] += 1;
            r?;
        }
        if self.skips_left > 0 {
            self.skips_left -= 1;
            self.skipped.insert(cell);
            let r = self.dfs(p, cache);
            self.skipped.0[cell >> 6] &= !(1 << (cell & 63));
            self.skips_left += 1;
            r?;
        }
        Ok(())
    }

    fn conflicts(&self, id: usize) -> bool {
        let a = &self.placements[id].minima;
        self.placed.iter().any(|&j| {
            let b = &self.placements[j].minima;
            minima_precede(a, b) && minima_precede(b, a)
        })
    }

    fn leaf(&mut self, p: &TilingProblem, cache: &mut StabilityCache) -> Result<(), Stop> {
        // Whole tiles left over go outside the target (superset mode only).
        let mut extra = Vec::new();
        let mut used = self.covered;
        let mut remaining = self.remaining.clone();
        for &id in &self.outside {
            let pl = &self.placements[id];
            if remaining[pl.class] > 0
                && !pl.cells.intersects(&used)
                && !pl.cells.intersects(&self.skipped)
            {
                remaining[pl.class] -= 1;
                used.union_with(&pl.cells);
                extra.push(id);
            }
        }
        if remaining.iter().any(|&r| r > 0) {
            return Ok(());
        }

        let mut tiles: Vec<Diagram> = self
            .placed
            .iter()
            .chain(&extra)
            .map(|&id| self.placements[id].shape.clone())
            .collect();
        let mut singles = self.singles;
        for i in (0..self.region.len()).filter(|&i| self.skipped.contains(i)) {
            if singles == 0 {
                break;
            }
            tiles.push(Diagram::from_sorted_unchecked(vec![self.region[i]]));
            used.insert(i);
            singles -= 1;
        }
        if singles > 0 {
            for i in 0..self.region.len() {
                if singles == 0 {
                    break;
                }
                if !used.contains(i) && !self.target.contains(i) {
                    tiles.push(Diagram::from_sorted_unchecked(vec![self.region[i]]));
                    used.insert(i);
                    singles -= 1;
                }
            }
        }
        if singles > 0 {
            return Ok(());
        }
        let tiling = Tiling::new(tiles).map_err(|e| Stop::Error(e.into()))?;
        let checks = check_certificate(&p.target, &p.multiplicities, self.mode, &tiling, cache)
            .map_err(Stop::Error)?;
        if !checks.all_stable {
            return Err(Stop::Error(TilerError::Verification(
                "catalog tile is not stable".into(),
            )));
        }
        if checks.all() {
            return Err(Stop::Found(tiling));
        }
        Ok(())
    }
}

/// Visits every exact tiling of `target` (at most 64 cells) whose tiles are
/// placed isometric copies of members of `catalogs`, plus singletons when
/// `singletons` is set. Tilings are visited once each.
pub fn for_each_exact_tiling<F>(
    target: &Diagram,
    catalogs: &[&TileCatalog],
    singletons: bool,
    mut visit: F,
) -> Result<(), TilerError>
where
    F: FnMut(&Tiling) -> std::ops::ControlFlow<()>,
{
    let cells = target.points();
    if cells.len() > 64 {
        return Err(TilerError::RegionTooLarge(cells.len()));
    }
    let index = |q: Point| cells.binary_search(&q).ok();
    // Placements grouped by their least cell.
    let mut anchored: Vec<Vec<(u64, Diagram)>> = vec![Vec::new(); cells.len()];
    if singletons {
        for (i, &q) in cells.iter().enumerate() {
            anchored[i].push((1 << i, Diagram::from_sorted_unchecked(vec![q])));
        }
    }
    let (_, _, max_x, max_y) = target.bounding_box();
    for catalog in catalogs {
        for member in &catalog.members {
            for image in member.distinct_images() {
                let (_, _, w, h) = image.bounding_box();
                for tx in 0..=max_x.saturating_sub(w) {
                    for ty in 0..=max_y.saturating_sub(h) {
                        let placed = image
                            .translate(i64::from(tx), i64::from(ty))
                            .expect("in range");
                        let idx: Option<Vec<usize>> =
                            placed.points().iter().map(|&q| index(q)).collect();
                        if let Some(idx) = idx {
                            let mask = idx.iter().fold(0u64, |m, &i| m | 1 << i);
                            anchored[idx[0]].push((mask, placed));
                        }
                    }
                }
            }
        }
    }
    fn go<F>(
        anchored: &[Vec<(u64, Diagram)>],
        full: u64,
        used: u64,
        tiles: &mut Vec<Diagram>,
        visit: &mut F,
    ) -> std::ops::ControlFlow<()>
    where
        F: FnMut(&Tiling) -> std::ops::ControlFlow<()>,
    {
        if used == full {
            let t = Tiling::new(tiles.clone()).expect("disjoint triangular tiles");
            return visit(&t);
        }
        let cell = (!used & full).trailing_zeros() as usize;
        for (mask, shape) in &anchored[cell] {
            if mask & used == 0 {
                tiles.push(shape.clone());
                let flow = go(anchored, full, used | mask, tiles, visit);
                tiles.pop();
                flow?;
            }
        }
        std::ops::ControlFlow::Continue(())
    }
    let full = if cells.len() == 64 {
        u64::MAX
    } else {
        (1u64 << cells.len()) - 1
    };
    let _ = go(&anchored, full, 0, &mut Vec::new(), &mut visit);
    Ok(())
}

/// Finite case lists that the constructive non-specialty arguments reduce
/// to. Rectangles are `width × height` with `width = d + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeFamily {
    /// `6 ≤ k ≤ l ≤ 11`, no simple points.
    Window,
    /// Width 5, height 7 to 18, no simple points.
    WidthFive,
    /// The 5×6 rectangle, all counts in the window except the special one.
    FiveBySix,
    /// Width 4, height 4 to 6, two or three triple points, minus the
    /// special families.
    WidthFour,
}

impl SchemeFamily {
    pub const ALL: [SchemeFamily; 4] = [
        SchemeFamily::Window,
        SchemeFamily::WidthFive,
        SchemeFamily::FiveBySix,
        SchemeFamily::WidthFour,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SchemeCase {
    pub family: SchemeFamily,
    pub width: u16,
    pub height: u16,
    pub p: u32,
    pub q: u32,
    pub r: u32,
}

impl SchemeCase {
    pub fn multiplicities(&self) -> Vec<u32> {
        self.classification().multiplicities()
    }

    pub fn classification(&self) -> ClassificationCase {
        ClassificationCase::new(
            u32::from(self.width) - 1,
            u32::from(self.height) - 1,
            self.p,
            self.q,
            self.r,
        )
    }

    pub fn problem(&self) -> Result<TilingProblem, TilerError> {
        TilingProblem::auto(
            Diagram::rectangle(self.width, self.height),
            self.multiplicities(),
        )
    }
}

/// Counts `(p, q, r)` with `kl - 3 < p + 3q + 6r < kl + 6`, `p ≤ max_p`.
fn window(k: u16, l: u16, max_p: u32) -> Vec<(u32, u32, u32)> {
    let kl = u32::from(k) * u32::from(l);
    let mut out = Vec::new();
    for p in 0..=max_p {
        for q in 0..=(kl + 6) / 3 {
            for r in 0..=(kl + 6) / 6 {
                let t = p + 3 * q + 6 * r;
                if t + 3 > kl && t < kl + 6 {
                    out.push((p, q, r));
                }
            }
        }
    }
    out
}

pub fn scheme_cases(family: SchemeFamily) -> Vec<SchemeCase> {
    let mk = |width, height, (p, q, r)| SchemeCase {
        family,
        width,
        height,
        p,
        q,
        r,
    };
    let mut out = Vec::new();
    match family {
        SchemeFamily::Window => {
            for k in 6..12 {
                for l in k..12 {
                    out.extend(window(k, l, 0).into_iter().map(|c| mk(k, l, c)));
                }
            }
        }
        SchemeFamily::WidthFive => {
            for l in 7..19 {
                out.extend(window(5, l, 0).into_iter().map(|c| mk(5, l, c)));
            }
        }
        SchemeFamily::FiveBySix => {
            out.extend(
                window(5, 6, 35)
                    .into_iter()
                    .map(|c| mk(5, 6, c))
                    .filter(|c| !predicted_special(&c.classification())),
            );
        }
        SchemeFamily::WidthFour => {
            for l in 4..7 {
                out.extend(
                    window(4, l, 4 * u32::from(l) + 5)
                        .into_iter()
                        .filter(|&(_, _, r)| r == 2 || r == 3)
                        .map(|c| mk(4, l, c))
                        .filter(|c| !predicted_special(&c.classification())),
                );
            }
        }
    }
    out.sort();
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeResult {
    pub case: SchemeCase,
    pub outcome: SearchOutcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeReport {
    pub cases: usize,
    pub certified: usize,
    /// Cases with no certificate, with the search outcome.
    pub failures: Vec<SchemeResult>,
}

/// Runs [`find_certified_tiling`] on every case of `families`, calling
/// `on_result` on each outcome in case order.
pub fn reconstruct_schemes(
    families: &[SchemeFamily],
    budget: u64,
    mut on_result: impl FnMut(&SchemeResult),
) -> Result<SchemeReport, TilerError> {
    let mut report = SchemeReport {
        cases: 0,
        certified: 0,
        failures: Vec::new(),
    };
    for &family in families {
        for case in scheme_cases(family) {
            let mut problem = case.problem()?;
            problem.budget = budget;
            let result = SchemeResult {
                case,
                outcome: find_certified_tiling(&problem)?,
            };
            on_result(&result);
            report.cases += 1;
            if result.outcome.certificate().is_some() {
                report.certified += 1;
            } else {
                report.failures.push(result);
            }
        }
    }
    Ok(report)
}

/// Every scheme family with the default budget.
pub fn reconstruct_all_schemes() -> Result<SchemeReport, TilerError> {
    reconstruct_schemes(&SchemeFamily::ALL, DEFAULT_BUDGET, |_| {})
}
