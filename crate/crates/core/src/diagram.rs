//! Finite lattice diagrams in N² and their exact invariants.
//!
//! A [`Diagram`] indexes the monomials `X^a Y^b` of a polynomial space. The
//! invariants here (center of mass, inertial momentum, boundary
//! distributions) are computed in exact rational arithmetic; nothing in this
//! module touches floating point.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact rational number used for centers of mass and inertia.
pub type Rational = Ratio<i128>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("a diagram must contain at least one point")]
    Empty,
    #[error("coordinate ({0}, {1}) is outside the supported range 0..=65535")]
    OutOfRange(i64, i64),
    #[error("malformed diagram text: {0}")]
    Parse(String),
}

/// A lattice point `(x, y)` with non-negative coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point {
    pub x: u16,
    pub y: u16,
}

impl Point {
    pub const fn new(x: u16, y: u16) -> Self {
        Point { x, y }
    }

    /// Builds a point from signed coordinates, failing outside the u16 range.
    pub fn checked(x: i64, y: i64) -> Result<Self, DiagramError> {
        match (u16::try_from(x), u16::try_from(y)) {
            (Ok(x), Ok(y)) => Ok(Point { x, y }),
            _ => Err(DiagramError::OutOfRange(x, y)),
        }
    }

    pub fn norm_sq(self) -> i128 {
        let (x, y) = (self.x as i128, self.y as i128);
        x * x + y * y
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Coordinate axis for boundary distributions: `X` groups points by column,
/// `Y` groups them by row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

/// One of the eight symmetries of the square lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Isometry {
    Identity,
    Rot90,
    Rot180,
    Rot270,
    FlipX,
    FlipY,
    Transpose,
    AntiTranspose,
}

impl Isometry {
    pub const ALL: [Isometry; 8] = [
        Isometry::Identity,
        Isometry::Rot90,
        Isometry::Rot180,
        Isometry::Rot270,
        Isometry::FlipX,
        Isometry::FlipY,
        Isometry::Transpose,
        Isometry::AntiTranspose,
    ];

    fn apply(self, x: i64, y: i64) -> (i64, i64) {
        match self {
            Isometry::Identity => (x, y),
            Isometry::Rot90 => (-y, x),
            Isometry::Rot180 => (-x, -y),
            Isometry::Rot270 => (y, -x),
            Isometry::FlipX => (-x, y),
            Isometry::FlipY => (x, -y),
            Isometry::Transpose => (y, x),
            Isometry::AntiTranspose => (-y, -x),
        }
    }
}

/// A finite, non-empty set of lattice points.
///
/// Points are kept sorted lexicographically by `(x, y)` without duplicates,
/// so the derived `Ord` compares diagrams as sorted point lists.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Diagram {
    points: Vec<Point>,
}

impl Diagram {
    pub fn new<I: IntoIterator<Item = Point>>(points: I) -> Result<Self, DiagramError> {
        let mut points: Vec<Point> = points.into_iter().collect();
        if points.is_empty() {
            return Err(DiagramError::Empty);
        }
        points.sort_unstable();
        points.dedup();
        Ok(Diagram { points })
    }

    /// Convenience constructor from coordinate pairs.
    pub fn from_coords(coords: &[(u16, u16)]) -> Result<Self, DiagramError> {
        Self::new(coords.iter().map(|&(x, y)| Point::new(x, y)))
    }

    /// The `width × height` block of cells `{0..width-1} × {0..height-1}`.
    ///
    /// Panics if either side is zero.
    pub fn rectangle(width: u16, height: u16) -> Self {
        assert!(width > 0 && height > 0, "rectangle sides must be positive");
        let points = (0..width)
            .flat_map(|x| (0..height).map(move |y| Point::new(x, y)))
            .collect();
        Diagram { points }
    }

    /// The monomial support of bidegree `(d, e)` polynomials.
    pub fn bidegree(d: u16, e: u16) -> Self {
        Self::rectangle(d + 1, e + 1)
    }

    pub(crate) fn from_sorted_unchecked(points: Vec<Point>) -> Self {
        debug_assert!(!points.is_empty());
        debug_assert!(points.windows(2).all(|w| w[0] < w[1]));
        Diagram { points }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; present for API symmetry with collections.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, p: Point) -> bool {
        self.points.binary_search(&p).is_ok()
    }

    pub fn is_disjoint(&self, other: &Diagram) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.points.len() && j < other.points.len() {
            match self.points[i].cmp(&other.points[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn is_subset(&self, other: &Diagram) -> bool {
        self.points.iter().all(|&p| other.contains(p))
    }

    pub fn union(&self, other: &Diagram) -> Diagram {
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        points.sort_unstable();
        points.dedup();
        Diagram { points }
    }

    /// Coordinate sums `(Σx, Σy)`.
    pub fn coordinate_sums(&self) -> (i128, i128) {
        self.points
            .iter()
            .fold((0, 0), |(sx, sy), p| (sx + p.x as i128, sy + p.y as i128))
    }

    /// `Σ ‖δ‖²` over the diagram.
    pub fn norm_sq_sum(&self) -> i128 {
        self.points.iter().map(|p| p.norm_sq()).sum()
    }

    pub fn center_of_mass(&self) -> (Rational, Rational) {
        let n = self.len() as i128;
        let (sx, sy) = self.coordinate_sums();
        (Rational::new(sx, n), Rational::new(sy, n))
    }

    /// `#D · i(D)`, which is always an integer.
    pub fn scaled_inertia(&self) -> i128 {
        let n = self.len() as i128;
        let (sx, sy) = self.coordinate_sums();
        n * self.norm_sq_sum() - sx * sx - sy * sy
    }

    /// Inertial momentum `Σ ‖δ - c(D)‖²`.
    pub fn inertia(&self) -> Rational {
        Rational::new(self.scaled_inertia(), self.len() as i128)
    }

    /// Column (`Axis::X`) or row (`Axis::Y`) occupancy counts. Missing keys
    /// mean zero.
    pub fn boundary_distribution(&self, axis: Axis) -> BTreeMap<u16, usize> {
        let mut out = BTreeMap::new();
        for p in &self.points {
            let key = match axis {
                Axis::X => p.x,
                Axis::Y => p.y,
            };
            *out.entry(key).or_insert(0) += 1;
        }
        out
    }

    /// True iff every vertical and every horizontal section is a contiguous
    /// run of lattice points.
    pub fn sections_are_segments(&self) -> bool {
        // Points are sorted by (x, y): each column is a consecutive run.
        let columns_ok = self
            .points
            .windows(2)
            .all(|w| w[0].x != w[1].x || w[1].y == w[0].y + 1);
        if !columns_ok {
            return false;
        }
        let mut by_row: Vec<Point> = self.points.iter().map(|p| Point::new(p.y, p.x)).collect();
        by_row.sort_unstable();
        by_row
            .windows(2)
            .all(|w| w[0].x != w[1].x || w[1].y == w[0].y + 1)
    }

    /// True iff the set of occupied columns is a contiguous range.
    pub fn column_projection_is_segment(&self) -> bool {
        let first = self.points[0].x;
        let last = self.points[self.points.len() - 1].x;
        let distinct = self.boundary_distribution(Axis::X).len();
        distinct == (last - first) as usize + 1
    }

    /// Lowest occupied row in each column, as `(column, min_y)` sorted by
    /// column.
    pub fn column_minima(&self) -> Vec<(u16, u16)> {
        let mut out: Vec<(u16, u16)> = Vec::new();
        for p in &self.points {
            match out.last() {
                Some(&(x, _)) if x == p.x => {}
                _ => out.push((p.x, p.y)),
            }
        }
        out
    }

    /// Bounding box as `(min_x, min_y, max_x, max_y)`.
    pub fn bounding_box(&self) -> (u16, u16, u16, u16) {
        let min_x = self.points[0].x;
        let max_x = self.points[self.points.len() - 1].x;
        let min_y = self.points.iter().map(|p| p.y).min().unwrap_or(0);
        let max_y = self.points.iter().map(|p| p.y).max().unwrap_or(0);
        (min_x, min_y, max_x, max_y)
    }

    /// Translates by `(dx, dy)`; fails if any point leaves the u16 range.
    pub fn translate(&self, dx: i64, dy: i64) -> Result<Diagram, DiagramError> {
        let points = self
            .points
            .iter()
            .map(|p| Point::checked(p.x as i64 + dx, p.y as i64 + dy))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Diagram { points })
    }

    /// Translates so that the minimum x and minimum y are both zero.
    pub fn normalized(&self) -> Diagram {
        let (min_x, min_y, _, _) = self.bounding_box();
        let points = self
            .points
            .iter()
            .map(|p| Point::new(p.x - min_x, p.y - min_y))
            .collect();
        Diagram { points }
    }

    /// Image under `g`, translated back so that it touches both axes.
    pub fn transformed(&self, g: Isometry) -> Diagram {
        let mapped: Vec<(i64, i64)> = self
            .points
            .iter()
            .map(|p| g.apply(p.x as i64, p.y as i64))
            .collect();
        let min_x = mapped.iter().map(|m| m.0).min().unwrap_or(0);
        let min_y = mapped.iter().map(|m| m.1).min().unwrap_or(0);
        let mut points: Vec<Point> = mapped
            .into_iter()
            .map(|(x, y)| Point::new((x - min_x) as u16, (y - min_y) as u16))
            .collect();
        points.sort_unstable();
        Diagram { points }
    }

    /// All distinct normalized images under the dihedral group, sorted.
    pub fn distinct_images(&self) -> Vec<Diagram> {
        let mut images: Vec<Diagram> = Isometry::ALL.iter().map(|&g| self.transformed(g)).collect();
        images.sort();
        images.dedup();
        images
    }

    /// Least normalized dihedral image in the point-list ordering.
    pub fn canonical_form(&self) -> Diagram {
        Isometry::ALL
            .iter()
            .map(|&g| self.transformed(g))
            .min()
            .expect("eight images")
    }

    pub fn minkowski_sum(&self, other: &Diagram) -> Diagram {
        let mut points = Vec::with_capacity(self.len() * other.len());
        for a in &self.points {
            for b in &other.points {
                points.push(Point::new(a.x + b.x, a.y + b.y));
            }
        }
        points.sort_unstable();
        points.dedup();
        Diagram { points }
    }
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.points.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

#[derive(Serialize, Deserialize)]
struct DiagramRepr {
    points: Vec<[u16; 2]>,
}

impl Serialize for Diagram {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        DiagramRepr {
            points: self.points.iter().map(|p| [p.x, p.y]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Diagram {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = DiagramRepr::deserialize(deserializer)?;
        Diagram::new(repr.points.into_iter().map(|[x, y]| Point::new(x, y)))
            .map_err(serde::de::Error::custom)
    }
}

/// Renders a diagram as text: top row is the highest `y`, `#` marks a point,
/// `.` an empty cell. Every row ends with a newline.
pub fn to_text(d: &Diagram) -> String {
    let (_, _, max_x, max_y) = d.bounding_box();
    let mut out = String::with_capacity((max_x as usize + 2) * (max_y as usize + 1));
    for y in (0..=max_y).rev() {
        for x in 0..=max_x {
            out.push(if d.contains(Point::new(x, y)) {
                '#'
            } else {
                '.'
            });
        }
        out.push('\n');
    }
    out
}

/// Parses the text form produced by [`to_text`]. `.` and spaces are empty
/// cells; any other character is a point. The last line is `y = 0`.
pub fn from_text(text: &str) -> Result<Diagram, DiagramError> {
    let lines: Vec<&str> = text.lines().collect();
    let lines: &[&str] = match lines.iter().rposition(|l| !l.trim().is_empty()) {
        Some(last) => &lines[..=last],
        None => return Err(DiagramError::Empty),
    };
    if lines.len() > u16::MAX as usize + 1 {
        return Err(DiagramError::Parse("too many rows".into()));
    }
    let height = lines.len();
    let mut points = Vec::new();
    for (row, line) in lines.iter().enumerate() {
        let y = (height - 1 - row) as i64;
        for (x, ch) in line.chars().enumerate() {
            if ch != '.' && ch != ' ' && ch != '\r' {
                points.push(Point::checked(x as i64, y)?);
            }
        }
    }
    Diagram::new(points)
}

/// Reads a diagram from either its JSON form or its text form.
pub fn parse_any(input: &str) -> Result<Diagram, DiagramError> {
    if input.trim_start().starts_with('{') {
        serde_json::from_str(input).map_err(|e| DiagramError::Parse(e.to_string()))
    } else {
        from_text(input)
    }
}
