//! Bivariate observations and CSV ingestion.
//!
//! A [`Dataset`] is an ordered list of finite 2-D points. Indices are stable:
//! point `i` of the dataset is point `i` in every downstream result.

use std::fmt;
use std::io::{Read, Write};
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest admissible sample size: a 3-point MCD start needs p + 1 = 3
/// points and a non-degenerate covariance needs one more.
pub const MIN_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    /// Counterclockwise rotation by a right angle.
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x, y): (f64, f64)) -> Self {
        Point2::new(x, y)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DatasetError {
    #[error("non-numeric cell at row {row}, column {column}: {value:?}")]
    NonNumericCell {
        /// 1-based data row, header excluded.
        row: usize,
        column: String,
        value: String,
    },
    #[error("too few rows: {n} observations, at least {MIN_POINTS} required")]
    TooFewRows { n: usize },
    #[error("missing column {0}")]
    MissingColumn(String),
    #[error("non-finite coordinate at index {0}")]
    NonFinite(usize),
    #[error("malformed CSV: {0}")]
    Csv(String),
}

/// Validated bivariate sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    points: Vec<Point2>,
}

impl Dataset {
    pub fn new(points: Vec<Point2>) -> Result<Self, DatasetError> {
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(DatasetError::NonFinite(i));
        }
        if points.len() < MIN_POINTS {
            return Err(DatasetError::TooFewRows { n: points.len() });
        }
        Ok(Self { points })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self, DatasetError> {
        Self::new(pairs.iter().copied().map(Point2::from).collect())
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Point2> {
        self.points
    }

    /// Writes `x,y` rows with 17 significant digits, enough to re-parse
    /// every coordinate bit-exactly.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,y")?;
        for p in &self.points {
            writeln!(out, "{:.16e},{:.16e}", p.x, p.y)?;
        }
        Ok(())
    }
}

/// Column chosen either by header name or by 0-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelector {
    Name(String),
    Index(usize),
}

impl FromStr for ColumnSelector {
    type Err = std::convert::Infallible;

    /// All-digit strings select by position, anything else by name.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnSelector::Index(i),
            Err(_) => ColumnSelector::Name(s.to_string()),
        })
    }
}

impl fmt::Display for ColumnSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnSelector::Name(n) => f.write_str(n),
            ColumnSelector::Index(i) => write!(f, "{i}"),
        }
    }
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn resolve(selector: &ColumnSelector, header: Option<&csv::StringRecord>) -> Result<usize, DatasetError> {
    match selector {
        ColumnSelector::Index(i) => Ok(*i),
        ColumnSelector::Name(name) => header
            .and_then(|h| h.iter().position(|c| c.trim() == name))
            .ok_or_else(|| DatasetError::MissingColumn(name.clone())),
    }
}

/// Parses two numeric columns from RFC-4180 CSV text.
///
/// The first row is taken as a header when every selected cell in it is
/// non-numeric. Selecting a column by name requires such a header.
pub fn parse_csv<R: Read>(input: R, x: &ColumnSelector, y: &ColumnSelector) -> Result<Dataset, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut records = reader.records();

    let first = match records.next() {
        Some(r) => r.map_err(|e| DatasetError::Csv(e.to_string()))?,
        None => return Err(DatasetError::TooFewRows { n: 0 }),
    };

    let by_name = matches!(x, ColumnSelector::Name(_)) || matches!(y, ColumnSelector::Name(_));
    let first_is_header = if by_name {
        true
    } else {
        let cells = [x, y].map(|s| match s {
            ColumnSelector::Index(i) => first.get(*i),
            ColumnSelector::Name(_) => None,
        });
        cells.iter().all(|c| c.is_some_and(|c| parse_cell(c).is_none()))
    };

    let header = first_is_header.then_some(&first);
    let xi = resolve(x, header)?;
    let yi = resolve(y, header)?;
    let column_label = |idx: usize| -> String {
        header
            .and_then(|h| h.get(idx))
            .map(|s| s.trim().to_string())
            .unwrap_or_else(|| idx.to_string())
    };
    if let Some(h) = header {
        for idx in [xi, yi] {
            if h.get(idx).is_none() {
                return Err(DatasetError::MissingColumn(idx.to_string()));
            }
        }
    }

    let mut points = Vec::new();
    let data_rows = (!first_is_header)
        .then(|| Ok(first.clone()))
        .into_iter()
        .chain(records);
    for (row0, record) in data_rows.enumerate() {
        let record = record.map_err(|e| DatasetError::Csv(e.to_string()))?;
        let row = row0 + 1;
        let mut coords = [0.0; 2];
        for (slot, idx) in coords.iter_mut().zip([xi, yi]) {
            let cell = record
                .get(idx)
                .ok_or_else(|| DatasetError::MissingColumn(column_label(idx)))?;
            *slot = parse_cell(cell).ok_or_else(|| DatasetError::NonNumericCell {
                row,
                column: column_label(idx),
                value: cell.to_string(),
            })?;
        }
        points.push(Point2::new(coords[0], coords[1]));
    }
    Dataset::new(points)
}

/// The eight-point worked example used throughout the tests and docs.
pub fn toy_dataset() -> Dataset {
    Dataset::from_pairs(&[
        (7.0, 5.0),
        (7.0, 7.0),
        (9.0, 4.0),
        (5.0, 4.0),
        (14.0, 9.0),
        (0.0, 9.0),
        (7.0, -3.0),
        (19.0, 20.0),
    ])
    .expect("toy dataset is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cols(x: &str, y: &str) -> (ColumnSelector, ColumnSelector) {
        (x.parse().unwrap(), y.parse().unwrap())
    }

    #[test]
    fn two_rows_are_too_few() {
        let (x, y) = cols("x", "y");
        let err = parse_csv("x,y\n7,5\n7,7".as_bytes(), &x, &y).unwrap_err();
        assert_eq!(err, DatasetError::TooFewRows { n: 2 });
    }

    #[test]
    fn toy_csv_parses_in_file_order() {
        let text = "x,y\n7,5\n7,7\n9,4\n5,4\n14,9\n0,9\n7,-3\n19,20\n";
        let (x, y) = cols("x", "y");
        let data = parse_csv(text.as_bytes(), &x, &y).unwrap();
        assert_eq!(data.len(), 8);
        assert_eq!(data.points()[0], Point2::new(7.0, 5.0));
        assert_eq!(data.points()[7], Point2::new(19.0, 20.0));
        assert_eq!(data, toy_dataset());
    }

    #[test]
    fn nan_cell_is_rejected_with_location() {
        let (x, y) = cols("a", "b");
        let err = parse_csv("a,b\n1,2\n3,NaN\n4,5\n6,7\n".as_bytes(), &x, &y).unwrap_err();
        assert_eq!(
            err,
            DatasetError::NonNumericCell { row: 2, column: "b".into(), value: "NaN".into() }
        );
    }

    #[test]
    fn headerless_by_index() {
        let (x, y) = cols("1", "0");
        let data = parse_csv("1,2\n3,4\n5,6\n7,8.5\n".as_bytes(), &x, &y).unwrap();
        assert_eq!(data.points()[3], Point2::new(8.5, 7.0));
    }

    #[test]
    fn header_detected_with_index_selectors() {
        let (x, y) = cols("0", "2");
        let text = "a,label,b\n1,foo,2\n3,bar,4\n5,baz,6\n7,qux,8\n";
        let data = parse_csv(text.as_bytes(), &x, &y).unwrap();
        assert_eq!(data.len(), 4);
        let err = parse_csv(text.as_bytes(), &"1".parse().unwrap(), &y).unwrap_err();
        assert!(matches!(err, DatasetError::NonNumericCell { row: 1, .. }));
    }

    #[test]
    fn quoted_fields_and_missing_column() {
        let (x, y) = cols("x", "y");
        let text = "\"x\",\"y\"\n\"1\",2\n3,\"4\"\n5,6\n7,8\n";
        assert_eq!(parse_csv(text.as_bytes(), &x, &y).unwrap().len(), 4);
        let err = parse_csv(text.as_bytes(), &x, &"z".parse().unwrap()).unwrap_err();
        assert_eq!(err, DatasetError::MissingColumn("z".into()));
    }

    #[test]
    fn infinite_values_rejected() {
        let err = Dataset::from_pairs(&[(0.0, 0.0), (1.0, f64::INFINITY), (2.0, 0.0), (3.0, 1.0)]).unwrap_err();
        assert_eq!(err, DatasetError::NonFinite(1));
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bit_exact(pts in prop::collection::vec((-1e12f64..1e12, -1e-3f64..1e-3), 4..40)) {
            let data = Dataset::from_pairs(&pts).unwrap();
            let mut buf = Vec::new();
            data.write_csv(&mut buf).unwrap();
            let (x, y) = cols("x", "y");
            let back = parse_csv(buf.as_slice(), &x, &y).unwrap();
            for (a, b) in data.points().iter().zip(back.points()) {
                prop_assert_eq!(a.x.to_bits(), b.x.to_bits());
                prop_assert_eq!(a.y.to_bits(), b.y.to_bits());
            }
        }
    }
}
