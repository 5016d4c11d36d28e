//! Published reference error matrices for a 12-class scene, one per
//! decision rule, as printed row-normalized proportions (rows = reference
//! classes C1..C12, columns = assigned classes C1..C12, `.` = blank cell).
#![allow(dead_code)]

use msclassify::{ClassId, ErrorMatrix};

/// Reference pixels per class: five 4x4 regions, except C4 and C8 whose
/// printed fractions (1/64 and 1/45 granularity) imply 64 and 45 pixels.
pub const ROW_SIZES: [u64; 12] = [80, 80, 80, 64, 80, 80, 80, 45, 80, 80, 80, 80];

/// Parallelepiped. Row C8 is printed with its last entry shifted one
/// column right; it is placed under C12 here.
pub const PP_TABLE: &str = "
0.9749 0.025  .      .      .      .      .      .      .      .      .      .
0.025  0.5249 .      0.0625 0.3249 .      .      .      .      .      .      0.0625
0.125  .      0.8624 .      .      .      0.0125 .      .      .      .      .
.      0.5    0.0312 0.3125 0.0312 .      0.0937 .      .      .      .      0.0312
.      0.3124 .      0.0125 0.6499 .      .      .      .      .      .      0.025
.      .      0.0375 .      .      0.8124 0.025  .      .      .      .      0.125
.      .      0.0125 .      .      0.125  0.8624 .      .      .      .      .
0.1555 .      .      .      0.2444 .      .      0.1333 0.0222 .      .      0.4444
.      .      .      .      .      .      .      .      0.9999 .      .      .
0.2874 .      0.2375 .      .      0.1625 .      .      .      0.3124 .      .
0.1625 0.075  0.1125 .      0.0375 0.0125 .      .      .      .      0.5499 .
0.05   0.025  0.0375 0.0125 0.175  .      .      .      .      .      0.075  0.6249
";

/// Mahalanobis distance.
pub const MD_TABLE: &str = "
0.5874 .      .      .      0.3374 .      .      .      .      .      .      0.075
.      0.0875 .      .      0.4749 .      .      .      .      .      .      0.4374
.      .      0.4749 .      .      .      .      .      .      0.3624 0.1625 .
.      .      .      0.25   0.0156 .      .      .      .      0.0625 0.2031 0.4687
.      .      .      .      0.9624 .      .      .      .      .      0.0125 0.025
.      .      .      .      .      0.15   .      .      .      0.8499 .      .
.      .      .      .      .      0.2625 0.6249 .      .      0.1125 .      .
.      .      .      .      .      .      .      0.2888 .      .      .      0.7111
.      .      .      .      .      .      .      .      0.9999 .      .      .
.      .      .      .      .      .      .      .      .      0.9999 .      .
.      .      .      .      0.0125 .      .      .      .      0.0625 0.9249 .
.      .      .      0.0125 .      .      .      .      .      0.0125 0.025  0.9499
";

/// Maximum likelihood.
pub const ML_TABLE: &str = "
0.3999 .      .      .      0.4374 .      .      .      .      .      .      0.1625
.      0.0875 .      .      0.4499 .      .      .      .      .      .      0.4624
.      .      0.4624 .      .      .      .      .      .      0.3624 0.175  .
.      .      .      0.2031 .      .      .      .      .      0.0468 0.0781 0.6718
.      .      .      .      0.9249 .      .      .      .      .      0.0375 0.0375
.      .      .      .      .      0.1125 .      .      .      0.8874 .      .
.      .      .      .      .      0.2    0.6249 .      .      0.175  .      .
.      .      .      .      .      .      .      0.2888 .      .      .      0.7111
.      .      .      .      .      .      .      .      0.9999 .      .      .
.      .      .      .      .      .      .      .      .      0.9999 .      .
.      .      .      .      .      .      .      .      .      0.0625 0.9374 .
.      .      .      .      .      .      .      .      .      0.0125 0.025  0.9624
";

/// Euclidean distance.
pub const ED_TABLE: &str = "
0.9624 0.025  .      .      0.0125 .      .      .      .      .      .      .
.      0.8749 .      .      0.1    .      .      .      .      .      .      0.025
.      .      0.9999 .      .      .      .      .      .      .      .      .
.      .      0.1093 0.8906 .      .      .      .      .      .      .      .
.      0.1    .      .      0.8999 .      .      .      .      .      .      .
.      .      .      .      .      0.9499 .      .      .      0.05   .      .
.      .      .      .      .      .      0.9999 .      .      .      .      .
.      .      .      .      .      .      .      1      .      .      .      .
.      .      .      .      .      .      .      .      0.9999 .      .      .
.      .      0.2375 .      .      .      .      .      .      0.7624 .      .
.      .      0.1625 .      .      .      .      .      .      .      0.8374 .
.      .      .      0.2    .      .      .      .      .      .      .      0.7999
";

/// Overall accuracy printed under each matrix, in `TABLES` order.
pub const PRINTED_OVERALL: [f64; 4] = [0.634983, 0.608375, 0.583633, 0.914758];

pub fn proportions(table: &str) -> Vec<Vec<f64>> {
    table
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|c| if c == "." { 0.0 } else { c.parse().unwrap() })
                .collect()
        })
        .collect()
}

/// Pixel counts behind a printed table: each proportion times its row size,
/// rounded. Printed values are truncated to four decimals, so rounding
/// recovers the integer count. Returns rows with a trailing zero
/// unclassified column.
pub fn counts(table: &str) -> Vec<Vec<u64>> {
    let mut rows: Vec<Vec<u64>> = proportions(table)
        .iter()
        .zip(ROW_SIZES)
        .map(|(row, n)| {
            let mut r: Vec<u64> = row.iter().map(|p| (p * n as f64).round() as u64).collect();
            r.push(0);
            r
        })
        .collect();
    if table == PP_TABLE {
        // row C11 is printed 0.05 short of a full row; the column totals
        // leave room for the missing 4 pixels under C10
        rows[10][9] += 4;
    }
    rows
}

pub fn classes() -> Vec<ClassId> {
    (0..12).map(|i| ClassId::new(i).unwrap()).collect()
}

pub fn error_matrix(table: &str) -> ErrorMatrix {
    ErrorMatrix::from_counts(classes(), counts(table)).unwrap()
}

pub const TABLES: [&str; 4] = [PP_TABLE, MD_TABLE, ML_TABLE, ED_TABLE];
