//! Bundled coincidence data.
//!
//! The Animal Acts experiment had 81 participants. The published
//! probabilities are three-decimal roundings of `n / 81`, and the published
//! expectation values are exact in those counts, so the counts are the
//! primary record here. [`animal_acts_printed`] keeps the rounded numbers.

use crate::bell::{BellData, JointTable, TableOptions};
use crate::error::Result;

pub const ANIMAL_ACTS_SUBJECTS: u32 = 81;

/// Counts per context (AB, AB′, A′B, A′B′) on the (11, 12, 21, 22) grid.
pub const ANIMAL_ACTS_COUNTS: [[u32; 4]; 4] = [
    [4, 51, 21, 5],
    [48, 2, 24, 7],
    [63, 7, 7, 4],
    [12, 7, 8, 54],
];

/// The sixteen probabilities as printed, three decimals.
pub const ANIMAL_ACTS_PRINTED: [[f64; 4]; 4] = [
    [0.049, 0.630, 0.259, 0.062],
    [0.593, 0.025, 0.296, 0.086],
    [0.778, 0.086, 0.086, 0.049],
    [0.148, 0.086, 0.099, 0.667],
];

pub fn animal_acts() -> BellData {
    let n = f64::from(ANIMAL_ACTS_SUBJECTS);
    let grids = ANIMAL_ACTS_COUNTS.map(|row| row.map(|k| f64::from(k) / n));
    BellData::from_grids(grids)
        .expect("count tables are normalized")
        .with_label("animal-acts")
}

/// The printed tables. A′B sums to 0.999, so they only load with
/// renormalization or a loosened sum tolerance.
pub fn animal_acts_printed(options: TableOptions) -> Result<BellData> {
    let mut tables = Vec::with_capacity(4);
    for g in ANIMAL_ACTS_PRINTED {
        tables.push(JointTable::with_options(
            [[g[0], g[1]], [g[2], g[3]]],
            [1.0, -1.0],
            [1.0, -1.0],
            options,
        )?);
    }
    let tables: [JointTable; 4] = tables.try_into().expect("four tables");
    Ok(BellData::new(tables).with_label("animal-acts (printed)"))
}

pub fn uniform() -> BellData {
    BellData::from_grids([[0.25; 4]; 4]).expect("uniform tables are normalized").with_label("uniform")
}
