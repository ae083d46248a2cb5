//! Scale and zoning effects of aggregating counts into areal units.
//!
//! A [`CountGrid`] holds a numerator and denominator per cell (for example
//! unemployed people and labour force). A [`Zoning`] groups cells into zones;
//! the zone rate is the ratio of summed numerators to summed denominators.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::math;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaupError {
    #[error("cell ({col}, {row}) has numerator {numerator} above denominator {denominator}")]
    RateAboveOne { col: usize, row: usize, numerator: u64, denominator: u64 },
    #[error("grid has {actual} cells, expected {expected}")]
    Shape { expected: usize, actual: usize },
    #[error("zoning '{zoning}' does not assign cell ({col}, {row})")]
    MissingCell { zoning: String, col: usize, row: usize },
    #[error("zoning '{zoning}' assigns cell ({col}, {row}) outside the grid")]
    OutsideGrid { zoning: String, col: usize, row: usize },
    #[error("zoning '{zoning}' assigns cell ({col}, {row}) twice")]
    DuplicateCell { zoning: String, col: usize, row: usize },
    #[error("zone '{fine}' of '{fine_zoning}' straddles zones '{first}' and '{second}' of '{coarse_zoning}'")]
    NotNested {
        fine_zoning: String,
        coarse_zoning: String,
        fine: String,
        first: String,
        second: String,
    },
    #[error("zonings '{first}' and '{second}' have {first_count} and {second_count} zones")]
    ZoneCountMismatch { first: String, second: String, first_count: usize, second_count: usize },
    #[error("need at least {needed} zonings, got {got}")]
    TooFewZonings { needed: usize, got: usize },
}

/// Numerator/denominator counts on a `ncols x nrows` lattice. Cells are
/// indexed `row * ncols + col`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountGrid {
    ncols: usize,
    nrows: usize,
    cells: Vec<(u64, u64)>,
}

impl CountGrid {
    pub fn new(ncols: usize, nrows: usize, cells: Vec<(u64, u64)>) -> Result<Self, MaupError> {
        if cells.len() != ncols * nrows {
            return Err(MaupError::Shape { expected: ncols * nrows, actual: cells.len() });
        }
        for (i, &(numerator, denominator)) in cells.iter().enumerate() {
            if numerator > denominator {
                return Err(MaupError::RateAboveOne {
                    col: i % ncols,
                    row: i / ncols,
                    numerator,
                    denominator,
                });
            }
        }
        Ok(CountGrid { ncols, nrows, cells })
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn cell(&self, col: usize, row: usize) -> (u64, u64) {
        self.cells[row * self.ncols + col]
    }

    pub fn cells(&self) -> &[(u64, u64)] {
        &self.cells
    }

    pub fn totals(&self) -> (u64, u64) {
        self.cells
            .iter()
            .fold((0, 0), |(n, d), c| (n + c.0, d + c.1))
    }

    /// Whole-grid rate in percent.
    pub fn global_rate(&self) -> Option<f64> {
        let (n, d) = self.totals();
        percent(n, d)
    }
}

/// Cell-to-zone assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Zoning {
    pub name: String,
    assignment: BTreeMap<(usize, usize), String>,
}

impl Zoning {
    /// From `(col, row, zone)` triples.
    pub fn new(
        name: impl Into<String>,
        cells: impl IntoIterator<Item = (usize, usize, String)>,
    ) -> Result<Self, MaupError> {
        let name = name.into();
        let mut assignment = BTreeMap::new();
        for (col, row, zone) in cells {
            if assignment.insert((col, row), zone).is_some() {
                return Err(MaupError::DuplicateCell { zoning: name, col, row });
            }
        }
        Ok(Zoning { name, assignment })
    }

    /// Every cell its own zone, named `"col,row"`.
    pub fn cells(name: impl Into<String>, ncols: usize, nrows: usize) -> Self {
        Zoning::from_fn(name, ncols, nrows, |c, r| alloc::format!("{c},{r}"))
    }

    /// One zone holding everything.
    pub fn whole(name: impl Into<String>, ncols: usize, nrows: usize) -> Self {
        Zoning::from_fn(name, ncols, nrows, |_, _| "all".to_string())
    }

    /// Zone id of each cell computed by `f(col, row)`.
    pub fn from_fn(
        name: impl Into<String>,
        ncols: usize,
        nrows: usize,
        f: impl Fn(usize, usize) -> String,
    ) -> Self {
        let mut assignment = BTreeMap::new();
        for row in 0..nrows {
            for col in 0..ncols {
                assignment.insert((col, row), f(col, row));
            }
        }
        Zoning { name: name.into(), assignment }
    }

    pub fn zone_of(&self, col: usize, row: usize) -> Option<&str> {
        self.assignment.get(&(col, row)).map(String::as_str)
    }

    pub fn zones(&self) -> BTreeSet<&str> {
        self.assignment.values().map(String::as_str).collect()
    }

    pub fn zone_count(&self) -> usize {
        self.zones().len()
    }

    /// Cells `(col, row)` of one zone.
    pub fn members(&self, zone: &str) -> Vec<(usize, usize)> {
        self.assignment
            .iter()
            .filter(|(_, z)| z.as_str() == zone)
            .map(|(c, _)| *c)
            .collect()
    }

    fn check_covers(&self, g: &CountGrid) -> Result<(), MaupError> {
        for &(col, row) in self.assignment.keys() {
            if col >= g.ncols || row >= g.nrows {
                return Err(MaupError::OutsideGrid { zoning: self.name.clone(), col, row });
            }
        }
        for row in 0..g.nrows {
            for col in 0..g.ncols {
                if !self.assignment.contains_key(&(col, row)) {
                    return Err(MaupError::MissingCell { zoning: self.name.clone(), col, row });
                }
            }
        }
        Ok(())
    }
}

/// Aggregated counts of one zone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoneRate {
    pub numerator: u64,
    pub denominator: u64,
    /// Percent; `None` when the denominator is zero.
    pub rate: Option<f64>,
}

impl ZoneRate {
    /// Rate rounded to a whole percent for display.
    pub fn display_percent(&self) -> Option<i64> {
        self.rate.map(|r| math::round(r) as i64)
    }
}

fn percent(n: u64, d: u64) -> Option<f64> {
    (d > 0).then(|| 100.0 * n as f64 / d as f64)
}

pub fn aggregate_rates(g: &CountGrid, z: &Zoning) -> Result<BTreeMap<String, ZoneRate>, MaupError> {
    z.check_covers(g)?;
    let mut sums: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for row in 0..g.nrows {
        for col in 0..g.ncols {
            let zone = z.zone_of(col, row).expect("coverage checked");
            let (n, d) = g.cell(col, row);
            let e = sums.entry(zone.to_string()).or_insert((0, 0));
            e.0 += n;
            e.1 += d;
        }
    }
    Ok(sums
        .into_iter()
        .map(|(zone, (n, d))| (zone, ZoneRate { numerator: n, denominator: d, rate: percent(n, d) }))
        .collect())
}

/// Spread of zone rates at one aggregation level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSummary {
    pub zoning: String,
    pub zone_count: usize,
    /// `None` when no zone has a defined rate.
    pub min_rate: Option<f64>,
    pub max_rate: Option<f64>,
    pub spread: Option<f64>,
    /// Denominator-weighted rate over all zones; equals the grid rate.
    pub global_rate: Option<f64>,
}

fn summarize(name: &str, rates: &BTreeMap<String, ZoneRate>) -> LevelSummary {
    let defined: Vec<f64> = rates.values().filter_map(|r| r.rate).collect();
    let min = defined.iter().copied().reduce(f64::min);
    let max = defined.iter().copied().reduce(f64::max);
    let (n, d) = rates
        .values()
        .fold((0u64, 0u64), |acc, r| (acc.0 + r.numerator, acc.1 + r.denominator));
    LevelSummary {
        zoning: name.to_string(),
        zone_count: rates.len(),
        min_rate: min,
        max_rate: max,
        spread: min.zip(max).map(|(a, b)| b - a),
        global_rate: percent(n, d),
    }
}

/// Checks that every zone of `fine` lies inside a single zone of `coarse`.
pub fn check_nesting(fine: &Zoning, coarse: &Zoning) -> Result<(), MaupError> {
    let mut parent: BTreeMap<&str, &str> = BTreeMap::new();
    for (cell, zone) in &fine.assignment {
        let Some(up) = coarse.assignment.get(cell) else {
            return Err(MaupError::MissingCell {
                zoning: coarse.name.clone(),
                col: cell.0,
                row: cell.1,
            });
        };
        match parent.get(zone.as_str()) {
            Some(p) if *p != up.as_str() => {
                return Err(MaupError::NotNested {
                    fine_zoning: fine.name.clone(),
                    coarse_zoning: coarse.name.clone(),
                    fine: zone.clone(),
                    first: p.to_string(),
                    second: up.clone(),
                });
            }
            Some(_) => {}
            None => {
                parent.insert(zone.as_str(), up.as_str());
            }
        }
    }
    Ok(())
}

/// Rate spread per level of a fine-to-coarse hierarchy of zonings.
pub fn scale_effect_table(g: &CountGrid, nested: &[Zoning]) -> Result<Vec<LevelSummary>, MaupError> {
    for pair in nested.windows(2) {
        check_nesting(&pair[0], &pair[1])?;
    }
    nested
        .iter()
        .map(|z| aggregate_rates(g, z).map(|r| summarize(&z.name, &r)))
        .collect()
}

/// Rates of each zoning compared across zonings with equal zone counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoningComparison {
    /// Per zoning: name and zone rates ordered by zone id.
    pub rates: Vec<(String, Vec<(String, ZoneRate)>)>,
    pub summaries: Vec<LevelSummary>,
    /// Across-zoning range (max - min) of the largest zone rate.
    pub max_rate_range: Option<f64>,
    /// Across-zoning range of the smallest zone rate.
    pub min_rate_range: Option<f64>,
    /// Across-zoning range of the within-zoning spread.
    pub spread_range: Option<f64>,
}

pub fn zoning_effect_spread(g: &CountGrid, zonings: &[Zoning]) -> Result<ZoningComparison, MaupError> {
    if zonings.len() < 2 {
        return Err(MaupError::TooFewZonings { needed: 2, got: zonings.len() });
    }
    let first = &zonings[0];
    for z in &zonings[1..] {
        if z.zone_count() != first.zone_count() {
            return Err(MaupError::ZoneCountMismatch {
                first: first.name.clone(),
                second: z.name.clone(),
                first_count: first.zone_count(),
                second_count: z.zone_count(),
            });
        }
    }
    let mut rates = Vec::new();
    let mut summaries = Vec::new();
    for z in zonings {
        let r = aggregate_rates(g, z)?;
        summaries.push(summarize(&z.name, &r));
        rates.push((z.name.clone(), r.into_iter().collect()));
    }
    let range_of = |f: &dyn Fn(&LevelSummary) -> Option<f64>| -> Option<f64> {
        let vals: Vec<f64> = summaries.iter().map(f).collect::<Option<Vec<_>>>()?;
        let lo = vals.iter().copied().reduce(f64::min)?;
        let hi = vals.iter().copied().reduce(f64::max)?;
        Some(hi - lo)
    };
    let max_rate_range = range_of(&|s| s.max_rate);
    let min_rate_range = range_of(&|s| s.min_rate);
    let spread_range = range_of(&|s| s.spread);
    Ok(ZoningComparison { rates, summaries, max_rate_range, min_rate_range, spread_range })
}

/// Bundled 4x4 unemployment example.
///
/// The grid is a reconstruction: only four aggregates of the original figure
/// are documented, and the cells are chosen so that
///
/// * cell (0, 0) alone is 20/200 = 10%,
/// * the north-west 2x2 quadrant is (20+10+30+40)/(200+100+500+400) = 8%,
/// * the top row is (20+10+50+60)/(200+100+300+500) = 13%,
/// * column 2 is (20+50+30+20)/(200+300+100+200) = 15%.
///
/// The remaining cells are illustrative fill.
pub mod demo {
    use super::*;

    pub const NCOLS: usize = 4;
    pub const NROWS: usize = 4;

    /// Rows listed north to south, `(numerator, denominator)`.
    const CELLS: [[(u64, u64); NCOLS]; NROWS] = [
        [(20, 200), (10, 100), (50, 300), (60, 500)],
        [(30, 500), (40, 400), (20, 200), (10, 300)],
        [(15, 100), (25, 200), (30, 100), (40, 400)],
        [(35, 300), (20, 100), (20, 200), (30, 200)],
    ];

    /// A documented grouping: zoning name, zone id, and the quoted percent.
    pub struct Grouping {
        pub zoning: &'static str,
        pub zone: &'static str,
        pub percent: i64,
    }

    pub const GROUPINGS: [Grouping; 4] = [
        Grouping { zoning: "cells", zone: "0,0", percent: 10 },
        Grouping { zoning: "quadrants", zone: "NW", percent: 8 },
        Grouping { zoning: "rows", zone: "row0", percent: 13 },
        Grouping { zoning: "columns", zone: "col2", percent: 15 },
    ];

    pub fn grid() -> CountGrid {
        CountGrid::new(NCOLS, NROWS, CELLS.iter().flatten().copied().collect())
            .expect("demo grid is valid")
    }

    pub fn cells() -> Zoning {
        Zoning::cells("cells", NCOLS, NROWS)
    }

    pub fn quadrants() -> Zoning {
        Zoning::from_fn("quadrants", NCOLS, NROWS, |c, r| {
            let ns = if r < 2 { "N" } else { "S" };
            let we = if c < 2 { "W" } else { "E" };
            alloc::format!("{ns}{we}")
        })
    }

    pub fn rows() -> Zoning {
        Zoning::from_fn("rows", NCOLS, NROWS, |_, r| alloc::format!("row{r}"))
    }

    pub fn columns() -> Zoning {
        Zoning::from_fn("columns", NCOLS, NROWS, |c, _| alloc::format!("col{c}"))
    }

    pub fn whole() -> Zoning {
        Zoning::whole("whole", NCOLS, NROWS)
    }

    /// Fine-to-coarse hierarchy: cells, quadrants, whole grid.
    pub fn hierarchy() -> Vec<Zoning> {
        alloc::vec![cells(), quadrants(), whole()]
    }

    /// Three 4-zone configurations of the same grid.
    pub fn configurations() -> Vec<Zoning> {
        alloc::vec![quadrants(), rows(), columns()]
    }

    pub fn all_zonings() -> Vec<Zoning> {
        alloc::vec![cells(), quadrants(), rows(), columns(), whole()]
    }
}
