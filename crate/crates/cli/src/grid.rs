//! `grid` command: constants and bounds of a family truncated on [a, b], with
//! the interval given by the masses F(a) and 1 - F(b) cut from each tail.

use std::io::Write;

use poincare::bounds::{self, BoundMethod};
use poincare::{poincare_constant, DistributionSpec, Family};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::format::csv_num;

pub const MAX_RESOLUTION: usize = 200;

pub const COLUMNS: [&str; 13] = [
    "lower_mass",
    "upper_mass",
    "a",
    "b",
    "constant",
    "method",
    "error_estimate",
    "variance",
    "transport_logistic",
    "transport_doubleexp",
    "muckenhoupt_lower",
    "muckenhoupt_upper",
    "error",
];

#[derive(Debug, Clone)]
pub struct GridRequest {
    pub family: Family,
    pub location: f64,
    pub scale: f64,
    pub resolution: usize,
    pub tol: f64,
}

/// One cell: masses `lower = F(a)` and `upper = 1 - F(b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub lower: f64,
    pub upper: f64,
}

impl GridCell {
    pub fn new(lower: f64, upper: f64) -> CliResult<Self> {
        let open = |p: f64| p > 0.0 && p < 1.0;
        if !(open(lower) && open(upper)) {
            return Err(CliError::Input(format!(
                "tail masses must lie in (0, 1), got {lower} and {upper}"
            )));
        }
        if lower + upper >= 1.0 {
            return Err(CliError::Input(format!(
                "tail masses {lower} + {upper} leave an empty interval"
            )));
        }
        Ok(Self { lower, upper })
    }

    /// The truncation interval [F⁻¹(lower), F⁻¹(1 - upper)].
    pub fn interval(&self, parent: &DistributionSpec) -> poincare::Result<(f64, f64)> {
        Ok((parent.quantile(self.lower)?, parent.quantile(1.0 - self.upper)?))
    }
}

impl GridRequest {
    pub fn validate(&self) -> CliResult<DistributionSpec> {
        if self.resolution == 0 || self.resolution > MAX_RESOLUTION {
            return Err(CliError::Input(format!(
                "resolution must be in 1..={MAX_RESOLUTION}, got {}",
                self.resolution
            )));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(CliError::Input(format!("tolerance must be in (0, 1), got {}", self.tol)));
        }
        Ok(DistributionSpec::new(self.family, self.location, self.scale)?)
    }

    /// Cell centres (k + 1/2)/resolution on both axes, keeping the nonempty
    /// intervals, in row-major order.
    pub fn cells(&self) -> Vec<GridCell> {
        let r = self.resolution;
        let axis = |k: usize| (k as f64 + 0.5) / r as f64;
        (0..r)
            .flat_map(|i| (0..r).map(move |j| (axis(i), axis(j))))
            .filter_map(|(x, y)| GridCell::new(x, y).ok())
            .collect()
    }
}

/// Output row; `None` numbers are written as empty fields.
#[derive(Debug, Clone, Default)]
pub struct GridRow {
    pub cell: Option<GridCell>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub constant: Option<f64>,
    pub method: String,
    pub error_estimate: Option<f64>,
    pub variance: Option<f64>,
    pub transport_logistic: Option<f64>,
    pub transport_doubleexp: Option<f64>,
    pub muckenhoupt: Option<(f64, f64)>,
    pub error: String,
}

pub fn compute_cell(parent: &DistributionSpec, cell: GridCell, tol: f64) -> GridRow {
    let mut row = GridRow {
        cell: Some(cell),
        ..GridRow::default()
    };
    let run = |row: &mut GridRow| -> poincare::Result<()> {
        let (a, b) = cell.interval(parent)?;
        row.a = Some(a);
        row.b = Some(b);
        let d = parent.truncated(a, b)?;
        let c = poincare_constant(&d, tol)?;
        row.constant = Some(c.value);
        row.method = c.method.to_string();
        row.error_estimate = Some(c.error_estimate);
        for r in bounds::all_bounds(&d)? {
            match r.method {
                BoundMethod::Variance => row.variance = Some(r.lower),
                BoundMethod::TransportLogistic => row.transport_logistic = Some(r.upper),
                BoundMethod::TransportDoubleexp => row.transport_doubleexp = Some(r.upper),
                BoundMethod::Muckenhoupt => row.muckenhoupt = Some((r.lower, r.upper)),
                _ => {}
            }
        }
        Ok(())
    };
    if let Err(e) = run(&mut row) {
        row.error = format!("{}: {e}", e.kind());
    }
    row
}

/// Computes every cell in parallel and returns rows in grid order.
pub fn compute_grid(req: &GridRequest) -> CliResult<Vec<GridRow>> {
    let parent = req.validate()?;
    Ok(req
        .cells()
        .into_par_iter()
        .map(|cell| compute_cell(&parent, cell, req.tol))
        .collect())
}

pub fn write_csv<W: Write>(rows: &[GridRow], digits: usize, out: W) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for row in rows {
        let n = |x: Option<f64>| csv_num(x, digits);
        let cell = row.cell.expect("grid rows carry their cell");
        w.write_record([
            n(Some(cell.lower)),
            n(Some(cell.upper)),
            n(row.a),
            n(row.b),
            n(row.constant),
            row.method.clone(),
            n(row.error_estimate),
            n(row.variance),
            n(row.transport_logistic),
            n(row.transport_doubleexp),
            n(row.muckenhoupt.map(|m| m.0)),
            n(row.muckenhoupt.map(|m| m.1)),
            row.error.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(family: Family, resolution: usize) -> GridRequest {
        GridRequest {
            family,
            location: 0.0,
            scale: 1.0,
            resolution,
            tol: 1e-6,
        }
    }

    #[test]
    fn empty_intervals_are_rejected() {
        assert!(GridCell::new(0.5, 0.5).is_err());
        assert!(GridCell::new(0.7, 0.4).is_err());
        assert!(GridCell::new(0.0, 0.4).is_err());
        assert!(GridCell::new(0.3, 0.4).is_ok());
        let cells = request(Family::Normal, 10).cells();
        assert_eq!(cells.len(), 45);
        assert!(cells.iter().all(|c| c.lower + c.upper < 1.0));
    }

    #[test]
    fn resolution_is_capped() {
        assert!(request(Family::Normal, 201).validate().is_err());
        assert!(request(Family::Normal, 0).validate().is_err());
        assert!(request(Family::Normal, 200).validate().is_ok());
    }

    #[test]
    fn doubleexp_cells_right_of_the_median_follow_the_closed_form() {
        let parent = DistributionSpec::standard(Family::DoubleExponential);
        let row = compute_cell(&parent, GridCell::new(0.625, 0.125).unwrap(), 1e-8);
        let (a, b) = (row.a.unwrap(), row.b.unwrap());
        assert!(a >= 0.0);
        let w = std::f64::consts::PI / (b - a);
        assert!((row.constant.unwrap() - 1.0 / (0.25 + w * w)).abs() < 1e-10);
    }

    #[test]
    fn symmetric_normal_cells_match_the_kummer_root() {
        let parent = DistributionSpec::standard(Family::Normal);
        let row = compute_cell(&parent, GridCell::new(0.15, 0.15).unwrap(), 1e-8);
        let (a, b) = (row.a.unwrap(), row.b.unwrap());
        let c = poincare::exact::truncated_normal_constant(a, b).unwrap().estimate.value;
        assert!((row.constant.unwrap() - c).abs() < 1e-12);
        assert!(row.variance.unwrap() <= c && c <= row.transport_logistic.unwrap());
    }

    #[test]
    fn failed_cells_become_error_rows() {
        // no closed form here, finite elements take over
        let parent = DistributionSpec::standard(Family::Triangular);
        let row = compute_cell(&parent, GridCell::new(0.5, 0.25).unwrap(), 1e-6);
        assert!(row.error.is_empty(), "{}", row.error);
        let mut rows = vec![row];
        rows.push(GridRow {
            cell: Some(GridCell::new(0.1, 0.1).unwrap()),
            error: "numerical: boom".into(),
            ..GridRow::default()
        });
        let mut buf = Vec::new();
        write_csv(&rows, 6, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], COLUMNS.join(","));
        assert!(lines[2].ends_with("numerical: boom"));
        assert!(!text.contains("NaN"));
    }
}
