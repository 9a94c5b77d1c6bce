use std::fmt::Write as _;
use std::path::Path;

use super::LabelError;
use crate::geo::{GeoPoint, KM_PER_DEGREE};

/// Side of the square aggregation window, in kilometres (25 km²).
pub const LABEL_WINDOW_KM: f64 = 5.0;

/// A north-up lat/lon grid, as read from an ESRI ASCII raster.
///
/// Row 0 is the northernmost row.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRaster {
    ncols: usize,
    nrows: usize,
    /// Longitude of the western edge.
    xll: f64,
    /// Latitude of the southern edge.
    yll: f64,
    cellsize: f64,
    nodata: Option<f64>,
    values: Vec<f64>,
}

impl GridRaster {
    pub fn new(
        ncols: usize,
        nrows: usize,
        xll_corner: f64,
        yll_corner: f64,
        cellsize: f64,
        nodata: Option<f64>,
        values: Vec<f64>,
    ) -> Result<Self, LabelError> {
        if ncols == 0 || nrows == 0 {
            return Err(LabelError::Raster("raster has no cells".into()));
        }
        if !(cellsize > 0.0) || !cellsize.is_finite() {
            return Err(LabelError::Raster(format!("invalid cellsize {cellsize}")));
        }
        if values.len() != ncols * nrows {
            return Err(LabelError::Raster(format!(
                "expected {} values, found {}",
                ncols * nrows,
                values.len()
            )));
        }
        Ok(Self {
            ncols,
            nrows,
            xll: xll_corner,
            yll: yll_corner,
            cellsize,
            nodata,
            values,
        })
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn cellsize(&self) -> f64 {
        self.cellsize
    }

    pub fn cell_count(&self) -> usize {
        self.values.len()
    }

    /// Valid value of a cell; `None` for no-data or NaN cells.
    pub fn value(&self, row: usize, col: usize) -> Option<f64> {
        let v = self.values[row * self.ncols + col];
        if v.is_nan() || self.nodata.is_some_and(|nd| v == nd) {
            None
        } else {
            Some(v)
        }
    }

    /// Value by flat index `row * ncols + col`.
    pub fn value_at(&self, index: usize) -> Option<f64> {
        self.value(index / self.ncols, index % self.ncols)
    }

    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        let lat = self.yll + (self.nrows as f64 - row as f64 - 0.5) * self.cellsize;
        let lon = self.xll + (col as f64 + 0.5) * self.cellsize;
        (lat, lon)
    }

    pub fn cell_center_point(&self, index: usize) -> GeoPoint {
        let (lat, lon) = self.cell_center(index / self.ncols, index % self.ncols);
        GeoPoint::new(lat.clamp(-90.0, 90.0), lon).expect("cell centres are finite")
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        let east = self.xll + self.ncols as f64 * self.cellsize;
        let north = self.yll + self.nrows as f64 * self.cellsize;
        (self.xll..=east).contains(&p.lon()) && (self.yll..=north).contains(&p.lat())
    }

    /// Parses an ESRI ASCII grid (`ncols`, `nrows`, `xllcorner|xllcenter`,
    /// `yllcorner|yllcenter`, `cellsize`, optional `nodata_value`).
    pub fn parse_ascii(text: &str) -> Result<Self, LabelError> {
        let mut tokens = text.split_ascii_whitespace().peekable();
        let mut ncols = None;
        let mut nrows = None;
        let mut x = None;
        let mut y = None;
        let mut centered = (false, false);
        let mut cellsize = None;
        let mut nodata = None;
        while let Some(&tok) = tokens.peek() {
            if !tok.starts_with(|c: char| c.is_ascii_alphabetic()) {
                break;
            }
            let key = tok.to_ascii_lowercase();
            tokens.next();
            let raw = tokens
                .next()
                .ok_or_else(|| LabelError::Raster(format!("header {key} has no value")))?;
            let num: f64 = raw
                .parse()
                .map_err(|_| LabelError::Raster(format!("header {key}: bad number {raw:?}")))?;
            match key.as_str() {
                "ncols" => ncols = Some(num as usize),
                "nrows" => nrows = Some(num as usize),
                "xllcorner" => x = Some(num),
                "yllcorner" => y = Some(num),
                "xllcenter" => {
                    x = Some(num);
                    centered.0 = true;
                }
                "yllcenter" => {
                    y = Some(num);
                    centered.1 = true;
                }
                "cellsize" => cellsize = Some(num),
                "nodata_value" => nodata = Some(num),
                other => return Err(LabelError::Raster(format!("unknown header {other}"))),
            }
        }
        let missing = |k: &str| LabelError::Raster(format!("missing header {k}"));
        let ncols = ncols.ok_or_else(|| missing("ncols"))?;
        let nrows = nrows.ok_or_else(|| missing("nrows"))?;
        let cellsize = cellsize.ok_or_else(|| missing("cellsize"))?;
        let mut xll = x.ok_or_else(|| missing("xllcorner"))?;
        let mut yll = y.ok_or_else(|| missing("yllcorner"))?;
        if centered.0 {
            xll -= cellsize / 2.0;
        }
        if centered.1 {
            yll -= cellsize / 2.0;
        }
        let values = tokens
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| LabelError::Raster(format!("bad cell value {t:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(ncols, nrows, xll, yll, cellsize, nodata, values)
    }

    pub fn load_ascii(path: &Path) -> Result<Self, LabelError> {
        Self::parse_ascii(&std::fs::read_to_string(path)?)
    }

    pub fn to_ascii(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "ncols {}", self.ncols);
        let _ = writeln!(out, "nrows {}", self.nrows);
        let _ = writeln!(out, "xllcorner {}", self.xll);
        let _ = writeln!(out, "yllcorner {}", self.yll);
        let _ = writeln!(out, "cellsize {}", self.cellsize);
        if let Some(nd) = self.nodata {
            let _ = writeln!(out, "NODATA_value {nd}");
        }
        for row in self.values.chunks(self.ncols) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Flat indices of cells whose centres fall in the axis-aligned box of
    /// side `side_km` centred on `p`.
    pub fn window_cells(&self, p: GeoPoint, side_km: f64) -> Vec<usize> {
        let half_lat = side_km / 2.0 / KM_PER_DEGREE;
        let coslat = p.lat_rad().cos();
        let half_lon = if coslat > 1e-12 {
            half_lat / coslat
        } else {
            f64::INFINITY
        };
        let (south, north) = (p.lat() - half_lat, p.lat() + half_lat);
        let (west, east) = (p.lon() - half_lon, p.lon() + half_lon);

        // candidate index ranges, widened by one cell; the centre test decides
        let cs = self.cellsize;
        let top = self.yll + self.nrows as f64 * cs;
        let row_lo = (((top - north) / cs).floor() - 1.0).max(0.0) as usize;
        let row_hi = ((((top - south) / cs).ceil() + 1.0).max(0.0) as usize).min(self.nrows);
        let (col_lo, col_hi) = if half_lon.is_finite() {
            (
                (((west - self.xll) / cs).floor() - 1.0).max(0.0) as usize,
                ((((east - self.xll) / cs).ceil() + 1.0).max(0.0) as usize).min(self.ncols),
            )
        } else {
            (0, self.ncols)
        };

        let mut out = Vec::new();
        for row in row_lo..row_hi {
            for col in col_lo..col_hi {
                let (lat, lon) = self.cell_center(row, col);
                if lat >= south && lat <= north && lon >= west && lon <= east {
                    out.push(row * self.ncols + col);
                }
            }
        }
        out
    }
}

/// Mean of the valid cells whose centres lie in the 5 km × 5 km box centred
/// on `p` (east–west extent scaled by `1 / cos(lat)`).
pub fn aggregate_raster_label(raster: &GridRaster, p: GeoPoint) -> Result<f64, LabelError> {
    aggregate_window(raster, p, LABEL_WINDOW_KM)
}

pub fn aggregate_window(raster: &GridRaster, p: GeoPoint, side_km: f64) -> Result<f64, LabelError> {
    if !raster.contains(p) {
        return Err(LabelError::OutOfBounds(p.render()));
    }
    let valid: Vec<f64> = raster
        .window_cells(p, side_km)
        .into_iter()
        .filter_map(|i| raster.value_at(i))
        .collect();
    crate::stats::mean(&valid).ok_or_else(|| LabelError::AllNoData(p.render()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GRID: &str = "ncols 4\nnrows 3\nxllcorner 10.0\nyllcorner 0.0\ncellsize 0.5\nNODATA_value -9999\n\
1 2 3 4\n5 -9999 7 8\n9 10 11 12\n";

    #[test]
    fn parses_header_and_cells() {
        let r = GridRaster::parse_ascii(GRID).unwrap();
        assert_eq!((r.ncols(), r.nrows()), (4, 3));
        assert_eq!(r.value(0, 0), Some(1.0));
        assert_eq!(r.value(1, 1), None);
        assert_eq!(r.cell_center(0, 0), (1.25, 10.25));
        assert_eq!(r.cell_center(2, 3), (0.25, 11.75));
        assert_eq!(GridRaster::parse_ascii(&r.to_ascii()).unwrap(), r);
    }

    #[test]
    fn center_registered_header() {
        let text = "NCOLS 2\nNROWS 1\nXLLCENTER 0.5\nYLLCENTER 0.5\nCELLSIZE 1\n3 4\n";
        let r = GridRaster::parse_ascii(text).unwrap();
        assert_eq!(r.cell_center(0, 0), (0.5, 0.5));
    }

    #[test]
    fn header_errors() {
        assert!(GridRaster::parse_ascii("ncols 2\nnrows 2\ncellsize 1\n1 2 3 4").is_err());
        assert!(GridRaster::parse_ascii("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2 3").is_err());
        assert!(GridRaster::parse_ascii("ncols 1\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nfoo").is_err());
    }

    #[test]
    fn constant_raster_aggregates_to_constant() {
        let r = GridRaster::new(100, 100, 0.0, 0.0, 0.01, None, vec![4.25; 10_000]).unwrap();
        let p = GeoPoint::new(0.5, 0.5).unwrap();
        assert_eq!(aggregate_raster_label(&r, p).unwrap(), 4.25);
        // 5 km ≈ 0.045°, so about 4-5 cells per axis
        let n = r.window_cells(p, LABEL_WINDOW_KM).len();
        assert!((16..=25).contains(&n), "{n}");
    }

    #[test]
    fn single_cell_window_and_errors() {
        // cells of 0.1° (~11 km): a 5 km box holds at most one centre
        let mut values = vec![-1.0; 9];
        values[4] = 7.5;
        let r = GridRaster::new(3, 3, 0.0, 0.0, 0.1, Some(-1.0), values).unwrap();
        let centre = GeoPoint::new(0.15, 0.15).unwrap();
        assert_eq!(aggregate_raster_label(&r, centre).unwrap(), 7.5);
        let corner = GeoPoint::new(0.05, 0.05).unwrap();
        assert!(matches!(aggregate_raster_label(&r, corner), Err(LabelError::AllNoData(_))));
        let between = GeoPoint::new(0.1, 0.2).unwrap();
        assert!(matches!(aggregate_raster_label(&r, between), Err(LabelError::AllNoData(_))));
        let outside = GeoPoint::new(1.0, 1.0).unwrap();
        assert!(matches!(aggregate_raster_label(&r, outside), Err(LabelError::OutOfBounds(_))));
    }
}
