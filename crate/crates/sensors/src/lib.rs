//! Sparse measurement simulation: buoy time series extracted from wave
//! fields, and X-band-like radar intensity snapshots built from tilt and
//! shadowing modulation of the surface geometry.

use ndarray::Array2;
use thiserror::Error;
use wavecore::spectral::vector_derivative;
use wavecore::WaveField;

pub type Result<T> = std::result::Result<T, SensorError>;

#[derive(Debug, Error)]
pub enum SensorError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
}

/// Radar placement and calibration constants.
///
/// The antenna sits at `antenna_x` (at or left of the domain start; beams
/// travel toward +x) at height `antenna_height` above the mean surface.
/// `c1`/`c2` are the intensity scale and offset of the tilt model and
/// `rotation_dt` the time between snapshots, an integer multiple of the
/// field output step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarGeometry {
    pub antenna_x: f64,
    pub antenna_height: f64,
    pub c1: f64,
    pub c2: f64,
    pub rotation_dt: f64,
}

impl Default for RadarGeometry {
    fn default() -> Self {
        RadarGeometry {
            antenna_x: 0.0,
            antenna_height: 20.0,
            c1: 1.0,
            c2: 0.0,
            rotation_dt: 2.0,
        }
    }
}

impl RadarGeometry {
    /// Snapshot stride in field time steps.
    pub fn snapshot_stride(&self, dt: f64) -> Result<usize> {
        let ratio = self.rotation_dt / dt;
        let stride = ratio.round();
        if stride < 1.0 || (ratio - stride).abs() > 1e-9 {
            return Err(SensorError::InvalidArgument(format!(
                "rotation_dt {} is not an integer multiple of field dt {}",
                self.rotation_dt, dt
            )));
        }
        Ok(stride as usize)
    }

    pub fn validate(&self, domain_start: f64) -> Result<()> {
        if self.antenna_x > domain_start + 1e-12 {
            return Err(SensorError::InvalidGeometry(format!(
                "antenna at x = {} must sit at or before the domain start {}",
                self.antenna_x, domain_start
            )));
        }
        if self.antenna_height <= 0.0 {
            return Err(SensorError::InvalidGeometry(
                "antenna height must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensorKind {
    Buoy,
    Radar,
}

/// Sea-state provenance of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Provenance {
    pub peak_wavelength: f64,
    pub steepness: f64,
    pub seed: u64,
}

/// One training instance: buoy series or radar snapshots plus the
/// calibration series.
///
/// The paper configuration uses five buoys (case A, where the calibration
/// equals the input) and fifty snapshots with one calibration buoy
/// (case B); both counts follow from the grid and geometry and scale with
/// them at other resolutions.
#[derive(Debug, Clone)]
pub struct SensorSample {
    pub kind: SensorKind,
    /// Buoy elevations `[n_buoy, n_t]` (buoy samples).
    pub buoy_series: Option<Array2<f64>>,
    /// Radar intensities `[n_x, n_snap]` (radar samples).
    pub radar_snapshots: Option<Array2<f64>>,
    /// Calibration elevations `[n_cal, n_t]`.
    pub calibration: Array2<f64>,
    /// Requested positions of buoys (case A) or the calibration buoy (case B).
    pub positions: Vec<f64>,
    /// Grid columns the positions resolved to.
    pub columns: Vec<usize>,
    pub geometry: Option<RadarGeometry>,
    pub provenance: Provenance,
}

impl SensorSample {
    /// The measurement array fed to the reconstruction model.
    pub fn measurement(&self) -> &Array2<f64> {
        match self.kind {
            SensorKind::Buoy => self.buoy_series.as_ref().expect("buoy sample"),
            SensorKind::Radar => self.radar_snapshots.as_ref().expect("radar sample"),
        }
    }
}

/// Paper buoy positions [m], equidistant inside the taper-free region.
pub const PAPER_BUOY_POSITIONS: [f64; 5] = [488.76, 731.18, 973.61, 1216.03, 1462.37];
/// Paper calibration-buoy position for radar samples [m].
pub const PAPER_CALIBRATION_POSITION: f64 = 973.61;

/// Map positions to nearest grid columns.
pub fn position_columns(positions: &[f64], dx: f64, n_x: usize) -> Result<Vec<usize>> {
    if positions.is_empty() {
        return Err(SensorError::InvalidArgument("no positions given".into()));
    }
    positions
        .iter()
        .map(|&p| {
            let idx = (p / dx).round();
            if p < 0.0 || idx < 0.0 || idx >= n_x as f64 {
                return Err(SensorError::InvalidArgument(format!(
                    "position {p} m outside the domain"
                )));
            }
            Ok(idx as usize)
        })
        .collect()
}

/// Sample elevation time series at the grid columns nearest `positions`.
pub fn extract_buoys(field: &WaveField, positions: &[f64]) -> Result<(Array2<f64>, Vec<usize>)> {
    let cols = position_columns(positions, field.grid.dx, field.grid.n_x)?;
    let n_t = field.grid.n_t;
    let mut out = Array2::zeros((cols.len(), n_t));
    for (b, &col) in cols.iter().enumerate() {
        for j in 0..n_t {
            out[[b, j]] = field.eta[[col, j]];
        }
    }
    Ok((out, cols))
}

/// Tilt modulation of one elevation snapshot.
///
/// Facet normals come from the spectral slope; the returned intensity is
/// `c1 cos(angle(n, u)) + c2` where the local incidence magnitude is at
/// most pi/2 and zero where the facet faces away from the antenna.
pub fn tilt_modulation(
    eta_snapshot: &[f64],
    wavenumbers: &[f64],
    dx: f64,
    geom: &RadarGeometry,
) -> Vec<f64> {
    let slope = vector_derivative(eta_snapshot, wavenumbers, 1);
    eta_snapshot
        .iter()
        .enumerate()
        .map(|(i, &eta)| {
            let x = i as f64 * dx;
            let ux = geom.antenna_x - x;
            let uz = geom.antenna_height - eta;
            let un = (ux * ux + uz * uz).sqrt();
            let nn = (1.0 + slope[i] * slope[i]).sqrt();
            let cos_inc = (-slope[i] * ux + uz) / (nn * un);
            if cos_inc >= 0.0 {
                geom.c1 * cos_inc + geom.c2
            } else {
                0.0
            }
        })
        .collect()
}

/// Geometric shadowing: a column is occluded when any strictly closer
/// column subtends a nominal incidence angle at least as large.
///
/// Implemented as a single sweep away from the antenna carrying the running
/// maximum of `Theta = atan(R / (z_a - eta))`.
pub fn shadow_mask(eta_snapshot: &[f64], dx: f64, geom: &RadarGeometry) -> Result<Vec<bool>> {
    let z_a = geom.antenna_height;
    let mut mask = vec![false; eta_snapshot.len()];
    let mut run_max = f64::NEG_INFINITY;
    for (i, &eta) in eta_snapshot.iter().enumerate() {
        if eta >= z_a {
            return Err(SensorError::InvalidGeometry(format!(
                "surface elevation {eta} reaches antenna height {z_a}"
            )));
        }
        let range = i as f64 * dx - geom.antenna_x;
        let theta = (range / (z_a - eta)).atan();
        if run_max >= theta {
            mask[i] = true;
        }
        run_max = run_max.max(theta);
    }
    Ok(mask)
}

/// Radar intensity snapshots of a full space-time field, every
/// `rotation_dt`: tilt modulation with shadowed columns set to zero.
pub fn radar_snapshots(field: &WaveField, geom: &RadarGeometry) -> Result<Array2<f64>> {
    geom.validate(0.0)?;
    let stride = geom.snapshot_stride(field.grid.dt)?;
    let n_t = field.grid.n_t;
    let n_x = field.grid.n_x;
    let n_snap = n_t.div_ceil(stride);
    let mut out = Array2::zeros((n_x, n_snap));
    let mut column = vec![0.0; n_x];
    for (s, j) in (0..n_t).step_by(stride).enumerate() {
        for i in 0..n_x {
            column[i] = field.eta[[i, j]];
        }
        let tilt = tilt_modulation(&column, &field.grid.wavenumbers, field.grid.dx, geom);
        let shadow = shadow_mask(&column, field.grid.dx, geom)?;
        for i in 0..n_x {
            out[[i, s]] = if shadow[i] { 0.0 } else { tilt[i] };
        }
    }
    Ok(out)
}

/// Pack a wave field into a training sample.
///
/// Buoy samples use `positions` for the input series and reuse them as
/// calibration. Radar samples need `geom` and exactly one calibration
/// position.
pub fn assemble_sample(
    field: &WaveField,
    kind: SensorKind,
    geom: Option<&RadarGeometry>,
    positions: &[f64],
    provenance: Provenance,
) -> Result<SensorSample> {
    match kind {
        SensorKind::Buoy => {
            let (series, columns) = extract_buoys(field, positions)?;
            Ok(SensorSample {
                kind,
                calibration: series.clone(),
                buoy_series: Some(series),
                radar_snapshots: None,
                positions: positions.to_vec(),
                columns,
                geometry: None,
                provenance,
            })
        }
        SensorKind::Radar => {
            let geom = geom.ok_or_else(|| {
                SensorError::InvalidArgument("radar sample needs a geometry".into())
            })?;
            if positions.len() != 1 {
                return Err(SensorError::InvalidArgument(format!(
                    "radar samples use exactly one calibration position, got {}",
                    positions.len()
                )));
            }
            let snapshots = radar_snapshots(field, geom)?;
            let (calibration, columns) = extract_buoys(field, positions)?;
            Ok(SensorSample {
                kind,
                buoy_series: None,
                radar_snapshots: Some(snapshots),
                calibration,
                positions: positions.to_vec(),
                columns,
                geometry: Some(*geom),
                provenance,
            })
        }
    }
}
