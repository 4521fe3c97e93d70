use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::PlanarPoint;

use super::HarnessError;

const METERS_PER_DEG_LAT: f64 = 110_540.0;
const METERS_PER_DEG_LON_EQUATOR: f64 = 111_320.0;

/// Latitude/longitude rectangle in degrees, bounds inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_lat: f64,
    pub min_lon: f64,
    pub max_lat: f64,
    pub max_lon: f64,
}

impl BoundingBox {
    pub fn new(min_lat: f64, min_lon: f64, max_lat: f64, max_lon: f64) -> Result<Self, HarnessError> {
        let all = [min_lat, min_lon, max_lat, max_lon];
        if all.iter().any(|v| !v.is_finite()) || min_lat >= max_lat || min_lon >= max_lon {
            return Err(HarnessError::InvalidConfig(format!(
                "bounding box {min_lat},{min_lon},{max_lat},{max_lon} needs min < max on both axes"
            )));
        }
        Ok(Self {
            min_lat,
            min_lon,
            max_lat,
            max_lon,
        })
    }

    pub fn contains(&self, lon: f64, lat: f64) -> bool {
        (self.min_lat..=self.max_lat).contains(&lat) && (self.min_lon..=self.max_lon).contains(&lon)
    }

    pub fn projection(&self) -> Projection {
        Projection::centered_on(
            (self.min_lon + self.max_lon) / 2.0,
            (self.min_lat + self.max_lat) / 2.0,
        )
    }
}

impl Default for BoundingBox {
    /// Northeast Chengdu, 30.65–30.72°N, 104.04–104.12°E.
    fn default() -> Self {
        Self {
            min_lat: 30.65,
            min_lon: 104.04,
            max_lat: 30.72,
            max_lon: 104.12,
        }
    }
}

impl fmt::Display for BoundingBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.min_lat, self.min_lon, self.max_lat, self.max_lon)
    }
}

impl FromStr for BoundingBox {
    type Err = HarnessError;

    /// `minlat,minlon,maxlat,maxlon`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| HarnessError::InvalidConfig(format!("bad bounding box {s:?}")))?;
        match parts[..] {
            [a, b, c, d] => BoundingBox::new(a, b, c, d),
            _ => Err(HarnessError::InvalidConfig(format!(
                "bounding box {s:?} needs four values"
            ))),
        }
    }
}

/// Equirectangular projection about a reference point, in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    lon0: f64,
    lat0: f64,
    meters_per_deg_lon: f64,
}

impl Projection {
    pub fn centered_on(lon0: f64, lat0: f64) -> Self {
        Self {
            lon0,
            lat0,
            meters_per_deg_lon: lat0.to_radians().cos() * METERS_PER_DEG_LON_EQUATOR,
        }
    }

    pub fn to_meters(&self, lon: f64, lat: f64) -> (f64, f64) {
        (
            (lon - self.lon0) * self.meters_per_deg_lon,
            (lat - self.lat0) * METERS_PER_DEG_LAT,
        )
    }

    pub fn project(&self, lon: f64, lat: f64) -> PlanarPoint {
        let (x, y) = self.to_meters(lon, lat);
        PlanarPoint::from_meters(x, y)
    }

    /// `(lon, lat)` of a metre offset.
    pub fn from_meters(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.lon0 + x / self.meters_per_deg_lon,
            self.lat0 + y / METERS_PER_DEG_LAT,
        )
    }

    pub fn unproject(&self, p: PlanarPoint) -> (f64, f64) {
        let (x, y) = p.to_meters();
        self.from_meters(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_maps_to_origin() {
        let b = BoundingBox::default();
        let p = b.projection();
        assert_eq!(p.project(104.08, 30.685), PlanarPoint::new(0, 0));
        let (x, y) = p.to_meters(104.09, 30.695);
        assert!((y - 1105.4).abs() < 1e-6);
        assert!((x - 0.01 * 30.685f64.to_radians().cos() * 111_320.0).abs() < 1e-6);
    }

    #[test]
    fn printed_coordinates_round_trip() {
        let p = BoundingBox::default().projection();
        for q in [PlanarPoint::new(123_456, -98_765), PlanarPoint::new(-1, 1), PlanarPoint::new(0, 0)] {
            let (lon, lat) = p.unproject(q);
            let lon: f64 = format!("{lon:.10}").parse().unwrap();
            let lat: f64 = format!("{lat:.10}").parse().unwrap();
            assert_eq!(p.project(lon, lat), q);
        }
    }

    #[test]
    fn box_parsing() {
        let b: BoundingBox = "30.65,104.04,30.72,104.12".parse().unwrap();
        assert_eq!(b, BoundingBox::default());
        assert!("30.72,104.04,30.65,104.12".parse::<BoundingBox>().is_err());
        assert!("1,2,3".parse::<BoundingBox>().is_err());
        assert!(b.contains(104.04, 30.72));
        assert!(!b.contains(104.13, 30.7));
    }
}
