use serde::Serialize;

use super::{Manifold, Point};
use crate::error::{Error, Result};

/// Running geodesic mean: `m_k = Exp_{m_{k-1}}((1/k) Exp^{-1}_{m_{k-1}} z_k)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GeodesicAverage {
    mean: Option<Point>,
    count: u64,
}

impl GeodesicAverage {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn mean(&self) -> Option<&Point> {
        self.mean.as_ref()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Folds `z` into the average.
    pub fn update(&self, manifold: &Manifold, z: &Point) -> Result<GeodesicAverage> {
        let count = self.count + 1;
        let mean = match &self.mean {
            None => z.clone(),
            Some(m) => {
                let step = manifold
                    .log(m, z)
                    .map_err(|e| Error::Averaging(e.to_string()))?
                    .scale(1.0 / count as f64);
                manifold
                    .exp(m, &step)
                    .map_err(|e| Error::Averaging(e.to_string()))?
            }
        };
        Ok(GeodesicAverage {
            mean: Some(mean),
            count,
        })
    }

    pub fn push(&mut self, manifold: &Manifold, z: &Point) -> Result<()> {
        *self = self.update(manifold, z)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_point_becomes_the_mean() {
        let m = Manifold::euclidean(2);
        let p = m.point(vec![1.0, -2.0]).unwrap();
        let avg = GeodesicAverage::new().update(&m, &p).unwrap();
        assert_eq!(avg.count(), 1);
        assert_eq!(avg.mean(), Some(&p));
    }

    #[test]
    fn flat_running_mean() {
        let m = Manifold::euclidean(1);
        let mut avg = GeodesicAverage::new();
        for x in [0.0, 2.0, 4.0] {
            avg.push(&m, &m.point(vec![x]).unwrap()).unwrap();
        }
        assert!((avg.mean().unwrap().coords()[0] - 2.0).abs() < 1e-15);
        assert_eq!(avg.count(), 3);
    }

    #[test]
    fn symmetric_points_on_a_great_circle_average_to_the_center() {
        let m = Manifold::sphere(2);
        let center = m.origin();
        let dir = m.tangent(&center, vec![0.0, 0.6, 0.8]).unwrap();
        let a = m.exp(&center, &dir.scale(0.7)).unwrap();
        let b = m.exp(&center, &dir.scale(-0.7)).unwrap();
        let mut avg = GeodesicAverage::new();
        for k in 0..100 {
            avg.push(&m, if k % 2 == 0 { &a } else { &b }).unwrap();
        }
        let d = m.distance(avg.mean().unwrap(), &center).unwrap();
        assert!(d < 1e-6, "distance to center {d}");
    }

    #[test]
    fn antipodal_update_is_an_averaging_error() {
        let m = Manifold::sphere(2);
        let p = m.point(vec![1.0, 0.0, 0.0]).unwrap();
        let q = m.point(vec![-1.0, 0.0, 0.0]).unwrap();
        let avg = GeodesicAverage::new().update(&m, &p).unwrap();
        assert!(matches!(avg.update(&m, &q), Err(Error::Averaging(_))));
    }
}
