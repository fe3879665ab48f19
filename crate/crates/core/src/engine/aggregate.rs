//! Seed aggregation with Student-t confidence intervals.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::engine::scenario::RunMode;
use crate::engine::simulate::Trajectory;
use crate::error::{Error, Result};

/// Sample mean with a 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub n: usize,
    pub mean: f64,
    /// `None` with a single observation.
    pub half_width: Option<f64>,
}

impl Band {
    pub fn low(&self) -> Option<f64> {
        self.half_width.map(|h| self.mean - h)
    }

    pub fn high(&self) -> Option<f64> {
        self.half_width.map(|h| self.mean + h)
    }

    /// Whether the interval contains `x`. A band without a width only
    /// contains its own mean.
    pub fn contains(&self, x: f64) -> bool {
        match self.half_width {
            Some(h) => (self.mean - x).abs() <= h,
            None => self.mean == x,
        }
    }
}

/// Two-sided 0.975 quantile of Student's t with `dof` degrees of freedom.
pub fn t_quantile(dof: usize) -> f64 {
    StudentsT::new(0.0, 1.0, dof as f64)
        .expect("dof >= 1")
        .inverse_cdf(0.975)
}

/// Mean and 95% CI of the defined values; `None` if none are defined.
pub fn ci95<I>(values: I) -> Option<Band>
where
    I: IntoIterator<Item = Option<f64>>,
{
    let xs: Vec<f64> = values.into_iter().flatten().collect();
    let n = xs.len();
    if n == 0 {
        return None;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let half_width = (n >= 2).then(|| {
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        t_quantile(n - 1) * var.sqrt() / (n as f64).sqrt()
    });
    Some(Band {
        n,
        mean,
        half_width,
    })
}

/// Seed-averaged trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub mode: RunMode,
    pub metrics: Vec<String>,
    /// `bands[t][k]` belongs to `metrics[k]`.
    pub bands: Vec<Vec<Option<Band>>>,
}

impl Aggregate {
    pub fn band(&self, metric: &str, t: u32) -> Option<Band> {
        let k = self.metrics.iter().position(|m| m == metric)?;
        *self.bands.get(t as usize)?.get(k)?
    }

    pub fn mean(&self, metric: &str, t: u32) -> Option<f64> {
        self.band(metric, t).map(|b| b.mean)
    }
}

/// Per-(t, metric) mean and CI across trajectories of one mode.
pub fn aggregate(trajs: &[Trajectory]) -> Result<Aggregate> {
    let first = trajs
        .first()
        .ok_or_else(|| Error::Invalid("aggregate needs at least one trajectory".into()))?;
    if trajs
        .iter()
        .any(|t| t.horizon() != first.horizon() || t.mode != first.mode)
    {
        return Err(Error::Invalid(
            "aggregated trajectories must share mode and horizon".into(),
        ));
    }
    let metrics: Vec<String> = first.rows[0]
        .entries()
        .into_iter()
        .map(|(n, _)| n)
        .collect();
    let bands = (0..first.rows.len())
        .map(|t| {
            metrics
                .iter()
                .map(|m| ci95(trajs.iter().map(|tr| tr.rows[t].get(m))))
                .collect()
        })
        .collect();
    Ok(Aggregate {
        mode: first.mode,
        metrics,
        bands,
    })
}
