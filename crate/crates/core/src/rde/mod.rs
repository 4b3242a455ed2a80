//! Rough differential equations `dY = σ(Y) dX`.

mod experiments;
mod series;

pub use experiments::{
    lyons_divergence_demo, lyons_divergence_terms, rogers_scan, wong_zakai_ensemble, wong_zakai_experiment,
    RogersScan, WongZakaiConfig, WongZakaiLevel, WongZakaiRow, WongZakaiRun,
};
pub use series::{linear_rde_series, LinearSeries};

use serde::{Deserialize, Serialize};

use crate::controlled::ControlledPath;
use crate::error::{Result, RoughError};
use crate::lift::RoughPath;
pub use crate::picard::{PicardDiagnostics, PicardOptions};
use crate::picard::windowed_picard;
use crate::path::SamplePath;
use crate::smooth::VectorField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RdeScheme {
    #[default]
    Davie,
    Picard,
}

impl std::str::FromStr for RdeScheme {
    type Err = RoughError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "davie" => Ok(RdeScheme::Davie),
            "picard" => Ok(RdeScheme::Picard),
            other => Err(RoughError::Parse(format!("unknown scheme {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RdeSolution {
    /// `(Y, σ(Y))`.
    pub path: ControlledPath,
    /// Present for the Picard scheme.
    pub picard: Option<PicardDiagnostics>,
}

impl RdeSolution {
    pub fn y(&self) -> &SamplePath {
        self.path.y()
    }

    pub fn terminal(&self) -> &[f64] {
        self.path.y().end()
    }
}

struct Cells {
    dx: Vec<Vec<f64>>,
    xx: Vec<Vec<f64>>,
}

fn cells(x: &RoughPath) -> Cells {
    Cells {
        dx: x.increments().iter().map(|t| t.level(1).to_vec()).collect(),
        xx: x.increments().iter().map(|t| t.level(2).to_vec()).collect(),
    }
}

/// `σ(y) δX + (Dσ σ)(y) 𝕏` on one cell.
fn davie_increment(sigma: &VectorField, y: &[f64], dx: &[f64], xx: &[f64]) -> Result<Vec<f64>> {
    let (m, d) = (sigma.state_dim(), sigma.driver_dim());
    let s = sigma.sigma(y);
    let dss = sigma.d_sigma_sigma(y)?;
    Ok((0..m)
        .map(|a| {
            let first: f64 = (0..d).map(|j| s[a * d + j] * dx[j]).sum();
            let second: f64 = dss[a * d * d..(a + 1) * d * d].iter().zip(xx).map(|(c, x)| c * x).sum();
            first + second
        })
        .collect())
}

fn check_inputs(sigma: &VectorField, x: &RoughPath, y0: &[f64]) -> Result<()> {
    if x.depth() < 2 {
        return Err(RoughError::Depth(format!("RDE driver needs depth >= 2, got {}", x.depth())));
    }
    if x.dim() != sigma.driver_dim() {
        return Err(RoughError::Dimension(format!(
            "driver has dimension {}, field expects {}",
            x.dim(),
            sigma.driver_dim()
        )));
    }
    if y0.len() != sigma.state_dim() {
        return Err(RoughError::Dimension(format!(
            "initial value has dimension {}, field expects {}",
            y0.len(),
            sigma.state_dim()
        )));
    }
    Ok(())
}

fn finish(sigma: &VectorField, x: &RoughPath, m: usize, values: Vec<f64>) -> Result<ControlledPath> {
    let y = SamplePath::from_flat(x.times().to_vec(), m, values)?;
    let yp = y.map(m * sigma.driver_dim(), |p| sigma.sigma(p))?;
    ControlledPath::new(x.clone(), y, yp)
}

/// Davie scheme `Y_{k+1} = Y_k + σ(Y_k) δX + (Dσ σ)(Y_k) 𝕏` over the grid
/// cells of `x`.
pub fn davie_solve(sigma: &VectorField, x: &RoughPath, y0: &[f64]) -> Result<RdeSolution> {
    check_inputs(sigma, x, y0)?;
    let m = sigma.state_dim();
    let c = cells(x);
    let times = x.times();
    let mut values = Vec::with_capacity(times.len() * m);
    values.extend_from_slice(y0);
    let mut y = y0.to_vec();
    for k in 0..x.n_cells() {
        let inc = davie_increment(sigma, &y, &c.dx[k], &c.xx[k])?;
        let next: Vec<f64> = y.iter().zip(&inc).map(|(a, b)| a + b).collect();
        if next.iter().any(|v| !v.is_finite()) {
            return Err(RoughError::BlowUp {
                last_time: times[k],
                reason: format!("non-finite state on cell {k}"),
            });
        }
        values.extend_from_slice(&next);
        y = next;
    }
    Ok(RdeSolution { path: finish(sigma, x, m, values)?, picard: None })
}

/// Fixed point of `Y ↦ y0 + ∫ σ(Y) dX` iterated on halving windows, where
/// `σ(Y)` is controlled with derivative `Dσ(Y) Y'` and the iterate carries
/// `Y' = σ(Y)`. The rough integral is the compensated sum on the full grid.
///
/// Carrying `Y'` as a separate iterate (as in the fixed point argument)
/// lags it one step behind `Y` and stalls the sup-norm contraction test.
pub fn picard_solve(sigma: &VectorField, x: &RoughPath, y0: &[f64], opts: &PicardOptions) -> Result<RdeSolution> {
    check_inputs(sigma, x, y0)?;
    let m = sigma.state_dim();
    sigma.d_sigma(y0)?;
    let c = cells(x);
    let map = |a: usize, b: usize, cur: &[f64]| -> Vec<f64> {
        let mut out = Vec::with_capacity(cur.len());
        let mut acc = cur[..m].to_vec();
        out.extend_from_slice(&acc);
        for k in 0..(b - a) {
            let y = &cur[k * m..(k + 1) * m];
            let inc = davie_increment(sigma, y, &c.dx[a + k], &c.xx[a + k]).expect("derivative availability checked");
            acc.iter_mut().zip(&inc).for_each(|(p, q)| *p += q);
            out.extend_from_slice(&acc);
        }
        out
    };
    let (values, diag) = windowed_picard(x.n_cells(), m, y0, map, opts)?;
    Ok(RdeSolution { path: finish(sigma, x, m, values)?, picard: Some(diag) })
}

pub fn rde_solve(
    sigma: &VectorField,
    x: &RoughPath,
    y0: &[f64],
    scheme: RdeScheme,
    opts: &PicardOptions,
) -> Result<RdeSolution> {
    match scheme {
        RdeScheme::Davie => davie_solve(sigma, x, y0),
        RdeScheme::Picard => picard_solve(sigma, x, y0, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lift::canonical_lift;
    use crate::path::uniform_grid;

    fn smooth_lift(n: usize) -> RoughPath {
        let x = SamplePath::from_fn(uniform_grid(1.0, n), 1, |t| vec![(3.0 * t).sin() + 0.5 * t]).unwrap();
        canonical_lift(&x, 2, 0.5).unwrap()
    }

    #[test]
    fn zero_field() {
        let x = smooth_lift(32);
        let zero = VectorField::constant(2, 1, vec![0.0, 0.0]).unwrap();
        for scheme in [RdeScheme::Davie, RdeScheme::Picard] {
            let sol = rde_solve(&zero, &x, &[1.0, -1.0], scheme, &PicardOptions::default()).unwrap();
            assert!(sol.y().values().chunks(2).all(|p| p == [1.0, -1.0]));
        }
    }

    #[test]
    fn exponential_and_scheme_agreement() {
        let x = smooth_lift(1 << 12);
        let f = VectorField::scalar_identity();
        let davie = davie_solve(&f, &x, &[2.0]).unwrap();
        let picard = picard_solve(&f, &x, &[2.0], &PicardOptions::default()).unwrap();
        let path = x.level_one_path();
        for k in 0..path.len() {
            let want = 2.0 * path.value(k)[0].exp();
            assert!(((davie.y().value(k)[0] - want) / want).abs() < 1e-5);
            assert!((davie.y().value(k)[0] - picard.y().value(k)[0]).abs() < 1e-6);
        }
        assert!(picard.picard.unwrap().max_ratio() < 1.0);
    }

    #[test]
    fn blow_up_is_reported() {
        let x = smooth_lift(64).dilate(40.0);
        let f = VectorField::new(1, 1, |y| vec![y[0] * y[0] * y[0]]).with_derivative(|y| vec![3.0 * y[0] * y[0]]);
        match davie_solve(&f, &x, &[1.0]) {
            Err(RoughError::BlowUp { last_time, .. }) => assert!(last_time < 1.0),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn depth_and_shape_errors() {
        let x = smooth_lift(8);
        let f = VectorField::scalar_identity();
        assert!(matches!(davie_solve(&f, &x.truncate(1).unwrap(), &[1.0]), Err(RoughError::Depth(_))));
        assert!(matches!(davie_solve(&f, &x, &[1.0, 2.0]), Err(RoughError::Dimension(_))));
        assert_eq!("picard".parse::<RdeScheme>().unwrap(), RdeScheme::Picard);
    }
}
