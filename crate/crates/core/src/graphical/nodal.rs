use serde::{Deserialize, Serialize};

use super::GraphPair;
use crate::error::{Error, Result};
use crate::geometry::contour::{level_measure, level_points, TIE_BREAK};
use crate::geometry::{PointCloud, ScalarField2D};

/// Zero set of `w = v - u` at one sample time, restricted to the middle half
/// of the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalRecord {
    pub t: f64,
    pub zero_set: PointCloud,
    /// Point count (line fields) or contour length (planar fields).
    pub measure_est: f64,
    pub lambda_est: f64,
    pub n_points: usize,
    /// Numerator and denominator of `lambda_est` before rescaling.
    pub raw_space_time: f64,
    pub raw_slice: f64,
}

impl NodalRecord {
    pub const CSV_HEADER: &'static str = "t,measure_est,lambda_est,n_points";

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.t, self.measure_est, self.lambda_est, self.n_points)
    }
}

fn l2_sq(f: &ScalarField2D) -> f64 {
    let cell = f.h().powi(f.dim() as i32);
    f.values().iter().map(|w| w * w).sum::<f64>() * cell
}

/// Evolve both graphs and record the nodal set of their difference every
/// `sample_dt`.
///
/// The doubling estimate `Λ = ∫∫ w² dx dt / ∫ w²(t) dx` is taken over the
/// whole domain and the window `(t - τ, t]` in the numerator and over the
/// middle half in the denominator. With `s` a quarter of the domain width,
/// the whole domain plays the role of a ball of radius `2s` and the window
/// length is `τ = min(4 s², t)`; the ratio is rescaled by `s⁻²` to unit
/// size. At `t = 0` the window is taken as one sample interval.
pub fn evolve_pair_and_track_nodal(pair: &GraphPair, t_end: f64, sample_dt: f64) -> Result<Vec<NodalRecord>> {
    let width = (pair.u.nx() - 1) as f64 * pair.u.h();
    let s = width / 4.0;
    let tau_max = 4.0 * s * s;
    let n = (t_end / sample_dt + 1e-9).floor() as usize;
    let mut state = pair.clone();
    let mut history: Vec<(f64, f64)> = Vec::new();
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let ts = k as f64 * sample_dt;
        state = state.evolve_until(ts)?;
        let w = state.w();
        if w.max_abs() <= 1e-14 {
            return Err(Error::FlowsCoincide);
        }
        history.push((ts, l2_sq(&w)));
        let mid = w.middle_window()?;
        let pts = level_points(&mid, 0.0);
        let measure_est = level_measure(&mid, 0.0);
        let tau = tau_max.min(ts);
        let window: Vec<&(f64, f64)> = history.iter().filter(|h| h.0 >= ts - tau - 1e-12).collect();
        let num = if window.len() < 2 {
            history.last().unwrap().1 * sample_dt
        } else {
            window.windows(2).map(|p| 0.5 * (p[0].1 + p[1].1) * (p[1].0 - p[0].0)).sum()
        };
        let den = l2_sq(&mid);
        let lambda_est = if den > 0.0 { num / den / (s * s) } else { f64::INFINITY };
        out.push(NodalRecord {
            t: ts,
            n_points: pts.len(),
            zero_set: PointCloud::planar(pts, w.dim()),
            measure_est,
            lambda_est,
            raw_space_time: num,
            raw_slice: den,
        });
    }
    Ok(out)
}

/// Result of a one-sidedness check on a single field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneSided {
    pub sign_change: bool,
    pub nodal_measure_est: f64,
    /// `sign_change ⇒ nodal_measure_est > h`.
    pub consistent: bool,
    pub note: String,
}

/// Does `w` change sign, and if so is its nodal set of positive size?
///
/// Zero values count as positive (the contour tie-break), so a field that
/// touches 0 without changing sign has an empty nodal set.
pub fn one_sided_test(w: &ScalarField2D) -> OneSided {
    let shifted = |v: f64| if v == 0.0 { TIE_BREAK } else { v };
    let neg = w.values().iter().any(|&v| shifted(v) < 0.0);
    let pos = w.values().iter().any(|&v| shifted(v) > 0.0);
    let sign_change = neg && pos;
    let nodal_measure_est = level_measure(w, 0.0);
    let consistent = !sign_change || nodal_measure_est > w.h();
    let note = match (sign_change, consistent) {
        (false, _) => "no-sign-change",
        (true, true) => "sign-change with positive nodal measure",
        (true, false) => "sign-change but nodal measure below h",
    };
    OneSided { sign_change, nodal_measure_est, consistent, note: note.into() }
}
