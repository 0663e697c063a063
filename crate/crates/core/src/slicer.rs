//! Partitioning an interval into slices holding about the same number of
//! eigenvalues.

use crate::dos::{dos_count, DosCurve};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SliceSet {
    /// `t_0 < t_1 < ... < t_ns`, with `t_0` and `t_ns` the interval ends.
    pub breakpoints: Vec<f64>,
    /// Estimated eigenvalue count of each slice.
    pub counts: Vec<f64>,
}

impl SliceSet {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Slice `i` as `(lo, hi)`.
    pub fn slice(&self, i: usize) -> (f64, f64) {
        (self.breakpoints[i], self.breakpoints[i + 1])
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.breakpoints.windows(2).map(|w| (w[0], w[1]))
    }
}

/// Splits `[lo, hi]` into `ns` slices of equal estimated count. Breakpoint
/// `t_i` is the first curve grid point where the cumulative integral from `lo`
/// reaches `i / ns` of the total.
pub fn slice_spectrum(curve: &DosCurve, lo: f64, hi: f64, ns: usize) -> Result<SliceSet> {
    if ns == 0 {
        return Err(Error::InvalidArgument("need at least one slice".into()));
    }
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!("empty interval [{lo}, {hi}]")));
    }
    // the part of the interval outside the spectrum holds nothing
    let Some((clo, chi)) = curve.clip(lo, hi)? else {
        return Err(Error::InvalidArgument(format!(
            "interval [{lo}, {hi}] misses the DOS range [{}, {}]",
            curve.lo(),
            curve.hi()
        )));
    };
    let (mut xs, ys) = curve.window(clo, chi);
    xs[0] = lo;
    *xs.last_mut().unwrap() = hi;
    let interior = xs.len() - 2;
    if ns - 1 > interior {
        return Err(Error::InvalidArgument(format!(
            "{ns} slices need at least {} grid points inside [{lo}, {hi}], the curve has {interior}",
            ns - 1
        )));
    }
    let mut cum = vec![0.0; xs.len()];
    for j in 1..xs.len() {
        cum[j] = cum[j - 1] + 0.5 * (xs[j] - xs[j - 1]) * (ys[j] + ys[j - 1]);
    }
    let total = cum[xs.len() - 1];
    let mut breakpoints = vec![lo];
    let mut j = 0;
    for i in 1..ns {
        let target = total * i as f64 / ns as f64;
        // leave enough interior points for the remaining breakpoints
        let last_allowed = interior - (ns - 1 - i);
        j += 1;
        while j < last_allowed && cum[j] < target {
            j += 1;
        }
        breakpoints.push(xs[j]);
    }
    breakpoints.push(hi);
    let counts = breakpoints
        .windows(2)
        .map(|w| dos_count(curve, w[0], w[1]))
        .collect::<Result<Vec<_>>>()?;
    Ok(SliceSet { breakpoints, counts })
}
