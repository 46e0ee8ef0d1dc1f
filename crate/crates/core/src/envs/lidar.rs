//! Egocentric pseudo-lidar: fixed angular bins holding linearly decaying
//! proximity readings. Every object kind is sensed through the same code
//! path, so nothing can fall below the beam the way low objects did in the
//! original suite's natural lidar.

use super::layout::Disc;
use crate::scalar::Real;

/// One reading per angular bin in `[0, 1]`. Bin `b` covers the heading
/// sector `[2 pi b / n, 2 pi (b + 1) / n)` in the robot frame; the reading
/// is the max over objects in the sector of `max(0, 1 - dist / max_dist)`,
/// with `dist` measured to the object center.
pub fn pseudo_lidar<S: Real>(
    pose: &[S; 3],
    objects: &[Disc<S>],
    n_bins: usize,
    max_dist: S,
) -> Vec<S> {
    assert!(n_bins >= 4, "lidar needs at least 4 bins");
    assert!(max_dist > S::zero());
    let mut bins = vec![S::zero(); n_bins];
    let two_pi = S::c(2.0) * S::PI();
    for obj in objects {
        let dx = obj.center[0] - pose[0];
        let dy = obj.center[1] - pose[1];
        let dist = (dx * dx + dy * dy).sqrt();
        let value = (S::one() - dist / max_dist).max(S::zero());
        if value <= S::zero() {
            continue;
        }
        let mut bearing = dy.atan2(dx) - pose[2];
        bearing = bearing - two_pi * (bearing / two_pi).floor(); // [0, 2 pi)
        let mut bin = (bearing / two_pi * S::c(n_bins as f64)).to_f64_c() as usize;
        if bin >= n_bins {
            bin = n_bins - 1;
        }
        if value > bins[bin] {
            bins[bin] = value;
        }
    }
    bins
}
