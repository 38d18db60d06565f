//! BPR volume-delay function.

use crate::error::{Error, Result};

pub const BPR_ALPHA: f64 = 0.15;
pub const BPR_POWER: i32 = 4;

#[inline]
pub(crate) fn bpr(fftt: f64, capacity: f64, volume: f64) -> f64 {
    let ratio = volume / capacity;
    fftt * (1.0 + BPR_ALPHA * ratio.powi(BPR_POWER))
}

/// Travel time on a road with free flow time `fftt` and `capacity` when it
/// carries `volume`: `fftt * (1 + 0.15 * (volume / capacity)^4)`.
pub fn bpr_time(fftt: f64, capacity: f64, volume: f64) -> Result<f64> {
    if !(fftt.is_finite() && fftt > 0.0) {
        return Err(Error::InvalidAttribute {
            what: "free flow time",
            value: fftt,
        });
    }
    if !(capacity.is_finite() && capacity > 0.0) {
        return Err(Error::InvalidAttribute {
            what: "capacity",
            value: capacity,
        });
    }
    if !(volume.is_finite() && volume >= 0.0) {
        return Err(Error::InvalidAttribute {
            what: "volume",
            value: volume,
        });
    }
    Ok(bpr(fftt, capacity, volume))
}
