//! Doppler budget for the frequency-error tolerance.

use sinorder::Error;

/// Largest source speed keeping the Doppler-induced frequency error within
/// `delta_omega_abs_max`, for a carrier at `carrier_omega` and propagation
/// speed `wave_speed` (first order: `d_omega / omega = v / c`).
pub fn doppler_speed_limit(
    delta_omega_abs_max: f64,
    carrier_omega: f64,
    wave_speed: f64,
) -> sinorder::Result<f64> {
    if !(carrier_omega > 0.0) || !carrier_omega.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "carrier frequency must be positive, got {carrier_omega}"
        )));
    }
    if !(wave_speed > 0.0) || !wave_speed.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "wave speed must be positive, got {wave_speed}"
        )));
    }
    if !(delta_omega_abs_max >= 0.0) || !delta_omega_abs_max.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "frequency-error bound must be non-negative, got {delta_omega_abs_max}"
        )));
    }
    Ok(wave_speed * delta_omega_abs_max / carrier_omega)
}
