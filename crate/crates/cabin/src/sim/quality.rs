//! Frame quality scoring.

use super::config::PsnrModel;

/// PSNR of a frame: delivered frames follow the logarithmic rate-quality
/// curve; lost frames are concealed by repeating the previous frame at a
/// fixed penalty, floored.
pub fn psnr_of_frame(model: &PsnrModel, rate_kbps: f64, lost: bool, prev_psnr_db: f64) -> f64 {
    if lost {
        psnr_concealed(model, prev_psnr_db)
    } else {
        psnr_delivered(model, rate_kbps)
    }
}

pub fn psnr_delivered(model: &PsnrModel, rate_kbps: f64) -> f64 {
    let raw = model.base_db + model.slope_db * (rate_kbps / model.ref_rate_kbps).ln();
    raw.clamp(model.min_db, model.max_db)
}

pub fn psnr_concealed(model: &PsnrModel, prev_psnr_db: f64) -> f64 {
    (prev_psnr_db - model.conceal_step_db).max(model.floor_db)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_rate_scores_the_base() {
        let m = PsnrModel::default();
        assert_eq!(psnr_of_frame(&m, m.ref_rate_kbps, false, 0.0), m.base_db);
    }

    #[test]
    fn delivered_quality_is_monotone_in_rate() {
        let m = PsnrModel::default();
        let mut prev = f64::NEG_INFINITY;
        for rate in [150.0, 300.0, 700.0, 1200.0, 1400.0] {
            let p = psnr_delivered(&m, rate);
            assert!(p > prev, "rate {rate}");
            prev = p;
        }
    }

    #[test]
    fn concealment_steps_down_to_the_floor() {
        let m = PsnrModel::default();
        assert_eq!(psnr_of_frame(&m, 0.0, true, 38.0), 24.0);
        assert_eq!(psnr_of_frame(&m, 0.0, true, 26.0), 20.0);
    }

    #[test]
    fn clamped_at_both_ends() {
        let m = PsnrModel::default();
        assert_eq!(psnr_delivered(&m, 1.0), m.min_db);
        assert_eq!(psnr_delivered(&m, 1e9), m.max_db);
    }
}
