//! Metal-oxide gas sensor model: the voltage-divider resistance conversion
//! and the start-up bias correction applied to the raw signal. The episode
//! simulator feeds the controller sampled concentrations directly (already in
//! "corrected reading" units); this module covers the hardware-facing path
//! and is exercised by its own tests.

use crate::{Error, Result};

/// Sensing-element resistance from the divider measurement:
/// `R_s = (V_c / V_RL - 1) * R_L`.
pub fn sensor_reading(v_rl: f64, r_l: f64, v_c: f64) -> Result<f64> {
    if !(v_rl > 0.0) {
        return Err(Error::Config(format!(
            "sensor load voltage must be positive, got {v_rl}"
        )));
    }
    Ok((v_c / v_rl - 1.0) * r_l)
}

/// Start-up bias remover: low-passes the first `warmup` samples (taken with
/// no gas present) into a baseline, then reports `raw - baseline` so that
/// higher means more gas.
#[derive(Debug, Clone)]
pub struct BiasCorrector {
    alpha: f64,
    warmup: usize,
    seen: usize,
    baseline: f64,
}

impl BiasCorrector {
    /// First-order filter coefficient `alpha` in (0, 1]; `warmup` is the
    /// number of start-up samples folded into the baseline.
    pub fn new(alpha: f64, warmup: usize) -> BiasCorrector {
        BiasCorrector { alpha, warmup: warmup.max(1), seen: 0, baseline: 0.0 }
    }

    /// Defaults used by the rest of the crate when a corrector is needed.
    pub fn standard() -> BiasCorrector {
        BiasCorrector::new(0.05, 100)
    }

    /// Feed one raw sample. During warmup the baseline accumulates and no
    /// corrected value exists yet.
    pub fn observe(&mut self, raw: f64) {
        if self.seen < self.warmup {
            if self.seen == 0 {
                self.baseline = raw;
            } else {
                self.baseline += self.alpha * (raw - self.baseline);
            }
        }
        self.seen += 1;
    }

    pub fn warmed_up(&self) -> bool {
        self.seen >= self.warmup
    }

    /// Corrected value for a raw sample; an error until warmup completes.
    pub fn corrected(&self, raw: f64) -> Result<f64> {
        if !self.warmed_up() {
            return Err(Error::Config(format!(
                "bias correction requested after {} of {} warmup samples",
                self.seen, self.warmup
            )));
        }
        Ok(raw - self.baseline)
    }
}
