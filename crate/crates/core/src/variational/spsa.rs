use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BlockMask, LossContext, MaskedObjective, OptimizeResult, OptimizerConfig, OptimizerMode, Termination};
use crate::circuits::ParamVector;
use crate::error::{Error, Result};

fn rademacher(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
}

fn perturbed(x: &[f64], delta: &[f64], scale: f64) -> Vec<f64> {
    x.iter().zip(delta).map(|(xi, di)| xi + scale * di).collect()
}

/// Simultaneous-perturbation stochastic approximation over the masked slots.
///
/// Each iteration draws a Rademacher direction, spends two loss evaluations
/// and moves against the resulting gradient estimate. The run is fully
/// determined by `cfg.rng_seed`.
pub fn spsa_minimize(
    ctx: &LossContext<'_>,
    mask: &BlockMask,
    d_theta_0: &ParamVector,
    cfg: &OptimizerConfig,
) -> Result<OptimizeResult> {
    if cfg.mode != OptimizerMode::Spsa {
        return Err(Error::InvalidConfig("spsa_minimize expects spsa mode".into()));
    }
    cfg.validate()?;
    if d_theta_0.len() != ctx.theta().len() {
        return Err(Error::Shape(format!(
            "initial update has {} entries, expected {}",
            d_theta_0.len(),
            ctx.theta().len()
        )));
    }
    let gains = &cfg.spsa;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut obj = MaskedObjective::new(ctx, mask)?;
    let dim = obj.dim();
    let mut x = obj.reduce(d_theta_0);

    let a = match gains.a {
        Some(a) => a,
        None => {
            // mean |g_i| over a few estimates at the starting point
            let c0 = gains.c;
            let mut total = 0.0;
            for _ in 0..gains.calibration_samples {
                let delta = rademacher(&mut rng, dim);
                let fp = obj.value(&perturbed(&x, &delta, c0))?;
                let fm = obj.value(&perturbed(&x, &delta, -c0))?;
                total += (fp - fm).abs() / (2.0 * c0);
            }
            let magnitude = total / gains.calibration_samples as f64;
            let scale = (gains.big_a + 1.0).powf(gains.alpha);
            if magnitude > 0.0 {
                gains.first_step * scale / magnitude
            } else {
                gains.first_step * scale
            }
        }
    };

    let mut trace = Vec::with_capacity(cfg.max_iterations);
    let mut iterations = 0;
    let mut termination = Termination::BudgetExhausted;
    for k in 0..cfg.max_iterations {
        let ak = a / (k as f64 + 1.0 + gains.big_a).powf(gains.alpha);
        let ck = gains.c / (k as f64 + 1.0).powf(gains.gamma);
        let delta = rademacher(&mut rng, dim);
        let fp = obj.value(&perturbed(&x, &delta, ck))?;
        let fm = obj.value(&perturbed(&x, &delta, -ck))?;
        let g_scale = (fp - fm) / (2.0 * ck);
        x.iter_mut().zip(&delta).for_each(|(xi, di)| *xi -= ak * g_scale * di);
        iterations += 1;
        let mean = 0.5 * (fp + fm);
        trace.push(mean);
        if mean <= cfg.loss_tolerance {
            termination = Termination::LossTolerance;
            break;
        }
    }
    let final_loss = obj.value(&x)?;

    Ok(OptimizeResult {
        d_theta_star: obj.expand(&x),
        final_loss,
        iterations,
        loss_evaluations: obj.loss_evaluations,
        gradient_evaluations: 0,
        termination,
        loss_trace: trace,
    })
}
