//! Limited-memory BFGS restricted to the masked parameter slots.

use std::collections::VecDeque;

use super::{BlockMask, LossContext, MaskedObjective, OptimizeResult, OptimizerConfig, OptimizerMode, Termination};
use crate::circuits::ParamVector;
use crate::error::{Error, Result};

const C1: f64 = 1e-4;
const C2: f64 = 0.9;
const MAX_LINE_EVALS: usize = 30;
/// Length of the very first trial step, before any curvature is known.
const FIRST_STEP: f64 = 0.1;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

struct Point {
    alpha: f64,
    f: f64,
    g: Vec<f64>,
    slope: f64,
}

/// Strong-Wolfe line search along `dir` from `x`.
///
/// Returns `None` if no point with sufficient decrease was found.
fn line_search(
    obj: &mut MaskedObjective<'_, '_>,
    x: &[f64],
    f0: f64,
    slope0: f64,
    dir: &[f64],
    alpha_init: f64,
) -> Result<Option<Point>> {
    let mut eval = |alpha: f64| -> Result<Point> {
        let trial: Vec<f64> = x.iter().zip(dir).map(|(xi, di)| xi + alpha * di).collect();
        let (f, g) = obj.value_and_gradient(&trial)?;
        let slope = dot(&g, dir);
        Ok(Point { alpha, f, g, slope })
    };
    let armijo = |p: &Point| p.f <= f0 + C1 * p.alpha * slope0;
    let curvature = |p: &Point| p.slope.abs() <= -C2 * slope0;

    let mut prev = Point { alpha: 0.0, f: f0, g: Vec::new(), slope: slope0 };
    let mut alpha = alpha_init;
    let mut evals = 0;
    while evals < MAX_LINE_EVALS {
        let p = eval(alpha)?;
        evals += 1;
        if !armijo(&p) || (evals > 1 && p.f >= prev.f) {
            return zoom(&mut eval, prev, p, f0, slope0, MAX_LINE_EVALS - evals);
        }
        if curvature(&p) {
            return Ok(Some(p));
        }
        if p.slope >= 0.0 {
            return zoom(&mut eval, p, prev, f0, slope0, MAX_LINE_EVALS - evals);
        }
        alpha = 2.0 * p.alpha;
        prev = p;
    }
    Ok((prev.alpha > 0.0).then_some(prev))
}

/// `lo` always satisfies sufficient decrease (or is the origin).
fn zoom(
    eval: &mut impl FnMut(f64) -> Result<Point>,
    mut lo: Point,
    mut hi: Point,
    f0: f64,
    slope0: f64,
    budget: usize,
) -> Result<Option<Point>> {
    for _ in 0..budget {
        let width = hi.alpha - lo.alpha;
        if width.abs() <= 1e-14 * lo.alpha.abs().max(1e-300) {
            break;
        }
        let alpha = interpolate(&lo, &hi);
        let p = eval(alpha)?;
        if p.f > f0 + C1 * p.alpha * slope0 || p.f >= lo.f {
            hi = p;
        } else {
            if p.slope.abs() <= -C2 * slope0 {
                return Ok(Some(p));
            }
            if p.slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = p;
        }
    }
    Ok((lo.alpha > 0.0).then_some(lo))
}

/// Cubic interpolation between two bracketing points, falling back to
/// bisection when the minimizer is undefined or too close to an end.
fn interpolate(lo: &Point, hi: &Point) -> f64 {
    let (a, b) = (lo.alpha, hi.alpha);
    let mid = 0.5 * (a + b);
    let d1 = lo.slope + hi.slope - 3.0 * (lo.f - hi.f) / (a - b);
    let disc = d1 * d1 - lo.slope * hi.slope;
    if !(disc >= 0.0) {
        return mid;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let denom = hi.slope - lo.slope + 2.0 * d2;
    if denom == 0.0 {
        return mid;
    }
    let cand = b - (b - a) * (hi.slope + d2 - d1) / denom;
    let (min, max) = (a.min(b), a.max(b));
    let margin = 0.1 * (max - min);
    if cand.is_finite() && cand > min + margin && cand < max - margin {
        cand
    } else {
        mid
    }
}

/// Two-loop recursion: `-H g` from the stored curvature pairs.
fn direction(g: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some((s, y, _)) = pairs.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|qi| *qi *= gamma);
    }
    for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|qi| *qi = -*qi);
    q
}

/// Minimizes the projection loss over the masked slots, starting from
/// `d_theta_0` (entries outside the mask are ignored).
///
/// Stops when the loss or the masked gradient's infinity norm falls below the
/// configured tolerances, when the iteration budget is spent, or when no
/// descent step can be found. Accepted losses never increase.
pub fn minimize(
    ctx: &LossContext<'_>,
    mask: &BlockMask,
    d_theta_0: &ParamVector,
    cfg: &OptimizerConfig,
) -> Result<OptimizeResult> {
    if cfg.mode != OptimizerMode::QuasiNewton {
        return Err(Error::InvalidConfig("minimize expects quasi_newton mode".into()));
    }
    cfg.validate()?;
    if d_theta_0.len() != ctx.theta().len() {
        return Err(Error::Shape(format!(
            "initial update has {} entries, expected {}",
            d_theta_0.len(),
            ctx.theta().len()
        )));
    }
    let mut obj = MaskedObjective::new(ctx, mask)?;
    let mut x = obj.reduce(d_theta_0);
    let (mut f, mut g) = obj.value_and_gradient(&x)?;
    let mut trace = vec![f];
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(cfg.history);
    let mut iterations = 0;

    let termination = loop {
        if f <= cfg.loss_tolerance {
            break Termination::LossTolerance;
        }
        if inf_norm(&g) <= cfg.gradient_tolerance {
            break Termination::GradientTolerance;
        }
        if iterations >= cfg.max_iterations {
            break Termination::BudgetExhausted;
        }

        let mut dir = direction(&g, &pairs);
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            pairs.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&g, &dir);
        }
        let alpha0 = if pairs.is_empty() {
            (FIRST_STEP / dot(&dir, &dir).sqrt()).min(1.0)
        } else {
            1.0
        };
        let mut step = line_search(&mut obj, &x, f, slope, &dir, alpha0)?;
        if step.is_none() && !pairs.is_empty() {
            pairs.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&g, &dir);
            let alpha0 = (FIRST_STEP / dot(&dir, &dir).sqrt()).min(1.0);
            step = line_search(&mut obj, &x, f, slope, &dir, alpha0)?;
        }
        let Some(p) = step else {
            break Termination::Stalled;
        };
        if !(p.f < f) {
            break Termination::Stalled;
        }

        let s: Vec<f64> = dir.iter().map(|d| p.alpha * d).collect();
        let y: Vec<f64> = p.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if pairs.len() == cfg.history {
                pairs.pop_front();
            }
            pairs.push_back((s.clone(), y, 1.0 / sy));
        }
        x.iter_mut().zip(&s).for_each(|(xi, si)| *xi += si);
        f = p.f;
        g = p.g;
        iterations += 1;
        trace.push(f);
    };

    Ok(OptimizeResult {
        d_theta_star: obj.expand(&x),
        final_loss: f,
        iterations,
        loss_evaluations: obj.loss_evaluations,
        gradient_evaluations: obj.gradient_evaluations,
        termination,
        loss_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{build_blocked_ansatz, trotter_step_circuit, BlockedAnsatz, Circuit};
    use crate::pauli::{build_tfim, Pauli, PauliSum, PauliTerm, PauliWord};
    use crate::statevec::StateVector;

    struct Fixture {
        ansatz: BlockedAnsatz,
        theta: ParamVector,
        step: Circuit,
        s0: StateVector,
        dt: f64,
    }

    fn single_term(dt: f64) -> (Fixture, f64) {
        let coeff = 0.9;
        let w = PauliWord::pair(0, Pauli::X, 1, Pauli::X).unwrap();
        let h = PauliSum::new(2, vec![PauliTerm { coeff, word: w }]).unwrap();
        let ansatz = build_blocked_ansatz(&h, 1).unwrap();
        let fx = Fixture {
            theta: ansatz.zero_parameters(),
            ansatz,
            step: trotter_step_circuit(&h, dt, 8).unwrap(),
            s0: StateVector::zero(2).unwrap(),
            dt,
        };
        (fx, 2.0 * coeff * dt)
    }

    fn ctx(fx: &Fixture) -> LossContext<'_> {
        LossContext::new(&fx.ansatz, &fx.theta, &fx.step, fx.dt, &fx.s0).unwrap()
    }

    #[test]
    fn converges_to_trotter_angle() {
        let (fx, angle) = single_term(0.05);
        let c = ctx(&fx);
        let r = minimize(&c, &BlockMask::all(1), &fx.ansatz.zero_parameters(), &OptimizerConfig::default()).unwrap();
        assert!(r.final_loss < 1e-10, "loss {}", r.final_loss);
        assert!(r.iterations <= 20, "iterations {}", r.iterations);
        assert!((r.d_theta_star.as_slice()[0] - angle).abs() < 1e-4);
    }

    #[test]
    fn start_at_optimum_returns_immediately() {
        let (fx, angle) = single_term(0.05);
        let c = ctx(&fx);
        let start = ParamVector::from_values(vec![angle], 1).unwrap();
        let r = minimize(&c, &BlockMask::all(1), &start, &OptimizerConfig::default()).unwrap();
        assert!(r.iterations <= 1);
        assert!(r.final_loss < 1e-10);
    }

    #[test]
    fn accepted_losses_never_increase() {
        let h = build_tfim(4, -0.25, -1.0, false).unwrap();
        let ansatz = build_blocked_ansatz(&h, 2).unwrap();
        let theta = ParamVector::from_values(
            (0..ansatz.num_parameters()).map(|k| 0.05 * ((k * 7) % 5) as f64).collect(),
            ansatz.block_size(),
        )
        .unwrap();
        let step = trotter_step_circuit(&h, 0.05, 8).unwrap();
        let s0 = StateVector::zero(4).unwrap();
        let c = LossContext::new(&ansatz, &theta, &step, 0.05, &s0).unwrap();
        let r = minimize(&c, &BlockMask::all(2), &ansatz.zero_parameters(), &OptimizerConfig::default()).unwrap();
        assert!(r.loss_trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.final_loss < r.loss_trace[0]);
        assert_eq!(r.loss_trace.len(), r.iterations + 1);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let h = build_tfim(3, -0.25, -1.0, false).unwrap();
        let ansatz = build_blocked_ansatz(&h, 1).unwrap();
        let theta = ansatz.zero_parameters();
        let step = trotter_step_circuit(&h, 0.2, 8).unwrap();
        let s0 = StateVector::zero(3).unwrap();
        let c = LossContext::new(&ansatz, &theta, &step, 0.2, &s0).unwrap();
        let cfg = OptimizerConfig { max_iterations: 1, ..Default::default() };
        let r = minimize(&c, &BlockMask::all(1), &ansatz.zero_parameters(), &cfg).unwrap();
        assert!(r.budget_exhausted());
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn masked_slots_stay_zero() {
        let h = build_tfim(3, -0.25, -1.0, false).unwrap();
        let ansatz = build_blocked_ansatz(&h, 2).unwrap();
        let theta = ansatz.zero_parameters();
        let step = trotter_step_circuit(&h, 0.1, 8).unwrap();
        let s0 = StateVector::zero(3).unwrap();
        let c = LossContext::new(&ansatz, &theta, &step, 0.1, &s0).unwrap();
        let mut start = ansatz.zero_parameters();
        start.block_mut(0).iter_mut().for_each(|v| *v = 0.3);
        let r = minimize(&c, &BlockMask::single(1, 2).unwrap(), &start, &OptimizerConfig::default()).unwrap();
        assert!(r.d_theta_star.block(0).iter().all(|v| v.to_bits() == 0));
    }

    #[test]
    fn rejects_spsa_mode() {
        let (fx, _) = single_term(0.05);
        let c = ctx(&fx);
        let cfg = OptimizerConfig::spsa(10, 1);
        assert!(minimize(&c, &BlockMask::all(1), &fx.ansatz.zero_parameters(), &cfg).is_err());
    }
}
