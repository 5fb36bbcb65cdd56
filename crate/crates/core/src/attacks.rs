//! Gradient-sign attack baselines and the random-directional search attack.
//!
//! All five procedures share the same one-step perturbation kernel
//! `x* = x + eps * sign(v)` and the same clipping rules: iterative attacks
//! project onto the L-infinity ball of radius eps around the clean input
//! after every step, and (by default) onto the [0, 1] box.
//!
//! The random-directional attack (`rda`) keeps the one-step form but searches
//! for the direction `v` by first-choice hill climbing: each iteration draws
//! a fresh set of partial rotations of the current direction, shuffles it,
//! and accepts the first candidate that either misclassifies the perturbed
//! sample or strictly lowers the true-class confidence.

use rand::Rng;

use crate::error::{Error, Result};
use crate::net::{argmax, Network};
use crate::rotation::{apply_rotation, generate_rotation_set, included_angle_deg, shuffle_set};

/// Every knob shared by the attack procedures.
#[derive(Debug, Clone)]
pub struct AttackConfig {
    /// L-infinity perturbation budget.
    pub epsilon: f32,
    /// Per-step size of the iterative baselines.
    pub alpha: f32,
    /// Iteration count of the iterative baselines.
    pub iterations: u32,
    /// Momentum decay of the momentum baseline.
    pub momentum_decay: f32,
    /// Half-width of the integer-degree rotation range.
    pub theta: u32,
    /// Number of coordinates each rotation touches (even).
    pub l: usize,
    /// Clamp perturbed samples to the [0, 1] box.
    pub clip_box: bool,
    /// Momentum baseline: step `epsilon` per iteration instead of
    /// `epsilon / iterations` (saturates the budget after one step).
    pub mi_literal: bool,
    /// Upper bound on accepted hill-climbing steps per search.
    pub max_search_iters: u32,
    pub seed: u64,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            alpha: 0.01,
            iterations: 10,
            momentum_decay: 1.0,
            theta: 180,
            l: 10,
            clip_box: true,
            mi_literal: false,
            max_search_iters: 5000,
            seed: 42,
        }
    }
}

impl AttackConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon {} must lie in (0, 1]",
                self.epsilon
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= self.epsilon) {
            return Err(Error::InvalidConfig(format!(
                "alpha {} must lie in (0, epsilon={}]",
                self.alpha, self.epsilon
            )));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be at least 1".into()));
        }
        if self.momentum_decay < 0.0 {
            return Err(Error::InvalidConfig("momentum_decay must be non-negative".into()));
        }
        if !(1..=180).contains(&self.theta) {
            return Err(Error::InvalidConfig(format!(
                "theta {} outside [1, 180]",
                self.theta
            )));
        }
        if self.l % 2 != 0 || self.l < 2 {
            return Err(Error::InvalidConfig(format!(
                "l {} must be even and >= 2",
                self.l
            )));
        }
        if self.max_search_iters == 0 {
            return Err(Error::InvalidConfig("max_search_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Everything one attack execution produced.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackOutcome {
    pub x_adv: Vec<f32>,
    /// Whether the query model misclassifies `x_adv`.
    pub success: bool,
    /// Accepted hill-climbing steps (always 0 for the baselines).
    pub search_iterations: u32,
    /// Probability-vector evaluations of the query model.
    pub queries: u64,
    /// Angle between the initial gradient direction and the final attack
    /// direction, in degrees.
    pub angle_to_gradient_deg: f64,
    /// True-class confidence of the returned sample.
    pub final_true_confidence: f32,
    /// True-class confidence after the initial direction and after each
    /// accepted step; empty for the baselines.
    pub confidence_trace: Vec<f32>,
}

/// Componentwise sign with `sign(0) = 0`, so zero-gradient coordinates stay
/// unperturbed.
pub fn sign_vec(v: &[f32]) -> Vec<f32> {
    v.iter()
        .map(|&c| {
            if c > 0.0 {
                1.0
            } else if c < 0.0 {
                -1.0
            } else {
                0.0
            }
        })
        .collect()
}

/// One-step perturbation `x + epsilon * sign(v)`, optionally clamped to the
/// [0, 1] box.
pub fn perturb_one_step(x: &[f32], v: &[f32], epsilon: f32, clip_box: bool) -> Result<Vec<f32>> {
    if x.len() != v.len() {
        return Err(Error::Shape(format!(
            "perturbation direction length {} does not match input length {}",
            v.len(),
            x.len()
        )));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidConfig(format!("epsilon {epsilon} must be positive")));
    }
    let out = x
        .iter()
        .zip(v)
        .map(|(&xi, &vi)| {
            let sign = if vi > 0.0 {
                1.0
            } else if vi < 0.0 {
                -1.0
            } else {
                0.0
            };
            let moved = xi + epsilon * sign;
            if clip_box {
                moved.clamp(0.0, 1.0)
            } else {
                moved
            }
        })
        .collect();
    Ok(out)
}

/// Projects a point onto the L-infinity ball of radius `epsilon` around
/// `origin`, then optionally onto the [0, 1] box.
fn clip_to_ball(origin: &[f32], point: &mut [f32], epsilon: f32, clip_box: bool) {
    for (p, &o) in point.iter_mut().zip(origin) {
        *p = p.clamp(o - epsilon, o + epsilon);
        if clip_box {
            *p = p.clamp(0.0, 1.0);
        }
    }
}

/// True when the model's prediction for `x_adv` differs from `y`.
pub fn is_success(net: &Network, x_adv: &[f32], y: usize) -> Result<bool> {
    Ok(argmax(&net.forward(x_adv)?) != y)
}

fn is_zero(v: &[f32]) -> bool {
    v.iter().all(|&c| c == 0.0)
}

/// Angle between the reference gradient and the realized perturbation; 0
/// when either is degenerate.
fn perturbation_angle(reference: &[f32], x: &[f32], x_adv: &[f32]) -> f64 {
    let delta: Vec<f32> = x_adv.iter().zip(x).map(|(&a, &b)| a - b).collect();
    if is_zero(reference) || is_zero(&delta) {
        return 0.0;
    }
    included_angle_deg(reference, &delta).unwrap_or(0.0)
}

/// Single-step attack in the gradient direction.
pub fn fgsm(net: &Network, x: &[f32], y: usize, cfg: &AttackConfig) -> Result<AttackOutcome> {
    cfg.validate()?;
    let gradient = net.input_gradient(x, y)?;
    let x_adv = perturb_one_step(x, &gradient, cfg.epsilon, cfg.clip_box)?;
    let probs = net.forward(&x_adv)?;
    Ok(AttackOutcome {
        success: argmax(&probs) != y,
        final_true_confidence: probs[y],
        x_adv,
        search_iterations: 0,
        queries: 1,
        angle_to_gradient_deg: 0.0,
        confidence_trace: Vec::new(),
    })
}

/// Iterated gradient-sign steps with per-step projection.
pub fn bim(net: &Network, x: &[f32], y: usize, cfg: &AttackConfig) -> Result<AttackOutcome> {
    cfg.validate()?;
    let initial_gradient = net.input_gradient(x, y)?;
    let mut cur = x.to_vec();
    for step in 0..cfg.iterations {
        let gradient = if step == 0 {
            initial_gradient.clone()
        } else {
            net.input_gradient(&cur, y)?
        };
        for (c, g) in cur.iter_mut().zip(&gradient) {
            let sign = if *g > 0.0 {
                1.0
            } else if *g < 0.0 {
                -1.0
            } else {
                0.0
            };
            *c += cfg.alpha * sign;
        }
        clip_to_ball(x, &mut cur, cfg.epsilon, cfg.clip_box);
    }
    let probs = net.forward(&cur)?;
    Ok(AttackOutcome {
        success: argmax(&probs) != y,
        final_true_confidence: probs[y],
        angle_to_gradient_deg: perturbation_angle(&initial_gradient, x, &cur),
        x_adv: cur,
        search_iterations: 0,
        queries: 1,
        confidence_trace: Vec::new(),
    })
}

fn argmin(values: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Iterated descent toward the least-likely class of the clean input.
/// Success is measured against the clean input's predicted class.
pub fn llclass(net: &Network, x: &[f32], cfg: &AttackConfig) -> Result<AttackOutcome> {
    cfg.validate()?;
    let clean_probs = net.forward(x)?;
    let y_orig = argmax(&clean_probs);
    let y_ll = argmin(&clean_probs);
    let initial_gradient = net.input_gradient(x, y_ll)?;
    // Descent direction: the attack moves against the gradient of the
    // least-likely-class loss.
    let descent_reference: Vec<f32> = initial_gradient.iter().map(|&g| -g).collect();

    let mut cur = x.to_vec();
    for step in 0..cfg.iterations {
        let gradient = if step == 0 {
            initial_gradient.clone()
        } else {
            net.input_gradient(&cur, y_ll)?
        };
        for (c, g) in cur.iter_mut().zip(&gradient) {
            let sign = if *g > 0.0 {
                1.0
            } else if *g < 0.0 {
                -1.0
            } else {
                0.0
            };
            *c -= cfg.alpha * sign;
        }
        clip_to_ball(x, &mut cur, cfg.epsilon, cfg.clip_box);
    }
    let probs = net.forward(&cur)?;
    Ok(AttackOutcome {
        success: argmax(&probs) != y_orig,
        final_true_confidence: probs[y_orig],
        angle_to_gradient_deg: perturbation_angle(&descent_reference, x, &cur),
        x_adv: cur,
        search_iterations: 0,
        queries: 2,
        confidence_trace: Vec::new(),
    })
}

/// Momentum-accumulated gradient-sign iteration. With zero decay it reduces
/// to `bim` with the same per-step size, bit for bit.
pub fn mifgsm(net: &Network, x: &[f32], y: usize, cfg: &AttackConfig) -> Result<AttackOutcome> {
    cfg.validate()?;
    let step_size = if cfg.mi_literal {
        cfg.epsilon
    } else {
        cfg.epsilon / cfg.iterations as f32
    };
    let initial_gradient = net.input_gradient(x, y)?;
    let mut momentum = vec![0.0f32; x.len()];
    let mut cur = x.to_vec();
    for step in 0..cfg.iterations {
        let gradient = if step == 0 {
            initial_gradient.clone()
        } else {
            net.input_gradient(&cur, y)?
        };
        let l1: f32 = gradient.iter().map(|g| g.abs()).sum();
        for (m, g) in momentum.iter_mut().zip(&gradient) {
            let normalized = if l1 == 0.0 { 0.0 } else { *g / l1 };
            *m = cfg.momentum_decay * *m + normalized;
        }
        for (c, m) in cur.iter_mut().zip(&momentum) {
            let sign = if *m > 0.0 {
                1.0
            } else if *m < 0.0 {
                -1.0
            } else {
                0.0
            };
            *c += step_size * sign;
        }
        clip_to_ball(x, &mut cur, cfg.epsilon, cfg.clip_box);
    }
    let probs = net.forward(&cur)?;
    Ok(AttackOutcome {
        success: argmax(&probs) != y,
        final_true_confidence: probs[y],
        angle_to_gradient_deg: perturbation_angle(&initial_gradient, x, &cur),
        x_adv: cur,
        search_iterations: 0,
        queries: 1,
        confidence_trace: Vec::new(),
    })
}

/// Random-directional attack: first-choice hill climbing over partial
/// rotations of the gradient direction, with the gradient supplied by
/// `gradient_net` and every candidate scored against `query_net`.
///
/// White-box use passes the same network twice; black-box use passes a
/// substitute as `gradient_net` and the target as `query_net`.
pub fn rda<R: Rng + ?Sized>(
    gradient_net: &Network,
    query_net: &Network,
    x: &[f32],
    y: usize,
    cfg: &AttackConfig,
    rng: &mut R,
) -> Result<AttackOutcome> {
    if gradient_net.input_dim() != query_net.input_dim()
        || gradient_net.class_count() != query_net.class_count()
    {
        return Err(Error::Shape(format!(
            "gradient network ({}, {} classes) does not match query network ({}, {} classes)",
            gradient_net.input_dim(),
            gradient_net.class_count(),
            query_net.input_dim(),
            query_net.class_count()
        )));
    }
    let initial = gradient_net.input_gradient(x, y)?;
    rda_with_initial_direction(query_net, x, y, initial, cfg, rng)
}

/// The search engine behind [`rda`], taking an explicit initial direction.
pub fn rda_with_initial_direction<R: Rng + ?Sized>(
    query_net: &Network,
    x: &[f32],
    y: usize,
    initial_direction: Vec<f32>,
    cfg: &AttackConfig,
    rng: &mut R,
) -> Result<AttackOutcome> {
    cfg.validate()?;
    if initial_direction.len() != x.len() {
        return Err(Error::Shape(format!(
            "initial direction length {} does not match input length {}",
            initial_direction.len(),
            x.len()
        )));
    }
    let m = x.len();
    if cfg.l > m {
        return Err(Error::InvalidConfig(format!(
            "l {} exceeds input dimension {}",
            cfg.l, m
        )));
    }

    let v0 = initial_direction;
    let degenerate_start = is_zero(&v0);
    let mut queries: u64 = 0;

    // The gradient direction itself is the first candidate: if a single step
    // along it already succeeds there is nothing to search for.
    let x0 = perturb_one_step(x, &v0, cfg.epsilon, cfg.clip_box)?;
    let probs = query_net.forward(&x0)?;
    queries += 1;
    let mut cur_best = probs[y];
    if argmax(&probs) != y {
        return Ok(AttackOutcome {
            x_adv: x0,
            success: true,
            search_iterations: 0,
            queries,
            angle_to_gradient_deg: 0.0,
            final_true_confidence: cur_best,
            confidence_trace: vec![cur_best],
        });
    }

    let mut trace = vec![cur_best];
    let mut direction = v0.clone();
    let mut iterations: u32 = 0;

    'search: while iterations < cfg.max_search_iters {
        let set = generate_rotation_set(m, cfg.l, cfg.theta, rng)?;
        let set = shuffle_set(set, rng);
        for plan in set.plans() {
            let candidate = apply_rotation(plan, &direction)?;
            let x_cand = perturb_one_step(x, &candidate, cfg.epsilon, cfg.clip_box)?;
            let probs = query_net.forward(&x_cand)?;
            queries += 1;
            let success = argmax(&probs) != y;
            if success || probs[y] < cur_best {
                cur_best = probs[y];
                direction = candidate;
                iterations += 1;
                trace.push(cur_best);
                if success {
                    let angle = if degenerate_start {
                        0.0
                    } else {
                        included_angle_deg(&v0, &direction)?
                    };
                    return Ok(AttackOutcome {
                        x_adv: x_cand,
                        success: true,
                        search_iterations: iterations,
                        queries,
                        angle_to_gradient_deg: angle,
                        final_true_confidence: cur_best,
                        confidence_trace: trace,
                    });
                }
                continue 'search;
            }
        }
        // A full candidate set with no acceptance: local optimum.
        break;
    }

    let x_adv = perturb_one_step(x, &direction, cfg.epsilon, cfg.clip_box)?;
    let angle = if degenerate_start {
        0.0
    } else {
        included_angle_deg(&v0, &direction)?
    };
    Ok(AttackOutcome {
        x_adv,
        success: false,
        search_iterations: iterations,
        queries,
        angle_to_gradient_deg: angle,
        final_true_confidence: cur_best,
        confidence_trace: trace,
    })
}
