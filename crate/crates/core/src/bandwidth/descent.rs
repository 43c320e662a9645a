use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Settings for [`gradient_descent`].
///
/// The update is always `h ← h − λ·φ'(h)`. Two safeguards act on `λ`: a step
/// that would make `h` nonpositive is retried from the same point with `λ`
/// multiplied by `lr_shrink`, and, when `speed_scale` is set, `λ` is
/// multiplied by `speed_scale` after every step that does not increase the
/// loss while a step that increases it is discarded and `λ` shrunk. With
/// `speed_scale = None` the learning rate only changes on nonpositive steps.
#[derive(Debug, Clone, PartialEq)]
pub struct GdConfig {
    /// Starting bandwidth; sampled when absent.
    pub h0: Option<f64>,
    pub lambda: f64,
    /// Stop once `|φ'(h)| ≤ delta`.
    pub delta: f64,
    pub max_iter: usize,
    pub lr_shrink: f64,
    /// Number of random starting candidates, drawn log-uniformly from `init_range`.
    pub init_samples: usize,
    pub init_range: (f64, f64),
    pub speed_scale: Option<f64>,
    pub seed: u64,
}

impl Default for GdConfig {
    fn default() -> Self {
        GdConfig {
            h0: None,
            lambda: 0.01,
            delta: 1e-6,
            max_iter: 500,
            lr_shrink: 0.5,
            init_samples: 10,
            init_range: (1e-3, 1e3),
            speed_scale: Some(2.0),
            seed: 0,
        }
    }
}

impl GdConfig {
    pub const MAX_SHRINK_RETRIES: usize = 50;

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.lambda) || !pos(self.delta) {
            return Err(Error::invalid("learning rate and tolerance must be positive"));
        }
        if !(self.lr_shrink > 0.0 && self.lr_shrink < 1.0) {
            return Err(Error::invalid(format!("lr_shrink must be in (0, 1), got {}", self.lr_shrink)));
        }
        if self.max_iter == 0 || self.init_samples == 0 {
            return Err(Error::invalid("max_iter and init_samples must be at least 1"));
        }
        if let Some(h0) = self.h0 {
            if !pos(h0) {
                return Err(Error::invalid(format!("h0 must be positive, got {h0}")));
            }
        }
        let (lo, hi) = self.init_range;
        if !(pos(lo) && pos(hi) && lo <= hi) {
            return Err(Error::invalid("init_range must be positive with lo <= hi"));
        }
        if let Some(s) = self.speed_scale {
            if !(s.is_finite() && s >= 1.0) {
                return Err(Error::invalid(format!("speed_scale must be >= 1, got {s}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEvent {
    /// A random starting candidate.
    Init,
    /// The point the descent starts from.
    Start,
    /// An accepted update.
    Step,
    /// The update would have left `h ≤ 0`; `λ` was shrunk.
    NegativeShrink,
    /// The update raised the loss and was discarded; `λ` was shrunk.
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdStep {
    pub iter: usize,
    pub h: f64,
    pub loss: f64,
    pub grad: f64,
    /// Learning rate after this record.
    pub lambda: f64,
    pub event: StepEvent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GdOutcome {
    pub h: f64,
    pub loss: f64,
    pub grad: f64,
    /// Update attempts after the start point.
    pub iterations: usize,
    /// Loss-and-gradient evaluations, starting candidates included.
    pub evaluations: usize,
    /// Whether the gradient tolerance was met. When false, `h` is the best point seen.
    pub converged: bool,
    pub trace: Vec<GdStep>,
}

impl GdOutcome {
    pub fn shrink_events(&self) -> usize {
        self.trace
            .iter()
            .filter(|s| matches!(s.event, StepEvent::NegativeShrink | StepEvent::Rejected))
            .count()
    }
}

/// Minimizes a scalar loss over `h > 0` from its value and derivative.
pub fn gradient_descent<F>(cfg: &GdConfig, mut objective: F) -> Result<GdOutcome>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    cfg.validate()?;
    let mut evaluations = 0usize;
    let mut eval = |h: f64| -> Result<(f64, f64)> {
        evaluations += 1;
        objective(h)
    };
    let mut trace = Vec::new();

    let (mut h, mut loss, mut grad) = match cfg.h0 {
        Some(h0) => {
            let (l, g) = eval(h0)?;
            (h0, l, g)
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let (lo, hi) = (cfg.init_range.0.ln(), cfg.init_range.1.ln());
            let mut best: Option<(f64, f64, f64)> = None;
            for _ in 0..cfg.init_samples {
                let h = if lo < hi { rng.random_range(lo..hi).exp() } else { cfg.init_range.0 };
                let (l, g) = eval(h)?;
                trace.push(GdStep { iter: 0, h, loss: l, grad: g, lambda: cfg.lambda, event: StepEvent::Init });
                if l.is_finite() && g.is_finite() && best.map_or(true, |b| l < b.1) {
                    best = Some((h, l, g));
                }
            }
            best.ok_or_else(|| Error::Numeric("loss is not finite at any starting candidate".into()))?
        }
    };
    if !(loss.is_finite() && grad.is_finite()) {
        return Err(Error::Numeric(format!("loss or gradient not finite at h0 = {h}")));
    }
    let mut lambda = cfg.lambda;
    trace.push(GdStep { iter: 0, h, loss, grad, lambda, event: StepEvent::Start });

    let mut best = (h, loss, grad);
    let mut iterations = 0;
    let mut converged = false;
    loop {
        if grad.abs() <= cfg.delta {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iter {
            break;
        }
        iterations += 1;

        let mut candidate = h - lambda * grad;
        let mut retries = 0;
        while !(candidate.is_finite() && candidate > 0.0) {
            retries += 1;
            if retries > GdConfig::MAX_SHRINK_RETRIES {
                return Err(Error::Numeric(format!(
                    "bandwidth stayed nonpositive after {} learning-rate reductions (h = {h}, gradient = {grad})",
                    GdConfig::MAX_SHRINK_RETRIES
                )));
            }
            lambda *= cfg.lr_shrink;
            trace.push(GdStep { iter: iterations, h, loss, grad, lambda, event: StepEvent::NegativeShrink });
            candidate = h - lambda * grad;
        }

        let (l, g) = eval(candidate)?;
        let finite = l.is_finite() && g.is_finite();
        let accept = match cfg.speed_scale {
            Some(_) => finite && l <= loss,
            None => {
                if !finite {
                    return Err(Error::Numeric(format!("loss or gradient not finite at h = {candidate}")));
                }
                true
            }
        };
        if accept {
            h = candidate;
            loss = l;
            grad = g;
            if let Some(s) = cfg.speed_scale {
                lambda *= s;
            }
            trace.push(GdStep { iter: iterations, h, loss, grad, lambda, event: StepEvent::Step });
            if loss < best.1 {
                best = (h, loss, grad);
            }
        } else {
            lambda *= cfg.lr_shrink;
            trace.push(GdStep { iter: iterations, h: candidate, loss: l, grad: g, lambda, event: StepEvent::Rejected });
        }
    }

    let (h, loss, grad) = if converged { (h, loss, grad) } else { best };
    Ok(GdOutcome {
        h,
        loss,
        grad,
        iterations,
        evaluations,
        converged,
        trace,
    })
}
