//! Limited-memory BFGS with a strong-Wolfe line search.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::objective::Objective;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MinimizeSettings {
    /// Stop once the gradient norm falls to this value.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Number of correction pairs kept.
    pub memory: usize,
    /// Also stop once an iteration lowers the objective by less than
    /// `rel_tol·max(|f|, 1)`. Off when `None`.
    pub rel_tol: Option<f64>,
    pub max_line_search: usize,
    pub line_search: LineSearch,
}

/// Curvature condition used to accept a step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineSearch {
    /// `|g(x + t·d)·d| ≤ c2·|g(x)·d|`.
    #[default]
    StrongWolfe,
    /// `g(x + t·d)·d ≥ c2·g(x)·d`; copes better with kinks in the objective.
    WeakWolfe,
}

impl Default for MinimizeSettings {
    fn default() -> Self {
        Self {
            grad_tol: 1e-6,
            max_iter: 2000,
            memory: 10,
            rel_tol: None,
            max_line_search: 40,
            line_search: LineSearch::StrongWolfe,
        }
    }
}

impl MinimizeSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol >= 0.0) {
            return Err(invalid("grad_tol must be >= 0"));
        }
        if self.memory == 0 || self.max_line_search == 0 {
            return Err(invalid("memory and max_line_search must be positive"));
        }
        if let Some(r) = self.rel_tol {
            if !(r >= 0.0) {
                return Err(invalid("rel_tol must be >= 0"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientTolerance,
    RelativeDecrease,
    IterationLimit,
    /// No step along the search direction satisfied the Wolfe conditions,
    /// typically because the objective is flat to machine precision.
    LineSearchFailed,
}

/// Summary of a minimization run, without the final point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeSummary {
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub stop: StopReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult {
    pub x: Vec<f64>,
    pub summary: MinimizeSummary,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

struct Evaluator<'a, F: Objective + ?Sized> {
    f: &'a F,
    count: usize,
}

impl<F: Objective + ?Sized> Evaluator<'_, F> {
    fn eval(&mut self, x: &[f64], g: &mut [f64]) -> f64 {
        self.count += 1;
        self.f.eval(x, g)
    }
}

struct Trial {
    step: f64,
    x: Vec<f64>,
    f: f64,
    g: Vec<f64>,
    slope: f64,
}

/// Minimizer of the cubic through `(a, fa, da)` and `(b, fb, db)`,
/// kept inside the middle 80% of the bracket.
fn cubic_step(a: f64, fa: f64, da: f64, b: f64, fb: f64, db: f64) -> f64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let margin = 0.1 * (hi - lo);
    let d1 = da + db - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - da * db;
    let mut t = 0.5 * (a + b);
    if disc >= 0.0 {
        let d2 = (b - a).signum() * disc.sqrt();
        let denom = db - da + 2.0 * d2;
        if denom != 0.0 {
            let cand = b - (b - a) * (db + d2 - d1) / denom;
            if cand.is_finite() {
                t = cand;
            }
        }
    }
    t.clamp(lo + margin, hi - margin)
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;

/// Strong-Wolfe search along `d` from `x`. Falls back to the best point with
/// sufficient decrease if the curvature condition cannot be met.
#[allow(clippy::too_many_arguments)]
fn line_search<F: Objective + ?Sized>(
    ev: &mut Evaluator<'_, F>,
    x: &[f64],
    f0: f64,
    d: &[f64],
    slope0: f64,
    initial: f64,
    max_evals: usize,
    kind: LineSearch,
) -> Result<Option<Trial>> {
    let n = x.len();
    let probe = |step: f64, ev: &mut Evaluator<'_, F>| -> Trial {
        let xs: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + step * b).collect();
        let mut g = vec![0.0; n];
        let f = ev.eval(&xs, &mut g);
        let slope = dot(&g, d);
        Trial { step, x: xs, f, g, slope }
    };
    let armijo = |t: &Trial| t.f <= f0 + C1 * t.step * slope0;
    let curvature = |t: &Trial| match kind {
        LineSearch::StrongWolfe => t.slope.abs() <= -C2 * slope0,
        LineSearch::WeakWolfe => t.slope >= C2 * slope0,
    };

    let mut prev = Trial {
        step: 0.0,
        x: x.to_vec(),
        f: f0,
        g: Vec::new(),
        slope: slope0,
    };
    let mut best: Option<Trial> = None;
    let mut step = initial;
    let mut evals = 0;
    let (mut lo, mut hi);
    loop {
        if evals >= max_evals {
            return Ok(best);
        }
        let t = probe(step, ev);
        evals += 1;
        if !t.f.is_finite() {
            // Overshot into overflow; retreat towards the last good step.
            step = 0.5 * (prev.step + step);
            if step - prev.step <= f64::EPSILON * step {
                return Ok(best);
            }
            continue;
        }
        if !armijo(&t) || (prev.step > 0.0 && t.f >= prev.f) {
            lo = prev;
            hi = t;
            break;
        }
        if curvature(&t) {
            return Ok(Some(t));
        }
        if t.slope >= 0.0 {
            lo = t;
            hi = prev;
            break;
        }
        step = 2.0 * t.step;
        if best.as_ref().is_none_or(|b| t.f < b.f) {
            best = Some(Trial {
                step: t.step,
                x: t.x.clone(),
                f: t.f,
                g: t.g.clone(),
                slope: t.slope,
            });
        }
        prev = t;
    }
    // Zoom inside [lo, hi]; `lo` always satisfies sufficient decrease.
    while evals < max_evals {
        if (hi.step - lo.step).abs() <= 1e-16 * lo.step.abs().max(hi.step.abs()) {
            break;
        }
        let step = cubic_step(lo.step, lo.f, lo.slope, hi.step, hi.f, hi.slope);
        let t = probe(step, ev);
        evals += 1;
        if !t.f.is_finite() || !armijo(&t) || t.f >= lo.f {
            hi = t;
        } else {
            if curvature(&t) {
                return Ok(Some(t));
            }
            if t.slope * (hi.step - lo.step) >= 0.0 {
                hi = lo;
            }
            lo = t;
        }
    }
    if lo.step > 0.0 && lo.f < f0 {
        return Ok(Some(lo));
    }
    Ok(best.filter(|b| b.f < f0))
}

/// Minimizes `f` from `x0`. Deterministic for a given start and settings.
pub fn minimize<F: Objective + ?Sized>(f: &F, x0: Vec<f64>, settings: &MinimizeSettings) -> Result<MinimizeResult> {
    settings.validate()?;
    if x0.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: x0.len(),
        });
    }
    let n = x0.len();
    let mut ev = Evaluator { f, count: 0 };
    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut fx = ev.eval(&x, &mut g);
    if !fx.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("objective is {fx} at the starting point")));
    }
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(settings.memory);
    let mut iterations = 0;
    let finish = |x: Vec<f64>, fx: f64, g: &[f64], iterations: usize, count: usize, stop: StopReason| MinimizeResult {
        x,
        summary: MinimizeSummary {
            value: fx,
            grad_norm: norm(g),
            iterations,
            evaluations: count,
            converged: matches!(stop, StopReason::GradientTolerance | StopReason::RelativeDecrease),
            stop,
        },
    };
    loop {
        if norm(&g) <= settings.grad_tol {
            return Ok(finish(x, fx, &g, iterations, ev.count, StopReason::GradientTolerance));
        }
        if iterations >= settings.max_iter {
            return Ok(finish(x, fx, &g, iterations, ev.count, StopReason::IterationLimit));
        }
        // Two-loop recursion.
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &d);
            d.iter_mut().zip(y).for_each(|(di, yi)| *di -= a * yi);
            alphas.push(a);
        }
        let gamma = history.back().map_or(1.0, |(s, y, _)| dot(s, y) / dot(y, y));
        d.iter_mut().for_each(|v| *v *= gamma);
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            d.iter_mut().zip(s).for_each(|(di, si)| *di += (a - b) * si);
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            history.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let initial = if history.is_empty() { (1.0 / norm(&g)).min(1.0) } else { 1.0 };
        let mut trial = line_search(&mut ev, &x, fx, &d, slope, initial, settings.max_line_search, settings.line_search)?;
        if trial.is_none() && !history.is_empty() {
            // Retry once along steepest descent with a fresh memory.
            history.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
            trial = line_search(
                &mut ev,
                &x,
                fx,
                &d,
                slope,
                (1.0 / norm(&g)).min(1.0),
                settings.max_line_search,
                settings.line_search,
            )?;
        }
        let Some(t) = trial else {
            return Ok(finish(x, fx, &g, iterations, ev.count, StopReason::LineSearchFailed));
        };
        if t.g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite gradient during minimization".into()));
        }
        iterations += 1;
        let s: Vec<f64> = t.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = t.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) && sy > 0.0 {
            if history.len() == settings.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let decrease = fx - t.f;
        x = t.x;
        g = t.g;
        fx = t.f;
        if let Some(r) = settings.rel_tol {
            if decrease <= r * fx.abs().max(1.0) {
                return Ok(finish(x, fx, &g, iterations, ev.count, StopReason::RelativeDecrease));
            }
        }
    }
}
