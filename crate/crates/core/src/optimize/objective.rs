//! PBGD3 and PBDA objectives with their gradients, in primal form (explicit
//! weight vector) and kernel dual form (coefficients over anchor points).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::KernelMatrix;
use crate::losses::{phi, phi_cvx, phi_cvx_prime, phi_dis, phi_dis_prime, phi_prime};
use crate::sample::{FeatureVector, Label, LabeledSample, UnlabeledSample};

/// A smooth (or piecewise smooth) function with its gradient.
pub trait Objective {
    fn dim(&self) -> usize;

    /// Writes the gradient at `x` into `grad` and returns the value.
    fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64;

    fn value(&self, x: &[f64]) -> f64 {
        let mut g = vec![0.0; self.dim()];
        self.eval(x, &mut g)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.eval(x, &mut g);
        g
    }
}

/// Loss applied to the source margins.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskLoss {
    /// Convex relaxation of the probit loss.
    #[default]
    Convex,
    /// The probit loss itself; non-convex.
    Probit,
}

impl RiskLoss {
    #[inline]
    fn value(self, a: f64) -> f64 {
        match self {
            RiskLoss::Convex => phi_cvx(a),
            RiskLoss::Probit => phi(a),
        }
    }

    #[inline]
    fn derivative(self, a: f64) -> f64 {
        match self {
            RiskLoss::Convex => phi_cvx_prime(a),
            RiskLoss::Probit => phi_prime(a),
        }
    }
}

/// Variants of the objectives.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveOptions {
    #[serde(default)]
    pub risk_loss: RiskLoss,
    /// Allow source and target samples of different sizes by comparing
    /// mean disagreements, scaled back by the source size.
    #[serde(default)]
    pub unequal_sizes: bool,
}

/// Trade-off weights: `c` on the source risk, `a` on the domain disagreement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperparams {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "A")]
    pub a: f64,
}

impl Hyperparams {
    pub fn new(c: f64, a: f64) -> Result<Self> {
        let h = Self { c, a };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(invalid(format!("C must be > 0, got {}", self.c)));
        }
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return Err(invalid(format!("A must be >= 0, got {}", self.a)));
        }
        Ok(())
    }
}

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("C must be > 0, got {c}")))
    }
}

/// Sign of the disagreement bracket; zero at the kink.
#[inline]
fn bracket_sign(b: f64) -> f64 {
    if b > 0.0 {
        1.0
    } else if b < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Instances with their inverse norms (zero for the zero vector).
struct Normalized<'a> {
    xs: &'a [FeatureVector],
    inv_norm: Vec<f64>,
}

impl<'a> Normalized<'a> {
    fn new(xs: &'a [FeatureVector], dim: usize, what: &'static str) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::EmptySample(what));
        }
        if let Some(x) = xs.iter().find(|x| x.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: x.dim(),
            });
        }
        let inv_norm = xs
            .iter()
            .map(|x| {
                let n = x.norm();
                if n > 0.0 {
                    1.0 / n
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self { xs, inv_norm })
    }

    #[inline]
    fn margin(&self, i: usize, w: &[f64]) -> f64 {
        self.xs[i].dot_dense(w) * self.inv_norm[i]
    }

    fn len(&self) -> usize {
        self.xs.len()
    }
}

fn signs(labels: &[Label]) -> Vec<f64> {
    labels.iter().map(|y| y.sign()).collect()
}

fn half_sq_norm(w: &[f64]) -> f64 {
    0.5 * w.iter().map(|x| x * x).sum::<f64>()
}

/// `C·Σ loss(y_i w·x_i/‖x_i‖) + ½‖w‖²`.
pub struct Pbgd3Primal<'a> {
    src: Normalized<'a>,
    y: Vec<f64>,
    c: f64,
    loss: RiskLoss,
}

impl<'a> Pbgd3Primal<'a> {
    pub fn new(source: &'a LabeledSample, c: f64, options: ObjectiveOptions) -> Result<Self> {
        check_c(c)?;
        Ok(Self {
            src: Normalized::new(source.instances(), source.dim(), "source sample")?,
            y: signs(source.labels()),
            c,
            loss: options.risk_loss,
        })
    }

    /// Adds the risk term's value and gradient.
    fn accumulate(&self, w: &[f64], grad: &mut [f64]) -> f64 {
        let mut value = 0.0;
        for i in 0..self.src.len() {
            let a = self.y[i] * self.src.margin(i, w);
            value += self.loss.value(a);
            let coef = self.c * self.loss.derivative(a) * self.y[i] * self.src.inv_norm[i];
            self.src.xs[i].add_scaled_to(coef, grad);
        }
        self.c * value
    }
}

impl Objective for Pbgd3Primal<'_> {
    fn dim(&self) -> usize {
        self.src.xs[0].dim()
    }

    fn eval(&self, w: &[f64], grad: &mut [f64]) -> f64 {
        grad.copy_from_slice(w);
        half_sq_norm(w) + self.accumulate(w, grad)
    }
}

/// PBGD3 plus `A·|Σ_s φ_dis − Σ_t φ_dis|`.
pub struct PbdaPrimal<'a> {
    base: Pbgd3Primal<'a>,
    tgt: Normalized<'a>,
    a: f64,
    target_scale: f64,
}

impl<'a> PbdaPrimal<'a> {
    pub fn new(
        source: &'a LabeledSample,
        target: &'a UnlabeledSample,
        hp: Hyperparams,
        options: ObjectiveOptions,
    ) -> Result<Self> {
        hp.validate()?;
        let base = Pbgd3Primal::new(source, hp.c, options)?;
        let tgt = Normalized::new(target.instances(), source.dim(), "target sample")?;
        let target_scale = disagreement_scale(source.len(), target.len(), options)?;
        Ok(Self {
            base,
            tgt,
            a: hp.a,
            target_scale,
        })
    }
}

/// Weight on the target sum so that the bracket reads `Σ_s − (m/m′)·Σ_t`.
fn disagreement_scale(m: usize, m_prime: usize, options: ObjectiveOptions) -> Result<f64> {
    if m == m_prime {
        Ok(1.0)
    } else if options.unequal_sizes {
        Ok(m as f64 / m_prime as f64)
    } else {
        Err(Error::SizeMismatch(format!(
            "source has {m} points, target {m_prime}; enable unequal_sizes to allow this"
        )))
    }
}

impl Objective for PbdaPrimal<'_> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn eval(&self, w: &[f64], grad: &mut [f64]) -> f64 {
        let mut value = self.base.eval(w, grad);
        if self.a == 0.0 {
            return value;
        }
        let src = &self.base.src;
        let ms: Vec<f64> = (0..src.len()).map(|i| src.margin(i, w)).collect();
        let mt: Vec<f64> = (0..self.tgt.len()).map(|i| self.tgt.margin(i, w)).collect();
        let bracket = ms.iter().map(|&a| phi_dis(a)).sum::<f64>()
            - self.target_scale * mt.iter().map(|&a| phi_dis(a)).sum::<f64>();
        value += self.a * bracket.abs();
        let s = bracket_sign(bracket) * self.a;
        if s != 0.0 {
            for (i, &a) in ms.iter().enumerate() {
                src.xs[i].add_scaled_to(s * phi_dis_prime(a) * src.inv_norm[i], grad);
            }
            for (i, &a) in mt.iter().enumerate() {
                let coef = -s * self.target_scale * phi_dis_prime(a) * self.tgt.inv_norm[i];
                self.tgt.xs[i].add_scaled_to(coef, grad);
            }
        }
        value
    }
}

/// Value of the disagreement bracket for a primal weight vector.
pub fn pbda_bracket(w: &[f64], source: &LabeledSample, target: &UnlabeledSample, options: ObjectiveOptions) -> Result<f64> {
    let src = Normalized::new(source.instances(), w.len(), "source sample")?;
    let tgt = Normalized::new(target.instances(), w.len(), "target sample")?;
    let scale = disagreement_scale(src.len(), tgt.len(), options)?;
    let s: f64 = (0..src.len()).map(|i| phi_dis(src.margin(i, w))).sum();
    let t: f64 = (0..tgt.len()).map(|i| phi_dis(tgt.margin(i, w))).sum();
    Ok(s - scale * t)
}

/// Multisource PBDA: `C·Σ_j v_j Σ_i loss + A·|Σ_i[Σ_j v_j φ_dis(m_ij) − φ_dis(m_i^t)]| + ½‖w‖²`.
pub struct MultiPbdaPrimal<'a> {
    sources: Vec<(Normalized<'a>, Vec<f64>)>,
    v: Vec<f64>,
    tgt: Normalized<'a>,
    hp: Hyperparams,
    loss: RiskLoss,
}

impl<'a> MultiPbdaPrimal<'a> {
    pub fn new(
        sources: &'a [LabeledSample],
        v: &[f64],
        target: &'a UnlabeledSample,
        hp: Hyperparams,
        options: ObjectiveOptions,
    ) -> Result<Self> {
        hp.validate()?;
        if sources.is_empty() || sources.len() != v.len() {
            return Err(invalid(format!("{} sources for {} weights", sources.len(), v.len())));
        }
        if v.iter().any(|&x| !(x >= 0.0)) || (v.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(invalid("source weights must be a probability vector"));
        }
        let dim = target.dim();
        let m = target.len();
        let mut prepared = Vec::with_capacity(sources.len());
        for s in sources {
            if s.len() != m {
                return Err(Error::SizeMismatch(format!(
                    "every source must have the target size {m}, found {}",
                    s.len()
                )));
            }
            prepared.push((Normalized::new(s.instances(), dim, "source sample")?, signs(s.labels())));
        }
        Ok(Self {
            sources: prepared,
            v: v.to_vec(),
            tgt: Normalized::new(target.instances(), dim, "target sample")?,
            hp,
            loss: options.risk_loss,
        })
    }
}

impl MultiPbdaPrimal<'_> {
    /// Value of the weighted disagreement bracket at `w`.
    pub fn bracket(&self, w: &[f64]) -> f64 {
        let mut b = 0.0;
        for ((src, _), &vj) in self.sources.iter().zip(&self.v) {
            b += vj * (0..src.len()).map(|i| phi_dis(src.margin(i, w))).sum::<f64>();
        }
        b - (0..self.tgt.len()).map(|i| phi_dis(self.tgt.margin(i, w))).sum::<f64>()
    }
}

impl Objective for MultiPbdaPrimal<'_> {
    fn dim(&self) -> usize {
        self.tgt.xs[0].dim()
    }

    fn eval(&self, w: &[f64], grad: &mut [f64]) -> f64 {
        grad.copy_from_slice(w);
        let mut value = half_sq_norm(w);
        let mut bracket = 0.0;
        let mut src_margins = Vec::with_capacity(self.sources.len());
        for ((src, y), &vj) in self.sources.iter().zip(&self.v) {
            let ms: Vec<f64> = (0..src.len()).map(|i| src.margin(i, w)).collect();
            let mut risk = 0.0;
            for (i, &a) in ms.iter().enumerate() {
                let ya = y[i] * a;
                risk += self.loss.value(ya);
                let coef = self.hp.c * vj * self.loss.derivative(ya) * y[i] * src.inv_norm[i];
                src.xs[i].add_scaled_to(coef, grad);
            }
            value += self.hp.c * vj * risk;
            bracket += vj * ms.iter().map(|&a| phi_dis(a)).sum::<f64>();
            src_margins.push(ms);
        }
        let mt: Vec<f64> = (0..self.tgt.len()).map(|i| self.tgt.margin(i, w)).collect();
        bracket -= mt.iter().map(|&a| phi_dis(a)).sum::<f64>();
        value += self.hp.a * bracket.abs();
        let s = bracket_sign(bracket) * self.hp.a;
        if s != 0.0 {
            for (((src, _), &vj), ms) in self.sources.iter().zip(&self.v).zip(&src_margins) {
                for (i, &a) in ms.iter().enumerate() {
                    src.xs[i].add_scaled_to(s * vj * phi_dis_prime(a) * src.inv_norm[i], grad);
                }
            }
            for (i, &a) in mt.iter().enumerate() {
                self.tgt.xs[i].add_scaled_to(-s * phi_dis_prime(a) * self.tgt.inv_norm[i], grad);
            }
        }
        value
    }
}

fn inv_sqrt_diagonal(k: &KernelMatrix) -> Result<Vec<f64>> {
    k.diagonal()
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            if d > 0.0 && d.is_finite() {
                Ok(1.0 / d.sqrt())
            } else {
                Err(invalid(format!("kernel diagonal entry {i} is {d}; must be > 0")))
            }
        })
        .collect()
}

/// Kernel form of PBGD3 over coefficients `α` on the source points:
/// margins `y_i (Kα)_i/√K_ii` and regularizer `½αᵀKα`.
pub struct Pbgd3Dual<'a> {
    k: &'a KernelMatrix,
    inv_sqrt: Vec<f64>,
    y: Vec<f64>,
    c: f64,
    loss: RiskLoss,
}

impl<'a> Pbgd3Dual<'a> {
    pub fn new(k: &'a KernelMatrix, labels: &[Label], c: f64, options: ObjectiveOptions) -> Result<Self> {
        check_c(c)?;
        if k.size() == 0 {
            return Err(Error::EmptySample("kernel matrix"));
        }
        if labels.len() != k.size() {
            return Err(Error::SizeMismatch(format!(
                "{} labels for a {}x{} kernel matrix",
                labels.len(),
                k.size(),
                k.size()
            )));
        }
        Ok(Self {
            inv_sqrt: inv_sqrt_diagonal(k)?,
            k,
            y: signs(labels),
            c,
            loss: options.risk_loss,
        })
    }
}

impl Objective for Pbgd3Dual<'_> {
    fn dim(&self) -> usize {
        self.k.size()
    }

    fn eval(&self, alpha: &[f64], grad: &mut [f64]) -> f64 {
        let n = self.k.size();
        let mut f = vec![0.0; n];
        self.k.matvec(alpha, &mut f);
        let mut value = 0.5 * alpha.iter().zip(&f).map(|(a, b)| a * b).sum::<f64>();
        let mut u = alpha.to_vec();
        let mut risk = 0.0;
        for i in 0..n {
            let a = self.y[i] * f[i] * self.inv_sqrt[i];
            risk += self.loss.value(a);
            u[i] += self.c * self.loss.derivative(a) * self.y[i] * self.inv_sqrt[i];
        }
        value += self.c * risk;
        self.k.matvec(&u, grad);
        value
    }
}

/// Kernel form of PBDA over coefficients on the source points followed by
/// the target points.
pub struct PbdaDual<'a> {
    k: &'a KernelMatrix,
    inv_sqrt: Vec<f64>,
    y: Vec<f64>,
    hp: Hyperparams,
    loss: RiskLoss,
    target_scale: f64,
}

impl<'a> PbdaDual<'a> {
    /// `k` is the kernel matrix over source then target points; `labels`
    /// are the source labels, so the source count is `labels.len()`.
    pub fn new(k: &'a KernelMatrix, labels: &[Label], hp: Hyperparams, options: ObjectiveOptions) -> Result<Self> {
        hp.validate()?;
        let m = labels.len();
        if m == 0 || m >= k.size() {
            return Err(Error::SizeMismatch(format!(
                "{m} source labels for a {}x{} kernel matrix; need source and target points",
                k.size(),
                k.size()
            )));
        }
        let target_scale = disagreement_scale(m, k.size() - m, options)?;
        Ok(Self {
            inv_sqrt: inv_sqrt_diagonal(k)?,
            k,
            y: signs(labels),
            hp,
            loss: options.risk_loss,
            target_scale,
        })
    }
}

impl PbdaDual<'_> {
    /// Value of the disagreement bracket at `alpha`.
    pub fn bracket(&self, alpha: &[f64]) -> f64 {
        let n = self.k.size();
        let m = self.y.len();
        let mut f = vec![0.0; n];
        self.k.matvec(alpha, &mut f);
        let d: Vec<f64> = (0..n).map(|i| phi_dis(f[i] * self.inv_sqrt[i])).collect();
        d[..m].iter().sum::<f64>() - self.target_scale * d[m..].iter().sum::<f64>()
    }
}

impl Objective for PbdaDual<'_> {
    fn dim(&self) -> usize {
        self.k.size()
    }

    fn eval(&self, alpha: &[f64], grad: &mut [f64]) -> f64 {
        let n = self.k.size();
        let m = self.y.len();
        let mut f = vec![0.0; n];
        self.k.matvec(alpha, &mut f);
        let mut value = 0.5 * alpha.iter().zip(&f).map(|(a, b)| a * b).sum::<f64>();
        let mut u = alpha.to_vec();
        let mut risk = 0.0;
        for i in 0..m {
            let a = self.y[i] * f[i] * self.inv_sqrt[i];
            risk += self.loss.value(a);
            u[i] += self.hp.c * self.loss.derivative(a) * self.y[i] * self.inv_sqrt[i];
        }
        value += self.hp.c * risk;
        if self.hp.a != 0.0 {
            let margins: Vec<f64> = (0..n).map(|i| f[i] * self.inv_sqrt[i]).collect();
            let bracket = margins[..m].iter().map(|&a| phi_dis(a)).sum::<f64>()
                - self.target_scale * margins[m..].iter().map(|&a| phi_dis(a)).sum::<f64>();
            value += self.hp.a * bracket.abs();
            let s = bracket_sign(bracket) * self.hp.a;
            if s != 0.0 {
                for i in 0..n {
                    let side = if i < m { s } else { -s * self.target_scale };
                    u[i] += side * phi_dis_prime(margins[i]) * self.inv_sqrt[i];
                }
            }
        }
        self.k.matvec(&u, grad);
        value
    }
}

fn check_len(w: &[f64], dim: usize) -> Result<()> {
    if w.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: w.len(),
        });
    }
    Ok(())
}

pub fn pbgd3_objective(w: &[f64], source: &LabeledSample, c: f64) -> Result<f64> {
    check_len(w, source.dim())?;
    Ok(Pbgd3Primal::new(source, c, ObjectiveOptions::default())?.value(w))
}

pub fn pbgd3_gradient(w: &[f64], source: &LabeledSample, c: f64) -> Result<Vec<f64>> {
    check_len(w, source.dim())?;
    Ok(Pbgd3Primal::new(source, c, ObjectiveOptions::default())?.gradient(w))
}

pub fn pbgd3_dual_objective(alpha: &[f64], k: &KernelMatrix, labels: &[Label], c: f64) -> Result<f64> {
    check_len(alpha, k.size())?;
    Ok(Pbgd3Dual::new(k, labels, c, ObjectiveOptions::default())?.value(alpha))
}

pub fn pbgd3_dual_gradient(alpha: &[f64], k: &KernelMatrix, labels: &[Label], c: f64) -> Result<Vec<f64>> {
    check_len(alpha, k.size())?;
    Ok(Pbgd3Dual::new(k, labels, c, ObjectiveOptions::default())?.gradient(alpha))
}

pub fn pbda_objective(w: &[f64], source: &LabeledSample, target: &UnlabeledSample, a: f64, c: f64) -> Result<f64> {
    check_len(w, source.dim())?;
    Ok(PbdaPrimal::new(source, target, Hyperparams::new(c, a)?, ObjectiveOptions::default())?.value(w))
}

pub fn pbda_gradient(w: &[f64], source: &LabeledSample, target: &UnlabeledSample, a: f64, c: f64) -> Result<Vec<f64>> {
    check_len(w, source.dim())?;
    Ok(PbdaPrimal::new(source, target, Hyperparams::new(c, a)?, ObjectiveOptions::default())?.gradient(w))
}

pub fn pbda_dual_objective(alpha: &[f64], k: &KernelMatrix, labels: &[Label], a: f64, c: f64) -> Result<f64> {
    check_len(alpha, k.size())?;
    Ok(PbdaDual::new(k, labels, Hyperparams::new(c, a)?, ObjectiveOptions::default())?.value(alpha))
}

pub fn pbda_dual_gradient(alpha: &[f64], k: &KernelMatrix, labels: &[Label], a: f64, c: f64) -> Result<Vec<f64>> {
    check_len(alpha, k.size())?;
    Ok(PbdaDual::new(k, labels, Hyperparams::new(c, a)?, ObjectiveOptions::default())?.gradient(alpha))
}

pub fn multi_pbda_objective(
    w: &[f64],
    sources: &[LabeledSample],
    v: &[f64],
    target: &UnlabeledSample,
    a: f64,
    c: f64,
) -> Result<f64> {
    check_len(w, target.dim())?;
    Ok(MultiPbdaPrimal::new(sources, v, target, Hyperparams::new(c, a)?, ObjectiveOptions::default())?.value(w))
}

pub fn multi_pbda_gradient(
    w: &[f64],
    sources: &[LabeledSample],
    v: &[f64],
    target: &UnlabeledSample,
    a: f64,
    c: f64,
) -> Result<Vec<f64>> {
    check_len(w, target.dim())?;
    Ok(MultiPbdaPrimal::new(sources, v, target, Hyperparams::new(c, a)?, ObjectiveOptions::default())?.gradient(w))
}

/// Central finite-difference gradient with step `h`.
pub fn finite_difference_gradient<F: Objective + ?Sized>(f: &F, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|j| {
            let orig = xp[j];
            xp[j] = orig + h;
            let up = f.value(&xp);
            xp[j] = orig - h;
            let down = f.value(&xp);
            xp[j] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `‖g − g_fd‖ / max(‖g‖, ‖g_fd‖, floor)`.
pub fn relative_gradient_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = analytic.iter().zip(numeric).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(analytic).max(norm(numeric)).max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelSpec;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sample(rng: &mut ChaCha8Rng, m: usize, d: usize) -> LabeledSample {
        let rows = (0..m).map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let labels: Vec<f64> = (0..m).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
        LabeledSample::from_dense(rows, &labels).unwrap()
    }

    fn random_vec(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vec<f64> {
        (0..d).map(|_| rng.gen_range(-scale..scale)).collect()
    }

    #[test]
    fn zero_point_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_sample(&mut rng, 7, 3);
        assert_eq!(pbgd3_objective(&[0.0; 3], &s, 2.0).unwrap(), 7.0);
        let k = KernelMatrix::compute(&KernelSpec::Rbf { gamma: 0.5 }, s.instances());
        assert_eq!(pbgd3_dual_objective(&[0.0; 7], &k, s.labels(), 2.0).unwrap(), 7.0);
    }

    #[test]
    fn pbda_with_zero_a_is_pbgd3() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = random_sample(&mut rng, 6, 3);
        let t = random_sample(&mut rng, 6, 3).unlabeled();
        let w = random_vec(&mut rng, 3, 1.0);
        assert_eq!(pbda_objective(&w, &s, &t, 0.0, 3.0).unwrap(), pbgd3_objective(&w, &s, 3.0).unwrap());
        assert_eq!(pbda_gradient(&w, &s, &t, 0.0, 3.0).unwrap(), pbgd3_gradient(&w, &s, 3.0).unwrap());
    }

    #[test]
    fn identical_domains_have_no_disagreement_term() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_sample(&mut rng, 6, 3);
        for _ in 0..10 {
            let w = random_vec(&mut rng, 3, 3.0);
            assert_eq!(
                pbda_objective(&w, &s, &s.unlabeled(), 5.0, 1.5).unwrap(),
                pbgd3_objective(&w, &s, 1.5).unwrap()
            );
        }
    }

    #[test]
    fn pbda_dominates_pbgd3() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = random_sample(&mut rng, 8, 2);
        let t = random_sample(&mut rng, 8, 2).unlabeled();
        for _ in 0..50 {
            let w = random_vec(&mut rng, 2, 3.0);
            assert!(pbda_objective(&w, &s, &t, 0.7, 1.0).unwrap() >= pbgd3_objective(&w, &s, 1.0).unwrap());
        }
    }

    #[test]
    fn size_mismatch_requires_option() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = random_sample(&mut rng, 6, 2);
        let t = random_sample(&mut rng, 4, 2).unlabeled();
        assert!(matches!(pbda_objective(&[0.0; 2], &s, &t, 1.0, 1.0), Err(Error::SizeMismatch(_))));
        let opts = ObjectiveOptions {
            unequal_sizes: true,
            ..Default::default()
        };
        let f = PbdaPrimal::new(&s, &t, Hyperparams::new(1.0, 1.0).unwrap(), opts).unwrap();
        let w = [0.3, -0.8];
        let fd = finite_difference_gradient(&f, &w, 1e-5);
        assert!(relative_gradient_error(&f.gradient(&w), &fd, 1e-8) < 1e-6);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let s = random_sample(&mut rng, 8, 3);
            let t = random_sample(&mut rng, 8, 3).unlabeled();
            let w = random_vec(&mut rng, 3, 2.0);
            let hp = Hyperparams::new(rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0)).unwrap();
            let g = Pbgd3Primal::new(&s, hp.c, ObjectiveOptions::default()).unwrap();
            let fd = finite_difference_gradient(&g, &w, 1e-5);
            assert!(relative_gradient_error(&g.gradient(&w), &fd, 1e-8) < 1e-6);
            if pbda_bracket(&w, &s, &t, ObjectiveOptions::default()).unwrap().abs() > 1e-3 {
                let f = PbdaPrimal::new(&s, &t, hp, ObjectiveOptions::default()).unwrap();
                let fd = finite_difference_gradient(&f, &w, 1e-5);
                assert!(relative_gradient_error(&f.gradient(&w), &fd, 1e-8) < 1e-5);
            }
        }
    }

    #[test]
    fn dual_matches_primal_for_linear_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut s = random_sample(&mut rng, 6, 3);
        // Unit-norm instances.
        let rows: Vec<Vec<f64>> = s
            .instances()
            .iter()
            .map(|x| {
                let v = x.to_dense();
                let n = x.norm();
                v.iter().map(|a| a / n).collect()
            })
            .collect();
        let labels: Vec<f64> = s.labels().iter().map(|y| y.sign()).collect();
        s = LabeledSample::from_dense(rows, &labels).unwrap();
        let t = random_sample(&mut rng, 6, 3).unlabeled();
        let k = KernelMatrix::compute(&KernelSpec::Linear, s.instances());
        let all: Vec<FeatureVector> = s.instances().iter().chain(t.instances()).cloned().collect();
        let k2 = KernelMatrix::compute(&KernelSpec::Linear, &all);
        for _ in 0..10 {
            let alpha = random_vec(&mut rng, 6, 1.0);
            let mut w = vec![0.0; 3];
            for (a, x) in alpha.iter().zip(s.instances()) {
                x.add_scaled_to(*a, &mut w);
            }
            assert_abs_diff_eq!(
                pbgd3_dual_objective(&alpha, &k, s.labels(), 2.0).unwrap(),
                pbgd3_objective(&w, &s, 2.0).unwrap(),
                epsilon = 1e-10
            );
            let alpha2 = random_vec(&mut rng, 12, 1.0);
            let mut w2 = vec![0.0; 3];
            for (a, x) in alpha2.iter().zip(&all) {
                x.add_scaled_to(*a, &mut w2);
            }
            assert_abs_diff_eq!(
                pbda_dual_objective(&alpha2, &k2, s.labels(), 1.3, 2.0).unwrap(),
                pbda_objective(&w2, &s, &t, 1.3, 2.0).unwrap(),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn multi_reductions() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = random_sample(&mut rng, 5, 2);
        let t = random_sample(&mut rng, 5, 2).unlabeled();
        let w = random_vec(&mut rng, 2, 2.0);
        let single = pbda_objective(&w, &s, &t, 0.9, 1.7).unwrap();
        assert_eq!(multi_pbda_objective(&w, &[s.clone()], &[1.0], &t, 0.9, 1.7).unwrap(), single);
        let two = multi_pbda_objective(&w, &[s.clone(), s.clone()], &[0.5, 0.5], &t, 0.9, 1.7).unwrap();
        assert_abs_diff_eq!(two, single, epsilon = 1e-12);
        assert!(multi_pbda_objective(&w, &[s.clone()], &[0.5], &t, 0.9, 1.7).is_err());
    }

    #[test]
    fn kernel_errors() {
        let k = KernelMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!(pbgd3_dual_objective(&[0.0, 0.0], &k, &[Label::Positive, Label::Negative], 1.0).is_err());
        let k = KernelMatrix::from_rows(vec![vec![1.0]]).unwrap();
        assert!(pbgd3_dual_objective(&[0.0], &k, &[Label::Positive, Label::Negative], 1.0).is_err());
    }

    #[test]
    fn midpoint_convexity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = random_sample(&mut rng, 10, 3);
        for _ in 0..100 {
            let a = random_vec(&mut rng, 3, 5.0);
            let b = random_vec(&mut rng, 3, 5.0);
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
            let fm = pbgd3_objective(&mid, &s, 4.0).unwrap();
            let avg = 0.5 * (pbgd3_objective(&a, &s, 4.0).unwrap() + pbgd3_objective(&b, &s, 4.0).unwrap());
            assert!(fm <= avg + 1e-12 * avg.abs().max(1.0));
        }
    }
}
