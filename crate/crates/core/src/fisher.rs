//! List-mode and binned Fisher information, detectability, and the binning
//! information loss.
//!
//! For Poisson data with intensity `ḡ(a|θ)`:
//!
//! * list mode: `F_LM = ∫ ∇ḡ ∇ḡᵀ / ḡ dᵠa`
//! * binned: `F_B = Σ_m ∇ḡ_m ∇ḡ_mᵀ / ḡ_m` with `ḡ_m = ∫ b_m ḡ`
//!
//! For a perturbation `Δθ`, let `γ = Δθ·∇ḡ`. The loss
//! `ΔθᵀF_LMΔθ − ΔθᵀF_BΔθ` equals the squared `1/ḡ`-weighted norm of the
//! null-space component `γ₀` of `γ`, and also the sum over bins of
//! `∫_m (γ/ḡ − (ℬγ)_m/ḡ_m)² ḡ`. [`loss_quadform`] evaluates all three on the
//! same node rule so they can be compared.

use crate::binning::{
    apply_binning, project_weighted, weighted_norm_sq, BinnedVector, BinningScheme, NodeFunction,
};
use crate::error::{check_len, Error, Result};
use crate::linalg::Matrix;
use crate::model::{sample_model, ModelSamples, ParametricModel};
use crate::quadrature::NodeRule;
use crate::scalar::{CompensatedSum, DoubleWord, Scalar};

/// Relative tolerance for route agreement in a [`LossReport`].
pub const LOSS_AGREEMENT_RTOL: f64 = 1e-10;
/// Losses below this multiple of the list-mode quadratic form count as zero
/// and are compared in absolute terms.
pub const NEAR_ZERO_LOSS: f64 = 1e-14;
/// PSD tolerance: smallest eigenvalue may dip to `−PSD_TOLERANCE · trace`.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// A Fisher information matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Fim<T> {
    pub matrix: Matrix<T>,
}

impl<T: Scalar> Fim<T> {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> T {
        self.matrix.trace()
    }

    pub fn quadratic_form(&self, delta: &[T]) -> Result<T> {
        self.matrix.quadratic_form(delta)
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        self.matrix.min_eigenvalue()
    }

    /// Symmetric, and smallest eigenvalue ≥ `−PSD_TOLERANCE · trace`.
    pub fn is_psd(&self) -> Result<bool> {
        let tol = T::lit(PSD_TOLERANCE) * self.trace().abs();
        Ok(self.matrix.asymmetry() <= T::lit(1e-12) && self.min_eigenvalue()? >= -tol)
    }
}

/// Ideal-observer detectability and the matching area under the ROC curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Detectability<T> {
    pub d_squared: T,
    pub d: T,
    pub auc: T,
}

/// The information loss for one perturbation, computed three ways.
#[derive(Clone, Debug, PartialEq)]
pub struct LossReport<T> {
    /// The perturbation direction (`Δθ`, or `Δf` for object-space losses).
    pub perturbation: Vec<T>,
    /// List-mode detectability squared, `ΔθᵀF_LMΔθ`.
    pub quadform_lm: T,
    /// Binned detectability squared, `ΔθᵀF_BΔθ`.
    pub quadform_binned: T,
    /// `quadform_lm − quadform_binned`.
    pub loss_direct: T,
    /// `‖γ₀‖²` in the `1/ḡ`-weighted norm.
    pub loss_null_norm: T,
    /// Per-bin `∫_m (γ/ḡ − (ℬγ)_m/ḡ_m)² ḡ`.
    pub loss_per_bin: Vec<T>,
    pub loss_per_bin_total: T,
}

impl<T: Scalar> LossReport<T> {
    /// Whether two loss values agree under the report's tolerance policy.
    pub fn values_agree(&self, x: T, y: T) -> bool {
        let floor = T::lit(NEAR_ZERO_LOSS) * self.quadform_lm.abs();
        if x.abs() <= floor && y.abs() <= floor {
            return true;
        }
        (x - y).abs() <= T::lit(LOSS_AGREEMENT_RTOL) * x.abs().max(y.abs())
    }

    /// All three routes agree pairwise.
    pub fn routes_agree(&self) -> bool {
        self.values_agree(self.loss_direct, self.loss_null_norm)
            && self.values_agree(self.loss_direct, self.loss_per_bin_total)
            && self.values_agree(self.loss_null_norm, self.loss_per_bin_total)
    }

    /// Largest pairwise relative discrepancy between the three routes.
    pub fn max_route_discrepancy(&self) -> T {
        let vals = [
            self.loss_direct,
            self.loss_null_norm,
            self.loss_per_bin_total,
        ];
        let scale = vals.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if scale == T::zero() {
            return T::zero();
        }
        let mut worst = T::zero();
        for i in 0..3 {
            for j in i + 1..3 {
                worst = worst.max((vals[i] - vals[j]).abs());
            }
        }
        worst / scale
    }

    /// Every route is ≥ `−1e−12 · quadform_lm`.
    pub fn is_nonnegative(&self) -> bool {
        let floor = -T::lit(1e-12) * self.quadform_lm.abs();
        self.loss_direct >= floor
            && self.loss_null_norm >= floor
            && self.loss_per_bin_total >= floor
    }

    /// Loss relative to the list-mode quadratic form.
    pub fn relative_loss(&self) -> T {
        if self.quadform_lm == T::zero() {
            T::zero()
        } else {
            self.loss_direct / self.quadform_lm
        }
    }
}

fn outer_sum<T: Scalar>(p: usize, terms: impl Iterator<Item = (T, Vec<T>)>) -> Matrix<T> {
    // Σ c · v vᵀ, compensated per entry
    let mut acc = vec![CompensatedSum::new(); p * p];
    for (c, v) in terms {
        for j in 0..p {
            for k in j..p {
                acc[j * p + k].add(c * v[j] * v[k]);
            }
        }
    }
    let mut m = Matrix::zeros(p, p);
    for j in 0..p {
        for k in j..p {
            let v = acc[j * p + k].total();
            m[(j, k)] = v;
            m[(k, j)] = v;
        }
    }
    m
}

fn fim_from_samples<T: Scalar>(rule: &NodeRule<T>, s: &ModelSamples<T>) -> Fim<T> {
    let w = rule.weights();
    let matrix = outer_sum(
        s.param_dim,
        (0..rule.len()).map(|i| (w[i] / s.mean[i], s.grad_row(i).to_vec())),
    );
    Fim { matrix }
}

/// Per-bin means and per-bin gradient integrals `∇ḡ_m`.
struct BinnedSamples<T> {
    mean: Vec<T>,
    grad: Vec<Vec<T>>,
}

fn bin_samples<T: Scalar>(rule: &NodeRule<T>, s: &ModelSamples<T>) -> Result<BinnedSamples<T>> {
    let p = s.param_dim;
    let w = rule.weights();
    let mut mean = Vec::with_capacity(rule.n_bins());
    let mut grad = Vec::with_capacity(rule.n_bins());
    for m in 0..rule.n_bins() {
        let mut gm = CompensatedSum::new();
        let mut dm = vec![CompensatedSum::new(); p];
        for i in rule.bin_range(m) {
            gm.add(w[i] * s.mean[i]);
            for (k, &g) in s.grad_row(i).iter().enumerate() {
                dm[k].add(w[i] * g);
            }
        }
        let gm = gm.total();
        if !(gm > T::zero() && gm.is_finite()) {
            return Err(Error::EmptyBinMean {
                bin: m,
                value: gm.as_f64(),
            });
        }
        mean.push(gm);
        grad.push(dm.iter().map(CompensatedSum::total).collect());
    }
    Ok(BinnedSamples { mean, grad })
}

/// `F_LM(θ) = ∫ ∇ḡ ∇ḡᵀ / ḡ dᵠa`.
pub fn fim_list_mode<T: Scalar, M: ParametricModel<T> + ?Sized>(
    model: &M,
    theta: &[T],
    rule: &NodeRule<T>,
) -> Result<Fim<T>> {
    let s = sample_model(model, theta, rule)?;
    Ok(fim_from_samples(rule, &s))
}

/// `F_B(θ) = Σ_m ∇ḡ_m ∇ḡ_mᵀ / ḡ_m`.
pub fn fim_binned<T: Scalar, M: ParametricModel<T> + ?Sized>(
    model: &M,
    theta: &[T],
    scheme: &BinningScheme<T>,
    rule: &NodeRule<T>,
) -> Result<Fim<T>> {
    rule.check_scheme(scheme)?;
    let s = sample_model(model, theta, rule)?;
    let b = bin_samples(rule, &s)?;
    let matrix = outer_sum(
        s.param_dim,
        b.mean
            .iter()
            .zip(b.grad)
            .map(|(&gm, dm)| (T::one() / gm, dm)),
    );
    Ok(Fim { matrix })
}

/// `F_LM − F_B` assembled bin by bin as
/// `Σ_m ∫ b_m ḡ {∇ḡ∇ḡᵀ/ḡ² − ∇ḡ_m∇ḡ_mᵀ/ḡ_m²} dᵠa`.
pub fn fim_difference<T: Scalar, M: ParametricModel<T> + ?Sized>(
    model: &M,
    theta: &[T],
    scheme: &BinningScheme<T>,
    rule: &NodeRule<T>,
) -> Result<Matrix<T>> {
    rule.check_scheme(scheme)?;
    let s = sample_model(model, theta, rule)?;
    let b = bin_samples(rule, &s)?;
    let p = s.param_dim;
    let w = rule.weights();
    let mut acc = vec![CompensatedSum::new(); p * p];
    for m in 0..rule.n_bins() {
        let gm = b.mean[m];
        let dm = &b.grad[m];
        for i in rule.bin_range(m) {
            let g = s.mean[i];
            let d = s.grad_row(i);
            let wg = w[i] * g;
            for j in 0..p {
                for k in j..p {
                    let curly = d[j] * d[k] / (g * g) - dm[j] * dm[k] / (gm * gm);
                    acc[j * p + k].add(wg * curly);
                }
            }
        }
    }
    let mut out = Matrix::zeros(p, p);
    for j in 0..p {
        for k in j..p {
            let v = acc[j * p + k].total();
            out[(j, k)] = v;
            out[(k, j)] = v;
        }
    }
    Ok(out)
}

/// The null-space and per-bin loss routes for an intensity `mean` and a
/// direction `gamma`, both sampled on `rule`. Returns
/// `(‖γ₀‖², per-bin losses)`.
pub fn null_space_loss<T: Scalar>(
    scheme: &BinningScheme<T>,
    rule: &NodeRule<T>,
    mean: &NodeFunction<T>,
    gamma: &NodeFunction<T>,
) -> Result<(T, Vec<T>)> {
    let (_, gamma0) = project_weighted(scheme, rule, mean, gamma)?;
    let null_norm = weighted_norm_sq(rule, mean, &gamma0)?;

    let bin_mean = rule.integrate_per_bin(&mean.0)?;
    let binned = apply_binning(scheme, rule, gamma)?;
    let w = rule.weights();
    let per_bin = (0..rule.n_bins())
        .map(|m| {
            let ratio = binned.0[m] / bin_mean[m];
            let mut acc = CompensatedSum::new();
            for i in rule.bin_range(m) {
                let dev = gamma.0[i] / mean.0[i] - ratio;
                acc.add(w[i] * dev * dev * mean.0[i]);
            }
            acc.total()
        })
        .collect();
    Ok((null_norm, per_bin))
}

fn check_perturbation<T: Scalar>(delta: &[T]) -> Result<()> {
    if delta.iter().all(|&d| d == T::zero()) {
        return Err(Error::ZeroPerturbation);
    }
    if delta.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidArgument(
            "perturbation has non-finite entries".into(),
        ));
    }
    Ok(())
}

/// `(∫ γ²/ḡ, Σ_m (ℬγ)_m²/ḡ_m)` in double-word precision. The direct route
/// subtracts these two nearly equal numbers, so they are only rounded after
/// the subtraction.
fn direct_quadforms<T: Scalar>(
    rule: &NodeRule<T>,
    mean: &[T],
    gamma: &[DoubleWord<T>],
) -> (DoubleWord<T>, DoubleWord<T>) {
    let w = rule.weights();
    let mut lm = DoubleWord::zero();
    let mut binned = DoubleWord::zero();
    for m in 0..rule.n_bins() {
        let mut gm = DoubleWord::zero();
        let mut bg = DoubleWord::zero();
        for i in rule.bin_range(m) {
            lm = lm + (gamma[i] * gamma[i]).mul_value(w[i]).div_value(mean[i]);
            gm = gm + DoubleWord::from_value(w[i]).mul_value(mean[i]);
            bg = bg + gamma[i].mul_value(w[i]);
        }
        binned = binned + bg * bg / gm;
    }
    (lm, binned)
}

/// The binning loss for perturbation `delta`, computed three independent ways.
///
/// The direct route evaluates `ΔθᵀF_LMΔθ` and `ΔθᵀF_BΔθ` as
/// `∫ (Δθ·∇ḡ)²/ḡ` and `Σ_m (Δθ·∇ḡ_m)²/ḡ_m` in double-word arithmetic, which
/// keeps the difference accurate when the loss is many orders of magnitude
/// below the quadratic forms.
pub fn loss_quadform<T: Scalar, M: ParametricModel<T> + ?Sized>(
    model: &M,
    theta: &[T],
    delta: &[T],
    scheme: &BinningScheme<T>,
    rule: &NodeRule<T>,
) -> Result<LossReport<T>> {
    check_len("perturbation", model.param_dim(), delta.len())?;
    check_perturbation(delta)?;
    rule.check_scheme(scheme)?;
    let s = sample_model(model, theta, rule)?;
    bin_samples(rule, &s)?;

    let gamma_dw: Vec<DoubleWord<T>> = (0..rule.len())
        .map(|i| DoubleWord::dot(s.grad_row(i), delta))
        .collect();
    let (lm, binned) = direct_quadforms(rule, &s.mean, &gamma_dw);

    let gamma = NodeFunction(gamma_dw.iter().map(|g| g.value()).collect());
    let mean = NodeFunction(s.mean);
    let (loss_null_norm, loss_per_bin) = null_space_loss(scheme, rule, &mean, &gamma)?;
    let loss_per_bin_total = crate::scalar::compensated_sum(loss_per_bin.iter().copied());

    Ok(LossReport {
        perturbation: delta.to_vec(),
        quadform_lm: lm.value(),
        quadform_binned: binned.value(),
        loss_direct: (lm - binned).value(),
        loss_null_norm,
        loss_per_bin,
        loss_per_bin_total,
    })
}

/// Builds a loss report from an intensity and direction already sampled on
/// the rule, with the binned quadratic form `Σ_m (ℬγ)_m² / ḡ_m`.
pub fn loss_from_node_functions<T: Scalar>(
    scheme: &BinningScheme<T>,
    rule: &NodeRule<T>,
    mean: &NodeFunction<T>,
    gamma: &NodeFunction<T>,
    binned_mean: &BinnedVector<T>,
    binned_gamma: &BinnedVector<T>,
    perturbation: Vec<T>,
) -> Result<LossReport<T>> {
    check_len("node values", rule.len(), mean.len())?;
    check_len("node values", rule.len(), gamma.len())?;
    check_len("binned vector", rule.n_bins(), binned_mean.len())?;
    check_len("binned vector", rule.n_bins(), binned_gamma.len())?;
    let w = rule.weights();
    let lm = (0..rule.len()).fold(DoubleWord::zero(), |acc, i| {
        let g = DoubleWord::from_value(gamma.0[i]);
        acc + (g * g).mul_value(w[i]).div_value(mean.0[i])
    });
    let binned =
        binned_mean
            .0
            .iter()
            .zip(&binned_gamma.0)
            .fold(DoubleWord::zero(), |acc, (&d, &g)| {
                let g = DoubleWord::from_value(g);
                acc + (g * g).div_value(d)
            });
    let (loss_null_norm, loss_per_bin) = null_space_loss(scheme, rule, mean, gamma)?;
    let loss_per_bin_total = crate::scalar::compensated_sum(loss_per_bin.iter().copied());
    Ok(LossReport {
        perturbation,
        quadform_lm: lm.value(),
        quadform_binned: binned.value(),
        loss_direct: (lm - binned).value(),
        loss_null_norm,
        loss_per_bin,
        loss_per_bin_total,
    })
}

/// `tr{K (F_LM − F_B)}`: the loss averaged over zero-mean perturbations
/// with covariance `K`.
pub fn average_loss_trace<T: Scalar, M: ParametricModel<T> + ?Sized>(
    model: &M,
    theta: &[T],
    scheme: &BinningScheme<T>,
    rule: &NodeRule<T>,
    covariance: &Matrix<T>,
) -> Result<T> {
    let p = model.param_dim();
    if covariance.shape() != (p, p) {
        return Err(Error::CovarianceNotPsd(format!(
            "expected {p}x{p}, got {}x{}",
            covariance.rows(),
            covariance.cols()
        )));
    }
    if covariance.asymmetry() > T::lit(1e-12) {
        return Err(Error::CovarianceNotPsd("matrix is not symmetric".into()));
    }
    let min_eig = covariance.min_eigenvalue()?;
    if min_eig < -T::lit(PSD_TOLERANCE) * covariance.trace().abs() {
        return Err(Error::CovarianceNotPsd(format!(
            "smallest eigenvalue {min_eig}"
        )));
    }
    let diff = fim_difference(model, theta, scheme, rule)?;
    covariance.trace_of_product(&diff)
}

/// `AUC = ½ + ½ erf(d/2)`.
pub fn auc_from_detectability<T: Scalar>(d: T) -> Result<Detectability<T>> {
    if !(d >= T::zero()) {
        return Err(Error::NegativeDetectability(d.as_f64()));
    }
    let half = T::lit(0.5);
    let erf = T::lit(libm::erf((d * half).as_f64()));
    Ok(Detectability {
        d_squared: d * d,
        d,
        auc: half + half * erf,
    })
}

/// Lowest-order detectability for the shift `θ → θ + Δθ`: `d² = ΔθᵀFΔθ`.
pub fn detectability_from_fim<T: Scalar>(fim: &Fim<T>, delta: &[T]) -> Result<Detectability<T>> {
    check_len("perturbation", fim.dim(), delta.len())?;
    check_perturbation(delta)?;
    detectability_from_quadform(fim.quadratic_form(delta)?)
}

/// Detectability from an already evaluated quadratic form `d²`.
pub fn detectability_from_quadform<T: Scalar>(d_squared: T) -> Result<Detectability<T>> {
    if !(d_squared >= T::zero()) {
        return Err(Error::NegativeDetectability(d_squared.as_f64()));
    }
    let det = auc_from_detectability(d_squared.sqrt())?;
    Ok(Detectability { d_squared, ..det })
}
