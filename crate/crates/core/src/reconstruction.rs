//! Object-space version of the binning loss.
//!
//! The object is a vector of samples `f_k` on a grid over a support
//! interval. A linear system operator maps it to the list-mode intensity at
//! the quadrature nodes, `ḡ = ℒf`, and the binned system is `ℋ = ℬℒ`. A
//! perturbation `Δf` plays the role of `Δθ·∇ḡ` through `γ = ℒΔf`.
//!
//! The concrete operator here is 1-D convolution with a point spread
//! function, either Gaussian or band-limited (`p(x) = B sinc(Bx)`, whose
//! spectrum is flat on `[−B/2, B/2]`). The kernel is truncated to the object
//! support; nothing is done about edge effects.

use crate::binning::{
    project_weighted, weighted_norm_sq, BinnedVector, BinningScheme, NodeFunction,
};
use crate::error::{check_len, Error, Result};
use crate::fisher::{loss_from_node_functions, LossReport};
use crate::linalg::Matrix;
use crate::quadrature::NodeRule;
use crate::scalar::{to_f64_vec, Scalar};

/// Uniform sample grid over `[lower, upper]`: `n_points` samples at the
/// centres of equal sub-intervals of width `spacing`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectGrid<T> {
    lower: T,
    upper: T,
    n_points: usize,
}

impl<T: Scalar> ObjectGrid<T> {
    pub fn new(lower: T, upper: T, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::InvalidArgument(
                "object grid needs at least 2 points".into(),
            ));
        }
        if !(lower.is_finite() && upper.is_finite() && upper > lower) {
            return Err(Error::InvalidArgument(format!(
                "bad object support [{lower}, {upper}]"
            )));
        }
        Ok(Self {
            lower,
            upper,
            n_points,
        })
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn support(&self) -> (T, T) {
        (self.lower, self.upper)
    }

    pub fn spacing(&self) -> T {
        (self.upper - self.lower) / T::from_usize_lossy(self.n_points)
    }

    pub fn point(&self, k: usize) -> T {
        self.lower + (T::from_usize_lossy(k) + T::lit(0.5)) * self.spacing()
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.n_points).map(|k| self.point(k)).collect()
    }

    /// Samples `f` at the grid points.
    pub fn sample(&self, f: impl Fn(T) -> T) -> ObjectFunction<T> {
        ObjectFunction((0..self.n_points).map(|k| f(self.point(k))).collect())
    }
}

/// Object samples `f_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectFunction<T>(pub Vec<T>);

impl<T: Scalar> ObjectFunction<T> {
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn scaled(&self, alpha: T) -> Self {
        ObjectFunction(self.0.iter().map(|&v| alpha * v).collect())
    }
}

/// Point spread functions.
#[derive(Clone, Debug, PartialEq)]
pub enum PsfSpec<T> {
    /// `scale · N(x; 0, width²)`, unit area when `scale = 1`.
    Gaussian { width: T, scale: T },
    /// `scale · B sinc(Bx)`, unit area over the real line when `scale = 1`.
    BandlimitedSinc { bandwidth: T, scale: T },
}

impl<T: Scalar> PsfSpec<T> {
    pub fn gaussian(width: T) -> Self {
        PsfSpec::Gaussian {
            width,
            scale: T::one(),
        }
    }

    pub fn bandlimited(bandwidth: T) -> Self {
        PsfSpec::BandlimitedSinc {
            bandwidth,
            scale: T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PsfSpec::Gaussian { width, scale } if width > T::zero() && scale.is_finite() => Ok(()),
            PsfSpec::BandlimitedSinc { bandwidth, scale }
                if bandwidth > T::zero() && scale.is_finite() =>
            {
                Ok(())
            }
            _ => Err(Error::InvalidArgument(format!("invalid psf {self:?}"))),
        }
    }

    pub fn eval(&self, x: T) -> T {
        match *self {
            PsfSpec::Gaussian { width, scale } => {
                let z = x / width;
                scale * (-T::lit(0.5) * z * z).exp() / (width * (T::lit(2.0) * T::PI()).sqrt())
            }
            PsfSpec::BandlimitedSinc { bandwidth, scale } => {
                scale * bandlimited_psf_values(bandwidth, x)
            }
        }
    }
}

/// `p(x) = B sinc(Bx)` with `sinc(u) = sin(πu)/(πu)` and `p(0) = B`.
pub fn bandlimited_psf_values<T: Scalar>(bandwidth: T, x: T) -> T {
    let u = T::PI() * bandwidth * x;
    if u.abs() < T::lit(1e-4) {
        // series for sin(u)/u, exact to rounding in this range
        let u2 = u * u;
        bandwidth * (T::one() - u2 / T::lit(6.0) + u2 * u2 / T::lit(120.0))
    } else {
        bandwidth * u.sin() / u
    }
}

/// Linear map from object samples to intensity at the rule's nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemOperator<T> {
    pub kernel: Matrix<T>,
}

impl<T: Scalar> SystemOperator<T> {
    pub fn n_nodes(&self) -> usize {
        self.kernel.rows()
    }
    pub fn n_object(&self) -> usize {
        self.kernel.cols()
    }
}

/// `kernel[i][k] = p(x_i − r_k) Δr` for quadrature nodes `x_i`.
pub fn build_convolution_operator<T: Scalar>(
    psf: &PsfSpec<T>,
    grid: &ObjectGrid<T>,
    rule: &NodeRule<T>,
) -> Result<SystemOperator<T>> {
    if rule.dim() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "convolution operator needs a 1-D attribute space, rule is {}-D",
            rule.dim()
        )));
    }
    psf.validate()?;
    let dr = grid.spacing();
    let r = grid.points();
    let mut kernel = Matrix::zeros(rule.len(), grid.len());
    for (i, x) in rule.nodes().enumerate() {
        for (k, &rk) in r.iter().enumerate() {
            kernel[(i, k)] = psf.eval(x[0] - rk) * dr;
        }
    }
    Ok(SystemOperator { kernel })
}

/// `ℒf` at the nodes. No positivity check; see [`loss_object`].
pub fn apply_system<T: Scalar>(
    op: &SystemOperator<T>,
    f: &ObjectFunction<T>,
) -> Result<NodeFunction<T>> {
    Ok(NodeFunction(op.kernel.mul_vec(&f.0)?))
}

/// `ℋ = ℬℒ` as an `M × K` matrix.
pub fn binned_system<T: Scalar>(
    op: &SystemOperator<T>,
    scheme: &BinningScheme<T>,
    rule: &NodeRule<T>,
) -> Result<Matrix<T>> {
    rule.check_scheme(scheme)?;
    check_len("operator rows", rule.len(), op.n_nodes())?;
    let k = op.n_object();
    let mut h = Matrix::zeros(scheme.len(), k);
    let mut column = vec![T::zero(); rule.len()];
    for c in 0..k {
        for (i, v) in column.iter_mut().enumerate() {
            *v = op.kernel[(i, c)];
        }
        for (m, v) in rule.integrate_per_bin(&column)?.into_iter().enumerate() {
            h[(m, c)] = v;
        }
    }
    Ok(h)
}

struct ObjectSetup<T> {
    mean: NodeFunction<T>,
    gamma: NodeFunction<T>,
    binned_mean: BinnedVector<T>,
    binned_gamma: BinnedVector<T>,
}

fn setup<T: Scalar>(
    op: &SystemOperator<T>,
    scheme: &BinningScheme<T>,
    rule: &NodeRule<T>,
    f: &ObjectFunction<T>,
    delta_f: &ObjectFunction<T>,
) -> Result<ObjectSetup<T>> {
    check_len("object samples", op.n_object(), f.len())?;
    check_len("object perturbation", op.n_object(), delta_f.len())?;
    if delta_f.0.iter().all(|&v| v == T::zero()) {
        return Err(Error::ZeroPerturbation);
    }
    let mean = apply_system(op, f)?;
    if let Some(i) = mean
        .0
        .iter()
        .position(|&v| !(v > T::zero() && v.is_finite()))
    {
        return Err(Error::NonpositiveDensity {
            point: to_f64_vec(rule.node(i)),
            value: mean.0[i].as_f64(),
        });
    }
    let gamma = apply_system(op, delta_f)?;
    let h = binned_system(op, scheme, rule)?;
    let binned_mean = h.mul_vec(&f.0)?;
    if let Some(m) = binned_mean
        .iter()
        .position(|&v| !(v > T::zero() && v.is_finite()))
    {
        return Err(Error::EmptyBinMean {
            bin: m,
            value: binned_mean[m].as_f64(),
        });
    }
    let binned_gamma = h.mul_vec(&delta_f.0)?;
    Ok(ObjectSetup {
        mean,
        gamma,
        binned_mean: BinnedVector(binned_mean),
        binned_gamma: BinnedVector(binned_gamma),
    })
}

/// Loss of `(Δf, ℱΔf)` from binning, with the same three routes as the
/// parametric case (`γ = ℒΔf`, `ḡ = ℒf`).
pub fn loss_object<T: Scalar>(
    op: &SystemOperator<T>,
    scheme: &BinningScheme<T>,
    rule: &NodeRule<T>,
    f: &ObjectFunction<T>,
    delta_f: &ObjectFunction<T>,
) -> Result<LossReport<T>> {
    let s = setup(op, scheme, rule, f, delta_f)?;
    loss_from_node_functions(
        scheme,
        rule,
        &s.mean,
        &s.gamma,
        &s.binned_mean,
        &s.binned_gamma,
        delta_f.0.clone(),
    )
}

/// The null component `(ℒΔf)₀ = ℒf · Σ_m [ℒΔf/ℒf − (ℋΔf)_m/(ℋf)_m] b_m`.
/// It vanishes exactly when binning loses nothing for this `Δf`.
pub fn equality_residual<T: Scalar>(
    op: &SystemOperator<T>,
    scheme: &BinningScheme<T>,
    rule: &NodeRule<T>,
    f: &ObjectFunction<T>,
    delta_f: &ObjectFunction<T>,
) -> Result<NodeFunction<T>> {
    let s = setup(op, scheme, rule, f, delta_f)?;
    Ok(NodeFunction(
        rule.bin_of_node()
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                let ratio = s.binned_gamma.0[m] / s.binned_mean.0[m];
                s.mean.0[i] * (s.gamma.0[i] / s.mean.0[i] - ratio)
            })
            .collect(),
    ))
}

/// `(‖ℒΔf‖², ‖(ℒΔf)₁‖², ‖(ℒΔf)₀‖²)` in the `1/ℒf`-weighted norm.
pub fn functional_pythagoras<T: Scalar>(
    op: &SystemOperator<T>,
    scheme: &BinningScheme<T>,
    rule: &NodeRule<T>,
    f: &ObjectFunction<T>,
    delta_f: &ObjectFunction<T>,
) -> Result<(T, T, T)> {
    let s = setup(op, scheme, rule, f, delta_f)?;
    let (g1, g0) = project_weighted(scheme, rule, &s.mean, &s.gamma)?;
    Ok((
        weighted_norm_sq(rule, &s.mean, &s.gamma)?,
        weighted_norm_sq(rule, &s.mean, &g1)?,
        weighted_norm_sq(rule, &s.mean, &g0)?,
    ))
}
