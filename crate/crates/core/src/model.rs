//! Attribute spaces and parametric mean-data functions.
//!
//! A [`ParametricModel`] supplies the Poisson intensity `ḡ(a|θ)` over an
//! axis-aligned box of attribute vectors together with its exact gradient
//! with respect to the parameters. The checked free functions in this module
//! ([`mean_at`], [`grad_mean_at`], ...) are what the rest of the crate uses;
//! the raw trait methods never validate their inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::quadrature::NodeRule;
use crate::scalar::{to_f64_vec, CompensatedSum, Scalar};

pub mod zoo;

/// Axis-aligned box `[lower, upper]` of attribute vectors, `q = lower.len()`.
#[derive(Clone, Debug, PartialEq)]
pub struct AttributeSpace<T> {
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Scalar> AttributeSpace<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidSpace("dimension must be at least 1".into()));
        }
        check_len("upper bounds", lower.len(), upper.len())?;
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::InvalidSpace(format!(
                    "axis {i}: need finite lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// One-dimensional interval `[lower, upper]`.
    pub fn interval(lower: T, upper: T) -> Result<Self> {
        Self::new(vec![lower], vec![upper])
    }

    /// The unit box `[0, 1]^dim`.
    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(vec![T::zero(); dim], vec![T::one(); dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn extent(&self, axis: usize) -> T {
        self.upper[axis] - self.lower[axis]
    }

    pub fn volume(&self) -> T {
        (0..self.dim())
            .map(|i| self.extent(i))
            .fold(T::one(), |acc, e| acc * e)
    }

    /// Closed-box membership.
    pub fn contains(&self, a: &[T]) -> bool {
        a.len() == self.dim()
            && a.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&x, (&lo, &hi))| x >= lo && x <= hi)
    }

    pub fn check_point(&self, a: &[T]) -> Result<()> {
        if a.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, space has {}",
                a.len(),
                self.dim()
            )));
        }
        if self.contains(a) {
            Ok(())
        } else {
            Err(Error::OutsideSpace {
                point: to_f64_vec(a),
            })
        }
    }

    /// Maps a point of the unit cube onto the box.
    pub fn from_unit(&self, u: &[T], out: &mut [T]) {
        for i in 0..self.dim() {
            out[i] = self.lower[i] + u[i] * self.extent(i);
        }
    }
}

/// A family of Poisson intensities `ḡ(a|θ)` on an attribute space.
///
/// `density` is expected events per unit attribute volume. Implementations
/// need not validate anything; callers go through [`mean_at`] and friends.
/// Implementations must be pure so that evaluation can be shared across
/// threads.
pub trait ParametricModel<T: Scalar>: Send + Sync {
    fn space(&self) -> &AttributeSpace<T>;

    /// Number of parameters `p`.
    fn param_dim(&self) -> usize;

    fn density(&self, a: &[T], theta: &[T]) -> T;

    /// Writes `∂ḡ/∂θ_k` into `grad[k]`.
    fn density_gradient(&self, a: &[T], theta: &[T], grad: &mut [T]);
}

impl<T: Scalar, M: ParametricModel<T> + ?Sized> ParametricModel<T> for &M {
    fn space(&self) -> &AttributeSpace<T> {
        (**self).space()
    }
    fn param_dim(&self) -> usize {
        (**self).param_dim()
    }
    fn density(&self, a: &[T], theta: &[T]) -> T {
        (**self).density(a, theta)
    }
    fn density_gradient(&self, a: &[T], theta: &[T], grad: &mut [T]) {
        (**self).density_gradient(a, theta, grad)
    }
}

impl<T: Scalar, M: ParametricModel<T> + ?Sized> ParametricModel<T> for Box<M> {
    fn space(&self) -> &AttributeSpace<T> {
        (**self).space()
    }
    fn param_dim(&self) -> usize {
        (**self).param_dim()
    }
    fn density(&self, a: &[T], theta: &[T]) -> T {
        (**self).density(a, theta)
    }
    fn density_gradient(&self, a: &[T], theta: &[T], grad: &mut [T]) {
        (**self).density_gradient(a, theta, grad)
    }
}

/// `c · ḡ(a|θ)` for a fixed factor `c > 0`.
#[derive(Clone, Debug)]
pub struct ScaledModel<M, T> {
    inner: M,
    factor: T,
}

impl<M, T: Scalar> ScaledModel<M, T> {
    pub fn new(inner: M, factor: T) -> Result<Self> {
        if !(factor > T::zero() && factor.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        Ok(Self { inner, factor })
    }
}

impl<T: Scalar, M: ParametricModel<T>> ParametricModel<T> for ScaledModel<M, T> {
    fn space(&self) -> &AttributeSpace<T> {
        self.inner.space()
    }
    fn param_dim(&self) -> usize {
        self.inner.param_dim()
    }
    fn density(&self, a: &[T], theta: &[T]) -> T {
        self.factor * self.inner.density(a, theta)
    }
    fn density_gradient(&self, a: &[T], theta: &[T], grad: &mut [T]) {
        self.inner.density_gradient(a, theta, grad);
        for g in grad.iter_mut() {
            *g *= self.factor;
        }
    }
}

fn check_theta<T: Scalar, M: ParametricModel<T> + ?Sized>(model: &M, theta: &[T]) -> Result<()> {
    check_len("parameter vector", model.param_dim(), theta.len())?;
    if theta.iter().all(|t| t.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(
            "parameter vector has non-finite entries".into(),
        ))
    }
}

/// `ḡ(a|θ)`, validated: `a` inside the space and the value strictly positive.
pub fn mean_at<T: Scalar, M: ParametricModel<T> + ?Sized>(
    model: &M,
    a: &[T],
    theta: &[T],
) -> Result<T> {
    model.space().check_point(a)?;
    check_theta(model, theta)?;
    let value = model.density(a, theta);
    if value > T::zero() && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonpositiveDensity {
            point: to_f64_vec(a),
            value: value.as_f64(),
        })
    }
}

/// `∇_θ ḡ(a|θ)`.
pub fn grad_mean_at<T: Scalar, M: ParametricModel<T> + ?Sized>(
    model: &M,
    a: &[T],
    theta: &[T],
) -> Result<Vec<T>> {
    model.space().check_point(a)?;
    check_theta(model, theta)?;
    let mut grad = vec![T::zero(); model.param_dim()];
    model.density_gradient(a, theta, &mut grad);
    Ok(grad)
}

/// A model sampled at every node of a rule: densities and row-major
/// gradients (`n_nodes × p`).
#[derive(Clone, Debug)]
pub struct ModelSamples<T> {
    pub mean: Vec<T>,
    pub grad: Vec<T>,
    pub param_dim: usize,
}

impl<T: Scalar> ModelSamples<T> {
    pub fn grad_row(&self, node: usize) -> &[T] {
        &self.grad[node * self.param_dim..(node + 1) * self.param_dim]
    }

    /// Directional derivative `Δθ · ∇ḡ` at every node.
    pub fn directional(&self, delta: &[T]) -> Vec<T> {
        (0..self.mean.len())
            .map(|i| {
                let mut acc = CompensatedSum::new();
                for (&g, &d) in self.grad_row(i).iter().zip(delta) {
                    acc.add(g * d);
                }
                acc.total()
            })
            .collect()
    }
}

/// Evaluates density and gradient at every node of `rule`, failing on the
/// first node where the density is not strictly positive.
pub fn sample_model<T: Scalar, M: ParametricModel<T> + ?Sized>(
    model: &M,
    theta: &[T],
    rule: &NodeRule<T>,
) -> Result<ModelSamples<T>> {
    check_theta(model, theta)?;
    if rule.dim() != model.space().dim() {
        return Err(Error::DimensionMismatch(format!(
            "rule is {}-dimensional, model space is {}-dimensional",
            rule.dim(),
            model.space().dim()
        )));
    }
    let p = model.param_dim();
    let n = rule.len();
    let mut mean = Vec::with_capacity(n);
    let mut grad = vec![T::zero(); n * p];
    for i in 0..n {
        let a = rule.node(i);
        let value = model.density(a, theta);
        if !(value > T::zero() && value.is_finite()) {
            return Err(Error::NonpositiveDensity {
                point: to_f64_vec(a),
                value: value.as_f64(),
            });
        }
        mean.push(value);
        model.density_gradient(a, theta, &mut grad[i * p..(i + 1) * p]);
    }
    Ok(ModelSamples {
        mean,
        grad,
        param_dim: p,
    })
}

/// Expected total count `N̄(θ) = ∫ ḡ(a|θ) dᵠa` on the rule.
pub fn total_mean<T: Scalar, M: ParametricModel<T> + ?Sized>(
    model: &M,
    theta: &[T],
    rule: &NodeRule<T>,
) -> Result<T> {
    let samples = sample_model(model, theta, rule)?;
    rule.integrate(&samples.mean)
}

/// Largest relative deviation between the analytic gradient and a central
/// finite difference with absolute step `step`, over `n_samples` points drawn
/// uniformly from the model's space (fixed internal seed).
///
/// The deviation at a point is `max_k |g_k − fd_k| / max_k |g_k|`, so a
/// vanishing component does not blow the ratio up.
pub fn grad_check<T: Scalar, M: ParametricModel<T> + ?Sized>(
    model: &M,
    theta: &[T],
    n_samples: usize,
    step: T,
) -> Result<T> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument(
            "n_samples must be at least 1".into(),
        ));
    }
    if !(step > T::zero()) {
        return Err(Error::InvalidArgument(
            "finite-difference step must be positive".into(),
        ));
    }
    check_theta(model, theta)?;
    let space = model.space();
    let q = space.dim();
    let p = model.param_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_9a4d);
    let mut u = vec![T::zero(); q];
    let mut a = vec![T::zero(); q];
    let mut grad = vec![T::zero(); p];
    let mut shifted = theta.to_vec();
    let two = T::lit(2.0);
    let mut worst = T::zero();
    for _ in 0..n_samples {
        for ui in u.iter_mut() {
            *ui = T::lit(rng.random::<f64>());
        }
        space.from_unit(&u, &mut a);
        mean_at(model, &a, theta)?;
        model.density_gradient(&a, theta, &mut grad);
        let mut max_err = T::zero();
        let mut max_grad = T::zero();
        for k in 0..p {
            shifted[k] = theta[k] + step;
            let plus = model.density(&a, &shifted);
            shifted[k] = theta[k] - step;
            let minus = model.density(&a, &shifted);
            shifted[k] = theta[k];
            let fd = (plus - minus) / (two * step);
            max_err = max_err.max((grad[k] - fd).abs());
            max_grad = max_grad.max(grad[k].abs());
        }
        let rel = if max_grad > T::zero() {
            max_err / max_grad
        } else {
            max_err
        };
        worst = worst.max(rel);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::zoo::{GaussianBump, ZooModel};
    use super::*;
    use crate::binning::BinningScheme;
    use crate::quadrature::build_rule;

    fn unit_rule(nodes: usize) -> NodeRule<f64> {
        let space = AttributeSpace::unit(1).unwrap();
        let scheme = BinningScheme::uniform_grid(&space, &[1]).unwrap();
        build_rule(&space, &scheme, nodes).unwrap()
    }

    #[test]
    fn space_rejects_degenerate_axis() {
        assert!(AttributeSpace::new(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(AttributeSpace::<f64>::new(vec![], vec![]).is_err());
        let s = AttributeSpace::new(vec![-1.0, 0.0], vec![1.0, 3.0]).unwrap();
        assert_eq!(s.volume(), 6.0);
    }

    #[test]
    fn affine_mean_and_gradient() {
        let m = ZooModel::<f64>::affine_1d();
        assert_eq!(mean_at(&m, &[0.5], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(
            grad_mean_at(&m, &[0.5], &[1.0, 0.0]).unwrap(),
            vec![1.0, 0.5]
        );
    }

    #[test]
    fn constant_mean_and_gradient() {
        let m = ZooModel::<f64>::constant(AttributeSpace::unit(1).unwrap());
        for a in [0.0, 0.3, 1.0] {
            assert_eq!(mean_at(&m, &[a], &[3.7]).unwrap(), 3.7);
            assert_eq!(grad_mean_at(&m, &[a], &[3.7]).unwrap(), vec![1.0]);
        }
    }

    #[test]
    fn gaussian_mixture_g1_matches_closed_form() {
        let m = ZooModel::<f64>::gaussian_mixture(AttributeSpace::unit(1).unwrap(), 1);
        let theta = ZooModel::<f64>::g1_theta();
        // at the bump centre the exponential is exactly one
        assert!((mean_at(&m, &[0.5], &theta).unwrap() - 5.2).abs() <= 1e-12);
        let expected = 0.2 + 5.0 * (-(0.2_f64 * 0.2) / (2.0 * 0.01)).exp();
        assert!((mean_at(&m, &[0.3], &theta).unwrap() - expected).abs() <= 1e-12);
    }

    #[test]
    fn outside_point_and_nonpositive_density_are_errors() {
        let m = ZooModel::<f64>::affine_1d();
        assert!(matches!(
            mean_at(&m, &[1.5], &[1.0, 0.0]),
            Err(Error::OutsideSpace { .. })
        ));
        assert!(matches!(
            grad_mean_at(&m, &[-0.1], &[1.0, 0.0]),
            Err(Error::OutsideSpace { .. })
        ));
        assert!(matches!(
            mean_at(&m, &[1.0], &[1.0, -2.0]),
            Err(Error::NonpositiveDensity { .. })
        ));
        assert!(matches!(
            total_mean(&m, &[1.0, -2.0], &unit_rule(4)),
            Err(Error::NonpositiveDensity { .. })
        ));
    }

    #[test]
    fn total_mean_examples() {
        let rule = unit_rule(4);
        let c = ZooModel::<f64>::constant(AttributeSpace::unit(1).unwrap());
        assert!((total_mean(&c, &[3.7], &rule).unwrap() - 3.7).abs() < 1e-14);
        let aff = ZooModel::<f64>::affine_1d();
        assert!((total_mean(&aff, &[1.0, 0.0], &rule).unwrap() - 1.0).abs() < 1e-15);
        assert!((total_mean(&aff, &[1.0, 1.0], &unit_rule(1)).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn grad_check_on_zoo() {
        let c = ZooModel::<f64>::constant(AttributeSpace::unit(1).unwrap());
        assert!(grad_check(&c, &[3.7], 50, 1e-5).unwrap() < 1e-9);
        let aff = ZooModel::<f64>::affine_1d();
        assert!(grad_check(&aff, &[1.0, 0.3], 50, 1e-5).unwrap() < 1e-9);
        let g = ZooModel::<f64>::gaussian_mixture(AttributeSpace::unit(1).unwrap(), 1);
        assert!(grad_check(&g, &ZooModel::<f64>::g1_theta(), 200, 1e-5).unwrap() <= 1e-6);
        assert!(grad_check(&g, &ZooModel::<f64>::g1_theta(), 0, 1e-5).is_err());
    }

    #[test]
    fn scaled_profile_is_linear_in_theta() {
        let h = GaussianBump {
            amplitude: 2.0,
            center: vec![0.4],
            width: 0.2,
            floor: 0.5,
        };
        let m = ZooModel::scaled_profile(AttributeSpace::unit(1).unwrap(), h);
        for &alpha in &[0.5, 2.0, 7.25] {
            let base = mean_at(&m, &[0.3], &[1.3]).unwrap();
            let scaled = mean_at(&m, &[0.3], &[1.3 * alpha]).unwrap();
            assert!((scaled - alpha * base as f64).abs() <= 1e-14 * scaled);
        }
    }

    #[test]
    fn scaled_wrapper_scales_density_and_gradient() {
        let aff = ZooModel::<f64>::affine_1d();
        let s = ScaledModel::new(&aff, 3.0).unwrap();
        assert_eq!(mean_at(&s, &[0.5], &[1.0, 1.0]).unwrap(), 4.5);
        assert_eq!(
            grad_mean_at(&s, &[0.5], &[1.0, 1.0]).unwrap(),
            vec![3.0, 1.5]
        );
        assert!(ScaledModel::new(&aff, 0.0).is_err());
    }
}
