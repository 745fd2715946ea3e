//! Reference models with closed-form densities and gradients.

use rand::Rng;

use super::{AttributeSpace, ParametricModel};
use crate::scalar::Scalar;

/// Fixed positive profile `floor + amplitude · exp(−‖a − center‖² / (2 width²))`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianBump<T> {
    pub amplitude: T,
    pub center: Vec<T>,
    pub width: T,
    pub floor: T,
}

impl<T: Scalar> GaussianBump<T> {
    pub fn eval(&self, a: &[T]) -> T {
        let r2 = squared_distance(a, &self.center);
        self.floor + self.amplitude * (-r2 / (T::lit(2.0) * self.width * self.width)).exp()
    }
}

fn squared_distance<T: Scalar>(a: &[T], c: &[T]) -> T {
    a.iter()
        .zip(c)
        .map(|(&x, &y)| (x - y) * (x - y))
        .fold(T::zero(), |s, d| s + d)
}

/// The model zoo.
///
/// * `Constant`: `ḡ = θ₀` everywhere.
/// * `Affine1d`: `ḡ = θ₀ + θ₁ a` on an interval.
/// * `ScaledProfile`: `ḡ = θ₀ h(a)` with a fixed positive profile `h`.
/// * `GaussianMixture`: `ḡ = θ₀ + Σ_j A_j exp(−‖a − c_j‖² / (2 w_j²))`, with
///   parameters laid out as `[background, (A, c₁..c_q, w) per component]`.
#[derive(Clone, Debug, PartialEq)]
pub enum ZooModel<T> {
    Constant {
        space: AttributeSpace<T>,
    },
    Affine1d {
        space: AttributeSpace<T>,
    },
    ScaledProfile {
        space: AttributeSpace<T>,
        profile: GaussianBump<T>,
    },
    GaussianMixture {
        space: AttributeSpace<T>,
        components: usize,
    },
}

impl<T: Scalar> ZooModel<T> {
    pub fn constant(space: AttributeSpace<T>) -> Self {
        ZooModel::Constant { space }
    }

    /// Affine model on `[0, 1]`.
    pub fn affine_1d() -> Self {
        ZooModel::Affine1d {
            space: AttributeSpace::unit(1).expect("unit interval"),
        }
    }

    /// Affine model on an arbitrary interval. Panics if `space` is not 1-D.
    pub fn affine_on(space: AttributeSpace<T>) -> Self {
        assert_eq!(space.dim(), 1, "affine model needs a 1-D space");
        ZooModel::Affine1d { space }
    }

    pub fn scaled_profile(space: AttributeSpace<T>, profile: GaussianBump<T>) -> Self {
        assert_eq!(
            space.dim(),
            profile.center.len(),
            "profile centre dimension"
        );
        ZooModel::ScaledProfile { space, profile }
    }

    pub fn gaussian_mixture(space: AttributeSpace<T>, components: usize) -> Self {
        ZooModel::GaussianMixture { space, components }
    }

    /// Parameters of the single-bump configuration on `[0, 1]`: background
    /// 0.2, amplitude 5, centre 0.5, width 0.1.
    pub fn g1_theta() -> Vec<T> {
        [0.2, 5.0, 0.5, 0.1].iter().map(|&x| T::lit(x)).collect()
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ZooModel::Constant { .. } => "constant",
            ZooModel::Affine1d { .. } => "affine-1d",
            ZooModel::ScaledProfile { .. } => "scaled-profile",
            ZooModel::GaussianMixture { .. } => "gaussian-mixture",
        }
    }

    /// A representative admissible parameter vector.
    pub fn nominal_theta(&self) -> Vec<T> {
        match self {
            ZooModel::Constant { .. } => vec![T::lit(3.7)],
            ZooModel::Affine1d { .. } => vec![T::one(), T::zero()],
            ZooModel::ScaledProfile { .. } => vec![T::lit(2.0)],
            ZooModel::GaussianMixture { space, components } => {
                let q = space.dim();
                let mut theta = vec![T::lit(0.2)];
                for j in 0..*components {
                    theta.push(T::lit(5.0));
                    let frac = T::from_usize_lossy(j + 1) / T::from_usize_lossy(components + 1);
                    for i in 0..q {
                        theta.push(space.lower()[i] + frac * space.extent(i));
                    }
                    theta.push(T::lit(0.1) * min_extent(space));
                }
                theta
            }
        }
    }

    /// Draws a parameter vector from a box on which the density is
    /// guaranteed positive.
    pub fn random_theta<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let mut uniform = |lo: f64, hi: f64| T::lit(rng.random_range(lo..hi));
        match self {
            ZooModel::Constant { .. } | ZooModel::ScaledProfile { .. } => vec![uniform(0.5, 5.0)],
            ZooModel::Affine1d { space } => {
                // keep θ₀ + θ₁ a ≥ 0.2 θ₀ over the interval
                let lo = space.lower()[0].as_f64();
                let hi = space.upper()[0].as_f64();
                let reach = lo.abs().max(hi.abs()).max(1e-12);
                let t0 = uniform(0.5, 2.0);
                let bound = 0.8 * t0.as_f64() / reach;
                vec![t0, uniform(-bound, 2.0 * bound)]
            }
            ZooModel::GaussianMixture { space, components } => {
                let q = space.dim();
                let w = min_extent(space).as_f64();
                let mut theta = vec![uniform(0.1, 1.0)];
                for _ in 0..*components {
                    theta.push(uniform(1.0, 6.0));
                    for i in 0..q {
                        let lo = space.lower()[i].as_f64();
                        let e = space.extent(i).as_f64();
                        theta.push(uniform(lo + 0.2 * e, lo + 0.8 * e));
                    }
                    theta.push(uniform(0.08 * w, 0.2 * w));
                }
                theta
            }
        }
    }
}

/// The standard test catalogue: constant, affine, scaled-profile and a
/// one-bump mixture on `[0, 1]`, plus a two-bump mixture on `[0, 1]²`.
pub fn catalogue<T: Scalar>() -> Vec<ZooModel<T>> {
    let line = AttributeSpace::unit(1).expect("unit interval");
    let square = AttributeSpace::unit(2).expect("unit square");
    let profile = GaussianBump {
        amplitude: T::lit(3.0),
        center: vec![T::lit(0.4)],
        width: T::lit(0.15),
        floor: T::lit(0.25),
    };
    vec![
        ZooModel::constant(line.clone()),
        ZooModel::affine_1d(),
        ZooModel::scaled_profile(line.clone(), profile),
        ZooModel::gaussian_mixture(line, 1),
        ZooModel::gaussian_mixture(square, 2),
    ]
}

fn min_extent<T: Scalar>(space: &AttributeSpace<T>) -> T {
    (0..space.dim())
        .map(|i| space.extent(i))
        .fold(T::infinity(), |m, e| m.min(e))
}

impl<T: Scalar> ParametricModel<T> for ZooModel<T> {
    fn space(&self) -> &AttributeSpace<T> {
        match self {
            ZooModel::Constant { space }
            | ZooModel::Affine1d { space }
            | ZooModel::ScaledProfile { space, .. }
            | ZooModel::GaussianMixture { space, .. } => space,
        }
    }

    fn param_dim(&self) -> usize {
        match self {
            ZooModel::Constant { .. } | ZooModel::ScaledProfile { .. } => 1,
            ZooModel::Affine1d { .. } => 2,
            ZooModel::GaussianMixture { space, components } => 1 + components * (space.dim() + 2),
        }
    }

    fn density(&self, a: &[T], theta: &[T]) -> T {
        match self {
            ZooModel::Constant { .. } => theta[0],
            ZooModel::Affine1d { .. } => theta[0] + theta[1] * a[0],
            ZooModel::ScaledProfile { profile, .. } => theta[0] * profile.eval(a),
            ZooModel::GaussianMixture { space, components } => {
                let q = space.dim();
                let mut value = theta[0];
                for block in theta[1..].chunks_exact(q + 2).take(*components) {
                    let (amp, center, width) = (block[0], &block[1..=q], block[q + 1]);
                    let r2 = squared_distance(a, center);
                    value += amp * (-r2 / (T::lit(2.0) * width * width)).exp();
                }
                value
            }
        }
    }

    fn density_gradient(&self, a: &[T], theta: &[T], grad: &mut [T]) {
        match self {
            ZooModel::Constant { .. } => grad[0] = T::one(),
            ZooModel::Affine1d { .. } => {
                grad[0] = T::one();
                grad[1] = a[0];
            }
            ZooModel::ScaledProfile { profile, .. } => grad[0] = profile.eval(a),
            ZooModel::GaussianMixture { space, components } => {
                let q = space.dim();
                grad[0] = T::one();
                for j in 0..*components {
                    let base = 1 + j * (q + 2);
                    let amp = theta[base];
                    let center = &theta[base + 1..=base + q];
                    let width = theta[base + q + 1];
                    let w2 = width * width;
                    let r2 = squared_distance(a, center);
                    let e = (-r2 / (T::lit(2.0) * w2)).exp();
                    grad[base] = e;
                    for i in 0..q {
                        grad[base + 1 + i] = amp * e * (a[i] - center[i]) / w2;
                    }
                    grad[base + q + 1] = amp * e * r2 / (w2 * width);
                }
            }
        }
    }
}
