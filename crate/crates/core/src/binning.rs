//! Binning schemes, the binning operator and its weighted pseudoinverse.
//!
//! Bins are axis-aligned boxes that partition the attribute space. A cell
//! owns the half-open box `[lower, upper)` on every axis, except that faces
//! lying on the space's upper boundary are closed, so every point of the
//! space belongs to exactly one cell.
//!
//! The binning operator `ℬ` maps a function on the space (sampled on a
//! [`NodeRule`]) to its per-bin integrals. Under the inner product weighted
//! by `1/ḡ`, its pseudoinverse is `ℬ⁺g = ḡ · Σ_m (g_m / ḡ_m) b_m`, which gives
//! the orthogonal split `γ = γ₁ + γ₀` with `γ₁ = ℬ⁺ℬγ` and `ℬγ₀ = 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::model::{sample_model, AttributeSpace, ParametricModel};
use crate::quadrature::NodeRule;
use crate::scalar::{to_f64_vec, CompensatedSum, Scalar};

/// Relative volume tolerance for partition checks.
pub const PARTITION_TOLERANCE: f64 = 1e-12;

/// An axis-aligned cell `[lower, upper]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> Cell<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Self {
        Self { lower, upper }
    }

    pub fn volume(&self) -> T {
        self.lower
            .iter()
            .zip(&self.upper)
            .fold(T::one(), |v, (&lo, &hi)| v * (hi - lo))
    }

    pub fn center(&self) -> Vec<T> {
        let half = T::lit(0.5);
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| half * (lo + hi))
            .collect()
    }

    /// Half-open membership, closed on faces that lie on the space boundary.
    pub fn owns(&self, a: &[T], space: &AttributeSpace<T>) -> bool {
        a.iter().enumerate().all(|(i, &x)| {
            x >= self.lower[i]
                && (x < self.upper[i] || (x == self.upper[i] && x == space.upper()[i]))
        })
    }

    fn overlap_volume(&self, other: &Cell<T>) -> T {
        let mut v = T::one();
        for i in 0..self.lower.len() {
            let lo = self.lower[i].max(other.lower[i]);
            let hi = self.upper[i].min(other.upper[i]);
            if hi <= lo {
                return T::zero();
            }
            v *= hi - lo;
        }
        v
    }
}

/// A partition of the attribute space into `M` boxes.
#[derive(Clone, Debug, PartialEq)]
pub struct BinningScheme<T> {
    space: AttributeSpace<T>,
    cells: Vec<Cell<T>>,
    grid: Option<Vec<usize>>,
}

impl<T: Scalar> BinningScheme<T> {
    /// Uniform grid with `counts[i]` bins along axis `i`. Cells are ordered
    /// row-major with the last axis varying fastest.
    pub fn uniform_grid(space: &AttributeSpace<T>, counts: &[usize]) -> Result<Self> {
        check_len("bin counts", space.dim(), counts.len())?;
        if counts.contains(&0) {
            return Err(Error::InvalidArgument(
                "bin counts must be at least 1".into(),
            ));
        }
        let q = space.dim();
        let total: usize = counts.iter().product();
        let mut cells = Vec::with_capacity(total);
        let mut idx = vec![0usize; q];
        for _ in 0..total {
            let mut lower = Vec::with_capacity(q);
            let mut upper = Vec::with_capacity(q);
            for i in 0..q {
                lower.push(grid_edge(space, counts, i, idx[i]));
                upper.push(grid_edge(space, counts, i, idx[i] + 1));
            }
            cells.push(Cell { lower, upper });
            for i in (0..q).rev() {
                idx[i] += 1;
                if idx[i] < counts[i] {
                    break;
                }
                idx[i] = 0;
            }
        }
        Ok(Self {
            space: space.clone(),
            cells,
            grid: Some(counts.to_vec()),
        })
    }

    /// Explicit list of cells. Each cell must be a nondegenerate box inside
    /// the space; whether the list partitions the space is checked by
    /// [`BinningScheme::check_partition`] (and hence when a rule is built).
    pub fn from_cells(space: &AttributeSpace<T>, cells: Vec<Cell<T>>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidArgument(
                "a scheme needs at least one cell".into(),
            ));
        }
        for (m, c) in cells.iter().enumerate() {
            check_len("cell lower bounds", space.dim(), c.lower.len())?;
            check_len("cell upper bounds", space.dim(), c.upper.len())?;
            for i in 0..space.dim() {
                if !(c.lower[i] < c.upper[i]) {
                    return Err(Error::InvalidArgument(format!(
                        "cell {m} is empty along axis {i}"
                    )));
                }
                if c.lower[i] < space.lower()[i] || c.upper[i] > space.upper()[i] {
                    return Err(Error::InvalidArgument(format!(
                        "cell {m} leaves the attribute space"
                    )));
                }
            }
        }
        Ok(Self {
            space: space.clone(),
            cells,
            grid: None,
        })
    }

    pub fn space(&self) -> &AttributeSpace<T> {
        &self.space
    }

    /// Number of bins `M`.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[Cell<T>] {
        &self.cells
    }

    /// Per-axis counts when the scheme is a uniform grid.
    pub fn grid_counts(&self) -> Option<&[usize]> {
        self.grid.as_deref()
    }

    /// Cell centres, in bin order.
    pub fn centers(&self) -> Vec<Vec<T>> {
        self.cells.iter().map(Cell::center).collect()
    }

    /// The unique bin `m` with `b_m(a) = 1`.
    pub fn bin_index(&self, a: &[T]) -> Result<usize> {
        self.space.check_point(a)?;
        match &self.grid {
            Some(counts) => {
                let mut m = 0;
                for (i, &n) in counts.iter().enumerate() {
                    m = m * n + self.grid_axis_index(a[i], i, n);
                }
                Ok(m)
            }
            None => self
                .cells
                .iter()
                .position(|c| c.owns(a, &self.space))
                .ok_or_else(|| {
                    Error::NotPartition(format!(
                        "point {:?} is not covered by any cell",
                        to_f64_vec(a)
                    ))
                }),
        }
    }

    fn grid_axis_index(&self, x: T, axis: usize, n: usize) -> usize {
        let lo = self.space.lower()[axis];
        let guess = ((x - lo) / self.space.extent(axis) * T::from_usize_lossy(n)).floor();
        let mut k = guess.to_usize().unwrap_or(0).min(n - 1);
        // align with the exact edge values used to build the cells
        let counts = self.grid.as_deref().expect("grid scheme");
        while k > 0 && x < grid_edge(&self.space, counts, axis, k) {
            k -= 1;
        }
        while k + 1 < n && x >= grid_edge(&self.space, counts, axis, k + 1) {
            k += 1;
        }
        k
    }

    /// Checks that the cells are pairwise disjoint up to measure zero and that
    /// their volumes add up to the space volume.
    pub fn check_partition(&self) -> Result<()> {
        if self.grid.is_some() {
            return Ok(());
        }
        let vol = self.space.volume();
        let tol = T::lit(PARTITION_TOLERANCE) * vol;
        for (m, a) in self.cells.iter().enumerate() {
            for (k, b) in self.cells.iter().enumerate().skip(m + 1) {
                let ov = a.overlap_volume(b);
                if ov > tol {
                    return Err(Error::NotPartition(format!(
                        "cells {m} and {k} overlap (volume {ov})"
                    )));
                }
            }
        }
        let total = crate::scalar::compensated_sum(self.cells.iter().map(Cell::volume));
        if (total - vol).abs() > tol {
            return Err(Error::NotPartition(format!(
                "cell volumes sum to {total}, space volume is {vol}"
            )));
        }
        Ok(())
    }
}

fn grid_edge<T: Scalar>(space: &AttributeSpace<T>, counts: &[usize], axis: usize, k: usize) -> T {
    if k == counts[axis] {
        space.upper()[axis]
    } else {
        space.lower()[axis]
            + space.extent(axis) * T::from_usize_lossy(k) / T::from_usize_lossy(counts[axis])
    }
}

/// An `M`-vector indexed by bin: counts, bin means or `ℬγ`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinnedVector<T>(pub Vec<T>);

impl<T> BinnedVector<T> {
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn as_slice(&self) -> &[T] {
        &self.0
    }
}

/// A function on the attribute space, sampled at the nodes of a rule.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeFunction<T>(pub Vec<T>);

impl<T: Scalar> NodeFunction<T> {
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    /// Samples a closure at every node of `rule`.
    pub fn from_fn(rule: &NodeRule<T>, mut f: impl FnMut(&[T]) -> T) -> Self {
        NodeFunction(rule.nodes().map(&mut f).collect())
    }
}

/// `(ℬγ)_m = ∫ b_m γ dᵠa`.
pub fn apply_binning<T: Scalar>(
    scheme: &BinningScheme<T>,
    rule: &NodeRule<T>,
    gamma: &NodeFunction<T>,
) -> Result<BinnedVector<T>> {
    rule.check_scheme(scheme)?;
    Ok(BinnedVector(rule.integrate_per_bin(&gamma.0)?))
}

/// `ℬ†g = Σ_m g_m b_m`, sampled at the nodes.
pub fn apply_binning_adjoint<T: Scalar>(
    scheme: &BinningScheme<T>,
    g: &BinnedVector<T>,
    rule: &NodeRule<T>,
) -> Result<NodeFunction<T>> {
    rule.check_scheme(scheme)?;
    check_len("binned vector", scheme.len(), g.len())?;
    Ok(NodeFunction(
        rule.bin_of_node().iter().map(|&m| g.0[m]).collect(),
    ))
}

fn check_bin_means<T: Scalar>(means: &[T]) -> Result<()> {
    match means
        .iter()
        .position(|&v| !(v > T::zero() && v.is_finite()))
    {
        Some(bin) => Err(Error::EmptyBinMean {
            bin,
            value: means[bin].as_f64(),
        }),
        None => Ok(()),
    }
}

fn check_positive_nodes<T: Scalar>(rule: &NodeRule<T>, mean: &[T]) -> Result<()> {
    match mean.iter().position(|&v| !(v > T::zero() && v.is_finite())) {
        Some(i) => Err(Error::NonpositiveDensity {
            point: to_f64_vec(rule.node(i)),
            value: mean[i].as_f64(),
        }),
        None => Ok(()),
    }
}

/// Expected bin contents `ḡ_m(θ) = ∫ b_m ḡ(a|θ) dᵠa`.
pub fn bin_means<T: Scalar, M: ParametricModel<T> + ?Sized>(
    model: &M,
    theta: &[T],
    scheme: &BinningScheme<T>,
    rule: &NodeRule<T>,
) -> Result<BinnedVector<T>> {
    rule.check_scheme(scheme)?;
    let samples = sample_model(model, theta, rule)?;
    let means = rule.integrate_per_bin(&samples.mean)?;
    check_bin_means(&means)?;
    Ok(BinnedVector(means))
}

/// `ℬ⁺g = 𝒟 ℬ† D⁻¹ g`: node `i` in bin `m` gets `mean_i · g_m / ḡ_m`.
pub fn pseudo_inverse<T: Scalar>(
    rule: &NodeRule<T>,
    mean: &NodeFunction<T>,
    bin_mean: &BinnedVector<T>,
    g: &BinnedVector<T>,
) -> Result<NodeFunction<T>> {
    check_len("node values", rule.len(), mean.len())?;
    check_len("bin means", rule.n_bins(), bin_mean.len())?;
    check_len("binned vector", rule.n_bins(), g.len())?;
    check_bin_means(&bin_mean.0)?;
    Ok(NodeFunction(
        rule.bin_of_node()
            .iter()
            .zip(&mean.0)
            .map(|(&m, &gi)| gi * (g.0[m] / bin_mean.0[m]))
            .collect(),
    ))
}

/// `⟨u, v⟩ = ∫ u v / ḡ dᵠa` on the rule.
pub fn weighted_inner<T: Scalar>(
    rule: &NodeRule<T>,
    mean: &NodeFunction<T>,
    u: &NodeFunction<T>,
    v: &NodeFunction<T>,
) -> Result<T> {
    check_len("node values", rule.len(), mean.len())?;
    check_len("node values", rule.len(), u.len())?;
    check_len("node values", rule.len(), v.len())?;
    let mut acc = CompensatedSum::new();
    for i in 0..rule.len() {
        acc.add(rule.weights()[i] * u.0[i] * v.0[i] / mean.0[i]);
    }
    Ok(acc.total())
}

/// `‖u‖² = ⟨u, u⟩` in the weighted space.
pub fn weighted_norm_sq<T: Scalar>(
    rule: &NodeRule<T>,
    mean: &NodeFunction<T>,
    u: &NodeFunction<T>,
) -> Result<T> {
    weighted_inner(rule, mean, u, u)
}

/// `Σ_m g_m h_m / ḡ_m`, the inner product on the binned side.
pub fn weighted_binned_inner<T: Scalar>(
    bin_mean: &BinnedVector<T>,
    g: &BinnedVector<T>,
    h: &BinnedVector<T>,
) -> Result<T> {
    check_len("binned vector", bin_mean.len(), g.len())?;
    check_len("binned vector", bin_mean.len(), h.len())?;
    Ok(crate::scalar::compensated_sum(
        bin_mean
            .0
            .iter()
            .zip(g.0.iter().zip(&h.0))
            .map(|(&d, (&x, &y))| x * y / d),
    ))
}

/// Splits `γ` into `γ₁ = ℬ⁺ℬγ` and `γ₀ = γ − γ₁` for an intensity sampled at
/// the nodes. This is the workhorse behind [`project_component`] and the
/// object-space loss.
pub fn project_weighted<T: Scalar>(
    scheme: &BinningScheme<T>,
    rule: &NodeRule<T>,
    mean: &NodeFunction<T>,
    gamma: &NodeFunction<T>,
) -> Result<(NodeFunction<T>, NodeFunction<T>)> {
    rule.check_scheme(scheme)?;
    check_len("node values", rule.len(), mean.len())?;
    check_len("node values", rule.len(), gamma.len())?;
    check_positive_nodes(rule, &mean.0)?;
    let bin_mean = BinnedVector(rule.integrate_per_bin(&mean.0)?);
    let binned = apply_binning(scheme, rule, gamma)?;
    let gamma1 = pseudo_inverse(rule, mean, &bin_mean, &binned)?;
    let gamma0 = NodeFunction(
        gamma
            .0
            .iter()
            .zip(&gamma1.0)
            .map(|(&g, &g1)| g - g1)
            .collect(),
    );
    Ok((gamma1, gamma0))
}

/// Orthogonal decomposition `γ = γ₁ + γ₀` for the model intensity at `θ`.
pub fn project_component<T: Scalar, M: ParametricModel<T> + ?Sized>(
    gamma: &NodeFunction<T>,
    model: &M,
    theta: &[T],
    scheme: &BinningScheme<T>,
    rule: &NodeRule<T>,
) -> Result<(NodeFunction<T>, NodeFunction<T>)> {
    rule.check_scheme(scheme)?;
    let samples = sample_model(model, theta, rule)?;
    let mean = NodeFunction(samples.mean);
    check_bin_means(&rule.integrate_per_bin(&mean.0)?)?;
    project_weighted(scheme, rule, &mean, gamma)
}

/// Outcome of a sampled partition check.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionReport {
    pub samples_checked: usize,
    /// Sampled points owned by zero or several cells, with the owning cells.
    pub violations: Vec<(Vec<f64>, Vec<usize>)>,
    pub volume_sum: f64,
    pub space_volume: f64,
    pub volume_ok: bool,
}

impl PartitionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.volume_ok
    }
}

/// Samples `n_samples` uniform points and checks each belongs to exactly one
/// cell, then compares the cell volume sum to the space volume.
pub fn verify_partition<T: Scalar>(
    scheme: &BinningScheme<T>,
    n_samples: usize,
    seed: u64,
) -> Result<PartitionReport> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument(
            "n_samples must be at least 1".into(),
        ));
    }
    let space = scheme.space();
    let q = space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = vec![T::zero(); q];
    let mut a = vec![T::zero(); q];
    let mut violations = Vec::new();
    for _ in 0..n_samples {
        for ui in u.iter_mut() {
            *ui = T::lit(rng.random::<f64>());
        }
        space.from_unit(&u, &mut a);
        let owners: Vec<usize> = scheme
            .cells()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.owns(&a, space))
            .map(|(m, _)| m)
            .collect();
        if owners.len() != 1 {
            violations.push((to_f64_vec(&a), owners));
        }
    }
    let volume_sum =
        crate::scalar::compensated_sum(scheme.cells().iter().map(Cell::volume)).as_f64();
    let space_volume = space.volume().as_f64();
    let volume_ok = (volume_sum - space_volume).abs() <= PARTITION_TOLERANCE * space_volume;
    Ok(PartitionReport {
        samples_checked: n_samples,
        violations,
        volume_sum,
        space_volume,
        volume_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::zoo::ZooModel;
    use crate::quadrature::build_rule;

    fn unit(bins: usize, nodes: usize) -> (BinningScheme<f64>, NodeRule<f64>) {
        let space = AttributeSpace::unit(1).unwrap();
        let scheme = BinningScheme::uniform_grid(&space, &[bins]).unwrap();
        let rule = build_rule(&space, &scheme, nodes).unwrap();
        (scheme, rule)
    }

    #[test]
    fn uniform_grid_centres_on_symmetric_interval() {
        let space = AttributeSpace::interval(-1.0, 1.0).unwrap();
        let s = BinningScheme::uniform_grid(&space, &[4]).unwrap();
        assert_eq!(s.len(), 4);
        let c: Vec<f64> = s.centers().into_iter().map(|v| v[0]).collect();
        assert_eq!(c, vec![-0.75, -0.25, 0.25, 0.75]);
        assert!(s.cells().iter().all(|cell| cell.volume() == 0.5));
    }

    #[test]
    fn uniform_grid_quadrants_and_single_cell() {
        let space = AttributeSpace::unit(2).unwrap();
        let s = BinningScheme::uniform_grid(&space, &[2, 2]).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.cells()[1], Cell::new(vec![0.0, 0.5], vec![0.5, 1.0]));
        assert_eq!(s.bin_index(&[0.7, 0.2]).unwrap(), 2);
        let one = BinningScheme::uniform_grid(&AttributeSpace::unit(1).unwrap(), &[1]).unwrap();
        assert_eq!(one.cells()[0], Cell::new(vec![0.0], vec![1.0]));
        assert!(BinningScheme::uniform_grid(&space, &[2, 0]).is_err());
    }

    #[test]
    fn bin_index_boundary_convention() {
        let (s, _) = unit(4, 1);
        assert_eq!(s.bin_index(&[0.3]).unwrap(), 1);
        assert_eq!(s.bin_index(&[0.25]).unwrap(), 1);
        assert_eq!(s.bin_index(&[1.0]).unwrap(), 3);
        assert_eq!(s.bin_index(&[0.0]).unwrap(), 0);
        assert!(matches!(
            s.bin_index(&[1.01]),
            Err(Error::OutsideSpace { .. })
        ));
    }

    #[test]
    fn explicit_cells_follow_the_same_convention() {
        let space = AttributeSpace::unit(1).unwrap();
        let cells = vec![
            Cell::new(vec![0.5], vec![1.0]),
            Cell::new(vec![0.0], vec![0.5]),
        ];
        let s = BinningScheme::from_cells(&space, cells).unwrap();
        assert_eq!(s.bin_index(&[0.5]).unwrap(), 0);
        assert_eq!(s.bin_index(&[1.0]).unwrap(), 0);
        assert_eq!(s.bin_index(&[0.1]).unwrap(), 1);
        assert!(s.check_partition().is_ok());
    }

    #[test]
    fn apply_binning_examples() {
        let (s, r) = unit(4, 3);
        let ones = NodeFunction(vec![1.0; r.len()]);
        let b = apply_binning(&s, &r, &ones).unwrap();
        assert!(b.0.iter().all(|&v| (v - 0.25).abs() < 1e-15));

        let (s, r) = unit(2, 3);
        let a = NodeFunction::from_fn(&r, |x| x[0]);
        let b = apply_binning(&s, &r, &a).unwrap();
        assert!((b.0[0] - 0.125).abs() < 1e-15 && (b.0[1] - 0.375).abs() < 1e-15);

        // a minus its bin average integrates to zero in every bin
        let centred =
            NodeFunction::from_fn(&r, |x| if x[0] < 0.5 { x[0] - 0.25 } else { x[0] - 0.75 });
        let b = apply_binning(&s, &r, &centred).unwrap();
        assert!(b.0.iter().all(|v| v.abs() <= 1e-15));

        let (_, r4) = unit(4, 3);
        assert!(apply_binning(&s, &r4, &ones).is_err());
    }

    #[test]
    fn adjoint_examples() {
        let (s, r) = unit(3, 2);
        let ones = apply_binning_adjoint(&s, &BinnedVector(vec![1.0; 3]), &r).unwrap();
        assert!(ones.0.iter().all(|&v| v == 1.0));
        let e1 = apply_binning_adjoint(&s, &BinnedVector(vec![0.0, 1.0, 0.0]), &r).unwrap();
        for (i, &v) in e1.0.iter().enumerate() {
            assert_eq!(v, if r.bin_of_node()[i] == 1 { 1.0 } else { 0.0 });
        }
        let (s, r) = unit(2, 2);
        let g = BinnedVector(vec![3.0, -2.0]);
        let back = apply_binning(&s, &r, &apply_binning_adjoint(&s, &g, &r).unwrap()).unwrap();
        assert!((back.0[0] - 1.5).abs() < 1e-15 && (back.0[1] + 1.0).abs() < 1e-15);
        assert!(apply_binning_adjoint(&s, &BinnedVector(vec![1.0]), &r).is_err());
    }

    #[test]
    fn bin_means_examples() {
        let space = AttributeSpace::unit(1).unwrap();
        let (s, r) = unit(4, 4);
        let c = ZooModel::constant(space.clone());
        let b = bin_means(&c, &[3.7], &s, &r).unwrap();
        assert!(b.0.iter().all(|&v| (v - 0.925).abs() < 1e-15));

        let (s, r) = unit(2, 4);
        let b = bin_means(&ZooModel::affine_1d(), &[1.0, 1.0], &s, &r).unwrap();
        assert!((b.0[0] - 0.625).abs() < 1e-15 && (b.0[1] - 0.875).abs() < 1e-15);

        let g = ZooModel::gaussian_mixture(space, 1);
        let theta = ZooModel::<f64>::g1_theta();
        let (s, r) = unit(8, 4);
        let b = bin_means(&g, &theta, &s, &r).unwrap();
        let total = crate::model::total_mean(&g, &theta, &r).unwrap();
        let sum: f64 = crate::scalar::compensated_sum(b.0.iter().copied());
        assert!((sum - total).abs() <= 1e-13 * total);
    }

    #[test]
    fn empty_bin_mean_is_an_error() {
        let (s, r) = unit(2, 4);
        let mean = NodeFunction::from_fn(&r, |_| 1.0);
        let bad = BinnedVector(vec![1.0, 0.0]);
        assert!(matches!(
            pseudo_inverse(&r, &mean, &bad, &BinnedVector(vec![1.0, 1.0])),
            Err(Error::EmptyBinMean { bin: 1, .. })
        ));
        let neg = NodeFunction::from_fn(&r, |x| 0.5 - x[0]);
        assert!(project_weighted(&s, &r, &neg, &mean).is_err());
    }

    #[test]
    fn projection_of_a_multiple_of_the_mean_is_identity() {
        let (s, r) = unit(4, 4);
        let m = ZooModel::affine_1d();
        let theta = [1.0, 0.7];
        let gamma = NodeFunction::from_fn(&r, |a| 2.5 * (1.0 + 0.7 * a[0]));
        let (g1, g0) = project_component(&gamma, &m, &theta, &s, &r).unwrap();
        for i in 0..r.len() {
            assert!((g1.0[i] - gamma.0[i]).abs() <= 1e-14);
            assert!(g0.0[i].abs() <= 1e-14);
        }
    }

    #[test]
    fn projection_of_identity_with_flat_mean() {
        let space = AttributeSpace::unit(1).unwrap();
        let (s, r) = unit(2, 3);
        let c = ZooModel::constant(space);
        let gamma = NodeFunction::from_fn(&r, |a| a[0]);
        let (g1, g0) = project_component(&gamma, &c, &[1.0], &s, &r).unwrap();
        for (i, a) in r.nodes().enumerate() {
            let expected = if a[0] < 0.5 { 0.25 } else { 0.75 };
            assert!((g1.0[i] - expected).abs() <= 1e-15);
            assert!((g0.0[i] - (a[0] - expected)).abs() <= 1e-15);
        }
    }

    #[test]
    fn verify_partition_controls() {
        let space = AttributeSpace::unit(2).unwrap();
        let grid = BinningScheme::uniform_grid(&space, &[3, 5]).unwrap();
        assert!(verify_partition(&grid, 2000, 1).unwrap().passed());

        let overlapping = BinningScheme::from_cells(
            &space,
            vec![
                Cell::new(vec![0.0, 0.0], vec![0.6, 1.0]),
                Cell::new(vec![0.4, 0.0], vec![1.0, 1.0]),
            ],
        )
        .unwrap();
        let rep = verify_partition(&overlapping, 2000, 1).unwrap();
        assert!(!rep.passed());
        assert!(rep
            .violations
            .iter()
            .any(|(_, owners)| owners == &vec![0, 1]));
        assert!(matches!(
            overlapping.check_partition(),
            Err(Error::NotPartition(_))
        ));

        let gappy = BinningScheme::from_cells(
            &space,
            vec![
                Cell::new(vec![0.0, 0.0], vec![0.5, 1.0]),
                Cell::new(vec![0.6, 0.0], vec![1.0, 1.0]),
            ],
        )
        .unwrap();
        let rep = verify_partition(&gappy, 10, 1).unwrap();
        assert!(!rep.volume_ok && !rep.passed());
        let err = crate::quadrature::build_rule(&space, &gappy, 2).unwrap_err();
        assert!(err.to_string().contains("does not partition"));
    }
}
