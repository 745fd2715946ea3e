//! Per-bin tensor-product Gauss-Legendre rules.
//!
//! Every integral over the attribute space is a weighted sum over the nodes
//! of a [`NodeRule`]. Nodes are generated cell by cell, so each node belongs
//! to exactly one bin and lies strictly inside it; per-bin sums therefore add
//! up to the global sum term for term.

use std::ops::Range;

use crate::binning::BinningScheme;
use crate::error::{check_len, Error, Result};
use crate::model::AttributeSpace;
use crate::scalar::{CompensatedSum, Scalar};

/// Default number of Gauss-Legendre nodes per axis per bin.
pub const DEFAULT_NODES_PER_AXIS: usize = 4;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
///
/// Roots of `P_n` are found by Newton iteration from the Tricomi initial
/// guess; weights are `2 / ((1 − x²) P_n'(x)²)`.
pub fn gauss_legendre<T: Scalar>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "Gauss-Legendre order must be at least 1");
    let one = T::one();
    let two = T::lit(2.0);
    let nf = T::from_usize_lossy(n);
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut x = (T::PI() * (T::from_usize_lossy(i) + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() <= T::epsilon() * (one + x.abs()) {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = two / ((one - x * x) * dp * dp);
        // x is the i-th largest root
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    (nodes, weights)
}

fn legendre_with_derivative<T: Scalar>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::from_usize_lossy(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { p0 } else { p1 };
    let dp = T::from_usize_lossy(n) * (x * p1 - p0) / (x * x - T::one());
    (p, dp)
}

/// Discrete carrier for integrals over the attribute space.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeRule<T> {
    dim: usize,
    order: usize,
    nodes: Vec<T>,
    weights: Vec<T>,
    bin_of_node: Vec<usize>,
    bin_ranges: Vec<Range<usize>>,
    volume: T,
}

impl<T: Scalar> NodeRule<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nodes per axis per bin.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Polynomial degree integrated exactly per axis per bin.
    pub fn degree(&self) -> usize {
        2 * self.order - 1
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn n_bins(&self) -> usize {
        self.bin_ranges.len()
    }

    pub fn node(&self, i: usize) -> &[T] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.nodes.chunks_exact(self.dim)
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn bin_of_node(&self) -> &[usize] {
        &self.bin_of_node
    }

    /// Node indices belonging to bin `m`; nodes are stored bin by bin.
    pub fn bin_range(&self, m: usize) -> Range<usize> {
        self.bin_ranges[m].clone()
    }

    /// Volume of the space the rule was built for.
    pub fn volume(&self) -> T {
        self.volume
    }

    /// `Σ_i w_i v_i`, compensated, in node order.
    pub fn integrate(&self, values: &[T]) -> Result<T> {
        check_len("node values", self.len(), values.len())?;
        let mut acc = CompensatedSum::new();
        for (&w, &v) in self.weights.iter().zip(values) {
            acc.add(w * v);
        }
        Ok(acc.total())
    }

    /// Component `m` is `Σ_{i in bin m} w_i v_i`.
    pub fn integrate_per_bin(&self, values: &[T]) -> Result<Vec<T>> {
        check_len("node values", self.len(), values.len())?;
        Ok(self
            .bin_ranges
            .iter()
            .map(|r| {
                let mut acc = CompensatedSum::new();
                for i in r.clone() {
                    acc.add(self.weights[i] * values[i]);
                }
                acc.total()
            })
            .collect())
    }

    pub(crate) fn check_scheme(&self, scheme: &BinningScheme<T>) -> Result<()> {
        if self.dim != scheme.space().dim() {
            return Err(Error::DimensionMismatch(format!(
                "rule is {}-dimensional, scheme is {}-dimensional",
                self.dim,
                scheme.space().dim()
            )));
        }
        check_len("bins in rule", scheme.len(), self.n_bins())
    }
}

/// Builds a rule with `nodes_per_axis^q` Gauss-Legendre nodes in every cell
/// of `scheme`. Fails if the cells do not partition `space`.
pub fn build_rule<T: Scalar>(
    space: &AttributeSpace<T>,
    scheme: &BinningScheme<T>,
    nodes_per_axis: usize,
) -> Result<NodeRule<T>> {
    build_composite_rule(space, scheme, nodes_per_axis, 1)
}

/// Like [`build_rule`], but every cell is first split into
/// `subdivisions^q` equal sub-cells, each carrying its own Gauss-Legendre
/// product rule.
///
/// Nested uniform grids `M` and `M·s` share one node set when the coarse
/// grid uses `subdivisions = s`, so quantities compared across a refinement
/// sweep differ only by the binning, not by the quadrature.
pub fn build_composite_rule<T: Scalar>(
    space: &AttributeSpace<T>,
    scheme: &BinningScheme<T>,
    nodes_per_axis: usize,
    subdivisions: usize,
) -> Result<NodeRule<T>> {
    if nodes_per_axis == 0 {
        return Err(Error::InvalidArgument(
            "nodes_per_axis must be at least 1".into(),
        ));
    }
    if subdivisions == 0 {
        return Err(Error::InvalidArgument(
            "subdivisions must be at least 1".into(),
        ));
    }
    if scheme.space() != space {
        return Err(Error::NotPartition(
            "scheme was built for a different attribute space".into(),
        ));
    }
    scheme.check_partition()?;

    let q = space.dim();
    let (ref_nodes, ref_weights) = gauss_legendre::<T>(nodes_per_axis);
    let per_sub = nodes_per_axis.pow(q as u32);
    let subs = subdivisions.pow(q as u32);
    let total = per_sub * subs * scheme.len();
    let mut nodes = Vec::with_capacity(total * q);
    let mut weights = Vec::with_capacity(total);
    let mut bin_of_node = Vec::with_capacity(total);
    let mut bin_ranges = Vec::with_capacity(scheme.len());
    let half = T::lit(0.5);
    let s = T::from_usize_lossy(subdivisions);
    let mut sub_idx = vec![0usize; q];
    let mut idx = vec![0usize; q];

    for (m, cell) in scheme.cells().iter().enumerate() {
        let start = weights.len();
        sub_idx.iter_mut().for_each(|k| *k = 0);
        for _ in 0..subs {
            let mut mid = Vec::with_capacity(q);
            let mut rad = Vec::with_capacity(q);
            for i in 0..q {
                let step = (cell.upper[i] - cell.lower[i]) / s;
                let lo = cell.lower[i] + step * T::from_usize_lossy(sub_idx[i]);
                let hi = if sub_idx[i] + 1 == subdivisions {
                    cell.upper[i]
                } else {
                    lo + step
                };
                mid.push(half * (lo + hi));
                rad.push(half * (hi - lo));
            }
            idx.iter_mut().for_each(|k| *k = 0);
            for _ in 0..per_sub {
                let mut w = T::one();
                for i in 0..q {
                    nodes.push(mid[i] + rad[i] * ref_nodes[idx[i]]);
                    w *= rad[i] * ref_weights[idx[i]];
                }
                weights.push(w);
                bin_of_node.push(m);
                odometer(&mut idx, nodes_per_axis);
            }
            odometer(&mut sub_idx, subdivisions);
        }
        bin_ranges.push(start..weights.len());
    }

    Ok(NodeRule {
        dim: q,
        order: nodes_per_axis,
        nodes,
        weights,
        bin_of_node,
        bin_ranges,
        volume: space.volume(),
    })
}

// last axis fastest
fn odometer(idx: &mut [usize], base: usize) {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < base {
            return;
        }
        idx[i] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_rule(bins: usize, nodes: usize) -> NodeRule<f64> {
        let space = AttributeSpace::unit(1).unwrap();
        let scheme = BinningScheme::uniform_grid(&space, &[bins]).unwrap();
        build_rule(&space, &scheme, nodes).unwrap()
    }

    #[test]
    fn gauss_legendre_two_point_table() {
        let (x, w) = gauss_legendre::<f64>(2);
        let r = 1.0 / 3f64.sqrt();
        assert!((x[0] + r).abs() < 1e-15 && (x[1] - r).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15 && (w[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_monomial_exactness() {
        for n in 1..=20 {
            let (x, w) = gauss_legendre::<f64>(n);
            for k in 0..=(2 * n - 1) {
                let exact = if k % 2 == 1 {
                    0.0
                } else {
                    2.0 / (k as f64 + 1.0)
                };
                let got: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(&xi, &wi)| wi * xi.powi(k as i32))
                    .sum();
                assert!((got - exact).abs() < 2e-14, "n={n} k={k} got={got}");
            }
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn gauss_legendre_f32() {
        let (x, w) = gauss_legendre::<f32>(5);
        let s: f32 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-6);
        let m2: f32 = x.iter().zip(&w).map(|(a, b)| b * a * a).sum();
        assert!((m2 - 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn midpoint_rules() {
        let r = unit_rule(1, 1);
        assert_eq!(r.node(0), &[0.5]);
        assert_eq!(r.weights(), &[1.0]);
        let r = unit_rule(2, 1);
        assert_eq!(
            r.nodes().collect::<Vec<_>>(),
            vec![&[0.25][..], &[0.75][..]]
        );
        assert_eq!(r.weights(), &[0.5, 0.5]);
        assert_eq!(r.bin_of_node(), &[0, 1]);
    }

    #[test]
    fn two_point_rule_on_unit_interval() {
        let r = unit_rule(1, 2);
        let off = 1.0 / (2.0 * 3f64.sqrt());
        assert!((r.node(0)[0] - (0.5 - off)).abs() < 1e-15);
        assert!((r.node(1)[0] - (0.5 + off)).abs() < 1e-15);
        assert!(r.weights().iter().all(|&w| (w - 0.5).abs() < 1e-15));
    }

    #[test]
    fn integrate_examples() {
        let r = unit_rule(1, 2);
        assert!((r.integrate(&[1.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        let a: Vec<f64> = r.nodes().map(|n| n[0]).collect();
        assert!((r.integrate(&a).unwrap() - 0.5).abs() <= f64::EPSILON / 2.0);
        let a2: Vec<f64> = a.iter().map(|x| x * x).collect();
        assert!((r.integrate(&a2).unwrap() - 1.0 / 3.0).abs() <= 1e-15);
        assert!(matches!(
            r.integrate(&[1.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn integrate_per_bin_examples() {
        let r = unit_rule(4, 3);
        let ones = vec![1.0; r.len()];
        for v in r.integrate_per_bin(&ones).unwrap() {
            assert!((v - 0.25).abs() < 1e-15);
        }
        let r = unit_rule(2, 3);
        let a: Vec<f64> = r.nodes().map(|n| n[0]).collect();
        let per = r.integrate_per_bin(&a).unwrap();
        assert!((per[0] - 0.125).abs() < 1e-15 && (per[1] - 0.375).abs() < 1e-15);
        assert!(r.integrate_per_bin(&a[1..]).is_err());
    }

    #[test]
    fn weights_sum_to_volume_and_nodes_are_interior() {
        let space = AttributeSpace::new(vec![-1.0, 0.0, 2.0], vec![1.0, 0.5, 5.0]).unwrap();
        let scheme = BinningScheme::uniform_grid(&space, &[3, 2, 4]).unwrap();
        let rule = build_rule(&space, &scheme, 3).unwrap();
        assert_eq!(rule.len(), 24 * 27);
        let s: f64 = rule.weights().iter().sum();
        assert!((s - space.volume()).abs() <= 1e-12 * space.volume());
        for (i, node) in rule.nodes().enumerate() {
            let cell = &scheme.cells()[rule.bin_of_node()[i]];
            for k in 0..3 {
                assert!(node[k] > cell.lower[k] && node[k] < cell.upper[k]);
            }
            assert_eq!(scheme.bin_index(node).unwrap(), rule.bin_of_node()[i]);
        }
    }

    #[test]
    fn per_bin_polynomial_exactness_2d() {
        let space = AttributeSpace::<f64>::unit(2).unwrap();
        let scheme = BinningScheme::uniform_grid(&space, &[2, 3]).unwrap();
        for n in 1..=4 {
            let rule = build_rule(&space, &scheme, n).unwrap();
            let deg = rule.degree() as i32;
            for (px, py) in [(deg, 0), (0, deg), (deg, deg), (1, deg - 1)] {
                let vals: Vec<f64> = rule
                    .nodes()
                    .map(|a| a[0].powi(px) * a[1].powi(py))
                    .collect();
                let per = rule.integrate_per_bin(&vals).unwrap();
                for (m, cell) in scheme.cells().iter().enumerate() {
                    let ix = |lo: f64, hi: f64, k: i32| {
                        (hi.powi(k + 1) - lo.powi(k + 1)) / (k + 1) as f64
                    };
                    let exact =
                        ix(cell.lower[0], cell.upper[0], px) * ix(cell.lower[1], cell.upper[1], py);
                    assert!((per[m] - exact).abs() < 1e-15, "n={n} m={m}");
                }
            }
        }
    }

    #[test]
    fn node_doubling_convergence_on_gaussian() {
        let f = |x: f64| (-(x - 0.4) * (x - 0.4) / (2.0 * 0.15 * 0.15)).exp();
        // ∫_0^1 via erf
        let s = 0.15 * 2f64.sqrt();
        let exact =
            0.15 * (std::f64::consts::PI / 2.0).sqrt() * (libm::erf(0.6 / s) + libm::erf(0.4 / s));
        let err = |n: usize| {
            let r = unit_rule(1, n);
            let v: Vec<f64> = r.nodes().map(|a| f(a[0])).collect();
            (r.integrate(&v).unwrap() - exact).abs()
        };
        // geometric convergence: every doubling gains well over an order of magnitude
        let errs: Vec<f64> = [2, 4, 8, 16].iter().map(|&n| err(n)).collect();
        for w in errs.windows(2) {
            assert!(w[1] < w[0] / 30.0 || w[1] < 1e-15, "{errs:?}");
        }
        assert!(errs[3] < 1e-9);
    }

    #[test]
    fn rejects_bad_arguments() {
        let space = AttributeSpace::<f64>::unit(1).unwrap();
        let scheme = BinningScheme::uniform_grid(&space, &[2]).unwrap();
        assert!(build_rule(&space, &scheme, 0).is_err());
        let other = AttributeSpace::interval(0.0, 2.0).unwrap();
        assert!(matches!(
            build_rule(&other, &scheme, 2),
            Err(Error::NotPartition(_))
        ));
    }

    #[test]
    fn composite_rule_matches_fine_grid_nodes() {
        let space = AttributeSpace::unit(2).unwrap();
        let coarse = BinningScheme::uniform_grid(&space, &[2, 2]).unwrap();
        let fine = BinningScheme::uniform_grid(&space, &[4, 4]).unwrap();
        let a = build_composite_rule(&space, &coarse, 3, 2).unwrap();
        let b = build_rule(&space, &fine, 3).unwrap();
        assert_eq!(a.len(), b.len());
        let key = |r: &NodeRule<f64>| {
            let mut v: Vec<(i64, i64, i64)> = (0..r.len())
                .map(|i| {
                    let n = r.node(i);
                    (
                        (n[0] * 1e12).round() as i64,
                        (n[1] * 1e12).round() as i64,
                        (r.weights()[i] * 1e12).round() as i64,
                    )
                })
                .collect();
            v.sort();
            v
        };
        assert_eq!(key(&a), key(&b));
        assert!(a.bin_range(3).len() == 36 && a.bin_of_node().iter().all(|&m| m < 4));
        assert!(build_composite_rule(&space, &coarse, 3, 0).is_err());
    }
}
