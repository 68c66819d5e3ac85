//! Cochain complexes of finite dimensional vector spaces: cones, shifts,
//! smart truncations, cohomology with explicit coset representatives, and
//! quasi-isomorphism tests. Differentials raise degree by one.
//!
//! Sign conventions, used consistently by every module above this one:
//! the differential of `X[k]` is `(-1)^k d`, and `Cone(f)^i = X^{i+1} (+) Y^i`
//! with differential `(x, y) |-> (-dx, fx + dy)`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::{extend_basis, Matrix};

#[derive(Clone, PartialEq)]
pub struct Complex<K: Field> {
    pub field: K,
    comps: BTreeMap<i32, usize>,
    diffs: BTreeMap<i32, Matrix<K>>,
}

impl<K: Field> std::fmt::Debug for Complex<K> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Complex{{")?;
        for (i, dim) in &self.comps {
            write!(f, " {i}:{dim}")?;
        }
        write!(f, " }}")
    }
}

/// Cohomology at one degree: dimension, cocycle representatives (columns,
/// in ambient coordinates) and a projector sending a cocycle to its
/// coordinates in the representative basis, killing coboundaries.
#[derive(Clone, Debug)]
pub struct Cohomology<K: Field> {
    pub dim: usize,
    pub reps: Matrix<K>,
    pub projector: Matrix<K>,
}

impl<K: Field> Complex<K> {
    /// Builds a complex, checking `d . d = 0`.
    pub fn new(field: K, comps: BTreeMap<i32, usize>, diffs: BTreeMap<i32, Matrix<K>>) -> Result<Self> {
        let comps: BTreeMap<i32, usize> = comps.into_iter().filter(|&(_, d)| d > 0).collect();
        let dim_at = |i: i32| comps.get(&i).copied().unwrap_or(0);
        for (&i, m) in &diffs {
            if m.rows() != dim_at(i + 1) || m.cols() != dim_at(i) {
                return Err(Error::Invariant(format!(
                    "differential at degree {i} has shape {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    dim_at(i + 1),
                    dim_at(i)
                )));
            }
        }
        let diffs: BTreeMap<i32, Matrix<K>> = diffs.into_iter().filter(|(_, m)| m.rows() > 0 && m.cols() > 0).collect();
        let cx = Complex { field, comps, diffs };
        for &i in cx.comps.keys() {
            let a = cx.diff(i + 1).mul(&cx.diff(i));
            if !a.is_zero() {
                return Err(Error::Invariant(format!("d^2 != 0 at degree {i}")));
            }
        }
        Ok(cx)
    }

    pub fn zero(field: K) -> Self {
        Complex { field, comps: BTreeMap::new(), diffs: BTreeMap::new() }
    }

    /// A one dimensional space concentrated in one degree.
    pub fn point(field: K, degree: i32) -> Self {
        let mut comps = BTreeMap::new();
        comps.insert(degree, 1);
        Complex { field, comps, diffs: BTreeMap::new() }
    }

    pub fn dim(&self, i: i32) -> usize {
        self.comps.get(&i).copied().unwrap_or(0)
    }

    pub fn degrees(&self) -> Vec<i32> {
        self.comps.keys().copied().collect()
    }

    pub fn is_zero_object(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.comps.values().sum()
    }

    pub fn diff(&self, i: i32) -> Matrix<K> {
        self.diffs
            .get(&i)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.field.clone(), self.dim(i + 1), self.dim(i)))
    }

    pub fn support(&self) -> Option<(i32, i32)> {
        let min = *self.comps.keys().next()?;
        let max = *self.comps.keys().last()?;
        Some((min, max))
    }

    pub fn shift(&self, k: i32) -> Self {
        let mut comps = BTreeMap::new();
        let mut diffs = BTreeMap::new();
        for (&i, &dim) in &self.comps {
            comps.insert(i - k, dim);
        }
        let sign = if k.rem_euclid(2) == 0 { 1 } else { -1 };
        for (&i, m) in &self.diffs {
            let m = if sign == 1 { m.clone() } else { m.neg() };
            diffs.insert(i - k, m);
        }
        Complex { field: self.field.clone(), comps, diffs }
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut comps = BTreeMap::new();
        let mut diffs = BTreeMap::new();
        let degrees: std::collections::BTreeSet<i32> = self
            .comps
            .keys()
            .chain(other.comps.keys())
            .copied()
            .collect();
        for &i in &degrees {
            let dim = self.dim(i) + other.dim(i);
            if dim > 0 {
                comps.insert(i, dim);
            }
        }
        for &i in &degrees {
            let (a, b) = (self.diff(i), other.diff(i));
            let rows = self.dim(i + 1) + other.dim(i + 1);
            let cols = self.dim(i) + other.dim(i);
            if rows == 0 || cols == 0 {
                continue;
            }
            let m = Matrix::from_fn(self.field.clone(), rows, cols, |r, c| {
                let in_a_row = r < self.dim(i + 1);
                let in_a_col = c < self.dim(i);
                match (in_a_row, in_a_col) {
                    (true, true) => a.get(r, c).clone(),
                    (false, false) => b.get(r - self.dim(i + 1), c - self.dim(i)).clone(),
                    _ => self.field.zero(),
                }
            });
            diffs.insert(i, m);
        }
        Complex { field: self.field.clone(), comps, diffs }
    }

    pub fn cohomology(&self, i: i32) -> Cohomology<K> {
        let k = self.field.clone();
        let ker = self.diff(i).kernel_basis(); // dim(i) x z
        let im = self.diff(i - 1); // columns span the boundaries
        let im_basis = im.column_space_basis();
        let reps = extend_basis(&im_basis, &ker);
        let h = reps.cols();
        let ambient = self.dim(i);
        if ambient == 0 {
            return Cohomology { dim: 0, reps, projector: Matrix::zeros(k, 0, 0) };
        }
        // complete [im | reps] to a basis of the component, invert, and take
        // the rows dual to the representatives
        let full = im_basis.hstack(&reps);
        let id = Matrix::identity(k.clone(), ambient);
        let completion = extend_basis(&full, &id);
        let basis = full.hstack(&completion);
        let inv = basis.inverse();
        let projector = Matrix::from_fn(k, h, ambient, |r, c| inv.get(im_basis.cols() + r, c).clone());
        Cohomology { dim: h, reps, projector }
    }

    pub fn h_dim(&self, i: i32) -> usize {
        let z = self.diff(i).kernel_basis().cols();
        let b = self.diff(i - 1).rank();
        z - b
    }

    pub fn h_dims(&self) -> BTreeMap<i32, usize> {
        let mut out = BTreeMap::new();
        for &i in self.comps.keys() {
            let d = self.h_dim(i);
            if d > 0 {
                out.insert(i, d);
            }
        }
        out
    }

    pub fn is_acyclic(&self) -> bool {
        self.h_dims().is_empty()
    }

    /// Smart truncation `tau^{<= n}`: components below `n` unchanged, degree
    /// `n` replaced by `ker d^n`, zero above.
    pub fn truncate_le(&self, n: i32) -> Self {
        let k = self.field.clone();
        let ker = self.diff(n).kernel_basis();
        let mut comps = BTreeMap::new();
        let mut diffs = BTreeMap::new();
        for (&i, &dim) in &self.comps {
            if i < n {
                comps.insert(i, dim);
            }
        }
        if ker.cols() > 0 {
            comps.insert(n, ker.cols());
        }
        for (&i, m) in &self.diffs {
            if i + 1 < n {
                diffs.insert(i, m.clone());
            } else if i + 1 == n && self.dim(i) > 0 {
                // express d^{n-1} in the kernel basis
                if ker.cols() > 0 {
                    let coords = ker
                        .solve_matrix(m)
                        .expect("image of d lies in ker of the next d");
                    diffs.insert(i, coords);
                }
            }
        }
        Complex { field: k, comps, diffs }
    }

    /// Smart truncation `tau^{> n}`: zero in degrees <= n, degree `n+1`
    /// replaced by `coker d^n`, unchanged above.
    pub fn truncate_gt(&self, n: i32) -> Self {
        let k = self.field.clone();
        let im = self.diff(n).column_space_basis();
        let id = Matrix::identity(k.clone(), self.dim(n + 1));
        let section = extend_basis(&im, &id); // coker representatives
        let coker_dim = section.cols();
        let mut comps = BTreeMap::new();
        let mut diffs = BTreeMap::new();
        for (&i, &dim) in &self.comps {
            if i > n + 1 {
                comps.insert(i, dim);
            }
        }
        if coker_dim > 0 {
            comps.insert(n + 1, coker_dim);
        }
        for (&i, m) in &self.diffs {
            if i > n + 1 {
                diffs.insert(i, m.clone());
            } else if i == n + 1 && coker_dim > 0 {
                diffs.insert(i, m.mul(&section));
            }
        }
        Complex { field: k, comps, diffs }
    }
}

/// A block map between complexes. Degree `t` means `X^i -> Y^{i+t}`.
#[derive(Clone, Debug)]
pub struct ChainMap<K: Field> {
    pub source: Complex<K>,
    pub target: Complex<K>,
    pub degree: i32,
    blocks: BTreeMap<i32, Matrix<K>>,
}

impl<K: Field> ChainMap<K> {
    pub fn new(
        source: Complex<K>,
        target: Complex<K>,
        degree: i32,
        blocks: BTreeMap<i32, Matrix<K>>,
    ) -> Result<Self> {
        for (&i, m) in &blocks {
            if m.cols() != source.dim(i) || m.rows() != target.dim(i + degree) {
                return Err(Error::Invariant(format!(
                    "chain map block at degree {i} has shape {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    target.dim(i + degree),
                    source.dim(i)
                )));
            }
        }
        Ok(ChainMap { source, target, degree, blocks })
    }

    pub fn zero(source: Complex<K>, target: Complex<K>, degree: i32) -> Self {
        ChainMap { source, target, degree, blocks: BTreeMap::new() }
    }

    pub fn identity(x: &Complex<K>) -> Self {
        let mut blocks = BTreeMap::new();
        for &i in x.degrees().iter() {
            blocks.insert(i, Matrix::identity(x.field.clone(), x.dim(i)));
        }
        ChainMap { source: x.clone(), target: x.clone(), degree: 0, blocks }
    }

    pub fn block(&self, i: i32) -> Matrix<K> {
        self.blocks.get(&i).cloned().unwrap_or_else(|| {
            Matrix::zeros(self.source.field.clone(), self.target.dim(i + self.degree), self.source.dim(i))
        })
    }

    pub fn set_block(&mut self, i: i32, m: Matrix<K>) {
        self.blocks.insert(i, m);
    }

    /// `d(f) = d_Y f - (-1)^t f d_X`; closed maps commute with differentials
    /// up to that sign.
    pub fn is_closed(&self) -> bool {
        let t = self.degree;
        let sign_neg = t.rem_euclid(2) == 1;
        let degs: std::collections::BTreeSet<i32> = self
            .source
            .degrees()
            .into_iter()
            .chain(self.blocks.keys().copied())
            .collect();
        for &i in &degs {
            let lhs = self.target.diff(i + t).mul(&self.block(i));
            let rhs = self.block(i + 1).mul(&self.source.diff(i));
            let rhs = if sign_neg { rhs.neg() } else { rhs };
            if lhs != rhs {
                return false;
            }
        }
        true
    }

    /// Mapping cone of a closed degree zero map.
    pub fn cone(&self) -> Result<Complex<K>> {
        if self.degree != 0 || !self.is_closed() {
            return Err(Error::Invariant("cone requires a closed degree 0 map".into()));
        }
        let k = self.source.field.clone();
        let x = &self.source;
        let y = &self.target;
        let mut comps = BTreeMap::new();
        let mut diffs = BTreeMap::new();
        let degrees: std::collections::BTreeSet<i32> = x
            .degrees()
            .iter()
            .map(|&i| i - 1)
            .chain(y.degrees())
            .collect();
        for &i in &degrees {
            let dim = x.dim(i + 1) + y.dim(i);
            if dim > 0 {
                comps.insert(i, dim);
            }
        }
        for &i in &degrees {
            let rows = x.dim(i + 2) + y.dim(i + 1);
            let cols = x.dim(i + 1) + y.dim(i);
            if rows == 0 || cols == 0 {
                continue;
            }
            let dx = x.diff(i + 1);
            let dy = y.diff(i);
            let f = self.block(i + 1);
            let m = Matrix::from_fn(k.clone(), rows, cols, |r, c| {
                let xr = r < x.dim(i + 2);
                let xc = c < x.dim(i + 1);
                match (xr, xc) {
                    (true, true) => k.neg(dx.get(r, c)),
                    (true, false) => k.zero(),
                    (false, true) => f.get(r - x.dim(i + 2), c).clone(),
                    (false, false) => dy.get(r - x.dim(i + 2), c - x.dim(i + 1)).clone(),
                }
            });
            diffs.insert(i, m);
        }
        Complex::new(k, comps, diffs)
    }

    pub fn cocone(&self) -> Result<Complex<K>> {
        Ok(self.cone()?.shift(-1))
    }

    /// The induced map on degree `i` cohomology, in the chosen bases.
    pub fn h_map(&self, i: i32) -> Matrix<K> {
        let hx = self.source.cohomology(i);
        let hy = self.target.cohomology(i + self.degree);
        if hx.dim == 0 || hy.dim == 0 {
            return Matrix::zeros(self.source.field.clone(), hy.dim, hx.dim);
        }
        hy.projector.mul(&self.block(i).mul(&hx.reps))
    }

    pub fn is_quasi_iso(&self) -> bool {
        let lo_hi = joint_support(&self.source, &self.target);
        match lo_hi {
            None => true,
            Some((lo, hi)) => self.is_quasi_iso_in_window(lo, hi),
        }
    }

    /// Quasi-isomorphism restricted to cohomological degrees `lo..=hi` of the
    /// source (compared against `lo+t..=hi+t` of the target).
    pub fn is_quasi_iso_in_window(&self, lo: i32, hi: i32) -> bool {
        for i in lo..=hi {
            let m = self.h_map(i);
            if m.rows() != m.cols() || m.rank() != m.rows() {
                return false;
            }
        }
        true
    }

    pub fn compose(&self, then: &ChainMap<K>) -> ChainMap<K> {
        let mut blocks = BTreeMap::new();
        for &i in self.source.degrees().iter() {
            let m = then.block(i + self.degree).mul(&self.block(i));
            blocks.insert(i, m);
        }
        ChainMap {
            source: self.source.clone(),
            target: then.target.clone(),
            degree: self.degree + then.degree,
            blocks,
        }
    }
}

fn joint_support<K: Field>(x: &Complex<K>, y: &Complex<K>) -> Option<(i32, i32)> {
    match (x.support(), y.support()) {
        (None, None) => None,
        (Some((a, b)), None) => Some((a - 1, b + 1)),
        (None, Some((a, b))) => Some((a - 1, b + 1)),
        (Some((a, b)), Some((c, d))) => Some((a.min(c) - 1, b.max(d) + 1)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rationals;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn q() -> Rationals {
        Rationals
    }

    fn cx(comps: &[(i32, usize)], diffs: Vec<(i32, Matrix<Rationals>)>) -> Complex<Rationals> {
        Complex::new(q(), comps.iter().copied().collect(), diffs.into_iter().collect()).unwrap()
    }

    fn two_term_id() -> Complex<Rationals> {
        // 0 -> k -> k -> 0 with identity differential, degrees 0 and 1
        cx(&[(0, 1), (1, 1)], vec![(0, Matrix::identity(q(), 1))])
    }

    #[test]
    fn acyclic_two_term() {
        let x = two_term_id();
        assert!(x.is_acyclic());
    }

    #[test]
    fn zero_differential_cohomology_is_component() {
        let x = cx(&[(-1, 2), (0, 3)], vec![]);
        assert_eq!(x.h_dim(-1), 2);
        assert_eq!(x.h_dim(0), 3);
    }

    #[test]
    fn d_squared_checked() {
        let bad = Complex::new(
            q(),
            [(0, 1), (1, 1), (2, 1)].into_iter().collect(),
            [(0, Matrix::identity(q(), 1)), (1, Matrix::identity(q(), 1))]
                .into_iter()
                .collect(),
        );
        assert!(bad.is_err());
    }

    #[test]
    fn shift_round_trip_and_h_shift() {
        let x = cx(&[(0, 2), (1, 1)], vec![(0, Matrix::from_i64_rows(q(), &[&[1, 0]]))]);
        assert_eq!(x.shift(0), x);
        assert_eq!(x.shift(1).shift(-1), x);
        for i in -2..3 {
            assert_eq!(x.shift(2).h_dim(i), x.h_dim(i + 2));
            assert_eq!(x.shift(-1).h_dim(i), x.h_dim(i - 1));
        }
    }

    #[test]
    fn cone_of_identity_acyclic() {
        let x = cx(&[(0, 2), (1, 1)], vec![(0, Matrix::from_i64_rows(q(), &[&[1, 2]]))]);
        let id = ChainMap::identity(&x);
        assert!(id.cone().unwrap().is_acyclic());
    }

    #[test]
    fn cone_of_zero_from_zero() {
        let y = cx(&[(0, 2)], vec![]);
        let zero = ChainMap::zero(Complex::zero(q()), y.clone(), 0);
        let cone = zero.cone().unwrap();
        assert_eq!(cone.h_dims(), y.h_dims());
    }

    fn random_complex(rng: &mut StdRng, lo: i32, len: usize, max_dim: usize) -> Complex<Rationals> {
        // build a valid complex as a cone-like twist: start from random
        // dims with zero differential, then add a random closed two-term
        // piece by taking direct sums of shifted identity complexes
        let mut x = Complex::zero(q());
        for _ in 0..len {
            let deg = lo + rng.gen_range(0..len as i32);
            let dim = rng.gen_range(0..=max_dim);
            for _ in 0..dim {
                if rng.gen_bool(0.5) {
                    x = x.direct_sum(&Complex::point(q(), deg));
                } else {
                    x = x.direct_sum(&two_term_id().shift(-deg));
                }
            }
        }
        x
    }

    fn random_closed_map(rng: &mut StdRng, x: &Complex<Rationals>, y: &Complex<Rationals>) -> ChainMap<Rationals> {
        // project a random degree 0 block map onto its closed part by
        // solving d_Y f = f d_X directly: here we simply generate f as
        // g + d h +/- h d for random g supported on cocycles. Easiest exact
        // route: random map on cohomology representatives.
        let mut f = ChainMap::zero(x.clone(), y.clone(), 0);
        let degs = x.degrees();
        for &i in &degs {
            let hx = x.cohomology(i);
            let hy = y.cohomology(i);
            if hx.dim == 0 || hy.dim == 0 || y.dim(i) == 0 {
                continue;
            }
            let rand_h = Matrix::from_fn(q(), hy.dim, hx.dim, |_, _| q().from_i64(rng.gen_range(-2..3)));
            // reps_Y . rand_h . proj_X, extended by zero off the kernel
            let block = hy.reps.mul(&rand_h).mul(&hx.projector);
            // zero out the non-kernel directions of the source: compose with
            // projection onto ker d^i along a complement
            let ker = x.diff(i).kernel_basis();
            if ker.cols() == 0 {
                continue;
            }
            // build projector onto ker coordinates
            let id = Matrix::identity(q(), x.dim(i));
            let compl = extend_basis(&ker, &id);
            let basis = ker.hstack(&compl);
            let inv = basis.inverse();
            let ker_proj = Matrix::from_fn(q(), ker.cols(), x.dim(i), |r, c| inv.get(r, c).clone());
            let onto_ker = ker.mul(&ker_proj);
            f.set_block(i, block.mul(&onto_ker));
        }
        assert!(f.is_closed());
        f
    }

    #[test]
    fn cone_long_exact_sequence_bookkeeping() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..12 {
            let x = random_complex(&mut rng, -2, 3, 2);
            let y = random_complex(&mut rng, -2, 3, 2);
            let f = random_closed_map(&mut rng, &x, &y);
            let cone = f.cone().unwrap();
            for i in -4..4 {
                let hf_i = f.h_map(i);
                let hf_next = f.h_map(i + 1);
                let coker = hf_i.rows() - hf_i.rank();
                let ker_next = hf_next.cols() - hf_next.rank();
                assert_eq!(
                    cone.h_dim(i),
                    coker + ker_next,
                    "LES failure at degree {i}"
                );
            }
        }
    }

    #[test]
    fn truncations_preserve_window_cohomology() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..10 {
            let x = random_complex(&mut rng, -3, 4, 2);
            let le = x.truncate_le(0);
            for i in -5..5 {
                if i <= 0 {
                    assert_eq!(le.h_dim(i), x.h_dim(i));
                } else {
                    assert_eq!(le.h_dim(i), 0);
                }
            }
            let gt = x.truncate_gt(-2);
            for i in -5..5 {
                if i > -2 {
                    assert_eq!(gt.h_dim(i), x.h_dim(i));
                } else {
                    assert_eq!(gt.h_dim(i), 0);
                }
            }
            // idempotence up to quasi-isomorphism: equal cohomology
            assert_eq!(gt.truncate_gt(-2).h_dims(), gt.h_dims());
        }
    }

    #[test]
    fn truncate_le_of_positive_point_is_zero() {
        let x = Complex::point(q(), 1);
        assert!(x.truncate_le(0).is_zero_object());
    }

    #[test]
    fn quasi_iso_examples() {
        let x = two_term_id();
        assert!(ChainMap::identity(&x).is_quasi_iso());
        let to_zero = ChainMap::zero(x.clone(), Complex::zero(q()), 0);
        assert!(to_zero.is_quasi_iso());

        // inclusion of ker d^0 into x for the truncation: a windowed quasi-iso
        let y = cx(&[(0, 1), (1, 1)], vec![(0, Matrix::identity(q(), 1))]);
        let tle = y.truncate_le(0); // zero object here, ker d^0 = 0
        assert!(tle.is_zero_object());
        let z = cx(&[(-1, 1), (0, 2)], vec![(-1, Matrix::from_i64_rows(q(), &[&[1], &[0]]))]);
        let zle = z.truncate_le(0);
        // build the inclusion ker d^0 -> z (degree 0 only here, plus lower degrees)
        let mut inc = ChainMap::zero(zle.clone(), z.clone(), 0);
        inc.set_block(-1, Matrix::identity(q(), 1));
        let ker = z.diff(0).kernel_basis();
        inc.set_block(0, ker);
        assert!(inc.is_closed());
        assert!(inc.is_quasi_iso_in_window(-3, 0));
    }

    #[test]
    fn cohomology_projector_contract() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..8 {
            let x = random_complex(&mut rng, -2, 3, 3);
            for i in -3..3 {
                let h = x.cohomology(i);
                assert_eq!(h.dim, x.h_dim(i));
                if h.dim > 0 {
                    assert_eq!(h.projector.mul(&h.reps), Matrix::identity(q(), h.dim));
                    let boundary = x.diff(i - 1);
                    assert!(h.projector.mul(&boundary).is_zero());
                }
            }
        }
    }
}
