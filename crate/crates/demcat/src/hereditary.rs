//! The bounded derived category of the linearly oriented A_n quiver, modeled
//! as bounded complexes of the indecomposable projectives P_1 .. P_n.
//!
//! `Hom(P_t, P_s)` is one dimensional exactly when `s <= t`, spanned by a
//! canonical generator; composition multiplies coefficients. Differentials
//! and chain maps are therefore plain coefficient matrices subject to the
//! label rule. Indecomposables of the module category are the intervals
//! `M[a,b]`, with `P_i = M[i,n]` and `I_i = M[1,i]`; the AR translate acts
//! on intervals by `M[a,b] |-> M[a+1,b+1]`.

use std::collections::BTreeMap;

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::Matrix;

/// An interval module `M[a,b]`, `1 <= a <= b <= n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    pub a: usize,
    pub b: usize,
}

impl Interval {
    pub fn new(a: usize, b: usize) -> Self {
        assert!(1 <= a && a <= b);
        Interval { a, b }
    }

    pub fn dim(&self) -> usize {
        self.b - self.a + 1
    }

    pub fn dim_vector(&self, n: usize) -> Vec<usize> {
        (1..=n).map(|v| usize::from(self.a <= v && v <= self.b)).collect()
    }

    pub fn is_projective(&self, n: usize) -> bool {
        self.b == n
    }

    pub fn is_injective(&self) -> bool {
        self.a == 1
    }

    /// AR translate on non-projectives.
    pub fn tau(&self, n: usize) -> Option<Interval> {
        (self.b < n).then(|| Interval::new(self.a + 1, self.b + 1))
    }

    /// Inverse AR translate on non-injectives.
    pub fn tau_inv(&self) -> Option<Interval> {
        (self.a > 1).then(|| Interval::new(self.a - 1, self.b - 1))
    }
}

/// An object of `D^b(kA_n)`: a bounded complex of projectives. Each level
/// stores the multiset of projective labels; differential entries are the
/// coefficients of the canonical generators and must vanish unless
/// `row label <= column label`.
#[derive(Clone, PartialEq)]
pub struct ProjComplex<K: Field> {
    pub field: K,
    pub n: usize,
    terms: BTreeMap<i32, Vec<usize>>,
    diffs: BTreeMap<i32, Matrix<K>>,
}

impl<K: Field> std::fmt::Debug for ProjComplex<K> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ProjComplex{{")?;
        for (i, labels) in &self.terms {
            write!(f, " {i}:{labels:?}")?;
        }
        write!(f, " }}")
    }
}

impl<K: Field> ProjComplex<K> {
    pub fn new(
        field: K,
        n: usize,
        terms: BTreeMap<i32, Vec<usize>>,
        diffs: BTreeMap<i32, Matrix<K>>,
    ) -> Result<Self> {
        let terms: BTreeMap<i32, Vec<usize>> = terms.into_iter().filter(|(_, l)| !l.is_empty()).collect();
        for labels in terms.values() {
            for &l in labels {
                if l < 1 || l > n {
                    return Err(Error::Invariant(format!("projective label {l} out of range")));
                }
            }
        }
        let cx = ProjComplex { field, n, terms, diffs: BTreeMap::new() };
        let mut out = cx;
        for (&i, m) in &diffs {
            out.check_block(i, m)?;
        }
        out.diffs = diffs
            .into_iter()
            .filter(|(_, m)| m.rows() > 0 && m.cols() > 0)
            .collect();
        for &i in out.terms.keys() {
            if !out.diff(i + 1).mul(&out.diff(i)).is_zero() {
                return Err(Error::Invariant(format!("d^2 != 0 at level {i}")));
            }
        }
        Ok(out)
    }

    fn check_block(&self, i: i32, m: &Matrix<K>) -> Result<()> {
        let rows = self.labels(i + 1);
        let cols = self.labels(i);
        if m.rows() != rows.len() || m.cols() != cols.len() {
            return Err(Error::Invariant(format!(
                "differential at level {i} has shape {}x{}, expected {}x{}",
                m.rows(),
                m.cols(),
                rows.len(),
                cols.len()
            )));
        }
        for (r, &lr) in rows.iter().enumerate() {
            for (c, &lc) in cols.iter().enumerate() {
                if lr > lc && !self.field.is_zero(m.get(r, c)) {
                    return Err(Error::Invariant(format!(
                        "illegal map P_{lc} -> P_{lr} at level {i}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn zero(field: K, n: usize) -> Self {
        ProjComplex { field, n, terms: BTreeMap::new(), diffs: BTreeMap::new() }
    }

    /// The stalk complex of `P_label` in degree 0.
    pub fn projective(field: K, n: usize, label: usize) -> Self {
        assert!(1 <= label && label <= n);
        let mut terms = BTreeMap::new();
        terms.insert(0, vec![label]);
        ProjComplex { field, n, terms, diffs: BTreeMap::new() }
    }

    /// Minimal complex of the interval module `M[a,b]` in degree 0:
    /// `P_{b+1} -> P_a` for `b < n`, the stalk `P_a` otherwise.
    pub fn interval(field: K, n: usize, iv: Interval) -> Self {
        assert!(iv.b <= n);
        if iv.b == n {
            return Self::projective(field, n, iv.a);
        }
        let mut terms = BTreeMap::new();
        terms.insert(-1, vec![iv.b + 1]);
        terms.insert(0, vec![iv.a]);
        let mut diffs = BTreeMap::new();
        diffs.insert(-1, Matrix::identity(field.clone(), 1));
        ProjComplex { field, n, terms, diffs }
    }

    pub fn labels(&self, i: i32) -> Vec<usize> {
        self.terms.get(&i).cloned().unwrap_or_default()
    }

    pub fn rank_at(&self, i: i32) -> usize {
        self.terms.get(&i).map_or(0, |l| l.len())
    }

    pub fn diff(&self, i: i32) -> Matrix<K> {
        self.diffs
            .get(&i)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.field.clone(), self.rank_at(i + 1), self.rank_at(i)))
    }

    pub fn is_zero_object(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support(&self) -> Option<(i32, i32)> {
        let min = *self.terms.keys().next()?;
        let max = *self.terms.keys().last()?;
        Some((min, max))
    }

    pub fn total_rank(&self) -> usize {
        self.terms.values().map(|l| l.len()).sum()
    }

    pub fn shift(&self, k: i32) -> Self {
        let mut terms = BTreeMap::new();
        for (&i, l) in &self.terms {
            terms.insert(i - k, l.clone());
        }
        let mut diffs = BTreeMap::new();
        for (&i, m) in &self.diffs {
            diffs.insert(i - k, if k.rem_euclid(2) == 0 { m.clone() } else { m.neg() });
        }
        ProjComplex { field: self.field.clone(), n: self.n, terms, diffs }
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut terms = BTreeMap::new();
        let degrees: std::collections::BTreeSet<i32> =
            self.terms.keys().chain(other.terms.keys()).copied().collect();
        for &i in &degrees {
            let mut l = self.labels(i);
            l.extend(other.labels(i));
            if !l.is_empty() {
                terms.insert(i, l);
            }
        }
        let mut diffs = BTreeMap::new();
        for &i in &degrees {
            let (a, b) = (self.diff(i), other.diff(i));
            let rows = self.rank_at(i + 1) + other.rank_at(i + 1);
            let cols = self.rank_at(i) + other.rank_at(i);
            if rows == 0 || cols == 0 {
                continue;
            }
            let m = Matrix::from_fn(self.field.clone(), rows, cols, |r, c| {
                let ar = r < self.rank_at(i + 1);
                let ac = c < self.rank_at(i);
                match (ar, ac) {
                    (true, true) => a.get(r, c).clone(),
                    (false, false) => b.get(r - self.rank_at(i + 1), c - self.rank_at(i)).clone(),
                    _ => self.field.zero(),
                }
            });
            diffs.insert(i, m);
        }
        ProjComplex { field: self.field.clone(), n: self.n, terms, diffs }
    }

    /// Evaluates the complex at vertex `v`: the complex of vector spaces
    /// spanned by the slots with label `<= v`, plus the slot index maps.
    fn at_vertex(&self, v: usize) -> (Complex<K>, BTreeMap<i32, Vec<usize>>) {
        let mut comps = BTreeMap::new();
        let mut slots: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
        for (&i, labels) in &self.terms {
            let idx: Vec<usize> = (0..labels.len()).filter(|&s| labels[s] <= v).collect();
            if !idx.is_empty() {
                comps.insert(i, idx.len());
                slots.insert(i, idx);
            }
        }
        let mut diffs = BTreeMap::new();
        for (&i, m) in &self.diffs {
            let empty = Vec::new();
            let rs = slots.get(&(i + 1)).unwrap_or(&empty);
            let cs = slots.get(&i).unwrap_or(&empty);
            if rs.is_empty() || cs.is_empty() {
                continue;
            }
            diffs.insert(
                i,
                Matrix::from_fn(self.field.clone(), rs.len(), cs.len(), |r, c| m.get(rs[r], cs[c]).clone()),
            );
        }
        (
            Complex::new(self.field.clone(), comps, diffs).expect("vertex evaluation of a complex"),
            slots,
        )
    }

    /// Cohomology dimension vectors: degree -> per-vertex dims.
    pub fn h_dim_vectors(&self) -> BTreeMap<i32, Vec<usize>> {
        let mut out: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
        let Some((lo, hi)) = self.support() else { return out };
        for v in 1..=self.n {
            let (cx, _) = self.at_vertex(v);
            for i in lo..=hi {
                let d = cx.h_dim(i);
                out.entry(i).or_insert_with(|| vec![0; self.n])[v - 1] = d;
            }
        }
        out.retain(|_, dims| dims.iter().any(|&d| d > 0));
        out
    }

    /// Decomposition into shifted interval modules, using the hereditary
    /// formality `X ~ (+)_i H^i(X)[-i]`. The entry `((a,b), k)` stands for a
    /// summand `M[a,b]` placed via `.shift(k)`, i.e. concentrated in
    /// cohomological degree `-k`.
    pub fn decompose(&self) -> Vec<(Interval, i32)> {
        let Some((lo, hi)) = self.support() else { return vec![] };
        let mut parts: Vec<(Interval, i32)> = Vec::new();
        // cohomology of each vertex evaluation, with the induced maps of the
        // slot inclusions C_v -> C_{v+1}
        let data: Vec<(Complex<K>, BTreeMap<i32, Vec<usize>>)> =
            (1..=self.n).map(|v| self.at_vertex(v)).collect();
        for i in lo..=hi {
            let hs: Vec<crate::complex::Cohomology<K>> =
                data.iter().map(|(cx, _)| cx.cohomology(i)).collect();
            // arrow maps H^i(C_v) -> H^i(C_{v+1})
            let mut arrows: Vec<Matrix<K>> = Vec::new();
            for v in 1..self.n {
                let (src_h, tgt_h) = (&hs[v - 1], &hs[v]);
                if src_h.dim == 0 || tgt_h.dim == 0 {
                    arrows.push(Matrix::zeros(self.field.clone(), tgt_h.dim, src_h.dim));
                    continue;
                }
                let empty = Vec::new();
                let src_slots = data[v - 1].1.get(&i).unwrap_or(&empty);
                let tgt_slots = data[v].1.get(&i).unwrap_or(&empty);
                let inc = Matrix::from_fn(
                    self.field.clone(),
                    tgt_slots.len(),
                    src_slots.len(),
                    |r, c| {
                        if tgt_slots[r] == src_slots[c] {
                            self.field.one()
                        } else {
                            self.field.zero()
                        }
                    },
                );
                arrows.push(tgt_h.projector.mul(&inc.mul(&src_h.reps)));
            }
            // rank of the composite map vertex a -> vertex b (1-based)
            let rank_path = |a: usize, b: usize| -> usize {
                if a < 1 || b > self.n || a > b {
                    return 0;
                }
                if a == b {
                    return hs[a - 1].dim;
                }
                let mut m = arrows[a - 1].clone();
                for v in a + 1..b {
                    m = arrows[v - 1].mul(&m);
                }
                m.rank()
            };
            for a in 1..=self.n {
                for b in a..=self.n {
                    let m = rank_path(a, b) + rank_path(a - 1, b + 1)
                        - rank_path(a - 1, b)
                        - rank_path(a, b + 1);
                    for _ in 0..m {
                        parts.push((Interval::new(a, b), -i));
                    }
                }
            }
        }
        parts.sort();
        parts
    }

    /// Isomorphism in the derived category, via decomposition multisets.
    pub fn isomorphic(&self, other: &Self) -> bool {
        self.decompose() == other.decompose()
    }

    /// Gaussian cancellation of invertible differential entries, keeping the
    /// homotopy equivalence data: returns `(min, r, s)` with `r: X -> min`,
    /// `s: min -> X`, `r . s = id`.
    pub fn minimize_with_maps(&self) -> (Self, ProjMap<K>, ProjMap<K>) {
        let k = self.field.clone();
        let mut x = self.clone();
        let mut r_total = ProjMap::identity(&x);
        let mut s_total = ProjMap::identity(&x);
        loop {
            let mut found = None;
            'scan: for (&i, m) in &x.diffs {
                let rows = x.labels(i + 1);
                let cols = x.labels(i);
                for (rr, &lr) in rows.iter().enumerate() {
                    for (cc, &lc) in cols.iter().enumerate() {
                        if lr == lc && !k.is_zero(m.get(rr, cc)) {
                            found = Some((i, rr, cc));
                            break 'scan;
                        }
                    }
                }
            }
            let Some((i, r0, c0)) = found else { break };
            let (xn, r_step, s_step) = cancel_pair(&x, i, r0, c0);
            r_total = r_total.compose(&r_step);
            s_total = s_step.compose(&s_total);
            x = xn;
        }
        (x, r_total, s_total)
    }

    pub fn minimize(&self) -> Self {
        self.minimize_with_maps().0
    }
}

/// One cancellation of an invertible entry `e` at `(level i, row r0, col c0)`.
fn cancel_pair<K: Field>(x: &ProjComplex<K>, i: i32, r0: usize, c0: usize) -> (ProjComplex<K>, ProjMap<K>, ProjMap<K>) {
    let k = x.field.clone();
    let d = x.diff(i);
    let e = d.get(r0, c0).clone();
    let e_inv = k.inv(&e);
    let keep = |labels: &[usize], skip: usize| -> Vec<usize> {
        labels
            .iter()
            .enumerate()
            .filter(|&(idx, _)| idx != skip)
            .map(|(_, &l)| l)
            .collect()
    };
    let mut terms = x.terms.clone();
    terms.insert(i, keep(&x.labels(i), c0));
    terms.insert(i + 1, keep(&x.labels(i + 1), r0));
    terms.retain(|_, l| !l.is_empty());

    let rows_rest: Vec<usize> = (0..x.rank_at(i + 1)).filter(|&r| r != r0).collect();
    let cols_rest: Vec<usize> = (0..x.rank_at(i)).filter(|&c| c != c0).collect();
    let mut diffs = x.diffs.clone();
    // corrected middle differential: D - B e^{-1} C
    let mid = Matrix::from_fn(k.clone(), rows_rest.len(), cols_rest.len(), |r, c| {
        let (rr, cc) = (rows_rest[r], cols_rest[c]);
        k.sub(
            d.get(rr, cc),
            &k.mul(&k.mul(d.get(rr, c0), &e_inv), d.get(r0, cc)),
        )
    });
    diffs.insert(i, mid);
    // drop the removed row / column from the adjacent differentials
    if let Some(prev) = x.diffs.get(&(i - 1)) {
        diffs.insert(
            i - 1,
            Matrix::from_fn(k.clone(), cols_rest.len(), prev.cols(), |r, c| prev.get(cols_rest[r], c).clone()),
        );
    }
    if let Some(next) = x.diffs.get(&(i + 1)) {
        diffs.insert(
            i + 1,
            Matrix::from_fn(k.clone(), next.rows(), rows_rest.len(), |r, c| next.get(r, rows_rest[c]).clone()),
        );
    }
    diffs.retain(|_, m| m.rows() > 0 && m.cols() > 0);
    let xn = ProjComplex { field: k.clone(), n: x.n, terms, diffs };
    debug_assert!({
        let check = ProjComplex::new(k.clone(), x.n, xn.terms.clone(), xn.diffs.clone());
        check.is_ok()
    });

    // r: X -> X', projection at level i, corrected projection at level i+1
    let mut r = ProjMap::zero(x.clone(), xn.clone(), 0);
    for (&lvl, labels) in &x.terms {
        let m = if lvl == i {
            Matrix::from_fn(k.clone(), cols_rest.len(), labels.len(), |r_, c| {
                if cols_rest[r_] == c { k.one() } else { k.zero() }
            })
        } else if lvl == i + 1 {
            Matrix::from_fn(k.clone(), rows_rest.len(), labels.len(), |r_, c| {
                if rows_rest[r_] == c {
                    k.one()
                } else if c == r0 {
                    k.neg(&k.mul(&k.mul(d.get(rows_rest[r_], c0), &e_inv), &k.one()))
                } else {
                    k.zero()
                }
            })
        } else {
            Matrix::identity(k.clone(), labels.len())
        };
        r.blocks.insert(lvl, m);
    }
    // s: X' -> X, inclusion at level i+1, corrected at level i
    let mut s = ProjMap::zero(xn.clone(), x.clone(), 0);
    for (&lvl, labels) in &xn.terms {
        let m = if lvl == i {
            Matrix::from_fn(k.clone(), x.rank_at(i), labels.len(), |r_, c| {
                if r_ == c0 {
                    k.neg(&k.mul(&e_inv, d.get(r0, cols_rest[c])))
                } else if r_ == cols_rest[c] {
                    k.one()
                } else {
                    k.zero()
                }
            })
        } else if lvl == i + 1 {
            Matrix::from_fn(k.clone(), x.rank_at(i + 1), labels.len(), |r_, c| {
                if r_ == rows_rest[c] { k.one() } else { k.zero() }
            })
        } else {
            Matrix::identity(k.clone(), labels.len())
        };
        s.blocks.insert(lvl, m);
    }
    (xn, r, s)
}

/// A block map of complexes of projectives, `X^i -> Y^{i + degree}`.
#[derive(Clone, Debug)]
pub struct ProjMap<K: Field> {
    pub source: ProjComplex<K>,
    pub target: ProjComplex<K>,
    pub degree: i32,
    pub(crate) blocks: BTreeMap<i32, Matrix<K>>,
}

impl<K: Field> ProjMap<K> {
    pub fn zero(source: ProjComplex<K>, target: ProjComplex<K>, degree: i32) -> Self {
        ProjMap { source, target, degree, blocks: BTreeMap::new() }
    }

    pub fn identity(x: &ProjComplex<K>) -> Self {
        let mut blocks = BTreeMap::new();
        for (&i, labels) in &x.terms {
            blocks.insert(i, Matrix::identity(x.field.clone(), labels.len()));
        }
        ProjMap { source: x.clone(), target: x.clone(), degree: 0, blocks }
    }

    pub fn block(&self, i: i32) -> Matrix<K> {
        self.blocks.get(&i).cloned().unwrap_or_else(|| {
            Matrix::zeros(
                self.source.field.clone(),
                self.target.rank_at(i + self.degree),
                self.source.rank_at(i),
            )
        })
    }

    pub fn set_block(&mut self, i: i32, m: Matrix<K>) {
        self.blocks.insert(i, m);
    }

    pub fn is_closed(&self) -> bool {
        let t = self.degree;
        let neg = t.rem_euclid(2) == 1;
        let degs: std::collections::BTreeSet<i32> = self
            .source
            .terms
            .keys()
            .copied()
            .chain(self.blocks.keys().copied())
            .collect();
        for &i in &degs {
            let lhs = self.target.diff(i + t).mul(&self.block(i));
            let rhs = self.block(i + 1).mul(&self.source.diff(i));
            let rhs = if neg { rhs.neg() } else { rhs };
            if lhs != rhs {
                return false;
            }
        }
        true
    }

    pub fn compose(&self, then: &ProjMap<K>) -> ProjMap<K> {
        let mut blocks = BTreeMap::new();
        for &i in self.source.terms.keys() {
            blocks.insert(i, then.block(i + self.degree).mul(&self.block(i)));
        }
        ProjMap {
            source: self.source.clone(),
            target: then.target.clone(),
            degree: self.degree + then.degree,
            blocks,
        }
    }

    pub fn add(&self, other: &ProjMap<K>) -> ProjMap<K> {
        let mut out = self.clone();
        for &i in other.blocks.keys() {
            out.set_block(i, self.block(i).add(&other.block(i)));
        }
        out
    }

    pub fn scale(&self, c: &K::Elem) -> ProjMap<K> {
        let mut out = self.clone();
        for m in out.blocks.values_mut() {
            *m = m.scale(c);
        }
        out
    }

    /// Shift the map literally: same blocks, reindexed.
    pub fn shift(&self, k: i32) -> ProjMap<K> {
        let mut blocks = BTreeMap::new();
        for (&i, m) in &self.blocks {
            blocks.insert(i - k, m.clone());
        }
        ProjMap {
            source: self.source.shift(k),
            target: self.target.shift(k),
            degree: self.degree,
            blocks,
        }
    }

    /// Mapping cone of a closed degree 0 map: `X^{i+1} (+) Y^i` with
    /// differential `(x,y) |-> (-dx, fx + dy)`.
    pub fn cone(&self) -> Result<ProjComplex<K>> {
        if self.degree != 0 || !self.is_closed() {
            return Err(Error::Invariant("cone requires a closed degree 0 map".into()));
        }
        let k = self.source.field.clone();
        let (x, y) = (&self.source, &self.target);
        let mut terms = BTreeMap::new();
        let degrees: std::collections::BTreeSet<i32> = x
            .terms
            .keys()
            .map(|&i| i - 1)
            .chain(y.terms.keys().copied())
            .collect();
        for &i in &degrees {
            let mut l = x.labels(i + 1);
            l.extend(y.labels(i));
            if !l.is_empty() {
                terms.insert(i, l);
            }
        }
        let mut diffs = BTreeMap::new();
        for &i in &degrees {
            let rows = x.rank_at(i + 2) + y.rank_at(i + 1);
            let cols = x.rank_at(i + 1) + y.rank_at(i);
            if rows == 0 || cols == 0 {
                continue;
            }
            let dx = x.diff(i + 1);
            let dy = y.diff(i);
            let f = self.block(i + 1);
            let m = Matrix::from_fn(k.clone(), rows, cols, |r, c| {
                let xr = r < x.rank_at(i + 2);
                let xc = c < x.rank_at(i + 1);
                match (xr, xc) {
                    (true, true) => k.neg(dx.get(r, c)),
                    (true, false) => k.zero(),
                    (false, true) => f.get(r - x.rank_at(i + 2), c).clone(),
                    (false, false) => dy.get(r - x.rank_at(i + 2), c - x.rank_at(i + 1)).clone(),
                }
            });
            diffs.insert(i, m);
        }
        ProjComplex::new(k, x.n, terms, diffs)
    }

    pub fn cocone(&self) -> Result<ProjComplex<K>> {
        Ok(self.cone()?.shift(-1))
    }
}

/// The graded hom space of two complexes of projectives: the hom complex as
/// a `Complex`, together with the unit basis `(level, source slot, target
/// slot)` per hom degree.
pub struct HomComplex<K: Field> {
    pub cx: Complex<K>,
    pub units: BTreeMap<i32, Vec<(i32, usize, usize)>>,
}

pub fn hom_complex<K: Field>(x: &ProjComplex<K>, y: &ProjComplex<K>) -> HomComplex<K> {
    let k = x.field.clone();
    let mut units: BTreeMap<i32, Vec<(i32, usize, usize)>> = BTreeMap::new();
    for (&i, xl) in &x.terms {
        for (&j, yl) in &y.terms {
            let t = j - i;
            for (xs, &lx) in xl.iter().enumerate() {
                for (ys, &ly) in yl.iter().enumerate() {
                    if ly <= lx {
                        units.entry(t).or_default().push((i, xs, ys));
                    }
                }
            }
        }
    }
    let comps: BTreeMap<i32, usize> = units.iter().map(|(&t, u)| (t, u.len())).collect();
    let mut diffs = BTreeMap::new();
    for (&t, basis) in &units {
        let empty = Vec::new();
        let target = units.get(&(t + 1)).unwrap_or(&empty);
        if target.is_empty() {
            continue;
        }
        let mut m = Matrix::zeros(k.clone(), target.len(), basis.len());
        let neg = t.rem_euclid(2) == 1;
        for (col, &(i, xs, ys)) in basis.iter().enumerate() {
            // d_Y . f
            let dy = y.diff(i + t);
            for r in 0..y.rank_at(i + t + 1) {
                if k.is_zero(dy.get(r, ys)) {
                    continue;
                }
                if let Some(row) = target.iter().position(|&u| u == (i, xs, r)) {
                    let v = k.add(m.get(row, col), dy.get(r, ys));
                    m.set(row, col, v);
                }
            }
            // -(-1)^t f . d_X
            let dx = x.diff(i - 1);
            for c in 0..x.rank_at(i - 1) {
                if k.is_zero(dx.get(xs, c)) {
                    continue;
                }
                if let Some(row) = target.iter().position(|&u| u == (i - 1, c, ys)) {
                    let mut v = dx.get(xs, c).clone();
                    if !neg {
                        v = k.neg(&v);
                    }
                    let v = k.add(m.get(row, col), &v);
                    m.set(row, col, v);
                }
            }
        }
        diffs.insert(t, m);
    }
    HomComplex {
        cx: Complex::new(k, comps, diffs).expect("hom complex differential squares to zero"),
        units,
    }
}

impl<K: Field> HomComplex<K> {
    /// Chain maps of degree `t` modulo homotopy: dimension and a basis of
    /// representatives as coordinate vectors over the units.
    pub fn classes(&self, t: i32) -> (usize, Vec<Vec<K::Elem>>) {
        let h = self.cx.cohomology(t);
        (h.dim, (0..h.dim).map(|c| h.reps.column(c)).collect())
    }

    /// Coordinates of a closed degree `t` map in the `H^t` basis.
    pub fn project(&self, f: &ProjMap<K>) -> Vec<K::Elem> {
        let t = f.degree;
        let h = self.cx.cohomology(t);
        let v = self.to_coords(f);
        h.projector.apply(&v)
    }

    pub fn to_coords(&self, f: &ProjMap<K>) -> Vec<K::Elem> {
        let t = f.degree;
        let empty = Vec::new();
        let basis = self.units.get(&t).unwrap_or(&empty);
        basis
            .iter()
            .map(|&(i, xs, ys)| f.block(i).get(ys, xs).clone())
            .collect()
    }

    pub fn from_coords(
        &self,
        x: &ProjComplex<K>,
        y: &ProjComplex<K>,
        t: i32,
        coords: &[K::Elem],
    ) -> ProjMap<K> {
        let empty = Vec::new();
        let basis = self.units.get(&t).unwrap_or(&empty);
        assert_eq!(basis.len(), coords.len());
        let mut f = ProjMap::zero(x.clone(), y.clone(), t);
        for (u, c) in basis.iter().zip(coords.iter()) {
            if x.field.is_zero(c) {
                continue;
            }
            let &(i, xs, ys) = u;
            let mut m = f.block(i);
            let v = x.field.add(m.get(ys, xs), c);
            m.set(ys, xs, v);
            f.set_block(i, m);
        }
        f
    }

    pub fn h_dim(&self, t: i32) -> usize {
        self.cx.h_dim(t)
    }
}

/// Raw Nakayama functor on objects: substitute each `P_j` by the projective
/// resolution of the injective `I_j` and totalize. Column verticals carry
/// the sign `(-1)^column`.
pub fn nu_raw<K: Field>(x: &ProjComplex<K>) -> ProjComplex<K> {
    nu_like(x, NuDirection::Nakayama)
}

/// Raw inverse Nakayama functor on objects.
pub fn nu_inv_raw<K: Field>(x: &ProjComplex<K>) -> ProjComplex<K> {
    nu_like(x, NuDirection::Inverse)
}

#[derive(Clone, Copy, PartialEq)]
enum NuDirection {
    Nakayama,
    Inverse,
}

/// Output slot bookkeeping for the nu functors: per input slot `(level i,
/// index s, label j)` the image has a main slot and possibly a satellite
/// slot one level off.
struct NuSlots {
    n: usize,
    dir: NuDirection,
}

impl NuSlots {
    fn main_label(&self, _j: usize) -> usize {
        match self.dir {
            NuDirection::Nakayama => 1,
            NuDirection::Inverse => self.n,
        }
    }

    /// Satellite (label, level offset) if present.
    fn satellite(&self, j: usize) -> Option<(usize, i32)> {
        match self.dir {
            NuDirection::Nakayama => (j < self.n).then(|| (j + 1, -1)),
            NuDirection::Inverse => (j >= 2).then(|| (j - 1, 1)),
        }
    }

    /// Transformed entry `c . p_{s,t}` between satellites.
    fn satellite_entry(&self, s: usize, t: usize) -> Option<(usize, usize)> {
        match self.dir {
            NuDirection::Nakayama => (s < self.n && t < self.n).then(|| (s + 1, t + 1)),
            NuDirection::Inverse => (s >= 2 && t >= 2).then(|| (s - 1, t - 1)),
        }
    }
}

fn nu_like<K: Field>(x: &ProjComplex<K>, dir: NuDirection) -> ProjComplex<K> {
    let k = x.field.clone();
    let slots = NuSlots { n: x.n, dir };
    // output slot lists: (level, vec of (kind, input level, input index, label))
    // kind 0 = main, 1 = satellite. Order: mains of column `level`, then
    // satellites of the column `level - offset`.
    let mut terms: BTreeMap<i32, Vec<(u8, i32, usize, usize)>> = BTreeMap::new();
    for (&i, labels) in &x.terms {
        for (s, &j) in labels.iter().enumerate() {
            terms.entry(i).or_default().push((0, i, s, slots.main_label(j)));
            if let Some((lab, off)) = slots.satellite(j) {
                terms.entry(i + off).or_default().push((1, i, s, lab));
            }
        }
    }
    for v in terms.values_mut() {
        v.sort_by_key(|&(kind, i, s, _)| (kind, i, s));
    }
    let labels_out: BTreeMap<i32, Vec<usize>> = terms
        .iter()
        .map(|(&l, v)| (l, v.iter().map(|&(_, _, _, lab)| lab).collect()))
        .collect();
    let find = |lvl: i32, kind: u8, i: i32, s: usize| -> Option<usize> {
        terms.get(&lvl)?.iter().position(|&(k2, i2, s2, _)| (k2, i2, s2) == (kind, i, s))
    };
    let mut diffs: BTreeMap<i32, Matrix<K>> = BTreeMap::new();
    let add_entry = |diffs: &mut BTreeMap<i32, Matrix<K>>, lvl: i32, row: usize, col: usize, v: K::Elem| {
        let rows = labels_out.get(&(lvl + 1)).map_or(0, |l| l.len());
        let cols = labels_out.get(&lvl).map_or(0, |l| l.len());
        let m = diffs.entry(lvl).or_insert_with(|| Matrix::zeros(k.clone(), rows, cols));
        let newv = k.add(m.get(row, col), &v);
        m.set(row, col, newv);
    };
    // verticals: within the column of input slot (i, s), sign (-1)^i
    for (&i, labels) in &x.terms {
        let sign = if i.rem_euclid(2) == 0 { k.one() } else { k.neg(&k.one()) };
        for (s, &j) in labels.iter().enumerate() {
            if slots.satellite(j).is_none() {
                continue;
            }
            match dir {
                // satellite at level i-1 maps to main at level i
                NuDirection::Nakayama => {
                    let col = find(i - 1, 1, i, s).unwrap();
                    let row = find(i, 0, i, s).unwrap();
                    add_entry(&mut diffs, i - 1, row, col, sign.clone());
                }
                // main at level i maps to satellite at level i+1
                NuDirection::Inverse => {
                    let col = find(i, 0, i, s).unwrap();
                    let row = find(i + 1, 1, i, s).unwrap();
                    add_entry(&mut diffs, i, row, col, sign.clone());
                }
            }
        }
    }
    // horizontals: each input entry c: (i, cs, t) -> (i+1, rs, s)
    for (&i, m) in &x.diffs {
        let cols_l = x.labels(i);
        let rows_l = x.labels(i + 1);
        for (rs, &ls) in rows_l.iter().enumerate() {
            for (cs, &lt) in cols_l.iter().enumerate() {
                let c = m.get(rs, cs);
                if k.is_zero(c) {
                    continue;
                }
                // main -> main at the same relative position
                let col = find(i, 0, i, cs).unwrap();
                let row = find(i + 1, 0, i + 1, rs).unwrap();
                add_entry(&mut diffs, i, row, col, c.clone());
                // satellite -> satellite if both exist
                if slots.satellite_entry(ls, lt).is_some() {
                    let off = slots.satellite(lt).unwrap().1;
                    let col = find(i + off, 1, i, cs).unwrap();
                    let row = find(i + 1 + off, 1, i + 1, rs).unwrap();
                    add_entry(&mut diffs, i + off, row, col, c.clone());
                }
            }
        }
    }
    ProjComplex::new(k, x.n, labels_out, diffs).expect("nu of a complex is a complex")
}

/// The nu functors on block maps (closed degree 0 maps stay closed).
pub fn nu_map_raw<K: Field>(f: &ProjMap<K>, dir_nakayama: bool) -> ProjMap<K> {
    let dir = if dir_nakayama { NuDirection::Nakayama } else { NuDirection::Inverse };
    let k = f.source.field.clone();
    let src = nu_like(&f.source, dir);
    let tgt = nu_like(&f.target, dir);
    let slots = NuSlots { n: f.source.n, dir };
    // rebuild the slot tables to locate indices
    let table = |x: &ProjComplex<K>| -> BTreeMap<i32, Vec<(u8, i32, usize, usize)>> {
        let mut t: BTreeMap<i32, Vec<(u8, i32, usize, usize)>> = BTreeMap::new();
        for (&i, labels) in &x.terms {
            for (s, &j) in labels.iter().enumerate() {
                t.entry(i).or_default().push((0, i, s, slots.main_label(j)));
                if let Some((lab, off)) = slots.satellite(j) {
                    t.entry(i + off).or_default().push((1, i, s, lab));
                }
            }
        }
        for v in t.values_mut() {
            v.sort_by_key(|&(kind, i, s, _)| (kind, i, s));
        }
        t
    };
    let ts = table(&f.source);
    let tt = table(&f.target);
    let find = |t: &BTreeMap<i32, Vec<(u8, i32, usize, usize)>>, lvl: i32, kind: u8, i: i32, s: usize| -> Option<usize> {
        t.get(&lvl)?.iter().position(|&(k2, i2, s2, _)| (k2, i2, s2) == (kind, i, s))
    };
    let deg = f.degree;
    let mut out = ProjMap::zero(src.clone(), tgt.clone(), deg);
    let add = |out: &mut ProjMap<K>, lvl: i32, row: usize, col: usize, v: K::Elem| {
        let mut m = out.block(lvl);
        let nv = k.add(m.get(row, col), &v);
        m.set(row, col, nv);
        out.set_block(lvl, m);
    };
    for (&i, m) in &f.blocks {
        let cols_l = f.source.labels(i);
        let rows_l = f.target.labels(i + deg);
        for (rs, &ls) in rows_l.iter().enumerate() {
            for (cs, &lt) in cols_l.iter().enumerate() {
                let c = m.get(rs, cs);
                if k.is_zero(c) {
                    continue;
                }
                let col = find(&ts, i, 0, i, cs).unwrap();
                let row = find(&tt, i + deg, 0, i + deg, rs).unwrap();
                add(&mut out, i, row, col, c.clone());
                if slots.satellite_entry(ls, lt).is_some() {
                    let off = slots.satellite(lt).unwrap().1;
                    let col = find(&ts, i + off, 1, i, cs).unwrap();
                    let row = find(&tt, i + deg + off, 1, i + deg, rs).unwrap();
                    add(&mut out, i + off, row, col, c.clone());
                }
            }
        }
    }
    out
}

/// Nakayama functor with minimization: the Serre functor of `D^b(kA_n)`.
pub fn nakayama<K: Field>(x: &ProjComplex<K>) -> ProjComplex<K> {
    nu_raw(x).minimize()
}

pub fn nakayama_inverse<K: Field>(x: &ProjComplex<K>) -> ProjComplex<K> {
    nu_inv_raw(x).minimize()
}

/// AR translate `tau = nu . [-1]` on objects.
pub fn tau_object<K: Field>(x: &ProjComplex<K>) -> ProjComplex<K> {
    nakayama(x).shift(-1)
}
