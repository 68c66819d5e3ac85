//! The d-extended module category of a finite dimensional d-truncated
//! connective graded algebra: DG-modules, semi-free resolutions, windowed
//! derived homs, kernels and cokernels of 3-term data, loop and suspension
//! functors, n-mono/n-epi predicates, projective presentations, d-iterated
//! kernels and cokernels, and duality probes.
//!
//! Modules are right modules; the action of a basis element `a` maps
//! `M e_{tgt(a)} -> M e_{src(a)}` in degree `|a|`, and `m.(xy) = (m.x).y`
//! for the composition product `xy` (`y` applied first).

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::{extend_basis, Matrix};
use crate::quiver::{BasisElem, GradedAlgebra};

/// A finite dimensional DG-module: graded slots tagged by vertex, a
/// differential, and an action matrix per algebra basis element.
#[derive(Clone)]
pub struct DgModule<K: Field> {
    pub alg: Arc<GradedAlgebra<K>>,
    comps: BTreeMap<i32, Vec<usize>>, // slot vertices per degree
    diff: BTreeMap<i32, Matrix<K>>,
    /// action matrices: act[a][t]: M^t -> M^{t+|a|}
    act: Vec<BTreeMap<i32, Matrix<K>>>,
}

impl<K: Field> std::fmt::Debug for DgModule<K> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DgModule{{")?;
        for (t, v) in &self.comps {
            write!(f, " {t}:{v:?}")?;
        }
        write!(f, " }}")
    }
}

impl<K: Field> DgModule<K> {
    pub fn new(
        alg: Arc<GradedAlgebra<K>>,
        comps: BTreeMap<i32, Vec<usize>>,
        diff: BTreeMap<i32, Matrix<K>>,
        act: Vec<BTreeMap<i32, Matrix<K>>>,
    ) -> Result<Self> {
        let mut m = DgModule {
            alg,
            comps: comps.into_iter().filter(|(_, v)| !v.is_empty()).collect(),
            diff: diff.into_iter().filter(|(_, m)| m.rows() > 0 && m.cols() > 0).collect(),
            act: act
                .into_iter()
                .map(|a| a.into_iter().filter(|(_, m)| m.rows() > 0 && m.cols() > 0).collect())
                .collect(),
        };
        // idempotent actions are structural: install the vertex projections
        for v in 0..m.alg.num_vertices() {
            let mut table = BTreeMap::new();
            for &t in m.comps.keys() {
                table.insert(t, m.idempotent_projection(v, t));
            }
            m.act[v] = table;
        }
        m.validate()?;
        Ok(m)
    }

    pub fn zero(alg: Arc<GradedAlgebra<K>>) -> Self {
        let n = alg.dim();
        DgModule { alg, comps: BTreeMap::new(), diff: BTreeMap::new(), act: vec![BTreeMap::new(); n] }
    }

    fn field(&self) -> &K {
        &self.alg.field
    }

    pub fn dim(&self, t: i32) -> usize {
        self.comps.get(&t).map_or(0, |v| v.len())
    }

    pub fn slots(&self, t: i32) -> Vec<usize> {
        self.comps.get(&t).cloned().unwrap_or_default()
    }

    pub fn total_dim(&self) -> usize {
        self.comps.values().map(|v| v.len()).sum()
    }

    pub fn support(&self) -> Option<(i32, i32)> {
        Some((*self.comps.keys().next()?, *self.comps.keys().last()?))
    }

    pub fn is_zero_module(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn diff_at(&self, t: i32) -> Matrix<K> {
        self.diff
            .get(&t)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.field().clone(), self.dim(t + 1), self.dim(t)))
    }

    pub fn action(&self, a: usize, t: i32) -> Matrix<K> {
        let deg = self.alg.degree_of(a);
        self.act[a]
            .get(&t)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.field().clone(), self.dim(t + deg), self.dim(t)))
    }

    /// Idempotent actions are structural: the projection onto the slots of
    /// the given vertex.
    fn idempotent_projection(&self, v: usize, t: i32) -> Matrix<K> {
        let slots = self.slots(t);
        Matrix::from_fn(self.field().clone(), slots.len(), slots.len(), |r, c| {
            if r == c && slots[r] == v {
                self.field().one()
            } else {
                self.field().zero()
            }
        })
    }

    fn validate(&self) -> Result<()> {
        let k = self.field().clone();
        let nv = self.alg.num_vertices();
        // shapes and d^2
        for (&t, m) in &self.diff {
            if m.rows() != self.dim(t + 1) || m.cols() != self.dim(t) {
                return Err(Error::Invariant(format!("differential shape at degree {t}")));
            }
        }
        for &t in self.comps.keys() {
            if !self.diff_at(t + 1).mul(&self.diff_at(t)).is_zero() {
                return Err(Error::Invariant(format!("d^2 != 0 at degree {t}")));
            }
        }
        // vertex support of the action matrices, unitality, idempotents
        for a in 0..self.alg.dim() {
            let e = &self.alg.elems[a];
            for (&t, m) in &self.act[a] {
                if m.rows() != self.dim(t + e.degree) || m.cols() != self.dim(t) {
                    return Err(Error::Invariant(format!(
                        "action of {} has wrong shape at degree {t}",
                        e.label
                    )));
                }
                let rows = self.slots(t + e.degree);
                let cols = self.slots(t);
                for r in 0..m.rows() {
                    for c in 0..m.cols() {
                        if k.is_zero(m.get(r, c)) {
                            continue;
                        }
                        if cols[c] != e.tgt || rows[r] != e.src {
                            return Err(Error::Invariant(format!(
                                "action of {} violates vertex supports",
                                e.label
                            )));
                        }
                    }
                }
            }
            if a < nv {
                for &t in self.comps.keys() {
                    if self.action(a, t) != self.idempotent_projection(a, t) {
                        return Err(Error::Invariant(format!(
                            "idempotent e_{a} does not act as the vertex projection"
                        )));
                    }
                }
            }
        }
        // associativity m.(xy) = (m.x).y on basis pairs
        for x in 0..self.alg.dim() {
            for y in 0..self.alg.dim() {
                let dx = self.alg.degree_of(x);
                for &t in self.comps.keys() {
                    // (m.x).y
                    let lhs = self.action(y, t + dx).mul(&self.action(x, t));
                    // m.(x*y): expand structure constants
                    let mut rhs = Matrix::zeros(k.clone(), lhs.rows(), lhs.cols());
                    for (z, c) in self.alg.product(x, y) {
                        rhs = rhs.add(&self.action(*z, t).scale(c));
                    }
                    if lhs != rhs {
                        return Err(Error::Invariant(format!(
                            "module associativity fails on ({}, {}) at degree {t}",
                            self.alg.elems[x].label, self.alg.elems[y].label
                        )));
                    }
                }
            }
        }
        // Leibniz d(m.a) = d(m).a + (-1)^{|m|} m.d(a)
        for a in 0..self.alg.dim() {
            let da = self.alg.degree_of(a);
            for &t in self.comps.keys() {
                let lhs = self.diff_at(t + da).mul(&self.action(a, t));
                let mut rhs = self.action(a, t + 1).mul(&self.diff_at(t));
                let sign = t.rem_euclid(2) == 1;
                for (b, c) in self.alg.d_of(a) {
                    let term = self.action(*b, t).scale(c);
                    rhs = if sign { rhs.sub(&term) } else { rhs.add(&term) };
                }
                if lhs != rhs {
                    return Err(Error::Invariant(format!(
                        "module Leibniz fails for {} at degree {t}",
                        self.alg.elems[a].label
                    )));
                }
            }
        }
        Ok(())
    }

    /// The free module `e_v Lambda`, optionally shifted so its generator
    /// sits in degree `gen_degree`.
    pub fn free(alg: Arc<GradedAlgebra<K>>, v: usize, gen_degree: i32) -> Self {
        let k = alg.field.clone();
        // slots: basis elements b with tgt(b) = v, at degree |b| + gen_degree
        let mut slot_elems: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
        for (i, e) in alg.elems.iter().enumerate() {
            if e.tgt == v {
                slot_elems.entry(e.degree + gen_degree).or_default().push(i);
            }
        }
        let comps: BTreeMap<i32, Vec<usize>> = slot_elems
            .iter()
            .map(|(&t, els)| (t, els.iter().map(|&i| alg.elems[i].src).collect()))
            .collect();
        let find = |t: i32, e: usize| slot_elems.get(&t).and_then(|v| v.iter().position(|&x| x == e));
        let mut diff: BTreeMap<i32, Matrix<K>> = BTreeMap::new();
        for (&t, els) in &slot_elems {
            let rows = slot_elems.get(&(t + 1)).map_or(0, |v| v.len());
            if rows == 0 {
                continue;
            }
            let mut m = Matrix::zeros(k.clone(), rows, els.len());
            for (c, &e) in els.iter().enumerate() {
                // d(1.b) = 1.d(b) for a generator in even degree; the
                // generator has degree gen_degree, sign (-1)^{gen_degree}
                let sign = gen_degree.rem_euclid(2) == 1;
                for (b2, coef) in alg.d_of(e) {
                    if let Some(r) = find(t + 1, *b2) {
                        let v = if sign { k.neg(coef) } else { coef.clone() };
                        let v = k.add(m.get(r, c), &v);
                        m.set(r, c, v);
                    }
                }
            }
            if !m.is_zero() {
                diff.insert(t, m);
            }
        }
        let mut act: Vec<BTreeMap<i32, Matrix<K>>> = vec![BTreeMap::new(); alg.dim()];
        #[allow(clippy::needless_range_loop)]
        for a in 0..alg.dim() {
            for (&t, els) in &slot_elems {
                let ta = t + alg.degree_of(a);
                let rows = slot_elems.get(&ta).map_or(0, |v| v.len());
                if rows == 0 {
                    continue;
                }
                let mut m = Matrix::zeros(k.clone(), rows, els.len());
                for (c, &e) in els.iter().enumerate() {
                    // slot e acted by a: the product e * a in the algebra
                    for (z, coef) in alg.product(e, a) {
                        if let Some(r) = find(ta, *z) {
                            let v = k.add(m.get(r, c), coef);
                            m.set(r, c, v);
                        }
                    }
                }
                if !m.is_zero() {
                    act[a].insert(t, m);
                }
            }
        }
        // idempotent actions are implied; fix them to the projections
        let me = DgModule { alg: alg.clone(), comps, diff, act };
        let mut act = me.act.clone();
        for v2 in 0..alg.num_vertices() {
            let mut table = BTreeMap::new();
            for &t in me.comps.keys() {
                table.insert(t, me.idempotent_projection(v2, t));
            }
            act[v2] = table;
        }
        let out = DgModule { act, ..me };
        out.validate().expect("free module axioms");
        out
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let k = self.field().clone();
        let mut comps = BTreeMap::new();
        let degrees: std::collections::BTreeSet<i32> =
            self.comps.keys().chain(other.comps.keys()).copied().collect();
        for &t in &degrees {
            let mut v = self.slots(t);
            v.extend(other.slots(t));
            if !v.is_empty() {
                comps.insert(t, v);
            }
        }
        let block = |a: &Matrix<K>, b: &Matrix<K>| -> Matrix<K> {
            Matrix::from_fn(k.clone(), a.rows() + b.rows(), a.cols() + b.cols(), |r, c| {
                if r < a.rows() && c < a.cols() {
                    a.get(r, c).clone()
                } else if r >= a.rows() && c >= a.cols() {
                    b.get(r - a.rows(), c - a.cols()).clone()
                } else {
                    k.zero()
                }
            })
        };
        let mut diff = BTreeMap::new();
        for &t in &degrees {
            let m = block(&self.diff_at(t), &other.diff_at(t));
            if m.rows() > 0 && m.cols() > 0 {
                diff.insert(t, m);
            }
        }
        let mut act = vec![BTreeMap::new(); self.alg.dim()];
        #[allow(clippy::needless_range_loop)]
        for a in 0..self.alg.dim() {
            for &t in &degrees {
                let m = block(&self.action(a, t), &other.action(a, t));
                if m.rows() > 0 && m.cols() > 0 {
                    act[a].insert(t, m);
                }
            }
        }
        DgModule { alg: self.alg.clone(), comps, diff, act }
    }

    /// Shift: `(M[k])^t = M^{t+k}`, differential negated for odd `k`, the
    /// action untouched.
    pub fn shift(&self, kk: i32) -> Self {
        let mut comps = BTreeMap::new();
        for (&t, v) in &self.comps {
            comps.insert(t - kk, v.clone());
        }
        let mut diff = BTreeMap::new();
        for (&t, m) in &self.diff {
            diff.insert(t - kk, if kk.rem_euclid(2) == 0 { m.clone() } else { m.neg() });
        }
        let mut act = vec![BTreeMap::new(); self.alg.dim()];
        #[allow(clippy::needless_range_loop)]
        for a in 0..self.alg.dim() {
            for (&t, m) in &self.act[a] {
                act[a].insert(t - kk, m.clone());
            }
        }
        DgModule { alg: self.alg.clone(), comps, diff, act }
    }

    pub fn underlying_complex(&self) -> Complex<K> {
        let comps = self.comps.iter().map(|(&t, v)| (t, v.len())).collect();
        Complex::new(self.field().clone(), comps, self.diff.clone()).expect("module is a complex")
    }

    /// Per-vertex slot indices at one degree.
    fn vertex_slots(&self, v: usize, t: i32) -> Vec<usize> {
        self.slots(t)
            .iter()
            .enumerate()
            .filter(|&(_, &w)| w == v)
            .map(|(i, _)| i)
            .collect()
    }

    /// The complex `M e_v` of one vertex component.
    pub fn vertex_complex(&self, v: usize) -> Complex<K> {
        let k = self.field().clone();
        let mut comps = BTreeMap::new();
        for (&t, _) in &self.comps {
            let n = self.vertex_slots(v, t).len();
            if n > 0 {
                comps.insert(t, n);
            }
        }
        let mut diffs = BTreeMap::new();
        for (&t, m) in &self.diff {
            let rs = self.vertex_slots(v, t + 1);
            let cs = self.vertex_slots(v, t);
            if rs.is_empty() || cs.is_empty() {
                continue;
            }
            diffs.insert(
                t,
                Matrix::from_fn(k.clone(), rs.len(), cs.len(), |r, c| m.get(rs[r], cs[c]).clone()),
            );
        }
        Complex::new(k, comps, diffs).expect("vertex component is a complex")
    }

    /// H dims by (degree, vertex).
    pub fn h_dims(&self) -> BTreeMap<(i32, usize), usize> {
        let mut out = BTreeMap::new();
        for v in 0..self.alg.num_vertices() {
            let cx = self.vertex_complex(v);
            for (i, d) in cx.h_dims() {
                out.insert((i, v), d);
            }
        }
        out
    }

    pub fn is_acyclic(&self) -> bool {
        self.h_dims().is_empty()
    }

    /// dem membership: `H^i = 0` outside `(-d, 0]`.
    pub fn in_dem_window(&self, d: usize) -> bool {
        self.h_dims().keys().all(|&(i, _)| i > -(d as i32) && i <= 0)
    }

    /// Rebase the module along per-degree basis matrices `B^t` (columns =
    /// new basis in old coordinates, vertex-pure). Used by the truncations.
    fn sub_along(&self, bases: &BTreeMap<i32, Matrix<K>>, vertex_of: &BTreeMap<i32, Vec<usize>>) -> Result<Self> {
        let k = self.field().clone();
        let mut comps = BTreeMap::new();
        for (&t, verts) in vertex_of {
            if !verts.is_empty() {
                comps.insert(t, verts.clone());
            }
        }
        let base = |t: i32| -> Matrix<K> {
            bases
                .get(&t)
                .cloned()
                .unwrap_or_else(|| Matrix::zeros(k.clone(), self.dim(t), 0))
        };
        let mut diff = BTreeMap::new();
        for &t in comps.keys() {
            let image = self.diff_at(t).mul(&base(t));
            let target = base(t + 1);
            if target.cols() == 0 || image.cols() == 0 {
                continue;
            }
            let coords = target
                .solve_matrix(&image)
                .ok_or_else(|| Error::Invariant("subspace is not d-stable".into()))?;
            diff.insert(t, coords);
        }
        let mut act = vec![BTreeMap::new(); self.alg.dim()];
        #[allow(clippy::needless_range_loop)]
        for a in 0..self.alg.dim() {
            let da = self.alg.degree_of(a);
            for &t in comps.keys() {
                let image = self.action(a, t).mul(&base(t));
                let target = base(t + da);
                if target.cols() == 0 || image.cols() == 0 {
                    continue;
                }
                let coords = target
                    .solve_matrix(&image)
                    .ok_or_else(|| Error::Invariant("subspace is not action-stable".into()))?;
                act[a].insert(t, coords);
            }
        }
        DgModule::new(self.alg.clone(), comps, diff, act)
    }

    /// Smart truncation `tau^{<= n}` as a submodule: untouched below `n`,
    /// `ker d^n` at `n`, zero above.
    pub fn truncate_le(&self, n: i32) -> Result<Self> {
        let k = self.field().clone();
        let mut bases = BTreeMap::new();
        let mut verts = BTreeMap::new();
        for (&t, v) in &self.comps {
            if t < n {
                bases.insert(t, Matrix::identity(k.clone(), v.len()));
                verts.insert(t, v.clone());
            } else if t == n {
                // kernel per vertex keeps slots vertex-pure
                let mut cols: Vec<Vec<K::Elem>> = Vec::new();
                let mut vv = Vec::new();
                for vert in 0..self.alg.num_vertices() {
                    let idx = self.vertex_slots(vert, t);
                    if idx.is_empty() {
                        continue;
                    }
                    let cx = self.vertex_complex(vert);
                    let ker = cx.diff(t).kernel_basis();
                    for c in 0..ker.cols() {
                        let mut col = vec![k.zero(); v.len()];
                        for (r, &slot) in idx.iter().enumerate() {
                            col[slot] = ker.get(r, c).clone();
                        }
                        cols.push(col);
                        vv.push(vert);
                    }
                }
                if !cols.is_empty() {
                    bases.insert(t, Matrix::from_columns(k.clone(), v.len(), &cols));
                    verts.insert(t, vv);
                }
            }
        }
        self.sub_along(&bases, &verts)
    }

    /// Rebase the module as a quotient along per-degree projections `P^t`
    /// (rows = coordinates of the quotient basis; sections give the new
    /// structure maps).
    fn quotient_along(
        &self,
        projections: &BTreeMap<i32, Matrix<K>>,
        sections: &BTreeMap<i32, Matrix<K>>,
        vertex_of: &BTreeMap<i32, Vec<usize>>,
    ) -> Result<Self> {
        let k = self.field().clone();
        let mut comps = BTreeMap::new();
        for (&t, verts) in vertex_of {
            if !verts.is_empty() {
                comps.insert(t, verts.clone());
            }
        }
        let proj = |t: i32| -> Matrix<K> {
            projections
                .get(&t)
                .cloned()
                .unwrap_or_else(|| Matrix::zeros(k.clone(), 0, self.dim(t)))
        };
        let sect = |t: i32| -> Matrix<K> {
            sections
                .get(&t)
                .cloned()
                .unwrap_or_else(|| Matrix::zeros(k.clone(), self.dim(t), 0))
        };
        let mut diff = BTreeMap::new();
        for &t in comps.keys() {
            let m = proj(t + 1).mul(&self.diff_at(t)).mul(&sect(t));
            if m.rows() > 0 && m.cols() > 0 {
                diff.insert(t, m);
            }
        }
        let mut act = vec![BTreeMap::new(); self.alg.dim()];
        #[allow(clippy::needless_range_loop)]
        for a in 0..self.alg.dim() {
            let da = self.alg.degree_of(a);
            for &t in comps.keys() {
                let m = proj(t + da).mul(&self.action(a, t)).mul(&sect(t));
                if m.rows() > 0 && m.cols() > 0 {
                    act[a].insert(t, m);
                }
            }
        }
        DgModule::new(self.alg.clone(), comps, diff, act)
    }

    /// Smart truncation `tau^{> n}` as a quotient: zero at degrees <= n,
    /// `coker d^n` at `n+1`, untouched above.
    pub fn truncate_gt(&self, n: i32) -> Result<Self> {
        let k = self.field().clone();
        let mut projections = BTreeMap::new();
        let mut sections = BTreeMap::new();
        let mut verts: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
        for (&t, v) in &self.comps {
            if t > n + 1 {
                projections.insert(t, Matrix::identity(k.clone(), v.len()));
                sections.insert(t, Matrix::identity(k.clone(), v.len()));
                verts.insert(t, v.clone());
            } else if t == n + 1 {
                // complement of the image, per vertex
                let mut proj_rows: Vec<Vec<K::Elem>> = Vec::new();
                let mut sect_cols: Vec<Vec<K::Elem>> = Vec::new();
                let mut vv = Vec::new();
                for vert in 0..self.alg.num_vertices() {
                    let idx = self.vertex_slots(vert, t);
                    if idx.is_empty() {
                        continue;
                    }
                    let cx = self.vertex_complex(vert);
                    let im = cx.diff(n).column_space_basis();
                    let id = Matrix::identity(k.clone(), idx.len());
                    let reps = extend_basis(&im, &id);
                    if reps.cols() == 0 {
                        continue;
                    }
                    let full = im.hstack(&reps);
                    let completion = extend_basis(&full, &id);
                    let inv = full.hstack(&completion).inverse();
                    for rr in 0..reps.cols() {
                        let mut prow = vec![k.zero(); v.len()];
                        for (c, &slot) in idx.iter().enumerate() {
                            prow[slot] = inv.get(im.cols() + rr, c).clone();
                        }
                        proj_rows.push(prow);
                        let mut scol = vec![k.zero(); v.len()];
                        for (r, &slot) in idx.iter().enumerate() {
                            scol[slot] = reps.get(r, rr).clone();
                        }
                        sect_cols.push(scol);
                        vv.push(vert);
                    }
                }
                if !proj_rows.is_empty() {
                    let p = Matrix::from_columns(k.clone(), v.len(), &proj_rows).transpose();
                    projections.insert(t, p);
                    sections.insert(t, Matrix::from_columns(k.clone(), v.len(), &sect_cols));
                    verts.insert(t, vv);
                }
            }
        }
        self.quotient_along(&projections, &sections, &verts)
    }

    /// Loop functor `Omega M = tau^{<=0}(M[-1])`.
    pub fn omega(&self) -> Result<Self> {
        self.shift(-1).truncate_le(0)
    }

    /// Suspension `Sigma M = tau^{>-d}(M[1])`.
    pub fn sigma(&self, d: usize) -> Result<Self> {
        self.shift(1).truncate_gt(-(d as i32))
    }

    /// The k-dual as a right module over the graded opposite algebra:
    /// `(f . a)(m) = (-1)^{|a||f|} f(m . a)`.
    pub fn k_dual(&self, op: &Arc<GradedAlgebra<K>>) -> Result<DgModule<K>> {
        let k = self.field().clone();
        let mut comps: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
        for (&t, v) in &self.comps {
            comps.insert(-t, v.clone());
        }
        // d(f) = -(-1)^{|f|} f . d_M
        let mut diff = BTreeMap::new();
        for &t in comps.keys() {
            // target degree t+1; dual of d_M^{-t-1}: M^{-t-1} -> M^{-t}
            let dm = self.diff_at(-t - 1);
            if dm.rows() == 0 || dm.cols() == 0 {
                continue;
            }
            let sign = if t.rem_euclid(2) == 0 { k.neg(&k.one()) } else { k.one() };
            diff.insert(t, dm.transpose().scale(&sign));
        }
        let mut act = vec![BTreeMap::new(); op.dim()];
        #[allow(clippy::needless_range_loop)]
        for a in 0..op.dim() {
            let da = op.degree_of(a);
            for &t in comps.keys() {
                // (f.a) on M^{-(t+da)}: f(m.a), action of a in the original
                let orig = self.action(a, -t - da);
                if orig.rows() == 0 || orig.cols() == 0 {
                    continue;
                }
                let sign = if (da * t).rem_euclid(2) == 0 { k.one() } else { k.neg(&k.one()) };
                act[a].insert(t, orig.transpose().scale(&sign));
            }
        }
        DgModule::new(op.clone(), comps, diff, act)
    }
}

/// A block map of DG-modules of some degree. Degree 0 closed maps are the
/// morphisms; odd-degree homotopies carry signs through `is_closed`.
#[derive(Clone, Debug)]
pub struct DgMap<K: Field> {
    pub source: DgModule<K>,
    pub target: DgModule<K>,
    pub degree: i32,
    blocks: BTreeMap<i32, Matrix<K>>,
}

impl<K: Field> DgMap<K> {
    pub fn zero(source: DgModule<K>, target: DgModule<K>, degree: i32) -> Self {
        DgMap { source, target, degree, blocks: BTreeMap::new() }
    }

    pub fn identity(m: &DgModule<K>) -> Self {
        let mut blocks = BTreeMap::new();
        for &t in m.comps.keys() {
            blocks.insert(t, Matrix::identity(m.field().clone(), m.dim(t)));
        }
        DgMap { source: m.clone(), target: m.clone(), degree: 0, blocks }
    }

    pub fn block(&self, t: i32) -> Matrix<K> {
        self.blocks.get(&t).cloned().unwrap_or_else(|| {
            Matrix::zeros(
                self.source.field().clone(),
                self.target.dim(t + self.degree),
                self.source.dim(t),
            )
        })
    }

    pub fn set_block(&mut self, t: i32, m: Matrix<K>) {
        self.blocks.insert(t, m);
    }

    pub fn is_chain_map(&self) -> bool {
        let t = self.degree;
        let neg = t.rem_euclid(2) == 1;
        let degs: std::collections::BTreeSet<i32> = self
            .source
            .comps
            .keys()
            .copied()
            .chain(self.blocks.keys().copied())
            .collect();
        for &i in &degs {
            let lhs = self.target.diff_at(i + t).mul(&self.block(i));
            let rhs = self.block(i + 1).mul(&self.source.diff_at(i));
            let rhs = if neg { rhs.neg() } else { rhs };
            if lhs != rhs {
                return false;
            }
        }
        true
    }

    pub fn is_linear(&self) -> bool {
        // phi(m.a) = (-1)^{deg |a|} phi(m).a
        let t = self.degree;
        for a in 0..self.source.alg.dim() {
            let da = self.source.alg.degree_of(a);
            let neg = (t * da).rem_euclid(2) == 1;
            for &i in self.source.comps.keys() {
                let lhs = self.block(i + da).mul(&self.source.action(a, i));
                let rhs = self.target.action(a, i + t).mul(&self.block(i));
                let rhs = if neg { rhs.neg() } else { rhs };
                if lhs != rhs {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_closed_morphism(&self) -> bool {
        self.degree == 0 && self.is_chain_map() && self.is_linear()
    }

    pub fn compose(&self, then: &DgMap<K>) -> DgMap<K> {
        let mut blocks = BTreeMap::new();
        for &i in self.source.comps.keys() {
            blocks.insert(i, then.block(i + self.degree).mul(&self.block(i)));
        }
        DgMap {
            source: self.source.clone(),
            target: then.target.clone(),
            degree: self.degree + then.degree,
            blocks,
        }
    }

    pub fn add(&self, other: &DgMap<K>) -> DgMap<K> {
        let mut out = self.clone();
        for &i in other.blocks.keys() {
            out.set_block(i, self.block(i).add(&other.block(i)));
        }
        out
    }

    pub fn scale(&self, c: &K::Elem) -> DgMap<K> {
        let mut out = self.clone();
        for m in out.blocks.values_mut() {
            *m = m.scale(c);
        }
        out
    }

    pub fn shift(&self, kk: i32) -> DgMap<K> {
        let mut blocks = BTreeMap::new();
        for (&i, m) in &self.blocks {
            blocks.insert(i - kk, m.clone());
        }
        DgMap {
            source: self.source.shift(kk),
            target: self.target.shift(kk),
            degree: self.degree,
            blocks,
        }
    }

    /// Mapping cone `X[1] (+) Y` with the usual twisted differential and the
    /// diagonal action.
    pub fn cone(&self) -> Result<DgModule<K>> {
        if !self.is_closed_morphism() {
            return Err(Error::Invariant("cone requires a closed degree 0 morphism".into()));
        }
        let k = self.source.field().clone();
        let x = &self.source;
        let y = &self.target;
        let mut comps = BTreeMap::new();
        let degrees: std::collections::BTreeSet<i32> = x
            .comps
            .keys()
            .map(|&i| i - 1)
            .chain(y.comps.keys().copied())
            .collect();
        for &i in &degrees {
            let mut v = x.slots(i + 1);
            v.extend(y.slots(i));
            if !v.is_empty() {
                comps.insert(i, v);
            }
        }
        let mut diff = BTreeMap::new();
        for &i in &degrees {
            let rows = x.dim(i + 2) + y.dim(i + 1);
            let cols = x.dim(i + 1) + y.dim(i);
            if rows == 0 || cols == 0 {
                continue;
            }
            let dx = x.diff_at(i + 1);
            let dy = y.diff_at(i);
            let f = self.block(i + 1);
            diff.insert(
                i,
                Matrix::from_fn(k.clone(), rows, cols, |r, c| {
                    let xr = r < x.dim(i + 2);
                    let xc = c < x.dim(i + 1);
                    match (xr, xc) {
                        (true, true) => k.neg(dx.get(r, c)),
                        (true, false) => k.zero(),
                        (false, true) => f.get(r - x.dim(i + 2), c).clone(),
                        (false, false) => dy.get(r - x.dim(i + 2), c - x.dim(i + 1)).clone(),
                    }
                }),
            );
        }
        let mut act = vec![BTreeMap::new(); x.alg.dim()];
        #[allow(clippy::needless_range_loop)]
        for a in 0..x.alg.dim() {
            let da = x.alg.degree_of(a);
            for &i in &degrees {
                let rows = x.dim(i + 1 + da) + y.dim(i + da);
                let cols = x.dim(i + 1) + y.dim(i);
                if rows == 0 || cols == 0 {
                    continue;
                }
                let ax = x.action(a, i + 1);
                let ay = y.action(a, i);
                act[a].insert(
                    i,
                    Matrix::from_fn(k.clone(), rows, cols, |r, c| {
                        let xr = r < x.dim(i + 1 + da);
                        let xc = c < x.dim(i + 1);
                        match (xr, xc) {
                            (true, true) => ax.get(r, c).clone(),
                            (false, false) => ay.get(r - x.dim(i + 1 + da), c - x.dim(i + 1)).clone(),
                            _ => k.zero(),
                        }
                    }),
                );
            }
        }
        DgModule::new(x.alg.clone(), comps, diff, act)
    }

    pub fn cocone(&self) -> Result<DgModule<K>> {
        Ok(self.cone()?.shift(-1))
    }
}

/// `kernel3(f) = tau^{<=0}(Cocone f)` with its inclusion-style 3-term datum
/// `(K -> X, homotopy K -> Y)`.
pub fn kernel3<K: Field>(f: &DgMap<K>) -> Result<(DgModule<K>, DgMap<K>, DgMap<K>)> {
    let cocone = f.cocone()?;
    // Cocone^i = X^i (+) Y^{i-1}
    let kernel = cocone.truncate_le(0)?;
    // the submodule inclusion into the cocone is by construction the basis
    // chosen by truncate_le; rebuild it explicitly
    let k = f.source.field().clone();
    let mut incl = DgMap::zero(kernel.clone(), cocone.clone(), 0);
    {
        // truncate_le uses identity bases below 0 and the kernel basis at 0
        for &t in kernel.comps.keys() {
            if t < 0 {
                incl.set_block(t, Matrix::identity(k.clone(), kernel.dim(t)));
            } else {
                // reconstruct: solve d-compatibility? the kernel basis at 0
                // is reproducible from the cocone
                let mut cols: Vec<Vec<K::Elem>> = Vec::new();
                for vert in 0..cocone.alg.num_vertices() {
                    let idx = cocone.vertex_slots(vert, 0);
                    if idx.is_empty() {
                        continue;
                    }
                    let cx = cocone.vertex_complex(vert);
                    let ker = cx.diff(0).kernel_basis();
                    for c in 0..ker.cols() {
                        let mut col = vec![k.zero(); cocone.dim(0)];
                        for (r, &slot) in idx.iter().enumerate() {
                            col[slot] = ker.get(r, c).clone();
                        }
                        cols.push(col);
                    }
                }
                incl.set_block(0, Matrix::from_columns(k.clone(), cocone.dim(0), &cols));
            }
        }
    }
    if !incl.is_closed_morphism() {
        return Err(Error::Invariant("kernel inclusion is not a closed morphism".into()));
    }
    // projections of the cocone onto X and (shifted) Y give the 3-term data
    let x = f.source.clone();
    let mut proj_x = DgMap::zero(cocone.clone(), x.clone(), 0);
    for &i in cocone.comps.keys() {
        let rows = x.dim(i);
        let cols = cocone.dim(i);
        if rows == 0 || cols == 0 {
            continue;
        }
        proj_x.set_block(
            i,
            Matrix::from_fn(k.clone(), rows, cols, |r, c| {
                if r == c { k.one() } else { k.zero() }
            }),
        );
    }
    let kappa = incl.compose(&proj_x);
    // homotopy h: K -> Y of degree -1: the Y-part of the cocone coordinates
    let y = f.target.clone();
    let mut hy = DgMap::zero(kernel.clone(), y.clone(), -1);
    for &i in kernel.comps.keys() {
        let b = incl.block(i);
        let rows = y.dim(i - 1);
        if rows == 0 || b.cols() == 0 {
            continue;
        }
        hy.set_block(
            i,
            Matrix::from_fn(k.clone(), rows, b.cols(), |r, c| b.get(x.dim(i) + r, c).clone()),
        );
    }
    Ok((kernel, kappa, hy))
}

/// `cokernel3(f) = tau^{>-d}(Cone f)` with its projection-style datum.
pub fn cokernel3<K: Field>(f: &DgMap<K>, d: usize) -> Result<(DgModule<K>, DgMap<K>)> {
    let cone = f.cone()?;
    let coker = cone.truncate_gt(-(d as i32))?;
    // projection Y -> Cone -> coker
    let k = f.source.field().clone();
    let y = f.target.clone();
    let mut into_cone = DgMap::zero(y.clone(), cone.clone(), 0);
    for &i in y.comps.keys() {
        let rows = cone.dim(i);
        let cols = y.dim(i);
        if rows == 0 || cols == 0 {
            continue;
        }
        let off = f.source.dim(i + 1);
        into_cone.set_block(
            i,
            Matrix::from_fn(k.clone(), rows, cols, |r, c| {
                if r >= off && r - off == c { k.one() } else { k.zero() }
            }),
        );
    }
    // the quotient map cone -> coker
    let quot = truncate_gt_map(&cone, d)?;
    let g = into_cone.compose(&quot);
    if !g.is_closed_morphism() {
        return Err(Error::Invariant("cokernel projection is not a closed morphism".into()));
    }
    Ok((coker, g))
}

/// The quotient morphism `M -> tau^{>-d} M`.
pub fn truncate_gt_map<K: Field>(m: &DgModule<K>, d: usize) -> Result<DgMap<K>> {
    let n = -(d as i32);
    let k = m.field().clone();
    let target = m.truncate_gt(n)?;
    let mut q = DgMap::zero(m.clone(), target.clone(), 0);
    for &t in target.comps.keys() {
        if t > n + 1 {
            q.set_block(t, Matrix::identity(k.clone(), m.dim(t)));
        } else if t == n + 1 {
            // reconstruct the per-vertex projections used by truncate_gt
            let mut rows: Vec<Vec<K::Elem>> = Vec::new();
            for vert in 0..m.alg.num_vertices() {
                let idx = m.vertex_slots(vert, t);
                if idx.is_empty() {
                    continue;
                }
                let cx = m.vertex_complex(vert);
                let im = cx.diff(n).column_space_basis();
                let id = Matrix::identity(k.clone(), idx.len());
                let reps = extend_basis(&im, &id);
                if reps.cols() == 0 {
                    continue;
                }
                let full = im.hstack(&reps);
                let completion = extend_basis(&full, &id);
                let inv = full.hstack(&completion).inverse();
                for rr in 0..reps.cols() {
                    let mut prow = vec![k.zero(); m.dim(t)];
                    for (c, &slot) in idx.iter().enumerate() {
                        prow[slot] = inv.get(im.cols() + rr, c).clone();
                    }
                    rows.push(prow);
                }
            }
            q.set_block(t, Matrix::from_columns(k.clone(), m.dim(t), &rows).transpose());
        }
    }
    if !q.is_closed_morphism() {
        return Err(Error::Invariant("truncation quotient is not a closed morphism".into()));
    }
    Ok(q)
}

/// The inclusion `tau^{<=n} M -> M`.
pub fn truncate_le_map<K: Field>(m: &DgModule<K>, n: i32) -> Result<DgMap<K>> {
    let k = m.field().clone();
    let sub = m.truncate_le(n)?;
    let mut inc = DgMap::zero(sub.clone(), m.clone(), 0);
    for &t in sub.comps.keys() {
        if t < n {
            inc.set_block(t, Matrix::identity(k.clone(), m.dim(t)));
        } else {
            let mut cols: Vec<Vec<K::Elem>> = Vec::new();
            for vert in 0..m.alg.num_vertices() {
                let idx = m.vertex_slots(vert, t);
                if idx.is_empty() {
                    continue;
                }
                let cx = m.vertex_complex(vert);
                let ker = cx.diff(t).kernel_basis();
                for c in 0..ker.cols() {
                    let mut col = vec![k.zero(); m.dim(t)];
                    for (r, &slot) in idx.iter().enumerate() {
                        col[slot] = ker.get(r, c).clone();
                    }
                    cols.push(col);
                }
            }
            inc.set_block(t, Matrix::from_columns(k.clone(), m.dim(t), &cols));
        }
    }
    if !inc.is_closed_morphism() {
        return Err(Error::Invariant("truncation inclusion is not a closed morphism".into()));
    }
    Ok(inc)
}

/// A semi-free module: generators with degree and vertex, and a strictly
/// triangular twisted differential `delta(g_j) = sum_{i<j} g_i . lambda`.
#[derive(Clone, Debug)]
pub struct SemiFree<K: Field> {
    pub alg: Arc<GradedAlgebra<K>>,
    pub gens: Vec<(i32, usize)>,
    pub delta: Vec<Vec<(usize, Vec<(usize, K::Elem)>)>>,
}

impl<K: Field> SemiFree<K> {
    pub fn empty(alg: Arc<GradedAlgebra<K>>) -> Self {
        SemiFree { alg, gens: Vec::new(), delta: Vec::new() }
    }

    /// Keep only the generators selected by `keep`, with their mutual delta
    /// entries. Valid when the dropped generators never appear in the delta
    /// of a kept one (e.g. dropping an upper set of the band levels).
    pub fn sub_on_generators(&self, keep: &[bool]) -> Result<SemiFree<K>> {
        let remap: Vec<Option<usize>> = {
            let mut out = Vec::new();
            let mut next = 0;
            for &k in keep {
                if k {
                    out.push(Some(next));
                    next += 1;
                } else {
                    out.push(None);
                }
            }
            out
        };
        let mut gens = Vec::new();
        let mut delta = Vec::new();
        for (j, &g) in self.gens.iter().enumerate() {
            if !keep[j] {
                continue;
            }
            gens.push(g);
            let mut row = Vec::new();
            for (i, lam) in &self.delta[j] {
                match remap[*i] {
                    Some(i2) => row.push((i2, lam.clone())),
                    None => {
                        return Err(Error::ShapeError(
                            "generator restriction breaks the twisted differential".into(),
                        ))
                    }
                }
            }
            delta.push(row);
        }
        Ok(SemiFree { alg: self.alg.clone(), gens, delta })
    }

    /// Slots of the underlying module: `(generator, algebra basis element)`.
    pub fn slot_list(&self) -> BTreeMap<i32, Vec<(usize, usize)>> {
        let mut slots: BTreeMap<i32, Vec<(usize, usize)>> = BTreeMap::new();
        for (g, &(dg, v)) in self.gens.iter().enumerate() {
            for (b, e) in self.alg.elems.iter().enumerate() {
                if e.tgt == v {
                    slots.entry(dg + e.degree).or_default().push((g, b));
                }
            }
        }
        slots
    }

    pub fn to_module(&self) -> Result<DgModule<K>> {
        let alg = &self.alg;
        let k = alg.field.clone();
        let slots = self.slot_list();
        let comps: BTreeMap<i32, Vec<usize>> = slots
            .iter()
            .map(|(&t, v)| (t, v.iter().map(|&(_, b)| alg.elems[b].src).collect()))
            .collect();
        let find = |t: i32, g: usize, b: usize| -> Option<usize> {
            slots.get(&t)?.iter().position(|&(g2, b2)| (g2, b2) == (g, b))
        };
        // differential: d(g.b) = delta(g).b + (-1)^{|g|} g.d(b)
        let mut diff: BTreeMap<i32, Matrix<K>> = BTreeMap::new();
        for (&t, list) in &slots {
            let rows = slots.get(&(t + 1)).map_or(0, |v| v.len());
            if rows == 0 {
                continue;
            }
            let mut m = Matrix::zeros(k.clone(), rows, list.len());
            for (c, &(g, b)) in list.iter().enumerate() {
                let (dg, _) = self.gens[g];
                for (g2, lam) in &self.delta[g] {
                    for (l, cl) in lam {
                        // (g2 . l) . b = g2 . (l * b)
                        for (z, cz) in alg.product(*l, b) {
                            if let Some(r) = find(t + 1, *g2, *z) {
                                let v = k.add(m.get(r, c), &k.mul(cl, cz));
                                m.set(r, c, v);
                            }
                        }
                    }
                }
                let sign = dg.rem_euclid(2) == 1;
                for (b2, cb) in alg.d_of(b) {
                    if let Some(r) = find(t + 1, g, *b2) {
                        let v = if sign { k.neg(cb) } else { cb.clone() };
                        let v = k.add(m.get(r, c), &v);
                        m.set(r, c, v);
                    }
                }
            }
            diff.insert(t, m);
        }
        let mut act: Vec<BTreeMap<i32, Matrix<K>>> = vec![BTreeMap::new(); alg.dim()];
        #[allow(clippy::needless_range_loop)]
        for a in 0..alg.dim() {
            let da = alg.degree_of(a);
            for (&t, list) in &slots {
                let rows = slots.get(&(t + da)).map_or(0, |v| v.len());
                if rows == 0 {
                    continue;
                }
                let mut m = Matrix::zeros(k.clone(), rows, list.len());
                for (c, &(g, b)) in list.iter().enumerate() {
                    for (z, cz) in alg.product(b, a) {
                        if let Some(r) = find(t + da, g, *z) {
                            let v = k.add(m.get(r, c), cz);
                            m.set(r, c, v);
                        }
                    }
                }
                act[a].insert(t, m);
            }
        }
        DgModule::new(alg.clone(), comps, diff, act)
    }

    /// Expresses an element of the underlying module in slot coordinates as
    /// delta-style entries `(generator, algebra combination)`.
    pub fn element_to_entries(&self, t: i32, coords: &[K::Elem]) -> Vec<(usize, Vec<(usize, K::Elem)>)> {
        let slots = self.slot_list();
        let empty = Vec::new();
        let list = slots.get(&t).unwrap_or(&empty);
        let mut per_gen: BTreeMap<usize, Vec<(usize, K::Elem)>> = BTreeMap::new();
        for (i, c) in coords.iter().enumerate() {
            if self.alg.field.is_zero(c) {
                continue;
            }
            let (g, b) = list[i];
            per_gen.entry(g).or_default().push((b, c.clone()));
        }
        per_gen.into_iter().collect()
    }
}

/// A semi-free resolution: the semi-free module, its realization, and the
/// comparison quasi-isomorphism valid in degrees `>= -depth`.
pub struct Resolution<K: Field> {
    pub sf: SemiFree<K>,
    pub module: DgModule<K>,
    pub eps: DgMap<K>,
    pub depth: usize,
}

/// Builds a semi-free resolution by repeatedly adjoining generators that
/// kill the top surviving cohomology of the comparison cone, working down
/// to `-depth - 1`.
pub fn semifree_resolution<K: Field>(m: &DgModule<K>, depth: usize) -> Result<Resolution<K>> {
    semifree_resolution_ordered(m, depth, false)
}

/// Same algorithm with the per-step class order reversed; used to check
/// that windowed answers do not depend on the resolution.
pub fn semifree_resolution_ordered<K: Field>(m: &DgModule<K>, depth: usize, reversed: bool) -> Result<Resolution<K>> {
    let alg = m.alg.clone();
    let k = alg.field.clone();
    let floor = -(depth as i32) - 1;
    let mut sf = SemiFree::empty(alg.clone());
    let mut eps_entries: Vec<Vec<K::Elem>> = Vec::new(); // image of each generator in M
    let mut guard = 0;
    loop {
        guard += 1;
        if guard > 500 {
            return Err(Error::Invariant("resolution did not stabilize".into()));
        }
        let p = sf.to_module()?;
        let mut eps = DgMap::zero(p.clone(), m.clone(), 0);
        {
            // eps(g.b) = eps(g).b
            let slots = sf.slot_list();
            for (&t, list) in &slots {
                if m.dim(t) == 0 || list.is_empty() {
                    continue;
                }
                let mut blk = Matrix::zeros(k.clone(), m.dim(t), list.len());
                for (c, &(g, b)) in list.iter().enumerate() {
                    let (dg, _) = sf.gens[g];
                    let img = &eps_entries[g]; // element of M^{dg}
                    let acted = m.action(b, dg).apply(img);
                    for (r, v) in acted.iter().enumerate() {
                        blk.set(r, c, k.add(blk.get(r, c), v));
                    }
                }
                eps.set_block(t, blk);
            }
        }
        if !eps.is_closed_morphism() {
            return Err(Error::Invariant("comparison map is not a closed morphism".into()));
        }
        let cone = eps.cone()?;
        // topmost surviving cone cohomology at degree >= floor
        let mut found = None;
        if let Some((lo, hi)) = cone.support() {
            for t in (lo.max(floor)..=hi).rev() {
                let mut classes = Vec::new();
                for v in 0..alg.num_vertices() {
                    let cx = cone.vertex_complex(v);
                    let h = cx.cohomology(t);
                    for ci in 0..h.dim {
                        classes.push((v, h.reps.column(ci)));
                    }
                }
                if !classes.is_empty() {
                    found = Some((t, classes));
                    break;
                }
            }
        }
        let Some((t, mut classes)) = found else {
            return Ok(Resolution { sf, module: p, eps, depth });
        };
        if reversed {
            classes.reverse();
        }
        // adjoin one generator per class: delta = cone p-part, eps = -m-part
        for (v, class_local) in classes {
            // expand the per-vertex coordinates into full cone coordinates
            let idx: Vec<usize> = cone
                .slots(t)
                .iter()
                .enumerate()
                .filter(|&(_, &w)| w == v)
                .map(|(i, _)| i)
                .collect();
            let mut full = vec![k.zero(); cone.dim(t)];
            for (r, &slot) in idx.iter().enumerate() {
                full[slot] = class_local[r].clone();
            }
            // cone(eps)^t = P^{t+1} (+) M^t
            let p_dim = p.dim(t + 1);
            let p_part: Vec<K::Elem> = full[..p_dim].to_vec();
            let m_part: Vec<K::Elem> = full[p_dim..].to_vec();
            let delta_entries = sf.element_to_entries(t + 1, &p_part);
            sf.gens.push((t, v));
            sf.delta.push(delta_entries);
            eps_entries.push(m_part.iter().map(|c| k.neg(c)).collect());
        }
    }
}

/// The rhom complex from a semi-free source to a module, with its unit
/// basis `(generator, target slot)` per hom degree.
pub struct RhomComplex<K: Field> {
    pub cx: Complex<K>,
    pub units: BTreeMap<i32, Vec<(usize, usize)>>,
    source: SemiFree<K>,
    target: DgModule<K>,
}

pub fn rhom_complex<K: Field>(sf: &SemiFree<K>, n: &DgModule<K>) -> Result<RhomComplex<K>> {
    let alg = &sf.alg;
    let k = alg.field.clone();
    let mut units: BTreeMap<i32, Vec<(usize, usize)>> = BTreeMap::new();
    for (g, &(dg, v)) in sf.gens.iter().enumerate() {
        for t in n.support().map(|(lo, hi)| lo - dg..=hi - dg).unwrap_or(0..=-1) {
            for &slot in &n.vertex_slots(v, dg + t) {
                units.entry(t).or_default().push((g, slot));
            }
        }
    }
    let comps: BTreeMap<i32, usize> = units.iter().map(|(&t, u)| (t, u.len())).collect();
    let mut diffs: BTreeMap<i32, Matrix<K>> = BTreeMap::new();
    for (&t, basis) in &units {
        let empty = Vec::new();
        let target = units.get(&(t + 1)).unwrap_or(&empty);
        if target.is_empty() {
            continue;
        }
        let neg = t.rem_euclid(2) == 1;
        let mut m = Matrix::zeros(k.clone(), target.len(), basis.len());
        for (col, &(g, slot)) in basis.iter().enumerate() {
            let (dg, _) = sf.gens[g];
            // d_N . phi
            let dn = n.diff_at(dg + t);
            for r in 0..n.dim(dg + t + 1) {
                if k.is_zero(dn.get(r, slot)) {
                    continue;
                }
                if let Some(row) = target.iter().position(|&u| u == (g, r)) {
                    let v = k.add(m.get(row, col), dn.get(r, slot));
                    m.set(row, col, v);
                }
            }
            // -(-1)^t phi . delta: phi(delta g') has a contribution from g
            for (g2, row_entries) in sf.delta.iter().enumerate() {
                let (dg2, _) = sf.gens[g2];
                for (gi, lam) in row_entries {
                    if *gi != g {
                        continue;
                    }
                    // phi(g . lam) = phi(g) . lam
                    for (l, cl) in lam {
                        let acted = n.action(*l, dg + t);
                        for r in 0..n.dim(dg2 + t + 1) {
                            if acted.rows() <= r {
                                continue;
                            }
                            if k.is_zero(acted.get(r, slot)) {
                                continue;
                            }
                            if let Some(row) = target.iter().position(|&u| u == (g2, r)) {
                                let mut v = k.mul(cl, acted.get(r, slot));
                                if !neg {
                                    v = k.neg(&v);
                                }
                                let v = k.add(m.get(row, col), &v);
                                m.set(row, col, v);
                            }
                        }
                    }
                }
            }
        }
        diffs.insert(t, m);
    }
    Ok(RhomComplex {
        cx: Complex::new(k, comps, diffs)?,
        units,
        source: sf.clone(),
        target: n.clone(),
    })
}

impl<K: Field> RhomComplex<K> {
    pub fn h_dim(&self, t: i32) -> usize {
        self.cx.h_dim(t)
    }

    /// Representatives of `H^t` as generator-image tables.
    pub fn classes(&self, t: i32) -> Vec<GenImages<K>> {
        let h = self.cx.cohomology(t);
        (0..h.dim).map(|c| self.from_coords(t, &h.reps.column(c))).collect()
    }

    pub fn from_coords(&self, t: i32, coords: &[K::Elem]) -> GenImages<K> {
        let k = &self.source.alg.field;
        let empty = Vec::new();
        let basis = self.units.get(&t).unwrap_or(&empty);
        let mut images: Vec<Vec<K::Elem>> = self
            .source
            .gens
            .iter()
            .map(|&(dg, _)| vec![k.zero(); self.target.dim(dg + t)])
            .collect();
        for (u, c) in basis.iter().zip(coords.iter()) {
            if !k.is_zero(c) {
                images[u.0][u.1] = k.add(&images[u.0][u.1], c);
            }
        }
        GenImages { degree: t, images }
    }

    pub fn to_coords(&self, f: &GenImages<K>) -> Vec<K::Elem> {
        let empty = Vec::new();
        let basis = self.units.get(&f.degree).unwrap_or(&empty);
        basis.iter().map(|&(g, s)| f.images[g][s].clone()).collect()
    }

    /// H^t coordinates of a generator-image table.
    pub fn project(&self, f: &GenImages<K>) -> Vec<K::Elem> {
        let h = self.cx.cohomology(f.degree);
        h.projector.apply(&self.to_coords(f))
    }

    /// Realizes a class as an honest module map from the semi-free
    /// realization.
    pub fn as_map(&self, sf_module: &DgModule<K>, f: &GenImages<K>) -> DgMap<K> {
        let k = &self.source.alg.field;
        let slots = self.source.slot_list();
        let mut map = DgMap::zero(sf_module.clone(), self.target.clone(), f.degree);
        for (&t, list) in &slots {
            let rows = self.target.dim(t + f.degree);
            if rows == 0 || list.is_empty() {
                continue;
            }
            let mut blk = Matrix::zeros(k.clone(), rows, list.len());
            for (c, &(g, b)) in list.iter().enumerate() {
                let (dg, _) = self.source.gens[g];
                // phi(g.b) = (-1)^{|phi||b|} phi(g).b ... with even-degree
                // actions and degree 0 classes no sign is needed; keep the
                // general sign for homotopy degrees
                let db = self.source.alg.degree_of(b);
                let acted = self.target.action(b, dg + f.degree).apply(&f.images[g]);
                let sign = (f.degree * db).rem_euclid(2) == 1;
                for (r, v) in acted.iter().enumerate() {
                    let v = if sign { k.neg(v) } else { v.clone() };
                    blk.set(r, c, k.add(blk.get(r, c), &v));
                }
            }
            map.set_block(t, blk);
        }
        map
    }
}

/// A map out of a semi-free module, recorded by generator images.
#[derive(Clone, Debug)]
pub struct GenImages<K: Field> {
    pub degree: i32,
    pub images: Vec<Vec<K::Elem>>,
}

/// Windowed derived hom dims, via a fresh resolution of the source.
pub fn rhom_dims<K: Field>(
    m: &DgModule<K>,
    n: &DgModule<K>,
    window: std::ops::RangeInclusive<i32>,
    depth: usize,
    d: usize,
) -> Result<BTreeMap<i32, usize>> {
    if *window.start() < -(depth as i32) + d as i32 {
        return Err(Error::WindowTooDeep(format!(
            "window start {} below -depth+d = {}",
            window.start(),
            -(depth as i32) + d as i32
        )));
    }
    let res = semifree_resolution(m, depth)?;
    let rc = rhom_complex(&res.sf, n)?;
    let mut out = BTreeMap::new();
    for t in window {
        let dim = rc.h_dim(t);
        if dim > 0 {
            out.insert(t, dim);
        }
    }
    Ok(out)
}

/// n-monomorphism test: the plain-cohomology route (mono at `H^{-n+1}`,
/// iso below) cross-checked against `Omega^{n-1}(kernel) = 0`.
pub fn is_n_mono<K: Field>(f: &DgMap<K>, n: usize, d: usize) -> Result<bool> {
    assert!(n >= 1 && n <= d);
    let direct = {
        let mut ok = true;
        'outer: for v in 0..f.source.alg.num_vertices() {
            let sv = f.source.vertex_complex(v);
            let tv = f.target.vertex_complex(v);
            let mut blocks = BTreeMap::new();
            for &t in f.source.comps.keys() {
                let rows = f.target.vertex_slots(v, t);
                let cols = f.source.vertex_slots(v, t);
                if rows.is_empty() || cols.is_empty() {
                    continue;
                }
                let b = f.block(t);
                blocks.insert(
                    t,
                    Matrix::from_fn(f.source.field().clone(), rows.len(), cols.len(), |r, c| {
                        b.get(rows[r], cols[c]).clone()
                    }),
                );
            }
            let cm = crate::complex::ChainMap::new(sv, tv, 0, blocks)?;
            let lo = f
                .source
                .support()
                .map(|(a, _)| a)
                .unwrap_or(0)
                .min(f.target.support().map(|(a, _)| a).unwrap_or(0));
            let hm = cm.h_map(-(n as i32) + 1);
            if hm.kernel_basis().cols() > 0 {
                ok = false;
                break 'outer;
            }
            for i in lo..=(-(n as i32)) {
                let m = cm.h_map(i);
                if m.rows() != m.cols() || m.rank() != m.rows() {
                    ok = false;
                    break 'outer;
                }
            }
        }
        ok
    };
    let (kernel, _, _) = kernel3(f)?;
    let mut w = kernel;
    for _ in 0..n - 1 {
        w = w.omega()?;
    }
    let via_kernel = w.is_acyclic();
    if direct != via_kernel {
        return Err(Error::CharacterizationMismatch(format!(
            "n-mono: direct={direct}, kernel route={via_kernel}"
        )));
    }
    Ok(direct)
}

/// n-epimorphism test: epi at `H^{n-d}` and iso above, cross-checked
/// against `Sigma^{n-1}(cokernel) = 0`.
pub fn is_n_epi<K: Field>(f: &DgMap<K>, n: usize, d: usize) -> Result<bool> {
    assert!(n >= 1 && n <= d);
    let direct = {
        let mut ok = true;
        'outer: for v in 0..f.source.alg.num_vertices() {
            let sv = f.source.vertex_complex(v);
            let tv = f.target.vertex_complex(v);
            let mut blocks = BTreeMap::new();
            for &t in f.source.comps.keys() {
                let rows = f.target.vertex_slots(v, t);
                let cols = f.source.vertex_slots(v, t);
                if rows.is_empty() || cols.is_empty() {
                    continue;
                }
                let b = f.block(t);
                blocks.insert(
                    t,
                    Matrix::from_fn(f.source.field().clone(), rows.len(), cols.len(), |r, c| {
                        b.get(rows[r], cols[c]).clone()
                    }),
                );
            }
            let cm = crate::complex::ChainMap::new(sv, tv, 0, blocks)?;
            let at = n as i32 - d as i32;
            let hm = cm.h_map(at);
            if hm.rank() < hm.rows() {
                ok = false;
                break 'outer;
            }
            for i in at + 1..=0 {
                let m = cm.h_map(i);
                if m.rows() != m.cols() || m.rank() != m.rows() {
                    ok = false;
                    break 'outer;
                }
            }
        }
        ok
    };
    let (coker, _) = cokernel3(f, d)?;
    let mut w = coker;
    for _ in 0..n - 1 {
        w = w.sigma(d)?;
    }
    let via_coker = w.is_acyclic();
    if direct != via_coker {
        return Err(Error::CharacterizationMismatch(format!(
            "n-epi: direct={direct}, cokernel route={via_coker}"
        )));
    }
    Ok(direct)
}

/// A free cover hitting a basis of `H^0(M)` per vertex; a d-epimorphism.
pub fn free_cover<K: Field>(m: &DgModule<K>) -> Result<(DgModule<K>, DgMap<K>, Vec<usize>)> {
    let alg = m.alg.clone();
    let k = alg.field.clone();
    let mut cover = DgModule::zero(alg.clone());
    let mut gens: Vec<(usize, Vec<K::Elem>)> = Vec::new(); // (vertex, cocycle rep)
    for v in 0..alg.num_vertices() {
        let cx = m.vertex_complex(v);
        let h = cx.cohomology(0);
        for ci in 0..h.dim {
            let local = h.reps.column(ci);
            let idx = m.vertex_slots(v, 0);
            let mut full = vec![k.zero(); m.dim(0)];
            for (r, &slot) in idx.iter().enumerate() {
                full[slot] = local[r].clone();
            }
            cover = cover.direct_sum(&DgModule::free(alg.clone(), v, 0));
            gens.push((v, full));
        }
    }
    // assemble the map: the free summand generated at (v, 0) maps by acting
    // on the chosen cocycle
    let mut map = DgMap::zero(cover.clone(), m.clone(), 0);
    // slots of the cover: iterate summands in order and use the free-module
    // slot layout
    let mut blocks: BTreeMap<i32, Vec<Vec<K::Elem>>> = BTreeMap::new(); // degree -> columns
    for (v, rep) in &gens {
        let free = DgModule::free(alg.clone(), *v, 0);
        if let Some((lo, hi)) = free.support() {
            for t in lo..=hi {
                blocks.entry(t).or_default();
            }
        }
        for (&t, cols) in blocks.iter_mut() {
            // columns contributed by this summand at degree t: basis elems b
            // with tgt = v and |b| = t, image rep.b
            for (b, e) in alg.elems.iter().enumerate() {
                if e.tgt == *v && e.degree == t {
                    let img = m.action(b, 0).apply(rep);
                    cols.push(img);
                }
            }
        }
    }
    for (&t, cols) in &blocks {
        if m.dim(t) == 0 || cols.is_empty() {
            continue;
        }
        map.set_block(t, Matrix::from_columns(k.clone(), m.dim(t), cols));
    }
    if !map.is_closed_morphism() {
        return Err(Error::Invariant("free cover is not a closed morphism".into()));
    }
    Ok((cover, map, gens.iter().map(|(v, _)| *v).collect()))
}

/// A projective presentation tower: covers `P^{-i} -> M^{-i}` and kernels,
/// assembled into a band object of `K^{[-d,0]}(P)`.
pub struct Presentation<K: Field> {
    pub covers: Vec<(DgModule<K>, DgMap<K>, Vec<usize>)>,
    pub kernels: Vec<DgModule<K>>,
    pub band: SemiFree<K>,
}

pub fn projective_presentation<K: Field>(m: &DgModule<K>, d: usize) -> Result<Presentation<K>> {
    let alg = m.alg.clone();
    let k = alg.field.clone();
    let mut covers = Vec::new();
    let mut kernels = Vec::new();
    let mut kappas: Vec<DgMap<K>> = Vec::new();
    let mut homotopies: Vec<DgMap<K>> = Vec::new();
    let mut current = m.clone();
    for i in 0..=d {
        let (p, eps, verts) = free_cover(&current)?;
        if !is_n_epi(&eps, d, d)? {
            return Err(Error::Invariant(format!("cover at stage {i} is not a d-epimorphism")));
        }
        let (kernel, kappa, h) = kernel3(&eps)?;
        covers.push((p, eps, verts));
        kernels.push(kernel.clone());
        kappas.push(kappa);
        homotopies.push(h);
        current = kernel;
    }
    // band: generators of level i sit in degree -i; the twisted differential
    // starts from u_i = kappa_{i-1} . eps_i with higher corrections solved
    // degreewise
    let mut gens: Vec<(i32, usize)> = Vec::new();
    let mut gen_range: Vec<(usize, usize)> = Vec::new(); // per level: (offset, count)
    for (i, (_, _, verts)) in covers.iter().enumerate().take(d + 1) {
        gen_range.push((gens.len(), verts.len()));
        for &v in verts {
            gens.push((-(i as i32), v));
        }
    }
    // block components c[i][j]: F_i -> F_j of degree 1-(i-j); start with
    // the u maps and solve the corrections
    let mut comps: BTreeMap<(usize, usize), DgMap<K>> = BTreeMap::new();
    for i in 1..=d {
        // u_i = kappa_{i-1} . eps_i: F_i -> M^{-i} -> F_{i-1}
        let u = covers[i].1.compose(&kappas[i - 1]);
        comps.insert((i, i - 1), u);
    }
    // gap corrections carry the comparison homotopies: the component from
    // level i to level j is a signed word kappa_j . h_{j+1} ... h_{i-1} . eps_i
    for gap in 2..=d {
        for i in gap..=d {
            let j = i - gap;
            let mut word = covers[i].1.clone(); // eps_i
            for mid in (j + 1..i).rev() {
                word = word.compose(&homotopies[mid]);
            }
            word = word.compose(&kappas[j]);
            let exponent = (gap - 1) * i + (gap - 1) * (gap - 2) / 2;
            let sign = if exponent % 2 == 0 { k.one() } else { k.neg(&k.one()) };
            comps.insert((i, j), word.scale(&sign));
        }
    }
    // write delta entries: generator g of level i maps into levels j < i
    let mut delta: Vec<Vec<(usize, Vec<(usize, K::Elem)>)>> = vec![Vec::new(); gens.len()];
    for (&(i, j), cmap) in &comps {
        let (src_off, src_cnt) = gen_range[i];
        let (tgt_off, tgt_cnt) = gen_range[j];
        // the generator of a free summand sits at degree 0, slot = the
        // idempotent slot of its vertex within its summand block
        let src_free = &covers[i].0;
        let tgt_free = &covers[j].0;
        let src_slots = free_generator_slots(src_free, src_cnt);
        let map_deg = 1 - (i as i32 - j as i32);
        for gi in 0..src_cnt {
            let col = src_slots[gi];
            let blk = cmap.block(0);
            if blk.rows() == 0 {
                continue;
            }
            // image lives in F_j^{map_deg}: decompose into g_j . lambda
            let entries = free_element_entries(tgt_free, tgt_cnt, map_deg, &blk.column(col));
            for (gj, lam) in entries {
                delta[src_off + gi].push((tgt_off + gj, lam));
            }
        }
    }
    let band = SemiFree { alg, gens, delta };
    // the band realization must be a module (validates delta^2 = 0 against
    // the corrections)
    band.to_module()?;
    Ok(Presentation { covers, kernels, band })
}

/// Slot index of each summand's degree 0 generator inside a direct sum of
/// `count` free modules generated in degree 0.
fn free_generator_slots<K: Field>(free: &DgModule<K>, count: usize) -> Vec<usize> {
    // free is a direct sum of e_v Lambda blocks; at degree zero each block
    // contributes its idempotent slot first (basis order puts idempotents
    // first within each summand's slot run)
    let slots = free.slots(0);
    let mut out = Vec::new();
    let mut per_block_seen = 0usize;
    let mut expect_vertexes: Vec<usize> = Vec::new();
    // a summand generated at vertex v contributes exactly the degree 0
    // basis elements of e_v Lambda, whose first element is e_v itself
    let _ = &mut expect_vertexes;
    let mut i = 0;
    while i < slots.len() && out.len() < count {
        out.push(i);
        // skip the rest of this block: the number of degree 0 elements with
        // tgt = v
        let v = slots[i];
        let block_len = free
            .alg
            .elems
            .iter()
            .filter(|e| e.tgt == v && e.degree == 0)
            .count();
        i += block_len;
        per_block_seen += 1;
        let _ = per_block_seen;
    }
    out
}

/// Decomposes an element of a sum of degree 0 generated frees into
/// `(generator index, algebra combination)` entries.
fn free_element_entries<K: Field>(
    free: &DgModule<K>,
    count: usize,
    degree: i32,
    coords: &[K::Elem],
) -> Vec<(usize, Vec<(usize, K::Elem)>)> {
    let k = &free.alg.field;
    // slot layout at `degree`: consecutive runs per summand, each run
    // enumerating the basis elements b with tgt = v_summand, |b| = degree
    let slots = free.slots(0);
    let mut verts = Vec::new();
    let mut i = 0;
    while i < slots.len() && verts.len() < count {
        let v = slots[i];
        verts.push(v);
        i += free.alg.elems.iter().filter(|e| e.tgt == v && e.degree == 0).count();
    }
    let mut out: Vec<(usize, Vec<(usize, K::Elem)>)> = Vec::new();
    let mut offset = 0usize;
    for (g, &v) in verts.iter().enumerate() {
        let basis: Vec<usize> = free
            .alg
            .elems
            .iter()
            .enumerate()
            .filter(|(_, e)| e.tgt == v && e.degree == degree)
            .map(|(b, _)| b)
            .collect();
        let mut lam = Vec::new();
        for (run, &b) in basis.iter().enumerate() {
            let c = &coords[offset + run];
            if !k.is_zero(c) {
                lam.push((b, c.clone()));
            }
        }
        offset += basis.len();
        if !lam.is_empty() {
            out.push((g, lam));
        }
    }
    out
}

/// Degrees of the generators of a band, grouped.
fn band_levels<K: Field>(sf: &SemiFree<K>) -> BTreeMap<i32, Vec<usize>> {
    let mut out: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (g, &(dg, _)) in sf.gens.iter().enumerate() {
        out.entry(dg).or_default().push(g);
    }
    out
}

/// Quotient band keeping the generators of degree `<= cutoff`, dropping
/// twisted-differential entries into the removed (shallower) generators.
fn band_bottom_quotient<K: Field>(sf: &SemiFree<K>, cutoff: i32) -> SemiFree<K> {
    let keep: Vec<bool> = sf.gens.iter().map(|&(dg, _)| dg <= cutoff).collect();
    let remap: Vec<Option<usize>> = {
        let mut out = Vec::new();
        let mut next = 0;
        for &k in &keep {
            out.push(if k {
                let i = next;
                next += 1;
                Some(i)
            } else {
                None
            });
        }
        out
    };
    let mut gens = Vec::new();
    let mut delta = Vec::new();
    for (j, &g) in sf.gens.iter().enumerate() {
        if !keep[j] {
            continue;
        }
        gens.push(g);
        let mut row = Vec::new();
        for (i, lam) in &sf.delta[j] {
            if let Some(i2) = remap[*i] {
                row.push((i2, lam.clone()));
            }
        }
        delta.push(row);
    }
    SemiFree { alg: sf.alg.clone(), gens, delta }
}

/// The extension map of the band triangle at `cutoff`: the closed degree 0
/// morphism `u: B_below[-1] -> F_top` whose cone is the band up to `cutoff`,
/// where `F_top` is the free module on the cutoff-degree generators and
/// `B_below` the quotient band strictly below.
fn band_step_map<K: Field>(sf: &SemiFree<K>, cutoff: i32) -> Result<DgMap<K>> {
    let alg = sf.alg.clone();
    let k = alg.field.clone();
    let below = band_bottom_quotient(sf, cutoff - 1);
    let below_module = below.to_module()?.shift(-1);
    // free on the cutoff generators, in place
    let top: Vec<usize> = sf
        .gens
        .iter()
        .enumerate()
        .filter(|&(_, &(dg, _))| dg == cutoff)
        .map(|(g, _)| g)
        .collect();
    let top_sf = SemiFree {
        alg: alg.clone(),
        gens: top.iter().map(|&g| sf.gens[g]).collect(),
        delta: vec![Vec::new(); top.len()],
    };
    let top_module = top_sf.to_module()?;
    let top_slots = top_sf.slot_list();
    let below_slots = below.slot_list();
    // index of the original generator inside `below`
    let below_index: BTreeMap<usize, usize> = sf
        .gens
        .iter()
        .enumerate()
        .filter(|&(_, &(dg, _))| dg < cutoff)
        .enumerate()
        .map(|(new, (old, _))| (old, new))
        .collect();
    let top_index: BTreeMap<usize, usize> =
        top.iter().enumerate().map(|(new, &old)| (old, new)).collect();
    let mut u = DgMap::zero(below_module.clone(), top_module.clone(), 0);
    for (&t, list) in &below_slots {
        // below_module is shifted by -1: its degree t+1 slots are `list`
        let src_degree = t + 1;
        let tgt_list = top_slots.get(&src_degree).cloned().unwrap_or_default();
        if tgt_list.is_empty() || list.is_empty() {
            continue;
        }
        let mut blk = Matrix::zeros(k.clone(), tgt_list.len(), list.len());
        for (c, &(g_new, b)) in list.iter().enumerate() {
            // original generator index of g_new
            let g_old = *below_index.iter().find(|&(_, &v)| v == g_new).map(|(o, _)| o).unwrap();
            for (gi, lam) in &sf.delta[g_old] {
                let Some(&g_top) = top_index.get(gi) else { continue };
                for (l, cl) in lam {
                    for (z, cz) in alg.product(*l, b) {
                        if let Some(r) = tgt_list.iter().position(|&(g2, b2)| (g2, b2) == (g_top, *z)) {
                            let v = k.add(blk.get(r, c), &k.mul(cl, cz));
                            blk.set(r, c, v);
                        }
                    }
                }
            }
        }
        u.set_block(src_degree, blk);
    }
    if !u.is_closed_morphism() {
        return Err(Error::Invariant("band extension map is not a closed morphism".into()));
    }
    Ok(u)
}

fn descend_through_quotient<K: Field>(u: &DgMap<K>, q: &DgMap<K>) -> Result<DgMap<K>> {
    // p with p . q = u, for a degreewise surjective q killing nothing that
    // u sees
    let k = u.source.field().clone();
    let mut p = DgMap::zero(q.target.clone(), u.target.clone(), 0);
    for &t in q.target.comps.keys() {
        let qb = q.block(t);
        let ub = u.block(t);
        if qb.rows() == 0 {
            continue;
        }
        // section: q . s = id
        let id = Matrix::identity(k.clone(), qb.rows());
        let s = qb
            .solve_matrix(&id)
            .ok_or_else(|| Error::Invariant("quotient map is not surjective".into()))?;
        p.set_block(t, ub.mul(&s));
    }
    if !p.is_closed_morphism() {
        return Err(Error::Invariant("descended map is not a closed morphism".into()));
    }
    Ok(p)
}

fn corestrict_through_sub<K: Field>(v: &DgMap<K>, inc: &DgMap<K>) -> Result<DgMap<K>> {
    // phi with inc . phi = v
    let mut phi = DgMap::zero(v.source.clone(), inc.source.clone(), 0);
    for &t in v.source.comps.keys() {
        let ib = inc.block(t);
        let vb = v.block(t);
        if ib.cols() == 0 {
            if vb.is_zero() {
                continue;
            }
            return Err(Error::Invariant("map does not land in the submodule".into()));
        }
        let sol = ib
            .solve_matrix(&vb)
            .ok_or_else(|| Error::Invariant("map does not land in the submodule".into()))?;
        phi.set_block(t, sol);
    }
    if !phi.is_closed_morphism() {
        return Err(Error::Invariant("corestriction is not a closed morphism".into()));
    }
    Ok(phi)
}

/// Permutes band generators ascending by degree (stable), remapping the
/// twisted differential.
fn sort_band<K: Field>(sf: &SemiFree<K>) -> SemiFree<K> {
    let mut order: Vec<usize> = (0..sf.gens.len()).collect();
    order.sort_by_key(|&g| (sf.gens[g].0, g));
    let inv: BTreeMap<usize, usize> = order.iter().enumerate().map(|(new, &old)| (old, new)).collect();
    let gens = order.iter().map(|&g| sf.gens[g]).collect();
    let delta = order
        .iter()
        .map(|&g| {
            sf.delta[g]
                .iter()
                .map(|(i, lam)| (inv[i], lam.clone()))
                .collect()
        })
        .collect();
    SemiFree { alg: sf.alg.clone(), gens, delta }
}

/// Direct and inductive d-iterated cokernel of a band in `K^{[-d,0]}(P)`.
///
/// The inductive route climbs the band one level at a time: the next free
/// level is attached by the cone of the descended extension map and the
/// result re-truncated, mirroring the stepwise pushout description.
pub fn iterated_cokernel<K: Field>(band_in: &SemiFree<K>, d: usize) -> Result<(DgModule<K>, DgModule<K>)> {
    for &(dg, _) in &band_in.gens {
        if dg > 0 || dg < -(d as i32) {
            return Err(Error::ShapeError(format!(
                "cokernel band generator at degree {dg} outside [-d, 0]"
            )));
        }
    }
    let band = sort_band(band_in);
    let k = band.alg.field.clone();
    let dd = d as i32;
    let direct = band.to_module()?.truncate_gt(-dd)?;
    let levels = band_levels(&band);
    let bottom = band_bottom_quotient(&band, -dd);
    let b0 = bottom.to_module()?.shift(-dd);
    let mut cur = b0.truncate_gt(-dd)?;
    let mut q = truncate_gt_map(&b0, d)?;
    for i in 1..=dd {
        let cutoff = -dd + i;
        if !levels.contains_key(&cutoff) {
            // no free part at this level: re-root the ladder in the new frame
            let below = band_bottom_quotient(&band, cutoff);
            let shifted = below.to_module()?.shift(-(dd - i));
            cur = shifted.truncate_gt(-dd)?;
            q = truncate_gt_map(&shifted, d)?;
            continue;
        }
        let u = band_step_map(&band, cutoff)?;
        let sign = if (dd - i).rem_euclid(2) == 0 { k.one() } else { k.neg(&k.one()) };
        let u_shifted = u.shift(-(dd - i)).scale(&sign);
        let p = descend_through_quotient(&u_shifted, &q)?;
        let cone = p.cone()?;
        let next = cone.truncate_gt(-dd)?;
        let tq = truncate_gt_map(&cone, d)?;
        // glue: deep slots through q (one frame up), the new free level
        // identically
        let below = band_bottom_quotient(&band, cutoff);
        let shifted_band = below.to_module()?.shift(-(dd - i));
        let mut phi = DgMap::zero(shifted_band.clone(), cone.clone(), 0);
        for &t in shifted_band.comps.keys() {
            let rows = cone.dim(t);
            let cols = shifted_band.dim(t);
            if rows == 0 || cols == 0 {
                continue;
            }
            let qb = q.block(t + 1);
            let deep_cols = qb.cols();
            let cur_rows = cur.dim(t + 1);
            let mut m = Matrix::zeros(k.clone(), rows, cols);
            for r in 0..cur_rows {
                for c in 0..deep_cols {
                    m.set(r, c, qb.get(r, c).clone());
                }
            }
            for extra in 0..cols - deep_cols {
                m.set(cur_rows + extra, deep_cols + extra, k.one());
            }
            phi.set_block(t, m);
        }
        if !phi.is_closed_morphism() {
            return Err(Error::Invariant("cokernel ladder glue is not closed".into()));
        }
        q = phi.compose(&tq);
        cur = next;
    }
    Ok((direct, cur))
}

/// Direct and inductive d-iterated kernel of a band in `K^{[0,d]}(P)`.
pub fn iterated_kernel<K: Field>(band_in: &SemiFree<K>, d: usize) -> Result<(DgModule<K>, DgModule<K>)> {
    for &(dg, _) in &band_in.gens {
        if dg < 0 || dg > d as i32 {
            return Err(Error::ShapeError(format!(
                "kernel band generator at degree {dg} outside [0, d]"
            )));
        }
    }
    let band = sort_band(band_in);
    let k = band.alg.field.clone();
    let dd = d as i32;
    let direct = band.to_module()?.truncate_le(0)?;
    let levels = band_levels(&band);
    let top_sub = |min_degree: i32| -> Result<SemiFree<K>> {
        let keep: Vec<bool> = band.gens.iter().map(|&(dg, _)| dg >= min_degree).collect();
        band.sub_on_generators(&keep)
    };
    let frame0 = top_sub(dd)?.to_module()?.shift(dd);
    // the ladder runs in sliding frames; at i = d the frame shift is zero
    // and the result compares against the untruncated band directly
    let mut cur = frame0.truncate_le(0)?;
    let mut inc = truncate_le_map(&frame0, 0)?;
    for i in 1..=dd {
        let cutoff = dd - i;
        if !levels.contains_key(&cutoff) {
            let sub = top_sub(cutoff)?;
            let frame = sub.to_module()?.shift(dd - i);
            cur = frame.truncate_le(0)?;
            inc = truncate_le_map(&frame, 0)?;
            continue;
        }
        let w = kernel_step_map(&band, cutoff)?;
        let sigma = if (dd - i + 1).rem_euclid(2) == 0 { k.one() } else { k.neg(&k.one()) };
        let v = w.shift(dd - i + 1).scale(&sigma);
        let phi = corestrict_through_sub(&v, &inc)?;
        let (next, _, _) = kernel3(&phi)?;
        // inclusion of the new kernel into its frame: through the cocone of
        // phi, then (n, x) |-> (n, sigma . inc(x)) into the frame laid out
        // as (new free level, previous frame one degree down)
        let cocone = phi.cocone()?;
        let tinc = truncate_le_map(&cocone, 0)?;
        let sub = top_sub(cutoff)?;
        let frame = sub.to_module()?.shift(dd - i);
        let n_mod = phi.source.clone();
        // block signs depend on the frame parity; search the four patterns
        // for the closed one
        let mut found = None;
        'signs: for deep_neg in [false, true] {
            for n_neg in [false, true] {
                let mut glue = DgMap::zero(cocone.clone(), frame.clone(), 0);
                for &t in cocone.comps.keys() {
                    let rows = frame.dim(t);
                    let cols = cocone.dim(t);
                    if rows == 0 || cols == 0 {
                        continue;
                    }
                    let n_dim = n_mod.dim(t);
                    let ib = inc.block(t - 1);
                    let mut m = Matrix::zeros(k.clone(), rows, cols);
                    for r in 0..n_dim {
                        m.set(r, r, if n_neg { k.neg(&k.one()) } else { k.one() });
                    }
                    for r in 0..ib.rows() {
                        for c in 0..ib.cols() {
                            let v2 = if deep_neg { k.neg(ib.get(r, c)) } else { ib.get(r, c).clone() };
                            m.set(n_dim + r, n_dim + c, v2);
                        }
                    }
                    glue.set_block(t, m);
                }
                if glue.is_closed_morphism() {
                    found = Some(glue);
                    break 'signs;
                }
            }
        }
        let Some(glue) = found else {
            return Err(Error::Invariant("kernel ladder glue is not closed".into()));
        };
        inc = tinc.compose(&glue);
        if !inc.is_closed_morphism() {
            return Err(Error::Invariant("kernel ladder inclusion is not closed".into()));
        }
        cur = next;
    }
    Ok((direct, cur))
}

/// Extension map of a kernel band at its bottom level: `w: F_bottom[-1] ->
/// B_above` reading the twisted differential out of the bottom generators.
fn kernel_step_map<K: Field>(sf: &SemiFree<K>, cutoff: i32) -> Result<DgMap<K>> {
    let alg = sf.alg.clone();
    let k = alg.field.clone();
    let keep_above: Vec<bool> = sf.gens.iter().map(|&(dg, _)| dg > cutoff).collect();
    let above = sf.sub_on_generators(&keep_above)?;
    let above_module = above.to_module()?;
    let bottom: Vec<usize> = sf
        .gens
        .iter()
        .enumerate()
        .filter(|&(_, &(dg, _))| dg == cutoff)
        .map(|(g, _)| g)
        .collect();
    let bottom_sf = SemiFree {
        alg: alg.clone(),
        gens: bottom.iter().map(|&g| sf.gens[g]).collect(),
        delta: vec![Vec::new(); bottom.len()],
    };
    let bottom_module = bottom_sf.to_module()?.shift(-1);
    let bottom_slots = bottom_sf.slot_list();
    let above_slots = above.slot_list();
    let above_index: BTreeMap<usize, usize> = sf
        .gens
        .iter()
        .enumerate()
        .filter(|&(_, &(dg, _))| dg > cutoff)
        .enumerate()
        .map(|(new, (old, _))| (old, new))
        .collect();
    let mut w = DgMap::zero(bottom_module.clone(), above_module.clone(), 0);
    for (&t, list) in &bottom_slots {
        let src_degree = t + 1; // bottom_module is shifted by -1
        let tgt_list = above_slots.get(&src_degree).cloned().unwrap_or_default();
        if tgt_list.is_empty() || list.is_empty() {
            continue;
        }
        let mut blk = Matrix::zeros(k.clone(), tgt_list.len(), list.len());
        for (c, &(g_new, b)) in list.iter().enumerate() {
            let g_old = bottom[g_new];
            for (gi, lam) in &sf.delta[g_old] {
                let Some(&g_above) = above_index.get(gi) else { continue };
                for (l, cl) in lam {
                    for (z, cz) in alg.product(*l, b) {
                        if let Some(r) = tgt_list.iter().position(|&(g2, b2)| (g2, b2) == (g_above, *z)) {
                            let v = k.add(blk.get(r, c), &k.mul(cl, cz));
                            blk.set(r, c, v);
                        }
                    }
                }
            }
        }
        w.set_block(src_degree, blk);
    }
    if !w.is_closed_morphism() {
        return Err(Error::Invariant("kernel band extension map is not closed".into()));
    }
    Ok(w)
}

/// Basis of the space of closed degree 0 module morphisms `M -> N`.
pub fn closed_morphism_space<K: Field>(m: &DgModule<K>, n: &DgModule<K>) -> Vec<DgMap<K>> {
    let k = m.field().clone();
    let degs: Vec<i32> = m.comps.keys().copied().collect();
    let mut offsets = BTreeMap::new();
    let mut total = 0usize;
    for &t in &degs {
        offsets.insert(t, total);
        total += m.dim(t) * n.dim(t);
    }
    if total == 0 {
        return vec![];
    }
    let col_of = |t: i32, r: usize, c: usize| offsets[&t] + r * m.dim(t) + c;
    let mut rows: Vec<Vec<K::Elem>> = Vec::new();
    let mut push_constraint = |entries: Vec<(usize, K::Elem)>| {
        let mut row = vec![k.zero(); total];
        let mut nonzero = false;
        for (i, v) in entries {
            if !k.is_zero(&v) {
                nonzero = true;
            }
            row[i] = k.add(&row[i], &v);
        }
        if nonzero {
            rows.push(row);
        }
    };
    // chain condition: d_N . f - f . d_M = 0
    for &t in &degs {
        let dn = n.diff_at(t);
        let dm = m.diff_at(t);
        for r in 0..n.dim(t + 1) {
            for c in 0..m.dim(t) {
                let mut entries = Vec::new();
                for mid in 0..n.dim(t) {
                    entries.push((col_of(t, mid, c), k.mul(dn.get(r, mid), &k.one())));
                }
                if offsets.contains_key(&(t + 1)) {
                    for mid in 0..m.dim(t + 1) {
                        entries.push((col_of(t + 1, r, mid), k.neg(dm.get(mid, c))));
                    }
                }
                push_constraint(entries);
            }
        }
    }
    // linearity over every algebra basis element
    for a in 0..m.alg.dim() {
        let da = m.alg.degree_of(a);
        for &t in &degs {
            let am = m.action(a, t);
            let an = n.action(a, t);
            for r in 0..n.dim(t + da) {
                for c in 0..m.dim(t) {
                    let mut entries = Vec::new();
                    if offsets.contains_key(&(t + da)) {
                        for mid in 0..m.dim(t + da) {
                            entries.push((col_of(t + da, r, mid), am.get(mid, c).clone()));
                        }
                    }
                    for mid in 0..n.dim(t) {
                        entries.push((col_of(t, mid, c), k.neg(an.get(r, mid))));
                    }
                    push_constraint(entries);
                }
            }
        }
    }
    let mat = if rows.is_empty() {
        Matrix::zeros(k.clone(), 1, total)
    } else {
        Matrix::from_fn(k.clone(), rows.len(), total, |r, c| rows[r][c].clone())
    };
    let kernel = mat.kernel_basis();
    let mut out = Vec::new();
    for ci in 0..kernel.cols() {
        let col = kernel.column(ci);
        let mut f = DgMap::zero(m.clone(), n.clone(), 0);
        for &t in &degs {
            if m.dim(t) == 0 || n.dim(t) == 0 {
                continue;
            }
            f.set_block(
                t,
                Matrix::from_fn(k.clone(), n.dim(t), m.dim(t), |r, c| col[col_of(t, r, c)].clone()),
            );
        }
        debug_assert!(f.is_closed_morphism());
        out.push(f);
    }
    out
}

fn is_quasi_iso_module<K: Field>(f: &DgMap<K>) -> bool {
    for v in 0..f.source.alg.num_vertices() {
        let sv = f.source.vertex_complex(v);
        let tv = f.target.vertex_complex(v);
        let mut blocks = BTreeMap::new();
        for &t in f.source.comps.keys() {
            let rows = f.target.vertex_slots(v, t);
            let cols = f.source.vertex_slots(v, t);
            if rows.is_empty() || cols.is_empty() {
                continue;
            }
            let b = f.block(t);
            blocks.insert(
                t,
                Matrix::from_fn(f.source.field().clone(), rows.len(), cols.len(), |r, c| {
                    b.get(rows[r], cols[c]).clone()
                }),
            );
        }
        let Ok(cm) = crate::complex::ChainMap::new(sv, tv, 0, blocks) else {
            return false;
        };
        if !cm.is_quasi_iso() {
            return false;
        }
    }
    true
}

/// Searches for a closed quasi-isomorphism `M -> N`: basis candidates,
/// then small deterministic combinations, then exhaustive enumeration over
/// finite fields when the space is small.
pub fn find_quasi_iso<K: Field>(m: &DgModule<K>, n: &DgModule<K>) -> Option<DgMap<K>> {
    if m.h_dims() != n.h_dims() {
        return None;
    }
    if m.is_zero_module() && n.is_zero_module() {
        return Some(DgMap::zero(m.clone(), n.clone(), 0));
    }
    if m.is_acyclic() && n.is_acyclic() {
        return Some(DgMap::zero(m.clone(), n.clone(), 0));
    }
    let k = m.field().clone();
    let space = closed_morphism_space(m, n);
    if space.is_empty() {
        return None;
    }
    for f in &space {
        if is_quasi_iso_module(f) {
            return Some(f.clone());
        }
    }
    // pairwise and triple sums with small coefficients
    let coefs: Vec<K::Elem> = match k.all_elements() {
        Some(all) => all,
        None => (-3..=3).filter(|&c| c != 0).map(|c| k.from_i64(c)).collect(),
    };
    for i in 0..space.len() {
        for j in i + 1..space.len() {
            for ci in &coefs {
                for cj in &coefs {
                    let f = space[i].scale(ci).add(&space[j].scale(cj));
                    if is_quasi_iso_module(&f) {
                        return Some(f);
                    }
                }
            }
        }
    }
    // exhaustive over finite fields when feasible
    if let Some(all) = k.all_elements() {
        let dim = space.len();
        if all.len().pow(dim as u32) <= 1 << 16 {
            let mut counter = vec![0usize; dim];
            loop {
                let mut f = DgMap::zero(m.clone(), n.clone(), 0);
                for (i, &ci) in counter.iter().enumerate() {
                    f = f.add(&space[i].scale(&all[ci]));
                }
                if is_quasi_iso_module(&f) {
                    return Some(f);
                }
                let mut pos = 0;
                loop {
                    if pos == dim {
                        return None;
                    }
                    counter[pos] += 1;
                    if counter[pos] < all.len() {
                        break;
                    }
                    counter[pos] = 0;
                    pos += 1;
                }
            }
        }
    }
    // deterministic pseudo-random combinations
    let mut state = 0x9e3779b97f4a7c15u64;
    for _ in 0..200 {
        let mut f = DgMap::zero(m.clone(), n.clone(), 0);
        for g in &space {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let c = k.from_i64(((state >> 33) % 7) as i64 - 3);
            f = f.add(&g.scale(&c));
        }
        if is_quasi_iso_module(&f) {
            return Some(f);
        }
    }
    None
}

/// Isomorphism in the derived category: first look for closed
/// quasi-isomorphisms directly in both directions, then fall back to the
/// resolution route (a class in `H^0 rhom(M, N)` whose representative is a
/// windowed quasi-isomorphism certifies the isomorphism, since the source
/// of the representative is K-projective).
pub fn derived_iso<K: Field>(m: &DgModule<K>, n: &DgModule<K>) -> bool {
    if m.h_dims() != n.h_dims() {
        return false;
    }
    if m.is_acyclic() && n.is_acyclic() {
        return true;
    }
    if find_quasi_iso(m, n).is_some() && find_quasi_iso(n, m).is_some() {
        return true;
    }
    matches!(resolution_iso(m, n), Ok(true))
}

fn resolution_iso<K: Field>(m: &DgModule<K>, n: &DgModule<K>) -> Result<bool> {
    let k = m.field().clone();
    let lo = m
        .support()
        .map(|(a, _)| a)
        .unwrap_or(0)
        .min(n.support().map(|(a, _)| a).unwrap_or(0));
    let depth = (-lo).max(1) as usize + 2;
    let res = semifree_resolution(m, depth)?;
    let rc = rhom_complex(&res.sf, n)?;
    let classes = rc.classes(0);
    if classes.is_empty() {
        return Ok(false);
    }
    let window_lo = lo;
    let is_windowed_qiso = |f: &GenImages<K>| -> bool {
        let map = rc.as_map(&res.module, f);
        for v in 0..m.alg.num_vertices() {
            let sv = map.source.vertex_complex(v);
            let tv = map.target.vertex_complex(v);
            let mut blocks = BTreeMap::new();
            for &t in map.source.comps.keys() {
                let rows = map.target.vertex_slots(v, t);
                let cols = map.source.vertex_slots(v, t);
                if rows.is_empty() || cols.is_empty() {
                    continue;
                }
                let b = map.block(t);
                blocks.insert(
                    t,
                    Matrix::from_fn(k.clone(), rows.len(), cols.len(), |r, c| {
                        b.get(rows[r], cols[c]).clone()
                    }),
                );
            }
            let Ok(cm) = crate::complex::ChainMap::new(sv, tv, 0, blocks) else {
                return false;
            };
            if !cm.is_quasi_iso_in_window(window_lo, 0) {
                return false;
            }
        }
        true
    };
    for f in &classes {
        if is_windowed_qiso(f) {
            return Ok(true);
        }
    }
    // combinations over finite fields, exhaustively when feasible
    if let Some(all) = k.all_elements() {
        let dim = classes.len();
        if (all.len() as f64).powi(dim as i32) <= 65536.0 {
            let mut counter = vec![0usize; dim];
            loop {
                let mut f = GenImages {
                    degree: 0,
                    images: res
                        .sf
                        .gens
                        .iter()
                        .map(|&(dg, _)| vec![k.zero(); n.dim(dg)])
                        .collect(),
                };
                for (i, &ci) in counter.iter().enumerate() {
                    for (g, img) in classes[i].images.iter().enumerate() {
                        for (r, v) in img.iter().enumerate() {
                            f.images[g][r] = k.add(&f.images[g][r], &k.mul(&all[ci], v));
                        }
                    }
                }
                if is_windowed_qiso(&f) {
                    return Ok(true);
                }
                let mut pos = 0;
                loop {
                    if pos == dim {
                        return Ok(false);
                    }
                    counter[pos] += 1;
                    if counter[pos] < all.len() {
                        break;
                    }
                    counter[pos] = 0;
                    pos += 1;
                }
            }
        }
    }
    // deterministic pseudo-random combinations over infinite fields
    let mut state = 0x517cc1b727220a95u64;
    for _ in 0..200 {
        let mut f = GenImages {
            degree: 0,
            images: res
                .sf
                .gens
                .iter()
                .map(|&(dg, _)| vec![k.zero(); n.dim(dg)])
                .collect(),
        };
        for cls in &classes {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let c = k.from_i64(((state >> 33) % 7) as i64 - 3);
            for (g, img) in cls.images.iter().enumerate() {
                for (r, v) in img.iter().enumerate() {
                    f.images[g][r] = k.add(&f.images[g][r], &k.mul(&c, v));
                }
            }
        }
        if is_windowed_qiso(&f) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// The regular representation of the algebra as a right module over itself.
pub fn regular_module<K: Field>(alg: &Arc<GradedAlgebra<K>>) -> DgModule<K> {
    let mut out = DgModule::zero(alg.clone());
    for v in 0..alg.num_vertices() {
        out = out.direct_sum(&DgModule::free(alg.clone(), v, 0));
    }
    out
}

/// The k-dual of the regular bimodule as a right module over the same
/// algebra, via the left multiplication: `(f . a)(x) = f(a x)`.
pub fn dual_regular_module<K: Field>(alg: &Arc<GradedAlgebra<K>>) -> Result<DgModule<K>> {
    let k = alg.field.clone();
    let reg = regular_module(alg);
    // slots of D(Lambda)^t: dual of Lambda^{-t}; the vertex of a dual slot
    // is the tgt of the underlying basis element (e_v . f != 0 needs
    // f supported on v-target elements... (f.e_v)(x) = f(e_v x))
    let mut comps: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    let slot_elem: BTreeMap<i32, Vec<usize>> = {
        let mut out: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
        for (i, e) in alg.elems.iter().enumerate() {
            out.entry(-e.degree).or_default().push(i);
        }
        out
    };
    for (&t, els) in &slot_elem {
        comps.insert(t, els.iter().map(|&i| alg.elems[i].tgt).collect());
    }
    let find = |t: i32, e: usize| slot_elem.get(&t).and_then(|v| v.iter().position(|&x| x == e));
    // d(f) = -(-1)^{|f|} f . d
    let mut diff: BTreeMap<i32, Matrix<K>> = BTreeMap::new();
    for (&t, els) in &slot_elem {
        let rows = slot_elem.get(&(t + 1)).map_or(0, |v| v.len());
        if rows == 0 {
            continue;
        }
        let mut m = Matrix::zeros(k.clone(), rows, els.len());
        for (c, &e) in els.iter().enumerate() {
            // f = e^* has degree t = -|e|; f.d_M nonzero on x with d(x) ~ e
            for (x, ex) in alg.elems.iter().enumerate() {
                let _ = ex;
                for (y, cy) in alg.d_of(x) {
                    if *y == e {
                        if let Some(r) = find(t + 1, x) {
                            let sign = if t.rem_euclid(2) == 0 { k.neg(&k.one()) } else { k.one() };
                            let v = k.add(m.get(r, c), &k.mul(&sign, cy));
                            m.set(r, c, v);
                        }
                    }
                }
            }
        }
        if !m.is_zero() {
            diff.insert(t, m);
        }
    }
    // (e_i^* . a)(x) = e_i^*(a x): nonzero iff a x hits e_i
    let mut act: Vec<BTreeMap<i32, Matrix<K>>> = vec![BTreeMap::new(); alg.dim()];
    #[allow(clippy::needless_range_loop)]
    for a in 0..alg.dim() {
        let da = alg.degree_of(a);
        for (&t, els) in &slot_elem {
            let ta = t + da;
            let rows = slot_elem.get(&ta).map_or(0, |v| v.len());
            if rows == 0 {
                continue;
            }
            let mut m = Matrix::zeros(k.clone(), rows, els.len());
            for (c, &e) in els.iter().enumerate() {
                // (e^* . a)(x) = e^*(a x) = coefficient of e in a*x
                for (x, _) in alg.elems.iter().enumerate() {
                    if -alg.degree_of(x) != ta {
                        continue;
                    }
                    for (z, cz) in alg.product(a, x) {
                        if *z == e {
                            if let Some(r) = find(ta, x) {
                                let v = k.add(m.get(r, c), cz);
                                m.set(r, c, v);
                            }
                        }
                    }
                }
            }
            if !m.is_zero() {
                act[a].insert(t, m);
            }
        }
    }
    let _ = reg;
    DgModule::new(alg.clone(), comps, diff, act)
}

/// Report of the d-self-injectivity probe: per probed shift, whether a
/// closed degree 0 quasi-isomorphism `Lambda -> D(Lambda)[s]` exists.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SelfInjReport {
    pub shifts: BTreeMap<i32, bool>,
    pub positive: bool,
}

pub fn self_injectivity_probe<K: Field>(alg: &Arc<GradedAlgebra<K>>, d: usize) -> Result<SelfInjReport> {
    let reg = regular_module(alg);
    let dual = dual_regular_module(alg)?;
    let mut shifts = BTreeMap::new();
    for s in [d as i32 - 1, d as i32] {
        let shifted = dual.shift(s);
        let found = find_quasi_iso(&reg, &shifted).is_some() && find_quasi_iso(&shifted, &reg).is_some();
        shifts.insert(s, found);
    }
    let positive = shifts.values().any(|&b| b);
    Ok(SelfInjReport { shifts, positive })
}

/// Enumerates the nonzero indecomposables of `dem(alg)` over a finite field
/// up to derived isomorphism, by brute force over action and differential
/// matrices on window-supported dimension vectors.
pub fn enumerate_dem_indecomposables<K: Field>(
    alg: &Arc<GradedAlgebra<K>>,
    d: usize,
    max_total_dim: usize,
) -> Result<Vec<DgModule<K>>> {
    let k = alg.field.clone();
    let elems = k
        .all_elements()
        .ok_or_else(|| Error::Config("brute force enumeration needs a finite field".into()))?;
    let (generators, words) = alg.generator_words()?;
    let nv = alg.num_vertices();
    let window: Vec<i32> = (-(d as i32) + 1..=0).collect();
    // dimension vectors over (degree, vertex)
    let slots: Vec<(i32, usize)> = window.iter().flat_map(|&t| (0..nv).map(move |v| (t, v))).collect();
    let mut dim_vectors: Vec<Vec<usize>> = vec![vec![0; slots.len()]];
    for pos in 0..slots.len() {
        let mut next = Vec::new();
        for dv in &dim_vectors {
            let used: usize = dv.iter().sum();
            for extra in 0..=(max_total_dim - used) {
                let mut dv2 = dv.clone();
                dv2[pos] = extra;
                next.push(dv2);
            }
        }
        dim_vectors = next;
    }
    let mut found: Vec<DgModule<K>> = Vec::new();
    for dv in &dim_vectors {
        let total: usize = dv.iter().sum();
        if total == 0 || total > max_total_dim {
            continue;
        }
        let dim_at = |t: i32, v: usize| -> usize {
            slots
                .iter()
                .position(|&(tt, vv)| (tt, vv) == (t, v))
                .map_or(0, |i| dv[i])
        };
        let comps: BTreeMap<i32, Vec<usize>> = window
            .iter()
            .filter_map(|&t| {
                let mut vlist = Vec::new();
                for v in 0..nv {
                    vlist.extend(std::iter::repeat(v).take(dim_at(t, v)));
                }
                (!vlist.is_empty()).then_some((t, vlist))
            })
            .collect();
        if comps.is_empty() {
            continue;
        }
        // unknown matrices: per generator g: per degree t: block from
        // (t, tgt(g)) to (t+|g|, src(g)); plus the differential blocks
        let mut unknowns: Vec<(usize, i32, usize, usize)> = Vec::new(); // (which, degree, rows, cols)
        for (gi, &g) in generators.iter().enumerate() {
            let e = &alg.elems[g];
            for &t in &window {
                let rows = dim_at(t + e.degree, e.src);
                let cols = dim_at(t, e.tgt);
                if rows > 0 && cols > 0 {
                    unknowns.push((gi, t, rows, cols));
                }
            }
        }
        let diff_mark = generators.len();
        for &t in &window {
            for v in 0..nv {
                let rows = dim_at(t + 1, v);
                let cols = dim_at(t, v);
                if rows > 0 && cols > 0 {
                    unknowns.push((diff_mark + v, t, rows, cols));
                }
            }
        }
        let cells: usize = unknowns.iter().map(|&(_, _, r, c)| r * c).sum();
        let combos = (elems.len() as f64).powi(cells as i32);
        if combos > 2e7 {
            return Err(Error::Config(format!(
                "enumeration space too large ({cells} cells over {} elements)",
                elems.len()
            )));
        }
        let mut counter = vec![0usize; cells];
        'outer: loop {
            // build candidate
            let mut cursor = 0usize;
            let mut gen_blocks: Vec<BTreeMap<i32, Matrix<K>>> = vec![BTreeMap::new(); generators.len()];
            let mut diff_blocks: BTreeMap<i32, Matrix<K>> = BTreeMap::new();
            for &(which, t, rows, cols) in &unknowns {
                let m = Matrix::from_fn(k.clone(), rows, cols, |r, c| {
                    elems[counter[cursor + r * cols + c]].clone()
                });
                cursor += rows * cols;
                if which < diff_mark {
                    gen_blocks[which].insert(t, m);
                } else {
                    // embed the per-vertex differential into the full block
                    let v = which - diff_mark;
                    let full = diff_blocks.entry(t).or_insert_with(|| {
                        Matrix::zeros(
                            k.clone(),
                            comps.get(&(t + 1)).map_or(0, |x| x.len()),
                            comps.get(&t).map_or(0, |x| x.len()),
                        )
                    });
                    let rows_idx: Vec<usize> = comps
                        .get(&(t + 1))
                        .map(|l| l.iter().enumerate().filter(|&(_, &w)| w == v).map(|(i, _)| i).collect())
                        .unwrap_or_default();
                    let cols_idx: Vec<usize> = comps
                        .get(&t)
                        .map(|l| l.iter().enumerate().filter(|&(_, &w)| w == v).map(|(i, _)| i).collect())
                        .unwrap_or_default();
                    for (r, &ri) in rows_idx.iter().enumerate() {
                        for (c, &ci) in cols_idx.iter().enumerate() {
                            full.set(ri, ci, m.get(r, c).clone());
                        }
                    }
                }
            }
            // assemble all basis-element actions from the generator words
            let mut ok = true;
            let mut act: Vec<BTreeMap<i32, Matrix<K>>> = vec![BTreeMap::new(); alg.dim()];
            for a in 0..alg.dim() {
                if a < nv {
                    continue; // idempotents are structural
                }
                let Some((scalar, word)) = words[a].clone() else {
                    ok = false;
                    break;
                };
                let ea = &alg.elems[a];
                for &t in &window {
                    let rows = dim_at(t + ea.degree, ea.src);
                    let cols = dim_at(t, ea.tgt);
                    if rows == 0 || cols == 0 {
                        continue;
                    }
                    // m.(g . y) = (m.g).y: the outermost word letter acts
                    // first on a right module, so walk the word in reverse
                    let mut cur: Option<Matrix<K>> = None;
                    let mut cur_deg = t;
                    for &g in word.iter().rev() {
                        let gi = generators.iter().position(|&x| x == g).unwrap();
                        let ge = &alg.elems[g];
                        let gb = gen_blocks[gi].get(&cur_deg).cloned().unwrap_or_else(|| {
                            Matrix::zeros(
                                k.clone(),
                                dim_at(cur_deg + ge.degree, ge.src),
                                dim_at(cur_deg, ge.tgt),
                            )
                        });
                        cur = Some(match cur {
                            None => gb,
                            Some(prev) => gb.mul(&prev),
                        });
                        cur_deg += ge.degree;
                    }
                    let m = cur.unwrap().scale(&k.inv(&scalar));
                    act[a].insert(t, m);
                }
            }
            if ok {
                // generator actions themselves
                for (gi, &g) in generators.iter().enumerate() {
                    for (&t, m) in &gen_blocks[gi] {
                        act[g].insert(t, m.clone());
                    }
                }
                // expand per-vertex action matrices to full blocks
                let mut full_act: Vec<BTreeMap<i32, Matrix<K>>> = vec![BTreeMap::new(); alg.dim()];
                for a in nv..alg.dim() {
                    let ea = &alg.elems[a];
                    for (&t, m) in &act[a] {
                        let rows_idx: Vec<usize> = comps
                            .get(&(t + ea.degree))
                            .map(|l| l.iter().enumerate().filter(|&(_, &w)| w == ea.src).map(|(i, _)| i).collect())
                            .unwrap_or_default();
                        let cols_idx: Vec<usize> = comps
                            .get(&t)
                            .map(|l| l.iter().enumerate().filter(|&(_, &w)| w == ea.tgt).map(|(i, _)| i).collect())
                            .unwrap_or_default();
                        if rows_idx.is_empty() || cols_idx.is_empty() {
                            continue;
                        }
                        let full = Matrix::from_fn(
                            k.clone(),
                            comps.get(&(t + ea.degree)).map_or(0, |l| l.len()),
                            comps.get(&t).map_or(0, |l| l.len()),
                            |r, c| {
                                match (rows_idx.iter().position(|&x| x == r), cols_idx.iter().position(|&x| x == c)) {
                                    (Some(rr), Some(cc)) => m.get(rr, cc).clone(),
                                    _ => k.zero(),
                                }
                            },
                        );
                        full_act[a].insert(t, full);
                    }
                }
                if let Ok(candidate) = DgModule::new(alg.clone(), comps.clone(), diff_blocks.clone(), full_act) {
                    if !candidate.is_acyclic() && candidate.in_dem_window(d) {
                        let mut is_new = true;
                        for seen in &found {
                            if seen.h_dims() == candidate.h_dims() && derived_iso(seen, &candidate) {
                                is_new = false;
                                break;
                            }
                        }
                        if is_new && is_indecomposable(&candidate)? {
                            found.push(candidate);
                        }
                    }
                }
            }
            // increment counter
            let mut pos = 0;
            loop {
                if pos == cells {
                    break 'outer;
                }
                counter[pos] += 1;
                if counter[pos] < elems.len() {
                    break;
                }
                counter[pos] = 0;
                pos += 1;
            }
            if cells == 0 {
                break;
            }
        }
    }
    Ok(found)
}

/// Indecomposability via idempotents of `H^0 End`: searches the endomorphism
/// classes for a nontrivial idempotent, using the resolution-based
/// composition.
pub fn is_indecomposable<K: Field>(m: &DgModule<K>) -> Result<bool> {
    if m.is_zero_module() || m.is_acyclic() {
        return Ok(false);
    }
    let k = m.field().clone();
    let d_guess = m
        .support()
        .map(|(lo, _)| (-lo).max(1) as usize + 1)
        .unwrap_or(2);
    let res = semifree_resolution(m, d_guess + 2)?;
    let rc = rhom_complex(&res.sf, m)?;
    let classes = rc.classes(0);
    let dim = classes.len();
    if dim <= 1 {
        return Ok(true);
    }
    // compose in End via lifting and test e^2 = e on the elements of the
    // span; finite fields are enumerated, infinite fields use the basis and
    // small combinations
    let compose = |f: &GenImages<K>, g: &GenImages<K>| -> Result<Vec<K::Elem>> {
        let lifted = lift_gen_images(&res, f)?;
        // g . lifted: images of generators through the lift then g
        let gmap = rc.as_map(&res.module, g);
        let mut images = Vec::new();
        for (gi, _) in res.sf.gens.iter().enumerate() {
            let target_deg = res.sf.gens[gi].0;
            let coords = &lifted[gi];
            let img = gmap.block(target_deg).apply(coords);
            images.push(img);
        }
        Ok(rc.project(&GenImages { degree: 0, images }))
    };
    // structure constants of End
    let mut table: Vec<Vec<Vec<K::Elem>>> = Vec::new();
    for f in &classes {
        let mut row = Vec::new();
        for g in &classes {
            row.push(compose(f, g)?);
        }
        table.push(row);
    }
    let id_coords = rc.project(&identity_gen_images(&res));
    let mul = |x: &[K::Elem], y: &[K::Elem]| -> Vec<K::Elem> {
        let mut out = vec![k.zero(); dim];
        for i in 0..dim {
            for j in 0..dim {
                let c = k.mul(&x[i], &y[j]);
                if k.is_zero(&c) {
                    continue;
                }
                for t in 0..dim {
                    out[t] = k.add(&out[t], &k.mul(&c, &table[i][j][t]));
                }
            }
        }
        out
    };
    let candidates: Vec<Vec<K::Elem>> = match k.all_elements() {
        Some(all) => {
            let mut out = Vec::new();
            let mut counter = vec![0usize; dim];
            if all.len().pow(dim as u32) <= 1 << 16 {
                loop {
                    out.push(counter.iter().map(|&c| all[c].clone()).collect());
                    let mut pos = 0;
                    loop {
                        if pos == dim {
                            return check_idempotents(&k, out, &mul, &id_coords);
                        }
                        counter[pos] += 1;
                        if counter[pos] < all.len() {
                            break;
                        }
                        counter[pos] = 0;
                        pos += 1;
                    }
                }
            }
            out
        }
        None => Vec::new(),
    };
    if !candidates.is_empty() {
        return check_idempotents(&k, candidates, &mul, &id_coords);
    }
    // infinite field: look for idempotents among the basis and pairwise
    // combinations (sufficient at this scale; a local ring has none)
    let mut cands: Vec<Vec<K::Elem>> = Vec::new();
    for i in 0..dim {
        let mut v = vec![k.zero(); dim];
        v[i] = k.one();
        cands.push(v);
    }
    for i in 0..dim {
        for j in 0..dim {
            if i == j {
                continue;
            }
            for ci in [-2i64, -1, 1, 2] {
                for cj in [-2i64, -1, 1, 2] {
                    let mut v = vec![k.zero(); dim];
                    v[i] = k.from_i64(ci);
                    v[j] = k.from_i64(cj);
                    cands.push(v);
                }
            }
        }
    }
    check_idempotents(&k, cands, &mul, &id_coords)
}

fn check_idempotents<K: Field>(
    k: &K,
    candidates: Vec<Vec<K::Elem>>,
    mul: &impl Fn(&[K::Elem], &[K::Elem]) -> Vec<K::Elem>,
    id_coords: &[K::Elem],
) -> Result<bool> {
    for e in candidates {
        if e.iter().all(|c| k.is_zero(c)) {
            continue;
        }
        let is_id = e
            .iter()
            .zip(id_coords.iter())
            .all(|(a, b)| k.is_zero(&k.sub(a, b)));
        if is_id {
            continue;
        }
        if mul(&e, &e) == e {
            return Ok(false);
        }
    }
    Ok(true)
}

fn identity_gen_images<K: Field>(res: &Resolution<K>) -> GenImages<K> {
    // eps itself, recorded by generator images
    let mut images = Vec::new();
    for (g, &(dg, _)) in res.sf.gens.iter().enumerate() {
        // eps(g) is the image of the generator slot under eps
        let slots = res.sf.slot_list();
        let list = slots.get(&dg).cloned().unwrap_or_default();
        let slot = list
            .iter()
            .position(|&(g2, b)| g2 == g && b < res.sf.alg.num_vertices())
            .expect("generator slot");
        let col: Vec<K::Elem> = {
            let blk = res.eps.block(dg);
            (0..blk.rows()).map(|r| blk.get(r, slot).clone()).collect()
        };
        images.push(col);
    }
    GenImages { degree: 0, images }
}

/// Lifts a map recorded by generator images through the comparison map of
/// the same resolution: returns per-generator coordinates in the semifree
/// module such that eps of the lift is homotopic to the original.
pub fn lift_gen_images<K: Field>(res: &Resolution<K>, f: &GenImages<K>) -> Result<Vec<Vec<K::Elem>>> {
    lift_gen_images_through(res, res, f)
}

/// Lifts `f: P_src -> N` (recorded on the generators of `res_src`) through
/// the comparison map of `res_tgt` (a resolution of `N`), producing
/// per-generator coordinates in the target semifree module.
pub fn lift_gen_images_through<K: Field>(
    res_src: &Resolution<K>,
    res_tgt: &Resolution<K>,
    f: &GenImages<K>,
) -> Result<Vec<Vec<K::Elem>>> {
    let res = LiftPair { src: res_src, tgt: res_tgt };
    res.run(f)
}

struct LiftPair<'a, K: Field> {
    src: &'a Resolution<K>,
    tgt: &'a Resolution<K>,
}

impl<'a, K: Field> LiftPair<'a, K> {
    fn run(&self, f: &GenImages<K>) -> Result<Vec<Vec<K::Elem>>> {
        let res = self.tgt;
        let src = self.src;
        let k = src.sf.alg.field.clone();
        let p = &res.module;
        let slots = src.sf.slot_list();
    let mut lift: Vec<Vec<K::Elem>> = Vec::new(); // per generator: coords in P^{deg g + f.degree}
    let mut homo: Vec<Vec<K::Elem>> = Vec::new(); // per generator: coords in M^{deg g + f.degree - 1}
    for (g, &(dg, _v)) in src.sf.gens.iter().enumerate() {
        let tdeg = dg + f.degree;
        // delta(g) expanded in P-slot coordinates at degree dg + 1
        let empty = Vec::new();
        let next_list = slots.get(&(dg + 1)).unwrap_or(&empty);
        let mut delta_coords = vec![k.zero(); next_list.len()];
        for (g2, lam) in &src.sf.delta[g] {
            for (l, cl) in lam {
                if let Some(i) = next_list.iter().position(|&(gg, bb)| gg == *g2 && bb == *l) {
                    delta_coords[i] = k.add(&delta_coords[i], cl);
                }
            }
        }
        // L(delta g) and h(delta g): extend linearly over algebra action
        let lift_of_elem = |coords: &Vec<Vec<K::Elem>>, at: i32, elem_coords: &[K::Elem], list: &[(usize, usize)]| -> Vec<K::Elem> {
            // element sum (g2, b) -> acts: L(g2 . b) = L(g2) . b
            let mut out = vec![k.zero(); p.dim(at + f.degree)];
            for (i, c) in elem_coords.iter().enumerate() {
                if k.is_zero(c) {
                    continue;
                }
                let (g2, b) = list[i];
                let (dg2, _) = src.sf.gens[g2];
                let acted = p.action(b, dg2 + f.degree).apply(&coords[g2]);
                for (r, v) in acted.iter().enumerate() {
                    out[r] = k.add(&out[r], &k.mul(c, v));
                }
            }
            out
        };
        let l_delta = lift_of_elem(&lift, dg + 1, &delta_coords, next_list);
        let m_mod = &res.eps.target;
        let h_delta = {
            let mut out = vec![k.zero(); m_mod.dim(dg + f.degree)];
            for (i, c) in delta_coords.iter().enumerate() {
                if k.is_zero(c) {
                    continue;
                }
                let (g2, b) = next_list[i];
                let (dg2, _) = src.sf.gens[g2];
                if homo.len() > g2 {
                    let acted = m_mod.action(b, dg2 + f.degree - 1).apply(&homo[g2]);
                    for (r, v) in acted.iter().enumerate() {
                        out[r] = k.add(&out[r], &k.mul(c, v));
                    }
                }
            }
            out
        };
        // solve d_P x = L(delta g), eps(x) - d_M y = f(g) + h(delta g)
        let dp = p.diff_at(tdeg);
        let ep = res.eps.block(tdeg);
        let dm = m_mod.diff_at(tdeg - 1);
        let nx = p.dim(tdeg);
        let ny = m_mod.dim(tdeg - 1);
        let rows = p.dim(tdeg + 1) + m_mod.dim(tdeg);
        let mut mat = Matrix::zeros(k.clone(), rows, nx + ny);
        let mut rhs = vec![k.zero(); rows];
        for r in 0..p.dim(tdeg + 1) {
            for c in 0..nx {
                mat.set(r, c, dp.get(r, c).clone());
            }
            rhs[r] = l_delta[r].clone();
        }
        for r in 0..m_mod.dim(tdeg) {
            for c in 0..nx {
                mat.set(p.dim(tdeg + 1) + r, c, ep.get(r, c).clone());
            }
            for c in 0..ny {
                mat.set(p.dim(tdeg + 1) + r, nx + c, k.neg(dm.get(r, c)));
            }
            rhs[p.dim(tdeg + 1) + r] = k.add(&f.images[g][r], &h_delta[r]);
        }
        let sol = mat
            .solve(&rhs)
            .ok_or_else(|| Error::Invariant("resolution lift obstruction did not vanish".into()))?;
        lift.push(sol[..nx].to_vec());
        homo.push(sol[nx..].to_vec());
    }
        Ok(lift)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PrimeField, Rationals};
    use crate::quiver::{PresentationSpec, QuiverPresentation};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn q() -> Rationals {
        Rationals
    }

    fn example1_alg() -> Arc<GradedAlgebra<Rationals>> {
        let spec: PresentationSpec = serde_json::from_value(serde_json::json!({
            "vertices": ["1", "2"],
            "arrows": [
                {"name": "a", "from": "1", "to": "2", "degree": -1},
                {"name": "b", "from": "2", "to": "1", "degree": -1}
            ],
            "relations": [
                [{"coef": "1", "path": ["a", "b"]}],
                [{"coef": "1", "path": ["b", "a"]}]
            ]
        }))
        .unwrap();
        Arc::new(QuiverPresentation::from_spec(q(), &spec).unwrap().enumerate_basis(4).unwrap())
    }

    fn example2_alg() -> Arc<GradedAlgebra<Rationals>> {
        let spec: PresentationSpec = serde_json::from_value(serde_json::json!({
            "vertices": ["1", "2", "3"],
            "arrows": [
                {"name": "al", "from": "1", "to": "2", "degree": 0},
                {"name": "be", "from": "2", "to": "3", "degree": -1},
                {"name": "ga", "from": "3", "to": "2", "degree": -1}
            ],
            "relations": [
                [{"coef": "1", "path": ["ga", "be"]}],
                [{"coef": "1", "path": ["be", "ga"]}]
            ]
        }))
        .unwrap();
        Arc::new(QuiverPresentation::from_spec(q(), &spec).unwrap().enumerate_basis(6).unwrap())
    }

    fn example1_alg_f2() -> Arc<GradedAlgebra<PrimeField>> {
        let k = PrimeField::new(2).unwrap();
        let spec: PresentationSpec = serde_json::from_value(serde_json::json!({
            "vertices": ["1", "2"],
            "arrows": [
                {"name": "a", "from": "1", "to": "2", "degree": -1},
                {"name": "b", "from": "2", "to": "1", "degree": -1}
            ],
            "relations": [
                [{"coef": "1", "path": ["a", "b"]}],
                [{"coef": "1", "path": ["b", "a"]}]
            ]
        }))
        .unwrap();
        Arc::new(QuiverPresentation::from_spec(k, &spec).unwrap().enumerate_basis(4).unwrap())
    }

    /// The simple module at a vertex, concentrated in one degree.
    fn simple<K: Field>(alg: &Arc<GradedAlgebra<K>>, v: usize, deg: i32) -> DgModule<K> {
        let comps = [(deg, vec![v])].into_iter().collect();
        DgModule::new(alg.clone(), comps, BTreeMap::new(), vec![BTreeMap::new(); alg.dim()]).unwrap()
    }

    #[test]
    fn free_modules_validate() {
        for alg in [example1_alg(), example2_alg()] {
            for v in 0..alg.num_vertices() {
                let f = DgModule::free(alg.clone(), v, 0);
                assert!(!f.is_zero_module());
                assert!(f.in_dem_window(2));
            }
        }
    }

    #[test]
    fn resolution_of_regular_module_is_trivial() {
        let alg = example1_alg();
        let reg = regular_module(&alg);
        let res = semifree_resolution(&reg, 4).unwrap();
        assert_eq!(res.sf.gens.len(), 2); // one generator per vertex
        assert!(res.eps.cone().unwrap().is_acyclic());
    }

    #[test]
    fn resolution_comparison_window() {
        let alg = example1_alg();
        let s1 = simple(&alg, 0, 0);
        let res = semifree_resolution(&s1, 4).unwrap();
        let cone = res.eps.cone().unwrap();
        for ((i, _), _) in cone.h_dims() {
            assert!(i < -4, "cone cohomology at {i} inside the window");
        }
    }

    #[test]
    fn rhom_free_source_gives_cohomology() {
        let alg = example2_alg();
        let m = simple(&alg, 1, 0);
        for v in 0..alg.num_vertices() {
            let free = DgModule::free(alg.clone(), v, 0);
            let dims = rhom_dims(&free, &m, -2..=0, 4, 2).unwrap();
            let expected: BTreeMap<i32, usize> = m
                .vertex_complex(v)
                .h_dims()
                .into_iter()
                .filter(|&(i, _)| (-2..=0).contains(&i))
                .collect();
            assert_eq!(dims, expected);
        }
    }

    #[test]
    fn rhom_independent_of_resolution() {
        let alg = example1_alg();
        let modules = [simple(&alg, 0, 0), simple(&alg, 1, -1), regular_module(&alg)];
        for m in &modules {
            for n in &modules {
                let r1 = semifree_resolution_ordered(m, 4, false).unwrap();
                let r2 = semifree_resolution_ordered(m, 4, true).unwrap();
                let c1 = rhom_complex(&r1.sf, n).unwrap();
                let c2 = rhom_complex(&r2.sf, n).unwrap();
                for t in -2..=0 {
                    assert_eq!(c1.h_dim(t), c2.h_dim(t));
                }
            }
        }
    }

    #[test]
    fn kernel_cokernel_trivial_cases() {
        let alg = example1_alg();
        let m = regular_module(&alg);
        let id = DgMap::identity(&m);
        let (ker, _, _) = kernel3(&id).unwrap();
        assert!(ker.is_acyclic());
        let (coker, _) = cokernel3(&id, 2).unwrap();
        assert!(coker.is_acyclic());
        // zero maps: kernel3(0: X -> Y) = X (+) Omega(Y) and dually; with Y
        // concentrated in degree 0 the loop part vanishes
        let s = simple(&alg, 0, 0);
        let y0 = simple(&alg, 1, 0);
        let zero = DgMap::zero(s.clone(), y0.clone(), 0);
        let (ker, _, _) = kernel3(&zero).unwrap();
        assert_eq!(ker.h_dims(), s.h_dims());
        // and with X concentrated in degree -d+1 the suspension part of the
        // cokernel vanishes
        let deep = simple(&alg, 0, -1);
        let zero2 = DgMap::zero(deep.clone(), y0.clone(), 0);
        let (coker, _) = cokernel3(&zero2, 2).unwrap();
        assert_eq!(coker.h_dims(), y0.h_dims());
        // in general the loop and suspension parts appear
        let zero3 = DgMap::zero(s.clone(), m.clone(), 0);
        let (ker3, _, _) = kernel3(&zero3).unwrap();
        let expected = s.direct_sum(&m.omega().unwrap());
        assert_eq!(ker3.h_dims(), expected.h_dims());
    }

    #[test]
    fn d_equals_one_reduces_to_classical_kernels() {
        // kA_2 in degree 0: kernel3/cokernel3 against plain linear algebra
        let spec: PresentationSpec = serde_json::from_value(serde_json::json!({
            "vertices": ["1", "2"],
            "arrows": [{"name": "a", "from": "1", "to": "2", "degree": 0}]
        }))
        .unwrap();
        let alg = Arc::new(QuiverPresentation::from_spec(q(), &spec).unwrap().enumerate_basis(4).unwrap());
        // right projective e_2 Lambda has slots e_2 (vertex 2) and the
        // arrow (vertex 1); include the simple at vertex 1 onto the arrow
        // slot and compare with the classical kernel and cokernel
        let p = DgModule::free(alg.clone(), 1, 0);
        let s1 = simple(&alg, 0, 0);
        let mut f = DgMap::zero(s1.clone(), p.clone(), 0);
        let slot = p.slots(0).iter().position(|&v| v == 0).unwrap();
        let mut blk = Matrix::zeros(q(), p.dim(0), 1);
        blk.set(slot, 0, q().one());
        f.set_block(0, blk);
        assert!(f.is_closed_morphism());
        let (ker, _, _) = kernel3(&f).unwrap();
        assert!(ker.is_acyclic(), "injective map has acyclic kernel");
        let (coker, _) = cokernel3(&f, 1).unwrap();
        // classical cokernel: the simple at vertex 2
        assert_eq!(coker.h_dims(), [((0, 1), 1)].into_iter().collect());
    }

    #[test]
    fn omega_sigma_vanishing_and_adjunction() {
        let alg = example1_alg();
        let d = 2usize;
        let corpus = [
            simple(&alg, 0, 0),
            simple(&alg, 1, 0),
            simple(&alg, 0, -1),
            simple(&alg, 1, -1),
            regular_module(&alg),
        ];
        for m in &corpus {
            let mut om = m.clone();
            let mut sg = m.clone();
            for _ in 0..d {
                om = om.omega().unwrap();
                sg = sg.sigma(d).unwrap();
            }
            assert!(om.is_acyclic(), "Omega^d != 0");
            assert!(sg.is_acyclic(), "Sigma^d != 0");
        }
        // adjunction dims: H^0 rhom(Sigma X, Y) = H^0 rhom(X, Omega Y)
        for x in corpus.iter().take(3) {
            for y in corpus.iter().take(3) {
                let sx = x.sigma(d).unwrap();
                let oy = y.omega().unwrap();
                let lhs = rhom_dims(&sx, y, 0..=0, 4, d).unwrap();
                let rhs = rhom_dims(x, &oy, 0..=0, 4, d).unwrap();
                assert_eq!(lhs.get(&0), rhs.get(&0));
            }
        }
    }

    #[test]
    fn omega_representable_characterization() {
        // H^i rhom(P, Omega M) = H^{i-1} rhom(P, M) for i <= 0
        let alg = example1_alg();
        let m = simple(&alg, 0, 0).direct_sum(&simple(&alg, 1, -1));
        let om = m.omega().unwrap();
        for v in 0..alg.num_vertices() {
            let p = DgModule::free(alg.clone(), v, 0);
            let lhs = rhom_dims(&p, &om, -1..=0, 4, 2).unwrap();
            let rhs = rhom_dims(&p, &m, -2..=0, 4, 2).unwrap();
            for i in -1..=0 {
                assert_eq!(
                    lhs.get(&i).copied().unwrap_or(0),
                    rhs.get(&(i - 1)).copied().unwrap_or(0)
                );
            }
        }
    }

    #[test]
    fn n_mono_n_epi_basics() {
        let alg = example1_alg();
        let d = 2;
        let m = regular_module(&alg);
        let id = DgMap::identity(&m);
        for n in 1..=d {
            assert!(is_n_mono(&id, n, d).unwrap());
            assert!(is_n_epi(&id, n, d).unwrap());
        }
        let s = simple(&alg, 0, 0);
        let zero = DgMap::zero(m.clone(), s.clone(), 0);
        assert!(!is_n_epi(&zero, 1, d).unwrap());
        assert!(!is_n_epi(&zero, d, d).unwrap());
        // a submodule inclusion: the socle of e_1 Lambda
        let p = DgModule::free(alg.clone(), 0, 0);
        let socle = simple(&alg, 1, -1); // the beta-slot of e_1 Lambda
        let mut inc = DgMap::zero(socle.clone(), p.clone(), 0);
        let slot = p.slots(-1).iter().position(|&v| v == 1).unwrap();
        let mut blk = Matrix::zeros(q(), p.dim(-1), 1);
        blk.set(slot, 0, q().one());
        inc.set_block(-1, blk);
        assert!(inc.is_closed_morphism());
        assert!(is_n_mono(&inc, 1, d).unwrap());
        assert!(!is_n_epi(&inc, 1, d).unwrap());
    }

    #[test]
    fn kernel_inclusions_are_d_monos() {
        let alg = example1_alg();
        let d = 2;
        let m = regular_module(&alg);
        let s = simple(&alg, 0, 0);
        // some closed morphisms m -> s
        for f in closed_morphism_space(&m, &s) {
            let (_, kappa, _) = kernel3(&f).unwrap();
            assert!(is_n_mono(&kappa, d, d).unwrap(), "kernel inclusion not a d-mono");
        }
    }

    #[test]
    fn chara_1_epi_via_sigma() {
        let alg = example1_alg();
        let d = 2;
        let m = regular_module(&alg);
        let targets = [simple(&alg, 0, 0), simple(&alg, 1, 0), regular_module(&alg)];
        for t in &targets {
            for f in closed_morphism_space(&m, t) {
                let (kernel, _, _) = kernel3(&f).unwrap();
                let sigma_k = kernel.sigma(d).unwrap();
                let lhs = is_n_epi(&f, 1, d).unwrap();
                let rhs = sigma_k.is_acyclic();
                assert_eq!(lhs, rhs, "1-epi iff Sigma(kernel) = 0");
            }
        }
    }

    #[test]
    fn presentation_of_regular_module() {
        let alg = example1_alg();
        let pres = projective_presentation(&regular_module(&alg), 2).unwrap();
        assert_eq!(pres.covers[0].2.len(), 2);
        for stage in 1..pres.covers.len() {
            assert!(pres.kernels[stage - 1].is_acyclic() || pres.covers[stage].2.is_empty());
        }
    }

    #[test]
    fn presentation_round_trip() {
        let alg = example1_alg();
        let d = 2;
        let corpus = [
            simple(&alg, 0, 0),
            simple(&alg, 1, 0),
            simple(&alg, 0, -1),
            simple(&alg, 1, -1),
        ];
        for m in &corpus {
            let pres = projective_presentation(m, d).unwrap();
            for (_, eps, _) in &pres.covers {
                assert!(is_n_epi(eps, d, d).unwrap(), "cover stage is not a d-epi");
            }
            let (direct, inductive) = iterated_cokernel(&pres.band, d).unwrap();
            assert_eq!(direct.h_dims(), m.h_dims(), "round trip H dims");
            assert!(derived_iso(&direct, m), "round trip iso");
            assert!(derived_iso(&direct, &inductive), "direct vs inductive");
        }
    }

    fn random_single_step_band(
        rng: &mut StdRng,
        alg: &Arc<GradedAlgebra<Rationals>>,
        d: usize,
    ) -> SemiFree<Rationals> {
        // generators per level with chain maps u_i solving u_{i-1} u_i = 0
        let nv = alg.num_vertices();
        let counts: Vec<usize> = (0..=d).map(|_| rng.gen_range(0..3)).collect();
        let verts: Vec<Vec<usize>> = counts.iter().map(|&c| (0..c).map(|_| rng.gen_range(0..nv)).collect()).collect();
        let mut gens = Vec::new();
        let mut level_offset = Vec::new();
        for (i, vs) in verts.iter().enumerate() {
            level_offset.push(gens.len());
            for &v in vs {
                gens.push((-(i as i32), v));
            }
        }
        let mut delta: Vec<Vec<(usize, Vec<(usize, <Rationals as Field>::Elem)>)>> = vec![Vec::new(); gens.len()];
        // u_i: level i -> level i-1 with Lambda^0 coefficients: entries are
        // scalars between generators of matching vertices (idempotent
        // coefficients); constraint u_{i-1} u_i = 0
        let mut prev_u: Option<Matrix<Rationals>> = None;
        for i in 1..=d {
            let rows = verts[i - 1].len();
            let cols = verts[i].len();
            let mut u = Matrix::zeros(q(), rows, cols);
            if rows > 0 && cols > 0 {
                // random, then project into the kernel of left
                // multiplication by prev_u
                for r in 0..rows {
                    for c in 0..cols {
                        if verts[i - 1][r] == verts[i][c] {
                            u.set(r, c, q().from_i64(rng.gen_range(-2..3)));
                        }
                    }
                }
                if let Some(p) = &prev_u {
                    if p.rows() > 0 {
                        // solve p * u = 0 column by column: replace columns by
                        // their projection onto ker p
                        let ker = p.kernel_basis();
                        for c in 0..cols {
                            let col = u.column(c);
                            // express col approximately in ker: solve ker x = col
                            match ker.solve(&col) {
                                Some(x) => {
                                    let newcol = ker.apply(&x);
                                    for r in 0..rows {
                                        u.set(r, c, newcol[r].clone());
                                    }
                                }
                                None => {
                                    for r in 0..rows {
                                        u.set(r, c, q().zero());
                                    }
                                }
                            }
                        }
                        // vertex purity may be broken by projection: zero out
                        // the illegal entries and re-check
                        for r in 0..rows {
                            for c in 0..cols {
                                if verts[i - 1][r] != verts[i][c] {
                                    u.set(r, c, q().zero());
                                }
                            }
                        }
                        if !p.mul(&u).is_zero() {
                            u = Matrix::zeros(q(), rows, cols);
                        }
                    }
                }
            }
            for c in 0..cols {
                for r in 0..rows {
                    if !q().is_zero(u.get(r, c)) {
                        let tgt_gen = level_offset[i - 1] + r;
                        let src_gen = level_offset[i] + c;
                        let e = verts[i - 1][r];
                        delta[src_gen].push((tgt_gen, vec![(e, u.get(r, c).clone())]));
                    }
                }
            }
            prev_u = Some(u);
        }
        SemiFree { alg: alg.clone(), gens, delta }
    }

    #[test]
    fn iterated_cokernel_direct_vs_inductive_randomized() {
        let alg = example1_alg();
        let d = 2;
        let mut rng = StdRng::seed_from_u64(2024);
        let mut tested = 0;
        while tested < 50 {
            let band = random_single_step_band(&mut rng, &alg, d);
            if band.gens.is_empty() {
                continue;
            }
            if band.to_module().is_err() {
                continue;
            }
            let (direct, inductive) = iterated_cokernel(&band, d).unwrap();
            assert_eq!(direct.h_dims(), inductive.h_dims(), "H dims differ");
            assert!(derived_iso(&direct, &inductive), "direct vs inductive iso");
            tested += 1;
        }
    }

    #[test]
    fn iterated_kernel_direct_vs_inductive() {
        let alg = example1_alg();
        let d = 2;
        let mut rng = StdRng::seed_from_u64(77);
        let mut tested = 0;
        while tested < 20 {
            // mirror a cokernel band into kernel shape by negating degrees
            let band = random_single_step_band(&mut rng, &alg, d);
            if band.gens.is_empty() || band.to_module().is_err() {
                continue;
            }
            // reverse: generators at degree -i become degree i... the delta
            // direction must still raise degree, so rebuild with levels
            // reversed: level -i gens become level (d-i)
            let gens: Vec<(i32, usize)> = band.gens.iter().map(|&(t, v)| (t + d as i32, v)).collect();
            let flipped = SemiFree { alg: alg.clone(), gens, delta: band.delta.clone() };
            if flipped.to_module().is_err() {
                continue;
            }
            let (direct, inductive) = iterated_kernel(&flipped, d).unwrap();
            assert_eq!(direct.h_dims(), inductive.h_dims());
            assert!(derived_iso(&direct, &inductive));
            tested += 1;
        }
    }

    #[test]
    fn band_concentrated_at_top_shift_dies() {
        // C = P[d]: a single generator at degree -d is killed by tau^{>-d}
        let alg = example1_alg();
        let d = 2;
        let band = SemiFree {
            alg: alg.clone(),
            gens: vec![(-2, 0)],
            delta: vec![Vec::new()],
        };
        let (direct, inductive) = iterated_cokernel(&band, d).unwrap();
        assert!(direct.is_acyclic());
        assert!(inductive.is_acyclic());
    }

    #[test]
    fn proj_d_cok_restriction() {
        // rhom(P, Cok_d C) = tau^{>-d} rhom(P, Tot C) on random bands: with
        // free sources both sides are vertex components
        let alg = example1_alg();
        let d = 2;
        let mut rng = StdRng::seed_from_u64(5);
        let mut tested = 0;
        while tested < 10 {
            let band = random_single_step_band(&mut rng, &alg, d);
            if band.gens.is_empty() || band.to_module().is_err() {
                continue;
            }
            let (direct, _) = iterated_cokernel(&band, d).unwrap();
            let total = band.to_module().unwrap();
            for v in 0..alg.num_vertices() {
                let lhs = direct.vertex_complex(v).h_dims();
                let rhs: BTreeMap<i32, usize> = total
                    .vertex_complex(v)
                    .h_dims()
                    .into_iter()
                    .filter(|&(i, _)| i > -(d as i32))
                    .collect();
                assert_eq!(lhs, rhs);
            }
            tested += 1;
        }
    }

    #[test]
    fn dual_round_trip() {
        let alg = example1_alg();
        let op = Arc::new(graded_opposite(&alg).unwrap());
        let corpus = [simple(&alg, 0, 0), simple(&alg, 1, -1), regular_module(&alg)];
        for m in &corpus {
            let dual = m.k_dual(&op).unwrap();
            let back = dual.k_dual(&alg).unwrap();
            assert_eq!(m.h_dims(), back.h_dims());
            assert!(derived_iso(m, &back));
        }
    }

    #[test]
    fn self_injectivity_examples() {
        let alg1 = example1_alg();
        let rep1 = self_injectivity_probe(&alg1, 2).unwrap();
        assert!(rep1.positive, "Example 1 algebra should probe self-injective");
        assert!(rep1.shifts[&1], "positive verdict expected at shift d-1");
        let alg2 = example2_alg();
        let rep2 = self_injectivity_probe(&alg2, 2).unwrap();
        assert!(!rep2.positive, "Example 2 algebra must be negative at every probed shift");
    }

    #[test]
    fn brute_force_enumeration_example1() {
        let alg = example1_alg_f2();
        let found = enumerate_dem_indecomposables(&alg, 2, 3).unwrap();
        assert_eq!(found.len(), 6, "Example 1 dem has exactly 6 indecomposables");
        let with_bound_4 = enumerate_dem_indecomposables(&alg, 2, 4).unwrap();
        assert_eq!(with_bound_4.len(), 6, "no new indecomposables at total dimension 4");
    }

    #[test]
    fn depth_monotonicity() {
        let alg = example1_alg();
        let m = simple(&alg, 0, 0);
        let shallow = rhom_dims(&m, &m, -2..=0, 4, 2).unwrap();
        let deep = rhom_dims(&m, &m, -2..=0, 6, 2).unwrap();
        assert_eq!(shallow, deep);
        assert!(matches!(rhom_dims(&m, &m, -5..=0, 4, 2), Err(Error::WindowTooDeep(_))));
    }
}

/// The graded opposite algebra: same basis, sources and targets swapped,
/// products reversed with the Koszul sign.
pub fn graded_opposite<K: Field>(alg: &Arc<GradedAlgebra<K>>) -> Result<GradedAlgebra<K>> {
    let k = alg.field.clone();
    let elems: Vec<BasisElem> = alg
        .elems
        .iter()
        .map(|e| BasisElem {
            degree: e.degree,
            src: e.tgt,
            tgt: e.src,
            label: e.label.clone(),
            walk: vec![],
        })
        .collect();
    let n = alg.dim();
    let mut mult = vec![vec![Vec::new(); n]; n];
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        for j in 0..n {
            // x *_op y = (-1)^{|x||y|} y * x
            let sign = (alg.degree_of(i) * alg.degree_of(j)).rem_euclid(2) == 1;
            mult[i][j] = alg
                .product(j, i)
                .iter()
                .map(|(t, c)| (*t, if sign { k.neg(c) } else { c.clone() }))
                .collect();
        }
    }
    let diff = (0..n).map(|i| alg.d_of(i).to_vec()).collect();
    GradedAlgebra::new(k, alg.vertices.clone(), elems, mult, diff)
}
