//! The (d+1)-cluster category of linearly oriented A_n as the orbit
//! category of `D^b(kA_n)` under `F = tau^{-1}[d]`.
//!
//! Objects are stored as minimal complexes of projectives, one per F-orbit
//! of indecomposables. A morphism of the orbit category carries an orbit
//! tag `m` and is represented by an honest chain map `F^p X -> F^q Y` with
//! `p = max(0,-m)`, `q = max(0,m)`. Composition applies only non-negative
//! powers of the raw orbit functor, so it is associative on the nose at the
//! chain level; classes are read off through the hom complex of the lifted
//! pair.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::hereditary::{
    hom_complex, nu_inv_raw, nu_map_raw, nu_raw, Interval, ProjComplex, ProjMap,
};
use crate::matrix::Matrix;

/// Index of an indecomposable object (an F-orbit representative).
pub type ObjId = usize;

/// Paper-style name `P_j^k`: `j` is the tau-orbit coordinate, `k` the row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjName {
    pub j: usize,
    pub k: usize,
}

impl std::fmt::Display for ObjName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "P({},{})", self.j, self.k)
    }
}

impl ObjName {
    pub fn parse(s: &str) -> Result<ObjName> {
        let inner = s
            .trim()
            .strip_prefix("P(")
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::UnknownObject(s.to_string()))?;
        let (j, k) = inner.split_once(',').ok_or_else(|| Error::UnknownObject(s.to_string()))?;
        let j = j.trim().parse().map_err(|_| Error::UnknownObject(s.to_string()))?;
        let k = k.trim().parse().map_err(|_| Error::UnknownObject(s.to_string()))?;
        Ok(ObjName { j, k })
    }
}

/// `(interval, shift)` triple: the object `M[a,b].shift(k)` of `D^b`.
pub type Triple = (Interval, i32);

/// One basis morphism of an orbit hom space: orbit tag `m` and a chain map
/// `F^{max(0,-m)}(source) -> F^{max(0,m)}(target)`.
#[derive(Clone, Debug)]
pub struct OrbMor<K: Field> {
    pub m: i32,
    pub map: ProjMap<K>,
}

/// A full orbit hom space `Hom_C(A, B<t>)`, with one block of basis classes
/// per orbit tag.
pub struct OrbHom<K: Field> {
    pub source: ProjComplex<K>,
    /// target complex including the requested shift
    pub target: ProjComplex<K>,
    pub t: i32,
    pub basis: Vec<OrbMor<K>>,
    /// tag -> (offset, count) into `basis`
    pub blocks: BTreeMap<i32, (usize, usize)>,
}

impl<K: Field> OrbHom<K> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

struct HomCache<K: Field> {
    spaces: HashMap<(String, String, i32), Arc<OrbHom<K>>>,
    folded: HashMap<String, Vec<ObjId>>,
}

impl<K: Field> Default for HomCache<K> {
    fn default() -> Self {
        HomCache { spaces: HashMap::new(), folded: HashMap::new() }
    }
}

pub struct ClusterCategory<K: Field> {
    pub field: K,
    pub n: usize,
    pub d: usize,
    reps: Vec<ProjComplex<K>>,
    triples: Vec<Triple>,
    names: Vec<ObjName>,
    shift_perm: Vec<usize>,
    tau_perm: Vec<usize>,
    scan_cap: i32,
    cache: Mutex<HomCache<K>>,
}

impl<K: Field> ClusterCategory<K> {
    /// Builds the cluster category: orbit representatives, paper names, and
    /// the shift and tau permutations.
    pub fn build(field: K, n: usize, d: usize) -> Result<Self> {
        if n < 1 || d < 1 {
            return Err(Error::Config("need n >= 1 and d >= 1".into()));
        }
        // fundamental domain: all interval modules at shifts 0..d-1, and the
        // projectives at shift d
        let mut triples: Vec<Triple> = Vec::new();
        for k in 0..d as i32 {
            for a in 1..=n {
                for b in a..=n {
                    triples.push((Interval::new(a, b), k));
                }
            }
        }
        for a in 1..=n {
            triples.push((Interval::new(a, n), d as i32));
        }
        let names = assign_names(n, d, &triples)?;
        // reorder representatives by name (row, then column)
        let mut order: Vec<usize> = (0..triples.len()).collect();
        order.sort_by_key(|&i| (names[i].k, names[i].j));
        let triples: Vec<Triple> = order.iter().map(|&i| triples[i]).collect();
        let names: Vec<ObjName> = order.iter().map(|&i| names[i]).collect();
        let reps: Vec<ProjComplex<K>> = triples
            .iter()
            .map(|&(iv, k)| ProjComplex::interval(field.clone(), n, iv).shift(k))
            .collect();
        let index_of = |t: Triple| -> usize { triples.iter().position(|&u| u == t).unwrap() };
        let shift_perm: Vec<usize> = triples
            .iter()
            .map(|&(iv, k)| index_of(normalize_triple(n, d, (iv, k + 1))))
            .collect();
        let mut tau_perm: Vec<usize> = (0..triples.len()).collect();
        for _ in 0..d {
            tau_perm = tau_perm.iter().map(|&i| shift_perm[i]).collect();
        }
        let cat = ClusterCategory {
            field,
            n,
            d,
            reps,
            triples,
            names,
            shift_perm,
            tau_perm,
            scan_cap: 16,
            cache: Mutex::new(HomCache::default()),
        };
        // every indecomposable must have a one dimensional endomorphism ring
        for x in 0..cat.len() {
            let end = cat.hom_objects(x, x, 0)?;
            if end.dim() != 1 {
                return Err(Error::Invariant(format!(
                    "End^0({}) has dimension {}, not local",
                    cat.names[x],
                    end.dim()
                )));
            }
        }
        Ok(cat)
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn objects(&self) -> Vec<ObjId> {
        (0..self.len()).collect()
    }

    pub fn name(&self, x: ObjId) -> ObjName {
        self.names[x]
    }

    pub fn triple(&self, x: ObjId) -> Triple {
        self.triples[x]
    }

    pub fn complex(&self, x: ObjId) -> &ProjComplex<K> {
        &self.reps[x]
    }

    pub fn by_name(&self, name: ObjName) -> Result<ObjId> {
        self.names
            .iter()
            .position(|&m| m == name)
            .ok_or_else(|| Error::UnknownObject(name.to_string()))
    }

    pub fn shift_object(&self, x: ObjId) -> ObjId {
        self.shift_perm[x]
    }

    pub fn shift_object_by(&self, x: ObjId, t: i32) -> ObjId {
        let mut y = x;
        if t >= 0 {
            for _ in 0..t {
                y = self.shift_perm[y];
            }
        } else {
            for _ in 0..-t {
                y = self.shift_perm.iter().position(|&z| z == y).unwrap();
            }
        }
        y
    }

    pub fn tau_object(&self, x: ObjId) -> ObjId {
        self.tau_perm[x]
    }

    pub fn tau_inv_object(&self, x: ObjId) -> ObjId {
        self.tau_perm.iter().position(|&z| z == x).unwrap()
    }

    /// One application of the raw orbit functor `F = nu^{-1}[d+1]`.
    pub fn orbit_step(&self, x: &ProjComplex<K>) -> ProjComplex<K> {
        nu_inv_raw(x).shift(self.d as i32 + 1)
    }

    pub fn orbit_power(&self, x: &ProjComplex<K>, p: usize) -> ProjComplex<K> {
        let mut out = x.clone();
        for _ in 0..p {
            out = self.orbit_step(&out);
        }
        out
    }

    pub fn orbit_step_map(&self, f: &ProjMap<K>) -> ProjMap<K> {
        nu_map_raw(f, false).shift(self.d as i32 + 1)
    }

    pub fn orbit_power_map(&self, f: &ProjMap<K>, p: usize) -> ProjMap<K> {
        let mut out = f.clone();
        for _ in 0..p {
            out = self.orbit_step_map(&out);
        }
        out
    }

    /// Inverse orbit functor, minimized; used to fold approximation sources
    /// onto honest maps into a fixed target.
    pub fn orbit_unstep_min(&self, x: &ProjComplex<K>) -> ProjComplex<K> {
        nu_raw(x).shift(-(self.d as i32) - 1).minimize()
    }

    fn key(&self, x: &ProjComplex<K>) -> String {
        let mut s = String::new();
        if let Some((lo, hi)) = x.support() {
            for i in lo..=hi {
                s.push_str(&format!("|{i}:{:?}", x.labels(i)));
                let d = x.diff(i);
                for r in 0..d.rows() {
                    for c in 0..d.cols() {
                        if !self.field.is_zero(d.get(r, c)) {
                            s.push_str(&format!(",{r}.{c}={}", self.field.render(d.get(r, c))));
                        }
                    }
                }
            }
        }
        s
    }

    /// Hull of the cohomological support of `F^p(x)`, without building it.
    fn power_hull(&self, x: &ProjComplex<K>, p: usize) -> Option<(i32, i32)> {
        let (lo, hi) = x.support()?;
        let p = p as i32;
        let d = self.d as i32;
        Some((lo - p * (d + 1), hi - p * d))
    }

    fn tags_to_scan(&self, a: &ProjComplex<K>, b: &ProjComplex<K>) -> Result<Vec<i32>> {
        if a.is_zero_object() || b.is_zero_object() {
            return Ok(vec![]);
        }
        let mut tags = Vec::new();
        for m in -self.scan_cap..=self.scan_cap {
            let (p, q) = (m.min(0).unsigned_abs() as usize, m.max(0) as usize);
            let (alo, ahi) = self.power_hull(a, p).unwrap();
            let (blo, bhi) = self.power_hull(b, q).unwrap();
            if alo <= bhi && blo <= ahi {
                tags.push(m);
            }
        }
        if tags.contains(&-self.scan_cap) || tags.contains(&self.scan_cap) {
            return Err(Error::ScanWindowExceeded {
                context: "orbit hom support overlap reached the hard cap".into(),
            });
        }
        Ok(tags)
    }

    /// The orbit hom space `Hom_C(a, b shifted by t)` between literal
    /// complexes. Beyond the scanned tags the hom spaces vanish because the
    /// support hulls separate, which is the emptiness witness.
    pub fn orbit_hom_cx(&self, a: &ProjComplex<K>, b: &ProjComplex<K>, t: i32) -> Result<Arc<OrbHom<K>>> {
        let bt = b.shift(t);
        let cache_key = (self.key(a), self.key(b), t);
        if let Some(hit) = self.cache.lock().unwrap().spaces.get(&cache_key) {
            return Ok(hit.clone());
        }
        let mut basis = Vec::new();
        let mut blocks = BTreeMap::new();
        for m in self.tags_to_scan(a, &bt)? {
            let (p, q) = (m.min(0).unsigned_abs() as usize, m.max(0) as usize);
            let fa = self.orbit_power(a, p);
            let fb = self.orbit_power(&bt, q);
            let h = hom_complex(&fa, &fb);
            let (dim, reps) = h.classes(0);
            if dim == 0 {
                continue;
            }
            let offset = basis.len();
            for rep in reps {
                let map = h.from_coords(&fa, &fb, 0, &rep);
                debug_assert!(map.is_closed());
                basis.push(OrbMor { m, map });
            }
            blocks.insert(m, (offset, dim));
        }
        let out = Arc::new(OrbHom { source: a.clone(), target: bt, t, basis, blocks });
        self.cache.lock().unwrap().spaces.insert(cache_key, out.clone());
        Ok(out)
    }

    pub fn hom_objects(&self, x: ObjId, y: ObjId, t: i32) -> Result<Arc<OrbHom<K>>> {
        self.orbit_hom_cx(&self.reps[x].clone(), &self.reps[y].clone(), t)
    }

    pub fn hom_dim(&self, x: ObjId, y: ObjId, t: i32) -> Result<usize> {
        Ok(self.hom_objects(x, y, t)?.dim())
    }

    /// Graded dims over a window of shifts.
    pub fn graded_hom_dims(&self, x: ObjId, y: ObjId, window: std::ops::RangeInclusive<i32>) -> Result<BTreeMap<i32, usize>> {
        let mut out = BTreeMap::new();
        for t in window {
            let dim = self.hom_dim(x, y, t)?;
            if dim > 0 {
                out.insert(t, dim);
            }
        }
        Ok(out)
    }

    /// Composite of `f in Hom_C(A, B<t1>)` and `g in Hom_C(B, C<t2>)`, as
    /// coordinates in the space `Hom_C(A, C<t1+t2>)`.
    pub fn compose_basis(
        &self,
        fspace: &OrbHom<K>,
        f: &OrbMor<K>,
        gspace: &OrbHom<K>,
        g: &OrbMor<K>,
        out_space: &OrbHom<K>,
    ) -> Result<Vec<K::Elem>> {
        let (p1, q1) = (f.m.min(0).unsigned_abs() as usize, f.m.max(0) as usize);
        let (p2, q2) = (g.m.min(0).unsigned_abs() as usize, g.m.max(0) as usize);
        let _ = gspace;
        // composite chain map: F^{q1}(g[t1]) . F^{p2}(f)
        let lifted_f = self.orbit_power_map(&f.map, p2);
        let shifted_g = g.map.shift(fspace.t);
        let lifted_g = self.orbit_power_map(&shifted_g, q1);
        let composite = lifted_f.compose(&lifted_g);
        let (pp, qq) = (p1 + p2, q1 + q2);
        self.coords_in(out_space, composite, pp, qq)
    }

    /// Expresses a chain map `F^{pp}(source) -> F^{qq}(target)` in the basis
    /// of `space` (whose elements sit at canonical powers), by lifting the
    /// basis with further powers of F and solving in the hom complex.
    pub fn coords_in(&self, space: &OrbHom<K>, composite: ProjMap<K>, pp: usize, qq: usize) -> Result<Vec<K::Elem>> {
        let k = &self.field;
        let m_tag = qq as i32 - pp as i32;
        let mut coords = vec![k.zero(); space.dim()];
        if space.dim() == 0 {
            return Ok(coords);
        }
        let fa = composite.source.clone();
        let fb = composite.target.clone();
        let h = hom_complex(&fa, &fb);
        let target_coords = h.project(&composite);
        if target_coords.iter().all(|c| k.is_zero(c)) {
            return Ok(coords);
        }
        let Some(&(offset, count)) = space.blocks.get(&m_tag) else {
            return Err(Error::Invariant(
                "nonzero composite outside the scanned orbit tags".into(),
            ));
        };
        // lift the canonical basis of this tag with F^{pp - p0}
        let p0 = m_tag.min(0).unsigned_abs() as usize;
        let extra = pp - p0;
        let mut cols = Vec::with_capacity(count);
        for i in 0..count {
            let lifted = self.orbit_power_map(&space.basis[offset + i].map, extra);
            cols.push(h.project(&lifted));
        }
        let mat = Matrix::from_columns(k.clone(), target_coords.len(), &cols);
        let sol = mat.solve(&target_coords).ok_or_else(|| {
            Error::Invariant("composite class does not lie in the lifted basis span".into())
        })?;
        for (i, c) in sol.into_iter().enumerate() {
            coords[offset + i] = c;
        }
        Ok(coords)
    }

    /// Folds a literal complex into the orbit category: its indecomposable
    /// summands as representative ids (with multiplicity).
    pub fn fold(&self, x: &ProjComplex<K>) -> Vec<ObjId> {
        let key = self.key(x);
        if let Some(hit) = self.cache.lock().unwrap().folded.get(&key) {
            return hit.clone();
        }
        let mut out = Vec::new();
        for (iv, k) in x.decompose() {
            let t = normalize_triple(self.n, self.d, (iv, k));
            out.push(self.triples.iter().position(|&u| u == t).expect("orbit fold is complete"));
        }
        out.sort();
        self.cache.lock().unwrap().folded.insert(key, out.clone());
        out
    }

    /// Is every summand of `x` in `add` of the given object list?
    pub fn lies_in_add(&self, x: &ProjComplex<K>, add: &[ObjId]) -> bool {
        self.fold(x).iter().all(|s| add.contains(s))
    }

    /// Cluster tilting test with a certificate of violations `(X, i, side)`.
    pub fn is_cluster_tilting(&self, m: &[ObjId]) -> Result<(bool, Vec<(ObjId, i32, &'static str)>)> {
        let mut violations = Vec::new();
        for x in self.objects() {
            let in_add = m.contains(&x);
            let mut vanishes_fwd = true;
            let mut vanishes_bwd = true;
            for i in 1..=self.d as i32 {
                for &mi in m {
                    if self.hom_dim(x, mi, i)? > 0 {
                        vanishes_fwd = false;
                        violations.push((x, i, "Hom(X, M[i]) != 0"));
                    }
                    if self.hom_dim(mi, x, i)? > 0 {
                        vanishes_bwd = false;
                        violations.push((x, i, "Hom(M, X[i]) != 0"));
                    }
                }
            }
            if in_add != (vanishes_fwd && vanishes_bwd) {
                if in_add {
                    // a summand of M fails the vanishing: recorded above
                } else {
                    violations.push((x, 0, "X outside add M satisfies the vanishing"));
                }
            }
        }
        // the certificate decides: M is cluster tilting iff the vanishing
        // characterizes membership on both sides
        let ok = self.objects().iter().all(|&x| {
            let in_add = m.contains(&x);
            let clean = (1..=self.d as i32).all(|i| {
                m.iter().all(|&mi| {
                    self.hom_dim(x, mi, i).map(|d| d == 0).unwrap_or(false)
                        && self.hom_dim(mi, x, i).map(|d| d == 0).unwrap_or(false)
                })
            });
            in_add == clean
        });
        Ok((ok, violations))
    }

    /// A right add(M)-approximation of the literal complex `y`: a single
    /// honest chain map `g: C0 -> y` whose source is a direct sum of orbit
    /// translates of summands of M, hitting a full basis of every
    /// `Hom_C(M_i, y)`.
    pub fn right_approximation(&self, m: &[ObjId], y: &ProjComplex<K>) -> Result<Approximation<K>> {
        let mut summands: Vec<(ObjId, i32)> = Vec::new();
        let mut source = ProjComplex::zero(self.field.clone(), self.n);
        let mut maps: Vec<ProjMap<K>> = Vec::new();
        for &mi in m {
            let mhat = self.reps[mi].clone();
            // realize every basis class of Hom_C(M_i, y) as a map from an
            // orbit translate of M_i straight into y
            let space = self.orbit_hom_cx(&mhat, y, 0)?;
            let tags: Vec<i32> = space.blocks.keys().copied().collect();
            for m_tag in tags {
                // translate the source so the maps land in y itself: basis of
                // Hom_D(W, y) with W = F^{-m}(M_i) realized by minimal models
                let w = if m_tag <= 0 {
                    self.orbit_power(&mhat, (-m_tag) as usize)
                } else {
                    let mut w = mhat.clone();
                    for _ in 0..m_tag {
                        w = self.orbit_unstep_min(&w);
                    }
                    w
                };
                let h = hom_complex(&w, y);
                let (dim, reps) = h.classes(0);
                for rep in reps.iter().take(dim) {
                    let f = h.from_coords(&w, y, 0, rep);
                    summands.push((mi, m_tag));
                    maps.push(f);
                    source = source.direct_sum(&w);
                }
            }
        }
        // stack the maps into one morphism from the direct sum
        let mut g = ProjMap::zero(source.clone(), y.clone(), 0);
        let mut col_offset: BTreeMap<i32, usize> = BTreeMap::new();
        for f in &maps {
            if let Some((lo, hi)) = f.source.support() {
                for i in lo..=hi {
                    let cols_before = *col_offset.get(&i).unwrap_or(&0);
                    let block = f.block(i);
                    if block.cols() == 0 {
                        continue;
                    }
                    let mut big = g.block(i);
                    if big.rows() == 0 {
                        col_offset.insert(i, cols_before + block.cols());
                        continue;
                    }
                    for r in 0..block.rows() {
                        for c in 0..block.cols() {
                            big.set(r, cols_before + c, block.get(r, c).clone());
                        }
                    }
                    g.set_block(i, big);
                    col_offset.insert(i, cols_before + block.cols());
                }
            }
        }
        if !g.is_closed() {
            return Err(Error::Invariant("approximation map is not closed".into()));
        }
        Ok(Approximation { summands, source, map: g })
    }

    /// Verifies that `Hom_C(M', C0) -> Hom_C(M', y)` is surjective for every
    /// summand `M'` of M.
    pub fn approximation_is_surjective(&self, m: &[ObjId], approx: &Approximation<K>, y: &ProjComplex<K>) -> Result<bool> {
        for &mi in m {
            let mhat = self.reps[mi].clone();
            let into_c0 = self.orbit_hom_cx(&mhat, &approx.source, 0)?;
            let into_y = self.orbit_hom_cx(&mhat, y, 0)?;
            if into_y.dim() == 0 {
                continue;
            }
            let k = &self.field;
            let mut cols = Vec::new();
            for f in &into_c0.basis {
                // g . f, coordinates in Hom_C(M', y)
                let (p1, q1) = (f.m.min(0).unsigned_abs() as usize, f.m.max(0) as usize);
                let lifted_g = self.orbit_power_map(&approx.map, q1);
                let composite = f.map.compose(&lifted_g);
                cols.push(self.coords_in(&into_y, composite, p1, q1)?);
            }
            if cols.is_empty() {
                return Ok(false);
            }
            let mat = Matrix::from_columns(k.clone(), into_y.dim(), &cols);
            if mat.rank() < into_y.dim() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The splicing tower of `y`: exact triangles `K_i -> C_i -> K_{i-1}`
    /// with `C_i in add M` and `K_0 = y`, together with add(M) membership
    /// flags of the `K_i`. `K_d` must land in add M.
    pub fn splicing_tower(&self, m: &[ObjId], y: ObjId) -> Result<SplicingTower<K>> {
        self.splicing_tower_of(m, &self.reps[y].clone(), false)
    }

    pub fn splicing_tower_of(&self, m: &[ObjId], y: &ProjComplex<K>, pruned: bool) -> Result<SplicingTower<K>> {
        let mut stages = Vec::new();
        let mut current = y.clone();
        for _stage in 1..=self.d {
            let approx = if pruned {
                self.pruned_approximation(m, &current)?
            } else {
                self.right_approximation(m, &current)?
            };
            let next = approx.map.cocone()?.minimize();
            let in_add = self.lies_in_add(&next, m);
            stages.push(TowerStage {
                kernel: next.clone(),
                cover_summands: approx.summands.clone(),
                kernel_in_add_m: in_add,
            });
            current = next;
        }
        if !stages.last().unwrap().kernel_in_add_m && !current.is_zero_object() {
            return Err(Error::SplicingFailure {
                object: format!("{:?}", self.fold(y)),
                stage: self.d,
            });
        }
        Ok(SplicingTower { stages })
    }

    /// A minimized right approximation: greedily drops source summands while
    /// surjectivity persists.
    pub fn pruned_approximation(&self, m: &[ObjId], y: &ProjComplex<K>) -> Result<Approximation<K>> {
        let full = self.right_approximation(m, y)?;
        let mut keep: Vec<bool> = vec![true; full.summands.len()];
        for drop in 0..full.summands.len() {
            keep[drop] = false;
            let candidate = self.rebuild_approximation(&full, &keep)?;
            if !self.approximation_is_surjective(m, &candidate, y)? {
                keep[drop] = true;
            }
        }
        self.rebuild_approximation(&full, &keep)
    }

    fn rebuild_approximation(&self, full: &Approximation<K>, keep: &[bool]) -> Result<Approximation<K>> {
        // recompute the stacked map with only the kept summands
        let mut summands = Vec::new();
        let mut source = ProjComplex::zero(self.field.clone(), self.n);
        // reconstruct per-summand column ranges in order
        let mut per_summand: Vec<(ProjComplex<K>, BTreeMap<i32, (usize, usize)>)> = Vec::new();
        let mut offsets: BTreeMap<i32, usize> = BTreeMap::new();
        for &(_, _) in &full.summands {
            per_summand.push((ProjComplex::zero(self.field.clone(), self.n), BTreeMap::new()));
        }
        // infer each summand's complex from the source by walking the sums
        // again: rebuild from rep data instead
        let mut rebuilt: Vec<ProjComplex<K>> = Vec::new();
        for &(mi, m_tag) in &full.summands {
            let mhat = self.reps[mi].clone();
            let w = if m_tag <= 0 {
                self.orbit_power(&mhat, (-m_tag) as usize)
            } else {
                let mut w = mhat.clone();
                for _ in 0..m_tag {
                    w = self.orbit_unstep_min(&w);
                }
                w
            };
            rebuilt.push(w);
        }
        for (idx, w) in rebuilt.iter().enumerate() {
            let mut ranges = BTreeMap::new();
            if let Some((lo, hi)) = w.support() {
                for i in lo..=hi {
                    let off = *offsets.get(&i).unwrap_or(&0);
                    ranges.insert(i, (off, w.rank_at(i)));
                    offsets.insert(i, off + w.rank_at(i));
                }
            }
            per_summand[idx] = (w.clone(), ranges);
        }
        let mut maps = Vec::new();
        for (idx, (w, ranges)) in per_summand.iter().enumerate() {
            if !keep[idx] {
                continue;
            }
            let mut f = ProjMap::zero(w.clone(), full.map.target.clone(), 0);
            for (&i, &(off, cnt)) in ranges {
                let big = full.map.block(i);
                if big.rows() == 0 || cnt == 0 {
                    continue;
                }
                f.set_block(
                    i,
                    Matrix::from_fn(self.field.clone(), big.rows(), cnt, |r, c| big.get(r, off + c).clone()),
                );
            }
            summands.push(full.summands[idx]);
            maps.push(f);
            source = source.direct_sum(w);
        }
        let mut g = ProjMap::zero(source.clone(), full.map.target.clone(), 0);
        let mut col_offset: BTreeMap<i32, usize> = BTreeMap::new();
        for f in &maps {
            if let Some((lo, hi)) = f.source.support() {
                for i in lo..=hi {
                    let cols_before = *col_offset.get(&i).unwrap_or(&0);
                    let block = f.block(i);
                    if block.cols() == 0 {
                        continue;
                    }
                    let mut big = g.block(i);
                    if big.rows() > 0 {
                        for r in 0..block.rows() {
                            for c in 0..block.cols() {
                                big.set(r, cols_before + c, block.get(r, c).clone());
                            }
                        }
                        g.set_block(i, big);
                    }
                    col_offset.insert(i, cols_before + block.cols());
                }
            }
        }
        Ok(Approximation { summands, source, map: g })
    }

    /// The AR quiver: arrow multiplicities `dim rad/rad^2` between the
    /// representatives, plus the tau permutation.
    pub fn ar_quiver(&self) -> Result<ArQuiver> {
        let objects = self.objects();
        let mut arrows = Vec::new();
        for &x in &objects {
            for &y in &objects {
                let mult = self.rad_over_rad_sq(&objects, x, y)?;
                if mult > 0 {
                    arrows.push((x, y, mult));
                }
            }
        }
        Ok(ArQuiver {
            names: self.names.clone(),
            arrows,
            tau: self.tau_perm.clone(),
        })
    }

    /// dim rad(x,y)/rad^2(x,y) inside a full subcategory given by `objects`.
    pub fn rad_over_rad_sq(&self, objects: &[ObjId], x: ObjId, y: ObjId) -> Result<usize> {
        let k = &self.field;
        // End rings are local of dimension one here, so rad(x,y) is the
        // whole hom space for x != y and zero for x = y
        if x == y {
            return Ok(0);
        }
        let hom_xy = self.hom_objects(x, y, 0)?;
        if hom_xy.dim() == 0 {
            return Ok(0);
        }
        let mut composite_cols: Vec<Vec<K::Elem>> = Vec::new();
        for &z in objects {
            if z == x || z == y {
                continue;
            }
            let hom_xz = self.hom_objects(x, z, 0)?;
            let hom_zy = self.hom_objects(z, y, 0)?;
            for f in &hom_xz.basis {
                for g in &hom_zy.basis {
                    composite_cols.push(self.compose_basis(&hom_xz, f, &hom_zy, g, &hom_xy)?);
                }
            }
        }
        let rad2 = if composite_cols.is_empty() {
            0
        } else {
            Matrix::from_columns(k.clone(), hom_xy.dim(), &composite_cols).rank()
        };
        Ok(hom_xy.dim() - rad2)
    }
}

/// A right approximation: summand bookkeeping `(object, orbit tag)`, the
/// direct sum source, and the honest chain map into the target.
pub struct Approximation<K: Field> {
    pub summands: Vec<(ObjId, i32)>,
    pub source: ProjComplex<K>,
    pub map: ProjMap<K>,
}

pub struct TowerStage<K: Field> {
    pub kernel: ProjComplex<K>,
    pub cover_summands: Vec<(ObjId, i32)>,
    pub kernel_in_add_m: bool,
}

pub struct SplicingTower<K: Field> {
    pub stages: Vec<TowerStage<K>>,
}

impl<K: Field> SplicingTower<K> {
    pub fn kernel(&self, i: usize) -> &ProjComplex<K> {
        &self.stages[i - 1].kernel
    }
}

#[derive(Clone, Debug)]
pub struct ArQuiver {
    pub names: Vec<ObjName>,
    /// `(source, target, multiplicity)`
    pub arrows: Vec<(usize, usize, usize)>,
    pub tau: Vec<usize>,
}

impl ArQuiver {
    /// Restricts to the full subquiver on `kept` vertices; tau edges survive
    /// only when both endpoints do.
    pub fn restrict(&self, kept: &[usize]) -> ArQuiver {
        let names: Vec<ObjName> = kept.iter().map(|&i| self.names[i]).collect();
        let reindex = |i: usize| kept.iter().position(|&j| j == i);
        let arrows = self
            .arrows
            .iter()
            .filter_map(|&(s, t, m)| Some((reindex(s)?, reindex(t)?, m)))
            .collect();
        let tau = kept
            .iter()
            .map(|&i| reindex(self.tau[i]).unwrap_or(usize::MAX))
            .collect();
        ArQuiver { names, arrows, tau }
    }

    pub fn adjacency(&self) -> BTreeMap<String, BTreeMap<String, usize>> {
        let mut out: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
        for name in &self.names {
            out.entry(name.to_string()).or_default();
        }
        for &(s, t, m) in &self.arrows {
            out.entry(self.names[s].to_string())
                .or_default()
                .insert(self.names[t].to_string(), m);
        }
        out
    }
}

/// Applies `F = tau^{-1}[d]` to an `(interval, shift)` triple.
pub fn f_triple(n: usize, d: usize, (iv, k): Triple) -> Triple {
    if iv.a >= 2 {
        (Interval::new(iv.a - 1, iv.b - 1), k + d as i32)
    } else {
        (Interval::new(iv.b, n), k + d as i32 + 1)
    }
}

/// Applies `F^{-1}` to a triple.
pub fn f_inv_triple(n: usize, d: usize, (iv, k): Triple) -> Triple {
    if iv.b <= n - 1 {
        (Interval::new(iv.a + 1, iv.b + 1), k - d as i32)
    } else {
        (Interval::new(1, iv.a), k - d as i32 - 1)
    }
}

/// Folds a triple into the fundamental domain: shifts `0..d-1` of all
/// intervals, plus the projectives at shift `d`.
pub fn normalize_triple(n: usize, d: usize, mut t: Triple) -> Triple {
    loop {
        let (iv, k) = t;
        if k < 0 {
            t = f_triple(n, d, t);
        } else if k < d as i32 || (k == d as i32 && iv.b == n) {
            return t;
        } else {
            t = f_inv_triple(n, d, t);
        }
    }
}

/// tau^{-1} on triples, normalized.
fn tau_inv_triple(n: usize, d: usize, (iv, k): Triple) -> Triple {
    let raw = match iv.tau_inv() {
        Some(j) => (j, k),
        None => (Interval::new(iv.b, n), k + 1),
    };
    normalize_triple(n, d, raw)
}

/// Names the representatives. When the translation structure is a clean
/// grid (each tau orbit has the same length and contains exactly one stalk
/// projective), row `k` starts at the stalk `P_{n+1-k}` and `j` counts
/// tau^{-1} steps; this matches the labels in the worked examples. In the
/// remaining cases the tau orbits are walked in a deterministic order.
fn assign_names(n: usize, d: usize, triples: &[Triple]) -> Result<Vec<ObjName>> {
    let total = triples.len();
    let mut names: BTreeMap<Triple, ObjName> = BTreeMap::new();
    if total % n == 0 {
        let orbit_len = total / n;
        let mut ok = true;
        let mut seen: BTreeMap<Triple, ()> = BTreeMap::new();
        'rows: for k in 1..=n {
            let base = (Interval::new(n + 1 - k, n), 0);
            let mut cur = base;
            for j in 0..orbit_len {
                if seen.contains_key(&cur) {
                    ok = false;
                    break 'rows;
                }
                seen.insert(cur, ());
                names.insert(cur, ObjName { j, k });
                cur = tau_inv_triple(n, d, cur);
            }
            if cur != base {
                ok = false;
                break 'rows;
            }
        }
        if ok && seen.len() == total {
            return Ok(triples.iter().map(|t| names[t]).collect());
        }
        names.clear();
    }
    // fallback: walk tau orbits from deterministic base points
    let mut remaining: Vec<Triple> = triples.to_vec();
    remaining.sort_by_key(|&(iv, k)| (usize::from(!(iv.b == n && k == 0)), n - iv.a, iv.b, k));
    let mut row = 0;
    while let Some(&base) = remaining.first() {
        row += 1;
        let mut cur = base;
        let mut j = 0;
        loop {
            names.insert(cur, ObjName { j, k: row });
            remaining.retain(|&t| t != cur);
            cur = tau_inv_triple(n, d, cur);
            j += 1;
            if cur == base {
                break;
            }
        }
    }
    if names.len() != total {
        return Err(Error::Calibration("tau orbits do not partition the objects".into()));
    }
    Ok(triples.iter().map(|t| names[t]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rationals;

    fn q() -> Rationals {
        Rationals
    }

    fn cat22() -> ClusterCategory<Rationals> {
        ClusterCategory::build(q(), 2, 2).unwrap()
    }

    fn cat32() -> ClusterCategory<Rationals> {
        ClusterCategory::build(q(), 3, 2).unwrap()
    }

    fn id_of(cat: &ClusterCategory<Rationals>, j: usize, k: usize) -> ObjId {
        cat.by_name(ObjName { j, k }).unwrap()
    }

    #[test]
    fn object_counts() {
        assert_eq!(cat22().len(), 8);
        assert_eq!(cat32().len(), 15);
        assert_eq!(ClusterCategory::build(q(), 2, 1).unwrap().len(), 5);
    }

    #[test]
    fn shift_formulas_example_one() {
        let cat = cat22();
        // P_j^1 -> P_{j+1}^2 and P_j^2 -> P_{j+2}^1, j in Z/4
        for j in 0..4 {
            let x = id_of(&cat, j, 1);
            assert_eq!(cat.name(cat.shift_object(x)), ObjName { j: (j + 1) % 4, k: 2 });
            let y = id_of(&cat, j, 2);
            assert_eq!(cat.name(cat.shift_object(y)), ObjName { j: (j + 2) % 4, k: 1 });
        }
        // tau = [2]
        for x in cat.objects() {
            assert_eq!(cat.tau_object(x), cat.shift_object(cat.shift_object(x)));
            let ObjName { j, k } = cat.name(x);
            assert_eq!(cat.name(cat.tau_object(x)), ObjName { j: (j + 3) % 4, k });
        }
    }

    #[test]
    fn shift_formulas_example_two() {
        let cat = cat32();
        for j in 0..5 {
            let x1 = id_of(&cat, j, 1);
            assert_eq!(cat.name(cat.shift_object(x1)), ObjName { j: (j + 1) % 5, k: 3 });
            let x2 = id_of(&cat, j, 2);
            assert_eq!(cat.name(cat.shift_object(x2)), ObjName { j: (j + 2) % 5, k: 2 });
            let x3 = id_of(&cat, j, 3);
            assert_eq!(cat.name(cat.shift_object(x3)), ObjName { j: (j + 3) % 5, k: 1 });
        }
        for x in cat.objects() {
            let ObjName { j, k } = cat.name(x);
            assert_eq!(cat.name(cat.tau_object(x)), ObjName { j: (j + 4) % 5, k });
        }
    }

    #[test]
    fn identity_exists_everywhere() {
        let cat = cat22();
        for x in cat.objects() {
            assert_eq!(cat.hom_dim(x, x, 0).unwrap(), 1);
        }
    }

    #[test]
    fn example_one_cluster_tilting() {
        let cat = cat22();
        let m = vec![id_of(&cat, 0, 1), id_of(&cat, 2, 1)];
        let (ok, _) = cat.is_cluster_tilting(&m).unwrap();
        assert!(ok);
        // vanishing Hom(M_i, M_j[i]) for 1 <= i <= d
        for i in 1..=2 {
            for &a in &m {
                for &b in &m {
                    assert_eq!(cat.hom_dim(a, b, i).unwrap(), 0);
                }
            }
        }
        // a single summand is not cluster tilting
        let (ok, cert) = cat.is_cluster_tilting(&m[..1].to_vec()).unwrap();
        assert!(!ok);
        assert!(!cert.is_empty());
    }

    #[test]
    fn example_two_cluster_tilting() {
        let cat = cat32();
        let m = vec![id_of(&cat, 0, 1), id_of(&cat, 0, 2), id_of(&cat, 3, 1)];
        let (ok, _) = cat.is_cluster_tilting(&m).unwrap();
        assert!(ok);
    }

    #[test]
    fn endomorphism_algebra_dims_example_one() {
        let cat = cat22();
        let m = [id_of(&cat, 0, 1), id_of(&cat, 2, 1)];
        // degree 0: the two identities; degree -1: two classes; nothing else
        let mut deg0 = 0;
        let mut deg1 = 0;
        for &a in &m {
            for &b in &m {
                deg0 += cat.hom_dim(a, b, 0).unwrap();
                deg1 += cat.hom_dim(a, b, -1).unwrap();
            }
        }
        assert_eq!((deg0, deg1), (2, 2));
    }

    #[test]
    fn ar_quiver_example_one_matches_figure() {
        let cat = cat22();
        let quiver = cat.ar_quiver().unwrap();
        assert_eq!(quiver.names.len(), 8);
        let mut expected = Vec::new();
        for j in 0..4 {
            expected.push((ObjName { j, k: 1 }, ObjName { j, k: 2 }, 1));
            expected.push((ObjName { j, k: 2 }, ObjName { j: (j + 1) % 4, k: 1 }, 1));
        }
        let got: Vec<(ObjName, ObjName, usize)> = quiver
            .arrows
            .iter()
            .map(|&(s, t, m)| (quiver.names[s], quiver.names[t], m))
            .collect();
        assert_eq!(got.len(), expected.len());
        for e in expected {
            assert!(got.contains(&e), "missing arrow {e:?}");
        }
    }

    #[test]
    fn ar_quiver_example_two_matches_figure() {
        let cat = cat32();
        let quiver = cat.ar_quiver().unwrap();
        assert_eq!(quiver.names.len(), 15);
        let mut expected = Vec::new();
        for j in 0..5 {
            expected.push((ObjName { j, k: 1 }, ObjName { j, k: 2 }, 1));
            expected.push((ObjName { j, k: 2 }, ObjName { j: (j + 1) % 5, k: 1 }, 1));
            expected.push((ObjName { j, k: 2 }, ObjName { j, k: 3 }, 1));
            expected.push((ObjName { j, k: 3 }, ObjName { j: (j + 1) % 5, k: 2 }, 1));
        }
        let got: Vec<(ObjName, ObjName, usize)> = quiver
            .arrows
            .iter()
            .map(|&(s, t, m)| (quiver.names[s], quiver.names[t], m))
            .collect();
        assert_eq!(got.len(), expected.len(), "arrow count");
        for e in expected {
            assert!(got.contains(&e), "missing arrow {e:?}");
        }
        // stable translation quiver: in-degree equals out-degree
        for x in 0..quiver.names.len() {
            let outd: usize = quiver.arrows.iter().filter(|&&(s, _, _)| s == x).map(|&(_, _, m)| m).sum();
            let ind: usize = quiver.arrows.iter().filter(|&&(_, t, _)| t == x).map(|&(_, _, m)| m).sum();
            assert_eq!(outd, ind);
        }
    }

    #[test]
    fn serre_symmetry() {
        // dim Hom(X, Y) = dim Hom(Y, (tau X)[1]): the Serre functor of the
        // (d+1)-cluster category is tau . [1] = [d+1]
        let cat = cat22();
        for x in cat.objects() {
            for y in cat.objects() {
                let lhs = cat.hom_dim(x, y, 0).unwrap();
                let rhs = cat.hom_dim(y, cat.tau_object(x), 1).unwrap();
                assert_eq!(lhs, rhs, "AR duality failed on ({x},{y})");
            }
        }
    }

    #[test]
    fn graded_hom_f_invariance() {
        let cat = cat22();
        for x in cat.objects().into_iter().take(3) {
            for y in cat.objects().into_iter().take(3) {
                let a = cat.complex(x).clone();
                let b = cat.complex(y).clone();
                let fa = cat.orbit_step(&a).minimize();
                let fb = cat.orbit_step(&b).minimize();
                let d1 = cat.orbit_hom_cx(&a, &b, 0).unwrap().dim();
                let d2 = cat.orbit_hom_cx(&fa, &fb, 0).unwrap().dim();
                assert_eq!(d1, d2);
            }
        }
    }

    #[test]
    fn composition_identity_and_associativity() {
        let cat = cat22();
        let objs = cat.objects();
        // id . f = f for all basis morphisms out of the first few objects
        for &x in objs.iter().take(4) {
            let end_x = cat.hom_objects(x, x, 0).unwrap();
            let id = &end_x.basis[0];
            for &y in objs.iter().take(4) {
                let hom = cat.hom_objects(x, y, 0).unwrap();
                for (i, f) in hom.basis.iter().enumerate() {
                    let coords = cat.compose_basis(&end_x, id, &hom, f, &hom).unwrap();
                    let k = q();
                    for (jj, c) in coords.iter().enumerate() {
                        if jj == i {
                            assert!(k.is_one(c) || {
                                // identity may be a scalar multiple of the
                                // chosen basis vector; normalize and compare
                                false
                            });
                        } else {
                            assert!(k.is_zero(c));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn splicing_tower_example_one() {
        let cat = cat22();
        let m = vec![id_of(&cat, 0, 1), id_of(&cat, 2, 1)];
        for y in cat.objects() {
            let tower = cat.splicing_tower(&m, y).unwrap();
            assert!(tower.stages.last().unwrap().kernel_in_add_m || tower.stages.last().unwrap().kernel.is_zero_object());
            if m.contains(&y) {
                for stage in &tower.stages {
                    assert!(stage.kernel_in_add_m || stage.kernel.is_zero_object());
                }
            }
        }
    }

    #[test]
    fn approximation_surjectivity_certificate() {
        let cat = cat22();
        let m = vec![id_of(&cat, 0, 1), id_of(&cat, 2, 1)];
        for y in cat.objects() {
            let yc = cat.complex(y).clone();
            let approx = cat.right_approximation(&m, &yc).unwrap();
            assert!(cat.approximation_is_surjective(&m, &approx, &yc).unwrap());
            // summand count equals the total hom dimension
            let mut expected = 0;
            for &mi in &m {
                expected += cat.hom_dim(mi, y, 0).unwrap();
            }
            assert_eq!(approx.summands.len(), expected);
        }
    }

    #[test]
    fn names_round_trip() {
        let cat = cat32();
        for x in cat.objects() {
            let name = cat.name(x);
            assert_eq!(cat.by_name(name).unwrap(), x);
            assert_eq!(ObjName::parse(&name.to_string()).unwrap(), name);
        }
    }
}
