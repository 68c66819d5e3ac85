//! Graded quivers with relations and the finite dimensional graded algebras
//! they present.
//!
//! Paths are written in walk order: `["a", "b"]` traverses `a` first, so it
//! denotes the composite `b . a`. The algebra product `x * y` is composition,
//! `y` applied first.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::{extend_basis, Matrix};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArrowSpec {
    pub name: String,
    pub from: String,
    pub to: String,
    pub degree: i32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathTerm {
    pub coef: String,
    pub path: Vec<String>,
}

/// Input schema for a graded quiver with relations, as read from TOML or
/// JSON. Coefficients use the exact syntax: decimal integers or `a/b`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PresentationSpec {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub arrows: Vec<ArrowSpec>,
    #[serde(default)]
    pub relations: Vec<Vec<PathTerm>>,
    #[serde(default)]
    pub differential: BTreeMap<String, Vec<PathTerm>>,
}

#[derive(Clone, Debug)]
struct Arrow {
    name: String,
    from: usize,
    to: usize,
    degree: i32,
}

/// A validated graded quiver presentation over a fixed field.
#[derive(Clone, Debug)]
pub struct QuiverPresentation<K: Field> {
    pub field: K,
    vertices: Vec<String>,
    arrows: Vec<Arrow>,
    /// Each relation: homogeneous linear combination of parallel paths,
    /// stored as (coef, arrow index walk).
    relations: Vec<Vec<(K::Elem, Vec<usize>)>>,
    /// d(arrow) as a combination of paths of degree `deg(arrow) + 1`.
    differential: BTreeMap<usize, Vec<(K::Elem, Vec<usize>)>>,
}

/// A path in walk order, with its endpoints and degree.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Path {
    walk: Vec<usize>,
    src: usize,
    tgt: usize,
    degree: i32,
}

impl<K: Field> QuiverPresentation<K> {
    pub fn from_spec(field: K, spec: &PresentationSpec) -> Result<Self> {
        let vertices = spec.vertices.clone();
        if vertices.is_empty() {
            return Err(Error::Parse("presentation needs at least one vertex".into()));
        }
        let vidx = |name: &str| -> Result<usize> {
            vertices
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| Error::Parse(format!("unknown vertex `{name}`")))
        };
        let mut arrows = Vec::new();
        for a in &spec.arrows {
            if a.degree > 0 {
                return Err(Error::Parse(format!(
                    "arrow `{}` has positive degree {}; arrows must sit in degrees <= 0",
                    a.name, a.degree
                )));
            }
            arrows.push(Arrow {
                name: a.name.clone(),
                from: vidx(&a.from)?,
                to: vidx(&a.to)?,
                degree: a.degree,
            });
        }
        let this = QuiverPresentation {
            field: field.clone(),
            vertices,
            arrows,
            relations: Vec::new(),
            differential: BTreeMap::new(),
        };
        let aidx = |name: &str| -> Result<usize> {
            this.arrows
                .iter()
                .position(|a| a.name == name)
                .ok_or_else(|| Error::Parse(format!("unknown arrow `{name}`")))
        };
        let parse_terms = |terms: &[PathTerm]| -> Result<Vec<(K::Elem, Vec<usize>)>> {
            terms
                .iter()
                .map(|t| {
                    let walk = t.path.iter().map(|n| aidx(n)).collect::<Result<Vec<_>>>()?;
                    Ok((field.parse(&t.coef)?, walk))
                })
                .collect()
        };
        let mut relations = Vec::new();
        for rel in &spec.relations {
            let terms = parse_terms(rel)?;
            this.check_homogeneous(&terms, "relation")?;
            relations.push(terms);
        }
        let mut differential = BTreeMap::new();
        for (arrow_name, terms) in &spec.differential {
            let ai = aidx(arrow_name)?;
            let terms = parse_terms(terms)?;
            let a = &this.arrows[ai];
            for (_, walk) in &terms {
                let p = this.walk_to_path(walk).ok_or_else(|| {
                    Error::Parse(format!("non-composable path in d({arrow_name})"))
                })?;
                if (p.src, p.tgt, p.degree) != (a.from, a.to, a.degree + 1) {
                    return Err(Error::Parse(format!(
                        "d({arrow_name}) must be parallel of degree {}",
                        a.degree + 1
                    )));
                }
            }
            differential.insert(ai, terms);
        }
        Ok(QuiverPresentation { relations, differential, ..this })
    }

    fn check_homogeneous(&self, terms: &[(K::Elem, Vec<usize>)], what: &str) -> Result<()> {
        let mut sig = None;
        for (_, walk) in terms {
            let p = self
                .walk_to_path(walk)
                .ok_or_else(|| Error::Parse(format!("non-composable path in {what}")))?;
            let s = (p.src, p.tgt, p.degree);
            match sig {
                None => sig = Some(s),
                Some(t) if t == s => {}
                Some(_) => {
                    return Err(Error::Parse(format!(
                        "{what} mixes paths with different endpoints or degrees"
                    )))
                }
            }
        }
        Ok(())
    }

    fn walk_to_path(&self, walk: &[usize]) -> Option<Path> {
        if walk.is_empty() {
            return None; // trivial paths are handled separately per vertex
        }
        let mut degree = 0;
        for win in walk.windows(2) {
            if self.arrows[win[0]].to != self.arrows[win[1]].from {
                return None;
            }
        }
        for &a in walk {
            degree += self.arrows[a].degree;
        }
        Some(Path {
            walk: walk.to_vec(),
            src: self.arrows[walk[0]].from,
            tgt: self.arrows[*walk.last().unwrap()].to,
            degree,
        })
    }

    fn paths_up_to(&self, length_bound: usize) -> Vec<Path> {
        let mut out: Vec<Path> = Vec::new();
        for (v, _) in self.vertices.iter().enumerate() {
            out.push(Path { walk: vec![], src: v, tgt: v, degree: 0 });
        }
        let mut frontier: Vec<Path> = out.clone();
        for _ in 0..length_bound {
            let mut next = Vec::new();
            for p in &frontier {
                for (ai, a) in self.arrows.iter().enumerate() {
                    if a.from == p.tgt {
                        let mut walk = p.walk.clone();
                        walk.push(ai);
                        next.push(Path { walk, src: p.src, tgt: a.to, degree: p.degree + a.degree });
                    }
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
            if frontier.is_empty() {
                break;
            }
        }
        out
    }

    /// Enumerates a basis of the presented algebra by eliminating the
    /// relation ideal on path spaces of bounded length. Fails with
    /// `NotStabilized` unless the two longest tested lengths contribute
    /// nothing to the quotient.
    pub fn enumerate_basis(&self, length_bound: usize) -> Result<GradedAlgebra<K>> {
        if length_bound < 1 {
            return Err(Error::Config("length bound must be at least 1".into()));
        }
        let k = self.field.clone();
        let all_paths = self.paths_up_to(length_bound);

        // group paths by cell (src, tgt, degree); short paths first so the
        // chosen representatives stay short
        let mut cells: BTreeMap<(usize, usize, i32), Vec<Path>> = BTreeMap::new();
        for p in &all_paths {
            cells.entry((p.src, p.tgt, p.degree)).or_default().push(p.clone());
        }
        for paths in cells.values_mut() {
            paths.sort_by_key(|p| (p.walk.len(), p.walk.clone()));
        }

        // padded relation ideal per cell
        let mut ideal: BTreeMap<(usize, usize, i32), Vec<Vec<(K::Elem, Vec<usize>)>>> = BTreeMap::new();
        for rel in &self.relations {
            let rel_path = self.walk_to_path(&rel[0].1).expect("validated");
            for pre in &all_paths {
                if pre.tgt != rel_path.src {
                    continue;
                }
                for post in &all_paths {
                    if post.src != rel_path.tgt {
                        continue;
                    }
                    let mut element = Vec::new();
                    let mut fits = true;
                    for (c, walk) in rel {
                        let mut w = pre.walk.clone();
                        w.extend_from_slice(walk);
                        w.extend_from_slice(&post.walk);
                        if w.len() > length_bound {
                            fits = false;
                            break;
                        }
                        element.push((c.clone(), w));
                    }
                    if fits {
                        ideal
                            .entry((pre.src, post.tgt, rel_path.degree + pre.degree + post.degree))
                            .or_default()
                            .push(element);
                    }
                }
            }
        }

        // per cell: eliminate and choose representative paths
        let mut basis: Vec<BasisElem> = Vec::new();
        let mut cell_data: BTreeMap<(usize, usize, i32), CellQuotient<K>> = BTreeMap::new();
        // idempotents first, in vertex order
        for (v, _) in self.vertices.iter().enumerate() {
            basis.push(BasisElem { degree: 0, src: v, tgt: v, label: format!("e_{}", self.vertices[v]), walk: vec![] });
        }
        for (&cell, paths) in &cells {
            let index_of = |w: &Vec<usize>| paths.iter().position(|p| &p.walk == w).unwrap();
            let n = paths.len();
            let ideal_elems = ideal.get(&cell).cloned().unwrap_or_default();
            let mut ideal_mat = Matrix::zeros(k.clone(), n, ideal_elems.len());
            for (col, el) in ideal_elems.iter().enumerate() {
                for (c, w) in el {
                    let r = index_of(w);
                    let v = k.add(ideal_mat.get(r, col), c);
                    ideal_mat.set(r, col, v);
                }
            }
            let ideal_basis = ideal_mat.column_space_basis();
            let coords = Matrix::identity(k.clone(), n);
            let reps = extend_basis(&ideal_basis, &coords);
            // projector onto representative coordinates modulo the ideal
            let full = ideal_basis.hstack(&reps);
            let completion = extend_basis(&full, &coords);
            let inv = full.hstack(&completion).inverse();
            let proj = Matrix::from_fn(k.clone(), reps.cols(), n, |r, c| {
                inv.get(ideal_basis.cols() + r, c).clone()
            });
            // representatives are single paths because extend_basis picks
            // coordinate columns here
            let mut rep_paths = Vec::new();
            for c in 0..reps.cols() {
                let col = reps.column(c);
                let r = (0..n).find(|&r| !k.is_zero(&col[r])).unwrap();
                debug_assert!(k.is_one(&col[r]) && (r + 1..n).all(|r2| k.is_zero(&col[r2])));
                rep_paths.push(paths[r].clone());
            }
            for p in &rep_paths {
                if p.walk.is_empty() {
                    continue; // idempotents already placed
                }
                basis.push(BasisElem {
                    degree: p.degree,
                    src: p.src,
                    tgt: p.tgt,
                    label: p.walk.iter().map(|&a| self.arrows[a].name.clone()).collect::<Vec<_>>().join(""),
                    walk: p.walk.clone(),
                });
            }
            cell_data.insert(cell, CellQuotient { paths: paths.clone(), proj });
        }

        // stabilization: the two longest lengths must contribute nothing
        let max_rep_len = basis.iter().map(|b| b.walk.len()).max().unwrap_or(0);
        if max_rep_len + 2 > length_bound {
            return Err(Error::NotStabilized { bound: length_bound });
        }

        // order: idempotents, then by (degree desc, length, label) for a
        // stable readable layout
        let idem = self.vertices.len();
        let mut rest: Vec<BasisElem> = basis.split_off(idem);
        rest.sort_by(|a, b| {
            b.degree
                .cmp(&a.degree)
                .then(a.walk.len().cmp(&b.walk.len()))
                .then(a.label.cmp(&b.label))
        });
        basis.extend(rest);

        let reduce = |walk: &Vec<usize>| -> Result<Vec<(usize, K::Elem)>> {
            // express a walk in the chosen basis
            if walk.is_empty() {
                unreachable!("products with idempotents are handled before reduction");
            }
            let Some(p) = self.walk_to_path(walk) else {
                return Ok(vec![]);
            };
            if walk.len() > length_bound {
                return Err(Error::NotStabilized { bound: length_bound });
            }
            let cell = (p.src, p.tgt, p.degree);
            let data = &cell_data[&cell];
            let idx = data.paths.iter().position(|q| q.walk == p.walk).unwrap();
            let col = data.proj.column(idx);
            // map representative slots back to basis indices
            let mut out = Vec::new();
            for (bi, b) in basis.iter().enumerate() {
                if b.walk.is_empty() {
                    continue;
                }
                if (b.src, b.tgt, b.degree) == cell {
                    let pos = rep_position(&data.proj, &data.paths, &b.walk);
                    if !k.is_zero(&col[pos]) {
                        out.push((bi, col[pos].clone()));
                    }
                }
            }
            Ok(out)
        };

        // multiplication table: basis[i] * basis[j] = basis[i] after basis[j]
        let nb = basis.len();
        let mut mult = vec![vec![Vec::new(); nb]; nb];
        for i in 0..nb {
            for j in 0..nb {
                let (x, y) = (&basis[i], &basis[j]);
                if x.src != y.tgt {
                    continue;
                }
                let entry: Vec<(usize, K::Elem)> = if x.walk.is_empty() {
                    vec![(j, k.one())]
                } else if y.walk.is_empty() {
                    vec![(i, k.one())]
                } else {
                    let mut w = y.walk.clone();
                    w.extend_from_slice(&x.walk);
                    reduce(&w)?
                };
                mult[i][j] = entry;
            }
        }

        // differential via the Leibniz rule on walks
        let mut diff = vec![Vec::new(); nb];
        if !self.differential.is_empty() {
            for (bi, b) in basis.iter().enumerate() {
                if b.walk.is_empty() {
                    continue;
                }
                let mut acc: BTreeMap<usize, K::Elem> = BTreeMap::new();
                for (coef, walk) in self.d_of_walk(&b.walk) {
                    for (idx, c) in reduce(&walk)? {
                        let v = k.mul(&c, &coef);
                        let e = acc.entry(idx).or_insert_with(|| k.zero());
                        *e = k.add(e, &v);
                    }
                }
                diff[bi] = acc.into_iter().filter(|(_, c)| !k.is_zero(c)).collect();
            }
        }

        let alg = GradedAlgebra {
            field: k,
            vertices: self.vertices.clone(),
            elems: basis,
            mult,
            diff,
        };
        alg.validate_internal()?;
        Ok(alg)
    }

    /// Leibniz expansion of d on a walk: `d(x . y) = d(x) . y + (-1)^{|x|} x . d(y)`.
    fn d_of_walk(&self, walk: &[usize]) -> Vec<(K::Elem, Vec<usize>)> {
        let k = &self.field;
        if walk.len() == 1 {
            return self
                .differential
                .get(&walk[0])
                .cloned()
                .unwrap_or_default();
        }
        // walk = rest (applied first), then last
        let (rest, last) = walk.split_at(walk.len() - 1);
        let last = last[0];
        let mut out = Vec::new();
        // d(last) . rest
        for (c, dw) in self.differential.get(&last).cloned().unwrap_or_default() {
            let mut w = rest.to_vec();
            w.extend_from_slice(&dw);
            out.push((c, w));
        }
        // (-1)^{|last|} last . d(rest)
        let sign = if self.arrows[last].degree.rem_euclid(2) == 0 { k.one() } else { k.neg(&k.one()) };
        for (c, dw) in self.d_of_walk(rest) {
            let mut w = dw;
            w.push(last);
            out.push((k.mul(&sign, &c), w));
        }
        out
    }
}

fn rep_position<K: Field>(_proj: &Matrix<K>, paths: &[Path], walk: &[usize]) -> usize {
    paths.iter().position(|p| p.walk == walk).unwrap()
}

#[derive(Clone, Debug)]
struct CellQuotient<K: Field> {
    paths: Vec<Path>,
    /// coordinates in the representative basis, modulo the ideal; rows are
    /// indexed like the representative list restricted to this cell
    proj: Matrix<K>,
}

/// One basis element of a finite dimensional graded algebra.
#[derive(Clone, Debug, Serialize)]
pub struct BasisElem {
    pub degree: i32,
    pub src: usize,
    pub tgt: usize,
    pub label: String,
    /// Walk presentation when the algebra came from a quiver; empty for
    /// idempotents and for extracted algebras.
    pub walk: Vec<usize>,
}

/// Finite dimensional graded algebra with chosen basis, structure constants
/// and differential. The first `vertices.len()` basis elements are the
/// vertex idempotents.
#[derive(Clone, Debug)]
pub struct GradedAlgebra<K: Field> {
    pub field: K,
    pub vertices: Vec<String>,
    pub elems: Vec<BasisElem>,
    mult: Vec<Vec<Vec<(usize, K::Elem)>>>,
    diff: Vec<Vec<(usize, K::Elem)>>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AlgebraReport {
    pub associative: bool,
    pub unital: bool,
    pub leibniz: bool,
    pub d_squared_zero: bool,
    pub connective: bool,
    pub failures: Vec<String>,
}

impl AlgebraReport {
    pub fn all_pass(&self) -> bool {
        self.associative && self.unital && self.leibniz && self.d_squared_zero && self.connective
    }
}

impl<K: Field> GradedAlgebra<K> {
    pub fn new(
        field: K,
        vertices: Vec<String>,
        elems: Vec<BasisElem>,
        mult: Vec<Vec<Vec<(usize, K::Elem)>>>,
        diff: Vec<Vec<(usize, K::Elem)>>,
    ) -> Result<Self> {
        let alg = GradedAlgebra { field, vertices, elems, mult, diff };
        alg.validate_internal()?;
        Ok(alg)
    }

    fn validate_internal(&self) -> Result<()> {
        let report = self.validate();
        if report.all_pass() {
            Ok(())
        } else {
            Err(Error::Invariant(format!("algebra axioms failed: {:?}", report.failures)))
        }
    }

    pub fn dim(&self) -> usize {
        self.elems.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn idempotent(&self, v: usize) -> usize {
        v
    }

    pub fn degree_of(&self, i: usize) -> i32 {
        self.elems[i].degree
    }

    pub fn dims_by_degree(&self) -> BTreeMap<i32, usize> {
        let mut out = BTreeMap::new();
        for e in &self.elems {
            *out.entry(e.degree).or_insert(0) += 1;
        }
        out
    }

    pub fn indices_in_degree(&self, t: i32) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.elems[i].degree == t).collect()
    }

    /// Structure constants of `x_i * x_j` (`x_j` applied first).
    pub fn product(&self, i: usize, j: usize) -> &[(usize, K::Elem)] {
        &self.mult[i][j]
    }

    pub fn d_of(&self, i: usize) -> &[(usize, K::Elem)] {
        &self.diff[i]
    }

    pub fn has_zero_differential(&self) -> bool {
        self.diff.iter().all(|d| d.is_empty())
    }

    /// Product of two coordinate vectors.
    pub fn multiply(&self, x: &[K::Elem], y: &[K::Elem]) -> Vec<K::Elem> {
        let k = &self.field;
        let mut out = vec![k.zero(); self.dim()];
        for i in 0..self.dim() {
            if k.is_zero(&x[i]) {
                continue;
            }
            for j in 0..self.dim() {
                if k.is_zero(&y[j]) {
                    continue;
                }
                let c = k.mul(&x[i], &y[j]);
                for (t, s) in &self.mult[i][j] {
                    out[*t] = k.add(&out[*t], &k.mul(&c, s));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> AlgebraReport {
        let k = &self.field;
        let n = self.dim();
        let mut rep = AlgebraReport {
            associative: true,
            unital: true,
            leibniz: true,
            d_squared_zero: true,
            connective: true,
            failures: vec![],
        };
        let coord = |i: usize| -> Vec<K::Elem> {
            let mut v = vec![k.zero(); n];
            v[i] = k.one();
            v
        };
        for i in 0..n {
            if self.elems[i].degree > 0 {
                rep.connective = false;
                rep.failures.push(format!("element {} has positive degree", self.elems[i].label));
            }
        }
        // structure constants respect cells
        for i in 0..n {
            for j in 0..n {
                for (t, _) in &self.mult[i][j] {
                    let (x, y, z) = (&self.elems[i], &self.elems[j], &self.elems[*t]);
                    if x.src != y.tgt || z.src != y.src || z.tgt != x.tgt || z.degree != x.degree + y.degree {
                        rep.associative = false;
                        rep.failures.push(format!(
                            "product {} * {} lands outside its cell",
                            x.label, y.label
                        ));
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let xy = self.multiply(&coord(i), &coord(j));
                    let lhs = self.multiply(&xy, &coord(l));
                    let yl = self.multiply(&coord(j), &coord(l));
                    let rhs = self.multiply(&coord(i), &yl);
                    if lhs != rhs {
                        rep.associative = false;
                        rep.failures.push(format!(
                            "associativity fails on ({}, {}, {})",
                            self.elems[i].label, self.elems[j].label, self.elems[l].label
                        ));
                    }
                }
            }
        }
        for i in 0..n {
            let e_t = coord(self.idempotent(self.elems[i].tgt));
            let e_s = coord(self.idempotent(self.elems[i].src));
            if self.multiply(&e_t, &coord(i)) != coord(i) || self.multiply(&coord(i), &e_s) != coord(i) {
                rep.unital = false;
                rep.failures.push(format!("units do not act as identity on {}", self.elems[i].label));
            }
        }
        // d^2 = 0 and Leibniz
        let d_vec = |x: &[K::Elem]| -> Vec<K::Elem> {
            let mut out = vec![k.zero(); n];
            for i in 0..n {
                if k.is_zero(&x[i]) {
                    continue;
                }
                for (t, c) in &self.diff[i] {
                    out[*t] = k.add(&out[*t], &k.mul(&x[i], c));
                }
            }
            out
        };
        for i in 0..n {
            let dd = d_vec(&d_vec(&coord(i)));
            if dd.iter().any(|c| !k.is_zero(c)) {
                rep.d_squared_zero = false;
                rep.failures.push(format!("d^2 != 0 on {}", self.elems[i].label));
            }
            for (t, _) in &self.diff[i] {
                if self.elems[*t].degree != self.elems[i].degree + 1 {
                    rep.d_squared_zero = false;
                    rep.failures.push(format!("d does not raise degree on {}", self.elems[i].label));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if self.elems[i].src != self.elems[j].tgt {
                    continue;
                }
                let lhs = d_vec(&self.multiply(&coord(i), &coord(j)));
                let term1 = self.multiply(&d_vec(&coord(i)), &coord(j));
                let mut term2 = self.multiply(&coord(i), &d_vec(&coord(j)));
                if self.elems[i].degree.rem_euclid(2) == 1 {
                    term2 = term2.iter().map(|c| k.neg(c)).collect();
                }
                let rhs: Vec<K::Elem> = term1
                    .iter()
                    .zip(term2.iter())
                    .map(|(a, b)| k.add(a, b))
                    .collect();
                if lhs != rhs {
                    rep.leibniz = false;
                    rep.failures.push(format!(
                        "Leibniz fails on ({}, {})",
                        self.elems[i].label, self.elems[j].label
                    ));
                }
            }
        }
        rep
    }

    /// Corrupts one structure constant; test helper for negative controls.
    pub fn corrupt_structure_constant(&mut self) {
        let k = self.field.clone();
        'outer: for i in 0..self.dim() {
            for j in 0..self.dim() {
                if !self.mult[i][j].is_empty() && self.elems[i].walk.len() + self.elems[j].walk.len() > 0 {
                    let (t, c) = self.mult[i][j][0].clone();
                    self.mult[i][j][0] = (t, k.add(&c, &k.one()));
                    break 'outer;
                }
            }
        }
    }

    /// The underlying cochain complex of the algebra (all cells together).
    pub fn underlying_complex(&self) -> Complex<K> {
        let k = self.field.clone();
        let mut comps: BTreeMap<i32, usize> = BTreeMap::new();
        let mut index_in_degree: Vec<usize> = vec![0; self.dim()];
        for (i, e) in self.elems.iter().enumerate() {
            let slot = comps.entry(e.degree).or_insert(0);
            index_in_degree[i] = *slot;
            *slot += 1;
        }
        let mut diffs: BTreeMap<i32, Matrix<K>> = BTreeMap::new();
        for (&t, &dim) in &comps {
            let rows = comps.get(&(t + 1)).copied().unwrap_or(0);
            if rows == 0 || dim == 0 {
                continue;
            }
            let mut m = Matrix::zeros(k.clone(), rows, dim);
            for i in self.indices_in_degree(t) {
                for (tt, c) in &self.diff[i] {
                    m.set(index_in_degree[*tt], index_in_degree[i], c.clone());
                }
            }
            diffs.insert(t, m);
        }
        Complex::new(k, comps, diffs).expect("algebra differential squares to zero")
    }

    pub fn is_d_truncated(&self, d: usize) -> bool {
        let cx = self.underlying_complex();
        cx.h_dims().keys().all(|&i| i > -(d as i32))
    }

    /// Quotient by the two-sided DG-ideal of everything in degrees <= -d
    /// together with `d(A^{-d})`; the result is d-truncated and the quotient
    /// map induces `H^i` isomorphisms above `-d`.
    pub fn truncate(&self, d: usize) -> Result<GradedAlgebra<K>> {
        let k = self.field.clone();
        let dd = -(d as i32);
        let n = self.dim();
        // ideal coordinates: all elements of degree <= -d, plus d(A^{-d})
        let mut ideal_cols: Vec<Vec<K::Elem>> = Vec::new();
        for i in 0..n {
            if self.elems[i].degree <= dd {
                let mut v = vec![k.zero(); n];
                v[i] = k.one();
                ideal_cols.push(v);
            }
        }
        for i in 0..n {
            if self.elems[i].degree == dd && !self.diff[i].is_empty() {
                let mut v = vec![k.zero(); n];
                for (t, c) in &self.diff[i] {
                    v[*t] = c.clone();
                }
                ideal_cols.push(v);
            }
        }
        let ideal = Matrix::from_columns(k.clone(), n, &ideal_cols);
        // check: two-sided and d-closed
        self.assert_dg_ideal(&ideal)?;
        let ideal = ideal.column_space_basis();
        let id = Matrix::identity(k.clone(), n);
        let reps = extend_basis(&ideal, &id);
        let full = ideal.hstack(&reps);
        let completion = extend_basis(&full, &id);
        let inv = full.hstack(&completion).inverse();
        let proj = Matrix::from_fn(k.clone(), reps.cols(), n, |r, c| inv.get(ideal.cols() + r, c).clone());
        // new basis: representative columns are coordinate vectors (single
        // old basis elements) because extend_basis chooses among columns of
        // the identity
        let mut kept: Vec<usize> = Vec::new();
        for c in 0..reps.cols() {
            let col = reps.column(c);
            let r = (0..n).find(|&r| !k.is_zero(&col[r])).unwrap();
            kept.push(r);
        }
        let elems: Vec<BasisElem> = kept.iter().map(|&i| self.elems[i].clone()).collect();
        let nb = elems.len();
        let reduce = |v: &[K::Elem]| -> Vec<(usize, K::Elem)> {
            let coords = proj.apply(v);
            (0..nb).filter(|&t| !k.is_zero(&coords[t])).map(|t| (t, coords[t].clone())).collect()
        };
        let coord = |i: usize| -> Vec<K::Elem> {
            let mut v = vec![k.zero(); n];
            v[i] = k.one();
            v
        };
        let mut mult = vec![vec![Vec::new(); nb]; nb];
        for a in 0..nb {
            for b in 0..nb {
                mult[a][b] = reduce(&self.multiply(&coord(kept[a]), &coord(kept[b])));
            }
        }
        let mut diff = vec![Vec::new(); nb];
        for a in 0..nb {
            let mut v = vec![k.zero(); n];
            for (t, c) in &self.diff[kept[a]] {
                v[*t] = c.clone();
            }
            diff[a] = reduce(&v);
        }
        GradedAlgebra::new(k, self.vertices.clone(), elems, mult, diff)
    }

    fn assert_dg_ideal(&self, ideal: &Matrix<K>) -> Result<()> {
        let k = &self.field;
        let n = self.dim();
        let coord = |i: usize| -> Vec<K::Elem> {
            let mut v = vec![k.zero(); n];
            v[i] = k.one();
            v
        };
        for c in 0..ideal.cols() {
            let x = ideal.column(c);
            // closed under d
            let mut dx = vec![k.zero(); n];
            for i in 0..n {
                if k.is_zero(&x[i]) {
                    continue;
                }
                for (t, cc) in &self.diff[i] {
                    dx[*t] = k.add(&dx[*t], &k.mul(&x[i], cc));
                }
            }
            let dxm = Matrix::from_columns(k.clone(), n, &[dx]);
            if !crate::matrix::subspace_contains(ideal, &dxm) {
                return Err(Error::Invariant("truncation ideal is not d-closed".into()));
            }
            for i in 0..n {
                for prod in [self.multiply(&coord(i), &x), self.multiply(&x, &coord(i))] {
                    let pm = Matrix::from_columns(k.clone(), n, &[prod]);
                    if !crate::matrix::subspace_contains(ideal, &pm) {
                        return Err(Error::Invariant("truncation ideal is not two-sided".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Graded cell dimensions: (src, tgt, degree) -> dim.
    pub fn cell_dims(&self) -> BTreeMap<(usize, usize, i32), usize> {
        let mut out = BTreeMap::new();
        for e in &self.elems {
            *out.entry((e.src, e.tgt, e.degree)).or_insert(0) += 1;
        }
        out
    }
}

/// Structural isomorphism test between two basic graded algebras: searches
/// for a vertex bijection matching all graded cell dimensions and the ranks
/// of all composition pairings. This is the radical-layer comparison used to
/// identify an extracted algebra with a quiver presentation; it does not
/// construct an explicit isomorphism.
pub fn radical_layers_isomorphic<K: Field>(a: &GradedAlgebra<K>, b: &GradedAlgebra<K>) -> bool {
    if a.num_vertices() != b.num_vertices() || a.dim() != b.dim() {
        return false;
    }
    let n = a.num_vertices();
    let perms = permutations(n);
    'perm: for perm in &perms {
        if a.cell_dims()
            .iter()
            .any(|(&(s, t, d), &dim)| b.cell_dims().get(&(perm[s], perm[t], d)).copied().unwrap_or(0) != dim)
        {
            continue;
        }
        let b_cells = b.cell_dims();
        for (&(s, t, d), &dim) in &a.cell_dims() {
            let _ = dim;
            for (&(s2, t2, d2), _) in &a.cell_dims() {
                if t != s2 {
                    continue;
                }
                let ra = pairing_rank(a, (s, t, d), (s2, t2, d2));
                let rb = pairing_rank(b, (perm[s], perm[t], d), (perm[s2], perm[t2], d2));
                if ra != rb {
                    continue 'perm;
                }
            }
            let _ = &b_cells;
        }
        return true;
    }
    false
}

/// Rank of the composition pairing cell2 (x) cell1 -> target, where cell1
/// is applied first.
fn pairing_rank<K: Field>(
    alg: &GradedAlgebra<K>,
    cell2: (usize, usize, i32),
    cell1: (usize, usize, i32),
) -> usize {
    let k = &alg.field;
    let idx2: Vec<usize> = (0..alg.dim())
        .filter(|&i| {
            let e = &alg.elems[i];
            (e.src, e.tgt, e.degree) == cell2
        })
        .collect();
    let idx1: Vec<usize> = (0..alg.dim())
        .filter(|&i| {
            let e = &alg.elems[i];
            (e.src, e.tgt, e.degree) == cell1
        })
        .collect();
    if idx1.is_empty() || idx2.is_empty() {
        return 0;
    }
    let target: Vec<usize> = (0..alg.dim())
        .filter(|&i| {
            let e = &alg.elems[i];
            (e.src, e.tgt, e.degree) == (cell1.0, cell2.1, cell1.2 + cell2.2)
        })
        .collect();
    if target.is_empty() {
        return 0;
    }
    let mut m = Matrix::zeros(k.clone(), target.len(), idx1.len() * idx2.len());
    for (c1, &i1) in idx1.iter().enumerate() {
        for (c2, &i2) in idx2.iter().enumerate() {
            for (t, coef) in alg.product(i2, i1) {
                if let Some(r) = target.iter().position(|x| x == t) {
                    m.set(r, c2 * idx1.len() + c1, coef.clone());
                }
            }
        }
    }
    m.rank()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let rest = permutations(n - 1);
    for p in rest {
        for pos in 0..=p.len() {
            let mut q: Vec<usize> = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rationals;

    fn q() -> Rationals {
        Rationals
    }

    fn linear_a2() -> PresentationSpec {
        PresentationSpec {
            vertices: vec!["1".into(), "2".into()],
            arrows: vec![ArrowSpec { name: "a".into(), from: "1".into(), to: "2".into(), degree: 0 }],
            relations: vec![],
            differential: BTreeMap::new(),
        }
    }

    pub fn example1_spec() -> PresentationSpec {
        PresentationSpec {
            vertices: vec!["1".into(), "2".into()],
            arrows: vec![
                ArrowSpec { name: "a".into(), from: "1".into(), to: "2".into(), degree: -1 },
                ArrowSpec { name: "b".into(), from: "2".into(), to: "1".into(), degree: -1 },
            ],
            relations: vec![
                vec![PathTerm { coef: "1".into(), path: vec!["a".into(), "b".into()] }],
                vec![PathTerm { coef: "1".into(), path: vec!["b".into(), "a".into()] }],
            ],
            differential: BTreeMap::new(),
        }
    }

    pub fn example2_spec() -> PresentationSpec {
        PresentationSpec {
            vertices: vec!["1".into(), "2".into(), "3".into()],
            arrows: vec![
                ArrowSpec { name: "al".into(), from: "1".into(), to: "2".into(), degree: 0 },
                ArrowSpec { name: "be".into(), from: "2".into(), to: "3".into(), degree: -1 },
                ArrowSpec { name: "ga".into(), from: "3".into(), to: "2".into(), degree: -1 },
            ],
            relations: vec![
                vec![PathTerm { coef: "1".into(), path: vec!["ga".into(), "be".into()] }],
                vec![PathTerm { coef: "1".into(), path: vec!["be".into(), "ga".into()] }],
            ],
            differential: BTreeMap::new(),
        }
    }

    #[test]
    fn ka2_basis() {
        let p = QuiverPresentation::from_spec(q(), &linear_a2()).unwrap();
        let alg = p.enumerate_basis(4).unwrap();
        assert_eq!(alg.dim(), 3);
        assert_eq!(alg.dims_by_degree(), [(0, 3)].into_iter().collect());
        assert!(alg.validate().all_pass());
    }

    #[test]
    fn example1_lambda_dims() {
        let p = QuiverPresentation::from_spec(q(), &example1_spec()).unwrap();
        let alg = p.enumerate_basis(4).unwrap();
        assert_eq!(alg.dims_by_degree(), [(0, 2), (-1, 2)].into_iter().collect());
        assert!(alg.validate().all_pass());
        assert!(alg.has_zero_differential());
    }

    #[test]
    fn example2_lambda_dims() {
        let p = QuiverPresentation::from_spec(q(), &example2_spec()).unwrap();
        let alg = p.enumerate_basis(6).unwrap();
        // degree 0: e1, e2, e3, al; degree -1: be, ga, and the composite be.al
        assert_eq!(alg.dims_by_degree(), [(0, 4), (-1, 3)].into_iter().collect());
        assert!(alg.validate().all_pass());
    }

    #[test]
    fn corrupted_structure_constant_flagged() {
        let p = QuiverPresentation::from_spec(q(), &example2_spec()).unwrap();
        let mut alg = p.enumerate_basis(6).unwrap();
        alg.corrupt_structure_constant();
        let rep = alg.validate();
        assert!(!rep.all_pass());
        assert!(!rep.associative || !rep.unital);
    }

    #[test]
    fn stabilization_gate() {
        // kA_2 with a length bound too small to certify stabilization
        let p = QuiverPresentation::from_spec(q(), &linear_a2()).unwrap();
        assert!(matches!(p.enumerate_basis(2), Err(Error::NotStabilized { .. })));
        // a quiver with a degree 0 loop and no relations never stabilizes
        let spec = PresentationSpec {
            vertices: vec!["1".into()],
            arrows: vec![ArrowSpec { name: "x".into(), from: "1".into(), to: "1".into(), degree: 0 }],
            relations: vec![],
            differential: BTreeMap::new(),
        };
        let p = QuiverPresentation::from_spec(q(), &spec).unwrap();
        assert!(matches!(p.enumerate_basis(8), Err(Error::NotStabilized { .. })));
    }

    #[test]
    fn truncate_drops_deep_degrees() {
        // polynomial-like: one arrow of degree -1 squaring to a degree -2 path
        let spec = PresentationSpec {
            vertices: vec!["1".into()],
            arrows: vec![ArrowSpec { name: "x".into(), from: "1".into(), to: "1".into(), degree: -1 }],
            relations: vec![vec![PathTerm { coef: "1".into(), path: vec!["x".into(), "x".into(), "x".into()] }]],
            differential: BTreeMap::new(),
        };
        let p = QuiverPresentation::from_spec(q(), &spec).unwrap();
        let alg = p.enumerate_basis(5).unwrap();
        assert_eq!(alg.dims_by_degree(), [(0, 1), (-1, 1), (-2, 1)].into_iter().collect());
        let tr = alg.truncate(2).unwrap();
        assert_eq!(tr.dims_by_degree(), [(0, 1), (-1, 1)].into_iter().collect());
        assert!(tr.is_d_truncated(2));
        // truncation is idempotent up to equality of data here
        let tr2 = tr.truncate(2).unwrap();
        assert_eq!(tr2.dims_by_degree(), tr.dims_by_degree());
    }

    #[test]
    fn truncation_with_differential_kills_image() {
        // arrows x (deg -1), y (deg -3) with d(y) = xx and x^3 = 0
        let spec = PresentationSpec {
            vertices: vec!["1".into()],
            arrows: vec![
                ArrowSpec { name: "x".into(), from: "1".into(), to: "1".into(), degree: -1 },
                ArrowSpec { name: "y".into(), from: "1".into(), to: "1".into(), degree: -3 },
            ],
            relations: vec![
                vec![PathTerm { coef: "1".into(), path: vec!["x".into(), "x".into(), "x".into()] }],
                vec![PathTerm { coef: "1".into(), path: vec!["x".into(), "y".into()] }],
                vec![PathTerm { coef: "1".into(), path: vec!["y".into(), "x".into()] }],
                vec![PathTerm { coef: "1".into(), path: vec!["y".into(), "y".into()] }],
            ],
            differential: [("y".to_string(), vec![PathTerm { coef: "1".into(), path: vec!["x".into(), "x".into()] }])]
                .into_iter()
                .collect(),
        };
        let p = QuiverPresentation::from_spec(q(), &spec).unwrap();
        let alg = p.enumerate_basis(6).unwrap();
        assert!(alg.validate().all_pass());
        assert_eq!(
            alg.dims_by_degree(),
            [(0, 1), (-1, 1), (-2, 1), (-3, 1)].into_iter().collect()
        );
        // truncating at d = 3 keeps degrees (-3, 0] but must also kill
        // d(A^{-3}) = x^2 in degree -2
        let tr = alg.truncate(3).unwrap();
        assert!(tr.is_d_truncated(3));
        assert_eq!(tr.dims_by_degree(), [(0, 1), (-1, 1)].into_iter().collect());
        let orig_h = alg.underlying_complex().h_dims();
        let tr_h = tr.underlying_complex().h_dims();
        for i in [-2, -1, 0] {
            assert_eq!(tr_h.get(&i), orig_h.get(&i), "H^{i} changed by truncation");
        }
        let tr2 = alg.truncate(2).unwrap();
        assert!(tr2.is_d_truncated(2));
        assert_eq!(tr2.dims_by_degree(), [(0, 1), (-1, 1)].into_iter().collect());
    }

    #[test]
    fn radical_layer_iso_distinguishes() {
        let p1 = QuiverPresentation::from_spec(q(), &example1_spec()).unwrap();
        let a1 = p1.enumerate_basis(4).unwrap();
        let p2 = QuiverPresentation::from_spec(q(), &example2_spec()).unwrap();
        let a2 = p2.enumerate_basis(6).unwrap();
        assert!(radical_layers_isomorphic(&a1, &a1));
        assert!(radical_layers_isomorphic(&a2, &a2));
        assert!(!radical_layers_isomorphic(&a1, &a2));
        // same dims, different relations: compare Example 1 with the variant
        // where b . a = 0 is dropped... instead compare against two loops on
        // one vertex with zero products, same total dimension 4
        let spec = PresentationSpec {
            vertices: vec!["1".into(), "2".into()],
            arrows: vec![
                ArrowSpec { name: "u".into(), from: "1".into(), to: "2".into(), degree: -1 },
                ArrowSpec { name: "v".into(), from: "1".into(), to: "2".into(), degree: -1 },
            ],
            relations: vec![],
            differential: BTreeMap::new(),
        };
        let p3 = QuiverPresentation::from_spec(q(), &spec).unwrap();
        let a3 = p3.enumerate_basis(4).unwrap();
        assert_eq!(a3.dim(), 4);
        assert!(!radical_layers_isomorphic(&a1, &a3));
    }

    #[test]
    fn idempotent_components_nonempty() {
        for spec in [linear_a2(), example1_spec(), example2_spec()] {
            let p = QuiverPresentation::from_spec(q(), &spec).unwrap();
            let alg = p.enumerate_basis(6).unwrap();
            for v in 0..alg.num_vertices() {
                let e = alg.idempotent(v);
                assert_eq!(alg.elems[e].degree, 0);
                assert_eq!((alg.elems[e].src, alg.elems[e].tgt), (v, v));
            }
        }
    }
}

impl<K: Field> GradedAlgebra<K> {
    /// Radical generators of a basic algebra with multiplicity-free cells:
    /// the non-idempotent basis elements outside the span of products of
    /// non-idempotent pairs, together with a generator word and scalar for
    /// every other basis element.
    pub fn generator_words(&self) -> Result<(Vec<usize>, Vec<Option<(K::Elem, Vec<usize>)>>)> {
        let k = &self.field;
        let nv = self.num_vertices();
        let n = self.dim();
        // span of radical squares, per coordinate
        let mut rad2_cols: Vec<Vec<K::Elem>> = Vec::new();
        for i in nv..n {
            for j in nv..n {
                if self.elems[i].src != self.elems[j].tgt {
                    continue;
                }
                let mut col = vec![k.zero(); n];
                for (t, c) in self.product(i, j) {
                    col[*t] = c.clone();
                }
                if col.iter().any(|c| !k.is_zero(c)) {
                    rad2_cols.push(col);
                }
            }
        }
        let rad2 = Matrix::from_columns(k.clone(), n, &rad2_cols);
        let mut generators = Vec::new();
        for i in nv..n {
            let mut col = vec![k.zero(); n];
            col[i] = k.one();
            let v = Matrix::from_columns(k.clone(), n, &[col]);
            if !crate::matrix::subspace_contains(&rad2, &v) {
                generators.push(i);
            }
        }
        // words: none for idempotents and generators; composites by search
        let mut words: Vec<Option<(K::Elem, Vec<usize>)>> = vec![None; n];
        for &g in &generators {
            words[g] = Some((k.one(), vec![g]));
        }
        let mut progress = true;
        while progress {
            progress = false;
            for x in nv..n {
                if words[x].is_some() {
                    continue;
                }
                'search: for &g in &generators {
                    for y in nv..n {
                        let Some((cy, wy)) = words[y].clone() else { continue };
                        // x = (scalar) g . y requires the product g*y to hit
                        // x alone (multiplicity-free cells)
                        let prod = self.product(g, y);
                        if prod.len() == 1 && prod[0].0 == x {
                            let c = k.mul(&cy, &prod[0].1);
                            words[x] = Some((c, {
                                let mut w = wy;
                                w.push(g);
                                w
                            }));
                            progress = true;
                            break 'search;
                        }
                    }
                }
            }
        }
        if words[nv..].iter().any(|w| w.is_none()) {
            return Err(Error::Invariant(
                "basis element is not a product of radical generators".into(),
            ));
        }
        Ok((generators, words))
    }
}
