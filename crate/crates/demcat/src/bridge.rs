//! The bridge between the two sides: extraction of the truncated graded
//! endomorphism algebra of a cluster tilting object, the transport functor
//! into d-extended modules, and the machine verification that the ideal
//! quotient and the module side compute the same numbers.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::cluster::{ClusterCategory, ObjId, OrbHom};
use crate::dem::{
    self, rhom_complex, semifree_resolution, DgModule, GenImages, Resolution,
};
use crate::error::{Error, Result};
use crate::field::{Field, PrimeField};
use crate::matrix::Matrix;
use crate::quiver::{BasisElem, GradedAlgebra};
use crate::quotient::QuotientCategory;

/// One basis element of the extracted algebra: a hom class between two
/// summands of M at one degree of the window.
struct LambdaElem<K: Field> {
    src: usize,
    tgt: usize,
    degree: i32,
    coords: Vec<K::Elem>,
}

pub struct MoritaContext<'c, K: Field> {
    pub quot: QuotientCategory<'c, K>,
    pub lambda: Arc<GradedAlgebra<K>>,
    /// surviving object -> transported dem module
    pub transport: Vec<(ObjId, DgModule<K>)>,
}

/// The truncated graded endomorphism algebra of `M = (+)_i M_i`, with one
/// vertex per summand and zero differential.
pub fn extract_lambda<K: Field>(cat: &ClusterCategory<K>, m: &[ObjId]) -> Result<GradedAlgebra<K>> {
    let k = cat.field.clone();
    let nv = m.len();
    let d = cat.d as i32;
    let mut elems_meta: Vec<LambdaElem<K>> = Vec::new();
    let mut spaces: BTreeMap<(usize, usize, i32), Arc<OrbHom<K>>> = BTreeMap::new();
    for (i, &mi) in m.iter().enumerate() {
        for (j, &mj) in m.iter().enumerate() {
            for a in 0..d {
                spaces.insert((i, j, -a), cat.hom_objects(mi, mj, -a)?);
            }
        }
    }
    // idempotents first: the identity class of each summand
    for (i, &mi) in m.iter().enumerate() {
        let space = &spaces[&(i, i, 0)];
        if space.dim() != 1 {
            return Err(Error::Invariant(format!(
                "End^0 of summand {} has dimension {}",
                cat.name(mi),
                space.dim()
            )));
        }
        // identity coordinates in the space basis
        let idm = crate::hereditary::ProjMap::identity(cat.complex(mi));
        let coords = cat.coords_in(space, idm, 0, 0)?;
        elems_meta.push(LambdaElem { src: i, tgt: i, degree: 0, coords });
    }
    // remaining basis classes, ordered by degree then cell
    for a in 0..d {
        for i in 0..nv {
            for j in 0..nv {
                if a == 0 && i == j {
                    continue;
                }
                let space = &spaces[&(i, j, -a)];
                for b in 0..space.dim() {
                    let mut coords = vec![k.zero(); space.dim()];
                    coords[b] = k.one();
                    elems_meta.push(LambdaElem { src: i, tgt: j, degree: -a, coords });
                }
            }
        }
    }
    let n = elems_meta.len();
    // cell bases for re-expressing products
    let cell_members = |s: usize, t: usize, deg: i32| -> Vec<usize> {
        (0..n)
            .filter(|&e| {
                let el = &elems_meta[e];
                (el.src, el.tgt, el.degree) == (s, t, deg)
            })
            .collect()
    };
    let mut mult: Vec<Vec<Vec<(usize, K::Elem)>>> = vec![vec![Vec::new(); n]; n];
    for x in 0..n {
        for y in 0..n {
            let (ex, ey) = (&elems_meta[x], &elems_meta[y]);
            if ex.src != ey.tgt {
                continue;
            }
            let deg = ex.degree + ey.degree;
            if deg <= -d {
                continue; // truncated away
            }
            let first = &spaces[&(ey.src, ey.tgt, ey.degree)];
            let then = &spaces[&(ex.src, ex.tgt, ex.degree)];
            let out = &spaces[&(ey.src, ex.tgt, deg)];
            // bilinear extension over the coordinates
            let mut acc = vec![k.zero(); out.dim()];
            for (bi, cy) in ey.coords.iter().enumerate() {
                if k.is_zero(cy) {
                    continue;
                }
                for (bj, cx) in ex.coords.iter().enumerate() {
                    if k.is_zero(cx) {
                        continue;
                    }
                    let comp = cat.compose_basis(first, &first.basis[bi], then, &then.basis[bj], out)?;
                    for (t, v) in comp.iter().enumerate() {
                        acc[t] = k.add(&acc[t], &k.mul(&k.mul(cx, cy), v));
                    }
                }
            }
            // express in the member basis of the target cell
            let members = cell_members(ey.src, ex.tgt, deg);
            if members.is_empty() {
                if acc.iter().any(|c| !k.is_zero(c)) {
                    return Err(Error::Invariant("product lands outside the extracted basis".into()));
                }
                continue;
            }
            let cols: Vec<Vec<K::Elem>> = members.iter().map(|&e| elems_meta[e].coords.clone()).collect();
            let mat = Matrix::from_columns(k.clone(), out.dim(), &cols);
            let sol = mat
                .solve(&acc)
                .ok_or_else(|| Error::Invariant("product outside the cell span".into()))?;
            mult[x][y] = members
                .iter()
                .zip(sol.iter())
                .filter(|(_, c)| !k.is_zero(c))
                .map(|(&e, c)| (e, c.clone()))
                .collect();
        }
    }
    let vertices: Vec<String> = m.iter().map(|&mi| cat.name(mi).to_string()).collect();
    let elems: Vec<BasisElem> = elems_meta
        .iter()
        .enumerate()
        .map(|(idx, e)| BasisElem {
            degree: e.degree,
            src: e.src,
            tgt: e.tgt,
            label: if idx < nv { format!("e_{}", vertices[e.src]) } else { format!("x{idx}") },
            walk: vec![],
        })
        .collect();
    GradedAlgebra::new(k, vertices, elems, mult, vec![Vec::new(); n])
}

/// The transport of one object: graded components `H^{-j} e_i =
/// Hom_C(M_i, X[d-j])`, with the right action by precomposition.
pub fn transport_object<K: Field>(
    cat: &ClusterCategory<K>,
    m: &[ObjId],
    lambda: &Arc<GradedAlgebra<K>>,
    x: ObjId,
) -> Result<DgModule<K>> {
    let k = cat.field.clone();
    let d = cat.d as i32;
    // slots per degree: for j in 0..d, basis of Hom(M_i, X[d-j]) at vertex i
    let mut comps: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    let mut spaces: BTreeMap<(usize, i32), Arc<OrbHom<K>>> = BTreeMap::new();
    let mut slot_index: BTreeMap<(usize, i32, usize), usize> = BTreeMap::new(); // (vertex, degree, basis idx) -> slot
    for j in 0..d {
        let mut slots = Vec::new();
        for (i, &mi) in m.iter().enumerate() {
            let space = cat.hom_objects(mi, x, d - j)?;
            for b in 0..space.dim() {
                slot_index.insert((i, -j, b), slots.len());
                slots.push(i);
            }
            spaces.insert((i, -j), space);
        }
        if !slots.is_empty() {
            comps.insert(-j, slots);
        }
    }
    let mut act: Vec<BTreeMap<i32, Matrix<K>>> = vec![BTreeMap::new(); lambda.dim()];
    for (a, ea) in lambda.elems.iter().enumerate() {
        if a < lambda.num_vertices() {
            continue; // idempotents are structural
        }
        // action: phi in slot (tgt(a), -j) composes to (src(a), -j + |a|)
        let da = ea.degree;
        for j in 0..d {
            let t = -j;
            if t + da <= -d {
                continue;
            }
            let src_dim = comps.get(&t).map_or(0, |v| v.len());
            let tgt_dim = comps.get(&(t + da)).map_or(0, |v| v.len());
            if src_dim == 0 || tgt_dim == 0 {
                continue;
            }
            let mut blk = Matrix::zeros(k.clone(), tgt_dim, src_dim);
            // lambda element a: class M_{src(a)} -> M_{tgt(a)}<deg>
            let lam_space = cat.hom_objects(m[ea.src], m[ea.tgt], da)?;
            let lam_coords = lambda_elem_coords(cat, m, a, lambda, &lam_space)?;
            let phi_space = &spaces[&(ea.tgt, t)];
            let out_space = &spaces[&(ea.src, t + da)];
            for b in 0..phi_space.dim() {
                let col = slot_index[&(ea.tgt, t, b)];
                let mut acc = vec![k.zero(); out_space.dim()];
                for (lb, lc) in lam_coords.iter().enumerate() {
                    if k.is_zero(lc) {
                        continue;
                    }
                    let comp = cat.compose_basis(
                        &lam_space,
                        &lam_space.basis[lb],
                        phi_space,
                        &phi_space.basis[b],
                        out_space,
                    )?;
                    for (ti, v) in comp.iter().enumerate() {
                        acc[ti] = k.add(&acc[ti], &k.mul(lc, v));
                    }
                }
                for (ti, v) in acc.iter().enumerate() {
                    let row = slot_index[&(ea.src, t + da, ti)];
                    blk.set(row, col, v.clone());
                }
            }
            act[a].insert(t, blk);
        }
    }
    let module = DgModule::new(lambda.clone(), comps, BTreeMap::new(), act)?;
    if !module.in_dem_window(cat.d) {
        return Err(Error::Invariant(format!(
            "transport of {} leaves the dem window",
            cat.name(x)
        )));
    }
    Ok(module)
}

/// Coordinates of an extracted algebra element in the hom space basis; the
/// extraction stores them per element, recomputed here from the metadata
/// embedded in the construction order.
fn lambda_elem_coords<K: Field>(
    cat: &ClusterCategory<K>,
    m: &[ObjId],
    a: usize,
    lambda: &Arc<GradedAlgebra<K>>,
    space: &Arc<OrbHom<K>>,
) -> Result<Vec<K::Elem>> {
    let k = cat.field.clone();
    let ea = &lambda.elems[a];
    if a < lambda.num_vertices() {
        let idm = crate::hereditary::ProjMap::identity(cat.complex(m[ea.src]));
        return cat.coords_in(space, idm, 0, 0);
    }
    // non-idempotent elements were created one per space basis vector, in
    // degree-then-cell order; recover which basis vector by counting
    let d = cat.d as i32;
    let nv = lambda.num_vertices();
    let mut idx = nv;
    for deg in 0..d {
        for i in 0..nv {
            for j in 0..nv {
                if deg == 0 && i == j {
                    continue;
                }
                let dim = cat.hom_objects(m[i], m[j], -deg)?.dim();
                for b in 0..dim {
                    if idx == a {
                        debug_assert_eq!((ea.src, ea.tgt, ea.degree), (i, j, -deg));
                        let mut coords = vec![k.zero(); space.dim()];
                        coords[b] = k.one();
                        return Ok(coords);
                    }
                    idx += 1;
                }
            }
        }
    }
    Err(Error::Invariant("algebra element out of range".into()))
}

impl<'c, K: Field> MoritaContext<'c, K> {
    pub fn new(cat: &'c ClusterCategory<K>, m: Vec<ObjId>, force: bool) -> Result<Self> {
        let quot = QuotientCategory::new(cat, m, force)?;
        let lambda = Arc::new(extract_lambda(cat, &quot.m)?);
        let mut transport = Vec::new();
        for &x in &quot.surviving {
            transport.push((x, transport_object(cat, &quot.m, &lambda, x)?));
        }
        // sanity: transported summands of M are zero
        for &mi in &quot.m {
            let z = transport_object(cat, &quot.m, &lambda, mi)?;
            if !z.is_zero_module() {
                return Err(Error::Invariant("transport of a summand of M is nonzero".into()));
            }
        }
        Ok(MoritaContext { quot, lambda, transport })
    }

    pub fn module_of(&self, x: ObjId) -> Option<&DgModule<K>> {
        self.transport.iter().find(|(y, _)| *y == x).map(|(_, m)| m)
    }

    /// The transport of a degree 0 hom class as a module morphism between
    /// the transported objects.
    pub fn transport_morphism(
        &self,
        x: ObjId,
        y: ObjId,
        class: &[K::Elem],
    ) -> Result<dem::DgMap<K>> {
        let cat = self.quot.cat;
        let k = cat.field.clone();
        let d = cat.d as i32;
        let mx = self.module_of(x).ok_or_else(|| Error::UnknownObject(format!("{x}")))?;
        let my = self.module_of(y).ok_or_else(|| Error::UnknownObject(format!("{y}")))?;
        let psi_space = cat.hom_objects(x, y, 0)?;
        let mut map = dem::DgMap::zero(mx.clone(), my.clone(), 0);
        for j in 0..d {
            let t = -j;
            if mx.dim(t) == 0 || my.dim(t) == 0 {
                continue;
            }
            let mut blk = Matrix::zeros(k.clone(), my.dim(t), mx.dim(t));
            let mut col = 0usize;
            for (i, &mi) in self.quot.m.iter().enumerate() {
                let _ = i;
                let phi_space = cat.hom_objects(mi, x, d - j)?;
                let out_space = cat.hom_objects(mi, y, d - j)?;
                for b in 0..phi_space.dim() {
                    let mut acc = vec![k.zero(); out_space.dim()];
                    for (pb, pc) in class.iter().enumerate() {
                        if k.is_zero(pc) {
                            continue;
                        }
                        let comp = cat.compose_basis(
                            &phi_space,
                            &phi_space.basis[b],
                            &psi_space,
                            &psi_space.basis[pb],
                            &out_space,
                        )?;
                        for (ti, v) in comp.iter().enumerate() {
                            acc[ti] = k.add(&acc[ti], &k.mul(pc, v));
                        }
                    }
                    // rows of the target block for summand mi start after the
                    // previous summands' slots
                    let row_base: usize = {
                        let mut base = 0;
                        for &mj in self.quot.m.iter() {
                            if mj == mi {
                                break;
                            }
                            base += cat.hom_objects(mj, y, d - j)?.dim();
                        }
                        base
                    };
                    for (ti, v) in acc.iter().enumerate() {
                        blk.set(row_base + ti, col, v.clone());
                    }
                    col += 1;
                }
            }
            map.set_block(t, blk);
        }
        if !map.is_closed_morphism() {
            return Err(Error::Invariant("transported morphism is not a closed morphism".into()));
        }
        Ok(map)
    }
}

/// The full verification report of the bridge on one example.
#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub n: usize,
    pub d: usize,
    pub m_names: Vec<String>,
    pub pair_table: Vec<PairDims>,
    pub pairs_checked: usize,
    pub pairs_equal: bool,
    pub bar_oracle_equal: bool,
    pub bar_stable: bool,
    pub omega_vanishing: bool,
    pub prop_end_holds: bool,
    pub injective_on_objects: bool,
    pub images_indecomposable: bool,
    pub projectives_are_frees: bool,
    pub injectives_are_duals: bool,
    pub frobenius: bool,
    pub self_injectivity: dem::SelfInjReport,
    pub self_inj_agrees_with_frobenius: bool,
    pub functoriality_samples: usize,
    pub functoriality_holds: bool,
    pub ar_quivers_match: bool,
    pub brute_force: Option<BruteForceReport>,
    pub overall: bool,
}

#[derive(Debug, Serialize)]
pub struct PairDims {
    pub x: String,
    pub y: String,
    pub degree: i32,
    pub quotient_dim: usize,
    pub lambda_dim: usize,
}

#[derive(Debug, Serialize)]
pub struct BruteForceReport {
    pub field: u64,
    pub bound: usize,
    pub classes_found: usize,
    pub classes_expected: usize,
    pub all_matched: bool,
}

pub fn verify_equivalence<K: Field>(ctx: &MoritaContext<'_, K>, bar_len: usize, brute_bound: usize) -> Result<VerifyReport> {
    let cat = ctx.quot.cat;
    let d = cat.d;
    let depth = d + 2;
    // resolutions of the transported modules, shared
    let mut resolutions: BTreeMap<ObjId, Resolution<K>> = BTreeMap::new();
    for (x, module) in &ctx.transport {
        resolutions.insert(*x, semifree_resolution(module, depth)?);
    }
    let mut pair_table = Vec::new();
    let mut pairs_equal = true;
    let mut bar_oracle_equal = true;
    let mut bar_stable = true;
    let mut omega_vanishing = true;
    for (x, _mx) in &ctx.transport {
        let resx = &resolutions[x];
        for (y, my) in &ctx.transport {
            let rc = rhom_complex(&resx.sf, my)?;
            // the bar oracle is sound at degree zero over the graded model;
            // negative degrees would need the chain-level enhancement
            let bar0 = ctx.quot.bar_quotient_hom0(*x, *y, bar_len)?;
            let bar0_more = ctx.quot.bar_quotient_hom0(*x, *y, bar_len + 1)?;
            if bar0 != bar0_more {
                bar_stable = false;
            }
            if bar0 != ctx.quot.quotient_hom_dim(*x, *y, 0)? {
                bar_oracle_equal = false;
            }
            for i in 0..d as i32 {
                let quotient_dim = ctx.quot.quotient_hom_dim(*x, *y, -i)?;
                let lambda_dim = rc.h_dim(-i);
                if quotient_dim != lambda_dim {
                    pairs_equal = false;
                }
                pair_table.push(PairDims {
                    x: cat.name(*x).to_string(),
                    y: cat.name(*y).to_string(),
                    degree: -i,
                    quotient_dim,
                    lambda_dim,
                });
            }
            // d-truncatedness on the quotient side
            for i in d as i32..(d as i32 + 2) {
                if ctx.quot.quotient_hom_dim(*x, *y, -i)? != 0 {
                    omega_vanishing = false;
                }
            }
        }
    }
    // Prop end: hom preservation for X in add(M[-d])
    let mut prop_end_holds = true;
    for &p in &ctx.quot.projectives() {
        for &y in &ctx.quot.surviving {
            for i in 0..d as i32 {
                if cat.hom_dim(p, y, -i)? != ctx.quot.quotient_hom_dim(p, y, -i)? {
                    prop_end_holds = false;
                }
            }
        }
    }
    // object-level checks
    let mut injective_on_objects = true;
    for (i, (_, mi)) in ctx.transport.iter().enumerate() {
        for (_, mj) in ctx.transport.iter().skip(i + 1) {
            if mi.h_dims() == mj.h_dims() && dem::derived_iso(mi, mj) {
                injective_on_objects = false;
            }
        }
    }
    let mut images_indecomposable = true;
    for (_, module) in &ctx.transport {
        if module.is_zero_module() || !dem::is_indecomposable(module)? {
            images_indecomposable = false;
        }
    }
    // projectives/injectives correspond
    let mut projectives_are_frees = true;
    {
        let mut frees = dem::DgModule::zero(ctx.lambda.clone());
        for v in 0..ctx.lambda.num_vertices() {
            frees = frees.direct_sum(&dem::DgModule::free(ctx.lambda.clone(), v, 0));
        }
        let mut proj_sum = dem::DgModule::zero(ctx.lambda.clone());
        for &p in &ctx.quot.projectives() {
            match ctx.module_of(p) {
                Some(mp) => proj_sum = proj_sum.direct_sum(mp),
                None => projectives_are_frees = false,
            }
        }
        if proj_sum.h_dims() != frees.h_dims() || !dem::derived_iso(&proj_sum, &frees) {
            projectives_are_frees = false;
        }
    }
    let mut injectives_are_duals = true;
    {
        let duals = dem::dual_regular_module(&ctx.lambda)?.shift(d as i32 - 1);
        let mut inj_sum = dem::DgModule::zero(ctx.lambda.clone());
        for &p in &ctx.quot.injectives() {
            match ctx.module_of(p) {
                Some(mp) => inj_sum = inj_sum.direct_sum(mp),
                None => injectives_are_duals = false,
            }
        }
        if inj_sum.h_dims() != duals.h_dims() || !dem::derived_iso(&inj_sum, &duals) {
            injectives_are_duals = false;
        }
    }
    let frobenius = ctx.quot.frobenius();
    let self_injectivity = dem::self_injectivity_probe(&ctx.lambda, d)?;
    let self_inj_agrees_with_frobenius = self_injectivity.positive == frobenius;
    // functoriality on sampled composable basis morphisms
    let mut functoriality_samples = 0usize;
    let mut functoriality_holds = true;
    'fun: for &x in ctx.quot.surviving.iter().take(4) {
        for &y in ctx.quot.surviving.iter().take(4) {
            for &z in ctx.quot.surviving.iter().take(4) {
                let fs = cat.hom_objects(x, y, 0)?;
                let gs = cat.hom_objects(y, z, 0)?;
                let out = cat.hom_objects(x, z, 0)?;
                if fs.dim() == 0 || gs.dim() == 0 {
                    continue;
                }
                let k = cat.field.clone();
                let mut fc = vec![k.zero(); fs.dim()];
                fc[0] = k.one();
                let mut gc = vec![k.zero(); gs.dim()];
                gc[0] = k.one();
                let composite = cat.compose_basis(&fs, &fs.basis[0], &gs, &gs.basis[0], &out)?;
                let tf = ctx.transport_morphism(x, y, &fc)?;
                let tg = ctx.transport_morphism(y, z, &gc)?;
                let t_comp = ctx.transport_morphism(x, z, &composite)?;
                let lhs = tf.compose(&tg);
                for &t in ctx.module_of(x).unwrap().support().map(|(lo, hi)| lo..=hi).unwrap_or(0..=-1).collect::<Vec<_>>().iter() {
                    if lhs.block(t) != t_comp.block(t) {
                        functoriality_holds = false;
                    }
                }
                functoriality_samples += 1;
                if functoriality_samples >= 20 {
                    break 'fun;
                }
            }
        }
    }
    // AR quivers on both sides
    let quotient_quiver = ctx.quot.quotient_ar_quiver()?;
    let lambda_quiver = lambda_side_ar_quiver(ctx, &resolutions)?;
    let ar_quivers_match = quotient_quiver.adjacency() == lambda_quiver;
    // brute force over F_2
    let brute_force = match brute_force_report(cat.n, d, &ctx.quot.m.iter().map(|&x| cat.name(x)).collect::<Vec<_>>(), brute_bound) {
        Ok(r) => Some(r),
        Err(Error::Config(_)) => None,
        Err(e) => return Err(e),
    };
    let overall = pairs_equal
        && bar_oracle_equal
        && bar_stable
        && omega_vanishing
        && prop_end_holds
        && injective_on_objects
        && images_indecomposable
        && projectives_are_frees
        && injectives_are_duals
        && self_inj_agrees_with_frobenius
        && functoriality_holds
        && ar_quivers_match
        && brute_force.as_ref().map_or(true, |b| b.all_matched);
    Ok(VerifyReport {
        n: cat.n,
        d,
        m_names: ctx.quot.m.iter().map(|&x| cat.name(x).to_string()).collect(),
        pairs_checked: pair_table.len(),
        pair_table,
        pairs_equal,
        bar_oracle_equal,
        bar_stable,
        omega_vanishing,
        prop_end_holds,
        injective_on_objects,
        images_indecomposable,
        projectives_are_frees,
        injectives_are_duals,
        frobenius,
        self_injectivity,
        self_inj_agrees_with_frobenius,
        functoriality_samples,
        functoriality_holds,
        ar_quivers_match,
        brute_force,
        overall,
    })
}

/// The AR quiver computed purely on the module side: rad/rad^2 of `H^0` of
/// the derived endomorphisms of the transported modules, with composition
/// through resolution lifts.
fn lambda_side_ar_quiver<K: Field>(
    ctx: &MoritaContext<'_, K>,
    resolutions: &BTreeMap<ObjId, Resolution<K>>,
) -> Result<BTreeMap<String, BTreeMap<String, usize>>> {
    let cat = ctx.quot.cat;
    let k = cat.field.clone();
    let objs: Vec<ObjId> = ctx.transport.iter().map(|(x, _)| *x).collect();
    // hom class bases and composition via lifts
    let mut hom_classes: BTreeMap<(ObjId, ObjId), Vec<GenImages<K>>> = BTreeMap::new();
    for &x in &objs {
        for &y in &objs {
            let rc = rhom_complex(&resolutions[&x].sf, ctx.module_of(y).unwrap())?;
            hom_classes.insert((x, y), rc.classes(0));
        }
    }
    let compose = |x: ObjId, y: ObjId, z: ObjId, f: &GenImages<K>, g: &GenImages<K>| -> Result<Vec<K::Elem>> {
        // f: X -> Y, g: Y -> Z, composite in H^0 rhom(X, Z)
        let resx = &resolutions[&x];
        let resy = &resolutions[&y];
        let lifted = dem::lift_gen_images_through(resx, resy, f)?;
        let rc_yz = rhom_complex(&resy.sf, ctx.module_of(z).unwrap())?;
        let gmap = rc_yz.as_map(&resy.module, g);
        let mut images = Vec::new();
        for (gi, &(dg, _)) in resx.sf.gens.iter().enumerate() {
            images.push(gmap.block(dg).apply(&lifted[gi]));
        }
        let rc_xz = rhom_complex(&resx.sf, ctx.module_of(z).unwrap())?;
        Ok(rc_xz.project(&GenImages { degree: 0, images }))
    };
    let mut adjacency: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for &x in &objs {
        adjacency.entry(cat.name(x).to_string()).or_default();
    }
    for &x in &objs {
        for &y in &objs {
            if x == y {
                continue;
            }
            let dim_xy = hom_classes[&(x, y)].len();
            if dim_xy == 0 {
                continue;
            }
            let mut cols: Vec<Vec<K::Elem>> = Vec::new();
            for &z in &objs {
                if z == x || z == y {
                    continue;
                }
                for f in &hom_classes[&(x, z)] {
                    for g in &hom_classes[&(z, y)] {
                        cols.push(compose(x, z, y, f, g)?);
                    }
                }
            }
            let rad2 = if cols.is_empty() {
                0
            } else {
                Matrix::from_columns(k.clone(), dim_xy, &cols).rank()
            };
            let mult = dim_xy - rad2;
            if mult > 0 {
                adjacency
                    .entry(cat.name(x).to_string())
                    .or_default()
                    .insert(cat.name(y).to_string(), mult);
            }
        }
    }
    Ok(adjacency)
}

/// Rebuilds the whole pipeline over F_2 and compares the brute forced dem
/// indecomposables with the transported objects.
pub fn brute_force_report(
    n: usize,
    d: usize,
    m_names: &[crate::cluster::ObjName],
    bound: usize,
) -> Result<BruteForceReport> {
    let k2 = PrimeField::new(2)?;
    let cat2 = ClusterCategory::build(k2, n, d)?;
    let m2: Vec<ObjId> = m_names.iter().map(|&nm| cat2.by_name(nm)).collect::<Result<_>>()?;
    let ctx2 = MoritaContext::new(&cat2, m2, false)?;
    let found = dem::enumerate_dem_indecomposables(&ctx2.lambda, d, bound)?;
    let mut all_matched = found.len() == ctx2.transport.len();
    for candidate in &found {
        let mut matched = false;
        for (_, module) in &ctx2.transport {
            if candidate.h_dims() == module.h_dims() && dem::derived_iso(candidate, module) {
                matched = true;
                break;
            }
        }
        if !matched {
            all_matched = false;
        }
    }
    Ok(BruteForceReport {
        field: 2,
        bound,
        classes_found: found.len(),
        classes_expected: ctx2.transport.len(),
        all_matched,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::ObjName;
    use crate::field::Rationals;
    use crate::quiver::{radical_layers_isomorphic, PresentationSpec, QuiverPresentation};

    fn q() -> Rationals {
        Rationals
    }

    fn ctx22(cat: &ClusterCategory<Rationals>) -> MoritaContext<'_, Rationals> {
        let m = vec![
            cat.by_name(ObjName { j: 0, k: 1 }).unwrap(),
            cat.by_name(ObjName { j: 2, k: 1 }).unwrap(),
        ];
        MoritaContext::new(cat, m, false).unwrap()
    }

    #[test]
    fn lambda_example_one_matches_presentation() {
        let cat = ClusterCategory::build(q(), 2, 2).unwrap();
        let ctx = ctx22(&cat);
        assert_eq!(ctx.lambda.dims_by_degree(), [(0, 2), (-1, 2)].into_iter().collect());
        assert!(ctx.lambda.has_zero_differential());
        assert!(ctx.lambda.validate().all_pass());
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
        let presented = QuiverPresentation::from_spec(q(), &spec).unwrap().enumerate_basis(4).unwrap();
        assert!(radical_layers_isomorphic(&ctx.lambda, &presented));
        // composite of two degree -1 classes vanishes in the truncation
        for x in 0..ctx.lambda.dim() {
            for y in 0..ctx.lambda.dim() {
                if ctx.lambda.degree_of(x) == -1 && ctx.lambda.degree_of(y) == -1 {
                    assert!(ctx.lambda.product(x, y).is_empty());
                }
            }
        }
    }

    #[test]
    fn lambda_example_two_matches_presentation() {
        let cat = ClusterCategory::build(q(), 3, 2).unwrap();
        let m = vec![
            cat.by_name(ObjName { j: 0, k: 1 }).unwrap(),
            cat.by_name(ObjName { j: 0, k: 2 }).unwrap(),
            cat.by_name(ObjName { j: 3, k: 1 }).unwrap(),
        ];
        let ctx = MoritaContext::new(&cat, m, false).unwrap();
        assert_eq!(ctx.lambda.dims_by_degree(), [(0, 4), (-1, 3)].into_iter().collect());
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
        let presented = QuiverPresentation::from_spec(q(), &spec).unwrap().enumerate_basis(6).unwrap();
        assert!(radical_layers_isomorphic(&ctx.lambda, &presented));
    }

    #[test]
    fn transport_sends_shifted_summands_to_frees() {
        let cat = ClusterCategory::build(q(), 2, 2).unwrap();
        let ctx = ctx22(&cat);
        // X = M_v[-d] transports to the projective e_v Lambda
        for (v, &mi) in ctx.quot.m.iter().enumerate() {
            let shifted = cat.shift_object_by(mi, -2);
            let module = ctx.module_of(shifted).unwrap();
            let free = DgModule::free(ctx.lambda.clone(), v, 0);
            assert_eq!(module.h_dims(), free.h_dims());
            assert!(dem::derived_iso(module, &free));
        }
    }

    #[test]
    fn transport_shapes_match_figure() {
        // the six surviving objects of Example 1 carry the graded dims of
        // the figure: four one dimensional modules split across the two
        // degrees, and two two-step columns
        let cat = ClusterCategory::build(q(), 2, 2).unwrap();
        let ctx = ctx22(&cat);
        let mut shapes: Vec<Vec<((i32, usize), usize)>> = ctx
            .transport
            .iter()
            .map(|(_, m)| m.h_dims().into_iter().collect::<Vec<_>>())
            .collect();
        shapes.sort();
        let mut expected: Vec<Vec<((i32, usize), usize)>> = vec![
            vec![((0, 0), 1)],
            vec![((0, 1), 1)],
            vec![((-1, 0), 1)],
            vec![((-1, 1), 1)],
            vec![((-1, 0), 1), ((0, 1), 1)],
            vec![((-1, 1), 1), ((0, 0), 1)],
        ];
        expected.sort();
        assert_eq!(shapes, expected);
    }

    #[test]
    fn verify_example_one() {
        let cat = ClusterCategory::build(q(), 2, 2).unwrap();
        let ctx = ctx22(&cat);
        let report = verify_equivalence(&ctx, 4, 4).unwrap();
        assert!(report.pairs_equal, "bridge dims");
        assert_eq!(report.pairs_checked, 72);
        assert!(report.bar_oracle_equal);
        assert!(report.bar_stable);
        assert!(report.omega_vanishing);
        assert!(report.prop_end_holds);
        assert!(report.injective_on_objects);
        assert!(report.images_indecomposable);
        assert!(report.projectives_are_frees);
        assert!(report.injectives_are_duals);
        assert!(report.frobenius);
        assert!(report.self_injectivity.positive);
        assert!(report.self_inj_agrees_with_frobenius);
        assert!(report.functoriality_holds);
        assert!(report.ar_quivers_match);
        let bf = report.brute_force.as_ref().unwrap();
        assert_eq!(bf.classes_found, 6);
        assert!(bf.all_matched);
        assert!(report.overall);
    }
}
