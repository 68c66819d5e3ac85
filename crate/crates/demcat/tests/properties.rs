//! Property tests for the exact linear algebra and the complex calculus.

use std::collections::BTreeMap;

use demcat::complex::{ChainMap, Complex};
use demcat::field::{Field, PrimeField, Rationals};
use demcat::matrix::{extend_basis, Matrix};
use proptest::prelude::*;

fn q() -> Rationals {
    Rationals
}

fn small_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix<Rationals>> {
    proptest::collection::vec(-4i64..5, rows * cols).prop_map(move |entries| {
        Matrix::from_fn(q(), rows, cols, |r, c| q().from_i64(entries[r * cols + c]))
    })
}

/// A random bounded complex assembled from points and contractible pieces,
/// so it is valid by construction while having arbitrary cohomology.
fn random_complex() -> impl Strategy<Value = Complex<Rationals>> {
    proptest::collection::vec((-3i32..3, 0usize..3), 1..6).prop_map(|parts| {
        let mut x = Complex::zero(q());
        for (deg, kind) in parts {
            match kind {
                0 => x = x.direct_sum(&Complex::point(q(), deg)),
                1 => {
                    let two: Complex<Rationals> = Complex::new(
                        q(),
                        [(deg, 1), (deg + 1, 1)].into_iter().collect(),
                        [(deg, Matrix::identity(q(), 1))].into_iter().collect(),
                    )
                    .unwrap();
                    x = x.direct_sum(&two);
                }
                _ => {}
            }
        }
        x
    })
}

/// A closed degree zero map built through cohomology representatives.
fn closed_map(
    x: &Complex<Rationals>,
    y: &Complex<Rationals>,
    coefs: &[i64],
) -> ChainMap<Rationals> {
    let mut f = ChainMap::zero(x.clone(), y.clone(), 0);
    let mut used = 0;
    for i in -4..5 {
        let hx = x.cohomology(i);
        let hy = y.cohomology(i);
        if hx.dim == 0 || hy.dim == 0 || x.dim(i) == 0 || y.dim(i) == 0 {
            continue;
        }
        let rand_h = Matrix::from_fn(q(), hy.dim, hx.dim, |_, _| {
            let c = coefs.get(used % coefs.len()).copied().unwrap_or(1);
            used += 1;
            q().from_i64(c)
        });
        let block = hy.reps.mul(&rand_h).mul(&hx.projector);
        let ker = x.diff(i).kernel_basis();
        if ker.cols() == 0 {
            continue;
        }
        let id = Matrix::identity(q(), x.dim(i));
        let compl = extend_basis(&ker, &id);
        let basis = ker.hstack(&compl);
        let inv = basis.inverse();
        let ker_proj = Matrix::from_fn(q(), ker.cols(), x.dim(i), |r, c| inv.get(r, c).clone());
        f.set_block(i, block.mul(&ker.mul(&ker_proj)));
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rank_nullity_and_transpose(m in (1usize..6, 1usize..6).prop_flat_map(|(r, c)| small_matrix(r, c))) {
        prop_assert_eq!(m.rank() + m.kernel_basis().cols(), m.cols());
        prop_assert_eq!(m.rank(), m.transpose().rank());
    }

    #[test]
    fn rank_matches_prime_field_for_pm_one(entries in proptest::collection::vec(-1i64..2, 16)) {
        // 0/+-1 matrices have equal rank over Q and over F_p for large p
        let a = Matrix::from_fn(q(), 4, 4, |r, c| q().from_i64(entries[r * 4 + c]));
        let k5 = PrimeField::new(5).unwrap();
        let b = Matrix::from_fn(k5, 4, 4, |r, c| k5.from_i64(entries[r * 4 + c]));
        // rank over F_5 can only drop; for these entries the minors are
        // too small to vanish mod 5 without vanishing over Q
        prop_assert!(b.rank() <= a.rank());
    }

    #[test]
    fn shift_round_trip(x in random_complex(), k in -3i32..4) {
        prop_assert_eq!(x.shift(k).shift(-k), x.clone());
        for i in -5..5 {
            prop_assert_eq!(x.shift(k).h_dim(i), x.h_dim(i + k));
        }
    }

    #[test]
    fn smart_truncations_window(x in random_complex(), n in -2i32..2) {
        let le = x.truncate_le(n);
        let gt = x.truncate_gt(n);
        for i in -6..6 {
            if i <= n {
                prop_assert_eq!(le.h_dim(i), x.h_dim(i));
                prop_assert_eq!(gt.h_dim(i), 0);
            } else {
                prop_assert_eq!(le.h_dim(i), 0);
                prop_assert_eq!(gt.h_dim(i), x.h_dim(i));
            }
        }
    }

    #[test]
    fn cone_long_exact_sequence(
        x in random_complex(),
        y in random_complex(),
        coefs in proptest::collection::vec(-2i64..3, 8),
    ) {
        let f = closed_map(&x, &y, &coefs);
        prop_assert!(f.is_closed());
        let cone = f.cone().unwrap();
        for i in -5..5 {
            let hf = f.h_map(i);
            let hf_next = f.h_map(i + 1);
            let coker = hf.rows() - hf.rank();
            let ker_next = hf_next.cols() - hf_next.rank();
            prop_assert_eq!(cone.h_dim(i), coker + ker_next);
        }
        // quasi-isomorphisms are exactly the maps with acyclic cone
        prop_assert_eq!(f.is_quasi_iso(), cone.is_acyclic());
    }

    #[test]
    fn cone_of_identity_is_acyclic(x in random_complex()) {
        prop_assert!(ChainMap::identity(&x).cone().unwrap().is_acyclic());
    }
}

#[test]
fn invalid_differential_rejected() {
    let bad: Result<Complex<Rationals>, _> = Complex::new(
        q(),
        [(0, 1), (1, 1), (2, 1)].into_iter().collect(),
        [
            (0, Matrix::identity(q(), 1)),
            (1, Matrix::identity(q(), 1)),
        ]
        .into_iter()
        .collect(),
    );
    assert!(bad.is_err(), "d^2 != 0 must be a construction error");
}

#[test]
fn mesh_oracle_graded_dims_22() {
    // the graded hom dims of the (2,2) orbit category against the mesh
    // category of its AR quiver, computed by path elimination
    use demcat::cluster::{ClusterCategory, ObjName};
    use demcat::quiver::{ArrowSpec, PathTerm, PresentationSpec, QuiverPresentation};
    let cat = ClusterCategory::build(q(), 2, 2).unwrap();
    // vertices v(j,k); arrows a(j): v(j,1) -> v(j,2), b(j): v(j,2) -> v(j+1,1)
    // mesh relations: b(j-1) then a(j) composes to zero (single middle), and
    // a(j) then b(j) composes to zero
    let vname = |j: usize, k: usize| format!("v{j}_{k}");
    let mut spec = PresentationSpec {
        vertices: vec![],
        arrows: vec![],
        relations: vec![],
        differential: BTreeMap::new(),
    };
    for j in 0..4 {
        spec.vertices.push(vname(j, 1));
        spec.vertices.push(vname(j, 2));
    }
    for j in 0..4usize {
        spec.arrows.push(ArrowSpec {
            name: format!("a{j}"),
            from: vname(j, 1),
            to: vname(j, 2),
            degree: 0,
        });
        spec.arrows.push(ArrowSpec {
            name: format!("b{j}"),
            from: vname(j, 2),
            to: vname((j + 1) % 4, 1),
        degree: 0,
        });
    }
    for j in 0..4usize {
        // mesh ending at v(j+1, 1): tau v = v(j,1): path a(j) then b(j)
        spec.relations.push(vec![PathTerm { coef: "1".into(), path: vec![format!("a{j}"), format!("b{j}")] }]);
        // mesh ending at v(j+1, 2): tau v = v(j,2): path b(j) then a(j+1)
        spec.relations.push(vec![PathTerm {
            coef: "1".into(),
            path: vec![format!("b{j}"), format!("a{}", (j + 1) % 4)],
        }]);
    }
    let mesh = QuiverPresentation::from_spec(q(), &spec).unwrap().enumerate_basis(6).unwrap();
    let vid = |n: ObjName| -> usize { (n.j * 2) + (n.k - 1) };
    let mesh_dim = |x: ObjName, y: ObjName| -> usize {
        mesh.cell_dims()
            .get(&(vid(x), vid(y), 0))
            .copied()
            .unwrap_or(0)
    };
    for x in cat.objects() {
        for y in cat.objects() {
            for t in -4..=0 {
                let shifted = cat.shift_object_by(y, t);
                let expected = mesh_dim(cat.name(x), cat.name(shifted));
                let got = cat.hom_dim(x, y, t).unwrap();
                assert_eq!(
                    got,
                    expected,
                    "mesh oracle at ({}, {}) degree {t}",
                    cat.name(x),
                    cat.name(y)
                );
            }
        }
    }
}
