use num_complex::Complex64;
use qfbend_core::bending::*;
use qfbend_core::groups::*;
use qfbend_core::lamination::Leaf;
use qfbend_core::margulis::CMatrix;
use qfbend_core::moebius;
fn z(re: f64, im: f64) -> Complex64 { Complex64::new(re, im) }

#[test]
fn identity_with_fd() {
    let rep = genus2_fuchsian().unwrap();
    let axis_of = |t: &str| moebius::axis(&rep.evaluate_word(&rep.word(t))).unwrap();
    let plus = vec![
        Leaf::new(axis_of("a"), z(1.0, 0.0)).unwrap(),
        Leaf::new(axis_of("c"), z(0.8, 0.0)).unwrap(),
        Leaf::new(axis_of("abAB"), z(0.6, 0.0)).unwrap(),
    ];
    let base = BentRepresentation::unbent(rep.clone(), SearchParams::default());
    let bent1 = base.bend(LeafSystem::Orbit(plus.clone()), z(0.0, -0.25)).unwrap();
    let bent = bent1.bend(LeafSystem::Orbit(vec![Leaf::new(axis_of("bd"), z(0.9, 0.0)).unwrap()]), z(0.0, 0.22)).unwrap();
    let dir_plus = bent.direction(LeafSystem::Orbit(plus.clone())).unwrap();

    let w1 = rep.word("cdda");
    let w2 = rep.word("aDb");
    let w12 = w1.concat(&w2);
    let u = |w: &Word| -> CMatrix {
        let v = bent.bending_cocycle_value(&dir_plus, z(0.0, -1.0), w).unwrap();
        CMatrix { d: 2, data: v.to_vec() }
    };
    // two candidate conjugators: homomorphic eval vs direct eval of w1
    let g_h = CMatrix::from_moebius(&bent.evaluate_word(&w1));
    let g_d = CMatrix::from_moebius(&bent.evaluate_matrix(&rep.evaluate_word(&w1)).unwrap());
    println!("conjugator difference {:.3e}", g_h.sub(&g_d).frobenius_norm());
    for (name, g1) in [("homomorphic", &g_h), ("direct", &g_d)] {
        let g1i = g1.inverse().unwrap();
        let rhs = u(&w1).add(&g1.mul(&u(&w2)).mul(&g1i));
        let lhs = u(&w12);
        println!("{name}: |Ad term| {:.4e} defect {:.4e} rel {:.3e}",
            g1.mul(&u(&w2)).mul(&g1i).frobenius_norm(),
            lhs.sub(&rhs).frobenius_norm(),
            lhs.sub(&rhs).frobenius_norm() / lhs.frobenius_norm());
    }
    // does the *base* word even reduce: w1*w2 = cdda*aDb = cdd(aa)Db
    println!("w12 = {w12}");
}
