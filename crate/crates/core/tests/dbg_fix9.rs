use num_complex::Complex64;
use qfbend_core::bending::*;
use qfbend_core::groups::*;
use qfbend_core::lamination::Leaf;
use qfbend_core::moebius;
fn z(re: f64, im: f64) -> Complex64 { Complex64::new(re, im) }

#[test]
fn probe_homomorphism_at_t() {
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
    for t in [0.0, 0.01] {
        let probe = if t != 0.0 { bent.with_extra_stage(&dir_plus, z(0.0, -t)) } else { bent.clone() };
        let m1 = probe.evaluate_matrix(&rep.evaluate_word(&w1)).unwrap();
        let m2 = probe.evaluate_matrix(&rep.evaluate_word(&w2)).unwrap();
        let m12 = probe.evaluate_matrix(&rep.evaluate_word(&w12)).unwrap();
        let d = m12.projective_distance(&m1.compose(&m2));
        println!("t={t}: homomorphism defect {d:.3e}  |m12| {:.3e}", m12.sup_norm());
    }
}
