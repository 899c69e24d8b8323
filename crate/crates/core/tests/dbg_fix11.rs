use num_complex::Complex64;
use qfbend_core::bending::*;
use qfbend_core::groups::*;
use qfbend_core::lamination::Leaf;
use qfbend_core::moebius;
fn z(re: f64, im: f64) -> Complex64 { Complex64::new(re, im) }

#[test]
fn stagewise_bisect() {
    let rep = genus2_fuchsian().unwrap();
    let axis_of = |t: &str| moebius::axis(&rep.evaluate_word(&rep.word(t))).unwrap();
    let plus = vec![
        Leaf::new(axis_of("a"), z(1.0, 0.0)).unwrap(),
        Leaf::new(axis_of("c"), z(0.8, 0.0)).unwrap(),
        Leaf::new(axis_of("abAB"), z(0.6, 0.0)).unwrap(),
    ];
    let w1 = rep.word("cdda");
    let w2 = rep.word("aDb");
    let w12 = w1.concat(&w2);
    let base = BentRepresentation::unbent(rep.clone(), SearchParams::default());

    // single-stage with just one class at a time to isolate
    for (name, leaves) in [
        ("a only", vec![plus[0]]),
        ("c only", vec![plus[1]]),
        ("sep only", vec![plus[2]]),
        ("all three", plus.clone()),
    ] {
        let bent = base.bend(LeafSystem::Orbit(leaves), z(0.0, -0.25)).unwrap();
        let m1 = bent.evaluate_matrix(&rep.evaluate_word(&w1)).unwrap();
        let m2 = bent.evaluate_matrix(&rep.evaluate_word(&w2)).unwrap();
        let m12 = bent.evaluate_matrix(&rep.evaluate_word(&w12)).unwrap();
        let d = m12.projective_distance(&m1.compose(&m2));
        println!("{name}: defect {d:.3e}");
    }
}
