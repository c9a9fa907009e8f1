//! Membership of a natural structure in the hypo, nearly-hypo, double-hypo,
//! contact-hypo and Sasaki-Einstein classes.
//!
//! All class equations are written with the unit contact form θ̃ = -2pθ.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::frames::{d_invariant, InvariantForm};
use crate::scalar::{Scalar, DEFAULT_TOL};
use crate::su2core::{check_su2_tol, metric_closed_form_tol, NaturalStructure};

pub const EQ_D_OMEGA1: &str = "dω1=0";
pub const EQ_D_THETA_OMEGA1: &str = "d(θ̃∧ω1)=-2ω1∧ω1";
pub const EQ_D_THETA_OMEGA2: &str = "d(θ̃∧ω2)=0";
pub const EQ_D_THETA_OMEGA3: &str = "d(θ̃∧ω3)=0";
pub const EQ_D_OMEGA2: &str = "dω2=3θ̃∧ω3";
pub const EQ_D_OMEGA3: &str = "dω3=-3θ̃∧ω2";
pub const EQ_CONTACT: &str = "dθ̃=-2ω1";

/// The contact form convention reported alongside every classification.
pub const CONTACT_FORM: &str = "θ̃=-2pθ";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquationResidual {
    pub label: String,
    pub residual: Scalar,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationFlags {
    pub su2_valid: bool,
    pub hypo: bool,
    pub contact_hypo: bool,
    pub nearly_hypo: bool,
    pub double_hypo: bool,
    pub sasaki_einstein: bool,
    pub omega3_dual: bool,
    pub g_natural: bool,
    /// Largest coefficient residual of the equations defining each class.
    pub residuals: BTreeMap<String, Scalar>,
    pub equations: Vec<EquationResidual>,
    pub contact_form: String,
}

fn max(values: &[&Scalar]) -> Scalar {
    values.iter().fold(Scalar::zero(), |m, &c| if *c > m { c.clone() } else { m })
}

pub fn classify(ns: &NaturalStructure) -> ClassificationFlags {
    classify_tol(ns, DEFAULT_TOL)
}

/// Flags are `su2_valid ∧ (class equations)`; residuals are reported for
/// every class regardless of validity.
pub fn classify_tol(ns: &NaturalStructure, tol: f64) -> ClassificationFlags {
    let g = &ns.geom;
    let d = |f: &InvariantForm| d_invariant(f, g);
    let w = [ns.omega(1), ns.omega(2), ns.omega(3)];
    let th = ns.theta_tilde();
    let wedge = |a: &InvariantForm, b: &InvariantForm| a.wedge(b).expect("same dim");
    let res = |lhs: InvariantForm, rhs: InvariantForm| lhs.max_abs_diff(&rhs).expect("same shape");
    let zero3 = InvariantForm::zero(5, 3);
    let three = Scalar::int(3);

    let r_dw1 = res(d(&w[0]), zero3.clone());
    let r_dtw1 = res(d(&wedge(&th, &w[0])), wedge(&w[0], &w[0]).scale(&Scalar::int(-2)));
    let r_dtw2 = res(d(&wedge(&th, &w[1])), InvariantForm::zero(5, 4));
    let r_dtw3 = res(d(&wedge(&th, &w[2])), InvariantForm::zero(5, 4));
    let r_dw2 = res(d(&w[1]), wedge(&th, &w[2]).scale(&three));
    let r_dw3 = res(d(&w[2]), wedge(&th, &w[1]).scale(&-three));
    let r_contact = res(d(&th), w[0].scale(&Scalar::int(-2)));

    let equations: Vec<EquationResidual> = [
        (EQ_D_OMEGA1, &r_dw1),
        (EQ_D_THETA_OMEGA1, &r_dtw1),
        (EQ_D_THETA_OMEGA2, &r_dtw2),
        (EQ_D_THETA_OMEGA3, &r_dtw3),
        (EQ_D_OMEGA2, &r_dw2),
        (EQ_D_OMEGA3, &r_dw3),
        (EQ_CONTACT, &r_contact),
    ]
    .into_iter()
    .map(|(label, r)| EquationResidual { label: label.to_string(), residual: r.clone(), holds: r.is_zero_tol(tol) })
    .collect();

    let mut residuals = BTreeMap::new();
    residuals.insert("hypo".to_string(), max(&[&r_dw1, &r_dtw2, &r_dtw3]));
    residuals.insert("nearly_hypo".to_string(), max(&[&r_dw2, &r_dtw1]));
    residuals.insert("double_hypo".to_string(), max(&[&r_dw1, &r_dtw2, &r_dtw3, &r_dw2, &r_dtw1]));
    residuals.insert("contact_hypo".to_string(), max(&[&r_contact, &r_dtw2, &r_dtw3]));
    residuals.insert("sasaki_einstein".to_string(), max(&[&r_contact, &r_dw2, &r_dw3]));
    residuals.insert("omega3_dual".to_string(), r_dw3.clone());

    let check = check_su2_tol(ns, tol);
    let metric = metric_closed_form_tol(ns, tol);
    let valid = check.valid;
    let holds = |key: &str| valid && residuals[key].is_zero_tol(tol);
    let hypo = holds("hypo");
    let nearly_hypo = holds("nearly_hypo");
    ClassificationFlags {
        su2_valid: valid,
        hypo,
        nearly_hypo,
        double_hypo: hypo && nearly_hypo,
        contact_hypo: holds("contact_hypo"),
        sasaki_einstein: holds("sasaki_einstein"),
        omega3_dual: holds("omega3_dual"),
        g_natural: metric.g_natural,
        residuals,
        equations,
        contact_form: CONTACT_FORM.to_string(),
    }
}

/// Structural observations on the coefficient pattern: closedness of ω1,
/// the b3/c3 conditions for closed θ̃∧ω2 and θ̃∧ω3, and type I / II shape.
pub fn curvature_guards(ns: &NaturalStructure) -> Vec<String> {
    curvature_guards_tol(ns, DEFAULT_TOL)
}

pub fn curvature_guards_tol(ns: &NaturalStructure, tol: f64) -> Vec<String> {
    let z = |x: &Scalar| x.is_zero_tol(tol);
    let a = &ns.a;
    let g = &ns.geom;
    let mut notes = Vec::new();
    if !z(&a[1]) {
        notes.push("dω1 != 0 for all K (a1 != 0)".to_string());
    } else if z(&a[0]) && z(&a[2]) && !z(&a[3]) {
        notes.push("type I shape: ω1 = a3 dθ".to_string());
    } else if !z(&a[2]) {
        let k_pred = &a[0] / (&a[2] * g.s_squared());
        if k_pred.approx_eq(g.k(), tol) {
            notes.push("type II shape, K = a0/(a2 s^2) consistent".to_string());
        } else {
            notes.push(format!("type II shape, K = a0/(a2 s^2) violated: K = {}, a0/(a2 s^2) = {}", g.k(), k_pred));
        }
    } else if !z(&a[0]) {
        notes.push("dω1 != 0: a0 != 0 requires a2 != 0 (a0 = K a2 s^2)".to_string());
    }
    if !z(&(&a[0] - g.k() * &a[2] * g.s_squared())) || !z(&a[1]) {
        notes.push("dω1 = 0 needs a1 = 0 and a0 = K a2 s^2".to_string());
    }
    for (name, q) in [("b3", &ns.b), ("c3", &ns.c)] {
        if !z(&q[3]) {
            notes.push(format!("{name} != 0: θ̃∧ω{} is not closed", if name == "b3" { 2 } else { 3 }));
        }
    }
    if z(&ns.b[3]) && z(&ns.c[3]) {
        notes.push("b3 = c3 = 0: θ̃∧ω2 and θ̃∧ω3 closed".to_string());
    }
    notes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::GeometryParams;

    fn geom(k: i64, s2: (i64, i64)) -> GeometryParams {
        GeometryParams::from_s_squared(Scalar::int(k), Scalar::ratio(s2.0, s2.1)).unwrap()
    }

    #[test]
    fn main_example_sasaki_einstein() {
        let f = classify(&NaturalStructure::main_example(geom(3, (1, 3))));
        assert!(f.sasaki_einstein && f.double_hypo && f.contact_hypo && f.hypo && f.nearly_hypo);
        assert!(f.omega3_dual && f.g_natural);
        assert!(f.residuals.values().all(|r| r.is_zero_tol(0.0)));
    }

    #[test]
    fn main_example_flat() {
        let f = classify(&NaturalStructure::main_example(geom(0, (1, 6))));
        assert!(f.hypo && f.contact_hypo && f.nearly_hypo && f.double_hypo);
        assert!(!f.sasaki_einstein);
    }

    #[test]
    fn invalid_structure_has_no_classes() {
        let mut ns = NaturalStructure::main_example(geom(3, (1, 3)));
        ns.c = ns.b.clone();
        let f = classify(&ns);
        assert!(!f.su2_valid && !f.hypo && !f.contact_hypo && !f.sasaki_einstein);
    }

    #[test]
    fn guards() {
        let main = NaturalStructure::main_example(geom(3, (1, 3)));
        assert!(curvature_guards(&main).iter().any(|n| n == "type I shape: ω1 = a3 dθ"));

        let mut ns = main.clone();
        ns.a = [2, 0, 1, 2].map(Scalar::int);
        ns.geom = GeometryParams::from_s_squared(Scalar::int(6), Scalar::ratio(1, 3)).unwrap();
        assert!(curvature_guards(&ns).iter().any(|n| n == "type II shape, K = a0/(a2 s^2) consistent"));

        ns.a = [1, 1, 1, 1].map(Scalar::int);
        assert!(curvature_guards(&ns).iter().any(|n| n == "dω1 != 0 for all K (a1 != 0)"));
    }
}
