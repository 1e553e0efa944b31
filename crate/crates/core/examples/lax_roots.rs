//! Lax roots across the phase diagram: closed forms, numerical roots and the
//! analytic phase boundaries.
//!
//! Run with: cargo run --release --example lax_roots

use bcs_quench::lax::{
    boundary_curves, classify_phase_analytic, closed_form_roots, find_roots_numeric, lax_residual, LaxParams, PhaseMode,
};

fn main() -> bcs_quench::Result<()> {
    let points = [(0.2, 0.0), (0.5, 0.0), (1.0, 0.5), (1.5, 1.2), (1.5, 2.5), (0.5, 2.0), (2.5, 4.0)];
    println!("chiN/E_W  dS/E_W  homog.  inhomog.  roots (units of E_W)");
    for (c, d) in points {
        let p = LaxParams::from_ratios(c, d)?;
        let closed = closed_form_roots(&p);
        let numeric = find_roots_numeric(&p)?;
        let worst = closed.roots.iter().map(|u| lax_residual(*u, &p).map(|r| r.norm())).try_fold(0.0_f64, |m, r| r.map(|r| m.max(r)))?;
        let roots: Vec<String> = numeric.upper().map(|u| format!("{:+.4}{:+.4}i", u.re, u.im)).collect();
        println!(
            "{c:8.2} {d:7.2}  {:6} {:9} {}  (closed-form residual {worst:.1e})",
            classify_phase_analytic(&p, PhaseMode::Homogeneous).to_string(),
            classify_phase_analytic(&p, PhaseMode::Inhomogeneous).to_string(),
            roots.join(" ")
        );
    }
    println!();
    for curve in boundary_curves((0.05, 3.0), (0.0, 3.0), 6)? {
        let pts: Vec<String> = curve.points.iter().map(|(x, y)| format!("({x:.2}, {y:.2})")).collect();
        println!("{:?}: {}", curve.boundary, pts.join(" "));
    }
    Ok(())
}
