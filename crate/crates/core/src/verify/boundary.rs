//! Boundary behaviour of 1-forms with absolute conditions: the conormal
//! derivative identity `⟨∇_η ξ, ξ⟩ = h(N,N)|ξ|²`, and the stability form of
//! a harmonic field, `Σₐ Q(ξᵃ) = 2∫_∂ h(N,N)|ξ|²`.

use super::{relative_residuals, CheckId, CheckReport, Discretization};
use crate::error::VerifyError;
use crate::geometry::{boundary_conormals, BodyModel};
use crate::hodge::{FieldRecovery, RecoveredField};
use crate::jacobi::JacobiProblem;
use crate::mesh::Point3;

/// Vertex values and derivatives of the fields dual to `forms`.
pub fn vertex_recovery(d: &Discretization, forms: &[Vec<f64>]) -> Result<Vec<Vec<RecoveredField>>, VerifyError> {
    let rec = FieldRecovery::new(&d.mesh, &d.conn, &d.shape.frames, 1)?;
    Ok(forms.iter().map(|w| rec.fit(w)).collect())
}

fn conormals(d: &Discretization) -> Vec<Point3> {
    match &d.analytic {
        Some(s) => d
            .mesh
            .vertices()
            .iter()
            .map(|p| {
                let (a, b) = s.chart_coords(p);
                let (lo, hi) = s.chart_bounds();
                s.conormal(a.clamp(lo, hi), b).unwrap_or_else(|_| Point3::zeros())
            })
            .collect(),
        None => boundary_conormals(&d.mesh, &d.conn),
    }
}

/// BC on the given absolute eigenforms (full edge cochains), at boundary
/// vertices only. The discrete forms are tangent to the boundary only
/// weakly, so both sides use the boundary-tangent part `⟨ξ,T⟩T`, for which
/// `⟨∇_η ξ, ξ⟩ = ⟨∇_η ξ, T⟩⟨ξ, T⟩`.
pub fn check_bc(d: &Discretization, forms: &[Vec<f64>], body: &BodyModel, tolerance: f64) -> Result<CheckReport, VerifyError> {
    let fields = vertex_recovery(d, forms)?;
    let eta = conormals(d);
    let boundary: Vec<usize> = (0..d.mesh.vertex_count()).filter(|&v| d.conn.is_boundary_vertex[v]).collect();
    let tangent: Vec<Point3> = (0..d.mesh.vertex_count()).map(|v| d.shape.normals[v].cross(&eta[v])).collect();
    let (mut diff, mut scale, mut weight, mut keep) = (vec![], vec![], vec![], vec![]);
    let mut tangency = 0.0f64;
    for field in &fields {
        // Forms are put on a common scale by their largest |ξ|² anywhere; a
        // form whose boundary trace vanishes then contributes only noise
        // at the size of that noise.
        let top = field.iter().map(|f| f.value.norm_squared()).fold(0.0, f64::max);
        if top == 0.0 {
            continue;
        }
        for &v in &boundary {
            let f = &field[v];
            let xt = f.value.dot(&tangent[v]);
            tangency = tangency.max(f.value.dot(&eta[v]).abs() / top.sqrt());
            let lhs = f.derivative(&eta[v]).dot(&tangent[v]) * xt / top;
            let rhs = body.h(&d.mesh.position(v), &d.shape.normals[v]) * xt * xt / top;
            diff.push(lhs - rhs);
            scale.push(lhs.abs().max(rhs.abs()));
            weight.push(1.0);
            keep.push(true);
        }
    }
    let (rmax, rl2) = relative_residuals(&diff, &scale, &weight, &keep);
    let mut r = CheckReport::on(CheckId::Bc, d, rmax, rl2, tolerance);
    r.details = serde_json::json!({ "forms": forms.len(), "max_normal_component": tangency });
    Ok(r)
}

/// ROS on each harmonic absolute form: `Σₐ Q(ξᵃ)` against
/// `2∫_∂ h(N,N)|ξ|²`, both from the recovered vertex field. Passing also
/// needs every `Σₐ Q(ξᵃ)` to be negative.
pub fn check_ros(
    d: &Discretization,
    jacobi: &JacobiProblem,
    harmonic: &[Vec<f64>],
    tolerance: f64,
) -> Result<CheckReport, VerifyError> {
    let fields = vertex_recovery(d, harmonic)?;
    let n = d.mesh.vertex_count();
    let mut worst = 0.0f64;
    let mut sum2 = 0.0;
    let mut negative = true;
    let mut rows = Vec::new();
    for field in &fields {
        let mut q = 0.0;
        for c in 0..3 {
            let comp: Vec<f64> = field.iter().map(|f| f.value[c]).collect();
            q += jacobi.quadratic_form(&comp);
        }
        let boundary: f64 = (0..n)
            .map(|v| jacobi.h_nn[v] * jacobi.scalar.boundary_length[v] * field[v].value.norm_squared())
            .sum::<f64>()
            * 2.0;
        let rel = (q - boundary).abs() / boundary.abs();
        worst = worst.max(rel);
        sum2 += rel * rel;
        negative &= q < 0.0;
        rows.push(serde_json::json!({ "q_sum": q, "boundary_term": boundary, "relative": rel }));
    }
    let l2 = if fields.is_empty() { 0.0 } else { (sum2 / fields.len() as f64).sqrt() };
    let mut r = CheckReport::on(CheckId::Ros, d, worst, l2, tolerance);
    r.pass &= negative;
    r.details = serde_json::json!({ "harmonic_forms": rows, "all_negative": negative });
    Ok(r)
}
