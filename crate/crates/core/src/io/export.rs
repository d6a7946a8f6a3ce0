//! Closed-form expression export for Gaussian kernel models.
//!
//! A trained Gaussian model is a small sum of exponentials, compact enough
//! to print and evaluate by hand. The export writes the discriminant in
//! **raw** feature coordinates: the model's standardization is a per-column
//! affine map, so it folds exactly into each squared term —
//!
//! ```text
//! gamma·(z_d − sv_d)²  =  (gamma/σ_d²)·(x_d − (μ_d + σ_d·sv_d))²
//! ```
//!
//! One support vector per line:
//!
//! ```text
//! f(x1, x2) = sign{
//!     12.3456 * exp[-(0.5000*(x1 - 1.0000)^2 + 0.5000*x2^2)]
//!     - 7.0000 * exp[-(...)]
//!     + 0.2500
//! }
//! ```
//!
//! Numbers print with 4 decimals, falling back to scientific notation when
//! that would lose them (tiny or huge magnitudes). A zero center drops the
//! subtraction (`xk^2`); a negative center prints as an addition.

use crate::error::Error;
use crate::kernels::KernelSpec;
use crate::mcm::KernelModel;
use crate::Result;

/// Format a magnitude: plain 4 decimals in a comfortable range, scientific
/// with 4 significant decimals outside it.
fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 {
        "0.0000".to_string()
    } else if (1e-3..1e7).contains(&a) {
        format!("{v:.4}")
    } else {
        format!("{v:.4e}")
    }
}

/// One squared term `a*(xk - c)^2` in raw coordinates.
fn fmt_square(a: f64, center: f64, var: usize) -> String {
    let coeff = fmt_num(a);
    if center == 0.0 {
        format!("{coeff}*x{var}^2")
    } else if center < 0.0 {
        format!("{coeff}*(x{var} + {})^2", fmt_num(-center))
    } else {
        format!("{coeff}*(x{var} - {})^2", fmt_num(center))
    }
}

/// Render a Gaussian kernel model as a plain-text closed-form expression.
///
/// Only the Gaussian kernel is supported: the linear machine's closed form
/// is just its hyperplane, and a linear-kernel expansion is better read
/// through its collapsed `w`.
pub fn export_closed_form(model: &KernelModel) -> Result<String> {
    let KernelSpec::Gaussian { gamma } = model.kernel else {
        return Err(Error::config(
            "closed-form export is unsupported for non-Gaussian kernels",
        ));
    };
    let n = model.standardization.num_features();
    let header: Vec<String> = (1..=n).map(|d| format!("x{d}")).collect();
    let mut out = format!("f({}) = sign{{", header.join(", "));

    let mut first = true;
    let mut push_term = |body: String, value: f64, out: &mut String| {
        let magnitude = fmt_num(value.abs());
        if first {
            let sign = if value < 0.0 { "-" } else { "" };
            out.push_str(&format!("\n    {sign}{magnitude}{body}"));
            first = false;
        } else {
            let sign = if value < 0.0 { "-" } else { "+" };
            out.push_str(&format!("\n    {sign} {magnitude}{body}"));
        }
    };

    for (&j, sv) in model.support_indices.iter().zip(&model.support_samples) {
        let lambda = model.lambdas[j];
        let squares: Vec<String> = (0..n)
            .map(|d| {
                let sigma = model.standardization.scales[d];
                let mu = model.standardization.means[d];
                // Exact per-dimension folding of z = (x − μ)/σ.
                let a = gamma / (sigma * sigma);
                let center = mu + sigma * sv[d];
                fmt_square(a, center, d + 1)
            })
            .collect();
        push_term(
            format!(" * exp[-({})]", squares.join(" + ")),
            lambda,
            &mut out,
        );
    }
    push_term(String::new(), model.b, &mut out);
    out.push_str("\n}\n");
    Ok(out)
}
