//! Browser bindings for the demo page in `www/`.
//!
//! The exported functions are thin wrappers; the work happens in the plain Rust
//! functions below so that it can be tested natively.

use mapcone::hakye::HaKyeParams;
use mapcone::linalg::{c, min_eigenvalue, ComplexMatrix9, ComplexVector3};
use mapcone::localequiv::{decide_local_equivalence, DecisionOptions};
use mapcone::positivity::{product_min, MinimizerOptions};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// `F_t` on an `n × n` grid over the simplex of squared moduli: entry `(i, j)` is
/// `F_t(l)` with `l = (i, j, n−1−i−j)/(n−1)`, and NaN outside the simplex.
pub fn landscape_values(t: f64, n: usize) -> Result<Vec<f64>, String> {
    let k = HaKyeParams::new(t).map_err(|e| e.to_string())?.constants();
    if n < 2 {
        return Err("grid needs at least 2 points per side".into());
    }
    let step = 1.0 / (n - 1) as f64;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(if i + j < n {
                k.poly([
                    i as f64 * step,
                    j as f64 * step,
                    (n - 1 - i - j) as f64 * step,
                ])
            } else {
                f64::NAN
            });
        }
    }
    Ok(out)
}

/// Squared moduli of the four zero families, as JSON.
pub fn family_points_json(t: f64) -> Result<String, String> {
    let p = HaKyeParams::new(t).map_err(|e| e.to_string())?;
    let points: Vec<_> = p
        .families()
        .iter()
        .map(|f| json!({"family": f.id().to_string(), "l": f.squared_moduli()}))
        .collect();
    Ok(json!({"t": t, "families": points}).to_string())
}

fn vector(v: &ComplexVector3) -> serde_json::Value {
    json!({"re": v.iter().map(|z| z.re).collect::<Vec<_>>(), "im": v.iter().map(|z| z.im).collect::<Vec<_>>()})
}

/// Product minimum of `C_t − shift·I`; the shifted matrix stays block positive
/// exactly while `shift` does not exceed the product minimum of `C_t`.
pub fn block_positivity_json(
    t: f64,
    shift: f64,
    restarts: usize,
    seed: u64,
) -> Result<String, String> {
    if !shift.is_finite() {
        return Err("shift must be finite".into());
    }
    let choi = HaKyeParams::new(t).map_err(|e| e.to_string())?.choi()
        - ComplexMatrix9::identity() * c(shift, 0.0);
    let opts = MinimizerOptions {
        restarts: restarts.max(1),
        seed,
        ..Default::default()
    };
    let v = product_min(&choi, &opts).map_err(|e| e.to_string())?;
    let min_eig = min_eigenvalue(&choi).map_err(|e| e.to_string())?;
    Ok(json!({
        "t": t,
        "shift": shift,
        "min_value": v.min_value,
        "converged": v.converged,
        "block_positive": v.min_value >= -mapcone::positivity::BLOCK_POSITIVITY_TOL,
        "min_eigenvalue": min_eig,
        "argmin_x": vector(&v.argmin.x),
        "argmin_y": vector(&v.argmin.y),
    })
    .to_string())
}

pub fn local_equivalence_json(t1: f64, t2: f64) -> Result<String, String> {
    let v =
        decide_local_equivalence(t1, t2, &DecisionOptions::default()).map_err(|e| e.to_string())?;
    Ok(json!({
        "t1": t1,
        "t2": t2,
        "equivalent": v.equivalent,
        "residual": v.residual,
        "certificate": v.certificate,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn landscape(t: f64, n: usize) -> Result<Vec<f64>, JsError> {
    landscape_values(t, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn family_points(t: f64) -> Result<String, JsError> {
    family_points_json(t).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn block_positivity(t: f64, shift: f64, restarts: usize, seed: u32) -> Result<String, JsError> {
    block_positivity_json(t, shift, restarts, u64::from(seed)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn local_equivalence(t1: f64, t2: f64) -> Result<String, JsError> {
    local_equivalence_json(t1, t2).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn landscape_vanishes_at_the_families() {
        let n = 61;
        let t = 0.0;
        let grid = landscape_values(t, n).unwrap();
        assert_eq!(grid.len(), n * n);
        assert!(grid[(n - 1) * n + 1].is_nan());
        // at t = 0 the families sit at the simplex vertices and the centre
        assert!(grid[0].abs() < 1e-12);
        assert!(grid[(n - 1) * n].abs() < 1e-12);
        assert!(grid.iter().filter(|v| !v.is_nan()).all(|&v| v > -1e-12));
        assert!(landscape_values(1.5, 10).is_err());
        assert!(landscape_values(0.5, 1).is_err());
    }

    #[test]
    fn family_points_are_on_the_simplex() {
        let v: Value = serde_json::from_str(&family_points_json(0.4).unwrap()).unwrap();
        for f in v["families"].as_array().unwrap() {
            let s: f64 = f["l"]
                .as_array()
                .unwrap()
                .iter()
                .map(|x| x.as_f64().unwrap())
                .sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn shifting_past_zero_breaks_block_positivity() {
        let ok: Value =
            serde_json::from_str(&block_positivity_json(0.3, 0.0, 8, 1).unwrap()).unwrap();
        assert_eq!(ok["block_positive"], true);
        assert!(ok["min_eigenvalue"].as_f64().unwrap() < 0.0);
        let bad: Value =
            serde_json::from_str(&block_positivity_json(0.3, 0.05, 8, 1).unwrap()).unwrap();
        assert_eq!(bad["block_positive"], false);
    }

    #[test]
    fn certificate_is_exported() {
        let v: Value = serde_json::from_str(&local_equivalence_json(0.2, 0.6).unwrap()).unwrap();
        assert_eq!(v["equivalent"], false);
        assert_eq!(v["certificate"].as_array().unwrap().len(), 8);
        assert!(local_equivalence_json(0.2, 1.0).is_err());
    }
}
