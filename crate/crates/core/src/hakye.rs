//! The Ha–Kye family `Φ_t`, `t ∈ [0, 1)`, of extreme positive maps on `M₃`.
//!
//! `Φ_t` keeps off-diagonal entries up to a sign and mixes the diagonal cyclically:
//!
//! ```text
//! Φ_t(X)_11 = a x11 + b x22 + c x33
//! Φ_t(X)_22 = c x11 + a x22 + b x33
//! Φ_t(X)_33 = b x11 + c x22 + a x33
//! Φ_t(X)_ij = -x_ij   (i ≠ j)
//! ```
//!
//! with `a = (1-t)²/(1-t+t²)`, `b = t²/(1-t+t²)`, `c = 1/(1-t+t²)`.
//!
//! The singular structure concerns the compression of `C_{Φ_t}` along the first tensor
//! factor, `M_t(y) = ⟨y ⊗ ·|C_{Φ_t}|y ⊗ ·⟩` ([`compress_left`]). Its diagonal is
//! `(a l₁ + b l₂ + c l₃, c l₁ + a l₂ + b l₃, b l₁ + c l₂ + a l₃)` with `l_k = |y^k|²` and
//! its off-diagonal entries are `-ȳ^i y^j`. `F_t(y) = det M_t(y)` depends on the moduli
//! only and vanishes exactly on four families of unit vectors.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::choi::{compress_left, LinearMapM3};
use crate::error::{Error, Result};
use crate::linalg::{c, pair, ComplexMatrix3, ComplexMatrix9, ComplexVector3, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HaKyeParams {
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

pub fn coefficients(t: f64) -> Result<HaKyeParams> {
    HaKyeParams::new(t)
}

impl HaKyeParams {
    pub fn new(t: f64) -> Result<Self> {
        if !(t.is_finite() && (0.0..1.0).contains(&t)) {
            return Err(Error::ParameterOutOfRange(t));
        }
        let d = 1.0 - t + t * t;
        Ok(Self {
            t,
            a: (1.0 - t) * (1.0 - t) / d,
            b: t * t / d,
            c: 1.0 / d,
        })
    }

    /// Diagonal weights: row `k` of `Φ_t(X)` is `Σ_i weights[k][i] x_ii`.
    fn diagonal_weights(&self) -> [[f64; 3]; 3] {
        let (a, b, c) = (self.a, self.b, self.c);
        [[a, b, c], [c, a, b], [b, c, a]]
    }

    pub fn apply(&self, x: &ComplexMatrix3) -> ComplexMatrix3 {
        let w = self.diagonal_weights();
        ComplexMatrix3::from_fn(|i, j| {
            if i == j {
                (0..3).map(|k| x[(k, k)] * w[i][k]).sum()
            } else {
                -x[(i, j)]
            }
        })
    }

    /// `C_{Φ_t}` written out entry by entry.
    pub fn choi(&self) -> ComplexMatrix9 {
        let (a, b, cc) = (self.a, self.b, self.c);
        let diag = [a, cc, b, b, a, cc, cc, b, a];
        let mut m = ComplexMatrix9::zeros();
        for (r, d) in diag.iter().enumerate() {
            m[(r, r)] = c(*d, 0.0);
        }
        for &r in &[0usize, 4, 8] {
            for &s in &[0usize, 4, 8] {
                if r != s {
                    m[(r, s)] = c(-1.0, 0.0);
                }
            }
        }
        m
    }

    pub fn map(&self) -> LinearMapM3 {
        LinearMapM3::from_choi(self.choi())
    }

    /// `M_t(y) = ⟨y ⊗ ·|C_{Φ_t}|y ⊗ ·⟩`.
    pub fn singular_compression(&self, y: &ComplexVector3) -> ComplexMatrix3 {
        compress_left(&self.choi(), y)
    }

    /// `F_t(y) = det M_t(y)`.
    pub fn f_det(&self, y: &ComplexVector3) -> f64 {
        self.singular_compression(y).determinant().re
    }

    pub fn constants(&self) -> FConstants {
        let (a, b, c) = (self.a, self.b, self.c);
        FConstants {
            cubic: a * b * c,
            cyclic: a * b * b + b * c * c + c * a * a - c,
            anticyclic: a * c * c + b * a * a + c * b * b - b,
            triple: a * a * a + b * b * b + c * c * c + 3.0 * a * b * c - 3.0 * a - 2.0,
        }
    }

    pub fn families(&self) -> [SingularFamily; 4] {
        FamilyId::ALL.map(|id| SingularFamily::new(self.t, id))
    }
}

pub fn apply_hakye(t: f64, x: &ComplexMatrix3) -> Result<ComplexMatrix3> {
    Ok(HaKyeParams::new(t)?.apply(x))
}

pub fn choi_hakye(t: f64) -> Result<ComplexMatrix9> {
    Ok(HaKyeParams::new(t)?.choi())
}

pub fn f_det(t: f64, y: &ComplexVector3) -> Result<f64> {
    Ok(HaKyeParams::new(t)?.f_det(y))
}

pub fn f_constants(t: f64) -> Result<FConstants> {
    Ok(HaKyeParams::new(t)?.constants())
}

pub fn f_poly(t: f64, l: [f64; 3]) -> Result<f64> {
    check_moduli(l)?;
    Ok(f_constants(t)?.poly(l))
}

pub fn f_gradient(t: f64, l: [f64; 3]) -> Result<[f64; 3]> {
    check_moduli(l)?;
    Ok(f_constants(t)?.gradient(l))
}

fn check_moduli(l: [f64; 3]) -> Result<()> {
    if l.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Domain(format!(
            "squared moduli must be non-negative, got {l:?}"
        )));
    }
    Ok(())
}

/// Coefficients of `F_t` as a cubic in the squared moduli `l = (l₁, l₂, l₃)`:
///
/// `F = A Σ l_k³ + B (l₂l₃² + l₃l₁² + l₁l₂²) + C (l₁l₃² + l₂l₁² + l₃l₂²) + D l₁l₂l₃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FConstants {
    /// `A_t = a b c`
    pub cubic: f64,
    /// `B_t = a b² + b c² + c a² − c`
    pub cyclic: f64,
    /// `C_t = a c² + b a² + c b² − b`
    pub anticyclic: f64,
    /// `D_t = a³ + b³ + c³ + 3abc − 3a − 2`
    pub triple: f64,
}

impl FConstants {
    pub fn poly(&self, l: [f64; 3]) -> f64 {
        let [l1, l2, l3] = l;
        self.cubic * (l1 * l1 * l1 + l2 * l2 * l2 + l3 * l3 * l3)
            + self.cyclic * (l2 * l3 * l3 + l3 * l1 * l1 + l1 * l2 * l2)
            + self.anticyclic * (l1 * l3 * l3 + l2 * l1 * l1 + l3 * l2 * l2)
            + self.triple * l1 * l2 * l3
    }

    pub fn gradient(&self, l: [f64; 3]) -> [f64; 3] {
        let (a, b, c, d) = (self.cubic, self.cyclic, self.anticyclic, self.triple);
        let [l1, l2, l3] = l;
        [
            3.0 * a * l1 * l1
                + b * (2.0 * l1 * l3 + l2 * l2)
                + c * (2.0 * l1 * l2 + l3 * l3)
                + d * l2 * l3,
            3.0 * a * l2 * l2
                + b * (2.0 * l2 * l1 + l3 * l3)
                + c * (2.0 * l2 * l3 + l1 * l1)
                + d * l3 * l1,
            3.0 * a * l3 * l3
                + b * (2.0 * l3 * l2 + l1 * l1)
                + c * (2.0 * l3 * l1 + l2 * l2)
                + d * l1 * l2,
        ]
    }

    /// `3A + B + C`, the coefficient of `Σ l_k²` in the summed gradient.
    pub fn square_coefficient(&self) -> f64 {
        3.0 * self.cubic + self.cyclic + self.anticyclic
    }

    /// `2B + 2C + D`, the coefficient of `l₁l₂ + l₂l₃ + l₃l₁` in the summed gradient.
    pub fn cross_coefficient(&self) -> f64 {
        2.0 * self.cyclic + 2.0 * self.anticyclic + self.triple
    }

    /// Sum of the three gradient components written as a quadratic form.
    pub fn gradient_sum(&self, l: [f64; 3]) -> f64 {
        let [l1, l2, l3] = l;
        self.square_coefficient() * (l1 * l1 + l2 * l2 + l3 * l3)
            + self.cross_coefficient() * (l1 * l2 + l2 * l3 + l3 * l1)
    }
}

/// `(1−t)² / (1−t+t²) = a_t`, the closed form of `3A_t + B_t + C_t`.
pub fn square_coefficient_closed_form(t: f64) -> f64 {
    (1.0 - t).powi(2) / (1.0 - t + t * t)
}

/// `(1−t)³ / (1−t+t²)²`. Often quoted for `3A_t + B_t + C_t`, but it only agrees at
/// `t = 0` (at `t = ½` it gives 2/9 against the true 1/3). Kept so the discrepancy
/// stays checkable.
pub fn square_coefficient_quoted_form(t: f64) -> f64 {
    let d = 1.0 - t + t * t;
    (1.0 - t).powi(3) / (d * d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FamilyId {
    EqualModuli,
    #[serde(rename = "ZERO_1")]
    Zero1,
    #[serde(rename = "ZERO_2")]
    Zero2,
    #[serde(rename = "ZERO_3")]
    Zero3,
}

impl FamilyId {
    pub const ALL: [FamilyId; 4] = [
        FamilyId::EqualModuli,
        FamilyId::Zero1,
        FamilyId::Zero2,
        FamilyId::Zero3,
    ];

    /// Coordinate that vanishes on the family, if any.
    pub fn zero_index(self) -> Option<usize> {
        match self {
            FamilyId::EqualModuli => None,
            FamilyId::Zero1 => Some(0),
            FamilyId::Zero2 => Some(1),
            FamilyId::Zero3 => Some(2),
        }
    }

    pub fn with_zero_at(k: usize) -> FamilyId {
        match k {
            0 => FamilyId::Zero1,
            1 => FamilyId::Zero2,
            2 => FamilyId::Zero3,
            _ => panic!("coordinate index {k} out of range"),
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FamilyId::EqualModuli => "EQUAL_MODULI",
            FamilyId::Zero1 => "ZERO_1",
            FamilyId::Zero2 => "ZERO_2",
            FamilyId::Zero3 => "ZERO_3",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for FamilyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "EQUAL_MODULI" | "EQUAL" => Ok(FamilyId::EqualModuli),
            "ZERO_1" => Ok(FamilyId::Zero1),
            "ZERO_2" => Ok(FamilyId::Zero2),
            "ZERO_3" => Ok(FamilyId::Zero3),
            _ => Err(Error::Domain(format!("unknown singular family '{s}'"))),
        }
    }
}

/// One of the four moduli patterns on which `F_t` vanishes, with the kernel of `M_t(y)`.
///
/// A family member is `y = (m₁e^{iφ₁}, m₂e^{iφ₂}, m₃e^{iφ₃})`; the kernel of `M_t(y)` is
/// spanned by `x = (n₁e^{-iφ₁}, n₂e^{-iφ₂}, n₃e^{-iφ₃})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularFamily {
    #[serde(skip)]
    t: f64,
    #[serde(rename = "family")]
    id: FamilyId,
    moduli: [f64; 3],
    kernel_moduli: [f64; 3],
}

impl SingularFamily {
    pub fn new(t: f64, id: FamilyId) -> Self {
        let u = (1.0 / (1.0 + t)).sqrt();
        let v = (t / (1.0 + t)).sqrt();
        let s = (1.0f64 / 3.0).sqrt();
        let (moduli, kernel_moduli) = match id {
            FamilyId::EqualModuli => ([s, s, s], [s, s, s]),
            FamilyId::Zero1 => ([0.0, v, u], [0.0, u, v]),
            FamilyId::Zero2 => ([u, 0.0, v], [v, 0.0, u]),
            FamilyId::Zero3 => ([v, u, 0.0], [u, v, 0.0]),
        };
        Self {
            t,
            id,
            moduli,
            kernel_moduli,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn id(&self) -> FamilyId {
        self.id
    }

    pub fn moduli(&self) -> [f64; 3] {
        self.moduli
    }

    pub fn kernel_moduli(&self) -> [f64; 3] {
        self.kernel_moduli
    }

    /// Squared moduli `l_k = m_k²`.
    pub fn squared_moduli(&self) -> [f64; 3] {
        self.moduli.map(|m| m * m)
    }

    pub fn y(&self, phases: [f64; 3]) -> ComplexVector3 {
        ComplexVector3::from_fn(|k, _| c(0.0, phases[k]).exp() * self.moduli[k])
    }

    /// The kernel vector: phases are negated relative to `y`.
    pub fn x(&self, phases: [f64; 3]) -> ComplexVector3 {
        ComplexVector3::from_fn(|k, _| c(0.0, -phases[k]).exp() * self.kernel_moduli[k])
    }
}

pub fn singular_y_families(t: f64) -> Result<[SingularFamily; 4]> {
    Ok(HaKyeParams::new(t)?.families())
}

/// Unit vector spanning the kernel of `M_t(y)` for `y = family.y(phases)`.
pub fn kernel_x(t: f64, family: &SingularFamily, phases: [f64; 3]) -> Result<ComplexVector3> {
    HaKyeParams::new(t)?;
    if family.t != t {
        return Err(Error::Domain(format!(
            "family {} was built for t = {} but queried at t = {t}",
            family.id, family.t
        )));
    }
    Ok(family.x(phases))
}

/// `C[(i,j),(k,l)] = C[(γi,γj),(γk,γl)]` for the three-cycle `γ: 0→1→2→0`.
pub fn has_cyclic_symmetry(choi: &ComplexMatrix9, tol: f64) -> bool {
    let g = |i: usize| (i + 1) % 3;
    for r in 0..9 {
        for s in 0..9 {
            let (i, j, k, l) = (r / 3, r % 3, s / 3, s % 3);
            let moved = choi[(pair(g(i), g(j)), pair(g(k), g(l)))];
            if (choi[(r, s)] - moved).norm() > tol {
                return false;
            }
        }
    }
    true
}

pub fn permutation_symmetry_check(t: f64) -> Result<bool> {
    Ok(has_cyclic_symmetry(&choi_hakye(t)?, 1e-14))
}

/// Trace of `C_{Φ_t}`; equals `3(a+b+c) = 6`.
pub fn choi_trace(t: f64) -> Result<f64> {
    Ok(choi_hakye(t)?.trace().re)
}

/// `⟨Ω|C_{Φ_t}|Ω⟩/3` for `Ω = Σ e_i ⊗ e_i`, equal to `a_t − 2`.
pub fn maximally_entangled_expectation(t: f64) -> Result<f64> {
    let choi = choi_hakye(t)?;
    let mut acc = ZERO;
    for &r in &[0usize, 4, 8] {
        for &s in &[0usize, 4, 8] {
            acc += choi[(r, s)];
        }
    }
    Ok(acc.re / 3.0)
}
