use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use mapcone::choi::{choi_of_map, map_of_choi, LinearMapM3};
use mapcone::hakye::{HaKyeParams, SingularFamily};
use mapcone::io::MatrixJson;
use mapcone::linalg::{
    min_eigenvalue, numerical_rank, singular_values, ComplexMatrix3, ComplexVector3, RANK_TOL,
};
use mapcone::localequiv::moduli::{classification_agrees_with_oracle, PHASE_SAMPLES};
use mapcone::localequiv::{
    classify_matrix, decide_local_equivalence, DecisionOptions, ModuliClass, SearchOptions,
};
use mapcone::positivity::{
    is_ppt, partial_transpose_min_eigenvalue, product_min, separable_sample, witness_apply,
    MinimizerOptions,
};
use mapcone::random::{phases, substream};
use mapcone::state::DensityMatrix9;
use serde_json::{json, Value};

use crate::args::{Command, Global, MapSpec};
use crate::verify::{criterion_passed, run_battery, BatteryConfig};

/// What a command produced before it is wrapped into a report.
pub struct Outcome {
    pub results: Value,
    pub pass: BTreeMap<String, bool>,
    /// Raw bytes of every input file, in argument order.
    pub inputs: Vec<Vec<u8>>,
}

impl Outcome {
    fn new(results: Value) -> Self {
        Self {
            results,
            pass: BTreeMap::new(),
            inputs: Vec::new(),
        }
    }

    fn pass(mut self, name: &str, ok: bool) -> Self {
        self.pass.insert(name.into(), ok);
        self
    }
}

pub fn vector_json(v: &ComplexVector3) -> Value {
    json!({
        "re": v.iter().map(|z| z.re).collect::<Vec<_>>(),
        "im": v.iter().map(|z| z.im).collect::<Vec<_>>(),
    })
}

fn read_matrix<const N: usize>(
    path: &Path,
    inputs: &mut Vec<Vec<u8>>,
) -> Result<nalgebra::SMatrix<mapcone::C64, N, N>> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed: MatrixJson = serde_json::from_slice(&bytes)
        .with_context(|| format!("parsing matrix JSON in {}", path.display()))?;
    inputs.push(bytes);
    parsed
        .to_matrix::<N, N>()
        .with_context(|| format!("matrix in {}", path.display()))
}

fn map_of(spec: MapSpec) -> Result<LinearMapM3> {
    Ok(match spec {
        MapSpec::Hakye { t } => HaKyeParams::new(t)?.map(),
        MapSpec::Identity => LinearMapM3::identity(),
        MapSpec::Transpose => LinearMapM3::transpose(),
    })
}

pub fn execute(cmd: &Command, g: &Global) -> Result<Outcome> {
    let minimizer = MinimizerOptions {
        restarts: g.restarts,
        seed: g.seed,
        ..Default::default()
    };
    let mut inputs = Vec::new();
    let out = match cmd {
        Command::Choi { t } => {
            let p = HaKyeParams::new(*t)?;
            let choi = p.choi();
            let rebuilt = choi_of_map(|x| p.apply(x))?;
            Outcome::new(json!({
                "t": t,
                "coefficients": {"a": p.a, "b": p.b, "c": p.c},
                "choi": MatrixJson::from_matrix(&choi),
                "trace": choi.trace().re,
                "min_eigenvalue": min_eigenvalue(&choi)?,
            }))
            .pass("matches_matrix_units", (rebuilt - choi).camax() < 1e-12)
        }
        Command::Apply { t, input } => {
            let p = HaKyeParams::new(*t)?;
            let x: ComplexMatrix3 = read_matrix(input, &mut inputs)?;
            let y = p.apply(&x);
            let via_choi = map_of_choi(&p.choi()).apply(&x);
            Outcome::new(json!({"t": t, "output": MatrixJson::from_matrix(&y)})).pass(
                "matches_choi",
                (y - via_choi).camax() <= 1e-12 * (1.0 + x.camax()),
            )
        }
        Command::Blockpos { input, t } => {
            let choi = match (input, t) {
                (Some(path), _) => read_matrix(path, &mut inputs)?,
                (None, Some(t)) => HaKyeParams::new(*t)?.choi(),
                (None, None) => return Err(anyhow!("either --in or --t is required")),
            };
            let v = product_min(&choi, &minimizer)?;
            Outcome::new(json!({
                "min_value": v.min_value,
                "argmin_x": vector_json(&v.argmin.x),
                "argmin_y": vector_json(&v.argmin.y),
                "converged": v.converged,
                "restarts": v.restarts_used,
            }))
            .pass("block_positive", v.min_value >= -g.tol_bp)
        }
        Command::Witness { phi, b, rho } => {
            let map = map_of(*phi)?;
            let b = match b {
                Some(path) => read_matrix(path, &mut inputs)?,
                None => ComplexMatrix3::identity(),
            };
            let rho = DensityMatrix9::with_tolerance(read_matrix(rho, &mut inputs)?, g.tol_eigen)?;
            let min = witness_apply(&map, &b, &rho)?;
            Outcome::new(
                json!({"min_eigenvalue": min, "entanglement_detected": min < -g.tol_eigen}),
            )
            .pass("output_positive", min >= -g.tol_eigen)
        }
        Command::Ppt { rho } => {
            let rho = DensityMatrix9::with_tolerance(read_matrix(rho, &mut inputs)?, g.tol_eigen)?;
            let min = partial_transpose_min_eigenvalue(rho.matrix())?;
            Outcome::new(json!({"min_eigenvalue": min}))
                .pass("ppt", is_ppt(rho.matrix(), g.tol_eigen)?)
        }
        Command::Singular { t } => singular(*t, g)?,
        Command::Kernel { t, family, phases } => {
            let p = HaKyeParams::new(*t)?;
            let fam = SingularFamily::new(*t, family.0);
            let ph: [f64; 3] = phases.as_slice().try_into().map_err(|_| {
                anyhow!("--phases needs exactly three values, got {}", phases.len())
            })?;
            let (y, x) = (fam.y(ph), fam.x(ph));
            let m = p.singular_compression(&y);
            let residual = (m * x).norm();
            let rank = numerical_rank(&m, RANK_TOL);
            Outcome::new(json!({
                "family": fam,
                "y": vector_json(&y),
                "x": vector_json(&x),
                "f": p.f_det(&y),
                "rank": rank,
                "residual": residual,
                "singular_values": singular_values(&m),
            }))
            .pass("kernel", residual < g.tol_eigen)
            .pass("rank_two", rank == 2)
        }
        Command::LocalEquiv { t1, t2, numeric } => {
            let opts = DecisionOptions {
                numeric: *numeric,
                search: SearchOptions {
                    restarts: g.restarts,
                    seed: g.seed,
                    ..Default::default()
                },
                seed: g.seed,
                ..Default::default()
            };
            let v = decide_local_equivalence(*t1, *t2, &opts)?;
            let witness = v.witness.map(|(r, s)| json!({"R": MatrixJson::from_matrix(&r), "S": MatrixJson::from_matrix(&s)}));
            let numeric = v.numeric.as_ref().map(|n| {
                json!({
                    "residual": n.residual,
                    "best_start": n.best_start,
                    "R": MatrixJson::from_matrix(&n.r),
                    "S": MatrixJson::from_matrix(&n.s),
                })
            });
            let checks_agree = v.certificate.iter().all(|r| r.numeric_check);
            Outcome::new(json!({
                "t1": t1,
                "t2": t2,
                "equivalent": v.equivalent,
                "certificate": v.certificate,
                "residual": v.residual,
                "witness": witness,
                "numeric": numeric,
            }))
            .pass("certificate_numerically_confirmed", checks_agree)
        }
        Command::ModuliClassify { input } => {
            let x: ComplexMatrix3 = read_matrix(input, &mut inputs)?;
            let class = classify_matrix(&x);
            let agrees = classification_agrees_with_oracle(&x, PHASE_SAMPLES, g.seed);
            let mut results = json!({"class": class.kind(), "oracle_agrees": agrees});
            match class {
                ModuliClass::Monomial(f) => {
                    results["permutation"] = json!(f.permutation.0);
                    results["cycle"] = json!(f.permutation.cycle_notation());
                    results["zeta"] = vector_json(&ComplexVector3::from(f.zeta));
                }
                ModuliClass::ProportionalRows { rows } => results["rows"] = json!([rows.0, rows.1]),
                ModuliClass::Generic => {}
            }
            Outcome::new(results).pass("oracle_agrees", agrees)
        }
        Command::SampleSeparable { k } => {
            if *k == 0 {
                return Err(anyhow!("--k must be at least 1"));
            }
            let (spec, rho) = separable_sample(*k, g.seed)?;
            let factors: Vec<Value> = spec
                .factors
                .iter()
                .map(|f| json!({"x": vector_json(&f.x), "y": vector_json(&f.y)}))
                .collect();
            let min = partial_transpose_min_eigenvalue(rho.matrix())?;
            Outcome::new(json!({
                "k": k,
                "weights": spec.weights,
                "factors": factors,
                "rho": rho,
                "partial_transpose_min_eigenvalue": min,
            }))
            .pass("ppt", min >= -g.tol_eigen)
        }
        Command::VerifyPaper { mutate } => {
            let mut cfg = BatteryConfig::standard(g.seed);
            cfg.restarts = g.restarts;
            cfg.mutation = *mutate;
            let checks = run_battery(&cfg);
            let mut out = Outcome::new(json!({"battery": cfg, "checks": checks}));
            for criterion in 1..=8u8 {
                out = out.pass(
                    &format!("criterion_{criterion}"),
                    criterion_passed(&checks, criterion),
                );
            }
            out
        }
    };
    Ok(Outcome { inputs, ..out })
}

fn singular(t: f64, g: &Global) -> Result<Outcome> {
    let p = HaKyeParams::new(t)?;
    let mut r = substream(g.seed, 0);
    let mut families = Vec::new();
    let (mut ok_f, mut ok_rank, mut ok_kernel) = (true, true, true);
    for fam in p.families() {
        let (mut max_f, mut max_kernel, mut ranks) = (0.0f64, 0.0f64, Vec::new());
        for i in 0..16 {
            let ph = if i == 0 { [0.0; 3] } else { phases(&mut r) };
            let y = fam.y(ph);
            let m = p.singular_compression(&y);
            max_f = max_f.max(p.f_det(&y).abs());
            max_kernel = max_kernel.max((m * fam.x(ph)).norm());
            ranks.push(numerical_rank(&m, RANK_TOL));
        }
        ok_f &= max_f < 1e-10;
        ok_rank &= ranks.iter().all(|&k| k == 2);
        ok_kernel &= max_kernel < g.tol_eigen;
        let mut entry = serde_json::to_value(fam)?;
        entry["max_abs_f"] = json!(max_f);
        entry["max_kernel_residual"] = json!(max_kernel);
        entry["ranks"] = json!(ranks);
        families.push(entry);
    }
    Ok(Outcome::new(json!({"t": t, "families": families}))
        .pass("f_vanishes", ok_f)
        .pass("rank_two", ok_rank)
        .pass("kernel", ok_kernel))
}
