//! One handler per task kind. Each returns the "result" object and the
//! verdict that drives the exit code.

use std::sync::Arc;

use psl_core::cluster::{
    check_compatible, exchange_mutation, isogeny_decomposition, ClusterChart, CompatiblePair,
    Seed,
};
use psl_core::dmod::{
    check_lift, is_lagrangian_differential, Connection, CurvatureFamily, EigenForm, EigenMode,
    Flatness,
};
use psl_core::multipoly::{LaurentPoly, Matrix, RatFunc, VarSet};
use psl_core::psupport::{lagrangian_certificate, PoissonTag, SupportIdeal};
use psl_core::qmod::{
    bernstein_step, check_lift_q, is_lagrangian_q, sp_twist, QAlgebra, QConnection, QmodError,
    SymplecticMatrix,
};
use psl_core::rings::{ResidueMap, Ring, RingElement};
use serde_json::{json, Map, Value};

use crate::schema::{
    bool_field, element_from, field, int_array, int_matrix, matrix_family, object, parse_checked,
    poly_matrix, ring_from, str_field, usize_field,
};
use crate::{CliError, Options};

fn compute<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

fn bad_input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Schema(e.to_string())
}

fn mat_strings(m: &Matrix<LaurentPoly>) -> Value {
    Value::Array(
        m.rows()
            .iter()
            .map(|row| Value::Array(row.iter().map(|e| json!(e.to_string())).collect()))
            .collect(),
    )
}

fn family_strings(ms: &[Matrix<LaurentPoly>]) -> Value {
    Value::Array(ms.iter().map(mat_strings).collect())
}

fn ratfunc_json(f: &RatFunc) -> Value {
    json!({"num": f.num().to_string(), "den": f.den().to_string()})
}

fn forms_json(forms: &[EigenForm]) -> Value {
    Value::Array(
        forms
            .iter()
            .map(|f| {
                json!({
                    "lambda": f.lambda().iter().map(ratfunc_json).collect::<Vec<_>>(),
                    "multiplicity": f.multiplicity(),
                    "provenance": f.provenance().as_str(),
                })
            })
            .collect(),
    )
}

fn flatness_json(f: &Flatness) -> Value {
    json!({
        "flat": f.flat,
        "pair": f.pair.map(|(i, j)| json!([i, j])).unwrap_or(Value::Null),
        "witness": f.witness.as_ref().map(mat_strings).unwrap_or(Value::Null),
    })
}

fn balanced(el: &RingElement) -> Value {
    json!(el.balanced_coeffs())
}

/// Cardinality of the coefficient list under "a", fixing the number of
/// coordinate directions before the variable roster exists.
fn direction_count(conn: &Map<String, Value>) -> Result<usize, CliError> {
    let list = field(conn, "a")?
        .as_array()
        .ok_or_else(|| CliError::Schema("\"a\" must be an array of matrices".into()))?;
    if list.is_empty() {
        return Err(CliError::Schema("\"a\" must list at least one matrix".into()));
    }
    Ok(list.len())
}

/// Eigenvalue route selection: explicit candidates force verification,
/// rank one gets the closed form, anything else the triangular reader.
fn eigen_mode(
    task: &Map<String, Value>,
    ring: &Ring,
    cap_vars: &Arc<VarSet>,
    n: usize,
    opts: &Options,
) -> Result<EigenMode, CliError> {
    if let Some(v) = task.get("eigenvalues") {
        let list = v
            .as_array()
            .ok_or_else(|| CliError::Schema("eigenvalues must be an array of tuples".into()))?;
        let mut out = Vec::with_capacity(list.len());
        for tuple in list {
            let parts = tuple
                .as_array()
                .ok_or_else(|| CliError::Schema("eigenvalue tuple must be an array".into()))?;
            let mut lam = Vec::with_capacity(parts.len());
            for s in parts {
                let src = s
                    .as_str()
                    .ok_or_else(|| CliError::Schema("eigenvalue entry must be a string".into()))?;
                lam.push(RatFunc::from_poly(&parse_checked(
                    src,
                    ring,
                    cap_vars,
                    opts.max_degree,
                )?));
            }
            out.push(lam);
        }
        return Ok(EigenMode::Verify(out));
    }
    Ok(if n == 1 { EigenMode::Rank1 } else { EigenMode::Triangular })
}

/// Re-derives the curvature by applying the connection operator p times
/// to each basis vector, entry by entry, and diffs against the family.
fn differential_oracle_agrees(conn: &Connection, fam: &CurvatureFamily) -> bool {
    let p = fam.p();
    let n = conn.n();
    let zero = conn.coefficient(0).at(0, 0).ring();
    let vars = conn.vars();
    for j in 0..conn.r() {
        let a = conn.coefficient(j);
        let mut rows = vec![vec![LaurentPoly::zero(zero, vars); n]; n];
        for k in 0..n {
            let mut v: Vec<LaurentPoly> = (0..n)
                .map(|i| {
                    let mut e = LaurentPoly::zero(zero, vars);
                    if i == k {
                        e = e.add(&LaurentPoly::one(zero, vars));
                    }
                    e
                })
                .collect();
            for _ in 0..p {
                v = (0..n)
                    .map(|i| {
                        let mut acc = v[i].partial(j).expect("coordinate in roster");
                        for (t, vt) in v.iter().enumerate() {
                            acc = acc.add(&a.at(i, t).mul(vt));
                        }
                        acc
                    })
                    .collect();
            }
            for i in 0..n {
                rows[i][k] = v[i].clone();
            }
        }
        let rebuilt = Matrix::from_rows(rows).expect("square by construction");
        if rebuilt != fam.x_matrices()[j] {
            return false;
        }
    }
    true
}

fn certificate_json(cert: &psl_core::psupport::LagrangianCertificate) -> Value {
    json!({
        "lagrangian": cert.lagrangian,
        "dimension": cert.dimension,
        "coisotropic": cert.coisotropic,
        "groebner": cert.basis.elements().iter().map(|g| g.to_string()).collect::<Vec<_>>(),
        "witness": cert.witness.as_ref().map(|w| json!({
            "i": w.i,
            "j": w.j,
            "bracket": w.bracket.to_string(),
            "normal_form": w.normal_form.to_string(),
        })).unwrap_or(Value::Null),
        "caveat": cert.caveat,
    })
}

pub fn differential(
    task: &Map<String, Value>,
    opts: &Options,
) -> Result<(Value, Option<bool>), CliError> {
    let ring = ring_from(field(task, "ring")?)?;
    let conn_obj = object(field(task, "connection")?, "connection")?;
    let r = direction_count(conn_obj)?;
    let vars = VarSet::numbered("x", r, false);
    let a = matrix_family(conn_obj, &ring, &vars, opts.max_degree)?;
    let conn = Connection::new(&ring, a).map_err(compute)?;
    let fam = conn.p_curvature().map_err(compute)?;

    let mut result = json!({
        "p": fam.p(),
        "mode": opts.mode,
        "curvature_x": family_strings(fam.x_matrices()),
        "curvature": fam.cap_matrices().map(family_strings).unwrap_or(Value::Null),
    });
    if opts.oracle {
        result["oracle"] = json!({"agrees": differential_oracle_agrees(&conn, &fam)});
    }

    let verdict = if opts.mode == "eigen" {
        let mode = eigen_mode(task, &ring, fam.cap_vars(), fam.n(), opts)?;
        let forms = fam.eigenvalue_forms(&mode).map_err(compute)?;
        let out = is_lagrangian_differential(&forms);
        result["eigenvalue_forms"] = forms_json(&forms);
        result["lagrangian"] = json!(out.lagrangian);
        result["witness"] = out
            .witness
            .as_ref()
            .map(|(i, j, v)| json!({"i": i, "j": j, "value": ratfunc_json(v)}))
            .unwrap_or(Value::Null);
        out.lagrangian
    } else {
        let ideal = fam.support_equations().map_err(compute)?;
        let cert = lagrangian_certificate(&ideal).map_err(compute)?;
        result["ideal"] =
            json!(ideal.generators().iter().map(|g| g.to_string()).collect::<Vec<_>>());
        result["expected_dimension"] = json!(ideal.half_dimension());
        result["certificate"] = certificate_json(&cert);
        result["lagrangian"] = json!(cert.lagrangian);
        cert.lagrangian
    };
    Ok((result, Some(verdict)))
}

pub fn q_difference(
    task: &Map<String, Value>,
    opts: &Options,
) -> Result<(Value, Option<bool>), CliError> {
    if opts.mode != "eigen" {
        return Err(CliError::UnsupportedMode(
            "q tasks support only the eigen route".into(),
        ));
    }
    let ring = ring_from(field(task, "ring")?)?;
    let q = element_from(&ring, field(task, "q")?, "q")?;
    let order = usize_field(task, "order")?;
    let conn_obj = object(field(task, "connection")?, "connection")?;
    let r = direction_count(conn_obj)?;
    let vars = VarSet::numbered("x", r, true);
    let a = matrix_family(conn_obj, &ring, &vars, opts.max_degree)?;
    let conn = match conn_obj.get("inverses") {
        None => QConnection::new(&ring, &q, a).map_err(compute)?,
        Some(v) => {
            let list = v
                .as_array()
                .ok_or_else(|| CliError::Schema("inverses must be an array of matrices".into()))?;
            let inv: Vec<Matrix<LaurentPoly>> = list
                .iter()
                .map(|m| poly_matrix(m, &ring, &vars, opts.max_degree))
                .collect::<Result<_, _>>()?;
            QConnection::with_inverses(&ring, &q, a, inv).map_err(compute)?
        }
    };
    let fam = conn.n_curvature(order).map_err(compute)?;

    let mut result = json!({
        "order": order,
        "q": balanced(&q),
        "mode": opts.mode,
        "curvature_x": family_strings(fam.x_matrices()),
        "curvature": fam.cap_matrices().map(family_strings).unwrap_or(Value::Null),
        "charpolys_t_invariant": fam.charpolys_t_invariant(),
    });
    if opts.oracle {
        let again = conn.n_curvature_oracle(order).map_err(compute)?;
        result["oracle"] = json!({"agrees": again == fam.x_matrices()});
    }

    let mode = eigen_mode(task, &ring, fam.cap_vars(), fam.n(), opts)?;
    let forms = fam.eigenvalue_forms(&mode).map_err(compute)?;
    let out = is_lagrangian_q(&forms).map_err(compute)?;
    result["eigenvalue_forms"] = forms_json(&forms);
    result["lagrangian"] = json!(out.lagrangian);
    result["witness"] = out
        .witness
        .as_ref()
        .map(|w| json!({"i": w.i, "j": w.j, "lhs": ratfunc_json(&w.lhs), "rhs": ratfunc_json(&w.rhs)}))
        .unwrap_or(Value::Null);
    Ok((result, Some(out.lagrangian)))
}

pub fn certify(
    task: &Map<String, Value>,
    opts: &Options,
) -> Result<(Value, Option<bool>), CliError> {
    let ring = ring_from(field(task, "ring")?)?;
    let r = usize_field(task, "half_dimension")?;
    let vars = match task.get("vars") {
        None => VarSet::concat(
            &VarSet::numbered("X", r, false),
            &VarSet::numbered("P", r, false),
        ),
        Some(v) => {
            let list = v
                .as_array()
                .ok_or_else(|| CliError::Schema("vars must be an array".into()))?;
            let mut names = Vec::new();
            let mut laurent = Vec::new();
            for entry in list {
                let m = object(entry, "vars entry")?;
                names.push(str_field(m, "name")?);
                laurent.push(bool_field(m, "laurent", false)?);
            }
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            VarSet::new(&refs, &laurent)
        }
    };
    let tag = match field(task, "bracket")? {
        Value::String(s) if s == "canonical" => PoissonTag::Canonical,
        Value::Object(m) => {
            let skew = int_matrix(field(m, "log_canonical")?, "log_canonical")?;
            PoissonTag::LogCanonical(skew)
        }
        other => {
            return Err(CliError::Schema(format!(
                "bracket must be \"canonical\" or {{\"log_canonical\": ...}}, got {other}"
            )))
        }
    };
    let gens_v = field(task, "generators")?
        .as_array()
        .ok_or_else(|| CliError::Schema("generators must be an array of strings".into()))?;
    let mut gens = Vec::with_capacity(gens_v.len());
    for g in gens_v {
        let src = g
            .as_str()
            .ok_or_else(|| CliError::Schema("generator must be a string".into()))?;
        gens.push(parse_checked(src, &ring, &vars, opts.max_degree)?);
    }
    let ideal = SupportIdeal::new(&vars, gens, tag, r).map_err(bad_input)?;
    let cert = lagrangian_certificate(&ideal).map_err(compute)?;
    let result = json!({
        "expected_dimension": r,
        "certificate": certificate_json(&cert),
        "lagrangian": cert.lagrangian,
    });
    Ok((result, Some(cert.lagrangian)))
}

pub fn lift_check(
    task: &Map<String, Value>,
    opts: &Options,
) -> Result<(Value, Option<bool>), CliError> {
    let setting = str_field(task, "setting")?;
    let source = ring_from(field(task, "source_ring")?)?;
    let target = ring_from(field(task, "target_ring")?)?;
    let u_image = element_from(&target, field(task, "u_image")?, "u_image")?;
    let map = ResidueMap::new(&source, &target, &u_image).map_err(bad_input)?;
    let lift_obj = object(field(task, "lift")?, "lift")?;
    let target_obj = object(field(task, "target")?, "target")?;
    let r = direction_count(lift_obj)?;

    match setting.as_str() {
        "differential" => {
            let vars = VarSet::numbered("x", r, false);
            let a_s = matrix_family(lift_obj, &source, &vars, opts.max_degree)?;
            let a_t = matrix_family(target_obj, &target, &vars, opts.max_degree)?;
            let lift = Connection::new(&source, a_s).map_err(compute)?;
            let down = Connection::new(&target, a_t).map_err(compute)?;
            let out = check_lift(&lift, &map, &down).map_err(compute)?;
            let p = target.characteristic();
            let p_nonzero = !source.int(p as i64).is_zero();

            let mut modulo = Vec::new();
            if let Some(v) = task.get("modulo") {
                let list = v
                    .as_array()
                    .ok_or_else(|| CliError::Schema("modulo must be an array".into()))?;
                for entry in list {
                    let m = object(entry, "modulo entry")?;
                    let label = str_field(m, "label")?;
                    let gens_v = field(m, "generators")?
                        .as_array()
                        .ok_or_else(|| CliError::Schema("generators must be an array".into()))?;
                    let gens: Vec<RingElement> = gens_v
                        .iter()
                        .map(|g| element_from(&source, g, "modulo generator"))
                        .collect::<Result<_, _>>()?;
                    let fl = lift.check_flat_mod(&source.ideal(&gens));
                    modulo.push(json!({
                        "label": label,
                        "flat": fl.flat,
                        "pair": fl.pair.map(|(i, j)| json!([i, j])).unwrap_or(Value::Null),
                    }));
                }
            }

            let verdict = out.flat_over_s.flat && out.reduction_matches && p_nonzero;
            let result = json!({
                "setting": setting,
                "flat_over_s": flatness_json(&out.flat_over_s),
                "p_nonzero": p_nonzero,
                "reduction_matches": out.reduction_matches,
                "mismatch": out.mismatch.map(|(j, r, c)| json!([j, r, c])).unwrap_or(Value::Null),
                "flat_modulo": modulo,
            });
            Ok((result, Some(verdict)))
        }
        "q" => {
            let order = usize_field(task, "order")?;
            let q_s = element_from(&source, field(lift_obj, "q")?, "lift q")?;
            let q_t = element_from(&target, field(target_obj, "q")?, "target q")?;
            let vars = VarSet::numbered("x", r, true);
            let a_s = matrix_family(lift_obj, &source, &vars, opts.max_degree)?;
            let a_t = matrix_family(target_obj, &target, &vars, opts.max_degree)?;
            let lift = QConnection::new(&source, &q_s, a_s).map_err(compute)?;
            let down = QConnection::new(&target, &q_t, a_t).map_err(compute)?;
            let out = check_lift_q(&lift, &map, &down, order).map_err(compute)?;
            let defect = q_s.pow(order as u64).sub(&source.one());
            let verdict = out.flat_over_s.flat && out.q_n_not_one && out.reduction_matches;
            let result = json!({
                "setting": setting,
                "order": order,
                "flat_over_s": flatness_json(&out.flat_over_s),
                "q_n_not_one": out.q_n_not_one,
                "q_order_defect": balanced(&defect),
                "reduction_matches": out.reduction_matches,
                "mismatch": out.mismatch.map(|(j, r, c)| json!([j, r, c])).unwrap_or(Value::Null),
            });
            Ok((result, Some(verdict)))
        }
        other => Err(CliError::Schema(format!(
            "setting must be \"differential\" or \"q\", got \"{other}\""
        ))),
    }
}

pub fn sp_twist_task(
    task: &Map<String, Value>,
    _opts: &Options,
) -> Result<(Value, Option<bool>), CliError> {
    let ring = ring_from(field(task, "ring")?)?;
    let r = usize_field(task, "rank")?;
    let q = element_from(&ring, field(task, "q")?, "q")?;
    let alg = match task.get("sqrt_q") {
        None => QAlgebra::standard(&ring, r, &q).map_err(compute)?,
        Some(v) => {
            let s = element_from(&ring, v, "sqrt_q")?;
            QAlgebra::standard_with_root(&ring, r, &q, &s).map_err(compute)?
        }
    };
    let terms = field(task, "element")?
        .as_array()
        .ok_or_else(|| CliError::Schema("element must be an array of terms".into()))?;
    let mut elem = alg.zero();
    for t in terms {
        let m = object(t, "element term")?;
        let exps = int_array(field(m, "exponents")?, "exponents")?;
        if exps.len() != 2 * r {
            return Err(CliError::Schema(format!(
                "exponent vector must have length {}",
                2 * r
            )));
        }
        let exps: Vec<i32> = exps.into_iter().map(|e| e as i32).collect();
        let coeff = element_from(&ring, field(m, "coeff")?, "coeff")?;
        elem = elem.add(&alg.element(&exps, &coeff)).map_err(compute)?;
    }
    let g = SymplecticMatrix::new(int_matrix(field(task, "g")?, "g")?).map_err(bad_input)?;
    let out = sp_twist(&g, &elem).map_err(compute)?;
    let twisted: Vec<Value> = out
        .terms()
        .map(|(v, c)| json!({"exponents": v, "coeff": c.balanced_coeffs()}))
        .collect();
    let result = json!({
        "rank": r,
        "q": balanced(&q),
        "twisted": twisted,
        "display": out.to_string(),
    });
    Ok((result, None))
}

pub fn bernstein(
    task: &Map<String, Value>,
    opts: &Options,
) -> Result<(Value, Option<bool>), CliError> {
    let monomials = int_matrix(field(task, "monomials")?, "monomials")?;
    let dim = monomials[0].len();
    if dim < 2 || dim % 2 != 0 || monomials.iter().any(|v| v.len() != dim) {
        return Err(CliError::Schema(
            "monomials must share one even length of at least 2".into(),
        ));
    }
    match bernstein_step(&monomials, opts.depth, opts.seed) {
        Ok(g) => {
            let transformed: Vec<Vec<i64>> = monomials.iter().map(|v| g.apply(v)).collect();
            let last: Vec<i64> = transformed.iter().map(|v| *v.last().unwrap()).collect();
            let result = json!({
                "success": true,
                "depth": opts.depth,
                "seed": opts.seed,
                "matrix": g.rows(),
                "transformed": transformed,
                "last_coordinates": last,
            });
            Ok((result, Some(true)))
        }
        Err(QmodError::SearchExhausted) => {
            let result = json!({"success": false, "depth": opts.depth, "seed": opts.seed});
            Ok((result, Some(false)))
        }
        Err(e) => Err(compute(e)),
    }
}

pub fn mutate(
    task: &Map<String, Value>,
    _opts: &Options,
) -> Result<(Value, Option<bool>), CliError> {
    let b = int_matrix(field(task, "b")?, "b")?;
    let d = int_array(field(task, "d")?, "d")?;
    let word_raw = int_array(field(task, "word")?, "word")?;
    let word: Vec<usize> = word_raw
        .iter()
        .map(|&k| {
            usize::try_from(k).map_err(|_| CliError::Schema("word indices are 1-based".into()))
        })
        .collect::<Result<_, _>>()?;
    let track_chart = bool_field(task, "chart", false)?;

    let mut seed = Seed::new(b, d).map_err(bad_input)?;
    let mut pair = match task.get("lambda") {
        None => None,
        Some(v) => {
            let lambda = int_matrix(v, "lambda")?;
            Some(CompatiblePair::new(lambda, seed.clone()).map_err(bad_input)?)
        }
    };
    let mut chart = track_chart.then(|| ClusterChart::initial(seed.m()));

    for &k in &word {
        if let Some(c) = &chart {
            chart = Some(exchange_mutation(c, &seed, k).map_err(bad_input)?);
        }
        match &pair {
            None => seed = seed.mutate(k).map_err(bad_input)?,
            Some(p) => {
                let next = p.mutate(k).map_err(bad_input)?;
                seed = next.seed().clone();
                pair = Some(next);
            }
        }
    }

    let result = json!({
        "b": seed.matrix(),
        "d": seed.symmetrizer(),
        "word": word,
        "lambda": pair.as_ref().map(|p| json!(p.lambda())).unwrap_or(Value::Null),
        "chart": chart.as_ref().map(|c| json!({
            "label": c.label(),
            "variables": c.variables().iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        })).unwrap_or(Value::Null),
    });
    Ok((result, None))
}

pub fn compatible(
    task: &Map<String, Value>,
    _opts: &Options,
) -> Result<(Value, Option<bool>), CliError> {
    let lambda = int_matrix(field(task, "lambda")?, "lambda")?;
    let b = int_matrix(field(task, "b")?, "b")?;
    let out = check_compatible(&lambda, &b).map_err(bad_input)?;
    let result = json!({
        "compatible": out.compatible,
        "d": out.d.map(|d| json!(d)).unwrap_or(Value::Null),
    });
    Ok((result, Some(out.compatible)))
}

pub fn isogeny(
    task: &Map<String, Value>,
    _opts: &Options,
) -> Result<(Value, Option<bool>), CliError> {
    let lambda = int_matrix(field(task, "lambda")?, "lambda")?;
    let s = lambda.len();
    if lambda.iter().any(|row| row.len() != s) {
        return Err(CliError::Schema("lambda must be square".into()));
    }
    for i in 0..s {
        for j in 0..s {
            if lambda[i][j] != -lambda[j][i] {
                return Err(CliError::Schema("lambda must be skew-symmetric".into()));
            }
        }
    }
    let out = isogeny_decomposition(&lambda);
    let commutation: Vec<Value> = out
        .commutation
        .iter()
        .map(|c| json!({"i": c.i, "j": c.j, "exponent": c.exponent, "expected": c.expected}))
        .collect();
    let result = json!({
        "kernel": out.kernel,
        "complement": out.complement,
        "rank": out.two_r,
        "d": out.d,
        "y_exponents": out.y_exponents,
        "commutation": commutation,
        "all_pass": out.all_pass,
    });
    Ok((result, Some(out.all_pass)))
}
