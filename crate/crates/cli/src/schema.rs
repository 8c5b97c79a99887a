//! JSON extraction and input validation: ring descriptors, ring elements
//! as coefficient arrays, polynomial matrices in the string grammar, and
//! the degree guardrail.

use std::sync::Arc;

use psl_core::multipoly::{parse_poly, LaurentPoly, Matrix, VarSet};
use psl_core::rings::{Ring, RingElement};
use serde_json::{Map, Value};

use crate::CliError;

pub fn object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>, CliError> {
    v.as_object().ok_or_else(|| CliError::Schema(format!("{what} must be an object")))
}

pub fn field<'a>(m: &'a Map<String, Value>, key: &str) -> Result<&'a Value, CliError> {
    m.get(key).ok_or_else(|| CliError::Schema(format!("missing field \"{key}\"")))
}

pub fn str_field(m: &Map<String, Value>, key: &str) -> Result<String, CliError> {
    field(m, key)?
        .as_str()
        .map(str::to_owned)
        .ok_or_else(|| CliError::Schema(format!("field \"{key}\" must be a string")))
}

pub fn u64_field(m: &Map<String, Value>, key: &str) -> Result<u64, CliError> {
    field(m, key)?
        .as_u64()
        .ok_or_else(|| CliError::Schema(format!("field \"{key}\" must be a nonnegative integer")))
}

pub fn usize_field(m: &Map<String, Value>, key: &str) -> Result<usize, CliError> {
    Ok(u64_field(m, key)? as usize)
}

pub fn bool_field(m: &Map<String, Value>, key: &str, default: bool) -> Result<bool, CliError> {
    match m.get(key) {
        None => Ok(default),
        Some(v) => v
            .as_bool()
            .ok_or_else(|| CliError::Schema(format!("field \"{key}\" must be a boolean"))),
    }
}

pub fn int_array(v: &Value, what: &str) -> Result<Vec<i64>, CliError> {
    let arr = v
        .as_array()
        .ok_or_else(|| CliError::Schema(format!("{what} must be an array of integers")))?;
    arr.iter()
        .map(|x| {
            x.as_i64()
                .ok_or_else(|| CliError::Schema(format!("{what} must contain only integers")))
        })
        .collect()
}

pub fn int_matrix(v: &Value, what: &str) -> Result<Vec<Vec<i64>>, CliError> {
    let arr = v
        .as_array()
        .ok_or_else(|| CliError::Schema(format!("{what} must be an array of rows")))?;
    if arr.is_empty() {
        return Err(CliError::Schema(format!("{what} must be nonempty")));
    }
    arr.iter().map(|row| int_array(row, what)).collect()
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Ring descriptor: `{"modulus": m}` with optional `"quotient"` (monic
/// coefficient array, constant first) and `"maximal_ideal"` (list of
/// coefficient arrays). Prime modulus without quotient gives the prime
/// field.
pub fn ring_from(v: &Value) -> Result<Ring, CliError> {
    let m = object(v, "ring descriptor")?;
    let modulus = u64_field(m, "modulus")?;
    let mut ring = if is_prime(modulus) {
        Ring::prime_field(modulus).map_err(|e| CliError::Schema(e.to_string()))?
    } else {
        Ring::integer_residue(modulus).map_err(|e| CliError::Schema(e.to_string()))?
    };
    if let Some(q) = m.get("quotient") {
        let coeffs = int_array(q, "quotient")?;
        ring = Ring::monic_quotient(&ring, &coeffs).map_err(|e| CliError::Schema(e.to_string()))?;
    }
    if let Some(mi) = m.get("maximal_ideal") {
        let arr = mi
            .as_array()
            .ok_or_else(|| CliError::Schema("maximal_ideal must be an array".into()))?;
        let gens: Vec<RingElement> = arr
            .iter()
            .map(|g| int_array(g, "maximal_ideal entry").map(|c| ring.element(&c)))
            .collect::<Result<_, _>>()?;
        ring = ring
            .declare_maximal_ideal(&gens)
            .map_err(|e| CliError::Schema(e.to_string()))?;
    }
    Ok(ring)
}

/// Ring element as an ascending coefficient array in the quotient
/// generator; length 1 for plain residues.
pub fn element_from(ring: &Ring, v: &Value, what: &str) -> Result<RingElement, CliError> {
    let coeffs = int_array(v, what)?;
    if coeffs.is_empty() || coeffs.len() > ring.degree() {
        return Err(CliError::Schema(format!(
            "{what} must have between 1 and {} coefficients",
            ring.degree()
        )));
    }
    Ok(ring.element(&coeffs))
}

pub fn parse_checked(
    src: &str,
    ring: &Ring,
    vars: &Arc<VarSet>,
    max_degree: i64,
) -> Result<LaurentPoly, CliError> {
    let poly = parse_poly(src, ring, vars).map_err(|e| CliError::Parse(e.to_string()))?;
    if let Some(d) = poly.total_degree() {
        if d > max_degree {
            return Err(CliError::Degree(format!(
                "\"{src}\" has total degree {d}, above the guardrail {max_degree}"
            )));
        }
    }
    Ok(poly)
}

pub fn poly_matrix(
    v: &Value,
    ring: &Ring,
    vars: &Arc<VarSet>,
    max_degree: i64,
) -> Result<Matrix<LaurentPoly>, CliError> {
    let rows = v
        .as_array()
        .ok_or_else(|| CliError::Schema("matrix must be an array of rows".into()))?;
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let cells = row
            .as_array()
            .ok_or_else(|| CliError::Schema("matrix row must be an array of strings".into()))?;
        let mut parsed = Vec::with_capacity(cells.len());
        for cell in cells {
            let src = cell
                .as_str()
                .ok_or_else(|| CliError::Schema("matrix entry must be a string".into()))?;
            parsed.push(parse_checked(src, ring, vars, max_degree)?);
        }
        out.push(parsed);
    }
    Matrix::from_rows(out).map_err(|e| CliError::Schema(e.to_string()))
}

/// The list of per-direction square matrices under "a".
pub fn matrix_family(
    conn: &Map<String, Value>,
    ring: &Ring,
    vars: &Arc<VarSet>,
    max_degree: i64,
) -> Result<Vec<Matrix<LaurentPoly>>, CliError> {
    let list = field(conn, "a")?
        .as_array()
        .ok_or_else(|| CliError::Schema("\"a\" must be an array of matrices".into()))?;
    if list.len() != vars.len() {
        return Err(CliError::Schema(format!(
            "\"a\" lists {} matrices for {} coordinates",
            list.len(),
            vars.len()
        )));
    }
    list.iter().map(|m| poly_matrix(m, ring, vars, max_degree)).collect()
}
