//! JSON encoding of exact values: rationals as "p/q" strings, field
//! elements as sqrt-basis pairs (a, b) meaning a + b sqrt(-d), Hermitian
//! matrices as row-major arrays of such pairs.

use crate::kmat::KMat;
use crate::linalg::Q;
use crate::qfield::{KElem, QuadField};
use num::bigint::BigInt;
use num::One;
use serde_json::{json, Value};
use std::str::FromStr;

/// Renders a rational as "p" or "p/q" in lowest terms.
pub fn q_to_string(x: &Q) -> String {
    if x.denom() == &BigInt::one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses "p" or "p/q".
pub fn q_from_str(s: &str) -> Option<Q> {
    match s.split_once('/') {
        None => BigInt::from_str(s).ok().map(Q::from_integer),
        Some((p, q)) => {
            let (p, q) = (BigInt::from_str(p).ok()?, BigInt::from_str(q).ok()?);
            if q == BigInt::ZERO {
                None
            } else {
                Some(Q::new(p, q))
            }
        }
    }
}

/// A field element as a two-entry array in the sqrt basis.
pub fn kelem_to_json(k: &QuadField, x: &KElem) -> Value {
    let (u, v) = k.to_sqrt_basis(x);
    json!([q_to_string(&u), q_to_string(&v)])
}

pub fn kelem_from_json(k: &QuadField, v: &Value) -> Option<KElem> {
    let arr = v.as_array()?;
    if arr.len() != 2 {
        return None;
    }
    let u = q_from_str(arr[0].as_str()?)?;
    let w = q_from_str(arr[1].as_str()?)?;
    Some(k.from_sqrt_basis(&u, &w))
}

/// A matrix over K as rows of sqrt-basis pairs.
pub fn kmat_to_json(k: &QuadField, m: &KMat) -> Value {
    Value::Array(
        m.rows
            .iter()
            .map(|r| Value::Array(r.iter().map(|x| kelem_to_json(k, x)).collect()))
            .collect(),
    )
}

pub fn kmat_from_json(k: &QuadField, v: &Value) -> Option<KMat> {
    let rows = v
        .as_array()?
        .iter()
        .map(|r| {
            r.as_array()?
                .iter()
                .map(|x| kelem_from_json(k, x))
                .collect::<Option<Vec<KElem>>>()
        })
        .collect::<Option<Vec<Vec<KElem>>>>()?;
    Some(KMat::new(rows))
}

/// A vector over K.
pub fn kvec_to_json(k: &QuadField, v: &[KElem]) -> Value {
    Value::Array(v.iter().map(|x| kelem_to_json(k, x)).collect())
}

pub fn kvec_from_json(k: &QuadField, v: &Value) -> Option<Vec<KElem>> {
    v.as_array()?.iter().map(|x| kelem_from_json(k, x)).collect()
}
