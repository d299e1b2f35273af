//! JSON forms of tensors, cones and instances, plus serde helpers for the
//! report types.
//!
//! Tensor indices are 1-based in JSON. Cones are written as their generators
//! only; the inequality description is recomputed on load.

use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::complementary::Membership;
use crate::cone::{ConeKind, PolyhedralCone};
use crate::error::{Result, TcpError};
use crate::solver::TcpInstance;
use crate::tensor::{IndexSet, Tensor};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryJson {
    idx: Vec<usize>,
    val: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorJson {
    order: usize,
    dim: usize,
    entries: Vec<EntryJson>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KindJson {
    Orthant,
    General,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConeJson {
    dim: usize,
    kind: KindJson,
    #[serde(default)]
    generators: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceJson {
    cone: ConeJson,
    q: Vec<f64>,
    tensor: TensorJson,
}

fn tensor_json(t: &Tensor) -> TensorJson {
    TensorJson {
        order: t.order(),
        dim: t.dim(),
        entries: t
            .entries()
            .map(|(idx, val)| EntryJson {
                idx: idx.iter().map(|i| i + 1).collect(),
                val,
            })
            .collect(),
    }
}

fn tensor_from(j: TensorJson) -> Result<Tensor> {
    let mut entries = Vec::with_capacity(j.entries.len());
    for e in j.entries {
        if let Some(bad) = e.idx.iter().find(|&&i| i == 0 || i > j.dim) {
            return Err(TcpError::InvalidTensor(format!(
                "index {bad} in {:?} outside 1..={}",
                e.idx, j.dim
            )));
        }
        entries.push((e.idx.iter().map(|i| i - 1).collect::<Vec<_>>(), e.val));
    }
    Tensor::new(j.order, j.dim, entries)
}

fn cone_json(k: &PolyhedralCone) -> ConeJson {
    ConeJson {
        dim: k.dim(),
        kind: match k.kind() {
            ConeKind::Orthant => KindJson::Orthant,
            ConeKind::General => KindJson::General,
        },
        generators: Some(k.generators().to_vec()),
    }
}

fn cone_from(j: ConeJson) -> Result<PolyhedralCone> {
    match j.kind {
        KindJson::Orthant => {
            let k = PolyhedralCone::orthant(j.dim);
            if let Some(g) = j.generators {
                if g.as_slice() != k.generators() {
                    return Err(TcpError::InvalidCone(
                        "orthant generators must be the unit vectors in order".into(),
                    ));
                }
            }
            Ok(k)
        }
        KindJson::General => {
            let g = j
                .generators
                .ok_or_else(|| TcpError::InvalidCone("general cone needs generators".into()))?;
            match PolyhedralCone::from_generators(j.dim, g.clone()) {
                // generators spanning a line: K is the dual of {y : <g, y> >= 0}
                Err(TcpError::NonPointedCone) => {
                    Ok(PolyhedralCone::from_inequalities(j.dim, g)?.dual())
                }
                other => other,
            }
        }
    }
}

fn parse<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text)
        .map_err(|e| TcpError::Parse(format!("line {} column {}: {e}", e.line(), e.column())))
}

fn emit<T: Serialize>(value: &T, pretty: bool) -> String {
    if pretty {
        serde_json::to_string_pretty(value).expect("report types serialize")
    } else {
        serde_json::to_string(value).expect("report types serialize")
    }
}

pub fn tensor_to_json(t: &Tensor, pretty: bool) -> String {
    emit(&tensor_json(t), pretty)
}

pub fn tensor_from_json(text: &str) -> Result<Tensor> {
    tensor_from(parse(text)?)
}

pub fn cone_to_json(k: &PolyhedralCone, pretty: bool) -> String {
    emit(&cone_json(k), pretty)
}

pub fn cone_from_json(text: &str) -> Result<PolyhedralCone> {
    cone_from(parse(text)?)
}

pub fn instance_to_json(inst: &TcpInstance, pretty: bool) -> String {
    emit(
        &InstanceJson {
            cone: cone_json(&inst.cone),
            q: inst.q.clone(),
            tensor: tensor_json(&inst.tensor),
        },
        pretty,
    )
}

pub fn instance_from_json(text: &str) -> Result<TcpInstance> {
    let j: InstanceJson = parse(text)?;
    TcpInstance::new(cone_from(j.cone)?, j.q, tensor_from(j.tensor)?)
}

/// Any report type as JSON.
pub fn to_json<T: Serialize>(value: &T, pretty: bool) -> String {
    emit(value, pretty)
}

/// Serializes a tensor field in its JSON form.
pub fn tensor_field<S: Serializer>(t: &Tensor, s: S) -> std::result::Result<S::Ok, S::Error> {
    tensor_json(t).serialize(s)
}

/// Serializes finite floats as numbers and non-finite ones as the strings
/// `"inf"`, `"-inf"` and `"nan"`.
pub mod float {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(de::Error::custom(format!(
                    "expected a number, found {other:?}"
                ))),
            },
        }
    }
}

pub(crate) fn membership<S: Serializer>(
    m: &Membership,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match m {
        Membership::Member => s.serialize_bool(true),
        Membership::NonMember => s.serialize_bool(false),
        Membership::Unknown => s.serialize_str("unknown"),
    }
}

pub(crate) fn index_set<S: Serializer>(a: &IndexSet, s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(a.len()))?;
    for i in a.one_based() {
        seq.serialize_element(&i)?;
    }
    seq.end()
}

pub(crate) fn index_set_opt<S: Serializer>(
    a: &Option<IndexSet>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match a {
        Some(a) => index_set(a, s),
        None => s.serialize_none(),
    }
}

pub(crate) fn index_sets<S: Serializer>(
    v: &[IndexSet],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for a in v {
        seq.serialize_element(&a.one_based())?;
    }
    seq.end()
}
