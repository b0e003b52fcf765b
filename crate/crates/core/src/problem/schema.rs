//! Serialized problem documents. Numbers are plain `f64`; conversion to the
//! working scalar happens when a [`Vcp`](super::Vcp) is built.

use serde::{Deserialize, Serialize};

use super::Atom;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConeDoc {
    Natural {
        natural: usize,
    },
    /// Row-major `q x l`; the columns generate the dual cone.
    General {
        #[serde(rename = "Z")]
        z: Vec<Vec<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AtomDoc {
    Affine {
        c: Vec<f64>,
        #[serde(default)]
        r: f64,
    },
    Quadratic {
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
        c: Vec<f64>,
        #[serde(default)]
        r: f64,
    },
    SqResidual {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    L1Affine {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    LinfAffine {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintDoc {
    pub atom: AtomDoc,
    pub ub: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EqDoc {
    #[serde(rename = "E")]
    pub e: Vec<Vec<f64>>,
    pub f: Vec<f64>,
}

/// `null` entries are unbounded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxDoc {
    pub lo: Vec<Option<f64>>,
    pub hi: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemDoc {
    pub n: usize,
    pub cone: ConeDoc,
    pub objectives: Vec<AtomDoc>,
    #[serde(default)]
    pub constraints: Vec<ConstraintDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eq: Option<EqDoc>,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoxDoc>,
    /// Free-form provenance, e.g. the generator family and its parameters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl ProblemDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem documents always serialize")
    }
}

pub(crate) fn mat<T: Real>(rows: &[Vec<f64>], what: &str) -> Result<Mat<T>> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Schema(format!("{what}: ragged matrix")));
    }
    check_finite(rows.iter().flatten().copied(), what)?;
    Ok(Mat::from_rows(&rows.iter().map(|r| vec_t(r)).collect::<Vec<_>>()))
}

pub(crate) fn vec_t<T: Real>(v: &[f64]) -> Vec<T> {
    v.iter().map(|&x| T::lit(x)).collect()
}

pub(crate) fn rows_f64<T: Real>(m: &Mat<T>) -> Vec<Vec<f64>> {
    m.to_rows()
        .into_iter()
        .map(|r| r.into_iter().map(Real::as_f64).collect())
        .collect()
}

pub(crate) fn vec_f64<T: Real>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.as_f64()).collect()
}

fn check_finite(mut it: impl Iterator<Item = f64>, what: &str) -> Result<()> {
    if it.all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::Schema(format!("{what}: non-finite number")))
    }
}

impl AtomDoc {
    pub fn to_atom<T: Real>(&self, what: &str) -> Result<Atom<T>> {
        Ok(match self {
            AtomDoc::Affine { c, r } => {
                check_finite(c.iter().copied().chain([*r]), what)?;
                Atom::Affine {
                    c: vec_t(c),
                    r: T::lit(*r),
                }
            }
            AtomDoc::Quadratic { q, c, r } => {
                check_finite(c.iter().copied().chain([*r]), what)?;
                Atom::Quadratic {
                    q: mat(q, what)?,
                    c: vec_t(c),
                    r: T::lit(*r),
                }
            }
            AtomDoc::SqResidual { a, b } => Atom::SqResidual {
                a: mat(a, what)?,
                b: checked_vec(b, what)?,
            },
            AtomDoc::L1Affine { a, b } => Atom::L1Affine {
                a: mat(a, what)?,
                b: checked_vec(b, what)?,
            },
            AtomDoc::LinfAffine { a, b } => Atom::LinfAffine {
                a: mat(a, what)?,
                b: checked_vec(b, what)?,
            },
        })
    }

    pub fn from_atom<T: Real>(atom: &Atom<T>) -> Self {
        match atom {
            Atom::Affine { c, r } => AtomDoc::Affine {
                c: vec_f64(c),
                r: r.as_f64(),
            },
            Atom::Quadratic { q, c, r } => AtomDoc::Quadratic {
                q: rows_f64(q),
                c: vec_f64(c),
                r: r.as_f64(),
            },
            Atom::SqResidual { a, b } => AtomDoc::SqResidual {
                a: rows_f64(a),
                b: vec_f64(b),
            },
            Atom::L1Affine { a, b } => AtomDoc::L1Affine {
                a: rows_f64(a),
                b: vec_f64(b),
            },
            Atom::LinfAffine { a, b } => AtomDoc::LinfAffine {
                a: rows_f64(a),
                b: vec_f64(b),
            },
        }
    }
}

fn checked_vec<T: Real>(v: &[f64], what: &str) -> Result<Vec<T>> {
    check_finite(v.iter().copied(), what)?;
    Ok(vec_t(v))
}
