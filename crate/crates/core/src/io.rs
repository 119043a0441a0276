//! Shared file formats: matrix/element files, Gram tensors, superoperators
//! and report helpers.
//!
//! A matrix file is a JSON document
//!
//! ```text
//! { "algebra": { "blocks": [n_1, ...], "weights": [w_1, ...] },
//!   "elements": [ { "name": "...", "blocks": [ { "re": [[..]], "im": [[..]] } ] } ],
//!   "gram": [ { "i": 0, "j": 1, "blocks": [...] } ],
//!   "superoperators": [ { "name": "...", "source": {...}, "matrix": { "re": .., "im": .. } } ] }
//! ```
//!
//! with matrices stored row-major. `gram` and `superoperators` are optional.
//! Floats are written in shortest round-trip form, so a write/read cycle is
//! bit-exact. Superoperator matrices act on matrix-unit coordinates ordered
//! block-major and row-major inside blocks; the target algebra is the file's
//! `algebra`.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::radius_norms::SuperOperator;
use crate::sesquilinear::SesquilinearMap;
use crate::traced_algebra::{AlgebraElement, TracedAlgebra};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraSpec {
    pub blocks: Vec<usize>,
    pub weights: Vec<f64>,
}

impl AlgebraSpec {
    pub fn of(alg: &TracedAlgebra) -> Self {
        Self { blocks: alg.block_sizes().to_vec(), weights: alg.weights().to_vec() }
    }

    pub fn build(&self) -> Result<Arc<TracedAlgebra>> {
        TracedAlgebra::new(self.blocks.clone(), self.weights.clone())
    }
}

/// Dense complex matrix as separate real and imaginary row lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn of(m: &CMat) -> Self {
        let rows = |f: fn(&Complex64) -> f64| {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        Self { re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        let rows = self.re.len();
        let cols = self.re.first().map_or(0, Vec::len);
        let ragged = |part: &Vec<Vec<f64>>| part.len() != rows || part.iter().any(|r| r.len() != cols);
        if ragged(&self.re) || ragged(&self.im) {
            return Err(Error::Parse(format!("matrix parts must both be {rows}x{cols}")));
        }
        Ok(CMat::from_fn(rows, cols, |i, j| Complex64::new(self.re[i][j], self.im[i][j])))
    }

    fn is_finite(&self) -> bool {
        self.re.iter().chain(&self.im).flatten().all(|v| v.is_finite())
    }
}

fn blocks_json(x: &AlgebraElement) -> Vec<MatrixJson> {
    x.blocks().iter().map(MatrixJson::of).collect()
}

fn element_from_json(alg: &Arc<TracedAlgebra>, blocks: &[MatrixJson]) -> Result<AlgebraElement> {
    AlgebraElement::new(alg, blocks.iter().map(MatrixJson::to_matrix).collect::<Result<_>>()?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedElement {
    pub name: String,
    pub blocks: Vec<MatrixJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramEntry {
    pub i: usize,
    pub j: usize,
    pub blocks: Vec<MatrixJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperopEntry {
    pub name: String,
    pub source: AlgebraSpec,
    pub matrix: MatrixJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub algebra: AlgebraSpec,
    #[serde(default)]
    pub elements: Vec<NamedElement>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gram: Vec<GramEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub superoperators: Vec<SuperopEntry>,
}

impl MatrixFile {
    pub fn new(alg: &TracedAlgebra) -> Self {
        Self { algebra: AlgebraSpec::of(alg), elements: vec![], gram: vec![], superoperators: vec![] }
    }

    pub fn with_element(mut self, name: impl Into<String>, x: &AlgebraElement) -> Result<Self> {
        self.push_element(name, x)?;
        Ok(self)
    }

    pub fn push_element(&mut self, name: impl Into<String>, x: &AlgebraElement) -> Result<()> {
        x.ensure_in(&*self.algebra.build()?)?;
        self.elements.push(NamedElement { name: name.into(), blocks: blocks_json(x) });
        Ok(())
    }

    pub fn algebra(&self) -> Result<Arc<TracedAlgebra>> {
        self.algebra.build()
    }

    /// All elements in file order.
    pub fn elements(&self) -> Result<Vec<(String, AlgebraElement)>> {
        let alg = self.algebra()?;
        self.elements
            .iter()
            .map(|e| Ok((e.name.clone(), element_from_json(&alg, &e.blocks)?)))
            .collect()
    }

    pub fn element(&self, name: &str) -> Result<AlgebraElement> {
        let e = self
            .elements
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| Error::Parse(format!("no element named {name:?}")))?;
        element_from_json(&self.algebra()?, &e.blocks)
    }

    /// File holding the Gram tensor `Φ(e_i, e_j)` of a map.
    pub fn from_gram(map: &SesquilinearMap) -> Self {
        let d = map.domain_dim();
        let mut f = Self::new(map.target());
        for i in 0..d {
            for j in 0..d {
                f.gram.push(GramEntry { i, j, blocks: blocks_json(map.gram_entry(i, j)) });
            }
        }
        f
    }

    /// Rebuilds the map from the `gram` section. Every pair `(i, j)` of the
    /// inferred domain must appear exactly once.
    pub fn to_gram(&self) -> Result<SesquilinearMap> {
        let alg = self.algebra()?;
        let d = (self.gram.len() as f64).sqrt().round() as usize;
        if d == 0 || d * d != self.gram.len() {
            return Err(Error::Parse(format!("gram section has {} entries, not a square", self.gram.len())));
        }
        let mut slots: Vec<Option<AlgebraElement>> = vec![None; d * d];
        for e in &self.gram {
            if e.i >= d || e.j >= d || slots[e.i * d + e.j].is_some() {
                return Err(Error::Parse(format!("bad or repeated gram index ({}, {})", e.i, e.j)));
            }
            slots[e.i * d + e.j] = Some(element_from_json(&alg, &e.blocks)?);
        }
        SesquilinearMap::from_gram(&alg, d, slots.into_iter().map(Option::unwrap).collect())
    }

    pub fn push_superoperator(&mut self, name: impl Into<String>, l: &SuperOperator) -> Result<()> {
        if AlgebraSpec::of(l.target()) != self.algebra {
            return Err(Error::Structural("superoperator target differs from the file algebra".into()));
        }
        self.superoperators.push(SuperopEntry {
            name: name.into(),
            source: AlgebraSpec::of(l.source()),
            matrix: MatrixJson::of(l.matrix()),
        });
        Ok(())
    }

    pub fn superoperators(&self) -> Result<Vec<(String, SuperOperator)>> {
        let tgt = self.algebra()?;
        self.superoperators
            .iter()
            .map(|s| Ok((s.name.clone(), SuperOperator::new(&s.source.build()?, &tgt, s.matrix.to_matrix()?)?)))
            .collect()
    }

    fn check_finite(&self) -> Result<()> {
        let all_finite = self.elements.iter().flat_map(|e| &e.blocks).all(MatrixJson::is_finite)
            && self.gram.iter().flat_map(|e| &e.blocks).all(MatrixJson::is_finite)
            && self.superoperators.iter().all(|s| s.matrix.is_finite());
        if all_finite {
            Ok(())
        } else {
            Err(Error::Domain("matrix files hold finite numbers only".into()))
        }
    }

    pub fn to_json(&self) -> Result<String> {
        self.check_finite()?;
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        f.algebra()?;
        Ok(f)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&read_text(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_json()?)
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

/// Self-describing element: its algebra plus its blocks.
#[derive(Serialize, Deserialize)]
struct ElementRepr {
    algebra: AlgebraSpec,
    blocks: Vec<MatrixJson>,
}

impl Serialize for AlgebraElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ElementRepr { algebra: AlgebraSpec::of(self.algebra()), blocks: blocks_json(self) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgebraElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ElementRepr::deserialize(d)?;
        let alg = r.algebra.build().map_err(serde::de::Error::custom)?;
        element_from_json(&alg, &r.blocks).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for a dense complex matrix in the `{re, im}` layout.
pub mod cmat {
    use super::MatrixJson;
    use crate::linalg::CMat;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson::of(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        MatrixJson::deserialize(d)?.to_matrix().map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for a list of dense complex matrices.
pub mod cmat_vec {
    use super::MatrixJson;
    use crate::linalg::CMat;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(ms: &[CMat], s: S) -> Result<S::Ok, S::Error> {
        ms.iter().map(MatrixJson::of).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMat>, D::Error> {
        Vec::<MatrixJson>::deserialize(d)?
            .iter()
            .map(|m| m.to_matrix().map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Serde adapter for floats that may be infinite or NaN. Finite values are
/// plain JSON numbers (shortest round-trip form); the rest become the strings
/// `"inf"`, `"-inf"` and `"nan"`.
pub mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

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
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use crate::sesquilinear::{random_map, MapProfile};

    #[test]
    fn element_file_round_trip_is_bit_exact() {
        let alg = TracedAlgebra::new(vec![2, 1], vec![0.1, 3.0]).unwrap();
        let mut r = substream(1, 0);
        let x = AlgebraElement::random(&alg, &mut r).scale_real(1.0 / 3.0);
        let y = AlgebraElement::random_psd(&alg, &mut r);
        let f = MatrixFile::new(&alg).with_element("x", &x).unwrap().with_element("y", &y).unwrap();
        let back = MatrixFile::from_json(&f.to_json().unwrap()).unwrap();
        let got = back.element("x").unwrap();
        for (a, b) in got.blocks().iter().zip(x.blocks()) {
            for (u, v) in a.iter().zip(b.iter()) {
                assert_eq!(u.re.to_bits(), v.re.to_bits());
                assert_eq!(u.im.to_bits(), v.im.to_bits());
            }
        }
        assert_eq!(back.elements().unwrap()[1].1, y);
        assert!(back.element("z").is_err());
    }

    #[test]
    fn reads_the_documented_layout() {
        let text = r#"{"algebra":{"blocks":[2],"weights":[1.0]},
            "elements":[{"name":"T","blocks":[{"re":[[0,1],[0,0]],"im":[[0,0],[0,0]]}]}]}"#;
        let f = MatrixFile::from_json(text).unwrap();
        let t = f.element("T").unwrap();
        assert_eq!(t.block(0)[(0, 1)], Complex64::new(1.0, 0.0));
        assert_eq!(t.block(0)[(1, 0)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn malformed_files_are_rejected() {
        let ragged = r#"{"algebra":{"blocks":[2],"weights":[1.0]},
            "elements":[{"name":"T","blocks":[{"re":[[0,1],[0]],"im":[[0,0],[0,0]]}]}]}"#;
        assert!(MatrixFile::from_json(ragged).unwrap().element("T").is_err());
        let bad_weight = r#"{"algebra":{"blocks":[2],"weights":[-1.0]},"elements":[]}"#;
        assert!(MatrixFile::from_json(bad_weight).is_err());
        assert!(MatrixFile::from_json("{").is_err());
        let alg = TracedAlgebra::full(1);
        let nan = AlgebraElement::diag(&alg, &[f64::NAN]).unwrap();
        assert!(MatrixFile::new(&alg).with_element("n", &nan).unwrap().to_json().is_err());
    }

    #[test]
    fn gram_and_superoperator_sections_round_trip() {
        let alg = TracedAlgebra::new(vec![2, 1], vec![1.0, 0.5]).unwrap();
        let map = random_map(&MapProfile { dim: 3, target: alg.clone(), rank: 2, seed: 4 }).unwrap();
        let mut f = MatrixFile::from_gram(&map);
        let mut r = substream(2, 0);
        let l = SuperOperator::new(&TracedAlgebra::full(2), &alg, crate::rng::ginibre(&mut r, 5, 4)).unwrap();
        f.push_superoperator("L", &l).unwrap();
        let back = MatrixFile::from_json(&f.to_json().unwrap()).unwrap();
        let m = back.to_gram().unwrap();
        assert_eq!(m.gram(), map.gram());
        let (name, l2) = &back.superoperators().unwrap()[0];
        assert_eq!(name, "L");
        assert_eq!(l2.matrix(), l.matrix());
    }

    #[test]
    fn embedded_elements_serialize_self_described() {
        let alg = TracedAlgebra::full(2);
        let x = AlgebraElement::random(&alg, &mut substream(3, 0));
        let back: AlgebraElement = serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
        assert_eq!(back, x);
    }
}
