//! Native BLS12-381 kernels for `sealedbid`.
//!
//! Exposes the same surface as `sealedbid._purepy`: G1/G2 points written
//! additively, a Gt type (also additive), scalar multiplication by Python
//! ints reduced modulo the group order, windowed multi-scalar multiplication
//! and product-of-pairings checks. Encodings are the ZCash compressed format.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::OnceLock;

use bls12_381::{
    multi_miller_loop, G1Affine, G1Projective, G2Affine, G2Prepared, G2Projective, Gt as RawGt,
    Scalar,
};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Num;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyBytes;

const ORDER_HEX: &str = "73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001";

fn order() -> &'static BigInt {
    static ORDER: OnceLock<BigInt> = OnceLock::new();
    ORDER.get_or_init(|| BigInt::from_str_radix(ORDER_HEX, 16).unwrap())
}

/// Reduce a Python int modulo r and return the canonical little-endian bytes.
fn scalar_le(k: &BigInt) -> [u8; 32] {
    let (_, digits) = k.mod_floor(order()).to_bytes_le();
    let mut out = [0u8; 32];
    out[..digits.len()].copy_from_slice(&digits);
    out
}

fn to_scalar(k: &BigInt) -> Scalar {
    Scalar::from_bytes(&scalar_le(k)).unwrap()
}

fn fixed<const N: usize>(data: &[u8], what: &str) -> PyResult<[u8; N]> {
    data.try_into()
        .map_err(|_| PyValueError::new_err(format!("{what}: expected {N} bytes, got {}", data.len())))
}

macro_rules! group_class {
    ($Cls:ident, $pyname:literal, $Proj:ty, $Aff:ty, $clen:expr, $ulen:expr, $straus:ident) => {
        /// Variable-time Straus multi-scalar multiplication with 4-bit windows.
        fn $straus(points: &[$Proj], scalars: &[[u8; 32]]) -> $Proj {
            let n = points.len();
            if n == 0 {
                return <$Proj>::identity();
            }
            let mut table = Vec::with_capacity(n * 15);
            for p in points {
                let mut acc = *p;
                table.push(acc);
                for _ in 1..15 {
                    acc += p;
                    table.push(acc);
                }
            }
            let mut affine = vec![<$Aff>::identity(); table.len()];
            <$Proj>::batch_normalize(&table, &mut affine);

            let mut acc = <$Proj>::identity();
            let mut started = false;
            for byte in (0..32).rev() {
                for shift in [4u8, 0u8] {
                    if started {
                        for _ in 0..4 {
                            acc = acc.double();
                        }
                    }
                    for i in 0..n {
                        let nib = (scalars[i][byte] >> shift) & 0x0f;
                        if nib != 0 {
                            acc = acc.add_mixed(&affine[i * 15 + nib as usize - 1]);
                            started = true;
                        }
                    }
                }
            }
            acc
        }

        #[pyclass(frozen, skip_from_py_object, module = "sealedbid._native", name = $pyname)]
        #[derive(Clone)]
        pub struct $Cls {
            inner: $Proj,
        }

        impl $Cls {
            fn affine(&self) -> $Aff {
                <$Aff>::from(self.inner)
            }
        }

        #[pymethods]
        impl $Cls {
            #[staticmethod]
            fn generator() -> Self {
                $Cls { inner: <$Proj>::generator() }
            }

            #[staticmethod]
            fn identity() -> Self {
                $Cls { inner: <$Proj>::identity() }
            }

            /// Decode a compressed point, rejecting anything outside the prime-order subgroup.
            #[staticmethod]
            fn from_bytes(data: &[u8]) -> PyResult<Self> {
                let arr = fixed::<$clen>(data, "compressed point")?;
                Option::<$Aff>::from(<$Aff>::from_compressed(&arr))
                    .map(|a| $Cls { inner: <$Proj>::from(a) })
                    .ok_or_else(|| PyValueError::new_err("invalid or off-subgroup point encoding"))
            }

            /// Map an arbitrary curve point (uncompressed x||y, big-endian) into the subgroup.
            #[staticmethod]
            fn from_curve_point(data: &[u8]) -> PyResult<Self> {
                let arr = fixed::<$ulen>(data, "uncompressed point")?;
                let aff = Option::<$Aff>::from(<$Aff>::from_uncompressed_unchecked(&arr))
                    .ok_or_else(|| PyValueError::new_err("malformed coordinates"))?;
                if !bool::from(aff.is_on_curve()) {
                    return Err(PyValueError::new_err("point is not on the curve"));
                }
                Ok($Cls { inner: <$Proj>::from(aff).clear_cofactor() })
            }

            fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
                PyBytes::new(py, &self.affine().to_compressed())
            }

            fn is_identity(&self) -> bool {
                bool::from(self.inner.is_identity())
            }

            fn __add__(&self, other: &Self) -> Self {
                $Cls { inner: self.inner + other.inner }
            }

            fn __sub__(&self, other: &Self) -> Self {
                $Cls { inner: self.inner - other.inner }
            }

            fn __neg__(&self) -> Self {
                $Cls { inner: -self.inner }
            }

            fn __mul__(&self, k: BigInt) -> Self {
                $Cls { inner: $straus(&[self.inner], &[scalar_le(&k)]) }
            }

            fn __rmul__(&self, k: BigInt) -> Self {
                self.__mul__(k)
            }

            fn __eq__(&self, other: &Self) -> bool {
                self.inner == other.inner
            }

            fn __hash__(&self) -> u64 {
                let mut h = DefaultHasher::new();
                self.affine().to_compressed().hash(&mut h);
                h.finish()
            }

            fn __repr__(&self) -> String {
                let enc = self.affine().to_compressed();
                let hex: String = enc[..8].iter().map(|b| format!("{b:02x}")).collect();
                format!("{}({}...)", $pyname, hex)
            }

            /// Sum of points[i] * scalars[i].
            #[staticmethod]
            fn msm(points: Vec<PyRef<'_, $Cls>>, scalars: Vec<BigInt>) -> PyResult<Self> {
                if points.len() != scalars.len() {
                    return Err(PyValueError::new_err("points and scalars differ in length"));
                }
                let pts: Vec<$Proj> = points.iter().map(|p| p.inner).collect();
                let ks: Vec<[u8; 32]> = scalars.iter().map(scalar_le).collect();
                Ok($Cls { inner: $straus(&pts, &ks) })
            }
        }
    };
}

group_class!(G1, "G1", G1Projective, G1Affine, 48, 96, straus_g1);
group_class!(G2, "G2", G2Projective, G2Affine, 96, 192, straus_g2);

macro_rules! table_class {
    ($Tbl:ident, $pyname:literal, $Cls:ident, $Proj:ty, $Aff:ty) => {
        /// Fixed-base table: 64 windows of 4 bits, entries d * 16^w * P for d in 1..=15.
        #[pyclass(frozen, skip_from_py_object, module = "sealedbid._native", name = $pyname)]
        pub struct $Tbl {
            base: $Proj,
            table: Vec<$Aff>,
        }

        impl $Tbl {
            fn eval(&self, k: &[u8; 32]) -> $Proj {
                let mut acc = <$Proj>::identity();
                for w in 0..64 {
                    let nib = (k[w / 2] >> ((w % 2) * 4)) & 0x0f;
                    if nib != 0 {
                        acc = acc.add_mixed(&self.table[w * 15 + nib as usize - 1]);
                    }
                }
                acc
            }
        }

        #[pymethods]
        impl $Tbl {
            #[new]
            fn new(point: &$Cls) -> Self {
                let mut proj = Vec::with_capacity(64 * 15);
                let mut window_base = point.inner;
                for _ in 0..64 {
                    let mut acc = window_base;
                    proj.push(acc);
                    for _ in 1..15 {
                        acc += window_base;
                        proj.push(acc);
                    }
                    window_base = acc + window_base;
                }
                let mut table = vec![<$Aff>::identity(); proj.len()];
                <$Proj>::batch_normalize(&proj, &mut table);
                $Tbl { base: point.inner, table }
            }

            #[getter]
            fn point(&self) -> $Cls {
                $Cls { inner: self.base }
            }

            fn mul(&self, k: BigInt) -> $Cls {
                $Cls { inner: self.eval(&scalar_le(&k)) }
            }

            /// Sum of tables[i].point * scalars[i].
            #[staticmethod]
            fn msm(tables: Vec<PyRef<'_, $Tbl>>, scalars: Vec<BigInt>) -> PyResult<$Cls> {
                if tables.len() != scalars.len() {
                    return Err(PyValueError::new_err("tables and scalars differ in length"));
                }
                let mut acc = <$Proj>::identity();
                for (t, k) in tables.iter().zip(scalars.iter()) {
                    acc += t.eval(&scalar_le(k));
                }
                Ok($Cls { inner: acc })
            }
        }
    };
}

table_class!(G1Table, "G1Table", G1, G1Projective, G1Affine);
table_class!(G2Table, "G2Table", G2, G2Projective, G2Affine);

/// Target group element, written additively to match G1/G2.
#[pyclass(frozen, skip_from_py_object, module = "sealedbid._native", name = "Gt")]
#[derive(Clone)]
pub struct Gt {
    inner: RawGt,
}

#[pymethods]
impl Gt {
    #[staticmethod]
    fn identity() -> Self {
        Gt { inner: RawGt::identity() }
    }

    fn __add__(&self, other: &Self) -> Self {
        Gt { inner: self.inner + other.inner }
    }

    fn __sub__(&self, other: &Self) -> Self {
        Gt { inner: self.inner - other.inner }
    }

    fn __neg__(&self) -> Self {
        Gt { inner: -self.inner }
    }

    fn __mul__(&self, k: BigInt) -> Self {
        Gt { inner: self.inner * to_scalar(&k) }
    }

    fn __rmul__(&self, k: BigInt) -> Self {
        self.__mul__(k)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn is_identity(&self) -> bool {
        self.inner == RawGt::identity()
    }
}

#[pyfunction]
fn pairing(p: &G1, q: &G2) -> Gt {
    Gt { inner: bls12_381::pairing(&p.affine(), &q.affine()) }
}

/// True iff the product of e(P_i, Q_i) is the identity of Gt.
#[pyfunction]
fn pairing_check(pairs: Vec<(PyRef<'_, G1>, PyRef<'_, G2>)>) -> bool {
    let g1s: Vec<G1Affine> = pairs.iter().map(|(p, _)| p.affine()).collect();
    let g2s: Vec<G2Prepared> = pairs.iter().map(|(_, q)| G2Prepared::from(q.affine())).collect();
    let terms: Vec<(&G1Affine, &G2Prepared)> = g1s.iter().zip(g2s.iter()).collect();
    multi_miller_loop(&terms).final_exponentiation() == RawGt::identity()
}

#[pymodule]
fn _native(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NAME", "native")?;
    m.add_class::<G1>()?;
    m.add_class::<G2>()?;
    m.add_class::<Gt>()?;
    m.add_class::<G1Table>()?;
    m.add_class::<G2Table>()?;
    m.add_function(wrap_pyfunction!(pairing, m)?)?;
    m.add_function(wrap_pyfunction!(pairing_check, m)?)?;
    Ok(())
}
