//! Trace-free symmetric 3×3 matrices and symmetric maps on that 5-dimensional space.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

pub type Vec3<T> = [T; 3];
pub type Mat3<T> = [[T; 3]; 3];

pub mod vec3 {
    use super::{Mat3, Vec3};
    use crate::scalar::{Real, Scalar};

    #[inline]
    pub fn dot<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> T {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }
    #[inline]
    pub fn add<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
        [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
    }
    #[inline]
    pub fn sub<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }
    #[inline]
    pub fn scale<T: Scalar>(a: &Vec3<T>, s: T) -> Vec3<T> {
        [a[0] * s, a[1] * s, a[2] * s]
    }
    #[inline]
    pub fn norm<T: Real>(a: &Vec3<T>) -> T {
        dot(a, a).sqrt()
    }
    #[inline]
    pub fn cross<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    }
    #[inline]
    pub fn mat_vec<T: Scalar>(m: &Mat3<T>, x: &Vec3<T>) -> Vec3<T> {
        [dot(&m[0], x), dot(&m[1], x), dot(&m[2], x)]
    }
    pub fn mat_mul<T: Scalar>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
        let mut c = [[T::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        c
    }
    pub fn transpose<T: Scalar>(a: &Mat3<T>) -> Mat3<T> {
        let mut t = *a;
        for i in 0..3 {
            for j in 0..3 {
                t[i][j] = a[j][i];
            }
        }
        t
    }
}

/// Symmetric 3×3 matrix with zero trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceFreeSym3<T: Scalar> {
    m: Mat3<T>,
}

impl<T: Scalar> TraceFreeSym3<T> {
    pub fn zero() -> Self {
        Self { m: [[T::zero(); 3]; 3] }
    }

    /// Diagonal `(d1, d2, -d1-d2)` plus the three upper off-diagonal entries.
    pub fn from_components(d1: T, d2: T, s12: T, s13: T, s23: T) -> Self {
        let d3 = -(d1 + d2);
        Self {
            m: [[d1, s12, s13], [s12, d2, s23], [s13, s23, d3]],
        }
    }

    /// Matrix with entries `(i,j)` and `(j,i)` equal to `v`, all others zero.
    pub fn offdiag(i: usize, j: usize, v: T) -> Self {
        assert!(i != j && i < 3 && j < 3, "offdiag needs distinct indices below 3");
        let mut m = [[T::zero(); 3]; 3];
        m[i][j] = v;
        m[j][i] = v;
        Self { m }
    }

    pub fn diag(a: T, b: T, c: T) -> Result<Self> {
        Self::try_from_matrix([[a, T::zero(), T::zero()], [T::zero(), b, T::zero()], [
            T::zero(),
            T::zero(),
            c,
        ]])
    }

    /// Accepts an exactly symmetric matrix whose trace is negligible.
    pub fn try_from_matrix(m: Mat3<T>) -> Result<Self> {
        for i in 0..3 {
            for j in 0..i {
                if m[i][j] != m[j][i] {
                    return Err(Error::Domain(format!(
                        "matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let tr = m[0][0] + m[1][1] + m[2][2];
        let scale = m.iter().flatten().fold(T::zero(), |acc, v| acc + v.abs());
        if tr != T::zero() && !tr.negligible_against(scale) {
            return Err(Error::Domain(format!("trace {tr:?} is not zero")));
        }
        Ok(Self { m })
    }

    #[inline]
    pub fn matrix(&self) -> &Mat3<T> {
        &self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.m[i][j]
    }

    /// `S x`.
    #[inline]
    pub fn apply(&self, x: &Vec3<T>) -> Vec3<T> {
        vec3::mat_vec(&self.m, x)
    }

    /// `S : x⊗x`.
    #[inline]
    pub fn quad(&self, x: &Vec3<T>) -> T {
        vec3::dot(x, &self.apply(x))
    }

    /// Frobenius inner product `S : S'`.
    pub fn ddot(&self, o: &Self) -> T {
        let mut s = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                s = s + self.m[i][j] * o.m[i][j];
            }
        }
        s
    }

    pub fn norm_sq(&self) -> T {
        self.ddot(self)
    }

    pub fn scale(&self, s: T) -> Self {
        let mut m = self.m;
        m.iter_mut().flatten().for_each(|v| *v = *v * s);
        Self { m }
    }
}

impl<T: Real> TraceFreeSym3<T> {
    /// Symmetrizes and removes the trace of an arbitrary matrix.
    pub fn project_matrix(a: &Mat3<T>) -> Self {
        let half = T::lit(0.5);
        let mut m = [[T::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = half * (a[i][j] + a[j][i]);
            }
        }
        let t = (m[0][0] + m[1][1] + m[2][2]) / T::lit(3.0);
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = row[i] - t;
        }
        Self { m }
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    /// Coordinates in the canonical orthonormal basis.
    pub fn project(&self) -> [T; 5] {
        let r2 = T::SQRT_2();
        let r6 = T::lit(6.0).sqrt();
        let m = &self.m;
        [
            (m[0][0] - m[1][1]) / r2,
            (m[0][0] + m[1][1] - m[2][2] - m[2][2]) / r6,
            r2 * m[0][1],
            r2 * m[0][2],
            r2 * m[1][2],
        ]
    }

    pub fn embed(v: &[T; 5]) -> Self {
        let r2 = T::SQRT_2();
        let r6 = T::lit(6.0).sqrt();
        let a = v[0] / r2;
        let b = v[1] / r6;
        let mut s = Self::from_components(a + b, b - a, v[2] / r2, v[3] / r2, v[4] / r2);
        // keep the diagonal exactly trace-free after rounding
        s.m[2][2] = -(s.m[0][0] + s.m[1][1]);
        s
    }

    /// `R S Rᵀ`.
    pub fn rotate(&self, r: &Mat3<T>) -> Self {
        let rs = vec3::mat_mul(r, &self.m);
        let rsr = vec3::mat_mul(&rs, &vec3::transpose(r));
        Self::project_matrix(&rsr)
    }
}

impl<T: Scalar> Add for TraceFreeSym3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut m = self.m;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = m[i][j] + o.m[i][j];
            }
        }
        Self { m }
    }
}

impl<T: Scalar> Sub for TraceFreeSym3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<T: Scalar> Neg for TraceFreeSym3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: Scalar> Mul<T> for TraceFreeSym3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

/// The fixed orthonormal basis `E1..E5`.
#[derive(Clone, Copy, Debug)]
pub struct OrthoBasis5<T: Scalar> {
    pub e: [TraceFreeSym3<T>; 5],
}

impl<T: Real> OrthoBasis5<T> {
    pub fn canonical() -> Self {
        let z = T::zero();
        let r2 = T::SQRT_2().recip();
        let r6 = T::lit(6.0).sqrt().recip();
        Self {
            e: [
                TraceFreeSym3::from_components(r2, -r2, z, z, z),
                TraceFreeSym3::from_components(r6, r6, z, z, z),
                TraceFreeSym3::offdiag(0, 1, r2),
                TraceFreeSym3::offdiag(0, 2, r2),
                TraceFreeSym3::offdiag(1, 2, r2),
            ],
        }
    }

    pub fn gram(&self) -> [[T; 5]; 5] {
        let mut g = [[T::zero(); 5]; 5];
        for a in 0..5 {
            for b in 0..5 {
                g[a][b] = self.e[a].ddot(&self.e[b]);
            }
        }
        g
    }
}

/// Symmetric linear map of the trace-free symmetric matrices, stored in the canonical basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViscosityTensor4<T: Real> {
    m: [[T; 5]; 5],
}

impl<T: Real> ViscosityTensor4<T> {
    pub fn zero() -> Self {
        Self { m: [[T::zero(); 5]; 5] }
    }

    pub fn identity() -> Self {
        Self::scaled_identity(T::one())
    }

    pub fn scaled_identity(s: T) -> Self {
        let mut m = [[T::zero(); 5]; 5];
        for (a, row) in m.iter_mut().enumerate() {
            row[a] = s;
        }
        Self { m }
    }

    /// Checked constructor: the matrix must be symmetric to 1e-14 relative.
    pub fn from_matrix5(m: [[T; 5]; 5]) -> Result<Self> {
        let scale = m
            .iter()
            .flatten()
            .fold(T::zero(), |acc, v| acc.max(v.abs()));
        for a in 0..5 {
            for b in 0..a {
                let d = m[a][b] - m[b][a];
                if d != T::zero() && d.abs().to_f64_lossy() > 1e-14 * scale.to_f64_lossy() {
                    return Err(Error::Domain(format!("matrix5 not symmetric at ({a},{b})")));
                }
            }
        }
        Ok(Self { m })
    }

    /// Builds the tensor from the upper triangle, mirroring it.
    pub fn from_upper(m: [[T; 5]; 5]) -> Self {
        let mut s = m;
        for a in 0..5 {
            for b in 0..a {
                s[a][b] = m[b][a];
            }
        }
        Self { m: s }
    }

    /// Tensor whose bilinear form is `f`, sampled on the canonical basis.
    pub fn from_bilinear<F>(f: F) -> Self
    where
        F: Fn(&TraceFreeSym3<T>, &TraceFreeSym3<T>) -> T,
    {
        let e = OrthoBasis5::<T>::canonical().e;
        let mut m = [[T::zero(); 5]; 5];
        for a in 0..5 {
            for b in a..5 {
                m[a][b] = f(&e[a], &e[b]);
            }
        }
        Self::from_upper(m)
    }

    /// Tensor from a quadratic form by polarization.
    pub fn from_quadratic<F>(q: F) -> Self
    where
        F: Fn(&TraceFreeSym3<T>) -> T,
    {
        let quarter = T::lit(0.25);
        Self::from_bilinear(|a, b| {
            if a == b {
                q(a)
            } else {
                quarter * (q(&(*a + *b)) - q(&(*a - *b)))
            }
        })
    }

    #[inline]
    pub fn matrix5(&self) -> &[[T; 5]; 5] {
        &self.m
    }

    /// `M S : S'`.
    pub fn contract(&self, s: &TraceFreeSym3<T>, sp: &TraceFreeSym3<T>) -> T {
        let u = s.project();
        let v = sp.project();
        let mut acc = T::zero();
        for a in 0..5 {
            for b in 0..5 {
                acc = acc + u[a] * self.m[a][b] * v[b];
            }
        }
        acc
    }

    pub fn apply(&self, s: &TraceFreeSym3<T>) -> TraceFreeSym3<T> {
        let u = s.project();
        let mut w = [T::zero(); 5];
        for a in 0..5 {
            for b in 0..5 {
                w[a] = w[a] + self.m[a][b] * u[b];
            }
        }
        TraceFreeSym3::embed(&w)
    }

    pub fn scale(&self, s: T) -> Self {
        let mut m = self.m;
        m.iter_mut().flatten().for_each(|v| *v = *v * s);
        Self { m }
    }

    pub fn max_abs(&self) -> T {
        self.m
            .iter()
            .flatten()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    pub fn frobenius(&self) -> T {
        self.m.iter().flatten().map(|v| *v * *v).sum::<T>().sqrt()
    }

    /// The action `S ↦ R M(Rᵀ S R) Rᵀ` of a rotation.
    pub fn rotate(&self, r: &Mat3<T>) -> Self {
        let rt = vec3::transpose(r);
        Self::from_bilinear(|a, b| self.contract(&a.rotate(&rt), &b.rotate(&rt)))
    }
}

impl<T: Real> Add for ViscosityTensor4<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut m = self.m;
        for a in 0..5 {
            for b in 0..5 {
                m[a][b] = m[a][b] + o.m[a][b];
            }
        }
        Self { m }
    }
}

impl<T: Real> Sub for ViscosityTensor4<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + o.scale(-T::one())
    }
}

#[derive(Serialize, Deserialize)]
struct Tensor4Json {
    basis: String,
    matrix5: Vec<Vec<f64>>,
}

pub const BASIS_ID: &str = "canonical-v1";

impl Serialize for ViscosityTensor4<f64> {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        Tensor4Json {
            basis: BASIS_ID.to_string(),
            matrix5: self.m.iter().map(|r| r.to_vec()).collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ViscosityTensor4<f64> {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = Tensor4Json::deserialize(de)?;
        if j.basis != BASIS_ID {
            return Err(D::Error::custom(format!("unknown basis {:?}", j.basis)));
        }
        if j.matrix5.len() != 5 || j.matrix5.iter().any(|r| r.len() != 5) {
            return Err(D::Error::custom("matrix5 must be 5x5"));
        }
        let mut m = [[0.0; 5]; 5];
        for a in 0..5 {
            m[a].copy_from_slice(&j.matrix5[a]);
        }
        ViscosityTensor4::from_matrix5(m).map_err(D::Error::custom)
    }
}

impl Serialize for TraceFreeSym3<f64> {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        self.m.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for TraceFreeSym3<f64> {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let m = <Mat3<f64>>::deserialize(de)?;
        TraceFreeSym3::try_from_matrix(m).map_err(D::Error::custom)
    }
}
