use super::scf::run_rhf;
use super::{Eri, IntegralSet};
use crate::error::{Error, Result};
use crate::symmetry::{IrrepLabel, PointGroup};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Contracted Cartesian Gaussian shell; only l = 0 is supported.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contraction {
    pub l: u32,
    pub exponents: Vec<f64>,
    pub coefficients: Vec<f64>,
}

impl Contraction {
    pub fn s(exponents: &[f64], coefficients: &[f64]) -> Self {
        Contraction { l: 0, exponents: exponents.to_vec(), coefficients: coefficients.to_vec() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub charge: f64,
    pub position: [f64; 3],
    pub shells: Vec<Contraction>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisSet {
    pub atoms: Vec<Atom>,
    pub charge: i32,
}

/// Orbitals in which the integrals are expressed.
#[derive(Clone, Debug)]
pub enum OrbitalChoice {
    /// Canonical RHF orbitals.
    Rhf,
    /// Symmetric (Lowdin) orthogonalization of the basis.
    Symmetric,
    /// Explicit AO -> MO coefficients with their irreps.
    Rotation { coefficients: DMatrix<f64>, irreps: Vec<IrrepLabel>, point_group: PointGroup },
}

/// Boys function F0(x) = (1/2) sqrt(pi/x) erf(sqrt x).
pub fn boys_f0(x: f64) -> f64 {
    if x < 1e-6 {
        // F0(x) = sum_k (-x)^k / (k! (2k+1))
        1.0 - x / 3.0 + x * x / 10.0
    } else {
        0.5 * (PI / x).sqrt() * libm::erf(x.sqrt())
    }
}

#[derive(Clone, Copy, Debug)]
struct Primitive {
    alpha: f64,
    coef: f64,
    center: [f64; 3],
}

fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum()
}

fn product_center(a: &Primitive, b: &Primitive) -> [f64; 3] {
    let p = a.alpha + b.alpha;
    [0, 1, 2].map(|k| (a.alpha * a.center[k] + b.alpha * b.center[k]) / p)
}

fn overlap_prim(a: &Primitive, b: &Primitive) -> f64 {
    let p = a.alpha + b.alpha;
    let mu = a.alpha * b.alpha / p;
    (PI / p).powf(1.5) * (-mu * dist2(a.center, b.center)).exp()
}

fn kinetic_prim(a: &Primitive, b: &Primitive) -> f64 {
    let p = a.alpha + b.alpha;
    let mu = a.alpha * b.alpha / p;
    let r2 = dist2(a.center, b.center);
    mu * (3.0 - 2.0 * mu * r2) * overlap_prim(a, b)
}

fn nuclear_prim(a: &Primitive, b: &Primitive, c: [f64; 3], z: f64) -> f64 {
    let p = a.alpha + b.alpha;
    let mu = a.alpha * b.alpha / p;
    let pc = product_center(a, b);
    -z * 2.0 * PI / p * (-mu * dist2(a.center, b.center)).exp() * boys_f0(p * dist2(pc, c))
}

fn eri_prim(a: &Primitive, b: &Primitive, c: &Primitive, d: &Primitive) -> f64 {
    let p = a.alpha + b.alpha;
    let q = c.alpha + d.alpha;
    let kab = (-a.alpha * b.alpha / p * dist2(a.center, b.center)).exp();
    let kcd = (-c.alpha * d.alpha / q * dist2(c.center, d.center)).exp();
    let rpq = dist2(product_center(a, b), product_center(c, d));
    2.0 * PI.powf(2.5) / (p * q * (p + q).sqrt()) * kab * kcd * boys_f0(p * q / (p + q) * rpq)
}

/// Integrals over the contracted AO basis.
#[derive(Clone, Debug)]
pub struct AoIntegrals {
    pub overlap: DMatrix<f64>,
    pub kinetic: DMatrix<f64>,
    pub nuclear: DMatrix<f64>,
    pub eri: Eri,
    pub e_nuclear: f64,
}

impl BasisSet {
    pub fn n_functions(&self) -> usize {
        self.atoms.iter().map(|a| a.shells.len()).sum()
    }

    pub fn n_electrons(&self) -> Result<usize> {
        let z: f64 = self.atoms.iter().map(|a| a.charge).sum();
        let n = z.round() as i64 - self.charge as i64;
        if n < 0 {
            return Err(Error::Geometry(format!("charge {} leaves no electrons", self.charge)));
        }
        Ok(n as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_functions() == 0 {
            return Err(Error::UnsupportedBasis("no basis functions".into()));
        }
        for atom in &self.atoms {
            for sh in &atom.shells {
                if sh.l != 0 {
                    return Err(Error::UnsupportedBasis(format!("angular momentum l={} requested; only s shells are supported", sh.l)));
                }
                if sh.exponents.is_empty() || sh.exponents.len() != sh.coefficients.len() {
                    return Err(Error::UnsupportedBasis("exponent and coefficient lists differ".into()));
                }
                if sh.exponents.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
                    return Err(Error::UnsupportedBasis("exponents must be positive".into()));
                }
            }
            if atom.position.iter().any(|x| !x.is_finite()) {
                return Err(Error::Geometry("non-finite coordinate".into()));
            }
        }
        for (i, a) in self.atoms.iter().enumerate() {
            for b in &self.atoms[..i] {
                if dist2(a.position, b.position) < 1e-12 {
                    return Err(Error::Geometry(format!("coincident nuclei at {:?}", a.position)));
                }
            }
        }
        Ok(())
    }

    /// Normalized primitive expansions, one list per contracted function.
    fn functions(&self) -> Vec<Vec<Primitive>> {
        let mut out = Vec::new();
        for atom in &self.atoms {
            for sh in &atom.shells {
                let mut prims: Vec<Primitive> = sh
                    .exponents
                    .iter()
                    .zip(&sh.coefficients)
                    .map(|(&alpha, &c)| Primitive { alpha, coef: c * (2.0 * alpha / PI).powf(0.75), center: atom.position })
                    .collect();
                let mut norm = 0.0;
                for a in &prims {
                    for b in &prims {
                        norm += a.coef * b.coef * overlap_prim(a, b);
                    }
                }
                let s = norm.sqrt().recip();
                for p in &mut prims {
                    p.coef *= s;
                }
                out.push(prims);
            }
        }
        out
    }

    pub fn ao_integrals(&self) -> Result<AoIntegrals> {
        self.validate()?;
        let f = self.functions();
        let n = f.len();
        let pair = |a: &[Primitive], b: &[Primitive], k: &dyn Fn(&Primitive, &Primitive) -> f64| -> f64 {
            let mut s = 0.0;
            for pa in a {
                for pb in b {
                    s += pa.coef * pb.coef * k(pa, pb);
                }
            }
            s
        };
        let mut overlap = DMatrix::zeros(n, n);
        let mut kinetic = DMatrix::zeros(n, n);
        let mut nuclear = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let s = pair(&f[i], &f[j], &overlap_prim);
                let t = pair(&f[i], &f[j], &kinetic_prim);
                let v: f64 = self
                    .atoms
                    .iter()
                    .map(|at| pair(&f[i], &f[j], &|a, b| nuclear_prim(a, b, at.position, at.charge)))
                    .sum();
                for (m, val) in [(&mut overlap, s), (&mut kinetic, t), (&mut nuclear, v)] {
                    m[(i, j)] = val;
                    m[(j, i)] = val;
                }
            }
        }
        let mut eri = Eri::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                for k in 0..=i {
                    let lmax = if k == i { j } else { k };
                    for l in 0..=lmax {
                        let mut v = 0.0;
                        for a in &f[i] {
                            for b in &f[j] {
                                for c in &f[k] {
                                    for d in &f[l] {
                                        v += a.coef * b.coef * c.coef * d.coef * eri_prim(a, b, c, d);
                                    }
                                }
                            }
                        }
                        eri.set(i, j, k, l, v);
                    }
                }
            }
        }
        let mut e_nuclear = 0.0;
        for (i, a) in self.atoms.iter().enumerate() {
            for b in &self.atoms[..i] {
                e_nuclear += a.charge * b.charge / dist2(a.position, b.position).sqrt();
            }
        }
        Ok(AoIntegrals { overlap, kinetic, nuclear, eri, e_nuclear })
    }
}

/// AO -> MO transformation of a symmetric one-body matrix and the ERIs.
pub(crate) fn transform(ao: &AoIntegrals, c: &DMatrix<f64>) -> (DMatrix<f64>, Eri) {
    let hcore = &ao.kinetic + &ao.nuclear;
    let h = c.transpose() * hcore * c;
    let n = ao.eri.n();
    let m = c.ncols();
    // four quarter transformations
    let mut cur: Vec<f64> = (0..n * n * n * n)
        .map(|idx| {
            let (p, r) = (idx / (n * n * n), idx % (n * n * n));
            let (q, r) = (r / (n * n), r % (n * n));
            let (s1, s2) = (r / n, r % n);
            ao.eri.get(p, q, s1, s2)
        })
        .collect();
    let mut dims = [n, n, n, n];
    for axis in 0..4 {
        let mut next_dims = dims;
        next_dims[axis] = m;
        let total: usize = next_dims.iter().product();
        let mut next = vec![0.0; total];
        let stride = |d: &[usize; 4], ax: usize| -> usize { d[ax + 1..].iter().product() };
        let (so, sn) = (stride(&dims, axis), stride(&next_dims, axis));
        let outer: usize = dims[..axis].iter().product();
        let inner = so;
        for o in 0..outer {
            for mu in 0..dims[axis] {
                let src_base = o * dims[axis] * so + mu * so;
                for p in 0..m {
                    let cp = c[(mu, p)];
                    if cp == 0.0 {
                        continue;
                    }
                    let dst_base = o * m * sn + p * sn;
                    for k in 0..inner {
                        next[dst_base + k] += cp * cur[src_base + k];
                    }
                }
            }
        }
        cur = next;
        dims = next_dims;
    }
    let mut eri = Eri::zeros(m);
    eri.raw_mut().copy_from_slice(&cur);
    (h, eri)
}

fn lowdin(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = nalgebra::SymmetricEigen::new(s.clone());
    if eig.eigenvalues.iter().any(|&v| v < 1e-10) {
        return Err(Error::Geometry("basis is numerically linearly dependent".into()));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.sqrt().recip()));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// One- and two-electron integrals over an orthonormal orbital set.
pub fn build_s_integrals(basis: &BasisSet, choice: &OrbitalChoice) -> Result<IntegralSet> {
    let ao = basis.ao_integrals()?;
    let n_electrons = basis.n_electrons()?;
    let (c, irreps, point_group) = match choice {
        OrbitalChoice::Rhf => {
            let rhf = run_rhf(basis)?;
            (rhf.coefficients, rhf.irreps, rhf.point_group)
        }
        OrbitalChoice::Symmetric => {
            let n = ao.overlap.nrows();
            (lowdin(&ao.overlap)?, vec![IrrepLabel::SYMMETRIC; n], PointGroup::C1)
        }
        OrbitalChoice::Rotation { coefficients, irreps, point_group } => {
            let n = ao.overlap.nrows();
            if coefficients.nrows() != n || irreps.len() != coefficients.ncols() {
                return Err(Error::Dimension(format!(
                    "rotation is {}x{} with {} irreps for {n} basis functions",
                    coefficients.nrows(),
                    coefficients.ncols(),
                    irreps.len()
                )));
            }
            let metric = coefficients.transpose() * &ao.overlap * coefficients;
            let defect = (&metric - DMatrix::identity(metric.nrows(), metric.ncols())).amax();
            if defect > 1e-8 {
                return Err(Error::Contract(format!("rotation is not orthonormal in the AO metric (defect {defect:e})")));
            }
            (coefficients.clone(), irreps.clone(), *point_group)
        }
    };
    let (h, eri) = transform(&ao, &c);
    Ok(IntegralSet {
        n_orbitals: c.ncols(),
        n_electrons,
        ms2: 0,
        e_nuclear: ao.e_nuclear,
        h,
        eri,
        orbital_irreps: irreps,
        point_group,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sto3g_h(pos: [f64; 3]) -> Atom {
        Atom {
            charge: 1.0,
            position: pos,
            shells: vec![Contraction::s(&[3.42525091, 0.62391373, 0.16885540], &[0.15432897, 0.53532814, 0.44463454])],
        }
    }

    #[test]
    fn boys_limits_and_continuity() {
        assert!((boys_f0(0.0) - 1.0).abs() < 1e-15);
        // branch switch is smooth
        assert!((boys_f0(1e-6 * (1.0 - 1e-9)) - boys_f0(1e-6 * (1.0 + 1e-9))).abs() < 1e-12);
        // large-x asymptote sqrt(pi/x)/2
        assert!((boys_f0(50.0) - 0.5 * (PI / 50.0).sqrt()).abs() < 1e-14);
        // reference value F0(1) = 0.746824132812427
        assert!((boys_f0(1.0) - 0.746824132812427).abs() < 1e-13);
    }

    #[test]
    fn sto3g_h2_reference_integrals() {
        // H2 at 1.4 bohr, standard STO-3G AO values
        let basis = BasisSet { atoms: vec![sto3g_h([0.0; 3]), sto3g_h([0.0, 0.0, 1.4])], charge: 0 };
        let ao = basis.ao_integrals().unwrap();
        assert!((ao.overlap[(0, 1)] - 0.6593).abs() < 1e-4);
        assert!((ao.kinetic[(0, 0)] - 0.7600).abs() < 1e-4);
        assert!((ao.kinetic[(0, 1)] - 0.2365).abs() < 1e-4);
        assert!((ao.nuclear[(0, 0)] - (-1.8804)).abs() < 1e-4);
        assert!((ao.eri.get(0, 0, 0, 0) - 0.7746).abs() < 1e-4);
        assert!((ao.eri.get(0, 0, 1, 1) - 0.5697).abs() < 1e-4);
        assert!((ao.eri.get(1, 0, 0, 0) - 0.4441).abs() < 1e-4);
        assert!((ao.eri.get(1, 0, 1, 0) - 0.2970).abs() < 1e-4);
        assert!((ao.e_nuclear - 1.0 / 1.4).abs() < 1e-15);
    }

    #[test]
    fn non_s_shell_is_rejected() {
        let mut atom = sto3g_h([0.0; 3]);
        atom.shells[0].l = 1;
        let basis = BasisSet { atoms: vec![atom], charge: 0 };
        assert!(matches!(basis.ao_integrals(), Err(Error::UnsupportedBasis(_))));
    }

    #[test]
    fn coincident_nuclei_are_rejected() {
        let basis = BasisSet { atoms: vec![sto3g_h([0.0; 3]), sto3g_h([0.0; 3])], charge: 0 };
        assert!(matches!(basis.ao_integrals(), Err(Error::Geometry(_))));
    }

    #[test]
    fn symmetric_orbitals_are_orthonormal() {
        let basis = BasisSet {
            atoms: vec![sto3g_h([0.0; 3]), sto3g_h([0.0, 0.0, 1.4]), sto3g_h([0.0, 1.3, 0.4])],
            charge: 1,
        };
        let ints = build_s_integrals(&basis, &OrbitalChoice::Symmetric).unwrap();
        assert_eq!(ints.n_electrons, 2);
        assert!((&ints.h - ints.h.transpose()).amax() < 1e-14);
        let eri = &ints.eri;
        assert!((eri.get(0, 1, 2, 0) - eri.get(2, 0, 1, 0)).abs() < 1e-14);
    }

    #[test]
    fn mo_transform_matches_direct_contraction() {
        let basis = BasisSet { atoms: vec![sto3g_h([0.0; 3]), sto3g_h([0.0, 0.0, 1.4]), sto3g_h([1.0, 0.3, 0.0])], charge: 1 };
        let ao = basis.ao_integrals().unwrap();
        let c = DMatrix::from_fn(3, 3, |i, j| ((i * 3 + j) as f64 * 0.37).sin());
        let (_, eri) = transform(&ao, &c);
        let (p, q, r, s) = (0, 2, 1, 1);
        let mut direct = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                for cc in 0..3 {
                    for d in 0..3 {
                        direct += c[(a, p)] * c[(b, q)] * c[(cc, r)] * c[(d, s)] * ao.eri.get(a, b, cc, d);
                    }
                }
            }
        }
        assert!((eri.get(p, q, r, s) - direct).abs() < 1e-13);
    }
}
