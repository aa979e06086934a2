//! Subspace expansion over {psi0, r_I psi0}: generalized eigenproblem
//! H D = E S D with second-order screening of triples.

use crate::emulator::Emulator;
use crate::error::{Error, Result};
use crate::fermion::Excitation;
use crate::linalg::{generalized_eigen, GeneralizedEigen};
use crate::pauli::spin_squared_operator;
use crate::qeom::{
    nearest_spin, screen_triples, IndicatorKind, RootSelector, ScreenMode, ScreeningReport, TripleIndicator,
    Tracking, Variant, VariantResult, DEGENERATE_TOL, IMAGINARY_TOL,
};
use crate::state::{Sector, SectorOperator};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default canonical-orthogonalization threshold.
pub const LINDEP: f64 = 1e-8;

/// r psi on the sector, acting determinant by determinant.
pub fn apply_excitation(e: &Excitation, sector: &Sector, psi: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
    for (k, &b) in sector.states().iter().enumerate() {
        if psi[k] == Complex64::new(0.0, 0.0) {
            continue;
        }
        if let Some((s, t)) = e.apply(b) {
            let j = sector.index_of(t).ok_or_else(|| Error::Contract(format!("{e} leaves the sector")))?;
            out[j] += psi[k] * s;
        }
    }
    Ok(out)
}

/// Expansion basis with its overlap and Hamiltonian matrices.
pub struct QseBlock {
    /// None marks the ground state itself (r = 1).
    pub members: Vec<Option<Excitation>>,
    pub s: DMatrix<f64>,
    pub h: DMatrix<f64>,
    states: Vec<Vec<Complex64>>,
    s2: SectorOperator,
}

fn real(z: Complex64, what: &str) -> Result<f64> {
    if z.im.abs() > IMAGINARY_TOL {
        return Err(Error::Contract(format!("{what} has imaginary part {:e}", z.im)));
    }
    Ok(z.re)
}

impl QseBlock {
    /// S_IJ = <psi0| r_I+ r_J |psi0>, H_IJ = <psi0| r_I+ H r_J |psi0>.
    pub fn build(
        emu: &Emulator,
        psi0: &[Complex64],
        include_ground: bool,
        excitations: Vec<Excitation>,
    ) -> Result<Self> {
        let mut members: Vec<Option<Excitation>> = Vec::new();
        let mut states = Vec::new();
        if include_ground {
            members.push(None);
            states.push(psi0.to_vec());
        }
        for e in excitations {
            states.push(apply_excitation(&e, &emu.sector, psi0)?);
            members.push(Some(e));
        }
        let n = states.len();
        let hs: Vec<Vec<Complex64>> = states.iter().map(|v| emu.hamiltonian.apply(v)).collect();
        let mut s = DMatrix::zeros(n, n);
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let sij = real(crate::state::dot(&states[i], &states[j]), "S element")?;
                let hij = real(crate::state::dot(&states[i], &hs[j]), "H element")?;
                s[(i, j)] = sij;
                s[(j, i)] = sij;
                h[(i, j)] = hij;
                h[(j, i)] = real(crate::state::dot(&states[j], &hs[i]), "H element")?;
            }
        }
        let s2 = emu.compile(&spin_squared_operator(emu.n_qubits())?)?;
        Ok(QseBlock { members, s, h, states, s2 })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn has_ground(&self) -> bool {
        matches!(self.members.first(), Some(None))
    }

    /// Rank of each member, 0 for the ground state.
    pub fn ranks(&self) -> Vec<usize> {
        self.members.iter().map(|m| m.as_ref().map_or(0, |e| e.rank())).collect()
    }

    pub fn sub(&self, indices: &[usize]) -> (DMatrix<f64>, DMatrix<f64>) {
        let pick = |m: &DMatrix<f64>| DMatrix::from_fn(indices.len(), indices.len(), |a, b| m[(indices[a], indices[b])]);
        (pick(&self.h), pick(&self.s))
    }

    pub fn spin_squared(&self, indices: &[usize], d: &[f64]) -> f64 {
        let mut v = vec![Complex64::new(0.0, 0.0); self.states[0].len()];
        for (&i, &c) in indices.iter().zip(d) {
            for (a, b) in v.iter_mut().zip(&self.states[i]) {
                *a += b * c;
            }
        }
        let n: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        self.s2.quadratic(&v).re / n
    }
}

pub fn solve_generalized(h: &DMatrix<f64>, s: &DMatrix<f64>, lindep: f64) -> Result<GeneralizedEigen> {
    generalized_eigen(h, s, lindep, 1e-10)
}

/// Per-triple intermediates of the second-order energy.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QseTerm {
    pub index: usize,
    pub excitation: String,
    /// D_m+ H' D_i
    pub a: f64,
    /// D_m+ S' D_i
    pub b: f64,
    pub e_i: f64,
    /// Signed second-order contribution; F is its magnitude.
    pub term: f64,
    pub degenerate: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QseScreeningReport {
    pub terms: Vec<QseTerm>,
    /// D_m+ S' D_m
    pub c_mm: f64,
    pub first_order: f64,
    /// Sum of the per-triple terms.
    pub second_order: f64,
    /// The same energy from the assembled first-order vector.
    pub second_order_from_vector: f64,
    pub ranking: ScreeningReport,
}

/// Zeroth-order root of the ground + singles/doubles problem.
#[derive(Clone, Debug)]
pub struct QseZeroth {
    pub energy: f64,
    /// S-normalized coefficients over the full basis, zero on triples.
    pub d: Vec<f64>,
}

fn partition(m: &DMatrix<f64>, ranks: &[usize]) -> (DMatrix<f64>, DMatrix<f64>) {
    crate::qeom::partition_m(m, ranks)
}

pub fn qse_importance(block: &QseBlock, root: &QseZeroth) -> QseScreeningReport {
    let ranks = block.ranks();
    let (h0, hp) = partition(&block.h, &ranks);
    let (s0, sp) = partition(&block.s, &ranks);
    let dm = DVector::from_column_slice(&root.d);
    let em = root.energy;
    let hd = &hp * &dm;
    let sd = &sp * &dm;
    let c_mm = dm.dot(&sd);
    let first_order = dm.dot(&hd) - em * c_mm;
    if first_order.abs() > 1e-10 {
        log::warn!("first-order QSE energy {first_order:e} is not zero");
    }
    let mut terms = Vec::new();
    let mut d1 = DVector::zeros(block.len());
    for i in (0..ranks.len()).filter(|&i| ranks[i] == 3) {
        let norm = s0[(i, i)].sqrt();
        let a = hd[i] / norm;
        let b = sd[i] / norm;
        let e_i = h0[(i, i)] / s0[(i, i)];
        let label = block.members[i].as_ref().map(|e| e.label()).unwrap_or_default();
        let r = a - em * b;
        let denom = em - e_i;
        if denom.abs() < DEGENERATE_TOL || norm == 0.0 {
            terms.push(QseTerm { index: i, excitation: label, a, b, e_i, term: f64::INFINITY, degenerate: true });
        } else {
            d1[i] = r / denom / norm;
            terms.push(QseTerm { index: i, excitation: label, a, b, e_i, term: r * r / denom, degenerate: false });
        }
    }
    let second_order = terms.iter().filter(|t| !t.degenerate).map(|t| t.term).sum();
    let second_order_from_vector = dm.dot(&(&hp * &d1)) - em * dm.dot(&(&sp * &d1));
    let entries = terms
        .iter()
        .map(|t| TripleIndicator { index: t.index, excitation: t.excitation.clone(), w: t.term, degenerate: t.degenerate })
        .collect::<Vec<_>>();
    let mut sorted = entries;
    sorted.sort_by(|a, b| b.magnitude().total_cmp(&a.magnitude()).then(a.index.cmp(&b.index)));
    let warnings = sorted
        .iter()
        .filter(|e| e.degenerate)
        .map(|e| format!("degenerate denominator for {}; always selected", e.excitation))
        .collect();
    let ranking = ScreeningReport {
        kind: IndicatorKind::RayleighSchroedinger,
        entries: sorted,
        first_order,
        second_order,
        warnings,
    };
    QseScreeningReport { terms, c_mm, first_order, second_order, second_order_from_vector, ranking }
}

/// E = E' + sum of signed discarded terms.
pub fn qse_correction(energy: f64, discarded: &[f64]) -> f64 {
    energy + discarded.iter().sum::<f64>()
}

#[derive(Clone, Debug)]
pub struct QseSettings {
    pub root: RootSelector,
    pub tracking: Tracking,
    pub screen: ScreenMode,
    pub lindep: f64,
}

impl Default for QseSettings {
    fn default() -> Self {
        QseSettings { root: RootSelector::default(), tracking: Tracking::Overlap, screen: ScreenMode::Coverage(0.9), lindep: LINDEP }
    }
}

#[derive(Clone, Debug)]
pub struct QseSolved {
    pub indices: Vec<usize>,
    pub eigen: GeneralizedEigen,
    pub ground: Option<usize>,
}

/// Solves the expansion at each level and follows one excited root.
pub struct QseRun<'b> {
    pub block: &'b QseBlock,
    pub settings: QseSettings,
    /// Energy used as the ground state when the block lacks psi0.
    pub fallback_ground: f64,
    pub sd: QseSolved,
    pub target: usize,
    pub zeroth: QseZeroth,
    pub warnings: Vec<String>,
}

impl<'b> QseRun<'b> {
    pub fn new(block: &'b QseBlock, settings: QseSettings, fallback_ground: f64) -> Result<Self> {
        let ranks = block.ranks();
        let sd_idx: Vec<usize> = (0..ranks.len()).filter(|&i| ranks[i] < 3).collect();
        let sd = Self::solve_indices(block, &sd_idx, settings.lindep)?;
        let target = Self::ordinal_root(block, &sd, settings.root)?;
        let mut d = vec![0.0; ranks.len()];
        for (r, &i) in sd_idx.iter().enumerate() {
            d[i] = sd.eigen.vectors[(r, target)];
        }
        let zeroth = QseZeroth { energy: sd.eigen.values[target], d };
        Ok(QseRun { block, settings, fallback_ground, sd, target, zeroth, warnings: Vec::new() })
    }

    fn solve_indices(block: &QseBlock, indices: &[usize], lindep: f64) -> Result<QseSolved> {
        let (h, s) = block.sub(indices);
        let eigen = solve_generalized(&h, &s, lindep)?;
        let ground = if block.has_ground() && indices.first() == Some(&0) {
            let overlaps: Vec<f64> = (0..eigen.values.len())
                .map(|k| (s.row(0) * eigen.vectors.column(k))[(0, 0)].abs())
                .collect();
            let mut g = 0;
            for k in 1..overlaps.len() {
                if overlaps[k] > overlaps[g] + 1e-12 {
                    g = k;
                }
            }
            Some(g)
        } else {
            None
        };
        Ok(QseSolved { indices: indices.to_vec(), eigen, ground })
    }

    fn ordinal_root(block: &QseBlock, solved: &QseSolved, selector: RootSelector) -> Result<usize> {
        if selector.ordinal == 0 {
            return Err(Error::Parameter("root ordinal is 1-based".into()));
        }
        let mut seen = 0;
        for k in 0..solved.eigen.values.len() {
            if Some(k) == solved.ground {
                continue;
            }
            let ok = match selector.spin {
                None => true,
                Some(s) => nearest_spin(block.spin_squared(&solved.indices, solved.eigen.vectors.column(k).as_slice())) == s,
            };
            if ok {
                seen += 1;
                if seen == selector.ordinal {
                    return Ok(k);
                }
            }
        }
        Err(Error::Parameter(format!("expansion has fewer than {} excited roots of the requested spin", selector.ordinal)))
    }

    fn ground_energy(&self, solved: &QseSolved) -> f64 {
        solved.ground.map_or(self.fallback_ground, |g| solved.eigen.values[g])
    }

    pub fn sd_result(&self) -> VariantResult {
        let e = self.zeroth.energy;
        VariantResult {
            variant: Variant::Sd,
            omega: e - self.ground_energy(&self.sd),
            energy: e,
            n_triples: 0,
            dimension: self.sd.indices.len(),
            root: self.target,
            overlap: None,
            spin_squared: self.block.spin_squared(&self.sd.indices, self.sd.eigen.vectors.column(self.target).as_slice()),
        }
    }

    pub fn ground_of_sd(&self) -> f64 {
        self.ground_energy(&self.sd)
    }

    pub fn triples(&self) -> Vec<usize> {
        self.block.ranks().iter().enumerate().filter(|(_, &r)| r == 3).map(|(i, _)| i).collect()
    }

    pub fn screening_report(&self) -> QseScreeningReport {
        qse_importance(self.block, &self.zeroth)
    }

    pub fn solve_with(&mut self, triples: &[usize], variant: Variant) -> Result<(VariantResult, QseSolved)> {
        let mut keep = triples.to_vec();
        keep.sort_unstable();
        let mut indices = self.sd.indices.clone();
        indices.extend(keep);
        let solved = Self::solve_indices(self.block, &indices, self.settings.lindep)?;
        let (root, overlap) = match self.settings.tracking {
            Tracking::Overlap => {
                // <Phi_ref|Phi_k> in the S metric; Phi_ref lives on the leading rows
                let n_sd = self.sd.indices.len();
                let (_, s) = self.block.sub(&indices);
                let mut best = (usize::MAX, -1.0);
                for k in 0..solved.eigen.values.len() {
                    if Some(k) == solved.ground {
                        continue;
                    }
                    let mut o = 0.0;
                    for r in 0..n_sd {
                        let dr = self.sd.eigen.vectors[(r, self.target)];
                        for c in 0..indices.len() {
                            o += dr * s[(r, c)] * solved.eigen.vectors[(c, k)];
                        }
                    }
                    if o.abs() > best.1 + 1e-12 {
                        best = (k, o.abs());
                    }
                }
                if best.0 == usize::MAX {
                    return Err(Error::Parameter("no excited root to track".into()));
                }
                if best.1 < 0.5 {
                    let w = format!("QSE {}: tracked root overlap {:.3} below 0.5", variant.name(), best.1);
                    log::warn!("{w}");
                    self.warnings.push(w);
                }
                (best.0, Some(best.1))
            }
            Tracking::Ordinal => (Self::ordinal_root(self.block, &solved, self.settings.root)?, None),
        };
        let e = solved.eigen.values[root];
        let result = VariantResult {
            variant,
            omega: e - self.ground_energy(&solved),
            energy: e,
            n_triples: triples.len(),
            dimension: indices.len(),
            root,
            overlap,
            spin_squared: self.block.spin_squared(&indices, solved.eigen.vectors.column(root).as_slice()),
        };
        Ok((result, solved))
    }

    pub fn screened(&mut self, report: &QseScreeningReport) -> Result<(VariantResult, VariantResult, Vec<usize>)> {
        let selected = screen_triples(&report.ranking, self.settings.screen)?;
        let (sdt, _) = self.solve_with(&selected, Variant::SdtScreened)?;
        let chosen: std::collections::HashSet<usize> = selected.iter().copied().collect();
        let discarded: Vec<f64> =
            report.terms.iter().filter(|t| !chosen.contains(&t.index) && !t.degenerate).map(|t| t.term).collect();
        let mut paren = sdt.clone();
        paren.variant = Variant::SdParenT;
        paren.energy = qse_correction(sdt.energy, &discarded);
        paren.omega = sdt.omega + (paren.energy - sdt.energy);
        Ok((sdt, paren, selected))
    }
}
