//! Equation-of-motion over excitations rotated by the ground-state ansatz:
//! M_IJ = <HF| r_I+ (U+ H U - E0) r_J |HF>, with perturbative triples screening.

use crate::emulator::{CompiledAnsatz, Emulator};
use crate::error::{Error, Result};
use crate::fermion::{enumerate_excitations, Excitation};
use crate::hamiltonian::MolecularHamiltonian;
use crate::linalg::{symmetric_eigen, Eigen};
use crate::pauli::{jordan_wigner, spin_squared_operator};
use crate::state::{apply_exp_generator, apply_pauli_sum, SectorOperator, Statevector};
use crate::symmetry::IrrepLabel;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Largest imaginary part tolerated in a matrix element.
pub const IMAGINARY_TOL: f64 = 1e-10;
/// Reference-energy mismatch that marks an ansatz as stale.
pub const STALE_TOL: f64 = 1e-8;
/// Denominators below this are treated as degenerate.
pub const DEGENERATE_TOL: f64 = 1e-10;

/// S_z-conserving excitations of ranks 1..=max_rank whose product with the
/// reference irrep is `target`, rank-major then lexicographic.
pub fn build_basis(mh: &MolecularHamiltonian, target: IrrepLabel, max_rank: usize) -> Vec<Excitation> {
    let wanted = target ^ mh.determinant_irrep(mh.hf_bits());
    let reference = mh.reference_space();
    (1..=max_rank)
        .flat_map(|k| enumerate_excitations(k, &reference, &mh.so_irreps, true, Some(wanted)))
        .collect()
}

/// The same manifold without the irrep filter.
pub fn full_manifold(mh: &MolecularHamiltonian, max_rank: usize) -> Vec<Excitation> {
    let reference = mh.reference_space();
    (1..=max_rank).flat_map(|k| enumerate_excitations(k, &reference, &mh.so_irreps, true, None)).collect()
}

/// U+ (H - E0) U on the sector, plus what is needed to classify roots by spin.
pub struct Hbar<'a> {
    pub emu: &'a Emulator,
    pub ansatz: &'a CompiledAnsatz,
    pub e0: f64,
    s2: SectorOperator,
}

impl<'a> Hbar<'a> {
    /// Fails with a stale-ansatz error when `e0` is not the ansatz energy.
    pub fn new(emu: &'a Emulator, ansatz: &'a CompiledAnsatz, e0: f64) -> Result<Self> {
        let evaluated = emu.energy(&ansatz.apply(&emu.reference_vector()));
        if (evaluated - e0).abs() > STALE_TOL {
            return Err(Error::StaleAnsatz { supplied: e0, evaluated });
        }
        let s2 = emu.compile(&spin_squared_operator(emu.n_qubits())?)?;
        Ok(Hbar { emu, ansatz, e0, s2 })
    }

    /// U+ H U v
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let u = self.ansatz.apply(v);
        self.ansatz.apply_adjoint(&self.emu.hamiltonian.apply(&u))
    }

    /// <S^2> of U v.
    pub fn spin_squared(&self, v: &[Complex64]) -> f64 {
        let u = self.ansatz.apply(v);
        let n: f64 = u.iter().map(|x| x.norm_sqr()).sum();
        self.s2.quadratic(&u).re / n
    }

    pub fn spin_squared_of_state(&self, u: &[Complex64]) -> f64 {
        let n: f64 = u.iter().map(|x| x.norm_sqr()).sum();
        self.s2.quadratic(u).re / n
    }
}

fn real(z: Complex64, what: &str) -> Result<f64> {
    if z.im.abs() > IMAGINARY_TOL {
        return Err(Error::Contract(format!("{what} has imaginary part {:e}", z.im)));
    }
    Ok(z.re)
}

pub enum ElementSet {
    All,
    /// Singles/doubles columns and triple diagonals only.
    ScreeningSubset,
}

/// Excitation basis with lazily built columns of M.
pub struct QeomBlock<'h, 'a> {
    hbar: &'h Hbar<'a>,
    pub irrep: Option<IrrepLabel>,
    pub excitations: Vec<Excitation>,
    signs: Vec<f64>,
    slots: Vec<usize>,
    columns: Vec<Option<Vec<f64>>>,
    diagonal: Vec<Option<f64>>,
}

impl<'h, 'a> QeomBlock<'h, 'a> {
    pub fn new(hbar: &'h Hbar<'a>, irrep: Option<IrrepLabel>, excitations: Vec<Excitation>) -> Result<Self> {
        let sector = &hbar.emu.sector;
        let mut signs = Vec::with_capacity(excitations.len());
        let mut slots = Vec::with_capacity(excitations.len());
        for e in &excitations {
            let (s, d) = e
                .apply(hbar.emu.reference_bits)
                .ok_or_else(|| Error::Contract(format!("{e} annihilates the reference")))?;
            let slot = sector.index_of(d).ok_or_else(|| Error::Contract(format!("{e} leaves the sector")))?;
            signs.push(s);
            slots.push(slot);
        }
        let n = excitations.len();
        Ok(QeomBlock { hbar, irrep, excitations, signs, slots, columns: vec![None; n], diagonal: vec![None; n] })
    }

    pub fn len(&self) -> usize {
        self.excitations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.excitations.is_empty()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.excitations.iter().map(|e| e.rank()).collect()
    }

    pub fn e0(&self) -> f64 {
        self.hbar.e0
    }

    /// Sector vector sum_J c_J r_J |HF>.
    pub fn combine(&self, coeffs: &[(usize, f64)]) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); self.hbar.emu.sector.dim()];
        for &(j, c) in coeffs {
            v[self.slots[j]] += c * self.signs[j];
        }
        v
    }

    fn column(&mut self, j: usize) -> Result<&[f64]> {
        if self.columns[j].is_none() {
            let w = self.hbar.apply(&self.combine(&[(j, 1.0)]));
            let mut col = Vec::with_capacity(self.len());
            for i in 0..self.len() {
                col.push(self.signs[i] * real(w[self.slots[i]], "M element")?);
            }
            col[j] -= self.hbar.e0;
            self.diagonal[j] = Some(col[j]);
            self.columns[j] = Some(col);
        }
        Ok(self.columns[j].as_deref().unwrap())
    }

    /// M_JJ through <U D_J| H |U D_J>, without forming the column.
    pub fn diagonal_element(&mut self, j: usize) -> Result<f64> {
        if let Some(d) = self.diagonal[j] {
            return Ok(d);
        }
        let u = self.hbar.ansatz.apply(&self.combine(&[(j, 1.0)]));
        let d = real(self.hbar.emu.hamiltonian.quadratic(&u), "M diagonal")? - self.hbar.e0;
        self.diagonal[j] = Some(d);
        Ok(d)
    }

    /// M restricted to `indices`, in that order.
    pub fn matrix(&mut self, indices: &[usize]) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(indices.len(), indices.len());
        for (b, &j) in indices.iter().enumerate() {
            let col = self.column(j)?;
            for (a, &i) in indices.iter().enumerate() {
                m[(a, b)] = col[i];
            }
        }
        Ok(m)
    }

    pub fn build_m(&mut self, set: ElementSet) -> Result<DMatrix<f64>> {
        let n = self.len();
        match set {
            ElementSet::All => self.matrix(&(0..n).collect::<Vec<_>>()),
            ElementSet::ScreeningSubset => {
                let mut m = DMatrix::zeros(n, n);
                let ranks = self.ranks();
                for j in 0..n {
                    if ranks[j] < 3 {
                        let col = self.column(j)?.to_vec();
                        for i in 0..n {
                            m[(i, j)] = col[i];
                            if ranks[i] == 3 {
                                m[(j, i)] = col[i];
                            }
                        }
                    } else {
                        m[(j, j)] = self.diagonal_element(j)?;
                    }
                }
                Ok(m)
            }
        }
    }

    pub fn spin_squared(&self, indices: &[usize], gamma: &[f64]) -> f64 {
        let coeffs: Vec<(usize, f64)> = indices.iter().copied().zip(gamma.iter().copied()).collect();
        self.hbar.spin_squared(&self.combine(&coeffs))
    }

    /// U+ H U applied to sum_J c_J r_J|HF>, read back on the triples
    /// (numerators of the closed-form indicator).
    fn coupling_to(&self, coeffs: &[(usize, f64)], rows: &[usize]) -> Result<Vec<f64>> {
        let w = self.hbar.apply(&self.combine(coeffs));
        rows.iter().map(|&i| real(w[self.slots[i]], "coupling").map(|x| x * self.signs[i])).collect()
    }
}

/// ||U r_I+ |HF>|| for each excitation, on the full register.
pub fn killer_residuals(
    excitations: &[Excitation],
    generators: &[crate::pauli::PauliSum],
    parameters: &[f64],
    reference_bits: u64,
    n_qubits: usize,
) -> Result<Vec<f64>> {
    let hf = Statevector::basis_state(n_qubits, reference_bits)?;
    excitations
        .iter()
        .map(|e| {
            let down = jordan_wigner(&e.operator().adjoint(), n_qubits)?;
            let mut psi = apply_pauli_sum(&down, &hf)?;
            for (g, &t) in generators.iter().zip(parameters) {
                psi = apply_exp_generator(g, t, &psi)?;
            }
            Ok(psi.norm())
        })
        .collect()
}

/// M = M0 + M': M' holds every off-diagonal element touching a triple.
pub fn partition_m(m: &DMatrix<f64>, ranks: &[usize]) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut m0 = m.clone();
    let mut mp = DMatrix::zeros(m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j && (ranks[i] == 3 || ranks[j] == 3) {
                mp[(i, j)] = m[(i, j)];
                m0[(i, j)] = 0.0;
            }
        }
    }
    (m0, mp)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum IndicatorKind {
    #[default]
    RayleighSchroedinger,
    DiagonalClosedForm,
}

impl std::str::FromStr for IndicatorKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rs" | "rayleigh-schroedinger" => Ok(IndicatorKind::RayleighSchroedinger),
            "diagonal" | "closed-form" | "diagonal-closed-form" => Ok(IndicatorKind::DiagonalClosedForm),
            other => Err(format!("unknown indicator '{other}'")),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TripleIndicator {
    /// Position in the block basis.
    pub index: usize,
    pub excitation: String,
    /// Signed second-order contribution; +inf marks a degenerate denominator.
    pub w: f64,
    pub degenerate: bool,
}

impl TripleIndicator {
    pub fn magnitude(&self) -> f64 {
        self.w.abs()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScreeningReport {
    pub kind: IndicatorKind,
    /// Sorted by |W| descending, ties in basis order.
    pub entries: Vec<TripleIndicator>,
    pub first_order: f64,
    pub second_order: f64,
    pub warnings: Vec<String>,
}

impl ScreeningReport {
    fn from_entries(kind: IndicatorKind, mut entries: Vec<TripleIndicator>, first_order: f64) -> Self {
        entries.sort_by(|a, b| b.magnitude().total_cmp(&a.magnitude()).then(a.index.cmp(&b.index)));
        let second_order = entries.iter().filter(|e| !e.degenerate).map(|e| e.w).sum();
        let warnings = entries
            .iter()
            .filter(|e| e.degenerate)
            .map(|e| format!("degenerate denominator for {}; always selected", e.excitation))
            .collect::<Vec<_>>();
        for w in &warnings {
            log::warn!("{w}");
        }
        ScreeningReport { kind, entries, first_order, second_order, warnings }
    }

    /// (k, cumulative |W| fraction) over finite entries.
    pub fn coverage_curve(&self) -> Vec<(usize, f64)> {
        let finite: Vec<f64> = self.entries.iter().filter(|e| !e.degenerate).map(|e| e.magnitude()).collect();
        let total: f64 = finite.iter().sum();
        let mut acc = 0.0;
        let mut out = vec![(0, 0.0)];
        for (k, w) in finite.iter().enumerate() {
            acc += w;
            out.push((k + 1, if total > 0.0 { acc / total } else { 1.0 }));
        }
        out
    }
}

fn indicator(index: usize, e: &Excitation, numerator: f64, denominator: f64) -> TripleIndicator {
    if denominator.abs() < DEGENERATE_TOL {
        TripleIndicator { index, excitation: e.label(), w: f64::INFINITY, degenerate: true }
    } else {
        TripleIndicator { index, excitation: e.label(), w: numerator / denominator, degenerate: false }
    }
}

/// Zeroth-order root of the singles/doubles block embedded in the basis.
#[derive(Clone, Debug)]
pub struct ZerothOrder {
    pub omega: f64,
    /// Coefficients over the full basis; zero on triples.
    pub gamma: Vec<f64>,
}

/// Indicators from the M0/M' partition of `m` (full or screening subset).
pub fn indicators_rs(m: &DMatrix<f64>, block: &QeomBlock, root: &ZerothOrder) -> ScreeningReport {
    let ranks = block.ranks();
    let (m0, mp) = partition_m(m, &ranks);
    let g = DVector::from_column_slice(&root.gamma);
    let coupled = &mp * &g;
    let first_order = g.dot(&coupled);
    let entries = (0..ranks.len())
        .filter(|&i| ranks[i] == 3)
        .map(|i| indicator(i, &block.excitations[i], coupled[i] * coupled[i], root.omega - m0[(i, i)]))
        .collect();
    ScreeningReport::from_entries(IndicatorKind::RayleighSchroedinger, entries, first_order)
}

/// Indicators from <HF| r_I+ Hbar |psi_m> and <HF| r_I+ Hbar r_I |HF>.
pub fn indicators_closed_form(block: &mut QeomBlock, root: &ZerothOrder) -> Result<ScreeningReport> {
    let ranks = block.ranks();
    let triples: Vec<usize> = (0..ranks.len()).filter(|&i| ranks[i] == 3).collect();
    let coeffs: Vec<(usize, f64)> =
        root.gamma.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(j, &c)| (j, c)).collect();
    let numerators = block.coupling_to(&coeffs, &triples)?;
    let mut entries = Vec::with_capacity(triples.len());
    for (k, &i) in triples.iter().enumerate() {
        let d = block.diagonal_element(i)?;
        entries.push(indicator(i, &block.excitations[i], numerators[k] * numerators[k], root.omega - d));
    }
    Ok(ScreeningReport::from_entries(IndicatorKind::DiagonalClosedForm, entries, 0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ScreenMode {
    Coverage(f64),
    Threshold(f64),
    TopK(usize),
}

/// Basis indices of retained triples, in ranking order.
pub fn screen_triples(report: &ScreeningReport, mode: ScreenMode) -> Result<Vec<usize>> {
    let e = &report.entries;
    let n = match mode {
        ScreenMode::Coverage(f) => {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::Parameter(format!("coverage fraction {f} outside (0, 1]")));
            }
            if f == 1.0 {
                e.len()
            } else {
                let total: f64 = e.iter().filter(|x| !x.degenerate).map(|x| x.magnitude()).sum();
                let mut acc = 0.0;
                let mut k = 0;
                while k < e.len() && (e[k].degenerate || acc < f * total) {
                    if !e[k].degenerate {
                        acc += e[k].magnitude();
                    }
                    k += 1;
                }
                k
            }
        }
        ScreenMode::Threshold(eps) => {
            if eps.is_nan() {
                return Err(Error::Parameter("threshold is NaN".into()));
            }
            if eps <= 0.0 {
                e.len()
            } else {
                e.iter().take_while(|x| x.magnitude() > eps).count()
            }
        }
        ScreenMode::TopK(k) => k.min(e.len()),
    };
    Ok(e[..n].iter().map(|x| x.index).collect())
}

/// omega = omega' + sum of signed W over discarded triples.
pub fn perturbative_correction(omega: f64, discarded: &[f64]) -> f64 {
    omega + discarded.iter().sum::<f64>()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Tracking {
    #[default]
    Overlap,
    Ordinal,
}

impl std::str::FromStr for Tracking {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "overlap" => Ok(Tracking::Overlap),
            "ordinal" => Ok(Tracking::Ordinal),
            other => Err(format!("unknown root tracking '{other}'")),
        }
    }
}

/// Which root of a block is the target: the `ordinal`-th (1-based) root
/// whose spin rounds to `spin`, or any spin when `spin` is None.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootSelector {
    pub ordinal: usize,
    pub spin: Option<f64>,
}

impl Default for RootSelector {
    fn default() -> Self {
        RootSelector { ordinal: 1, spin: Some(0.0) }
    }
}

/// Total spin S whose S(S+1) is nearest to `s2`, in half-integer steps.
pub fn nearest_spin(s2: f64) -> f64 {
    let s = (-1.0 + (1.0 + 4.0 * s2.max(0.0)).sqrt()) / 2.0;
    (2.0 * s).round() / 2.0
}

/// Index of the selected root, walking roots upwards and classifying spin
/// with `spin_of` only as needed.
pub fn select_ordinal<F: FnMut(usize) -> f64>(n_roots: usize, selector: RootSelector, mut spin_of: F) -> Result<usize> {
    if selector.ordinal == 0 {
        return Err(Error::Parameter("root ordinal is 1-based".into()));
    }
    let mut seen = 0;
    for k in 0..n_roots {
        let ok = match selector.spin {
            None => true,
            Some(s) => nearest_spin(spin_of(k)) == s,
        };
        if ok {
            seen += 1;
            if seen == selector.ordinal {
                return Ok(k);
            }
        }
    }
    Err(Error::Parameter(format!("block has fewer than {} roots of the requested spin", selector.ordinal)))
}

/// Root whose components on `reference` overlap most; returns (root, |overlap|).
pub fn select_overlap(vectors: &DMatrix<f64>, positions: &[(usize, usize)], reference: &[f64]) -> (usize, f64) {
    let norm = reference.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut best = (0, -1.0);
    for k in 0..vectors.ncols() {
        let o: f64 = positions.iter().map(|&(row, r)| vectors[(row, k)] * reference[r]).sum::<f64>().abs() / norm;
        if o > best.1 + 1e-12 {
            best = (k, o);
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    Sd,
    Sdt,
    SdtScreened,
    SdParenT,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Sd => "sd",
            Variant::Sdt => "sdt",
            Variant::SdtScreened => "sdt-screened",
            Variant::SdParenT => "sd-paren-t",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sd" => Ok(Variant::Sd),
            "sdt" => Ok(Variant::Sdt),
            "sdt-screened" | "sdt_screened" | "sdt-star" => Ok(Variant::SdtScreened),
            "sd-paren-t" | "sd(t)" | "sd_paren_t" => Ok(Variant::SdParenT),
            other => Err(format!("unknown variant '{other}'")),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VariantResult {
    pub variant: Variant,
    /// Excitation energy, hartree.
    pub omega: f64,
    pub energy: f64,
    pub n_triples: usize,
    pub dimension: usize,
    pub root: usize,
    pub overlap: Option<f64>,
    pub spin_squared: f64,
}

#[derive(Clone, Debug)]
pub struct QeomSettings {
    pub root: RootSelector,
    pub tracking: Tracking,
    pub indicator: IndicatorKind,
    pub screen: ScreenMode,
}

impl Default for QeomSettings {
    fn default() -> Self {
        QeomSettings {
            root: RootSelector::default(),
            tracking: Tracking::Overlap,
            indicator: IndicatorKind::RayleighSchroedinger,
            screen: ScreenMode::Coverage(0.9),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Solved {
    pub indices: Vec<usize>,
    pub eigen: Eigen,
}

/// Solves the block at every requested level and follows one root between them.
pub struct QeomRun<'b, 'h, 'a> {
    pub block: &'b mut QeomBlock<'h, 'a>,
    pub settings: QeomSettings,
    pub sd: Solved,
    pub target: usize,
    pub zeroth: ZerothOrder,
    pub warnings: Vec<String>,
}

impl<'b, 'h, 'a> QeomRun<'b, 'h, 'a> {
    pub fn new(block: &'b mut QeomBlock<'h, 'a>, settings: QeomSettings) -> Result<Self> {
        let ranks = block.ranks();
        let sd_idx: Vec<usize> = (0..ranks.len()).filter(|&i| ranks[i] < 3).collect();
        if sd_idx.is_empty() {
            return Err(Error::Parameter("block has no singles or doubles".into()));
        }
        let m = block.matrix(&sd_idx)?;
        let eigen = symmetric_eigen(&m, 1e-10)?;
        let target = {
            let vecs = &eigen.vectors;
            let b: &QeomBlock = block;
            select_ordinal(eigen.values.len(), settings.root, |k| {
                b.spin_squared(&sd_idx, vecs.column(k).as_slice())
            })?
        };
        let mut gamma = vec![0.0; ranks.len()];
        for (r, &i) in sd_idx.iter().enumerate() {
            gamma[i] = eigen.vectors[(r, target)];
        }
        let zeroth = ZerothOrder { omega: eigen.values[target], gamma };
        Ok(QeomRun { block, settings, sd: Solved { indices: sd_idx, eigen }, target, zeroth, warnings: Vec::new() })
    }

    pub fn sd_result(&self) -> VariantResult {
        let spin = self.block.spin_squared(&self.sd.indices, self.sd.eigen.vectors.column(self.target).as_slice());
        VariantResult {
            variant: Variant::Sd,
            omega: self.zeroth.omega,
            energy: self.block.e0() + self.zeroth.omega,
            n_triples: 0,
            dimension: self.sd.indices.len(),
            root: self.target,
            overlap: None,
            spin_squared: spin,
        }
    }

    pub fn triples(&self) -> Vec<usize> {
        (0..self.block.len()).filter(|&i| self.block.excitations[i].rank() == 3).collect()
    }

    /// Indicators with the configured kind, from the cheapest element set.
    pub fn screening_report(&mut self) -> Result<ScreeningReport> {
        match self.settings.indicator {
            IndicatorKind::RayleighSchroedinger => {
                let m = self.block.build_m(ElementSet::ScreeningSubset)?;
                Ok(indicators_rs(&m, self.block, &self.zeroth))
            }
            IndicatorKind::DiagonalClosedForm => indicators_closed_form(self.block, &self.zeroth),
        }
    }

    /// Diagonalize singles, doubles and `triples` (kept in basis order) and
    /// pick the tracked root.
    pub fn solve_with(&mut self, triples: &[usize], variant: Variant) -> Result<(VariantResult, Solved)> {
        let mut keep = triples.to_vec();
        keep.sort_unstable();
        let mut indices = self.sd.indices.clone();
        indices.extend(keep);
        let m = self.block.matrix(&indices)?;
        let eigen = symmetric_eigen(&m, 1e-10)?;
        let (root, overlap) = match self.settings.tracking {
            Tracking::Overlap => {
                let positions: Vec<(usize, usize)> = (0..self.sd.indices.len()).map(|r| (r, r)).collect();
                let reference: Vec<f64> = self.sd.eigen.vectors.column(self.target).iter().copied().collect();
                let (k, o) = select_overlap(&eigen.vectors, &positions, &reference);
                if o < 0.5 {
                    let w = format!("{}: tracked root overlap {o:.3} below 0.5", variant.name());
                    log::warn!("{w}");
                    self.warnings.push(w);
                }
                (k, Some(o))
            }
            Tracking::Ordinal => {
                let b: &QeomBlock = self.block;
                let vecs = &eigen.vectors;
                let root = select_ordinal(eigen.values.len(), self.settings.root, |k| {
                    b.spin_squared(&indices, vecs.column(k).as_slice())
                })?;
                (root, None)
            }
        };
        let spin = self.block.spin_squared(&indices, eigen.vectors.column(root).as_slice());
        let result = VariantResult {
            variant,
            omega: eigen.values[root],
            energy: self.block.e0() + eigen.values[root],
            n_triples: triples.len(),
            dimension: indices.len(),
            root,
            overlap,
            spin_squared: spin,
        };
        Ok((result, Solved { indices, eigen }))
    }

    /// Screened solve and its perturbative completion.
    pub fn screened(&mut self, report: &ScreeningReport) -> Result<(VariantResult, VariantResult, Vec<usize>)> {
        let selected = screen_triples(report, self.settings.screen)?;
        let (sdt, _) = self.solve_with(&selected, Variant::SdtScreened)?;
        let chosen: std::collections::HashSet<usize> = selected.iter().copied().collect();
        let discarded: Vec<f64> =
            report.entries.iter().filter(|e| !chosen.contains(&e.index) && !e.degenerate).map(|e| e.w).collect();
        let mut paren = sdt.clone();
        paren.variant = Variant::SdParenT;
        paren.omega = perturbative_correction(sdt.omega, &discarded);
        paren.energy = self.block.e0() + paren.omega;
        Ok((sdt, paren, selected))
    }

    /// Tracked excitation energy after adding the top-k ranked triples, for
    /// each k in `ks`.
    pub fn rediagonalized_curve(&mut self, report: &ScreeningReport, ks: &[usize]) -> Result<Vec<(usize, f64)>> {
        let ranked: Vec<usize> = report.entries.iter().map(|e| e.index).collect();
        let mut out = Vec::with_capacity(ks.len());
        for &k in ks {
            let k = k.min(ranked.len());
            let (r, _) = self.solve_with(&ranked[..k], Variant::SdtScreened)?;
            out.push((k, r.omega));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fci::slater_condon;
    use crate::hamiltonian::{assemble, build_s_integrals, h8_basis, parse_layout, OrbitalChoice};
    use crate::symmetry::IrrepLabel;

    fn h4() -> MolecularHamiltonian {
        let layout = parse_layout("H 1.0 1.6 0 0 0 0\nH -1.0 1.6 0 0 0 0\nH 1.0 -1.6 0 0 0 0\nH -1.0 -1.6 0 0 0 0\n").unwrap();
        let ints = build_s_integrals(&h8_basis(0.0, &layout).unwrap(), &OrbitalChoice::Rhf).unwrap();
        assemble(&ints, &[], None).unwrap()
    }

    fn identity_ansatz() -> CompiledAnsatz {
        CompiledAnsatz { generators: Vec::new(), parameters: Vec::new() }
    }

    #[test]
    fn identity_ansatz_gives_ci_matrix() {
        let mh = h4();
        let emu = Emulator::new(&mh.to_pauli().unwrap(), mh.hf_bits()).unwrap();
        let ansatz = identity_ansatz();
        let e0 = emu.energy(&emu.reference_vector());
        let hbar = Hbar::new(&emu, &ansatz, e0).unwrap();
        let basis = full_manifold(&mh, 3);
        let dets: Vec<(f64, u64)> = basis.iter().map(|e| e.apply(mh.hf_bits()).unwrap()).collect();
        let mut block = QeomBlock::new(&hbar, None, basis).unwrap();
        let m = block.build_m(ElementSet::All).unwrap();
        for i in 0..dets.len() {
            for j in 0..dets.len() {
                let sc = dets[i].0 * dets[j].0 * slater_condon(&mh, dets[i].1, dets[j].1) - if i == j { e0 } else { 0.0 };
                assert!((m[(i, j)] - sc).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn stale_energy_is_refused() {
        let mh = h4();
        let emu = Emulator::new(&mh.to_pauli().unwrap(), mh.hf_bits()).unwrap();
        let ansatz = identity_ansatz();
        let e0 = emu.energy(&emu.reference_vector());
        assert!(matches!(Hbar::new(&emu, &ansatz, e0 + 1e-6), Err(Error::StaleAnsatz { .. })));
    }

    #[test]
    fn partition_reassembles() {
        let m = DMatrix::from_fn(5, 5, |i, j| (i * 7 + j * 3) as f64 * 0.1 + if i == j { 1.0 } else { 0.0 });
        let ranks = [1, 2, 3, 3, 2];
        let (m0, mp) = partition_m(&m, &ranks);
        assert_eq!(&m0 + &mp, m);
        for i in 0..5 {
            assert_eq!(mp[(i, i)], 0.0);
        }
        assert_eq!(mp[(0, 1)], 0.0);
        let (_, none) = partition_m(&m, &[1, 1, 2, 2, 2]);
        assert!(none.iter().all(|x| *x == 0.0));
    }

    fn report(ws: &[f64]) -> ScreeningReport {
        let e = Excitation { annihilations: vec![0, 1, 2], creations: vec![3, 4, 5], irrep: IrrepLabel::SYMMETRIC };
        let entries = ws.iter().enumerate().map(|(i, &w)| indicator(i, &e, w, 1.0)).collect();
        ScreeningReport::from_entries(IndicatorKind::RayleighSchroedinger, entries, 0.0)
    }

    #[test]
    fn screening_modes() {
        let r = report(&[-0.1, -0.5, 0.0, -0.3, -0.1]);
        assert_eq!(r.entries[0].index, 1);
        assert_eq!(screen_triples(&r, ScreenMode::Coverage(1.0)).unwrap().len(), 5);
        assert_eq!(screen_triples(&r, ScreenMode::Coverage(0.5)).unwrap(), vec![1]);
        assert_eq!(screen_triples(&r, ScreenMode::Coverage(0.8)).unwrap(), vec![1, 3]);
        assert_eq!(screen_triples(&r, ScreenMode::Threshold(0.0)).unwrap().len(), 5);
        assert_eq!(screen_triples(&r, ScreenMode::Threshold(f64::INFINITY)).unwrap().len(), 0);
        assert_eq!(screen_triples(&r, ScreenMode::Threshold(0.1)).unwrap(), vec![1, 3]);
        assert_eq!(screen_triples(&r, ScreenMode::TopK(3)).unwrap(), vec![1, 3, 0]);
        assert!(screen_triples(&r, ScreenMode::Coverage(0.0)).is_err());
        assert!(screen_triples(&r, ScreenMode::Coverage(1.5)).is_err());
        let curve = r.coverage_curve();
        assert!(curve.windows(2).all(|w| w[1].1 >= w[0].1));
        assert!((curve.last().unwrap().1 - 1.0).abs() < 1e-15);
        assert_eq!(perturbative_correction(0.4, &[]), 0.4);
    }

    #[test]
    fn degenerate_denominator_is_flagged_and_kept() {
        let e = Excitation { annihilations: vec![0, 1, 2], creations: vec![3, 4, 5], irrep: IrrepLabel::SYMMETRIC };
        let mut entries = vec![indicator(0, &e, 0.2, 1.0), indicator(1, &e, 0.3, 0.0)];
        entries.push(indicator(2, &e, 0.0, 2.0));
        let r = ScreeningReport::from_entries(IndicatorKind::RayleighSchroedinger, entries, 0.0);
        assert!(r.entries[0].degenerate && r.entries[0].w == f64::INFINITY);
        assert_eq!(r.warnings.len(), 1);
        assert_eq!(screen_triples(&r, ScreenMode::Coverage(0.1)).unwrap(), vec![1, 0]);
        assert_eq!(r.entries[2].w, 0.0);
    }

    #[test]
    fn spin_classification() {
        assert_eq!(nearest_spin(0.01), 0.0);
        assert_eq!(nearest_spin(1.95), 1.0);
        assert_eq!(nearest_spin(0.76), 0.5);
        let spins = [2.0, 0.0, 2.0, 0.0];
        let sel = RootSelector { ordinal: 2, spin: Some(0.0) };
        assert_eq!(select_ordinal(4, sel, |k| spins[k]).unwrap(), 3);
        assert!(select_ordinal(4, RootSelector { ordinal: 3, spin: Some(0.0) }, |k| spins[k]).is_err());
    }
}
