//! End-to-end runs: integrals, ADAPT ground state, excited-state variants,
//! the exact oracle, and the records written for each run.

use crate::adapt::{run_adapt, AdaptAnsatz, AdaptReport, AdaptSettings};
use crate::config::{Method, RunConfig, SystemSource};
use crate::emulator::{CompiledAnsatz, Emulator};
use crate::error::{Error, Result};
use crate::fci::fci_roots;
use crate::fermion::count_excitations;
use crate::hamiltonian::{
    assemble, build_s_integrals, h2_basis, h8_basis, parse_fcidump, parse_layout, IntegralSet, MolecularHamiltonian,
    OrbitalChoice, H8_LAYOUT,
};
use crate::qeom::{
    build_basis, indicators_closed_form, indicators_rs, nearest_spin, ElementSet, Hbar, QeomBlock, QeomRun,
    QeomSettings, RootSelector, ScreenMode, ScreeningReport, Variant, VariantResult,
};
use crate::qse::{QseBlock, QseRun, QseSettings};
use crate::symmetry::{IrrepLabel, PointGroup};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::path::Path;
use std::time::Instant;

pub const SCHEMA_VERSION: u32 = 1;
pub const HARTREE_TO_EV: f64 = 27.211386245988;

pub struct System {
    pub ints: IntegralSet,
    pub mh: MolecularHamiltonian,
    pub description: String,
}

pub fn load_integrals(source: &SystemSource, point_group: Option<PointGroup>) -> Result<(IntegralSet, String)> {
    match source {
        SystemSource::Fcidump(p) => {
            let text = std::fs::read_to_string(p)?;
            Ok((parse_fcidump(&text, point_group)?, format!("fcidump {}", p.display())))
        }
        SystemSource::H8 { b, layout } => {
            let text = match layout {
                Some(p) => std::fs::read_to_string(p)?,
                None => H8_LAYOUT.to_string(),
            };
            let basis = h8_basis(*b, &parse_layout(&text)?)?;
            Ok((build_s_integrals(&basis, &OrbitalChoice::Rhf)?, format!("builtin h8 b={b}")))
        }
        SystemSource::H2 { r } => {
            Ok((build_s_integrals(&h2_basis(*r)?, &OrbitalChoice::Rhf)?, format!("builtin h2 r={r}")))
        }
    }
}

pub fn load_system(c: &RunConfig) -> Result<System> {
    let (ints, description) = load_integrals(&c.source, c.point_group)?;
    let mh = assemble(&ints, &c.frozen, c.active.as_deref())?;
    Ok(System { ints, mh, description })
}

/// Target irrep by name or number in the system's point group.
pub fn resolve_irrep(mh: &MolecularHamiltonian, name: &str) -> Result<IrrepLabel> {
    mh.point_group
        .label_from_name(name)
        .filter(|l| mh.point_group.contains(*l))
        .ok_or_else(|| Error::Config(format!("irrep '{name}' is not in {}", mh.point_group)))
}

pub struct Ground {
    pub emu: Emulator,
    pub ansatz: AdaptAnsatz,
    pub compiled: CompiledAnsatz,
    pub report: AdaptReport,
    pub e_hf: f64,
    pub e_vqe: f64,
}

pub fn run_ground(mh: &MolecularHamiltonian, settings: &AdaptSettings) -> Result<Ground> {
    let emu = Emulator::new(&mh.to_pauli()?, mh.hf_bits())?;
    let e_hf = emu.energy(&emu.reference_vector());
    let (ansatz, report) = run_adapt(mh, &emu, settings)?;
    let compiled = ansatz.compile(&emu)?;
    let e_vqe = emu.energy(&compiled.apply(&emu.reference_vector()));
    Ok(Ground { emu, ansatz, compiled, report, e_hf, e_vqe })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleRecord {
    pub ground: f64,
    pub target: f64,
    pub gap: f64,
    pub ground_spin_squared: f64,
    pub target_spin_squared: f64,
    pub sector_dimension: usize,
}

/// Exact ground state and the selected excited root of the target irrep.
pub fn oracle(mh: &MolecularHamiltonian, target: IrrepLabel, selector: RootSelector) -> Result<OracleRecord> {
    let na = mh.n_electrons / 2;
    let nb = mh.n_electrons - na;
    let ground_irrep = mh.determinant_irrep(mh.hf_bits());
    let ground_sector = fci_roots(mh, na, nb, Some(ground_irrep), 1)?;
    let g = &ground_sector.roots[0];
    let mut n = 2 * selector.ordinal + 4;
    loop {
        let res = fci_roots(mh, na, nb, Some(target), n)?;
        let skip = usize::from(target == ground_irrep);
        let mut seen = 0;
        for root in res.roots.iter().skip(skip) {
            if selector.spin.map_or(true, |s| nearest_spin(root.spin_squared) == s) {
                seen += 1;
                if seen == selector.ordinal {
                    return Ok(OracleRecord {
                        ground: g.energy,
                        target: root.energy,
                        gap: root.energy - g.energy,
                        ground_spin_squared: g.spin_squared,
                        target_spin_squared: root.spin_squared,
                        sector_dimension: res.dimension,
                    });
                }
            }
        }
        if n >= res.dimension {
            return Err(Error::Parameter("exact sector holds no root matching the target".into()));
        }
        n = (2 * n).min(res.dimension);
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankCounts {
    pub rank: usize,
    pub raw: u64,
    pub sz_conserving: u64,
    pub symmetry: u64,
    pub selected: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VariantRecord {
    pub variant: String,
    pub omega_ha: f64,
    pub omega_ev: f64,
    pub energy_ha: f64,
    pub error_ha: Option<f64>,
    pub error_ev: Option<f64>,
    pub n_triples: usize,
    pub dimension: usize,
    pub root: usize,
    pub overlap: Option<f64>,
    pub spin_squared: f64,
}

impl VariantRecord {
    fn new(v: &VariantResult, oracle: Option<&OracleRecord>) -> Self {
        let err = oracle.map(|o| v.omega - o.gap);
        VariantRecord {
            variant: v.variant.name().into(),
            omega_ha: v.omega,
            omega_ev: v.omega * HARTREE_TO_EV,
            energy_ha: v.energy,
            error_ha: err,
            error_ev: err.map(|e| e * HARTREE_TO_EV),
            n_triples: v.n_triples,
            dimension: v.dimension,
            root: v.root,
            overlap: v.overlap,
            spin_squared: v.spin_squared,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScreeningSummary {
    pub mode: String,
    pub value: f64,
    pub indicator: String,
    pub n_triples: usize,
    pub n_selected: usize,
    pub selected_fraction: f64,
    /// Selected triples over all Sz-conserving triples, before the symmetry filter.
    pub fraction_of_sz_triples: Option<f64>,
    /// Share of sum |W| carried by the selected triples.
    pub indicator_coverage: f64,
    pub first_order: f64,
    pub second_order: f64,
    /// (omega_SD - omega_SDt) / (omega_SD - omega_SDT) when SDT was solved.
    pub gap_closed: Option<f64>,
    /// Fraction of the top-decile triples ranked alike by both qEOM indicators.
    pub indicator_agreement: Option<f64>,
    pub report_file: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub hf: f64,
    pub vqe: f64,
    pub fci_ground: Option<f64>,
    pub fci_target: Option<f64>,
    pub fci_gap: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemRecord {
    pub source: String,
    pub point_group: String,
    pub n_spin_orbitals: usize,
    pub n_electrons: usize,
    pub sector_dimension: usize,
    pub target_irrep: String,
    pub target_root: usize,
    pub target_spin: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub method: String,
    pub system: SystemRecord,
    pub energies: EnergyRecord,
    pub oracle: Option<OracleRecord>,
    pub oracle_note: Option<String>,
    pub adapt: AdaptReport,
    pub counts: Vec<RankCounts>,
    pub variants: Vec<VariantRecord>,
    pub screening: Option<ScreeningSummary>,
    pub warnings: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl ResultRecord {
    pub fn variant(&self, name: &str) -> Option<&VariantRecord> {
        self.variants.iter().find(|v| v.variant == name)
    }
}

/// Ranked indicator list with coverage and, optionally, the re-solved curve.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScreeningFile {
    pub schema_version: u32,
    pub method: String,
    pub indicator: String,
    pub omega_sd: f64,
    pub first_order: f64,
    pub second_order: f64,
    pub entries: Vec<ScreeningEntry>,
    pub coverage: Vec<(usize, f64)>,
    pub rediagonalized: Option<Vec<(usize, f64)>>,
    pub omega_sdt: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScreeningEntry {
    pub excitation: String,
    pub w: f64,
}

/// Round to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn rank_counts(mh: &MolecularHamiltonian, basis_ranks: &[usize], max_rank: usize, selected_triples: Option<usize>) -> Vec<RankCounts> {
    let occ = mh.reference_space();
    let oa = occ.occupied.iter().filter(|p| *p % 2 == 0).count();
    let ob = occ.occupied.len() - oa;
    let va = occ.virtuals.iter().filter(|p| *p % 2 == 0).count();
    let vb = occ.virtuals.len() - va;
    let binom = |n: usize, k: usize| -> u64 {
        if k > n {
            0
        } else {
            (0..k).fold(1u64, |a, i| a * (n - i) as u64 / (i + 1) as u64)
        }
    };
    (1..=max_rank)
        .map(|k| {
            let symmetry = basis_ranks.iter().filter(|&&r| r == k).count() as u64;
            RankCounts {
                rank: k,
                raw: binom(occ.occupied.len(), k) * binom(occ.virtuals.len(), k),
                sz_conserving: count_excitations(k, oa, ob, va, vb),
                symmetry,
                selected: if k == 3 { selected_triples.map_or(symmetry, |s| s as u64) } else { symmetry },
            }
        })
        .collect()
}

fn mode_text(m: ScreenMode) -> (String, f64) {
    match m {
        ScreenMode::Coverage(f) => ("coverage".into(), f),
        ScreenMode::Threshold(e) => ("threshold".into(), e),
        ScreenMode::TopK(k) => ("top_k".into(), k as f64),
    }
}

fn top_decile_agreement(a: &ScreeningReport, b: &ScreeningReport) -> Option<f64> {
    let n = a.entries.len().min(b.entries.len());
    if n == 0 {
        return None;
    }
    let k = n.div_ceil(10);
    let sa: HashSet<usize> = a.entries[..k].iter().map(|e| e.index).collect();
    let hits = b.entries[..k].iter().filter(|e| sa.contains(&e.index)).count();
    Some(hits as f64 / k as f64)
}

/// Points at which the re-solved coverage curve is evaluated.
fn curve_points(n: usize) -> Vec<usize> {
    let step = n.div_ceil(120).max(1);
    let mut ks: Vec<usize> = (0..=n).step_by(step).collect();
    if *ks.last().unwrap() != n {
        ks.push(n);
    }
    ks
}

/// Everything computed for one excited-state block.
pub struct ExcitedOutcome {
    pub variants: Vec<VariantResult>,
    pub basis_ranks: Vec<usize>,
    pub screening: Option<(ScreeningSummary, ScreeningFile)>,
    pub selected: Option<usize>,
    pub warnings: Vec<String>,
}

fn screening_file(method: &str, report: &ScreeningReport, omega_sd: f64) -> ScreeningFile {
    ScreeningFile {
        schema_version: SCHEMA_VERSION,
        method: method.into(),
        indicator: format!("{:?}", report.kind),
        omega_sd,
        first_order: report.first_order,
        second_order: report.second_order,
        entries: report.entries.iter().map(|e| ScreeningEntry { excitation: e.excitation.clone(), w: sig12(e.w) }).collect(),
        coverage: report.coverage_curve(),
        rediagonalized: None,
        omega_sdt: None,
    }
}

fn summarize(report: &ScreeningReport, selected: &[usize], mode: Option<ScreenMode>, indicator: &str) -> ScreeningSummary {
    let chosen: HashSet<usize> = selected.iter().copied().collect();
    let finite = |e: &&crate::qeom::TripleIndicator| !e.degenerate;
    let total: f64 = report.entries.iter().filter(finite).map(|e| e.magnitude()).sum();
    let kept: f64 = report.entries.iter().filter(finite).filter(|e| chosen.contains(&e.index)).map(|e| e.magnitude()).sum();
    let (m, v) = mode.map(mode_text).unwrap_or(("none".into(), 0.0));
    let n = report.entries.len();
    ScreeningSummary {
        mode: m,
        value: v,
        indicator: indicator.into(),
        n_triples: n,
        n_selected: selected.len(),
        selected_fraction: if n > 0 { selected.len() as f64 / n as f64 } else { 0.0 },
        fraction_of_sz_triples: None,
        indicator_coverage: if total > 0.0 { kept / total } else { 1.0 },
        first_order: report.first_order,
        second_order: report.second_order,
        gap_closed: None,
        indicator_agreement: None,
        report_file: None,
    }
}

fn finish_gap(
    summary: &mut ScreeningSummary,
    variants: &[VariantResult],
) {
    let find = |v: Variant| variants.iter().find(|r| r.variant == v).map(|r| r.omega);
    if let (Some(sd), Some(sdt), Some(full)) = (find(Variant::Sd), find(Variant::SdtScreened), find(Variant::Sdt)) {
        if (sd - full).abs() > 0.0 {
            summary.gap_closed = Some((sd - sdt) / (sd - full));
        }
    }
}

pub fn run_qeom(c: &RunConfig, mh: &MolecularHamiltonian, ground: &Ground, target: IrrepLabel, curve: bool) -> Result<ExcitedOutcome> {
    let hbar = Hbar::new(&ground.emu, &ground.compiled, ground.e_vqe)?;
    let triples = c.needs_triples() || curve;
    let basis = build_basis(mh, target, if triples { 3 } else { 2 });
    let basis_ranks: Vec<usize> = basis.iter().map(|e| e.rank()).collect();
    let mut block = QeomBlock::new(&hbar, Some(target), basis)?;
    let settings = QeomSettings {
        root: c.root,
        tracking: c.tracking,
        indicator: c.indicator,
        screen: c.screen.unwrap_or(ScreenMode::Coverage(0.9)),
    };
    let mut run = QeomRun::new(&mut block, settings)?;
    let mut variants = vec![run.sd_result()];
    let mut screening = None;
    let mut selected_count = None;
    if triples {
        let subset = run.block.build_m(ElementSet::ScreeningSubset)?;
        let rs = indicators_rs(&subset, run.block, &run.zeroth);
        let cf = indicators_closed_form(run.block, &run.zeroth)?;
        let agreement = top_decile_agreement(&rs, &cf);
        let report = match c.indicator {
            crate::qeom::IndicatorKind::RayleighSchroedinger => rs,
            crate::qeom::IndicatorKind::DiagonalClosedForm => cf,
        };
        let mut selected: Vec<usize> = Vec::new();
        let screened = c.variants.iter().any(|v| matches!(v, Variant::SdtScreened | Variant::SdParenT));
        if screened {
            let (sdt, paren, sel) = run.screened(&report)?;
            variants.push(sdt);
            if c.variants.contains(&Variant::SdParenT) {
                variants.push(paren);
            }
            selected = sel;
            selected_count = Some(selected.len());
        }
        let all = run.triples();
        let mut omega_sdt = None;
        if c.variants.contains(&Variant::Sdt) || curve {
            let (full, _) = run.solve_with(&all, Variant::Sdt)?;
            omega_sdt = Some(full.omega);
            if c.variants.contains(&Variant::Sdt) {
                variants.push(full);
            }
        }
        let mut file = screening_file("qeom", &report, run.zeroth.omega);
        file.omega_sdt = omega_sdt;
        if curve {
            file.rediagonalized = Some(run.rediagonalized_curve(&report, &curve_points(all.len()))?);
        }
        let mut summary = summarize(&report, &selected, c.screen.filter(|_| screened), &format!("{:?}", c.indicator));
        summary.indicator_agreement = agreement;
        finish_gap(&mut summary, &variants);
        screening = Some((summary, file));
    }
    let warnings = run.warnings.clone();
    Ok(ExcitedOutcome { variants, basis_ranks, screening, selected: selected_count, warnings })
}

pub fn run_qse(c: &RunConfig, mh: &MolecularHamiltonian, ground: &Ground, target: IrrepLabel, curve: bool) -> Result<ExcitedOutcome> {
    let triples = c.needs_triples() || curve;
    let basis = build_basis(mh, target, if triples { 3 } else { 2 });
    let basis_ranks: Vec<usize> = basis.iter().map(|e| e.rank()).collect();
    let psi0 = ground.compiled.apply(&ground.emu.reference_vector());
    let include_ground = target == mh.determinant_irrep(mh.hf_bits());
    let block = QseBlock::build(&ground.emu, &psi0, include_ground, basis)?;
    let settings = QseSettings {
        root: c.root,
        tracking: c.tracking,
        screen: c.screen.unwrap_or(ScreenMode::Coverage(0.9)),
        lindep: c.lindep,
    };
    let mut run = QseRun::new(&block, settings, ground.e_vqe)?;
    let mut variants = vec![run.sd_result()];
    let mut screening = None;
    let mut selected_count = None;
    if triples {
        let report = run.screening_report();
        let mut selected = Vec::new();
        let screened = c.variants.iter().any(|v| matches!(v, Variant::SdtScreened | Variant::SdParenT));
        if screened {
            let (sdt, paren, sel) = run.screened(&report)?;
            variants.push(sdt);
            if c.variants.contains(&Variant::SdParenT) {
                variants.push(paren);
            }
            selected = sel;
            selected_count = Some(selected.len());
        }
        let all = run.triples();
        let mut omega_sdt = None;
        if c.variants.contains(&Variant::Sdt) || curve {
            let (full, _) = run.solve_with(&all, Variant::Sdt)?;
            omega_sdt = Some(full.omega);
            if c.variants.contains(&Variant::Sdt) {
                variants.push(full);
            }
        }
        let mut file = screening_file("qse", &report.ranking, run.sd_result().omega);
        file.omega_sdt = omega_sdt;
        if curve {
            let ranked: Vec<usize> = report.ranking.entries.iter().map(|e| e.index).collect();
            let mut pts = Vec::new();
            for k in curve_points(ranked.len()) {
                pts.push((k, run.solve_with(&ranked[..k], Variant::SdtScreened)?.0.omega));
            }
            file.rediagonalized = Some(pts);
        }
        let mut summary = summarize(&report.ranking, &selected, c.screen.filter(|_| screened), "QseSecondOrder");
        finish_gap(&mut summary, &variants);
        screening = Some((summary, file));
    }
    let warnings = run.warnings.clone();
    Ok(ExcitedOutcome { variants, basis_ranks, screening, selected: selected_count, warnings })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

pub fn write_coverage_csv(path: &Path, file: &ScreeningFile) -> Result<()> {
    let mut out = String::from("k,cumulative_fraction,w,excitation,omega_rediagonalized\n");
    let curve: std::collections::HashMap<usize, f64> =
        file.rediagonalized.as_ref().map(|c| c.iter().copied().collect()).unwrap_or_default();
    let fmt_opt = |k: usize| curve.get(&k).map(|x| format!("{x:.12e}")).unwrap_or_default();
    out.push_str(&format!("0,0,,,{}\n", fmt_opt(0)));
    for (k, (frac, e)) in file.coverage.iter().skip(1).map(|c| c.1).zip(&file.entries).enumerate() {
        out.push_str(&format!("{},{frac:.12},{:.12e},\"{}\",{}\n", k + 1, e.w, e.excitation, fmt_opt(k + 1)));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Ground state, optional oracle, and every requested variant.
pub fn run_single(c: &RunConfig) -> Result<ResultRecord> {
    Ok(run_detailed(c, c.rediagonalize_curve)?.0)
}

/// Like `run_single`, also returning the screening file and choosing
/// whether to re-solve the coverage curve.
pub fn run_detailed(c: &RunConfig, curve: bool) -> Result<(ResultRecord, Option<ScreeningFile>)> {
    let start = Instant::now();
    let sys = load_system(c)?;
    let mh = &sys.mh;
    let target = resolve_irrep(mh, &c.target_irrep)?;
    let ground = run_ground(mh, &c.adapt)?;
    let (oracle_rec, oracle_note) = if c.oracle {
        match oracle(mh, target, c.root) {
            Ok(o) => (Some(o), None),
            Err(e @ (Error::DimensionGuard { .. } | Error::Parameter(_))) => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        }
    } else {
        (None, Some("oracle disabled".into()))
    };
    let outcome = match c.method {
        Method::Qeom => run_qeom(c, mh, &ground, target, curve)?,
        Method::Qse => run_qse(c, mh, &ground, target, curve)?,
    };
    let method = match c.method {
        Method::Qeom => "qeom",
        Method::Qse => "qse",
    };
    let mut warnings = outcome.warnings.clone();
    if ground.report.max_iters_reached {
        warnings.push("ADAPT reached max_iters before convergence".into());
    }
    let mut screening = outcome.screening.clone();
    let screening_out = screening.as_ref().map(|s| s.1.clone());
    if let (Some(dir), Some((summary, file))) = (&c.output_dir, screening.as_mut()) {
        std::fs::create_dir_all(dir)?;
        let json = dir.join(format!("screening_{method}.json"));
        write_json(&json, file)?;
        write_coverage_csv(&dir.join(format!("coverage_{method}.csv")), file)?;
        summary.report_file = Some(json.display().to_string());
    }
    let max_rank = outcome.basis_ranks.iter().copied().max().unwrap_or(2).max(2);
    let counts = rank_counts(mh, &outcome.basis_ranks, max_rank, outcome.selected);
    if let (Some((summary, _)), Some(t)) = (screening.as_mut(), counts.iter().find(|r| r.rank == 3)) {
        if t.sz_conserving > 0 {
            summary.fraction_of_sz_triples = Some(summary.n_selected as f64 / t.sz_conserving as f64);
        }
    }
    let record = ResultRecord {
        schema_version: SCHEMA_VERSION,
        method: method.into(),
        system: SystemRecord {
            source: sys.description.clone(),
            point_group: mh.point_group.to_string(),
            n_spin_orbitals: mh.n_spin_orbitals,
            n_electrons: mh.n_electrons,
            sector_dimension: ground.emu.sector.dim(),
            target_irrep: mh.point_group.name(target),
            target_root: c.root.ordinal,
            target_spin: c.root.spin,
        },
        energies: EnergyRecord {
            hf: ground.e_hf,
            vqe: ground.e_vqe,
            fci_ground: oracle_rec.as_ref().map(|o| o.ground),
            fci_target: oracle_rec.as_ref().map(|o| o.target),
            fci_gap: oracle_rec.as_ref().map(|o| o.gap),
        },
        adapt: ground.report.clone(),
        counts,
        variants: outcome.variants.iter().map(|v| VariantRecord::new(v, oracle_rec.as_ref())).collect(),
        screening: screening.map(|s| s.0),
        oracle: oracle_rec,
        oracle_note,
        warnings,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    if let Some(dir) = &c.output_dir {
        std::fs::create_dir_all(dir)?;
        write_json(&dir.join(format!("result_{method}.json")), &record)?;
    }
    Ok((record, screening_out))
}

/// One row of a scan; failures are kept as flagged rows.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanPoint {
    pub parameter: f64,
    pub record: Option<ResultRecord>,
    pub error: Option<String>,
}

pub fn run_scan(c: &RunConfig) -> Result<Vec<ScanPoint>> {
    if c.scan.is_empty() {
        return Err(Error::Config("scan needs a parameter list".into()));
    }
    let mut points = Vec::new();
    for &x in &c.scan {
        let mut pc = c.with_parameter(x)?;
        pc.output_dir = None;
        match run_single(&pc) {
            Ok(r) => points.push(ScanPoint { parameter: x, record: Some(r), error: None }),
            Err(e) => {
                log::warn!("scan point {x} failed: {e}");
                points.push(ScanPoint { parameter: x, record: None, error: Some(e.to_string()) });
            }
        }
    }
    if let Some(dir) = &c.output_dir {
        std::fs::create_dir_all(dir)?;
        write_json(&dir.join("scan.json"), &points)?;
        std::fs::write(dir.join("scan.csv"), scan_csv(&points, &c.variants))?;
    }
    Ok(points)
}

pub fn scan_csv(points: &[ScanPoint], variants: &[Variant]) -> String {
    let mut head = vec!["parameter".to_string(), "status".into(), "e_hf".into(), "e_vqe".into(), "e_fci_ground".into(), "fci_gap".into()];
    for v in variants {
        head.push(format!("omega_{}", v.name()));
        head.push(format!("delta_{}", v.name()));
    }
    let mut out = head.join(",") + "\n";
    let opt = |x: Option<f64>| x.map(|v| format!("{v:.12e}")).unwrap_or_default();
    for p in points {
        let mut row = vec![format!("{}", p.parameter)];
        match &p.record {
            None => {
                row.push("failed".into());
                row.extend(std::iter::repeat(String::new()).take(head.len() - 2));
            }
            Some(r) => {
                row.push("ok".into());
                row.push(format!("{:.12e}", r.energies.hf));
                row.push(format!("{:.12e}", r.energies.vqe));
                row.push(opt(r.energies.fci_ground));
                row.push(opt(r.energies.fci_gap));
                for v in variants {
                    let rec = r.variant(v.name());
                    row.push(opt(rec.map(|x| x.omega_ha)));
                    row.push(opt(rec.and_then(|x| x.error_ha)));
                }
            }
        }
        out += &(row.join(",") + "\n");
    }
    out
}
