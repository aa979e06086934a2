//! Acceptance criteria, one line each. Run with
//! `cargo test -p qeom-core --test acceptance`.
//!
//! Criteria 9 and 11 are evaluated on the built-in H8 layout, which is an
//! assumed stand-in for the original model geometry; they are reported but
//! do not set the exit status. Criterion 10 needs external FCIDUMP files and
//! is skipped without them.

mod common;

use nalgebra::DMatrix;
use num_complex::Complex64;
use qeom_core::adapt::{build_pool, pool_gradient, AdaptSettings};
use qeom_core::emulator::{CompiledAnsatz, Emulator};
use qeom_core::fci::{fci_roots, slater_condon};
use qeom_core::fermion::{enumerate_excitations, PoolKind, ReferenceSpace};
use qeom_core::hamiltonian::MolecularHamiltonian;
use qeom_core::linalg::symmetric_eigen;
use qeom_core::pauli::jordan_wigner;
use qeom_core::pipeline::{load_system, oracle, run_ground, run_qeom, run_qse, Ground, HARTREE_TO_EV};
use qeom_core::qeom::{
    build_basis, full_manifold, killer_residuals, screen_triples, ElementSet, Hbar, QeomBlock, QeomRun,
    QeomSettings, RootSelector, ScreenMode, Variant,
};
use qeom_core::qse::{QseBlock, QseRun, QseSettings};
use qeom_core::state::{apply_exp_generator, expectation, Statevector};
use qeom_core::symmetry::IrrepLabel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

type Check = Result<(bool, String), String>;

#[derive(Clone, Copy, PartialEq)]
enum Status {
    Pass,
    Fail,
    Skip,
}

struct Line {
    id: &'static str,
    gating: bool,
    status: Status,
    elapsed: Duration,
}

struct Suite {
    lines: Vec<Line>,
}

impl Suite {
    fn run(&mut self, id: &'static str, title: &str, gating: bool, f: impl FnOnce() -> Check) {
        let start = Instant::now();
        let (status, detail) = match f() {
            Ok((true, d)) => (Status::Pass, d),
            Ok((false, d)) => (Status::Fail, d),
            Err(d) if d.starts_with("SKIP") => (Status::Skip, d),
            Err(d) => (Status::Fail, format!("error: {d}")),
        };
        let elapsed = start.elapsed();
        let tag = match status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        let scope = if gating { "" } else { " [reported]" };
        println!("{tag} {id:>3} {title}{scope}: {detail} ({:.1} s)", elapsed.as_secs_f64());
        self.lines.push(Line { id, gating, status, elapsed });
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn h8_text(b: f64) -> String {
    format!(
        "builtin = h8\nb = {b}\ntarget_irrep = Ag\nvariant = all\nscreening_mode = coverage\nscreening_f = 0.9\nadapt_gtol = 1e-6\n"
    )
}

struct H8 {
    mh: MolecularHamiltonian,
    ground: Ground,
    target: IrrepLabel,
}

impl H8 {
    fn new(b: f64) -> Result<Self, String> {
        let c = common::config(&h8_text(b));
        let mh = common::builtin(&h8_text(b));
        let ground = run_ground(&mh, &c.adapt).map_err(err)?;
        let target = qeom_core::pipeline::resolve_irrep(&mh, "Ag").map_err(err)?;
        Ok(H8 { mh, ground, target })
    }
}

fn criterion_1() -> Check {
    let h8 = common::builtin(&h8_text(1.0));
    let ch = ReferenceSpace::from_bits(0b11_1111, 22);
    let hf = ReferenceSpace::from_bits(0xff, 20);
    let sym = |n: usize| vec![IrrepLabel::SYMMETRIC; n];
    let start = Instant::now();
    let counts = [
        enumerate_excitations(3, &h8.reference_space(), &h8.so_irreps, true, None).len(),
        enumerate_excitations(3, &ch, &sym(22), true, None).len(),
        enumerate_excitations(3, &hf, &sym(20), true, None).len(),
    ];
    let t = start.elapsed().as_secs_f64();
    Ok((counts == [1184, 4144, 4480] && t < 1.0, format!("H8 {} CH+ {} HF {} in {t:.3} s", counts[0], counts[1], counts[2])))
}

fn criterion_2(h8: &H8) -> Check {
    let n = h8.mh.n_spin_orbitals;
    let generators = h8
        .ground
        .ansatz
        .operators
        .iter()
        .map(|op| jordan_wigner(&op.generator(), n))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let manifold = full_manifold(&h8.mh, 3);
    let res = killer_residuals(&manifold, &generators, &h8.ground.ansatz.parameters, h8.mh.hf_bits(), n).map_err(err)?;
    let worst = res.iter().cloned().fold(0.0, f64::max);
    Ok((worst == 0.0, format!("{} excitations, {} ansatz operators, max residual {worst:e}", res.len(), generators.len())))
}

fn criterion_3(h8: &H8) -> Check {
    let g = &h8.ground;
    let hbar = Hbar::new(&g.emu, &g.compiled, g.e_vqe).map_err(err)?;
    let manifold = full_manifold(&h8.mh, 3);
    let irreps: Vec<IrrepLabel> = manifold.iter().map(|e| e.irrep).collect();
    let mut block = QeomBlock::new(&hbar, None, manifold).map_err(err)?;
    let m = block.build_m(ElementSet::All).map_err(err)?;
    let n = m.nrows();
    let mut herm = 0.0f64;
    let mut cross = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            herm = herm.max((m[(i, j)] - m[(j, i)]).abs());
            if irreps[i] != irreps[j] {
                cross = cross.max(m[(i, j)].abs());
            }
        }
    }
    let psi0 = g.compiled.apply(&g.emu.reference_vector());
    let qse = QseBlock::build(&g.emu, &psi0, true, build_basis(&h8.mh, h8.target, 3)).map_err(err)?;
    let s_min = symmetric_eigen(&qse.s, 1e-10).map_err(err)?.values[0];
    Ok((
        herm < 1e-10 && cross < 1e-10 && s_min > -1e-10,
        format!("M {n}x{n}: |M-M^T| {herm:.1e}, cross-irrep {cross:.1e}; S {}x{} min eigenvalue {s_min:.2e}", qse.len(), qse.len()),
    ))
}

fn criterion_4() -> Check {
    let mut worst_m = 0.0f64;
    let mut worst_h = 0.0f64;
    let mut worst_e = 0.0f64;
    for seed in 0..4 {
        let mh = common::random_hamiltonian(4, 4, 11 + seed);
        let emu = Emulator::new(&mh.to_pauli().map_err(err)?, mh.hf_bits()).map_err(err)?;
        let identity = CompiledAnsatz { generators: Vec::new(), parameters: Vec::new() };
        let e0 = emu.energy(&emu.reference_vector());
        let hbar = Hbar::new(&emu, &identity, e0).map_err(err)?;
        let basis = full_manifold(&mh, 4);
        let dets: Vec<(f64, u64)> = basis.iter().map(|e| e.apply(mh.hf_bits()).expect("excites the reference")).collect();
        let mut block = QeomBlock::new(&hbar, None, basis).map_err(err)?;
        let m = block.build_m(ElementSet::All).map_err(err)?;
        for i in 0..dets.len() {
            for j in 0..dets.len() {
                let sc = dets[i].0 * dets[j].0 * slater_condon(&mh, dets[i].1, dets[j].1) - if i == j { e0 } else { 0.0 };
                worst_m = worst_m.max((m[(i, j)] - sc).abs());
            }
        }
        let states = emu.sector.states().to_vec();
        let dim = states.len();
        let mut dense = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            let mut e = vec![Complex64::new(0.0, 0.0); dim];
            e[j] = Complex64::new(1.0, 0.0);
            let col = emu.hamiltonian.apply(&e);
            for i in 0..dim {
                dense[(i, j)] = col[i].re;
                worst_h = worst_h.max((col[i].re - slater_condon(&mh, states[i], states[j])).abs());
            }
        }
        let engine = symmetric_eigen(&dense, 1e-10).map_err(err)?.values;
        let exact = fci_roots(&mh, 2, 2, None, dim).map_err(err)?;
        let exact: Vec<f64> = exact.roots.iter().map(|r| r.energy).collect();
        worst_e = worst_e.max(max_abs_diff(&engine, &exact));
    }
    Ok((
        worst_m < 1e-10 && worst_h < 1e-10 && worst_e < 1e-10,
        format!("4 random 8-spin-orbital systems: M vs Slater-Condon {worst_m:.1e}, H elements {worst_h:.1e}, spectra {worst_e:.1e}"),
    ))
}

fn criterion_5() -> Check {
    let mut worst = 0.0f64;
    let mut roots = 0;
    for r in [1.0, 1.4, 2.0] {
        let mh = common::builtin(&format!("builtin = h2\nr = {r}\n"));
        let settings = AdaptSettings { optimizer_gtol: 1e-10, ..AdaptSettings::default() };
        let g = run_ground(&mh, &settings).map_err(err)?;
        let hbar = Hbar::new(&g.emu, &g.compiled, g.e_vqe).map_err(err)?;
        let ground_irrep = mh.determinant_irrep(mh.hf_bits());
        let e_exact = fci_roots(&mh, 1, 1, Some(ground_irrep), 1).map_err(err)?.roots[0].energy;
        for label in 0..mh.point_group.order() {
            let irrep = IrrepLabel(label);
            let basis = build_basis(&mh, irrep, 2);
            if basis.is_empty() {
                continue;
            }
            let n = basis.len();
            let mut block = QeomBlock::new(&hbar, Some(irrep), basis).map_err(err)?;
            let m = block.matrix(&(0..n).collect::<Vec<_>>()).map_err(err)?;
            let omega = symmetric_eigen(&m, 1e-10).map_err(err)?.values;
            let skip = usize::from(irrep == ground_irrep);
            let exact = fci_roots(&mh, 1, 1, Some(irrep), n + skip).map_err(err)?;
            let gaps: Vec<f64> = exact.roots.iter().skip(skip).map(|x| x.energy - e_exact).collect();
            if gaps.len() != omega.len() {
                return Ok((false, format!("R={r} irrep {label}: {} qEOM roots vs {} exact", omega.len(), gaps.len())));
            }
            worst = worst.max(max_abs_diff(&omega, &gaps));
            roots += omega.len();
        }
    }
    Ok((worst < 1e-8, format!("{roots} excitation energies at R = 1.0, 1.4, 2.0 bohr, max |omega - gap| {worst:.1e} Ha")))
}

fn criterion_6(h8: &H8) -> Check {
    let g = &h8.ground;
    let hbar = Hbar::new(&g.emu, &g.compiled, g.e_vqe).map_err(err)?;
    let basis = build_basis(&h8.mh, h8.target, 3);
    let mut block = QeomBlock::new(&hbar, Some(h8.target), basis.clone()).map_err(err)?;
    let mut run = QeomRun::new(&mut block, QeomSettings::default()).map_err(err)?;
    let report = run.screening_report().map_err(err)?;
    let all = run.triples();
    let (_, full) = run.solve_with(&all, Variant::Sdt).map_err(err)?;
    let mut worst = 0.0f64;
    for mode in [ScreenMode::Threshold(0.0), ScreenMode::Coverage(1.0)] {
        let sel = screen_triples(&report, mode).map_err(err)?;
        let (_, part) = run.solve_with(&sel, Variant::SdtScreened).map_err(err)?;
        if part.eigen.values.len() != full.eigen.values.len() {
            return Ok((false, format!("qEOM {mode:?} kept {} of {} triples", sel.len(), all.len())));
        }
        worst = worst.max(max_abs_diff(&part.eigen.values, &full.eigen.values));
    }
    let psi0 = g.compiled.apply(&g.emu.reference_vector());
    let qblock = QseBlock::build(&g.emu, &psi0, true, basis).map_err(err)?;
    let mut qrun = QseRun::new(&qblock, QseSettings::default(), g.e_vqe).map_err(err)?;
    let qreport = qrun.screening_report();
    let qall = qrun.triples();
    let (_, qfull) = qrun.solve_with(&qall, Variant::Sdt).map_err(err)?;
    let mut qworst = 0.0f64;
    for mode in [ScreenMode::Threshold(0.0), ScreenMode::Coverage(1.0)] {
        let sel = screen_triples(&qreport.ranking, mode).map_err(err)?;
        let (_, part) = qrun.solve_with(&sel, Variant::SdtScreened).map_err(err)?;
        if part.eigen.values.len() != qfull.eigen.values.len() {
            return Ok((false, format!("QSE {mode:?} kept {} of {} triples", sel.len(), qall.len())));
        }
        qworst = qworst.max(max_abs_diff(&part.eigen.values, &qfull.eigen.values));
    }
    Ok((
        worst < 1e-10 && qworst < 1e-10,
        format!("{} triples; eps_t=0 and f=1 vs SDT: qEOM {worst:.1e}, QSE {qworst:.1e}", all.len()),
    ))
}

fn criterion_7() -> Check {
    let mh = common::h4();
    let n = mh.n_spin_orbitals;
    let h = mh.to_pauli().map_err(err)?;
    let pool = build_pool(&mh, PoolKind::SpinAdapted).map_err(err)?;
    let taus = pool.iter().map(|p| jordan_wigner(&p.generator(), n)).collect::<Result<Vec<_>, _>>().map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let step = 1e-4;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let mut psi = Statevector::basis_state(n, mh.hf_bits()).map_err(err)?;
        for _ in 0..4 {
            let k = rng.gen_range(0..taus.len());
            psi = apply_exp_generator(&taus[k], rng.gen_range(-0.6..0.6), &psi).map_err(err)?;
        }
        for tau in &taus {
            let analytic = pool_gradient(&psi, &h, tau).map_err(err)?;
            let plus = expectation(&h, &apply_exp_generator(tau, step, &psi).map_err(err)?).map_err(err)?;
            let minus = expectation(&h, &apply_exp_generator(tau, -step, &psi).map_err(err)?).map_err(err)?;
            worst = worst.max((analytic - (plus - minus) / (2.0 * step)).abs());
        }
    }
    Ok((worst < 1e-6, format!("20 random H4 ansatz states x {} pool operators, max deviation {worst:.1e}", taus.len())))
}

fn omegas(c: &qeom_core::config::RunConfig, mh: &MolecularHamiltonian, g: &Ground, target: IrrepLabel) -> Result<Vec<(String, f64)>, String> {
    let mut out = Vec::new();
    for (method, outcome) in [("qeom", run_qeom(c, mh, g, target, false)), ("qse", run_qse(c, mh, g, target, false))] {
        for v in outcome.map_err(err)?.variants {
            out.push((format!("{method}-{}", v.variant.name()), v.omega));
        }
    }
    Ok(out)
}

fn criterion_8() -> Check {
    let text = h8_text(1.0) + "adapt_max_iters = 6\n";
    let c = common::config(&text);
    let mh = common::builtin(&text);
    let shifted = mh.shifted(0.5);
    let target = qeom_core::pipeline::resolve_irrep(&mh, "Ag").map_err(err)?;
    let base = run_ground(&mh, &c.adapt).map_err(err)?;
    let moved = run_ground(&shifted, &c.adapt).map_err(err)?;
    let a = omegas(&c, &mh, &base, target)?;
    let b = omegas(&c, &shifted, &moved, target)?;
    let worst = a.iter().zip(&b).map(|(x, y)| (x.1 - y.1).abs()).fold(0.0, f64::max);
    let de = moved.e_vqe - base.e_vqe - 0.5;
    let dp = max_abs_diff(&base.ansatz.parameters, &moved.ansatz.parameters);
    Ok((
        worst < 1e-10 && a.len() == b.len(),
        format!("{} excitation energies, max shift {worst:.1e} Ha; E shift - 0.5 = {de:.1e}, parameters {dp:.1e}", a.len()),
    ))
}

struct Geometry {
    b: f64,
    sd: f64,
    sdt: f64,
    sdt_screened: f64,
    selected: usize,
    coverage: f64,
    gap_closed: f64,
    curve: Option<(usize, Vec<(usize, f64)>, f64)>,
}

fn h8_geometry(b: f64, fixture: Option<&H8>) -> Result<Geometry, String> {
    let owned;
    let h8 = match fixture {
        Some(h) => h,
        None => {
            owned = H8::new(b)?;
            &owned
        }
    };
    let c = common::config(&h8_text(b));
    let exact = oracle(&h8.mh, h8.target, RootSelector::default()).map_err(err)?;
    let curve = fixture.is_some();
    let out = run_qeom(&c, &h8.mh, &h8.ground, h8.target, curve).map_err(err)?;
    let error = |v: Variant| {
        out.variants.iter().find(|r| r.variant == v).map(|r| (r.omega - exact.gap) * HARTREE_TO_EV).ok_or("missing variant")
    };
    let (summary, file) = out.screening.clone().ok_or("no screening summary")?;
    let curve = if curve {
        let k97 = file.coverage.iter().find(|p| p.1 >= 0.97).map(|p| p.0).ok_or("empty coverage curve")?;
        Some((k97, file.rediagonalized.clone().ok_or("no curve")?, file.omega_sdt.ok_or("no SDT")?))
    } else {
        None
    };
    Ok(Geometry {
        b,
        sd: error(Variant::Sd)?,
        sdt: error(Variant::Sdt)?,
        sdt_screened: error(Variant::SdtScreened)?,
        selected: summary.n_selected,
        coverage: summary.indicator_coverage,
        gap_closed: summary.gap_closed.ok_or("no gap")?,
        curve,
    })
}

fn criterion_10() -> Check {
    let chp = std::env::var("QEOM_CHP_FCIDUMP").ok();
    let hf_dir = std::env::var("QEOM_HF_FCIDUMP_DIR").ok();
    if chp.is_none() && hf_dir.is_none() {
        return Err("SKIP no QEOM_CHP_FCIDUMP or QEOM_HF_FCIDUMP_DIR supplied".into());
    }
    let within = |got: f64, want: f64| (got - want).abs() <= 0.25 * want.abs() + 5e-5;
    let mut ok = true;
    let mut notes = Vec::new();
    let mut eval = |path: &str, frozen: &str, irrep: &str, root: usize, want_sd: f64, want_sdt: f64, tag: String| -> Result<(), String> {
        let pg = std::env::var("QEOM_FCIDUMP_POINT_GROUP").unwrap_or_else(|_| "C2v".into());
        let c = common::config(&format!(
            "fcidump = {path}\npoint_group = {pg}\n{frozen}target_irrep = {irrep}\ntarget_root = {root}\nvariant = sd,sdt\nadapt_gtol = 1e-6\n"
        ));
        let mh = load_system(&c).map_err(err)?.mh;
        let target = qeom_core::pipeline::resolve_irrep(&mh, irrep).map_err(err)?;
        let g = run_ground(&mh, &c.adapt).map_err(err)?;
        let exact = oracle(&mh, target, c.root).map_err(err)?;
        let out = run_qeom(&c, &mh, &g, target, false).map_err(err)?;
        let e = |v: Variant| out.variants.iter().find(|r| r.variant == v).map(|r| (r.omega - exact.gap) * HARTREE_TO_EV).unwrap();
        let (sd, sdt) = (e(Variant::Sd), e(Variant::Sdt));
        ok &= within(sd, want_sd) && within(sdt, want_sdt);
        notes.push(format!("{tag}: SD {sd:.4} (ref {want_sd}) SDT {sdt:.4} (ref {want_sdt}) eV"));
        Ok(())
    };
    if let Some(path) = chp {
        let irrep = std::env::var("QEOM_CHP_IRREP").unwrap_or_else(|_| "A1".into());
        let root: usize = std::env::var("QEOM_CHP_ROOT").ok().and_then(|s| s.parse().ok()).unwrap_or(1);
        eval(&path, "", &irrep, root, 3.9194, 0.1075, "CH+".into())?;
    }
    if let Some(dir) = hf_dir {
        let table = [
            (1.5, 0.1089, 0.0067),
            (2.1, 0.1280, 0.0103),
            (2.7, 0.3837, 0.0100),
            (3.2, 0.4938, 0.0110),
            (3.7, 0.1110, 0.0052),
            (4.2, 0.2997, 0.0049),
            (5.0, 0.9022, 0.0255),
            (6.0, 0.0981, 0.0000),
        ];
        for (r, sd, sdt) in table {
            let path = format!("{dir}/{r:.1}.fcidump");
            if std::path::Path::new(&path).exists() {
                eval(&path, "frozen = 1\n", "A1", 1, sd, sdt, format!("HF R={r}"))?;
            }
        }
    }
    Ok((ok, notes.join("; ")))
}

fn main() {
    let mut suite = Suite { lines: Vec::new() };
    println!("acceptance criteria");
    suite.run("1", "operator counts", true, criterion_1);
    let start = Instant::now();
    let h8 = H8::new(1.0);
    let fixture_note = match &h8 {
        Ok(h) => format!(
            "H8 b=1.0 ground: {} operators, E_VQE {:.8}, {:.1} s",
            h.ground.ansatz.len(),
            h.ground.e_vqe,
            start.elapsed().as_secs_f64()
        ),
        Err(e) => format!("H8 ground failed: {e}"),
    };
    println!("     {fixture_note}");
    let fixture: Result<&H8, String> = h8.as_ref().map_err(Clone::clone);
    suite.run("2", "killer condition", true, || criterion_2(fixture.clone()?));
    suite.run("3", "structural invariants", true, || criterion_3(fixture.clone()?));
    suite.run("4", "oracle equivalence", true, criterion_4);
    suite.run("5", "two-electron completeness", true, criterion_5);
    suite.run("6", "variant degeneracy", true, || criterion_6(fixture.clone()?));
    suite.run("7", "gradient correctness", true, criterion_7);
    suite.run("8", "shift invariance", true, criterion_8);

    let mut geometries = Vec::new();
    let mut failure = None;
    for b in [1.0, 0.8, 0.6, 0.4, 0.2] {
        let fixture = if b == 1.0 { h8.as_ref().ok() } else { None };
        match h8_geometry(b, fixture) {
            Ok(g) => {
                println!(
                    "     H8 b={b}: SD {:.4} SDt {:.4} SDT {:.4} eV, {} triples kept, W coverage {:.3}, gap closed {:.3}",
                    g.sd, g.sdt_screened, g.sdt, g.selected, g.coverage, g.gap_closed
                );
                geometries.push(g);
            }
            Err(e) => failure = Some(format!("b={b}: {e}")),
        }
    }
    let pool = 1184.0;
    let all_b = |f: &dyn Fn(&Geometry) -> bool| failure.is_none() && geometries.iter().all(f);
    let listing = |f: &dyn Fn(&Geometry) -> String| geometries.iter().map(|g| format!("{}:{}", g.b, f(g))).collect::<Vec<_>>().join(" ");
    let fail_note = failure.clone().map(|f| format!(" ({f})")).unwrap_or_default();
    suite.run("9a", "H8 SD error >= 5x SDT error", false, || {
        Ok((all_b(&|g| g.sd.abs() >= 5.0 * g.sdt.abs()), format!("ratios {}{fail_note}", listing(&|g| format!("{:.1}", g.sd / g.sdt)))))
    });
    suite.run("9b", "H8 f=0.90 keeps <= 12% of triples", false, || {
        Ok((
            all_b(&|g| g.selected as f64 / pool <= 0.12),
            format!("of 1184: {}{fail_note}", listing(&|g| format!("{:.2}%", 100.0 * g.selected as f64 / pool))),
        ))
    });
    suite.run("9c", "H8 kept triples carry >= 90% of the indicator sum", false, || {
        Ok((all_b(&|g| g.coverage >= 0.90), format!("{}{fail_note}", listing(&|g| format!("{:.3}", g.coverage)))))
    });
    suite.run("9d", "H8 SDt closes >= 90% of the SD-SDT gap", false, || {
        Ok((all_b(&|g| g.gap_closed >= 0.90), format!("{}{fail_note}", listing(&|g| format!("{:.3}", g.gap_closed)))))
    });
    suite.run("10", "CH+/HF table reproduction", false, criterion_10);
    suite.run("11", "H8 re-solved curve settles after 0.97 coverage", false, || {
        let g = geometries.iter().find(|g| g.b == 1.0).ok_or("no b=1.0 result")?;
        let (k97, curve, sdt) = g.curve.as_ref().ok_or("no curve")?;
        let residual = |k: usize| curve.iter().find(|p| p.0 >= k).map(|p| (p.1 - sdt).abs()).unwrap_or(f64::NAN);
        let after = curve.iter().filter(|p| p.0 >= *k97).map(|p| (p.1 - sdt).abs()).fold(0.0, f64::max);
        let (r0, rk) = (residual(0), residual(*k97));
        Ok((
            after < 1e-4 && rk <= r0,
            format!("k(0.97) = {k97}; residual {r0:.2e} at k=0, {rk:.2e} at k(0.97), max {after:.2e} beyond"),
        ))
    });

    let gating_failures: Vec<&str> = suite.lines.iter().filter(|l| l.gating && l.status == Status::Fail).map(|l| l.id).collect();
    let reported_failures: Vec<&str> = suite.lines.iter().filter(|l| !l.gating && l.status == Status::Fail).map(|l| l.id).collect();
    let passed = suite.lines.iter().filter(|l| l.status == Status::Pass).count();
    let skipped = suite.lines.iter().filter(|l| l.status == Status::Skip).count();
    let total: f64 = suite.lines.iter().map(|l| l.elapsed.as_secs_f64()).sum();
    println!(
        "summary: {passed} passed, {} failed (gating: {:?}, reported: {:?}), {skipped} skipped, {total:.0} s",
        gating_failures.len() + reported_failures.len(),
        gating_failures,
        reported_failures
    );
    if !gating_failures.is_empty() {
        std::process::exit(1);
    }
}
