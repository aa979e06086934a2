use super::{Eri, IntegralSet};
use crate::error::{Error, Result};
use crate::symmetry::{IrrepLabel, PointGroup};
use nalgebra::DMatrix;
use std::collections::HashMap;
use std::fmt::Write;

const CONFLICT_TOL: f64 = 1e-10;

struct Header {
    norb: usize,
    nelec: usize,
    ms2: i32,
    orbsym: Vec<usize>,
}

fn parse_header(lines: &[(usize, &str)]) -> Result<Header> {
    let first_line = lines.first().map(|l| l.0).unwrap_or(1);
    let mut text = String::new();
    for (_, l) in lines {
        text.push_str(l);
        text.push(' ');
    }
    let body = text.trim().trim_start_matches("&FCI").trim_start_matches("&fci");
    let mut keys: Vec<(String, Vec<String>)> = Vec::new();
    for tok in body.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
        if tok == "&END" || tok == "/" || tok.eq_ignore_ascii_case("&end") {
            continue;
        }
        if let Some((k, v)) = tok.split_once('=') {
            let mut vals = Vec::new();
            if !v.is_empty() {
                vals.push(v.to_string());
            }
            keys.push((k.trim().to_ascii_uppercase(), vals));
        } else if let Some(last) = keys.last_mut() {
            last.1.push(tok.to_string());
        } else {
            return Err(Error::Parse { line: first_line, msg: format!("unexpected header token '{tok}'") });
        }
    }
    let find = |k: &str| keys.iter().find(|(key, _)| key == k).map(|(_, v)| v);
    let int = |k: &str, v: &Vec<String>| -> Result<i64> {
        v.first()
            .and_then(|s| s.parse::<i64>().ok())
            .ok_or_else(|| Error::Parse { line: first_line, msg: format!("header key {k} needs an integer") })
    };
    let norb = int("NORB", find("NORB").ok_or_else(|| Error::Parse { line: first_line, msg: "missing NORB".into() })?)?;
    let nelec = int("NELEC", find("NELEC").ok_or_else(|| Error::Parse { line: first_line, msg: "missing NELEC".into() })?)?;
    let ms2 = match find("MS2") {
        Some(v) => int("MS2", v)?,
        None => 0,
    };
    if norb <= 0 || nelec < 0 {
        return Err(Error::Parse { line: first_line, msg: "NORB must be positive and NELEC non-negative".into() });
    }
    let orbsym = match find("ORBSYM") {
        Some(v) => v
            .iter()
            .map(|s| s.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Parse { line: first_line, msg: "ORBSYM entries must be positive integers".into() })?,
        None => vec![1; norb as usize],
    };
    if orbsym.len() != norb as usize {
        return Err(Error::Parse {
            line: first_line,
            msg: format!("ORBSYM lists {} orbitals, NORB is {norb}", orbsym.len()),
        });
    }
    Ok(Header { norb: norb as usize, nelec: nelec as usize, ms2: ms2 as i32, orbsym })
}

fn parse_value(tok: &str, line: usize) -> Result<f64> {
    tok.replace(['D', 'd'], "E")
        .parse::<f64>()
        .map_err(|_| Error::Parse { line, msg: format!("bad integral value '{tok}'") })
}

/// Parse Molpro-convention FCIDUMP text. ORBSYM ids are translated through
/// `point_group` when given; otherwise label = id - 1 under D2h numbering.
pub fn parse_fcidump(text: &str, point_group: Option<PointGroup>) -> Result<IntegralSet> {
    let lines: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect();
    let end = lines
        .iter()
        .position(|(_, l)| {
            let t = l.trim();
            t.eq_ignore_ascii_case("&END") || t == "/" || t.to_ascii_uppercase().ends_with("&END")
        })
        .ok_or_else(|| Error::Parse { line: lines.len().max(1), msg: "header terminator &END not found".into() })?;
    if !lines.first().is_some_and(|(_, l)| l.trim_start().to_ascii_uppercase().starts_with("&FCI")) {
        return Err(Error::Parse { line: 1, msg: "expected &FCI header".into() });
    }
    let header = parse_header(&lines[..=end])?;
    let n = header.norb;

    let group = point_group.unwrap_or(PointGroup::D2h);
    let mut irreps = Vec::with_capacity(n);
    for &id in &header.orbsym {
        let label = match point_group {
            Some(g) => g.from_molpro(id),
            None => (id >= 1 && id <= 8).then(|| IrrepLabel((id - 1) as u8)),
        };
        irreps.push(label.ok_or_else(|| Error::Parse { line: 1, msg: format!("ORBSYM id {id} invalid for {group}") })?);
    }

    let mut h = DMatrix::zeros(n, n);
    let mut eri = Eri::zeros(n);
    let mut e_nuc = 0.0;
    let mut seen: HashMap<[usize; 4], f64> = HashMap::new();
    for &(line, l) in &lines[end + 1..] {
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 5 {
            return Err(Error::Parse { line, msg: format!("expected 'value i j k l', got {} fields", toks.len()) });
        }
        let v = parse_value(toks[0], line)?;
        let mut idx = [0usize; 4];
        for k in 0..4 {
            idx[k] = toks[k + 1]
                .parse::<usize>()
                .map_err(|_| Error::Parse { line, msg: format!("bad orbital index '{}'", toks[k + 1]) })?;
            if idx[k] > n {
                return Err(Error::Bounds { line, index: idx[k], norb: n });
            }
        }
        let [i, j, k, l] = idx;
        let key = if i > 0 && j > 0 && k > 0 && l > 0 {
            let (a, b) = (i.max(j), i.min(j));
            let (c, d) = (k.max(l), k.min(l));
            if (a, b) >= (c, d) { [a, b, c, d] } else { [c, d, a, b] }
        } else if i > 0 && j > 0 && k == 0 && l == 0 {
            [i.max(j), i.min(j), 0, 0]
        } else if i == 0 && j == 0 && k == 0 && l == 0 {
            [0; 4]
        } else if i > 0 && j == 0 && k == 0 && l == 0 {
            // orbital energy record
            continue;
        } else {
            return Err(Error::Parse { line, msg: format!("unrecognised index pattern {i} {j} {k} {l}") });
        };
        if let Some(&prev) = seen.get(&key) {
            if (prev - v).abs() > CONFLICT_TOL {
                return Err(Error::Consistency { key: format!("{key:?}"), first: prev, second: v });
            }
            continue;
        }
        seen.insert(key, v);
        match key {
            [0, 0, 0, 0] => e_nuc = v,
            [a, b, 0, 0] => {
                h[(a - 1, b - 1)] = v;
                h[(b - 1, a - 1)] = v;
            }
            [a, b, c, d] => eri.set(a - 1, b - 1, c - 1, d - 1, v),
        }
    }
    Ok(IntegralSet {
        n_orbitals: n,
        n_electrons: header.nelec,
        ms2: header.ms2,
        e_nuclear: e_nuc,
        h,
        eri,
        orbital_irreps: irreps,
        point_group: group,
    })
}

fn sci(v: f64) -> String {
    format!("{v:.14E}")
}

/// Write Molpro-convention FCIDUMP text with 15 significant digits.
pub fn emit_fcidump(ints: &IntegralSet) -> String {
    let n = ints.n_orbitals;
    let g = ints.point_group;
    let mut out = String::new();
    let orbsym: Vec<String> = ints.orbital_irreps.iter().map(|&l| g.to_molpro(l).to_string()).collect();
    let _ = writeln!(out, "&FCI NORB={n},NELEC={},MS2={},", ints.n_electrons, ints.ms2);
    let _ = writeln!(out, "  ORBSYM={},", orbsym.join(","));
    let _ = writeln!(out, "  ISYM={},", g.to_molpro(ints.reference_irrep()));
    let _ = writeln!(out, "&END");
    for i in 0..n {
        for j in 0..=i {
            for k in 0..=i {
                let lmax = if k == i { j } else { k };
                for l in 0..=lmax {
                    let v = ints.eri.get(i, j, k, l);
                    if v.abs() >= super::INTEGRAL_DROP {
                        let _ = writeln!(out, "{} {} {} {} {}", sci(v), i + 1, j + 1, k + 1, l + 1);
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..=i {
            let v = ints.h[(i, j)];
            if v.abs() >= super::INTEGRAL_DROP {
                let _ = writeln!(out, "{} {} {} 0 0", sci(v), i + 1, j + 1);
            }
        }
    }
    let _ = writeln!(out, "{} 0 0 0 0", sci(ints.e_nuclear));
    out
}
