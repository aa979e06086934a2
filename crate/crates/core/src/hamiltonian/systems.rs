use super::gaussian::{Atom, BasisSet, Contraction};
use crate::error::{Error, Result};

/// Three-primitive s basis for hydrogen.
pub const H_EXPONENTS: [f64; 3] = [4.50038, 0.681277, 0.151374];
pub const H_COEFFICIENTS: [f64; 3] = [0.07048, 0.40789, 0.64767];

/// Default H8 atom layout.
pub const H8_LAYOUT: &str = include_str!("../../data/h8_layout.txt");

fn hydrogen(position: [f64; 3]) -> Atom {
    Atom { charge: 1.0, position, shells: vec![Contraction::s(&H_EXPONENTS, &H_COEFFICIENTS)] }
}

/// Atom positions linear in a stretching parameter: r(b) = r0 + b d.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub sites: Vec<([f64; 3], [f64; 3])>,
}

impl Layout {
    pub fn positions(&self, b: f64) -> Vec<[f64; 3]> {
        self.sites.iter().map(|(r0, d)| [0, 1, 2].map(|k| r0[k] + b * d[k])).collect()
    }
}

/// Lines of `H x0 y0 z0 dx dy dz`; `#` starts a comment.
pub fn parse_layout(text: &str) -> Result<Layout> {
    let mut sites = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 7 {
            return Err(Error::Parse { line: i + 1, msg: "expected 'H x0 y0 z0 dx dy dz'".into() });
        }
        if !toks[0].eq_ignore_ascii_case("H") {
            return Err(Error::UnsupportedBasis(format!("element '{}' has no built-in basis", toks[0])));
        }
        let mut v = [0.0; 6];
        for k in 0..6 {
            v[k] = toks[k + 1]
                .parse()
                .map_err(|_| Error::Parse { line: i + 1, msg: format!("bad coordinate '{}'", toks[k + 1]) })?;
        }
        sites.push(([v[0], v[1], v[2]], [v[3], v[4], v[5]]));
    }
    if sites.is_empty() {
        return Err(Error::Geometry("layout lists no atoms".into()));
    }
    Ok(Layout { sites })
}

pub fn h8_basis(b: f64, layout: &Layout) -> Result<BasisSet> {
    if !b.is_finite() {
        return Err(Error::Geometry(format!("stretch parameter {b}")));
    }
    Ok(BasisSet { atoms: layout.positions(b).into_iter().map(hydrogen).collect(), charge: 0 })
}

/// H2 along z centred at the origin.
pub fn h2_basis(r: f64) -> Result<BasisSet> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Geometry(format!("bond length {r} must be positive")));
    }
    Ok(BasisSet { atoms: vec![hydrogen([0.0, 0.0, -r / 2.0]), hydrogen([0.0, 0.0, r / 2.0])], charge: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::run_rhf;
    use crate::symmetry::PointGroup;

    #[test]
    fn octagon_at_zero_stretch() {
        let layout = parse_layout(H8_LAYOUT).unwrap();
        let pos = layout.positions(0.0);
        assert_eq!(pos.len(), 8);
        let r: Vec<f64> = pos.iter().map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt()).collect();
        for x in &r {
            assert!((x - r[0]).abs() < 1e-12);
        }
        let d = |a: [f64; 3], b: [f64; 3]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        let nearest: Vec<f64> = pos
            .iter()
            .map(|&a| pos.iter().filter(|&&b| b != a).map(|&b| d(a, b)).fold(f64::INFINITY, f64::min))
            .collect();
        for x in nearest {
            assert!((x - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn h8_orbitals_span_expected_irreps() {
        let layout = parse_layout(H8_LAYOUT).unwrap();
        let rhf = run_rhf(&h8_basis(1.0, &layout).unwrap()).unwrap();
        let g = PointGroup::D2h;
        assert_eq!(rhf.point_group, g);
        let names: Vec<String> = rhf.irreps.iter().map(|&l| g.name(l)).collect();
        assert_eq!(&names[..4], &["Ag", "B2u", "B3u", "Ag"], "{names:?}");
        let mut virt = names[4..].to_vec();
        virt.sort();
        assert_eq!(virt, vec!["B1g", "B1g", "B2u", "B3u"]);
    }

    #[test]
    fn layout_errors() {
        assert!(matches!(parse_layout("He 0 0 0 0 0 0"), Err(Error::UnsupportedBasis(_))));
        assert!(matches!(parse_layout("H 0 0 0"), Err(Error::Parse { line: 1, .. })));
        assert!(h2_basis(-1.0).is_err());
    }
}
