//! Abelian point groups and irrep labels with XOR direct products.
//!
//! Labels follow the PySCF numbering, in which the product of two irreps is
//! the bitwise XOR of their labels. Molpro ORBSYM ids are mapped on input.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::BitXor;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IrrepLabel(pub u8);

impl IrrepLabel {
    pub const SYMMETRIC: IrrepLabel = IrrepLabel(0);

    pub fn product(self, other: IrrepLabel) -> IrrepLabel {
        IrrepLabel(self.0 ^ other.0)
    }

    pub fn is_symmetric(self) -> bool {
        self.0 == 0
    }
}

impl BitXor for IrrepLabel {
    type Output = IrrepLabel;
    fn bitxor(self, rhs: IrrepLabel) -> IrrepLabel {
        self.product(rhs)
    }
}

/// Direct product of a list of irreps.
pub fn product_of<I: IntoIterator<Item = IrrepLabel>>(labels: I) -> IrrepLabel {
    labels.into_iter().fold(IrrepLabel::SYMMETRIC, |a, b| a ^ b)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointGroup {
    #[default]
    C1,
    Ci,
    C2,
    Cs,
    C2h,
    C2v,
    D2,
    D2h,
}

impl PointGroup {
    pub fn order(self) -> u8 {
        match self {
            PointGroup::C1 => 1,
            PointGroup::Ci | PointGroup::C2 | PointGroup::Cs => 2,
            PointGroup::C2h | PointGroup::C2v | PointGroup::D2 => 4,
            PointGroup::D2h => 8,
        }
    }

    /// Irrep names indexed by label.
    pub fn irrep_names(self) -> &'static [&'static str] {
        match self {
            PointGroup::C1 => &["A"],
            PointGroup::Ci => &["Ag", "Au"],
            PointGroup::C2 => &["A", "B"],
            PointGroup::Cs => &["A'", "A''"],
            PointGroup::C2h => &["Ag", "Bg", "Au", "Bu"],
            PointGroup::C2v => &["A1", "A2", "B1", "B2"],
            PointGroup::D2 => &["A", "B1", "B2", "B3"],
            PointGroup::D2h => &["Ag", "B1g", "B2g", "B3g", "Au", "B1u", "B2u", "B3u"],
        }
    }

    /// Molpro id (1-based position) to label.
    fn molpro_table(self) -> &'static [u8] {
        match self {
            PointGroup::C1 => &[0],
            PointGroup::Ci | PointGroup::C2 | PointGroup::Cs => &[0, 1],
            PointGroup::C2h => &[0, 2, 3, 1],
            PointGroup::C2v => &[0, 2, 3, 1],
            PointGroup::D2 => &[0, 3, 2, 1],
            PointGroup::D2h => &[0, 7, 6, 1, 5, 2, 3, 4],
        }
    }

    pub fn from_molpro(self, id: usize) -> Option<IrrepLabel> {
        let table = self.molpro_table();
        if id == 0 || id > table.len() {
            return None;
        }
        Some(IrrepLabel(table[id - 1]))
    }

    pub fn to_molpro(self, label: IrrepLabel) -> usize {
        self.molpro_table()
            .iter()
            .position(|&l| l == label.0)
            .map(|p| p + 1)
            .unwrap_or(1)
    }

    pub fn name(self, label: IrrepLabel) -> String {
        self.irrep_names()
            .get(label.0 as usize)
            .map(|s| s.to_string())
            .unwrap_or_else(|| format!("#{}", label.0))
    }

    /// Case-insensitive irrep lookup; a bare integer is taken as a label.
    pub fn label_from_name(self, name: &str) -> Option<IrrepLabel> {
        let trimmed = name.trim();
        if let Ok(n) = trimmed.parse::<u8>() {
            return (n < self.order().max(8)).then_some(IrrepLabel(n));
        }
        self.irrep_names()
            .iter()
            .position(|s| s.eq_ignore_ascii_case(trimmed))
            .map(|p| IrrepLabel(p as u8))
    }

    pub fn contains(self, label: IrrepLabel) -> bool {
        label.0 < self.order()
    }
}

impl fmt::Display for PointGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PointGroup::C1 => "C1",
            PointGroup::Ci => "Ci",
            PointGroup::C2 => "C2",
            PointGroup::Cs => "Cs",
            PointGroup::C2h => "C2h",
            PointGroup::C2v => "C2v",
            PointGroup::D2 => "D2",
            PointGroup::D2h => "D2h",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for PointGroup {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "c1" => Ok(PointGroup::C1),
            "ci" => Ok(PointGroup::Ci),
            "c2" => Ok(PointGroup::C2),
            "cs" => Ok(PointGroup::Cs),
            "c2h" => Ok(PointGroup::C2h),
            "c2v" => Ok(PointGroup::C2v),
            "d2" => Ok(PointGroup::D2),
            "d2h" => Ok(PointGroup::D2h),
            other => Err(format!("unknown point group '{other}'")),
        }
    }
}

/// A D2h operation as a diagonal Cartesian matrix.
#[derive(Clone, Copy, Debug)]
pub struct D2hOperation {
    pub name: &'static str,
    pub signs: [f64; 3],
    char_mask: u8,
}

impl D2hOperation {
    /// Character of the irrep with the given label under this operation.
    pub fn character(&self, label: IrrepLabel) -> f64 {
        if (label.0 & self.char_mask).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn apply(&self, r: [f64; 3]) -> [f64; 3] {
        [r[0] * self.signs[0], r[1] * self.signs[1], r[2] * self.signs[2]]
    }
}

pub const D2H_OPERATIONS: [D2hOperation; 8] = [
    D2hOperation { name: "E", signs: [1.0, 1.0, 1.0], char_mask: 0b000 },
    D2hOperation { name: "C2z", signs: [-1.0, -1.0, 1.0], char_mask: 0b010 },
    D2hOperation { name: "C2y", signs: [-1.0, 1.0, -1.0], char_mask: 0b001 },
    D2hOperation { name: "C2x", signs: [1.0, -1.0, -1.0], char_mask: 0b011 },
    D2hOperation { name: "i", signs: [-1.0, -1.0, -1.0], char_mask: 0b100 },
    D2hOperation { name: "sxy", signs: [1.0, 1.0, -1.0], char_mask: 0b110 },
    D2hOperation { name: "sxz", signs: [1.0, -1.0, 1.0], char_mask: 0b101 },
    D2hOperation { name: "syz", signs: [-1.0, 1.0, 1.0], char_mask: 0b111 },
];
