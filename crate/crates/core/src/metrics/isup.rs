use crate::error::{contract, Result};

/// Primary and secondary Gleason patterns, each in `1..=5`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GleasonPair {
    pub primary: u8,
    pub secondary: u8,
}

impl GleasonPair {
    pub fn new(primary: u8, secondary: u8) -> Result<Self> {
        for p in [primary, secondary] {
            if !(1..=5).contains(&p) {
                return Err(contract(format!("Gleason pattern {p} outside 1..=5")));
            }
        }
        Ok(Self { primary, secondary })
    }

    pub fn total(self) -> u8 {
        self.primary + self.secondary
    }
}

/// ISUP grade group 1–5. A total of 7 splits on the primary pattern:
/// primary below 4 gives grade 2, otherwise 3.
pub fn isup_from_gleason(g: GleasonPair) -> Result<u8> {
    let g = GleasonPair::new(g.primary, g.secondary)?;
    Ok(match g.total() {
        0..=6 => 1,
        7 if g.primary < 4 => 2,
        7 => 3,
        8 => 4,
        _ => 5,
    })
}
