//! Dipole detection and cancellation.

use super::{Diagram, DiagramError, End, TransistorId};
use crate::coeff::coeff_multiply;

/// Two transistors that cancel: every top wire of `lower` runs, in order, to
/// the bottom side of `upper`, with identity coefficients, and the outer
/// sides spell the same word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dipole {
    pub lower: TransistorId,
    pub upper: TransistorId,
}

impl Diagram {
    fn dipole_under(&self, upper: TransistorId) -> Option<Dipole> {
        let up = &self.transistors[upper];
        let End::Transistor(lower, 0) = self.wires[up.bottom[0]].bottom else {
            return None;
        };
        let low = &self.transistors[lower];
        if low.top.len() != up.bottom.len() {
            return None;
        }
        for (j, &w) in up.bottom.iter().enumerate() {
            let wire = &self.wires[w];
            if wire.bottom != End::Transistor(lower, j) || !wire.coeff.is_identity() {
                return None;
            }
        }
        let pres = self.pres();
        if pres.bottom_side(low.relation, low.dir) != pres.top_side(up.relation, up.dir) {
            return None;
        }
        Some(Dipole { lower, upper })
    }

    /// Every dipole of the diagram, ordered by upper transistor.
    pub fn dipoles(&self) -> Vec<Dipole> {
        (0..self.transistors.len()).filter_map(|t| self.dipole_under(t)).collect()
    }

    pub fn is_reduced(&self) -> bool {
        (0..self.transistors.len()).all(|t| self.dipole_under(t).is_none())
    }

    /// Removes the dipole in place, leaving dead slots behind. Returns the
    /// transistors that may now sit on top of a new dipole.
    fn cancel(&mut self, dip: Dipole) -> Vec<TransistorId> {
        let above = std::mem::take(&mut self.transistors[dip.upper].top);
        let below = std::mem::take(&mut self.transistors[dip.lower].bottom);
        let mut touched = Vec::new();
        for (&a, &b) in above.iter().zip(below.iter()) {
            let end = self.wires[b].bottom;
            let merged = coeff_multiply(&self.wires[a].coeff, &self.wires[b].coeff).expect("wire groups agree");
            self.wires[a].coeff = merged;
            self.wires[a].bottom = end;
            match end {
                End::Frame(p) => self.bottom_ports[p] = a,
                End::Transistor(t, k) => self.transistors[t].top[k] = a,
            }
            if let End::Transistor(t, _) = self.wires[a].top {
                touched.push(t);
            }
        }
        touched
    }

    /// Cancels one dipole, as returned by [`Diagram::dipoles`].
    pub fn reduce_dipole(&self, dip: Dipole) -> Result<Diagram, DiagramError> {
        if dip.upper >= self.transistors.len() || self.dipole_under(dip.upper) != Some(dip) {
            return Err(DiagramError::Malformed(format!("{dip:?} is not a dipole")));
        }
        let mut d = self.clone();
        d.cancel(dip);
        Ok(d.canonical())
    }

    /// Cancels dipoles until none remain.
    pub fn reduce(&self) -> Diagram {
        let n = self.transistors.len();
        let mut alive = vec![true; n];
        let mut work: Vec<TransistorId> = (0..n).rev().collect();
        let mut d = self.clone();
        let mut changed = false;
        while let Some(u) = work.pop() {
            if !alive[u] {
                continue;
            }
            if let Some(dip) = d.dipole_under(u) {
                alive[dip.upper] = false;
                alive[dip.lower] = false;
                work.extend(d.cancel(dip));
                changed = true;
            }
        }
        if changed {
            d.canonical()
        } else {
            d
        }
    }
}
