//! Gate tallies.

use serde::Serialize;

use crate::gates::{Circuit, GateInstance, GateKind};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct GateCensus {
    pub one_qubit: usize,
    pub two_qubit: usize,
    pub toffoli: usize,
    pub cccnot: usize,
    pub other: usize,
}

impl GateCensus {
    pub fn total(&self) -> usize {
        self.one_qubit + self.two_qubit + self.toffoli + self.cccnot + self.other
    }

    fn record(&mut self, g: &GateInstance) {
        let mcx = g.kind == GateKind::X;
        match (g.arity(), g.controls.len()) {
            (1, _) => self.one_qubit += 1,
            (2, _) => self.two_qubit += 1,
            (3, 2) if mcx => self.toffoli += 1,
            (4, 3) if mcx => self.cccnot += 1,
            _ => self.other += 1,
        }
    }
}

/// Inclusive tolerance bands for a census. `one_qubit_min` is a strict
/// lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CensusBands {
    pub one_qubit_min: f64,
    pub two_qubit: (usize, usize),
    pub toffoli: (usize, usize),
    pub cccnot: (usize, usize),
}

impl CensusBands {
    /// ±30% around the reference counts for the first-order state circuit
    /// after multi-controlled expansion: more than 80 single-qubit gates,
    /// about 50 two-qubit gates, 38 Toffolis and 12 triple-controlled NOTs.
    pub const PSI1: CensusBands = CensusBands {
        one_qubit_min: 56.0,
        two_qubit: (35, 65),
        toffoli: (27, 49),
        cccnot: (8, 16),
    };

    pub fn contains(&self, c: &GateCensus) -> bool {
        let within = |x: usize, (lo, hi): (usize, usize)| (lo..=hi).contains(&x);
        c.one_qubit as f64 > self.one_qubit_min
            && within(c.two_qubit, self.two_qubit)
            && within(c.toffoli, self.toffoli)
            && within(c.cccnot, self.cccnot)
            && c.other == 0
    }
}

/// Counts by category. Control polarity is ignored, so an open-control
/// Toffoli still counts as a Toffoli.
pub fn gate_census(circuit: &Circuit) -> GateCensus {
    let mut c = GateCensus::default();
    circuit.gates().iter().for_each(|g| c.record(g));
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::Control;

    #[test]
    fn bands() {
        let mut c = GateCensus {
            one_qubit: 60,
            two_qubit: 40,
            toffoli: 30,
            cccnot: 8,
            other: 0,
        };
        assert!(CensusBands::PSI1.contains(&c));
        c.other = 1;
        assert!(!CensusBands::PSI1.contains(&c));
        c.other = 0;
        c.one_qubit = 56;
        assert!(!CensusBands::PSI1.contains(&c));
    }

    #[test]
    fn empty_is_zero() {
        assert_eq!(gate_census(&Circuit::new(3)), GateCensus::default());
    }

    #[test]
    fn categories() {
        let c = Circuit::from_gates(
            5,
            vec![
                GateInstance::h(0),
                GateInstance::cx(0, 1),
                GateInstance::swap(1, 2),
                GateInstance::ccx(0, 1, 2),
                GateInstance::controlled(
                    GateKind::X,
                    vec![Control::on(0), Control::off(1), Control::on(2)],
                    3,
                ),
                GateInstance::controlled(GateKind::Ry(0.2), vec![Control::on(0), Control::on(1)], 4),
            ],
        );
        let g = gate_census(&c);
        assert_eq!(
            g,
            GateCensus {
                one_qubit: 1,
                two_qubit: 2,
                toffoli: 1,
                cccnot: 1,
                other: 1
            }
        );
        assert_eq!(g.total(), c.len());
    }
}
