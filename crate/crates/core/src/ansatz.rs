//! Circuit IR and ansatz builders.
//!
//! Every family starts from `|0…0⟩`. The mean-field block is `RY(θ_p) RZ(φ_p)` on
//! each qubit `p`. CNOT and CRX circuits apply the mean-field block and then
//! `L` entangler layers; TQR circuits apply the `L` entangler layers first and
//! the mean-field block last. A TQR entangler applies `RXX(α_ij)` then
//! `RYY(β_ij)` on each pair. Parameter slots are numbered in emission order.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::qstate::{gates, StateVector, TwoQubitAxis};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Ry,
    Rz,
    Rx,
    Cnot,
    Crx,
    Rxx,
    Ryy,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Ry | GateKind::Rz | GateKind::Rx => 1,
            _ => 2,
        }
    }

    pub fn is_parametric(self) -> bool {
        self != GateKind::Cnot
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::Rx => "RX",
            GateKind::Cnot => "CNOT",
            GateKind::Crx => "CRX",
            GateKind::Rxx => "RXX",
            GateKind::Ryy => "RYY",
        }
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "RY" => GateKind::Ry,
            "RZ" => GateKind::Rz,
            "RX" => GateKind::Rx,
            "CNOT" => GateKind::Cnot,
            "CRX" => GateKind::Crx,
            "RXX" => GateKind::Rxx,
            "RYY" => GateKind::Ryy,
            other => return Err(Error::Validation(format!("unknown gate kind {other:?}"))),
        })
    }
}

/// One gate. For CNOT and CRX `qubits[0]` is the control.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateInstr {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub param_slot: Option<usize>,
}

impl GateInstr {
    pub fn one(kind: GateKind, q: usize, slot: usize) -> Self {
        Self {
            kind,
            qubits: vec![q],
            param_slot: Some(slot),
        }
    }

    pub fn two(kind: GateKind, a: usize, b: usize, slot: Option<usize>) -> Self {
        Self {
            kind,
            qubits: vec![a, b],
            param_slot: slot,
        }
    }
}

impl fmt::Display for GateInstr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.name())?;
        for q in &self.qubits {
            write!(f, " {q}")?;
        }
        if let Some(s) = self.param_slot {
            write!(f, " {s}")?;
        }
        Ok(())
    }
}

/// Validated, immutable gate sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    num_qubits: usize,
    instrs: Vec<GateInstr>,
    num_params: usize,
}

impl Circuit {
    /// Checks arity, qubit ranges, and that the slots are exactly `0..num_params`.
    pub fn new(num_qubits: usize, instrs: Vec<GateInstr>, num_params: usize) -> Result<Self> {
        let mut used = vec![false; num_params];
        for (k, g) in instrs.iter().enumerate() {
            if g.qubits.len() != g.kind.arity() {
                return Err(Error::Validation(format!(
                    "instruction {k} ({g}) has {} qubits, {} expects {}",
                    g.qubits.len(),
                    g.kind.name(),
                    g.kind.arity()
                )));
            }
            if g.qubits.iter().any(|&q| q >= num_qubits) {
                return Err(Error::Validation(format!(
                    "instruction {k} ({g}) addresses a qubit outside 0..{num_qubits}"
                )));
            }
            if g.qubits.len() == 2 && g.qubits[0] == g.qubits[1] {
                return Err(Error::Validation(format!(
                    "instruction {k} ({g}) repeats a qubit"
                )));
            }
            match (g.kind.is_parametric(), g.param_slot) {
                (true, Some(s)) if s < num_params => used[s] = true,
                (true, Some(s)) => {
                    return Err(Error::Validation(format!(
                        "instruction {k} ({g}) uses slot {s} >= {num_params}"
                    )))
                }
                (true, None) => {
                    return Err(Error::Validation(format!(
                        "instruction {k} ({g}) is missing its parameter slot"
                    )))
                }
                (false, Some(_)) => {
                    return Err(Error::Validation(format!(
                        "instruction {k} ({g}) takes no parameter"
                    )))
                }
                (false, None) => {}
            }
        }
        if let Some(s) = used.iter().position(|u| !u) {
            return Err(Error::Validation(format!("parameter slot {s} is never used")));
        }
        Ok(Self {
            num_qubits,
            instrs,
            num_params,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn instrs(&self) -> &[GateInstr] {
        &self.instrs
    }

    /// Applies the instructions in order to `|0…0⟩`.
    pub fn run(&self, params: &[f64]) -> Result<StateVector> {
        if params.len() != self.num_params {
            return Err(Error::Argument(format!(
                "circuit takes {} parameters, got {}",
                self.num_params,
                params.len()
            )));
        }
        let mut psi = StateVector::zero_state(self.num_qubits)?;
        for g in &self.instrs {
            let angle = g.param_slot.map(|s| params[s]).unwrap_or(0.0);
            let q = &g.qubits;
            match g.kind {
                GateKind::Ry => psi.apply_1q(&gates::ry(angle), q[0])?,
                GateKind::Rz => psi.apply_1q(&gates::rz(angle), q[0])?,
                GateKind::Rx => psi.apply_1q(&gates::rx(angle), q[0])?,
                GateKind::Cnot => psi.apply_ctrl_1q(&gates::pauli_x(), q[0], q[1])?,
                GateKind::Crx => psi.apply_ctrl_1q(&gates::rx(angle), q[0], q[1])?,
                GateKind::Rxx => psi.apply_2q_rotation(TwoQubitAxis::XX, angle, q[0], q[1])?,
                GateKind::Ryy => psi.apply_2q_rotation(TwoQubitAxis::YY, angle, q[0], q[1])?,
            }
        }
        Ok(psi)
    }

    /// Line-oriented text: a `CIRCUIT <qubits> <params>` header, then one
    /// `KIND q0 [q1] [slot]` line per instruction.
    pub fn to_text(&self) -> String {
        let mut out = format!("CIRCUIT {} {}\n", self.num_qubits, self.num_params);
        for g in &self.instrs {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }

    /// Parses [`Circuit::to_text`] output. Blank lines and `#` comments are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .enumerate()
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Validation("empty circuit text".into()))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        let (num_qubits, num_params) = match head.as_slice() {
            ["CIRCUIT", q, p] => (parse_usize(q, 1)?, parse_usize(p, 1)?),
            _ => {
                return Err(Error::Validation(format!(
                    "expected `CIRCUIT <qubits> <params>` header, got {header:?}"
                )))
            }
        };
        let mut instrs = Vec::new();
        for (lineno, line) in lines {
            let tok: Vec<&str> = line.split_whitespace().collect();
            let kind: GateKind = tok[0].parse()?;
            let nq = kind.arity();
            let expected = nq + usize::from(kind.is_parametric());
            if tok.len() != 1 + expected {
                return Err(Error::Validation(format!(
                    "line {}: {} expects {expected} fields, got {}",
                    lineno + 1,
                    kind.name(),
                    tok.len() - 1
                )));
            }
            let qubits = tok[1..=nq]
                .iter()
                .map(|t| parse_usize(t, lineno + 1))
                .collect::<Result<Vec<_>>>()?;
            let param_slot = if kind.is_parametric() {
                Some(parse_usize(tok[nq + 1], lineno + 1)?)
            } else {
                None
            };
            instrs.push(GateInstr {
                kind,
                qubits,
                param_slot,
            });
        }
        Self::new(num_qubits, instrs, num_params)
    }
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::Validation(format!("line {line}: expected an index, got {tok:?}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    MeanField,
    Cnot,
    Crx,
    Tqr,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::MeanField => "MF",
            Family::Cnot => "CNOT",
            Family::Crx => "CRX",
            Family::Tqr => "TQR",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "MF" | "MEAN-FIELD" | "MEANFIELD" => Ok(Family::MeanField),
            "CNOT" => Ok(Family::Cnot),
            "CRX" => Ok(Family::Crx),
            "TQR" => Ok(Family::Tqr),
            _ => Err(Error::Validation(format!(
                "unknown ansatz family {s:?} (expected MF, CNOT, CRX or TQR)"
            ))),
        }
    }
}

/// Which qubit pairs an entangler layer couples, in application order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Connectivity {
    Linear,
    Full,
    /// Pairs `i < j` with `j - i <= r`.
    Range(usize),
    /// Directed pairs in application order; the first entry is the control.
    Explicit(Vec<(usize, usize)>),
}

impl Connectivity {
    pub fn pairs(&self, n: usize) -> Result<Vec<(usize, usize)>> {
        let range = |r: usize| -> Vec<(usize, usize)> {
            (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .filter(|(i, j)| j - i <= r)
                .collect()
        };
        match self {
            Connectivity::Linear => Ok(range(1)),
            Connectivity::Full => Ok(range(n.saturating_sub(1))),
            Connectivity::Range(0) => Err(Error::Validation("range r must be positive".into())),
            Connectivity::Range(r) => Ok(range(*r)),
            Connectivity::Explicit(pairs) => {
                for &(a, b) in pairs {
                    if a >= n || b >= n {
                        return Err(Error::Validation(format!(
                            "pair ({a},{b}) outside 0..{n}"
                        )));
                    }
                    if a == b {
                        return Err(Error::Validation(format!("pair ({a},{b}) repeats a qubit")));
                    }
                }
                Ok(pairs.clone())
            }
        }
    }
}

impl fmt::Display for Connectivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Connectivity::Linear => f.write_str("linear"),
            Connectivity::Full => f.write_str("full"),
            Connectivity::Range(r) => write!(f, "range:{r}"),
            Connectivity::Explicit(p) => {
                for (a, b) in p {
                    write!(f, "({a},{b})")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Connectivity {
    type Err = Error;

    /// `linear`, `full`, `range:<r>`, or a pair list such as `(0,1)(2,1)`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "linear" => return Ok(Connectivity::Linear),
            "full" => return Ok(Connectivity::Full),
            _ => {}
        }
        if let Some(r) = t.strip_prefix("range:") {
            let r: usize = r
                .trim()
                .parse()
                .map_err(|_| Error::Validation(format!("bad range in connectivity {s:?}")))?;
            return Ok(Connectivity::Range(r));
        }
        if t.starts_with('(') {
            let mut pairs = Vec::new();
            for chunk in t.split(')').map(str::trim).filter(|c| !c.is_empty()) {
                let inner = chunk
                    .strip_prefix('(')
                    .ok_or_else(|| Error::Validation(format!("bad pair list {s:?}")))?;
                let (a, b) = inner
                    .split_once(',')
                    .ok_or_else(|| Error::Validation(format!("bad pair list {s:?}")))?;
                let parse = |x: &str| {
                    x.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Validation(format!("bad pair list {s:?}")))
                };
                pairs.push((parse(a)?, parse(b)?));
            }
            return Ok(Connectivity::Explicit(pairs));
        }
        Err(Error::Validation(format!(
            "unknown connectivity {s:?} (expected linear, full, range:<r> or a pair list)"
        )))
    }
}

/// Declarative ansatz description.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AnsatzSpec {
    pub family: Family,
    pub connectivity: Connectivity,
    pub layers: usize,
    pub n: usize,
    /// Repeat the mean-field block in every layer instead of once.
    pub interleave_mf: bool,
}

impl AnsatzSpec {
    pub fn new(family: Family, connectivity: Connectivity, layers: usize, n: usize) -> Self {
        Self {
            family,
            connectivity,
            layers,
            n,
            interleave_mf: false,
        }
    }

    pub fn mean_field(n: usize) -> Self {
        Self::new(Family::MeanField, Connectivity::Full, 1, n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Validation("ansatz needs at least one qubit".into()));
        }
        if self.layers == 0 {
            return Err(Error::Validation("layers must be >= 1".into()));
        }
        if self.family != Family::MeanField {
            self.connectivity.pairs(self.n)?;
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Circuit> {
        self.validate()?;
        let n = self.n;
        let mut instrs = Vec::new();
        let mut slot = 0usize;
        let mut next = || {
            slot += 1;
            slot - 1
        };
        let mf_block = |instrs: &mut Vec<GateInstr>, next: &mut dyn FnMut() -> usize| {
            for p in 0..n {
                instrs.push(GateInstr::one(GateKind::Ry, p, next()));
                instrs.push(GateInstr::one(GateKind::Rz, p, next()));
            }
        };
        if self.family == Family::MeanField {
            mf_block(&mut instrs, &mut next);
            return Circuit::new(n, instrs, 2 * n);
        }
        let pairs = self.connectivity.pairs(n)?;
        let entangler = |instrs: &mut Vec<GateInstr>, next: &mut dyn FnMut() -> usize| {
            for &(a, b) in &pairs {
                match self.family {
                    Family::Cnot => instrs.push(GateInstr::two(GateKind::Cnot, a, b, None)),
                    Family::Crx => instrs.push(GateInstr::two(GateKind::Crx, a, b, Some(next()))),
                    Family::Tqr => {
                        instrs.push(GateInstr::two(GateKind::Rxx, a, b, Some(next())));
                        instrs.push(GateInstr::two(GateKind::Ryy, a, b, Some(next())));
                    }
                    Family::MeanField => unreachable!(),
                }
            }
        };
        let entangler_first = self.family == Family::Tqr;
        for layer in 0..self.layers {
            let with_mf = self.interleave_mf || layer == 0;
            if with_mf && !entangler_first {
                mf_block(&mut instrs, &mut next);
            }
            entangler(&mut instrs, &mut next);
            if self.interleave_mf && entangler_first {
                mf_block(&mut instrs, &mut next);
            }
        }
        if entangler_first && !self.interleave_mf {
            mf_block(&mut instrs, &mut next);
        }
        let num_params = next();
        Circuit::new(n, instrs, num_params)
    }

    pub fn param_count(&self) -> Result<usize> {
        self.validate()?;
        let mf = 2 * self.n;
        if self.family == Family::MeanField {
            return Ok(mf);
        }
        let per_pair = match self.family {
            Family::Cnot => 0,
            Family::Crx => 1,
            Family::Tqr => 2,
            Family::MeanField => unreachable!(),
        };
        let per_layer = per_pair * self.connectivity.pairs(self.n)?.len();
        let mf_blocks = if self.interleave_mf { self.layers } else { 1 };
        Ok(mf_blocks * mf + self.layers * per_layer)
    }
}

impl fmt::Display for AnsatzSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.family == Family::MeanField {
            return write!(f, "MF(N={})", self.n);
        }
        write!(
            f,
            "{}[{}](N={}, L={}{})",
            self.family,
            self.connectivity,
            self.n,
            self.layers,
            if self.interleave_mf { ", interleaved" } else { "" }
        )
    }
}

/// Size of the space of orderings and directions of the full pair set:
/// `m! · 2^m` with `m = C(N, 2)`.
pub fn gate_order_space_size(n: usize) -> Result<u64> {
    let m = n * n.saturating_sub(1) / 2;
    if m > 12 {
        return Err(Error::Argument(format!(
            "gate-order enumeration limited to C(N,2) <= 12, got {m} for N={n}"
        )));
    }
    let fact: u64 = (1..=m as u64).product();
    Ok(fact << m)
}

/// Samples `count` distinct orderings (with control/target directions) of the
/// full pair set.
pub fn enumerate_gate_orders(n: usize, rng: &mut SimRng, count: usize) -> Result<Vec<Connectivity>> {
    let space = gate_order_space_size(n)?;
    if count as u64 > space {
        return Err(Error::Argument(format!(
            "requested {count} orders but only {space} exist for N={n}"
        )));
    }
    let base = Connectivity::Full.pairs(n)?;
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut pairs = base.clone();
        pairs.shuffle(rng);
        for p in pairs.iter_mut() {
            if rng.gen::<bool>() {
                *p = (p.1, p.0);
            }
        }
        if seen.insert(pairs.clone()) {
            out.push(Connectivity::Explicit(pairs));
        }
    }
    Ok(out)
}

/// Convenience wrapper for [`Circuit::run`].
pub fn run_circuit(c: &Circuit, params: &[f64]) -> Result<StateVector> {
    c.run(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Pauli, PauliString, XYModel};
    use crate::rng;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn spec(f: Family, c: Connectivity, l: usize) -> AnsatzSpec {
        AnsatzSpec::new(f, c, l, 4)
    }

    fn count(c: &Circuit, k: GateKind) -> usize {
        c.instrs().iter().filter(|g| g.kind == k).count()
    }

    #[test]
    fn mean_field_layout() {
        let c = AnsatzSpec::mean_field(4).build().unwrap();
        assert_eq!(c.instrs().len(), 8);
        assert_eq!(c.num_params(), 8);
        assert_eq!(c.instrs()[0], GateInstr::one(GateKind::Ry, 0, 0));
        assert_eq!(c.instrs()[1], GateInstr::one(GateKind::Rz, 0, 1));
        assert_eq!(c.instrs()[7], GateInstr::one(GateKind::Rz, 3, 7));
    }

    #[test]
    fn full_crx_counts() {
        let c = spec(Family::Crx, Connectivity::Full, 1).build().unwrap();
        assert_eq!(count(&c, GateKind::Crx), 6);
        assert_eq!(count(&c, GateKind::Ry) + count(&c, GateKind::Rz), 8);
        assert_eq!(c.num_params(), 14);
        // mean-field block first
        assert_eq!(c.instrs()[0].kind, GateKind::Ry);
        assert_eq!(c.instrs()[8], GateInstr::two(GateKind::Crx, 0, 1, Some(8)));
    }

    #[test]
    fn full_tqr_counts_and_order() {
        let c = spec(Family::Tqr, Connectivity::Full, 1).build().unwrap();
        assert_eq!(count(&c, GateKind::Rxx) + count(&c, GateKind::Ryy), 12);
        assert_eq!(c.instrs().len(), 20);
        assert_eq!(c.num_params(), 20);
        // entangler first, RXX then RYY per pair
        assert_eq!(c.instrs()[0], GateInstr::two(GateKind::Rxx, 0, 1, Some(0)));
        assert_eq!(c.instrs()[1], GateInstr::two(GateKind::Ryy, 0, 1, Some(1)));
        assert_eq!(c.instrs()[2].qubits, vec![0, 2]);
        assert_eq!(c.instrs()[12].kind, GateKind::Ry);
    }

    #[test]
    fn parameter_counts() {
        for l in 1..=5 {
            assert_eq!(spec(Family::Cnot, Connectivity::Full, l).param_count().unwrap(), 8);
        }
        assert_eq!(spec(Family::Tqr, Connectivity::Linear, 1).param_count().unwrap(), 14);
        assert_eq!(spec(Family::Crx, Connectivity::Full, 4).param_count().unwrap(), 32);
        for fam in [Family::MeanField, Family::Cnot, Family::Crx, Family::Tqr] {
            for conn in [
                Connectivity::Linear,
                Connectivity::Full,
                Connectivity::Range(2),
                Connectivity::Explicit(vec![(3, 0), (1, 2)]),
            ] {
                for l in 1..=4 {
                    for inter in [false, true] {
                        let mut s = spec(fam, conn.clone(), l);
                        s.interleave_mf = inter;
                        assert_eq!(s.param_count().unwrap(), s.build().unwrap().num_params());
                    }
                }
            }
        }
    }

    #[test]
    fn layer_params_add_linearly() {
        for fam in [Family::Crx, Family::Tqr] {
            let one = spec(fam, Connectivity::Full, 1).param_count().unwrap();
            let per_layer = one - 8;
            for l in 1..=5 {
                assert_eq!(spec(fam, Connectivity::Full, l).param_count().unwrap(), 8 + l * per_layer);
            }
        }
    }

    #[test]
    fn range_edge_cases_match_linear_and_full() {
        for fam in [Family::Cnot, Family::Crx, Family::Tqr] {
            for n in 2..=6 {
                let b = |c| AnsatzSpec::new(fam, c, 2, n).build().unwrap();
                assert_eq!(b(Connectivity::Range(1)), b(Connectivity::Linear));
                assert_eq!(b(Connectivity::Range(n - 1)), b(Connectivity::Full));
                assert_eq!(b(Connectivity::Range(n + 3)), b(Connectivity::Full));
            }
        }
    }

    #[test]
    fn explicit_validation() {
        let bad = spec(Family::Crx, Connectivity::Explicit(vec![(0, 4)]), 1);
        assert!(matches!(bad.build(), Err(Error::Validation(_))));
        let bad = spec(Family::Crx, Connectivity::Explicit(vec![(2, 2)]), 1);
        assert!(matches!(bad.build(), Err(Error::Validation(_))));
        assert!(spec(Family::Crx, Connectivity::Range(0), 1).build().is_err());
        assert!(spec(Family::Crx, Connectivity::Full, 0).build().is_err());
        let ok = spec(Family::Cnot, Connectivity::Explicit(vec![(3, 1), (0, 2)]), 1)
            .build()
            .unwrap();
        assert_eq!(ok.instrs()[8], GateInstr::two(GateKind::Cnot, 3, 1, None));
    }

    #[test]
    fn interleaved_layers() {
        let mut s = spec(Family::Crx, Connectivity::Linear, 2);
        s.interleave_mf = true;
        let c = s.build().unwrap();
        let kinds: Vec<GateKind> = c.instrs().iter().map(|g| g.kind).collect();
        assert_eq!(kinds[8..11], [GateKind::Crx; 3]);
        assert_eq!(kinds[11], GateKind::Ry);
        assert_eq!(c.num_params(), 2 * (8 + 3));
    }

    #[test]
    fn gate_order_space() {
        assert_eq!(gate_order_space_size(4).unwrap(), 46080);
        assert_eq!(gate_order_space_size(2).unwrap(), 2);
        assert_eq!(gate_order_space_size(3).unwrap(), 48);
        assert!(gate_order_space_size(6).is_err());
    }

    #[test]
    fn gate_order_sampling() {
        let orders = enumerate_gate_orders(2, &mut rng::seeded(1), 2).unwrap();
        assert_eq!(orders.len(), 2);
        assert_ne!(orders[0], orders[1]);
        assert!(enumerate_gate_orders(2, &mut rng::seeded(1), 3).is_err());

        let all = enumerate_gate_orders(3, &mut rng::seeded(4), 48).unwrap();
        let distinct: HashSet<_> = all.iter().cloned().collect();
        assert_eq!(distinct.len(), 48);

        let a = enumerate_gate_orders(4, &mut rng::seeded(9), 10).unwrap();
        let b = enumerate_gate_orders(4, &mut rng::seeded(9), 10).unwrap();
        assert_eq!(a, b);
        for o in &a {
            let pairs = o.pairs(4).unwrap();
            assert_eq!(pairs.len(), 6);
            let mut undirected: Vec<_> =
                pairs.iter().map(|&(x, y)| (x.min(y), x.max(y))).collect();
            undirected.sort();
            assert_eq!(undirected, Connectivity::Full.pairs(4).unwrap());
        }
    }

    #[test]
    fn run_mean_field_plus_states() {
        let c = AnsatzSpec::mean_field(3).build().unwrap();
        let params: Vec<f64> = (0..6).map(|k| if k % 2 == 0 { PI / 2.0 } else { 0.0 }).collect();
        let psi = c.run(&params).unwrap();
        let a = (1.0f64 / 8.0).sqrt();
        assert!(psi.amplitudes().iter().all(|z| (z.re - a).abs() < 1e-15 && z.im.abs() < 1e-15));
        assert!(matches!(c.run(&params[..5]), Err(Error::Argument(_))));
    }

    #[test]
    fn zero_parameters_give_vacuum() {
        for fam in [Family::Crx, Family::Tqr, Family::Cnot] {
            let c = spec(fam, Connectivity::Full, 2).build().unwrap();
            let psi = c.run(&vec![0.0; c.num_params()]).unwrap();
            assert_eq!(psi, StateVector::zero_state(4).unwrap());
        }
    }

    /// N = 2, θ = π/2, φ = 0 gives |+⟩|+⟩ = (|00⟩+|10⟩+|01⟩+|11⟩)/2; CNOT(0→1)
    /// swaps the amplitudes of indices 1 and 3, which are equal, so the output
    /// is again the uniform superposition.
    #[test]
    fn cnot_on_uniform_superposition() {
        let c = AnsatzSpec::new(Family::Cnot, Connectivity::Full, 1, 2).build().unwrap();
        let psi = c.run(&[PI / 2.0, 0.0, PI / 2.0, 0.0]).unwrap();
        for z in psi.amplitudes() {
            assert!((z - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
        // with θ_1 = 0 the CNOT output is the Bell state (|00⟩+|11⟩)/√2
        let psi = c.run(&[PI / 2.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((psi.amplitudes()[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((psi.amplitudes()[3].re - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn text_round_trip() {
        for s in [
            spec(Family::Tqr, Connectivity::Range(2), 2),
            spec(Family::Cnot, Connectivity::Explicit(vec![(1, 3), (1, 0), (3, 2)]), 1),
            spec(Family::Crx, Connectivity::Full, 3),
            AnsatzSpec::mean_field(4),
        ] {
            let c = s.build().unwrap();
            let text = c.to_text();
            assert_eq!(Circuit::from_text(&text).unwrap(), c);
        }
        let t = "CIRCUIT 2 1\n# comment\nCNOT 0 1\nCRX 1 0 0\n";
        let c = Circuit::from_text(t).unwrap();
        assert_eq!(c.instrs().len(), 2);
        assert!(Circuit::from_text("CIRCUIT 2 1\nCRX 0 1\n").is_err());
        assert!(Circuit::from_text("CIRCUIT 2 2\nCRX 0 1 0\n").is_err());
        assert!(Circuit::from_text("CIRCUIT 2 0\nFOO 0\n").is_err());
    }

    #[test]
    fn connectivity_parsing() {
        assert_eq!("full".parse::<Connectivity>().unwrap(), Connectivity::Full);
        assert_eq!("range:2".parse::<Connectivity>().unwrap(), Connectivity::Range(2));
        let e: Connectivity = "(1,3)(1,0)(3,2)".parse().unwrap();
        assert_eq!(e, Connectivity::Explicit(vec![(1, 3), (1, 0), (3, 2)]));
        assert_eq!(e.to_string().parse::<Connectivity>().unwrap(), e);
        assert!("ring".parse::<Connectivity>().is_err());
        assert!("CZX".parse::<Family>().is_err());
    }

    fn xy_energy(c: &Circuit, p: &[f64]) -> f64 {
        XYModel::new(1.0, 0.4, c.num_qubits()).unwrap().energy(&c.run(p).unwrap()).unwrap()
    }

    /// Two-term shift for `e^{-iθP/2}`; four-term shift for controlled
    /// rotations, whose generator has eigenvalues {0, ±1/2}.
    fn shift_derivative(c: &Circuit, p: &[f64], slot: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
        let at = |d: f64| {
            let mut q = p.to_vec();
            q[slot] += d;
            f(&q)
        };
        let kind = c.instrs().iter().find(|g| g.param_slot == Some(slot)).unwrap().kind;
        if kind == GateKind::Crx {
            let s2 = 2f64.sqrt();
            let a = (s2 + 1.0) / (4.0 * s2);
            let b = (s2 - 1.0) / (4.0 * s2);
            a * (at(PI / 2.0) - at(-PI / 2.0)) - b * (at(3.0 * PI / 2.0) - at(-3.0 * PI / 2.0))
        } else {
            0.5 * (at(PI / 2.0) - at(-PI / 2.0))
        }
    }

    #[test]
    fn parameter_shift_matches_finite_differences() {
        let mut r = rng::seeded(17);
        for fam in [Family::Crx, Family::Tqr] {
            let c = spec(fam, Connectivity::Full, 1).build().unwrap();
            let p: Vec<f64> = (0..c.num_params()).map(|_| r.gen_range(-PI..PI)).collect();
            let f = |q: &[f64]| xy_energy(&c, q);
            for slot in 0..c.num_params() {
                let h = 1e-5;
                let mut up = p.clone();
                let mut dn = p.clone();
                up[slot] += h;
                dn[slot] -= h;
                let fd = (f(&up) - f(&dn)) / (2.0 * h);
                let ps = shift_derivative(&c, &p, slot, f);
                assert!((fd - ps).abs() <= 1e-6, "{fam} slot {slot}: {fd} vs {ps}");
            }
        }
    }

    #[test]
    fn crx_generator_is_controlled() {
        // ⟨Z_1⟩ after CRX(θ) on |1⟩|0⟩ is cos θ
        let c = Circuit::new(2, vec![GateInstr::two(GateKind::Crx, 0, 1, Some(0))], 1).unwrap();
        let z1 = PauliString::new(1.0, vec![Pauli::I, Pauli::Z]);
        let mut psi = c.run(&[0.8]).unwrap();
        assert!((z1.expectation(&psi).unwrap() - 1.0).abs() < 1e-15);
        psi = StateVector::basis_state(2, 1).unwrap();
        psi.apply_ctrl_1q(&gates::rx(0.8), 0, 1).unwrap();
        assert!((z1.expectation(&psi).unwrap() - 0.8f64.cos()).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn circuits_preserve_norm(
            fam in prop_oneof![Just(Family::Cnot), Just(Family::Crx), Just(Family::Tqr)],
            layers in 1usize..4,
            seed in any::<u64>(),
        ) {
            let c = spec(fam, Connectivity::Full, layers).build().unwrap();
            let mut r = rng::seeded(seed);
            let p: Vec<f64> = (0..c.num_params()).map(|_| r.gen_range(-PI..PI)).collect();
            prop_assert!((c.run(&p).unwrap().norm_sqr() - 1.0).abs() <= 1e-10);
        }
    }
}
