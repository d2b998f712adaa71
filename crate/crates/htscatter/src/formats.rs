//! CSV tables, the coordinate matrix format and the circuit text format.

use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

use htscatter_core::circuit::{Circuit, Gate};
use htscatter_core::fock::{FockState, TruncatedBasis};
use htscatter_core::hamiltonian::SymmetricOperator;
use htscatter_core::StateVector;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn format_error(line: usize, message: impl Into<String>) -> FormatError {
    FormatError {
        line,
        message: message.into(),
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// 17 significant digits in scientific notation.
pub fn exact(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV table preceded by `# key = value` comment lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub comments: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            comments: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.comments.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for (k, v) in &self.comments {
            out.extend_from_slice(format!("# {k} = {v}\n").as_bytes());
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header).expect("writing to memory");
        for r in &self.rows {
            w.write_record(r).expect("writing to memory");
        }
        w.into_inner().expect("writing to memory")
    }

    /// Reads a table written by [`Table::to_bytes`].
    pub fn parse(bytes: &[u8]) -> Result<Self, FormatError> {
        let text = std::str::from_utf8(bytes).map_err(|_| format_error(0, "not UTF-8"))?;
        let mut comments = Vec::new();
        let mut body = 0;
        for (i, line) in text.lines().enumerate() {
            let Some(rest) = line.strip_prefix("# ") else { break };
            let (k, v) = rest
                .split_once(" = ")
                .ok_or_else(|| format_error(i + 1, "comment is not `# key = value`"))?;
            comments.push((k.to_string(), v.to_string()));
            body += line.len() + 1;
        }
        let mut r = csv::Reader::from_reader(&bytes[body..]);
        let header = r
            .headers()
            .map_err(|e| format_error(comments.len() + 1, e.to_string()))?
            .iter()
            .map(String::from)
            .collect();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| format_error(comments.len() + 2 + i, e.to_string()))?;
            rows.push(rec.iter().map(String::from).collect());
        }
        Ok(Self { comments, header, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// `"n:r;n:r"` with modes ascending; empty for the vacuum.
pub fn occupation_label(state: &FockState) -> String {
    state
        .occupations()
        .iter()
        .map(|(n, r)| format!("{n}:{r}"))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn basis_table(basis: &TruncatedBasis) -> Table {
    let p = basis.params();
    let mut t = Table::new(&["index", "energy", "particle_number", "occupations", "beta"]);
    t.comment("M", num(p.mass))
        .comment("L", num(p.length))
        .comment("dimension", basis.len())
        .comment("even_particle_number_only", basis.options().even_particle_number_only);
    for (i, s) in basis.states().iter().enumerate() {
        t.push(vec![
            i.to_string(),
            num(s.energy),
            s.particle_number().to_string(),
            occupation_label(s.representative()),
            num(s.class.beta()),
        ]);
    }
    t
}

pub fn state_table(basis: &TruncatedBasis, psi: &StateVector) -> Table {
    let mut t = Table::new(&["index", "re", "im", "label"]);
    for (i, (s, a)) in basis.states().iter().zip(psi.amplitudes()).enumerate() {
        t.push(vec![i.to_string(), num(a.re), num(a.im), occupation_label(s.representative())]);
    }
    t
}

/// Reads amplitudes back from a state table.
pub fn state_amplitudes(table: &Table) -> Result<Vec<Complex64>, FormatError> {
    let (re, im) = match (table.column("re"), table.column("im")) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(format_error(0, "state table needs re and im columns")),
    };
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let parse = |s: &str| s.parse::<f64>().map_err(|e| format_error(i + 2, e.to_string()));
            Ok(Complex64::new(parse(&r[re])?, parse(&r[im])?))
        })
        .collect()
}

/// `dim nnz`, then one `i j value` line per stored entry (0-based, both
/// triangles), values with 17 significant digits.
pub fn write_matrix(op: &SymmetricOperator) -> String {
    let mut out = format!("{} {}\n", op.dim(), op.nnz());
    for (i, j, v) in op.triplets() {
        writeln!(out, "{i} {j} {}", exact(v)).expect("writing to a string");
    }
    out
}

pub fn read_matrix(text: &str) -> Result<SymmetricOperator, FormatError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines.next().ok_or_else(|| format_error(1, "missing `dim nnz` header"))?;
    let fields: Vec<&str> = head.split_whitespace().collect();
    let [dim, nnz] = fields[..] else {
        return Err(format_error(1, "header must be `dim nnz`"));
    };
    let dim: usize = dim.parse().map_err(|_| format_error(1, "bad dimension"))?;
    let nnz: usize = nnz.parse().map_err(|_| format_error(1, "bad entry count"))?;
    let mut entries = Vec::with_capacity(nnz);
    for (i, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        let [r, c, v] = f[..] else {
            return Err(format_error(i + 1, "entry must be `i j value`"));
        };
        let r: usize = r.parse().map_err(|_| format_error(i + 1, "bad row index"))?;
        let c: usize = c.parse().map_err(|_| format_error(i + 1, "bad column index"))?;
        let v: f64 = v.parse().map_err(|_| format_error(i + 1, "bad value"))?;
        if r >= dim || c >= dim {
            return Err(format_error(i + 1, "index out of range"));
        }
        entries.push((r, c, v));
    }
    if entries.len() != nnz {
        return Err(format_error(0, format!("header promises {nnz} entries, found {}", entries.len())));
    }
    SymmetricOperator::from_full_triplets(dim, entries).map_err(|e| format_error(0, e.to_string()))
}

/// `qubits N`, `# phase v`, then one `GATE q[,q2][,angle]` line per gate.
pub fn write_circuit(c: &Circuit) -> String {
    let mut out = format!("qubits {}\n# phase {}\n", c.num_qubits, exact(c.global_phase));
    for g in &c.gates {
        let line = match *g {
            Gate::H(q) => format!("H {q}"),
            Gate::RX(q, a) => format!("RX {q},{}", exact(a)),
            Gate::RY(q, a) => format!("RY {q},{}", exact(a)),
            Gate::RZ(q, a) => format!("RZ {q},{}", exact(a)),
            Gate::CNOT(c, t) => format!("CNOT {c},{t}"),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn parse_circuit(text: &str) -> Result<Circuit, FormatError> {
    let mut circuit: Option<Circuit> = None;
    let mut phase = 0.0;
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(v) = rest.trim().strip_prefix("phase") {
                phase = v.trim().parse().map_err(|_| format_error(n, "bad phase"))?;
            }
            continue;
        }
        if let Some(v) = line.strip_prefix("qubits ") {
            if circuit.is_some() {
                return Err(format_error(n, "duplicate qubits header"));
            }
            let q = v.trim().parse().map_err(|_| format_error(n, "bad qubit count"))?;
            circuit = Some(Circuit::new(q));
            continue;
        }
        let c = circuit.as_mut().ok_or_else(|| format_error(n, "gate before `qubits` header"))?;
        let (name, args) = line.split_once(' ').ok_or_else(|| format_error(n, "gate without operands"))?;
        let args: Vec<&str> = args.split(',').map(str::trim).collect();
        let qubit = |s: &str| s.parse::<usize>().map_err(|_| format_error(n, "bad qubit index"));
        let angle = |s: &str| s.parse::<f64>().map_err(|_| format_error(n, "bad angle"));
        let gate = match (name, &args[..]) {
            ("H", [q]) => Gate::H(qubit(q)?),
            ("RX", [q, a]) => Gate::RX(qubit(q)?, angle(a)?),
            ("RY", [q, a]) => Gate::RY(qubit(q)?, angle(a)?),
            ("RZ", [q, a]) => Gate::RZ(qubit(q)?, angle(a)?),
            ("CNOT", [a, b]) => Gate::CNOT(qubit(a)?, qubit(b)?),
            _ => return Err(format_error(n, format!("unknown gate or wrong operands: {line}"))),
        };
        c.push(gate);
    }
    let mut c = circuit.ok_or_else(|| format_error(1, "missing `qubits` header"))?;
    c.global_phase = phase;
    c.validate().map_err(|e| format_error(0, e.to_string()))?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_round_trip() {
        let mut t = Table::new(&["a", "b"]);
        t.comment("g", 2).comment("note", "x = y");
        t.push(vec!["1".into(), "0:2;1:1".into()]);
        let back = Table::parse(&t.to_bytes()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn circuit_rejects_garbage() {
        assert!(parse_circuit("H 0\n").is_err());
        assert_eq!(parse_circuit("qubits 2\nXX 0\n").unwrap_err().line, 2);
        assert!(parse_circuit("qubits 2\nCNOT 0,2\n").is_err());
        assert!(parse_circuit("qubits 2\nRZ 0\n").is_err());
    }

    #[test]
    fn matrix_header_checked() {
        assert!(read_matrix("2 1\n0 0 1.0\n0 1 2.0\n").is_err());
        assert!(read_matrix("2 1\n0 5 1.0\n").is_err());
        assert!(read_matrix("2 2\n0 1 1.0\n1 0 1.5\n").is_err());
    }
}
