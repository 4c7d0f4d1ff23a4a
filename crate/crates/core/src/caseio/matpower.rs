//! Parser for the bus/gen/branch matrix blocks of the MATPOWER case format.
//!
//! Covers numeric matrices with `%` comments and semicolon- or
//! newline-terminated rows, which is enough to load the published benchmark
//! case files. Impedances arrive in per-unit on the case MVA base and are
//! converted to ohms on the from-bus voltage base; unknown trailing columns
//! are ignored with a warning.

use super::{CaseDocument, CaseError, SCHEMA_VERSION};
use crate::admittance::z_base_ohm;
use crate::model::{Branch, Bus, BusKind, Generator, Load};

const BUS_COLS: usize = 13;
const GEN_COLS: usize = 10;
const BRANCH_COLS: usize = 11;

/// One numeric matrix block plus the 1-based source line of each row.
struct MatrixBlock {
    rows: Vec<(usize, Vec<f64>)>,
}

struct Source<'a> {
    /// (1-based line number, content with comments stripped)
    lines: Vec<(usize, &'a str)>,
}

fn strip_comment(line: &str) -> &str {
    match line.find('%') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

fn scan_expression_hazard(token: &str) -> bool {
    token.contains('(') || token.contains('*') || token.contains('/')
}

impl<'a> Source<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, strip_comment(l)))
            .collect();
        Source { lines }
    }

    /// Extract `mpc.<name> = [ ... ];` as a numeric matrix.
    fn matrix(&self, name: &str) -> Result<Option<MatrixBlock>, CaseError> {
        let needle = format!("mpc.{name}");
        let mut start = None;
        for (idx, (_, content)) in self.lines.iter().enumerate() {
            if let Some(pos) = content.find(&needle) {
                let rest = content[pos + needle.len()..].trim_start();
                if rest.starts_with('=') {
                    start = Some(idx);
                    break;
                }
            }
        }
        let Some(start) = start else { return Ok(None) };

        let mut rows = Vec::new();
        let mut pending: Vec<f64> = Vec::new();
        let mut pending_line = self.lines[start].0;
        let mut in_matrix = false;
        for (line_no, content) in self.lines.iter().skip(start).map(|&(n, c)| (n, c)) {
            let mut rest = content;
            if !in_matrix {
                match rest.find('[') {
                    Some(pos) => {
                        in_matrix = true;
                        rest = &rest[pos + 1..];
                    }
                    None => continue,
                }
            }
            let (body, done) = match rest.find(']') {
                Some(pos) => (&rest[..pos], true),
                None => (rest, false),
            };
            for piece in body.split(';') {
                let piece = piece.trim();
                if !piece.is_empty() {
                    if pending.is_empty() {
                        pending_line = line_no;
                    }
                    for token in piece.split_whitespace().flat_map(|t| t.split(',')) {
                        if token.is_empty() {
                            continue;
                        }
                        if scan_expression_hazard(token) {
                            return Err(CaseError::UnsupportedConstruct {
                                line: line_no,
                                message: format!(
                                    "expression `{token}` in matrix `{name}`; only plain numbers are supported"
                                ),
                            });
                        }
                        let value: f64 = token.parse().map_err(|_| CaseError::Syntax {
                            line: line_no,
                            message: format!("invalid number `{token}` in matrix `{name}`"),
                        })?;
                        pending.push(value);
                    }
                }
                // A ';' (or the closing bracket below) terminates the row.
                if !pending.is_empty() {
                    rows.push((pending_line, std::mem::take(&mut pending)));
                }
            }
            if done {
                if !pending.is_empty() {
                    rows.push((pending_line, std::mem::take(&mut pending)));
                }
                return Ok(Some(MatrixBlock { rows }));
            }
        }
        Err(CaseError::Syntax {
            line: self.lines[start].0,
            message: format!("matrix `{name}` is never closed"),
        })
    }

    fn scalar(&self, name: &str) -> Result<Option<f64>, CaseError> {
        let needle = format!("mpc.{name}");
        for (line_no, content) in &self.lines {
            if let Some(pos) = content.find(&needle) {
                let rest = content[pos + needle.len()..].trim_start();
                if let Some(rhs) = rest.strip_prefix('=') {
                    let token = rhs.trim().trim_end_matches(';').trim();
                    let value: f64 = token.parse().map_err(|_| CaseError::Syntax {
                        line: *line_no,
                        message: format!("invalid number `{token}` for `{name}`"),
                    })?;
                    return Ok(Some(value));
                }
            }
        }
        Ok(None)
    }
}

fn check_width(
    block: &MatrixBlock,
    name: &str,
    min_cols: usize,
    warnings: &mut Vec<String>,
) -> Result<(), CaseError> {
    let mut warned = false;
    for (line, row) in &block.rows {
        if row.len() < min_cols {
            return Err(CaseError::Syntax {
                line: *line,
                message: format!(
                    "matrix `{name}` row has {} columns, expected at least {min_cols}",
                    row.len()
                ),
            });
        }
        if row.len() > min_cols && !warned {
            warnings.push(format!(
                "matrix `{name}`: ignoring {} trailing column(s)",
                row.len() - min_cols
            ));
            warned = true;
        }
    }
    // Mixed widths within a block indicate a malformed row.
    if let Some(width) = block.rows.first().map(|(_, r)| r.len()) {
        for (line, row) in &block.rows {
            if row.len() != width {
                return Err(CaseError::Syntax {
                    line: *line,
                    message: format!(
                        "matrix `{name}` row has {} columns, expected {width}",
                        row.len()
                    ),
                });
            }
        }
    }
    Ok(())
}

pub fn parse_matpower_subset(text: &str) -> Result<CaseDocument, CaseError> {
    let source = Source::new(text);
    let mut warnings = Vec::new();

    let base_mva = source
        .scalar("baseMVA")?
        .ok_or_else(|| CaseError::Schema("missing `mpc.baseMVA`".to_string()))?;
    let bus_block = source
        .matrix("bus")?
        .ok_or_else(|| CaseError::Schema("missing `mpc.bus` block".to_string()))?;
    let gen_block = source.matrix("gen")?;
    let branch_block = source
        .matrix("branch")?
        .ok_or_else(|| CaseError::Schema("missing `mpc.branch` block".to_string()))?;

    check_width(&bus_block, "bus", BUS_COLS, &mut warnings)?;
    if let Some(block) = &gen_block {
        check_width(block, "gen", GEN_COLS, &mut warnings)?;
    }
    check_width(&branch_block, "branch", BRANCH_COLS, &mut warnings)?;

    let mut doc = CaseDocument::empty();
    doc.schema_version = SCHEMA_VERSION.to_string();
    doc.base_mva = base_mva;

    let mut kv_of = std::collections::BTreeMap::new();
    for (line, row) in &bus_block.rows {
        let bus_i = row[0] as i64;
        let kind = match row[1] as i64 {
            3 => BusKind::Slack,
            2 => BusKind::Pv,
            1 | 4 => BusKind::Pq,
            other => {
                return Err(CaseError::Semantic(format!(
                    "bus {bus_i} (line {line}): unknown bus type {other}"
                )))
            }
        };
        let in_service = row[1] as i64 != 4;
        let base_kv = if row[9] > 0.0 { row[9] } else { 1.0 };
        let (mut v_max, mut v_min) = (row[11], row[12]);
        if v_max <= 0.0 || v_min <= 0.0 || v_min >= v_max {
            warnings.push(format!(
                "bus {bus_i}: missing or inverted voltage band, using default [0.95, 1.05]"
            ));
            v_min = 0.95;
            v_max = 1.05;
        }
        let id = format!("bus_{bus_i}");
        kv_of.insert(bus_i, base_kv);
        doc.buses.push(Bus {
            id: id.clone(),
            name: id.clone(),
            nominal_kv: base_kv,
            kind,
            v_min_pu: v_min,
            v_max_pu: v_max,
            in_service,
        });
        let (pd, qd) = (row[2], row[3]);
        if pd != 0.0 || qd != 0.0 {
            if pd < 0.0 {
                return Err(CaseError::Semantic(format!(
                    "bus {bus_i} (line {line}): negative active demand is not supported"
                )));
            }
            doc.loads.push(Load {
                id: format!("load_{bus_i}"),
                bus_id: id.clone(),
                p_mw: pd,
                q_mvar: qd,
                curtailable: false,
                gamma: 0.0,
                gamma_max: 0.0,
            });
        }
        let (gs, bs) = (row[4], row[5]);
        if gs != 0.0 || bs != 0.0 {
            // Fixed shunts become constant-power records: an approximation of
            // the admittance model, adequate near nominal voltage.
            warnings.push(format!(
                "bus {bus_i}: fixed shunt modeled as constant-power load"
            ));
            doc.loads.push(Load {
                id: format!("shunt_{bus_i}"),
                bus_id: id.clone(),
                p_mw: gs.max(0.0),
                q_mvar: -bs,
                curtailable: false,
                gamma: 0.0,
                gamma_max: 0.0,
            });
        }
    }

    if let Some(block) = &gen_block {
        for (line, row) in &block.rows {
            let bus_i = row[0] as i64;
            if row[7] == 0.0 {
                warnings.push(format!("gen at bus {bus_i} (line {line}): out of service, skipped"));
                continue;
            }
            if !kv_of.contains_key(&bus_i) {
                return Err(CaseError::Semantic(format!(
                    "gen at bus {bus_i} (line {line}): bus not defined"
                )));
            }
            let n = doc.generators.len() + 1;
            doc.generators.push(Generator {
                id: format!("gen_{n}_bus_{bus_i}"),
                bus_id: format!("bus_{bus_i}"),
                p_mw: row[1],
                v_set_pu: if row[5] > 0.0 { row[5] } else { 1.0 },
                q_min_mvar: row[4],
                q_max_mvar: row[3],
            });
        }
    }

    let mut branch_count: std::collections::BTreeMap<(i64, i64), usize> = Default::default();
    for (line, row) in &branch_block.rows {
        let (f, t) = (row[0] as i64, row[1] as i64);
        let kv = *kv_of.get(&f).ok_or_else(|| {
            CaseError::Semantic(format!("branch on line {line}: from bus {f} not defined"))
        })?;
        if !kv_of.contains_key(&t) {
            return Err(CaseError::Semantic(format!(
                "branch on line {line}: to bus {t} not defined"
            )));
        }
        let z_base = z_base_ohm(kv, base_mva);
        let tap = row[8];
        if tap != 0.0 && (tap - 1.0).abs() > 1e-9 {
            warnings.push(format!(
                "branch {f}-{t}: off-nominal tap ratio {tap} ignored (modeled at nominal)"
            ));
        }
        if row[9] != 0.0 {
            warnings.push(format!("branch {f}-{t}: phase shift ignored"));
        }
        let s_max = if row[5] > 0.0 { row[5] } else { 9999.0 };
        let parallel = branch_count.entry((f.min(t), f.max(t))).or_insert(0);
        *parallel += 1;
        let id = if *parallel == 1 {
            format!("line_{f}_{t}")
        } else {
            format!("line_{f}_{t}_{parallel}")
        };
        doc.branches.push(Branch {
            id,
            from_bus: format!("bus_{f}"),
            to_bus: format!("bus_{t}"),
            r_ohm: row[2] * z_base,
            x_ohm: row[3] * z_base,
            b_shunt_siemens: row[4] / z_base,
            s_max_mva: s_max,
            i_max_ka: s_max / (3f64.sqrt() * kv),
            in_service: row[10] != 0.0,
            switchable: false,
        });
    }

    doc.warnings = warnings;
    doc.check_semantics()?;
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "\
function mpc = tiny
% a two-bus example
mpc.baseMVA = 100;
mpc.bus = [
\t1\t3\t0\t0\t0\t0\t1\t1\t0\t10\t1\t1.05\t0.95;
\t2\t1\t5\t2\t0\t0\t1\t1\t0\t10\t1\t1.05\t0.95;
];
mpc.gen = [
\t1\t0\t0\t50\t-50\t1.0\t100\t1\t100\t0;
];
mpc.branch = [
\t1\t2\t0.01\t0.05\t0\t20\t0\t0\t0\t0\t1;
];
";

    #[test]
    fn tiny_case_parses() {
        let doc = parse_matpower_subset(TINY).unwrap();
        assert_eq!(doc.buses.len(), 2);
        assert_eq!(doc.branches.len(), 1);
        assert_eq!(doc.loads.len(), 1);
        assert_eq!(doc.generators.len(), 1);
        // 0.01 pu on 10 kV / 100 MVA -> z_base = 1 ohm
        assert!((doc.branches[0].r_ohm - 0.01).abs() < 1e-15);
    }

    #[test]
    fn wrong_column_count_reports_row_line() {
        let bad = TINY.replace(
            "\t2\t1\t5\t2\t0\t0\t1\t1\t0\t10\t1\t1.05\t0.95;",
            "\t2\t1\t5\t2\t0\t0\t1\t1\t0\t10\t1;",
        );
        match parse_matpower_subset(&bad) {
            Err(CaseError::Syntax { line, message }) => {
                assert_eq!(line, 6, "{message}");
            }
            other => panic!("expected Syntax error, got {other:?}"),
        }
    }

    #[test]
    fn comment_only_file_is_missing_bus_block() {
        match parse_matpower_subset("% just a header\n% nothing else\n") {
            Err(CaseError::Schema(msg)) => assert!(msg.contains("baseMVA") || msg.contains("bus")),
            other => panic!("expected Schema error, got {other:?}"),
        }
    }

    #[test]
    fn expressions_are_unsupported() {
        let bad = TINY.replace("\t1\t2\t0.01", "\t1\t2\tsqrt(2)");
        assert!(matches!(
            parse_matpower_subset(&bad),
            Err(CaseError::UnsupportedConstruct { .. })
        ));
    }

    #[test]
    fn trailing_columns_warn_but_parse() {
        let extra = TINY.replace(
            "\t1\t2\t0.01\t0.05\t0\t20\t0\t0\t0\t0\t1;",
            "\t1\t2\t0.01\t0.05\t0\t20\t0\t0\t0\t0\t1\t-360\t360;",
        );
        let doc = parse_matpower_subset(&extra).unwrap();
        assert!(doc.warnings.iter().any(|w| w.contains("trailing")));
    }
}
