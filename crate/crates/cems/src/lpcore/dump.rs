//! Plain-text serialization of solver instances for external
//! cross-checking. Values are printed in shortest round-trip decimal, so
//! parsing a dump reproduces every coefficient bit-exactly.

use super::{LinearProgram, LpError, Row, Sense};

fn fmt_f64(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        let mut s = format!("{v}");
        if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
            s.push_str(".0");
        }
        s
    }
}

fn parse_f64(s: &str) -> Result<f64, LpError> {
    match s {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s
            .parse()
            .map_err(|e| LpError::Structural(format!("bad number {s:?}: {e}"))),
    }
}

/// Serializes a program (optionally with its binary set) to the dump
/// format.
pub fn dump_lp(lp: &LinearProgram, binaries: &[usize]) -> String {
    let mut out = String::new();
    out.push_str("lp-dump v1\n");
    out.push_str(&format!("vars {}\n", lp.num_vars));
    for j in 0..lp.num_vars {
        let (lo, hi) = lp.bounds[j];
        out.push_str(&format!(
            "var {} {} {}\n",
            lp.var_names[j],
            fmt_f64(lo),
            fmt_f64(hi)
        ));
    }
    out.push_str(&format!("offset {}\n", fmt_f64(lp.objective_offset)));
    out.push_str("minimize\n");
    for &(j, c) in &lp.objective {
        out.push_str(&format!("  {} {}\n", lp.var_names[j], fmt_f64(c)));
    }
    out.push_str(&format!("rows {}\n", lp.rows.len()));
    for row in &lp.rows {
        out.push_str(&format!("  {}: ", row.name));
        for (k, &(j, v)) in row.coeffs.iter().enumerate() {
            if k > 0 {
                out.push_str(" + ");
            }
            out.push_str(&format!("{} {}", fmt_f64(v), lp.var_names[j]));
        }
        out.push_str(&format!(" {} {}\n", row.sense, fmt_f64(row.rhs)));
    }
    out.push_str("binaries");
    for &b in binaries {
        out.push_str(&format!(" {}", lp.var_names[b]));
    }
    out.push('\n');
    out
}

/// Parses a dump back into a program and its binary set.
pub fn parse_dump(text: &str) -> Result<(LinearProgram, Vec<usize>), LpError> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != "lp-dump v1" {
        return Err(LpError::Structural(format!("unknown header {header:?}")));
    }
    let mut lp = LinearProgram::new();
    let mut name_to_idx = std::collections::HashMap::new();
    let mut binaries = Vec::new();

    let var_count: usize = lines
        .next()
        .and_then(|l| l.strip_prefix("vars "))
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| LpError::Structural("missing vars line".into()))?;
    for _ in 0..var_count {
        let line = lines
            .next()
            .ok_or_else(|| LpError::Structural("truncated var section".into()))?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "var" {
            return Err(LpError::Structural(format!("bad var line {line:?}")));
        }
        let idx = lp.add_var(parts[1], parse_f64(parts[2])?, parse_f64(parts[3])?, 0.0);
        name_to_idx.insert(parts[1].to_string(), idx);
    }

    let offset_line = lines
        .next()
        .ok_or_else(|| LpError::Structural("missing offset".into()))?;
    lp.objective_offset = parse_f64(
        offset_line
            .strip_prefix("offset ")
            .ok_or_else(|| LpError::Structural("missing offset".into()))?,
    )?;

    if lines.next() != Some("minimize") {
        return Err(LpError::Structural("missing minimize section".into()));
    }
    let mut row_header = None;
    for line in lines.by_ref() {
        if let Some(rest) = line.strip_prefix("rows ") {
            row_header = Some(rest.to_string());
            break;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(LpError::Structural(format!("bad objective line {line:?}")));
        }
        let idx = *name_to_idx
            .get(parts[0])
            .ok_or_else(|| LpError::Structural(format!("unknown variable {:?}", parts[0])))?;
        lp.objective.push((idx, parse_f64(parts[1])?));
    }
    let row_count: usize = row_header
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| LpError::Structural("missing rows line".into()))?;

    for _ in 0..row_count {
        let line = lines
            .next()
            .ok_or_else(|| LpError::Structural("truncated rows section".into()))?;
        let (name, rest) = line
            .trim_start()
            .split_once(": ")
            .ok_or_else(|| LpError::Structural(format!("bad row line {line:?}")))?;
        let tokens: Vec<&str> = rest.split_whitespace().collect();
        if tokens.len() < 2 {
            return Err(LpError::Structural(format!("bad row line {line:?}")));
        }
        let rhs = parse_f64(tokens[tokens.len() - 1])?;
        let sense = match tokens[tokens.len() - 2] {
            "<=" => Sense::Le,
            ">=" => Sense::Ge,
            "=" => Sense::Eq,
            other => return Err(LpError::Structural(format!("bad sense {other:?}"))),
        };
        let mut coeffs = Vec::new();
        let mut k = 0;
        while k + 1 < tokens.len() - 2 {
            if tokens[k] == "+" {
                k += 1;
                continue;
            }
            let coef = parse_f64(tokens[k])?;
            let idx = *name_to_idx
                .get(tokens[k + 1])
                .ok_or_else(|| LpError::Structural(format!("unknown variable {:?}", tokens[k + 1])))?;
            coeffs.push((idx, coef));
            k += 2;
        }
        lp.rows.push(Row {
            coeffs,
            sense,
            rhs,
            name: name.to_string(),
        });
    }

    if let Some(line) = lines.next() {
        if let Some(rest) = line.strip_prefix("binaries") {
            for name in rest.split_whitespace() {
                let idx = *name_to_idx
                    .get(name)
                    .ok_or_else(|| LpError::Structural(format!("unknown binary {name:?}")))?;
                binaries.push(idx);
            }
        }
    }
    Ok((lp, binaries))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_round_trips_bit_exact() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", 0.0, 1.0 / 3.0, 0.1 + 0.2);
        let y = lp.add_var("y", f64::NEG_INFINITY, f64::INFINITY, -1e-17);
        let z = lp.add_var("z", 0.0, 1.0, 0.0);
        lp.objective_offset = std::f64::consts::PI;
        lp.add_row("r0", Sense::Le, 7.000000000000001, &[(x, 2.5), (y, -0.3333333333333333)]);
        lp.add_row("r1", Sense::Eq, -0.0, &[(y, 1e300)]);
        lp.add_row("r2", Sense::Ge, 1.25, &[(z, 1.0), (x, 4.0)]);

        let text = dump_lp(&lp, &[z]);
        let (back, binaries) = parse_dump(&text).unwrap();
        assert_eq!(binaries, vec![z]);
        assert_eq!(back.num_vars, lp.num_vars);
        assert_eq!(back.objective_offset.to_bits(), lp.objective_offset.to_bits());
        for (a, b) in back.bounds.iter().zip(&lp.bounds) {
            assert_eq!(a.0.to_bits(), b.0.to_bits());
            assert_eq!(a.1.to_bits(), b.1.to_bits());
        }
        for (a, b) in back.objective.iter().zip(&lp.objective) {
            assert_eq!(a.0, b.0);
            assert_eq!(a.1.to_bits(), b.1.to_bits());
        }
        for (ra, rb) in back.rows.iter().zip(&lp.rows) {
            assert_eq!(ra.sense, rb.sense);
            assert_eq!(ra.rhs.to_bits(), rb.rhs.to_bits());
            assert_eq!(ra.name, rb.name);
            for (a, b) in ra.coeffs.iter().zip(&rb.coeffs) {
                assert_eq!(a.0, b.0);
                assert_eq!(a.1.to_bits(), b.1.to_bits());
            }
        }
        // Emitting the parsed program reproduces the text exactly.
        assert_eq!(dump_lp(&back, &binaries), text);
    }
}
