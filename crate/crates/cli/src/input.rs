//! Reading diagrams, tilings and flag values.

use anyhow::{anyhow, bail, Context, Result};
use serde_json::Value;
use tilecert_core::diagram::parse_any;
use tilecert_core::render::parse_tiling_ascii;
use tilecert_core::{Certificate, Diagram, Tiling};

/// How `RECT AxB` is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetKind {
    /// A by B cells.
    Cells,
    /// Bidegree (A, B), that is (A+1) by (B+1) cells.
    Bidegree,
}

/// `AxB` with positive sides for cells.
pub fn parse_box(s: &str) -> Result<(u16, u16)> {
    let (a, b) = s
        .trim()
        .split_once(['x', 'X'])
        .ok_or_else(|| anyhow!("expected AxB, got {s:?}"))?;
    let a = a
        .trim()
        .parse()
        .with_context(|| format!("bad size {s:?}"))?;
    let b = b
        .trim()
        .parse()
        .with_context(|| format!("bad size {s:?}"))?;
    Ok((a, b))
}

pub fn parse_mults(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse::<u32>()
                .with_context(|| format!("bad multiplicity {p:?}"))
        })
        .collect()
}

/// `RECT AxB`, or a file holding a diagram as JSON or text.
pub fn read_diagram(arg: &str, kind: TargetKind) -> Result<Diagram> {
    if let Some(rest) = arg.trim().strip_prefix("RECT") {
        let (a, b) = parse_box(rest)?;
        return match kind {
            TargetKind::Bidegree => Ok(Diagram::bidegree(a, b)),
            TargetKind::Cells if a == 0 || b == 0 => bail!("empty rectangle {arg:?}"),
            TargetKind::Cells => Ok(Diagram::rectangle(a, b)),
        };
    }
    let text = std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?;
    parse_any(&text).with_context(|| format!("parsing diagram in {arg}"))
}

/// A tiling from tiling JSON, a certificate, `tiling find` output, or the
/// ASCII form. The certificate is returned when there is one.
pub fn read_tiling(path: &str) -> Result<(Tiling, Option<Certificate>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    if !text.trim_start().starts_with('{') {
        return Ok((parse_tiling_ascii(&text)?, None));
    }
    let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {path}"))?;
    let cert = value.get("certificate").or_else(|| {
        value
            .get("tiling")
            .filter(|_| value.get("target").is_some())
            .map(|_| &value)
    });
    if let Some(c) = cert {
        let c: Certificate = serde_json::from_value(c.clone()).context("reading certificate")?;
        return Ok((c.tiling.clone(), Some(c)));
    }
    if value.get("outcome").is_some() {
        bail!("{path} holds a search result without a certificate");
    }
    let tiling = match value.get("tiling") {
        Some(t) => t.clone(),
        None => value,
    };
    Ok((
        serde_json::from_value(tiling).context("reading tiling")?,
        None,
    ))
}
