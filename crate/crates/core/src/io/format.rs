//! Line-oriented problem files.
//!
//! ```text
//! {"format":"dualproj","version":1,"blocks":2,"rows":1,"vars":4}
//! b,1.5
//! block,0,simplex_eq,,2
//! c,-1.0,0.25
//! a,0,0,1.0
//! a,0,1,1.0
//! block,1,boxcut_iq,2,3
//! ...
//! ```
//!
//! The first non-comment line is a JSON header. `block` records carry
//! `id,kind,delta,K`; the `c`, `a` (row, col, value) and `v` (vertex of a
//! general block) lines that follow belong to it. Numbers are written in
//! shortest round-trip form, so parsing a written file restores every value
//! bit for bit. Lines starting with `#` and blank lines are ignored.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{Block, Polytope, Problem, SparseBlock};

pub const FORMAT_VERSION: u32 = 1;

/// Optional provenance stored in the header.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProblemMeta {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub known_optimum: Option<f64>,
}

impl ProblemMeta {
    fn is_empty(&self) -> bool {
        *self == ProblemMeta::default()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    blocks: usize,
    rows: usize,
    vars: usize,
    #[serde(default, skip_serializing_if = "ProblemMeta::is_empty")]
    meta: ProblemMeta,
}

pub fn kind_from_name(name: &str, delta: Option<usize>) -> Result<Polytope> {
    let need = |d: Option<usize>| d.ok_or_else(|| Error::InvalidConfig(format!("{name} needs a delta")));
    Ok(match name {
        "box" => Polytope::Box,
        "simplex_eq" => Polytope::SimplexEq,
        "simplex_iq" => Polytope::SimplexIq,
        "boxcut_eq" => Polytope::BoxCutEq { delta: need(delta)? },
        "boxcut_iq" => Polytope::BoxCutIq { delta: need(delta)? },
        "parity" => Polytope::Parity,
        "general" => Polytope::General { vertices: Vec::new() },
        other => return Err(Error::InvalidConfig(format!("unknown polytope kind {other:?}"))),
    })
}

fn push_values(out: &mut String, tag: &str, values: &[f64]) {
    out.push_str(tag);
    for v in values {
        let _ = write!(out, ",{v:?}");
    }
    out.push('\n');
}

/// Serializes a problem. Non-finite values are rejected.
pub fn write_problem(p: &Problem, meta: &ProblemMeta) -> Result<String> {
    let report = p.validate();
    if !report.is_ok() {
        return Err(Error::Validation(report));
    }
    let header = Header {
        format: "dualproj".into(),
        version: FORMAT_VERSION,
        blocks: p.num_blocks(),
        rows: p.m(),
        vars: p.n(),
        meta: meta.clone(),
    };
    let mut out = serde_json::to_string(&header)?;
    out.push('\n');
    push_values(&mut out, "b", p.b());
    for blk in p.blocks() {
        let delta = blk.polytope.delta().map(|d| d.to_string()).unwrap_or_default();
        let _ = writeln!(out, "block,{},{},{},{}", blk.id, blk.polytope.name(), delta, blk.dim());
        push_values(&mut out, "c", &blk.cost);
        for &(r, c, v) in blk.matrix.entries() {
            let _ = writeln!(out, "a,{r},{c},{v:?}");
        }
        if let Polytope::General { vertices } = &blk.polytope {
            for v in vertices {
                push_values(&mut out, "v", v);
            }
        }
    }
    Ok(out)
}

struct PendingBlock {
    id: usize,
    polytope: Polytope,
    dim: usize,
    cost: Option<Vec<f64>>,
    triplets: Vec<(usize, usize, f64)>,
    line: usize,
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad number {s:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("non-finite number {s:?}"),
        });
    }
    Ok(v)
}

fn parse_usize(s: &str, line: usize, what: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad {what} {s:?}"),
    })
}

fn parse_list(fields: &[&str], line: usize) -> Result<Vec<f64>> {
    fields.iter().filter(|f| !f.trim().is_empty()).map(|f| parse_f64(f, line)).collect()
}

/// Parses and validates a problem file's contents.
pub fn parse_problem_str(text: &str) -> Result<(Problem, ProblemMeta)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, htext) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let header: Header = serde_json::from_str(htext).map_err(|e| Error::Parse {
        line: hline,
        msg: format!("header: {e}"),
    })?;
    if header.format != "dualproj" || header.version != FORMAT_VERSION {
        return Err(Error::Parse {
            line: hline,
            msg: format!("unsupported format {:?} version {}", header.format, header.version),
        });
    }
    let m = header.rows;
    let mut b: Option<Vec<f64>> = None;
    let mut blocks = Vec::with_capacity(header.blocks);
    let mut pending: Option<PendingBlock> = None;

    let finish = |pb: PendingBlock, blocks: &mut Vec<Block>| -> Result<()> {
        let cost = pb.cost.ok_or(Error::Parse {
            line: pb.line,
            msg: format!("block {} has no cost line", pb.id),
        })?;
        let matrix = SparseBlock::from_triplets(m, pb.dim, pb.triplets);
        blocks.push(Block::new(pb.id, cost, matrix, pb.polytope));
        Ok(())
    };

    for (ln, l) in lines {
        let fields: Vec<&str> = l.split(',').collect();
        let no_block = || Error::Parse {
            line: ln,
            msg: format!("{:?} record outside a block", fields[0]),
        };
        match fields[0] {
            "b" => {
                if b.is_some() {
                    return Err(Error::Parse {
                        line: ln,
                        msg: "duplicate b record".into(),
                    });
                }
                b = Some(parse_list(&fields[1..], ln)?);
            }
            "block" => {
                if fields.len() != 5 {
                    return Err(Error::Parse {
                        line: ln,
                        msg: "block record needs id,kind,delta,K".into(),
                    });
                }
                if let Some(pb) = pending.take() {
                    finish(pb, &mut blocks)?;
                }
                let delta = match fields[3].trim() {
                    "" => None,
                    s => Some(parse_usize(s, ln, "delta")?),
                };
                let polytope = kind_from_name(fields[2].trim(), delta).map_err(|e| Error::Parse {
                    line: ln,
                    msg: e.to_string(),
                })?;
                pending = Some(PendingBlock {
                    id: parse_usize(fields[1], ln, "block id")?,
                    polytope,
                    dim: parse_usize(fields[4], ln, "K")?,
                    cost: None,
                    triplets: Vec::new(),
                    line: ln,
                });
            }
            "c" => {
                let pb = pending.as_mut().ok_or_else(no_block)?;
                pb.cost = Some(parse_list(&fields[1..], ln)?);
            }
            "a" => {
                let pb = pending.as_mut().ok_or_else(no_block)?;
                if fields.len() != 4 {
                    return Err(Error::Parse {
                        line: ln,
                        msg: "a record needs row,col,value".into(),
                    });
                }
                pb.triplets.push((
                    parse_usize(fields[1], ln, "row")?,
                    parse_usize(fields[2], ln, "column")?,
                    parse_f64(fields[3], ln)?,
                ));
            }
            "v" => {
                let pb = pending.as_mut().ok_or_else(no_block)?;
                let vertex = parse_list(&fields[1..], ln)?;
                match &mut pb.polytope {
                    Polytope::General { vertices } => vertices.push(vertex),
                    _ => {
                        return Err(Error::Parse {
                            line: ln,
                            msg: "vertex record in a non-general block".into(),
                        })
                    }
                }
            }
            other => {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("unknown record {other:?}"),
                })
            }
        }
    }
    if let Some(pb) = pending.take() {
        finish(pb, &mut blocks)?;
    }
    let b = b.unwrap_or_default();
    if b.len() != m {
        return Err(Error::Parse {
            line: hline,
            msg: format!("header says {m} rows, b has {}", b.len()),
        });
    }
    if blocks.len() != header.blocks {
        return Err(Error::Parse {
            line: hline,
            msg: format!("header says {} blocks, found {}", header.blocks, blocks.len()),
        });
    }
    let p = Problem::validated(blocks, b)?;
    if p.n() != header.vars {
        return Err(Error::Parse {
            line: hline,
            msg: format!("header says {} variables, found {}", header.vars, p.n()),
        });
    }
    Ok((p, header.meta))
}

pub fn parse_problem(path: impl AsRef<Path>) -> Result<Problem> {
    Ok(read_problem_file(path)?.0)
}

pub fn read_problem_file(path: impl AsRef<Path>) -> Result<(Problem, ProblemMeta)> {
    parse_problem_str(&std::fs::read_to_string(path)?)
}

pub fn write_problem_file(path: impl AsRef<Path>, p: &Problem, meta: &ProblemMeta) -> Result<()> {
    std::fs::write(path, write_problem(p, meta)?)?;
    Ok(())
}
