//! The line-oriented instance format.
//!
//! ```text
//! [torus]
//! factor weil quadratic -4
//! [psi]
//! dim_u 1
//! dim_v 0
//! [action]
//! block 0 : 1
//! [w]
//! u 1/3
//! v
//! [level]
//! prime 3 depth 1
//! [constants]
//! b 1
//! ```
//!
//! Sections `[torus]`, `[psi]` and `[action]` are required. `#` starts a
//! comment. See the README for the full grammar.

use std::path::{Path, PathBuf};

use num_rational::BigRational;
use num_traits::Zero;

use crate::arith::{fmt_rational, parse_rational};
use crate::error::{Error, Result};
use crate::exactalg::{QLattice, QVector};
use crate::fields::AbelianFieldSpec;
use crate::heisenberg::{HeisenbergElement, PolarizationForm};
use crate::invariants::{ActionBlock, BoundConstants, LevelSpec, SubvarietyDatum};
use crate::torus::{CharacterSpec, TorusFactor, TorusSpec};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub datum: SubvarietyDatum,
    pub level: LevelSpec,
    pub constants: BoundConstants,
}

const SECTIONS: [&str; 7] = ["torus", "psi", "action", "w", "level", "w_prime", "constants"];

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn rational(tok: &str, line: usize) -> Result<BigRational> {
    parse_rational(tok).ok_or_else(|| perr(line, format!("bad rational '{tok}'")))
}

fn integer<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse().map_err(|_| perr(line, format!("bad integer '{tok}'")))
}

fn rationals(toks: &[&str], line: usize) -> Result<QVector> {
    toks.iter().map(|t| rational(t, line)).collect()
}

fn parse_field(toks: &[&str], line: usize) -> Result<AbelianFieldSpec> {
    let at = |e: Error| match e {
        Error::Parse { .. } => e,
        other => perr(line, other.to_string()),
    };
    match toks {
        ["rational"] => Ok(AbelianFieldSpec::rational()),
        ["quadratic", d] => AbelianFieldSpec::quadratic(integer(d, line)?).map_err(at),
        ["cyclotomic", n] => AbelianFieldSpec::cyclotomic(integer(n, line)?).map_err(at),
        ["abelian", n, h] => {
            let hs = h.split(',').map(|x| integer::<u64>(x, line)).collect::<Result<Vec<_>>>()?;
            AbelianFieldSpec::new(integer(n, line)?, hs).map_err(at)
        }
        _ => Err(perr(line, "expected a field: rational | quadratic D | cyclotomic N | abelian N H1,H2,..")),
    }
}

#[derive(Default)]
struct Raw {
    factors: Vec<TorusFactor>,
    class_number: Option<u64>,
    dim_u: Option<usize>,
    dim_v: Option<usize>,
    psi_entries: Vec<(usize, usize, usize, usize, BigRational, bool)>,
    blocks: Vec<(usize, Vec<usize>, Vec<i64>)>,
    u: Option<QVector>,
    v: Option<QVector>,
    level: Vec<(usize, u64, u32, Option<Vec<QVector>>)>,
    w_prime: Vec<QVector>,
    has_w_prime: bool,
    constants: Vec<(usize, String, BigRational)>,
}

impl Instance {
    pub fn parse(text: &str) -> Result<Instance> {
        let mut raw = Raw::default();
        let mut section: Option<&str> = None;
        let mut seen: Vec<&str> = Vec::new();
        for (idx, full) in text.lines().enumerate() {
            let ln = idx + 1;
            let line = full.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = SECTIONS.iter().find(|s| **s == name.trim()).ok_or_else(|| perr(ln, format!("unknown section [{name}]")))?;
                if seen.contains(name) {
                    return Err(perr(ln, format!("duplicate section [{name}]")));
                }
                seen.push(name);
                section = Some(name);
                if *name == "w_prime" {
                    raw.has_w_prime = true;
                }
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let sec = section.ok_or_else(|| perr(ln, "content before the first section"))?;
            Self::parse_line(&mut raw, sec, &toks, line, ln)?;
        }
        for req in ["torus", "psi", "action"] {
            if !seen.contains(&req) {
                return Err(perr(0, format!("missing section [{req}]")));
            }
        }
        Self::assemble(raw)
    }

    fn parse_line(raw: &mut Raw, sec: &str, toks: &[&str], line: &str, ln: usize) -> Result<()> {
        match (sec, toks) {
            ("torus", ["factor", "split", r]) => raw.factors.push(TorusFactor::Split(integer(r, ln)?)),
            ("torus", ["factor", "weil", rest @ ..]) => raw.factors.push(TorusFactor::WeilRestriction(parse_field(rest, ln)?)),
            ("torus", ["factor", "normone", rest @ ..]) => raw.factors.push(TorusFactor::NormOne(parse_field(rest, ln)?)),
            ("torus", ["class_number", h]) => raw.class_number = Some(integer(h, ln)?),
            ("psi", ["dim_u", n]) => raw.dim_u = Some(integer(n, ln)?),
            ("psi", ["dim_v", n]) => raw.dim_v = Some(integer(n, ln)?),
            ("psi", [kind @ ("alt" | "entry"), k, i, j, x]) => {
                raw.psi_entries.push((ln, integer(k, ln)?, integer(i, ln)?, integer(j, ln)?, rational(x, ln)?, *kind == "alt"))
            }
            ("action", ["block", ..]) => {
                let body = line["block".len()..].trim();
                let (coords, exps) = body.split_once(':').ok_or_else(|| perr(ln, "expected 'block C1,C2,.. : E1 E2 ..'"))?;
                let coords =
                    coords.trim().split(',').map(|c| integer::<usize>(c.trim(), ln)).collect::<Result<Vec<_>>>()?;
                let exps = exps.split_whitespace().map(|e| integer::<i64>(e, ln)).collect::<Result<Vec<_>>>()?;
                raw.blocks.push((ln, coords, exps));
            }
            ("w", ["u", rest @ ..]) => {
                if raw.u.replace(rationals(rest, ln)?).is_some() {
                    return Err(perr(ln, "duplicate key u"));
                }
            }
            ("w", ["v", rest @ ..]) => {
                if raw.v.replace(rationals(rest, ln)?).is_some() {
                    return Err(perr(ln, "duplicate key v"));
                }
            }
            ("level", ["prime", p, "depth", d, rest @ ..]) => {
                let lattice = match rest {
                    [] => None,
                    ["lattice", ..] => {
                        let body = line[line.find("lattice").expect("matched") + "lattice".len()..].trim();
                        let cols = body
                            .split(';')
                            .map(|c| rationals(&c.split_whitespace().collect::<Vec<_>>(), ln))
                            .collect::<Result<Vec<_>>>()?;
                        Some(cols)
                    }
                    _ => return Err(perr(ln, "expected 'prime P depth D [lattice ..]'")),
                };
                raw.level.push((ln, integer(p, ln)?, integer(d, ln)?, lattice));
            }
            ("w_prime", ["basis", rest @ ..]) => raw.w_prime.push(rationals(rest, ln)?),
            ("constants", [key @ ("b" | "cN" | "c0" | "N"), x]) => {
                if raw.constants.iter().any(|(_, k, _)| k == key) {
                    return Err(perr(ln, format!("duplicate constant {key}")));
                }
                raw.constants.push((ln, key.to_string(), rational(x, ln)?));
            }
            _ => return Err(perr(ln, format!("unknown key in [{sec}]: '{line}'"))),
        }
        Ok(())
    }

    fn assemble(raw: Raw) -> Result<Instance> {
        let mut torus = TorusSpec::new(raw.factors).map_err(|e| perr(0, e.to_string()))?;
        if let Some(h) = raw.class_number {
            torus = torus.with_class_number(h)?;
        }
        let du = raw.dim_u.ok_or_else(|| perr(0, "[psi] needs dim_u"))?;
        let dv = raw.dim_v.ok_or_else(|| perr(0, "[psi] needs dim_v"))?;
        let mut tensor = vec![vec![vec![BigRational::zero(); dv]; dv]; du];
        for (ln, k, i, j, x, alt) in raw.psi_entries {
            if k >= du || i >= dv || j >= dv {
                return Err(perr(ln, "psi index out of range"));
            }
            tensor[k][i][j] = x.clone();
            if alt {
                tensor[k][j][i] = -x;
            }
        }
        let psi = PolarizationForm::new(du, dv, tensor)?;
        let action = raw
            .blocks
            .into_iter()
            .map(|(_, coords, exps)| ActionBlock { coords, character: CharacterSpec::new(exps) })
            .collect();
        let u = raw.u.unwrap_or_else(|| vec![BigRational::zero(); du]);
        let v = raw.v.unwrap_or_else(|| vec![BigRational::zero(); dv]);
        let w_prime = raw.has_w_prime.then_some(raw.w_prime);
        let datum = SubvarietyDatum::new(torus, psi, action, HeisenbergElement::new(u, v), w_prime)?;
        let mut level = LevelSpec::maximal(du + dv);
        for (ln, p, d, cols) in raw.level {
            if level.exceptions().contains_key(&p) {
                return Err(perr(ln, format!("duplicate level entry for {p}")));
            }
            let lattice = cols.map(QLattice::new).transpose()?;
            level = level.with_exception(p, lattice, d)?;
        }
        let mut constants = BoundConstants::default();
        let mut values = (constants.b.clone(), constants.c_n.clone(), constants.c0.clone(), constants.n);
        for (ln, key, x) in raw.constants {
            match key.as_str() {
                "b" => values.0 = x,
                "cN" => values.1 = x,
                "c0" => values.2 = x,
                _ => {
                    if !x.is_integer() {
                        return Err(perr(ln, "N must be an integer"));
                    }
                    values.3 = x.to_integer().try_into().map_err(|_| perr(ln, "N out of range"))?;
                }
            }
        }
        constants = BoundConstants::new(values.0, values.1, values.2, values.3)?;
        datum.check_level(&level)?;
        Ok(Instance { datum, level, constants })
    }

    /// Canonical text; parsing it back gives an equal instance.
    pub fn to_text(&self) -> String {
        let d = &self.datum;
        let mut out = String::from("[torus]\n");
        for f in d.torus().factors() {
            out += &format!("factor {f}\n");
        }
        if let Some(h) = d.torus().class_number_override() {
            out += &format!("class_number {h}\n");
        }
        let psi = d.psi();
        out += &format!("[psi]\ndim_u {}\ndim_v {}\n", psi.dim_u(), psi.dim_v());
        for (k, i, j, x) in psi.nonzero_entries() {
            out += &format!("alt {k} {i} {j} {}\n", fmt_rational(x));
        }
        out += "[action]\n";
        for b in d.action() {
            let coords: Vec<String> = b.coords.iter().map(ToString::to_string).collect();
            out += &format!("block {} : {}\n", coords.join(","), b.character);
        }
        out += &format!("[w]\n{}\n{}\n", vec_line("u", &d.w().u), vec_line("v", &d.w().v));
        if !self.level.is_maximal() {
            out += "[level]\n";
            for (p, e) in self.level.exceptions() {
                out += &format!("prime {p} depth {}", e.depth);
                if let Some(l) = &e.lattice {
                    let cols: Vec<String> =
                        l.basis().iter().map(|c| c.iter().map(fmt_rational).collect::<Vec<_>>().join(" ")).collect();
                    out += &format!(" lattice {}", cols.join(" ; "));
                }
                out += "\n";
            }
        }
        if let Some(basis) = d.w_prime() {
            out += "[w_prime]\n";
            for b in basis {
                out += &vec_line("basis", b);
                out += "\n";
            }
        }
        let c = &self.constants;
        out += &format!(
            "[constants]\nb {}\ncN {}\nc0 {}\nN {}\n",
            fmt_rational(&c.b),
            fmt_rational(&c.c_n),
            fmt_rational(&c.c0),
            c.n
        );
        out
    }
}

fn vec_line(key: &str, v: &[BigRational]) -> String {
    std::iter::once(key.to_string()).chain(v.iter().map(fmt_rational)).collect::<Vec<_>>().join(" ")
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    Instance::parse(&text)
}

/// Paths listed one per line, relative to the list file's directory.
pub fn parse_list(text: &str, base: &Path) -> Vec<PathBuf> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            let p = Path::new(l);
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        })
        .collect()
}
