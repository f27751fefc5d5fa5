//! Machine-readable and tabular reports.
//!
//! Every report embeds the canonical text of the instances it was computed
//! from, so a JSON report can be re-parsed and re-evaluated.

use std::fmt::Write as _;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::arith::{fmt_rational, fmt_sig12};
use crate::error::Result;
use crate::instance::Instance;
use crate::invariants::{
    classify_sequence, defect_primes, intersect_levels, lower_bound, test_invariant, upper_bound, Classification,
    DefectSets, EvalConfig, LevelSpec, LowerBound, UpperBound,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeRow {
    pub p: u64,
    pub depths: Vec<u32>,
    pub level_depth: u32,
    pub index_full: u64,
    pub index_level: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectsBody {
    pub delta: Vec<u64>,
    pub delta_w: Vec<u64>,
    pub primes: Vec<PrimeRow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerRow {
    pub value: String,
    pub degenerate: bool,
    pub product: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpperRow {
    pub value: String,
    pub exact: String,
    pub class_number: u64,
    pub order: String,
    pub exponent: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexRow {
    pub p: u64,
    pub index: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderRow {
    pub p: u64,
    pub order: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauBody {
    pub discriminant: String,
    pub tau: String,
    pub w_prime_u: Vec<String>,
    pub w_prime_v: Vec<String>,
    pub orders: Vec<OrderRow>,
    pub indices: Vec<IndexRow>,
    pub defects: DefectsBody,
    pub lower: LowerRow,
    pub upper: Option<UpperRow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsBody {
    pub lower: LowerRow,
    pub upper: UpperRow,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRow {
    pub signature: String,
    pub local_parts: Vec<(u64, Vec<String>)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifyBody {
    pub threshold: String,
    pub taus: Vec<String>,
    pub max_tau: Option<String>,
    pub verdict: String,
    pub classes: Vec<ClassRow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRow {
    pub p: u64,
    pub depth: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectBody {
    pub level: Vec<LevelRow>,
    pub fragment: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Report {
    Tau { instance: String, precision_max: u32, result: TauBody },
    Bounds { instance: String, precision_max: u32, result: BoundsBody },
    Defects { instance: String, precision_max: u32, result: DefectsBody },
    Classify { instances: Vec<String>, precision_max: u32, result: ClassifyBody },
    Intersect { instances: Vec<String>, precision_max: u32, result: IntersectBody },
}

fn defects_body(d: &DefectSets) -> DefectsBody {
    DefectsBody {
        delta: d.delta.clone(),
        delta_w: d.delta_w.clone(),
        primes: d
            .primes
            .iter()
            .map(|x| PrimeRow {
                p: x.p,
                depths: x.depths.clone(),
                level_depth: x.level_depth,
                index_full: x.index_full,
                index_level: x.index_level,
            })
            .collect(),
    }
}

fn lower_row(l: &LowerBound) -> LowerRow {
    LowerRow { value: fmt_sig12(l.value), degenerate: l.degenerate, product: fmt_rational(&l.product) }
}

fn upper_row(u: &UpperBound) -> UpperRow {
    UpperRow {
        value: fmt_sig12(u.value()),
        exact: fmt_rational(&u.exact),
        class_number: u.class_number,
        order: u.order.to_string(),
        exponent: u.exponent,
    }
}

fn strings(v: &[BigRational]) -> Vec<String> {
    v.iter().map(fmt_rational).collect()
}

pub fn tau_report(inst: &Instance, cfg: &EvalConfig) -> Result<Report> {
    let r = test_invariant(&inst.datum, &inst.level, cfg)?;
    let result = TauBody {
        discriminant: r.discriminant.to_string(),
        tau: fmt_rational(&r.tau),
        w_prime_u: strings(&r.minimum.w_prime.u),
        w_prime_v: strings(&r.minimum.w_prime.v),
        orders: r.minimum.orders.iter().map(|&(p, order)| OrderRow { p, order }).collect(),
        indices: r.indices.iter().map(|(p, x)| IndexRow { p: *p, index: fmt_rational(x) }).collect(),
        defects: defects_body(&r.defects),
        lower: lower_row(&r.lower),
        upper: r.upper.as_ref().map(upper_row),
    };
    Ok(Report::Tau { instance: inst.to_text(), precision_max: cfg.policy.extra_max, result })
}

pub fn bounds_report(inst: &Instance, cfg: &EvalConfig) -> Result<Report> {
    let lower = lower_bound(&inst.datum, &inst.level, cfg)?;
    let upper = upper_bound(&inst.datum, &inst.level, cfg)?;
    let result = BoundsBody { lower: lower_row(&lower), upper: upper_row(&upper) };
    Ok(Report::Bounds { instance: inst.to_text(), precision_max: cfg.policy.extra_max, result })
}

pub fn defects_report(inst: &Instance, cfg: &EvalConfig) -> Result<Report> {
    let d = defect_primes(&inst.datum, &inst.level, &cfg.policy)?;
    Ok(Report::Defects { instance: inst.to_text(), precision_max: cfg.policy.extra_max, result: defects_body(&d) })
}

pub fn classify_report(items: &[Instance], threshold: &BigRational, cfg: &EvalConfig) -> Result<Report> {
    let pairs: Vec<_> = items.iter().map(|i| (i.datum.clone(), i.level.clone())).collect();
    let Classification { taus, max_tau, bounded, classes } = classify_sequence(&pairs, threshold, cfg)?;
    let result = ClassifyBody {
        threshold: fmt_rational(threshold),
        taus: strings(&taus),
        max_tau: max_tau.as_ref().map(fmt_rational),
        verdict: if bounded { "BOUNDED" } else { "UNBOUNDED" }.to_string(),
        classes: classes
            .iter()
            .map(|k| ClassRow {
                signature: k.signature.clone(),
                local_parts: k.local_parts.iter().map(|(p, v)| (*p, strings(v))).collect(),
            })
            .collect(),
    };
    Ok(Report::Classify {
        instances: items.iter().map(Instance::to_text).collect(),
        precision_max: cfg.policy.extra_max,
        result,
    })
}

/// The `[level]` section of an instance file.
pub fn level_fragment(level: &LevelSpec) -> String {
    let inst_text = |p: &u64, e: &crate::invariants::LevelException| {
        let mut s = format!("prime {p} depth {}", e.depth);
        if let Some(l) = &e.lattice {
            let cols: Vec<String> = l.basis().iter().map(|c| strings(c).join(" ")).collect();
            let _ = write!(s, " lattice {}", cols.join(" ; "));
        }
        s
    };
    let mut out = String::from("[level]\n");
    for (p, e) in level.exceptions() {
        out += &inst_text(p, e);
        out += "\n";
    }
    out
}

/// Intersect the first item's level against every item's `w`.
pub fn intersect_report(items: &[Instance], cfg: &EvalConfig) -> Result<Report> {
    let first = items.first().ok_or_else(|| crate::Error::Invalid("intersect needs at least one instance".into()))?;
    let ws: Vec<_> = items.iter().map(|i| i.datum.w().clone()).collect();
    let level = intersect_levels(&first.datum, &first.level, &ws)?;
    let result = IntersectBody {
        level: level.exceptions().iter().map(|(p, e)| LevelRow { p: *p, depth: e.depth }).collect(),
        fragment: level_fragment(&level),
    };
    Ok(Report::Intersect {
        instances: items.iter().map(Instance::to_text).collect(),
        precision_max: cfg.policy.extra_max,
        result,
    })
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Report> {
        serde_json::from_str(text).map_err(|e| crate::Error::Parse { line: e.line(), msg: e.to_string() })
    }

    /// Re-parse the embedded instances and recompute the report. `cfg`
    /// supplies the cache; constants come from the instances and the
    /// precision policy from the report.
    pub fn reevaluate(&self, cfg: &EvalConfig) -> Result<Report> {
        let with = |pm: u32, inst: Option<&Instance>| {
            let mut c = cfg.clone();
            c.policy.extra_max = pm;
            if let Some(i) = inst {
                c.constants = i.constants.clone();
            }
            c
        };
        match self {
            Report::Tau { instance, precision_max, .. } => {
                let i = Instance::parse(instance)?;
                tau_report(&i, &with(*precision_max, Some(&i)))
            }
            Report::Bounds { instance, precision_max, .. } => {
                let i = Instance::parse(instance)?;
                bounds_report(&i, &with(*precision_max, Some(&i)))
            }
            Report::Defects { instance, precision_max, .. } => {
                let i = Instance::parse(instance)?;
                defects_report(&i, &with(*precision_max, Some(&i)))
            }
            Report::Classify { instances, precision_max, result } => {
                let items = instances.iter().map(|t| Instance::parse(t)).collect::<Result<Vec<_>>>()?;
                let threshold = crate::arith::parse_rational(&result.threshold)
                    .ok_or_else(|| crate::Error::Invalid("bad threshold in report".into()))?;
                // Constants are carried per instance; classification uses the first item's.
                classify_report(&items, &threshold, &with(*precision_max, items.first()))
            }
            Report::Intersect { instances, precision_max, .. } => {
                let items = instances.iter().map(|t| Instance::parse(t)).collect::<Result<Vec<_>>>()?;
                intersect_report(&items, &with(*precision_max, items.first()))
            }
        }
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        match self {
            Report::Tau { result: r, .. } => {
                row(&mut out, "discriminant", &r.discriminant);
                row(&mut out, "tau", &r.tau);
                row(&mut out, "w_prime", &format!("u [{}] v [{}]", r.w_prime_u.join(" "), r.w_prime_v.join(" ")));
                let orders: Vec<String> = r.orders.iter().map(|o| format!("{}^{}", o.p, o.order)).collect();
                row(&mut out, "orders", &list_or_dash(&orders));
                let idx: Vec<String> = r.indices.iter().map(|i| format!("{}:{}", i.p, i.index)).collect();
                row(&mut out, "I_p", &list_or_dash(&idx));
                defects_table(&mut out, &r.defects);
                lower_table(&mut out, &r.lower);
                match &r.upper {
                    Some(u) => upper_table(&mut out, u),
                    None => row(&mut out, "upper", "unavailable"),
                }
            }
            Report::Bounds { result: r, .. } => {
                lower_table(&mut out, &r.lower);
                upper_table(&mut out, &r.upper);
            }
            Report::Defects { result: r, .. } => defects_table(&mut out, r),
            Report::Classify { result: r, .. } => {
                row(&mut out, "items", &r.taus.len().to_string());
                row(&mut out, "taus", &list_or_dash(&r.taus));
                row(&mut out, "max_tau", r.max_tau.as_deref().unwrap_or("-"));
                row(&mut out, "threshold", &r.threshold);
                row(&mut out, "verdict", &r.verdict);
                row(&mut out, "classes", &r.classes.len().to_string());
                for c in &r.classes {
                    let parts: Vec<String> = c.local_parts.iter().map(|(p, v)| format!("{p}:[{}]", v.join(" "))).collect();
                    row(&mut out, "class", &format!("{} | {}", c.signature, list_or_dash(&parts)));
                }
            }
            Report::Intersect { result: r, .. } => out += &r.fragment,
        }
        out
    }
}

fn row(out: &mut String, key: &str, value: &str) {
    let _ = writeln!(out, "{key:<16}{value}");
}

fn list_or_dash(v: &[String]) -> String {
    if v.is_empty() {
        "-".into()
    } else {
        v.join(" ")
    }
}

fn defects_table(out: &mut String, d: &DefectsBody) {
    let ints = |v: &[u64]| list_or_dash(&v.iter().map(u64::to_string).collect::<Vec<_>>());
    row(out, "delta", &ints(&d.delta));
    row(out, "delta_w", &ints(&d.delta_w));
    for p in &d.primes {
        let depths: Vec<String> = p.depths.iter().map(u32::to_string).collect();
        row(
            out,
            &format!("prime {}", p.p),
            &format!(
                "depths [{}] level_depth {} index_full {} index_level {}",
                depths.join(" "),
                p.level_depth,
                p.index_full,
                p.index_level
            ),
        );
    }
}

fn lower_table(out: &mut String, l: &LowerRow) {
    row(out, "lower", &format!("{} degenerate {} product {}", l.value, l.degenerate, l.product));
}

fn upper_table(out: &mut String, u: &UpperRow) {
    row(
        out,
        "upper",
        &format!("{} exact {} class_number {} order {} exponent {}", u.value, u.exact, u.class_number, u.order, u.exponent),
    );
}
