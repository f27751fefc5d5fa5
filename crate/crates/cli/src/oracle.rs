use serde::Serialize;

use num_integer::Roots;

use orbitbound::fields::{
    abelian_field_discriminant, cyclotomic_poly_disc_oracle, pell_fundamental, quadratic_class_number,
    AbelianFieldSpec,
};
use orbitbound::localtori::unit_group_generators;
use orbitbound::Result;

#[derive(Clone, Debug, Serialize)]
pub struct OracleCheck {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

fn check(name: String, expected: String, actual: Result<String>) -> OracleCheck {
    let actual = actual.unwrap_or_else(|e| format!("error: {e}"));
    OracleCheck { pass: expected == actual, name, expected, actual }
}

/// Reduce a positive definite form by the classical swap/translate steps.
fn reduce_form(mut a: i64, mut b: i64, mut c: i64) -> (i64, i64, i64) {
    loop {
        let d = b * b - 4 * a * c;
        // translate b into (-a, a]
        let k = (a - b).div_euclid(2 * a);
        b += 2 * a * k;
        c = (b * b - d) / (4 * a);
        if a > c {
            (a, b, c) = (c, -b, a);
            continue;
        }
        if a == c && b < 0 {
            b = -b;
        }
        return (a, b, c);
    }
}

/// Classes of primitive forms of discriminant `d < 0` found by reducing every
/// form in a box and counting distinct results.
fn class_number_by_reduction(d: i64) -> u64 {
    let bound = (-d).sqrt() + 2;
    let mut seen = std::collections::BTreeSet::new();
    for a in 1..=2 * bound {
        for b in -2 * bound..=2 * bound {
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if num_integer::gcd(num_integer::gcd(a, b), c) != 1 {
                continue;
            }
            seen.insert(reduce_form(a, b, c));
        }
    }
    seen.len() as u64
}

fn pell_brute(d: i64) -> (i64, i64) {
    (1i64..)
        .find_map(|y| {
            let x2 = d * y * y + 1;
            let x = x2.sqrt();
            (x * x == x2).then_some((x, y))
        })
        .expect("Pell equation has a solution")
}

pub fn oracle_checks() -> Vec<OracleCheck> {
    let mut out = Vec::new();
    for d in [-3, -4, -7, -8, -11, -15, -20, -23, -24, -47, -71] {
        out.push(check(
            format!("class_number {d}"),
            class_number_by_reduction(d).to_string(),
            quadratic_class_number(d).map(|h| h.to_string()),
        ));
    }
    for d in [2, 3, 5, 6, 7, 10, 13] {
        let (x, y) = pell_brute(d);
        let actual = pell_fundamental(d).map(|(x, y)| format!("({x},{y})"));
        out.push(check(format!("pell {d}"), format!("({x},{y})"), actual));
    }
    for n in [3, 4, 5, 7, 8, 9, 11, 12, 15, 16] {
        let actual = AbelianFieldSpec::cyclotomic(n).map(|f| abelian_field_discriminant(&f).to_string());
        out.push(check(format!("disc cyclotomic {n}"), cyclotomic_poly_disc_oracle(n).to_string(), actual));
    }
    let closures: [(AbelianFieldSpec, u64, u32); 6] = [
        (AbelianFieldSpec::rational(), 2, 5),
        (AbelianFieldSpec::rational(), 3, 3),
        (AbelianFieldSpec::quadratic(-4).expect("fundamental"), 2, 3),
        (AbelianFieldSpec::quadratic(-4).expect("fundamental"), 3, 2),
        (AbelianFieldSpec::quadratic(5).expect("fundamental"), 5, 2),
        (AbelianFieldSpec::cyclotomic(5).expect("cyclotomic"), 5, 2),
    ];
    for (field, p, k) in closures {
        let name = format!("units {field} mod {p}^{k}");
        match unit_group_generators(&field, p, k) {
            Ok(g) => {
                let expected = g.order().map(|o| o.to_string()).unwrap_or_else(|| "?".into());
                out.push(check(name, expected, g.closure_order().map(|n| n.to_string())));
            }
            Err(e) => out.push(check(name, "group".into(), Err(e))),
        }
    }
    out
}

pub fn render_table(checks: &[OracleCheck]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for c in checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        out += &format!("{:<width$}  {verdict}  expected {} actual {}\n", c.name, c.expected, c.actual);
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    out += &format!("{} checks, {} failed\n", checks.len(), failed);
    out
}
