use std::fmt::Write;
use std::ops::ControlFlow;

use super::{RegionMap, RegionTable3};

/// `x_1,..,x_n,coefficient,representative_k` rows in lexicographic order.
pub fn region_table_csv(map: &RegionMap) -> String {
    let n = map.tuple().len();
    let mut out = String::new();
    for j in 1..=n {
        let _ = write!(out, "x_{j},");
    }
    out.push_str("coefficient,representative_k\n");
    map.for_each_cell(|x, v| {
        for xj in x {
            let _ = write!(out, "{xj},");
        }
        let k = map.corner(x).expect("cell index");
        let _ = writeln!(out, "{v},{k}");
        ControlFlow::Continue(())
    });
    out
}

pub fn table3_csv(table: &RegionTable3) -> String {
    let mut out = String::from("x_1,x_2,x_3,coefficient,representative_k\n");
    for (x, v, k) in &table.entries {
        let _ = writeln!(out, "{},{},{},{v},{k}", x[0], x[1], x[2]);
    }
    out
}

const CELL: usize = 28;
const PAD: usize = 24;

fn fill(v: i64) -> &'static str {
    match v.signum() {
        1 => "#f4c7a1",
        -1 => "#a9c8ec",
        _ => "#ffffff",
    }
}

fn sign_text(v: i64) -> String {
    match v {
        0 => String::new(),
        1 => "+".into(),
        -1 => "\u{2212}".into(),
        v if v > 0 => format!("+{v}"),
        v => format!("\u{2212}{}", -v),
    }
}

fn grid(out: &mut String, left: usize, top: usize, title: &str, value: impl Fn(usize, usize) -> String, shade: impl Fn(usize, usize) -> i64) {
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="12">{title}</text>"#,
        left,
        top - 6
    );
    for row in 0..4 {
        for col in 0..4 {
            // rows grow upward so the origin sits bottom-left
            let x = left + col * CELL;
            let y = top + (3 - row) * CELL;
            let _ = writeln!(
                out,
                r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}" stroke="gray"/>"#,
                fill(shade(col, row))
            );
            let text = value(col, row);
            if !text.is_empty() {
                let _ = writeln!(
                    out,
                    r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{text}</text>"#,
                    x + CELL / 2,
                    y + CELL / 2 + 5
                );
            }
        }
    }
}

/// Four layers of the 4×4×4 table along the third prime, then the three
/// summands of the pointwise formula, each drawn on the plane it depends on.
pub fn table3_svg(table: &RegionTable3, map: &RegionMap) -> String {
    let panel = 4 * CELL + PAD;
    let width = PAD + 4 * panel;
    let height = PAD * 3 + 2 * (4 * CELL + PAD) + 20;
    let [p, q, r] = &table.primes;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif">"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{PAD}" y="18" font-size="14">N = {p}·{q}·{r}, case {}</text>"#,
        table.pqr.case.number()
    );
    let top = PAD + 30;
    for z in 0..4 {
        let left = PAD + z * panel;
        grid(
            &mut out,
            left,
            top,
            &format!("x_3 = {z}"),
            |c, r| table.get([c, r, z]).to_string(),
            |c, r| table.get([c, r, z]),
        );
    }
    let top = top + 4 * CELL + PAD + 20;
    let planes = [(1usize, 2usize), (0, 2), (0, 1)];
    for (i, (a, b)) in planes.into_iter().enumerate() {
        let left = PAD + i * panel;
        let term = |c: usize, r: usize| {
            let mut x = [0usize; 3];
            x[a] = c;
            x[b] = r;
            map.term(i, &x).expect("cell")
        };
        grid(
            &mut out,
            left,
            top,
            &format!("term {} (x_{}, x_{})", i + 1, a + 1, b + 1),
            |c, r| sign_text(term(c, r)),
            term,
        );
    }
    out.push_str("</svg>\n");
    out
}
