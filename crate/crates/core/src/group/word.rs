//! Reading and printing elements as words in the declared generators.
//!
//! Grammar: a sequence of tokens `label` or `label^k` (k a signed integer),
//! optionally separated by whitespace, `.` or `*`. The token `e` denotes
//! the identity. Labels are matched greedily, longest first.

use super::{Compiled, Element, Group, GroupError};

fn is_separator(c: char) -> bool {
    c.is_whitespace() || c == '.' || c == '*' || c == '·'
}

pub(super) fn parse(group: &Group, input: &str) -> Result<Element, GroupError> {
    let err = |pos: usize, msg: &str| GroupError::Parse {
        input: input.to_string(),
        pos,
        msg: msg.to_string(),
    };
    let table_names: &[String] = match &group.0.compiled {
        Compiled::Table { names, .. } => names,
        _ => &[],
    };
    let mut acc = group.identity();
    let mut pos = 0;
    let bytes = input.as_bytes();
    loop {
        while let Some(c) = input[pos..].chars().next() {
            if is_separator(c) {
                pos += c.len_utf8();
            } else {
                break;
            }
        }
        if pos >= input.len() {
            break;
        }
        let rest = &input[pos..];
        let mut best: Option<(usize, Element)> = None;
        let mut consider = |label: &str, elem: &dyn Fn() -> Element| {
            if rest.starts_with(label) && best.as_ref().is_none_or(|(l, _)| label.len() > *l) {
                best = Some((label.len(), elem()));
            }
        };
        for g in group.generators() {
            consider(&g.label, &|| g.element.clone());
        }
        for (i, name) in table_names.iter().enumerate() {
            consider(name, &|| Element::Finite(i as u32));
        }
        consider("e", &|| group.identity());
        let (len, elem) = best.ok_or_else(|| err(pos, "unknown generator"))?;
        pos += len;
        let mut power = 1i64;
        if bytes.get(pos) == Some(&b'^') {
            pos += 1;
            let start = pos;
            if bytes.get(pos) == Some(&b'-') || bytes.get(pos) == Some(&b'+') {
                pos += 1;
            }
            while bytes.get(pos).is_some_and(|b| b.is_ascii_digit()) {
                pos += 1;
            }
            power = input[start..pos]
                .parse()
                .map_err(|_| err(start, "expected an integer exponent"))?;
        } else if rest[len..].starts_with("⁻¹") {
            pos += "⁻¹".len();
            power = -1;
        }
        acc = group.mul(&acc, &group.pow(&elem, power));
    }
    Ok(acc)
}

fn separator(group: &Group) -> &'static str {
    if group.0.single_char_labels {
        ""
    } else {
        " "
    }
}

fn token(label: &str, power: i64) -> String {
    if power == 1 {
        label.to_string()
    } else {
        format!("{label}^{power}")
    }
}

pub(super) fn format(group: &Group, g: &Element) -> String {
    if group.is_identity(g) {
        return "e".to_string();
    }
    let sep = separator(group);
    match (&group.0.compiled, g) {
        (Compiled::Table { names, .. }, Element::Finite(i)) => {
            let name = &names[*i as usize];
            if group.label_index(name).is_some() {
                return name.clone();
            }
        }
        (Compiled::FreeProduct { factors, .. }, Element::Product(s)) => {
            return s
                .iter()
                .map(|(f, x)| factors[*f as usize].format(x))
                .collect::<Vec<_>>()
                .join(sep);
        }
        _ => {}
    }
    // Generic path: compress the generator word into labelled powers.
    let mut tokens: Vec<(usize, i64)> = Vec::new();
    for (gi, p) in group.word_of(g) {
        match tokens.last_mut() {
            Some((last, q)) if *last == gi => {
                *q += p;
                if *q == 0 {
                    tokens.pop();
                }
            }
            _ => tokens.push((gi, p)),
        }
    }
    if tokens.is_empty() {
        return "e".to_string();
    }
    tokens
        .iter()
        .map(|(gi, p)| token(&group.generators()[*gi].label, *p))
        .collect::<Vec<_>>()
        .join(sep)
}

#[cfg(test)]
mod tests {
    use crate::group::{Group, GroupSpec};

    #[test]
    fn identity_and_separators() {
        let g = Group::new(GroupSpec::free_product_of_integers(&["a", "b"])).unwrap();
        assert_eq!(g.parse("e").unwrap(), g.identity());
        assert_eq!(g.parse("").unwrap(), g.identity());
        assert_eq!(g.parse("a b.a^-1 * b^-1").unwrap(), g.parse("aba^-1b^-1").unwrap());
        assert_eq!(g.parse("a⁻¹").unwrap(), g.parse("a^-1").unwrap());
        assert_eq!(g.format(&g.identity()), "e");
    }

    #[test]
    fn parse_errors_report_position() {
        let g = Group::new(GroupSpec::free_product_of_integers(&["a", "b"])).unwrap();
        match g.parse("ab c") {
            Err(crate::group::GroupError::Parse { pos, .. }) => assert_eq!(pos, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(g.parse("a^x").is_err());
    }

    #[test]
    fn longest_label_wins() {
        let g = Group::new(GroupSpec::free(&["x", "xy", "y"])).unwrap();
        let w = g.parse("xy x y").unwrap();
        assert_eq!(g.word_of(&w), vec![(1, 1), (0, 1), (2, 1)]);
        assert_eq!(g.format(&w), "xy x y");
    }
}
