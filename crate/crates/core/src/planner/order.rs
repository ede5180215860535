use std::fmt;

use crate::tableset::TableSet;

/// Binary join tree over table indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum JoinOrder {
    Leaf(usize),
    Join(Box<JoinOrder>, Box<JoinOrder>),
}

impl JoinOrder {
    pub fn join(l: JoinOrder, r: JoinOrder) -> Self {
        JoinOrder::Join(Box::new(l), Box::new(r))
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, JoinOrder::Leaf(_))
    }

    pub fn tables(&self) -> TableSet {
        match self {
            JoinOrder::Leaf(t) => TableSet::single(*t),
            JoinOrder::Join(l, r) => l.tables().union(r.tables()),
        }
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<usize> {
        match self {
            JoinOrder::Leaf(t) => vec![*t],
            JoinOrder::Join(l, r) => {
                let mut v = l.leaves();
                v.extend(r.leaves());
                v
            }
        }
    }

    pub fn join_count(&self) -> usize {
        match self {
            JoinOrder::Leaf(_) => 0,
            JoinOrder::Join(l, r) => 1 + l.join_count() + r.join_count(),
        }
    }

    /// Leaf → its digit; join → children concatenated, each join child
    /// parenthesized: `0(((12)3)4)`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        self.render_into(&mut s);
        s
    }

    fn render_into(&self, s: &mut String) {
        match self {
            JoinOrder::Leaf(t) => s.push_str(&t.to_string()),
            JoinOrder::Join(l, r) => {
                for c in [l, r] {
                    if c.is_leaf() {
                        c.render_into(s);
                    } else {
                        s.push('(');
                        c.render_into(s);
                        s.push(')');
                    }
                }
            }
        }
    }

    /// Parses the rendering back into a tree. Every join in the rendering must
    /// have exactly two inputs, e.g. `((01)2)3`, so `012` is rejected.
    pub fn parse(s: &str) -> Option<JoinOrder> {
        fn seq(chars: &[char], i: &mut usize) -> Option<JoinOrder> {
            let mut items = Vec::new();
            while *i < chars.len() && chars[*i] != ')' {
                let c = chars[*i];
                if c == '(' {
                    *i += 1;
                    let inner = seq(chars, i)?;
                    if chars.get(*i) != Some(&')') || inner.is_leaf() {
                        return None;
                    }
                    *i += 1;
                    items.push(inner);
                } else {
                    items.push(JoinOrder::Leaf(c.to_digit(10)? as usize));
                    *i += 1;
                }
            }
            match items.len() {
                1 => items.pop(),
                2 => {
                    let r = items.pop()?;
                    let l = items.pop()?;
                    Some(JoinOrder::join(l, r))
                }
                _ => None,
            }
        }
        let chars: Vec<char> = s.chars().collect();
        let mut i = 0;
        let t = seq(&chars, &mut i)?;
        (i == chars.len()).then_some(t)
    }

    /// Same tree up to swapping the two inputs of any join.
    pub fn equivalent(&self, other: &JoinOrder) -> bool {
        match (self, other) {
            (JoinOrder::Leaf(a), JoinOrder::Leaf(b)) => a == b,
            (JoinOrder::Join(a, b), JoinOrder::Join(c, d)) => {
                (a.equivalent(c) && b.equivalent(d)) || (a.equivalent(d) && b.equivalent(c))
            }
            _ => false,
        }
    }
}

impl fmt::Display for JoinOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(i: usize) -> JoinOrder {
        JoinOrder::Leaf(i)
    }

    #[test]
    fn rendering() {
        let t = JoinOrder::join(
            leaf(0),
            JoinOrder::join(JoinOrder::join(JoinOrder::join(leaf(1), leaf(2)), leaf(3)), leaf(4)),
        );
        assert_eq!(t.render(), "0(((12)3)4)");
        let v = JoinOrder::join(leaf(0), JoinOrder::join(leaf(3), leaf(4)));
        let t = JoinOrder::join(JoinOrder::join(leaf(1), leaf(2)), v);
        assert_eq!(t.render(), "(12)(0(34))");
        assert_eq!(t.tables().key(), "01234");
        assert_eq!(t.leaves(), [1, 2, 0, 3, 4]);
        assert_eq!(t.join_count(), 4);
    }

    #[test]
    fn parse_round_trip() {
        for s in ["3", "01", "((01)2)3", "0(((12)3)4)", "(12)(0(34))", "(23)0"] {
            assert_eq!(JoinOrder::parse(s).unwrap().render(), s);
        }
        for bad in ["", "012", "(0)1", "((01)", "0a"] {
            assert!(JoinOrder::parse(bad).is_none(), "{bad}");
        }
    }

    #[test]
    fn equivalence_ignores_orientation() {
        let a = JoinOrder::parse("0(4(23))").unwrap();
        let b = JoinOrder::parse("0((23)4)").unwrap();
        let c = JoinOrder::parse("(04)(23)").unwrap();
        assert!(a.equivalent(&b));
        assert!(!a.equivalent(&c));
    }
}
