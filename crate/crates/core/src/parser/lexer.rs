use std::fmt;

use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Select,
    From,
    Where,
    And,
    Distinct,
    Sum,
    Group,
    By,
    MultiQuery,
    End,
    Ident(String),
    /// Numeric literal, kept as written so rendering round-trips.
    Number(String),
    Str(String),
    Comma,
    LParen,
    RParen,
    Colon,
    Semi,
    Eq,
    Lt,
    Gt,
    Neq,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Number(s) => write!(f, "number `{s}`"),
            Tok::Str(s) => write!(f, "string '{s}'"),
            Tok::Select => f.write_str("SELECT"),
            Tok::From => f.write_str("FROM"),
            Tok::Where => f.write_str("WHERE"),
            Tok::And => f.write_str("AND"),
            Tok::Distinct => f.write_str("DISTINCT"),
            Tok::Sum => f.write_str("SUM"),
            Tok::Group => f.write_str("GROUP"),
            Tok::By => f.write_str("BY"),
            Tok::MultiQuery => f.write_str("MULTIQUERY"),
            Tok::End => f.write_str("END"),
            Tok::Comma => f.write_str("`,`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::Neq => f.write_str("`<>`"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word.to_ascii_uppercase().as_str() {
        "SELECT" => Tok::Select,
        "FROM" => Tok::From,
        "WHERE" => Tok::Where,
        "AND" => Tok::And,
        "DISTINCT" => Tok::Distinct,
        "SUM" => Tok::Sum,
        "GROUP" => Tok::Group,
        "BY" => Tok::By,
        "MULTIQUERY" => Tok::MultiQuery,
        "END" => Tok::End,
        _ => return None,
    })
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let start = i;
        let tok = match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '-' if chars.get(i + 1) == Some(&'-') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                keyword(&word).unwrap_or(Tok::Ident(word))
            }
            c if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                Tok::Number(chars[start..i].iter().collect())
            }
            '\'' => {
                i += 1;
                let body_start = i;
                while i < chars.len() && chars[i] != '\'' && chars[i] != '\n' {
                    i += 1;
                }
                if i >= chars.len() || chars[i] != '\'' {
                    return Err(ParseError::UnterminatedString {
                        line: pos.line,
                        col: pos.col,
                    });
                }
                let body: String = chars[body_start..i].iter().collect();
                i += 1;
                Tok::Str(body)
            }
            ',' | '(' | ')' | ':' | ';' | '=' => {
                i += 1;
                match c {
                    ',' => Tok::Comma,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ':' => Tok::Colon,
                    ';' => Tok::Semi,
                    _ => Tok::Eq,
                }
            }
            '<' => {
                i += 1;
                if chars.get(i) == Some(&'>') {
                    i += 1;
                    Tok::Neq
                } else {
                    Tok::Lt
                }
            }
            '>' => {
                i += 1;
                Tok::Gt
            }
            '!' if chars.get(i + 1) == Some(&'=') => {
                i += 2;
                Tok::Neq
            }
            other => {
                return Err(ParseError::IllegalChar { ch: other, line, col });
            }
        };
        col += i - start;
        out.push(Token { tok, pos });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn simple_select() {
        assert_eq!(
            toks("SELECT c_name FROM customer"),
            vec![
                Tok::Select,
                Tok::Ident("c_name".into()),
                Tok::From,
                Tok::Ident("customer".into())
            ]
        );
    }

    #[test]
    fn comparison_with_number() {
        assert_eq!(
            toks("r_regionkey < 5"),
            vec![Tok::Ident("r_regionkey".into()), Tok::Lt, Tok::Number("5".into())]
        );
    }

    #[test]
    fn string_literal() {
        assert_eq!(
            toks("c_name = 'Customer#000070919'"),
            vec![
                Tok::Ident("c_name".into()),
                Tok::Eq,
                Tok::Str("Customer#000070919".into())
            ]
        );
    }

    #[test]
    fn keywords_case_insensitive_and_neq_forms() {
        assert_eq!(
            toks("select a from t where a <> 1 and a != 2"),
            vec![
                Tok::Select,
                Tok::Ident("a".into()),
                Tok::From,
                Tok::Ident("t".into()),
                Tok::Where,
                Tok::Ident("a".into()),
                Tok::Neq,
                Tok::Number("1".into()),
                Tok::And,
                Tok::Ident("a".into()),
                Tok::Neq,
                Tok::Number("2".into()),
            ]
        );
    }

    #[test]
    fn decimals_and_negatives() {
        assert_eq!(
            toks("0.04 -3"),
            vec![Tok::Number("0.04".into()), Tok::Number("-3".into())]
        );
    }

    #[test]
    fn positions() {
        let t = tokenize("SELECT\n  a").unwrap();
        assert_eq!(t[1].pos, Pos { line: 2, col: 3 });
    }

    #[test]
    fn illegal_char() {
        let err = tokenize("SELECT a\nFROM t WHERE a ? 1").unwrap_err();
        assert!(matches!(
            err,
            ParseError::IllegalChar {
                ch: '?',
                line: 2,
                col: 16
            }
        ));
    }

    #[test]
    fn unterminated_string() {
        assert!(matches!(
            tokenize("a = 'oops").unwrap_err(),
            ParseError::UnterminatedString { line: 1, col: 5 }
        ));
    }
}
