//! Parser for the type annotation syntax:
//!
//! ```text
//! type    := tensor | record | func | ident | "top"
//! tensor  := "tensor" "[" dim ("," dim)* "]" ["of" ident]
//! dim     := factor ("*" factor)*
//! factor  := ident ["(" int ")"] | int
//! record  := "{" ident ":" type ("," ident ":" type)* "}"
//! func    := "(" ident ":" type ("," ident ":" type)* ")" "->" type
//! ```
//!
//! `of`-less tensors default to element `num`; whitespace is insignificant.

use super::{normalize, Dim, PyType, TensorType};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("type syntax error at offset {offset}: {message}")]
pub struct TypeSyntaxError {
    pub offset: usize,
    pub message: String,
}

pub fn parse_type(text: &str) -> Result<PyType, TypeSyntaxError> {
    let mut p = TypeParser {
        src: text.as_bytes(),
        pos: 0,
    };
    let t = p.parse_type()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input after type"));
    }
    Ok(normalize(&t))
}

struct TypeParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> TypeParser<'a> {
    fn err(&self, message: impl Into<String>) -> TypeSyntaxError {
        TypeSyntaxError {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), TypeSyntaxError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected {:?}", c as char)))
        }
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        match self.src.get(self.pos) {
            Some(c) if c.is_ascii_alphabetic() || *c == b'_' => {}
            _ => return None,
        }
        while self
            .src
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
        {
            self.pos += 1;
        }
        Some(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn int(&mut self) -> Result<u64, TypeSyntaxError> {
        self.skip_ws();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        String::from_utf8_lossy(&self.src[start..self.pos])
            .parse()
            .map_err(|_| self.err("integer out of range"))
    }

    fn parse_type(&mut self) -> Result<PyType, TypeSyntaxError> {
        match self.peek() {
            Some(b'{') => self.parse_record(),
            Some(b'(') => self.parse_func(),
            _ => {
                let save = self.pos;
                match self.ident() {
                    Some(word) if word == "tensor" && self.peek() == Some(b'[') => self.parse_tensor(),
                    Some(word) if word == "top" => Ok(PyType::Top),
                    Some(word) => Ok(PyType::Label(word)),
                    None => {
                        self.pos = save;
                        Err(self.err("expected a type"))
                    }
                }
            }
        }
    }

    fn parse_tensor(&mut self) -> Result<PyType, TypeSyntaxError> {
        self.expect(b'[')?;
        let mut dims = Vec::new();
        loop {
            dims.push(self.parse_dim()?);
            if !self.eat(b',') {
                break;
            }
        }
        self.expect(b']')?;
        // optional "of" element; bare tensors hold plain numbers
        let save = self.pos;
        let element = match self.ident() {
            Some(word) if word == "of" => {
                let label = self.ident().ok_or_else(|| self.err("expected element label after `of`"))?;
                if label == "top" {
                    PyType::Top
                } else {
                    PyType::Label(label)
                }
            }
            _ => {
                self.pos = save;
                PyType::Label("num".to_string())
            }
        };
        Ok(PyType::Tensor(TensorType::new(dims, element)))
    }

    fn parse_dim(&mut self) -> Result<Dim, TypeSyntaxError> {
        let mut factors = vec![self.parse_factor()?];
        while self.eat(b'*') {
            factors.push(self.parse_factor()?);
        }
        Ok(if factors.len() == 1 {
            factors.into_iter().next().expect("len checked")
        } else {
            Dim::Product(factors)
        })
    }

    fn parse_factor(&mut self) -> Result<Dim, TypeSyntaxError> {
        if let Some(l) = self.ident() {
            if self.eat(b'(') {
                let n = self.int()?;
                self.expect(b')')?;
                Ok(Dim::Labeled(l, n))
            } else {
                Ok(Dim::Sym(l))
            }
        } else {
            Ok(Dim::Num(self.int()?))
        }
    }

    fn parse_record(&mut self) -> Result<PyType, TypeSyntaxError> {
        self.expect(b'{')?;
        let mut fields = BTreeMap::new();
        loop {
            let name = self.ident().ok_or_else(|| self.err("expected field name"))?;
            self.expect(b':')?;
            let ty = self.parse_type()?;
            if fields.insert(name.clone(), ty).is_some() {
                return Err(self.err(format!("duplicate record field {name:?}")));
            }
            if !self.eat(b',') {
                break;
            }
        }
        self.expect(b'}')?;
        Ok(PyType::Record(fields))
    }

    fn parse_func(&mut self) -> Result<PyType, TypeSyntaxError> {
        self.expect(b'(')?;
        let mut params = BTreeMap::new();
        if self.peek() != Some(b')') {
            loop {
                let name = self.ident().ok_or_else(|| self.err("expected parameter name"))?;
                self.expect(b':')?;
                let ty = self.parse_type()?;
                if params.insert(name.clone(), ty).is_some() {
                    return Err(self.err(format!("duplicate parameter {name:?}")));
                }
                if !self.eat(b',') {
                    break;
                }
            }
        }
        self.expect(b')')?;
        self.skip_ws();
        if !self.src[self.pos..].starts_with(b"->") {
            return Err(self.err("expected `->` after parameter list"));
        }
        self.pos += 2;
        let result = self.parse_type()?;
        Ok(PyType::Function {
            params,
            result: Box::new(result),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{labeled, num, product, record, sym, tensor, type_equal};

    #[test]
    fn mnist_images_type() {
        let t = parse_type("tensor[batch, y(28)*x(28)] of channel").unwrap();
        assert_eq!(
            t,
            tensor(vec![sym("batch"), product(vec![labeled("y", 28), labeled("x", 28)])], "channel")
        );
    }

    #[test]
    fn labels_tensor_type() {
        let t = parse_type("tensor[10] of label").unwrap();
        assert_eq!(t, tensor(vec![num(10)], "label"));
    }

    #[test]
    fn top_type() {
        assert_eq!(parse_type("top").unwrap(), PyType::Top);
    }

    #[test]
    fn of_less_tensor_defaults_to_num() {
        let t = parse_type("tensor[2, 2]").unwrap();
        assert_eq!(t, tensor(vec![num(2), num(2)], "num"));
    }

    #[test]
    fn record_and_function_types() {
        let r = parse_type("{train: {images: tensor[batch, y(28)*x(28)] of channel}, test: top}").unwrap();
        match &r {
            PyType::Record(fields) => {
                assert_eq!(fields.len(), 2);
                assert!(matches!(fields["test"], PyType::Top));
            }
            other => panic!("expected record, got {other}"),
        }
        let f = parse_type("(x_dict: {images: tensor[batch, n] of channel}) -> tensor[batch, k] of channel").unwrap();
        assert!(matches!(f, PyType::Function { .. }));
    }

    #[test]
    fn parse_display_round_trip() {
        for text in [
            "tensor[batch, y(28), x(28), 1] of channel",
            "tensor[batch, y(7)*x(7)] of channel",
            "{test: {images: tensor[batch, y(28)*x(28)] of channel}, train: {images: tensor[batch, y(28)*x(28)] of channel, labels: tensor[10] of label}}",
            "(x_dict: {images: tensor[batch, y(28)*x(28)] of channel}) -> tensor[batch, n_classes] of channel",
            "top",
            "tensor[2*3*4, k] of num",
        ] {
            let t = parse_type(text).unwrap();
            assert_eq!(t.to_string(), text, "canonical form should round-trip");
            assert!(type_equal(&t, &parse_type(&t.to_string()).unwrap()));
        }
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let err = parse_type("tensor[").unwrap_err();
        assert!(err.offset >= 6);
        assert!(parse_type("tensor[] of x").is_err());
        assert!(parse_type("{a b}").is_err());
    }

    #[test]
    fn record_order_insensitive_via_parse() {
        let a = parse_type("{a: tensor[1] of v, b: top}").unwrap();
        let b = parse_type("{b: top, a: tensor[1] of v}").unwrap();
        assert!(type_equal(&a, &b));
        let _ = record(vec![]);
    }
}
