//! Text form of quasi-valuations, the same one `Display` prints.
//!
//! ```text
//! qv    := 'min[' val ('|' val)* ']' | 'nadic:' INT | 'scaled:' FRAC ',' qv | val
//! val   := 'vp:' P
//!        | ('inert' | 'ram' | 'ramified' | 'split1' | 'split2') ':' P ',d=' D
//!        | 'ext:' P ',d=' D
//! ```
//!
//! `ext:p,d=D` stands for every extension of `v_p` to `Q(√D)`, so inside
//! `min[...]` it contributes both branches when `p` splits. A `vp:p` member of
//! a minimum whose other members live on `Q(√D)` is read the same way: in
//! `min[vp:3|split1:7,d=2]` the `vp:3` becomes `inert:3,d=2`.

use num_bigint::BigInt;

use crate::arith::{parse_fraction, Radicand};
use crate::error::{Error, Result};
use crate::quasival::QuasiValuation;
use crate::valuation::{Branch, ExtendedValuation, ExtensionKind, PAdicValuation, Valuation};

pub fn parse_qv(text: &str) -> Result<QuasiValuation> {
    let mut p = Cursor { src: text, pos: 0 };
    let w = p.qv()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(w)
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl Cursor<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            pos: self.pos,
            message: message.into(),
        }
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(format!("expected {token:?}")))
        }
    }

    /// Longest prefix made of `allowed` characters, as text.
    fn take(&mut self, allowed: impl Fn(char) -> bool) -> &str {
        self.skip_ws();
        let start = self.pos;
        let len = self.rest().find(|c: char| !allowed(c)).unwrap_or(self.rest().len());
        self.pos += len;
        &self.src[start..self.pos]
    }

    fn integer(&mut self) -> Result<BigInt> {
        let at = {
            self.skip_ws();
            self.pos
        };
        let digits = self.take(|c| c.is_ascii_digit() || c == '-' || c == '+');
        digits.parse().map_err(|_| Error::Parse {
            pos: at,
            message: format!("expected an integer, found {digits:?}"),
        })
    }

    fn with_pos<T>(&self, at: usize, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            e @ Error::Parse { .. } => e,
            other => Error::Parse {
                pos: at,
                message: other.to_string(),
            },
        })
    }

    fn qv(&mut self) -> Result<QuasiValuation> {
        self.skip_ws();
        let at = self.pos;
        if self.eat("min[") {
            let mut members = self.vals()?;
            while self.eat("|") {
                members.extend(self.vals()?);
            }
            self.expect("]")?;
            let members = self.with_pos(at, lift_to_common_field(members))?;
            return self.with_pos(at, QuasiValuation::min_of(members));
        }
        if self.eat("nadic:") {
            let n = self.integer()?;
            return self.with_pos(at, QuasiValuation::n_adic(n));
        }
        if self.eat("scaled:") {
            let c_at = self.pos;
            let c = parse_fraction(self.take(|c| c != ','));
            let c = self.with_pos(c_at, c)?;
            self.expect(",")?;
            let inner = self.qv()?;
            return self.with_pos(at, QuasiValuation::scaled(inner, c));
        }
        let members = self.vals()?;
        self.with_pos(at, QuasiValuation::min_of(members))
    }

    /// One `val`; `ext:` may yield two.
    fn vals(&mut self) -> Result<Vec<Valuation>> {
        self.skip_ws();
        let at = self.pos;
        let tag = self.take(|c| c.is_ascii_alphanumeric()).to_owned();
        self.expect(":")?;
        let p = self.integer()?;
        let kind = match tag.as_str() {
            "vp" => {
                let v = self.with_pos(at, PAdicValuation::new(p))?;
                return Ok(vec![v.into()]);
            }
            "inert" => Some(ExtensionKind::Inert),
            "ram" | "ramified" => Some(ExtensionKind::Ramified),
            "split1" => Some(ExtensionKind::Split(Branch::First)),
            "split2" => Some(ExtensionKind::Split(Branch::Second)),
            "ext" => None,
            _ => {
                return Err(Error::Parse {
                    pos: at,
                    message: format!("unknown valuation {tag:?}"),
                })
            }
        };
        self.expect(",")?;
        self.expect("d=")?;
        let d_at = self.pos;
        let d = self.integer()?;
        let d = self.with_pos(d_at, Radicand::new(d))?;
        let ext = match kind {
            Some(kind) => vec![ExtendedValuation::new(p, d, kind)],
            None => match ExtendedValuation::all_extensions(&p, &d) {
                Ok(all) => all.into_iter().map(Ok).collect(),
                Err(e) => vec![Err(e)],
            },
        };
        ext.into_iter()
            .map(|u| self.with_pos(at, u).map(Valuation::from))
            .collect()
    }
}

fn lift_to_common_field(members: Vec<Valuation>) -> Result<Vec<Valuation>> {
    let d = members.iter().find_map(|v| match v {
        Valuation::Extended(u) => Some(u.radicand().clone()),
        Valuation::PAdic(_) => None,
    });
    let Some(d) = d else {
        return Ok(members);
    };
    let mut out = Vec::with_capacity(members.len());
    for v in members {
        match v {
            Valuation::PAdic(v) => out.extend(
                ExtendedValuation::all_extensions(v.prime(), &d)?
                    .into_iter()
                    .map(Valuation::from),
            ),
            u => out.push(u),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{integer, FieldElem};
    use crate::valuation::Value;

    #[test]
    fn display_round_trips() {
        for text in [
            "vp:2",
            "min[vp:2|vp:3]",
            "nadic:12",
            "scaled:1/2,min[split1:7,d=2|split2:7,d=2]",
            "scaled:3,nadic:6",
            "inert:5,d=2",
            "ram:2,d=-1",
            "split2:2,d=-7",
        ] {
            assert_eq!(parse_qv(text).unwrap().to_string(), text);
        }
        assert_eq!(parse_qv("ext:7,d=2").unwrap().to_string(), "min[split1:7,d=2|split2:7,d=2]");
        assert_eq!(
            parse_qv("min[vp:3|split1:7,d=2]").unwrap().to_string(),
            "min[inert:3,d=2|split1:7,d=2]"
        );
        assert_eq!(
            parse_qv("min[split1:7,d=2|vp:7]").unwrap().to_string(),
            "min[split1:7,d=2|split1:7,d=2|split2:7,d=2]"
        );
        assert_eq!(parse_qv("ramified:2,d=2").unwrap().to_string(), "ram:2,d=2");
        assert_eq!(parse_qv(" min[ vp:2 | vp:3 ] ").unwrap().to_string(), "min[vp:2|vp:3]");
    }

    #[test]
    fn evaluates() {
        let w = parse_qv("min[vp:2|vp:3]").unwrap();
        assert_eq!(w.eval(&FieldElem::Rational(integer(6))).unwrap(), Value::int(1));
    }

    #[test]
    fn rejects_bad_specs() {
        for bad in [
            "", "vp:4", "vp:x", "min[]", "min[vp:2", "nadic:1", "scaled:0,vp:2",
            "scaled:-1,vp:2", "split1:5,d=2", "inert:7,d=2", "ram:2,d=4", "foo:2",
            "vp:2 junk", "min[ram:2,d=2|inert:5,d=-1]",
        ] {
            assert!(parse_qv(bad).is_err(), "{bad:?} accepted");
        }
        assert!(matches!(parse_qv("min[vp:2|vp:9]"), Err(Error::Parse { pos: 9, .. })));
    }
}
