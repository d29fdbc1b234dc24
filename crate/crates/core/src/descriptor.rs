//! Text forms: the space-descriptor grammar and vector literals.
//!
//! ```text
//! space    := tsirelson | lp(p=R) | lpn(p=R,n=I) | convex(space,p=R)
//!           | dsum(outer=space, inner=space, dims=dimspec)
//!           | wtrig(lambda=R,dim=I) | rot(a=R,dim=I)
//!           | dkk(base=space, s=space, sigma=I,I,...)
//! dimspec  := fgh(I) | id | const(I) | I,I,...
//! ```
//!
//! Keywords are case-insensitive and whitespace is ignored between tokens.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::Value;

use crate::dkk::{DkkSpec, OrderedPartition};
use crate::error::{Error, Result};
use crate::finvec::{FinVec, Rational};
use crate::hierarchy::GrowthFunction;
use crate::spaces::SpaceHandle;

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn found(&self) -> String {
        match self.rest().chars().next() {
            None => "end of input".into(),
            Some(_) => {
                let snippet: String = self.rest().chars().take(12).collect();
                format!("'{snippet}'")
            }
        }
    }

    fn fail<T>(&self, expected: &str) -> Result<T> {
        Err(Error::Parse {
            position: self.pos,
            expected: expected.to_string(),
            found: self.found(),
        })
    }

    fn peek_keyword(&mut self, word: &str) -> bool {
        self.skip_ws();
        let rest = self.rest();
        rest.len() >= word.len()
            && rest.is_char_boundary(word.len())
            && rest[..word.len()].eq_ignore_ascii_case(word)
            && !rest[word.len()..].starts_with(|c: char| c.is_ascii_alphanumeric() || c == '_')
    }

    fn keyword(&mut self, word: &str) -> Result<()> {
        if self.peek_keyword(word) {
            self.pos += word.len();
            Ok(())
        } else {
            self.fail(&format!("'{word}'"))
        }
    }

    fn symbol(&mut self, c: char) -> Result<()> {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(&format!("'{c}'"))
        }
    }

    fn peek_symbol(&mut self, c: char) -> bool {
        self.skip_ws();
        self.rest().starts_with(c)
    }

    /// `key =`
    fn key(&mut self, word: &str) -> Result<()> {
        self.keyword(word)?;
        self.symbol('=')
    }

    fn real(&mut self) -> Result<f64> {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
            .unwrap_or(self.rest().len());
        match self.rest()[..len].parse::<f64>() {
            Ok(x) if x.is_finite() => {
                self.pos += len;
                Ok(x)
            }
            _ => self.fail("a real number"),
        }
    }

    fn integer(&mut self) -> Result<u64> {
        self.skip_ws();
        let len = self.rest().find(|c: char| !c.is_ascii_digit()).unwrap_or(self.rest().len());
        match self.rest()[..len].parse::<u64>() {
            Ok(x) => {
                self.pos += len;
                Ok(x)
            }
            Err(_) => self.fail("an integer"),
        }
    }

    fn size(&mut self) -> Result<usize> {
        let start = self.pos;
        let v = self.integer()?;
        usize::try_from(v).map_err(|_| Error::Parse {
            position: start,
            expected: "an integer that fits in usize".into(),
            found: v.to_string(),
        })
    }

    fn int_list(&mut self) -> Result<Vec<u64>> {
        let mut out = vec![self.integer()?];
        while self.peek_symbol(',') {
            self.pos += 1;
            out.push(self.integer()?);
        }
        Ok(out)
    }

    fn semantic<T>(&self, start: usize, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            Error::InvalidParameter(msg) => Error::InvalidParameter(format!("at position {start}: {msg}")),
            other => other,
        })
    }

    fn space(&mut self) -> Result<SpaceHandle> {
        self.skip_ws();
        let start = self.pos;
        if self.peek_keyword("tsirelson") {
            self.keyword("tsirelson")?;
            return Ok(SpaceHandle::Tsirelson);
        }
        if self.peek_keyword("lpn") {
            self.keyword("lpn")?;
            self.symbol('(')?;
            self.key("p")?;
            let p = self.real()?;
            self.symbol(',')?;
            self.key("n")?;
            let n = self.size()?;
            self.symbol(')')?;
            return self.semantic(start, SpaceHandle::finite_lp(p, n));
        }
        if self.peek_keyword("lp") {
            self.keyword("lp")?;
            self.symbol('(')?;
            self.key("p")?;
            let p = self.real()?;
            self.symbol(')')?;
            return self.semantic(start, SpaceHandle::lp(p));
        }
        if self.peek_keyword("convex") {
            self.keyword("convex")?;
            self.symbol('(')?;
            let inner = self.space()?;
            self.symbol(',')?;
            self.key("p")?;
            let p = self.real()?;
            self.symbol(')')?;
            return self.semantic(start, SpaceHandle::convexify(inner, p));
        }
        if self.peek_keyword("dsum") {
            self.keyword("dsum")?;
            self.symbol('(')?;
            self.key("outer")?;
            let outer = self.space()?;
            self.symbol(',')?;
            self.key("inner")?;
            let inner = self.space()?;
            self.symbol(',')?;
            self.key("dims")?;
            let dims = self.dimspec()?;
            self.symbol(')')?;
            let space = SpaceHandle::direct_sum(outer, inner, dims);
            self.semantic(start, space.validate())?;
            return Ok(space);
        }
        if self.peek_keyword("wtrig") {
            self.keyword("wtrig")?;
            self.symbol('(')?;
            self.key("lambda")?;
            let lambda = self.real()?;
            self.symbol(',')?;
            self.key("dim")?;
            let dim = self.size()?;
            self.symbol(')')?;
            return self.semantic(start, SpaceHandle::weighted_trig(lambda, dim));
        }
        if self.peek_keyword("rot") {
            self.keyword("rot")?;
            self.symbol('(')?;
            self.key("a")?;
            let a = self.real()?;
            self.symbol(',')?;
            self.key("dim")?;
            let dim = self.size()?;
            self.symbol(')')?;
            return self.semantic(start, SpaceHandle::rotated(a, dim));
        }
        if self.peek_keyword("dkk") {
            self.keyword("dkk")?;
            self.symbol('(')?;
            self.key("base")?;
            let base = self.space()?;
            self.symbol(',')?;
            self.key("s")?;
            let s = self.space()?;
            self.symbol(',')?;
            self.key("sigma")?;
            let lengths = self.int_list()?.into_iter().map(|l| l as usize).collect();
            self.symbol(')')?;
            let sigma = self.semantic(start, OrderedPartition::from_lengths(lengths))?;
            let spec = self.semantic(start, DkkSpec::new(base, s, sigma))?;
            return Ok(SpaceHandle::dkk(spec));
        }
        self.fail("one of tsirelson, lp, lpn, convex, dsum, wtrig, rot, dkk")
    }

    fn dimspec(&mut self) -> Result<GrowthFunction> {
        if self.peek_keyword("fgh") {
            self.keyword("fgh")?;
            self.symbol('(')?;
            let start = self.pos;
            let n = self.integer()?;
            let n = u32::try_from(n).map_err(|_| Error::Parse {
                position: start,
                expected: "a small hierarchy level".into(),
                found: n.to_string(),
            })?;
            self.symbol(')')?;
            return Ok(GrowthFunction::Fgh(n));
        }
        if self.peek_keyword("id") {
            self.keyword("id")?;
            return Ok(GrowthFunction::Identity);
        }
        if self.peek_keyword("const") {
            self.keyword("const")?;
            self.symbol('(')?;
            let c = self.integer()?;
            self.symbol(')')?;
            return Ok(GrowthFunction::Const(c));
        }
        self.skip_ws();
        if self.rest().starts_with(|c: char| c.is_ascii_digit()) {
            return Ok(GrowthFunction::Explicit(self.int_list()?));
        }
        self.fail("one of fgh(n), id, const(c), or an integer list")
    }
}

pub fn parse_space_descriptor(text: &str) -> Result<SpaceHandle> {
    let mut p = Parser::new(text);
    let space = p.space()?;
    p.skip_ws();
    if !p.rest().is_empty() {
        return p.fail("end of input");
    }
    Ok(space)
}

/// Exact value of a decimal, fraction or integer literal.
/// A `dimspec` on its own, e.g. `fgh(2)` or `1,2,4`.
pub fn parse_growth_function(text: &str) -> Result<GrowthFunction> {
    let mut p = Parser::new(text);
    let phi = p.dimspec()?;
    p.skip_ws();
    if !p.rest().is_empty() {
        return p.fail("end of input");
    }
    Ok(phi)
}

pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::Parse {
        position: 0,
        expected: "an integer, fraction a/b or decimal".into(),
        found: format!("'{t}'"),
    };
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() || !(whole.chars().chain(frac.chars())).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let n: BigInt = format!("{whole}{frac}").parse().map_err(|_| bad())?;
    let shift = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut q = Rational::from_integer(n);
    if shift >= 0 {
        q *= Rational::from_integer(num_traits::pow(ten, shift as usize));
    } else {
        q /= Rational::from_integer(num_traits::pow(ten, (-shift) as usize));
    }
    Ok(if neg { -q } else { q })
}

fn json_scalar(v: &Value) -> Result<Rational> {
    match v {
        Value::Number(n) => parse_rational(&n.to_string()),
        Value::String(s) => parse_rational(s),
        other => Err(Error::Parse {
            position: 0,
            expected: "a number or a numeric string".into(),
            found: other.to_string(),
        }),
    }
}

fn json_index(v: &Value) -> Result<usize> {
    v.as_u64().filter(|i| *i >= 1).map(|i| i as usize).ok_or_else(|| Error::Parse {
        position: 0,
        expected: "a positive index".into(),
        found: v.to_string(),
    })
}

/// Vector literal: a JSON list of `[index, numerator, denominator]` triples, a
/// dense JSON array, or a dense CSV row. Dense entries start at index 1.
pub fn parse_vector(text: &str) -> Result<FinVec<Rational>> {
    let t = text.trim();
    if t.starts_with('[') {
        let value: Value = serde_json::from_str(t).map_err(|e| Error::Parse {
            position: e.column().saturating_sub(1),
            expected: "a JSON array".into(),
            found: e.to_string(),
        })?;
        let items = value.as_array().expect("leading bracket");
        if !items.is_empty() && items.iter().all(Value::is_array) {
            let mut entries = Vec::with_capacity(items.len());
            for item in items {
                let triple = item.as_array().expect("checked");
                if triple.len() != 3 {
                    return Err(Error::Parse {
                        position: 0,
                        expected: "[index, numerator, denominator]".into(),
                        found: item.to_string(),
                    });
                }
                let den = json_scalar(&triple[2])?;
                if den.is_zero() {
                    return Err(Error::param("zero denominator"));
                }
                entries.push((json_index(&triple[0])?, json_scalar(&triple[1])? / den));
            }
            return FinVec::from_entries(entries);
        }
        let dense = items.iter().map(json_scalar).collect::<Result<Vec<_>>>()?;
        return Ok(FinVec::from_dense(&dense));
    }
    if t.is_empty() {
        return Ok(FinVec::zero());
    }
    let dense = t.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
    Ok(FinVec::from_dense(&dense))
}

/// Index sets as JSON integer arrays.
pub fn parse_index_set(text: &str) -> Result<Vec<usize>> {
    let value: Value = serde_json::from_str(text.trim()).map_err(|e| Error::Parse {
        position: e.column().saturating_sub(1),
        expected: "a JSON integer array".into(),
        found: e.to_string(),
    })?;
    let items = value.as_array().ok_or_else(|| Error::Parse {
        position: 0,
        expected: "a JSON integer array".into(),
        found: value.to_string(),
    })?;
    let mut out = items.iter().map(json_index).collect::<Result<Vec<_>>>()?;
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Inverse of [`parse_vector`] in triple form.
pub fn format_vector(f: &FinVec<Rational>) -> String {
    let parts: Vec<String> = f
        .iter()
        .map(|(i, q)| {
            let d = if q.denom().is_one() { "1".to_string() } else { q.denom().to_string() };
            format!("[{i},{},{d}]", q.numer())
        })
        .collect();
    format!("[{}]", parts.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finvec::{int, rat};
    use proptest::prelude::*;

    #[test]
    fn growth_function_forms() {
        assert_eq!(parse_growth_function("FGH( 2 )").unwrap(), GrowthFunction::Fgh(2));
        assert_eq!(parse_growth_function("1, 2,4").unwrap(), GrowthFunction::Explicit(vec![1, 2, 4]));
        assert!(parse_growth_function("id x").is_err());
    }

    #[test]
    fn grammar_examples() {
        assert_eq!(parse_space_descriptor("tsirelson").unwrap(), SpaceHandle::Tsirelson);
        assert_eq!(
            parse_space_descriptor("convex(tsirelson,p=2)").unwrap(),
            SpaceHandle::convexify(SpaceHandle::Tsirelson, 2.0).unwrap()
        );
        let d = parse_space_descriptor("dsum(outer=tsirelson, inner=lp(p=1), dims=fgh(1))").unwrap();
        match &d {
            SpaceHandle::DirectSum { dims, .. } => assert_eq!(dims.eval_usize(3).unwrap(), 6),
            other => panic!("{other:?}"),
        }
        assert_eq!(parse_space_descriptor("  TSIRELSON ").unwrap(), SpaceHandle::Tsirelson);
        assert_eq!(parse_space_descriptor("LpN( p = 3 , n = 4 )").unwrap(), SpaceHandle::finite_lp(3.0, 4).unwrap());
        let k = parse_space_descriptor("dkk(base=rot(a=0.5,dim=5), s=lp(p=2), sigma=1,2,4)").unwrap();
        assert!(matches!(k, SpaceHandle::Dkk(_)));
        let e = parse_space_descriptor("dsum(outer=lp(p=1), inner=lp(p=2), dims=3,1,4)").unwrap();
        assert_eq!(e.to_string(), "dsum(outer=lp(p=1), inner=lp(p=2), dims=3,1,4)");
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_space_descriptor("convex(tsirelson p=2)") {
            Err(Error::Parse { position, expected, .. }) => {
                assert_eq!(position, 17);
                assert!(expected.contains(','));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_space_descriptor("lp(p=2) junk"), Err(Error::Parse { position: 8, .. })));
        assert!(matches!(parse_space_descriptor("lpx(p=2)"), Err(Error::Parse { position: 0, .. })));
        assert!(matches!(parse_space_descriptor(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn semantic_errors() {
        assert!(matches!(parse_space_descriptor("lp(p=0)"), Err(Error::InvalidParameter(_))));
        assert!(matches!(parse_space_descriptor("lp(p=-1)"), Err(Error::InvalidParameter(_))));
        assert!(matches!(parse_space_descriptor("wtrig(lambda=1,dim=3)"), Err(Error::InvalidParameter(_))));
        assert!(matches!(parse_space_descriptor("rot(a=1.5,dim=3)"), Err(Error::InvalidParameter(_))));
        assert!(parse_space_descriptor("dkk(base=tsirelson, s=tsirelson, sigma=1,2)").is_err());
    }

    #[test]
    fn vector_forms() {
        let six = FinVec::indicator(1..=6);
        assert_eq!(parse_vector("[1,1,1,1,1,1]").unwrap(), six);
        assert_eq!(parse_vector("1,1,1,1,1,1").unwrap(), six);
        let v = parse_vector("[[2,1,3],[5,-4,1]]").unwrap();
        assert_eq!(v, FinVec::from_entries([(2, rat(1, 3)), (5, int(-4))]).unwrap());
        assert_eq!(parse_vector(&format_vector(&v)).unwrap(), v);
        assert_eq!(parse_vector("0, 1/2, 0.25, -1e-1").unwrap(), FinVec::from_entries([(2, rat(1, 2)), (3, rat(1, 4)), (4, rat(-1, 10))]).unwrap());
        assert_eq!(parse_vector("[0.5, \"2/3\"]").unwrap(), FinVec::from_entries([(1, rat(1, 2)), (2, rat(2, 3))]).unwrap());
        assert!(parse_vector("[[0,1,1]]").is_err());
        assert!(parse_vector("1,x").is_err());
        assert!(parse_vector("1/0").is_err());
        assert_eq!(parse_index_set("[4, 1, 4]").unwrap(), vec![1, 4]);
    }

    fn leaf() -> impl Strategy<Value = SpaceHandle> {
        prop_oneof![
            Just(SpaceHandle::Tsirelson),
            (1u32..40).prop_map(|k| SpaceHandle::lp(k as f64 / 8.0).unwrap()),
            (1u32..40, 1usize..30).prop_map(|(k, n)| SpaceHandle::finite_lp(k as f64 / 4.0, n).unwrap()),
            (-9i32..10, 1usize..30).prop_map(|(k, d)| SpaceHandle::weighted_trig(k as f64 / 10.0, d).unwrap()),
            (1u32..10, 1usize..30).prop_map(|(k, d)| SpaceHandle::rotated(k as f64 / 10.0, d).unwrap()),
        ]
    }

    fn dims() -> impl Strategy<Value = GrowthFunction> {
        prop_oneof![
            (0u32..4).prop_map(GrowthFunction::Fgh),
            Just(GrowthFunction::Identity),
            (1u64..9).prop_map(GrowthFunction::Const),
            proptest::collection::vec(1u64..20, 1..5).prop_map(GrowthFunction::Explicit),
        ]
    }

    fn space() -> impl Strategy<Value = SpaceHandle> {
        leaf().prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (inner.clone(), 1u32..20).prop_map(|(s, k)| SpaceHandle::convexify(s, k as f64 / 4.0).unwrap()),
                (inner.clone(), inner.clone(), dims()).prop_map(|(o, i, d)| SpaceHandle::direct_sum(o, i, d)),
                (inner, 1u32..12, proptest::collection::vec(1usize..9, 1..4)).prop_map(|(b, k, l)| {
                    let spec = DkkSpec::new(b, SpaceHandle::lp(k as f64 / 3.0).unwrap(), OrderedPartition::from_lengths(l).unwrap()).unwrap();
                    SpaceHandle::dkk(spec)
                }),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_round_trips(s in space()) {
            let text = s.to_string();
            prop_assert_eq!(parse_space_descriptor(&text).unwrap(), s);
            prop_assert_eq!(parse_space_descriptor(&text.to_uppercase()).unwrap().to_string(), text);
        }

        #[test]
        fn vector_round_trips(entries in proptest::collection::btree_map(1usize..40, (-50i64..50, 1i64..20), 0..8)) {
            let f = FinVec::from_entries(entries.into_iter().filter(|(_, (n, _))| *n != 0).map(|(i, (n, d))| (i, rat(n, d)))).unwrap();
            prop_assert_eq!(parse_vector(&format_vector(&f)).unwrap(), f);
        }
    }
}
