//! Minimal NPY v1.0 codec: little-endian `f4`, `f8` and `i8`, C order only.
//!
//! Headers are written byte-for-byte the way numpy writes them (sorted keys,
//! growth padding, 64-byte alignment), so arrays saved by numpy round-trip to
//! identical bytes.

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 6] = b"\x93NUMPY";
const ALIGN: usize = 64;
const GROWTH_AXIS_MAX_DIGITS: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F4,
    F8,
    I8,
}

impl Dtype {
    pub fn descr(self) -> &'static str {
        match self {
            Dtype::F4 => "<f4",
            Dtype::F8 => "<f8",
            Dtype::I8 => "<i8",
        }
    }

    pub fn size(self) -> usize {
        match self {
            Dtype::F4 => 4,
            Dtype::F8 | Dtype::I8 => 8,
        }
    }

    fn parse(descr: &str) -> Result<Self> {
        match descr {
            "<f4" => Ok(Dtype::F4),
            "<f8" => Ok(Dtype::F8),
            "<i8" => Ok(Dtype::I8),
            other => Err(Error::Npy(format!("unsupported dtype '{other}' (expected <f4, <f8 or <i8)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NpyData {
    F4(Vec<f32>),
    F8(Vec<f64>),
    I8(Vec<i64>),
}

impl NpyData {
    fn len(&self) -> usize {
        match self {
            NpyData::F4(v) => v.len(),
            NpyData::F8(v) => v.len(),
            NpyData::I8(v) => v.len(),
        }
    }
}

/// An in-memory NPY array.
#[derive(Debug, Clone, PartialEq)]
pub struct NpyArray {
    shape: Vec<usize>,
    data: NpyData,
}

impl NpyArray {
    pub fn new(shape: Vec<usize>, data: NpyData) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(Error::Npy(format!("shape {shape:?} needs {expected} values, got {}", data.len())));
        }
        Ok(Self { shape, data })
    }

    pub fn f4(shape: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        Self::new(shape, NpyData::F4(data))
    }

    pub fn f8(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        Self::new(shape, NpyData::F8(data))
    }

    pub fn i8(shape: Vec<usize>, data: Vec<i64>) -> Result<Self> {
        Self::new(shape, NpyData::I8(data))
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &NpyData {
        &self.data
    }

    pub fn dtype(&self) -> Dtype {
        match self.data {
            NpyData::F4(_) => Dtype::F4,
            NpyData::F8(_) => Dtype::F8,
            NpyData::I8(_) => Dtype::I8,
        }
    }

    /// Float payload widened to `f64`. Integer arrays are rejected.
    pub fn to_f64(&self) -> Result<Vec<f64>> {
        match &self.data {
            NpyData::F4(v) => Ok(v.iter().map(|&x| f64::from(x)).collect()),
            NpyData::F8(v) => Ok(v.clone()),
            NpyData::I8(_) => Err(Error::Npy("expected a floating-point array, found <i8".into())),
        }
    }
}

fn shape_repr(shape: &[usize]) -> String {
    match shape {
        [] => "()".into(),
        [n] => format!("({n},)"),
        _ => format!("({})", shape.iter().map(usize::to_string).collect::<Vec<_>>().join(", ")),
    }
}

fn header(dtype: Dtype, shape: &[usize]) -> Vec<u8> {
    let mut dict =
        format!("{{'descr': '{}', 'fortran_order': False, 'shape': {}, }}", dtype.descr(), shape_repr(shape));
    if let Some(first) = shape.first() {
        let digits = first.to_string().len();
        dict.push_str(&" ".repeat(GROWTH_AXIS_MAX_DIGITS.saturating_sub(digits)));
    }
    let hlen = dict.len() + 1;
    let pad = ALIGN - (MAGIC.len() + 2 + 2 + hlen) % ALIGN;

    let mut out = Vec::with_capacity(10 + hlen + pad);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&((hlen + pad) as u16).to_le_bytes());
    out.extend_from_slice(dict.as_bytes());
    out.extend(std::iter::repeat_n(b' ', pad));
    out.push(b'\n');
    out
}

pub fn write_npy(array: &NpyArray) -> Vec<u8> {
    let mut out = header(array.dtype(), &array.shape);
    out.reserve(array.data.len() * array.dtype().size());
    match &array.data {
        NpyData::F4(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        NpyData::F8(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        NpyData::I8(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
    }
    out
}

pub fn read_npy(bytes: &[u8]) -> Result<NpyArray> {
    if bytes.len() < 10 || &bytes[..6] != MAGIC {
        return Err(Error::Npy("bad magic string".into()));
    }
    if bytes[6..8] != [1, 0] {
        return Err(Error::Npy(format!("unsupported format version {}.{}", bytes[6], bytes[7])));
    }
    let hlen = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let body = bytes.get(10..10 + hlen).ok_or_else(|| Error::Npy("truncated header".into()))?;
    let text = std::str::from_utf8(body).map_err(|_| Error::Npy("header is not ASCII".into()))?;
    let dict = HeaderDict::parse(text)?;
    if dict.fortran_order {
        return Err(Error::Npy("Fortran-order arrays are not supported (order must be C)".into()));
    }
    let dtype = Dtype::parse(&dict.descr)?;

    let count = dict
        .shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Npy("shape overflows".into()))?;
    let payload = &bytes[10 + hlen..];
    let expected = count * dtype.size();
    if payload.len() < expected {
        return Err(Error::Npy(format!("truncated payload: expected {expected} bytes, found {}", payload.len())));
    }
    if payload.len() > expected {
        return Err(Error::Npy(format!("{} trailing bytes after payload", payload.len() - expected)));
    }

    let data = match dtype {
        Dtype::F4 => NpyData::F4(payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect()),
        Dtype::F8 => NpyData::F8(payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect()),
        Dtype::I8 => NpyData::I8(payload.chunks_exact(8).map(|c| i64::from_le_bytes(c.try_into().unwrap())).collect()),
    };
    NpyArray::new(dict.shape, data)
}

struct HeaderDict {
    descr: String,
    fortran_order: bool,
    shape: Vec<usize>,
}

enum Value {
    Str(String),
    Bool(bool),
    Tuple(Vec<usize>),
}

/// Parser for the Python dict literal in an NPY header.
struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, what: &str) -> Error {
        Error::Npy(format!("malformed header at byte {}: {what}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn string(&mut self) -> Result<String> {
        let quote = self.peek().filter(|&q| q == b'\'' || q == b'"').ok_or_else(|| self.err("expected string"))?;
        self.pos += 1;
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos] != quote {
            self.pos += 1;
        }
        if self.pos == self.s.len() {
            return Err(self.err("unterminated string"));
        }
        let out = String::from_utf8_lossy(&self.s[start..self.pos]).into_owned();
        self.pos += 1;
        Ok(out)
    }

    fn integer(&mut self) -> Result<usize> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let digits = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        let value = digits.parse().map_err(|_| self.err("expected non-negative integer"))?;
        // Python 2 long suffix
        if self.s.get(self.pos) == Some(&b'L') {
            self.pos += 1;
        }
        Ok(value)
    }

    fn value(&mut self) -> Result<Value> {
        match self.peek() {
            Some(b'\'' | b'"') => self.string().map(Value::Str),
            Some(b'(') => {
                self.pos += 1;
                let mut dims = Vec::new();
                while !self.eat(b')') {
                    dims.push(self.integer()?);
                    if !self.eat(b',') {
                        self.expect(b')')?;
                        break;
                    }
                }
                Ok(Value::Tuple(dims))
            }
            _ => {
                let rest = &self.s[self.pos..];
                if rest.starts_with(b"True") {
                    self.pos += 4;
                    Ok(Value::Bool(true))
                } else if rest.starts_with(b"False") {
                    self.pos += 5;
                    Ok(Value::Bool(false))
                } else {
                    Err(self.err("unsupported value"))
                }
            }
        }
    }
}

impl HeaderDict {
    fn parse(text: &str) -> Result<Self> {
        let mut cur = Cursor { s: text.as_bytes(), pos: 0 };
        let (mut descr, mut fortran_order, mut shape) = (None, None, None);
        cur.expect(b'{')?;
        while !cur.eat(b'}') {
            let key = cur.string()?;
            cur.expect(b':')?;
            let value = cur.value()?;
            match (key.as_str(), value) {
                ("descr", Value::Str(s)) => descr = Some(s),
                ("fortran_order", Value::Bool(b)) => fortran_order = Some(b),
                ("shape", Value::Tuple(t)) => shape = Some(t),
                (k, _) => return Err(Error::Npy(format!("unexpected header key or value type for '{k}'"))),
            }
            if !cur.eat(b',') {
                cur.expect(b'}')?;
                break;
            }
        }
        cur.skip_ws();
        if cur.pos != cur.s.len() {
            return Err(cur.err("trailing characters after dict"));
        }
        let missing = |k: &str| Error::Npy(format!("header is missing '{k}'"));
        Ok(Self {
            descr: descr.ok_or_else(|| missing("descr"))?,
            fortran_order: fortran_order.ok_or_else(|| missing("fortran_order"))?,
            shape: shape.ok_or_else(|| missing("shape"))?,
        })
    }
}
