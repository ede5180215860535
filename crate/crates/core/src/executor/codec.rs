//! Little-endian byte encoding for states crossing worker boundaries.

use super::value::{Row, Value};
use super::ExecError;

#[derive(Default)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn i64(&mut self, v: i64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn i128(&mut self, v: i128) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }

    pub fn count(&mut self, n: usize) {
        self.u64(n as u64);
    }

    pub fn str(&mut self, s: &str) {
        self.count(s.len());
        self.buf.extend_from_slice(s.as_bytes());
    }

    pub fn value(&mut self, v: &Value) {
        match v {
            Value::Int(i) => {
                self.u8(0);
                self.i64(*i);
            }
            Value::Real(r) => {
                self.u8(1);
                self.f64(*r);
            }
            Value::Text(s) => {
                self.u8(2);
                self.str(s);
            }
        }
    }

    pub fn row(&mut self, r: &[Value]) {
        self.count(r.len());
        for v in r {
            self.value(v);
        }
    }

    pub fn rows<'a>(&mut self, rows: impl ExactSizeIterator<Item = &'a Row>) {
        self.count(rows.len());
        for r in rows {
            self.row(r);
        }
    }
}

pub struct Reader<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader { buf, at: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], ExecError> {
        let end = self.at.checked_add(n).filter(|e| *e <= self.buf.len());
        let end = end.ok_or_else(|| ExecError::Codec(format!("truncated at byte {}", self.at)))?;
        let s = &self.buf[self.at..end];
        self.at = end;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8, ExecError> {
        Ok(self.take(1)?[0])
    }

    pub fn u64(&mut self) -> Result<u64, ExecError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    pub fn i64(&mut self) -> Result<i64, ExecError> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    pub fn i128(&mut self) -> Result<i128, ExecError> {
        Ok(i128::from_le_bytes(self.take(16)?.try_into().expect("16 bytes")))
    }

    pub fn f64(&mut self) -> Result<f64, ExecError> {
        Ok(f64::from_bits(self.u64()?))
    }

    pub fn count(&mut self) -> Result<usize, ExecError> {
        let n = self.u64()?;
        // a length can never exceed the bytes left to describe it
        if n > (self.buf.len() - self.at) as u64 {
            return Err(ExecError::Codec(format!("length {n} exceeds input")));
        }
        Ok(n as usize)
    }

    pub fn str(&mut self) -> Result<String, ExecError> {
        let n = self.count()?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|e| ExecError::Codec(e.to_string()))
    }

    pub fn value(&mut self) -> Result<Value, ExecError> {
        match self.u8()? {
            0 => Ok(Value::Int(self.i64()?)),
            1 => Ok(Value::Real(self.f64()?)),
            2 => Ok(Value::Text(self.str()?)),
            t => Err(ExecError::Codec(format!("unknown value tag {t}"))),
        }
    }

    pub fn row(&mut self) -> Result<Row, ExecError> {
        let n = self.count()?;
        (0..n).map(|_| self.value()).collect()
    }

    pub fn rows(&mut self) -> Result<Vec<Row>, ExecError> {
        let n = self.count()?;
        (0..n).map(|_| self.row()).collect()
    }

    pub fn finish(&self) -> Result<(), ExecError> {
        if self.at == self.buf.len() {
            Ok(())
        } else {
            Err(ExecError::Codec(format!("{} trailing bytes", self.buf.len() - self.at)))
        }
    }
}
