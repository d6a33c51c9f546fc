//! Datagram framing, all integers and floats little-endian.
//!
//! Request (525 bytes): magic, u32 sequence, u8 true label (255 unknown),
//! 64 x f64 readings. Reply (21 bytes): magic, u32 sequence, u8 digit,
//! f64 score.

use super::FEATURES;

pub const MAGIC: [u8; 8] = *b"FFPRC\0\0\x01";
pub const UNKNOWN_LABEL: u8 = 255;
pub const REQUEST_LEN: usize = 8 + 4 + 1 + 8 * FEATURES;
pub const REPLY_LEN: usize = 8 + 4 + 1 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WireError {
    Length(usize),
    Magic,
}

impl std::fmt::Display for WireError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WireError::Length(n) => write!(f, "datagram of {n} bytes"),
            WireError::Magic => f.write_str("bad magic"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Request {
    pub seq: u32,
    pub label: Option<u8>,
    pub features: [f64; FEATURES],
}

impl Request {
    pub fn encode(&self) -> [u8; REQUEST_LEN] {
        let mut b = [0u8; REQUEST_LEN];
        b[..8].copy_from_slice(&MAGIC);
        b[8..12].copy_from_slice(&self.seq.to_le_bytes());
        b[12] = self.label.unwrap_or(UNKNOWN_LABEL);
        for (i, v) in self.features.iter().enumerate() {
            b[13 + 8 * i..21 + 8 * i].copy_from_slice(&v.to_le_bytes());
        }
        b
    }

    pub fn decode(b: &[u8]) -> Result<Self, WireError> {
        if b.len() != REQUEST_LEN {
            return Err(WireError::Length(b.len()));
        }
        if b[..8] != MAGIC {
            return Err(WireError::Magic);
        }
        let mut features = [0.0; FEATURES];
        for (i, v) in features.iter_mut().enumerate() {
            *v = f64::from_le_bytes(b[13 + 8 * i..21 + 8 * i].try_into().expect("8 bytes"));
        }
        Ok(Self {
            seq: u32::from_le_bytes(b[8..12].try_into().expect("4 bytes")),
            label: (b[12] != UNKNOWN_LABEL).then_some(b[12]),
            features,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reply {
    pub seq: u32,
    pub digit: u8,
    pub score: f64,
}

impl Reply {
    pub fn encode(&self) -> [u8; REPLY_LEN] {
        let mut b = [0u8; REPLY_LEN];
        b[..8].copy_from_slice(&MAGIC);
        b[8..12].copy_from_slice(&self.seq.to_le_bytes());
        b[12] = self.digit;
        b[13..21].copy_from_slice(&self.score.to_le_bytes());
        b
    }

    pub fn decode(b: &[u8]) -> Result<Self, WireError> {
        if b.len() != REPLY_LEN {
            return Err(WireError::Length(b.len()));
        }
        if b[..8] != MAGIC {
            return Err(WireError::Magic);
        }
        Ok(Self {
            seq: u32::from_le_bytes(b[8..12].try_into().expect("4 bytes")),
            digit: b[12],
            score: f64::from_le_bytes(b[13..21].try_into().expect("8 bytes")),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_layout() {
        assert_eq!(REQUEST_LEN, 525);
        let mut features = [0.0; FEATURES];
        features[0] = 16_400.0;
        features[63] = -1.5;
        let r = Request {
            seq: 0x0102_0304,
            label: Some(2),
            features,
        };
        let b = r.encode();
        assert_eq!(&b[..8], b"FFPRC\0\0\x01");
        assert_eq!(&b[8..12], &[4, 3, 2, 1]);
        assert_eq!(b[12], 2);
        assert_eq!(&b[13..21], &16_400.0f64.to_le_bytes());
        assert_eq!(&b[517..525], &(-1.5f64).to_le_bytes());
        assert_eq!(Request::decode(&b).unwrap(), r);
    }

    #[test]
    fn unknown_label_and_errors() {
        let r = Request {
            seq: 9,
            label: None,
            features: [1.0; FEATURES],
        };
        let b = r.encode();
        assert_eq!(b[12], 255);
        assert_eq!(Request::decode(&b).unwrap().label, None);
        assert_eq!(Request::decode(&b[..524]), Err(WireError::Length(524)));
        let mut m = b;
        m[7] = 0;
        assert_eq!(Request::decode(&m), Err(WireError::Magic));
    }

    #[test]
    fn reply_round_trip() {
        let r = Reply {
            seq: 7,
            digit: 3,
            score: 0.97,
        };
        assert_eq!(Reply::decode(&r.encode()).unwrap(), r);
        assert_eq!(REPLY_LEN, 21);
    }
}
