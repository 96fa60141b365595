//! Encoding and decoding with an AIFV-m code.
//!
//! Encoding starts in `T_0` and after each symbol switches to `T_d`, where `d`
//! is the degree of the master node that encoded it. Decoding mirrors this by
//! taking, in the current tree, the longest prefix of the remaining bits that
//! ends on a master node.

use std::collections::HashMap;

use crate::error::{Error, Result};

use super::tree::{AifvCode, Node};

pub type Bits = Vec<bool>;

struct Codebook {
    // per tree: symbol -> (codeword, degree)
    entries: Vec<HashMap<usize, (Bits, usize)>>,
}

impl Codebook {
    fn new(code: &AifvCode) -> Self {
        let entries = code
            .trees()
            .iter()
            .map(|t| {
                t.codewords()
                    .into_iter()
                    .map(|cw| (cw.symbol, (cw.bits, cw.degree)))
                    .collect()
            })
            .collect();
        Codebook { entries }
    }
}

/// Encodes a sequence of symbol indices.
pub fn encode(code: &AifvCode, symbols: &[usize]) -> Result<Bits> {
    let book = Codebook::new(code);
    let mut out = Vec::new();
    let mut tree = 0;
    for &s in symbols {
        let (bits, degree) = book.entries[tree].get(&s).ok_or_else(|| {
            let label = code
                .symbols()
                .get(s)
                .cloned()
                .unwrap_or_else(|| format!("#{s}"));
            Error::UnknownSymbol(label)
        })?;
        out.extend_from_slice(bits);
        tree = *degree;
        if tree >= code.m() {
            return Err(Error::InvalidTree(format!(
                "degree {tree} has no matching tree"
            )));
        }
    }
    Ok(out)
}

/// Decodes exactly `count` symbols; every bit must be consumed.
pub fn decode(code: &AifvCode, bits: &[bool], count: usize) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(count);
    let mut pos = 0;
    let mut tree = 0;
    while out.len() < count {
        let root = &code.tree(tree).root;
        let mut node: &Node = root;
        let mut best: Option<(usize, usize, usize)> = None; // (consumed, symbol, degree)
        let mut consumed = 0;
        loop {
            if let Node::Master { degree, symbol, .. } = node {
                best = Some((consumed, *symbol, *degree));
            }
            let Some(&bit) = bits.get(pos + consumed) else {
                break;
            };
            match node.child(bit) {
                Some(next) => {
                    node = next;
                    consumed += 1;
                }
                None => break,
            }
        }
        let Some((len, symbol, degree)) = best else {
            return Err(Error::Decode(format!(
                "no master node of T_{tree} matches the bits at offset {pos} (symbol {})",
                out.len() + 1
            )));
        };
        out.push(symbol);
        pos += len;
        if degree >= code.m() {
            return Err(Error::Decode(format!(
                "degree {degree} has no matching tree"
            )));
        }
        tree = degree;
    }
    if pos != bits.len() {
        return Err(Error::Decode(format!(
            "{} trailing bits after {count} symbols",
            bits.len() - pos
        )));
    }
    Ok(out)
}

/// Binary container: 8-byte big-endian symbol count, 8-byte big-endian bit
/// count, then the bits packed most-significant-first and zero-padded to a
/// byte boundary.
pub fn pack_bits(bits: &[bool], symbol_count: u64) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + bits.len().div_ceil(8));
    out.extend_from_slice(&symbol_count.to_be_bytes());
    out.extend_from_slice(&(bits.len() as u64).to_be_bytes());
    for chunk in bits.chunks(8) {
        let mut byte = 0u8;
        for (i, &b) in chunk.iter().enumerate() {
            if b {
                byte |= 0x80 >> i;
            }
        }
        out.push(byte);
    }
    out
}

/// Inverse of [`pack_bits`]: returns `(bits, symbol_count)`.
pub fn unpack_bits(data: &[u8]) -> Result<(Bits, u64)> {
    if data.len() < 16 {
        return Err(Error::Decode(
            "container shorter than its 16-byte header".into(),
        ));
    }
    let count = u64::from_be_bytes(data[0..8].try_into().expect("8 bytes"));
    let nbits = u64::from_be_bytes(data[8..16].try_into().expect("8 bytes"));
    let body = &data[16..];
    let nbits = usize::try_from(nbits).map_err(|_| Error::Decode("bit count overflows".into()))?;
    if body.len() != nbits.div_ceil(8) {
        return Err(Error::Decode(format!(
            "container holds {} payload bytes, header promises {nbits} bits",
            body.len()
        )));
    }
    let bits: Bits = (0..nbits)
        .map(|i| body[i / 8] & (0x80 >> (i % 8)) != 0)
        .collect();
    if nbits % 8 != 0 {
        let last = body[body.len() - 1];
        if last & (0xffu8 >> (nbits % 8)) != 0 {
            return Err(Error::Decode("padding bits are not zero".into()));
        }
    }
    Ok((bits, count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aifv::tree::AifvTree;

    pub(crate) fn bits(s: &str) -> Bits {
        s.chars().map(|c| c == '1').collect()
    }

    /// An AIFV-3 code over {a, b, c, d} whose codewords agree with the
    /// classic example: T_0 has c ↦ 000 and b ↦ 1 (degree 2), T_2 has a at
    /// its root with degree 1, T_1 has b ↦ 010.
    fn figure_code() -> AifvCode {
        let (a, b, c, d) = (0, 1, 2, 3);
        let t0 = Node::complete(
            Node::i0(Node::complete(Node::leaf(c), Node::leaf(d))),
            Node::master(2, b, Node::i0(Node::i0(Node::leaf(a)))),
        );
        let t1 = Node::complete(
            Node::i1(Node::complete(Node::leaf(b), Node::leaf(c))),
            Node::complete(Node::leaf(a), Node::leaf(d)),
        );
        let t2 = Node::master(
            1,
            a,
            Node::i0(Node::i1(Node::complete(
                Node::leaf(b),
                Node::complete(Node::leaf(c), Node::leaf(d)),
            ))),
        );
        AifvCode::new(
            ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect(),
            vec![
                AifvTree::new(0, t0),
                AifvTree::new(1, t1),
                AifvTree::new(2, t2),
            ],
        )
        .unwrap()
    }

    #[test]
    fn figure_scenario() {
        let code = figure_code();
        let msg = [2, 1, 0, 1]; // c b a b
        let enc = encode(&code, &msg).unwrap();
        assert_eq!(enc, bits("0001010"));
        assert_eq!(decode(&code, &enc, 4).unwrap(), msg);
    }

    #[test]
    fn empty_and_single() {
        let code = figure_code();
        assert!(encode(&code, &[]).unwrap().is_empty());
        assert!(decode(&code, &[], 0).unwrap().is_empty());
        assert_eq!(encode(&code, &[2]).unwrap(), bits("000"));
    }

    #[test]
    fn wrong_counts_fail() {
        let code = figure_code();
        let enc = bits("0001010");
        assert!(matches!(decode(&code, &enc, 3), Err(Error::Decode(_))));
        assert!(matches!(decode(&code, &enc, 5), Err(Error::Decode(_))));
        assert!(matches!(encode(&code, &[7]), Err(Error::UnknownSymbol(_))));
    }

    #[test]
    fn container_round_trip() {
        let b = bits("0001010110");
        let packed = pack_bits(&b, 4);
        assert_eq!(packed.len(), 18);
        assert_eq!(&packed[16..], &[0b0001_0101, 0b1000_0000]);
        assert_eq!(unpack_bits(&packed).unwrap(), (b, 4));
        let mut dirty = packed.clone();
        dirty[17] |= 1;
        assert!(unpack_bits(&dirty).is_err());
        assert!(unpack_bits(&packed[..17]).is_err());
        assert!(unpack_bits(&packed[..10]).is_err());
    }
}
