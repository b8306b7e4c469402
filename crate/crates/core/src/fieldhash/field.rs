//! Arithmetic in the BN254 scalar field.
//!
//! Elements are kept in Montgomery form over four little-endian 64-bit limbs.
//! The canonical external encoding is 32 bytes, big-endian, value < P.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigUint;
use rand::RngCore;

use super::FieldError;

/// The field modulus, little-endian limbs.
const MODULUS: [u64; 4] = [
    0x43e1f593f0000001,
    0x2833e84879b97091,
    0xb85045b68181585d,
    0x30644e72e131a029,
];

/// R^2 mod P, R = 2^256.
const R2: [u64; 4] = [
    0x1bb8e645ae216da7,
    0x53fe3ab1e35c59e3,
    0x8c49833d53bb8085,
    0x0216d0b17f4e44a5,
];

/// R mod P (Montgomery form of one).
const R1: [u64; 4] = [
    0xac96341c4ffffffb,
    0x36fc76959f60cd29,
    0x666ea36f7879462e,
    0x0e0a77c19a07df2f,
];

/// -P^{-1} mod 2^64.
const INV: u64 = 0xc2e1f593efffffff;

/// Big-endian hex of the modulus, as recorded in the constants file.
pub const MODULUS_HEX: &str = "0x30644e72e131a029b85045b68181585d2833e84879b9709143e1f593f0000001";

#[inline(always)]
fn adc(a: u64, b: u64, carry: u64) -> (u64, u64) {
    let t = (a as u128) + (b as u128) + (carry as u128);
    (t as u64, (t >> 64) as u64)
}

#[inline(always)]
fn sbb(a: u64, b: u64, borrow: u64) -> (u64, u64) {
    let t = (a as u128).wrapping_sub((b as u128) + ((borrow >> 63) as u128));
    (t as u64, (t >> 64) as u64)
}

#[inline(always)]
fn mac(a: u64, b: u64, c: u64, carry: u64) -> (u64, u64) {
    let t = (a as u128) + (b as u128) * (c as u128) + (carry as u128);
    (t as u64, (t >> 64) as u64)
}

/// Subtracts P once if `limbs >= P`.
#[inline(always)]
fn reduce_once(limbs: [u64; 4]) -> [u64; 4] {
    let (d0, b) = sbb(limbs[0], MODULUS[0], 0);
    let (d1, b) = sbb(limbs[1], MODULUS[1], b);
    let (d2, b) = sbb(limbs[2], MODULUS[2], b);
    let (d3, b) = sbb(limbs[3], MODULUS[3], b);
    if b != 0 {
        limbs
    } else {
        [d0, d1, d2, d3]
    }
}

fn lt_modulus(limbs: &[u64; 4]) -> bool {
    for i in (0..4).rev() {
        if limbs[i] != MODULUS[i] {
            return limbs[i] < MODULUS[i];
        }
    }
    false
}

/// An element of the prime field.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FieldElement([u64; 4]);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement([0; 4]);
    pub const ONE: FieldElement = FieldElement(R1);

    pub fn from_u64(v: u64) -> Self {
        FieldElement([v, 0, 0, 0]).to_montgomery()
    }

    pub fn from_u128(v: u128) -> Self {
        FieldElement([v as u64, (v >> 64) as u64, 0, 0]).to_montgomery()
    }

    fn to_montgomery(self) -> Self {
        // Inputs below 2^256 are at most ~5P; mont_mul by R^2 reduces fully.
        FieldElement(self.0).mont_mul(&FieldElement(R2))
    }

    fn canonical_limbs(&self) -> [u64; 4] {
        self.mont_mul(&FieldElement([1, 0, 0, 0])).0
    }

    /// Decodes a canonical 32-byte big-endian encoding; rejects values >= P.
    pub fn from_bytes_be(bytes: &[u8; 32]) -> Result<Self, FieldError> {
        let limbs = limbs_from_be(bytes);
        if !lt_modulus(&limbs) {
            return Err(FieldError::NonCanonical);
        }
        Ok(FieldElement(limbs).to_montgomery())
    }

    /// Interprets up to 32 big-endian bytes as an integer and reduces it mod P.
    pub fn from_be_bytes_reduced(bytes: &[u8]) -> Self {
        assert!(bytes.len() <= 32, "at most 32 bytes");
        let mut buf = [0u8; 32];
        buf[32 - bytes.len()..].copy_from_slice(bytes);
        let mut limbs = limbs_from_be(&buf);
        // 2^256 < 6P, so a few conditional subtractions suffice.
        for _ in 0..6 {
            limbs = reduce_once(limbs);
        }
        FieldElement(limbs).to_montgomery()
    }

    pub fn to_bytes_be(&self) -> [u8; 32] {
        let limbs = self.canonical_limbs();
        let mut out = [0u8; 32];
        for (i, limb) in limbs.iter().enumerate() {
            out[32 - 8 * (i + 1)..32 - 8 * i].copy_from_slice(&limb.to_be_bytes());
        }
        out
    }

    pub fn to_hex(&self) -> String {
        format!("0x{}", hex::encode(self.to_bytes_be()))
    }

    pub fn from_hex(s: &str) -> Result<Self, FieldError> {
        let body = s.strip_prefix("0x").unwrap_or(s);
        if body.len() != 64 {
            return Err(FieldError::BadHex(s.to_string()));
        }
        let raw = hex::decode(body).map_err(|_| FieldError::BadHex(s.to_string()))?;
        let mut bytes = [0u8; 32];
        bytes.copy_from_slice(&raw);
        Self::from_bytes_be(&bytes)
    }

    pub fn to_biguint(&self) -> BigUint {
        BigUint::from_bytes_be(&self.to_bytes_be())
    }

    pub fn from_biguint(v: &BigUint) -> Self {
        let reduced = v % modulus_biguint();
        let raw = reduced.to_bytes_be();
        Self::from_be_bytes_reduced(&raw)
    }

    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut buf = [0u8; 32];
        loop {
            rng.fill_bytes(&mut buf);
            buf[0] &= 0x3f;
            if let Ok(fe) = Self::from_bytes_be(&buf) {
                return fe;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; 4]
    }

    #[inline]
    fn mont_mul(&self, rhs: &Self) -> Self {
        let a = &self.0;
        let b = &rhs.0;
        let mut t = [0u64; 6];
        for i in 0..4 {
            let mut carry = 0;
            for j in 0..4 {
                let (lo, hi) = mac(t[j], a[j], b[i], carry);
                t[j] = lo;
                carry = hi;
            }
            let (s, c) = adc(t[4], carry, 0);
            t[4] = s;
            t[5] = c;

            let m = t[0].wrapping_mul(INV);
            let (_, mut carry) = mac(t[0], m, MODULUS[0], 0);
            for j in 1..4 {
                let (lo, hi) = mac(t[j], m, MODULUS[j], carry);
                t[j - 1] = lo;
                carry = hi;
            }
            let (s, c) = adc(t[4], carry, 0);
            t[3] = s;
            t[4] = t[5] + c;
        }
        FieldElement(reduce_once([t[0], t[1], t[2], t[3]]))
    }

    pub fn square(&self) -> Self {
        self.mont_mul(self)
    }

    pub fn pow(&self, exp: &[u64; 4]) -> Self {
        let mut acc = Self::ONE;
        for limb in exp.iter().rev() {
            for bit in (0..64).rev() {
                acc = acc.square();
                if (limb >> bit) & 1 == 1 {
                    acc = acc.mont_mul(self);
                }
            }
        }
        acc
    }

    /// x^5
    #[inline]
    pub fn pow5(&self) -> Self {
        let x2 = self.square();
        let x4 = x2.square();
        x4 * *self
    }

    /// x^7
    #[inline]
    pub fn pow7(&self) -> Self {
        let x2 = self.square();
        let x4 = x2.square();
        let x6 = x4 * x2;
        x6 * *self
    }

    pub fn inverse(&self) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let (e0, _) = sbb(MODULUS[0], 2, 0);
        Ok(self.pow(&[e0, MODULUS[1], MODULUS[2], MODULUS[3]]))
    }
}

fn limbs_from_be(bytes: &[u8; 32]) -> [u64; 4] {
    let mut limbs = [0u64; 4];
    for (i, limb) in limbs.iter_mut().enumerate() {
        let mut word = [0u8; 8];
        word.copy_from_slice(&bytes[32 - 8 * (i + 1)..32 - 8 * i]);
        *limb = u64::from_be_bytes(word);
    }
    limbs
}

pub fn modulus_biguint() -> BigUint {
    BigUint::parse_bytes(&MODULUS_HEX.as_bytes()[2..], 16).expect("modulus hex")
}

impl Add for FieldElement {
    type Output = FieldElement;

    #[inline]
    fn add(self, rhs: Self) -> Self {
        let (d0, c) = adc(self.0[0], rhs.0[0], 0);
        let (d1, c) = adc(self.0[1], rhs.0[1], c);
        let (d2, c) = adc(self.0[2], rhs.0[2], c);
        let (d3, _) = adc(self.0[3], rhs.0[3], c);
        // P < 2^254, so the sum of two reduced values never overflows 256 bits.
        FieldElement(reduce_once([d0, d1, d2, d3]))
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;

    #[inline]
    fn sub(self, rhs: Self) -> Self {
        let (d0, b) = sbb(self.0[0], rhs.0[0], 0);
        let (d1, b) = sbb(self.0[1], rhs.0[1], b);
        let (d2, b) = sbb(self.0[2], rhs.0[2], b);
        let (d3, b) = sbb(self.0[3], rhs.0[3], b);
        if b == 0 {
            return FieldElement([d0, d1, d2, d3]);
        }
        let (d0, c) = adc(d0, MODULUS[0], 0);
        let (d1, c) = adc(d1, MODULUS[1], c);
        let (d2, c) = adc(d2, MODULUS[2], c);
        let (d3, _) = adc(d3, MODULUS[3], c);
        FieldElement([d0, d1, d2, d3])
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;

    fn neg(self) -> Self {
        FieldElement::ZERO - self
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;

    #[inline]
    fn mul(self, rhs: Self) -> Self {
        self.mont_mul(&rhs)
    }
}

impl Ord for FieldElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.to_bytes_be().cmp(&other.to_bytes_be())
    }
}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fe({})", self.to_hex())
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl serde::Serialize for FieldElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> serde::Deserialize<'de> for FieldElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        FieldElement::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// Free-function forms used by callers that prefer them over operators.
pub fn fe_add(a: FieldElement, b: FieldElement) -> FieldElement {
    a + b
}

pub fn fe_sub(a: FieldElement, b: FieldElement) -> FieldElement {
    a - b
}

pub fn fe_mul(a: FieldElement, b: FieldElement) -> FieldElement {
    a * b
}

pub fn fe_inv(a: FieldElement) -> Result<FieldElement, FieldError> {
    a.inverse()
}
