use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zq::{Modulus, ZqElement};

/// Streaming order of a state. Has no effect on its algebraic value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Order {
    Row,
    Col,
}

impl Order {
    pub fn flipped(self) -> Self {
        match self {
            Order::Row => Order::Col,
            Order::Col => Order::Row,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Order::Row => "ROW",
            Order::Col => "COL",
        })
    }
}

/// `n = v^2` elements of `Z_q`, viewed as a `v x v` matrix filled row by row.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateMatrix {
    values: Vec<u64>,
    modulus: Modulus,
    v: usize,
    order: Order,
}

impl StateMatrix {
    pub fn new(values: Vec<u64>, modulus: Modulus, order: Order) -> Result<Self> {
        let v = (values.len() as f64).sqrt().round() as usize;
        if v == 0 || v * v != values.len() {
            return Err(Error::InvalidParameter(format!(
                "state length {} is not a nonzero square",
                values.len()
            )));
        }
        if let Some(&x) = values.iter().find(|&&x| x >= modulus.value()) {
            return Err(Error::NonCanonical { value: x, q: modulus.value() });
        }
        Ok(Self { values, modulus, v, order })
    }

    pub fn from_elements(elems: &[ZqElement], order: Order) -> Result<Self> {
        let m = elems
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty state".into()))?
            .modulus();
        if let Some(e) = elems.iter().find(|e| e.modulus() != m) {
            return Err(Error::ModulusMismatch(m.value(), e.modulus().value()));
        }
        Self::new(elems.iter().map(|e| e.value()).collect(), m, order)
    }

    pub fn zeros(v: usize, modulus: Modulus) -> Self {
        Self { values: vec![0; v * v], modulus, v, order: Order::Row }
    }

    pub fn identity(v: usize, modulus: Modulus) -> Self {
        let values = (0..v * v).map(|i| (i / v == i % v) as u64).collect();
        Self { values, modulus, v, order: Order::Row }
    }

    pub(crate) fn with_values(&self, values: Vec<u64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self { values, ..self.clone() }
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<u64> {
        self.values
    }

    pub fn elements(&self) -> Vec<ZqElement> {
        self.values.iter().map(|&x| self.modulus.element(x).expect("canonical")).collect()
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn set_order(&mut self, order: Order) {
        self.order = order;
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.values[r * self.v + c]
    }

    pub fn row(&self, r: usize) -> Vec<u64> {
        self.values[r * self.v..(r + 1) * self.v].to_vec()
    }

    pub fn column(&self, c: usize) -> Vec<u64> {
        (0..self.v).map(|r| self.get(r, c)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.v).map(|r| self.row(r)).collect()
    }

    /// Matrix transpose; the order tag is kept.
    pub fn transpose(&self) -> Self {
        let v = self.v;
        let values = (0..v * v).map(|i| self.get(i % v, i / v)).collect();
        self.with_values(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_view_is_row_major() {
        let q = Modulus::new(17).unwrap();
        let s = StateMatrix::new((0..16).collect(), q, Order::Row).unwrap();
        assert_eq!(s.get(1, 2), 6);
        assert_eq!(s.row(3), vec![12, 13, 14, 15]);
        assert_eq!(s.column(1), vec![1, 5, 9, 13]);
        assert_eq!(s.transpose().get(2, 1), 6);
        assert_eq!(s.transpose().transpose(), s);
    }

    #[test]
    fn construction_checks() {
        let q = Modulus::new(17).unwrap();
        assert!(StateMatrix::new(vec![0; 15], q, Order::Row).is_err());
        assert!(StateMatrix::new(vec![], q, Order::Row).is_err());
        assert!(StateMatrix::new(vec![17; 4], q, Order::Row).is_err());
        let other = Modulus::new(19).unwrap();
        let mixed = [q.element(1).unwrap(), other.element(1).unwrap()];
        assert!(StateMatrix::from_elements(&mixed, Order::Row).is_err());
    }

    #[test]
    fn order_flip() {
        assert_eq!(Order::Row.flipped(), Order::Col);
        assert_eq!(Order::Col.flipped().flipped(), Order::Col);
    }
}
