use std::collections::VecDeque;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::ideal::{find_isomorphism, RightIdeal};
use super::order::Order;
use crate::arith;
use crate::error::{Error, Result};
use crate::qalg::QuatElement;

/// Right ideal classes of a definite order.
#[derive(Clone, Debug)]
pub struct ClassSet {
    order: Order,
    ideals: Vec<RightIdeal>,
    left_orders: Vec<Order>,
    weights: Vec<u64>,
    thetas: Vec<Vec<u64>>,
    neighbor_prime: u64,
}

const THETA_BOUND: u64 = 20;

/// Smallest prime not dividing `n`.
pub fn smallest_good_prime(n: u64) -> u64 {
    (2..).find(|&l| arith::is_prime(l) && n % l != 0).unwrap()
}

pub fn right_ideal_classes(order: &Order) -> Result<ClassSet> {
    right_ideal_classes_with_prime(order, smallest_good_prime(order.discriminant()))
}

/// Breadth-first search through `ℓ`-neighbors.
pub fn right_ideal_classes_with_prime(order: &Order, l: u64) -> Result<ClassSet> {
    if !order.algebra().is_definite() {
        return Err(Error::Indefinite("class sets are only enumerated for definite orders".into()));
    }
    if !arith::is_prime(l) || order.discriminant() % l == 0 {
        return Err(Error::BadLevel(format!("neighbor prime {l} must be a prime not dividing {}", order.discriminant())));
    }
    let alg = order.algebra().clone();
    let mut set = ClassSet {
        order: order.clone(),
        ideals: Vec::new(),
        left_orders: Vec::new(),
        weights: Vec::new(),
        thetas: Vec::new(),
        neighbor_prime: l,
    };
    let mut queue = VecDeque::new();
    let start = RightIdeal::unit(order);
    set.push(start.clone());
    queue.push_back(start);
    while let Some(ideal) = queue.pop_front() {
        for nb in ideal.neighbors(order, l) {
            if set.find(&nb).is_none() {
                set.push(nb.clone());
                queue.push_back(nb);
            }
        }
    }
    debug_assert!(alg.is_definite());
    Ok(set)
}

impl ClassSet {
    fn push(&mut self, ideal: RightIdeal) {
        let left = ideal.left_order(&self.order);
        self.weights.push(left.unit_weight());
        self.left_orders.push(left);
        self.thetas.push(ideal.theta(self.order.algebra(), THETA_BOUND));
        self.ideals.push(ideal);
    }

    /// Index of the class of `ideal` and a `b` with `ideal = b·I_index`.
    pub fn find(&self, ideal: &RightIdeal) -> Option<(usize, QuatElement)> {
        let theta = ideal.theta(self.order.algebra(), THETA_BOUND);
        self.ideals
            .iter()
            .enumerate()
            .filter(|(t, _)| self.thetas[*t] == theta)
            .find_map(|(t, rep)| find_isomorphism(&self.order, rep, ideal).map(|b| (t, b)))
    }

    pub fn class_of(&self, ideal: &RightIdeal) -> usize {
        self.find(ideal).expect("every right ideal lies in an enumerated class").0
    }

    pub fn order(&self) -> &Order {
        &self.order
    }

    pub fn ideals(&self) -> &[RightIdeal] {
        &self.ideals
    }

    pub fn left_orders(&self) -> &[Order] {
        &self.left_orders
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.ideals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ideals.is_empty()
    }

    pub fn neighbor_prime(&self) -> u64 {
        self.neighbor_prime
    }

    pub fn mass(&self) -> BigRational {
        mass(&self.weights)
    }

    pub fn to_json(&self) -> ClassSetJson {
        let q = self.order.algebra().discriminant();
        ClassSetJson {
            disc: q,
            level: self.order.level(),
            classes: self
                .ideals
                .iter()
                .zip(&self.weights)
                .map(|(i, &w)| ClassJson {
                    basis: i
                        .lattice()
                        .basis()
                        .iter()
                        .map(|r| r.iter().map(|x| x.to_string()).collect())
                        .collect(),
                    norm: i.norm().to_string(),
                    weight: w,
                })
                .collect(),
        }
    }
}

/// `Σ 1/w_i`.
pub fn mass(weights: &[u64]) -> BigRational {
    weights.iter().fold(BigRational::zero(), |acc, &w| acc + BigRational::new(1.into(), BigInt::from(w)))
}

/// `(q − 1)·Π(p + 1)/12` for an Eichler order of squarefree level coprime to `q`.
pub fn eichler_mass(q: u64, level: u64) -> BigRational {
    let mut num = BigInt::from(q - 1);
    for p in arith::prime_divisors(level) {
        num *= p + 1;
    }
    BigRational::new(num, BigInt::from(12))
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassJson {
    pub basis: Vec<Vec<String>>,
    pub norm: String,
    pub weight: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassSetJson {
    pub disc: u64,
    pub level: u64,
    pub classes: Vec<ClassJson>,
}
