use num_integer::Integer;

use super::classes::ClassSet;
use super::ideal::count_connecting;
use crate::error::{Error, Result};

/// `B(n)_{ij}` = number of right ideals `J ⊂ I_i` of reduced index `n` in the class of `I_j`.
pub fn brandt_matrix(classes: &ClassSet, n: u64) -> Result<Vec<Vec<u64>>> {
    let disc = classes.order().discriminant();
    if n == 0 || n.gcd(&disc) != 1 {
        return Err(Error::BadLevel(format!("n = {n} must be positive and coprime to {disc}")));
    }
    let h = classes.len();
    let order = classes.order();
    let ideals = classes.ideals();
    let weights = classes.weights();
    let mut b = vec![vec![0u64; h]; h];
    for i in 0..h {
        for j in 0..h {
            let count = count_connecting(order, &ideals[i], &ideals[j], n);
            let denom = 2 * weights[j];
            debug_assert_eq!(count % denom, 0, "unit group acts freely");
            b[i][j] = count / denom;
        }
    }
    Ok(b)
}

pub fn mat_mul(a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattices::{maximal_order, right_ideal_classes};
    use crate::qalg::QuaternionAlgebra;

    #[test]
    fn brandt_disc_eleven() {
        let o = maximal_order(&QuaternionAlgebra::definite_of_prime_discriminant(11).unwrap()).unwrap();
        let c = right_ideal_classes(&o).unwrap();
        assert_eq!(brandt_matrix(&c, 1).unwrap(), vec![vec![1, 0], vec![0, 1]]);
        let b2 = brandt_matrix(&c, 2).unwrap();
        let b3 = brandt_matrix(&c, 3).unwrap();
        for row in &b2 {
            assert_eq!(row.iter().sum::<u64>(), 3);
        }
        assert_eq!(mat_mul(&b2, &b3), brandt_matrix(&c, 6).unwrap());
        assert!(brandt_matrix(&c, 22).is_err());
    }
}
