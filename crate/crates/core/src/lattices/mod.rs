//! Orders, ideals, class sets and Brandt matrices in definite quaternion algebras.

pub mod brandt;
pub mod classes;
pub mod enumerate;
pub mod ideal;
pub mod lattice;
pub mod order;

pub use brandt::brandt_matrix;
pub use classes::{eichler_mass, mass, right_ideal_classes, right_ideal_classes_with_prime, ClassSet};
pub use ideal::RightIdeal;
pub use lattice::Lattice;
pub use order::{maximal_order, EichlerData, EichlerParents, LocalSplitting, Order};

/// The Eichler order of level `p` inside a maximal order.
pub fn eichler_order(maximal: &Order, p: u64) -> crate::Result<Order> {
    Ok(maximal.eichler(p)?.eichler)
}

/// `#O^×/2`.
pub fn unit_weight(order: &Order) -> u64 {
    order.unit_weight()
}
