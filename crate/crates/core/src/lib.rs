//! Joint charging-station location and vehicle routing on a
//! resource-space-time network, solved by Lagrangian relaxation.

pub mod generate;
pub mod instance;
pub mod knapsack;
pub mod lagrangian;
pub mod lp;
pub mod multipliers;
pub mod oracle;
pub mod report;
pub mod routing;
pub mod rst;
