//! Independent numerical checks: finite differences, Monte Carlo and
//! Green's-function quadrature.

pub mod mc;
pub mod pde;
pub mod quadrature;
pub mod sweep;

pub use mc::{mc_barrier_price, McEstimate, McSpec, MovingBarrier};
pub use pde::{
    pde_bond_surface, pde_option_surface, pde_solve_tbvp, pde_survival_surface, FirmValueSurface,
    GridSpec, PdeSurface, Scheme, TbvpProblem,
};
pub use quadrature::{integrate, quadrature_green, Integral, QuadTolerance};
pub use sweep::{draw_credit, draw_power_binary, CreditCase, PowerBinaryCase};
