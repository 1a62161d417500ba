//! CODATA 2018 exact values and a few derived scales.

/// Planck constant, J·s.
pub const H: f64 = 6.626_070_15e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Elementary charge, C.
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// One ångström, m.
pub const ANGSTROM: f64 = 1e-10;
/// Dipole moment of one elementary charge across one ångström, C·m.
pub const E_ANGSTROM: f64 = E_CHARGE * ANGSTROM;
/// Relative permittivity of silicon at millikelvin temperatures.
pub const EPS_R_SILICON: f64 = 11.9;
