/// Reduced Planck constant (J s), CODATA 2018.
pub const HBAR: f64 = 1.054571817e-34;
/// Boltzmann constant (J/K), exact SI definition.
pub const K_B: f64 = 1.380649e-23;
