pub const EV_PER_HBAR_TO_AMPERE: f64 = 2.4341348e-4;
