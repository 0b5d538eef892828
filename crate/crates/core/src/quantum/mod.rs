//! Truncated-Fock simulation of the driven two-qubit, three-resonator model.
//!
//! The state lives in qubit levels (left, right) times Fock levels of the left
//! drive resonator, the selected bus mode and the right drive resonator. The
//! default frame rotates resonators at the left drive tone and qubits at their
//! dressed frequencies; qubit occupations are then conserved, and each input
//! is propagated only on the states it can reach.

pub mod calibrate;
pub mod evolve;
pub mod hamiltonian;
pub mod hilbert;
pub mod sparse;
pub mod tomography;

pub use calibrate::{
    calibrate_amplitude, calibrate_amplitude_full, calibrate_controlled_phase, population_map, time_to_phase, truncation_study,
    AmplitudeCalibration, CalibrationReport, FringePoint, PopulationRow, RamseyPoint, TruncationReport,
    LEAKAGE_LIMIT,
};
pub use evolve::{evolve, evolve_observed, NORM_TOLERANCE};
pub use hamiltonian::{build_hamiltonian, DriveChannel, DrivenHamiltonian, Frame};
pub use hilbert::{BasisState, HilbertSpec, DEFAULT_DIMENSION_CAP};
pub use sparse::SparseOperator;
pub use tomography::{qpt_fidelity, ProcessReport};
