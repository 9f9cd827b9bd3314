#pragma once

// Generators for the four ensemble scenarios (local canonical,
// micro-canonical, grand canonical, periodic thermodynamics). Each produces
// the joint model, the ensemble-derived hypothetical distribution and the quantities
// entering the corresponding Jarzynski identity and Jensen inequality.

#include <string>
#include <utility>
#include <vector>

#include "seqmeas/quantum.hpp"

namespace seqmeas {

// One tensor factor: its families at t0 and t1 and ln G on eigenvalue tuples.
struct Subsystem {
  SpectralFamily first;
  SpectralFamily second;
  EnsembleWeight log_g;
};

struct ProductFamily {
  SpectralFamily family;
  // components[i][mu] is the outcome index of subsystem mu in joint outcome i.
  std::vector<std::vector<std::size_t>> components;
};

// Kronecker product of subsystem eigenbases; the first factor varies slowest.
ProductFamily product_family(const std::vector<const SpectralFamily*>& factors);

struct EnsembleModel {
  std::string kind;
  SpectralFamily first;
  SpectralFamily second;
  std::vector<std::vector<std::size_t>> first_components;
  std::vector<std::vector<std::size_t>> second_components;
  EnsembleState state;
  QuantumModel qm;
  HypotheticalWeights hyp;
  RMatrix log_y;          // exponent of the Jarzynski average, per (i, j)
  RMatrix energy_change;  // total (quasi-)energy change per (i, j)
  double jarzynski_lhs = 0.0;   // sum_ij P(i, j) exp(log_y(i, j))
  double j_equation_lhs = 0.0;  // prob-core J-equation with ensemble-derived q
  double jensen_lhs = 0.0;      // -sum_ij P(i, j) log_y(i, j), >= 0
  // max |log_y - ln(d q / (D p))| over pairs with P > 0
  double route_discrepancy = 0.0;
  std::vector<std::pair<std::string, double>> quantities;
};

// Generic local composition: ln Y is computed from the subsystem weights and
// their separate normalizations. Used directly for local micro-canonical or
// local grand canonical systems.
EnsembleModel local_composition(const std::vector<Subsystem>& subsystems,
                                const UnitaryEvolution& u, const std::string& kind);

struct LocalCanonicalConfig {
  std::vector<HermitianOperator> h_t0;
  std::vector<HermitianOperator> h_t1;
  std::vector<double> betas;
};

struct MicrocanonicalConfig {
  HermitianOperator h_t0;
  HermitianOperator h_t1;
  double energy = 0.0;
  double width = 1.0;
};

struct GrandCanonicalConfig {
  CMatrix h_t0;  // one-particle, modes x modes
  CMatrix h_t1;
  double beta = 1.0;
  double mu = 0.0;
};

struct PeriodicThermoConfig {
  std::vector<double> quasi_energies;
  CMatrix system_basis;  // columns |u_i(t0)>; empty means the standard basis
  HermitianOperator bath_hamiltonian;
  double theta = 1.0;  // inverse quasi-temperature, any sign
  double beta = 1.0;
};

Subsystem canonical_subsystem(const HermitianOperator& h_t0, const HermitianOperator& h_t1,
                              double beta);
Subsystem microcanonical_subsystem(const MicrocanonicalConfig& cfg);
Subsystem grand_canonical_subsystem(const GrandCanonicalConfig& cfg);

EnsembleModel local_canonical_model(const LocalCanonicalConfig& cfg, const UnitaryEvolution& u);
EnsembleModel microcanonical_model(const MicrocanonicalConfig& cfg, const UnitaryEvolution& u);
// Fock-space unitary of dimension 2^M.
EnsembleModel grand_canonical_model(const GrandCanonicalConfig& cfg, const UnitaryEvolution& u);
EnsembleModel periodic_thermo_model(const PeriodicThermoConfig& cfg, const UnitaryEvolution& u);

// Grand potential -(1/beta) ln Tr exp(beta (mu N - H)) of a free-fermion
// one-particle Hamiltonian, by the product formula over one-particle levels.
double free_fermion_grand_potential(const CMatrix& h, double beta, double mu);

struct SecondLawReport {
  std::string jensen_label;
  double jensen_lhs = 0.0;
  bool jensen_ok = false;
  // With q = p_hat: S'(p_hat) - S'(p) >= 0, reported separately.
  double entropy_gap = 0.0;
  bool entropy_gap_ok = false;
  double tolerance = 1e-12;
};

SecondLawReport second_law_report(const EnsembleModel& m, double tol = 1e-12);

// Quasi-energies of a two-level system with splitting
// omega0 driven by a circularly polarized field of frequency omega and Rabi
// frequency rabi, from diagonalizing the rotating-frame Hamiltonian. Returns
// omega/2 -+ sqrt((omega0 - omega)^2 + rabi^2)/2 in ascending order.
std::vector<double> rabi_quasi_energies(double omega0, double omega, double rabi);

}  // namespace seqmeas
