// Modified nodal analysis: Newton-Raphson DC operating point and fixed-step
// implicit transient integration. Unknowns are node voltages plus one branch
// current per voltage source; branch currents follow the passive convention
// (a supply sourcing current reads negative).
#pragma once

#include <Eigen/Dense>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "stacksim/netlist.hpp"
#include "stacksim/stimulus.hpp"

namespace stacksim {

enum class Integrator { BackwardEuler, Trapezoidal };

struct SolverConfig {
  double abstol = 1e-12; // amperes
  double vntol = 1e-6;   // volts
  double reltol = 1e-3;
  int max_newton_iters = 100;
  double gmin = 1e-12; // siemens, diagonal loading on every node
  int gmin_steps = 10;
  Integrator integrator = Integrator::Trapezoidal;
  double dt = 0.0;
  double tstop = 0.0;
};

struct Waveform {
  std::vector<double> time;
  std::vector<std::string> names; // node voltages, then i(<source>) branch currents
  Eigen::MatrixXd samples;        // rows follow time, one column per name

  int column(const std::string& name) const;
  int row_near(double t) const;
  double value(int row, const std::string& name) const;
  double value_near(double t, const std::string& name) const;
};

struct OperatingPoint {
  std::map<std::string, double> node_voltages;
  std::map<std::string, double> source_currents; // keyed by source instance name
};

struct SingularMatrixError : std::runtime_error {
  SingularMatrixError(const std::string& msg, int idx, std::string unknown_name = {})
      : std::runtime_error(msg), index(idx), unknown(std::move(unknown_name)) {}
  int index;
  std::string unknown; // offending unknown, filled by the MNA layer
};

struct NonConvergenceError : std::runtime_error {
  NonConvergenceError(const std::string& msg, double at_time, std::vector<double> trace)
      : std::runtime_error(msg), time(at_time), residual_trace(std::move(trace)) {}
  double time; // -1 for DC
  std::vector<double> residual_trace;
};

// Dense LU with partial pivoting. Throws SingularMatrixError (index = pivot
// column) when a pivot magnitude drops below 1e-13 times the largest initial
// row maximum.
Eigen::VectorXd solve_linear(Eigen::MatrixXd a, Eigen::VectorXd b);

// Newton DC solution. `initial` seeds the iteration (nodeset), which selects
// the basin for bistable circuits. Falls back to gmin stepping, then source
// stepping. Sources evaluate at t=0.
OperatingPoint dc_operating_point(const Netlist& n, const SolverConfig& cfg,
                                  const std::map<std::string, double>* initial = nullptr);

// Fixed-step implicit integration over [0, tstop]. The first step and every
// step starting at a source/stimulus corner use backward Euler, the rest the
// configured integrator. Without `initial` the run starts from the t=0
// operating point; with it the given node voltages are taken as the t=0
// state directly (UIC-style).
Waveform transient(const Netlist& n, const SolverConfig& cfg,
                   const StimulusSchedule* stimulus = nullptr,
                   const std::map<std::string, double>* initial = nullptr);

} // namespace stacksim
