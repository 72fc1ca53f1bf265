#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "biota/attack.hpp"

namespace biota {

/// SMT-LIB2 script (QF_NIRA) equivalent to the feasibility question that
/// synthesize() answers.  Every constant is written as the exact rational of
/// the double the native code uses.
std::string emit_smtlib(const ConstraintProblem& problem);

/// Exact rational literal for a finite double, e.g. "(/ 3.0 4.0)" or "(- 2.0)".
std::string smt_real(double value);

/// Name of the integer shift variable for a zone in a slot.
std::string smt_delta_name(std::size_t slot, std::size_t zone);

struct SolverRun {
  std::string verdict;  ///< "sat", "unsat", "unknown" or "error"
  std::map<std::string, long> int_model;
  std::string output;
};

/// BIOTA_SMT_SOLVER, else z3 or cvc5 found on PATH.
std::optional<std::string> find_smt_solver();

SolverRun run_smt_solver(const std::string& solver, const std::string& script,
                         std::chrono::seconds timeout = std::chrono::seconds(60));

/// Full-length delta vector for `slot` read back from a solver model.
Eigen::VectorXi deltas_from_model(const ConstraintProblem& problem, std::size_t slot, const SolverRun& run);

}  // namespace biota
