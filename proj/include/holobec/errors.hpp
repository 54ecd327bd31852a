#pragma once

#include <stdexcept>
#include <string>

namespace holobec {

/// Connection formulas exist only for a single level or an adjacent pair.
class UnsupportedSubspace : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class OpenLoop : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonRectangularLoop : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A vanishing energy denominator in the generator series.
class DegenerateHamiltonian : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Initial and final states are not parallel, so no cyclic phase exists.
class NonCyclicEvolution : public std::runtime_error {
 public:
  NonCyclicEvolution(const std::string& what, double overlap) : std::runtime_error(what), overlap_(overlap) {}
  double overlap() const noexcept { return overlap_; }

 private:
  double overlap_;
};

/// Population escaped the followed degenerate subspace.
class SubspaceLeakage : public std::runtime_error {
 public:
  SubspaceLeakage(const std::string& what, double leakage) : std::runtime_error(what), leakage_(leakage) {}
  double leakage() const noexcept { return leakage_; }

 private:
  double leakage_;
};

}  // namespace holobec
