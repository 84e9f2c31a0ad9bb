#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vexlab/counterexample.hpp"
#include "vexlab/exponent.hpp"
#include "vexlab/geometry.hpp"
#include "vexlab/report.hpp"

namespace vexlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInvalid = 2;

inline constexpr const char* kVersion = "1.0.0";

// Resolution list: "5", "4,5,6" or "4-6".
std::vector<int> parse_levels(const std::string& text);

// Exponent generators: constant[:v], step[:v:jump], radial-LH[:lo:hi], csv:path.
// The counterexample generators need their own geometry; see ExperimentSetup.
ExponentField make_exponent(const std::string& spec, const GridDomain& dom);

struct ExperimentSetup {
  GridDomain dom;
  ExponentField p;
  std::optional<CounterexampleGeometry> ce;  // set for counterexample-* exponents
};

// Domain and exponent for one resolution. counterexample-boundary and
// counterexample-interior use the counterexample geometry (its default domain
// unless the config names one).
ExperimentSetup make_setup(const RunConfig& cfg, int L);

// Runs one subcommand with a parsed configuration; writes reports into cfg["out"].
int run(const std::string& subcommand, const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Full command line: parses flags (and an optional --config file), then calls run.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vexlab
