#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "heatsg/datum.hpp"
#include "heatsg/kernel.hpp"
#include "heatsg/weights.hpp"

namespace heatsg::cli {

/// Process exit codes. Nothing else is ever returned.
enum ExitCode : int {
  kOk = 0,
  kUsage = 2,        // malformed flags, unknown names, bad parameters
  kDivergent = 3,    // the integral behind a value does not exist
  kNonMember = 4,    // weight outside D_p^W
  kNotConverged = 5  // quadrature budget exhausted or a check failed
};

/// "family:params" datum syntax, e.g. "hermite-fn:0,2", "box:-1,1",
/// "gaussian:1,0.5", "tabulated:-1/0,0/1,1/0". Throws std::invalid_argument.
InitialDatum parse_datum(std::string_view spec);

/// "gaussian:a", "power:a", "stretched-exp:c,beta", "constant:c", each with
/// an optional ";tilt:d" suffix. Throws std::invalid_argument.
WeightSpec parse_weight(std::string_view spec);

/// Comma-separated coordinates; throws std::invalid_argument.
std::vector<double> parse_list(std::string_view text);

/// Runs one command line (args excludes the program name). Reports go to
/// `out` unless --out is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace heatsg::cli
