#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mpnet/engine.hpp"

namespace mpnet::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kInvalid = 2, kLimit = 3 };

/// Exploration limit from MPNET_MAX_STATES, else 1,000,000.
std::size_t default_max_states();

/// Completed-receive orderings: the `src` field of broker events, or the
/// whole event for events without one. One line per sequence, `1-2-3`.
std::vector<std::string> format_orderings(const engine::Orderings& o);
engine::EventProjection source_projection();

/// `mpnet <subcommand> ...`; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mpnet::cli
