#pragma once

#include <string>

#include "faultline/core.hpp"

namespace faultline {

// Plain-text pattern format, one event per line, '#' starts a comment:
//   inject <t> <size>
//   crash <t> <machine>
//   restart <t> <machine>
//   start-alive <machine> [<machine>...]
// Without a start-alive line every machine starts alive. The machine count is
// the highest referenced index plus one (callers may raise it). Events are
// stably sorted by time, so equal-instant lines keep file order — a machine's
// own crash/restart at one instant must appear in alternation order.
//
// Throws PatternError with a line number on malformed input, broken
// alternation, or an inadmissible pattern.
AdversarialPattern parse_pattern_file(const std::string& text);

// Round-trip serialization of a pattern (12 significant digits).
std::string write_pattern_file(const AdversarialPattern& pattern);

// Convenience file wrappers.
AdversarialPattern load_pattern(const std::string& path);
void save_pattern(const AdversarialPattern& pattern, const std::string& path);

// Shared float formatting: shortest form at 12 significant digits.
std::string format_double(double v);
// The same value a 12-digit serialization round-trips to.
double round_12sig(double v);

}  // namespace faultline
