#include "faultline/pattern_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "faultline/engine.hpp"

namespace faultline {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

double round_12sig(double v) {
  return std::strtod(format_double(v).c_str(), nullptr);
}

AdversarialPattern parse_pattern_file(const std::string& text) {
  AdversarialPattern pat;
  std::vector<int> alive_list;
  bool saw_start_alive = false;
  int max_machine = -1;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    throw PatternError("line " + std::to_string(lineno) + ": " + what);
  };

  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;

    if (word == "inject") {
      double t = 0.0, size = 0.0;
      if (!(ls >> t >> size)) fail("expected: inject <t> <size>");
      if (size <= 0.0) fail("injection size must be positive");
      if (t < 0.0) fail("event time must be nonnegative");
      pat.events.push_back(PatternEvent{PatternEventKind::Inject, t, size, -1});
    } else if (word == "crash" || word == "restart") {
      double t = 0.0;
      int machine = -1;
      if (!(ls >> t >> machine)) fail("expected: " + word + " <t> <machine>");
      if (machine < 0) fail("machine index must be nonnegative");
      if (t < 0.0) fail("event time must be nonnegative");
      max_machine = std::max(max_machine, machine);
      pat.events.push_back(PatternEvent{word == "crash" ? PatternEventKind::Crash
                                                        : PatternEventKind::Restart,
                                        t, 0.0, machine});
    } else if (word == "start-alive") {
      saw_start_alive = true;
      int machine = -1;
      while (ls >> machine) {
        if (machine < 0) fail("machine index must be nonnegative");
        max_machine = std::max(max_machine, machine);
        alive_list.push_back(machine);
      }
      if (!ls.eof()) fail("expected: start-alive <machine> [<machine>...]");
    } else {
      fail("unknown directive '" + word + "'");
    }
    std::string extra;
    if (ls >> extra) fail("trailing token '" + extra + "'");
  }

  pat.machines = std::max(1, max_machine + 1);
  if (saw_start_alive) {
    pat.start_alive.assign(static_cast<std::size_t>(pat.machines), false);
    for (int p : alive_list) pat.start_alive[static_cast<std::size_t>(p)] = true;
  }
  pat.sort_stable();

  const auto violations = validate(pat);
  if (!violations.empty()) {
    throw PatternError("inadmissible pattern: " + violations.front());
  }
  return pat;
}

std::string write_pattern_file(const AdversarialPattern& pattern) {
  std::ostringstream out;
  out << "start-alive";
  for (int p = 0; p < pattern.machines; ++p) {
    if (pattern.machine_starts_alive(p)) out << ' ' << p;
  }
  out << '\n';
  for (const auto& e : pattern.events) {
    switch (e.kind) {
      case PatternEventKind::Inject:
        out << "inject " << format_double(e.t) << ' ' << format_double(e.size) << '\n';
        break;
      case PatternEventKind::Crash:
        out << "crash " << format_double(e.t) << ' ' << e.machine << '\n';
        break;
      case PatternEventKind::Restart:
        out << "restart " << format_double(e.t) << ' ' << e.machine << '\n';
        break;
    }
  }
  return out.str();
}

AdversarialPattern load_pattern(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PatternError("cannot open pattern file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_pattern_file(buf.str());
}

void save_pattern(const AdversarialPattern& pattern, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw PatternError("cannot write pattern file: " + path);
  out << write_pattern_file(pattern);
}

}  // namespace faultline
