// faultline — deterministic simulator for online task scheduling on
// crash-prone machines, with verification harnesses for the positioning
// policies implemented in the library.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "faultline/adversary.hpp"
#include "faultline/engine.hpp"
#include "faultline/metrics.hpp"
#include "faultline/oracle.hpp"
#include "faultline/pattern_io.hpp"
#include "faultline/schedulers.hpp"

using json = nlohmann::ordered_json;

namespace fl = faultline;

namespace {

double j12(double v) { return fl::round_12sig(v); }

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::strtod(item.c_str(), nullptr));
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  for (double v : parse_list(csv)) out.push_back(static_cast<int>(v));
  return out;
}

std::vector<double> infer_sizes(const fl::AdversarialPattern& pattern) {
  std::vector<double> sizes;
  for (const auto& e : pattern.events) {
    if (e.kind != fl::PatternEventKind::Inject) continue;
    bool known = false;
    for (double s : sizes) {
      if (std::fabs(s - e.size) <= fl::kTimeTol) {
        known = true;
        break;
      }
    }
    if (!known) sizes.push_back(e.size);
  }
  std::sort(sizes.begin(), sizes.end());
  return sizes;
}

void write_text(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fl::FaultlineError("cannot write file: " + path);
  out << content;
}

// --- shared source-of-pattern options ---------------------------------------

struct SourceOpts {
  std::string pattern_file;
  std::string gen;  // "", "mlis", "phases", "random"
  int machines = 0;  // 0 = from pattern / construction
  double speedup = 0.0;  // 0 = from construction (or 1.0)
  std::string sizes_csv;
  double horizon = 0.0;  // 0 = from construction
  std::uint64_t seed = 1;
  int epochs = 100;
  double rho = 2.0;
  double lmin = 1.0;
  double crash_rate = 0.1;
  double inject_rate = 2.0;
  std::string floors_csv;
};

void add_source_opts(CLI::App* cmd, SourceOpts& o, bool need_policy_input) {
  (void)need_policy_input;
  cmd->add_option("--pattern", o.pattern_file, "pattern file to load");
  cmd->add_option("--gen", o.gen, "generate the pattern: mlis | phases | random")
      ->check(CLI::IsMember({"mlis", "phases", "random"}));
  cmd->add_option("--machines,-m", o.machines, "machine count (raises a file pattern's count)");
  cmd->add_option("--speedup,-s", o.speedup, "resource augmentation speedup (default 1)");
  cmd->add_option("--sizes", o.sizes_csv, "size ladder, comma separated (default: inferred)");
  cmd->add_option("--horizon,-H", o.horizon, "simulation horizon");
  cmd->add_option("--seed", o.seed, "generator seed");
  cmd->add_option("--epochs", o.epochs, "mlis: epoch count");
  cmd->add_option("--rho", o.rho, "mlis/phases: size ratio rho");
  cmd->add_option("--lmin", o.lmin, "mlis: smallest task size");
  cmd->add_option("--crash-rate", o.crash_rate, "random: crash/restart rate per machine");
  cmd->add_option("--inject-rate", o.inject_rate, "random: Poisson injection rate");
  cmd->add_option("--floors", o.floors_csv, "random: per-class bulk injected at t=0");
}

struct SourceResult {
  fl::AdversarialPattern pattern;
  fl::SystemConfig config;
  double horizon = 0.0;
  std::vector<fl::ScriptEntry> script;  // nonempty for mlis/phases constructions
};

SourceResult resolve_source(const SourceOpts& o) {
  SourceResult r;
  if (!o.pattern_file.empty() && !o.gen.empty()) {
    throw fl::ConfigError("--pattern and --gen are mutually exclusive");
  }
  if (o.gen == "mlis") {
    auto inst = fl::make_mlis_instance(o.rho, o.lmin, o.epochs);
    r.pattern = std::move(inst.pattern);
    r.config = inst.config;
    r.horizon = inst.horizon;
    r.script = std::move(inst.x_script);
  } else if (o.gen == "phases") {
    if (o.machines < 1) throw fl::ConfigError("--gen phases needs --machines");
    const double h = o.horizon > 0 ? o.horizon : 800.0 * o.rho;
    auto inst = fl::build_phase_instance(o.seed, o.machines, o.rho, h);
    r.pattern = std::move(inst.pattern);
    r.config = inst.config;
    r.horizon = inst.horizon;
    r.script = std::move(inst.x_script);
  } else if (o.gen == "random") {
    if (o.machines < 1) throw fl::ConfigError("--gen random needs --machines");
    if (o.sizes_csv.empty()) throw fl::ConfigError("--gen random needs --sizes");
    if (!(o.horizon > 0)) throw fl::ConfigError("--gen random needs --horizon");
    fl::RandomPatternParams p;
    p.seed = o.seed;
    p.m = o.machines;
    p.sizes = parse_list(o.sizes_csv);
    p.horizon = o.horizon;
    p.crash_rate = o.crash_rate;
    p.injection_rate = o.inject_rate;
    if (!o.floors_csv.empty()) p.class_floor = parse_int_list(o.floors_csv);
    r.pattern = fl::build_random_pattern(p);
    r.config.m = o.machines;
    r.config.sizes = p.sizes;
    r.horizon = o.horizon;
  } else if (!o.pattern_file.empty()) {
    r.pattern = fl::load_pattern(o.pattern_file);
    if (o.machines > r.pattern.machines) {
      if (!r.pattern.start_alive.empty()) {
        r.pattern.start_alive.resize(static_cast<std::size_t>(o.machines), false);
      }
      r.pattern.machines = o.machines;
    }
    r.config.m = r.pattern.machines;
    r.config.sizes = o.sizes_csv.empty() ? infer_sizes(r.pattern) : parse_list(o.sizes_csv);
    if (!(o.horizon > 0)) throw fl::ConfigError("--horizon is required with --pattern");
    r.horizon = o.horizon;
  } else {
    throw fl::ConfigError("one of --pattern or --gen is required");
  }
  if (o.gen != "mlis" && o.gen != "phases" && o.machines > 0) r.config.m = o.machines;
  r.config.s = o.speedup > 0 ? o.speedup : (r.config.s > 0 ? r.config.s : 1.0);
  if (o.speedup > 0) r.config.s = o.speedup;
  if (o.horizon > 0 && o.gen != "phases") r.horizon = o.horizon;
  r.config.validate();
  return r;
}

// --- trace / series serialization -------------------------------------------

std::string trace_csv(const fl::ExecutionTrace& trace) {
  std::ostringstream out;
  out << "t,machine,event,task,size,c_t\n";
  for (const auto& e : trace.events) {
    out << fl::format_double(e.t) << ',' << e.machine << ',' << fl::trace_event_name(e.kind)
        << ',' << e.task << ',' << fl::format_double(e.size) << ','
        << fl::format_double(e.completed_load) << '\n';
  }
  return out.str();
}

json trace_json(const fl::ExecutionTrace& trace) {
  json j;
  j["machines"] = trace.config.m;
  j["speedup"] = j12(trace.config.s);
  json sizes = json::array();
  for (double s : trace.config.sizes) sizes.push_back(j12(s));
  j["sizes"] = sizes;
  j["horizon"] = j12(trace.horizon);
  json events = json::array();
  for (const auto& e : trace.events) {
    json je;
    je["t"] = j12(e.t);
    je["event"] = fl::trace_event_name(e.kind);
    je["machine"] = e.machine;
    je["task"] = e.task;
    je["size"] = j12(e.size);
    je["c_t"] = j12(e.completed_load);
    je["queues"] = e.queue_sizes;
    events.push_back(std::move(je));
  }
  j["events"] = std::move(events);
  j["summary"] = {
      {"completed", j12(trace.completed)},
      {"distinct_completions", trace.distinct_completions},
      {"duplicates", trace.duplicate_informs},
      {"wasted_load", j12(trace.wasted_load)},
  };
  return j;
}

std::string series_csv(const fl::RatioSeries& series) {
  std::ostringstream out;
  out << "t,c_alg,c_base,ratio\n";
  for (const auto& s : series.samples) {
    out << fl::format_double(s.t) << ',' << fl::format_double(s.c_alg) << ','
        << fl::format_double(s.c_base) << ','
        << (std::isnan(s.ratio) ? std::string("nan") : fl::format_double(s.ratio)) << '\n';
  }
  return out.str();
}

json summary_json(const fl::RatioSeries& series, const fl::RedundancyReport& rep) {
  auto num = [](double v) -> json {
    if (std::isnan(v)) return nullptr;
    return j12(v);
  };
  json j;
  j["final_ratio"] = num(series.final_ratio);
  j["min_suffix_ratio"] = num(series.min_suffix_ratio);
  j["slack_estimate"] = num(series.slack_estimate);
  j["duplicates"] = rep.duplicates;
  j["lemma_violations"] = rep.lemma_violations;
  return j;
}

fl::ExecutionTrace run_policy(const SourceResult& src, const std::string& policy_id,
                              const fl::PolicyOptions& popts) {
  auto policy = fl::make_policy(policy_id, src.config, popts);
  return fl::run(src.config, src.pattern, *policy, src.horizon);
}

// --- subcommand drivers ------------------------------------------------------

int cmd_simulate(const SourceOpts& src_opts, const std::string& policy_id,
                 const fl::PolicyOptions& popts, const std::string& out,
                 const std::string& format) {
  const auto src = resolve_source(src_opts);
  const auto trace = run_policy(src, policy_id, popts);
  if (format == "json") {
    write_text(out, trace_json(trace).dump(2) + "\n");
  } else {
    write_text(out, trace_csv(trace));
  }
  const auto rep = fl::redundancy_report(trace);
  std::fprintf(stderr,
               "simulate: policy=%s completed=%s distinct=%zu duplicates=%zu wasted=%s\n",
               policy_id.c_str(), fl::format_double(trace.completed).c_str(),
               trace.distinct_completions, rep.duplicates,
               fl::format_double(rep.wasted_load).c_str());
  return rep.lemma_violations == 0 ? 0 : 1;
}

int cmd_compete(const SourceOpts& src_opts, const std::string& policy_id,
                const fl::PolicyOptions& popts, const std::string& baseline, double burn_in,
                double alpha, const std::string& out, const std::string& format) {
  const auto src = resolve_source(src_opts);
  const auto trace = run_policy(src, policy_id, popts);

  fl::LoadTrajectory base;
  if (baseline == "script" || (baseline == "auto" && !src.script.empty())) {
    if (src.script.empty()) {
      throw fl::ConfigError("--baseline script needs a constructed pattern (--gen mlis|phases)");
    }
    base = fl::scripted_x(src.script, src.pattern, src.horizon);
  } else {
    base = fl::optimal_offline(src.pattern, src.config.m, src.horizon).trajectory(src.horizon);
  }

  const auto series = fl::competitive_ratio(trace, base, src.horizon, burn_in, alpha);
  const auto rep = fl::redundancy_report(trace);
  if (format == "json") {
    json j = summary_json(series, rep);
    json samples = json::array();
    for (const auto& s : series.samples) {
      samples.push_back({{"t", j12(s.t)},
                         {"c_alg", j12(s.c_alg)},
                         {"c_base", j12(s.c_base)},
                         {"ratio", std::isnan(s.ratio) ? json(nullptr) : json(j12(s.ratio))}});
    }
    j["samples"] = std::move(samples);
    write_text(out, j.dump(2) + "\n");
  } else {
    write_text(out, series_csv(series));
  }
  std::fprintf(stderr, "compete: %s\n", summary_json(series, rep).dump().c_str());
  return rep.lemma_violations == 0 ? 0 : 1;
}

int cmd_verify_mlis(int epochs, double rho, double lmin, const std::string& out,
                    const std::string& format) {
  const auto inst = fl::make_mlis_instance(rho, lmin, epochs);
  fl::MLisPolicy policy(inst.config);
  const auto trace = fl::run(inst.config, inst.pattern, policy, inst.horizon);
  const auto alg = fl::completion_trajectory(trace);
  const auto base = fl::scripted_x(inst.x_script, inst.pattern, inst.horizon);

  bool pass = true;
  double max_alg_dev = 0.0, max_base_dev = 0.0, max_cum_ratio = 0.0;
  json epochs_json = json::array();
  for (int e = 1; e <= epochs; ++e) {
    const double t1 = e * inst.spec.epoch_length;
    const double t0 = (e - 1) * inst.spec.epoch_length;
    const double alg_epoch = alg.value_at(t1) - alg.value_at(t0);
    const double base_epoch = base.value_at(t1) - base.value_at(t0);
    const double alg_dev = std::fabs(alg_epoch - inst.mlis_epoch_load);
    const double base_dev = std::fabs(base_epoch - inst.x_epoch_load);
    const double cum_ratio = alg.value_at(t1) / base.value_at(t1);
    max_alg_dev = std::max(max_alg_dev, alg_dev);
    max_base_dev = std::max(max_base_dev, base_dev);
    max_cum_ratio = std::max(max_cum_ratio, cum_ratio);
    if (alg_dev > 1e-6 || base_dev > 1e-6 || !(cum_ratio < 0.996)) pass = false;
    epochs_json.push_back({{"epoch", e},
                           {"alg_load", j12(alg_epoch)},
                           {"base_load", j12(base_epoch)},
                           {"cum_ratio", j12(cum_ratio)}});
  }
  std::printf("verify-mlis: epochs=%d alg_epoch_load=%s (closed form %s, max dev %.3g)\n",
              epochs, fl::format_double(alg.value_at(inst.horizon) / epochs).c_str(),
              fl::format_double(inst.mlis_epoch_load).c_str(), max_alg_dev);
  std::printf("verify-mlis: base_epoch_load closed form %s, max dev %.3g\n",
              fl::format_double(inst.x_epoch_load).c_str(), max_base_dev);
  std::printf("verify-mlis: max cumulative ratio %s (must stay < 0.996)\n",
              fl::format_double(max_cum_ratio).c_str());
  std::printf("%s verify-mlis\n", pass ? "PASS" : "FAIL");
  if (!out.empty()) {
    if (format == "csv") {
      std::ostringstream csv;
      csv << "epoch,alg_load,base_load,cum_ratio\n";
      for (const auto& row : epochs_json) {
        csv << row["epoch"] << ',' << fl::format_double(row["alg_load"].get<double>()) << ','
            << fl::format_double(row["base_load"].get<double>()) << ','
            << fl::format_double(row["cum_ratio"].get<double>()) << '\n';
      }
      write_text(out, csv.str());
    } else {
      json j;
      j["pass"] = pass;
      j["epochs"] = std::move(epochs_json);
      j["max_alg_dev"] = max_alg_dev;
      j["max_base_dev"] = max_base_dev;
      j["max_cum_ratio"] = j12(max_cum_ratio);
      write_text(out, j.dump(2) + "\n");
    }
  }
  return pass ? 0 : 1;
}

int cmd_verify_preamble(int patterns, double horizon_mult, double burn_in_mult,
                        std::uint64_t seed, const std::string& out, const std::string& format) {
  const std::vector<int> ms = {1, 2, 3};
  const std::vector<double> rhos = {2.0, 2.5, 3.0};
  const int combos = static_cast<int>(ms.size() * rhos.size());
  const int reps = (patterns + combos - 1) / combos;

  bool pass = true;
  double worst_margin = 1e9;
  json rows = json::array();
  int count = 0;
  for (std::size_t mi = 0; mi < ms.size(); ++mi) {
    for (std::size_t ri = 0; ri < rhos.size(); ++ri) {
      for (int rep = 0; rep < reps; ++rep) {
        const int m = ms[mi];
        const double rho = rhos[ri];
        const std::uint64_t s =
            seed + 1000003ull * (mi * rhos.size() + ri) + static_cast<std::uint64_t>(rep);
        const auto inst = fl::build_phase_instance(s, m, rho, horizon_mult * rho);
        fl::RhoMPreamblePolicy policy(inst.config);
        const auto trace = fl::run(inst.config, inst.pattern, policy, inst.horizon);
        const auto base = fl::scripted_x(inst.x_script, inst.pattern, inst.horizon);
        const int rb = inst.config.rho_bar();
        const double bound = static_cast<double>(rb) / (rho + rb);
        const auto series =
            fl::competitive_ratio(trace, base, inst.horizon, burn_in_mult * rho, bound);
        const double margin = series.min_suffix_ratio - (bound - 0.02);
        worst_margin = std::min(worst_margin, margin);
        if (std::isnan(series.min_suffix_ratio) || margin < 0) pass = false;
        rows.push_back({{"m", m},
                        {"rho", j12(rho)},
                        {"seed", s},
                        {"min_suffix_ratio", j12(series.min_suffix_ratio)},
                        {"bound", j12(bound)},
                        {"slack_estimate", j12(series.slack_estimate)}});
        ++count;
      }
    }
  }
  std::printf("verify-preamble: %d patterns, worst margin over R-0.02: %s\n", count,
              fl::format_double(worst_margin).c_str());
  std::printf("%s verify-preamble\n", pass ? "PASS" : "FAIL");
  if (!out.empty()) {
    if (format == "csv") {
      std::ostringstream csv;
      csv << "m,rho,seed,min_suffix_ratio,bound,slack_estimate\n";
      for (const auto& row : rows) {
        csv << row["m"] << ',' << fl::format_double(row["rho"].get<double>()) << ','
            << row["seed"] << ',' << fl::format_double(row["min_suffix_ratio"].get<double>())
            << ',' << fl::format_double(row["bound"].get<double>()) << ','
            << fl::format_double(row["slack_estimate"].get<double>()) << '\n';
      }
      write_text(out, csv.str());
    } else {
      json j;
      j["pass"] = pass;
      j["patterns"] = std::move(rows);
      j["worst_margin"] = j12(worst_margin);
      write_text(out, j.dump(2) + "\n");
    }
  }
  return pass ? 0 : 1;
}

int cmd_sweep(const std::string& policy_id, const fl::PolicyOptions& popts,
              const std::string& speedups_csv, const std::string& rhos_csv, int m,
              double horizon, std::uint64_t seed, double crash_rate, double inject_rate,
              const std::string& floors_csv, const std::string& out, const std::string& format) {
  const auto speedups = parse_list(speedups_csv);
  const auto rhos = parse_list(rhos_csv);
  if (speedups.empty() || rhos.empty()) throw fl::ConfigError("sweep needs --speedups and --rhos");

  json rows = json::array();
  std::ostringstream csv;
  csv << "s,rho,completed,distinct,duplicates,wasted\n";
  for (std::size_t si = 0; si < speedups.size(); ++si) {
    for (std::size_t ri = 0; ri < rhos.size(); ++ri) {
      fl::RandomPatternParams p;
      p.seed = seed + 7919ull * si + ri;
      p.m = m;
      p.sizes = {1.0, rhos[ri]};
      p.horizon = horizon;
      p.crash_rate = crash_rate;
      p.injection_rate = inject_rate;
      if (!floors_csv.empty()) p.class_floor = parse_int_list(floors_csv);
      SourceResult src;
      src.pattern = fl::build_random_pattern(p);
      src.config.m = m;
      src.config.s = speedups[si];
      src.config.sizes = p.sizes;
      src.horizon = horizon;
      const auto trace = run_policy(src, policy_id, popts);
      const auto rep = fl::redundancy_report(trace);
      rows.push_back({{"s", j12(speedups[si])},
                      {"rho", j12(rhos[ri])},
                      {"completed", j12(trace.completed)},
                      {"distinct", trace.distinct_completions},
                      {"duplicates", rep.duplicates},
                      {"wasted", j12(rep.wasted_load)}});
      csv << fl::format_double(speedups[si]) << ',' << fl::format_double(rhos[ri]) << ','
          << fl::format_double(trace.completed) << ',' << trace.distinct_completions << ','
          << rep.duplicates << ',' << fl::format_double(rep.wasted_load) << '\n';
    }
  }
  if (format == "json") {
    json j;
    j["policy"] = policy_id;
    j["rows"] = std::move(rows);
    write_text(out, j.dump(2) + "\n");
  } else {
    write_text(out, csv.str());
  }
  return 0;
}

int cmd_gen_pattern(const SourceOpts& src_opts, const std::string& out) {
  if (src_opts.gen.empty()) throw fl::ConfigError("gen-pattern needs --kind");
  const auto src = resolve_source(src_opts);
  const std::string text = fl::write_pattern_file(src.pattern);
  write_text(out, text);
  std::fprintf(stderr, "gen-pattern: %zu events, machines=%d\n", src.pattern.events.size(),
               src.pattern.machines);
  return 0;
}

int cmd_oracle(const std::string& pattern_file, int m, double horizon, double grid,
               const std::string& out, const std::string& format) {
  auto pattern = fl::load_pattern(pattern_file);
  if (m > pattern.machines) {
    if (!pattern.start_alive.empty()) {
      pattern.start_alive.resize(static_cast<std::size_t>(m), false);
    }
    pattern.machines = m;
  }
  const int machines = m > 0 ? m : pattern.machines;
  const auto sched = grid > 0 ? fl::optimal_offline_grid(pattern, machines, horizon, grid)
                              : fl::optimal_offline(pattern, machines, horizon);
  json j;
  j["completed_load"] = j12(sched.completed_load);
  j["explored_nodes"] = sched.explored_nodes;
  json cycles = json::array();
  for (const auto& c : sched.cycles) {
    cycles.push_back({{"machine", c.machine},
                      {"start", j12(c.start)},
                      {"size", j12(c.size)},
                      {"task", c.task}});
  }
  j["cycles"] = std::move(cycles);
  if (format == "csv") {
    std::ostringstream csv;
    csv << "machine,start,size,task\n";
    for (const auto& c : sched.cycles) {
      csv << c.machine << ',' << fl::format_double(c.start) << ',' << fl::format_double(c.size)
          << ',' << c.task << '\n';
    }
    write_text(out, csv.str());
  } else {
    write_text(out, j.dump(2) + "\n");
  }
  std::fprintf(stderr, "oracle: completed_load=%s explored=%llu\n",
               fl::format_double(sched.completed_load).c_str(),
               static_cast<unsigned long long>(sched.explored_nodes));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"faultline: deterministic scheduling simulator for crash-prone machines"};
  app.require_subcommand(1);

  // simulate
  SourceOpts sim_src;
  std::string sim_policy, sim_out, sim_format = "csv";
  fl::PolicyOptions sim_popts;
  auto* sim = app.add_subcommand("simulate", "run one policy over a pattern, emit the trace");
  add_source_opts(sim, sim_src, true);
  sim->add_option("--policy", sim_policy, "policy id")->required();
  sim->add_flag("--grouplis", sim_popts.grouplis, "position rule for generic policies");
  sim->add_option("--c", sim_popts.c, "mk-amortized stage constant");
  sim->add_flag("--adaptive-c", sim_popts.adaptive_c, "mk-amortized: double c as load accrues");
  sim->add_option("--out,-o", sim_out, "output file ('-' = stdout)");
  sim->add_option("--format", sim_format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

  // compete
  SourceOpts cmp_src;
  std::string cmp_policy, cmp_out, cmp_format = "csv", cmp_baseline = "auto";
  double cmp_burn_in = 0.0, cmp_alpha = 1.0;
  fl::PolicyOptions cmp_popts;
  auto* cmp = app.add_subcommand("compete", "policy vs baseline ratio series and summary");
  add_source_opts(cmp, cmp_src, true);
  cmp->add_option("--policy", cmp_policy, "policy id")->required();
  cmp->add_flag("--grouplis", cmp_popts.grouplis, "position rule for generic policies");
  cmp->add_option("--c", cmp_popts.c, "mk-amortized stage constant");
  cmp->add_flag("--adaptive-c", cmp_popts.adaptive_c, "mk-amortized: double c as load accrues");
  cmp->add_option("--baseline", cmp_baseline, "auto | oracle | script")
      ->check(CLI::IsMember({"auto", "oracle", "script"}));
  cmp->add_option("--burn-in", cmp_burn_in, "suffix start for min-ratio/slack");
  cmp->add_option("--alpha", cmp_alpha, "slack weight: min of c_alg - alpha*c_base");
  cmp->add_option("--out,-o", cmp_out, "output file ('-' = stdout)");
  cmp->add_option("--format", cmp_format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

  // verify-mlis
  int vm_epochs = 100;
  double vm_rho = 2.0, vm_lmin = 1.0;
  std::string vm_out, vm_format = "json";
  auto* vm = app.add_subcommand("verify-mlis",
                                "check the periodic construction against its closed forms");
  vm->add_option("--epochs", vm_epochs, "epoch count (default 100)");
  vm->add_option("--rho", vm_rho, "size ratio (default 2)");
  vm->add_option("--lmin", vm_lmin, "smallest task size (default 1)");
  vm->add_option("--out,-o", vm_out, "per-epoch table output");
  vm->add_option("--format", vm_format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

  // verify-preamble
  int vp_patterns = 54;
  double vp_hmult = 800.0, vp_bmult = 400.0;
  std::uint64_t vp_seed = 1;
  std::string vp_out, vp_format = "json";
  auto* vp = app.add_subcommand(
      "verify-preamble", "check the two-size policy's suffix ratio on phase suites");
  vp->add_option("--patterns", vp_patterns, "pattern count (default 54)");
  vp->add_option("--horizon-mult", vp_hmult, "horizon as a multiple of lmax (default 800)");
  vp->add_option("--burn-in-mult", vp_bmult, "burn-in as a multiple of lmax (default 400)");
  vp->add_option("--seed", vp_seed, "base seed");
  vp->add_option("--out,-o", vp_out, "per-pattern table output");
  vp->add_option("--format", vp_format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

  // sweep
  std::string sw_policy, sw_speedups = "1,1.5,2", sw_rhos = "2,3";
  int sw_m = 2;
  double sw_horizon = 50.0, sw_crash = 0.1, sw_inject = 2.0;
  std::uint64_t sw_seed = 1;
  std::string sw_floors, sw_out, sw_format = "csv";
  fl::PolicyOptions sw_popts;
  auto* sw = app.add_subcommand("sweep", "grid over speedups and rhos on random patterns");
  sw->add_option("--policy", sw_policy, "policy id")->required();
  sw->add_flag("--grouplis", sw_popts.grouplis, "position rule for generic policies");
  sw->add_option("--c", sw_popts.c, "mk-amortized stage constant");
  sw->add_flag("--adaptive-c", sw_popts.adaptive_c, "mk-amortized: double c as load accrues");
  sw->add_option("--speedups", sw_speedups, "comma list of speedups");
  sw->add_option("--rhos", sw_rhos, "comma list of size ratios");
  sw->add_option("--machines,-m", sw_m, "machine count");
  sw->add_option("--horizon,-H", sw_horizon, "horizon per cell");
  sw->add_option("--seed", sw_seed, "base seed");
  sw->add_option("--crash-rate", sw_crash, "crash/restart rate");
  sw->add_option("--inject-rate", sw_inject, "injection rate");
  sw->add_option("--floors", sw_floors, "per-class bulk at t=0");
  sw->add_option("--out,-o", sw_out, "output file ('-' = stdout)");
  sw->add_option("--format", sw_format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

  // gen-pattern
  SourceOpts gp_src;
  std::string gp_out;
  auto* gp = app.add_subcommand("gen-pattern", "write a constructed pattern to a file");
  gp->add_option("--kind", gp_src.gen, "mlis | phases | random")
      ->required()
      ->check(CLI::IsMember({"mlis", "phases", "random"}));
  gp->add_option("--machines,-m", gp_src.machines, "machine count");
  gp->add_option("--sizes", gp_src.sizes_csv, "size ladder for random");
  gp->add_option("--horizon,-H", gp_src.horizon, "horizon");
  gp->add_option("--seed", gp_src.seed, "seed");
  gp->add_option("--epochs", gp_src.epochs, "mlis epochs");
  gp->add_option("--rho", gp_src.rho, "size ratio");
  gp->add_option("--lmin", gp_src.lmin, "smallest size");
  gp->add_option("--crash-rate", gp_src.crash_rate, "random crash rate");
  gp->add_option("--inject-rate", gp_src.inject_rate, "random injection rate");
  gp->add_option("--floors", gp_src.floors_csv, "random per-class bulk at t=0");
  gp->add_option("--out,-o", gp_out, "pattern file to write")->required();

  // oracle
  std::string or_pattern, or_out, or_format = "json";
  int or_m = 0;
  double or_horizon = 0.0, or_grid = 0.0;
  auto* orc = app.add_subcommand("oracle", "optimal offline baseline (budgeted search)");
  orc->add_option("--pattern", or_pattern, "pattern file")->required();
  orc->add_option("--machines,-m", or_m, "machine count (default: from pattern)");
  orc->add_option("--horizon,-H", or_horizon, "horizon")->required();
  orc->add_option("--grid", or_grid, "extra decision grid step (test mode)");
  orc->add_option("--out,-o", or_out, "output file ('-' = stdout)");
  orc->add_option("--format", or_format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(sim_src, sim_policy, sim_popts, sim_out, sim_format);
    if (cmp->parsed()) {
      return cmd_compete(cmp_src, cmp_policy, cmp_popts, cmp_baseline, cmp_burn_in, cmp_alpha,
                         cmp_out, cmp_format);
    }
    if (vm->parsed()) return cmd_verify_mlis(vm_epochs, vm_rho, vm_lmin, vm_out, vm_format);
    if (vp->parsed()) {
      return cmd_verify_preamble(vp_patterns, vp_hmult, vp_bmult, vp_seed, vp_out, vp_format);
    }
    if (sw->parsed()) {
      return cmd_sweep(sw_policy, sw_popts, sw_speedups, sw_rhos, sw_m, sw_horizon, sw_seed,
                       sw_crash, sw_inject, sw_floors, sw_out, sw_format);
    }
    if (gp->parsed()) return cmd_gen_pattern(gp_src, gp_out);
    if (orc->parsed()) return cmd_oracle(or_pattern, or_m, or_horizon, or_grid, or_out, or_format);
  } catch (const fl::BudgetError& e) {
    std::fprintf(stderr, "refused: %s\n", e.what());
    return 2;
  } catch (const fl::FaultlineError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
