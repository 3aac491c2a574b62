// hardyeq: batch front end for characterising functionals, best-constant
// searches and equivalence checks.
//
//   hardyeq eval   instances.json [--n 512] [--domain 1e-3:1e3] [--format json|csv]
//   hardyeq best   instances.json [--methods atom,kat,power,ascent] [--seed 0]
//   hardyeq verify instances.json [--window 16] [--theorem id]
//
// Exit status: 0 all records pass, 1 any failed or errored record, 2 bad
// configuration or instance file.

#include <atomic>
#include <condition_variable>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "hardy/hardy.hpp"

namespace {

using hardy::io::Instance;
using hardy::io::Record;

struct RunConfig {
  std::string command;
  std::string file;
  std::size_t n = 512;
  std::string domain;
  std::uint64_t seed = 0;
  double window = 16.0;
  std::string format = "json";
  std::string methods = "atom,power,ascent";
  std::string theorem;
  int restarts = 32;
  int k = 2;
  std::size_t subgrid = 16;
  std::size_t budget = 100000;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
};

hardy::SolverOptions solver_options(const RunConfig& c) {
  hardy::SolverOptions o;
  o.power = o.ascent = o.k_atom = false;
  std::stringstream ss(c.methods);
  std::string m;
  while (std::getline(ss, m, ',')) {
    if (m == "atom") continue;  // always runs
    if (m == "kat") o.k_atom = true;
    else if (m == "power") o.power = true;
    else if (m == "ascent") o.ascent = true;
    else throw CLI::ValidationError("--methods", "unknown method '" + m + "'");
  }
  o.restarts = c.restarts;
  o.k = c.k;
  o.subgrid = c.subgrid;
  o.budget = c.budget;
  o.seed = c.seed;
  return o;
}

std::vector<Record> run_one(const RunConfig& c, const hardy::SolverOptions& opts, const Instance& in) {
  try {
    if (c.command == "eval") return {hardy::io::eval_record(in, hardy::characterizing_functional(in.spec, c.n))};
    if (c.command == "best") return {hardy::io::best_record(in, hardy::best_constant(in.spec, opts))};
    const std::string id = c.theorem.empty() ? in.theorem : c.theorem;
    if (id.empty() || id == "characterization") {
      hardy::CharacterizationOptions co;
      co.n = c.n;
      return {hardy::io::verify_record(in, hardy::verify_characterization(in.spec, co, opts))};
    }
    return {hardy::io::verify_record(in, hardy::verify_equivalence(in.spec, id, c.window, opts))};
  } catch (const std::exception& e) {
    return {hardy::io::error_record(in, c.command, e)};
  }
}

/// Workers fill slots; the caller prints them strictly in instance order.
int run(const RunConfig& c, const std::vector<Instance>& instances) {
  const auto opts = solver_options(c);
  const bool csv = c.format == "csv";
  if (csv) std::cout << hardy::io::csv_header() << '\n';

  std::vector<std::optional<std::vector<Record>>> slots(instances.size());
  std::mutex mu;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < instances.size();) {
      auto recs = run_one(c, opts, instances[i]);
      std::lock_guard lock(mu);
      slots[i] = std::move(recs);
      ready.notify_all();
    }
  };
  std::vector<std::jthread> pool;
  const unsigned jobs = std::min<std::size_t>(c.jobs, std::max<std::size_t>(1, instances.size()));
  for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);

  bool bad = false;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    std::unique_lock lock(mu);
    ready.wait(lock, [&] { return slots[i].has_value(); });
    for (const auto& r : *slots[i]) {
      std::cout << (csv ? hardy::io::to_csv_row(r) : hardy::io::to_json_line(r)) << '\n';
      bad = bad || r.verdict == "fail" || r.verdict == "error";
    }
    std::cout.flush();
  }
  return bad ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"Weighted Hardy-type inequalities: functionals, best constants, equivalence checks"};
  app.require_subcommand(1, 1);
  for (const char* name : {"eval", "best", "verify"}) {
    auto* sub = app.add_subcommand(name, std::string(name) == "eval"   ? "evaluate characterising functionals"
                                         : std::string(name) == "best" ? "estimate best constants"
                                                                        : "check equivalences and characterisations");
    sub->add_option("file", cfg.file, "instance file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--n", cfg.n, "grid size")->check(CLI::Range(std::size_t{16}, std::size_t{1} << 20));
    sub->add_option("--domain", cfg.domain, "window x0:xn");
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--window", cfg.window, "pass window K (ratios in [1/K, K])");
    sub->add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--methods", cfg.methods, "solver methods: atom,kat,power,ascent");
    sub->add_option("--theorem", cfg.theorem, "override the theorem id of every instance");
    sub->add_option("--restarts", cfg.restarts, "ascent restarts")->check(CLI::PositiveNumber);
    sub->add_option("--k", cfg.k, "k-atom support size")->check(CLI::Range(1, 3));
    sub->add_option("--subgrid", cfg.subgrid, "k-atom subgrid size")->check(CLI::Range(std::size_t{2}, std::size_t{24}));
    sub->add_option("--budget", cfg.budget, "k-atom evaluation budget");
    sub->add_option("--jobs", cfg.jobs, "worker threads")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  cfg.command = app.get_subcommands().front()->get_name();

  try {
    if (!(cfg.window > 1.0)) throw CLI::ValidationError("--window", "K must exceed 1");
    if (!cfg.theorem.empty() && cfg.theorem != "characterization" && !hardy::is_theorem_id(cfg.theorem))
      throw CLI::ValidationError("--theorem", "unknown theorem id '" + cfg.theorem + "'");
    solver_options(cfg);
    hardy::io::ParseDefaults d;
    d.n = cfg.n;
    d.seed = cfg.seed;
    if (!cfg.domain.empty()) {
      const auto colon = cfg.domain.find(':');
      if (colon == std::string::npos) throw CLI::ValidationError("--domain", "expected x0:xn");
      const double lo = std::stod(cfg.domain.substr(0, colon)), hi = std::stod(cfg.domain.substr(colon + 1));
      if (!(lo > 0.0) || !(hi > lo)) throw CLI::ValidationError("--domain", "need 0 < x0 < xn");
      d.domain = hardy::GridSpec{cfg.n, lo, hi};
    }
    std::ifstream in(cfg.file);
    std::stringstream buf;
    buf << in.rdbuf();
    const auto instances = hardy::io::parse_instances(buf.str(), d);
    return run(cfg, instances);
  } catch (const CLI::Error& e) {
    std::cerr << "hardyeq: " << e.what() << '\n';
    return 2;
  } catch (const hardy::ParseError& e) {
    std::cerr << "hardyeq: " << cfg.file << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "hardyeq: " << e.what() << '\n';
    return 2;
  }
}
