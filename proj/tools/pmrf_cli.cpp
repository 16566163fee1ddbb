// pmrf: exact and sampled inference on propositional MRFs.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pmrf/bench.hpp"
#include "pmrf/errors.hpp"
#include "pmrf/fdc.hpp"
#include "pmrf/fis.hpp"
#include "pmrf/logmath.hpp"
#include "pmrf/model.hpp"
#include "pmrf/ve.hpp"

namespace {

using json = nlohmann::ordered_json;

enum Exit { kOk = 0, kUsage = 2, kMissingFile = 3, kParse = 4, kTooLarge = 5, kRuntime = 6 };

struct MissingFile : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// JSON has no infinities.
json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename T>
void env_default(const char* name, T& value) {
  const char* s = std::getenv(name);
  if (s == nullptr || *s == '\0') return;
  std::istringstream in(s);
  T parsed{};
  if (in >> parsed && in.eof()) value = parsed;
  else std::cerr << "pmrf: ignoring malformed " << name << "='" << s << "'\n";
}

struct Args {
  std::string input;
  std::string query;
  std::string method;
  std::string cache = "on";
  int ve_width = 16;
  std::uint64_t samples = 1000;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  int bp_iters = 1000;
  double bp_damping = 0.5;
  double evidence_frac = 0.0;
  std::vector<std::size_t> order;

  std::string family = "random";
  int n = 0, m = 0, s = 0, d = 0, f = 0, people = 0;
  double weight_low = -1.0, weight_high = 1.0;
  std::string output;

  std::string exact, approx;
};

pmrf::FdcOptions fdc_options(const Args& a, pmrf::BranchMode mode) {
  pmrf::FdcOptions o;
  o.mode = mode;
  o.cache = a.cache == "on";
  o.ve_width_threshold = a.ve_width;
  return o;
}

pmrf::PropMRF load_model(const Args& a) {
  pmrf::PropMRF m = pmrf::parse_model(slurp(a.input));
  if (a.evidence_frac > 0.0) m = pmrf::pick_evidence(m, a.evidence_frac, a.seed);
  return m;
}

json stats_json(const pmrf::SearchStats& s) {
  return {{"nodes", s.nodes}, {"leaves", s.leaves}, {"cache_hits", s.cache_hits}, {"cache_entries", s.cache_entries}};
}

// ln Z by an exact method; stats accumulate when the method has any.
double exact_log_z(const Args& a, const pmrf::PropMRF& m, pmrf::SearchStats& stats) {
  if (a.method == "fdc" || a.method == "vdc") {
    auto r = pmrf::fdc_count(m, fdc_options(a, a.method == "fdc" ? pmrf::BranchMode::Formula : pmrf::BranchMode::Variable));
    stats += r.stats;
    return r.log_z;
  }
  if (a.method == "ve") return pmrf::ve_log_z(m);
  return pmrf::brute_force_z(m);
}

pmrf::SamplingOptions sampling_options(const Args& a) {
  pmrf::SamplingOptions o;
  o.method = a.method == "vis" ? pmrf::SamplingMethod::Vis : pmrf::SamplingMethod::Fis;
  o.samples = a.samples;
  o.seed = a.seed;
  o.jobs = a.jobs;
  o.bp.max_iters = a.bp_iters;
  o.bp.damping = a.bp_damping;
  o.sampler.counting = fdc_options(a, pmrf::BranchMode::Formula);
  o.order = a.order;
  return o;
}

json sampling_json(const pmrf::SamplingRun& run) {
  const auto& e = run.estimate;
  json out;
  out["log_z_hat"] = num(e.log_z_hat);
  out["z_hat"] = num(e.z_hat());
  out["log_std_error"] = num(e.log_std_error);
  out["std_error"] = num(e.std_error());
  out["samples"] = e.n_samples;
  out["bp_iterations"] = run.bp_iterations;
  out["bp_converged"] = run.bp_converged;
  out["distinct_assignments"] = run.distinct_assignments;
  return out;
}

void cmd_count(const Args& a, json& report) {
  pmrf::PropMRF m = load_model(a);
  report["fingerprint"] = pmrf::fingerprint(m);
  pmrf::SearchStats stats;
  double lz = exact_log_z(a, m, stats);
  report["method"] = a.method;
  report["log_z"] = num(lz);
  report["z"] = num(std::exp(lz));
  report["stats"] = stats_json(stats);
}

void cmd_prob(const Args& a, json& report) {
  pmrf::PropMRF m = load_model(a);
  report["fingerprint"] = pmrf::fingerprint(m);
  std::vector<pmrf::Clause> g = a.query.empty() ? std::vector<pmrf::Clause>{}
                                                : pmrf::parse_query(slurp(a.query), m.num_vars());
  pmrf::SearchStats stats;
  double lz = exact_log_z(a, m, stats);
  if (lz == pmrf::kNegInf) throw std::domain_error("the model has no solutions; P(G) is undefined");
  double lzq = exact_log_z(a, pmrf::conjoin_query(m, g), stats);
  report["method"] = a.method;
  report["query_clauses"] = g.size();
  report["log_z"] = num(lz);
  report["log_z_query"] = num(lzq);
  report["log_prob"] = num(lzq - lz);
  report["prob"] = num(std::exp(lzq - lz));
  report["stats"] = stats_json(stats);
}

void cmd_marginals(const Args& a, json& report) {
  pmrf::PropMRF m = load_model(a);
  report["fingerprint"] = pmrf::fingerprint(m);
  report["method"] = a.method;
  std::vector<double> p;
  if (a.method == "fis" || a.method == "vis") {
    pmrf::SamplingOptions o = sampling_options(a);
    o.marginals = true;
    auto run = pmrf::run_sampling(m, o);
    p = run.marginals;
    report["estimate"] = sampling_json(run);
  } else {
    pmrf::SearchStats stats;
    double lz = exact_log_z(a, m, stats);
    if (lz == pmrf::kNegInf) throw std::domain_error("the model has no solutions; marginals are undefined");
    for (int v = 1; v <= m.num_vars(); ++v) {
      std::vector<pmrf::Clause> unit{pmrf::Clause{v}};
      p.push_back(std::exp(exact_log_z(a, pmrf::conjoin_query(m, unit), stats) - lz));
    }
    report["log_z"] = num(lz);
    report["stats"] = stats_json(stats);
  }
  json logs = json::array();
  for (double x : p) logs.push_back(num(std::log(x)));
  report["marginals"] = p;
  report["log_marginals"] = logs;
}

void cmd_sample(const Args& a, json& report) {
  pmrf::PropMRF m = load_model(a);
  report["fingerprint"] = pmrf::fingerprint(m);
  report["method"] = a.method;
  auto run = pmrf::run_sampling(m, sampling_options(a));
  report["estimate"] = sampling_json(run);
}

void cmd_gen(const Args& a, json& report) {
  pmrf::WeightLaw law{a.weight_low, a.weight_high};
  if (!(law.low <= law.high)) throw std::invalid_argument("--weight-low must not exceed --weight-high");
  pmrf::PropMRF m = [&] {
    if (a.family == "qmr") return pmrf::gen_qmr({a.d, a.f, a.s, a.seed, law});
    if (a.family == "fs") return pmrf::gen_fs({a.people, a.seed, law});
    return pmrf::gen_random({a.n, a.m, a.s, a.seed, law});
  }();
  if (a.evidence_frac > 0.0) m = pmrf::pick_evidence(m, a.evidence_frac, a.seed);
  std::string text = pmrf::to_string(m);
  report["family"] = a.family;
  report["fingerprint"] = pmrf::fingerprint(m);
  report["num_vars"] = m.num_vars();
  report["hard_clauses"] = m.hard().size();
  report["soft_clauses"] = m.soft().size();
  if (a.output.empty()) {
    report["model"] = text;
  } else {
    std::ofstream out(a.output);
    if (!(out << text)) throw std::runtime_error("cannot write " + a.output);
    report["output"] = a.output;
  }
}

// A report with a "marginals" array, or whitespace-separated numbers.
std::vector<double> read_marginals(const std::string& path) {
  std::string text = slurp(path);
  auto start = text.find_first_not_of(" \t\r\n");
  if (start != std::string::npos && text[start] == '{') {
    json j = json::parse(text);
    if (!j.contains("marginals")) throw std::invalid_argument(path + ": no \"marginals\" field");
    return j["marginals"].get<std::vector<double>>();
  }
  std::istringstream in(text);
  std::vector<double> out;
  double x = 0.0;
  while (in >> x) out.push_back(x);
  if (!in.eof()) throw std::invalid_argument(path + ": expected numbers");
  return out;
}

void cmd_eval(const Args& a, json& report) {
  auto exact = read_marginals(a.exact);
  auto approx = read_marginals(a.approx);
  report["variables"] = exact.size();
  report["sum_kld"] = num(pmrf::sum_kld(exact, approx));
}

}  // namespace

int main(int argc, char** argv) {
  Args a;
  env_default("PMRF_SEED", a.seed);
  env_default("PMRF_JOBS", a.jobs);

  CLI::App app{"Exact and sampled inference on propositional Markov random fields"};
  app.require_subcommand(1);

  auto add_model = [&](CLI::App* c) {
    c->add_option("--input,--model", a.input, "Model file")->required();
    c->add_option("--evidence-frac", a.evidence_frac, "Fraction of variables fixed as evidence")
        ->check(CLI::Range(0.0, 1.0));
  };
  auto add_exact = [&](CLI::App* c, std::vector<std::string> methods) {
    c->add_option("--method", a.method)->check(CLI::IsMember(methods));
    c->add_option("--cache", a.cache, "Component caching")->check(CLI::IsMember({"on", "off"}));
    c->add_option("--ve-width", a.ve_width, "Width below which elimination takes over")->check(CLI::NonNegativeNumber);
  };
  auto add_sampling = [&](CLI::App* c) {
    c->add_option("--samples", a.samples)->check(CLI::PositiveNumber);
    c->add_option("--seed", a.seed);
    c->add_option("--jobs", a.jobs)->check(CLI::PositiveNumber);
    c->add_option("--bp-iters", a.bp_iters)->check(CLI::PositiveNumber);
    c->add_option("--bp-damping", a.bp_damping)->check(CLI::Range(0.0, 1.0));
    c->add_option("--order", a.order, "Soft clause order for H (0-based)")->delimiter(',');
  };

  auto* count = app.add_subcommand("count", "ln Z by an exact method");
  add_model(count);
  add_exact(count, {"fdc", "vdc", "ve", "brute"});
  count->add_option("--seed", a.seed, "Evidence seed");

  auto* prob = app.add_subcommand("prob", "P(G) = Z(M and G) / Z(M)");
  add_model(prob);
  add_exact(prob, {"fdc", "vdc", "ve", "brute"});
  prob->add_option("--query", a.query, "Query file");
  prob->add_option("--seed", a.seed, "Evidence seed");

  auto* marginals = app.add_subcommand("marginals", "P(X_j) for every variable");
  add_model(marginals);
  add_exact(marginals, {"fdc", "vdc", "ve", "brute", "fis", "vis"});
  add_sampling(marginals);

  auto* sample = app.add_subcommand("sample", "Importance-sampling estimate of Z");
  add_model(sample);
  sample->add_option("--method", a.method)->check(CLI::IsMember({"fis", "vis"}));
  sample->add_option("--cache", a.cache)->check(CLI::IsMember({"on", "off"}));
  sample->add_option("--ve-width", a.ve_width)->check(CLI::NonNegativeNumber);
  add_sampling(sample);

  auto* gen = app.add_subcommand("gen", "Generate a benchmark model");
  gen->add_option("--family", a.family)->check(CLI::IsMember({"random", "qmr", "fs"}));
  gen->add_option("--n", a.n, "random: variables");
  gen->add_option("--m", a.m, "random: clauses");
  gen->add_option("--s", a.s, "random: clause size; qmr: diseases per symptom");
  gen->add_option("--d", a.d, "qmr: diseases");
  gen->add_option("--f", a.f, "qmr: symptoms");
  gen->add_option("--people", a.people, "fs: domain size");
  gen->add_option("--weight-low", a.weight_low);
  gen->add_option("--weight-high", a.weight_high);
  gen->add_option("--seed", a.seed);
  gen->add_option("--evidence-frac", a.evidence_frac)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--output,-o", a.output, "Write the model here instead of into the report");

  auto* eval = app.add_subcommand("eval", "Sum-KLD between two marginal files");
  eval->add_option("--exact", a.exact)->required();
  eval->add_option("--approx", a.approx)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  CLI::App* chosen = app.get_subcommands().front();
  if (a.method.empty()) {
    a.method = (chosen == sample) ? "fis" : "fdc";
  }

  json report;
  report["command"] = chosen->get_name();
  json args = json::array();
  for (int i = 1; i < argc; ++i) args.push_back(argv[i]);
  report["argv"] = args;
  report["seed"] = a.seed;

  const auto start = std::chrono::steady_clock::now();
  try {
    if (chosen == count) cmd_count(a, report);
    else if (chosen == prob) cmd_prob(a, report);
    else if (chosen == marginals) cmd_marginals(a, report);
    else if (chosen == sample) cmd_sample(a, report);
    else if (chosen == gen) cmd_gen(a, report);
    else cmd_eval(a, report);
  } catch (const MissingFile& e) {
    std::cerr << "pmrf: " << e.what() << '\n';
    return kMissingFile;
  } catch (const pmrf::ParseError& e) {
    std::cerr << "pmrf: parse error: " << e.what() << '\n';
    return kParse;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "pmrf: parse error: " << e.what() << '\n';
    return kParse;
  } catch (const pmrf::InstanceTooLarge& e) {
    std::cerr << "pmrf: " << e.what() << '\n';
    return kTooLarge;
  } catch (const pmrf::FactorTooLarge& e) {
    std::cerr << "pmrf: " << e.what() << '\n';
    return kTooLarge;
  } catch (const std::exception& e) {
    std::cerr << "pmrf: " << e.what() << '\n';
    return kRuntime;
  }
  report["elapsed_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << report.dump(2) << '\n';
  return kOk;
}
