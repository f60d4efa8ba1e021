#include "nlpb/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "nlpb/errors.hpp"

namespace nlpb {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Parser {
  int line = 0;
  std::string key;

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(line, key, msg); }

  double number(const std::string& v) const {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) fail("not a number: '" + v + "'");
    if (!std::isfinite(out)) fail("value must be finite");
    return out;
  }

  long long integer(const std::string& v) const {
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) fail("not an integer: '" + v + "'");
    return out;
  }

  double positive(const std::string& v) const {
    const double x = number(v);
    if (!(x > 0.0)) fail("must be > 0");
    return x;
  }

  int positive_int(const std::string& v) const {
    const long long x = integer(v);
    if (x <= 0 || x > 1'000'000) fail("must be a positive integer");
    return static_cast<int>(x);
  }

  std::string choice(const std::string& v, std::initializer_list<const char*> allowed) const {
    for (const char* a : allowed)
      if (v == a) return v;
    std::string msg = "expected one of";
    for (const char* a : allowed) msg += std::string(" ") + a;
    fail(msg + ", got '" + v + "'");
  }
};

const std::map<std::string, Command>& commands() {
  static const std::map<std::string, Command> m = {
      {"evolve", Command::Evolve},     {"consistency", Command::Consistency},
      {"converge", Command::Converge}, {"decay", Command::Decay},
      {"poincare", Command::Poincare}, {"contraction", Command::Contraction},
      {"denoise", Command::Denoise}};
  return m;
}

}  // namespace

std::string command_name(Command c) {
  for (const auto& [name, cmd] : commands())
    if (cmd == c) return name;
  return "?";
}

StepperConfig ExperimentConfig::stepper() const {
  StepperConfig s;
  s.p = PExponent(p);
  s.h = h;
  s.T = T;
  s.mode = mode;
  s.solver = solver;
  s.inner_tol = inner_tol;
  s.inner_max_iters = inner_max_iters;
  s.record_every = record_every;
  s.flux_delta = flux_delta;
  return s;
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  cfg.source = text;
  Parser ps;
  bool have_command = false;
  std::map<std::string, int> seen;

  using Setter = std::function<void(const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"command",
       [&](const std::string& v) {
         const auto it = commands().find(v);
         if (it == commands().end()) ps.fail("unknown command '" + v + "'");
         cfg.command = it->second;
         have_command = true;
       }},
      {"kernel", [&](const std::string& v) { cfg.kernel = ps.choice(v, {"tent", "quartic", "cosine"}); }},
      {"epsilon", [&](const std::string& v) { cfg.epsilon = ps.positive(v); }},
      {"epsilon_list",
       [&](const std::string& v) {
         cfg.epsilon_list.clear();
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) cfg.epsilon_list.push_back(ps.positive(trim(item)));
         if (cfg.epsilon_list.empty()) ps.fail("empty list");
         for (std::size_t i = 1; i < cfg.epsilon_list.size(); ++i)
           if (!(cfg.epsilon_list[i] < cfg.epsilon_list[i - 1])) ps.fail("list must be strictly decreasing");
       }},
      {"p",
       [&](const std::string& v) {
         cfg.p = ps.number(v);
         if (!(cfg.p > 1.0)) ps.fail("p must satisfy 1 < p");
       }},
      {"dim",
       [&](const std::string& v) {
         const long long d = ps.integer(v);
         if (d != 1 && d != 2) ps.fail("dim must be 1 or 2");
         cfg.dim = static_cast<int>(d);
       }},
      {"nx", [&](const std::string& v) { cfg.nx = ps.positive_int(v); }},
      {"ny", [&](const std::string& v) { cfg.ny = ps.positive_int(v); }},
      {"lo", [&](const std::string& v) { cfg.lo = ps.number(v); }},
      {"hi", [&](const std::string& v) { cfg.hi = ps.number(v); }},
      {"h", [&](const std::string& v) { cfg.h = ps.positive(v); }},
      {"T", [&](const std::string& v) { cfg.T = ps.positive(v); }},
      {"seed",
       [&](const std::string& v) {
         const long long s = ps.integer(v);
         if (s < 0) ps.fail("seed must be nonnegative");
         cfg.seed = static_cast<std::uint64_t>(s);
       }},
      {"mode",
       [&](const std::string& v) {
         cfg.mode = ps.choice(v, {"implicit", "explicit"}) == "implicit" ? StepMode::Implicit : StepMode::Explicit;
       }},
      {"solver",
       [&](const std::string& v) {
         cfg.solver = ps.choice(v, {"newton", "bb"}) == "newton" ? InnerSolver::Newton : InnerSolver::BarzilaiBorwein;
       }},
      {"record_every", [&](const std::string& v) { cfg.record_every = ps.positive_int(v); }},
      {"initial", [&](const std::string& v) { cfg.initial = ps.choice(v, {"zero", "bump", "random", "sine"}); }},
      {"amplitude", [&](const std::string& v) { cfg.amplitude = ps.number(v); }},
      {"inner_tol", [&](const std::string& v) { cfg.inner_tol = ps.positive(v); }},
      {"inner_max_iters", [&](const std::string& v) { cfg.inner_max_iters = ps.positive_int(v); }},
      {"flux_delta",
       [&](const std::string& v) {
         cfg.flux_delta = ps.number(v);
         if (cfg.flux_delta < 0.0) ps.fail("must be >= 0");
       }},
      {"test_function", [&](const std::string& v) { cfg.test_function = ps.choice(v, {"sin", "quadratic"}); }},
      {"q",
       [&](const std::string& v) {
         cfg.q = ps.number(v);
         if (cfg.q < 1.0) ps.fail("q must be >= 1");
       }},
      {"pairs", [&](const std::string& v) { cfg.pairs = ps.positive_int(v); }},
      {"perturbation", [&](const std::string& v) { cfg.perturbation = ps.positive(v); }},
      {"input", [&](const std::string& v) { cfg.input = v; }},
      {"output", [&](const std::string& v) { cfg.output = v; }},
  };

  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++ps.line;
    ps.key.clear();
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) ps.fail("expected 'key = value'");
    ps.key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const auto it = setters.find(ps.key);
    if (it == setters.end()) ps.fail("unknown key");
    if (seen.count(ps.key)) ps.fail("duplicate key (first on line " + std::to_string(seen[ps.key]) + ")");
    seen[ps.key] = ps.line;
    if (value.empty()) ps.fail("missing value");
    it->second(value);
  }

  auto fail_at = [&](const std::string& key, const std::string& msg) {
    const auto it = seen.find(key);
    throw ConfigError(it == seen.end() ? 0 : it->second, key, msg);
  };
  if (!have_command) fail_at("command", "required key missing");
  if (!(cfg.hi > cfg.lo)) fail_at("hi", "hi must exceed lo");
  if (cfg.ny == 0) cfg.ny = cfg.nx;
  if (cfg.epsilon_list.empty()) {
    if (cfg.command == Command::Consistency) cfg.epsilon_list = {0.2, 0.1, 0.05};
    if (cfg.command == Command::Converge) cfg.epsilon_list = {0.4, 0.2, 0.1};
  }
  if ((cfg.command == Command::Consistency || cfg.command == Command::Converge) && cfg.dim != 1)
    fail_at("dim", command_name(cfg.command) + " compares against the 1D Laplacian; use dim = 1");
  if (cfg.command == Command::Decay && cfg.p < 2.0) fail_at("p", "decay fits need p >= 2");
  if (cfg.command == Command::Poincare && cfg.q != 2.0) fail_at("q", "poincare supports q = 2 only");
  if (cfg.command == Command::Denoise) {
    if (cfg.input.empty()) fail_at("input", "denoise needs an input image");
    cfg.dim = 2;
  }
  if (cfg.mode == StepMode::Explicit && cfg.p != 2.0) fail_at("mode", "explicit stepping is for p = 2 only");
  try {
    cfg.stepper().validate();
  } catch (const DomainError& e) {
    fail_at("h", e.what());
  }
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace nlpb
