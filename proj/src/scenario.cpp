#include "nsfde/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nsfde/errors.hpp"

namespace nsfde::solver {

DelayFunction DelayFunction::constant_lag(double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("DelayFunction::constant_lag: r >= 0 required");
  return DelayFunction(Kind::const_lag, r, "const_lag");
}

DelayFunction DelayFunction::proportional(double q) {
  if (!(q > 0.0) || !(q <= 1.0))
    throw std::invalid_argument("DelayFunction::proportional: q must lie in (0, 1]");
  return DelayFunction(Kind::proportional, q, "proportional");
}

DelayFunction DelayFunction::identity() {
  return DelayFunction(Kind::identity, 0.0, "identity");
}

double DelayFunction::operator()(double t) const {
  switch (kind_) {
    case Kind::const_lag:
      return std::max(t - param_, -param_);
    case Kind::proportional:
      return param_ * t;
    case Kind::identity:
      return t;
  }
  return t;
}

namespace {

// Scalar factor of the sqrt_log drift: h(a) = sign(a) sqrt(lambda2(a^2)) / 2.
// Halving keeps the opposite-sign case inside the lambda2 difference modulus.
double sqrt_log_scalar(double a, const bihari::ConcaveModulus& lambda2) {
  if (a == 0.0) return 0.0;
  const double s = a > 0.0 ? 1.0 : -1.0;
  return 0.5 * s * std::sqrt(lambda2(a * a));
}

}  // namespace

Coefficients Coefficients::make(const std::string& f_kind, double f_scale, double f_delta,
                                const std::string& g_kind, double g_kappa,
                                const std::string& sigma_kind, double sigma_scale, double beta) {
  if (!(beta > 0.5) || !(beta < 1.0))
    throw ConfigError("coefficients: beta must lie in (1/2, 1)");

  bihari::ConcaveModulus k_mod = bihari::ConcaveModulus::zero();
  bihari::ConcaveModulus g_mod = bihari::ConcaveModulus::zero();
  if (f_kind == "zero") {
    // moduli stay zero
  } else if (f_kind == "linear") {
    k_mod = bihari::ConcaveModulus::linear(1.0, f_scale * f_scale);
    g_mod = bihari::ConcaveModulus::linear(1.0, f_scale * f_scale);
  } else if (f_kind == "sqrt_log") {
    k_mod = bihari::ConcaveModulus::log_splice(f_delta, 0.25 * f_scale * f_scale);
    g_mod = bihari::ConcaveModulus::log_splice(f_delta, f_scale * f_scale);
  } else {
    throw ConfigError("coefficients: unknown f kind '" + f_kind + "'");
  }
  if (g_kind != "zero" && g_kind != "linear")
    throw ConfigError("coefficients: unknown g kind '" + g_kind + "'");
  if (sigma_kind != "zero" && sigma_kind != "const")
    throw ConfigError("coefficients: unknown sigma kind '" + sigma_kind + "'");

  Coefficients c(std::move(k_mod), std::move(g_mod));
  c.f_kind_ = f_kind;
  c.g_kind_ = g_kind;
  c.sigma_kind_ = sigma_kind;
  c.f_scale_ = f_scale;
  c.f_delta_ = f_delta;
  c.g_kappa_ = g_kind == "zero" ? 0.0 : g_kappa;
  c.sigma_scale_ = sigma_kind == "zero" ? 0.0 : sigma_scale;
  c.beta_ = beta;
  c.m_g_ = c.g_kappa_;
  c.l_ = c.g_kappa_ * c.g_kappa_;
  return c;
}

void Coefficients::f(double t, const double* x, double* out, int n) const {
  (void)t;
  if (f_kind_ == "zero") {
    std::fill(out, out + n, 0.0);
  } else if (f_kind_ == "linear") {
    for (int i = 0; i < n; ++i) out[i] = f_scale_ * x[i];
  } else {  // sqrt_log
    std::fill(out, out + n, 0.0);
    out[0] = f_scale_ * sqrt_log_scalar(x[0], unit_lambda2());
  }
}

// The difference modulus g_mod_ is scale^2 * lambda2; h needs the unit-scale
// lambda2, so rebuild it on demand (cheap, stateless).
const bihari::ConcaveModulus& Coefficients::unit_lambda2() const {
  static thread_local std::map<double, bihari::ConcaveModulus> cache;
  auto it = cache.find(f_delta_);
  if (it == cache.end())
    it = cache.emplace(f_delta_, bihari::ConcaveModulus::log_splice(f_delta_, 1.0)).first;
  return it->second;
}

void Coefficients::g_beta(double t, const double* x, double* out, int n) const {
  (void)t;
  if (g_kind_ == "zero") {
    std::fill(out, out + n, 0.0);
  } else {
    for (int i = 0; i < n; ++i) out[i] = g_kappa_ * x[i];
  }
}

double Coefficients::sigma_scale_at(double t) const {
  (void)t;
  return sigma_kind_ == "zero" ? 0.0 : sigma_scale_;
}

double PhiSpec::value(double t, int mode_index) const {
  if (kind == "zero") return 0.0;
  const double n = static_cast<double>(mode_index + 1);
  return amp * std::pow(n, -decay) * (1.0 + ramp * t);
}

void Scenario::validate() const {
  if (gen.n_modes() != q.n_modes())
    throw ConfigError("scenario: generator and Q must share the truncation level");
  if (!(t_end > 0.0)) throw ConfigError("scenario: t_end must be positive");
  if (!(delay_r >= 0.0)) throw ConfigError("scenario: delay_r must be >= 0");
  if (n_steps < 1) throw ConfigError("scenario: n_steps >= 1 required");
  if (n_paths < 1) throw ConfigError("scenario: n_paths >= 1 required");
  if (!(picard_tol > 0.0) || !(inner_tol > 0.0))
    throw ConfigError("scenario: tolerances must be positive");
  if (max_iters < 1) throw ConfigError("scenario: max_iters >= 1 required");
  if (min_iters < 0 || min_iters > max_iters)
    throw ConfigError("scenario: need 0 <= min_iters <= max_iters");
  if (out_paths < 0) throw ConfigError("scenario: output paths must be >= 0");
  if (phi.kind != "zero" && phi.kind != "decay_ramp")
    throw ConfigError("scenario: unknown phi kind '" + phi.kind + "'");
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (kv.count(full)) throw ConfigError("config: duplicate key '" + full + "'");
    kv[full] = value;
  }
  return kv;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

namespace {

class KeyReader {
 public:
  explicit KeyReader(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string take_string(const std::string& key, const std::string& fallback) {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    const std::string v = it->second;
    kv_.erase(it);
    return v;
  }

  double take_double(const std::string& key, double fallback) {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    const std::string v = it->second;
    kv_.erase(it);
    try {
      std::size_t pos = 0;
      const double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("");
      return d;
    } catch (...) {
      throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
    }
  }

  long long take_int(const std::string& key, long long fallback) {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    const std::string v = it->second;
    kv_.erase(it);
    try {
      std::size_t pos = 0;
      const long long i = std::stoll(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("");
      return i;
    } catch (...) {
      throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
    }
  }

  std::uint64_t take_u64(const std::string& key, std::uint64_t fallback) {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    const std::string v = it->second;
    kv_.erase(it);
    try {
      std::size_t pos = 0;
      const unsigned long long i = std::stoull(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("");
      return static_cast<std::uint64_t>(i);
    } catch (...) {
      throw ConfigError("config: key '" + key + "' expects an unsigned integer, got '" + v + "'");
    }
  }

  bool take_bool(const std::string& key, bool fallback) {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    std::string v = it->second;
    kv_.erase(it);
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: key '" + key + "' expects a boolean, got '" + v + "'");
  }

  std::vector<double> take_double_list(const std::string& key) {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return {};
    const std::string v = it->second;
    kv_.erase(it);
    std::vector<double> out;
    std::istringstream in(v);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      try {
        out.push_back(std::stod(item));
      } catch (...) {
        throw ConfigError("config: key '" + key + "' expects a comma list of numbers");
      }
    }
    return out;
  }

  void finish() const {
    if (!kv_.empty()) throw ConfigError("config: unknown key '" + kv_.begin()->first + "'");
  }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace

Scenario scenario_from_config(const std::map<std::string, std::string>& kv) {
  KeyReader r(kv);

  const double hurst = r.take_double("model.hurst", 0.75);
  const double t_end = r.take_double("model.t_end", 1.0);
  const double delay_r = r.take_double("model.delay_r", 0.25);
  const std::string rho_kind = r.take_string("model.rho", "const_lag");
  const double rho_q = r.take_double("model.rho_q", 0.5);
  const double beta = r.take_double("model.beta", 0.75);
  const int n_modes = static_cast<int>(r.take_int("model.n_modes", 8));

  const std::string gen_kind = r.take_string("generator.kind", "laplacian_dirichlet");
  const std::vector<double> gen_mu = r.take_double_list("generator.mu");

  const std::string q_kind = r.take_string("q.kind", "power");
  const double q_amp = r.take_double("q.amp", 1.0);
  const double q_decay = r.take_double("q.decay", 2.0);
  const std::vector<double> q_lambda = r.take_double_list("q.lambda");
  const double q_tail = r.take_double("q.tail_bound", 0.0);

  const std::string f_kind = r.take_string("coefficients.f", "sqrt_log");
  const double f_scale = r.take_double("coefficients.f_scale", 0.5);
  const double f_delta = r.take_double("coefficients.f_delta", 0.1);
  const std::string g_kind = r.take_string("coefficients.g", "linear");
  const double g_kappa = r.take_double("coefficients.g_kappa", 0.3);
  const std::string sigma_kind = r.take_string("coefficients.sigma", "const");
  const double sigma_scale = r.take_double("coefficients.sigma_scale", 0.1);

  PhiSpec phi;
  phi.kind = r.take_string("initial.phi", "decay_ramp");
  phi.amp = r.take_double("initial.phi_amp", 0.5);
  phi.decay = r.take_double("initial.phi_decay", 1.0);
  phi.ramp = r.take_double("initial.phi_ramp", 0.0);

  const int n_steps = static_cast<int>(r.take_int("numerics.n_steps", 64));
  const int n_paths = static_cast<int>(r.take_int("numerics.n_paths", 2000));
  const std::uint64_t seed = r.take_u64("numerics.seed", 20240811ULL);
  const double picard_tol = r.take_double("numerics.picard_tol", 1e-3);
  const double inner_tol = r.take_double("numerics.inner_tol", 1e-18);
  const int max_iters = static_cast<int>(r.take_int("numerics.max_iters", 15));
  const int min_iters = static_cast<int>(r.take_int("numerics.min_iters", 0));
  const std::string x0_kind = r.take_string("numerics.x0_seed", "eq4");
  const bool force = r.take_bool("numerics.force", false);

  const int out_paths = static_cast<int>(r.take_int("output.paths", 4));
  const bool timestamp = r.take_bool("output.timestamp", true);

  r.finish();

  DelayFunction rho = DelayFunction::identity();
  if (rho_kind == "const_lag")
    rho = DelayFunction::constant_lag(delay_r);
  else if (rho_kind == "proportional")
    rho = DelayFunction::proportional(rho_q);
  else if (rho_kind == "identity")
    rho = DelayFunction::identity();
  else
    throw ConfigError("config: unknown delay kind '" + rho_kind + "'");

  semigroup::SpectralGenerator gen =
      gen_kind == "explicit"
          ? semigroup::SpectralGenerator(gen_mu)
          : semigroup::SpectralGenerator::laplacian_dirichlet(n_modes);
  if (gen_kind != "explicit" && gen_kind != "laplacian_dirichlet")
    throw ConfigError("config: unknown generator kind '" + gen_kind + "'");

  hilbert::TraceClassQ q = q_kind == "explicit"
                               ? hilbert::TraceClassQ(q_lambda, q_tail)
                               : hilbert::TraceClassQ::power_law(n_modes, q_amp, q_decay);
  if (q_kind != "explicit" && q_kind != "power")
    throw ConfigError("config: unknown Q kind '" + q_kind + "'");

  X0Seed x0_seed = X0Seed::eq4;
  if (x0_kind == "eq4")
    x0_seed = X0Seed::eq4;
  else if (x0_kind == "phi_constant")
    x0_seed = X0Seed::phi_constant;
  else if (x0_kind == "zero")
    x0_seed = X0Seed::zero;
  else
    throw ConfigError("config: unknown x0_seed '" + x0_kind + "'");

  Scenario s{fbm::Hurst(hurst),
             t_end,
             delay_r,
             rho,
             std::move(gen),
             std::move(q),
             Coefficients::make(f_kind, f_scale, f_delta, g_kind, g_kappa, sigma_kind,
                                sigma_scale, beta),
             phi,
             n_steps,
             n_paths,
             seed,
             picard_tol,
             inner_tol,
             max_iters,
             min_iters,
             x0_seed,
             force,
             out_paths,
             timestamp};
  s.validate();
  return s;
}

Scenario scenario_from_file(const std::string& path) {
  return scenario_from_config(parse_config_file(path));
}

Scenario default_scenario() { return scenario_from_config({}); }

std::string print_default_config() {
  return R"(# Scenario configuration: `key = value` lines grouped in [sections].
# Unknown keys are rejected. Values shown are the defaults.

[model]
hurst = 0.75            # Hurst parameter, (1/2, 1)
t_end = 1.0             # horizon T
delay_r = 0.25          # delay-memory length r >= 0
rho = const_lag         # delay function: const_lag | proportional | identity
rho_q = 0.5             # contraction factor for rho = proportional
beta = 0.75             # fractional power for the neutral term, (1/2, 1)
n_modes = 8             # truncation level N of the spectral model

[generator]
kind = laplacian_dirichlet   # laplacian_dirichlet (mu_n = n^2) | explicit
#mu = 1,4,9                  # eigenvalues of -A when kind = explicit

[q]
kind = power            # power (lambda_n = amp n^{-decay}) | explicit
amp = 1.0
decay = 2.0             # must be > 1 for a finite trace
#lambda = 1,0.25        # eigenvalues when kind = explicit
#tail_bound = 0.0       # trace tail bound when kind = explicit

[coefficients]
f = sqrt_log            # drift: zero | linear | sqrt_log (non-Lipschitz)
f_scale = 0.5
f_delta = 0.1           # splice point of the log modulus, (0, 1/e)
g = linear              # neutral term (-A)^beta g: zero | linear
g_kappa = 0.3           # M_g = kappa, l = kappa^2
sigma = const           # noise: zero | const (scaled identity)
sigma_scale = 0.1

[initial]
phi = decay_ramp        # zero | decay_ramp: phi_n(t) = amp n^{-decay} (1 + ramp t)
phi_amp = 0.5
phi_decay = 1.0
phi_ramp = 0.0

[numerics]
n_steps = 64            # uniform steps on [0, T]
n_paths = 2000          # Monte Carlo replications
seed = 20240811
picard_tol = 1e-3       # stop when sup_t E||x^{n+1}-x^n||^2 falls below
inner_tol = 1e-18       # inner fixed-point tolerance (squared sup metric)
max_iters = 15
min_iters = 0           # force at least this many Picard iterates
x0_seed = eq4           # eq4 | phi_constant | zero
force = false           # run even if hypothesis validation fails

[output]
paths = 4               # paths written to iterates.csv
timestamp = true        # prepend a generated-at comment to CSV outputs
)";
}

}  // namespace nsfde::solver
