#ifndef UIND_ENVIRONMENTS_HPP
#define UIND_ENVIRONMENTS_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "uind/coding.hpp"
#include "uind/induction.hpp"
#include "uind/rng.hpp"

namespace uind {

class BadKindError : public std::runtime_error {
 public:
  explicit BadKindError(const std::string& what) : std::runtime_error(what) {}
};
class BadActionError : public std::runtime_error {
 public:
  explicit BadActionError(const std::string& what) : std::runtime_error(what) {}
};

enum class EnvKind { QaSource, Mdp, BlanketWorld };

// Shipped stochastic sources and environments. Probabilities are rationals
// held in lowest terms so structurally identical specs share one canonical
// encoding.
struct BernoulliAnswerSpec {  // constant question "1", answer ~ Bernoulli(p)
  std::uint64_t num = 1, den = 2;
};
struct PeriodicAnswerSpec {  // question = gamma(position), answers cycle the pattern
  std::vector<std::uint32_t> pattern;
};
struct CopySourceSpec {};  // question = 3 random bits, answer = last bit
struct CoinBanditSpec {    // two arms with Bernoulli payouts
  std::uint64_t num0 = 0, den0 = 1, num1 = 1, den1 = 1;
};
struct DeterministicBanditSpec {};  // arm 1 pays 1, arm 0 pays 0
struct Thermo8Spec {};              // 8-state drifting thermostat world

using EnvParams = std::variant<BernoulliAnswerSpec, PeriodicAnswerSpec, CopySourceSpec,
                               CoinBanditSpec, DeterministicBanditSpec, Thermo8Spec>;

struct EnvironmentSpec {
  EnvParams params;

  static EnvironmentSpec bernoulli(std::uint64_t num, std::uint64_t den) {
    auto g = std::gcd(num, den);
    if (den == 0 || num > den) throw std::invalid_argument("bernoulli parameter must be in [0,1]");
    return {BernoulliAnswerSpec{num / g, den / g}};
  }
  static EnvironmentSpec periodic(std::vector<std::uint32_t> pattern) {
    if (pattern.empty()) throw std::invalid_argument("pattern must be non-empty");
    return {PeriodicAnswerSpec{std::move(pattern)}};
  }
  static EnvironmentSpec copy_source() { return {CopySourceSpec{}}; }
  static EnvironmentSpec coin_bandit(std::uint64_t n0, std::uint64_t d0, std::uint64_t n1,
                                     std::uint64_t d1) {
    if (d0 == 0 || d1 == 0 || n0 > d0 || n1 > d1)
      throw std::invalid_argument("coin bandit parameters must be probabilities");
    auto g0 = std::gcd(n0, d0) ? std::gcd(n0, d0) : 1, g1 = std::gcd(n1, d1) ? std::gcd(n1, d1) : 1;
    return {CoinBanditSpec{n0 / g0, d0 / g0, n1 / g1, d1 / g1}};
  }
  static EnvironmentSpec deterministic_bandit() { return {DeterministicBanditSpec{}}; }
  static EnvironmentSpec thermo8() { return {Thermo8Spec{}}; }

  EnvKind kind() const {
    if (std::holds_alternative<BernoulliAnswerSpec>(params) ||
        std::holds_alternative<PeriodicAnswerSpec>(params) ||
        std::holds_alternative<CopySourceSpec>(params))
      return EnvKind::QaSource;
    if (std::holds_alternative<Thermo8Spec>(params)) return EnvKind::BlanketWorld;
    return EnvKind::Mdp;
  }

  std::string name() const {
    std::ostringstream os;
    if (auto* b = std::get_if<BernoulliAnswerSpec>(&params)) {
      os << "qa_source bernoulli p=" << b->num << "/" << b->den;
    } else if (auto* p = std::get_if<PeriodicAnswerSpec>(&params)) {
      os << "qa_source periodic pattern=";
      for (std::size_t i = 0; i < p->pattern.size(); ++i) os << (i ? "," : "") << p->pattern[i];
    } else if (std::holds_alternative<CopySourceSpec>(params)) {
      os << "qa_source copy";
    } else if (auto* c = std::get_if<CoinBanditSpec>(&params)) {
      os << "mdp coin p0=" << c->num0 << "/" << c->den0 << " p1=" << c->num1 << "/" << c->den1;
    } else if (std::holds_alternative<DeterministicBanditSpec>(params)) {
      os << "mdp det";
    } else {
      os << "blanket thermo8";
    }
    return os.str();
  }

  // Canonical prefix-free parameter encoding; its length stands in for the
  // environment's description complexity in the 2^-H weights.
  Bits canonical_encoding() const {
    Bits out;
    auto nat = [&](std::uint64_t v) { out += encode_nat(v + 1); };
    if (auto* b = std::get_if<BernoulliAnswerSpec>(&params)) {
      nat(0); nat(0);  // kind, subkind
      nat(b->num); nat(b->den);
    } else if (auto* p = std::get_if<PeriodicAnswerSpec>(&params)) {
      nat(0); nat(1);
      nat(p->pattern.size());
      for (std::uint32_t s : p->pattern) nat(s);
    } else if (std::holds_alternative<CopySourceSpec>(params)) {
      nat(0); nat(2);
    } else if (auto* c = std::get_if<CoinBanditSpec>(&params)) {
      nat(1); nat(0);
      nat(c->num0); nat(c->den0); nat(c->num1); nat(c->den1);
    } else if (std::holds_alternative<DeterministicBanditSpec>(params)) {
      nat(1); nat(1);
    } else {
      nat(2); nat(0);
    }
    return out;
  }

  std::uint64_t encoding_len() const { return canonical_encoding().size(); }

  // Suite line format: "kind subkind param=value ...", e.g.
  //   qa_source bernoulli p=3/4
  //   mdp coin p0=1/5 p1=4/5
  static EnvironmentSpec parse(const std::string& line, const std::filesystem::path& path = "<line>",
                               std::size_t lineno = 0);
};

inline std::pair<std::uint64_t, std::uint64_t> parse_fraction(const std::string& s,
                                                              const std::filesystem::path& path,
                                                              std::size_t lineno) {
  std::uint64_t num = 0, den = 1;
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) {
      num = std::stoull(s);
      den = 1;
    } else {
      num = std::stoull(s.substr(0, slash));
      den = std::stoull(s.substr(slash + 1));
    }
  } catch (const std::exception&) {
    data_error(path, lineno, "bad fraction '" + s + "'");
  }
  return {num, den};
}

inline EnvironmentSpec EnvironmentSpec::parse(const std::string& line,
                                              const std::filesystem::path& path,
                                              std::size_t lineno) {
  std::istringstream is(line);
  std::string kind, sub;
  is >> kind >> sub;
  auto param = [&](const std::string& key) -> std::string {
    std::string tok;
    std::istringstream scan(line);
    while (scan >> tok)
      if (tok.rfind(key + "=", 0) == 0) return tok.substr(key.size() + 1);
    data_error(path, lineno, "missing parameter '" + key + "'");
  };
  if (kind == "qa_source" && sub == "bernoulli") {
    auto [n, d] = parse_fraction(param("p"), path, lineno);
    return EnvironmentSpec::bernoulli(n, d);
  }
  if (kind == "qa_source" && sub == "periodic") {
    std::vector<std::uint32_t> pattern;
    std::string v = param("pattern");
    std::istringstream ps(v);
    std::string item;
    while (std::getline(ps, item, ','))
      pattern.push_back(static_cast<std::uint32_t>(std::stoul(item)));
    return EnvironmentSpec::periodic(std::move(pattern));
  }
  if (kind == "qa_source" && sub == "copy") return EnvironmentSpec::copy_source();
  if (kind == "mdp" && sub == "coin") {
    auto [n0, d0] = parse_fraction(param("p0"), path, lineno);
    auto [n1, d1] = parse_fraction(param("p1"), path, lineno);
    return EnvironmentSpec::coin_bandit(n0, d0, n1, d1);
  }
  if (kind == "mdp" && sub == "det") return EnvironmentSpec::deterministic_bandit();
  if (kind == "blanket" && sub == "thermo8") return EnvironmentSpec::thermo8();
  data_error(path, lineno, "unknown environment '" + kind + " " + sub + "'");
}

inline std::vector<EnvironmentSpec> load_suite(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open suite file: " + path.string());
  std::vector<EnvironmentSpec> suite;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    suite.push_back(EnvironmentSpec::parse(line, path, lineno));
  }
  return suite;
}

inline std::uint64_t env_complexity(const EnvironmentSpec& env) { return env.encoding_len(); }

// ---- QA sources ----------------------------------------------------------

inline QADataset sample_qa(const EnvironmentSpec& source, std::size_t n, std::uint64_t seed,
                           std::uint32_t weight_width = 4) {
  if (source.kind() != EnvKind::QaSource) throw BadKindError("sample_qa needs a qa_source");
  if (n == 0) throw std::invalid_argument("sample size must be positive");
  CounterRng rng(seed, stream::kData);
  QADataset d;
  d.weight_width = weight_width;
  if (auto* b = std::get_if<BernoulliAnswerSpec>(&source.params)) {
    d.alphabet_size = 2;
    for (std::size_t i = 0; i < n; ++i)
      d.pairs.emplace_back("1", rng.bernoulli(b->num, b->den) ? 1u : 0u);
  } else if (auto* p = std::get_if<PeriodicAnswerSpec>(&source.params)) {
    d.alphabet_size = *std::max_element(p->pattern.begin(), p->pattern.end()) + 1;
    if (d.alphabet_size < 2) d.alphabet_size = 2;
    for (std::size_t i = 0; i < n; ++i)
      d.pairs.emplace_back(encode_nat(i + 1), p->pattern[i % p->pattern.size()]);
  } else {
    d.alphabet_size = 2;
    for (std::size_t i = 0; i < n; ++i) {
      Bits q;
      for (int b2 = 0; b2 < 3; ++b2) q.push_back(rng.next_below(2) ? '1' : '0');
      d.pairs.emplace_back(q, static_cast<std::uint32_t>(q.back() - '0'));
    }
  }
  return d;
}

// ---- MDPs ------------------------------------------------------------------

struct MdpStep {
  std::uint32_t observation = 0;
  std::uint32_t reward = 0;
  std::uint32_t next_state = 0;
};

inline std::uint32_t mdp_action_count(const EnvironmentSpec& env) {
  if (env.kind() != EnvKind::Mdp) throw BadKindError("not an mdp");
  return 2;
}

inline std::uint32_t mdp_reward_max(const EnvironmentSpec& env) {
  if (env.kind() != EnvKind::Mdp) throw BadKindError("not an mdp");
  return 1;
}

inline MdpStep env_step(const EnvironmentSpec& env, std::uint32_t state, std::uint32_t action,
                        CounterRng& rng) {
  if (env.kind() != EnvKind::Mdp) throw BadKindError("env_step needs an mdp");
  if (action >= mdp_action_count(env)) throw BadActionError("action out of range");
  MdpStep s;
  s.next_state = state;
  if (auto* c = std::get_if<CoinBanditSpec>(&env.params)) {
    bool pay = action == 0 ? rng.bernoulli(c->num0, c->den0) : rng.bernoulli(c->num1, c->den1);
    s.reward = pay ? 1 : 0;
  } else {
    s.reward = action;  // deterministic bandit: arm 1 pays 1
  }
  return s;
}

// ---- Blanket world ----------------------------------------------------------

// Thermo8: external states 0..7 drift by -1/0/+1 with probability .25/.5/.25,
// shifted by the action effect and clamped; the sensor reads the true state
// with probability 0.8, otherwise a uniformly chosen clamped neighbor.
struct BlanketWorld {
  static constexpr std::uint32_t kStates = 8;
  static constexpr std::uint32_t kActions = 3;
  enum Action : std::uint32_t { Idle = 0, Cool = 1, Heat = 2 };

  static int effect(std::uint32_t a) {
    switch (a) {
      case Cool: return -1;
      case Heat: return +1;
      default: return 0;
    }
  }

  static std::uint32_t clamp(int e) {
    return static_cast<std::uint32_t>(e < 0 ? 0 : (e >= static_cast<int>(kStates) ? kStates - 1 : e));
  }

  // p(e'|e,a), exact rational rows assembled from the drift distribution.
  static std::array<std::array<std::array<double, kStates>, kStates>, kActions> kernel() {
    std::array<std::array<std::array<double, kStates>, kStates>, kActions> t{};
    const double drift_p[3] = {0.25, 0.5, 0.25};
    for (std::uint32_t a = 0; a < kActions; ++a)
      for (std::uint32_t e = 0; e < kStates; ++e)
        for (int d = -1; d <= 1; ++d)
          t[a][e][clamp(static_cast<int>(e) + d + effect(a))] += drift_p[d + 1];
    return t;
  }

  // p(s|e).
  static std::array<std::array<double, kStates>, kStates> sensor() {
    std::array<std::array<double, kStates>, kStates> t{};
    for (std::uint32_t e = 0; e < kStates; ++e) {
      t[e][e] += 0.8;
      t[e][clamp(static_cast<int>(e) - 1)] += 0.1;
      t[e][clamp(static_cast<int>(e) + 1)] += 0.1;
    }
    return t;
  }

  static std::uint32_t sense(std::uint32_t e, CounterRng& rng) {
    if (rng.next_below(10) < 8) return e;
    int d = rng.next_below(2) == 0 ? -1 : 1;
    return clamp(static_cast<int>(e) + d);
  }

  static std::uint32_t transition(std::uint32_t e, std::uint32_t a, CounterRng& rng) {
    if (a >= kActions) throw BadActionError("blanket action out of range");
    std::uint64_t quarter = rng.next_below(4);
    int drift = quarter == 0 ? -1 : (quarter == 3 ? 1 : 0);
    return clamp(static_cast<int>(e) + drift + effect(a));
  }
};

// Observe-then-move convenience: the sensation comes from the current state,
// the transition applies the action afterwards.
inline std::pair<std::uint32_t, std::uint32_t> blanket_step(const EnvironmentSpec& env,
                                                            std::uint32_t e, std::uint32_t a,
                                                            CounterRng& rng) {
  if (env.kind() != EnvKind::BlanketWorld) throw BadKindError("blanket_step needs a blanket world");
  std::uint32_t s = BlanketWorld::sense(e, rng);
  std::uint32_t e2 = BlanketWorld::transition(e, a, rng);
  return {s, e2};
}

}  // namespace uind

#endif
