#ifndef UIND_MEASURE_HPP
#define UIND_MEASURE_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "uind/environments.hpp"
#include "uind/induction.hpp"
#include "uind/reduction.hpp"

namespace uind {

class EmptySuiteError : public std::runtime_error {
 public:
  EmptySuiteError() : std::runtime_error("environment suite is empty") {}
};

struct MeasureRow {
  std::string env;
  std::uint64_t encoding_len = 0;
  double weight = 0;  // 2^(-encoding_len)
  double value = 0;   // V-hat or mean Psi
  double std_error = 0;
};

struct MeasureReport {
  std::vector<MeasureRow> rows;
  double total = 0;       // sum of weight * value
  double weight_sum = 0;  // < 1: the shipped suite is a finite stand-in
  std::vector<std::pair<std::string, std::string>> config;
};

// A policy maps (time step, observation) to an action; rng draws must come
// from the supplied stream so episodes replay exactly.
using BanditPolicy = std::function<std::uint32_t(std::uint64_t t, std::uint32_t obs, CounterRng& rng)>;

inline BanditPolicy always_arm(std::uint32_t arm) {
  return [arm](std::uint64_t, std::uint32_t, CounterRng&) { return arm; };
}

inline BanditPolicy uniform_random_policy(std::uint32_t n_actions) {
  return [n_actions](std::uint64_t, std::uint32_t, CounterRng& rng) {
    return static_cast<std::uint32_t>(rng.next_below(n_actions));
  };
}

// Discounted value estimate V-hat = mean over episodes of sum gamma^t r_t
// (t from 1), truncated at horizon T; the complexity-weighted total follows
// the 2^-H weighting over the suite.
inline MeasureReport legg_hutter(const BanditPolicy& policy, const std::vector<EnvironmentSpec>& suite,
                                 double gamma, std::uint64_t horizon, std::uint64_t episodes,
                                 std::uint64_t seed) {
  if (suite.empty()) throw EmptySuiteError();
  if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("gamma must lie in (0,1)");
  if (horizon < 1 || episodes < 1) throw std::invalid_argument("horizon and episodes must be positive");
  MeasureReport rep;
  for (std::size_t env_idx = 0; env_idx < suite.size(); ++env_idx) {
    const EnvironmentSpec& env = suite[env_idx];
    if (env.kind() != EnvKind::Mdp) throw BadKindError("legg_hutter suite must contain mdps");
    double sum = 0, sum_sq = 0;
    for (std::uint64_t ep = 0; ep < episodes; ++ep) {
      CounterRng env_rng(seed + ep, stream::kEnv + 16 * env_idx);
      CounterRng pol_rng(seed + ep, stream::kPolicy + 16 * env_idx);
      double v = 0, discount = 1;
      std::uint32_t state = 0, obs = 0;
      for (std::uint64_t t = 1; t <= horizon; ++t) {
        discount *= gamma;
        std::uint32_t a = policy(t, obs, pol_rng);
        MdpStep step = env_step(env, state, a, env_rng);
        v += discount * step.reward;
        state = step.next_state;
        obs = step.observation;
      }
      sum += v;
      sum_sq += v * v;
    }
    MeasureRow row;
    row.env = env.name();
    row.encoding_len = env.encoding_len();
    row.weight = std::ldexp(1.0, -static_cast<int>(row.encoding_len));
    row.value = sum / static_cast<double>(episodes);
    double var = episodes > 1 ? (sum_sq - sum * sum / static_cast<double>(episodes)) /
                                    static_cast<double>(episodes - 1)
                              : 0.0;
    row.std_error = std::sqrt(std::max(0.0, var) / static_cast<double>(episodes));
    rep.total += row.weight * row.value;
    rep.weight_sum += row.weight;
    rep.rows.push_back(row);
  }
  return rep;
}

// Operator-induction fitness: per source, mean Psi over seeded samples under
// the engine budgets; sources where no operator is found score zero.
inline MeasureReport operator_fitness(const EnumBudget& budget, std::uint32_t weight_width,
                                      const std::vector<EnvironmentSpec>& suite, std::size_t n,
                                      std::uint64_t n_seeds, std::uint64_t seed0,
                                      unsigned jobs = 1) {
  if (suite.empty()) throw EmptySuiteError();
  if (n < 1 || n_seeds < 1) throw std::invalid_argument("sample size and seed count must be positive");
  MeasureReport rep;
  for (const EnvironmentSpec& env : suite) {
    if (env.kind() != EnvKind::QaSource) throw BadKindError("operator_fitness suite must contain qa_sources");
    double sum = 0, sum_sq = 0;
    for (std::uint64_t s = 0; s < n_seeds; ++s) {
      QADataset d = sample_qa(env, n, seed0 + s, weight_width);
      double psi_total = 0;
      try {
        psi_total = find_operators(d, budget, jobs).Psi;
      } catch (const EmptyEnsembleError&) {
        psi_total = 0;  // recorded as zero fitness
      }
      sum += psi_total;
      sum_sq += psi_total * psi_total;
    }
    MeasureRow row;
    row.env = env.name();
    row.encoding_len = env.encoding_len();
    row.weight = std::ldexp(1.0, -static_cast<int>(row.encoding_len));
    row.value = sum / static_cast<double>(n_seeds);
    double var = n_seeds > 1 ? (sum_sq - sum * sum / static_cast<double>(n_seeds)) /
                                   static_cast<double>(n_seeds - 1)
                             : 0.0;
    row.std_error = std::sqrt(std::max(0.0, var) / static_cast<double>(n_seeds));
    rep.total += row.weight * row.value;
    rep.weight_sum += row.weight;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace uind

#endif
