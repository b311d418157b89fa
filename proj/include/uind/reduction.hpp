#ifndef UIND_REDUCTION_HPP
#define UIND_REDUCTION_HPP

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "uind/coding.hpp"
#include "uind/environments.hpp"
#include "uind/induction.hpp"

namespace uind {

class ChronologyTooShortError : public std::runtime_error {
 public:
  ChronologyTooShortError() : std::runtime_error("reduction needs a chronology of length >= 2") {}
};

// Interaction record [(s_t, r_t, a_t)], 1-based like the construction that
// consumes it.
struct Chronology {
  struct Step {
    std::uint32_t s = 0;
    std::uint32_t r = 0;
    std::uint32_t a = 0;
  };

  std::vector<Step> steps;
  std::uint32_t sensory_size = 1;
  std::uint32_t action_size = 2;
  std::uint32_t reward_max = 1;

  std::size_t size() const { return steps.size(); }

  void append(std::uint32_t s, std::uint32_t r, std::uint32_t a) {
    if (s >= sensory_size || a >= action_size || r > reward_max)
      throw std::invalid_argument("chronology entry outside declared alphabets");
    steps.push_back(Step{s, r, a});
  }

  const Step& at(std::size_t i) const {  // 1-based
    if (i < 1 || i > steps.size()) throw std::out_of_range("chronology index out of range");
    return steps[i - 1];
  }

  // Header "S=<int> A=<int> rmax=<int>", then "s<TAB>r<TAB>a" per step.
  static Chronology load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open chronology file: " + path.string());
    Chronology c;
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) data_error(path, 1, "missing header line");
    if (std::sscanf(line.c_str(), "S=%u A=%u rmax=%u", &c.sensory_size, &c.action_size,
                    &c.reward_max) != 3)
      data_error(path, lineno, "header must be 'S=<int> A=<int> rmax=<int>'");
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::uint32_t s, r, a;
      if (std::sscanf(line.c_str(), "%u\t%u\t%u", &s, &r, &a) != 3)
        data_error(path, lineno, "expected 's<TAB>r<TAB>a'");
      try {
        c.append(s, r, a);
      } catch (const std::invalid_argument& e) {
        data_error(path, lineno, e.what());
      }
    }
    return c;
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write chronology file: " + path.string());
    out << "S=" << sensory_size << " A=" << action_size << " rmax=" << reward_max << "\n";
    for (const Step& st : steps) out << st.s << '\t' << st.r << '\t' << st.a << "\n";
  }
};

// r_c(C, i, j) = sum of rewards over steps i..j, 1-based inclusive.
inline std::uint64_t cumulative_reward(const Chronology& c, std::size_t i, std::size_t j) {
  if (i < 1 || i > j || j > c.size()) throw std::out_of_range("cumulative reward range out of bounds");
  std::uint64_t total = 0;
  for (std::size_t k = i; k <= j; ++k) total += c.at(k).r;
  return total;
}

namespace detail {

inline std::uint32_t field_width(std::uint32_t alphabet) {
  return alphabet <= 1 ? 0u : static_cast<std::uint32_t>(std::bit_width(alphabet - 1));
}

inline void append_fixed(Bits& out, std::uint32_t value, std::uint32_t width) {
  for (std::uint32_t b = width; b-- > 0;) out.push_back((value >> b) & 1 ? '1' : '0');
}

// The action field is padded to a fixed width with a guard run of ones so
// every question's length depends only on (i, j); short early-history
// questions then stay at least as wide as the operators' output window.
constexpr std::uint32_t kActionGuardBits = 14;

inline void append_history(Bits& out, const Chronology& c, std::size_t upto) {
  const std::uint32_t ws = field_width(c.sensory_size);
  const std::uint32_t wr = field_width(c.reward_max + 1);
  const std::uint32_t wa = field_width(c.action_size);
  for (std::size_t t = 1; t <= upto; ++t) {
    const auto& st = c.at(t);
    out.push_back('0');  // fixed tuple lead-in, then fixed-width s, r, a fields
    append_fixed(out, st.s, ws);
    append_fixed(out, st.r, wr);
    append_fixed(out, st.a, wa);
  }
}

inline void append_action_field(Bits& out, const Chronology& c, std::uint32_t a) {
  append_fixed(out, a, std::max(1u, field_width(c.action_size)));
  out.append(kActionGuardBits, '1');
}

}  // namespace detail

// Question for the (i, j) pair: history C_{1:i-1}, the action a_i, then
// gamma-coded i and j.
inline Bits reduction_question(const Chronology& c, std::size_t i, std::size_t j) {
  Bits q;
  detail::append_history(q, c, i - 1);
  detail::append_action_field(q, c, c.at(i).a);
  q += encode_nat(i);
  q += encode_nat(j);
  return q;
}

// Candidate question the action chooser scores: full history, a hypothetical
// next action, and the window indices (n+1, n+horizon).
inline Bits candidate_question(const Chronology& c, std::uint32_t action, std::size_t horizon) {
  Bits q;
  detail::append_history(q, c, c.size());
  detail::append_action_field(q, c, action);
  q += encode_nat(c.size() + 1);
  q += encode_nat(c.size() + horizon);
  return q;
}

// One QA pair per (i, j) with 1 < i <= j <= n: n(n-1)/2 pairs whose answers
// are the cumulative rewards.
inline QADataset build_reduction_dataset(const Chronology& c, std::uint32_t weight_width = 3) {
  const std::size_t n = c.size();
  if (n < 2) throw ChronologyTooShortError();
  QADataset d;
  d.alphabet_size = static_cast<std::uint32_t>(n) * c.reward_max + 1;
  d.weight_width = weight_width;
  for (std::size_t i = 2; i <= n; ++i)
    for (std::size_t j = i; j <= n; ++j)
      d.pairs.emplace_back(reduction_question(c, i, j),
                           static_cast<std::uint32_t>(cumulative_reward(c, i, j)));
  return d;
}

// Argmax over candidate actions of the expected cumulative reward under the
// normalized mixture; ties fall to the smallest action index. Candidates on
// which no operator applies never win; if none applies anywhere the error
// propagates.
inline std::uint32_t select_action(const Chronology& c, const OperatorEnsemble& ens,
                                   std::size_t horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  double best = -std::numeric_limits<double>::infinity();
  std::uint32_t best_action = 0;
  bool any = false;
  for (std::uint32_t a = 0; a < c.action_size; ++a) {
    Bits q = candidate_question(c, a, horizon);
    double expected;
    try {
      Prediction pred = predict(ens, q);
      expected = 0.0;
      for (std::uint32_t r = 0; r < ens.alphabet_size; ++r) expected += r * pred.normalized[r];
    } catch (const NoOperatorAppliesError&) {
      continue;
    }
    any = true;
    if (expected > best) {
      best = expected;
      best_action = a;
    }
  }
  if (!any) throw NoOperatorAppliesError();
  return best_action;
}

enum class AgentPolicy { Induce, Random };

struct EpisodeResult {
  Chronology chronology;
  std::uint64_t total_reward = 0;
};

// Perceive-reduce-induce-act loop: after two random warm-up actions, every
// step rebuilds the reduction dataset from the chronology so far, searches
// operators afresh, and takes the argmax action. The warm-up draws without
// replacement (a seeded sweep of the action set, the usual bandit
// initialization) so the record opens with evidence on distinct actions.
inline EpisodeResult rl_episode(const EnvironmentSpec& env, std::size_t steps,
                                const EnumBudget& budget, std::size_t horizon, std::uint64_t seed,
                                AgentPolicy policy = AgentPolicy::Induce, unsigned jobs = 1,
                                std::uint32_t reduction_weight_width = 3) {
  if (env.kind() != EnvKind::Mdp) throw BadKindError("rl_episode needs an mdp environment");
  CounterRng env_rng(seed, stream::kEnv);
  CounterRng policy_rng(seed, stream::kPolicy);
  EpisodeResult ep;
  ep.chronology.sensory_size = 1;
  ep.chronology.action_size = mdp_action_count(env);
  ep.chronology.reward_max = mdp_reward_max(env);
  const std::uint32_t n_actions = ep.chronology.action_size;
  std::uint32_t state = 0;
  for (std::size_t t = 1; t <= steps; ++t) {
    std::uint32_t action;
    if (policy == AgentPolicy::Random) {
      action = static_cast<std::uint32_t>(policy_rng.next_below(n_actions));
    } else if (t <= 2) {
      std::vector<std::uint32_t> unseen;
      for (std::uint32_t a = 0; a < n_actions; ++a) {
        bool taken = false;
        for (const auto& st : ep.chronology.steps) taken |= st.a == a;
        if (!taken) unseen.push_back(a);
      }
      if (unseen.empty())
        action = static_cast<std::uint32_t>(policy_rng.next_below(n_actions));
      else
        action = unseen[policy_rng.next_below(unseen.size())];
    } else {
      QADataset d = build_reduction_dataset(ep.chronology, reduction_weight_width);
      OperatorEnsemble ens = find_operators(d, budget, jobs);
      action = select_action(ep.chronology, ens, horizon);
    }
    MdpStep step = env_step(env, state, action, env_rng);
    state = step.next_state;
    ep.chronology.append(step.observation, step.reward, action);
    ep.total_reward += step.reward;
  }
  return ep;
}

}  // namespace uind

#endif
