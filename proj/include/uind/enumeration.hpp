#ifndef UIND_ENUMERATION_HPP
#define UIND_ENUMERATION_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "uind/dyadic.hpp"
#include "uind/parallel.hpp"
#include "uind/refmachine.hpp"

namespace uind {

struct EnumBudget {
  std::uint64_t max_code_len = 15;  // bits, multiple of 3
  std::uint64_t step_budget = 100;  // interpreter steps per program
  std::uint64_t output_limit = 64;  // emitted bits per program

  void validate() const {
    if (max_code_len == 0 || step_budget == 0 || output_limit == 0)
      throw std::invalid_argument("enumeration budget fields must be strictly positive");
    if (max_code_len % kOpcodeBits != 0)
      throw std::invalid_argument("max_code_len must be a multiple of 3");
  }

  friend bool operator==(const EnumBudget&, const EnumBudget&) = default;
};

struct ProbEstimate {
  Dyadic value;                       // exact sum of 2^(-code_len)
  std::uint64_t programs_counted = 0;
  EnumBudget budget;
};

struct ComplexityEstimate {
  std::optional<std::uint32_t> h;      // bits; absent if no clean witness
  std::optional<double> h_star;        // -log2 of the prefix probability
  std::optional<Program> witness;      // canonical-order-first minimal program
  ProbEstimate prefix_prob;
};

namespace detail {

inline constexpr std::array<std::uint64_t, 21> kPow7 = [] {
  std::array<std::uint64_t, 21> t{};
  t[0] = 1;
  for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] * 7;
  return t;
}();

inline std::uint32_t max_body_len(std::uint64_t max_code_len) {
  return static_cast<std::uint32_t>(max_code_len / kOpcodeBits - 1);  // non-HALT opcodes
}

// Decodes the base-7 rank of a body into opcodes (MSB digit first) and
// builds the jump table. Returns false for bracket-invalid bodies, which
// have no semantics and zero prior mass.
inline bool rank_to_program(std::uint32_t body_len, std::uint64_t rank, Opcode* ops,
                            std::int32_t* match) {
  int depth = 0;
  std::int32_t open[32];
  for (std::uint32_t i = 0; i < body_len; ++i) {
    auto d = static_cast<std::uint32_t>(rank / kPow7[body_len - 1 - i] % 7);
    ops[i] = static_cast<Opcode>(d);
    match[i] = -1;
    if (ops[i] == Opcode::Loop) {
      open[depth++] = static_cast<std::int32_t>(i);
    } else if (ops[i] == Opcode::EndLoop) {
      if (depth == 0) return false;
      std::int32_t j = open[--depth];
      match[i] = j;
      match[static_cast<std::uint32_t>(j)] = static_cast<std::int32_t>(i);
    }
  }
  if (depth != 0) return false;
  ops[body_len] = Opcode::Halt;
  match[body_len] = -1;
  return true;
}

}  // namespace detail

// A program materialized inside an enumeration sweep. (body_len, rank) is
// its canonical coordinate: ranks order lexicographically within a length.
struct ProgramView {
  std::span<const Opcode> ops;  // includes the final Halt
  std::span<const std::int32_t> match;
  std::uint32_t body_len = 0;
  std::uint64_t rank = 0;

  std::uint64_t code_len() const { return kOpcodeBits * (body_len + 1ull); }
  Program to_program() const {
    Program p;
    p.ops.assign(ops.begin(), ops.end());
    p.match.assign(match.begin(), match.end());
    return p;
  }
};

// Yields every valid program with code_len <= max_code_len exactly once in
// canonical order. The visitor returns false to stop early.
template <class Visitor>
void enumerate_programs(std::uint64_t max_code_len, Visitor&& visit) {
  EnumBudget{max_code_len, 1, 1}.validate();
  std::uint32_t max_body = detail::max_body_len(max_code_len);
  Opcode ops[32];
  std::int32_t match[32];
  for (std::uint32_t body = 0; body <= max_body; ++body) {
    for (std::uint64_t rank = 0; rank < detail::kPow7[body]; ++rank) {
      if (!detail::rank_to_program(body, rank, ops, match)) continue;
      ProgramView v{std::span(ops, body + 1), std::span(match, body + 1), body, rank};
      if (!visit(v)) return;
    }
  }
}

// Parallel sweep over the same program set. Workers see disjoint contiguous
// canonical ranges in ascending worker order; merging per-worker results by
// worker index reproduces the canonical order bit-exactly.
template <class WorkerFn>
void sweep_programs(std::uint64_t max_code_len, unsigned jobs, WorkerFn&& fn) {
  EnumBudget{max_code_len, 1, 1}.validate();
  std::uint32_t max_body = detail::max_body_len(max_code_len);
  std::vector<std::uint64_t> cum(max_body + 2, 0);  // cum[b] = candidates with body < b
  for (std::uint32_t b = 0; b <= max_body; ++b) cum[b + 1] = cum[b] + detail::kPow7[b];
  parallel_chunks(cum[max_body + 1], jobs, [&](unsigned worker, std::uint64_t begin, std::uint64_t end) {
    Opcode ops[32];
    std::int32_t match[32];
    std::uint32_t body = 0;
    while (cum[body + 1] <= begin) ++body;
    for (std::uint64_t g = begin; g < end;) {
      std::uint64_t rank = g - cum[body];
      if (detail::rank_to_program(body, rank, ops, match)) {
        ProgramView v{std::span(ops, body + 1), std::span(match, body + 1), body, rank};
        fn(worker, v);
      }
      ++g;
      if (g == cum[body + 1] && g < end) ++body;
    }
  });
}

// Counts programs whose emitted output begins with x (prefix semantics of
// the universal prior): non-halting and faulting programs count once the
// prefix exists. Runs stop as soon as |x| bits are out.
inline ProbEstimate algorithmic_probability(std::string_view x, const EnumBudget& budget,
                                            std::string_view input = {},
                                            unsigned jobs = 1) {
  budget.validate();
  require_bits(x, "target");
  if (budget.output_limit < x.size())
    throw std::invalid_argument("output_limit must be at least the target length");
  struct Partial {
    Dyadic mass;
    std::uint64_t count = 0;
  };
  std::vector<Partial> parts(jobs ? jobs : 1);
  sweep_programs(budget.max_code_len, jobs, [&](unsigned worker, const ProgramView& v) {
    thread_local Machine machine;
    std::uint64_t steps = 0;
    FaultKind fault{};
    RunStatus st = machine.run_into(v.ops, v.match, input, budget.step_budget, x.size(), &steps, &fault);
    if (st == RunStatus::OutputLimitReached && machine.output() == x) {
      parts[worker].mass += Dyadic::pow2_neg(static_cast<unsigned>(v.code_len()));
      ++parts[worker].count;
    }
  });
  ProbEstimate est;
  est.budget = budget;
  for (const Partial& p : parts) {
    est.value += p.mass;
    est.programs_counted += p.count;
  }
  return est;
}

// h: least code length of a program that halts cleanly with output exactly
// x. h_star: -log2 of the prefix probability. Both are budget-relative.
inline ComplexityEstimate algorithmic_complexity(std::string_view x, const EnumBudget& budget,
                                                 unsigned jobs = 1) {
  budget.validate();
  require_bits(x, "target");
  struct Partial {
    Dyadic mass;
    std::uint64_t count = 0;
    std::optional<CanonicalKey> best_key;
    Program best;
  };
  std::vector<Partial> parts(jobs ? jobs : 1);
  sweep_programs(budget.max_code_len, jobs, [&](unsigned worker, const ProgramView& v) {
    thread_local Machine machine;
    Partial& part = parts[worker];
    std::uint64_t steps = 0;
    FaultKind fault{};
    RunStatus st = machine.run_into(v.ops, v.match, {}, budget.step_budget, x.size() + 1, &steps, &fault);
    std::string_view out = machine.output();
    if (out.size() >= x.size() && out.substr(0, x.size()) == x) {
      part.mass += Dyadic::pow2_neg(static_cast<unsigned>(v.code_len()));
      ++part.count;
    }
    if (st == RunStatus::Halted && out == x && !part.best_key) {
      part.best_key = canonical_order_key(v.ops);
      part.best = v.to_program();
    }
  });
  ComplexityEstimate est;
  est.prefix_prob.budget = budget;
  const Partial* best = nullptr;
  for (const Partial& p : parts) {
    est.prefix_prob.value += p.mass;
    est.prefix_prob.programs_counted += p.count;
    if (p.best_key && (!best || p.best_key < best->best_key)) best = &p;
  }
  if (best) {
    est.h = best->best_key->code_len;
    est.witness = best->best;
  }
  if (!est.prefix_prob.value.is_zero()) {
    const Dyadic& v = est.prefix_prob.value;
    est.h_star = static_cast<double>(v.scale()) - std::log2(static_cast<double>(v.num()));
  }
  return est;
}

struct LevinResult {
  Program program;
  RunResult result;
  std::uint64_t phase = 0;
  std::uint64_t cumulative_steps = 0;
};

using GoalPredicate = std::function<bool(const Program&, const RunResult&)>;

// Phased universal search: in phase k every program with code_len <= k
// receives floor(2^k * 2^-code_len) fresh steps; within a phase programs run
// in canonical order. Steps actually consumed count against total_budget.
inline std::optional<LevinResult> levin_search(const GoalPredicate& goal, std::string_view input,
                                               std::uint64_t total_budget,
                                               std::uint64_t output_limit = 64) {
  if (total_budget < 1) throw std::invalid_argument("total budget must be at least 1");
  std::uint64_t cum = 0;
  Machine machine;
  for (std::uint64_t phase = 1; phase < 63; ++phase) {
    std::uint64_t reachable_len = (phase / kOpcodeBits) * kOpcodeBits;
    if (reachable_len < kOpcodeBits) continue;  // no program earns a full step yet
    std::optional<LevinResult> found;
    bool exhausted = false;
    enumerate_programs(reachable_len, [&](const ProgramView& v) {
      std::uint64_t grant = std::uint64_t{1} << (phase - v.code_len());
      std::uint64_t steps = 0;
      FaultKind fault{};
      RunStatus st = machine.run_into(v.ops, v.match, input, grant, output_limit, &steps, &fault);
      RunResult r;
      r.status = st;
      r.output = Bits(machine.output());
      r.steps_used = steps;
      if (st == RunStatus::Fault) r.fault = fault;
      Program p = v.to_program();
      cum += steps;
      if (goal(p, r)) {
        found = LevinResult{std::move(p), std::move(r), phase, cum};
        return false;
      }
      if (cum > total_budget) {
        exhausted = true;
        return false;
      }
      return true;
    });
    if (found) return found;
    if (exhausted) return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace uind

#endif
