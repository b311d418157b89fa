#ifndef UIND_INDUCTION_HPP
#define UIND_INDUCTION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "uind/coding.hpp"
#include "uind/enumeration.hpp"
#include "uind/refmachine.hpp"

namespace uind {

class EmptyEnsembleError : public std::runtime_error {
 public:
  EmptyEnsembleError() : std::runtime_error("no valid operator found within budget") {}
};
class NoOperatorAppliesError : public std::runtime_error {
 public:
  NoOperatorAppliesError() : std::runtime_error("no ensemble operator applies to the question") {}
};
class ZeroDenominatorError : public std::runtime_error {
 public:
  ZeroDenominatorError() : std::runtime_error("set has zero probability mass at this budget") {}
};
class ZeroMassError : public std::runtime_error {
 public:
  ZeroMassError() : std::runtime_error("no continuation has probability mass at this budget") {}
};

[[noreturn]] inline void data_error(const std::filesystem::path& path, std::size_t line,
                                    const std::string& msg) {
  throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + msg);
}

// Supervised question/answer data. Answers are symbol indices below
// alphabet_size; weight_width is the per-symbol width of the weight block
// operators must emit.
struct QADataset {
  std::vector<std::pair<Bits, std::uint32_t>> pairs;
  std::uint32_t alphabet_size = 2;
  std::uint32_t weight_width = 4;

  void validate() const {
    if (pairs.empty()) throw std::invalid_argument("dataset needs at least one pair");
    if (alphabet_size < 1) throw std::invalid_argument("alphabet size must be positive");
    if (weight_width < 1 || weight_width > 31)
      throw std::invalid_argument("weight width out of range");
    for (const auto& [q, a] : pairs) {
      require_bits(q, "question");
      if (a >= alphabet_size) throw std::invalid_argument("answer index outside alphabet");
    }
  }

  std::uint64_t output_window() const {
    return static_cast<std::uint64_t>(alphabet_size) * weight_width;
  }

  std::vector<Bits> distinct_questions() const {
    std::vector<Bits> qs;
    qs.reserve(pairs.size());
    for (const auto& [q, a] : pairs) qs.push_back(q);
    std::sort(qs.begin(), qs.end());
    qs.erase(std::unique(qs.begin(), qs.end()), qs.end());
    return qs;
  }

  std::uint64_t digest() const {
    std::uint64_t h = fnv1a64_u64(alphabet_size, fnv1a64_u64(weight_width));
    for (const auto& [q, a] : pairs) h = fnv1a64_u64(a, fnv1a64(q, h));
    return h;
  }

  // Line format: header "k=<int> w=<int>", then "question-bits<TAB>answer".
  static QADataset load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path.string());
    QADataset d;
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) data_error(path, 1, "missing header line");
    ++lineno;
    if (std::sscanf(line.c_str(), "k=%u w=%u", &d.alphabet_size, &d.weight_width) != 2)
      data_error(path, lineno, "header must be 'k=<int> w=<int>'");
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      auto tab = line.find('\t');
      if (tab == std::string::npos) data_error(path, lineno, "expected 'question<TAB>answer'");
      Bits q = line.substr(0, tab);
      if (!is_bits(q)) data_error(path, lineno, "question is not a bit string");
      std::uint32_t a = 0;
      try {
        a = static_cast<std::uint32_t>(std::stoul(line.substr(tab + 1)));
      } catch (const std::exception&) {
        data_error(path, lineno, "answer is not an integer");
      }
      if (a >= d.alphabet_size) data_error(path, lineno, "answer index outside alphabet");
      d.pairs.emplace_back(std::move(q), a);
    }
    if (d.pairs.empty()) data_error(path, lineno + 1, "dataset has no pairs");
    return d;
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path.string());
    out << "k=" << alphabet_size << " w=" << weight_width << "\n";
    for (const auto& [q, a] : pairs) out << q << '\t' << a << "\n";
  }
};

// A program read as a conditional distribution: on each question it must
// emit alphabet_size unsigned weight_width-bit weights (MSB first); the cpdf
// is the normalized weight vector.
struct Operator {
  Program program;
  std::uint64_t code_len = 0;
  bool reads_input = false;
  // Raw weight rows per distinct question, sorted by question.
  std::vector<std::pair<Bits, std::vector<std::uint32_t>>> table;
  double psi = 0.0;

  const std::vector<std::uint32_t>* weights_for(std::string_view q) const {
    auto it = std::lower_bound(table.begin(), table.end(), q,
                               [](const auto& row, std::string_view key) { return row.first < key; });
    if (it == table.end() || it->first != q) return nullptr;
    return &it->second;
  }

  double cpdf(std::uint32_t answer, std::string_view q) const {
    const auto* w = weights_for(q);
    if (!w) throw std::out_of_range("question not in operator table");
    double sum = std::accumulate(w->begin(), w->end(), 0.0);
    return (*w)[answer] / sum;
  }
};

struct OperatorEnsemble {
  std::vector<Operator> operators;  // canonical order, deduplicated
  double Psi = 0.0;
  EnumBudget budget;
  std::uint32_t alphabet_size = 2;
  std::uint32_t weight_width = 4;
};

namespace detail {

struct DatasetIndex {
  std::vector<Bits> questions;                            // sorted distinct
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;  // (question idx, answer)

  explicit DatasetIndex(const QADataset& d) {
    questions = d.distinct_questions();
    pairs.reserve(d.pairs.size());
    for (const auto& [q, a] : d.pairs) {
      auto it = std::lower_bound(questions.begin(), questions.end(), q);
      pairs.emplace_back(static_cast<std::uint32_t>(it - questions.begin()), a);
    }
  }
};

inline bool parse_weights(std::string_view emitted, std::uint32_t k, std::uint32_t w,
                          std::vector<std::uint32_t>& out) {
  if (emitted.size() < static_cast<std::size_t>(k) * w) return false;
  out.clear();
  out.reserve(k);
  bool any = false;
  std::size_t pos = 0;
  for (std::uint32_t i = 0; i < k; ++i) {
    std::uint32_t v = 0;
    for (std::uint32_t b = 0; b < w; ++b) v = (v << 1) | static_cast<std::uint32_t>(emitted[pos++] - '0');
    any |= v != 0;
    out.push_back(v);
  }
  return any;  // all-zero weight rows carry no distribution
}

// Evaluates a candidate against the indexed dataset; cheap rejection before
// any Operator is materialized. Returns the weight rows per distinct
// question, or false if the candidate is invalid on some question.
inline bool eval_weight_rows(Machine& machine, std::span<const Opcode> ops,
                             std::span<const std::int32_t> match, bool reads_input,
                             const DatasetIndex& idx, std::uint32_t k, std::uint32_t w,
                             std::uint64_t step_budget,
                             std::vector<std::vector<std::uint32_t>>& rows) {
  const std::uint64_t window = static_cast<std::uint64_t>(k) * w;
  rows.assign(idx.questions.size(), {});
  std::uint64_t steps = 0;
  FaultKind fault{};
  for (std::size_t qi = 0; qi < idx.questions.size(); ++qi) {
    if (reads_input || qi == 0) {
      machine.run_into(ops, match, idx.questions[qi], step_budget, window, &steps, &fault);
      if (!parse_weights(machine.output(), k, w, rows[qi])) return false;
    } else {
      rows[qi] = rows[0];  // input-blind programs emit one row for all questions
    }
  }
  return true;
}

inline double psi_from_rows(const DatasetIndex& idx,
                            const std::vector<std::vector<std::uint32_t>>& rows,
                            std::uint64_t code_len) {
  double psi = std::ldexp(1.0, -static_cast<int>(code_len));
  for (const auto& [qi, a] : idx.pairs) {
    const auto& w = rows[qi];
    double sum = std::accumulate(w.begin(), w.end(), 0.0);
    psi *= w[a] / sum;
  }
  return psi;
}

// Dedup signature: per-question weight rows reduced to lowest terms, so rows
// describing the same cpdf compare equal with integer arithmetic.
inline std::string cpdf_signature(const std::vector<std::vector<std::uint32_t>>& rows) {
  std::string sig;
  for (const auto& row : rows) {
    std::uint32_t g = 0;
    for (std::uint32_t v : row) g = std::gcd(g, v);
    for (std::uint32_t v : row) {
      std::uint32_t r = v / g;
      sig.append(reinterpret_cast<const char*>(&r), sizeof(r));
    }
    sig.push_back('\x01');
  }
  return sig;
}

}  // namespace detail

// Runs p on every distinct question and reads the emitted weight block.
// Returns nullopt when the program underflows the window or emits an
// all-zero row anywhere (semantic invalidity, not an error).
inline std::optional<Operator> eval_operator(const Program& p, const QADataset& d,
                                             std::uint64_t step_budget) {
  d.validate();
  detail::DatasetIndex idx(d);
  Machine machine;
  std::vector<std::vector<std::uint32_t>> rows;
  bool reads = p.reads_input();
  if (!detail::eval_weight_rows(machine, p.ops, p.match, reads, idx, d.alphabet_size,
                                d.weight_width, step_budget, rows))
    return std::nullopt;
  Operator op;
  op.program = p;
  op.code_len = p.code_len();
  op.reads_input = reads;
  for (std::size_t qi = 0; qi < idx.questions.size(); ++qi)
    op.table.emplace_back(idx.questions[qi], rows[qi]);
  op.psi = detail::psi_from_rows(idx, rows, op.code_len);
  return op;
}

// Evaluates every enumerated program as an operator, keeps the valid ones,
// and dedups identical cpdfs keeping the canonical-order-first (shortest)
// representative. Psi accumulates in canonical order so enlarging the budget
// can only extend the summation.
inline OperatorEnsemble find_operators(const QADataset& d, const EnumBudget& budget,
                                       unsigned jobs = 1) {
  d.validate();
  budget.validate();
  detail::DatasetIndex idx(d);
  const std::uint32_t k = d.alphabet_size, w = d.weight_width;

  struct Candidate {
    std::uint32_t body_len;
    std::uint64_t rank;
    std::vector<std::vector<std::uint32_t>> rows;
  };
  std::vector<std::vector<Candidate>> found(jobs ? jobs : 1);
  sweep_programs(budget.max_code_len, jobs, [&](unsigned worker, const ProgramView& v) {
    thread_local Machine machine;
    thread_local std::vector<std::vector<std::uint32_t>> rows;
    bool reads = false;
    for (Opcode op : v.ops)
      if (op == Opcode::Read) { reads = true; break; }
    if (!detail::eval_weight_rows(machine, v.ops, v.match, reads, idx, k, w,
                                  budget.step_budget, rows))
      return;
    found[worker].push_back(Candidate{v.body_len, v.rank, rows});
  });

  OperatorEnsemble ens;
  ens.budget = budget;
  ens.alphabet_size = k;
  ens.weight_width = w;
  std::vector<const Candidate*> ordered;
  for (const auto& per_worker : found)
    for (const auto& c : per_worker) ordered.push_back(&c);
  std::sort(ordered.begin(), ordered.end(), [](const Candidate* a, const Candidate* b) {
    return std::tie(a->body_len, a->rank) < std::tie(b->body_len, b->rank);
  });

  std::unordered_set<std::string> seen;
  Opcode ops[32];
  std::int32_t match[32];
  for (const Candidate* c : ordered) {
    if (!seen.insert(detail::cpdf_signature(c->rows)).second) continue;
    detail::rank_to_program(c->body_len, c->rank, ops, match);
    Operator op;
    op.program.ops.assign(ops, ops + c->body_len + 1);
    op.program.match.assign(match, match + c->body_len + 1);
    op.code_len = op.program.code_len();
    op.reads_input = op.program.reads_input();
    for (std::size_t qi = 0; qi < idx.questions.size(); ++qi)
      op.table.emplace_back(idx.questions[qi], c->rows[qi]);
    op.psi = detail::psi_from_rows(idx, c->rows, op.code_len);
    ens.Psi += op.psi;
    ens.operators.push_back(std::move(op));
  }
  if (ens.operators.empty()) throw EmptyEnsembleError();
  return ens;
}

struct Prediction {
  std::vector<double> raw;         // paper-form mixture masses, unnormalized
  std::vector<double> normalized;  // raw rescaled to sum to 1
  std::uint32_t applied = 0;       // operators that produced a row for q
};

// Mixture prediction sum_j psi_j O_j(a|q). Operators without a cached row
// re-run their program on q; failures contribute nothing.
inline Prediction predict(const OperatorEnsemble& ens, std::string_view q) {
  if (ens.operators.empty()) throw EmptyEnsembleError();
  const std::uint32_t k = ens.alphabet_size, w = ens.weight_width;
  Prediction pred;
  pred.raw.assign(k, 0.0);
  std::vector<double> scaled(k, 0.0);
  double psi_max = 0.0;
  for (const Operator& op : ens.operators) psi_max = std::max(psi_max, op.psi);
  if (psi_max == 0.0) throw NoOperatorAppliesError();
  Machine machine;
  std::vector<std::uint32_t> fresh;
  for (const Operator& op : ens.operators) {
    const std::vector<std::uint32_t>* row = op.weights_for(q);
    if (!row && !op.reads_input) row = &op.table.front().second;
    if (!row) {
      std::uint64_t steps = 0;
      FaultKind fault{};
      machine.run_into(op.program.ops, op.program.match, q, ens.budget.step_budget,
                       static_cast<std::uint64_t>(k) * w, &steps, &fault);
      if (!detail::parse_weights(machine.output(), k, w, fresh)) continue;
      row = &fresh;
    }
    double sum = std::accumulate(row->begin(), row->end(), 0.0);
    for (std::uint32_t a = 0; a < k; ++a) {
      pred.raw[a] += op.psi * (*row)[a] / sum;
      scaled[a] += (op.psi / psi_max) * (*row)[a] / sum;
    }
    ++pred.applied;
  }
  if (pred.applied == 0) throw NoOperatorAppliesError();
  double total = std::accumulate(scaled.begin(), scaled.end(), 0.0);
  pred.normalized.resize(k);
  for (std::uint32_t a = 0; a < k; ++a) pred.normalized[a] = scaled[a] / total;
  return pred;
}

// P(D u {d_new}) / P(D) over the canonical set encoding. May exceed 1 at
// finite budget; that is a property of the estimate, not a defect.
inline double set_induction(const std::vector<Bits>& members, const Bits& d_new,
                            EnumBudget budget, unsigned jobs = 1) {
  Bits enc_d = encode_set(members);
  std::vector<Bits> extended = members;
  extended.push_back(d_new);
  Bits enc_d1 = encode_set(extended);
  budget.output_limit = std::max({budget.output_limit, enc_d.size() + 1, enc_d1.size() + 1});
  ProbEstimate pd = algorithmic_probability(enc_d, budget, {}, jobs);
  if (pd.value.is_zero()) throw ZeroDenominatorError();
  ProbEstimate pd1 = algorithmic_probability(enc_d1, budget, {}, jobs);
  return std::ldexp(static_cast<double>(pd1.value.num()) / static_cast<double>(pd.value.num()),
                    static_cast<int>(pd.value.scale()) - static_cast<int>(pd1.value.scale()));
}

// P(x1) / (P(x0) + P(x1)).
inline double sequence_predict(const Bits& x, EnumBudget budget, unsigned jobs = 1) {
  require_bits(x, "sequence");
  budget.output_limit = std::max<std::uint64_t>(budget.output_limit, x.size() + 1);
  ProbEstimate p0 = algorithmic_probability(x + "0", budget, {}, jobs);
  ProbEstimate p1 = algorithmic_probability(x + "1", budget, {}, jobs);
  Dyadic denom = p0.value + p1.value;
  if (denom.is_zero()) throw ZeroMassError();
  return std::ldexp(static_cast<double>(p1.value.num()) / static_cast<double>(denom.num()),
                    static_cast<int>(denom.scale()) - static_cast<int>(p1.value.scale()));
}

}  // namespace uind

#endif
