#ifndef UIND_FREE_ENERGY_HPP
#define UIND_FREE_ENERGY_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "uind/coding.hpp"
#include "uind/environments.hpp"
#include "uind/induction.hpp"

namespace uind {

class ZeroEvidenceError : public std::runtime_error {
 public:
  ZeroEvidenceError() : std::runtime_error("sensation has zero evidence: p(s|m) = 0") {}
};
class SupportViolationError : public std::runtime_error {
 public:
  SupportViolationError()
      : std::runtime_error("recognition density has support outside the posterior") {}
};

// Discrete generative/recognition model over hidden (F), sensory (S),
// action (A) and internal (Lambda) sets. Free energy uses natural log;
// code-length quantities elsewhere use log2.
struct BlanketModel {
  std::uint32_t nf = 0, ns = 0, na = 0, nl = 0;
  std::vector<double> p_sf;   // p(s,f|m), index s*nf + f, sums to 1
  std::vector<double> p_sfa;  // p(s|f,a,m), index (f*na + a)*ns + s, rows over s sum to 1
  std::vector<double> q;      // q(f|lambda), index l*nf + f, rows sum to 1

  double joint(std::uint32_t s, std::uint32_t f) const { return p_sf[s * nf + f]; }
  double sensory_given(std::uint32_t s, std::uint32_t f, std::uint32_t a) const {
    return p_sfa[(f * na + a) * ns + s];
  }
  double recognition(std::uint32_t f, std::uint32_t l) const { return q[l * nf + f]; }

  double evidence(std::uint32_t s) const {  // p(s|m)
    double t = 0;
    for (std::uint32_t f = 0; f < nf; ++f) t += joint(s, f);
    return t;
  }
  double hidden_marginal(std::uint32_t f) const {  // p(f|m)
    double t = 0;
    for (std::uint32_t s = 0; s < ns; ++s) t += joint(s, f);
    return t;
  }

  void validate(double tol = 1e-9) const {
    auto check_size = [](std::size_t got, std::size_t want, const char* what) {
      if (got != want) throw std::invalid_argument(std::string(what) + " table has wrong size");
    };
    check_size(p_sf.size(), std::size_t{ns} * nf, "p(s,f|m)");
    check_size(p_sfa.size(), std::size_t{nf} * na * ns, "p(s|f,a,m)");
    check_size(q.size(), std::size_t{nl} * nf, "q(f|lambda)");
    for (double v : p_sf)
      if (v < 0) throw std::invalid_argument("negative entry in p(s,f|m)");
    for (double v : p_sfa)
      if (v < 0) throw std::invalid_argument("negative entry in p(s|f,a,m)");
    for (double v : q)
      if (v < 0) throw std::invalid_argument("negative entry in q(f|lambda)");
    double total = 0;
    for (double v : p_sf) total += v;
    if (std::abs(total - 1.0) > tol) throw std::invalid_argument("p(s,f|m) does not sum to 1");
    for (std::uint32_t f = 0; f < nf; ++f)
      for (std::uint32_t a = 0; a < na; ++a) {
        double row = 0;
        for (std::uint32_t s = 0; s < ns; ++s) row += sensory_given(s, f, a);
        if (std::abs(row - 1.0) > tol)
          throw std::invalid_argument("p(s|f,a,m) row does not sum to 1");
      }
    for (std::uint32_t l = 0; l < nl; ++l) {
      double row = 0;
      for (std::uint32_t f = 0; f < nf; ++f) row += recognition(f, l);
      if (std::abs(row - 1.0) > tol) throw std::invalid_argument("q(f|lambda) row does not sum to 1");
    }
  }

  static BlanketModel load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

struct FEReport {
  double F_value = 0;          // nats
  double energy_term = 0;      // E_q[-ln p(s,f|m)]
  double entropy_term = 0;     // H(q(.|lambda))
  double surprise = 0;         // -ln p(s|m)
  double kl_recognition = 0;   // D_KL(q || p(f|s,m))
  double complexity_term = 0;  // D_KL(q || p(f|m))
  double accuracy_term = 0;    // E_q[-ln p(s|f,m)]
};

// Each decomposition is evaluated directly from the tables; their agreement
// (energy - entropy = surprise + KL = accuracy + complexity) is a property
// of the model, not of shared code paths.
inline FEReport free_energy(const BlanketModel& m, std::uint32_t lambda, std::uint32_t s) {
  if (lambda >= m.nl || s >= m.ns) throw std::out_of_range("lambda or s out of range");
  double p_s = m.evidence(s);
  if (p_s <= 0) throw ZeroEvidenceError();
  for (std::uint32_t f = 0; f < m.nf; ++f)
    if (m.recognition(f, lambda) > 0 && m.joint(s, f) <= 0) throw SupportViolationError();
  FEReport r;
  r.surprise = -std::log(p_s);
  for (std::uint32_t f = 0; f < m.nf; ++f) {
    double qf = m.recognition(f, lambda);
    if (qf <= 0) continue;  // 0 ln 0 = 0
    double joint = m.joint(s, f);
    double posterior = joint / p_s;
    double marginal = m.hidden_marginal(f);
    r.energy_term += qf * -std::log(joint);
    r.entropy_term += qf * -std::log(qf);
    r.kl_recognition += qf * std::log(qf / posterior);
    r.complexity_term += qf * std::log(qf / marginal);
    r.accuracy_term += qf * -std::log(joint / marginal);
  }
  r.F_value = r.energy_term - r.entropy_term;
  return r;
}

// lambda* = argmin_lambda F(s, lambda); ties fall to the smallest index.
inline std::uint32_t perceptual_step(const BlanketModel& m, std::uint32_t s) {
  if (m.nl == 0) throw std::invalid_argument("empty internal set");
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t best_l = 0;
  for (std::uint32_t l = 0; l < m.nl; ++l) {
    double f = free_energy(m, l, s).F_value;
    if (f < best) {
      best = f;
      best_l = l;
    }
  }
  return best_l;
}

// a* = argmin_a E_{s' ~ sum_f q(f|lambda) p(s'|f,a,m)} [ F(s', lambda) ];
// only this predictive term depends on the action. Ties fall to the
// smallest action index.
inline std::uint32_t active_step(const BlanketModel& m, std::uint32_t lambda) {
  if (m.na == 0) throw std::invalid_argument("empty action set");
  std::vector<double> f_next(m.ns, std::numeric_limits<double>::quiet_NaN());
  auto f_of = [&](std::uint32_t s) {
    if (std::isnan(f_next[s])) f_next[s] = free_energy(m, lambda, s).F_value;
    return f_next[s];
  };
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t best_a = 0;
  for (std::uint32_t a = 0; a < m.na; ++a) {
    double expected = 0;
    for (std::uint32_t s = 0; s < m.ns; ++s) {
      double pred = 0;
      for (std::uint32_t f = 0; f < m.nf; ++f)
        pred += m.recognition(f, lambda) * m.sensory_given(s, f, a);
      if (pred > 0) expected += pred * f_of(s);
    }
    if (expected < best) {
      best = expected;
      best_a = a;
    }
  }
  return best_a;
}

// ---- Information bottleneck -------------------------------------------------

// Joint distribution over (F, S, Lambda) for the bottleneck quantities.
struct JointTable {
  std::uint32_t nf = 0, ns = 0, nl = 0;
  std::vector<double> p;  // index (f*ns + s)*nl + l

  double at(std::uint32_t f, std::uint32_t s, std::uint32_t l) const {
    return p[(std::size_t{f} * ns + s) * nl + l];
  }

  void validate(double tol = 1e-9) const {
    if (p.size() != std::size_t{nf} * ns * nl) throw std::invalid_argument("joint table size");
    double total = 0;
    for (double v : p) {
      if (v < 0) throw std::invalid_argument("negative entry in joint table");
      total += v;
    }
    if (std::abs(total - 1.0) > tol) throw std::invalid_argument("joint table does not sum to 1");
  }
};

struct BottleneckReport {
  double s_b = 0;           // I(lambda;F) - I(S;lambda)
  double s_b_expanded = 0;  // H(lambda) - H(lambda|F) - H(S) + H(S|lambda)
  double s_b_star = 0;      // H(lambda) + H(S|lambda)
};

namespace detail {

inline double entropy_bits(const std::vector<double>& p) {
  double h = 0;
  for (double v : p)
    if (v > 0) h -= v * std::log2(v);
  return h;
}

}  // namespace detail

// All quantities in bits. The mutual-information form and the conditional-
// entropy expansion are computed along independent routes.
inline BottleneckReport bottleneck(const JointTable& joint) {
  joint.validate();
  const std::uint32_t nf = joint.nf, ns = joint.ns, nl = joint.nl;
  std::vector<double> pf(nf, 0), ps(ns, 0), pl(nl, 0);
  std::vector<double> pfl(std::size_t{nf} * nl, 0), psl(std::size_t{ns} * nl, 0);
  for (std::uint32_t f = 0; f < nf; ++f)
    for (std::uint32_t s = 0; s < ns; ++s)
      for (std::uint32_t l = 0; l < nl; ++l) {
        double v = joint.at(f, s, l);
        pf[f] += v;
        ps[s] += v;
        pl[l] += v;
        pfl[f * nl + l] += v;
        psl[s * nl + l] += v;
      }
  double i_lf = 0, i_sl = 0;
  for (std::uint32_t f = 0; f < nf; ++f)
    for (std::uint32_t l = 0; l < nl; ++l) {
      double v = pfl[f * nl + l];
      if (v > 0) i_lf += v * std::log2(v / (pf[f] * pl[l]));
    }
  for (std::uint32_t s = 0; s < ns; ++s)
    for (std::uint32_t l = 0; l < nl; ++l) {
      double v = psl[s * nl + l];
      if (v > 0) i_sl += v * std::log2(v / (ps[s] * pl[l]));
    }
  double h_l = detail::entropy_bits(pl);
  double h_s = detail::entropy_bits(ps);
  double h_lf = detail::entropy_bits(pfl);
  double h_sl = detail::entropy_bits(psl);
  double h_f = detail::entropy_bits(pf);
  BottleneckReport r;
  r.s_b = i_lf - i_sl;
  r.s_b_expanded = h_l - (h_lf - h_f) - h_s + (h_sl - h_l);
  r.s_b_star = h_l + (h_sl - h_l);
  return r;
}

// ---- Two-part code view of an ensemble -------------------------------------

struct MmlReport {
  struct Row {
    std::uint64_t code_len = 0;  // |O^j| in bits
    double data_len = 0;         // sum_i -log2 O^j(a_i|q_i)
    double total = 0;
  };
  std::vector<Row> rows;            // ensemble order
  std::size_t best = 0;             // argmin total
  double sum_code_len = 0;          // model-complexity grouping
  double sum_data_len = 0;          // accuracy grouping
};

// Questions are encoded internal states, answers sensory symbols; the
// two-part length of operator j is |O^j| + sum_i -log2 O^j(s_i|lambda_i).
inline MmlReport mml_score(const OperatorEnsemble& ens, const QADataset& pairs) {
  pairs.validate();
  if (ens.operators.empty()) throw EmptyEnsembleError();
  MmlReport rep;
  double best_total = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < ens.operators.size(); ++j) {
    const Operator& op = ens.operators[j];
    MmlReport::Row row;
    row.code_len = op.code_len;
    for (const auto& [q, a] : pairs.pairs) row.data_len += -std::log2(op.cpdf(a, q));
    row.total = static_cast<double>(row.code_len) + row.data_len;
    if (row.total < best_total) {
      best_total = row.total;
      rep.best = j;
    }
    rep.sum_code_len += static_cast<double>(row.code_len);
    rep.sum_data_len += row.data_len;
    rep.rows.push_back(row);
  }
  return rep;
}

struct TheoremReport {
  bool pass = false;
  double worst_residual = 0;
  std::size_t argmax_psi = 0;
  std::size_t argmin_length = 0;
};

// Verifies -log2(psi_j) = |O^j| + sum_i -log2 O^j(a_i|q_i) per operator and
// that the best-fit operator is the shortest two-part code.
inline TheoremReport theorem_check(const OperatorEnsemble& ens, const QADataset& pairs,
                                   double tol = 1e-9) {
  MmlReport mml = mml_score(ens, pairs);
  TheoremReport rep;
  double best_psi = -1;
  for (std::size_t j = 0; j < ens.operators.size(); ++j) {
    double lhs = -std::log2(ens.operators[j].psi);
    double rhs = mml.rows[j].total;
    double res = (std::isinf(lhs) && std::isinf(rhs)) ? 0.0 : std::abs(lhs - rhs);
    rep.worst_residual = std::max(rep.worst_residual, res);
    if (ens.operators[j].psi > best_psi) {
      best_psi = ens.operators[j].psi;
      rep.argmax_psi = j;
    }
  }
  rep.argmin_length = mml.best;
  rep.pass = rep.worst_residual < tol && rep.argmax_psi == rep.argmin_length;
  return rep;
}

// Dataset view of (lambda, s) pairs for mml_score / theorem_check.
inline QADataset blanket_pairs_dataset(const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs,
                                       std::uint32_t sensory_alphabet,
                                       std::uint32_t weight_width = 4) {
  QADataset d;
  d.alphabet_size = sensory_alphabet;
  d.weight_width = weight_width;
  for (const auto& [l, s] : pairs) d.pairs.emplace_back(encode_nat(l + 1), s);
  return d;
}

// ---- Homeostasis agent ------------------------------------------------------

// The agent's generative model of a blanket world: hidden states mirror the
// external states under a uniform prior, sensation uses the world's sensor
// kernel, and the recognition family indexes posteriors by internal state.
// Rows are mixed with a small uniform floor so every density keeps full
// support; expected free energy then stays finite for all (s, lambda).
inline BlanketModel make_blanket_model(const EnvironmentSpec& world, double floor_mix = 1.0 / 64) {
  if (world.kind() != EnvKind::BlanketWorld) throw BadKindError("not a blanket world");
  constexpr std::uint32_t n = BlanketWorld::kStates;
  constexpr std::uint32_t na = BlanketWorld::kActions;
  auto sensor = BlanketWorld::sensor();
  auto kernel = BlanketWorld::kernel();
  auto mix = [&](double v) { return (1.0 - floor_mix) * v + floor_mix / n; };
  BlanketModel m;
  m.nf = n;
  m.ns = n;
  m.na = na;
  m.nl = n;
  m.p_sf.assign(std::size_t{n} * n, 0);
  for (std::uint32_t s = 0; s < n; ++s)
    for (std::uint32_t f = 0; f < n; ++f) m.p_sf[s * n + f] = mix(sensor[f][s]) / n;
  m.p_sfa.assign(std::size_t{n} * na * n, 0);
  for (std::uint32_t f = 0; f < n; ++f)
    for (std::uint32_t a = 0; a < na; ++a)
      for (std::uint32_t s = 0; s < n; ++s) {
        double v = 0;
        for (std::uint32_t e2 = 0; e2 < n; ++e2) v += kernel[a][f][e2] * sensor[e2][s];
        m.p_sfa[(f * na + a) * n + s] = mix(v);
      }
  m.q.assign(std::size_t{n} * n, 0);
  for (std::uint32_t l = 0; l < n; ++l) {
    double evidence = 0;
    for (std::uint32_t f = 0; f < n; ++f) evidence += m.p_sf[l * n + f];
    for (std::uint32_t f = 0; f < n; ++f) m.q[l * n + f] = m.p_sf[l * n + f] / evidence;
  }
  m.validate();
  return m;
}

enum class HomeoPolicy { Active, Random };

struct HomeostasisResult {
  struct Step {
    std::uint32_t e = 0, s = 0, lambda = 0, a = 0;
  };
  std::vector<Step> trajectory;
  double occupancy_entropy_bits = 0;  // empty trajectory convention: 0
};

// Observe -> perceive -> act -> world transition. The true external state is
// read only to measure occupancy; decisions see the noisy sensor alone.
inline HomeostasisResult homeostasis_episode(const EnvironmentSpec& world, std::size_t steps,
                                             HomeoPolicy policy, std::uint64_t seed) {
  if (world.kind() != EnvKind::BlanketWorld) throw BadKindError("not a blanket world");
  BlanketModel model = make_blanket_model(world);
  CounterRng world_rng(seed, stream::kEnv);
  CounterRng policy_rng(seed, stream::kPolicy);
  CounterRng init_rng(seed, stream::kInit);
  std::uint32_t e = static_cast<std::uint32_t>(init_rng.next_below(BlanketWorld::kStates));
  HomeostasisResult out;
  std::vector<std::uint64_t> occupancy(BlanketWorld::kStates, 0);
  for (std::size_t t = 0; t < steps; ++t) {
    HomeostasisResult::Step rec;
    rec.e = e;
    ++occupancy[e];
    rec.s = BlanketWorld::sense(e, world_rng);
    rec.lambda = perceptual_step(model, rec.s);
    rec.a = policy == HomeoPolicy::Active
                ? active_step(model, rec.lambda)
                : static_cast<std::uint32_t>(policy_rng.next_below(BlanketWorld::kActions));
    e = BlanketWorld::transition(e, rec.a, world_rng);
    out.trajectory.push_back(rec);
  }
  if (steps > 0) {
    std::vector<double> freq;
    for (std::uint64_t c : occupancy) freq.push_back(static_cast<double>(c) / steps);
    out.occupancy_entropy_bits = detail::entropy_bits(freq);
  }
  return out;
}

// ---- Model file format ------------------------------------------------------

// Text sections: [F] [S] [A] [LAMBDA] with sizes, then [P_SF] (S rows of F
// columns of p(s,f|m)), [P_SFA] (for each f, for each a, a row of S values
// of p(s|f,a,m)), and [Q] (LAMBDA rows of F columns).
inline BlanketModel BlanketModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path.string());
  BlanketModel m;
  std::string tok;
  std::size_t lineno = 0;
  auto next = [&]() -> std::string {
    std::string t;
    if (!(in >> t)) data_error(path, lineno, "unexpected end of model file");
    return t;
  };
  auto expect = [&](const char* want) {
    std::string t = next();
    if (t != want) data_error(path, lineno, std::string("expected ") + want + ", got " + t);
  };
  auto number = [&]() -> double {
    std::string t = next();
    try {
      return std::stod(t);
    } catch (const std::exception&) {
      data_error(path, lineno, "expected a number, got " + t);
    }
  };
  expect("[F]");
  m.nf = static_cast<std::uint32_t>(number());
  expect("[S]");
  m.ns = static_cast<std::uint32_t>(number());
  expect("[A]");
  m.na = static_cast<std::uint32_t>(number());
  expect("[LAMBDA]");
  m.nl = static_cast<std::uint32_t>(number());
  expect("[P_SF]");
  m.p_sf.resize(std::size_t{m.ns} * m.nf);
  for (double& v : m.p_sf) v = number();
  expect("[P_SFA]");
  m.p_sfa.resize(std::size_t{m.nf} * m.na * m.ns);
  for (double& v : m.p_sfa) v = number();
  expect("[Q]");
  m.q.resize(std::size_t{m.nl} * m.nf);
  for (double& v : m.q) v = number();
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    data_error(path, lineno, e.what());
  }
  return m;
}

inline void BlanketModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write model file: " + path.string());
  out.precision(17);
  out << "[F] " << nf << "\n[S] " << ns << "\n[A] " << na << "\n[LAMBDA] " << nl << "\n";
  out << "[P_SF]\n";
  for (std::uint32_t s = 0; s < ns; ++s) {
    for (std::uint32_t f = 0; f < nf; ++f) out << (f ? " " : "") << joint(s, f);
    out << "\n";
  }
  out << "[P_SFA]\n";
  for (std::uint32_t f = 0; f < nf; ++f)
    for (std::uint32_t a = 0; a < na; ++a) {
      for (std::uint32_t s = 0; s < ns; ++s) out << (s ? " " : "") << sensory_given(s, f, a);
      out << "\n";
    }
  out << "[Q]\n";
  for (std::uint32_t l = 0; l < nl; ++l) {
    for (std::uint32_t f = 0; f < nf; ++f) out << (f ? " " : "") << recognition(f, l);
    out << "\n";
  }
}

}  // namespace uind

#endif
