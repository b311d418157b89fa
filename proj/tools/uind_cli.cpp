// uind: batch experiment driver for the universal-induction engine.
//
// Subcommands: enum, induce, agent rl, agent homeo, measure, cache.
// Reports are line-oriented key=value records behind a version/config
// header; with --deterministic the bytes depend only on the resolved
// configuration and inputs, never on --jobs.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "uind/uind.hpp"

namespace {

using namespace uind;

std::filesystem::path default_cache_path() {
  const char* dir = std::getenv("UIND_CACHE_DIR");
  std::filesystem::path base = dir ? dir : ".";
  return base / "uind.cache";
}

struct CommonFlags {
  unsigned jobs = default_jobs();
  bool deterministic = false;
};

void add_common(CLI::App* cmd, CommonFlags& c) {
  cmd->add_option("--jobs", c.jobs, "worker threads (never affects output bytes)");
  cmd->add_flag("--deterministic", c.deterministic, "suppress the timestamp header line");
}

Record budget_config(const EnumBudget& b) {
  return {{"max_len", fmt_number(b.max_code_len)},
          {"step_budget", fmt_number(b.step_budget)},
          {"output_limit", fmt_number(b.output_limit)}};
}

void append(Record& r, const Record& extra) { r.insert(r.end(), extra.begin(), extra.end()); }

int run_enum(const std::string& target, EnumBudget budget, const CommonFlags& common,
             bool use_cache) {
  budget.output_limit = std::max<std::uint64_t>(budget.output_limit, target.size() + 1);
  Record config{{"cmd", "enum"}, {"target", target}};
  append(config, budget_config(budget));
  std::vector<Record> records;
  records.push_back(config);

  std::filesystem::path cache_path = default_cache_path();
  EnumCache cache;
  if (use_cache && std::filesystem::exists(cache_path)) cache = EnumCache::load(cache_path);

  ComplexityEstimate est;
  if (auto hit = cache.lookup(target, budget); use_cache && hit) {
    est = algorithmic_complexity(target, budget, common.jobs);  // witness scan is not cached
    est.prefix_prob = *hit;
  } else {
    est = algorithmic_complexity(target, budget, common.jobs);
    if (use_cache) {
      cache.insert(target, est.prefix_prob);
      cache.store(cache_path);
    }
  }
  Record row{{"value", fmt_number(est.prefix_prob.value.to_double())},
             {"value_num", fmt_number(est.prefix_prob.value.num())},
             {"value_scale", fmt_number(static_cast<std::uint64_t>(est.prefix_prob.value.scale()))},
             {"programs_counted", fmt_number(est.prefix_prob.programs_counted)}};
  row.emplace_back("h", est.h ? fmt_number(static_cast<std::uint64_t>(*est.h)) : "absent");
  row.emplace_back("h_star", est.h_star ? fmt_number(*est.h_star) : "absent");
  row.emplace_back("witness", est.witness ? est.witness->code() : "absent");
  records.push_back(row);
  emit_report(std::cout, config, records, common.deterministic);
  return 0;
}

int run_induce(const std::string& mode, const std::filesystem::path& data, const std::string& dnew,
               EnumBudget budget, const CommonFlags& common) {
  Record config{{"cmd", "induce"}, {"mode", mode}, {"data", data.string()}};
  append(config, budget_config(budget));
  std::vector<Record> records;
  records.push_back(config);
  if (mode == "operator") {
    QADataset d = QADataset::load(data);
    OperatorEnsemble ens = find_operators(d, budget, common.jobs);
    records.push_back({{"Psi", fmt_number(ens.Psi)},
                       {"operators", fmt_number(static_cast<std::uint64_t>(ens.operators.size()))},
                       {"k", fmt_number(static_cast<std::uint64_t>(d.alphabet_size))},
                       {"w", fmt_number(static_cast<std::uint64_t>(d.weight_width))}});
    for (std::size_t j = 0; j < ens.operators.size(); ++j) {
      const Operator& op = ens.operators[j];
      records.push_back({{"op", fmt_number(static_cast<std::uint64_t>(j))},
                         {"code", op.program.code()},
                         {"len", fmt_number(op.code_len)},
                         {"psi", fmt_number(op.psi)}});
    }
  } else if (mode == "set") {
    if (dnew.empty() || !is_bits(dnew)) throw std::runtime_error("--dnew must be a bit string");
    std::ifstream in(data);
    if (!in) throw std::runtime_error("cannot open set file: " + data.string());
    std::vector<Bits> members;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      if (!is_bits(line)) data_error(data, lineno, "set element is not a bit string");
      members.push_back(line);
    }
    double p = set_induction(members, dnew, budget, common.jobs);
    records.push_back({{"dnew", dnew},
                       {"members", fmt_number(static_cast<std::uint64_t>(members.size()))},
                       {"probability", fmt_number(p)}});
  } else if (mode == "seq") {
    std::ifstream in(data);
    if (!in) throw std::runtime_error("cannot open sequence file: " + data.string());
    std::string x;
    if (!std::getline(in, x) || !is_bits(x)) data_error(data, 1, "expected one bit-string line");
    double p = sequence_predict(x, budget, common.jobs);
    records.push_back({{"x", x}, {"p_next_1", fmt_number(p)}});
  } else {
    throw CLI::ValidationError("--mode must be operator, set or seq");
  }
  emit_report(std::cout, config, records, common.deterministic);
  return 0;
}

EnvironmentSpec parse_env_flag(const std::string& env) {
  if (env == "det") return EnvironmentSpec::deterministic_bandit();
  if (env.rfind("coin:", 0) == 0) {
    auto rest = env.substr(5);
    auto comma = rest.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("--env coin needs two probabilities, e.g. coin:1/5,4/5");
    auto [n0, d0] = parse_fraction(rest.substr(0, comma), "<flag>", 0);
    auto [n1, d1] = parse_fraction(rest.substr(comma + 1), "<flag>", 0);
    return EnvironmentSpec::coin_bandit(n0, d0, n1, d1);
  }
  throw std::runtime_error("unknown --env '" + env + "' (use det or coin:p0,p1)");
}

int run_agent_rl(const std::string& env_flag, std::size_t steps, std::uint64_t seeds,
                 std::uint64_t seed0, EnumBudget budget, std::size_t horizon,
                 const std::string& policy, const std::string& save_chronology,
                 const CommonFlags& common) {
  EnvironmentSpec env = parse_env_flag(env_flag);
  AgentPolicy pol = policy == "random" ? AgentPolicy::Random : AgentPolicy::Induce;
  Record config{{"cmd", "agent-rl"},   {"env", env.name()},
                {"steps", fmt_number(static_cast<std::uint64_t>(steps))},
                {"seeds", fmt_number(seeds)},
                {"seed", fmt_number(seed0)},
                {"horizon", fmt_number(static_cast<std::uint64_t>(horizon))},
                {"policy", policy}};
  append(config, budget_config(budget));
  std::vector<Record> records;
  records.push_back(config);
  double sum = 0, sum_sq = 0;
  for (std::uint64_t s = 0; s < seeds; ++s) {
    EpisodeResult ep = rl_episode(env, steps, budget, horizon, seed0 + s, pol, common.jobs);
    sum += static_cast<double>(ep.total_reward);
    sum_sq += static_cast<double>(ep.total_reward) * static_cast<double>(ep.total_reward);
    records.push_back({{"episode_seed", fmt_number(seed0 + s)},
                       {"total_reward", fmt_number(ep.total_reward)}});
    if (!save_chronology.empty() && s == 0) ep.chronology.save(save_chronology);
  }
  double mean = sum / static_cast<double>(seeds);
  double var = seeds > 1 ? (sum_sq - sum * sum / static_cast<double>(seeds)) /
                               static_cast<double>(seeds - 1)
                         : 0.0;
  records.push_back({{"mean_reward", fmt_number(mean)},
                     {"std_error", fmt_number(std::sqrt(std::max(0.0, var) /
                                                        static_cast<double>(seeds)))}});
  emit_report(std::cout, config, records, common.deterministic);
  return 0;
}

int run_agent_homeo(const std::string& policy, std::size_t steps, std::uint64_t seeds,
                    std::uint64_t seed0, const std::string& dump_model, const CommonFlags& common) {
  HomeoPolicy pol = policy == "random" ? HomeoPolicy::Random : HomeoPolicy::Active;
  EnvironmentSpec world = EnvironmentSpec::thermo8();
  Record config{{"cmd", "agent-homeo"},
                {"policy", policy},
                {"steps", fmt_number(static_cast<std::uint64_t>(steps))},
                {"seeds", fmt_number(seeds)},
                {"seed", fmt_number(seed0)}};
  std::vector<Record> records;
  records.push_back(config);
  if (!dump_model.empty()) make_blanket_model(world).save(dump_model);
  double sum = 0, sum_sq = 0;
  for (std::uint64_t s = 0; s < seeds; ++s) {
    HomeostasisResult res = homeostasis_episode(world, steps, pol, seed0 + s);
    sum += res.occupancy_entropy_bits;
    sum_sq += res.occupancy_entropy_bits * res.occupancy_entropy_bits;
    records.push_back({{"episode_seed", fmt_number(seed0 + s)},
                       {"occupancy_entropy_bits", fmt_number(res.occupancy_entropy_bits)}});
  }
  double mean = sum / static_cast<double>(seeds);
  double var = seeds > 1 ? (sum_sq - sum * sum / static_cast<double>(seeds)) /
                               static_cast<double>(seeds - 1)
                         : 0.0;
  records.push_back({{"mean_entropy_bits", fmt_number(mean)},
                     {"std_error", fmt_number(std::sqrt(std::max(0.0, var) /
                                                        static_cast<double>(seeds)))}});
  emit_report(std::cout, config, records, common.deterministic);
  return 0;
}

int run_measure(const std::string& kind, const std::filesystem::path& suite_file, double gamma,
                std::uint64_t horizon, std::uint64_t episodes, std::size_t n, std::uint64_t seeds,
                std::uint64_t seed0, const std::string& policy, EnumBudget budget,
                std::uint32_t weight_width, const CommonFlags& common) {
  std::vector<EnvironmentSpec> suite = load_suite(suite_file);
  Record config{{"cmd", "measure"}, {"kind", kind}, {"suite", suite_file.string()},
                {"seed", fmt_number(seed0)}};
  MeasureReport rep;
  if (kind == "legg") {
    config.emplace_back("gamma", fmt_number(gamma));
    config.emplace_back("horizon", fmt_number(horizon));
    config.emplace_back("episodes", fmt_number(episodes));
    config.emplace_back("policy", policy);
    BanditPolicy pol = policy == "arm0"   ? always_arm(0)
                       : policy == "arm1" ? always_arm(1)
                                          : uniform_random_policy(2);
    rep = legg_hutter(pol, suite, gamma, horizon, episodes, seed0);
    config.emplace_back("truncation_error", fmt_number(std::pow(gamma, static_cast<double>(horizon)) /
                                                       (1 - gamma)));
  } else if (kind == "opfit") {
    config.emplace_back("n", fmt_number(static_cast<std::uint64_t>(n)));
    config.emplace_back("sample_seeds", fmt_number(seeds));
    config.emplace_back("w", fmt_number(static_cast<std::uint64_t>(weight_width)));
    append(config, budget_config(budget));
    rep = operator_fitness(budget, weight_width, suite, n, seeds, seed0, common.jobs);
  } else {
    throw CLI::ValidationError("--kind must be legg or opfit");
  }
  std::vector<Record> records;
  records.push_back(config);
  for (const MeasureRow& row : rep.rows)
    records.push_back({{"env", row.env},
                       {"encoding_len", fmt_number(row.encoding_len)},
                       {"weight", fmt_number(row.weight)},
                       {"value", fmt_number(row.value)},
                       {"std_error", fmt_number(row.std_error)}});
  records.push_back({{"TOTAL", fmt_number(rep.total)}, {"weight_sum", fmt_number(rep.weight_sum)}});
  emit_report(std::cout, config, records, common.deterministic);
  return 0;
}

int run_cache(const std::string& action, std::string file, const CommonFlags& common) {
  std::filesystem::path path = file.empty() ? default_cache_path() : std::filesystem::path(file);
  Record config{{"cmd", "cache"}, {"action", action}, {"file", path.string()}};
  std::vector<Record> records;
  records.push_back(config);
  if (action == "inspect") {
    std::uint64_t entries = 0;
    if (std::filesystem::exists(path)) {
      EnumCache cache = EnumCache::load(path);
      entries = cache.size();
      for (const auto& [k, e] : cache.entries())
        records.push_back(
            {{"max_len", fmt_number(k.budget.max_code_len)},
             {"step_budget", fmt_number(k.budget.step_budget)},
             {"output_limit", fmt_number(k.budget.output_limit)},
             {"target_digest", fmt_number(k.target_digest)},
             {"target_len", fmt_number(k.target_len)},
             {"value_num", fmt_number(e.value_num)},
             {"value_scale", fmt_number(e.value_scale)},
             {"programs_counted", fmt_number(e.programs_counted)}});
    }
    records.push_back({{"entries", fmt_number(entries)}});
  } else if (action == "clear") {
    bool removed = std::filesystem::remove(path);
    records.push_back({{"removed", removed ? "1" : "0"}});
  } else {
    throw CLI::ValidationError("cache action must be inspect or clear");
  }
  emit_report(std::cout, config, records, common.deterministic);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"universal induction engine"};
  app.require_subcommand(1);

  CommonFlags common;

  // enum
  auto* cmd_enum = app.add_subcommand("enum", "algorithmic probability and complexity of a target");
  std::string target;
  EnumBudget enum_budget{15, 100, 64};
  bool use_cache = false;
  cmd_enum->add_option("--target", target, "target bit string (may be empty)");
  cmd_enum->add_option("--max-len", enum_budget.max_code_len, "max program code length in bits");
  cmd_enum->add_option("--steps", enum_budget.step_budget, "step budget per program");
  cmd_enum->add_flag("--use-cache", use_cache, "reuse/store prefix-probability results");
  add_common(cmd_enum, common);

  // induce
  auto* cmd_induce = app.add_subcommand("induce", "operator, set or sequence induction over a data file");
  std::string mode = "operator", dnew;
  std::string induce_data;
  EnumBudget induce_budget{15, 200, 64};
  cmd_induce->add_option("--mode", mode, "operator|set|seq")->required();
  cmd_induce->add_option("--data", induce_data, "input data file")->required();
  cmd_induce->add_option("--dnew", dnew, "candidate member (set mode)");
  cmd_induce->add_option("--max-len", induce_budget.max_code_len, "max program code length in bits");
  cmd_induce->add_option("--steps", induce_budget.step_budget, "step budget per program");
  add_common(cmd_induce, common);

  // agent rl / homeo
  auto* cmd_agent = app.add_subcommand("agent", "run an agent loop");
  cmd_agent->require_subcommand(1);
  auto* cmd_rl = cmd_agent->add_subcommand("rl", "reduction agent on an mdp environment");
  std::string env_flag = "det", rl_policy = "induce", save_chronology;
  std::size_t rl_steps = 8, horizon = 3;
  std::uint64_t rl_seeds = 20, rl_seed = 1;
  EnumBudget rl_budget{21, 500, 64};
  cmd_rl->add_option("--env", env_flag, "det or coin:p0,p1");
  cmd_rl->add_option("--steps", rl_steps, "environment steps per episode");
  cmd_rl->add_option("--seeds", rl_seeds, "number of seeded episodes");
  cmd_rl->add_option("--seed", rl_seed, "base seed");
  cmd_rl->add_option("--max-len", rl_budget.max_code_len, "max program code length in bits");
  cmd_rl->add_option("--step-budget", rl_budget.step_budget, "interpreter steps per program");
  cmd_rl->add_option("--horizon", horizon, "planning horizon lambda");
  cmd_rl->add_option("--policy", rl_policy, "induce|random");
  cmd_rl->add_option("--save-chronology", save_chronology, "write the first episode's chronology");
  add_common(cmd_rl, common);

  auto* cmd_homeo = cmd_agent->add_subcommand("homeo", "homeostasis agent on the thermostat world");
  std::string homeo_policy = "active", dump_model;
  std::size_t homeo_steps = 10000;
  std::uint64_t homeo_seeds = 20, homeo_seed = 1;
  cmd_homeo->add_option("--policy", homeo_policy, "active|random");
  cmd_homeo->add_option("--steps", homeo_steps, "steps per episode");
  cmd_homeo->add_option("--seeds", homeo_seeds, "number of seeded episodes");
  cmd_homeo->add_option("--seed", homeo_seed, "base seed");
  cmd_homeo->add_option("--dump-model", dump_model, "write the generative model file");
  add_common(cmd_homeo, common);

  // measure
  auto* cmd_measure = app.add_subcommand("measure", "complexity-weighted measures over a suite file");
  std::string kind, suite_file, measure_policy = "random";
  double gamma = 0.9;
  std::uint64_t m_horizon = 200, episodes = 1000, m_seeds = 3, m_seed = 1;
  std::size_t m_n = 12;
  std::uint32_t m_w = 4;
  EnumBudget m_budget{15, 200, 64};
  cmd_measure->add_option("--kind", kind, "legg|opfit")->required();
  cmd_measure->add_option("--suite", suite_file, "environment suite file")->required();
  cmd_measure->add_option("--gamma", gamma, "discount factor");
  cmd_measure->add_option("--horizon", m_horizon, "truncation horizon T");
  cmd_measure->add_option("--episodes", episodes, "episodes per environment");
  cmd_measure->add_option("--policy", measure_policy, "arm0|arm1|random (legg)");
  cmd_measure->add_option("--n", m_n, "samples per source (opfit)");
  cmd_measure->add_option("--sample-seeds", m_seeds, "seeded samples per source (opfit)");
  cmd_measure->add_option("--seed", m_seed, "base seed");
  cmd_measure->add_option("--w", m_w, "weight width (opfit)");
  cmd_measure->add_option("--max-len", m_budget.max_code_len, "max program code length (opfit)");
  cmd_measure->add_option("--step-budget", m_budget.step_budget, "steps per program (opfit)");
  add_common(cmd_measure, common);

  // cache
  auto* cmd_cache = app.add_subcommand("cache", "inspect or clear the enumeration cache");
  std::string cache_action, cache_file;
  cmd_cache->add_option("action", cache_action, "inspect|clear")->required();
  cmd_cache->add_option("--file", cache_file, "cache file (default: $UIND_CACHE_DIR/uind.cache)");
  add_common(cmd_cache, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << "error: " << e.what() << "\n\n" << app.help() << std::flush;
    return 1;
  }

  try {
    if (*cmd_enum) {
      if (!is_bits(target)) throw std::runtime_error("--target must be a bit string");
      return run_enum(target, enum_budget, common, use_cache);
    }
    if (*cmd_induce) return run_induce(mode, induce_data, dnew, induce_budget, common);
    if (*cmd_rl)
      return run_agent_rl(env_flag, rl_steps, rl_seeds, rl_seed, rl_budget, horizon, rl_policy,
                          save_chronology, common);
    if (*cmd_homeo)
      return run_agent_homeo(homeo_policy, homeo_steps, homeo_seeds, homeo_seed, dump_model, common);
    if (*cmd_measure)
      return run_measure(kind, suite_file, gamma, m_horizon, episodes, m_n, m_seeds, m_seed,
                         measure_policy, m_budget, m_w, common);
    if (*cmd_cache) return run_cache(cache_action, cache_file, common);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help() << std::flush;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
  return 0;
}
