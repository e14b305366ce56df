#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "leakcomp/congruence.hpp"
#include "leakcomp/leak.hpp"
#include "leakcomp/simulate.hpp"
#include "leakcomp/witness.hpp"

namespace {

using namespace leakcomp;

std::string join_ints(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

void print_verification_table(std::ostream& out, const CacheAlgorithm& p,
                              const CacheAlgorithm& q, const TraceSet& set) {
  out << "trace,misses_p,misses_q\n";
  for (const Trace& trace : set.traces()) {
    out << trace_to_string(trace) << ',' << count_misses(p, trace) << ','
        << count_misses(q, trace) << '\n';
  }
}

struct RatioOptions {
  std::string p, q;
  int max_len = 0;
  std::string engine = "quotient";
  int alphabet = 0;  // 0: derive from capacities
  std::uint64_t budget = kDefaultEnumerationBudget;
  std::string out_path;
  std::string pairs_out;
};

void run_ratio(const RatioOptions& opt) {
  const PolicyPtr p = make_policy(opt.p);
  const PolicyPtr q = make_policy(opt.q);
  const int alphabet = opt.alphabet > 0 ? opt.alphabet : default_alphabet_size(*p, *q);
  const EnumerationBudget budget{opt.budget};

  LeakRatioTable forward, backward;
  if (opt.engine == "quotient") {
    forward = leak_ratio_quotient(*p, *q, opt.max_len);
    backward = leak_ratio_quotient(*q, *p, opt.max_len);
    std::cerr << "# p=" << p->descriptor() << " q=" << q->descriptor()
              << " engine=quotient alphabet=unbounded\n";
  } else if (opt.engine == "brute") {
    forward = leak_ratio_bruteforce(*p, *q, opt.max_len, alphabet, budget);
    backward = leak_ratio_bruteforce(*q, *p, opt.max_len, alphabet, budget);
    std::cerr << "# p=" << p->descriptor() << " q=" << q->descriptor()
              << " engine=brute alphabet=" << alphabet << "\n";
  } else {
    throw std::invalid_argument("unknown engine '" + opt.engine +
                                "' (expected brute or quotient)");
  }

  if (!opt.pairs_out.empty()) {
    const auto layers = enumerate_miss_pair_layers(*p, *q, opt.max_len, alphabet, budget);
    std::ofstream file(opt.pairs_out);
    if (!file) throw std::invalid_argument("cannot open '" + opt.pairs_out + "'");
    write_pairs_csv(file, layers);
  }

  if (opt.out_path.empty()) {
    write_ratio_csv(std::cout, forward, backward);
  } else {
    std::ofstream file(opt.out_path);
    if (!file) throw std::invalid_argument("cannot open '" + opt.out_path + "'");
    write_ratio_csv(file, forward, backward);
  }
}

void run_classify(const std::string& p_text, const std::string& q_text,
                  std::size_t ceiling) {
  const PolicyPtr p = make_policy(p_text);
  const PolicyPtr q = make_policy(q_text);
  const auto verdict = detect_unbounded(*p, *q, ceiling);
  if (verdict.unbounded) {
    const auto family = find_pump_family(*p, *q, ceiling);
    std::cout << "LINEAR\n";
    std::cout << "quotient_size=" << verdict.quotient_size << "\n";
    std::cout << "base=" << trace_to_string(family->base) << "\n";
    std::cout << "cycle=" << trace_to_string(family->cycle) << "\n";
    std::cout << "gain=" << family->gain << "\n";
    std::cout << "direction=" << (family->direction > 0 ? "P-Q" : "Q-P") << "\n";
    std::cout << "rate=" << to_string(family->rate) << "\n";
  } else {
    std::cout << "CONSTANT\n";
    std::cout << "quotient_size=" << verdict.quotient_size << "\n";
  }
}

void run_pump(const std::string& p_text, const std::string& q_text, int reps,
              std::size_t ceiling) {
  const PolicyPtr p = make_policy(p_text);
  const PolicyPtr q = make_policy(q_text);
  const auto family = find_pump_family(*p, *q, ceiling);
  if (!family) {
    throw std::invalid_argument("pair " + p->descriptor() + " / " + q->descriptor() +
                                " is leak-constant; no pump family exists");
  }
  const Trace tau = pump(*p, *q, *family, reps);
  const int misses_p = count_misses(*p, tau);
  const int misses_q = count_misses(*q, tau);
  std::cout << trace_to_string(tau) << "\n";
  std::cout << "misses_p=" << misses_p << "\n";
  std::cout << "misses_q=" << misses_q << "\n";
  std::cout << "gap=" << (misses_p > misses_q ? misses_p - misses_q : misses_q - misses_p)
            << "\n";
}

void run_figure1(const std::string& out_dir) {
  const auto lru2 = make_policy("lru:2");
  const auto fifo2 = make_policy("fifo:2");
  const auto flru27 = make_policy("flru:2:7");
  const std::filesystem::path dir(out_dir);

  {
    std::ofstream file(dir / "figure1a.csv");
    if (!file) throw std::invalid_argument("cannot write to '" + out_dir + "'");
    write_ratio_csv(file, leak_ratio_quotient(*lru2, *fifo2, 17),
                    leak_ratio_quotient(*fifo2, *lru2, 17));
  }
  {
    std::ofstream file(dir / "figure1b.csv");
    if (!file) throw std::invalid_argument("cannot write to '" + out_dir + "'");
    write_ratio_csv(file, leak_ratio_quotient(*lru2, *flru27, 17),
                    leak_ratio_quotient(*flru27, *lru2, 17));
  }
  std::cout << "wrote " << (dir / "figure1a.csv").string() << "\n";
  std::cout << "wrote " << (dir / "figure1b.csv").string() << "\n";
}

void run_policies() {
  std::cout << "policy descriptors:\n"
            << "  lru:<n>       least-recently used, n lines (n <= 16)\n"
            << "  fifo:<n>      first-in first-out, n lines\n"
            << "  plru:<n>      tree pseudo-LRU, n a power of two (n <= 32)\n"
            << "  mru:<n>       most-recently used bits, n lines (n <= 32)\n"
            << "  flru:<n>:<k>  FIFO for the first k accesses, LRU afterwards\n"
            << "                (n <= 12, k <= 65535)\n"
            << "block literals: A-Z or b<int>; traces: \"ABACBACBA\" or \"b0,b1,b0\"\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulate deterministic cache policies and compare their timing leakage"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "count misses of policies on a trace");
  std::string sim_policy, sim_p, sim_q, sim_trace;
  bool sim_profile = false;
  simulate->add_option("--policy", sim_policy, "single policy descriptor");
  simulate->add_option("--p", sim_p, "first policy descriptor");
  simulate->add_option("--q", sim_q, "second policy descriptor");
  simulate->add_option("--trace", sim_trace, "trace literal")->required();
  simulate->add_flag("--profile", sim_profile, "also print prefix miss profiles");
  simulate->callback([&] {
    const Trace trace = parse_trace(sim_trace);
    if (!sim_policy.empty()) {
      const PolicyPtr alg = make_policy(sim_policy);
      std::cout << "misses=" << count_misses(*alg, trace) << "\n";
      if (sim_profile) {
        std::cout << "profile=" << join_ints(miss_profile(*alg, trace).cumulative) << "\n";
      }
    } else if (!sim_p.empty() && !sim_q.empty()) {
      const PolicyPtr p = make_policy(sim_p);
      const PolicyPtr q = make_policy(sim_q);
      std::cout << "misses_p=" << count_misses(*p, trace) << "\n";
      std::cout << "misses_q=" << count_misses(*q, trace) << "\n";
      if (sim_profile) {
        std::cout << "profile_p=" << join_ints(miss_profile(*p, trace).cumulative) << "\n";
        std::cout << "profile_q=" << join_ints(miss_profile(*q, trace).cumulative) << "\n";
        std::cout << "diff=" << join_ints(diff_profile(*p, *q, trace)) << "\n";
      }
    } else {
      throw std::invalid_argument("simulate needs --policy, or both --p and --q");
    }
  });

  // ratio
  auto* ratio = app.add_subcommand("ratio", "exact leak-ratio table for a policy pair");
  RatioOptions ratio_opt;
  ratio->add_option("--p", ratio_opt.p, "policy P")->required();
  ratio->add_option("--q", ratio_opt.q, "policy Q")->required();
  ratio->add_option("--max-len", ratio_opt.max_len, "largest trace length")
      ->required()
      ->check(CLI::PositiveNumber);
  ratio->add_option("--engine", ratio_opt.engine, "brute|quotient (default quotient)");
  ratio->add_option("--alphabet", ratio_opt.alphabet,
                    "alphabet size for the brute engine (default n_P+n_Q)");
  ratio->add_option("--budget", ratio_opt.budget, "enumeration budget in simulated accesses");
  ratio->add_option("--out", ratio_opt.out_path, "write the CSV here instead of stdout");
  ratio->add_option("--pairs-out", ratio_opt.pairs_out,
                    "also write the achievable (p,q) pairs CSV here");
  ratio->callback([&] { run_ratio(ratio_opt); });

  // classify
  auto* classify = app.add_subcommand(
      "classify", "decide whether the leak ratios grow linearly or stay constant");
  std::string cls_p, cls_q;
  std::size_t cls_ceiling = kDefaultClassCeiling;
  classify->add_option("--p", cls_p, "policy P")->required();
  classify->add_option("--q", cls_q, "policy Q")->required();
  classify->add_option("--ceiling", cls_ceiling, "congruence class ceiling");
  classify->callback([&] { run_classify(cls_p, cls_q, cls_ceiling); });

  // witness
  auto* witness = app.add_subcommand("witness", "construct guaranteed witness traces");
  witness->require_subcommand(1);
  std::string wit_p, wit_q, wit_trace, wit_t1, wit_t2;
  int wit_k = 0, wit_len = 0, wit_alphabet = 0;
  std::uint64_t wit_budget = kDefaultEnumerationBudget;

  auto* equalize = witness->add_subcommand(
      "equalize", "trace on which both policies miss exactly Q(t) times");
  equalize->add_option("--p", wit_p)->required();
  equalize->add_option("--q", wit_q)->required();
  equalize->add_option("--trace", wit_trace)->required();
  equalize->callback([&] {
    const PolicyPtr p = make_policy(wit_p);
    const PolicyPtr q = make_policy(wit_q);
    TraceSet set;
    set.insert(build_equalizing_trace(*p, *q, parse_trace(wit_trace)));
    print_verification_table(std::cout, *p, *q, set);
  });

  auto* interpolate = witness->add_subcommand(
      "interpolate", "Q-equivalent trace with a chosen P-miss count");
  interpolate->add_option("--p", wit_p)->required();
  interpolate->add_option("--q", wit_q)->required();
  interpolate->add_option("--t1", wit_t1)->required();
  interpolate->add_option("--t2", wit_t2)->required();
  interpolate->add_option("--k", wit_k, "target P-miss count")->required();
  interpolate->callback([&] {
    const PolicyPtr p = make_policy(wit_p);
    const PolicyPtr q = make_policy(wit_q);
    TraceSet set;
    set.insert(interpolate_trace(*p, *q, parse_trace(wit_t1), parse_trace(wit_t2), wit_k));
    print_verification_table(std::cout, *p, *q, set);
  });

  auto* dense = witness->add_subcommand(
      "dense", "P-dense Q-equivalent set spanned by two endpoints");
  dense->add_option("--p", wit_p)->required();
  dense->add_option("--q", wit_q)->required();
  dense->add_option("--t1", wit_t1)->required();
  dense->add_option("--t2", wit_t2)->required();
  dense->callback([&] {
    const PolicyPtr p = make_policy(wit_p);
    const PolicyPtr q = make_policy(wit_q);
    const TraceSet set = build_dense_set(*p, *q, parse_trace(wit_t1), parse_trace(wit_t2));
    print_verification_table(std::cout, *p, *q, set);
  });

  auto* maxgap = witness->add_subcommand(
      "maxgap", "trace maximizing |P(t)-Q(t)| at a given length");
  maxgap->add_option("--p", wit_p)->required();
  maxgap->add_option("--q", wit_q)->required();
  maxgap->add_option("--len", wit_len, "trace length")->required()->check(CLI::PositiveNumber);
  maxgap->add_option("--alphabet", wit_alphabet, "alphabet size (default n_P+n_Q)");
  maxgap->add_option("--budget", wit_budget, "enumeration budget");
  maxgap->callback([&] {
    const PolicyPtr p = make_policy(wit_p);
    const PolicyPtr q = make_policy(wit_q);
    const int alphabet = wit_alphabet > 0 ? wit_alphabet : default_alphabet_size(*p, *q);
    const GapResult result =
        max_gap_search(*p, *q, wit_len, alphabet, EnumerationBudget{wit_budget});
    TraceSet set;
    set.insert(result.trace);
    print_verification_table(std::cout, *p, *q, set);
    std::cout << "gap=" << result.gap << "\n";
  });

  // pump
  auto* pump_cmd = app.add_subcommand("pump", "emit the m-times pumped witness trace");
  std::string pump_p, pump_q;
  int pump_m = 0;
  std::size_t pump_ceiling = kDefaultClassCeiling;
  pump_cmd->add_option("--p", pump_p, "policy P")->required();
  pump_cmd->add_option("--q", pump_q, "policy Q")->required();
  pump_cmd->add_option("--m", pump_m, "cycle repetition count")->required();
  pump_cmd->add_option("--ceiling", pump_ceiling, "congruence class ceiling");
  pump_cmd->callback([&] { run_pump(pump_p, pump_q, pump_m, pump_ceiling); });

  // figure1
  auto* figure1 = app.add_subcommand(
      "figure1", "write figure1a.csv and figure1b.csv (quotient engine, lengths 1..17)");
  std::string fig_dir = ".";
  figure1->add_option("--out-dir", fig_dir, "output directory (default .)");
  figure1->callback([&] { run_figure1(fig_dir); });

  // policies
  app.add_subcommand("policies", "list the shipped policy descriptors")
      ->callback([] { run_policies(); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    std::cerr << app.help() << "\n";
    return 1;
  } catch (const leakcomp::BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
