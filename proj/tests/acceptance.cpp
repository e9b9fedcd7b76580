// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "rcx/attribution.hpp"
#include "rcx/baselines.hpp"
#include "rcx/datasets.hpp"
#include "rcx/json_util.hpp"
#include "rcx/metrics.hpp"
#include "rcx/model_zoo.hpp"
#include "rcx/policy.hpp"
#include "rcx/screening.hpp"
#include "test_support.hpp"

namespace rcx {
namespace {

using testing::random_graph;
using testing::random_params;
using testing::random_policy;
using testing::small_spec;
using testing::TempDir;
using testing::tiny_spec;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Report {
 public:
  void run(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0.0 && secs > budget_s) {
      o.pass = false;
      o.detail += "; over the time budget";
    }
    std::printf("criterion %d %s: %s (%s; %.1fs)\n", id, name, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    std::fflush(stdout);
    all_pass_ = all_pass_ && o.pass;
  }
  bool all_pass() const { return all_pass_; }

 private:
  bool all_pass_ = true;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// --- 1 -----------------------------------------------------------------

Outcome gradients() {
  Rng rng(101);
  double target_worst = 0.0;
  double policy_worst = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  constexpr int kTrials = 120;
  for (int t = 0; t < kTrials; ++t) {
    const auto r = testing::target_gradient_trial(rng);
    target_worst = std::max(target_worst, r.max_rel_error);
    checked += r.checked;
    skipped += r.skipped;
  }
  for (int t = 0; t < kTrials; ++t) {
    const auto r = testing::policy_gradient_trial(rng);
    policy_worst = std::max(policy_worst, r.max_rel_error);
    checked += r.checked;
    skipped += r.skipped;
  }
  const double skip_frac = static_cast<double>(skipped) / static_cast<double>(checked + skipped);
  return {target_worst <= 1e-4 && policy_worst <= 1e-4 && skip_frac < 0.02,
          fmt("%.0f trials each; max rel error target %.2e policy %.2e; kink-skipped %.4f of coordinates",
              kTrials, target_worst, policy_worst, skip_frac)};
}

// --- 2 -----------------------------------------------------------------

struct Fixture {
  ModelParams model;
  Graph graph;
};

Fixture random_fixture(Rng& rng, std::size_t max_edges) {
  ModelParams model = random_params(small_spec(3, {4, 4}, 3, Readout::kSum), rng, 1.0);
  const std::size_t n = 3 + rng.below(5);
  Graph g = random_graph(rng, n, 1 + rng.below(max_edges), 3);
  return {std::move(model), std::move(g)};
}

Outcome oracle_equivalence() {
  Rng rng(202);
  int agree = 0;
  constexpr int kGraphs = 50;
  for (int t = 0; t < kGraphs; ++t) {
    const Fixture f = random_fixture(rng, 8);
    const AttributionContext ctx(f.model, f.graph,
                                 AttributionContext::predicted_class(f.model, f.graph));
    const EdgeSet best = brute_force_best_subgraph(ctx, 1);
    agree += best.indices() == std::vector<std::size_t>{greedy_screening(ctx, 1).steps[0].edge};
  }
  double worst = 0.0;
  constexpr int kTrajectories = 1000;
  for (int t = 0; t < kTrajectories; ++t) {
    const Fixture f = random_fixture(rng, 12);
    const AttributionContext ctx(f.model, f.graph, static_cast<int>(rng.below(3)));
    std::vector<std::size_t> order(f.graph.num_edges());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    order.resize(1 + rng.below(order.size()));
    EdgeSet prev;
    double sum = 0.0;
    for (std::size_t e : order) {
      sum += ice_edge(ctx, prev, e);
      prev.insert(e);
    }
    worst = std::max(worst, std::abs(sum - ice_subgraph(ctx, prev)));
  }
  return {agree == kGraphs && worst <= 1e-9,
          fmt("greedy step 1 = brute force K=1 on %.0f/%.0f graphs; telescoping max gap %.2e over %.0f trajectories",
              agree, kGraphs, worst, kTrajectories)};
}

// --- 3 -----------------------------------------------------------------

Outcome mdp_invariants() {
  Rng rng(303);
  const PolicySpec spec = tiny_spec(3, 3);
  double norm_gap = 0.0;
  bool support_ok = true;
  for (int t = 0; t < 500; ++t) {
    const PolicyParams p = random_policy(spec, rng, 1.5);
    const Graph g = random_graph(rng, 7, 2 + rng.below(14), 3);
    std::vector<std::size_t> pick;
    for (std::size_t e = 0; e + 1 < g.num_edges(); ++e) {
      if (rng.uniform() < 0.4) pick.push_back(e);
    }
    const EdgeSet selected(pick);
    const ActionDistribution d = action_distribution(p, g, selected, static_cast<int>(rng.below(3)));
    norm_gap = std::max(norm_gap, std::abs(d.probs.sum() - 1.0));
    support_ok = support_ok && d.candidates == edge_complement(g, selected).indices() &&
                 d.probs.minCoeff() > 0.0;
  }
  double shift_gap = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.below(12));
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.uniform(-10.0, 10.0);
    Eigen::VectorXd p1, l1, p2, l2;
    softmax_into(z, p1, l1);
    softmax_into((z.array() + rng.uniform(-100.0, 100.0)).matrix(), p2, l2);
    shift_gap = std::max(shift_gap, (p1 - p2).cwiseAbs().maxCoeff());
  }
  // 10,000 seeded single-step draws among three candidates.
  const PolicyParams p = random_policy(tiny_spec(3, 2), rng, 1.5);
  const ModelParams model = random_params(small_spec(3, {4, 4}, 2, Readout::kSum), rng);
  const Graph g("mc", Eigen::MatrixXd::Random(4, 3), {{0, 1}, {1, 2}, {2, 3}}, 0);
  const AttributionContext ctx(model, g, 0);
  const ActionDistribution d = action_distribution(p, g, EdgeSet{}, 0);
  constexpr int kDraws = 10000;
  std::vector<int> counts(3, 0);
  for (int s = 0; s < kDraws; ++s) {
    ++counts[rollout(p, ctx, 1, RolloutMode::kSample, static_cast<std::uint64_t>(s)).steps[0].edge];
  }
  double worst_z = 0.0;
  for (std::size_t e = 0; e < 3; ++e) {
    const double q = d.probs(static_cast<Eigen::Index>(e));
    worst_z = std::max(worst_z, std::abs(counts[e] - kDraws * q) / std::sqrt(kDraws * q * (1.0 - q)));
  }
  return {norm_gap <= 1e-9 && support_ok && shift_gap <= 1e-12 && worst_z <= 3.0,
          fmt("normalization gap %.2e; shift gap %.2e; Monte-Carlo worst |z| %.2f over 10000 draws",
              norm_gap, shift_gap, worst_z)};
}

// --- 4 and 6 -------------------------------------------------------------

// Planted-motif setup shared by the learning-signal and sanity-check runs.
constexpr std::uint64_t kMotifSeed = 1;
constexpr std::uint64_t kRandomizeSeed = 99;

struct Trained {
  Dataset data;
  ModelParams target;
  PolicyParams policy;
  std::vector<const Graph*> test;
  double target_accuracy = 0.0;
  int best_epoch = 0;
};

Trained train_motif_pipeline() {
  MotifConfig cfg;
  cfg.num_graphs = 300;
  cfg.seed = kMotifSeed;
  Dataset data = split_dataset(generate_planted_motif(cfg), kDefaultSplitRatios, cfg.seed);
  TrainHyper th;
  th.learning_rate = 0.005;
  th.seed = 1;
  TargetTrainResult target = train_target(data, default_target_spec(data), th);
  const double acc = evaluate_accuracy(target.params, data, Split::kTest);
  ExplainerHyper eh;
  eh.epochs = 50;
  // Full-length training rollouts: cycle motifs only pay off once every edge is in.
  eh.train_ratio = 1.0;
  eh.seed = 5;
  const PolicyParams init = init_policy(default_policy_spec(target.params.spec()), 3);
  ExplainerTrainResult rc = train_explainer(init, target.params, data, eh);
  Trained t{std::move(data), std::move(target.params), std::move(rc.policy), {}, acc, rc.best_epoch};
  for (std::size_t i : t.data.split(Split::kTest)) t.test.push_back(&t.data.graphs[i]);
  return t;
}

double mean_precision(const Trained& t, const Explainer& explainer) {
  double sum = 0.0;
  for (std::size_t i : t.data.split(Split::kTest)) {
    const Graph& g = t.data.graphs[i];
    const EdgeSet& truth = *t.data.ground_truth[i];
    const RankedEdges r = explainer(t.target, g, predict_class(t.target, g));
    sum += gt_precision_recall(r, truth, truth.size()).precision;
  }
  return sum / static_cast<double>(t.test.size());
}

Outcome learning_signal(const Trained& t) {
  const Explainer rc = make_rc_explainer(t.policy);
  const Explainer random = make_random_explainer(11);
  const double rc_acc = acc_curve(t.target, t.test, rc).accuracy[0];
  const double random_acc = acc_curve(t.target, t.test, random).accuracy[0];
  const double rc_prec = mean_precision(t, rc);
  const double random_prec = mean_precision(t, random);
  const bool pass = t.target_accuracy >= 0.9 && rc_acc - random_acc >= 0.15 &&
                    rc_prec - random_prec >= 0.2;
  return {pass, fmt("target test accuracy %.3f; ACC@10%% rc %.3f vs random %.3f; ", t.target_accuracy,
                    rc_acc, random_acc) +
                    fmt("precision@|truth| rc %.3f vs random %.3f; best epoch %.0f", rc_prec,
                        random_prec, t.best_epoch)};
}

Outcome sanity_sensitivity(const Trained& t) {
  const ModelParams randomized = randomized_clone(t.target, kRandomizeSeed);
  const double rc = sanity_check(make_rc_explainer(t.policy), t.target, randomized, t.test);
  const double blind = sanity_check(make_random_explainer(11), t.target, randomized, t.test);
  return {rc < blind && rc <= 0.9, fmt("SC rc %.3f; model-blind random %.3f", rc, blind)};
}

// --- 5 -----------------------------------------------------------------

Outcome metric_correctness() {
  Rng rng(505);
  int exact = 0;
  constexpr int kPerms = 1000;
  for (int t = 0; t < kPerms; ++t) {
    const std::size_t n = 2 + rng.below(60);
    std::vector<double> x(n), y(n);
    std::iota(x.begin(), x.end(), 1.0);
    std::iota(y.begin(), y.end(), 1.0);
    rng.shuffle(x);
    rng.shuffle(y);
    long long d2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto d = static_cast<long long>(x[i] - y[i]);
      d2 += d * d;
    }
    const auto nn = static_cast<long long>(n);
    const long long den = nn * (nn * nn - 1);
    exact += spearman(x, y) == static_cast<double>(den - 6 * d2) / static_cast<double>(den);
  }
  const ModelSpec spec = small_spec(2, {4}, 3, Readout::kSum);
  const ModelParams model = random_params(spec, rng, 1.5);
  const ModelParams other = random_params(spec, rng, 1.5);
  std::vector<Graph> graphs;
  for (int i = 0; i < 20; ++i) {
    graphs.push_back(random_graph(rng, 7, 3 + rng.below(12), 2, "g" + std::to_string(i)));
  }
  std::vector<const Graph*> ptrs;
  for (const Graph& g : graphs) ptrs.push_back(&g);
  const Explainer blind = make_random_explainer(3);
  const double cst = contrastivity(blind, model, ptrs);
  const double sc = sanity_check(blind, model, other, ptrs);
  const AccCurve curve = acc_curve(model, ptrs, make_greedy_explainer());
  double sum = 0.0;
  for (double a : curve.accuracy) sum += a;
  const bool auc_ok = curve.accuracy.size() == 10 && curve.auc == sum / 10.0;
  return {exact == kPerms && cst == 1.0 && sc == 1.0 && auc_ok,
          fmt("spearman exact on %.0f/%.0f permutations; CST %.3f; SC %.3f; ", exact, kPerms, cst, sc) +
              (auc_ok ? "AUC equals curve mean" : "AUC differs from curve mean")};
}

// --- 7 -----------------------------------------------------------------

int run_in(const std::filesystem::path& dir, const std::string& args) {
  const std::string cmd = "cd '" + dir.string() + "' && " + RCX_CLI_PATH + " " + args + " >/dev/null 2>&1";
  return std::system(cmd.c_str());
}

bool run_pipeline(const std::filesystem::path& dir) {
  const char* steps[] = {
      "gen-data --n 300 --seed 7 --out d.json",
      "train-target --data d.json --epochs 60 --seed 1 --out m.json",
      "train-explainer --data d.json --model m.json --epochs 3 --seed 2 --out pol.json",
      "explain --data d.json --model m.json --policy pol.json --beam 4 --out e_rc.json",
      "explain --data d.json --model m.json --method random --seed 3 --split all --out e_random.json",
      "--threads 2 explain --data d.json --model m.json --method greedy --split valid --out e_greedy.json",
      "evaluate --data d.json --model m.json --policy pol.json --seed 3 --out r.csv",
      "sanity-check --data d.json --model m.json --policy pol.json --out sc.csv",
      "export-dot --data d.json --graph g0003 --explanations e_random.json --out g.dot",
  };
  for (const char* s : steps) {
    if (run_in(dir, s) != 0) {
      std::printf("  pipeline step failed: %s\n", s);
      return false;
    }
  }
  return true;
}

Outcome determinism() {
  TempDir a("accept-a");
  TempDir b("accept-b");
  if (!run_pipeline(a.path()) || !run_pipeline(b.path())) return {false, "pipeline failed"};
  std::size_t files = 0;
  std::vector<std::string> differ;
  for (const auto& entry : std::filesystem::directory_iterator(a.path())) {
    const std::string name = entry.path().filename().string();
    ++files;
    if (!std::filesystem::exists(b / name) ||
        read_text_file(entry.path()) != read_text_file(b / name)) {
      differ.push_back(name);
    }
  }
  const std::size_t files_b = static_cast<std::size_t>(
      std::distance(std::filesystem::directory_iterator(b.path()), std::filesystem::directory_iterator{}));
  std::string detail = std::to_string(files) + " artifacts compared";
  for (const std::string& d : differ) detail += "; differs: " + d;
  return {differ.empty() && files == files_b && files > 0, detail};
}

// --- 8 -----------------------------------------------------------------

// Every length-k sequence of distinct edges, with the beam's final ordering.
BeamEntry exhaustive_best(const PolicyParams& p, const AttributionContext& ctx, std::size_t k,
                          std::size_t* count) {
  const EncodedGraph enc = encode_graph(p, ctx.graph());
  std::vector<BeamEntry> all;
  std::vector<std::size_t> seq;
  std::function<void(double, double)> rec = [&](double lp, double rw) {
    if (seq.size() == k) {
      all.push_back({seq, lp, rw, 0.0});
      return;
    }
    const EdgeSet prev(seq);
    const ActionDistribution d = action_distribution(p, enc, prev, ctx.target_class());
    for (std::size_t i = 0; i < d.candidates.size(); ++i) {
      const double r = reward(ctx, prev, d.candidates[i], RewardMode::kMutualInformation);
      seq.push_back(d.candidates[i]);
      rec(lp + d.log_probs(static_cast<Eigen::Index>(i)), rw + r);
      seq.pop_back();
    }
  };
  rec(0.0, 0.0);
  *count = all.size();
  BeamEntry best = all.front();
  for (const BeamEntry& e : all) {
    if (e.reward > best.reward ||
        (e.reward == best.reward &&
         (e.log_prob > best.log_prob || (e.log_prob == best.log_prob && e.sequence < best.sequence)))) {
      best = e;
    }
  }
  return best;
}

Outcome beam_search_checks() {
  Rng rng(808);
  const PolicySpec spec = tiny_spec(3, 2);
  int width_one = 0;
  constexpr int kGraphs = 100;
  for (int t = 0; t < kGraphs; ++t) {
    const PolicyParams p = random_policy(spec, rng);
    const ModelParams model = random_params(small_spec(3, {4, 4}, 2, Readout::kSum), rng);
    const Graph g = random_graph(rng, 7, 3 + rng.below(12), 3);
    const AttributionContext ctx(model, g, static_cast<int>(rng.below(2)));
    const std::size_t k = 1 + rng.below(g.num_edges());
    const Trajectory greedy = rollout(p, ctx, k, RolloutMode::kGreedy, 0);
    const BeamResult beam = beam_search(p, ctx, k, 1);
    width_one += beam.best.sequence == greedy.edge_order() && beam.best.reward == greedy.total_reward();
  }
  int exhaustive = 0;
  for (int t = 0; t < kGraphs; ++t) {
    const PolicyParams p = random_policy(spec, rng, 2.0);
    const ModelParams model = random_params(small_spec(3, {4, 4}, 2, Readout::kSum), rng);
    const Graph g = random_graph(rng, 5, 1 + rng.below(5), 3);
    const AttributionContext ctx(model, g, static_cast<int>(rng.below(2)));
    const std::size_t k = 1 + rng.below(std::min<std::size_t>(3, g.num_edges()));
    std::size_t count = 0;
    const BeamEntry expected = exhaustive_best(p, ctx, k, &count);
    const BeamResult beam = beam_search(p, ctx, k, count);
    exhaustive += beam.best.sequence == expected.sequence && beam.best.reward == expected.reward &&
                  beam.best.log_prob == expected.log_prob;
  }
  return {width_one == kGraphs && exhaustive == kGraphs,
          fmt("width 1 = greedy rollout on %.0f/%.0f graphs; exhaustive width = enumeration on %.0f/%.0f",
              width_one, kGraphs, exhaustive, kGraphs)};
}

}  // namespace
}  // namespace rcx

int main() {
  using namespace rcx;
  Report report;
  report.run(1, "gradient correctness", 120.0, gradients);
  report.run(2, "oracle equivalence", 60.0, oracle_equivalence);
  report.run(3, "mdp and softmax invariants", 60.0, mdp_invariants);

  std::optional<Trained> trained;
  const auto t0 = std::chrono::steady_clock::now();
  std::string train_error;
  try {
    trained = train_motif_pipeline();
  } catch (const std::exception& e) {
    train_error = e.what();
  }
  const double train_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report.run(4, "end-to-end learning signal", 900.0 - train_s, [&]() -> Outcome {
    if (!trained) return {false, "training failed: " + train_error};
    Outcome o = learning_signal(*trained);
    o.detail += fmt("; training %.1fs", train_s);
    return o;
  });
  report.run(5, "metric correctness", 60.0, metric_correctness);
  report.run(6, "sanity-check sensitivity", 300.0, [&]() -> Outcome {
    if (!trained) return {false, "training failed: " + train_error};
    return sanity_sensitivity(*trained);
  });
  report.run(7, "determinism", 0.0, determinism);
  report.run(8, "beam search", 120.0, beam_search_checks);
  std::printf("%s\n", report.all_pass() ? "ALL PASS" : "SOME CRITERIA FAILED");
  return report.all_pass() ? 0 : 1;
}
