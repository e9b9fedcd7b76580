// rcx: generate data, train the target model and the explainer, explain,
// evaluate and benchmark. Exit codes: 0 success, 1 validation or usage
// error, 2 runtime failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "manifest.hpp"
#include "rcx/baselines.hpp"
#include "rcx/datasets.hpp"
#include "rcx/dot.hpp"
#include "rcx/error.hpp"
#include "rcx/explanation_io.hpp"
#include "rcx/json_util.hpp"
#include "rcx/metrics.hpp"
#include "rcx/model_zoo.hpp"
#include "rcx/policy.hpp"
#include "rcx/rng.hpp"
#include "rcx/screening.hpp"

namespace fs = std::filesystem;
using namespace rcx;

namespace {

std::uint64_t default_seed() {
  const char* env = std::getenv("RCX_SEED");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0') throw ValidationError(std::string("RCX_SEED is not an integer: ") + env);
  return v;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  fs::path out = p;
  out += suffix;
  return out;
}

Split parse_split_flag(const std::string& s) { return parse_split(s); }

std::vector<const Graph*> graphs_for(const Dataset& d, const std::string& split,
                                     const std::string& graph_id) {
  std::vector<const Graph*> out;
  if (!graph_id.empty()) {
    for (const Graph& g : d.graphs) {
      if (g.id() == graph_id) out.push_back(&g);
    }
    if (out.empty()) throw ValidationError("no graph with id '" + graph_id + "'");
    return out;
  }
  if (split == "all") {
    for (const Graph& g : d.graphs) out.push_back(&g);
    return out;
  }
  if (!d.is_split()) throw ValidationError("dataset has no splits; use --split all");
  out = split_graphs(d, parse_split_flag(split));
  if (out.empty()) throw ValidationError("split '" + split + "' is empty");
  return out;
}

// Flags of the active subcommand (and global flags) as strings, for the manifest.
std::map<std::string, std::string> collect_flags(const CLI::App& app, const CLI::App& sub) {
  std::map<std::string, std::string> flags;
  auto add = [&](const CLI::App& a) {
    for (const CLI::Option* opt : a.get_options()) {
      const std::string name = opt->get_name();
      if (name == "--help" || name == "--config" || name.empty()) continue;
      std::string value;
      if (opt->count() > 0) {
        for (const std::string& r : opt->results()) value += (value.empty() ? "" : ",") + r;
      } else {
        value = opt->get_default_str();
      }
      flags[name] = value;
    }
  };
  add(app);
  add(sub);
  return flags;
}

struct Common {
  int threads = 1;
  std::uint64_t seed = 0;
};

Explainer make_method(const std::string& method, const std::optional<PolicyParams>& policy,
                      std::uint64_t seed, int threads) {
  if (method == "rc") {
    if (!policy) throw ValidationError("method 'rc' needs --policy");
    return make_rc_explainer(*policy);
  }
  if (method == "greedy") return make_greedy_explainer(kDefaultProbFloor, threads);
  if (method == "random") return make_random_explainer(seed);
  if (method == "occlusion") return make_occlusion_explainer(kDefaultProbFloor, threads);
  throw ValidationError("unknown method '" + method + "' (expected rc|greedy|random|occlusion)");
}

std::optional<PolicyParams> load_policy(const std::string& path, const ModelParams& model) {
  if (path.empty()) return std::nullopt;
  PolicyParams p = read_policy(path);
  if (p.spec().num_classes != model.spec().num_classes) {
    throw ValidationError("policy has " + std::to_string(p.spec().num_classes) +
                          " class heads, model has " + std::to_string(model.spec().num_classes));
  }
  return p;
}

// Small connected graph with exactly m edges and degree one-hot features.
Graph bench_graph(std::size_t m, std::size_t feature_dim, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = m * 3 / 4 + 1;
  std::vector<Edge> edges;
  std::vector<std::size_t> degree(n, 0);
  for (std::size_t v = 1; v < n; ++v) {
    const std::size_t parent = rng.below(v);
    edges.push_back({parent, v});
    ++degree[parent];
    ++degree[v];
  }
  while (edges.size() < m) {
    Edge e{rng.below(n), rng.below(n)};
    if (e.u == e.v) continue;
    if (e.u > e.v) std::swap(e.u, e.v);
    if (std::find(edges.begin(), edges.end(), e) != edges.end()) continue;
    edges.push_back(e);
    ++degree[e.u];
    ++degree[e.v];
  }
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(feature_dim));
  for (std::size_t v = 0; v < n; ++v) {
    x(static_cast<Eigen::Index>(v),
      static_cast<Eigen::Index>(std::min(degree[v], feature_dim - 1))) = 1.0;
  }
  return Graph("bench-" + std::to_string(m), std::move(x), std::move(edges), 0);
}

std::string machine_descriptor() {
  std::string cpu = "unknown";
  std::ifstream info("/proc/cpuinfo");
  std::string line;
  while (std::getline(info, line)) {
    if (line.rfind("model name", 0) == 0) {
      cpu = line.substr(line.find(':') + 2);
      break;
    }
  }
  return cpu + "; hardware threads " + std::to_string(std::thread::hardware_concurrency()) +
         "; compiler " + __VERSION__;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rcx: causal screening and RC-Explainer for graph classifiers"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value config file; command-line flags win");
  Common common;
  try {
    common.seed = default_seed();
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  app.add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber);

  std::function<void()> run;
  cli::Manifest manifest;
  fs::path manifest_anchor;

  // gen-data
  MotifConfig gen;
  std::vector<double> ratios{kDefaultSplitRatios.begin(), kDefaultSplitRatios.end()};
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate and split a planted-motif dataset");
  gen_cmd->add_option("--n", gen.num_graphs, "Number of graphs");
  gen_cmd->add_option("--classes", gen.num_classes, "Number of classes (2 or 3)");
  gen_cmd->add_option("--base-nodes", gen.base_nodes, "Minimum base graph size");
  gen_cmd->add_option("--feature-width", gen.feature_width, "Degree one-hot width");
  gen_cmd->add_option("--extra-ratio", gen.extra_edge_ratio, "Max extra base edges per node");
  gen_cmd->add_option("--ratios", ratios, "train,valid,test ratios")->delimiter(',')->expected(3);
  gen_cmd->add_option("--seed", common.seed, "Seed (default: $RCX_SEED or 0)");
  gen_cmd->add_option("--out", gen_out, "Output dataset JSON")->required();
  gen_cmd->callback([&] {
    run = [&] {
      gen.seed = common.seed;
      Dataset d = split_dataset(generate_planted_motif(gen), {ratios[0], ratios[1], ratios[2]},
                                common.seed);
      write_dataset(d, gen_out);
      manifest.seeds["seed"] = common.seed;
      manifest.outputs = {gen_out};
      manifest_anchor = gen_out;
      std::cout << "wrote " << d.graphs.size() << " graphs to " << gen_out << "\n";
    };
  });

  // train-target
  TrainHyper th;
  th.learning_rate = 0.005;
  std::string tt_data, tt_out, tt_log;
  auto* tt_cmd = app.add_subcommand("train-target", "Train the target graph classifier");
  tt_cmd->add_option("--data", tt_data, "Dataset JSON")->required();
  tt_cmd->add_option("--out", tt_out, "Output model JSON")->required();
  tt_cmd->add_option("--log", tt_log, "Training log CSV (default: <out>.log.csv)");
  tt_cmd->add_option("--epochs", th.epochs);
  tt_cmd->add_option("--lr", th.learning_rate);
  tt_cmd->add_option("--weight-decay", th.weight_decay);
  tt_cmd->add_option("--patience", th.patience);
  tt_cmd->add_option("--batch-size", th.batch_size, "0 = full batch");
  tt_cmd->add_option("--seed", common.seed, "Seed (default: $RCX_SEED or 0)");
  tt_cmd->callback([&] {
    run = [&] {
      const Dataset d = read_dataset(tt_data);
      th.seed = common.seed;
      const TargetTrainResult r = train_target(d, default_target_spec(d), th);
      const fs::path log = tt_log.empty() ? with_suffix(tt_out, ".log.csv") : fs::path(tt_log);
      write_params(r.params, tt_out);
      write_target_log(r.log, log);
      manifest.seeds["seed"] = common.seed;
      manifest.inputs = {tt_data};
      manifest.outputs = {tt_out, log};
      manifest.extra["best_epoch"] = r.best_epoch;
      manifest_anchor = tt_out;
      if (d.is_split() && !d.split(Split::kTest).empty()) {
        const double acc = evaluate_accuracy(r.params, d, Split::kTest);
        manifest.extra["test_accuracy"] = acc;
        std::cout << "test accuracy " << fmt(acc) << "\n";
      }
    };
  });

  // train-explainer
  ExplainerHyper eh;
  std::string te_data, te_model, te_out, te_log, te_reward = "mi", te_rollout = "sample";
  int te_width = 32;
  auto* te_cmd = app.add_subcommand("train-explainer", "Train the RC-Explainer policy");
  te_cmd->add_option("--data", te_data, "Dataset JSON")->required();
  te_cmd->add_option("--model", te_model, "Trained target model JSON")->required();
  te_cmd->add_option("--out", te_out, "Output policy JSON")->required();
  te_cmd->add_option("--log", te_log, "Training log CSV (default: <out>.log.csv)");
  te_cmd->add_option("--epochs", eh.epochs);
  te_cmd->add_option("--lr", eh.learning_rate);
  te_cmd->add_option("--weight-decay", eh.weight_decay);
  te_cmd->add_option("--train-ratio", eh.train_ratio, "Trajectory length as a fraction of |E|");
  te_cmd->add_option("--batch-size", eh.batch_size);
  te_cmd->add_option("--reward", te_reward, "mi|binary|ce");
  te_cmd->add_option("--rollout", te_rollout, "sample|greedy");
  te_cmd->add_flag("--baseline", eh.use_baseline, "Subtract a moving-average reward baseline");
  te_cmd->add_option("--width", te_width, "Encoder width d'");
  te_cmd->add_option("--seed", common.seed, "Seed (default: $RCX_SEED or 0)");
  te_cmd->callback([&] {
    run = [&] {
      const Dataset d = read_dataset(te_data);
      const ModelParams model = read_params(te_model);
      eh.reward_mode = parse_reward_mode(te_reward);
      eh.rollout_mode = parse_rollout_mode(te_rollout);
      eh.seed = common.seed;
      eh.threads = common.threads;
      const std::size_t edge_dim = d.graphs.empty() ? 0 : d.graphs.front().edge_feature_dim();
      const PolicyParams init = init_policy(
          default_policy_spec(model.spec(), static_cast<int>(edge_dim), te_width),
          mix_seed(common.seed, 0x5eed));
      const ExplainerTrainResult r = train_explainer(init, model, d, eh);
      const fs::path log = te_log.empty() ? with_suffix(te_out, ".log.csv") : fs::path(te_log);
      write_policy(r.policy, te_out);
      write_explainer_log(r.log, log);
      manifest.seeds["seed"] = common.seed;
      manifest.inputs = {te_data, te_model};
      manifest.outputs = {te_out, log};
      manifest.extra["best_epoch"] = r.best_epoch;
      manifest_anchor = te_out;
      std::cout << "best epoch " << r.best_epoch << ", valid ACC-AUC "
                << fmt(r.log[static_cast<std::size_t>(r.best_epoch)].valid_acc_auc) << "\n";
    };
  });

  // explain
  std::string ex_data, ex_model, ex_policy, ex_method = "rc", ex_split = "test", ex_graph, ex_out,
                                           ex_reward = "mi";
  double ex_ratio = 1.0;
  std::size_t ex_beam = 1;
  auto* ex_cmd = app.add_subcommand("explain", "Rank the edges of each graph");
  ex_cmd->add_option("--data", ex_data, "Dataset JSON")->required();
  ex_cmd->add_option("--model", ex_model, "Trained target model JSON")->required();
  ex_cmd->add_option("--policy", ex_policy, "Policy JSON (method rc)");
  ex_cmd->add_option("--method", ex_method, "rc|greedy|random|occlusion");
  ex_cmd->add_option("--ratio", ex_ratio, "Explanation size as a fraction of |E|");
  ex_cmd->add_option("--beam", ex_beam, "Beam width for method rc (1 = greedy rollout)");
  ex_cmd->add_option("--reward", ex_reward, "Beam reward: mi|binary|ce");
  ex_cmd->add_option("--split", ex_split, "train|valid|test|all");
  ex_cmd->add_option("--graph", ex_graph, "Explain a single graph id");
  ex_cmd->add_option("--seed", common.seed, "Seed for the random method");
  ex_cmd->add_option("--out", ex_out, "Output explanations JSON")->required();
  ex_cmd->callback([&] {
    run = [&] {
      const Dataset d = read_dataset(ex_data);
      const ModelParams model = read_params(ex_model);
      const auto policy = load_policy(ex_policy, model);
      if (ex_beam < 1) throw ValidationError("--beam must be >= 1");
      if (ex_beam > 1 && ex_method != "rc") throw ValidationError("--beam applies to method rc");
      const RewardMode reward = parse_reward_mode(ex_reward);
      const Explainer explainer = make_method(ex_method, policy, common.seed, common.threads);
      ExplanationFile file{ex_method, ex_ratio, {}};
      for (const Graph* g : graphs_for(d, ex_split, ex_graph)) {
        const int target = predict_class(model, *g);
        const std::size_t k = selection_size(ex_ratio, g->num_edges());
        RankedEdges ranked;
        if (ex_beam > 1 && k > 0) {
          const AttributionContext ctx(model, *g, target);
          ranked = beam_explain(*policy, ctx, k, ex_beam, reward);
        } else {
          ranked = explainer(model, *g, target);
        }
        file.graphs.push_back({g->id(), target, std::move(ranked), k});
      }
      write_explanations(file, ex_out);
      manifest.seeds["seed"] = common.seed;
      manifest.inputs = {ex_data, ex_model};
      if (!ex_policy.empty()) manifest.inputs.emplace_back(ex_policy);
      manifest.outputs = {ex_out};
      manifest_anchor = ex_out;
    };
  });

  // evaluate
  std::string ev_data, ev_model, ev_policy, ev_methods = "rc,random,occlusion",
                                            ev_metrics = "acc,auc,cst,sc,gt", ev_split = "test",
                                            ev_out, ev_curve;
  std::uint64_t ev_randomize_seed = 1;
  auto* ev_cmd = app.add_subcommand("evaluate", "Score explainers with ACC, ACC-AUC, CST, SC, GT");
  ev_cmd->add_option("--data", ev_data, "Dataset JSON")->required();
  ev_cmd->add_option("--model", ev_model, "Trained target model JSON")->required();
  ev_cmd->add_option("--policy", ev_policy, "Policy JSON (method rc)");
  ev_cmd->add_option("--methods", ev_methods, "Comma-separated methods");
  ev_cmd->add_option("--metrics", ev_metrics, "Comma-separated subset of acc,auc,cst,sc,gt");
  ev_cmd->add_option("--split", ev_split, "train|valid|test|all");
  ev_cmd->add_option("--randomize-seed", ev_randomize_seed, "Seed of the randomized clone (SC)");
  ev_cmd->add_option("--seed", common.seed, "Seed for the random method");
  ev_cmd->add_option("--out", ev_out, "Output results CSV (method,metric,value)")->required();
  ev_cmd->add_option("--curve-out", ev_curve, "ACC curve CSV (default: <out>.curve.csv)");
  ev_cmd->callback([&] {
    run = [&] {
      const Dataset d = read_dataset(ev_data);
      const ModelParams model = read_params(ev_model);
      const auto policy = load_policy(ev_policy, model);
      const auto graphs = graphs_for(d, ev_split, "");
      std::set<std::string> metrics;
      for (const std::string& m : split_list(ev_metrics)) {
        if (m != "acc" && m != "auc" && m != "cst" && m != "sc" && m != "gt") {
          throw ValidationError("unknown metric '" + m + "'");
        }
        metrics.insert(m);
      }
      std::ostringstream results;
      std::ostringstream curve_csv;
      results << "method,metric,value\n";
      curve_csv << "method,ratio,accuracy\n";
      const ModelParams randomized = randomized_clone(model, ev_randomize_seed);
      for (const std::string& method : split_list(ev_methods)) {
        const Explainer ex = make_method(method, policy, common.seed, common.threads);
        std::vector<RankedEdges> rankings(graphs.size());
        for (std::size_t i = 0; i < graphs.size(); ++i) {
          rankings[i] = ex(model, *graphs[i], predict_class(model, *graphs[i]));
        }
        const AccCurve curve = acc_curve(model, graphs, rankings);
        for (std::size_t r = 0; r < curve.ratios.size(); ++r) {
          curve_csv << method << "," << fmt(curve.ratios[r]) << "," << fmt(curve.accuracy[r])
                    << "\n";
          if (metrics.count("acc")) {
            results << method << ",acc@" << fmt(curve.ratios[r]) << ","
                    << fmt(curve.accuracy[r]) << "\n";
          }
        }
        if (metrics.count("auc")) results << method << ",acc_auc," << fmt(curve.auc) << "\n";
        if (metrics.count("cst")) {
          std::size_t undefined = 0;
          const double cst = contrastivity(ex, model, graphs, common.threads, &undefined);
          results << method << ",cst," << fmt(cst) << "\n";
          results << method << ",cst_undefined," << undefined << "\n";
        }
        if (metrics.count("sc")) {
          std::size_t undefined = 0;
          const double sc = sanity_check(ex, model, randomized, graphs, common.threads, &undefined);
          results << method << ",sc," << fmt(sc) << "\n";
          results << method << ",sc_undefined," << undefined << "\n";
        }
        if (metrics.count("gt")) {
          double precision = 0.0;
          double recall = 0.0;
          std::size_t counted = 0;
          for (std::size_t i = 0; i < graphs.size(); ++i) {
            const std::size_t gi = static_cast<std::size_t>(graphs[i] - d.graphs.data());
            if (d.ground_truth.empty() || !d.ground_truth[gi]) continue;
            const EdgeSet& truth = *d.ground_truth[gi];
            const PrecisionRecall pr = gt_precision_recall(rankings[i], truth, truth.size());
            precision += pr.precision;
            recall += pr.recall;
            ++counted;
          }
          if (counted == 0) throw ValidationError("metric gt needs ground-truth edges");
          results << method << ",gt_precision," << fmt(precision / static_cast<double>(counted))
                  << "\n";
          results << method << ",gt_recall," << fmt(recall / static_cast<double>(counted))
                  << "\n";
        }
      }
      const fs::path curve_path =
          ev_curve.empty() ? with_suffix(ev_out, ".curve.csv") : fs::path(ev_curve);
      write_text_file(ev_out, results.str());
      write_text_file(curve_path, curve_csv.str());
      std::cout << results.str();
      manifest.seeds["seed"] = common.seed;
      manifest.seeds["randomize_seed"] = ev_randomize_seed;
      manifest.inputs = {ev_data, ev_model};
      if (!ev_policy.empty()) manifest.inputs.emplace_back(ev_policy);
      manifest.outputs = {ev_out, curve_path};
      manifest_anchor = ev_out;
    };
  });

  // sanity-check
  std::string sc_data, sc_model, sc_policy, sc_methods = "rc,random", sc_split = "test", sc_out;
  std::uint64_t sc_randomize_seed = 1;
  auto* sc_cmd = app.add_subcommand("sanity-check", "SC of each method against a randomized clone");
  sc_cmd->add_option("--data", sc_data, "Dataset JSON")->required();
  sc_cmd->add_option("--model", sc_model, "Trained target model JSON")->required();
  sc_cmd->add_option("--policy", sc_policy, "Policy JSON (method rc)");
  sc_cmd->add_option("--methods", sc_methods, "Comma-separated methods");
  sc_cmd->add_option("--split", sc_split, "train|valid|test|all");
  sc_cmd->add_option("--randomize-seed", sc_randomize_seed, "Seed of the randomized clone");
  sc_cmd->add_option("--seed", common.seed, "Seed for the random method");
  sc_cmd->add_option("--out", sc_out, "Output CSV (method,sc)")->required();
  sc_cmd->callback([&] {
    run = [&] {
      const Dataset d = read_dataset(sc_data);
      const ModelParams model = read_params(sc_model);
      const auto policy = load_policy(sc_policy, model);
      const auto graphs = graphs_for(d, sc_split, "");
      const ModelParams randomized = randomized_clone(model, sc_randomize_seed);
      std::ostringstream out;
      out << "method,sc,undefined_graphs\n";
      for (const std::string& method : split_list(sc_methods)) {
        const Explainer ex = make_method(method, policy, common.seed, common.threads);
        std::size_t undefined = 0;
        const double sc = sanity_check(ex, model, randomized, graphs, common.threads, &undefined);
        out << method << "," << fmt(sc) << "," << undefined << "\n";
      }
      write_text_file(sc_out, out.str());
      std::cout << out.str();
      manifest.seeds["seed"] = common.seed;
      manifest.seeds["randomize_seed"] = sc_randomize_seed;
      manifest.inputs = {sc_data, sc_model};
      if (!sc_policy.empty()) manifest.inputs.emplace_back(sc_policy);
      manifest.outputs = {sc_out};
      manifest_anchor = sc_out;
    };
  });

  // export-dot
  std::string dot_data, dot_graph, dot_expl, dot_out;
  auto* dot_cmd = app.add_subcommand("export-dot", "Render one graph and its explanation as DOT");
  dot_cmd->add_option("--data", dot_data, "Dataset JSON")->required();
  dot_cmd->add_option("--graph", dot_graph, "Graph id")->required();
  dot_cmd->add_option("--explanations", dot_expl, "Explanations JSON from `explain`");
  dot_cmd->add_option("--out", dot_out, "Output .dot file")->required();
  dot_cmd->callback([&] {
    run = [&] {
      const Dataset d = read_dataset(dot_data);
      const Graph& g = *graphs_for(d, "all", dot_graph).front();
      RankedEdges ranked;
      if (!dot_expl.empty()) {
        ranked = read_explanations(dot_expl).find(dot_graph).ranked;
        ranked.validate(g.num_edges());
      }
      export_dot(g, ranked, dot_out);
      manifest.inputs = {dot_data};
      if (!dot_expl.empty()) manifest.inputs.emplace_back(dot_expl);
      manifest.outputs = {dot_out};
      manifest_anchor = dot_out;
    };
  });

  // bench
  std::string bn_data, bn_model, bn_policy, bn_methods = "random,occlusion,greedy,rc",
                                             bn_split = "test", bn_out;
  std::size_t bn_k = 5;
  auto* bn_cmd = app.add_subcommand("bench", "Time explainers per graph (single-threaded)");
  bn_cmd->add_option("--data", bn_data, "Dataset JSON")->required();
  bn_cmd->add_option("--model", bn_model, "Trained target model JSON")->required();
  bn_cmd->add_option("--policy", bn_policy, "Policy JSON (method rc)");
  bn_cmd->add_option("--methods", bn_methods, "Comma-separated methods");
  bn_cmd->add_option("--split", bn_split, "train|valid|test|all");
  bn_cmd->add_option("--scaling-k", bn_k, "Fixed K for the greedy |E| scaling rows");
  bn_cmd->add_option("--seed", common.seed, "Seed for the random method and scaling graphs");
  bn_cmd->add_option("--out", bn_out, "Output timing CSV")->required();
  bn_cmd->callback([&] {
    run = [&] {
      using clock = std::chrono::steady_clock;
      const Dataset d = read_dataset(bn_data);
      const ModelParams model = read_params(bn_model);
      const auto policy = load_policy(bn_policy, model);
      const auto graphs = graphs_for(d, bn_split, "");
      std::ostringstream out;
      out << "kind,name,num_edges,k,seconds_per_graph,graphs\n";
      for (const std::string& method : split_list(bn_methods)) {
        if (method == "rc" && !policy) continue;
        const Explainer ex = make_method(method, policy, common.seed, 1);
        // Warm start: one untimed call.
        ex(model, *graphs.front(), predict_class(model, *graphs.front()));
        std::vector<int> targets;
        for (const Graph* g : graphs) targets.push_back(predict_class(model, *g));
        const auto t0 = clock::now();
        for (std::size_t i = 0; i < graphs.size(); ++i) ex(model, *graphs[i], targets[i]);
        const double secs = std::chrono::duration<double>(clock::now() - t0).count();
        out << "method," << method << ",,," << fmt(secs / static_cast<double>(graphs.size()))
            << "," << graphs.size() << "\n";
      }
      for (std::size_t m : {10, 20, 40}) {
        const Graph g = bench_graph(m, static_cast<std::size_t>(model.spec().input_dim()),
                                    mix_seed(common.seed, m));
        const AttributionContext ctx(model, g, predict_class(model, g));
        const std::size_t k = std::min(bn_k, m);
        greedy_screening(ctx, k);
        constexpr int kRepeats = 5;
        const auto t0 = clock::now();
        for (int r = 0; r < kRepeats; ++r) greedy_screening(ctx, k);
        const double secs = std::chrono::duration<double>(clock::now() - t0).count() / kRepeats;
        out << "greedy_scaling,greedy," << m << "," << k << "," << fmt(secs) << ",1\n";
      }
      write_text_file(bn_out, out.str());
      std::cout << "machine: " << machine_descriptor() << "\n" << out.str();
      manifest.seeds["seed"] = common.seed;
      manifest.inputs = {bn_data, bn_model};
      if (!bn_policy.empty()) manifest.inputs.emplace_back(bn_policy);
      manifest.outputs = {bn_out};
      manifest.extra["machine"] = machine_descriptor();
      manifest_anchor = bn_out;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    run();
    const CLI::App* sub = app.get_subcommands().front();
    manifest.command = sub->get_name();
    manifest.flags = collect_flags(app, *sub);
    cli::write_manifest(manifest, manifest_anchor);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
