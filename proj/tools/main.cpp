// placekit: command-line front end for the layout engine.
//
// Subcommands: solve, train, eval, render, classify, vrpos, ged.  Global
// options layer on top of an optional config file and environment variables
// (flags > env > file > defaults); the resolved configuration is embedded in
// every report artifact so runs can be reproduced.
//
// Exit codes: 0 success, 1 IO/internal failure, 2 usage or validation
// failure, 3 solver or matcher capacity exhausted.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "placekit/agent.hpp"
#include "placekit/baselines.hpp"
#include "placekit/config.hpp"
#include "placekit/energy.hpp"
#include "placekit/error.hpp"
#include "placekit/metrics.hpp"
#include "placekit/render.hpp"
#include "placekit/roles.hpp"
#include "placekit/scene.hpp"
#include "placekit/vr.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace placekit;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse:
    case ErrorKind::schema:
    case ErrorKind::reference:
    case ErrorKind::contract:
      return 2;
    case ErrorKind::capacity:
      return 3;
    case ErrorKind::network:
    case ErrorKind::timeout:
    case ErrorKind::io:
      return 1;
  }
  return 1;
}

// Input paths are checked up front so a typo surfaces as a validation error
// (exit 2) rather than as the IO failure reserved for write-side problems.
void require_input_file(const std::string& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw_error(ErrorKind::contract, "missing input file: " + path);
}

void require_input_dir(const std::string& path) {
  std::error_code ec;
  if (!std::filesystem::is_directory(path, ec))
    throw_error(ErrorKind::contract, "missing input directory: " + path);
}

// Sibling artifact path: swaps the final extension, so "out/run.json" ->
// "out/run.report.json".
std::string sibling_path(const std::string& out_path, const std::string& new_extension) {
  std::filesystem::path p(out_path);
  p.replace_extension(new_extension);
  return p.string();
}

int effective_jobs(const RunConfig& config) {
  if (config.jobs > 0) return config.jobs;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

json config_json(const RunConfig& config) { return json::parse(run_config_json(config)); }

json metrics_json(const LayoutReport& report) {
  json j;
  j["cnt_pct"] = report.cnt_pct;
  j["sr"] = report.sr;
  j["nav_pct"] = report.nav_pct;
  j["key_nav_pct"] = report.key_nav_pct;
  j["oob_pct"] = report.oob_pct;
  j["pto_seconds"] = report.pto_seconds;
  return j;
}

json energy_json(const EnergyBreakdown& energy) {
  json j;
  j["relational"] = energy.relational;
  j["collision"] = energy.collision;
  j["out_of_bounds"] = energy.out_of_bounds;
  j["navigation"] = energy.navigation;
  j["affordance"] = energy.affordance;
  j["total"] = energy.total;
  return j;
}

// Scene corpus listing shared by train: *.json files that are not layout or
// graph sidecars, in filename order (the same selection eval applies).
std::vector<std::string> corpus_scene_files(const std::string& dir) {
  std::vector<std::string> files;
  try {
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      const std::string name = entry.path().filename().string();
      if (entry.path().extension() != ".json") continue;
      if (name.size() > 11 && name.substr(name.size() - 11) == ".graph.json") continue;
      if (name.size() > 12 && name.substr(name.size() - 12) == ".layout.json") continue;
      files.push_back(entry.path().string());
    }
  } catch (const std::filesystem::filesystem_error& e) {
    throw_error(ErrorKind::io, std::string("cannot list scene directory: ") + e.what());
  }
  std::sort(files.begin(), files.end());
  return files;
}

// --- solve -------------------------------------------------------------------

int cmd_solve(const RunConfig& config, const std::string& scene_path, const std::string& method,
              const std::string& checkpoint_path, const std::string& out_path) {
  if (method == "rl" && checkpoint_path.empty()) {
    std::fprintf(stderr, "usage: solve --method rl requires --checkpoint\n");
    return 2;
  }
  require_input_file(scene_path);
  if (!checkpoint_path.empty()) require_input_file(checkpoint_path);

  const SceneSpec scene = load_scene(read_text_file(scene_path));

  Layout layout;
  double pto = 0.0;
  const auto start = std::chrono::steady_clock::now();
  if (method == "rl") {
    const ActorCritic model = ActorCritic::load(checkpoint_path);
    const ProviderSet providers = make_providers(config);
    SolveResult result = solve_scene(model, scene, providers, config.env);
    layout = std::move(result.layout);
    pto = result.pto_seconds;
  } else {
    if (method == "dfs") {
      layout = dfs_solve(scene, config.budget, config.env);
    } else if (method == "anneal") {
      layout = anneal_solve(scene, config.budget, config.env);
    } else {
      layout = random_solve(scene, config.seed, config.env);
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    pto = elapsed.count() /
          static_cast<double>(std::max<std::size_t>(layout.placements.size(), 1));
  }
  layout.pto_seconds = config.deterministic_output ? 0.0 : pto;

  write_text_file(out_path, save_layout(layout));

  const LayoutReport metrics = evaluate_layout(scene, layout, config.eval_resolution);
  const EnergyBreakdown energy =
      energy_breakdown(scene, layout, config.env.prior, config.env.weights, config.env.params);

  json report;
  report["command"] = "solve";
  report["method"] = method;
  report["scene"] = scene_path;
  report["layout"] = out_path;
  report["metrics"] = metrics_json(metrics);
  report["energy"] = energy_json(energy);
  report["skipped"] = layout.skipped;
  report["config"] = config_json(config);
  write_text_file(sibling_path(out_path, ".report.json"), report.dump(2) + "\n");

  if (layout.placements.empty() && !scene.objects.empty()) {
    std::fprintf(stderr, "solver placed none of %zu objects\n", scene.objects.size());
    return 3;
  }
  return 0;
}

// --- train -------------------------------------------------------------------

int cmd_train(const RunConfig& config, const std::string& corpus_dir,
              const std::string& out_path) {
  require_input_dir(corpus_dir);

  std::vector<SceneSpec> scenes;
  std::vector<std::string> skipped_files;
  for (const std::string& path : corpus_scene_files(corpus_dir)) {
    const std::string name = std::filesystem::path(path).filename().string();
    try {
      scenes.push_back(load_scene(read_text_file(path)));
    } catch (const std::exception& e) {
      std::fprintf(stderr, "skipping %s: %s\n", name.c_str(), e.what());
      skipped_files.push_back(name);
    }
  }
  if (scenes.empty()) {
    std::fprintf(stderr, "error: no readable scenes in \"%s\"\n", corpus_dir.c_str());
    return 2;
  }

  ActorCritic model(config.model, config.seed);
  const ProviderSet providers = make_providers(config);
  const TrainResult result = train_agent(model, scenes, config.train, providers, config.env);

  model.save(out_path);
  const std::string curve_path = sibling_path(out_path, ".curve.csv");
  write_text_file(curve_path, curve_csv(result.curve));

  json report;
  report["command"] = "train";
  report["corpus"] = corpus_dir;
  report["scenes"] = scenes.size();
  report["skipped_files"] = skipped_files;
  report["checkpoint"] = out_path;
  report["curve_csv"] = curve_path;
  if (!result.curve.empty()) {
    const EpochStats& last = result.curve.back();
    json final_epoch;
    final_epoch["epoch"] = last.epoch;
    final_epoch["mean_e_total"] = last.mean_e_total;
    final_epoch["mean_cnt"] = last.mean_cnt;
    final_epoch["l_policy"] = last.l_policy;
    final_epoch["l_value"] = last.l_value;
    final_epoch["l_aux"] = last.l_aux;
    final_epoch["entropy"] = last.entropy;
    report["final_epoch"] = final_epoch;
  }
  report["config"] = config_json(config);
  write_text_file(sibling_path(out_path, ".train.json"), report.dump(2) + "\n");
  return 0;
}

// --- eval --------------------------------------------------------------------

int cmd_eval(const RunConfig& config, const std::string& corpus_dir,
             const std::vector<std::string>& methods, int runs,
             const std::string& checkpoint_path, const std::string& csv_path,
             const std::string& report_path) {
  require_input_dir(corpus_dir);

  std::shared_ptr<const ActorCritic> model;
  const bool wants_rl = std::find(methods.begin(), methods.end(), "rl") != methods.end();
  if (wants_rl) {
    if (checkpoint_path.empty()) {
      std::fprintf(stderr, "usage: eval with method rl requires --checkpoint\n");
      return 2;
    }
    require_input_file(checkpoint_path);
    model = std::make_shared<const ActorCritic>(ActorCritic::load(checkpoint_path));
  }
  const ProviderSet providers = make_providers(config);
  const bool deterministic = config.deterministic_output;

  const auto stamp_pto = [deterministic](Layout& layout, double seconds) {
    layout.pto_seconds =
        deterministic
            ? 0.0
            : seconds / static_cast<double>(std::max<std::size_t>(layout.placements.size(), 1));
  };
  const auto make_solver = [&](const std::string& method) -> SolverFn {
    if (method == "rl") {
      return [model, &providers, &config, deterministic](const SceneSpec& scene,
                                                         std::uint64_t) {
        SolveResult result = solve_scene(*model, scene, providers, config.env);
        result.layout.pto_seconds = deterministic ? 0.0 : result.pto_seconds;
        return std::move(result.layout);
      };
    }
    if (method == "dfs") {
      return [&config, stamp_pto](const SceneSpec& scene, std::uint64_t seed) {
        SolverBudget budget = config.budget;
        budget.seed = seed;
        const auto start = std::chrono::steady_clock::now();
        Layout layout = dfs_solve(scene, budget, config.env);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        stamp_pto(layout, elapsed.count());
        return layout;
      };
    }
    if (method == "anneal") {
      return [&config, stamp_pto](const SceneSpec& scene, std::uint64_t seed) {
        SolverBudget budget = config.budget;
        budget.seed = seed;
        const auto start = std::chrono::steady_clock::now();
        Layout layout = anneal_solve(scene, budget, config.env);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        stamp_pto(layout, elapsed.count());
        return layout;
      };
    }
    return [&config, stamp_pto](const SceneSpec& scene, std::uint64_t seed) {
      const auto start = std::chrono::steady_clock::now();
      Layout layout = random_solve(scene, seed, config.env);
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      stamp_pto(layout, elapsed.count());
      return layout;
    };
  };

  const int jobs = effective_jobs(config);
  std::vector<CorpusReport> reports;
  reports.reserve(methods.size());
  for (const std::string& method : methods)
    reports.push_back(evaluate_corpus(corpus_dir, method, make_solver(method), runs,
                                      config.seed, config.eval_resolution, jobs));

  std::printf("%s", corpus_table(reports).c_str());
  const std::string csv = corpus_csv(reports);
  if (csv_path.empty()) {
    std::printf("\n%s", csv.c_str());
  } else {
    write_text_file(csv_path, csv);
  }

  if (!report_path.empty()) {
    const auto stat_json = [](const MetricStat& stat) {
      json j;
      j["mean"] = stat.mean;
      j["std"] = stat.stddev;
      return j;
    };
    json report;
    report["command"] = "eval";
    report["corpus"] = corpus_dir;
    report["runs"] = runs;
    json results = json::array();
    for (const CorpusReport& r : reports) {
      json row;
      row["method"] = r.method;
      row["n_scenes"] = r.n_scenes;
      row["cnt"] = stat_json(r.cnt);
      row["sr"] = stat_json(r.sr);
      row["nav"] = stat_json(r.nav);
      row["key_nav"] = stat_json(r.key_nav);
      row["oob"] = stat_json(r.oob);
      row["pto"] = stat_json(r.pto);
      row["failed_files"] = r.failed_files;
      results.push_back(std::move(row));
    }
    report["results"] = std::move(results);
    report["config"] = config_json(config);
    write_text_file(report_path, report.dump(2) + "\n");
  }
  return 0;
}

// --- render ------------------------------------------------------------------

std::vector<ViewpointCandidate> load_viewpoints(const std::string& text) {
  json parsed;
  try {
    parsed = json::parse(text);
  } catch (const json::exception& e) {
    throw_error(ErrorKind::parse, std::string("viewpoints: ") + e.what());
  }
  if (!parsed.is_object() || !parsed.contains("candidates") || !parsed["candidates"].is_array())
    throw_error(ErrorKind::schema, "viewpoints: expected an object with a candidates array");
  std::vector<ViewpointCandidate> out;
  for (const auto& item : parsed["candidates"]) {
    if (!item.is_object() || !item.contains("x") || !item.contains("y") ||
        !item.contains("dir") || !item["x"].is_number() || !item["y"].is_number() ||
        !item["dir"].is_array() || item["dir"].size() != 2 || !item["dir"][0].is_number() ||
        !item["dir"][1].is_number())
      throw_error(ErrorKind::schema,
                  "viewpoints: each candidate needs numeric x, y and a 2-element dir");
    ViewpointCandidate c;
    c.position = {item["x"].get<double>(), item["y"].get<double>()};
    if (item.contains("z") && item["z"].is_number()) c.z = item["z"].get<double>();
    c.direction = {item["dir"][0].get<double>(), item["dir"][1].get<double>()};
    if (item.contains("dist_to_center") && item["dist_to_center"].is_number())
      c.dist_to_center = item["dist_to_center"].get<double>();
    c.valid = true;
    out.push_back(std::move(c));
  }
  return out;
}

int cmd_render(const std::string& scene_path, const std::string& layout_path,
               const std::string& out_path, const std::string& viewpoints_path) {
  require_input_file(scene_path);
  require_input_file(layout_path);
  const SceneSpec scene = load_scene(read_text_file(scene_path));
  const Layout layout = load_layout(read_text_file(layout_path));
  std::vector<ViewpointCandidate> viewpoints;
  if (!viewpoints_path.empty()) {
    require_input_file(viewpoints_path);
    viewpoints = load_viewpoints(read_text_file(viewpoints_path));
  }
  write_text_file(out_path, render_svg(scene, layout, viewpoints));
  return 0;
}

// --- classify ----------------------------------------------------------------

int cmd_classify_train(const RunConfig& config, const std::string& data_path,
                       const std::string& out_path) {
  require_input_file(data_path);
  const std::vector<RoleExample> dataset = load_role_dataset(read_text_file(data_path));
  const ProviderSet providers = make_providers(config);
  RoleHead head(kEmbedDim, 128, config.seed);
  const RoleTrainResult result = train_head(head, dataset, *providers.embedder, config.roles);
  for (const std::string& warning : result.warnings)
    std::fprintf(stderr, "warning: %s\n", warning.c_str());
  head.save(out_path);

  json report;
  report["command"] = "classify-train";
  report["dataset"] = data_path;
  report["examples"] = dataset.size();
  report["checkpoint"] = out_path;
  report["first_epoch_loss"] = result.epoch_loss.empty() ? 0.0 : result.epoch_loss.front();
  report["final_epoch_loss"] = result.epoch_loss.empty() ? 0.0 : result.epoch_loss.back();
  report["warnings"] = result.warnings;
  report["config"] = config_json(config);
  write_text_file(sibling_path(out_path, ".roles.json"), report.dump(2) + "\n");
  return 0;
}

int cmd_classify_predict(const RunConfig& config, const std::string& model_path,
                         const std::string& instruction, const std::string& object,
                         double threshold) {
  require_input_file(model_path);
  const RoleHead head = RoleHead::load(model_path);
  const ProviderSet providers = make_providers(config);
  const std::vector<double> features = encode_pair(instruction, object, *providers.embedder);
  const RolePrediction prediction = predict_roles(head, features, threshold);

  json out;
  out["instruction"] = instruction;
  out["object"] = object;
  out["threshold"] = threshold;
  json probabilities;
  json roles = json::array();
  for (int k = 0; k < kRoleClassCount; ++k) {
    probabilities[kRoleClassNames[k]] = prediction.probabilities[k];
    if (prediction.roles[k]) roles.push_back(kRoleClassNames[k]);
  }
  out["probabilities"] = std::move(probabilities);
  out["roles"] = std::move(roles);
  out["config"] = config_json(config);
  std::printf("%s\n", out.dump(2).c_str());
  return 0;
}

// --- vrpos -------------------------------------------------------------------

int cmd_vrpos(const RunConfig& config, const std::string& scene_path,
              const std::string& layout_path, const std::string& anchor,
              const std::string& out_path) {
  require_input_file(scene_path);
  require_input_file(layout_path);
  const SceneSpec scene = load_scene(read_text_file(scene_path));
  const Layout layout = load_layout(read_text_file(layout_path));
  const std::vector<ViewpointCandidate> candidates =
      sample_viewpoints(scene, layout, anchor, config.vr);

  json out;
  out["anchor"] = anchor;
  json list = json::array();
  for (const ViewpointCandidate& c : candidates) {
    json row;
    row["x"] = c.position.x;
    row["y"] = c.position.y;
    row["z"] = c.z;
    row["dir"] = json::array({c.direction.x, c.direction.y});
    row["dist_to_center"] = c.dist_to_center;
    list.push_back(std::move(row));
  }
  out["candidates"] = std::move(list);
  const std::string text = out.dump(2) + "\n";
  if (out_path.empty()) {
    std::printf("%s", text.c_str());
  } else {
    write_text_file(out_path, text);
  }
  return 0;
}

// --- ged ---------------------------------------------------------------------

int cmd_ged(const std::string& pred_path, const std::string& truth_path) {
  require_input_file(pred_path);
  require_input_file(truth_path);
  const SceneGraph pred = load_graph(read_text_file(pred_path));
  const SceneGraph truth = load_graph(read_text_file(truth_path));

  std::vector<GraphTriplet> required;
  required.reserve(truth.edges.size());
  for (const GraphEdge& edge : truth.edges)
    required.push_back({truth.nodes[edge.subject].name, edge.relation,
                        truth.nodes[edge.object].name});
  const double irecall = required.empty() ? 1.0 : instruction_recall(pred, required);

  const auto names_of = [](const SceneGraph& g) {
    std::vector<std::string> names;
    names.reserve(g.nodes.size());
    for (const GraphNode& node : g.nodes) names.push_back(node.name);
    return names;
  };
  const double f1 = object_f1(names_of(pred), names_of(truth));

  int ged = 0;
  bool greedy = false;
  try {
    ged = graph_edit_distance(pred, truth);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::capacity) throw;
    ged = graph_edit_distance_greedy(pred, truth);
    greedy = true;
  }

  json out;
  out["ged"] = ged;
  out["irecall"] = irecall;
  out["f1"] = f1;
  std::printf("%s\n", out.dump().c_str());
  if (greedy) {
    std::fprintf(stderr,
                 "note: graphs exceed the exact matcher's node limit; "
                 "ged is the greedy upper bound\n");
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constraint-driven indoor layout engine"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string embed_url, scorer_url, llm_url;
  int jobs = 0;
  bool deterministic_output = false;
  auto* config_opt =
      app.add_option("--config", config_path, "Run configuration JSON file");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed for every component");
  auto* embed_opt =
      app.add_option("--embed-url", embed_url, "Embedding service URL (empty: built-in mock)");
  auto* scorer_opt =
      app.add_option("--scorer-url", scorer_url, "Semantic scorer URL (empty: built-in mock)");
  auto* llm_opt = app.add_option("--llm-url", llm_url, "LLM service URL (empty: built-in mock)");
  auto* jobs_opt =
      app.add_option("--jobs", jobs, "Worker threads for eval (0: all logical cores)");
  auto* det_opt = app.add_flag("--deterministic-output", deterministic_output,
                               "Zero measured timings so artifacts are byte-reproducible");

  const auto resolve_config = [&](const std::string& extra_file) {
    RunConfig config;
    if (config_opt->count() > 0) {
      require_input_file(config_path);
      apply_config_json(config, read_text_file(config_path));
    }
    if (!extra_file.empty()) {
      require_input_file(extra_file);
      apply_config_json(config, read_text_file(extra_file));
    }
    apply_config_env(config);
    if (seed_opt->count() > 0) config.seed = seed;
    if (embed_opt->count() > 0) config.embed_url = embed_url;
    if (scorer_opt->count() > 0) config.scorer_url = scorer_url;
    if (llm_opt->count() > 0) config.llm_url = llm_url;
    if (jobs_opt->count() > 0) config.jobs = jobs;
    if (det_opt->count() > 0) config.deterministic_output = true;
    config.finalize();
    return config;
  };

  // solve
  auto* solve = app.add_subcommand("solve", "Place a scene's objects and report metrics");
  solve->fallthrough();
  std::string solve_scene_path, solve_method, solve_checkpoint, solve_out;
  solve->add_option("scene", solve_scene_path, "Scene JSON file")->required();
  solve->add_option("--method", solve_method, "Solver: rl, dfs, anneal, or random")
      ->required()
      ->check(CLI::IsMember({"rl", "dfs", "anneal", "random"}));
  solve->add_option("--checkpoint", solve_checkpoint, "Model checkpoint (required for rl)");
  solve->add_option("--out", solve_out, "Output layout JSON path")->required();

  // train
  auto* train = app.add_subcommand("train", "Train the placement model on a scene corpus");
  train->fallthrough();
  std::string train_corpus, train_config, train_out;
  train->add_option("corpus", train_corpus, "Directory of scene JSON files")->required();
  train->add_option("config", train_config, "Run configuration JSON file")->required();
  train->add_option("--out", train_out, "Output checkpoint path")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate solvers over a corpus");
  eval->fallthrough();
  std::string eval_corpus, eval_checkpoint, eval_csv, eval_report;
  std::vector<std::string> eval_methods{"dfs", "anneal", "random"};
  int eval_runs = 1;
  eval->add_option("corpus", eval_corpus, "Directory of scene JSON files")->required();
  eval->add_option("--methods", eval_methods, "Comma-separated: rl, dfs, anneal, random")
      ->delimiter(',')
      ->check(CLI::IsMember({"rl", "dfs", "anneal", "random"}));
  eval->add_option("--runs", eval_runs, "Independent passes over the corpus")
      ->check(CLI::PositiveNumber);
  eval->add_option("--checkpoint", eval_checkpoint, "Model checkpoint (required for rl)");
  eval->add_option("--csv", eval_csv, "Write the aggregate CSV here instead of stdout");
  eval->add_option("--report", eval_report, "Write a JSON report here");

  // render
  auto* render = app.add_subcommand("render", "Render a layout to SVG");
  render->fallthrough();
  std::string render_scene, render_layout, render_out, render_viewpoints;
  render->add_option("scene", render_scene, "Scene JSON file")->required();
  render->add_option("layout", render_layout, "Layout JSON file")->required();
  render->add_option("--out", render_out, "Output SVG path")->required();
  render->add_option("--viewpoints", render_viewpoints,
                     "Viewpoint JSON (as written by vrpos) to draw as circles");

  // classify
  auto* classify =
      app.add_subcommand("classify", "Predict object roles or train the role head");
  classify->fallthrough();
  std::string classify_model, classify_instruction, classify_object;
  std::string classify_data, classify_out;
  double classify_threshold = 0.5;
  classify->add_option("--model", classify_model, "Role head checkpoint (predict mode)");
  classify->add_option("--instruction", classify_instruction, "Instruction text");
  classify->add_option("--object", classify_object, "Object name");
  classify->add_option("--threshold", classify_threshold, "Probability cutoff (default 0.5)");
  classify->add_option("--train-data", classify_data, "Labeled dataset JSON (train mode)");
  classify->add_option("--out", classify_out, "Output checkpoint path (train mode)");

  // vrpos
  auto* vrpos = app.add_subcommand("vrpos", "Sample validated viewpoints around an object");
  vrpos->fallthrough();
  std::string vrpos_scene, vrpos_layout, vrpos_anchor, vrpos_out;
  vrpos->add_option("scene", vrpos_scene, "Scene JSON file")->required();
  vrpos->add_option("layout", vrpos_layout, "Layout JSON file")->required();
  vrpos->add_option("--anchor", vrpos_anchor, "Placed object id to stand near")->required();
  vrpos->add_option("--out", vrpos_out, "Output JSON path (default: stdout)");

  // ged
  auto* ged = app.add_subcommand("ged", "Compare a predicted scene graph against a reference");
  ged->fallthrough();
  std::string ged_pred, ged_truth;
  ged->add_option("pred", ged_pred, "Predicted graph JSON file")->required();
  ged->add_option("truth", ged_truth, "Reference graph JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*solve)
      return cmd_solve(resolve_config(""), solve_scene_path, solve_method, solve_checkpoint,
                       solve_out);
    if (*train) return cmd_train(resolve_config(train_config), train_corpus, train_out);
    if (*eval)
      return cmd_eval(resolve_config(""), eval_corpus, eval_methods, eval_runs,
                      eval_checkpoint, eval_csv, eval_report);
    if (*render) {
      resolve_config("");  // validates global flags; rendering has no tunables
      return cmd_render(render_scene, render_layout, render_out, render_viewpoints);
    }
    if (*classify) {
      const RunConfig config = resolve_config("");
      if (!classify_data.empty()) {
        if (classify_out.empty()) {
          std::fprintf(stderr, "usage: classify --train-data requires --out\n");
          return 2;
        }
        return cmd_classify_train(config, classify_data, classify_out);
      }
      if (classify_model.empty() || classify_instruction.empty() || classify_object.empty()) {
        std::fprintf(stderr,
                     "usage: classify needs --model, --instruction and --object "
                     "(or --train-data with --out)\n");
        return 2;
      }
      return cmd_classify_predict(config, classify_model, classify_instruction,
                                  classify_object, classify_threshold);
    }
    if (*vrpos)
      return cmd_vrpos(resolve_config(""), vrpos_scene, vrpos_layout, vrpos_anchor, vrpos_out);
    if (*ged) {
      resolve_config("");  // graph comparison has no tunables; still validate flags
      return cmd_ged(ged_pred, ged_truth);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
