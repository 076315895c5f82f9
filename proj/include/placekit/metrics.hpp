#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "placekit/scene.hpp"

namespace placekit {

// --- Per-layout metrics -------------------------------------------------------
//
// Percentages are in [0, 100]; pto_seconds is wall time per placed object as
// reported by the solver.

struct LayoutReport {
  double cnt_pct = 0.0;      // placed / requested objects
  bool sr = false;           // anchor and inference counts fully satisfied
  double nav_pct = 0.0;      // largest free component / all free cells
  double key_nav_pct = 0.0;  // reachable anchor/inference placements
  double oob_pct = 0.0;      // placed objects protruding from the room
  double pto_seconds = 0.0;
};

struct FidelityResult {
  double cnt_pct = 0.0;
  bool sr = false;
};

struct PlausibilityResult {
  double nav_pct = 0.0;
  double key_nav_pct = 0.0;
  double oob_pct = 0.0;
};

// CNT is 100 * placed / requested (100 for a scene with no objects).  SR holds
// iff, per role, the placed counts of anchor and inference objects equal the
// requested counts.
FidelityResult fidelity(const SceneSpec& scene, const Layout& layout);

// Grid-based plausibility on the agent-inflated occupancy grid (see
// build_nav_context):
//   nav_pct      largest 4-connected free component over all free cells;
//   key_nav_pct  fraction of placed anchor/inference objects whose inflated
//                hull the agent can stand next to, 100 when none are placed;
//   oob_pct      share of placed objects whose contained-area ratio falls
//                below 1 - 1e-6.
// An empty layout scores (100, 100, 0).
PlausibilityResult plausibility(const SceneSpec& scene, const Layout& layout,
                                double resolution = 0.1);

// fidelity + plausibility + the layout's pto_seconds in one report.
LayoutReport evaluate_layout(const SceneSpec& scene, const Layout& layout,
                             double resolution = 0.1);

// --- Graph metrics ------------------------------------------------------------

// Exact graph edit distance under unit costs: node insert/delete cost 1, node
// substitution costs 1 iff the names differ, and for every ordered node pair
// the edge multisets are aligned at max(|A|,|B|) - |A intersect B| (covering
// edge inserts, deletes, and relabels at cost 1 each).  Node names compare
// case-sensitively.  Branch-and-bound over injective node mappings; graphs
// over 12 nodes raise a capacity error directing to the greedy variant.
int graph_edit_distance(const SceneGraph& a, const SceneGraph& b);

// Upper bound on the edit distance from a deterministic greedy node matching
// (equal names first, then index order).  Never below the exact distance and
// has no size limit.
int graph_edit_distance_greedy(const SceneGraph& a, const SceneGraph& b);

struct GraphTriplet {
  std::string subject;
  std::string relation;
  std::string object;
};

// Fraction of required triplets present in `pred` as exact
// (subject name, relation, object name) matches after ASCII case folding.
// An empty requirement list is a contract error.
double instruction_recall(const SceneGraph& pred, const std::vector<GraphTriplet>& required);

// Multiset precision/recall F1 over case-folded object names.  Both lists
// empty scores 1.0; exactly one empty scores 0.0.
double object_f1(const std::vector<std::string>& pred_names,
                 const std::vector<std::string>& gt_names);

struct GraphEvalReport {
  int ged = 0;
  double irecall = 0.0;
  double f1 = 0.0;
};

// ged(pred, truth), recall of `required` in pred, and name F1 of pred vs
// truth.  Uses the exact distance up to 12 nodes, the greedy bound beyond.
GraphEvalReport evaluate_graph(const SceneGraph& pred, const SceneGraph& truth,
                               const std::vector<GraphTriplet>& required);

// --- Corpus evaluation --------------------------------------------------------

// Solves one scene with one seed.  The callback owns solver choice and
// configuration; wall time per object should be reported via pto_seconds.
using SolverFn = std::function<Layout(const SceneSpec& scene, std::uint64_t seed)>;

struct MetricStat {
  double mean = 0.0;
  double stddev = 0.0;  // population std over runs
};

struct CorpusReport {
  std::string method;
  int n_runs = 0;
  int n_scenes = 0;
  std::vector<std::string> failed_files;  // "<name>: <reason>" per unreadable file
  MetricStat cnt;
  MetricStat sr;  // percent of scenes with sr true
  MetricStat nav;
  MetricStat key_nav;
  MetricStat oob;
  MetricStat pto;
};

// Runs `solver` `runs` times over every readable scene in `scenes_dir`
// (files matching *.json, except *.graph.json and *.layout.json, in filename
// order).  Run r solves scene s with seed `seed + 1000003*r + s`, so each run
// is an independent pass over the corpus.  A run's value for a metric is its
// mean across scenes (SR as a percentage); the report carries mean and
// population std of those per-run values.  Unreadable files are recorded in
// failed_files and skipped.  `runs` must be positive and at least one scene
// must load.  `jobs` worker threads solve (run, scene) pairs concurrently;
// seeds are fixed per pair and results are reduced in pair order, so the
// report does not depend on jobs.  The solver must be safe to call from
// several threads at once when jobs > 1.
CorpusReport evaluate_corpus(const std::string& scenes_dir, const std::string& method,
                             const SolverFn& solver, int runs, std::uint64_t seed,
                             double resolution = 0.1, int jobs = 1);

// CSV with header "method,metric,mean,std,n_runs" and one row per metric per
// report.
std::string corpus_csv(const std::vector<CorpusReport>& reports);

// Fixed-width human-readable table (mean +/- std per metric).  The footer
// cites the published reference row for context and notes that simulated
// annealing stands in for a MILP/Z3-style global optimizer.
std::string corpus_table(const std::vector<CorpusReport>& reports);

}  // namespace placekit
