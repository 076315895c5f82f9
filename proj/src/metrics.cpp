#include "placekit/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "placekit/energy.hpp"
#include "placekit/error.hpp"
#include "placekit/navgrid.hpp"

namespace placekit {
namespace {

std::string fold(const std::string& s) {
  std::string out = s;
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

const ObjectSpec& object_of(const SceneSpec& scene, const Placement& p) {
  const ObjectSpec* o = scene.find_object(p.object_id);
  if (!o) throw_error(ErrorKind::reference, "placement \"" + p.object_id +
                                                "\" is not a scene object");
  return *o;
}

// --- Graph edit distance ------------------------------------------------------

// Edge relations per ordered node pair, each list sorted so multiset
// comparisons are two-pointer walks.
struct GraphIndex {
  int n = 0;
  std::vector<std::string> names;
  std::map<std::pair<int, int>, std::vector<std::string>> edges;
  int edge_count = 0;
};

GraphIndex index_graph(const SceneGraph& g) {
  GraphIndex ix;
  ix.n = static_cast<int>(g.nodes.size());
  for (const GraphNode& node : g.nodes) ix.names.push_back(node.name);
  for (const GraphEdge& e : g.edges) {
    if (e.subject < 0 || e.subject >= ix.n || e.object < 0 || e.object >= ix.n)
      throw_error(ErrorKind::reference, "graph edge references a missing node");
    ix.edges[{e.subject, e.object}].push_back(e.relation);
    ++ix.edge_count;
  }
  for (auto& [pair, relations] : ix.edges) std::sort(relations.begin(), relations.end());
  return ix;
}

const std::vector<std::string>& relations_at(const GraphIndex& ix, int u, int v) {
  static const std::vector<std::string> kEmpty;
  const auto it = ix.edges.find({u, v});
  return it == ix.edges.end() ? kEmpty : it->second;
}

int multiset_common(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  int common = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) ++common, ++i, ++j;
    else if (a[i] < b[j]) ++i;
    else ++j;
  }
  return common;
}

// max(|A|,|B|) - |A intersect B|: relabel the overlap-deficient part, then
// insert or delete the length difference.
int pair_cost(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  return static_cast<int>(std::max(a.size(), b.size())) - multiset_common(a, b);
}

// Cost of a complete mapping phi: g1 node index -> g2 node index or -1 for
// deletion.  Shared by the greedy bound and the branch-and-bound incumbent.
int mapping_cost(const GraphIndex& a, const GraphIndex& b, const std::vector<int>& phi) {
  std::vector<int> preimage(static_cast<std::size_t>(b.n), -1);
  int cost = 0;
  for (int u = 0; u < a.n; ++u) {
    if (phi[u] < 0) ++cost;  // delete
    else {
      preimage[phi[u]] = u;
      if (a.names[u] != b.names[phi[u]]) ++cost;  // substitute
    }
  }
  for (int j = 0; j < b.n; ++j)
    if (preimage[j] < 0) ++cost;  // insert
  for (const auto& [pair, relations] : a.edges) {
    const int pu = phi[pair.first], pv = phi[pair.second];
    if (pu < 0 || pv < 0) cost += static_cast<int>(relations.size());
    else cost += pair_cost(relations, relations_at(b, pu, pv));
  }
  for (const auto& [pair, relations] : b.edges) {
    const int pu = preimage[pair.first], pv = preimage[pair.second];
    // Pairs aligned by the loop above carry no extra cost; edges incident to
    // an inserted node, or between images whose preimage pair has no edges,
    // are insertions.
    if (pu < 0 || pv < 0 || relations_at(a, pu, pv).empty())
      cost += static_cast<int>(relations.size());
  }
  return cost;
}

std::vector<int> greedy_mapping(const GraphIndex& a, const GraphIndex& b) {
  std::vector<int> phi(static_cast<std::size_t>(a.n), -1);
  std::vector<char> used(static_cast<std::size_t>(b.n), 0);
  for (int u = 0; u < a.n; ++u)
    for (int j = 0; j < b.n; ++j)
      if (!used[j] && a.names[u] == b.names[j]) {
        phi[u] = j;
        used[j] = 1;
        break;
      }
  // Substituting never costs more than a deletion plus an insertion, so pair
  // the leftovers in index order.
  for (int u = 0; u < a.n; ++u) {
    if (phi[u] >= 0) continue;
    for (int j = 0; j < b.n; ++j)
      if (!used[j]) {
        phi[u] = j;
        used[j] = 1;
        break;
      }
  }
  return phi;
}

struct GedSearch {
  const GraphIndex& a;
  const GraphIndex& b;
  std::vector<int> phi;
  std::vector<char> used;
  int best;

  // Minimum node operations still owed: match as many remaining names as
  // possible for free, then pay for every leftover.
  int lower_bound(int k) const {
    std::map<std::string, int> remaining;
    int r1 = 0;
    for (int u = k; u < a.n; ++u) ++remaining[a.names[u]], ++r1;
    int u2 = 0, free_matches = 0;
    for (int j = 0; j < b.n; ++j) {
      if (used[j]) continue;
      ++u2;
      const auto it = remaining.find(b.names[j]);
      if (it != remaining.end() && it->second > 0) --it->second, ++free_matches;
    }
    return std::max(r1, u2) - free_matches;
  }

  // Cost of the ordered pair (u, v) once both endpoints are decided: deleted
  // endpoints delete the pair's edges; mapped endpoints align the relation
  // multisets (inserting any edges between the images with no counterpart).
  int decided_pair_cost(int u, int v) const {
    const auto& rel = relations_at(a, u, v);
    if (phi[u] < 0 || phi[v] < 0) return static_cast<int>(rel.size());
    return pair_cost(rel, relations_at(b, phi[u], phi[v]));
  }

  // Edge costs newly fixed by deciding node k: every ordered pair among
  // decided nodes that involves k.
  int step_edge_cost(int k) const {
    int cost = decided_pair_cost(k, k);
    for (int p = 0; p < k; ++p) cost += decided_pair_cost(k, p) + decided_pair_cost(p, k);
    return cost;
  }

  int completion_cost() const {
    int cost = 0;
    for (int j = 0; j < b.n; ++j)
      if (!used[j]) ++cost;
    for (const auto& [pair, relations] : b.edges)
      if (!used[pair.first] || !used[pair.second]) cost += static_cast<int>(relations.size());
    return cost;
  }

  void recurse(int k, int cost_so_far) {
    if (cost_so_far + lower_bound(k) >= best) return;
    if (k == a.n) {
      best = std::min(best, cost_so_far + completion_cost());
      return;
    }
    // Same-name candidates first so strong incumbents appear early.
    std::vector<int> order;
    for (int j = 0; j < b.n; ++j)
      if (!used[j] && a.names[k] == b.names[j]) order.push_back(j);
    for (int j = 0; j < b.n; ++j)
      if (!used[j] && a.names[k] != b.names[j]) order.push_back(j);
    order.push_back(-1);
    for (int j : order) {
      phi[k] = j;
      if (j >= 0) used[j] = 1;
      const int node_cost = j < 0 ? 1 : (a.names[k] == b.names[j] ? 0 : 1);
      recurse(k + 1, cost_so_far + node_cost + step_edge_cost(k));
      if (j >= 0) used[j] = 0;
      phi[k] = -1;
    }
  }
};

// --- Corpus helpers -----------------------------------------------------------

MetricStat stat_of(const std::vector<double>& values) {
  MetricStat s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(var / static_cast<double>(values.size()));
  return s;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

struct MetricRow {
  const char* label;
  const MetricStat CorpusReport::* field;
  const char* spec;  // printf format for mean and std
};

constexpr MetricRow kMetricRows[] = {
    {"CNT", &CorpusReport::cnt, "%.2f"},     {"SR", &CorpusReport::sr, "%.2f"},
    {"NAV", &CorpusReport::nav, "%.2f"},     {"Key_NAV", &CorpusReport::key_nav, "%.2f"},
    {"OOB", &CorpusReport::oob, "%.2f"},     {"PTO", &CorpusReport::pto, "%.3f"},
};

}  // namespace

FidelityResult fidelity(const SceneSpec& scene, const Layout& layout) {
  FidelityResult r;
  int want_anchor = 0, want_inference = 0;
  for (const ObjectSpec& o : scene.objects) {
    if (o.role == Role::anchor) ++want_anchor;
    if (o.role == Role::inference) ++want_inference;
  }
  int got_anchor = 0, got_inference = 0;
  for (const Placement& p : layout.placements) {
    const ObjectSpec& o = object_of(scene, p);
    if (o.role == Role::anchor) ++got_anchor;
    if (o.role == Role::inference) ++got_inference;
  }
  r.cnt_pct = scene.objects.empty()
                  ? 100.0
                  : 100.0 * static_cast<double>(layout.placements.size()) /
                        static_cast<double>(scene.objects.size());
  r.sr = got_anchor == want_anchor && got_inference == want_inference;
  return r;
}

PlausibilityResult plausibility(const SceneSpec& scene, const Layout& layout,
                                double resolution) {
  PlausibilityResult r;
  if (layout.placements.empty()) {
    r.nav_pct = 100.0;
    r.key_nav_pct = 100.0;
    r.oob_pct = 0.0;
    return r;
  }
  const NavContext ctx = build_nav_context(scene, layout, resolution);
  r.nav_pct = 100.0 * largest_free_component_ratio(ctx.grid);
  r.key_nav_pct = ctx.key_targets.empty()
                      ? 100.0
                      : 100.0 * reachability_ratio(ctx.grid, ctx.start, ctx.key_targets);
  const Polygon room = room_polygon(scene.room);
  int out = 0;
  for (const Placement& p : layout.placements) {
    const Polygon fp = footprint_polygon(object_of(scene, p), p);
    const double rho = intersection_area(fp, room) / (polygon_area(fp) + 1e-8);
    if (rho < 1.0 - 1e-6) ++out;
  }
  r.oob_pct = 100.0 * static_cast<double>(out) / static_cast<double>(layout.placements.size());
  return r;
}

LayoutReport evaluate_layout(const SceneSpec& scene, const Layout& layout, double resolution) {
  const FidelityResult f = fidelity(scene, layout);
  const PlausibilityResult p = plausibility(scene, layout, resolution);
  LayoutReport report;
  report.cnt_pct = f.cnt_pct;
  report.sr = f.sr;
  report.nav_pct = p.nav_pct;
  report.key_nav_pct = p.key_nav_pct;
  report.oob_pct = p.oob_pct;
  report.pto_seconds = layout.pto_seconds;
  return report;
}

int graph_edit_distance(const SceneGraph& a, const SceneGraph& b) {
  if (a.nodes.size() > 12 || b.nodes.size() > 12)
    throw_error(ErrorKind::capacity,
                "exact edit distance is limited to 12 nodes per graph; use "
                "graph_edit_distance_greedy for larger graphs");
  const GraphIndex ia = index_graph(a), ib = index_graph(b);
  GedSearch search{ia, ib, std::vector<int>(static_cast<std::size_t>(ia.n), -1),
                   std::vector<char>(static_cast<std::size_t>(ib.n), 0),
                   mapping_cost(ia, ib, greedy_mapping(ia, ib))};
  search.recurse(0, 0);
  return search.best;
}

int graph_edit_distance_greedy(const SceneGraph& a, const SceneGraph& b) {
  const GraphIndex ia = index_graph(a), ib = index_graph(b);
  return mapping_cost(ia, ib, greedy_mapping(ia, ib));
}

double instruction_recall(const SceneGraph& pred, const std::vector<GraphTriplet>& required) {
  if (required.empty())
    throw_error(ErrorKind::contract, "instruction_recall requires at least one triplet");
  std::set<std::tuple<std::string, std::string, std::string>> have;
  const int n = static_cast<int>(pred.nodes.size());
  for (const GraphEdge& e : pred.edges) {
    if (e.subject < 0 || e.subject >= n || e.object < 0 || e.object >= n)
      throw_error(ErrorKind::reference, "graph edge references a missing node");
    have.insert({fold(pred.nodes[e.subject].name), fold(e.relation),
                 fold(pred.nodes[e.object].name)});
  }
  int hit = 0;
  for (const GraphTriplet& t : required)
    if (have.count({fold(t.subject), fold(t.relation), fold(t.object)})) ++hit;
  return static_cast<double>(hit) / static_cast<double>(required.size());
}

double object_f1(const std::vector<std::string>& pred_names,
                 const std::vector<std::string>& gt_names) {
  if (pred_names.empty() && gt_names.empty()) return 1.0;
  if (pred_names.empty() || gt_names.empty()) return 0.0;
  std::map<std::string, int> pred, gt;
  for (const std::string& s : pred_names) ++pred[fold(s)];
  for (const std::string& s : gt_names) ++gt[fold(s)];
  int common = 0;
  for (const auto& [name, count] : pred) {
    const auto it = gt.find(name);
    if (it != gt.end()) common += std::min(count, it->second);
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(pred_names.size());
  const double recall = static_cast<double>(common) / static_cast<double>(gt_names.size());
  return 2.0 * precision * recall / (precision + recall);
}

GraphEvalReport evaluate_graph(const SceneGraph& pred, const SceneGraph& truth,
                               const std::vector<GraphTriplet>& required) {
  GraphEvalReport report;
  report.ged = (pred.nodes.size() > 12 || truth.nodes.size() > 12)
                   ? graph_edit_distance_greedy(pred, truth)
                   : graph_edit_distance(pred, truth);
  report.irecall = instruction_recall(pred, required);
  std::vector<std::string> pred_names, truth_names;
  for (const GraphNode& n : pred.nodes) pred_names.push_back(n.name);
  for (const GraphNode& n : truth.nodes) truth_names.push_back(n.name);
  report.f1 = object_f1(pred_names, truth_names);
  return report;
}

CorpusReport evaluate_corpus(const std::string& scenes_dir, const std::string& method,
                             const SolverFn& solver, int runs, std::uint64_t seed,
                             double resolution, int jobs) {
  if (runs < 1) throw_error(ErrorKind::contract, "runs must be positive");
  if (!solver) throw_error(ErrorKind::contract, "solver callback is empty");
  if (jobs < 1) throw_error(ErrorKind::contract, "jobs must be positive");

  std::vector<std::string> files;
  try {
    for (const auto& entry : std::filesystem::directory_iterator(scenes_dir)) {
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

  CorpusReport report;
  report.method = method;
  report.n_runs = runs;
  std::vector<SceneSpec> scenes;
  for (const std::string& path : files) {
    try {
      scenes.push_back(load_scene(read_text_file(path)));
    } catch (const std::exception& e) {
      report.failed_files.push_back(std::filesystem::path(path).filename().string() + ": " +
                                    e.what());
    }
  }
  if (scenes.empty())
    throw_error(ErrorKind::io, "no readable scenes in \"" + scenes_dir + "\"");
  report.n_scenes = static_cast<int>(scenes.size());

  // Every (run, scene) pair has a fixed seed, so the pairs can be solved in
  // any order; the reduction below walks them in pair order regardless.
  const std::size_t n_tasks = static_cast<std::size_t>(runs) * scenes.size();
  std::vector<LayoutReport> cells(n_tasks);
  const auto run_task = [&](std::size_t i) {
    const std::size_t r = i / scenes.size();
    const std::size_t s = i % scenes.size();
    const std::uint64_t scene_seed =
        seed + 1000003ULL * static_cast<std::uint64_t>(r) + static_cast<std::uint64_t>(s);
    const Layout layout = solver(scenes[s], scene_seed);
    cells[i] = evaluate_layout(scenes[s], layout, resolution);
  };
  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(jobs), n_tasks);
  if (n_workers <= 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) run_task(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> failures(n_workers);
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
      workers.emplace_back([&, w] {
        try {
          for (std::size_t i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1))
            run_task(i);
        } catch (...) {
          failures[w] = std::current_exception();
          next.store(n_tasks);  // stop handing out work
        }
      });
    }
    for (auto& worker : workers) worker.join();
    for (const auto& failure : failures)
      if (failure) std::rethrow_exception(failure);
  }

  std::vector<double> cnt, sr, nav, key_nav, oob, pto;
  for (int r = 0; r < runs; ++r) {
    double run_cnt = 0, run_sr = 0, run_nav = 0, run_key = 0, run_oob = 0, run_pto = 0;
    for (std::size_t s = 0; s < scenes.size(); ++s) {
      const LayoutReport& lr = cells[static_cast<std::size_t>(r) * scenes.size() + s];
      run_cnt += lr.cnt_pct;
      run_sr += lr.sr ? 100.0 : 0.0;
      run_nav += lr.nav_pct;
      run_key += lr.key_nav_pct;
      run_oob += lr.oob_pct;
      run_pto += lr.pto_seconds;
    }
    const double n = static_cast<double>(scenes.size());
    cnt.push_back(run_cnt / n);
    sr.push_back(run_sr / n);
    nav.push_back(run_nav / n);
    key_nav.push_back(run_key / n);
    oob.push_back(run_oob / n);
    pto.push_back(run_pto / n);
  }
  report.cnt = stat_of(cnt);
  report.sr = stat_of(sr);
  report.nav = stat_of(nav);
  report.key_nav = stat_of(key_nav);
  report.oob = stat_of(oob);
  report.pto = stat_of(pto);
  return report;
}

std::string corpus_csv(const std::vector<CorpusReport>& reports) {
  std::ostringstream out;
  out << "method,metric,mean,std,n_runs\n";
  for (const CorpusReport& r : reports)
    for (const MetricRow& row : kMetricRows) {
      const MetricStat& s = r.*(row.field);
      out << r.method << ',' << row.label << ',' << fmt("%.10g", s.mean) << ','
          << fmt("%.10g", s.stddev) << ',' << r.n_runs << '\n';
    }
  return out.str();
}

std::string corpus_table(const std::vector<CorpusReport>& reports) {
  std::size_t method_width = 6;
  for (const CorpusReport& r : reports) method_width = std::max(method_width, r.method.size());
  method_width += 2;

  std::ostringstream out;
  out << pad("method", method_width);
  for (const MetricRow& row : kMetricRows) out << pad(row.label, 16);
  out << "runs\n";
  for (const CorpusReport& r : reports) {
    out << pad(r.method, method_width);
    for (const MetricRow& row : kMetricRows) {
      const MetricStat& s = r.*(row.field);
      out << pad(fmt(row.spec, s.mean) + "+-" + fmt(row.spec, s.stddev), 16);
    }
    out << r.n_runs << '\n';
    for (const std::string& f : r.failed_files) out << "  ! skipped " << f << '\n';
  }
  out << "--\n"
         "reference (rl, seen): CNT 80.68  SR 93.68  NAV 99.93  Key_NAV 56.79  "
         "OOB 6.62  PTO 0.679\n"
         "note: simulated annealing stands in for a MILP/Z3-style global optimizer "
         "in solver comparisons.\n";
  return out.str();
}

}  // namespace placekit
