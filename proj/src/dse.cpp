#include "acceldse/dse.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

namespace acceldse {

const char* objective_name(Objective o) {
  switch (o) {
    case Objective::Energy: return "energy";
    case Objective::Latency: return "latency";
    case Objective::Edp: return "edp";
  }
  return "edp";
}

Objective parse_objective(const std::string& text) {
  if (text == "energy") return Objective::Energy;
  if (text == "latency") return Objective::Latency;
  if (text == "edp") return Objective::Edp;
  throw ValidationError("unknown objective '" + text +
                        "' (expected energy, latency or edp)");
}

bool operator<(const DesignPoint& a, const DesignPoint& b) {
  if (a.gb_psum_kb != b.gb_psum_kb) return a.gb_psum_kb < b.gb_psum_kb;
  if (a.gb_ifmap_kb != b.gb_ifmap_kb) return a.gb_ifmap_kb < b.gb_ifmap_kb;
  return a.array_index < b.array_index;
}

bool operator==(const DesignPoint& a, const DesignPoint& b) {
  return a.gb_psum_kb == b.gb_psum_kb && a.gb_ifmap_kb == b.gb_ifmap_kb &&
         a.array_index == b.array_index;
}

std::string point_label(const DesignPoint& p) {
  std::ostringstream os;
  os << "gb_psum=" << p.gb_psum_kb << "KB gb_ifmap=" << p.gb_ifmap_kb
     << "KB array=" << p.array.rows << "x" << p.array.cols;
  return os.str();
}

SweepSpace default_space() {
  SweepSpace space;
  space.gb_psum_kb = {13, 27, 54, 108, 216};
  space.gb_ifmap_kb = {13, 27, 54, 108, 216};
  space.arrays = {{12, 14},   {16, 16},   {32, 32},
                  {64, 64},   {128, 128}, {256, 256}};
  return space;
}

SweepResult sweep(const NetworkTopology& net, const AcceleratorConfig& base,
                  const SweepSpace& space, int jobs) {
  if (space.gb_psum_kb.empty() || space.gb_ifmap_kb.empty() ||
      space.arrays.empty())
    throw ValidationError("sweep space must not be empty");

  SweepResult result;
  result.network = net.name;
  result.space = space;

  // Points in canonical order; the record vector is indexed, never appended,
  // so any job count produces byte-identical aggregates.
  std::vector<DesignPoint> points;
  for (double ps : space.gb_psum_kb)
    for (double is : space.gb_ifmap_kb)
      for (size_t a = 0; a < space.arrays.size(); ++a)
        points.push_back(
            {ps, is, static_cast<int64_t>(a) + 1, space.arrays[a]});

  result.records.resize(points.size());
  std::vector<std::exception_ptr> errors(points.size());

  auto run_point = [&](size_t idx) {
    const DesignPoint& p = points[idx];
    try {
      AcceleratorConfig cfg = base;
      cfg.alloc.gb_psum_kb = p.gb_psum_kb;
      cfg.alloc.gb_ifmap_kb = p.gb_ifmap_kb;
      cfg.array = p.array;
      NetworkReport rep = simulate_network(net, cfg);
      result.records[idx] = {p, rep.energy_total, rep.latency_total, rep.edp};
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  };

  const int workers =
      std::max(1, std::min<int>(jobs, static_cast<int>(points.size())));
  if (workers <= 1) {
    for (size_t i = 0; i < points.size(); ++i) run_point(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < points.size();
             i = next.fetch_add(1))
          run_point(i);
      });
    for (std::thread& t : pool) t.join();
  }

  for (size_t i = 0; i < points.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw SimulationError(net.name + " at " + point_label(points[i]) + ": " +
                            e.what());
    }
  }
  return result;
}

double mu_min(const std::vector<double>& values) {
  if (values.empty()) throw ValidationError("mu_min of an empty slice");
  double mn = *std::min_element(values.begin(), values.end());
  if (mn <= 0.0) throw ValidationError("mu_min needs a positive minimum");
  double sum = 0.0;
  for (double v : values) sum += (v - mn) / mn * 100.0;
  return sum / static_cast<double>(values.size());
}

double delta_min_max(const std::vector<double>& values) {
  if (values.empty()) throw ValidationError("delta_min_max of an empty slice");
  auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
  if (*mn_it <= 0.0) throw ValidationError("delta_min_max needs a positive minimum");
  return (*mx_it - *mn_it) / *mn_it * 100.0;
}

SliceMetrics slice_metrics(const SweepResult& result, int64_t array_index,
                           bool sweep_ifmap) {
  const SweepRecord* best = nullptr;
  for (const SweepRecord& r : result.records) {
    if (r.point.array_index != array_index) continue;
    if (!best || r.energy < best->energy) best = &r;
  }
  if (!best)
    throw ValidationError("no sweep records for array index " +
                          std::to_string(array_index));
  std::vector<double> slice;
  for (const SweepRecord& r : result.records) {
    if (r.point.array_index != array_index) continue;
    const bool in_slice = sweep_ifmap
                              ? r.point.gb_psum_kb == best->point.gb_psum_kb
                              : r.point.gb_ifmap_kb == best->point.gb_ifmap_kb;
    if (in_slice) slice.push_back(r.energy);
  }
  SliceMetrics m;
  m.fixed_kb = sweep_ifmap ? best->point.gb_psum_kb : best->point.gb_ifmap_kb;
  m.mu_min_pct = mu_min(slice);
  m.delta_min_max_pct = delta_min_max(slice);
  return m;
}

std::pair<double, double> edp_distance_stats(const SweepResult& result) {
  if (result.records.empty())
    throw ValidationError("edp stats of an empty sweep");
  std::vector<double> edps;
  edps.reserve(result.records.size());
  for (const SweepRecord& r : result.records) edps.push_back(r.edp);
  double mn = *std::min_element(edps.begin(), edps.end());
  if (mn <= 0.0) throw ValidationError("edp stats need a positive minimum");
  double sum = 0.0, mx = 0.0;
  for (double v : edps) {
    double d = (v - mn) / mn * 100.0;
    sum += d;
    mx = std::max(mx, d);
  }
  return {sum / static_cast<double>(edps.size()), mx};
}

double objective_value(const SweepRecord& r, Objective o) {
  switch (o) {
    case Objective::Energy: return r.energy;
    case Objective::Latency: return r.latency;
    case Objective::Edp: return r.edp;
  }
  return r.edp;
}

std::vector<DesignPoint> near_optimal_set(const SweepResult& result,
                                          double epsilon, Objective objective) {
  if (result.records.empty())
    throw ValidationError("near-optimal set of an empty sweep");
  if (epsilon < 0.0) throw ValidationError("epsilon must be non-negative");
  double mn = objective_value(result.records.front(), objective);
  for (const SweepRecord& r : result.records)
    mn = std::min(mn, objective_value(r, objective));
  const double threshold = (1.0 + epsilon) * mn;
  std::vector<DesignPoint> points;
  for (const SweepRecord& r : result.records)
    if (objective_value(r, objective) <= threshold) points.push_back(r.point);
  return points;
}

namespace {

using Mask = uint64_t;

int popcount(Mask m) {
  int c = 0;
  while (m) {
    m &= m - 1;
    ++c;
  }
  return c;
}

}  // namespace

CoreRecommendation recommend_cores(
    const std::map<std::string, std::vector<DesignPoint>>& near_optimal,
    int64_t max_core_types, double epsilon, Objective objective) {
  if (near_optimal.empty()) throw ValidationError("no networks to cover");
  if (max_core_types < 1) throw ValidationError("core budget must be positive");
  const size_t n_nets = near_optimal.size();
  if (n_nets > 63) throw ValidationError("too many networks (limit 63)");

  std::vector<std::string> nets;
  for (const auto& [name, pts] : near_optimal) {
    nets.push_back(name);
    if (pts.empty())
      throw SimulationError("network " + name + " has an empty candidate set");
  }

  // Distinct candidate points in canonical order, with per-point coverage
  // masks over the networks.
  std::set<DesignPoint> distinct;
  for (const auto& [name, pts] : near_optimal)
    distinct.insert(pts.begin(), pts.end());
  std::vector<DesignPoint> points(distinct.begin(), distinct.end());
  std::vector<Mask> masks(points.size(), 0);
  for (size_t ni = 0; ni < nets.size(); ++ni) {
    const std::vector<DesignPoint>& pts = near_optimal.at(nets[ni]);
    for (size_t pi = 0; pi < points.size(); ++pi)
      if (std::find(pts.begin(), pts.end(), points[pi]) != pts.end())
        masks[pi] |= Mask{1} << ni;
  }
  const Mask full = n_nets == 64 ? ~Mask{0} : (Mask{1} << n_nets) - 1;

  Mask reachable = 0;
  for (Mask m : masks) reachable |= m;
  auto uncovered_names = [&](Mask covered) {
    std::string list;
    for (size_t ni = 0; ni < nets.size(); ++ni)
      if (!(covered >> ni & 1)) list += (list.empty() ? "" : ", ") + nets[ni];
    return list;
  };
  if (reachable != full)
    throw SimulationError("no shared design point covers: " +
                          uncovered_names(reachable));

  std::vector<size_t> chosen;
  if (points.size() <= 32) {
    // Exact minimum cover: subsets by ascending size, lexicographic index
    // order within a size; the first full cover wins.
    const size_t np = points.size();
    const int64_t max_size =
        std::min<int64_t>(max_core_types, static_cast<int64_t>(np));
    bool found = false;
    std::vector<size_t> combo;
    std::function<bool(size_t, int64_t)> pick = [&](size_t start,
                                                    int64_t left) -> bool {
      if (left == 0) {
        Mask cover = 0;
        for (size_t idx : combo) cover |= masks[idx];
        return cover == full;
      }
      for (size_t i = start; i + static_cast<size_t>(left) <= np; ++i) {
        combo.push_back(i);
        if (pick(i + 1, left - 1)) return true;
        combo.pop_back();
      }
      return false;
    };
    for (int64_t size = 1; size <= max_size && !found; ++size) {
      combo.clear();
      found = pick(0, size);
    }
    if (!found)
      throw SimulationError("no cover within " +
                            std::to_string(max_core_types) + " core types");
    chosen = combo;
  } else {
    // Greedy max-coverage: most newly covered networks first; ties prefer
    // larger total coverage, then canonical point order.
    Mask covered = 0;
    while (covered != full) {
      if (static_cast<int64_t>(chosen.size()) >= max_core_types)
        throw SimulationError("no cover within " +
                              std::to_string(max_core_types) +
                              " core types; uncovered: " +
                              uncovered_names(covered));
      size_t best = points.size();
      int best_new = -1, best_total = -1;
      for (size_t pi = 0; pi < points.size(); ++pi) {
        int newc = popcount(masks[pi] & ~covered);
        int total = popcount(masks[pi]);
        if (newc > best_new || (newc == best_new && total > best_total)) {
          best = pi;
          best_new = newc;
          best_total = total;
        }
      }
      if (best_new <= 0) break;  // unreachable: full reachability checked
      chosen.push_back(best);
      covered |= masks[best];
    }
    if (covered != full)
      throw SimulationError("no cover within " + std::to_string(max_core_types) +
                            " core types; uncovered: " +
                            uncovered_names(covered));
  }

  std::sort(chosen.begin(), chosen.end());  // canonical output order
  CoreRecommendation rec;
  rec.epsilon = epsilon;
  rec.objective = objective;
  for (size_t idx : chosen) rec.cores.push_back(points[idx]);
  for (size_t ni = 0; ni < nets.size(); ++ni) {
    std::vector<int64_t> covers;
    for (size_t ci = 0; ci < chosen.size(); ++ci)
      if (masks[chosen[ci]] >> ni & 1)
        covers.push_back(static_cast<int64_t>(ci));
    rec.coverage[nets[ni]] = covers;
  }
  return rec;
}

CrossPenalty cross_penalty(const SweepResult& result, const DesignPoint& home,
                           const DesignPoint& away) {
  const SweepRecord* h = nullptr;
  const SweepRecord* a = nullptr;
  for (const SweepRecord& r : result.records) {
    if (r.point == home) h = &r;
    if (r.point == away) a = &r;
  }
  if (!h || !a)
    throw ValidationError("cross penalty points must come from the sweep");
  CrossPenalty p;
  p.energy_pct = (a->energy - h->energy) / h->energy * 100.0;
  p.latency_pct = (a->latency - h->latency) / h->latency * 100.0;
  p.edp_pct = (a->edp - h->edp) / h->edp * 100.0;
  return p;
}

}  // namespace acceldse
