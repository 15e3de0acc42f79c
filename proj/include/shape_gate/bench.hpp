#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "shape_gate/pipeline.hpp"

namespace shape_gate {

/// One query blob with its probe and matching descriptor precomputed. Both
/// search modes share this work, so only the index search is timed.
struct BenchQuery {
  std::size_t query = 0;
  BlobProbe probe;
  FeatureVector features;
};

inline std::vector<BenchQuery> prepare_queries(const std::vector<GrayImage>& scenes, const Config& cfg) {
  std::vector<BenchQuery> out;
  for (const auto& img : scenes) {
    auto blobs = preprocess_scene(img, cfg.preprocess);
    for (std::size_t i = 0; i < blobs.size(); ++i) {
      BenchQuery q;
      q.query = out.size();
      q.probe = probe_blob(std::move(blobs[i]), i, cfg, cfg.scale.extensible);
      q.features = describe_blob(q.probe, cfg).features;
      out.push_back(std::move(q));
    }
  }
  return out;
}

struct BenchRow {
  std::string mode;  // "gated" | "exhaustive"
  int run = 0;
  std::size_t query = 0;
  double ns = 0;  // per search, averaged over the inner repetitions
  std::uint64_t comparisons = 0;
  std::string outcome;
};

struct ModeSummary {
  double total_ns = 0;               // sum over queries of the per-query median
  std::uint64_t total_comparisons = 0;  // per run
  double median_query_ns = 0;
  double median_query_comparisons = 0;
};

struct BenchResult {
  std::size_t db_members = 0;
  std::size_t query_count = 0;
  int repeats = 0;
  ModeSummary gated;
  ModeSummary exhaustive;
  double speedup_time = 0;
  double speedup_comparisons = 0;
  bool counts_stable = true;  // comparison counts identical across runs
  std::vector<BenchRow> rows;
};

struct BenchOptions {
  int repeats = 5;
  int inner = 32;  // searches per timed sample, to get above clock resolution
  bool warmup = true;
};

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

inline std::string outcome_tag(const SearchOutcome& s) {
  return s.outcome == Outcome::detected ? "Detected" : "NewObject:" + std::string(reason_name(s.reason));
}

}  // namespace detail

/// Gated against exhaustive search over the same prepared queries. Modes are
/// interleaved per query (order alternating by run) after one discarded
/// warmup round. Single-threaded by construction.
inline BenchResult run_benchmark(const GlobalIndex& index, const std::vector<BenchQuery>& queries,
                                 const Config& cfg, const BenchOptions& opts = {}) {
  using clock = std::chrono::steady_clock;
  const int inner = std::max(1, opts.inner);
  volatile std::uint64_t sink = 0;

  auto gated = [&](const BenchQuery& q) {
    return search_gated(index, q.probe, cfg.detect, [&]() -> const FeatureVector& { return q.features; });
  };
  auto exhaustive = [&](const BenchQuery& q) { return search_exhaustive(index, q.features, cfg.detect.tau); };

  auto timed = [&](auto&& search, const BenchQuery& q, SearchOutcome& last) {
    const auto t0 = clock::now();
    for (int k = 0; k < inner; ++k) {
      last = search(q);
      sink = sink + last.members_compared;
    }
    const auto t1 = clock::now();
    return std::chrono::duration<double, std::nano>(t1 - t0).count() / inner;
  };

  BenchResult res;
  res.db_members = index.member_count();
  res.query_count = queries.size();
  res.repeats = opts.repeats;

  const int first_run = opts.warmup ? -1 : 0;
  std::vector<std::vector<double>> g_ns(queries.size()), e_ns(queries.size());
  std::vector<std::uint64_t> g_cmp(queries.size()), e_cmp(queries.size());

  for (int run = first_run; run < opts.repeats; ++run) {
    for (const auto& q : queries) {
      SearchOutcome gs, es;
      double gt = 0, et = 0;
      if (run % 2 == 0) {
        gt = timed(gated, q, gs);
        et = timed(exhaustive, q, es);
      } else {
        et = timed(exhaustive, q, es);
        gt = timed(gated, q, gs);
      }
      if (run < 0) continue;
      if (run > 0 && (g_cmp[q.query] != gs.members_compared || e_cmp[q.query] != es.members_compared))
        res.counts_stable = false;
      g_cmp[q.query] = gs.members_compared;
      e_cmp[q.query] = es.members_compared;
      g_ns[q.query].push_back(gt);
      e_ns[q.query].push_back(et);
      res.rows.push_back({"gated", run, q.query, gt, gs.members_compared, detail::outcome_tag(gs)});
      res.rows.push_back({"exhaustive", run, q.query, et, es.members_compared, detail::outcome_tag(es)});
    }
  }

  auto summarize = [](const std::vector<std::vector<double>>& ns, const std::vector<std::uint64_t>& cmp) {
    ModeSummary m;
    std::vector<double> per_query, per_cmp;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      const double med = detail::median(ns[i]);
      per_query.push_back(med);
      per_cmp.push_back(static_cast<double>(cmp[i]));
      m.total_ns += med;
      m.total_comparisons += cmp[i];
    }
    m.median_query_ns = detail::median(per_query);
    m.median_query_comparisons = detail::median(per_cmp);
    return m;
  };
  res.gated = summarize(g_ns, g_cmp);
  res.exhaustive = summarize(e_ns, e_cmp);

  const double inf = std::numeric_limits<double>::infinity();
  res.speedup_time = res.gated.total_ns > 0 ? res.exhaustive.total_ns / res.gated.total_ns : inf;
  if (res.gated.total_comparisons > 0)
    res.speedup_comparisons = static_cast<double>(res.exhaustive.total_comparisons) /
                              static_cast<double>(res.gated.total_comparisons);
  else
    res.speedup_comparisons = res.exhaustive.total_comparisons > 0 ? inf : 1.0;
  return res;
}

inline void write_bench_csv(std::ostream& out, const BenchResult& res) {
  out << "mode,run,query,ns,comparisons,outcome\n";
  for (const auto& r : res.rows)
    out << r.mode << ',' << r.run << ',' << r.query << ',' << r.ns << ',' << r.comparisons << ','
        << r.outcome << '\n';
}

}  // namespace shape_gate
