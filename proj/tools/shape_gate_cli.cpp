// shape-gate: train, query and benchmark the shape/scale gated object index.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "shape_gate/shape_gate.hpp"

namespace fs = std::filesystem;
using namespace shape_gate;

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kLabelMismatch = 2,
  kNewObject = 3,
  kFingerprintMismatch = 4,
  kCorrupt = 5,
};

Config resolve_config(const std::string& flag) {
  if (!flag.empty()) return load_config(flag);
  if (const char* env = std::getenv("SHAPE_GATE_CONFIG"); env && *env) return load_config(env);
  if (fs::exists("shape-gate.toml")) return load_config("shape-gate.toml");
  return Config{};
}

Database open_checked(const fs::path& path, const Config& cfg) {
  Database db = load_database(path);
  const auto want = config_fingerprint(cfg);
  if (db.config_fingerprint != want)
    throw FingerprintMismatchError("database " + path.string() + " was built under config " +
                                   db.config_fingerprint + ", current config is " + want +
                                   "; retrain or pass the original --config");
  return db;
}

int cmd_train(const fs::path& db_path, const std::vector<std::string>& manifests, const Config& cfg) {
  Database db;
  if (fs::exists(db_path))
    db = open_checked(db_path, cfg);
  else
    db.config_fingerprint = config_fingerprint(cfg);

  std::size_t created = 0, members = 0;
  for (const auto& mpath : manifests) {
    const Manifest m = read_manifest(mpath);
    const GrayImage img = read_pgm(m.image.string());
    const auto report = train_scene(img, m.labels, db.index, cfg, m.image.filename().string());
    for (const auto& row : report.rows) {
      std::cout << report.scene_id << ": " << row.label << " -> " << shape_name(row.shape)
                << " window " << row.window.index << " (" << row.window.side << "px) cluster "
                << row.cluster_id << (row.created_new_cluster ? " [new]" : "") << '\n';
      created += row.created_new_cluster;
      ++members;
    }
  }
  save_database(db, db_path);
  std::cout << "trained " << members << " objects from " << manifests.size() << " scene(s); "
            << created << " new cluster(s); database has " << db.index.clusters().size()
            << " clusters, " << db.index.member_count() << " members\n";
  return kOk;
}

int cmd_detect(const fs::path& db_path, const std::string& image, Config cfg,
               std::optional<double> tau, std::optional<int> slack, bool exhaustive, bool json,
               unsigned threads) {
  const Database db = open_checked(db_path, cfg);
  if (tau) cfg.detect.tau = *tau;
  if (slack) cfg.detect.slack = *slack;
  if (cfg.detect.tau <= 0) throw Error("--tau must be > 0");

  DetectOptions opts;
  opts.exhaustive = exhaustive;
  opts.threads = threads;
  const auto results = detect_scene(read_pgm(image), db.index, cfg, opts);

  bool all_detected = true;
  for (const auto& r : results) {
    all_detected = all_detected && r.outcome == Outcome::detected;
    if (json) {
      std::cout << to_json(r).dump() << '\n';
      continue;
    }
    std::cout << "blob " << r.blob << ": ";
    if (r.outcome == Outcome::detected)
      std::cout << "Detected " << r.label << " (distance " << std::setprecision(4) << r.distance << ')';
    else
      std::cout << "NewObject (" << reason_name(r.reason) << ')';
    std::cout << " shape=" << shape_name(r.shape) << " window=" << r.window.index
              << " clusters=" << r.clusters_visited << " compared=" << r.members_compared << '\n';
  }
  return all_detected ? kOk : kNewObject;
}

int cmd_bench(const fs::path& db_path, const fs::path& query_list, Config cfg, int repeats,
              int inner, const std::string& csv_path) {
  const Database db = open_checked(db_path, cfg);
  std::vector<GrayImage> scenes;
  for (const auto& line : read_lines(query_list)) {
    fs::path p = resolve_relative(query_list, line);
    if (p.extension() == ".manifest") p = read_manifest(p).image;
    scenes.push_back(read_pgm(p.string()));
  }
  const auto queries = prepare_queries(scenes, cfg);
  const auto res = run_benchmark(db.index, queries, cfg, {repeats, inner, true});

  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out) throw Error("cannot write " + csv_path);
    write_bench_csv(out, res);
  }
  std::cout << std::fixed << std::setprecision(1)
            << "db members: " << res.db_members << ", queries: " << res.query_count
            << ", repeats: " << res.repeats << '\n'
            << "gated:      total " << res.gated.total_ns << " ns, comparisons "
            << res.gated.total_comparisons << ", median/query " << res.gated.median_query_ns << " ns\n"
            << "exhaustive: total " << res.exhaustive.total_ns << " ns, comparisons "
            << res.exhaustive.total_comparisons << ", median/query " << res.exhaustive.median_query_ns
            << " ns\n"
            << std::setprecision(2) << "speedup: time " << res.speedup_time << "x, comparisons "
            << res.speedup_comparisons << "x\n";
  return kOk;
}

int cmd_db_stats(const fs::path& db_path) {
  const Database db = load_database(db_path);
  const auto& clusters = db.index.clusters();
  std::cout << clusters.size() << " clusters, " << db.index.member_count() << " members, config "
            << db.config_fingerprint << '\n';
  if (!clusters.empty())
    std::cout << std::left << std::setw(5) << "id" << std::setw(11) << "shape" << std::setw(8)
              << "window" << std::setw(6) << "side" << std::setw(7) << "count"
              << "mean-norm\n";
  for (const auto& c : clusters) {
    double norm = 0;
    for (double v : c.mean.values()) norm += v * v;
    std::cout << std::left << std::setw(5) << c.id << std::setw(11) << shape_name(c.key.shape)
              << std::setw(8) << c.key.window << std::setw(6) << c.window_side << std::setw(7)
              << c.count() << std::fixed << std::setprecision(4) << std::sqrt(norm) << '\n';
  }
  std::string why;
  if (db.index.consistent(&why)) {
    std::cout << "index consistency: OK\n";
    return kOk;
  }
  std::cout << "index consistency: FAILED (" << why << ")\n";
  return kCorrupt;
}

int cmd_gen_corpus(const fs::path& out_dir, std::uint64_t seed, int per_class, CorpusOptions opts) {
  fs::create_directories(out_dir);
  const auto items = generate_corpus(seed, per_class, opts);
  std::ofstream list(out_dir / "queries.list"), truth(out_dir / "truth.csv");
  truth << "file,class\n";
  for (const auto& it : items) {
    const std::string pgm = it.name + ".pgm";
    write_pgm((out_dir / pgm).string(), it.image);
    write_manifest(out_dir / (it.name + ".manifest"), {pgm, {it.label}});
    list << pgm << '\n';
    truth << pgm << ',' << shape_name(it.truth) << '\n';
  }
  std::cout << "wrote " << items.size() << " scenes to " << out_dir.string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shape-gate: shape- and scale-gated object detection"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "config file (default: $SHAPE_GATE_CONFIG, then ./shape-gate.toml)");

  std::string db_path;

  auto* train = app.add_subcommand("train", "train scenes from manifests into a database");
  std::vector<std::string> manifests;
  train->add_option("db", db_path, "database file (created if absent)")->required();
  train->add_option("manifests", manifests, "scene manifests")->required();

  auto* detect = app.add_subcommand("detect", "detect the objects of one scene");
  std::string image;
  std::optional<double> tau;
  std::optional<int> slack;
  bool exhaustive = false, json = false;
  unsigned threads = 1;
  detect->add_option("db", db_path, "database file")->required()->check(CLI::ExistingFile);
  detect->add_option("image", image, "scene image (PGM)")->required()->check(CLI::ExistingFile);
  detect->add_option("--tau", tau, "match distance threshold");
  detect->add_option("--slack", slack, "accept clusters this many windows away");
  detect->add_flag("--exhaustive", exhaustive, "scan every cluster (baseline)");
  detect->add_flag("--json", json, "JSON lines output");
  detect->add_option("--threads", threads, "blobs processed concurrently")->check(CLI::PositiveNumber);

  auto* bench = app.add_subcommand("bench", "time gated against exhaustive search");
  std::string queries, csv_path;
  int repeats = 5, inner = 32;
  bench->add_option("db", db_path, "database file")->required()->check(CLI::ExistingFile);
  bench->add_option("queries", queries, "list of query scene images")->required()->check(CLI::ExistingFile);
  bench->add_option("--repeats", repeats, "timed runs per mode")->check(CLI::PositiveNumber);
  bench->add_option("--inner", inner, "searches per timing sample")->check(CLI::PositiveNumber);
  bench->add_option("--csv", csv_path, "write per-query rows to this CSV");

  auto* stats = app.add_subcommand("db-stats", "print the cluster table and check the index");
  stats->add_option("db", db_path, "database file")->required()->check(CLI::ExistingFile);

  auto* gen = app.add_subcommand("gen-corpus", "write a synthetic shape corpus");
  std::string out_dir, classes;
  std::uint64_t seed = 7;
  int per_class = 100;
  CorpusOptions corpus;
  gen->add_option("out", out_dir, "output directory")->required();
  gen->add_option("--seed", seed, "random seed");
  gen->add_option("--per-class", per_class, "scenes per shape class")->check(CLI::PositiveNumber);
  gen->add_option("--noise", corpus.noise, "salt-and-pepper rate")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--min-size", corpus.min_size, "smallest shape extent (px)")->check(CLI::PositiveNumber);
  gen->add_option("--max-size", corpus.max_size, "largest shape extent (px)")->check(CLI::PositiveNumber);
  gen->add_option("--canvas", corpus.canvas, "scene side (px)")->check(CLI::PositiveNumber);
  gen->add_option("--classes", classes, "comma-separated shape classes (default: all)");

  CLI11_PARSE(app, argc, argv);

  try {
    const Config cfg = resolve_config(config_path);
    if (train->parsed()) return cmd_train(db_path, manifests, cfg);
    if (detect->parsed())
      return cmd_detect(db_path, image, cfg, tau, slack, exhaustive, json, threads);
    if (bench->parsed()) return cmd_bench(db_path, queries, cfg, repeats, inner, csv_path);
    if (stats->parsed()) return cmd_db_stats(db_path);
    if (gen->parsed()) {
      if (!classes.empty()) {
        corpus.classes.clear();
        std::stringstream ss(classes);
        for (std::string name; std::getline(ss, name, ',');) {
          auto s = shape_from_name(trim(name));
          if (!s) throw Error("unknown shape class '" + name + "'");
          corpus.classes.push_back(*s);
        }
      }
      if (corpus.max_size + 8 > corpus.canvas) throw Error("--max-size does not fit the canvas");
      return cmd_gen_corpus(out_dir, seed, per_class, corpus);
    }
  } catch (const LabelMismatchError& e) {
    std::cerr << "error: " << e.what() << " (database left unchanged)\n";
    return kLabelMismatch;
  } catch (const FingerprintMismatchError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFingerprintMismatch;
  } catch (const CorruptionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCorrupt;
  } catch (const SchemaVersionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCorrupt;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
