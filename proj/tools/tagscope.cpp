// SPDX-License-Identifier: Apache-2.0
//
// tagscope: command-line entry points for every pipeline stage.
//
//   tagscope ingest       --corpus FILE
//   tagscope build-index  --corpus FILE --out SNAPSHOT
//   tagscope map-queries  (--corpus FILE | --index SNAPSHOT) --seeds FILE --out MAPPINGS
//   tagscope search       (--corpus | --index) (--tags a,b | --query Q --mappings F) --from M --to M
//   tagscope evaluate     (--corpus | --index) --mappings F --log FILE [--from M --to M] [--out-dir DIR]
//   tagscope sweep        (--corpus | --index) --mappings F --log FILE --past N --future N
//   tagscope serve        (--corpus | --index) --mappings F [--listen HOST:PORT] [--static-dir DIR]

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tagscope/config.hpp"
#include "tagscope/corpus.hpp"
#include "tagscope/evaluation.hpp"
#include "tagscope/io.hpp"
#include "tagscope/search.hpp"
#include "tagscope/server.hpp"
#include "tagscope/tag_mapping.hpp"
#include "tagscope/temporal_index.hpp"

namespace {

using namespace tagscope;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Loaded {
  TemporalTagIndex index;
  IngestStats stats;
};

Loaded load_index(const Config& cfg) {
  if (cfg.index_path) {
    auto snap = load_snapshot(*cfg.index_path);
    return {std::move(snap.index), std::move(snap.stats)};
  }
  if (!cfg.corpus_path) throw std::runtime_error("no input: pass --corpus or --index");
  auto corpus = load_corpus(*cfg.corpus_path);
  return {TemporalTagIndex::build(corpus.bookmarks), std::move(corpus.stats)};
}

std::vector<TagMapping> require_mappings(const Config& cfg) {
  if (!cfg.mapping_path) throw std::runtime_error("no mapping file: pass --mappings (produce one with map-queries)");
  return load_mappings(*cfg.mapping_path);
}

QueryLog require_log(const Config& cfg) {
  if (cfg.log_paths.empty()) throw std::runtime_error("no query log: pass --log");
  QueryLog merged;
  for (const auto& path : cfg.log_paths) {
    auto log = load_query_log(path);
    merged.rejects += log.rejects;
    std::move(log.records.begin(), log.records.end(), std::back_inserter(merged.records));
  }
  return merged;
}

std::optional<TimeWindow> window_from(const std::optional<std::string>& from, const std::optional<std::string>& to) {
  if (!from && !to) return std::nullopt;
  if (!from || !to) throw UsageError("--from and --to must be given together");
  try {
    return TimeWindow::parse(*from, *to);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
}

std::vector<std::uint64_t> parse_x_list(const std::string& text) {
  std::vector<std::uint64_t> xs;
  for (auto part : tagscope::detail::split(text, ',')) {
    part = tagscope::detail::trim(part);
    if (part.empty()) continue;
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size()) throw UsageError("bad --top-x value '" + std::string(part) + "'");
    xs.push_back(v);
  }
  return xs;
}

std::atomic<httplib::Server*> g_server{nullptr};

extern "C" void stop_server(int) {
  if (auto* s = g_server.load()) s->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal tag search over social-bookmark corpora, with click-log recall evaluation"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  std::optional<std::string> config_file;
  app.add_option("--config", config_file, "JSON config file (default: $TAGSCOPE_CONFIG)");

  // Flag storage shared by subcommands; merged over the config file after parsing.
  std::optional<std::string> corpus, index, seeds, mappings, out, from, to, query, tags, listen, static_dir, out_dir, top_x,
      granularity;
  std::vector<std::string> logs;
  std::optional<double> threshold, min_fraction;
  std::optional<std::uint64_t> min_users;
  std::optional<std::size_t> limit;
  bool global_usage = false;
  std::string format = "csv";
  int past = 12, future = 12;

  const auto add_input = [&](CLI::App* sub) {
    sub->add_option("--corpus", corpus, "Bookmark TSV file");
    sub->add_option("--index", index, "Index snapshot written by build-index");
  };
  const auto add_eval = [&](CLI::App* sub) {
    add_input(sub);
    sub->add_option("--mappings", mappings, "Mapping file written by map-queries");
    sub->add_option("--log", logs, "Query log TSV file (repeatable; records are merged)");
    sub->add_option("--granularity", granularity, "URL matching: host or full")->check(CLI::IsMember({"host", "full"}));
  };

  auto* ingest = app.add_subcommand("ingest", "Parse a corpus and print ingest statistics as JSON");
  ingest->add_option("--corpus", corpus, "Bookmark TSV file");

  auto* build = app.add_subcommand("build-index", "Ingest a corpus and write an index snapshot");
  build->add_option("--corpus", corpus, "Bookmark TSV file");
  build->add_option("--out", out, "Snapshot path")->required();

  auto* map = app.add_subcommand("map-queries", "Map every seed-file query to tags");
  add_input(map);
  map->add_option("--seeds", seeds, "Seed TSV file");
  map->add_option("--out", out, "Mapping file to write (default: stdout)");
  map->add_option("--threshold", threshold, "Score threshold for expansion tags");
  map->add_option("--min-users", min_users, "Minimum users per candidate tag");
  map->add_option("--min-fraction", min_fraction, "Minimum fraction of seed posters per candidate tag");
  map->add_flag("--global-usage", global_usage, "Count candidate tag users over the whole corpus");

  auto* search_cmd = app.add_subcommand("search", "Retrieve URLs for tags or a mapped query in a month window");
  add_input(search_cmd);
  search_cmd->add_option("--tags", tags, "Comma-separated tags");
  search_cmd->add_option("--query", query, "Query looked up in --mappings");
  search_cmd->add_option("--mappings", mappings, "Mapping file");
  search_cmd->add_option("--from", from, "First month (YYYY-MM)")->required();
  search_cmd->add_option("--to", to, "Last month (YYYY-MM)")->required();
  search_cmd->add_option("--limit", limit, "Maximum rows");
  search_cmd->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* eval = app.add_subcommand("evaluate", "Recall of mapped queries against a click log");
  add_eval(eval);
  eval->add_option("--from", from, "Window start (default: log span)");
  eval->add_option("--to", to, "Window end (default: log span)");
  eval->add_option("--out-dir", out_dir, "Write per_query/unmapped/buckets/top_x CSVs here");
  eval->add_option("--top-x", top_x, "Comma-separated X values for the top-X curve (default: all)");

  auto* sweep = app.add_subcommand("sweep", "Recall matrix over windows widened around the log span");
  add_eval(sweep);
  sweep->add_option("--from", from, "Anchor start (default: log span)");
  sweep->add_option("--to", to, "Anchor end (default: log span)");
  sweep->add_option("--past", past, "Maximum months before the anchor")->check(CLI::NonNegativeNumber);
  sweep->add_option("--future", future, "Maximum months after the anchor")->check(CLI::NonNegativeNumber);
  sweep->add_option("--out", out, "CSV path (default: stdout)");

  auto* serve = app.add_subcommand("serve", "Serve the HTTP API over a loaded index");
  add_input(serve);
  serve->add_option("--mappings", mappings, "Mapping file");
  serve->add_option("--listen", listen, "HOST:PORT (default 127.0.0.1:8080)");
  serve->add_option("--static-dir", static_dir, "Directory of UI assets served at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    Config cfg = config_file ? load_config(*config_file) : config_from_environment();
    if (corpus) cfg.corpus_path = corpus;
    if (index) cfg.index_path = index;
    if (seeds) cfg.seed_path = seeds;
    if (mappings) cfg.mapping_path = mappings;
    if (!logs.empty()) cfg.log_paths = logs;
    if (threshold) cfg.threshold = *threshold;
    if (min_users) cfg.min_users = *min_users;
    if (min_fraction) cfg.min_fraction = *min_fraction;
    if (granularity) cfg.granularity = *parse_granularity(*granularity);
    if (listen) cfg.listen = *listen;
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }

    if (*ingest) {
      if (!cfg.corpus_path) throw std::runtime_error("no input: pass --corpus");
      const auto c = load_corpus(*cfg.corpus_path);
      std::cout << stats_json(c.stats).dump(2) << '\n';
      return 0;
    }

    if (*build) {
      if (!cfg.corpus_path) throw std::runtime_error("no input: pass --corpus");
      const auto c = load_corpus(*cfg.corpus_path);
      const auto idx = TemporalTagIndex::build(c.bookmarks);
      save_snapshot(*out, idx, c.stats);
      std::cerr << "indexed " << idx.post_count() << " posts, " << idx.url_count() << " urls, " << idx.tag_count()
                << " tags (" << c.stats.rejects << " rejected lines) -> " << *out << '\n';
      return 0;
    }

    if (*map) {
      if (!cfg.seed_path) throw std::runtime_error("no seed file: pass --seeds");
      const auto loaded = load_index(cfg);
      const auto seed_file = load_seeds(*cfg.seed_path);
      auto options = cfg.mapping_options();
      options.filter.global_usage = global_usage;
      const auto run = map_queries(loaded.index, seed_file.sets, options);
      if (out) {
        save_mappings(*out, run.mappings);
      } else {
        write_mappings(std::cout, run.mappings);
      }
      for (const auto& [q, why] : run.failures) std::cerr << "unmapped: " << q << ": " << why << '\n';
      std::cerr << "mapped " << run.mappings.size() << " of " << seed_file.sets.size() << " queries\n";
      return 0;
    }

    if (*search_cmd) {
      const auto window = *window_from(from, to);
      const auto loaded = load_index(cfg);
      SearchResponse resp;
      if (tags) {
        std::vector<std::string_view> parts;
        for (auto p : tagscope::detail::split(*tags, ',')) parts.push_back(p);
        const auto tag_list = normalize_tags(parts);
        if (tag_list.empty()) throw UsageError("--tags has no usable tag");
        resp = search_tags(loaded.index, query.value_or(""), tag_list, window, limit);
      } else {
        if (!query) throw UsageError("search needs --tags or --query");
        const auto all = require_mappings(cfg);
        const auto it = std::find_if(all.begin(), all.end(),
                                     [&](const TagMapping& m) { return canonical_query(m.query) == canonical_query(*query); });
        if (it == all.end()) throw std::runtime_error("no mapping for query '" + *query + "'");
        resp = search(loaded.index, *it, window, limit);
      }
      std::cout << (format == "json" ? search_json(resp).dump(2) + "\n" : search_csv(resp));
      return 0;
    }

    if (*eval || *sweep) {
      const auto all = require_mappings(cfg);
      const auto log = require_log(cfg);
      const auto loaded = load_index(cfg);
      const GroundTruthTable truths(log);
      auto window = window_from(from, to);
      if (!window) window = truths.anchor();
      if (!window) throw std::runtime_error("query log is empty; pass --from/--to");
      EvaluationOptions options;
      options.granularity = cfg.granularity;

      if (*sweep) {
        const auto m = temporal_sweep(loaded.index, all, truths, *window, past, future, options);
        if (out) {
          write_file(*out, sweep_csv(m));
        } else {
          std::cout << sweep_csv(m);
        }
        return 0;
      }

      auto report = evaluate_all(loaded.index, all, truths, *window, options);
      if (top_x) report.top_x_curve = top_x_curve(report, parse_x_list(*top_x));
      if (out_dir) {
        std::filesystem::create_directories(*out_dir);
        const std::filesystem::path dir(*out_dir);
        write_file(dir / "per_query.csv", per_query_csv(report));
        write_file(dir / "unmapped.csv", unmapped_csv(report));
        write_file(dir / "buckets.csv", buckets_csv(report.buckets));
        write_file(dir / "top_x.csv", top_x_csv(report.top_x_curve));
      }
      std::cout << per_query_csv(report);
      std::cerr << "window " << window->str() << ", granularity " << granularity_name(cfg.granularity) << ": "
                << report.evaluable() << " evaluable of " << all.size() << " mapped queries, average recall "
                << (report.average ? tagscope::detail::fixed6(*report.average) : std::string("n/a")) << '\n';
      return 0;
    }

    if (*serve) {
      auto loaded = load_index(cfg);
      auto all = cfg.mapping_path ? load_mappings(*cfg.mapping_path) : std::vector<TagMapping>{};
      const api::ServiceState state(std::move(loaded.index), std::move(loaded.stats), std::move(all));
      const auto addr = ListenAddress::parse(cfg.listen);
      httplib::Server server;
      install_routes(server, state, static_dir);
      g_server = &server;
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      std::cerr << "listening on " << addr.host << ':' << addr.port << '\n';
      if (!server.listen(addr.host, addr.port)) throw std::runtime_error("cannot listen on " + cfg.listen);
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
