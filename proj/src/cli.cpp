#include "frk/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "frk/report.hpp"

namespace frk {

namespace {

using nlohmann::json;

struct RunConfig {
  std::string group = "Z^1";
  std::string field = "Q";
  std::string elem;
  std::string elem_file;
  std::string matrix;
  std::string matrix_file;
  std::string elem_b;
  std::vector<int> n_list;
  std::vector<long long> m_list;
  std::vector<int> levels;
  std::vector<int> sides;
  std::vector<int> shapes;
  std::vector<long long> sofic_m;
  int depth = 2;
  int host_n = 20;
  int tau_level = 0;
  bool tau_loose = false;
  bool shuffle = false;
  std::string window = "r";  // "r" or "r+1"
  std::string eps = "1/5";
  std::string tol = "1/20";
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string output;
};

// Exact rational from "a/b", "a", or a plain decimal like "0.2".
mpq_class parse_ratio_text(const std::string& text) {
  auto dot = text.find('.');
  if (dot != std::string::npos) {
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    mpz_class num(digits);
    mpz_class den = 1;
    for (std::size_t i = dot + 1; i < text.size(); ++i) den *= 10;
    return make_ratio(num, den);
  }
  mpq_class q;
  if (q.set_str(text, 10) != 0) throw ParseError("bad rational: " + text);
  q.canonicalize();
  return q;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string element_source(const RunConfig& cfg) {
  if (!cfg.elem.empty()) return cfg.elem;
  if (!cfg.elem_file.empty()) return read_file(cfg.elem_file);
  throw PreconditionError("no element given (use --elem or --elem-file)");
}

bool has_matrix(const RunConfig& cfg) { return !cfg.matrix.empty() || !cfg.matrix_file.empty(); }

std::string matrix_source(const RunConfig& cfg) {
  return !cfg.matrix.empty() ? cfg.matrix : read_file(cfg.matrix_file);
}

std::vector<std::int64_t> moduli_for(const MarkedGroup& g, long long m) {
  if (g.kind() == GroupKind::heisenberg3) return {m};
  std::size_t free_count = 0;
  for (auto mod : g.data()->moduli)
    if (mod == 0) ++free_count;
  if (free_count == 0) return std::vector<std::int64_t>(g.data()->moduli.size(), m);
  return std::vector<std::int64_t>(free_count, m);
}

void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.output.empty()) {
    out << text;
    return;
  }
  std::ofstream file(cfg.output, std::ios::binary);
  if (!file) throw PreconditionError("cannot write output file: " + cfg.output);
  file << text;
}

std::map<std::string, std::string> common_params(const RunConfig& cfg) {
  return {{"group", cfg.group}, {"field", cfg.field}, {"seed", std::to_string(cfg.seed)}};
}

template <class T>
void require_increasing(const std::vector<T>& stages, const std::string& name) {
  for (std::size_t i = 1; i < stages.size(); ++i)
    if (!(stages[i - 1] < stages[i]))
      throw PreconditionError(name + " stage list must be strictly increasing");
}

int window_slack(const RunConfig& cfg) {
  if (cfg.window == "r") return 0;
  if (cfg.window == "r+1") return 1;
  throw ParseError("window mode must be r or r+1");
}

FolnerDriver driver_for(const MarkedGroup& g, const RunConfig& cfg) {
  return cfg.sides.empty() ? canonical_folner_driver(g) : explicit_sides_driver(g, cfg.sides);
}

// ---------------------------------------------------------------------------

int cmd_rank(const RunConfig& cfg, std::ostream& out) {
  auto g = make_group(cfg.group);
  if (cfg.n_list.empty()) throw PreconditionError("--n list must be nonempty");
  require_increasing(cfg.n_list, "--n");
  auto doc = make_document("rank", common_params(cfg));
  doc["window_mode"] = cfg.window;
  ConvergenceReport merged;
  merged.label = "rank";
  with_field(FieldTag::parse(cfg.field), [&](auto field) {
    if (has_matrix(cfg)) {
      auto delta = parse_matrix(g, field, matrix_source(cfg));
      auto image = matrix_rank_estimate(delta, cfg.n_list, delta.support_radius() + window_slack(cfg));
      merged.stages = image.stages;
    } else {
      auto a = parse_element(g, field, element_source(cfg));
      auto kernel = folner_rank_kernel(a, cfg.n_list);
      auto image = folner_rank_image(a, cfg.n_list, a.support_radius() + window_slack(cfg));
      merged.stages = kernel.stages;
      merged.stages.insert(merged.stages.end(), image.stages.begin(), image.stages.end());
    }
    detail::append_gaps(merged);
  });
  if (cfg.format == "csv") {
    emit(cfg, report_csv(merged), out);
  } else {
    doc["report"] = report_json(merged);
    emit(cfg, doc.dump(2) + "\n", out);
  }
  return 0;
}

int cmd_luck(const RunConfig& cfg, std::ostream& out) {
  auto g = make_group(cfg.group);
  if (cfg.n_list.empty() || cfg.m_list.empty())
    throw PreconditionError("--n and --m lists must be nonempty");
  require_increasing(cfg.n_list, "--n");
  require_increasing(cfg.m_list, "--m");
  auto doc = make_document("luck", common_params(cfg));
  doc["window_mode"] = cfg.window;
  ConvergenceReport merged;
  with_field(FieldTag::parse(cfg.field), [&](auto field) {
    using F = decltype(field);
    GroupRingMatrix<F> delta = has_matrix(cfg)
                                   ? parse_matrix(g, field, matrix_source(cfg))
                                   : element_as_matrix(parse_element(g, field, element_source(cfg)));
    std::vector<std::vector<std::int64_t>> quotient_params;
    for (long long m : cfg.m_list) quotient_params.push_back(moduli_for(g, m));
    merged = compare_report(delta, cfg.n_list, delta.support_radius() + window_slack(cfg),
                            quotient_params);
  });
  if (cfg.format == "csv") {
    emit(cfg, report_csv(merged), out);
  } else {
    doc["report"] = report_json(merged);
    emit(cfg, doc.dump(2) + "\n", out);
  }
  return 0;
}

int cmd_quasitile(const RunConfig& cfg, std::ostream& out) {
  auto g = make_group(cfg.group);
  if (cfg.shapes.empty()) throw PreconditionError("--shapes list must be nonempty");
  mpq_class eps = parse_ratio_text(cfg.eps);
  auto host = folner_set(g, cfg.host_n).set;
  std::vector<TileShape> shapes;
  for (std::size_t i = 0; i < cfg.shapes.size(); ++i)
    shapes.push_back(make_tile_shape(folner_set(g, cfg.shapes[i]).set, static_cast<int>(i)));
  QuasitileOptions opts;
  opts.epsilon = eps;
  if (cfg.shuffle) opts.shuffle_seed = cfg.seed;
  auto tiling = quasitile_subset(g, host, shapes, opts);

  auto doc = make_document("quasitile", common_params(cfg));
  doc["host_n"] = cfg.host_n;
  doc["tiling"] = tiling_json(tiling, eps);
  emit(cfg, doc.dump(2) + "\n", out);
  return 0;
}

int cmd_bratteli(const RunConfig& cfg, std::ostream& out) {
  auto g = make_group(cfg.group);
  auto system = build_bratteli_tiling_system(g, cfg.depth, driver_for(g, cfg));
  auto validation = validate_system(system, parse_ratio_text(cfg.tol));
  auto doc = make_document("bratteli", common_params(cfg));
  doc["depth"] = cfg.depth;
  doc["system"] = bratteli_json(system, validation);
  emit(cfg, doc.dump(2) + "\n", out);
  return 0;
}

int cmd_embed_check(const RunConfig& cfg, std::ostream& out) {
  auto g = make_group(cfg.group);
  auto system = build_bratteli_tiling_system(g, cfg.depth, driver_for(g, cfg));
  auto doc = make_document("embed-check", common_params(cfg));
  doc["depth"] = cfg.depth;

  std::vector<int> all_levels = cfg.levels;
  if (all_levels.empty())
    for (int l = 0; l < system.depth(); ++l) all_levels.push_back(l);

  with_field(FieldTag::parse(cfg.field), [&](auto field) {
    using F = decltype(field);
    auto a = parse_element(g, field, element_source(cfg));
    auto b = cfg.elem_b.empty() ? a : parse_element(g, field, cfg.elem_b);

    json defects = json::array();
    for (int level : all_levels) {
      if (level + 1 < system.depth())
        defects.push_back(defect_json("cauchy", level, cauchy_defect(a, system, level)));
      defects.push_back(defect_json("hom", level, hom_defect(a, b, system, level)));
      if constexpr (F::has_conjugation)
        defects.push_back(defect_json("star", level, star_defect(a, system, level)));
    }
    doc["defects"] = defects;
    doc["rank_convergence"] = report_json(rank_convergence(a, system, all_levels));

    if (!cfg.sofic_m.empty()) {
      QuasitileOptions opts;
      opts.epsilon = parse_ratio_text(cfg.eps);
      opts.strict_disjoint = !cfg.tau_loose;
      int r = a.support_radius();
      std::vector<TauTiling> tilings;
      json first = json::array();
      for (long long m : cfg.sofic_m) {
        auto sofic = sofic_from_quotient(g, moduli_for(g, m), std::max(r, 1));
        tilings.push_back(tau_tiling(system, sofic, opts, cfg.tau_level));
        auto fid = first_identity_defect(a, tilings.back());
        json jf = first_identity_json(fid);
        jf["stage"] = m;
        first.push_back(jf);
      }
      auto x = pi_level(a, system, cfg.tau_level);
      doc["tau_rank"] = report_json(tau_rank_convergence(x, system, tilings));
      doc["first_identity"] = first;
    }
  });
  emit(cfg, doc.dump(2) + "\n", out);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"foelner-rank: exact rank estimators, quasitilings, and ultramatricial embeddings "
               "for amenable group algebras"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file (keys like rank.elem); flags override it");

  RunConfig cfg;
  std::string command;

  auto add_common = [&](CLI::App* sub) {
    sub->fallthrough();
    sub->add_option("--group", cfg.group, "group descriptor, e.g. \"Z^2\", \"Z^1 x C2\", \"H3\"");
    sub->add_option("--field", cfg.field, "coefficient field: Q, Qi, or F<p>");
    sub->add_option("--seed", cfg.seed, "seed for randomized options");
    sub->add_option("--format", cfg.format, "output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--output", cfg.output, "output path (default stdout)");
    sub->parse_complete_callback([&, sub]() { command = sub->get_name(); });
  };
  auto add_element = [&](CLI::App* sub) {
    sub->add_option("--elem", cfg.elem, "element text, e.g. \"g0 - 1\"");
    sub->add_option("--elem-file", cfg.elem_file, "file with the element text");
  };

  auto* rank_cmd = app.add_subcommand("rank", "Folner kernel and image rank estimates");
  add_common(rank_cmd);
  add_element(rank_cmd);
  rank_cmd->add_option("--matrix", cfg.matrix, "matrix text: entries ',', rows ';'");
  rank_cmd->add_option("--matrix-file", cfg.matrix_file, "file with the matrix text");
  rank_cmd->add_option("--n", cfg.n_list, "Folner stages")->delimiter(',');
  rank_cmd->add_option("--window", cfg.window, "window mode: r (default) or r+1");

  auto* luck_cmd = app.add_subcommand("luck", "finite-quotient estimates against the Folner run");
  add_common(luck_cmd);
  add_element(luck_cmd);
  luck_cmd->add_option("--matrix", cfg.matrix, "matrix text: entries ',', rows ';'");
  luck_cmd->add_option("--matrix-file", cfg.matrix_file, "file with the matrix text");
  luck_cmd->add_option("--n", cfg.n_list, "Folner stages")->delimiter(',');
  luck_cmd->add_option("--m", cfg.m_list, "quotient moduli")->delimiter(',');
  luck_cmd->add_option("--window", cfg.window, "window mode: r (default) or r+1");

  auto* tile_cmd = app.add_subcommand("quasitile", "greedy epsilon-quasitiling of a Folner box");
  add_common(tile_cmd);
  tile_cmd->add_option("--host-n", cfg.host_n, "host box Folner index");
  tile_cmd->add_option("--shapes", cfg.shapes, "tile box sides, largest first")->delimiter(',');
  tile_cmd->add_option("--eps", cfg.eps, "epsilon as an exact rational, e.g. 1/5");
  tile_cmd->add_flag("--shuffle", cfg.shuffle, "seeded random anchor order");

  auto* brat_cmd = app.add_subcommand("bratteli", "build and validate a Bratteli tiling system");
  add_common(brat_cmd);
  brat_cmd->add_option("--depth", cfg.depth, "number of levels");
  brat_cmd->add_option("--sides", cfg.sides, "explicit per-level Folner indices")->delimiter(',');
  brat_cmd->add_option("--tol", cfg.tol, "harmonicity tolerance (exact rational)");

  auto* embed_cmd = app.add_subcommand("embed-check", "defect bounds for the level maps");
  add_common(embed_cmd);
  add_element(embed_cmd);
  embed_cmd->add_option("--elem-b", cfg.elem_b, "second element for the product defect");
  embed_cmd->add_option("--depth", cfg.depth, "system depth");
  embed_cmd->add_option("--sides", cfg.sides, "explicit per-level Folner indices")->delimiter(',');
  embed_cmd->add_option("--levels", cfg.levels, "levels to check (default all)")->delimiter(',');
  embed_cmd->add_option("--sofic-m", cfg.sofic_m, "quotient cycle sizes for the sofic checks")
      ->delimiter(',');
  embed_cmd->add_option("--tau-level", cfg.tau_level, "refinement level for tau (default 0)");
  embed_cmd->add_flag("--tau-loose", cfg.tau_loose, "allow overlapping tau quasitiles");
  embed_cmd->add_option("--eps", cfg.eps, "epsilon for the sofic quasitiling");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (command == "rank") return cmd_rank(cfg, out);
    if (command == "luck") return cmd_luck(cfg, out);
    if (command == "quasitile") return cmd_quasitile(cfg, out);
    if (command == "bratteli") return cmd_bratteli(cfg, out);
    if (command == "embed-check") return cmd_embed_check(cfg, out);
    err << "error: no command selected\n";
    return 1;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const PreconditionError& e) {
    err << "precondition failed: " << e.what() << "\n";
    return 2;
  } catch (const InvariantViolation& e) {
    err << "BOUND VIOLATION (implementation falsified): " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace frk
