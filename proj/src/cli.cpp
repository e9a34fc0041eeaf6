#include "aerodesign/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>

#include "aerodesign/config.hpp"
#include "aerodesign/error.hpp"
#include "aerodesign/optimize.hpp"
#include "aerodesign/render.hpp"
#include "aerodesign/resources.hpp"
#include "aerodesign/service.hpp"
#include "aerodesign/util.hpp"

namespace aerodesign {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::string run_id;
  // build-kg
  std::string corpus;
  std::string prompt;
  std::string out;
  std::string script;
  std::string index_out;
  std::size_t min_degree = 10;
  // decide
  bool accept = false;
  bool reject = false;
  bool proceed = false;
  std::string comment;
  int design_id = -1;
  std::string request_id;
  // optimize
  double m = 0.05, p = 0.4, t = 0.14;
  int budget = 1500;
  std::uint64_t seed = 0;
  // serve
  std::string addr = "127.0.0.1:8080";
};

int cmd_build_kg(const Options& o, std::ostream& out) {
  const std::string prompt = resource_text(o.prompt);
  std::unique_ptr<ChatBackend> owned;
  std::unique_ptr<Embedder> embedder;
  std::optional<Runtime> runtime;
  const ChatBackend* extractor = nullptr;
  KnowledgeSettings ks;
  if (!o.config.empty()) {
    runtime.emplace(load_app_config(o.config));
    ks = runtime->config().knowledge;
  }
  if (!o.script.empty()) {
    owned = std::make_unique<ScriptedChatBackend>(ScriptedChatBackend::from_file(o.script));
    extractor = owned.get();
  } else if (runtime) {
    extractor = &runtime->backend("ontologist");
  } else {
    throw Error(errc::config_invalid, "build-kg needs --script or a --config with an ontologist backend");
  }
  const Embedder* emb = nullptr;
  if (runtime) {
    emb = &runtime->embedder();
  } else {
    embedder = std::make_unique<HashingEmbedder>();
    emb = embedder.get();
  }
  const auto corpus = load_corpus(o.corpus);
  if (corpus.empty()) throw Error(errc::io, "no .md or .txt documents in " + o.corpus);
  const auto report = build_kg(corpus, prompt, *extractor, *emb, ks.chunk_size, ks.merge_threshold);
  const KnowledgeGraph filtered = filter_by_degree(report.graph, o.min_degree);
  const std::string csv = export_csv(filtered);
  write_file_atomic(o.out, csv);
  if (!o.index_out.empty()) {
    const auto chunks = chunk_kg_csv(csv, fs::path(o.out).filename().string(), ks.rows_per_chunk);
    index(chunks, *emb).save(o.index_out);
  }
  out << Json{{"documents", corpus.size()},
              {"chunks", report.chunks},
              {"raw_triples", report.raw_triples},
              {"warnings", report.warnings},
              {"nodes", report.graph.nodes().size()},
              {"edges", report.graph.edges().size()},
              {"filtered_nodes", filtered.nodes().size()},
              {"filtered_edges", filtered.edges().size()},
              {"min_degree", o.min_degree},
              {"out", o.out}}
             .dump(2)
      << "\n";
  return 0;
}

int cmd_run(const Options& o, std::ostream& out) {
  Runtime rt(load_app_config(o.config));
  RunConfig config = rt.config().run_config();
  if (!o.run_id.empty()) config.run_id = o.run_id;
  Workflow wf(rt.deps());
  RunState state = wf.kickoff(config);
  wf.advance(state);
  Json s = summary_json(state);
  s.erase("config");
  s["run_dir"] = rt.store().run_dir(state.run_id).string();
  out << s.dump(2) << "\n";
  return 0;
}

int cmd_status(const Options& o, std::ostream& out) {
  Runtime rt(load_app_config(o.config));
  Workflow wf(rt.deps());
  Json s = summary_json(wf.resume(o.run_id));
  s.erase("config");
  out << s.dump(2) << "\n";
  return 0;
}

int cmd_decide(const Options& o, std::ostream& out) {
  ManagerDecision d;
  if (o.accept) d.kind = DecisionKind::accept;
  else if (o.reject) d.kind = DecisionKind::reject_with_comment;
  else if (o.proceed) d.kind = DecisionKind::proceed;
  else d.kind = DecisionKind::comment_only;
  d.comment = o.comment;
  if (o.design_id >= 0) d.design_id = o.design_id;
  d.request_id = o.request_id;
  Runtime rt(load_app_config(o.config));
  Workflow wf(rt.deps());
  RunState state = wf.resume(o.run_id);
  wf.decide(state, d);
  Json s = summary_json(state);
  s.erase("config");
  out << s.dump(2) << "\n";
  return 0;
}

int cmd_optimize(const Options& o, std::ostream& out) {
  const DesignParams params(o.m, o.p, o.t);
  const KulfanFit fit = to_kulfan(generate_naca4(params, 200));
  OptimizationProblem problem{fit.params};
  problem.budget = o.budget;
  problem.seed = o.seed;
  const OptimizationResult r = optimize_ld(problem);
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    const auto initial = from_kulfan(r.initial, 200);
    write_file(fs::path(o.out) / "optimization_trajectory.csv", trajectory_to_csv(r.trajectory));
    write_file(fs::path(o.out) / "optimized.csv", profile_to_csv(r.optimized_profile));
    write_file(fs::path(o.out) / "comparison.svg", render_comparison(initial, r.optimized_profile));
  }
  out << Json{{"initial", {{"kulfan", to_json(r.initial)}, {"aero", to_json(r.initial_aero)}}},
              {"optimized", {{"kulfan", to_json(r.optimized)}, {"aero", to_json(r.final_aero)}}},
              {"fit_max_residual", fit.max_residual},
              {"improved", r.improved},
              {"evaluations", r.evaluations},
              {"constraints_ok", r.audit.all_ok()},
              {"warnings", r.warnings}}
             .dump(2)
      << "\n";
  return 0;
}

int cmd_serve(const Options& o, std::ostream& out, std::ostream& err) {
  const auto colon = o.addr.rfind(':');
  if (colon == std::string::npos) {
    err << "--addr must be HOST:PORT\n";
    return 1;
  }
  const std::string host = o.addr.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(o.addr.substr(colon + 1));
  } catch (const std::exception&) {
    err << "--addr must be HOST:PORT\n";
    return 1;
  }
  Runtime rt(load_app_config(o.config));
  Service service(rt.deps(), rt.config().run_config());
  out << "serving on http://" << host << ":" << port << "/api\n" << std::flush;
  if (!service.listen(host, port)) throw Error(errc::io, "cannot listen on " + o.addr);
  return 0;
}

int cmd_export(const Options& o, std::ostream& out) {
  Runtime rt(load_app_config(o.config));
  Workflow wf(rt.deps());
  const RunState state = wf.resume(o.run_id);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  write_file(dir / "events.jsonl", rt.store().read_events(o.run_id));
  write_file(dir / "candidates.csv", candidates_to_csv(state));
  write_file(dir / "summary.json", summary_json(state).dump(2) + "\n");
  if (state.finished()) write_file(dir / "report.json", build_report(state));
  out << "exported " << o.run_id << " to " << dir.string() << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-agent airfoil design workflow", "aerodesign"};
  app.require_subcommand(1);
  Options o;

  auto* build_kg_cmd = app.add_subcommand("build-kg", "Build a knowledge graph CSV from a corpus");
  build_kg_cmd->add_option("--corpus", o.corpus, "Directory of .md/.txt documents")->required();
  build_kg_cmd->add_option("--prompt", o.prompt, "Ontologist prompt resource")
      ->required()
      ->check(CLI::IsMember({"systems_engineer_kg", "design_engineer_kg"}));
  build_kg_cmd->add_option("--out", o.out, "Output KG CSV")->required();
  build_kg_cmd->add_option("--config", o.config, "Config file with an ontologist backend");
  build_kg_cmd->add_option("--script", o.script, "Scripted ontologist backend YAML");
  build_kg_cmd->add_option("--index", o.index_out, "Also write the vector store here");
  build_kg_cmd->add_option("--min-degree", o.min_degree, "Degree filter threshold");

  auto* run_cmd = app.add_subcommand("run", "Start a run and drive it to the first Manager gate");
  run_cmd->add_option("--config", o.config)->required();
  run_cmd->add_option("--run-id", o.run_id);

  auto* status_cmd = app.add_subcommand("status", "Show a run summary");
  status_cmd->add_option("--config", o.config)->required();
  status_cmd->add_option("--run", o.run_id)->required();

  auto* decide_cmd = app.add_subcommand("decide", "Apply a Manager decision to a paused run");
  decide_cmd->add_option("--config", o.config)->required();
  decide_cmd->add_option("--run", o.run_id)->required();
  auto* accept = decide_cmd->add_flag("--accept", o.accept);
  auto* reject = decide_cmd->add_flag("--reject", o.reject);
  auto* proceed = decide_cmd->add_flag("--proceed", o.proceed);
  accept->excludes(reject)->excludes(proceed);
  reject->excludes(proceed);
  decide_cmd->add_option("--comment", o.comment, "Manager comment");
  decide_cmd->add_option("--design", o.design_id, "Target design id");
  decide_cmd->add_option("--request-id", o.request_id, "Idempotency key");

  auto* optimize_cmd = app.add_subcommand("optimize", "Maximise L/D from a NACA 4-digit design");
  optimize_cmd->add_option("--m", o.m, "Maximum camber");
  optimize_cmd->add_option("--p", o.p, "Camber location");
  optimize_cmd->add_option("--t", o.t, "Maximum thickness");
  optimize_cmd->add_option("--budget", o.budget)->check(CLI::Range(50, 1000000));
  optimize_cmd->add_option("--seed", o.seed);
  optimize_cmd->add_option("--out", o.out, "Directory for trajectory, profile and SVG");

  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API");
  serve_cmd->add_option("--config", o.config)->required();
  serve_cmd->add_option("--addr", o.addr, "HOST:PORT");

  auto* export_cmd = app.add_subcommand("export", "Copy a run's log, tables and report");
  export_cmd->add_option("--config", o.config)->required();
  export_cmd->add_option("--run", o.run_id)->required();
  export_cmd->add_option("--out", o.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << "run with --help for usage\n";
    return 1;
  }
  if (decide_cmd->parsed() && !o.accept && !o.proceed && trim(o.comment).empty()) {
    err << "decide needs --accept, --reject --comment TEXT, --comment TEXT or --proceed\n";
    return 1;
  }

  try {
    if (build_kg_cmd->parsed()) return cmd_build_kg(o, out);
    if (run_cmd->parsed()) return cmd_run(o, out);
    if (status_cmd->parsed()) return cmd_status(o, out);
    if (decide_cmd->parsed()) return cmd_decide(o, out);
    if (optimize_cmd->parsed()) return cmd_optimize(o, out);
    if (serve_cmd->parsed()) return cmd_serve(o, out, err);
    if (export_cmd->parsed()) return cmd_export(o, out);
  } catch (const Error& e) {
    err << "error [" << e.code() << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace aerodesign
