#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "trustweave/dot.hpp"
#include "trustweave/oracle.hpp"
#include "trustweave/report.hpp"
#include "trustweave/runner.hpp"

namespace tw = trustweave;

namespace {

// Exit codes: 0 ok, 2 input error, 3 no evidence, 4 trust-terminated,
// 5 failed. "Policy said no" is distinguishable from "system broke".
constexpr int kOk = 0;
constexpr int kInputError = 2;
constexpr int kNoEvidence = 3;
constexpr int kTrustTerminated = 4;
constexpr int kFailed = 5;

std::uint64_t env_seed() {
  if (const char* v = std::getenv("TRUSTWEAVE_SEED")) return std::strtoull(v, nullptr, 10);
  return 0;
}

int outcome_exit_code(const tw::OperationOutcome& out) {
  switch (out.status) {
    case tw::OpStatus::Succeeded: return kOk;
    case tw::OpStatus::TerminatedAtTrustCheck: return kTrustTerminated;
    default: return kFailed;
  }
}

int cmd_query_trust(const std::string& graph_path, const std::string& source,
                    const std::string& sink, const std::string& context_tok,
                    const std::string& strategy_tok, int max_depth) {
  tw::TrustGraph graph = tw::TrustGraph::load_file(graph_path);
  tw::TrustContext ctx = tw::TrustContext::parse(context_tok);
  tw::AggregationStrategy strategy = tw::parse_strategy(strategy_tok);

  tw::TrustStore store(source);
  for (const tw::TrustArc& a : graph.arcs())
    if (a.trustor == source) store.record_arc(a);
  tw::TrustManager manager(&store, strategy, max_depth);
  tw::grant_full_visibility(manager, graph);

  tw::Report report;
  tw::TrustRating rating = manager.evaluate_trust(sink, ctx);
  auto paths = manager.discover_paths({source, sink, ctx, max_depth});
  for (const auto& p : paths) {
    tw::ReportRecord rec("path");
    std::string nodes = source;
    std::string values;
    for (const auto& a : p.arcs) {
      nodes += ">" + a.trustee;
      if (!values.empty()) values += ",";
      values += tw::format_value(a.value);
    }
    rec.field("nodes", nodes).field("arc-values", values);
    rec.field("score", tw::format_value(tw::path_score(p)));
    report.add(rec);
  }
  tw::ReportRecord rec("rating");
  rec.field("trustee", sink)
      .field("context", ctx.token())
      .field("value", tw::format_value(rating.value))
      .field("basis", tw::basis_token(rating.basis))
      .field("paths", static_cast<long long>(paths.size()));
  report.add(rec);
  std::cout << report.text();
  return rating.basis == tw::RatingBasis::None ? kNoEvidence : kOk;
}

int cmd_run_sso(const std::string& scenario_path, std::uint64_t seed,
                bool seed_given) {
  tw::ScenarioFile sc = tw::ScenarioFile::load_file(scenario_path);
  if (seed_given) sc.seed = seed;
  if (sc.operations.size() != 1)
    throw tw::ParseError(0, "run-sso expects exactly one sso operation");
  tw::TrustGraph graph = sc.graph_path.empty()
                             ? tw::TrustGraph()
                             : tw::TrustGraph::load_file(sc.graph_path);
  tw::Network net = tw::build_network(sc, graph);
  tw::Runtime runtime(net);
  const tw::SsoOpDecl& op = sc.operations.front();
  tw::OperationOutcome out = tw::run_sso(runtime, op.user, op.sp, op.user_idp,
                                         op.sp_idp, op.params);
  tw::Report report;
  for (const auto& line : out.transcript) report.add_line("transcript " + line);
  tw::ReportRecord rec("outcome");
  rec.field("status", tw::status_token(out.status));
  if (out.terminated_at)
    rec.field("relationship", tw::relationship_token(*out.terminated_at));
  if (out.fail_reason)
    rec.field("reason", tw::fail_reason_token(*out.fail_reason));
  report.add(rec);
  std::cout << report.text();
  return outcome_exit_code(out);
}

int cmd_run_scenario(const std::string& scenario_path, std::uint64_t seed,
                     bool seed_given) {
  tw::ScenarioFile sc = tw::ScenarioFile::load_file(scenario_path);
  if (seed_given) sc.seed = seed;
  tw::TrustGraph graph = sc.graph_path.empty()
                             ? tw::TrustGraph()
                             : tw::TrustGraph::load_file(sc.graph_path);
  tw::Network net = tw::build_network(sc, graph);
  tw::Runtime runtime(net);
  tw::ScenarioResult result = tw::run_scenario(runtime, sc);
  std::cout << result.report.text();
  return result.any_nontrust_failure ? kFailed : kOk;
}

int cmd_export_dot(const std::string& graph_path, const std::string& source,
                   const std::string& context_tok, const std::string& out_path) {
  tw::TrustGraph graph = tw::TrustGraph::load_file(graph_path);
  std::string dot;
  if (!source.empty()) {
    if (context_tok.empty())
      throw tw::ParseError(0, "--source requires --context");
    dot = tw::export_dot_reachable(graph, source,
                                   tw::TrustContext::parse(context_tok));
  } else {
    dot = tw::export_dot(graph);
  }
  if (out_path.empty()) {
    std::cout << dot;
  } else {
    std::ofstream f(out_path);
    if (!f) throw std::runtime_error("cannot write " + out_path);
    f << dot;
  }
  return kOk;
}

int cmd_federations(const std::string& scenario_path,
                    const std::string& context_tok, double threshold,
                    std::uint64_t seed, bool seed_given) {
  tw::ScenarioFile sc = tw::ScenarioFile::load_file(scenario_path);
  if (seed_given) sc.seed = seed;
  tw::TrustGraph graph = sc.graph_path.empty()
                             ? tw::TrustGraph()
                             : tw::TrustGraph::load_file(sc.graph_path);
  tw::Network net = tw::build_network(sc, graph);
  tw::Runtime runtime(net);
  tw::TrustContext ctx = tw::TrustContext::parse(context_tok);
  tw::FederationPolicy policy{ctx, tw::TrustValue(threshold), 1};

  std::vector<tw::EntityId> peers;
  for (const auto& [id, e] : net.entities()) peers.push_back(id);

  tw::Report report;
  for (const auto& [id, entity] : net.entities()) {
    for (const auto& peer : peers)
      if (peer != id)
        runtime.gather_referrals(id, peer, ctx, entity->manager().max_depth());
    tw::FederationList list =
        tw::refresh_federations(entity->manager(), policy, peers, net.now());
    tw::ReportRecord rec("federation");
    rec.field("owner", id).field("context", ctx.token());
    rec.field("threshold", tw::format_value(policy.threshold));
    std::string members;
    for (const auto& m : list.members) {
      if (!members.empty()) members += ",";
      members += m.peer;
    }
    rec.field("members", members.empty() ? "-" : members);
    report.add(rec);
  }
  std::cout << report.text();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual trust network and identity operation simulator"};
  app.require_subcommand(1);

  std::string graph_path, scenario_path, source, sink, context_tok, out_path;
  std::string strategy_tok = "max";
  int max_depth = 4;
  double threshold = 0.5;
  std::uint64_t seed = env_seed();
  bool seed_given = std::getenv("TRUSTWEAVE_SEED") != nullptr;

  auto* query = app.add_subcommand("query-trust", "Evaluate a trust rating");
  query->add_option("--graph", graph_path)->required();
  query->add_option("--context", context_tok)->required();
  query->add_option("--strategy", strategy_tok);
  query->add_option("--max-depth", max_depth);
  query->add_option("source", source)->required();
  query->add_option("sink", sink)->required();

  auto* sso = app.add_subcommand("run-sso", "Run the scenario's SSO operation");
  sso->add_option("--scenario", scenario_path)->required();
  auto* sso_seed = sso->add_option("--seed", seed);

  auto* scen = app.add_subcommand("run-scenario", "Run all operations and feedback rounds");
  scen->add_option("--scenario", scenario_path)->required();
  auto* scen_seed = scen->add_option("--seed", seed);

  auto* dot = app.add_subcommand("export-dot", "Export the trust graph as DOT");
  dot->add_option("--graph", graph_path)->required();
  dot->add_option("--source", source);
  dot->add_option("--context", context_tok);
  dot->add_option("--dot-out", out_path);

  auto* fed = app.add_subcommand("federations", "Print per-entity federation lists");
  fed->add_option("--scenario", scenario_path)->required();
  fed->add_option("--context", context_tok)->required();
  fed->add_option("--threshold", threshold);
  auto* fed_seed = fed->add_option("--seed", seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(query))
      return cmd_query_trust(graph_path, source, sink, context_tok,
                             strategy_tok, max_depth);
    if (app.got_subcommand(sso))
      return cmd_run_sso(scenario_path, seed, seed_given || sso_seed->count() > 0);
    if (app.got_subcommand(scen))
      return cmd_run_scenario(scenario_path, seed,
                              seed_given || scen_seed->count() > 0);
    if (app.got_subcommand(dot))
      return cmd_export_dot(graph_path, source, context_tok, out_path);
    if (app.got_subcommand(fed))
      return cmd_federations(scenario_path, context_tok, threshold, seed,
                             seed_given || fed_seed->count() > 0);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
