// Command-line front end: sample / learn / score / curve / mixed.
// Thin wiring around the library; every report starts with `# key=value`
// lines echoing the effective configuration so outputs are self-describing,
// and identical invocations produce byte-identical files.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "bnsl/bnsl.hpp"

namespace {

using namespace bnsl;

using Echo = std::vector<std::pair<std::string, std::string>>;

std::string error_kind(const Error& e) {
  if (dynamic_cast<const UnknownValueError*>(&e)) return "UnknownValue";
  if (dynamic_cast<const ParseError*>(&e)) return "Parse";
  if (dynamic_cast<const SchemaMismatchError*>(&e)) return "SchemaMismatch";
  if (dynamic_cast<const MalformedRowError*>(&e)) return "MalformedRow";
  if (dynamic_cast<const EmptyDatasetError*>(&e)) return "EmptyDataset";
  if (dynamic_cast<const CyclicGraphError*>(&e)) return "CyclicGraph";
  if (dynamic_cast<const KOutOfRangeError*>(&e)) return "KOutOfRange";
  if (dynamic_cast<const StateSpaceTooLargeError*>(&e))
    return "StateSpaceTooLarge";
  if (dynamic_cast<const InfiniteSampleError*>(&e)) return "InfiniteSample";
  if (dynamic_cast<const ValidationError*>(&e)) return "Validation";
  return "Error";
}

CptKind parse_mode(const std::string& name) {
  if (name == "table" || name == "tab") return CptKind::Table;
  if (name == "default" || name == "def") return CptKind::Default;
  if (name == "tree") return CptKind::Tree;
  throw ValidationError("unknown representation '" + name +
                        "' (expected table, default, or tree)");
}

std::vector<CptKind> parse_modes(const std::vector<std::string>& names) {
  std::vector<CptKind> modes;
  for (const std::string& n : names) modes.push_back(parse_mode(n));
  if (modes.empty()) throw ValidationError("at least one mode is required");
  return modes;
}

ScoreKind parse_score(const std::string& name) {
  if (name == "mdl") return ScoreKind::Mdl;
  if (name == "bde") return ScoreKind::Bde;
  throw ValidationError("unknown score '" + name + "' (expected mdl or bde)");
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  return out;
}

void write_echo(std::ostream& os, const Echo& echo) {
  for (const auto& [key, value] : echo) os << "# " << key << '=' << value
                                           << '\n';
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ParseError("cannot open " + path + " for writing");
  return os;
}

// Shared numeric formatting with the report writers.
std::string fmt_bits(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// ---------------------------------------------------------------- sample --

struct SampleArgs {
  std::string network;
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_sample(const SampleArgs& a) {
  const BayesianNetwork net = load_network(a.network);
  const Dataset ds = ancestral_sample(net, a.n, a.seed);
  save_csv(ds, a.out);
  const Echo echo = {{"command", "sample"},
                     {"network", a.network},
                     {"n", std::to_string(a.n)},
                     {"seed", std::to_string(a.seed)},
                     {"out", a.out}};
  write_echo(std::cout, echo);
  std::cout << "rows\t" << ds.num_rows << '\n';
  std::cout << "variable\tcardinality\n";
  for (int v = 0; v < net.vars.size(); ++v)
    std::cout << net.vars.name(v) << '\t' << net.vars.cardinality(v) << '\n';
  return 0;
}

// ----------------------------------------------------------------- learn --

struct LearnArgs {
  std::string csv;
  std::string schema;
  std::string mode = "table";
  std::string score = "mdl";
  double ess = 1.0;
  std::string prior;
  int max_parents = 0;
  std::string out_network;
  std::string out_trace;
};

SearchConfig make_search_config(const std::string& mode,
                                const std::string& score, double ess,
                                const BayesianNetwork* prior,
                                int max_parents) {
  SearchConfig cfg;
  cfg.mode = parse_mode(mode);
  cfg.score = parse_score(score);
  cfg.equivalent_sample_size = ess;
  cfg.prior_network = prior;
  cfg.max_parents = max_parents;
  return cfg;
}

int cmd_learn(const LearnArgs& a) {
  const VariableTable vars = load_schema(a.schema);
  const Dataset ds = load_csv(a.csv, vars);
  BayesianNetwork prior_net;
  const BayesianNetwork* prior = nullptr;
  if (!a.prior.empty()) {
    prior_net = load_network(a.prior);
    prior = &prior_net;
  }
  const SearchConfig cfg =
      make_search_config(a.mode, a.score, a.ess, prior, a.max_parents);
  const SearchResult res = hill_climb(ds, cfg);
  save_network(res.network, a.out_network);

  Echo echo = {{"command", "learn"},
               {"csv", a.csv},
               {"schema", a.schema},
               {"mode", a.mode},
               {"score", a.score}};
  if (cfg.score == ScoreKind::Bde) {
    echo.emplace_back("ess", fmt_bits(a.ess));
    echo.emplace_back("prior", a.prior.empty() ? "uninformative" : a.prior);
  }
  echo.emplace_back("max_parents", std::to_string(a.max_parents));
  echo.emplace_back("out_network", a.out_network);

  if (!a.out_trace.empty()) {
    std::ofstream os = open_out(a.out_trace);
    Echo trace_echo = echo;
    trace_echo.emplace_back("out_trace", a.out_trace);
    write_echo(os, trace_echo);
    write_trace_tsv(os, res, vars);
  }

  write_echo(std::cout, echo);
  std::cout << "total_bits\t" << fmt_bits(res.score.total_bits) << '\n'
            << "objective_bits\t" << fmt_bits(res.objective_bits) << '\n'
            << "actual_params\t" << actual_param_count(res.network) << '\n'
            << "tabular_complexity\t"
            << tabular_complexity(res.network.dag, res.network.vars) << '\n'
            << "edges\t" << res.network.dag.edge_count() << '\n'
            << "moves\t" << res.trace.size() << '\n';
  return 0;
}

// ----------------------------------------------------------------- score --

struct ScoreArgs {
  std::string csv;
  std::string network;
  std::string score = "mdl";
  double ess = 1.0;
  std::string prior;
};

int cmd_score(const ScoreArgs& a) {
  const BayesianNetwork net = load_network(a.network);
  const Dataset ds = load_csv(a.csv, net.vars);

  Echo echo = {{"command", "score"},
               {"csv", a.csv},
               {"network", a.network},
               {"score", a.score}};

  if (parse_score(a.score) == ScoreKind::Mdl) {
    const NetworkScore score = network_score(ds, net);
    write_echo(std::cout, echo);
    write_score_tsv(std::cout, net, score);
    return 0;
  }

  PriorSpec spec;
  if (a.prior.empty()) {
    spec = uninformative_prior(net.vars, a.ess);
  } else {
    spec.network = load_network(a.prior);
    spec.equivalent_sample_size = a.ess;
  }
  echo.emplace_back("ess", fmt_bits(a.ess));
  echo.emplace_back("prior", a.prior.empty() ? "uninformative" : a.prior);
  write_echo(std::cout, echo);

  // Per-family posterior breakdown mirroring the closed-form total:
  // contribution = log marginal of the data minus the structure bits, and
  // the graph prior joins as its own row.
  std::cout << "node\trepresentation\tdlStructure\tlogMarginal"
            << "\tcontribution\n";
  double total = -dl_graph(net.dag);
  for (int v = 0; v < net.vars.size(); ++v) {
    const auto& parents = net.dag.parents(v);
    const auto& ls = net.locals[v];
    double structure = 0.0;
    if (const auto* dt = std::get_if<DefaultTable>(&ls)) {
      structure = dl_default_structure(
                      parent_config_count(net.vars, parents),
                      static_cast<std::int64_t>(dt->rows.size()),
                      net.vars.cardinality(v), ds.num_rows)
                      .structure_bits;
    } else if (const auto* tree = std::get_if<DecisionTree>(&ls)) {
      structure = dl_tree_structure(*tree, static_cast<int>(parents.size()));
    }
    const FamilyCounts counts = family_counts(ds, v, parents, ls);
    const auto priors = family_partition_priors(spec, v, parents, ls);
    const double marginal =
        family_log_marginal(counts, priors, spec.equivalent_sample_size);
    total += marginal - structure;
    std::cout << net.vars.name(v) << '\t' << cpt_kind_name(cpt_kind(ls))
              << '\t' << fmt_bits(structure) << '\t' << fmt_bits(marginal)
              << '\t' << fmt_bits(marginal - structure) << '\n';
  }
  std::cout << "_graph\t-\t" << fmt_bits(dl_graph(net.dag)) << "\t0.000000\t"
            << fmt_bits(-dl_graph(net.dag)) << '\n';
  std::cout << "_network\t-\t-\t-\t" << fmt_bits(total) << '\n';

  // The assembled total must agree with the library's one-call answer.
  const double check = log_posterior_score(ds, net, spec);
  if (std::abs(check - total) > 1e-6)
    throw ValidationError("posterior breakdown does not add up");
  return 0;
}

// ----------------------------------------------------------------- curve --

struct CurveArgs {
  std::string network;
  std::vector<std::int64_t> sizes;
  int reps = 1;
  std::vector<std::string> modes = {"table", "default", "tree"};
  std::uint64_t seed = 0;
  double eps = 1e-4;
  std::int64_t mc_samples = 1'000'000;
  std::uint64_t state_cap = std::uint64_t(1) << 22;
  int max_parents = 0;
  int threads = 1;
  bool timings = false;
  std::string out;
  std::string out_aggregate;
};

Echo curve_echo(const CurveArgs& a, const char* command) {
  Echo echo = {{"command", command},
               {"network", a.network},
               {"reps", std::to_string(a.reps)},
               {"modes", join(a.modes)},
               {"seed", std::to_string(a.seed)},
               {"eps", detail::fmt_g(a.eps)},
               {"mc_samples", std::to_string(a.mc_samples)},
               {"state_cap", std::to_string(a.state_cap)},
               {"max_parents", std::to_string(a.max_parents)}};
  return echo;
}

CurveOptions curve_options(const CurveArgs& a) {
  CurveOptions opts;
  opts.search.max_parents = a.max_parents;
  opts.smoothing_eps = a.eps;
  opts.mc_samples = a.mc_samples;
  opts.exact_state_cap = a.state_cap;
  opts.threads = a.threads;
  return opts;
}

int cmd_curve(const CurveArgs& a) {
  const BayesianNetwork target = load_network(a.network);
  const std::vector<CptKind> modes = parse_modes(a.modes);
  const CurveOptions opts = curve_options(a);

  Echo echo = curve_echo(a, "curve");
  std::string sizes_text;
  for (std::size_t i = 0; i < a.sizes.size(); ++i) {
    if (i) sizes_text += ',';
    sizes_text += std::to_string(a.sizes[i]);
  }
  echo.insert(echo.begin() + 2, {"sizes", sizes_text});
  echo.emplace_back("threads", std::to_string(a.threads));

  std::vector<EvalRecord> records;
  try {
    if (a.threads > 1) {
      records = learning_curve(target, a.sizes, a.reps, modes, a.seed, opts);
    } else {
      // Chunk by (size, mode) so a late failure still leaves the finished
      // cells on disk. Seeds depend only on cell coordinates, so chunking
      // does not change any record.
      for (const std::int64_t size : a.sizes)
        for (const CptKind mode : modes) {
          const auto chunk =
              learning_curve(target, {size}, a.reps, {mode}, a.seed, opts);
          records.insert(records.end(), chunk.begin(), chunk.end());
        }
      // Restore the canonical size -> rep -> mode record order.
      std::vector<EvalRecord> ordered;
      ordered.reserve(records.size());
      for (const std::int64_t size : a.sizes)
        for (int rep = 0; rep < a.reps; ++rep)
          for (const CptKind mode : modes)
            for (const EvalRecord& r : records)
              if (r.size == size && r.rep == rep && r.mode == mode)
                ordered.push_back(r);
      records = std::move(ordered);
    }
  } catch (const Error& e) {
    std::ofstream os = open_out(a.out);
    write_echo(os, echo);
    write_records_tsv(os, records, a.timings);
    os << "FAILED\t" << error_kind(e) << ": " << e.what() << '\n';
    throw;
  }

  {
    std::ofstream os = open_out(a.out);
    write_echo(os, echo);
    write_records_tsv(os, records, a.timings);
  }
  if (!a.out_aggregate.empty()) {
    std::ofstream os = open_out(a.out_aggregate);
    write_echo(os, echo);
    write_aggregate_tsv(os, aggregate_curve(records));
  }
  write_echo(std::cout, echo);
  std::cout << "records\t" << records.size() << '\n';
  return 0;
}

// ----------------------------------------------------------------- mixed --

struct MixedArgs {
  CurveArgs base;  // shares the evaluation knobs
  std::int64_t n = 0;
  std::string records_out;
};

int cmd_mixed(const MixedArgs& a) {
  const BayesianNetwork target = load_network(a.base.network);
  const std::vector<CptKind> modes = parse_modes(a.base.modes);
  const CurveOptions opts = curve_options(a.base);

  Echo echo = curve_echo(a.base, "mixed");
  echo.insert(echo.begin() + 2, {"n", std::to_string(a.n)});

  MixedResult result;
  try {
    result = mixed_experiment(target, a.n, a.base.reps, modes, a.base.seed,
                              opts);
  } catch (const Error& e) {
    std::ofstream os = open_out(a.base.out);
    write_echo(os, echo);
    os << "FAILED\t" << error_kind(e) << ": " << e.what() << '\n';
    throw;
  }

  {
    std::ofstream os = open_out(a.base.out);
    write_echo(os, echo);
    write_mixed_tsv(os, result);
  }
  if (!a.records_out.empty()) {
    std::ofstream os = open_out(a.records_out);
    write_echo(os, echo);
    write_mixed_records_tsv(os, result);
  }
  write_echo(std::cout, echo);
  std::cout << "records\t" << result.records.size() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian-network structure learning over discrete data"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "Read defaults from an INI file (flags take precedence)");

  SampleArgs sample;
  CLI::App* s = app.add_subcommand(
      "sample", "Draw rows from a network into a CSV dataset");
  s->add_option("--network", sample.network, "Network JSON file")
      ->required();
  s->add_option("--n", sample.n, "Number of rows")
      ->required()
      ->check(CLI::NonNegativeNumber);
  s->add_option("--seed", sample.seed, "Sampling seed");
  s->add_option("--out", sample.out, "Output CSV path")->required();

  LearnArgs learn;
  CLI::App* l = app.add_subcommand(
      "learn", "Learn structure and parameters from a CSV dataset");
  l->add_option("--csv", learn.csv, "Training data CSV")->required();
  l->add_option("--schema", learn.schema,
                "Schema JSON (bare variables or a full network file)")
      ->required();
  l->add_option("--mode", learn.mode,
                "Local representation: table, default, or tree")
      ->required();
  l->add_option("--score", learn.score, "Objective: mdl or bde");
  l->add_option("--ess", learn.ess,
                "Equivalent sample size for the bde score");
  l->add_option("--prior", learn.prior,
                "Prior network JSON for the bde score");
  l->add_option("--max-parents", learn.max_parents,
                "Parent cap per node (0 = unlimited)");
  l->add_option("--out-network", learn.out_network,
                "Learned network JSON path")
      ->required();
  l->add_option("--out-trace", learn.out_trace, "Search trace TSV path");

  ScoreArgs score;
  CLI::App* sc = app.add_subcommand(
      "score", "Score an existing network against a dataset");
  sc->add_option("--csv", score.csv, "Data CSV")->required();
  sc->add_option("--network", score.network, "Network JSON file")->required();
  sc->add_option("--score", score.score, "Objective: mdl or bde");
  sc->add_option("--ess", score.ess,
                 "Equivalent sample size for the bde score");
  sc->add_option("--prior", score.prior,
                 "Prior network JSON for the bde score");

  CurveArgs curve;
  CLI::App* c = app.add_subcommand(
      "curve", "Sample/learn/evaluate grid over sizes, reps, and modes");
  c->add_option("--network", curve.network, "Target network JSON")
      ->required();
  c->add_option("--sizes", curve.sizes, "Training-set sizes")
      ->required()
      ->delimiter(',');
  c->add_option("--reps", curve.reps, "Repetitions per size")
      ->check(CLI::PositiveNumber);
  c->add_option("--modes", curve.modes,
                "Representations to compare (default: all three)")
      ->delimiter(',');
  c->add_option("--seed", curve.seed, "Master seed");
  c->add_option("--eps", curve.eps,
                "Evaluation smoothing toward uniform (candidate side only)");
  c->add_option("--mc-samples", curve.mc_samples,
                "Sample count for Monte Carlo divergence");
  c->add_option("--state-cap", curve.state_cap,
                "Largest joint state space evaluated exactly");
  c->add_option("--max-parents", curve.max_parents,
                "Parent cap per node (0 = unlimited)");
  c->add_option("--threads", curve.threads,
                "Worker threads (1 = sequential with partial flushing)")
      ->check(CLI::PositiveNumber);
  c->add_flag("--timings", curve.timings,
              "Include wall-clock seconds in the records");
  c->add_option("--out", curve.out, "Records TSV path")->required();
  c->add_option("--out-aggregate", curve.out_aggregate,
                "Aggregate TSV path (medians and quartiles)");

  MixedArgs mixed;
  CLI::App* m = app.add_subcommand(
      "mixed", "Cross structure modes with parameter modes on frozen graphs");
  m->add_option("--network", mixed.base.network, "Target network JSON")
      ->required();
  m->add_option("--n", mixed.n, "Training-set size")
      ->required()
      ->check(CLI::PositiveNumber);
  m->add_option("--reps", mixed.base.reps, "Repetitions")
      ->check(CLI::PositiveNumber);
  m->add_option("--modes", mixed.base.modes,
                "Representations to cross (default: all three)")
      ->delimiter(',');
  m->add_option("--seed", mixed.base.seed, "Master seed");
  m->add_option("--eps", mixed.base.eps,
                "Evaluation smoothing toward uniform (candidate side only)");
  m->add_option("--mc-samples", mixed.base.mc_samples,
                "Sample count for Monte Carlo divergence");
  m->add_option("--state-cap", mixed.base.state_cap,
                "Largest joint state space evaluated exactly");
  m->add_option("--max-parents", mixed.base.max_parents,
                "Parent cap per node (0 = unlimited)");
  m->add_option("--out", mixed.base.out, "Mean-KL matrix TSV path")
      ->required();
  m->add_option("--records", mixed.records_out, "Per-record TSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << "error: Usage: " << e.what() << '\n';
    return 1;
  }

  try {
    if (s->parsed()) return cmd_sample(sample);
    if (l->parsed()) return cmd_learn(learn);
    if (sc->parsed()) return cmd_score(score);
    if (c->parsed()) return cmd_curve(curve);
    if (m->parsed()) return cmd_mixed(mixed);
  } catch (const Error& e) {
    std::cerr << "error: " << error_kind(e) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
