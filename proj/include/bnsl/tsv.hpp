#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "bnsl/eval.hpp"
#include "bnsl/mdl.hpp"
#include "bnsl/network.hpp"
#include "bnsl/search.hpp"

namespace bnsl {

// Tab-separated report writers. All numbers use fixed formats so identical
// inputs produce byte-identical files.

namespace detail {

inline std::string fmt_bits(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// Short labels for the mixed-experiment matrix.
inline const char* mode_label(CptKind mode) {
  switch (mode) {
    case CptKind::Table: return "tab";
    case CptKind::Default: return "def";
    case CptKind::Tree: return "tree";
  }
  return "?";
}

}  // namespace detail

// Per-family score breakdown, then the graph term and the network total.
inline void write_score_tsv(std::ostream& os, const BayesianNetwork& net,
                            const NetworkScore& score) {
  os << "node\trepresentation\tdlStructure\tdlParams\tdlData\ttotal\n";
  for (int v = 0; v < net.vars.size(); ++v) {
    const FamilyScore& f = score.families[v];
    os << net.vars.name(v) << '\t' << cpt_kind_name(cpt_kind(net.locals[v]))
       << '\t' << detail::fmt_bits(f.structure_bits) << '\t'
       << detail::fmt_bits(f.param_bits) << '\t'
       << detail::fmt_bits(f.data_bits) << '\t'
       << detail::fmt_bits(f.total_bits) << '\n';
  }
  os << "_graph\t-\t" << detail::fmt_bits(score.graph_bits) << "\t0.000000\t"
     << "0.000000\t" << detail::fmt_bits(score.graph_bits) << '\n';
  os << "_network\t-\t-\t-\t-\t" << detail::fmt_bits(score.total_bits)
     << '\n';
}

// Accepted moves of one search run, starting from the empty-graph row.
inline void write_trace_tsv(std::ostream& os, const SearchResult& result,
                            const VariableTable& vars) {
  os << "iteration\tmove\tdelta_bits\ttotal_bits\n";
  os << "0\tinit\t0.000000\t" << detail::fmt_bits(result.initial_bits)
     << '\n';
  for (const TraceEntry& t : result.trace)
    os << t.iteration << '\t' << move_to_string(t.move, vars) << '\t'
       << detail::fmt_bits(t.delta_bits) << '\t'
       << detail::fmt_bits(t.total_bits) << '\n';
}

// One learning-curve evaluation per line. Wall-clock time varies between
// runs, so it is emitted only on request.
inline void write_records_tsv(std::ostream& os,
                              const std::vector<EvalRecord>& records,
                              bool with_timings = false) {
  os << "size\tmode\trep\tseed\tkl\tkl_stderr\tkl_method\tscaled_error"
     << "\tactual_params\ttabular_complexity";
  if (with_timings) os << "\twall_seconds";
  os << '\n';
  for (const EvalRecord& r : records) {
    os << r.size << '\t' << cpt_kind_name(r.mode) << '\t' << r.rep << '\t'
       << r.seed << '\t' << detail::fmt_g(r.kl) << '\t'
       << detail::fmt_g(r.kl_stderr) << '\t'
       << (r.monte_carlo ? "mc" : "exact") << '\t'
       << detail::fmt_g(r.scaled_error) << '\t' << r.actual_params << '\t'
       << r.tabular_complexity;
    if (with_timings) os << '\t' << detail::fmt_g(r.wall_seconds);
    os << '\n';
  }
}

inline void write_aggregate_tsv(std::ostream& os,
                                const std::vector<CurveAggregate>& aggs) {
  os << "size\tmode\tcount\tscaled_median\tscaled_q1\tscaled_q3\tscaled_mean"
     << "\tkl_median\tkl_mean\tparams_median\tcomplexity_median\n";
  for (const CurveAggregate& a : aggs)
    os << a.size << '\t' << cpt_kind_name(a.mode) << '\t' << a.count << '\t'
       << detail::fmt_g(a.scaled_median) << '\t' << detail::fmt_g(a.scaled_q1)
       << '\t' << detail::fmt_g(a.scaled_q3) << '\t'
       << detail::fmt_g(a.scaled_mean) << '\t' << detail::fmt_g(a.kl_median)
       << '\t' << detail::fmt_g(a.kl_mean) << '\t'
       << detail::fmt_g(a.params_median) << '\t'
       << detail::fmt_g(a.complexity_median) << '\n';
}

// Mean-KL matrix: structure mode by row, parameter mode by column.
inline void write_mixed_tsv(std::ostream& os, const MixedResult& result) {
  os << "structure_mode";
  for (CptKind c : result.modes)
    os << "\tparam_" << detail::mode_label(c);
  os << '\n';
  for (std::size_t r = 0; r < result.modes.size(); ++r) {
    os << detail::mode_label(result.modes[r]);
    for (std::size_t c = 0; c < result.modes.size(); ++c)
      os << '\t' << detail::fmt_g(result.mean_kl[r][c]);
    os << '\n';
  }
}

inline void write_mixed_records_tsv(std::ostream& os,
                                    const MixedResult& result) {
  os << "rep\tstructure_mode\tparam_mode\tseed\tkl\tkl_stderr\tkl_method"
     << "\tscaled_error\tactual_params\ttabular_complexity\n";
  for (const MixedRecord& r : result.records)
    os << r.rep << '\t' << cpt_kind_name(r.structure_mode) << '\t'
       << cpt_kind_name(r.param_mode) << '\t' << r.seed << '\t'
       << detail::fmt_g(r.kl) << '\t' << detail::fmt_g(r.kl_stderr) << '\t'
       << (r.monte_carlo ? "mc" : "exact") << '\t'
       << detail::fmt_g(r.scaled_error) << '\t' << r.actual_params << '\t'
       << r.tabular_complexity << '\n';
}

}  // namespace bnsl
