#include "mmspace/convergence.hpp"

#include <cmath>
#include <random>

#include "mmspace/error.hpp"
#include "mmspace/io.hpp"

namespace mmspace {

std::string family_name(Family family) {
  switch (family) {
    case Family::CompleteGraphs: return "complete_graphs";
    case Family::Spheres: return "spheres";
    case Family::RandomGraphs: return "random_graphs";
    case Family::UserFiles: return "user_files";
  }
  return "unknown";
}

Family parse_family(const std::string& name) {
  if (name == "complete_graphs" || name == "complete") return Family::CompleteGraphs;
  if (name == "spheres" || name == "sphere") return Family::Spheres;
  if (name == "random_graphs" || name == "random-graph" || name == "random_graph") return Family::RandomGraphs;
  if (name == "user_files" || name == "files") return Family::UserFiles;
  throw Error(Errc::UnknownFamily, "unknown family '" + name + "'");
}

void validate(const SequenceSpec& spec) {
  for (std::size_t i = 1; i < spec.indices.size(); ++i)
    if (spec.indices[i] <= spec.indices[i - 1])
      throw Error(Errc::InvalidArgument, "indices must be strictly increasing", {i});
  if (spec.family == Family::RandomGraphs && !(spec.p > 0.0 && spec.p <= 1.0))
    throw Error(Errc::InvalidArgument, "edge probability must lie in (0,1]");
}

FiniteMMSpace generate(const SequenceSpec& spec, std::size_t index) {
  validate(spec);
  switch (spec.family) {
    case Family::CompleteGraphs: {
      std::vector<std::vector<bool>> adj(index, std::vector<bool>(index, true));
      for (std::size_t i = 0; i < index; ++i) adj[i][i] = false;
      return from_graph(adj);
    }
    case Family::Spheres:
      return sphere_empirical(index, spec.sphere_count, derive_seed(spec.seed, index));
    case Family::RandomGraphs: {
      Rng rng(derive_seed(spec.seed, index));
      std::bernoulli_distribution edge(spec.p);
      std::vector<std::vector<bool>> adj(index, std::vector<bool>(index, false));
      for (std::size_t i = 0; i < index; ++i)
        for (std::size_t j = i + 1; j < index; ++j) adj[i][j] = adj[j][i] = edge(rng);
      return from_graph(adj);
    }
    case Family::UserFiles:
      if (index >= spec.files.size())
        throw Error(Errc::InvalidArgument, "no file at position " + std::to_string(index), {index});
      return io::load_mm_space(spec.files[index]);
  }
  throw Error(Errc::UnknownFamily, "unknown family");
}

namespace {

SignatureOptions signature_options(const ConvergenceOptions& options, std::size_t position) {
  SignatureOptions s;
  s.r_max = options.r_max;
  s.k_max = options.k_max;
  s.samples = options.samples;
  s.seed = derive_seed(options.seed, position);
  s.mode = options.mode;
  s.exact_limit = options.exact_limit;
  return s;
}

ConvergenceReport build_report(const std::vector<MomentSignature>& signatures, std::vector<std::size_t> indices,
                               std::vector<std::string> labels, const ConvergenceOptions& options) {
  ConvergenceReport report;
  report.labels = std::move(labels);
  report.options = options;
  report.converged = true;
  const auto& first = signatures.front().entries();
  for (std::size_t e = 0; e < first.size(); ++e) {
    MomentTrajectory m;
    m.key = first[e].key;
    for (std::size_t s = 0; s < signatures.size(); ++s) {
      const auto& entry = signatures[s].entries()[e];
      m.points.push_back({indices[s], entry.estimate, entry.standard_error, entry.samples, entry.exact});
    }
    const auto& last = m.points[m.points.size() - 1];
    const auto& prev = m.points[m.points.size() - 2];
    m.last_gap = std::abs(last.estimate - prev.estimate);
    m.allowance = options.tol + std::hypot(last.standard_error, prev.standard_error);
    m.converged = m.last_gap < m.allowance;
    report.converged = report.converged && m.converged;
    report.moments.push_back(std::move(m));
  }
  return report;
}

ConvergenceReport run_sequence(const SequenceSpec& spec, const ConvergenceOptions& options, std::size_t min_indices) {
  validate(spec);
  if (spec.indices.size() < min_indices)
    throw Error(Errc::InvalidArgument, "need at least " + std::to_string(min_indices) + " indices");
  std::vector<MomentSignature> signatures;
  std::vector<std::string> labels;
  for (std::size_t s = 0; s < spec.indices.size(); ++s) {
    signatures.push_back(moment_signature(generate(spec, spec.indices[s]), signature_options(options, s)));
    labels.push_back(family_name(spec.family) + ":" + std::to_string(spec.indices[s]));
  }
  return build_report(signatures, spec.indices, std::move(labels), options);
}

}  // namespace

ConvergenceReport converge_test(const SequenceSpec& spec, const ConvergenceOptions& options) {
  return run_sequence(spec, options, 3);
}

ConvergenceReport converge_test(const std::vector<FiniteMMSpace>& spaces, const ConvergenceOptions& options) {
  if (spaces.size() < 2) throw Error(Errc::InvalidArgument, "need at least two spaces");
  std::vector<MomentSignature> signatures;
  std::vector<std::size_t> indices;
  std::vector<std::string> labels;
  for (std::size_t s = 0; s < spaces.size(); ++s) {
    signatures.push_back(moment_signature(spaces[s], signature_options(options, s)));
    indices.push_back(s);
    labels.push_back(std::to_string(s));
  }
  return build_report(signatures, std::move(indices), std::move(labels), options);
}

LimitComparison compare_limits(const SequenceSpec& a, const SequenceSpec& b, const ConvergenceOptions& options) {
  LimitComparison c;
  c.a = run_sequence(a, options, 2);
  if (!c.a.converged) throw Error(Errc::NotConverged, "sequence a has not converged");
  c.b = run_sequence(b, options, 2);
  if (!c.b.converged) throw Error(Errc::NotConverged, "sequence b has not converged");
  c.same_limit = true;
  for (std::size_t e = 0; e < c.a.moments.size(); ++e) {
    const auto& pa = c.a.moments[e].points.back();
    const auto& pb = c.b.moments[e].points.back();
    MomentGap g;
    g.key = c.a.moments[e].key;
    g.a = pa.estimate;
    g.b = pb.estimate;
    g.gap = std::abs(pa.estimate - pb.estimate);
    g.allowance = options.tol + std::hypot(pa.standard_error, pb.standard_error);
    g.within = g.gap <= g.allowance;
    c.same_limit = c.same_limit && g.within;
    c.gaps.push_back(std::move(g));
  }
  return c;
}

}  // namespace mmspace
