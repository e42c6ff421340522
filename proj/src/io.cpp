#include "mmspace/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "mmspace/error.hpp"

namespace mmspace::io {

namespace {

[[noreturn]] void parse_error(const std::string& what) { throw Error(Errc::Parse, what); }

const json& field(const json& obj, const char* name) {
  if (!obj.is_object() || !obj.contains(name)) parse_error(std::string("missing field '") + name + "'");
  return obj.at(name);
}

std::string kind_of(const json& value) {
  if (!value.is_object() || !value.contains("kind") || !value.at("kind").is_string())
    parse_error("expected an object with a string 'kind'");
  return value.at("kind").get<std::string>();
}

// Rethrows library-independent JSON type errors as Parse errors.
template <typename F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    parse_error(e.what());
  }
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.size(); ++i) rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
  return rows;
}

Matrix matrix_from_json(const json& rows) {
  return matrix_from_rows(rows.get<std::vector<std::vector<double>>>());
}

DistributionMatrix laws_from_json(const json& rows) {
  const std::size_t n = rows.size();
  DistributionMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows.at(i).size() != n) throw Error(Errc::DimensionMismatch, "ragged distribution matrix", {i});
    for (std::size_t j = 0; j < n; ++j) m(i, j) = distribution_from_json(rows.at(i).at(j));
  }
  return m;
}

json laws_json(const DistributionMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.size(); ++j) row.push_back(to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string mode_name(MomentMode mode) {
  switch (mode) {
    case MomentMode::Auto: return "auto";
    case MomentMode::Exact: return "exact";
    case MomentMode::MonteCarlo: return "mc";
  }
  return "auto";
}

}  // namespace

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) parse_error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    parse_error("'" + path + "': " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) parse_error("cannot write '" + path + "'");
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
  if (!out) parse_error("cannot write '" + path + "'");
}

std::string dump(const json& value) { return value.dump(2); }

json to_json(const FiniteMMSpace& space) {
  json j;
  j["kind"] = "mm";
  j["weights"] = std::vector<double>(space.weights().begin(), space.weights().end());
  j["dist"] = matrix_json(space.dist());
  return j;
}

json to_json(const QMMSpace& space) {
  json j;
  j["kind"] = "qmm";
  j["weights"] = std::vector<double>(space.weights().begin(), space.weights().end());
  j["dstar"] = laws_json(space.dstar());
  return j;
}

AnySpace space_from_json(const json& value) {
  return guarded([&]() -> AnySpace {
    const std::string kind = kind_of(value);
    if (kind == "mm")
      return FiniteMMSpace::create(field(value, "weights").get<std::vector<double>>(),
                                   matrix_from_json(field(value, "dist")));
    if (kind == "qmm")
      return QMMSpace::create(field(value, "weights").get<std::vector<double>>(), laws_from_json(field(value, "dstar")));
    if (kind == "graph") {
      const auto n = field(value, "n").get<std::size_t>();
      std::vector<std::pair<std::size_t, std::size_t>> edges;
      for (const auto& e : field(value, "edges")) {
        if (e.size() != 2) parse_error("edges must be [i, j] pairs");
        edges.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
      }
      return from_edges(n, edges);
    }
    parse_error("unknown space kind '" + kind + "'");
  });
}

AnySpace load_space(const std::string& path) { return space_from_json(read_json(path)); }

FiniteMMSpace load_mm_space(const std::string& path) {
  auto space = load_space(path);
  if (auto* mm = std::get_if<FiniteMMSpace>(&space)) return std::move(*mm);
  throw Error(Errc::InvalidArgument, "'" + path + "' holds a qmm-space; an mm-space is required");
}

json to_json(const DiscreteDistribution& mu) {
  json atoms = json::array();
  for (const Atom& a : mu.atoms()) atoms.push_back({a.value, a.weight});
  return atoms;
}

DiscreteDistribution distribution_from_json(const json& value) {
  return guarded([&] {
    if (value.is_number()) return DiscreteDistribution::point_mass(value.get<double>());
    std::vector<Atom> atoms;
    for (const auto& a : value) {
      if (a.size() != 2) parse_error("distribution atoms must be [value, weight] pairs");
      atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
    }
    return DiscreteDistribution::from_atoms(std::move(atoms));
  });
}

json to_json(const Target& target) {
  if (target.is_interval()) return "interval";
  json j;
  j["kind"] = "finite";
  j["dist"] = matrix_json(target.dist());
  return j;
}

Target target_from_json(const json& value) {
  return guarded([&] {
    if (value.is_string()) {
      if (value.get<std::string>() == "interval") return Target::interval();
      parse_error("unknown target '" + value.get<std::string>() + "'");
    }
    const std::string kind = kind_of(value);
    if (kind == "finite" || kind == "mm") return Target::finite(matrix_from_json(field(value, "dist")));
    parse_error("unknown target kind '" + kind + "'");
  });
}

json to_json(const PushforwardMeasure& measure) {
  json j;
  j["kind"] = "measure";
  j["carrier"] = to_json(measure.carrier());
  if (measure.is_interval())
    j["atoms"] = to_json(measure.interval_measure());
  else
    j["weights"] = std::vector<double>(measure.point_weights().begin(), measure.point_weights().end());
  return j;
}

PushforwardMeasure measure_from_json(const json& value) {
  return guarded([&] {
    if (kind_of(value) != "measure") parse_error("expected kind 'measure'");
    Target carrier = target_from_json(field(value, "carrier"));
    if (carrier.is_interval()) return PushforwardMeasure::on_interval(distribution_from_json(field(value, "atoms")));
    return PushforwardMeasure::on_finite(std::move(carrier), field(value, "weights").get<std::vector<double>>());
  });
}

json to_json(const GridKernel& kernel) {
  json j;
  j["kind"] = "grid";
  j["weights"] = std::vector<double>(kernel.weights().begin(), kernel.weights().end());
  j["cells"] = kernel.has_laws() ? laws_json(kernel.law_cells()) : matrix_json(kernel.value_cells());
  return j;
}

GridKernel grid_from_json(const json& value) {
  return guarded([&] {
    const std::string kind = kind_of(value);
    if (kind != "grid") {
      auto space = space_from_json(value);
      return std::visit([](const auto& s) { return GridKernel::of(s); }, space);
    }
    auto weights = field(value, "weights").get<std::vector<double>>();
    const json& cells = field(value, "cells");
    const bool laws = !cells.empty() && !cells.at(0).empty() && cells.at(0).at(0).is_array();
    if (laws) return GridKernel::laws(std::move(weights), laws_from_json(cells));
    return GridKernel::values(std::move(weights), matrix_from_json(cells));
  });
}

json to_json(const LipschitzWitness& witness) {
  json j;
  j["target"] = to_json(witness.target);
  if (witness.target.is_interval())
    j["values"] = witness.values;
  else
    j["labels"] = witness.labels;
  j["slack"] = number_or_null(witness.slack);
  return j;
}

json to_json(const ObsDiamResult& result, double kappa) {
  json j;
  j["kind"] = "obs_diam";
  j["kappa"] = kappa;
  j["lower_bound"] = result.lower_bound;
  j["approximate"] = result.approximate;
  j["witness"] = to_json(result.witness);
  return j;
}

json to_json(const SeparationResult& result, const std::vector<double>& kappas) {
  json j;
  j["kind"] = "separation";
  j["kappas"] = kappas;
  j["delta"] = result.delta;
  j["mode"] = result.mode == SearchMode::Exact ? "exact" : "heuristic";
  json w;
  w["assignment"] = result.witness.assignment;
  w["masses"] = result.witness.masses;
  w["min_cross_distance"] = result.witness.min_cross_distance;
  j["witness"] = std::move(w);
  return j;
}

json to_json(const PartialDiameter& result, double kappa) {
  json j;
  j["kind"] = "partial_diameter";
  j["kappa"] = kappa;
  j["value"] = result.value;
  j["approximate"] = result.approximate;
  return j;
}

json to_json(const SampleMatrix& sample) {
  json j;
  j["kind"] = "sample";
  j["points"] = sample.points;
  j["entries"] = matrix_json(sample.entries);
  return j;
}

json to_json(const MomentSignature& signature) {
  const auto& o = signature.options();
  json j;
  j["kind"] = "moment_signature";
  j["r_max"] = o.r_max;
  j["k_max"] = o.k_max;
  j["samples"] = o.samples;
  j["seed"] = o.seed;
  j["mode"] = mode_name(o.mode);
  j["exact_limit"] = o.exact_limit;
  json entries = json::array();
  for (const auto& e : signature.entries()) {
    json x;
    x["key"] = e.key;
    x["order"] = e.order;
    x["powers"] = e.powers;
    x["estimate"] = e.estimate;
    x["standard_error"] = e.standard_error;
    x["samples"] = e.samples;
    x["mode"] = e.exact ? "exact" : "mc";
    entries.push_back(std::move(x));
  }
  j["entries"] = std::move(entries);
  return j;
}

json to_json(const Box1Result& result) {
  json j;
  j["kind"] = "box1";
  j["value"] = result.value;
  j["lo"] = result.lo;
  j["hi"] = result.hi;
  j["exact"] = result.exact;
  j["threshold"] = result.threshold;
  j["cover"] = result.cover;
  j["cover_weight"] = result.cover_weight;
  j["bad_pair_mass"] = result.bad_pair_mass;
  return j;
}

json to_json(const AlignResult& result) {
  json j;
  j["kind"] = "underline_box1";
  j["upper_bound"] = result.upper_bound;
  j["exact"] = result.exact;
  j["permutation"] = result.permutation;
  json cells = json::array();
  for (const auto& c : result.cells) cells.push_back({{"x", c.x}, {"y", c.y}, {"weight", c.weight}});
  j["refinement"] = std::move(cells);
  j["box1"] = to_json(result.box1);
  return j;
}

json to_json(const ConvergenceReport& report) {
  const auto& o = report.options;
  json j;
  j["kind"] = "convergence_report";
  j["note"] = "Cauchy behaviour of finitely many moments; a finite proxy for convergence in sampling";
  j["options"] = {{"r_max", o.r_max},   {"k_max", o.k_max}, {"samples", o.samples},
                  {"tol", o.tol},       {"seed", o.seed},   {"mode", mode_name(o.mode)},
                  {"exact_limit", o.exact_limit}};
  j["labels"] = report.labels;
  j["converged"] = report.converged;
  json moments = json::array();
  for (const auto& m : report.moments) {
    json x;
    x["key"] = m.key;
    x["converged"] = m.converged;
    x["last_gap"] = m.last_gap;
    x["allowance"] = m.allowance;
    json points = json::array();
    for (const auto& p : m.points)
      points.push_back({{"index", p.index},
                        {"estimate", p.estimate},
                        {"standard_error", p.standard_error},
                        {"samples", p.samples},
                        {"exact", p.exact}});
    x["points"] = std::move(points);
    moments.push_back(std::move(x));
  }
  j["moments"] = std::move(moments);
  return j;
}

json to_json(const LimitComparison& comparison) {
  json j;
  j["kind"] = "limit_comparison";
  j["same_limit"] = comparison.same_limit;
  json gaps = json::array();
  for (const auto& g : comparison.gaps)
    gaps.push_back({{"key", g.key}, {"a", g.a}, {"b", g.b}, {"gap", g.gap}, {"allowance", g.allowance},
                    {"within", g.within}});
  j["gaps"] = std::move(gaps);
  j["a"] = to_json(comparison.a);
  j["b"] = to_json(comparison.b);
  return j;
}

std::string csv_field(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string to_csv(const ConvergenceReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "moment,index,label,estimate,standard_error,samples,exact\r\n";
  for (const auto& m : report.moments)
    for (std::size_t s = 0; s < m.points.size(); ++s) {
      const auto& p = m.points[s];
      out << csv_field(m.key) << ',' << p.index << ',' << csv_field(report.labels[s]) << ',' << p.estimate << ','
          << p.standard_error << ',' << p.samples << ',' << (p.exact ? "true" : "false") << "\r\n";
    }
  return out.str();
}

}  // namespace mmspace::io
