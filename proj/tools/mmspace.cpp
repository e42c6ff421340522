#include <omp.h>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmspace/convergence.hpp"
#include "mmspace/distances.hpp"
#include "mmspace/error.hpp"
#include "mmspace/invariants.hpp"
#include "mmspace/io.hpp"
#include "mmspace/rng.hpp"
#include "mmspace/sampling.hpp"

namespace {

using namespace mmspace;
using io::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitBudget = 4;
constexpr int kExitInternal = 5;

struct Output {
  std::string path;  // "-" for stdout
  std::string content;
};

struct Run {
  std::string command;
  std::uint64_t seed = kDefaultSeed;
  std::vector<std::string> inputs;
  std::vector<Output> outputs;
};

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Parse, "cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string with_newline(std::string text) {
  if (text.empty() || text.back() != '\n') text += '\n';
  return text;
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::InfeasibleKappas:
    case Errc::NotConverged:
      return kExitInfeasible;
    case Errc::ExactBudgetExceeded:
    case Errc::CliqueSearchBudgetExceeded:
    case Errc::CoverBudgetExceeded:
    case Errc::RefinementTooLarge:
    case Errc::TooLarge:
      return kExitBudget;
    default:
      return kExitUsage;
  }
}

void report_error(const std::string& code, const std::string& message, int exit_code,
                  const std::vector<std::size_t>& indices = {}) {
  json e;
  e["error"] = code;
  e["message"] = message;
  e["indices"] = indices;
  e["exit_code"] = exit_code;
  std::cerr << e.dump() << '\n';
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------

struct Globals {
  std::uint64_t seed = kDefaultSeed;
  int workers = 0;
  std::string out;
};

void emit(Run& run, const std::string& path, const json& value) {
  run.outputs.push_back({path.empty() ? "-" : path, with_newline(io::dump(value))});
}

io::AnySpace load_space(Run& run, const std::string& path) {
  run.inputs.push_back(path);
  return io::load_space(path);
}

int execute(std::vector<std::string> args, Run& run, bool capture_help = false) {
  CLI::App app{"Metric measure spaces: sampling, invariants, distances and convergence."};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed (default " + std::to_string(kDefaultSeed) + ")");
  app.add_option("--workers", g.workers, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);

  // generate
  auto* gen = app.add_subcommand("generate", "Write a generated space as JSON");
  std::string family;
  std::size_t gen_n = 0, gen_dim = 0, gen_count = 400;
  double gen_p = 0.5;
  gen->add_option("--family", family, "complete | sphere | random-graph")->required();
  gen->add_option("--n", gen_n, "Number of vertices");
  gen->add_option("--dim", gen_dim, "Sphere dimension");
  gen->add_option("--count", gen_count, "Sphere points");
  gen->add_option("--p", gen_p, "Edge probability");
  gen->add_option("--out", g.out, "Output file (stdout when omitted)");

  // invariant
  auto* inv = app.add_subcommand("invariant", "Separation, observable diameter or partial diameter");
  std::string kind, space_path, measure_path, target_spec = "interval", mode = "auto";
  double kappa = 0.0;
  std::vector<double> kappas;
  std::size_t seed_points = 0;
  std::optional<std::size_t> iterations;
  inv->add_option("kind", kind, "sep | obsdiam | pdiam")->required()->check(CLI::IsMember({"sep", "obsdiam", "pdiam"}));
  inv->add_option("--space", space_path, "Space file");
  inv->add_option("--measure", measure_path, "Measure file (pdiam)");
  inv->add_option("--kappa", kappa, "Mass allowed outside (obsdiam, pdiam)");
  inv->add_option("--kappas", kappas, "Class masses (sep)")->delimiter(',');
  inv->add_option("--target", target_spec, "interval, or a finite target file (obsdiam)");
  inv->add_option("--mode", mode, "exact | heuristic | auto (sep)")
      ->check(CLI::IsMember({"exact", "heuristic", "auto"}));
  inv->add_option("--seed-points", seed_points, "Seed maps to try (obsdiam; 0 = all)");
  inv->add_option("--iterations", iterations, "Local-search moves (obsdiam; default 20 per point)");
  inv->add_option("--out", g.out, "Output file (stdout when omitted)");

  // sample
  auto* smp = app.add_subcommand("sample", "Draw one sample distance matrix");
  std::size_t sample_n = 0;
  smp->add_option("--space", space_path, "Space file")->required();
  smp->add_option("--n", sample_n, "Number of sampled points")->required();
  smp->add_option("--out", g.out, "Output file (stdout when omitted)");

  // moments
  auto* mom = app.add_subcommand("moments", "Moment signature");
  std::size_t r_max = 2;
  unsigned k_max = 1;
  std::uint64_t samples = 100000;
  bool force_exact = false, force_mc = false;
  double exact_limit = 1e6;
  mom->add_option("--space", space_path, "Space file")->required();
  mom->add_option("--r", r_max, "Largest tuple order");
  mom->add_option("--k", k_max, "Largest monomial power");
  mom->add_option("--samples", samples, "Monte Carlo tuples per entry");
  auto* exact_flag = mom->add_flag("--exact", force_exact, "Exact sums for every entry");
  mom->add_flag("--mc", force_mc, "Monte Carlo for every entry")->excludes(exact_flag);
  mom->add_option("--exact-limit", exact_limit, "Auto mode: exact when n^r is at most this");
  mom->add_option("--out", g.out, "Output file (stdout when omitted)");

  // box1
  auto* box = app.add_subcommand("box1", "box1 between grid kernels, or aligned box1 between spaces");
  std::string a_path, b_path;
  bool anneal = false, exact_align = false;
  AlignOptions align;
  box->add_option("--a", a_path, "First space or grid file")->required();
  box->add_option("--b", b_path, "Second space or grid file")->required();
  auto* exact_opt = box->add_flag("--exact", exact_align, "Enumerate all alignments (default)");
  box->add_flag("--anneal", anneal, "Simulated annealing over alignments")->excludes(exact_opt);
  box->add_option("--chains", align.chains, "Annealing chains");
  box->add_option("--iterations", align.iterations, "Moves per annealing chain");
  box->add_option("--cell-cap", align.cell_cap, "Largest common refinement");
  box->add_option("--out", g.out, "Output file (stdout when omitted)");

  // converge / compare
  auto* conv = app.add_subcommand("converge", "Moment trajectories along a sequence");
  auto* cmp = app.add_subcommand("compare", "Compare the limits of two sequences");
  SequenceSpec spec_a, spec_b;
  std::string family_b;
  std::string csv_path;
  ConvergenceOptions copt;
  for (auto* sub : {conv, cmp}) {
    sub->add_option("--r", copt.r_max, "Largest tuple order");
    sub->add_option("--k", copt.k_max, "Largest monomial power");
    sub->add_option("--samples", copt.samples, "Monte Carlo tuples per entry");
    sub->add_option("--tol", copt.tol, "Tolerance on moment gaps");
    sub->add_option("--p", spec_a.p, "Edge probability (random graphs)");
    sub->add_option("--count", spec_a.sphere_count, "Points per sphere");
    sub->add_option("--out", g.out, "Output file (stdout when omitted)");
  }
  conv->add_option("--family", family, "complete | sphere | random-graph | files")->required();
  conv->add_option("--indices", spec_a.indices, "Strictly increasing indices")->delimiter(',')->required();
  conv->add_option("--files", spec_a.files, "Space files for the files family")->delimiter(',');
  conv->add_option("--csv", csv_path, "Also write the trajectory table as CSV");
  cmp->add_option("--family-a", family, "First family")->required();
  cmp->add_option("--indices-a", spec_a.indices, "First indices")->delimiter(',')->required();
  cmp->add_option("--family-b", family_b, "Second family")->required();
  cmp->add_option("--indices-b", spec_b.indices, "Second indices")->delimiter(',')->required();

  // replay
  auto* rep = app.add_subcommand("replay", "Re-run a manifest and compare output digests");
  std::string manifest_path;
  rep->add_option("--manifest", manifest_path, "Manifest file")->required();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::Success& e) {
    if (!capture_help) app.exit(e);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  run.seed = g.seed;
  if (g.workers > 0) omp_set_num_threads(g.workers);

  if (gen->parsed()) {
    run.command = "generate";
    SequenceSpec spec;
    spec.family = parse_family(family);
    spec.seed = g.seed;
    spec.p = gen_p;
    spec.sphere_count = gen_count;
    if (spec.family == Family::UserFiles) throw UsageError("generate does not support the files family");
    const std::size_t index = spec.family == Family::Spheres ? gen_dim : gen_n;
    if (index == 0) throw UsageError(spec.family == Family::Spheres ? "--dim is required" : "--n is required");
    emit(run, g.out, io::to_json(generate(spec, index)));
    return kExitOk;
  }

  if (inv->parsed()) {
    run.command = "invariant " + kind;
    if (kind == "pdiam") {
      if (measure_path.empty()) throw UsageError("pdiam needs --measure");
      run.inputs.push_back(measure_path);
      const auto measure = io::measure_from_json(io::read_json(measure_path));
      emit(run, g.out, io::to_json(partial_diameter(measure, kappa), kappa));
      return kExitOk;
    }
    if (space_path.empty()) throw UsageError(kind + " needs --space");
    const auto space = load_space(run, space_path);
    if (kind == "sep") {
      if (kappas.empty()) throw UsageError("sep needs --kappas");
      const std::size_t n = std::visit([](const auto& s) { return s.size(); }, space);
      SearchMode m = SearchMode::Exact;
      if (mode == "heuristic" || (mode == "auto" && n > kMaxExactSeparationPoints)) m = SearchMode::Heuristic;
      const auto result = std::visit([&](const auto& s) { return separation(s, kappas, m); }, space);
      emit(run, g.out, io::to_json(result, kappas));
      return kExitOk;
    }
    Target target = Target::interval();
    if (target_spec != "interval") {
      run.inputs.push_back(target_spec);
      target = io::target_from_json(io::read_json(target_spec));
    }
    ObsDiamBudget budget{seed_points, iterations};
    const auto result = std::visit([&](const auto& s) { return obs_diam(s, target, kappa, budget, g.seed); }, space);
    emit(run, g.out, io::to_json(result, kappa));
    return kExitOk;
  }

  if (smp->parsed()) {
    run.command = "sample";
    const auto space = load_space(run, space_path);
    const auto s = std::visit([&](const auto& x) { return sample_matrix(x, sample_n, g.seed); }, space);
    emit(run, g.out, io::to_json(s));
    return kExitOk;
  }

  if (mom->parsed()) {
    run.command = "moments";
    const auto space = load_space(run, space_path);
    SignatureOptions o;
    o.r_max = r_max;
    o.k_max = k_max;
    o.samples = samples;
    o.seed = g.seed;
    o.exact_limit = exact_limit;
    o.mode = force_exact ? MomentMode::Exact : force_mc ? MomentMode::MonteCarlo : MomentMode::Auto;
    const auto sig = std::visit([&](const auto& x) { return moment_signature(x, o); }, space);
    emit(run, g.out, io::to_json(sig));
    return kExitOk;
  }

  if (box->parsed()) {
    run.command = "box1";
    run.inputs.push_back(a_path);
    run.inputs.push_back(b_path);
    const json ja = io::read_json(a_path);
    const json jb = io::read_json(b_path);
    const bool grids = ja.value("kind", "") == "grid" || jb.value("kind", "") == "grid";
    const GridKernel ka = io::grid_from_json(ja);
    const GridKernel kb = io::grid_from_json(jb);
    if (grids) {
      emit(run, g.out, io::to_json(box1(ka, kb)));
      return kExitOk;
    }
    align.mode = anneal ? AlignMode::Anneal : AlignMode::Exact;
    align.seed = g.seed;
    emit(run, g.out, io::to_json(underline_box1(ka, kb, align)));
    return kExitOk;
  }

  if (conv->parsed() || cmp->parsed()) {
    copt.seed = g.seed;
    spec_a.family = parse_family(family);
    spec_a.seed = g.seed;
    for (const auto& f : spec_a.files) run.inputs.push_back(f);
    if (conv->parsed()) {
      run.command = "converge";
      const auto report = converge_test(spec_a, copt);
      emit(run, g.out, io::to_json(report));
      if (!csv_path.empty()) run.outputs.push_back({csv_path, io::to_csv(report)});
      return kExitOk;
    }
    run.command = "compare";
    spec_b.family = parse_family(family_b);
    spec_b.seed = g.seed;
    spec_b.p = spec_a.p;
    spec_b.sphere_count = spec_a.sphere_count;
    emit(run, g.out, io::to_json(compare_limits(spec_a, spec_b, copt)));
    return kExitOk;
  }

  if (rep->parsed()) {
    run.command = "replay";
    const json manifest = io::read_json(manifest_path);
    Run again;
    const auto argv = manifest.at("argv").get<std::vector<std::string>>();
    execute(argv, again, true);
    json result;
    result["kind"] = "replay";
    result["manifest"] = manifest_path;
    bool same = true;
    json outputs = json::array();
    const auto& recorded = manifest.at("outputs");
    for (std::size_t i = 0; i < again.outputs.size(); ++i) {
      const std::string actual = sha256_hex(again.outputs[i].content);
      const std::string expected = i < recorded.size() ? recorded.at(i).at("sha256").get<std::string>() : "";
      same = same && actual == expected;
      outputs.push_back({{"path", again.outputs[i].path}, {"expected", expected}, {"actual", actual}});
    }
    same = same && again.outputs.size() == recorded.size();
    result["reproduced"] = same;
    result["outputs"] = std::move(outputs);
    run.outputs.push_back({"-", with_newline(io::dump(result))});
    return same ? kExitOk : kExitInternal;
  }
  return kExitUsage;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const Run& run, const std::vector<std::string>& args) {
  std::string anchor;
  for (const auto& o : run.outputs)
    if (o.path != "-") {
      anchor = o.path;
      break;
    }
  if (anchor.empty() || run.command == "replay") return;
  json m;
  m["command"] = run.command;
  m["argv"] = args;
  m["seed"] = run.seed;
  m["version"] = MMSPACE_VERSION;
  json inputs = json::array();
  for (const auto& path : run.inputs) inputs.push_back({{"path", path}, {"sha256", sha256_hex(read_file(path))}});
  m["inputs"] = std::move(inputs);
  json outputs = json::array();
  for (const auto& o : run.outputs) outputs.push_back({{"path", o.path}, {"sha256", sha256_hex(o.content)}});
  m["outputs"] = std::move(outputs);
  m["timestamp"] = utc_timestamp();
  io::write_text(anchor + ".manifest.json", io::dump(m));
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  Run run;
  int code = kExitOk;
  try {
    code = execute(args, run);
    for (const auto& o : run.outputs) {
      if (o.path == "-")
        std::cout << o.content;
      else
        io::write_text(o.path, o.content);
    }
    write_manifest(run, args);
  } catch (const UsageError& e) {
    report_error("Usage", e.what(), kExitUsage);
    return kExitUsage;
  } catch (const Error& e) {
    const int exit_code = exit_code_for(e.code());
    report_error(std::string(errc_name(e.code())), e.what(), exit_code, e.indices());
    return exit_code;
  } catch (const std::exception& e) {
    report_error("Internal", e.what(), kExitInternal);
    return kExitInternal;
  }
  return code;
}
