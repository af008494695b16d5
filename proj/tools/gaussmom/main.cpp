// gaussmom: formulas, moment convolution/deconvolution, Monte Carlo
// validation and the rate / power estimation pipelines.
//
// Exit codes:
//   0 success              4 dimension mismatch or unsupported model
//   1 internal error       5 file format or I/O error
//   2 usage error          6 singular deconvolution stage
//   3 model syntax error   7 Monte Carlo validation failed

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gaussmom/deconv.hpp"
#include "gaussmom/estimators.hpp"
#include "gaussmom/matrix.hpp"
#include "gaussmom/mc_oracle.hpp"
#include "gaussmom/model.hpp"
#include "gaussmom/moment_space.hpp"
#include "gaussmom/transfer.hpp"

namespace gm = gaussmom;

namespace {

enum ExitCode {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kSyntax = 3,
  kDimension = 4,
  kFormat = 5,
  kSingular = 6,
  kValidation = 7,
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string model;
  int P = 3;
  bool latex = false;
  bool raw_nN = false;
  std::string layout = "auto";
  std::string save_map;
  std::string in;
  std::string out;
  bool to_stdout = false;
  bool json = false;
  std::string obs;
  std::string strategy = "auto";
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  std::vector<std::string> bindings;
  std::string report;
  double snr = 0.0;
  int rank = 0;
  std::string sigma = "1";
  std::string combine = "average";
  bool normalized_rate = false;
  long K = 0, N = 0, M = 0;
  long count = 1;
  int powers_P = 0;  // 0: use K
};

void warn_weight(int P) {
  if (P > gm::kDefaultWeightCap)
    std::cerr << "warning: weight " << P << " exceeds " << gm::kDefaultWeightCap
              << "; enumerating the permutations may take very long\n";
}

gm::Rational parse_number(const std::string& text, const char* what) {
  try {
    return gm::parse_rational(text);
  } catch (const std::invalid_argument&) {
    throw UsageError(std::string("malformed ") + what + " '" + text + "'");
  }
}

gm::DetMatrixSet parse_bindings(const std::vector<std::string>& specs) {
  gm::DetMatrixSet set;
  for (const auto& s : specs) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--bind wants NAME=SPEC, got '" + s + "'");
    set.add(s.substr(0, eq), gm::matrix_from_spec(s.substr(eq + 1)));
  }
  return set;
}

void emit_moments(const Options& o, const gm::MomentVector& v) {
  std::string text;
  if (o.json) {
    text = gm::moment_vector_to_json(v) + "\n";
  } else {
    std::ostringstream s;
    gm::write_moment_vector(s, v);
    text = s.str();
  }
  if (o.to_stdout || o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw gm::FormatError("cannot write moment file " + o.out);
  f << text;
}

gm::MomentVector load_moments(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw gm::FormatError("cannot open moment file " + path);
  std::stringstream buffer;
  buffer << f.rdbuf();
  std::string text = buffer.str();
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return gm::moment_vector_from_json(text);
  std::istringstream in(text);
  return gm::read_moment_vector(in, path);
}

gm::DeconvStrategy parse_strategy(const std::string& s) {
  if (s == "auto") return gm::DeconvStrategy::kAuto;
  if (s == "inverse") return gm::DeconvStrategy::kMatrixInverse;
  if (s == "backsub") return gm::DeconvStrategy::kBackSubstitution;
  throw UsageError("unknown deconvolution strategy '" + s + "'");
}

gm::CombineStrategy parse_combine(const std::string& s) {
  if (s == "average") return gm::CombineStrategy::kAverage;
  if (s == "stack") return gm::CombineStrategy::kStack;
  if (s == "per-observation") return gm::CombineStrategy::kPerObservation;
  throw UsageError("unknown strategy '" + s + "'");
}

void require_input_basis(const gm::MomentVector& v, const gm::Basis& expected, const char* what) {
  if (v.basis() == expected) return;
  auto describe = [](const gm::Basis& b) {
    return std::string(b.two_sided_basis() ? "two-sided" : "one-sided") + " weight " + std::to_string(b.max_weight());
  };
  throw gm::ModelError(std::string(what) + " has " + describe(v.basis()) + " moments but the model needs " +
                       describe(expected));
}

int run_formula(const Options& o) {
  warn_weight(o.P);
  gm::TransferMap map = gm::compile(gm::parse_model(o.model), o.P);
  gm::FormulaOptions f;
  f.format = o.latex ? gm::RenderFormat::kLatex : gm::RenderFormat::kPlain;
  f.style = o.raw_nN ? gm::RenderStyle::kRaw : gm::RenderStyle::kCSubstituted;
  if (o.layout == "matrix") {
    f.layout = gm::FormulaLayout::kMatrix;
  } else if (o.layout == "expanded") {
    f.layout = gm::FormulaLayout::kExpanded;
  } else if (o.layout != "auto") {
    throw UsageError("unknown layout '" + o.layout + "'");
  }
  std::cout << gm::emit_formula(map, f);
  if (!o.save_map.empty()) {
    std::ofstream out(o.save_map);
    if (!out) throw gm::FormatError("cannot write transfer map " + o.save_map);
    gm::write_transfer_map(out, map);
  }
  return kOk;
}

int run_convolve(const Options& o) {
  gm::MomentVector in = load_moments(o.in);
  int P = in.basis().max_weight();
  warn_weight(P);
  gm::TransferMap map = gm::compile(gm::parse_model(o.model), P);
  require_input_basis(in, map.input_basis(), o.in.c_str());
  emit_moments(o, map.apply(in));
  return kOk;
}

int run_deconvolve(const Options& o) {
  gm::ModelExpr model = gm::parse_model(o.model);
  gm::DeconvStrategy strategy = parse_strategy(o.strategy);
  if (!o.obs.empty()) {
    warn_weight(o.P);
    emit_moments(o, gm::unbiased_estimate(model, gm::read_matrix_directory(o.obs), o.P, strategy));
    return kOk;
  }
  if (o.in.empty()) throw UsageError("deconvolve needs --in or --obs");
  gm::MomentVector in = load_moments(o.in);
  int P = in.basis().max_weight();
  warn_weight(P);
  gm::CompiledModel compiled = gm::compile_stages(model, P);
  require_input_basis(in, compiled.output_basis, o.in.c_str());
  emit_moments(o, gm::MultistageDeconvolver(compiled, strategy).apply(in));
  return kOk;
}

int run_simulate(const Options& o) {
  warn_weight(o.P);
  if (o.trials < 2) throw UsageError("--trials must be at least 2");
  gm::EnsembleSpec spec{gm::parse_model(o.model), parse_bindings(o.bindings), o.seed, o.trials};
  gm::ValidationReport report = gm::validate(spec, o.P);
  gm::write_report(std::cout, report);
  if (!o.report.empty()) {
    std::ofstream f(o.report);
    if (!f) throw gm::FormatError("cannot write report " + o.report);
    gm::write_report(f, report);
  }
  std::printf("# trials %llu, max |z| %.3f, %s\n", static_cast<unsigned long long>(report.trials),
              report.max_abs_z(), report.passed() ? "pass" : "FAIL");
  return report.passed() ? kOk : kValidation;
}

int run_sample(const Options& o) {
  gm::ModelExpr model = gm::parse_model(o.model);
  gm::DetMatrixSet bindings = parse_bindings(o.bindings);
  if (o.count < 1) throw UsageError("--count must be positive");
  std::filesystem::create_directories(o.out);
  for (long i = 0; i < o.count; ++i) {
    gm::RandomStream rng(o.seed, static_cast<std::uint64_t>(i));
    gm::Matrix m = gm::observes_amplitude(model) ? gm::sample_amplitude(model, bindings, rng)
                                                 : gm::sample_model(model, bindings, rng);
    char name[32];
    std::snprintf(name, sizeof name, "obs%06ld.txt", i);
    gm::write_matrix_file(std::filesystem::path(o.out) / name, m);
  }
  return kOk;
}

void print_spectrum(const gm::SpectralEstimate& s) {
  std::printf("elementary");
  for (double e : s.elementary_symmetric) std::printf(" %.10g", e);
  std::printf("\neigenvalues");
  for (double v : s.eigenvalues.values) std::printf(" %.10g", v);
  std::printf("\n");
  if (s.eigenvalues.complex_discarded) std::printf("# complex roots projected to their real parts\n");
  if (s.eigenvalues.clamped) std::printf("# negative roots clamped to 0\n");
}

int run_rate(const Options& o) {
  if (o.snr <= 0.0) throw UsageError("--snr must be positive");
  if (o.rank < 1) throw UsageError("--rank must be positive");
  gm::Rational sigma = parse_number(o.sigma, "sigma");
  auto observations = gm::read_matrix_directory(o.obs);
  auto result = gm::rate_pipeline(observations, sigma * sigma, o.snr, o.rank, parse_combine(o.combine),
                                  o.normalized_rate ? gm::RateScale::kNormalized : gm::RateScale::kGram);
  std::printf("observations %zu\n", observations.size());
  print_spectrum(result.spectrum);
  std::printf("rate_core %.10g\n", result.rate.core);
  if (result.rate.rate) {
    std::printf("rate %.10g\n", *result.rate.rate);
  } else {
    std::printf("rate undefined\n# rate core is not positive\n");
  }
  return kOk;
}

int run_powers(const Options& o) {
  if (o.K < 1 || o.N < 1 || o.M < 1) throw UsageError("--K, --N and --M must be positive");
  int P = std::max<int>(o.powers_P, static_cast<int>(o.K));
  warn_weight(P);
  gm::Rational sigma = parse_number(o.sigma, "sigma");
  auto observations = gm::read_matrix_directory(o.obs);
  auto estimate = gm::power_estimation(observations, o.K, o.N, o.M, sigma, P);
  std::printf("observations %zu\n", observations.size());
  print_spectrum(estimate);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-size moment formulas and estimators for Gaussian matrix models"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");

  Options o;
  std::function<int()> action;

  auto add_model = [&](CLI::App* sub) { sub->add_option("--model", o.model, "Model expression")->required(); };
  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Output moment file");
    sub->add_flag("--stdout", o.to_stdout, "Write the result to standard output");
    sub->add_flag("--json", o.json, "Write moments as JSON");
  };

  auto* formula = app.add_subcommand("formula", "Print the transfer matrix or formulas of a model");
  add_model(formula);
  formula->add_option("--P", o.P, "Maximum weight")->check(CLI::PositiveNumber);
  formula->add_flag("--latex", o.latex, "LaTeX output");
  formula->add_flag("--raw-nN", o.raw_nN, "Keep n and N instead of c = n/N");
  formula->add_option("--layout", o.layout, "auto, matrix or expanded");
  formula->add_option("--save-map", o.save_map, "Also write the serialized transfer map");
  formula->callback([&] { action = [&] { return run_formula(o); }; });

  auto* convolve = app.add_subcommand("convolve", "Apply a model to input moments");
  add_model(convolve);
  convolve->add_option("--in", o.in, "Input moment file")->required();
  add_output(convolve);
  convolve->callback([&] { action = [&] { return run_convolve(o); }; });

  auto* deconvolve = app.add_subcommand("deconvolve", "Unbiased input-moment estimates from observed moments");
  add_model(deconvolve);
  deconvolve->add_option("--in", o.in, "Observed moment file");
  deconvolve->add_option("--obs", o.obs, "Directory of observation matrices instead of --in");
  deconvolve->add_option("--P", o.P, "Maximum weight with --obs")->check(CLI::PositiveNumber);
  deconvolve->add_option("--strategy", o.strategy, "auto, inverse or backsub");
  add_output(deconvolve);
  deconvolve->callback([&] { action = [&] { return run_deconvolve(o); }; });

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo validation report for a model");
  add_model(simulate);
  simulate->add_option("--trials", o.trials, "Number of trials");
  simulate->add_option("--seed", o.seed, "Seed");
  simulate->add_option("--P", o.P, "Maximum weight")->check(CLI::PositiveNumber);
  simulate->add_option("--bind", o.bindings, "NAME=SPEC for each det leaf (diag:a,b,.. | eye:n | file)");
  simulate->add_option("--report", o.report, "Also write the report to a file");
  simulate->callback([&] { action = [&] { return run_simulate(o); }; });

  auto* sample = app.add_subcommand("sample", "Write sampled observations of a model to a directory");
  add_model(sample);
  sample->add_option("--count", o.count, "Number of observations");
  sample->add_option("--seed", o.seed, "Seed");
  sample->add_option("--bind", o.bindings, "NAME=SPEC for each det leaf");
  sample->add_option("--out", o.out, "Output directory")->required();
  sample->callback([&] { action = [&] { return run_sample(o); }; });

  auto* rate_cmd = app.add_subcommand("rate", "Rate estimation from noisy observations of D");
  rate_cmd->add_option("--obs", o.obs, "Directory of n x N observations")->required();
  rate_cmd->add_option("--snr", o.snr, "SNR rho")->required();
  rate_cmd->add_option("--rank", o.rank, "Rank cap k")->required();
  rate_cmd->add_option("--sigma", o.sigma, "Noise level sigma")->required();
  rate_cmd->add_option("--strategy", o.combine, "average, stack or per-observation");
  rate_cmd->add_flag("--normalized", o.normalized_rate, "Use the eigenvalues of (1/N) D D^H in the rate");
  rate_cmd->callback([&] { action = [&] { return run_rate(o); }; });

  auto* powers = app.add_subcommand("powers", "Power estimation from compound observations");
  powers->add_option("--obs", o.obs, "Directory of N x M observations")->required();
  powers->add_option("--K", o.K, "Users")->required();
  powers->add_option("--N", o.N, "Receive antennas")->required();
  powers->add_option("--M", o.M, "Observations per compound matrix")->required();
  powers->add_option("--sigma", o.sigma, "Noise level sigma")->required();
  powers->add_option("--P", o.powers_P, "Maximum weight (default and minimum K)")->check(CLI::PositiveNumber);
  powers->callback([&] { action = [&] { return run_powers(o); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    gm::set_thread_count(threads);
    return action();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const gm::ModelSyntaxError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSyntax;
  } catch (const gm::ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDimension;
  } catch (const gm::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFormat;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFormat;
  } catch (const gm::SingularStageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSingular;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}
