#include "clockshift/cli.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "clockshift/errors.hpp"
#include "clockshift/insensitive_search.hpp"
#include "clockshift/ion_data.hpp"
#include "clockshift/tensor_shifts.hpp"
#include "clockshift/units.hpp"
#include "clockshift/zeeman_spectrum.hpp"
#include "numfmt.hpp"

namespace clockshift::cli {

std::string render_csv(const Table& t) {
  std::ostringstream os;
  for (const auto& c : t.comments) os << "# " << c << "\n";
  for (std::size_t k = 0; k < t.columns.size(); ++k) os << (k ? "," : "") << t.columns[k];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) os << ",";
      if (const auto* d = std::get_if<double>(&row[k]))
        os << numfmt::shortest(*d);
      else
        os << std::get<std::string>(row[k]);
    }
    os << "\n";
  }
  return os.str();
}

std::string render_table(const Table& t) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back(t.columns);
  for (const auto& row : t.rows) {
    std::vector<std::string> r;
    for (const auto& c : row) {
      if (const auto* d = std::get_if<double>(&c))
        r.push_back(fmt::format("{:.4g}", *d));
      else
        r.push_back(std::get<std::string>(c));
    }
    cells.push_back(std::move(r));
  }
  std::vector<std::size_t> width(t.columns.size(), 0);
  for (const auto& r : cells)
    for (std::size_t k = 0; k < r.size() && k < width.size(); ++k)
      width[k] = std::max(width[k], r[k].size());
  std::ostringstream os;
  for (const auto& c : t.comments) os << "# " << c << "\n";
  for (const auto& r : cells) {
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (k) os << "  ";
      os << std::setw(static_cast<int>(width[k])) << r[k];
    }
    os << "\n";
  }
  return os.str();
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

namespace {

struct RunConfig {
  std::string species_path;
  std::string transition;
  std::string lower;
  std::string upper;
  std::optional<double> b_mT;
  std::optional<double> bmax_mT;
  std::optional<double> c2;
  std::string format;
  std::string out_path;
  bool freeze_lower_linear = false;
  int points = 0;
  int tracking_points = 2001;
  unsigned threads = 0;
  std::optional<double> max_abs_c2;
  // shift
  std::string mode = "quadrupole";
  double alpha_deg = 0.0;
  double beta_deg = 0.0;
  double epsilon = 0.0;
  double gradient = 0.0;
  double ex2 = 0.0, ey2 = 0.0, ez2 = 0.0, exey = 0.0;
  // broadening
  std::optional<double> omega_z;
  long long n_ions = 1;
};

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Input: return "input";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::MissingConstant: return "missing-constant";
  }
  return "unknown";
}

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

struct Context {
  IonSpecies species;
  const ClockTransition* transition = nullptr;
  std::string hash;
};

Context load(const RunConfig& cfg) {
  Context ctx{load_species_file(cfg.species_path), nullptr, file_hash(cfg.species_path)};
  ctx.transition = &ctx.species.transition(cfg.transition);
  return ctx;
}

std::vector<std::string> provenance(const Context& ctx, const RunConfig& cfg) {
  return {std::string("tool: ") + kToolVersion,
          "species: " + ctx.species.name + " (" +
              std::filesystem::path(cfg.species_path).filename().string() + ", fnv1a64 " +
              ctx.hash + ")",
          "transition: " + ctx.transition->lower + "->" + ctx.transition->upper};
}

StateLabel require_label(const std::string& text, const char* flag) {
  if (text.empty()) throw InputError(std::string(flag) + " is required for this command");
  return parse_state_label(text);
}

double require_field(const std::optional<double>& mT, const char* flag) {
  if (!mT) throw InputError(std::string(flag) + " is required for this command");
  if (!(*mT >= 0.0) || !std::isfinite(*mT)) throw InputError(std::string(flag) + " must be >= 0");
  return *mT * units::tesla_per_millitesla;
}

SearchOptions search_options(const RunConfig& cfg) {
  SearchOptions o;
  o.freeze_lower_linear = cfg.freeze_lower_linear;
  o.tracking_points = cfg.tracking_points;
  o.threads = cfg.threads;
  if (cfg.points > 0) o.scan_points = cfg.points;
  return o;
}

std::string label_F(StateLabel s) { return s.F.str(); }
std::string label_m(StateLabel s) { return s.m.str(); }

// C2 either given directly or evaluated for the labeled pair at --b.
struct C2Source {
  double value = 0.0;
  std::string origin;
};

C2Source resolve_c2(const Context& ctx, const RunConfig& cfg) {
  if (cfg.c2) return {*cfg.c2, "given"};
  const StateLabel l = require_label(cfg.lower, "--lower");
  const StateLabel u = require_label(cfg.upper, "--upper");
  const double B = require_field(cfg.b_mT, "--b (or --c2)");
  const TransitionSpectrum spectrum(ctx.species, *ctx.transition, l, u, B,
                                    {cfg.freeze_lower_linear, cfg.tracking_points});
  return {c2_transition(ctx.species, *ctx.transition, spectrum, B).value(),
          l.str() + "->" + u.str() + " at " + numfmt::shortest(*cfg.b_mT) + " mT"};
}

Table cmd_trace(const RunConfig& cfg) {
  const Context ctx = load(cfg);
  const StateLabel l = require_label(cfg.lower, "--lower");
  const StateLabel u = require_label(cfg.upper, "--upper");
  const double B_max = require_field(cfg.bmax_mT, "--bmax");
  const int points = cfg.points > 0 ? cfg.points : 501;
  if (points > 1 && !(B_max > 0.0)) throw InputError("--bmax must be > 0 for a multi-point trace");

  const TransitionSpectrum spectrum(ctx.species, *ctx.transition, l, u, B_max,
                                    {cfg.freeze_lower_linear, cfg.tracking_points});
  const double nu0 = spectrum.frequency(0.0);
  Table t;
  t.comments = provenance(ctx, cfg);
  t.comments.push_back("states: " + l.str() + "->" + u.str() +
                       (cfg.freeze_lower_linear ? " (lower frozen linear)" : ""));
  t.comments.push_back("delta_nu_Hz = nu(B) - nu(0); nu(0) = " + numfmt::shortest(nu0) +
                       " Hz hyperfine offset from the optical frequency " +
                       numfmt::shortest(ctx.transition->frequency_hz) + " Hz");
  t.columns = {"B_mT", "delta_nu_Hz", "C2"};
  for (int k = 0; k < points; ++k) {
    const double B = points == 1 ? 0.0 : B_max * k / (points - 1);
    const double nu = spectrum.frequency(B) - nu0;
    const double c2 = c2_transition(ctx.species, *ctx.transition, spectrum, B).value();
    t.rows.push_back({B / units::tesla_per_millitesla, nu, c2});
  }
  return t;
}

void add_analysis_row(Table& t, const TransitionAnalysis& a) {
  t.rows.push_back({label_F(a.lower), label_m(a.lower), label_F(a.upper), label_m(a.upper),
                    a.B0 / units::tesla_per_millitesla, a.alpha_Z * units::khz_per_mt2_per_hz_per_t2,
                    a.C2, a.C2_upper, a.C2_lower, a.min_gap_adjacent_mF, a.residual_slope});
}

const std::vector<std::string> kAnalysisColumns = {
    "lower_F", "lower_m", "upper_F", "upper_m", "B0_mT", "alpha_Z_kHz_per_mT2",
    "C2", "C2_upper", "C2_lower", "min_gap_adjacent_mF_Hz", "residual_slope_Hz_per_T"};

Table cmd_scan(const RunConfig& cfg) {
  const Context ctx = load(cfg);
  const double B_max = require_field(cfg.bmax_mT, "--bmax");
  ScanFilters filters;
  filters.max_abs_c2 = cfg.max_abs_c2;
  if (!cfg.lower.empty()) filters.lower = parse_state_label(cfg.lower);
  if (!cfg.upper.empty()) filters.upper = parse_state_label(cfg.upper);
  const SearchOptions opts = search_options(cfg);
  const ScanReport r = scan_species(ctx.species, *ctx.transition, B_max, filters, opts);

  Table t;
  t.comments = provenance(ctx, cfg);
  t.comments.push_back("scan: (0, " + numfmt::shortest(*cfg.bmax_mT) + "] mT, " +
                       std::to_string(r.scan_points) + " scan points, " +
                       std::to_string(r.tracking_points) + " tracking points, " +
                       std::to_string(r.pairs_examined) + " label pairs" +
                       (cfg.freeze_lower_linear ? ", lower frozen linear" : ""));
  if (cfg.max_abs_c2) t.comments.push_back("filter: |C2| < " + numfmt::shortest(*cfg.max_abs_c2));
  for (const auto& f : r.failures)
    t.comments.push_back("failure " + f.lower.str() + "->" + f.upper.str() + ": " +
                         one_line(f.message));
  t.columns = kAnalysisColumns;
  for (const auto& a : r.analyses) add_analysis_row(t, a);
  return t;
}

Table cmd_c2(const RunConfig& cfg) {
  const Context ctx = load(cfg);
  const StateLabel l = require_label(cfg.lower, "--lower");
  const StateLabel u = require_label(cfg.upper, "--upper");
  Table t;
  t.comments = provenance(ctx, cfg);
  t.comments.push_back("states: " + l.str() + "->" + u.str() +
                       (cfg.freeze_lower_linear ? " (lower frozen linear)" : ""));
  if (cfg.b_mT) {
    const double B = require_field(cfg.b_mT, "--b");
    const TransitionSpectrum spectrum(ctx.species, *ctx.transition, l, u, B,
                                      {cfg.freeze_lower_linear, cfg.tracking_points});
    const TransitionC2 c2 = c2_transition(ctx.species, *ctx.transition, spectrum, B);
    t.columns = {"B_mT", "C2", "C2_upper", "C2_lower", "delta_nu_Hz", "dnu_dB_Hz_per_T"};
    t.rows.push_back({*cfg.b_mT, c2.value(), c2.upper, c2.lower,
                      spectrum.frequency(B) - spectrum.frequency(0.0), spectrum.dnu_dB(B)});
    return t;
  }
  const double B_max = require_field(cfg.bmax_mT, "--bmax (or --b)");
  const SearchOptions opts = search_options(cfg);
  const TransitionSpectrum spectrum(ctx.species, *ctx.transition, l, u, B_max,
                                    {cfg.freeze_lower_linear, cfg.tracking_points});
  t.comments.push_back("field-insensitive points in (0, " + numfmt::shortest(*cfg.bmax_mT) + "] mT");
  t.columns = kAnalysisColumns;
  for (const auto& p : find_insensitive_points(spectrum, B_max, opts))
    add_analysis_row(t, analyze_point(ctx.species, *ctx.transition, spectrum, p, opts));
  return t;
}

FieldGeometry geometry(const RunConfig& cfg) {
  const double deg = std::numbers::pi / 180.0;
  FieldGeometry g{cfg.alpha_deg * deg, cfg.beta_deg * deg, cfg.gradient, cfg.epsilon};
  validate(g);
  return g;
}

Table cmd_shift(const RunConfig& cfg) {
  const Context ctx = load(cfg);
  const C2Source c2 = resolve_c2(ctx, cfg);
  const FieldGeometry g = geometry(cfg);
  const double f_c = ctx.transition->frequency_hz;
  const auto alpha2 = ctx.species.level(ctx.transition->upper).alpha2J_au;

  Table t;
  t.comments = provenance(ctx, cfg);
  t.comments.push_back("mode: " + cfg.mode + "; C2 " + c2.origin);
  t.columns = {"C2", "geometric_factor", "shift_Hz", "fractional_shift"};
  if (cfg.mode == "quadrupole") {
    const double factor = quadrupole_geometry_factor(g.alpha, g.beta, g.epsilon);
    const double shift = quadrupole_shift(c2.value, g);
    t.comments.push_back("geometric_factor: (3cos^2 beta - 1) - epsilon sin^2 beta cos 2alpha");
    t.rows.push_back({c2.value, factor, shift, shift / f_c});
  } else if (cfg.mode == "tensor-dc") {
    const double aniso = 3.0 * cfg.ez2 - (cfg.ex2 + cfg.ey2 + cfg.ez2);
    const double shift = tensor_polarizability_shift(c2.value, alpha2, aniso);
    t.comments.push_back("geometric_factor: <3Ez^2 - |E|^2> in V^2/m^2");
    t.rows.push_back({c2.value, aniso, shift, shift / f_c});
  } else if (cfg.mode == "tensor-rf") {
    const RFShift s = rf_tensor_shift(c2.value, alpha2, {cfg.ex2, cfg.ey2, cfg.exey}, g, f_c);
    t.comments.push_back("geometric_factor: isotropic + anisotropic term in V^2/m^2");
    t.columns = {"C2", "geometric_factor", "isotropic_term", "anisotropic_term", "shift_Hz",
                 "fractional_shift"};
    t.rows.push_back({c2.value, s.isotropic_term + s.anisotropic_term, s.isotropic_term,
                      s.anisotropic_term, s.fractional * f_c, s.fractional});
  } else {
    throw InputError("--mode must be quadrupole, tensor-dc or tensor-rf");
  }
  return t;
}

Table cmd_broadening(const RunConfig& cfg) {
  const Context ctx = load(cfg);
  if (!cfg.omega_z) throw InputError("--omega-z is required for this command");
  const BroadeningParams p =
      broadening_params(ctx.species, *ctx.transition, *cfg.omega_z, cfg.n_ions);
  if (!p.delta_alpha0_au)
    throw MissingConstantError("delta_alpha0_au: transition " + ctx.transition->lower + "->" +
                               ctx.transition->upper + " has no differential polarizability");
  if (!p.alpha2J_au)
    throw MissingConstantError("alpha2J_au: level " + ctx.transition->upper +
                               " has no tensor polarizability");
  const C2Source c2 = resolve_c2(ctx, cfg);
  const Broadening b = broadening(p, c2.value);

  Table t;
  t.comments = provenance(ctx, cfg);
  t.comments.push_back("C2 " + c2.origin + "; N=" + std::to_string(cfg.n_ions) +
                       ", omega_z=" + numfmt::shortest(*cfg.omega_z) + " rad/s");
  if (b.delta_f == 0.0)
    t.comments.push_back("delta_f = 0: no rank-2 broadening, Ramsey time unbounded");
  else
    t.comments.push_back("Ramsey fringe contrast drops to about 80% at T = 1/delta_f");
  t.columns = {"C2", "delta_f_Hz", "max_ramsey_time_s"};
  t.rows.push_back({c2.value, b.delta_f, b.ramsey_time});
  return t;
}

void add_common(CLI::App* sub, RunConfig& cfg, bool labels_required) {
  sub->add_option("--species", cfg.species_path, "Ion-definition file")->required();
  sub->add_option("--transition", cfg.transition, "Transition as lower->upper level labels");
  auto* lo = sub->add_option("--lower", cfg.lower, "Lower state F,m (zero-field labels)");
  auto* up = sub->add_option("--upper", cfg.upper, "Upper state F,m (zero-field labels)");
  if (labels_required) {
    lo->required();
    up->required();
  }
  sub->add_option("--format", cfg.format, "csv | table (default: csv for trace, table otherwise)")
      ->check(CLI::IsMember({"csv", "table"}));
  sub->add_option("--out", cfg.out_path, "Write output to this file");
  sub->add_option("--tracking-points", cfg.tracking_points, "Tracking grid size")
      ->check(CLI::Range(2, 10000000))
      ->capture_default_str();
  sub->add_flag("--freeze-lower-linear", cfg.freeze_lower_linear,
                "Treat the lower state energy as exactly linear in B");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hyperfine-Zeeman clock transition analysis", "clockshift"};
  app.set_config("--config", "", "Config file (flags on the command line take precedence)");
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1, 1);
  RunConfig cfg;

  auto* trace = app.add_subcommand("trace", "nu(B) and C2 along a field grid");
  add_common(trace, cfg, true);
  trace->add_option("--bmax", cfg.bmax_mT, "Largest field, mT")->required();
  trace->add_option("--points", cfg.points, "Grid points including B=0")->check(CLI::Range(1, 10000000));

  auto* scan = app.add_subcommand("scan", "Exhaustive field-insensitive point search");
  add_common(scan, cfg, false);
  scan->add_option("--bmax", cfg.bmax_mT, "Scan range (0, bmax], mT")->required();
  scan->add_option("--points", cfg.points, "Scan grid points")->check(CLI::Range(2, 10000000));
  scan->add_option("--max-abs-c2", cfg.max_abs_c2, "Keep only |C2| below this");
  scan->add_option("--threads", cfg.threads, "Worker threads (0: all cores)");

  auto* c2 = app.add_subcommand("c2", "C2 at a field, or at the pair's insensitive points");
  add_common(c2, cfg, true);
  c2->add_option("--b", cfg.b_mT, "Field, mT");
  c2->add_option("--bmax", cfg.bmax_mT, "Search range for insensitive points, mT");
  c2->add_option("--points", cfg.points, "Scan grid points")->check(CLI::Range(2, 10000000));

  auto* shift = app.add_subcommand("shift", "Quadrupole / tensor polarizability shifts");
  add_common(shift, cfg, false);
  shift->add_option("--mode", cfg.mode, "quadrupole | tensor-dc | tensor-rf")
      ->check(CLI::IsMember({"quadrupole", "tensor-dc", "tensor-rf"}))
      ->capture_default_str();
  shift->add_option("--b", cfg.b_mT, "Field for C2, mT");
  shift->add_option("--c2", cfg.c2, "Use this C2 instead of evaluating it");
  shift->add_option("--alpha-deg", cfg.alpha_deg, "Euler angle alpha, degrees");
  shift->add_option("--beta-deg", cfg.beta_deg, "Euler angle beta, degrees");
  shift->add_option("--epsilon", cfg.epsilon, "Gradient asymmetry");
  shift->add_option("--gradient", cfg.gradient, "Gradient strength times Theta, Hz");
  shift->add_option("--ex2", cfg.ex2, "<Ex^2>, V^2/m^2");
  shift->add_option("--ey2", cfg.ey2, "<Ey^2>, V^2/m^2");
  shift->add_option("--ez2", cfg.ez2, "<Ez^2>, V^2/m^2 (tensor-dc)");
  shift->add_option("--exey", cfg.exey, "<Ex Ey>, V^2/m^2 (tensor-rf)");

  auto* broad = app.add_subcommand("broadening", "Number-dependent line broadening");
  add_common(broad, cfg, false);
  broad->add_option("--b", cfg.b_mT, "Field for C2, mT");
  broad->add_option("--c2", cfg.c2, "Use this C2 instead of evaluating it");
  broad->add_option("--omega-z", cfg.omega_z, "Axial trap frequency, rad/s")->required();
  broad->add_option("--n-ions", cfg.n_ions, "Number of ions")->check(CLI::Range(1LL, 1LL << 50));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error[2] input: " << one_line(e.what()) << "\n";
    return 2;
  }

  try {
    if (cfg.format.empty()) cfg.format = *trace ? "csv" : "table";
    Table t;
    if (*trace)
      t = cmd_trace(cfg);
    else if (*scan)
      t = cmd_scan(cfg);
    else if (*c2)
      t = cmd_c2(cfg);
    else if (*shift)
      t = cmd_shift(cfg);
    else
      t = cmd_broadening(cfg);
    const std::string text = cfg.format == "csv" ? render_csv(t) : render_table(t);
    if (!cfg.out_path.empty()) {
      std::ofstream f(cfg.out_path, std::ios::binary);
      if (!f) throw InputError("cannot write " + cfg.out_path);
      f << text;
    } else {
      out << text;
    }
    return 0;
  } catch (const Error& e) {
    err << "error[" << static_cast<int>(e.kind()) << "] " << kind_name(e.kind()) << ": "
        << one_line(e.what()) << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    err << "error[3] numerical: " << one_line(e.what()) << "\n";
    return 3;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("clockshift");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace clockshift::cli
