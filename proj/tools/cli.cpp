#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "csv_io.hpp"
#include "json.hpp"
#include "ngtrend/error.hpp"
#include "ngtrend/mle_fit.hpp"
#include "ngtrend/ng_filter.hpp"
#include "ngtrend/presets.hpp"
#include "ngtrend/rng.hpp"
#include "ngtrend/synthetic.hpp"
#include "svg.hpp"

namespace ngtrend::cli {

namespace {

using nlohmann::json;

constexpr const char* kGridHint = "grid too narrow; widen with --grid-span";
constexpr int kInfluencePoints = 512;

/// Thrown for failures that map to a specific exit status.
struct Failure {
  int code;
  std::string message;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kExitIo, "cannot read '" + path + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{kExitIo, "cannot write '" + path + "'"};
  out << content;
  out.flush();
  if (!out) throw Failure{kExitIo, "write to '" + path + "' failed"};
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Failure{kExitUsage, what + " is not valid JSON: " + e.what()};
  }
}

/// Inline JSON when the argument looks like an object, otherwise a file.
json load_json_arg(const std::string& arg, const std::string& what) {
  const auto first = arg.find_first_not_of(" \t\n");
  if (first != std::string::npos && arg[first] == '{') return parse_json(arg, what);
  return parse_json(read_file(arg), what);
}

bool is_zero_evidence(const std::string& message) {
  return message.rfind(std::string(to_string(ErrorCode::kZeroEvidence)), 0) == 0;
}

// ---------------------------------------------------------------- generate

struct GenerateOptions {
  std::optional<std::size_t> n;
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma2;
  std::vector<std::size_t> bounds;
  std::vector<double> levels;
  std::string out;
  std::string meta;
};

int cmd_generate(const GenerateOptions& o, std::ostream& out, std::ostream& err) {
  JumpSpec spec = default_jump_spec(o.n.value_or(500));
  if (o.seed) spec.seed = *o.seed;
  if (o.sigma2) spec.obs_sigma2 = *o.sigma2;
  if (!o.bounds.empty()) spec.segment_bounds = o.bounds;
  if (!o.levels.empty()) spec.segment_levels = o.levels;

  SyntheticSeries series;
  try {
    series = generate(spec);
  } catch (const Error& e) {
    throw Failure{kExitUsage, e.what()};
  }

  const json meta = {{"rng", std::string(kRngAlgorithm)},
                     {"seed", spec.seed},
                     {"n", spec.n},
                     {"obs_sigma2", spec.obs_sigma2},
                     {"segment_bounds", spec.segment_bounds},
                     {"segment_levels", spec.segment_levels}};
  err << "generate: " << meta.dump() << '\n';

  std::ostringstream csv;
  write_series_csv(csv, series.y, series.truth);
  if (o.out.empty() || o.out == "-") {
    out << csv.str();
  } else {
    write_file(o.out, csv.str());
  }
  if (!o.meta.empty()) write_file(o.meta, meta.dump(2) + "\n");
  return kExitOk;
}

// --------------------------------------------------------------------- fit

struct FitOptions {
  std::string in;
  std::optional<std::string> col;
  std::vector<std::string> presets;
  std::optional<std::string> model;
  bool free_shape = false;
  std::optional<std::string> config;
  std::optional<std::size_t> grid_nodes;
  std::optional<double> grid_span;
  std::optional<int> budget;
  std::optional<int> restarts;
  std::optional<std::uint64_t> seed;
  std::string bands;
  std::string svg;
  std::string table_csv;
};

/// Settings after merging defaults, config file and flags.
struct FitConfig {
  std::string col;
  std::vector<std::string> presets;
  std::optional<json> model;
  bool free_shape = false;
  std::size_t grid_nodes = 800;
  double grid_span = 4.0;
  int budget = 400;
  int restarts = 3;
  std::uint64_t seed = 1;
};

template <class T>
void take(const json& cfg, const char* key, T& target) {
  if (!cfg.contains(key)) return;
  try {
    target = cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Failure{kExitUsage, std::string("config key '") + key + "': " + e.what()};
  }
}

FitConfig merge_config(const FitOptions& o) {
  FitConfig c;
  if (o.config) {
    const json cfg = load_json_arg(*o.config, "config");
    if (!cfg.is_object()) throw Failure{kExitUsage, "config must be a JSON object"};
    take(cfg, "col", c.col);
    take(cfg, "presets", c.presets);
    take(cfg, "free_shape", c.free_shape);
    take(cfg, "grid_nodes", c.grid_nodes);
    take(cfg, "grid_span", c.grid_span);
    take(cfg, "budget", c.budget);
    take(cfg, "restarts", c.restarts);
    take(cfg, "seed", c.seed);
    if (cfg.contains("model")) c.model = cfg.at("model");
  }
  if (o.col) c.col = *o.col;
  if (!o.presets.empty()) c.presets = o.presets;
  if (o.model) c.model = load_json_arg(*o.model, "model");
  if (o.free_shape) c.free_shape = true;
  if (o.grid_nodes) c.grid_nodes = *o.grid_nodes;
  if (o.grid_span) c.grid_span = *o.grid_span;
  if (o.budget) c.budget = *o.budget;
  if (o.restarts) c.restarts = *o.restarts;
  if (o.seed) c.seed = *o.seed;
  if (c.presets.empty() && !c.model) c.presets = {"gaussian"};
  return c;
}

json config_to_json(const FitConfig& c) {
  json j = {{"col", c.col},          {"presets", c.presets},     {"free_shape", c.free_shape},
            {"grid_nodes", c.grid_nodes}, {"grid_span", c.grid_span}, {"budget", c.budget},
            {"restarts", c.restarts}, {"seed", c.seed}};
  if (c.model) j["model"] = *c.model;
  return j;
}

std::vector<FitSpec> build_specs(const FitConfig& c) {
  std::vector<FitSpec> specs;
  try {
    for (const std::string& name : expand_preset_names(c.presets)) specs.push_back(preset_spec(name));
    if (c.model) {
      FitSpec spec;
      spec.model = noise_model_from_json(*c.model);
      spec.name = "model:" + describe(spec.model);
      spec.dispersion_free = has_dispersion(spec.model);
      spec.shape_free = c.free_shape && !std::holds_alternative<Gaussian>(spec.model);
      specs.push_back(std::move(spec));
    }
    for (FitSpec& spec : specs) {
      spec.grid_nodes = c.grid_nodes;
      spec.grid_span = c.grid_span;
      spec.budget = c.budget;
      spec.restarts = c.restarts;
      spec.seed = c.seed;
      validate(spec);
    }
  } catch (const Error& e) {
    throw Failure{kExitUsage, e.what()};
  } catch (const json::exception& e) {
    throw Failure{kExitUsage, std::string("model: ") + e.what()};
  }
  return specs;
}

std::vector<double> load_series(const std::string& path, const std::string& col) {
  std::istringstream in(read_file(path));
  try {
    return numeric_column(read_csv(in), col);
  } catch (const std::invalid_argument& e) {
    throw Failure{kExitIo, path + ": " + e.what()};
  }
}

std::string bands_svg(const std::vector<double>& y, const PosteriorBands& bands,
                      const std::string& title) {
  static const char* kColors[7] = {"#9ecae1", "#4292c6", "#08519c", "#d7301f",
                                   "#08519c", "#4292c6", "#9ecae1"};
  Panel panel{title, "n", "value", {}};
  std::vector<double> n(y.size());
  for (std::size_t i = 0; i < n.size(); ++i) n[i] = static_cast<double>(i + 1);
  panel.series.push_back({n, y, "#999999", 0.6});
  for (std::size_t k = 0; k < 7; ++k) {
    std::vector<double> v(bands.bands.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = bands.bands[i][k];
    panel.series.push_back({n, std::move(v), kColors[k], k == 3 ? 1.6 : 1.0});
  }
  return render_svg({panel}, 900, 360);
}

int cmd_fit(const FitOptions& o, std::ostream& out, std::ostream& err) {
  const FitConfig config = merge_config(o);
  err << "fit: " << config_to_json(config).dump() << '\n';
  const std::vector<FitSpec> specs = build_specs(config);
  const std::vector<double> y = load_series(o.in, config.col);

  ComparisonTable table;
  try {
    table = compare(y, specs);
  } catch (const Error& e) {
    throw Failure{kExitUsage, e.what()};
  }
  out << table.to_text();

  bool zero_evidence = false;
  for (const ComparisonRow& row : table.rows) {
    if (!row.result) {
      err << "fit " << row.name << " failed: " << row.error << '\n';
      zero_evidence = zero_evidence || is_zero_evidence(row.error);
    } else if (!row.result->converged) {
      err << "fit " << row.name << ": optimizer did not converge within budget (" << row.result->evals
          << " evaluations)\n";
    }
  }
  const ComparisonRow& best = table.rows.front();
  if (!best.result) {
    throw Failure{kExitNumeric, zero_evidence ? kGridHint : "no model could be fitted"};
  }

  if (!o.table_csv.empty()) write_file(o.table_csv, table.to_csv());
  if (o.bands.empty() && o.svg.empty()) return kExitOk;

  PosteriorBands bands;
  try {
    const Grid grid = default_grid(y, config.grid_nodes, config.grid_span);
    const NgModel model{best.result->model, best.result->obs_sigma2, grid};
    const NgRunResult run = ng_run(y, model, diffuse_init(grid, y));
    bands = posterior_bands(run.smoothed);
  } catch (const Error& e) {
    throw Failure{kExitNumeric, e.code() == ErrorCode::kZeroEvidence ? kGridHint : e.what()};
  }
  if (!o.bands.empty()) {
    std::ostringstream csv;
    write_bands_csv(csv, bands.bands);
    write_file(o.bands, csv.str());
  }
  if (!o.svg.empty()) write_file(o.svg, bands_svg(y, bands, best.name));
  return kExitOk;
}

// --------------------------------------------------------------- influence

struct InfluenceOptions {
  std::vector<std::string> presets;
  std::optional<std::string> model;
  double dispersion = 1.0;
  double x_min = -5.0;
  double x_max = 5.0;
  std::string out;
};

int cmd_influence(const InfluenceOptions& o, std::ostream&, std::ostream& err) {
  if (!(o.x_max > o.x_min)) throw Failure{kExitUsage, "--x-max must exceed --x-min"};
  if (!(o.dispersion > 0.0)) throw Failure{kExitUsage, "--dispersion must be positive"};

  std::vector<std::pair<std::string, NoiseModel>> models;
  try {
    for (const std::string& name : expand_preset_names(o.presets))
      models.emplace_back(name, display_model(name, o.dispersion));
    if (o.model) {
      NoiseModel m = noise_model_from_json(load_json_arg(*o.model, "model"));
      models.emplace_back(describe(m), m);
    }
    for (const auto& [name, m] : models) validate(m);
  } catch (const Error& e) {
    throw Failure{kExitUsage, e.what()};
  } catch (const json::exception& e) {
    throw Failure{kExitUsage, std::string("model: ") + e.what()};
  }
  if (models.empty()) throw Failure{kExitUsage, "give at least one --preset or --model"};
  err << "influence: " << models.size() << " model(s) on [" << o.x_min << ", " << o.x_max << "]\n";

  // 512 samples; the one nearest the origin is snapped onto it so that a
  // kink at 0 shows up as a gap.
  const double step = (o.x_max - o.x_min) / (kInfluencePoints - 1);
  std::vector<double> x(kInfluencePoints);
  for (int i = 0; i < kInfluencePoints; ++i) x[i] = o.x_min + step * i;
  if (o.x_min < 0.0 && o.x_max > 0.0) {
    const auto nearest = static_cast<std::size_t>(std::lround(-o.x_min / step));
    x[nearest] = 0.0;
  }

  static const char* kPalette[] = {"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  Panel dens{"density", "x", "p(x)", {}};
  Panel infl{"influence", "x", "-d log p / dx", {}};
  for (std::size_t k = 0; k < models.size(); ++k) {
    const NoiseModel& m = models[k].second;
    std::vector<double> d(x.size()), f(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      d[i] = density(m, x[i]);
      try {
        f[i] = influence(m, x[i]);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kUndefinedAt) throw Failure{kExitNumeric, e.what()};
        f[i] = std::nan("");
      }
    }
    const char* color = kPalette[k % std::size(kPalette)];
    dens.series.push_back({x, std::move(d), color, 1.4});
    infl.series.push_back({x, std::move(f), color, 1.4});
    err << "  " << color << "  " << models[k].first << '\n';
  }
  write_file(o.out, render_svg({dens, infl}));
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trend estimation with non-Gaussian system noise", "ngtrend"};
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* generate_cmd = app.add_subcommand("generate", "Write a synthetic jump series as CSV");
  generate_cmd->add_option("--n", gen.n, "Series length (default 500)");
  generate_cmd->add_option("--seed", gen.seed, "RNG seed (default 42)");
  generate_cmd->add_option("--sigma2", gen.sigma2, "Observation noise variance (default 1)");
  generate_cmd->add_option("--bounds", gen.bounds, "1-based segment bounds, first 1 and last n")
      ->delimiter(',');
  generate_cmd->add_option("--levels", gen.levels, "One level per segment")->delimiter(',');
  generate_cmd->add_option("--out", gen.out, "Output CSV (default stdout)");
  generate_cmd->add_option("--meta", gen.meta, "Also write generator metadata as JSON");

  FitOptions fit_opts;
  auto* fit_cmd = app.add_subcommand("fit", "Fit trend models and export percentile bands");
  fit_cmd->add_option("--in", fit_opts.in, "Input CSV")->required();
  fit_cmd->add_option("--col", fit_opts.col, "Value column name or 0-based index");
  fit_cmd->add_option("--preset", fit_opts.presets, "Model preset, repeatable (or 'all')");
  fit_cmd->add_option("--model", fit_opts.model, "Model JSON, inline or a file path");
  fit_cmd->add_flag("--free-shape", fit_opts.free_shape, "Estimate the shape of --model too");
  fit_cmd->add_option("--config", fit_opts.config, "JSON config file (flags take precedence)");
  fit_cmd->add_option("--grid-nodes", fit_opts.grid_nodes, "Grid size (default 800)");
  fit_cmd->add_option("--grid-span", fit_opts.grid_span, "Grid margin in data sd (default 4)");
  fit_cmd->add_option("--budget", fit_opts.budget, "Evaluations per restart (default 400)");
  fit_cmd->add_option("--restarts", fit_opts.restarts, "Optimizer restarts (default 3)");
  fit_cmd->add_option("--seed", fit_opts.seed, "Restart jitter seed (default 1)");
  fit_cmd->add_option("--bands", fit_opts.bands, "Percentile bands CSV of the AIC-best model");
  fit_cmd->add_option("--svg", fit_opts.svg, "Plot of data and bands");
  fit_cmd->add_option("--table-csv", fit_opts.table_csv, "Comparison table as CSV");

  InfluenceOptions infl;
  auto* influence_cmd = app.add_subcommand("influence", "Plot densities and influence functions");
  influence_cmd->add_option("--preset", infl.presets, "Model preset, repeatable");
  influence_cmd->add_option("--model", infl.model, "Model JSON, inline or a file path");
  influence_cmd->add_option("--dispersion", infl.dispersion, "Dispersion for presets (default 1)");
  influence_cmd->add_option("--x-min", infl.x_min, "Left end of the x range");
  influence_cmd->add_option("--x-max", infl.x_max, "Right end of the x range");
  influence_cmd->add_option("--out", infl.out, "Output SVG")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*generate_cmd) return cmd_generate(gen, out, err);
    if (*fit_cmd) return cmd_fit(fit_opts, out, err);
    return cmd_influence(infl, out, err);
  } catch (const Failure& f) {
    err << "error: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace ngtrend::cli
