#include "qudit/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "qudit/error.hpp"
#include "qudit/parallel.hpp"
#include "qudit/thermo.hpp"
#include "qudit/trace_io.hpp"
#include "qudit/units.hpp"
#include "qudit/universality.hpp"
#include "qudit/version.hpp"

namespace qudit {

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const RunConfig& config) : path_(path), out_(path) {
    if (!out_) throw Error(path.string() + ": cannot write output file");
    out_ << "# tool=qudit version=" << kVersion << "\n";
    out_ << "# config_hash=" << config_hash(config) << "\n";
    out_ << "# config_name=" << config.name << "\n";
  }

  CsvFile& comment(const std::string& text) {
    out_ << "# " << text << "\n";
    return *this;
  }

  CsvFile& row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
    return *this;
  }

  std::filesystem::path close() {
    out_.close();
    if (!out_) throw Error(path_.string() + ": write failed");
    return path_;
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

FieldSpec thermal_field(const RunConfig& c) { return FieldSpec::along(c.thermal.field_t, c.field_direction); }

ThermalGrid thermal_grid(const RunConfig& c) {
  ThermalGrid grid;
  grid.temperatures_k = c.thermal.temperatures();
  grid.field = thermal_field(c);
  return grid;
}

double drive_g(const SpinSystem& system, std::ostream& err) {
  if (const auto* p = std::get_if<SingleIonParams>(&system)) return p->g;
  const auto& d = std::get<DimerParams>(system);
  if (d.site1.g != d.site2.g) err << "warning: sites have different g; drive rates use site-1 g\n";
  return d.site1.g;
}

RabiMap build_rabi_map(const RunConfig& c, std::ostream& err) {
  const EigenSystem es = eigensolve(hamiltonian(c.system, c.field()));
  return rabi_map(es, total_spin(c.system), c.control.drive_direction, drive_g(c.system, err), c.control.convention);
}

struct Inputs {
  std::vector<DecayTrace> traces;
  std::vector<TraceFailure> failures;
};

Inputs collect_traces(const std::vector<std::filesystem::path>& data, const std::string& task) {
  if (data.empty()) throw MissingDataError(task + " needs --data <trace file or directory>");
  Inputs in;
  for (const auto& path : data) {
    std::error_code ec;
    if (std::filesystem::is_directory(path, ec)) {
      TraceBatch batch = ingest_trace_dir(path);
      std::move(batch.traces.begin(), batch.traces.end(), std::back_inserter(in.traces));
      std::move(batch.failures.begin(), batch.failures.end(), std::back_inserter(in.failures));
      continue;
    }
    try {
      in.traces.push_back(read_trace_file(path));
    } catch (const DataError& e) {
      in.failures.push_back({path.string(), e.what()});
    }
  }
  std::stable_sort(in.traces.begin(), in.traces.end(),
                   [](const DecayTrace& a, const DecayTrace& b) { return a.field_mt < b.field_mt; });
  return in;
}

void report_failures(const Inputs& in, std::ostream& err) {
  for (const auto& f : in.failures) err << "error: " << f.message << "\n";
}

CommandResult run_spectrum(const CommandContext& ctx, std::ostream& err) {
  const RunConfig& c = ctx.config;
  Spectrum s = powder_spectrum(c.system, c.ensemble, c.spectrum.spectrometer());
  if (c.spectrum.derivative) s = derivative_spectrum(s);
  for (const auto& w : s.warnings) err << "warning: " << w << "\n";
  CsvFile f(output_path(ctx.out_dir, "spectrum", c), c);
  f.comment(std::string("kind=") + to_string(s.kind));
  f.comment("nu_GHz=" + num(c.spectrum.frequency_ghz) + " T_K=" + num(c.spectrum.temperature_k) +
            " linewidth_mT=" + num(c.spectrum.linewidth_fwhm_mt));
  f.row({"B_mT", "amplitude"});
  for (std::size_t i = 0; i < s.field_t.size(); ++i) f.row({num(units::tesla_to_millitesla(s.field_t[i])), num(s.amplitude[i])});
  CommandResult r;
  r.files.push_back(f.close());
  r.summary = "points=" + std::to_string(s.field_t.size()) + " kind=" + to_string(s.kind) +
              " warnings=" + std::to_string(s.warnings.size());
  return r;
}

CommandResult run_heatcap(const CommandContext& ctx) {
  const RunConfig& c = ctx.config;
  const ThermalGrid grid = thermal_grid(c);
  const std::vector<double> magnetic = heat_capacity(c.system, c.ensemble, grid);
  std::vector<double> total;
  if (!ctx.data.empty()) {
    std::ifstream in(ctx.data.front());
    if (!in) throw MissingDataError(ctx.data.front().string() + ": cannot open baseline table");
    const BaselineTable table = BaselineTable::read_csv(in, ctx.data.front().string());
    total = add_lattice_baseline(grid.temperatures_k, magnetic, table);
  }
  CsvFile f(output_path(ctx.out_dir, "heatcap", c), c);
  f.comment("B_T=" + num(grid.field.magnitude_t));
  if (total.empty()) {
    f.row({"T_K", "c_over_R"});
  } else {
    f.comment("baseline=" + ctx.data.front().string());
    f.row({"T_K", "c_over_R_magnetic", "c_over_R_total"});
  }
  std::size_t peak = 0;
  for (std::size_t i = 0; i < magnetic.size(); ++i) {
    if (magnetic[i] > magnetic[peak]) peak = i;
    if (total.empty()) {
      f.row({num(grid.temperatures_k[i]), num(magnetic[i])});
    } else {
      f.row({num(grid.temperatures_k[i]), num(magnetic[i]), num(total[i])});
    }
  }
  CommandResult r;
  r.files.push_back(f.close());
  r.summary = "points=" + std::to_string(magnetic.size()) + " peak_T_K=" + num(grid.temperatures_k[peak]) +
              " peak_c_over_R=" + num(magnetic[peak]);
  return r;
}

CommandResult run_chi(const CommandContext& ctx) {
  const RunConfig& c = ctx.config;
  ThermalGrid grid = thermal_grid(c);
  const std::vector<double> chi_t = chi_t_curve(c.system, c.ensemble, grid, c.thermal.probe_field_t);
  CsvFile f(output_path(ctx.out_dir, "chi", c), c);
  f.comment("probe_B_T=" + num(c.thermal.probe_field_t));
  f.row({"T_K", "chiT_emu_K_per_mol"});
  for (std::size_t i = 0; i < chi_t.size(); ++i) f.row({num(grid.temperatures_k[i]), num(chi_t[i])});
  CommandResult r;
  r.files.push_back(f.close());
  r.summary = "points=" + std::to_string(chi_t.size()) + " chiT_at_T_max=" + num(chi_t.back());
  return r;
}

CommandResult run_levels(const CommandContext& ctx) {
  const RunConfig& c = ctx.config;
  const Eigen::VectorXd e = eigenvalues(hamiltonian(c.system, c.field()));
  CsvFile f(output_path(ctx.out_dir, "levels", c), c);
  f.comment("B_T=" + num(c.field_t));
  f.row({"index", "energy_GHz", "energy_K"});
  for (Eigen::Index i = 0; i < e.size(); ++i) f.row({std::to_string(i + 1), num(e(i)), num(units::ghz_to_kelvin(e(i)))});
  CommandResult r;
  r.files.push_back(f.close());
  r.summary = "levels=" + std::to_string(e.size()) + " spread_K=" + num(units::ghz_to_kelvin(e(e.size() - 1) - e(0)));
  return r;
}

CommandResult run_rabi_map(const CommandContext& ctx, std::ostream& err) {
  const RunConfig& c = ctx.config;
  const RabiMap map = build_rabi_map(c, err);
  CsvFile f(output_path(ctx.out_dir, "rabi-map", c), c);
  f.comment("B_T=" + num(c.field_t) + " levels are 1-based, ascending energy");
  f.row({"n", "m", "freq_GHz", "rate_MHz_per_mT"});
  int above = 0;
  double max_rate = 0.0;
  for (Eigen::Index n = 0; n < map.dimension(); ++n) {
    for (Eigen::Index m = n + 1; m < map.dimension(); ++m) {
      f.row({std::to_string(n + 1), std::to_string(m + 1), num(map.freq(n, m)), num(map.rate(n, m))});
      if (map.rate(n, m) > c.control.threshold_mhz_per_mt) ++above;
      max_rate = std::max(max_rate, map.rate(n, m));
    }
  }
  CommandResult r;
  r.files.push_back(f.close());
  r.summary = "levels=" + std::to_string(map.dimension()) + " pairs_above_threshold=" + std::to_string(above) +
              " max_rate_MHz_per_mT=" + num(max_rate);
  return r;
}

CommandResult run_universality(const CommandContext& ctx, std::ostream& err) {
  const RunConfig& c = ctx.config;
  const RabiMap map = build_rabi_map(c, err);
  const EdgeSet edges =
      addressable_edges(map, allowed_edges(map, c.control.threshold_mhz_per_mt), c.control.addressing_resolution_mhz);
  const ReachabilityResult closure = graph_closure(edges);

  std::string rank_note;
  if (c.control.lie_rank) {
    int rank = 0;
    try {
      rank = lie_algebra_rank(edges, ctx.allow_large_rank);
    } catch (const DomainError& e) {
      throw ConfigError("control.lie_rank", std::string(e.what()) + " (pass --allow-large-rank to force)");
    }
    int expected = 0;
    for (const auto& comp : closure.components) {
      const int k = static_cast<int>(comp.size());
      expected += k * k - 1;
    }
    rank_note = " lie_rank=" + std::to_string(rank) + " expected_rank=" + std::to_string(expected);
  }

  CsvFile f(output_path(ctx.out_dir, "universality", c), c);
  f.comment("B_T=" + num(c.field_t) + " threshold_MHz_per_mT=" + num(c.control.threshold_mhz_per_mt) +
            " addressing_resolution_MHz=" + num(c.control.addressing_resolution_mhz) +
            " edges=" + std::to_string(edges.edges.size()));
  std::vector<std::string> header{"n"};
  for (int m = 0; m < edges.dimension; ++m) header.push_back(std::to_string(m + 1));
  f.row(header);
  for (int n = 0; n < edges.dimension; ++n) {
    std::vector<std::string> cells{std::to_string(n + 1)};
    for (int m = 0; m < edges.dimension; ++m) cells.push_back(closure.reachable[n][m] ? "1" : "0");
    f.row(cells);
  }
  CommandResult r;
  r.files.push_back(f.close());
  r.summary = std::string("universal=") + (closure.universal ? "true" : "false") +
              " components=" + std::to_string(closure.components.size()) + rank_note;
  return r;
}

CommandResult run_fit_decay(const CommandContext& ctx, std::ostream& err) {
  const RunConfig& c = ctx.config;
  const Inputs in = collect_traces(ctx.data, "fit-decay");
  report_failures(in, err);
  if (in.traces.empty()) throw DataError("fit-decay", 0, "no readable trace among the inputs");

  struct Outcome {
    DecayFit fit;
    bool ok = true;
    std::string message;
  };
  const std::vector<Outcome> outcomes = parallel_map(in.traces.size(), c.ensemble.threads, [&](std::size_t i) {
    try {
      return Outcome{fit_decay(in.traces[i], std::nullopt, c.fit), true, {}};
    } catch (const FitError& e) {
      return Outcome{e.best(), false, std::string(e.what()) + " (" + e.diagnostic() + ")"};
    }
  });

  CsvFile f(output_path(ctx.out_dir, "fit-decay", c), c);
  f.comment("model=y0+a*exp(-n*t/t_decay)*(1+k*exp(-lambda*t)*cos(2*pi*nu*t+phi)); n=2 two-pulse, n=1 three-pulse");
  std::vector<std::string> header{"source", "kind", "field_mT", "status"};
  for (int p = 0; p < DecayParams::kCount; ++p) {
    header.emplace_back(DecayParams::name(p));
    header.push_back(std::string(DecayParams::name(p)) + "_err");
  }
  for (const char* h : {"residual_norm", "iterations", "flags"}) header.emplace_back(h);
  f.row(header);

  std::vector<std::pair<double, DecayFit>> good;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const DecayTrace& t = in.traces[i];
    const Outcome& o = outcomes[i];
    if (o.ok) {
      good.emplace_back(t.field_mt, o.fit);
    } else {
      ++failed;
      err << "error: " << t.source << ": " << o.message << "\n";
    }
    std::vector<std::string> cells{t.source, to_string(t.kind), num(t.field_mt), o.ok ? "ok" : "failed"};
    for (int p = 0; p < DecayParams::kCount; ++p) {
      cells.push_back(num(o.fit.params[p]));
      cells.push_back(num(o.fit.errors[p]));
    }
    std::string flags;
    for (const auto& fl : o.fit.flags) flags += (flags.empty() ? "" : ";") + fl;
    cells.push_back(num(o.fit.residual_norm));
    cells.push_back(std::to_string(o.fit.iterations));
    cells.push_back(flags);
    f.row(cells);
  }
  CommandResult r;
  r.files.push_back(f.close());

  if (good.size() >= 2) {
    CsvFile s(output_path(ctx.out_dir, "fit-decay-sweep", c), c);
    s.row({"field_mT", "t_decay_us", "t_decay_err_us", "a", "a_err", "nu_MHz", "nu_err_MHz"});
    for (const SweepRow& row : field_sweep_summary(good)) {
      s.row({num(row.field_mt), num(row.t_decay_us), num(row.t_decay_err_us), num(row.a), num(row.a_err),
             num(row.nu_mhz), num(row.nu_err_mhz)});
    }
    r.files.push_back(s.close());
  }

  r.summary = "traces=" + std::to_string(in.traces.size()) + " fitted=" + std::to_string(good.size()) +
              " failed=" + std::to_string(failed) + " rejected=" + std::to_string(in.failures.size());
  if (good.empty()) {
    r.code = ExitCode::fit_failed;
  } else if (failed > 0 || !in.failures.empty()) {
    r.code = ExitCode::partial;
  }
  return r;
}

CommandResult run_nutation(const CommandContext& ctx, std::ostream& err) {
  const RunConfig& c = ctx.config;
  Inputs in = collect_traces(ctx.data, "nutation");
  if (in.traces.empty()) {
    report_failures(in, err);
    throw DataError("nutation", 0, "no readable trace among the inputs");
  }

  std::vector<std::pair<const DecayTrace*, NutationResult>> results;
  for (const auto& t : in.traces) {
    try {
      results.emplace_back(&t, nutation_fft(t, c.nutation));
    } catch (const ValidationError& e) {
      in.failures.push_back({t.source, e.what()});
    }
  }
  report_failures(in, err);
  if (results.empty()) throw DataError("nutation", 0, "no trace could be transformed");

  CsvFile peaks(output_path(ctx.out_dir, "nutation", c), c);
  peaks.comment(std::string("nitrogen=") + to_string(c.nutation.nitrogen) + " window=" + to_string(c.nutation.window));
  peaks.row({"source", "field_mT", "freq_MHz", "magnitude", "label", "candidates", "resolution_MHz"});
  CsvFile spectrum(output_path(ctx.out_dir, "nutation-spectrum", c), c);
  spectrum.row({"source", "freq_MHz", "magnitude"});

  std::size_t n_peaks = 0;
  std::size_t ambiguous = 0;
  for (const auto& [trace, res] : results) {
    for (const auto& note : res.notes) err << "note: " << trace->source << ": " << note << "\n";
    if (res.ambiguous()) ++ambiguous;
    for (const auto& p : res.peaks) {
      std::string cands;
      for (PeakLabel l : p.candidates) cands += (cands.empty() ? "" : ";") + std::string(to_string(l));
      peaks.row({trace->source, num(trace->field_mt), num(p.freq_mhz), num(p.magnitude), to_string(p.label), cands,
                 num(res.resolution_mhz)});
    }
    n_peaks += res.peaks.size();
    for (std::size_t i = 0; i < res.freq_mhz.size(); ++i) {
      spectrum.row({trace->source, num(res.freq_mhz[i]), num(res.magnitude[i])});
    }
  }
  CommandResult r;
  r.files.push_back(peaks.close());
  r.files.push_back(spectrum.close());
  r.summary = "traces=" + std::to_string(results.size()) + " peaks=" + std::to_string(n_peaks) +
              " ambiguous=" + std::to_string(ambiguous) + " resolution_MHz=" + num(results.front().second.resolution_mhz);
  if (!in.failures.empty()) r.code = ExitCode::partial;
  return r;
}

CommandResult dispatch(const std::string& name, const CommandContext& ctx, std::ostream& err) {
  if (name == "spectrum") return run_spectrum(ctx, err);
  if (name == "heatcap") return run_heatcap(ctx);
  if (name == "chi") return run_chi(ctx);
  if (name == "levels") return run_levels(ctx);
  if (name == "rabi-map") return run_rabi_map(ctx, err);
  if (name == "universality") return run_universality(ctx, err);
  if (name == "fit-decay") return run_fit_decay(ctx, err);
  if (name == "nutation") return run_nutation(ctx, err);
  throw ConfigError("subcommand", "unknown subcommand '" + name + "'");
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{"spectrum", "heatcap",      "chi",       "levels",
                                              "rabi-map", "universality", "fit-decay", "nutation"};
  return names;
}

std::filesystem::path output_path(const std::filesystem::path& out_dir, const std::string& task,
                                  const RunConfig& config) {
  return out_dir / (task + "_" + config.name + "_" + config_hash(config) + ".csv");
}

CommandResult run_subcommand(const std::string& name, const CommandContext& context, std::ostream& out,
                             std::ostream& err) {
  auto fail = [&](ExitCode code, const std::string& what) {
    err << "qudit " << name << ": " << what << "\n";
    CommandResult r;
    r.code = code;
    return r;
  };
  CommandResult r;
  try {
    std::error_code ec;
    std::filesystem::create_directories(context.out_dir, ec);
    if (ec) throw Error(context.out_dir.string() + ": cannot create output directory: " + ec.message());
    r = dispatch(name, context, err);
  } catch (const ConfigError& e) {
    return fail(ExitCode::usage, e.what());
  } catch (const MissingDataError& e) {
    return fail(ExitCode::missing_data, e.what());
  } catch (const DataError& e) {
    return fail(ExitCode::malformed_data, e.what());
  } catch (const RangeError& e) {
    return fail(ExitCode::malformed_data, e.what());
  } catch (const FitError& e) {
    return fail(ExitCode::fit_failed, e.what());
  } catch (const std::exception& e) {
    return fail(ExitCode::failure, e.what());
  }
  out << r.summary << "\n";
  return r;
}

}  // namespace qudit
