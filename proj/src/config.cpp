#include "qudit/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "qudit/error.hpp"
#include "qudit/thermo.hpp"

namespace qudit {

namespace detail {
// Generated from presets/*.json at build time.
const std::vector<std::pair<std::string_view, std::string_view>>& preset_table();
}  // namespace detail

namespace {

using json = nlohmann::json;

enum class Check { any, positive, non_negative };

// Strict reader for one JSON object: remembers which keys were requested so
// that leftovers can be reported, with a hint when only the unit is wrong.
class Block {
 public:
  Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(display(path_), "expected an object");
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key, const std::string& stem) {
    known_.push_back({key, stem});
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  double number(const std::string& key, const std::string& stem, double fallback, Check check = Check::any) {
    const json* v = find(key, stem);
    if (v == nullptr) return fallback;
    if (!v->is_number()) throw ConfigError(key_path(key), "expected a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) throw ConfigError(key_path(key), "must be finite");
    if (check == Check::positive && !(x > 0.0)) throw ConfigError(key_path(key), "must be positive");
    if (check == Check::non_negative && !(x >= 0.0)) throw ConfigError(key_path(key), "must be non-negative");
    return x;
  }

  int integer(const std::string& key, int fallback, int minimum) {
    const json* v = find(key, "");
    if (v == nullptr) return fallback;
    if (!v->is_number_integer()) throw ConfigError(key_path(key), "expected an integer");
    const auto x = v->get<long long>();
    if (x < minimum || x > 100000000) {
      throw ConfigError(key_path(key), "must lie in [" + std::to_string(minimum) + ", 100000000]");
    }
    return static_cast<int>(x);
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    const json* v = find(key, "");
    if (v == nullptr) return fallback;
    if (!v->is_number_unsigned()) throw ConfigError(key_path(key), "expected a non-negative integer");
    return v->get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = find(key, "");
    if (v == nullptr) return fallback;
    if (!v->is_boolean()) throw ConfigError(key_path(key), "expected true or false");
    return v->get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const json* v = find(key, "");
    if (v == nullptr) return fallback;
    if (!v->is_string()) throw ConfigError(key_path(key), "expected a string");
    return v->get<std::string>();
  }

  Vec3 vector3(const std::string& key, const std::string& stem, const Vec3& fallback, bool nonzero) {
    const json* v = find(key, stem);
    if (v == nullptr) return fallback;
    if (!v->is_array() || v->size() != 3) throw ConfigError(key_path(key), "expected an array of three numbers");
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
      const json& e = (*v)[static_cast<std::size_t>(i)];
      if (!e.is_number() || !std::isfinite(e.get<double>())) {
        throw ConfigError(key_path(key), "expected an array of three finite numbers");
      }
      out(i) = e.get<double>();
    }
    if (nonzero && !(out.norm() > 0.0)) throw ConfigError(key_path(key), "must be a non-zero vector");
    return out;
  }

  /// Nested object, or nullptr when absent.
  const json* object(const std::string& key) {
    const json* v = find(key, "");
    if (v != nullptr && !v->is_object()) throw ConfigError(key_path(key), "expected an object");
    return v;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      const bool known = std::any_of(known_.begin(), known_.end(), [&](const Known& k) { return k.key == key; });
      if (known) continue;
      for (const auto& k : known_) {
        if (k.stem.empty()) continue;
        if (key == k.stem) throw ConfigError(key_path(key), "missing unit suffix (expected '" + k.key + "')");
        if (key.rfind(k.stem + "_", 0) == 0) {
          throw ConfigError(key_path(key), "unsupported unit suffix (expected '" + k.key + "')");
        }
      }
      throw ConfigError(key_path(key), "unknown key");
    }
  }

 private:
  static std::string display(const std::string& path) { return path.empty() ? "(root)" : path; }

  struct Known {
    std::string key;
    std::string stem;
  };
  const json& j_;
  std::string path_;
  std::vector<Known> known_;
};

template <class Fn>
void translate(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    throw ConfigError(path, e.what());
  } catch (const InvalidSpinError& e) {
    throw ConfigError(path, e.what());
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
}

SingleIonParams read_site(const json& j, const std::string& path) {
  Block b(j, path);
  SingleIonParams p;
  p.d_zfs_k = b.number("D_K", "D", p.d_zfs_k);
  p.e_zfs_k = b.number("E_K", "E", p.e_zfs_k);
  p.g = b.number("g", "", p.g, Check::positive);
  p.s = b.number("s", "", p.s, Check::positive);
  b.finish();
  translate(path, [&] { p.validate(); });
  return p;
}

SpinSystem read_system(const json& j) {
  Block b(j, "system");
  const std::string type = b.text("type", "");
  const json* site1 = b.object("site1");
  if (site1 == nullptr) throw ConfigError("system.site1", "required");
  if (type == "single_ion") {
    SingleIonParams p = read_site(*site1, "system.site1");
    b.finish();
    return p;
  }
  if (type == "dimer") {
    DimerParams d;
    d.site1 = read_site(*site1, "system.site1");
    const json* site2 = b.object("site2");
    if (site2 == nullptr) throw ConfigError("system.site2", "required for a dimer");
    d.site2 = read_site(*site2, "system.site2");
    d.j_exchange_k = b.number("J_K", "J", 0.0);
    const Vec3 euler = b.vector3("site2_euler_rad", "site2_euler", Vec3::Zero(), false);
    d.axes_rotation = {euler(0), euler(1), euler(2)};
    b.finish();
    translate("system", [&] { d.validate(); });
    return d;
  }
  throw ConfigError("system.type", "expected 'single_ion' or 'dimer'");
}

json site_json(const SingleIonParams& p) {
  return json{{"D_K", p.d_zfs_k}, {"E_K", p.e_zfs_k}, {"g", p.g}, {"s", p.s}};
}

json vec_json(const Vec3& v) { return json::array({v(0), v(1), v(2)}); }

const char* spacing_name(Spacing s) { return s == Spacing::log ? "log" : "linear"; }
const char* convention_name(RabiConvention c) { return c == RabiConvention::full ? "full" : "half"; }

}  // namespace

SpectrometerSpec SpectrumSettings::spectrometer() const {
  SpectrometerSpec spec = SpectrometerSpec::uniform(frequency_ghz, b_min_t, b_max_t, b_step_t);
  spec.linewidth_fwhm_mt = linewidth_fwhm_mt;
  spec.temperature_k = temperature_k;
  spec.search_step_t = search_step_t;
  spec.validate();
  return spec;
}

std::vector<double> ThermalSettings::temperatures() const {
  const ThermalGrid g = spacing == Spacing::log ? ThermalGrid::log_spaced(t_min_k, t_max_k, points, FieldSpec{})
                                                : ThermalGrid::linear_spaced(t_min_k, t_max_k, points, FieldSpec{});
  return g.temperatures_k;
}

RunConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("(root)", std::string("malformed JSON: ") + e.what());
  }
  Block root(doc, "");
  RunConfig c;
  c.name = root.text("name", c.name);
  if (c.name.empty() || c.name.find_first_of("/\\ ") != std::string::npos) {
    throw ConfigError("name", "must be a non-empty word without spaces or slashes");
  }
  const json* system = root.object("system");
  if (system == nullptr) throw ConfigError("system", "required");
  c.system = read_system(*system);

  if (const json* j = root.object("field")) {
    Block b(*j, "field");
    c.field_t = b.number("B_T", "B", c.field_t, Check::non_negative);
    c.field_direction = b.vector3("direction", "", c.field_direction, true);
    b.finish();
  }
  if (const json* j = root.object("ensemble")) {
    Block b(*j, "ensemble");
    auto& e = c.ensemble;
    e.n_orientations = b.integer("orientations", e.n_orientations, 1);
    e.n_strain_samples = b.integer("strain_samples", e.n_strain_samples, 1);
    e.strain.d_fwhm_fraction = b.number("strain_D_fwhm_frac", "strain_D_fwhm", e.strain.d_fwhm_fraction, Check::non_negative);
    e.strain.e_fwhm_fraction = b.number("strain_E_fwhm_frac", "strain_E_fwhm", e.strain.e_fwhm_fraction, Check::non_negative);
    e.strain.j_fwhm_k = b.number("strain_J_fwhm_K", "strain_J_fwhm", e.strain.j_fwhm_k, Check::non_negative);
    b.finish();
  }
  if (const json* j = root.object("spectrometer")) {
    Block b(*j, "spectrometer");
    auto& s = c.spectrum;
    s.frequency_ghz = b.number("nu_GHz", "nu", s.frequency_ghz, Check::positive);
    s.b_min_t = b.number("B_min_T", "B_min", s.b_min_t, Check::non_negative);
    s.b_max_t = b.number("B_max_T", "B_max", s.b_max_t, Check::positive);
    s.b_step_t = b.number("B_step_T", "B_step", s.b_step_t, Check::positive);
    s.linewidth_fwhm_mt = b.number("linewidth_mT", "linewidth", s.linewidth_fwhm_mt, Check::positive);
    s.temperature_k = b.number("T_K", "T", s.temperature_k, Check::positive);
    s.search_step_t = b.number("search_step_T", "search_step", s.search_step_t, Check::positive);
    s.derivative = b.boolean("derivative", s.derivative);
    b.finish();
    if (!(s.b_max_t > s.b_min_t)) throw ConfigError("spectrometer.B_max_T", "must exceed B_min_T");
    translate("spectrometer", [&] { (void)s.spectrometer(); });
  }
  if (const json* j = root.object("thermal")) {
    Block b(*j, "thermal");
    auto& t = c.thermal;
    t.t_min_k = b.number("T_min_K", "T_min", t.t_min_k, Check::positive);
    t.t_max_k = b.number("T_max_K", "T_max", t.t_max_k, Check::positive);
    t.points = b.integer("points", t.points, 1);
    const std::string spacing = b.text("spacing", spacing_name(t.spacing));
    if (spacing == "log") {
      t.spacing = Spacing::log;
    } else if (spacing == "linear") {
      t.spacing = Spacing::linear;
    } else {
      throw ConfigError("thermal.spacing", "expected 'log' or 'linear'");
    }
    t.field_t = b.number("B_T", "B", t.field_t, Check::non_negative);
    t.probe_field_t = b.number("probe_B_T", "probe_B", t.probe_field_t, Check::positive);
    b.finish();
    if (!(t.t_max_k >= t.t_min_k)) throw ConfigError("thermal.T_max_K", "must be at least T_min_K");
  }
  if (const json* j = root.object("control")) {
    Block b(*j, "control");
    auto& k = c.control;
    k.drive_direction = b.vector3("drive_direction", "", k.drive_direction, true);
    k.threshold_mhz_per_mt = b.number("threshold_MHz_per_mT", "threshold", k.threshold_mhz_per_mt, Check::non_negative);
    k.addressing_resolution_mhz =
        b.number("addressing_resolution_MHz", "addressing_resolution", k.addressing_resolution_mhz, Check::non_negative);
    const std::string conv = b.text("rabi_convention", convention_name(k.convention));
    if (conv == "full") {
      k.convention = RabiConvention::full;
    } else if (conv == "half") {
      k.convention = RabiConvention::half;
    } else {
      throw ConfigError("control.rabi_convention", "expected 'full' or 'half'");
    }
    k.lie_rank = b.boolean("lie_rank", k.lie_rank);
    b.finish();
  }
  if (const json* j = root.object("fit")) {
    Block b(*j, "fit");
    c.fit.max_iterations = b.integer("max_iterations", c.fit.max_iterations, 1);
    b.finish();
  }
  if (const json* j = root.object("nutation")) {
    Block b(*j, "nutation");
    auto& n = c.nutation;
    translate("nutation.window", [&] { n.window = parse_window(b.text("window", to_string(n.window))); });
    n.zero_pad_factor = b.integer("zero_pad", n.zero_pad_factor, 1);
    n.noise_floor_multiple = b.number("noise_floor_multiple", "", n.noise_floor_multiple, Check::non_negative);
    n.min_relative_height = b.number("min_relative_height", "", n.min_relative_height, Check::non_negative);
    translate("nutation.nitrogen", [&] { n.nitrogen = parse_nucleus(b.text("nitrogen", to_string(n.nitrogen))); });
    n.rabi_band_min_mhz = b.number("rabi_band_min_MHz", "rabi_band_min", n.rabi_band_min_mhz, Check::non_negative);
    n.rabi_band_max_mhz = b.number("rabi_band_max_MHz", "rabi_band_max", n.rabi_band_max_mhz, Check::non_negative);
    b.finish();
    translate("nutation", [&] { n.validate(); });
  }
  c.ensemble.seed = root.unsigned_integer("seed", c.ensemble.seed);
  c.ensemble.threads = root.integer("threads", c.ensemble.threads, 1);
  root.finish();
  translate("ensemble", [&] { c.ensemble.validate(); });
  return c;
}

std::string serialize_config(const RunConfig& c) {
  json system;
  if (const auto* p = std::get_if<SingleIonParams>(&c.system)) {
    system = {{"type", "single_ion"}, {"site1", site_json(*p)}};
  } else {
    const auto& d = std::get<DimerParams>(c.system);
    system = {{"type", "dimer"},
              {"site1", site_json(d.site1)},
              {"site2", site_json(d.site2)},
              {"J_K", d.j_exchange_k},
              {"site2_euler_rad", json::array({d.axes_rotation.alpha, d.axes_rotation.beta, d.axes_rotation.gamma})}};
  }
  const auto& e = c.ensemble;
  const auto& s = c.spectrum;
  const auto& t = c.thermal;
  const auto& k = c.control;
  const auto& n = c.nutation;
  json doc = {
      {"name", c.name},
      {"system", system},
      {"field", {{"B_T", c.field_t}, {"direction", vec_json(c.field_direction)}}},
      {"ensemble",
       {{"orientations", e.n_orientations},
        {"strain_samples", e.n_strain_samples},
        {"strain_D_fwhm_frac", e.strain.d_fwhm_fraction},
        {"strain_E_fwhm_frac", e.strain.e_fwhm_fraction},
        {"strain_J_fwhm_K", e.strain.j_fwhm_k}}},
      {"spectrometer",
       {{"nu_GHz", s.frequency_ghz},
        {"B_min_T", s.b_min_t},
        {"B_max_T", s.b_max_t},
        {"B_step_T", s.b_step_t},
        {"linewidth_mT", s.linewidth_fwhm_mt},
        {"T_K", s.temperature_k},
        {"search_step_T", s.search_step_t},
        {"derivative", s.derivative}}},
      {"thermal",
       {{"T_min_K", t.t_min_k},
        {"T_max_K", t.t_max_k},
        {"points", t.points},
        {"spacing", spacing_name(t.spacing)},
        {"B_T", t.field_t},
        {"probe_B_T", t.probe_field_t}}},
      {"control",
       {{"drive_direction", vec_json(k.drive_direction)},
        {"threshold_MHz_per_mT", k.threshold_mhz_per_mt},
        {"addressing_resolution_MHz", k.addressing_resolution_mhz},
        {"rabi_convention", convention_name(k.convention)},
        {"lie_rank", k.lie_rank}}},
      {"fit", {{"max_iterations", c.fit.max_iterations}}},
      {"nutation",
       {{"window", to_string(n.window)},
        {"zero_pad", n.zero_pad_factor},
        {"noise_floor_multiple", n.noise_floor_multiple},
        {"min_relative_height", n.min_relative_height},
        {"nitrogen", to_string(n.nitrogen)},
        {"rabi_band_min_MHz", n.rabi_band_min_mhz},
        {"rabi_band_max_MHz", n.rabi_band_max_mhz}}},
      {"seed", e.seed},
      {"threads", e.threads},
  };
  return doc.dump(2) + "\n";
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const RunConfig& config) {
  RunConfig canonical = config;
  canonical.ensemble.threads = 1;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(serialize_config(canonical))));
  return buf;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : detail::preset_table()) names.emplace_back(name);
  return names;
}

std::string preset_text(const std::string& name) {
  for (const auto& [n, text] : detail::preset_table()) {
    if (n == name) return std::string(text);
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("preset", "unknown preset '" + name + "' (available: " + known + ")");
}

std::string apply_overrides(std::string_view text, const std::vector<std::string>& overrides) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("(root)", std::string("malformed JSON: ") + e.what());
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(o, "override must look like key.path=value");
    const std::string path = o.substr(0, eq);
    const std::string value = o.substr(eq + 1);
    json parsed;
    try {
      parsed = json::parse(value);
    } catch (const json::parse_error&) {
      parsed = value;
    }
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
      const auto dot = path.find('.', start);
      const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (key.empty()) throw ConfigError(path, "empty key in override path");
      if (!node->is_object()) throw ConfigError(path, "override descends into a non-object");
      if (dot == std::string::npos) {
        (*node)[key] = parsed;
        break;
      }
      if (!node->contains(key)) (*node)[key] = json::object();
      node = &(*node)[key];
      start = dot + 1;
    }
  }
  return doc.dump(2);
}

}  // namespace qudit
