#include <doctest.h>

#include "qudit/config.hpp"
#include "qudit/error.hpp"

using namespace qudit;

namespace {

std::string key_path_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.key_path();
  }
  return "<accepted>";
}

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "<accepted>";
}

const char* kMinimal = R"({"system": {"type": "single_ion", "site1": {"D_K": 0.1}}})";

}  // namespace

TEST_CASE("bundled presets") {
  CHECK(preset_names() == std::vector<std::string>{"gd2", "gdlu", "lagd"});
  const RunConfig gd2 = parse_config(preset_text("gd2"));
  const auto& d = std::get<DimerParams>(gd2.system);
  CHECK(d.j_exchange_k == -0.02);
  CHECK(d.site1 == SingleIonParams{0.096, -0.032, 1.99, 3.5});
  CHECK(d.site2 == SingleIonParams{0.115, 0.038, 1.99, 3.5});
  CHECK(gd2.name == "gd2");
  const RunConfig lagd = parse_config(preset_text("lagd"));
  CHECK(std::get<SingleIonParams>(lagd.system) == SingleIonParams{0.096, -0.032, 1.99, 3.5});
  const RunConfig gdlu = parse_config(preset_text("gdlu"));
  CHECK(std::get<SingleIonParams>(gdlu.system) == SingleIonParams{0.115, 0.038, 1.99, 3.5});
  CHECK_THROWS_AS(preset_text("gd3"), ConfigError);
}

TEST_CASE("serialisation round trip") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const RunConfig a = parse_config(preset_text(name));
    const std::string text = serialize_config(a);
    const RunConfig b = parse_config(text);
    CHECK(a == b);
    CHECK(serialize_config(b) == text);
  }
  RunConfig odd = parse_config(kMinimal);
  odd.field_direction = Vec3(0.1, 0.7, 1.0 / 3.0);
  odd.spectrum.frequency_ghz = 33.33;
  odd.ensemble.seed = 18446744073709551615ULL;
  CHECK(parse_config(serialize_config(odd)) == odd);
}

TEST_CASE("defaults fill missing blocks") {
  const RunConfig c = parse_config(kMinimal);
  CHECK(c.name == "custom");
  CHECK(c.spectrum == SpectrumSettings{});
  CHECK(c.control.threshold_mhz_per_mt == 0.2);
  CHECK(c.thermal.probe_field_t == 0.1);
  CHECK(std::get<SingleIonParams>(c.system).g == 1.99);
}

TEST_CASE("strict keys") {
  CHECK(message_of(R"({"system": {"type": "single_ion", "site1": {"D": 0.096}}})").find("missing unit suffix") !=
        std::string::npos);
  CHECK(key_path_of(R"({"system": {"type": "single_ion", "site1": {"D": 0.096}}})") == "system.site1.D");
  CHECK(message_of(R"({"system": {"type": "single_ion", "site1": {"D_mK": 96}}})").find("unsupported unit") !=
        std::string::npos);
  CHECK(key_path_of(R"({"system": {"type": "single_ion", "site1": {}}, "spectrometer": {"nu": 9.8}})") ==
        "spectrometer.nu");
  CHECK(key_path_of(R"({"system": {"type": "single_ion", "site1": {}}, "colour": 1})") == "colour");
  CHECK(key_path_of(R"({"field": {"B_T": 1}})") == "system");
  CHECK(key_path_of(R"({"system": {"type": "trimer", "site1": {}}})") == "system.type");
}

TEST_CASE("range and type errors carry the key path") {
  CHECK(key_path_of(R"({"system": {"type": "single_ion", "site1": {"s": 1.25}}})") == "system.site1");
  CHECK(key_path_of(R"({"system": {"type": "single_ion", "site1": {"g": -2}}})") == "system.site1.g");
  CHECK(key_path_of(R"({"system": {"type": "single_ion", "site1": {}}, "ensemble": {"orientations": 0}})") ==
        "ensemble.orientations");
  CHECK(key_path_of(R"({"system": {"type": "single_ion", "site1": {}}, "ensemble": {"orientations": 2.5}})") ==
        "ensemble.orientations");
  CHECK(key_path_of(R"({"system": {"type": "single_ion", "site1": {}}, "field": {"direction": [0, 0, 0]}})") ==
        "field.direction");
  CHECK(key_path_of(R"({"system": {"type": "single_ion", "site1": {}}, "spectrometer": {"B_min_T": 2}})") ==
        "spectrometer.B_max_T");
  CHECK(key_path_of(R"({"system": {"type": "single_ion", "site1": {}}, "thermal": {"spacing": "cubic"}})") ==
        "thermal.spacing");
  CHECK(key_path_of(R"({"system": {"type": "single_ion", "site1": {}}, "seed": -1})") == "seed");
  CHECK(key_path_of(R"({"system": )") == "(root)");
  CHECK(key_path_of(R"({"system": {"type": "dimer", "site1": {}}})") == "system.site2");
}

TEST_CASE("overrides") {
  const std::string text = apply_overrides(preset_text("gd2"), {"system.J_K=0", "name=gd2_j0", "field.B_T=10",
                                                                "control.drive_direction=[0,0,1]", "new.block.x=1"});
  CHECK_THROWS_AS(parse_config(text), ConfigError);
  const RunConfig c = parse_config(apply_overrides(preset_text("gd2"), {"system.J_K=0", "name=gd2_j0", "field.B_T=10"}));
  CHECK(std::get<DimerParams>(c.system).j_exchange_k == 0.0);
  CHECK(c.name == "gd2_j0");
  CHECK(c.field_t == 10.0);
  CHECK_THROWS_AS(apply_overrides(preset_text("gd2"), {"novalue"}), ConfigError);
  CHECK_THROWS_AS(apply_overrides(preset_text("gd2"), {"name.sub=1"}), ConfigError);
  CHECK_THROWS_AS(apply_overrides(preset_text("gd2"), {"a..b=1"}), ConfigError);
}

TEST_CASE("configuration hash") {
  const RunConfig a = parse_config(preset_text("lagd"));
  RunConfig b = a;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b.ensemble.threads = 8;
  CHECK(config_hash(a) == config_hash(b));
  b.ensemble.seed = 1;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}
