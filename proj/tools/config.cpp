#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/core.h>
#include <yaml-cpp/yaml.h>

#include "nvmag/errors.hpp"

namespace nvmag::cli {

namespace {

std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

// Reads fields out of a YAML mapping and remembers which keys were used so
// that leftovers can be reported.
class YamlReader {
 public:
  YamlReader(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_.IsDefined() && !node_.IsNull() && !node_.IsMap())
      throw ConfigError(fmt::format("'{}' must be a mapping", path_.empty() ? "<root>" : path_));
  }

  template <class T>
  void scalar(const char* key, T& value) {
    known_.insert(key);
    if (auto n = child(key)) value = convert<T>(*n, join_path(path_, key));
  }

  template <class T>
  void optional_scalar(const char* key, std::optional<T>& value) {
    known_.insert(key);
    if (auto n = child(key)) value = convert<T>(*n, join_path(path_, key));
  }

  void number_list(const char* key, std::vector<double>& values) {
    known_.insert(key);
    const auto n = child(key);
    if (!n) return;
    const auto where = join_path(path_, key);
    if (!n->IsSequence()) throw ConfigError(fmt::format("'{}' must be a list of numbers", where));
    values.clear();
    for (std::size_t i = 0; i < n->size(); ++i)
      values.push_back(convert<double>((*n)[i], fmt::format("{}[{}]", where, i)));
  }

  template <class T, class Fn>
  void section(const char* key, T& value, Fn&& describe) {
    known_.insert(key);
    YamlReader sub(child(key).value_or(YAML::Node()), join_path(path_, key));
    describe(sub, value);
    sub.finish();
  }

  template <class T, class Fn>
  void optional_section(const char* key, std::optional<T>& value, Fn&& describe) {
    known_.insert(key);
    const auto n = child(key);
    if (!n) return;
    value.emplace();
    YamlReader sub(*n, join_path(path_, key));
    describe(sub, *value);
    sub.finish();
  }

  template <class T, class Fn>
  void list(const char* key, std::vector<T>& values, Fn&& describe) {
    known_.insert(key);
    const auto n = child(key);
    if (!n) return;
    const auto where = join_path(path_, key);
    if (!n->IsSequence()) throw ConfigError(fmt::format("'{}' must be a list", where));
    values.clear();
    for (std::size_t i = 0; i < n->size(); ++i) {
      YamlReader sub((*n)[i], fmt::format("{}[{}]", where, i));
      T item{};
      describe(sub, item);
      sub.finish();
      values.push_back(item);
    }
  }

  void finish() const {
    if (!node_.IsDefined() || node_.IsNull()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!known_.count(key)) throw ConfigError(fmt::format("unknown key '{}'", join_path(path_, key)));
    }
  }

 private:
  // Present and non-null child, if any.
  std::optional<YAML::Node> child(const char* key) const {
    if (!node_.IsDefined() || node_.IsNull()) return std::nullopt;
    const YAML::Node n = node_[key];
    if (!n.IsDefined() || n.IsNull()) return std::nullopt;
    return n;
  }

  template <class T>
  static T convert(const YAML::Node& n, const std::string& where) {
    if (!n.IsScalar()) throw ConfigError(fmt::format("'{}' must be a scalar", where));
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(fmt::format("'{}' has an invalid value '{}'", where, n.Scalar()));
    }
  }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> known_;
};

// Mirrors YamlReader, emitting JSON in declaration order.
class JsonWriter {
 public:
  explicit JsonWriter(Json& out) : out_(out) { out_ = Json::object(); }

  template <class T>
  void scalar(const char* key, const T& value) {
    out_[key] = value;
  }

  template <class T>
  void optional_scalar(const char* key, const std::optional<T>& value) {
    out_[key] = value ? Json(*value) : Json(nullptr);
  }

  void number_list(const char* key, const std::vector<double>& values) { out_[key] = values; }

  template <class T, class Fn>
  void section(const char* key, const T& value, Fn&& describe) {
    Json sub;
    JsonWriter w(sub);
    describe(w, const_cast<T&>(value));
    out_[key] = std::move(sub);
  }

  template <class T, class Fn>
  void optional_section(const char* key, const std::optional<T>& value, Fn&& describe) {
    if (!value) {
      out_[key] = nullptr;
      return;
    }
    section(key, *value, describe);
  }

  template <class T, class Fn>
  void list(const char* key, const std::vector<T>& values, Fn&& describe) {
    Json arr = Json::array();
    for (const auto& v : values) {
      Json sub;
      JsonWriter w(sub);
      describe(w, const_cast<T&>(v));
      arr.push_back(std::move(sub));
    }
    out_[key] = std::move(arr);
  }

 private:
  Json& out_;
};

// The one description of the grammar, walked by both the reader and the writer.
template <class V>
void describe(V& v, RunConfig& c) {
  v.scalar("sample_rate_hz", c.sample_rate_hz);
  v.scalar("duration_s", c.duration_s);
  v.section("sensor", c.sensor, [](auto& s, nv::NvSensorParams& p) {
    s.scalar("d0_hz", p.d0_hz);
    s.scalar("temp_coeff_hz_per_k", p.temp_coeff_hz_per_k);
    s.scalar("gamma_hz_per_t", p.gamma_hz_per_t);
    s.scalar("linewidth_hz", p.linewidth_hz);
    s.scalar("contrast", p.contrast);
    s.scalar("hyperfine_hz", p.hyperfine_hz);
    s.scalar("photovoltage_v", p.photovoltage_v);
    s.scalar("detector_gain_v_per_w", p.detector_gain_v_per_w);
    s.scalar("wavelength_m", p.wavelength_m);
  });
  v.section("field", c, [](auto& s, RunConfig& rc) {
    auto& sc = rc.scenario;
    s.scalar("bias_t", sc.bias_field_t);
    s.scalar("alpha_t_per_a", sc.alpha_t_per_a);
    s.scalar("projection_cos", sc.projection_cos);
    s.list("current_steps", sc.current_waveform, [](auto& e, chain::CurrentStep& st) {
      e.scalar("start_s", st.start_s);
      e.scalar("current_a", st.current_a);
    });
    s.list("tones", sc.tones, [](auto& e, chain::ToneBurst& t) {
      e.scalar("start_s", t.start_s);
      e.scalar("duration_s", t.duration_s);
      e.scalar("freq_hz", t.freq_hz);
      e.scalar("amplitude_t", t.amplitude_t);
    });
    s.optional_scalar("coil_distance_m", rc.coil_distance_m);
  });
  v.section("coil", c.coil, [](auto& s, channel::CoilSpec& k) {
    s.scalar("turns", k.turns);
    s.scalar("current_a", k.current_a);
    s.scalar("radius_m", k.radius_m);
    s.scalar("drive_freq_hz", k.drive_freq_hz);
    s.scalar("axis_offset_m", k.axis_offset_m);
  });
  v.section("noise", c.scenario.noise, [](auto& s, channel::NoiseSpec& n) {
    s.scalar("white_asd_t_sqrthz", n.white_asd);
    s.scalar("flicker_asd_at_1hz_t_sqrthz", n.flicker_asd_at_1hz);
    s.scalar("random_walk_asd_at_1hz_t_sqrthz", n.random_walk_asd_at_1hz);
    s.list("mains", n.mains, [](auto& e, channel::MainsLine& m) {
      e.scalar("freq_hz", m.freq_hz);
      e.scalar("amplitude_t", m.amplitude_t);
    });
    s.scalar("seed", n.seed);
  });
  v.optional_section("lockin", c.lockin, [](auto& s, LockinConfig& l) {
    s.scalar("tau_s", l.tau_s);
    s.scalar("poles", l.poles);
  });
  v.optional_scalar("decimate_factor", c.decimate_factor);
  v.section("odmr", c.odmr, [](auto& s, OdmrConfig& o) {
    s.scalar("start_hz", o.start_hz);
    s.scalar("stop_hz", o.stop_hz);
    s.scalar("points", o.points);
    s.scalar("delta_t_k", o.delta_t_k);
  });
  v.section("sense", c.sense, [](auto& s, SenseConfig& o) {
    s.scalar("settle_s", o.settle_s);
    s.scalar("low_current_max_a", o.low_current_max_a);
  });
  v.section("psd", c.psd, [](auto& s, PsdConfig& p) {
    s.scalar("segment_len", p.segment_len);
    s.scalar("overlap", p.overlap);
    s.scalar("band_lo_hz", p.band_lo_hz);
    s.scalar("band_hi_hz", p.band_hi_hz);
    s.number_list("exclude_hz", p.exclude_hz);
    s.scalar("exclude_half_width_hz", p.exclude_half_width_hz);
  });
  v.section("allan", c.allan, [](auto& s, AllanConfig& a) {
    s.scalar("taus_per_decade", a.taus_per_decade);
    s.scalar("slope_lo_s", a.slope_lo_s);
    s.scalar("slope_hi_s", a.slope_hi_s);
  });
  v.section("fit", c.fit, [](auto& s, FitConfig& f) {
    s.number_list("distances_m", f.distances_m);
    s.scalar("window_s", f.window_s);
    s.scalar("position_sigma_m", f.position_sigma_m);
    s.scalar("noise_band_half_width_hz", f.noise_band_half_width_hz);
  });
  v.section("modem", c.modem, [](auto& s, ModemConfig& m) {
    s.scalar("message", m.message);
    s.number_list("tones_hz", m.tones_hz);
    s.scalar("symbol_window_s", m.symbol_window_s);
    s.scalar("guard_s", m.guard_s);
    s.optional_scalar("threshold_t", m.threshold_t);
    s.optional_scalar("threshold_snr", m.threshold_snr);
    s.scalar("distance_m", m.distance_m);
    s.scalar("lead_s", m.lead_s);
    s.scalar("tail_s", m.tail_s);
  });
}

void check(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

void validate(const RunConfig& c) {
  check(c.sample_rate_hz > 0.0, "sample_rate_hz must be positive");
  check(c.duration_s > 0.0, "duration_s must be positive");
  check(c.odmr.points >= 3, "odmr.points must be at least 3");
  check(c.odmr.stop_hz > c.odmr.start_hz, "odmr.stop_hz must exceed odmr.start_hz");
  check(c.sense.settle_s >= 0.0, "sense.settle_s must be >= 0");
  check(c.psd.segment_len >= 16, "psd.segment_len must be at least 16");
  check(c.psd.band_hi_hz > c.psd.band_lo_hz, "psd.band_hi_hz must exceed psd.band_lo_hz");
  check(c.allan.taus_per_decade >= 1, "allan.taus_per_decade must be >= 1");
  check(c.fit.window_s > 0.0, "fit.window_s must be positive");
  check(c.fit.position_sigma_m >= 0.0, "fit.position_sigma_m must be >= 0");
  check(!(c.modem.threshold_t && c.modem.threshold_snr), "modem.threshold_t and modem.threshold_snr are exclusive");
  check(!c.modem.threshold_snr || *c.modem.threshold_snr > 0.0, "modem.threshold_snr must be positive");
  check(c.modem.distance_m >= 0.0, "modem.distance_m must be >= 0");
  check(c.modem.lead_s >= 0.0 && c.modem.tail_s >= 0.0, "modem.lead_s and modem.tail_s must be >= 0");
  if (c.decimate_factor) check(*c.decimate_factor >= 1, "decimate_factor must be >= 1");
  try {
    c.scenario.validate();
    c.coil.validate();
    if (c.lockin && !(c.lockin->tau_s > 0.0 && c.lockin->poles >= 1))
      throw std::invalid_argument("lockin needs tau_s > 0 and poles >= 1");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

RunConfig default_config() { return RunConfig{}; }

RunConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("scenario is not valid YAML: {}", e.what()));
  }
  RunConfig config;
  YamlReader reader(root, "");
  describe(reader, config);
  reader.finish();
  if (config.coil_distance_m) config.scenario.coil = chain::CoilLink{config.coil, *config.coil_distance_m};
  validate(config);
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read scenario file '{}'", path));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

Json config_to_json(const RunConfig& config) {
  Json out;
  JsonWriter writer(out);
  describe(writer, const_cast<RunConfig&>(config));
  return out;
}

modem::TonePlan tone_plan(const RunConfig& config) {
  modem::TonePlan plan;
  plan.tone_freqs_hz = config.modem.tones_hz;
  plan.symbol_window_s = config.modem.symbol_window_s;
  plan.guard_s = config.modem.guard_s;
  plan.threshold_t = config.modem.threshold_t.value_or(0.0);
  return plan;
}

}  // namespace nvmag::cli
