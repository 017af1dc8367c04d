#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "nvmag/field_channel.hpp"
#include "nvmag/modem.hpp"
#include "nvmag/nv_core.hpp"
#include "nvmag/signal_chain.hpp"

// Scenario file grammar shared by every subcommand. Units live in the key
// names; a key the grammar does not know is a ConfigError.
namespace nvmag::cli {

using Json = nlohmann::ordered_json;

struct LockinConfig {
  double tau_s = 1e-3;
  int poles = 4;
};

struct OdmrConfig {
  double start_hz = 2.82e9;
  double stop_hz = 2.92e9;
  std::size_t points = 20001;
  double delta_t_k = 0.0;
};

struct SenseConfig {
  double settle_s = 0.5;  // dropped from the start of every current step
  double low_current_max_a = 1.0;  // calibration rows up to here set alpha and sigma
};

struct PsdConfig {
  std::size_t segment_len = 4096;
  double overlap = 0.5;
  double band_lo_hz = 2.0;
  double band_hi_hz = 20.0;
  std::vector<double> exclude_hz;
  double exclude_half_width_hz = 2.0;
};

struct AllanConfig {
  int taus_per_decade = 10;
  double slope_lo_s = 0.0;  // 0 means the shortest tau
  double slope_hi_s = 0.0;  // 0 means the longest tau
};

struct FitConfig {
  std::vector<double> distances_m{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  double window_s = 32.0;
  double position_sigma_m = 0.0;
  double noise_band_half_width_hz = 20.0;
};

struct ModemConfig {
  std::string message = "Test";
  std::vector<double> tones_hz = modem::TonePlan::default_tones();
  double symbol_window_s = 1.0;
  double guard_s = 0.0;
  std::optional<double> threshold_t;
  std::optional<double> threshold_snr;
  double distance_m = 2.0;
  double lead_s = 0.0;
  double tail_s = 0.5;
};

struct RunConfig {
  double sample_rate_hz = 1000.0;
  double duration_s = 10.0;
  nv::NvSensorParams sensor;
  chain::Scenario scenario;            // field, coil drive and noise
  channel::CoilSpec coil;              // transmitter used by fit, tx and rx
  std::optional<double> coil_distance_m;  // continuous coil drive in the scenario
  std::optional<LockinConfig> lockin;
  std::optional<std::size_t> decimate_factor;
  OdmrConfig odmr;
  SenseConfig sense;
  PsdConfig psd;
  AllanConfig allan;
  FitConfig fit;
  ModemConfig modem;
};

// Parses and validates; every failure is a ConfigError naming the key.
RunConfig parse_config(const std::string& yaml_text);
RunConfig load_config(const std::string& path);
RunConfig default_config();

// The resolved configuration in the same shape as the scenario file.
Json config_to_json(const RunConfig& config);

// Tone plan for the modem section; threshold left at zero when the
// scenario asks for an SNR-relative threshold.
modem::TonePlan tone_plan(const RunConfig& config);

}  // namespace nvmag::cli
