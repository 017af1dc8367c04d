#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nvmag/errors.hpp"
#include "nvmag/exec.hpp"
#include "nvmag/hamming.hpp"
#include "nvmag/time_series.hpp"

// Parallel multi-tone FSK link: one ASCII character per symbol window,
// eleven tones carrying the 11-bit shortened Hamming codeword, preceded by a
// one-tone-per-window sweep used for receiver alignment.
namespace nvmag::modem {

class NoPreambleFound : public AnalysisError {
 public:
  explicit NoPreambleFound(const std::string& what) : AnalysisError(what) {}
};

struct TonePlan {
  std::vector<double> tone_freqs_hz = default_tones();
  double symbol_window_s = 1.0;
  double threshold_t = 0.0;  // tone amplitude above which a bit reads as 1
  double guard_s = 0.0;      // silence after every window

  double slot_s() const { return symbol_window_s + guard_s; }

  // Eleven strictly increasing tones spaced >= 2/symbol_window, window > 0,
  // guard >= 0, and every tone below fs/2. Throws std::invalid_argument.
  void validate(double fs_hz) const;

  // 100 Hz to 149 Hz in 4.9 Hz steps: inside 100-150 Hz while keeping clear
  // of the 150 Hz mains harmonic.
  static std::vector<double> default_tones();
};

// Sweep: tone k alone during window k, k = 0..10.
FieldTimeSeries preamble_waveform(const TonePlan& plan, double fs_hz, double amplitude_t);

// Preamble followed by one window per mask, every set tone playing at
// `amplitude_t` with zero phase at the window start.
FieldTimeSeries modulate_masks(std::span<const ToneMask> masks, const TonePlan& plan, double fs_hz,
                               double amplitude_t);

// Preamble followed by one window per character. Duration is
// (11 + message.size()) * slot. Throws std::invalid_argument for non-ASCII.
FieldTimeSeries modulate(std::string_view message, const TonePlan& plan, double fs_hz, double amplitude_t);

/// Finds the preamble start, in absolute series time.
///
/// Candidate starts are taken every symbol_window/16 from the beginning of
/// the series. A candidate is scored by the mean over the eleven preamble
/// windows of (amplitude of the expected tone - largest other tone
/// amplitude); the best-scoring candidate wins, ties going to the earliest.
/// Throws NoPreambleFound when the series cannot hold a preamble or when
/// the best score does not exceed plan.threshold_t.
double sync_offset(const FieldTimeSeries& x, const TonePlan& plan, Exec exec = Exec::Parallel);

// Sync score of every candidate start (index j starts j * window/16 after
// t0). Exposed for diagnostics and for the serial/parallel kernel checks.
std::vector<double> sync_scores(const FieldTimeSeries& x, const TonePlan& plan, Exec exec = Exec::Parallel);

struct WaterfallRow {
  std::size_t window_index;  // data window number after the preamble
  ToneMask bits;
  std::optional<char> decoded_char;  // empty when the syndrome is uncorrectable
  bool corrected;
  std::array<double, kSymbolBits> amplitudes_t;
};

/// Decoded rows in reception order (window indices strictly increasing).
class WaterfallHistory {
 public:
  void push(WaterfallRow row);  // throws std::invalid_argument if out of order

  std::span<const WaterfallRow> rows() const { return rows_; }
  std::vector<WaterfallRow> newest_first() const;
  bool empty() const { return rows_.empty(); }
  std::size_t size() const { return rows_.size(); }

  // Decoded characters in order; uncorrectable rows read '?', and trailing
  // NULs (silent windows after the message) are dropped.
  std::string message() const;

 private:
  std::vector<WaterfallRow> rows_;
};

// Bits and decoded symbol of one window of samples.
WaterfallRow decode_window(std::span<const double> window, double fs_hz, const TonePlan& plan,
                           std::size_t window_index);

/// Decodes every complete data window after a preamble starting at
/// `offset_s` (absolute time, as returned by sync_offset).
WaterfallHistory demodulate(const FieldTimeSeries& x, const TonePlan& plan, double offset_s);

/// Incremental counterpart of demodulate for a live sample stream.
///
/// Single consumer: push() must not be called concurrently. Rows are
/// emitted as soon as their window is complete and match what demodulate
/// returns for the concatenated stream.
class StreamingReceiver {
 public:
  StreamingReceiver(TonePlan plan, double fs_hz, double stream_t0_s, double offset_s);

  std::vector<WaterfallRow> push(std::span<const double> samples);
  const WaterfallHistory& history() const { return history_; }

 private:
  std::size_t window_start(std::size_t w) const;

  TonePlan plan_;
  double fs_;
  double t0_;
  double offset_;
  std::size_t window_len_;
  std::size_t next_window_ = 0;
  std::size_t buffer_base_ = 0;  // absolute sample index of buffer_[0]
  std::vector<double> buffer_;
  WaterfallHistory history_;
};

}  // namespace nvmag::modem
