#include "nvmag/modem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

#include "nvmag/analysis.hpp"
#include "nvmag/constants.hpp"

namespace nvmag::modem {

using constants::kTwoPi;

namespace {

constexpr int kSyncSubdivisions = 16;

std::size_t samples_for(double seconds, double fs) {
  return static_cast<std::size_t>(std::llround(seconds * fs));
}

}  // namespace

std::vector<double> TonePlan::default_tones() {
  std::vector<double> tones(kSymbolBits);
  for (std::size_t k = 0; k < kSymbolBits; ++k) tones[k] = 100.0 + 4.9 * static_cast<double>(k);
  return tones;
}

void TonePlan::validate(double fs_hz) const {
  if (tone_freqs_hz.size() != kSymbolBits)
    throw std::invalid_argument(fmt::format("tone plan needs {} tones, got {}", kSymbolBits, tone_freqs_hz.size()));
  if (!(symbol_window_s > 0.0)) throw std::invalid_argument("symbol window must be positive");
  if (!(guard_s >= 0.0)) throw std::invalid_argument("guard interval must be >= 0");
  if (!(threshold_t >= 0.0)) throw std::invalid_argument("threshold must be >= 0");
  const double min_spacing = 2.0 / symbol_window_s;
  for (std::size_t k = 0; k < tone_freqs_hz.size(); ++k) {
    if (!(tone_freqs_hz[k] > 0.0)) throw std::invalid_argument("tone frequencies must be positive");
    if (tone_freqs_hz[k] >= fs_hz / 2.0)
      throw std::invalid_argument(fmt::format("tone {} Hz is not below fs/2 = {} Hz", tone_freqs_hz[k], fs_hz / 2.0));
    if (k > 0 && tone_freqs_hz[k] - tone_freqs_hz[k - 1] < min_spacing * (1.0 - 1e-12))
      throw std::invalid_argument(
          fmt::format("tones {} and {} Hz are closer than 2/window = {} Hz", tone_freqs_hz[k - 1],
                      tone_freqs_hz[k], min_spacing));
  }
}

FieldTimeSeries modulate_masks(std::span<const ToneMask> masks, const TonePlan& plan, double fs_hz,
                               double amplitude_t) {
  plan.validate(fs_hz);
  const std::size_t windows = kSymbolBits + masks.size();
  const std::size_t total = samples_for(static_cast<double>(windows) * plan.slot_s(), fs_hz);
  const std::size_t window_len = samples_for(plan.symbol_window_s, fs_hz);
  std::vector<double> out(total, 0.0);

  for (std::size_t w = 0; w < windows; ++w) {
    ToneMask active{};
    if (w < kSymbolBits)
      active[w] = true;
    else
      active = masks[w - kSymbolBits];
    const std::size_t start = samples_for(static_cast<double>(w) * plan.slot_s(), fs_hz);
    const std::size_t len = std::min(window_len, total - std::min(total, start));
    for (std::size_t k = 0; k < kSymbolBits; ++k) {
      if (!active[k]) continue;
      const double step = kTwoPi * plan.tone_freqs_hz[k] / fs_hz;
      for (std::size_t i = 0; i < len; ++i)
        out[start + i] += amplitude_t * std::sin(step * static_cast<double>(i));
    }
  }
  return FieldTimeSeries(fs_hz, std::move(out));
}

FieldTimeSeries preamble_waveform(const TonePlan& plan, double fs_hz, double amplitude_t) {
  return modulate_masks({}, plan, fs_hz, amplitude_t);
}

FieldTimeSeries modulate(std::string_view message, const TonePlan& plan, double fs_hz, double amplitude_t) {
  std::vector<ToneMask> masks;
  masks.reserve(message.size());
  for (char ch : message) masks.push_back(symbol_encode(ch).tone_mask);
  return modulate_masks(masks, plan, fs_hz, amplitude_t);
}

namespace {

// cos/sin tables of every tone over one window, phase zero at the window start.
struct ToneTables {
  std::size_t len;
  std::vector<double> cos_tab;  // kSymbolBits * len
  std::vector<double> sin_tab;

  ToneTables(const TonePlan& plan, double fs, std::size_t window_len)
      : len(window_len), cos_tab(kSymbolBits * window_len), sin_tab(kSymbolBits * window_len) {
    for (std::size_t k = 0; k < kSymbolBits; ++k) {
      const double w = kTwoPi * plan.tone_freqs_hz[k] / fs;
      for (std::size_t i = 0; i < len; ++i) {
        cos_tab[k * len + i] = std::cos(w * static_cast<double>(i));
        sin_tab[k * len + i] = std::sin(w * static_cast<double>(i));
      }
    }
  }

  double amplitude(std::span<const double> x, std::size_t tone) const {
    const double* c = cos_tab.data() + tone * len;
    const double* s = sin_tab.data() + tone * len;
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      re += x[i] * c[i];
      im -= x[i] * s[i];
    }
    return 2.0 * std::hypot(re, im) / static_cast<double>(len);
  }
};

struct SyncGeometry {
  std::size_t window_len;
  std::size_t candidates;
  std::array<std::size_t, kSymbolBits> window_offsets;  // relative to the candidate start
  double step_s;

  std::size_t candidate_start(std::size_t j, double fs) const {
    return samples_for(static_cast<double>(j) * step_s, fs);
  }
};

SyncGeometry sync_geometry(const FieldTimeSeries& x, const TonePlan& plan) {
  SyncGeometry g{};
  g.window_len = samples_for(plan.symbol_window_s, x.fs());
  g.step_s = plan.symbol_window_s / kSyncSubdivisions;
  for (std::size_t k = 0; k < kSymbolBits; ++k)
    g.window_offsets[k] = samples_for(static_cast<double>(k) * plan.slot_s(), x.fs());
  const std::size_t span = g.window_offsets.back() + g.window_len;
  g.candidates = 0;
  while (g.candidate_start(g.candidates, x.fs()) + span <= x.size()) ++g.candidates;
  return g;
}

double candidate_score(std::span<const double> samples, std::size_t start, const SyncGeometry& g,
                       const ToneTables& tables) {
  double total = 0.0;
  std::array<double, kSymbolBits> amps{};
  for (std::size_t k = 0; k < kSymbolBits; ++k) {
    const auto window = samples.subspan(start + g.window_offsets[k], g.window_len);
    for (std::size_t t = 0; t < kSymbolBits; ++t) amps[t] = tables.amplitude(window, t);
    double others = 0.0;
    for (std::size_t t = 0; t < kSymbolBits; ++t)
      if (t != k) others = std::max(others, amps[t]);
    total += amps[k] - others;
  }
  return total / static_cast<double>(kSymbolBits);
}

}  // namespace

std::vector<double> sync_scores(const FieldTimeSeries& x, const TonePlan& plan, Exec exec) {
  plan.validate(x.fs());
  const auto g = sync_geometry(x, plan);
  std::vector<double> scores(g.candidates);
  if (g.candidates == 0) return scores;
  const ToneTables tables(plan, x.fs(), g.window_len);
  const auto samples = x.samples();

  if (exec == Exec::Serial) {
    for (std::size_t j = 0; j < g.candidates; ++j)
      scores[j] = candidate_score(samples, g.candidate_start(j, x.fs()), g, tables);
  } else {
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(g.candidates); ++j) {
      const auto ju = static_cast<std::size_t>(j);
      scores[ju] = candidate_score(samples, g.candidate_start(ju, x.fs()), g, tables);
    }
  }
  return scores;
}

double sync_offset(const FieldTimeSeries& x, const TonePlan& plan, Exec exec) {
  const auto scores = sync_scores(x, plan, exec);
  if (scores.empty()) throw NoPreambleFound("no preamble found: series is shorter than the preamble sweep");
  const auto best = std::max_element(scores.begin(), scores.end());  // first maximum
  if (!(*best > plan.threshold_t))
    throw NoPreambleFound(fmt::format("no preamble found: best sweep contrast {:.3g} T does not exceed threshold {:.3g} T",
                                      *best, plan.threshold_t));
  const auto j = static_cast<std::size_t>(best - scores.begin());
  return x.t0() + static_cast<double>(j) * plan.symbol_window_s / kSyncSubdivisions;
}

void WaterfallHistory::push(WaterfallRow row) {
  if (!rows_.empty() && row.window_index <= rows_.back().window_index)
    throw std::invalid_argument("waterfall rows must arrive with increasing window index");
  rows_.push_back(row);
}

std::vector<WaterfallRow> WaterfallHistory::newest_first() const {
  return {rows_.rbegin(), rows_.rend()};
}

std::string WaterfallHistory::message() const {
  std::string msg;
  for (const auto& row : rows_) msg.push_back(row.decoded_char.value_or('?'));
  while (!msg.empty() && msg.back() == '\0') msg.pop_back();
  return msg;
}

WaterfallRow decode_window(std::span<const double> window, double fs_hz, const TonePlan& plan,
                           std::size_t window_index) {
  WaterfallRow row{};
  row.window_index = window_index;
  for (std::size_t k = 0; k < kSymbolBits; ++k) {
    row.amplitudes_t[k] = analysis::tone_amplitude_at(window, fs_hz, plan.tone_freqs_hz[k]);
    row.bits[k] = row.amplitudes_t[k] > plan.threshold_t;
  }
  const auto decoded = symbol_decode(row.bits);
  row.corrected = decoded.corrected;
  if (!decoded.uncorrectable) row.decoded_char = decoded.ch;
  return row;
}

WaterfallHistory demodulate(const FieldTimeSeries& x, const TonePlan& plan, double offset_s) {
  StreamingReceiver rx(plan, x.fs(), x.t0(), offset_s);
  rx.push(x.samples());
  return rx.history();
}

StreamingReceiver::StreamingReceiver(TonePlan plan, double fs_hz, double stream_t0_s, double offset_s)
    : plan_(std::move(plan)), fs_(fs_hz), t0_(stream_t0_s), offset_(offset_s) {
  plan_.validate(fs_);
  if (offset_ < t0_ - 0.5 / fs_) throw std::invalid_argument("preamble offset precedes the stream start");
  window_len_ = samples_for(plan_.symbol_window_s, fs_);
}

std::size_t StreamingReceiver::window_start(std::size_t w) const {
  const double t = offset_ + static_cast<double>(kSymbolBits + w) * plan_.slot_s();
  return samples_for(t - t0_, fs_);
}

std::vector<WaterfallRow> StreamingReceiver::push(std::span<const double> samples) {
  buffer_.insert(buffer_.end(), samples.begin(), samples.end());
  std::vector<WaterfallRow> emitted;
  for (;;) {
    const std::size_t start = window_start(next_window_);
    if (start + window_len_ > buffer_base_ + buffer_.size()) break;
    const auto window = std::span<const double>(buffer_).subspan(start - buffer_base_, window_len_);
    auto row = decode_window(window, fs_, plan_, next_window_);
    history_.push(row);
    emitted.push_back(row);
    ++next_window_;
  }
  // Drop samples that no future window can reach.
  const std::size_t keep_from = std::min(window_start(next_window_), buffer_base_ + buffer_.size());
  if (keep_from > buffer_base_) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(keep_from - buffer_base_));
    buffer_base_ = keep_from;
  }
  return emitted;
}

}  // namespace nvmag::modem
